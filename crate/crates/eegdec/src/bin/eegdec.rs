//! Command-line interface: synthesize paradigm recordings, preprocess them
//! into epochs, train or cross-validate the four pipelines, compare result
//! tables with the statistical battery, and run the bundled fixture checks.
//!
//! Exit codes: 0 success, 1 validation error, 2 numeric failure.

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::path::PathBuf;

use eegdec::adnn::{self, AdnnConfig, ModelKind, TrainHyper};
use eegdec::error::{EegError, Result};
use eegdec::eval::{
    build_report, cross_validate, parse_result_table, run_test_battery, EvalOptions, Pipeline,
    ReportFormat, ResultTable,
};
use eegdec::features::{band_powers, csp_fit, csp_transform, welch_psd};
use eegdec::io::{read_epochs, read_raw, write_epochs, write_raw};
use eegdec::shallow::{lda_fit, svm_fit};
use eegdec::signal::{
    bandpass_filter, epoch_stream, notch_filter, resample, BANDPASS_HI_HZ, BANDPASS_LO_HZ,
    NOTCH_HZ, NOTCH_Q, WORKING_FS,
};
use eegdec::synth::{generate_schedule, synthesize_recording, ParadigmSchedule, SynthConfig};

#[derive(Parser)]
#[command(
    name = "eegdec",
    about = "Imagined-speech EEG decoding pipelines: synthesis, preprocessing, training, cross-validated evaluation, and statistical comparison"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the experimental-paradigm schedule and synthesize a labeled
    /// surrogate recording
    Synth(SynthArgs),
    /// Notch, band-pass, resample, and epoch a raw recording
    Preprocess(PreprocessArgs),
    /// Fit one pipeline on a full epochs file and save the model
    Train(TrainArgs),
    /// Stratified k-fold cross-validation of one pipeline
    Evaluate(EvaluateArgs),
    /// Statistical comparison of result CSVs (Shapiro-Wilk, Levene, paired
    /// t-tests with Bonferroni correction)
    Compare(CompareArgs),
    /// Run the bundled reference-table oracle suite
    Fixtures(FixturesArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// JSON synthesis configuration (field defaults apply when omitted)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Recording output path (EEGD v1)
    #[arg(long)]
    out: PathBuf,
    /// Schedule output path (JSON)
    #[arg(long)]
    schedule_out: Option<PathBuf>,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config trial count per word
    #[arg(long)]
    trials_per_word: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(default)]
struct SynthFileConfig {
    #[serde(flatten)]
    synth: SynthConfig,
    trials_per_word: Option<usize>,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Input raw recording (EEGD v1)
    #[arg(long = "in")]
    input: PathBuf,
    /// Paradigm schedule (JSON)
    #[arg(long)]
    schedule: PathBuf,
    /// Output epochs file (EEGD v1)
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = NOTCH_HZ)]
    notch_hz: f64,
    #[arg(long, default_value_t = NOTCH_Q)]
    notch_q: f64,
    #[arg(long, default_value_t = BANDPASS_LO_HZ)]
    band_lo: f64,
    #[arg(long, default_value_t = BANDPASS_HI_HZ)]
    band_hi: f64,
    /// Working rate to resample to, in Hz
    #[arg(long, default_value_t = WORKING_FS)]
    rate: f64,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    pipeline: Pipeline,
    /// Epochs file (EEGD v1)
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model directory
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    nn: NnArgs,
}

#[derive(Args, Clone)]
struct NnArgs {
    /// Network training epochs (eegnet/adnn pipelines)
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 16)]
    batch: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    pipeline: Pipeline,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output results CSV
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    nn: NnArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Result CSVs, one or more (columns join on row order)
    #[arg(long, num_args = 1.., required = true)]
    results: Vec<PathBuf>,
    /// Markdown report output path
    #[arg(long)]
    report: PathBuf,
    /// Bonferroni family size (defaults to the number of comparisons)
    #[arg(long)]
    bonferroni_m: Option<usize>,
}

#[derive(Args)]
struct FixturesArgs {
    /// Run every fixture check and report pass/fail per line
    #[arg(long)]
    check: bool,
}

fn run_synth(args: SynthArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<SynthFileConfig>(&text)
                .map_err(|e| EegError::Format(format!("config parse: {e}")))?
        }
        None => SynthFileConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.synth.seed = seed;
    }
    let trials_per_word = args.trials_per_word.or(cfg.trials_per_word).unwrap_or(50);

    let mut schedule = generate_schedule(trials_per_word, cfg.synth.seed)?;
    if cfg.synth.words.len() == schedule.class_names.len() {
        schedule.class_names = cfg.synth.words.clone();
    } else {
        return Err(EegError::InvalidParameter(format!(
            "config lists {} words, the paradigm uses {}",
            cfg.synth.words.len(),
            schedule.class_names.len()
        )));
    }
    let rec = synthesize_recording(&schedule, &cfg.synth)?;
    write_raw(&args.out, &rec)?;
    println!(
        "wrote {} ({} channels × {} samples at {} Hz, {} blank trials)",
        args.out.display(),
        rec.channels(),
        rec.samples(),
        rec.fs,
        schedule.blank_events().count()
    );
    if let Some(schedule_out) = &args.schedule_out {
        let json = serde_json::to_string_pretty(&schedule)
            .map_err(|e| EegError::Format(format!("schedule encode: {e}")))?;
        std::fs::write(schedule_out, json)?;
        println!("wrote {}", schedule_out.display());
    }
    Ok(())
}

fn load_schedule(path: &PathBuf) -> Result<ParadigmSchedule> {
    let text = std::fs::read_to_string(path)?;
    let schedule: ParadigmSchedule = serde_json::from_str(&text)
        .map_err(|e| EegError::Format(format!("schedule parse: {e}")))?;
    schedule.validate()?;
    Ok(schedule)
}

fn run_preprocess(args: PreprocessArgs) -> Result<()> {
    let rec = read_raw(&args.input)?;
    let schedule = load_schedule(&args.schedule)?;
    let rec = notch_filter(&rec, args.notch_hz, args.notch_q)?;
    let rec = bandpass_filter(&rec, args.band_lo, args.band_hi)?;
    let rec = resample(&rec, args.rate)?;
    let epochs = epoch_stream(&rec, &schedule)?;
    write_epochs(&args.out, &epochs)?;
    println!(
        "wrote {} ({} trials × {} channels × {} samples at {} Hz)",
        args.out.display(),
        epochs.trials(),
        epochs.channels(),
        epochs.samples(),
        epochs.fs
    );
    Ok(())
}

fn eval_options(nn: &NnArgs) -> EvalOptions {
    EvalOptions {
        nn_lr: nn.lr,
        nn_batch: nn.batch,
        nn_epochs: nn.epochs,
        ..EvalOptions::default()
    }
}

fn run_train(args: TrainArgs) -> Result<()> {
    let epochs = read_epochs(&args.data)?;
    let options = eval_options(&args.nn);
    std::fs::create_dir_all(&args.out)?;
    match args.pipeline {
        Pipeline::PsdSvm => {
            let mut rows = Vec::new();
            let mut dim = 0;
            for t in 0..epochs.trials() {
                let psd = welch_psd(
                    epochs.data.index_axis(ndarray::Axis(0), t),
                    epochs.fs,
                    options.welch_win_s,
                    options.welch_overlap,
                )?;
                let f = band_powers(&psd, epochs.fs, &options.bands)?;
                dim = f.len();
                rows.extend(f);
            }
            let x = ndarray::Array2::from_shape_vec((epochs.trials(), dim), rows)
                .map_err(|e| EegError::ShapeMismatch(e.to_string()))?;
            let model = svm_fit(
                x.view(),
                &epochs.labels,
                options.svm_c,
                options.svm_epochs,
                args.seed,
            )?;
            model.save(&args.out.join("model.svm"))?;
            println!("wrote {}", args.out.join("model.svm").display());
        }
        Pipeline::CspLda => {
            let csp = csp_fit(&epochs, options.csp_filters_per_class, options.csp_ridge)?;
            let mut rows = Vec::new();
            let mut dim = 0;
            for t in 0..epochs.trials() {
                let f = csp_transform(&csp, epochs.data.index_axis(ndarray::Axis(0), t))?;
                dim = f.len();
                rows.extend(f);
            }
            let x = ndarray::Array2::from_shape_vec((epochs.trials(), dim), rows)
                .map_err(|e| EegError::ShapeMismatch(e.to_string()))?;
            let lda = lda_fit(x.view(), &epochs.labels, options.lda_ridge)?;
            csp.save(&args.out.join("model.csp"))?;
            lda.save(&args.out.join("model.lda"))?;
            println!(
                "wrote {} and {}",
                args.out.join("model.csp").display(),
                args.out.join("model.lda").display()
            );
        }
        Pipeline::Eegnet | Pipeline::Adnn => {
            let kind = if args.pipeline == Pipeline::Eegnet {
                ModelKind::Eegnet
            } else {
                ModelKind::Adnn
            };
            // carve a stratified validation split for checkpoint selection
            let folds = eegdec::eval::stratified_kfold(&epochs.labels, 5, args.seed)?;
            let valid_idx = &folds[0];
            let mut train_idx = Vec::new();
            for fold in folds.iter().skip(1) {
                train_idx.extend_from_slice(fold);
            }
            let train_set = epochs.select(&train_idx)?;
            let valid_set = epochs.select(valid_idx)?;
            let cfg = AdnnConfig {
                channels: epochs.channels(),
                samples: epochs.samples(),
                n_classes: epochs.n_classes(),
                seed: args.seed,
                ..AdnnConfig::default()
            };
            let hyper = TrainHyper {
                lr: args.nn.lr,
                batch: args.nn.batch,
                max_epochs: args.nn.epochs,
                seed: args.seed,
            };
            let model = adnn::train(kind, &cfg, &train_set, &valid_set, &hyper)?;
            model.save(&args.out)?;
            let best = model
                .history
                .iter()
                .map(|h| h.valid_acc)
                .fold(f64::NEG_INFINITY, f64::max);
            println!(
                "wrote {} (best validation accuracy {best:.4})",
                args.out.display()
            );
        }
    }
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let epochs = read_epochs(&args.data)?;
    let options = eval_options(&args.nn);
    let accuracies = cross_validate(args.pipeline, &epochs, args.folds, args.seed, &options)?;
    let table = ResultTable::new(
        vec![args.pipeline.to_string()],
        (1..=accuracies.len()).map(|i| format!("f{i}")).collect(),
        ndarray::Array2::from_shape_vec((accuracies.len(), 1), accuracies.clone())
            .map_err(|e| EegError::ShapeMismatch(e.to_string()))?,
    )?;
    let csv = build_report(&table, None, ReportFormat::Csv)?;
    std::fs::write(&args.out, csv)?;
    let mean = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
    println!(
        "wrote {} ({}-fold accuracies, mean {mean:.4})",
        args.out.display(),
        args.folds
    );
    Ok(())
}

fn run_compare(args: CompareArgs) -> Result<()> {
    let mut tables = Vec::new();
    for path in &args.results {
        let text = std::fs::read_to_string(path)?;
        tables.push(parse_result_table(&text)?);
    }
    let table = ResultTable::join(&tables)?;
    let tests = run_test_battery(&table, args.bonferroni_m)?;
    let report = build_report(&table, Some(&tests), ReportFormat::Markdown)?;
    std::fs::write(&args.report, &report)?;
    println!("wrote {}", args.report.display());
    for p in &tests.pairwise {
        let marker = if p.p_adjusted < 0.01 { " **" } else { "" };
        println!(
            "{} vs {}: t = {:.4}, adjusted p = {:.3e}{marker}",
            p.method_a, p.method_b, p.t, p.p_adjusted
        );
    }
    Ok(())
}

fn run_fixtures(args: FixturesArgs) -> Result<bool> {
    if !args.check {
        println!("nothing to do (pass --check to run the oracle suite)");
        return Ok(true);
    }
    let outcomes = eegdec::fixtures::run_fixture_checks()?;
    let mut all_passed = true;
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("{status} {} — {}", o.name, o.detail);
        all_passed &= o.passed;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "{} checks, {} passed, {failed} failed",
        outcomes.len(),
        outcomes.len() - failed
    );
    Ok(all_passed)
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synth(args) => run_synth(args),
        Command::Preprocess(args) => run_preprocess(args),
        Command::Train(args) => run_train(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Compare(args) => run_compare(args),
        Command::Fixtures(args) => match run_fixtures(args) {
            Ok(true) => Ok(()),
            Ok(false) => std::process::exit(1),
            Err(e) => Err(e),
        },
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
