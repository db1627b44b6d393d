//! Cross-validated benchmarking of the four pipelines, the statistical
//! comparison battery, and report generation (markdown and CSV).

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::adnn::{self, AdnnConfig, ModelKind, TrainHyper};
use crate::error::{EegError, Result};
use crate::features::{
    band_powers, csp_fit, csp_transform, default_bands, welch_psd, BandDefinition,
    CSP_FILTERS_PER_CLASS, CSP_RIDGE, WELCH_OVERLAP, WELCH_WIN_S,
};
use crate::rng::mix_seed;
use crate::shallow::{lda_fit, lda_predict, svm_fit, svm_predict, LDA_RIDGE, SVM_C, SVM_EPOCHS};
use crate::signal::EpochSet;
use crate::stats::{
    bonferroni, levene, mean_std, paired_t_test, shapiro_wilk, LeveneResult, ShapiroResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    PsdSvm,
    CspLda,
    Eegnet,
    Adnn,
}

impl Pipeline {
    pub const ALL: [Pipeline; 4] = [
        Pipeline::PsdSvm,
        Pipeline::CspLda,
        Pipeline::Eegnet,
        Pipeline::Adnn,
    ];
}

impl std::fmt::Display for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Pipeline::PsdSvm => "psd_svm",
            Pipeline::CspLda => "csp_lda",
            Pipeline::Eegnet => "eegnet",
            Pipeline::Adnn => "adnn",
        };
        write!(f, "{s}")
    }
}

impl clap::ValueEnum for Pipeline {
    fn value_variants<'a>() -> &'a [Self] {
        &Pipeline::ALL
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Pipeline::PsdSvm => "psd_svm",
            Pipeline::CspLda => "csp_lda",
            Pipeline::Eegnet => "eegnet",
            Pipeline::Adnn => "adnn",
        }))
    }
}

impl std::str::FromStr for Pipeline {
    type Err = EegError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psd_svm" => Ok(Pipeline::PsdSvm),
            "csp_lda" => Ok(Pipeline::CspLda),
            "eegnet" => Ok(Pipeline::Eegnet),
            "adnn" => Ok(Pipeline::Adnn),
            other => Err(EegError::InvalidParameter(format!(
                "unknown pipeline \"{other}\" (expected psd_svm|csp_lda|eegnet|adnn)"
            ))),
        }
    }
}

/// Everything the pipelines need beyond the data itself. The network
/// architecture template has its channels/samples/classes/seed overridden
/// per fold from the data.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub welch_win_s: f64,
    pub welch_overlap: f64,
    pub bands: Vec<BandDefinition>,
    pub svm_c: f64,
    pub svm_epochs: usize,
    pub csp_filters_per_class: usize,
    pub csp_ridge: f64,
    pub lda_ridge: f64,
    pub nn_arch: AdnnConfig,
    pub nn_lr: f64,
    pub nn_batch: usize,
    pub nn_epochs: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            welch_win_s: WELCH_WIN_S,
            welch_overlap: WELCH_OVERLAP,
            bands: default_bands(),
            svm_c: SVM_C,
            svm_epochs: SVM_EPOCHS,
            csp_filters_per_class: CSP_FILTERS_PER_CLASS,
            csp_ridge: CSP_RIDGE,
            lda_ridge: LDA_RIDGE,
            nn_arch: AdnnConfig::default(),
            nn_lr: 1e-3,
            nn_batch: 16,
            nn_epochs: 200,
        }
    }
}

/// Stratified fold assignment: per class, seeded shuffle then round-robin
/// dealing, so balanced inputs give exactly balanced folds.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    if k < 2 {
        return Err(EegError::InvalidParameter(format!(
            "k-fold needs k >= 2, got {k}"
        )));
    }
    let n_classes = labels.iter().copied().max().map(|m| m + 1).unwrap_or(0);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for class in 0..n_classes {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        if idx.is_empty() {
            continue;
        }
        if idx.len() < k {
            return Err(EegError::InvalidParameter(format!(
                "class {class} has {} trials, fewer than k = {k}",
                idx.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0xF01D, class as u64));
        idx.shuffle(&mut rng);
        for (pos, trial) in idx.into_iter().enumerate() {
            folds[pos % k].push(trial);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// Generic stratified k-fold loop; `fit_predict(train, test, fold_seed)`
/// returns predicted labels for the test set.
pub fn cross_validate_with(
    dataset: &EpochSet,
    k: usize,
    seed: u64,
    mut fit_predict: impl FnMut(&EpochSet, &EpochSet, u64) -> Result<Vec<usize>>,
) -> Result<Vec<f64>> {
    let folds = stratified_kfold(&dataset.labels, k, seed)?;
    let mut accuracies = Vec::with_capacity(k);
    for (fi, test_idx) in folds.iter().enumerate() {
        let mut train_idx = Vec::new();
        for (fj, fold) in folds.iter().enumerate() {
            if fi != fj {
                train_idx.extend_from_slice(fold);
            }
        }
        let train_set = dataset.select(&train_idx)?;
        let test_set = dataset.select(test_idx)?;
        let fold_seed = mix_seed(seed, 0xCF01, fi as u64);
        let pred = fit_predict(&train_set, &test_set, fold_seed)?;
        if pred.len() != test_set.trials() {
            return Err(EegError::ShapeMismatch(format!(
                "fold {fi}: {} predictions for {} test trials",
                pred.len(),
                test_set.trials()
            )));
        }
        let correct = pred
            .iter()
            .zip(&test_set.labels)
            .filter(|(a, b)| a == b)
            .count();
        accuracies.push(correct as f64 / test_set.trials() as f64);
    }
    Ok(accuracies)
}

fn psd_features(set: &EpochSet, options: &EvalOptions) -> Result<Array2<f64>> {
    let mut rows: Vec<f64> = Vec::new();
    let mut dim = 0usize;
    for t in 0..set.trials() {
        let psd = welch_psd(
            set.data.index_axis(ndarray::Axis(0), t),
            set.fs,
            options.welch_win_s,
            options.welch_overlap,
        )?;
        let f = band_powers(&psd, set.fs, &options.bands)?;
        dim = f.len();
        rows.extend(f);
    }
    Array2::from_shape_vec((set.trials(), dim), rows)
        .map_err(|e| EegError::ShapeMismatch(format!("psd feature matrix: {e}")))
}

/// Fit on the training set only, predict test labels.
pub fn fit_predict_pipeline(
    pipeline: Pipeline,
    train_set: &EpochSet,
    test_set: &EpochSet,
    seed: u64,
    options: &EvalOptions,
) -> Result<Vec<usize>> {
    match pipeline {
        Pipeline::PsdSvm => {
            let xtr = psd_features(train_set, options)?;
            let xte = psd_features(test_set, options)?;
            let model = svm_fit(
                xtr.view(),
                &train_set.labels,
                options.svm_c,
                options.svm_epochs,
                mix_seed(seed, 0x5F11, 0),
            )?;
            svm_predict(&model, xte.view())
        }
        Pipeline::CspLda => {
            let csp = csp_fit(train_set, options.csp_filters_per_class, options.csp_ridge)?;
            let featurize = |set: &EpochSet| -> Result<Array2<f64>> {
                let mut rows = Vec::new();
                let mut dim = 0usize;
                for t in 0..set.trials() {
                    let f = csp_transform(&csp, set.data.index_axis(ndarray::Axis(0), t))?;
                    dim = f.len();
                    rows.extend(f);
                }
                Array2::from_shape_vec((set.trials(), dim), rows)
                    .map_err(|e| EegError::ShapeMismatch(format!("csp feature matrix: {e}")))
            };
            let xtr = featurize(train_set)?;
            let xte = featurize(test_set)?;
            let model = lda_fit(xtr.view(), &train_set.labels, options.lda_ridge)?;
            lda_predict(&model, xte.view())
        }
        Pipeline::Eegnet | Pipeline::Adnn => {
            let kind = if pipeline == Pipeline::Eegnet {
                ModelKind::Eegnet
            } else {
                ModelKind::Adnn
            };
            // inner stratified split: 1/5 of the training fold for
            // checkpoint selection, the test fold stays untouched
            let inner = stratified_kfold(&train_set.labels, 5, mix_seed(seed, 0x1EE7, 0))?;
            let valid_idx = &inner[0];
            let mut fit_idx = Vec::new();
            for fold in inner.iter().skip(1) {
                fit_idx.extend_from_slice(fold);
            }
            let fit_set = train_set.select(&fit_idx)?;
            let valid_set = train_set.select(valid_idx)?;
            let cfg = AdnnConfig {
                channels: train_set.channels(),
                samples: train_set.samples(),
                n_classes: train_set.n_classes(),
                seed: mix_seed(seed, 0x0ee6, 0),
                ..options.nn_arch.clone()
            };
            let hyper = TrainHyper {
                lr: options.nn_lr,
                batch: options.nn_batch,
                max_epochs: options.nn_epochs,
                seed: mix_seed(seed, 0x7121, 0),
            };
            let model = adnn::train(kind, &cfg, &fit_set, &valid_set, &hyper)?;
            let (pred, _) = adnn::predict(&model, test_set)?;
            Ok(pred)
        }
    }
}

/// Stratified k-fold cross-validation of one pipeline. All fitting
/// (standardization, CSP, classifiers, networks) happens inside each
/// training fold only. Returns the k fold accuracies in fold order.
pub fn cross_validate(
    pipeline: Pipeline,
    dataset: &EpochSet,
    k: usize,
    seed: u64,
    options: &EvalOptions,
) -> Result<Vec<f64>> {
    cross_validate_with(dataset, k, seed, |train_set, test_set, fold_seed| {
        fit_predict_pipeline(pipeline, train_set, test_set, fold_seed, options)
    })
}

// ---------------------------------------------------------------------------
// Result tables and the statistical test battery
// ---------------------------------------------------------------------------

/// Per-subject (or per-fold) accuracy matrix with method columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub methods: Vec<String>,
    pub subjects: Vec<String>,
    pub accuracies: Array2<f64>, // subjects × methods
}

impl ResultTable {
    pub fn new(
        methods: Vec<String>,
        subjects: Vec<String>,
        accuracies: Array2<f64>,
    ) -> Result<Self> {
        if accuracies.nrows() != subjects.len() || accuracies.ncols() != methods.len() {
            return Err(EegError::ShapeMismatch(format!(
                "accuracy matrix {}×{} vs {} subjects × {} methods",
                accuracies.nrows(),
                accuracies.ncols(),
                subjects.len(),
                methods.len()
            )));
        }
        if accuracies.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(EegError::InvalidParameter(
                "accuracies must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            methods,
            subjects,
            accuracies,
        })
    }

    pub fn column(&self, m: usize) -> Vec<f64> {
        self.accuracies.column(m).to_vec()
    }

    /// Per-method mean and sample standard deviation (the Avg./Std. rows).
    pub fn avg_std(&self) -> Result<Vec<(f64, f64)>> {
        (0..self.methods.len())
            .map(|m| mean_std(&self.column(m)))
            .collect()
    }

    /// Join single- or multi-method tables on row order (row ids must match).
    pub fn join(tables: &[ResultTable]) -> Result<ResultTable> {
        let first = tables
            .first()
            .ok_or_else(|| EegError::InvalidParameter("no tables to join".into()))?;
        let n = first.subjects.len();
        let mut methods = Vec::new();
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for t in tables {
            if t.subjects.len() != n {
                return Err(EegError::ShapeMismatch(format!(
                    "cannot join tables with {} and {n} rows",
                    t.subjects.len()
                )));
            }
            for (m, name) in t.methods.iter().enumerate() {
                methods.push(name.clone());
                columns.push(t.column(m));
            }
        }
        let mut acc = Array2::<f64>::zeros((n, methods.len()));
        for (mi, col) in columns.iter().enumerate() {
            for (si, &v) in col.iter().enumerate() {
                acc[[si, mi]] = v;
            }
        }
        ResultTable::new(methods, first.subjects.clone(), acc)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseTest {
    pub method_a: String,
    pub method_b: String,
    pub t: f64,
    pub df: usize,
    pub p_raw: f64,
    pub p_adjusted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub shapiro: Vec<(String, ShapiroResult)>,
    pub levene: LeveneResult,
    pub pairwise: Vec<PairwiseTest>,
    pub bonferroni_m: usize,
}

/// Shapiro-Wilk per method, Levene across methods, and pairwise paired
/// t-tests with Bonferroni adjustment. `bonferroni_m` defaults to the number
/// of comparisons.
pub fn run_test_battery(table: &ResultTable, bonferroni_m: Option<usize>) -> Result<TestReport> {
    if table.methods.len() < 2 {
        return Err(EegError::InvalidParameter(
            "test battery needs at least 2 methods".into(),
        ));
    }
    let mut shapiro = Vec::new();
    for (m, name) in table.methods.iter().enumerate() {
        shapiro.push((name.clone(), shapiro_wilk(&table.column(m))?));
    }
    let groups: Vec<Vec<f64>> = (0..table.methods.len()).map(|m| table.column(m)).collect();
    let levene_result = levene(&groups)?;

    let mut raw = Vec::new();
    let mut pairs = Vec::new();
    for a in 0..table.methods.len() {
        for b in (a + 1)..table.methods.len() {
            let r = paired_t_test(&table.column(a), &table.column(b))?;
            raw.push(r.p);
            pairs.push((a, b, r));
        }
    }
    let m = bonferroni_m.unwrap_or(pairs.len());
    let adjusted = bonferroni(&raw, m)?;
    let pairwise = pairs
        .into_iter()
        .zip(adjusted)
        .map(|((a, b, r), p_adj)| PairwiseTest {
            method_a: table.methods[a].clone(),
            method_b: table.methods[b].clone(),
            t: r.t,
            df: r.df,
            p_raw: r.p,
            p_adjusted: p_adj,
        })
        .collect();
    Ok(TestReport {
        shapiro,
        levene: levene_result,
        pairwise,
        bonferroni_m: m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

const SIGNIFICANCE_THRESHOLD: f64 = 0.01;

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Emit the table (per-subject rows plus Avg./Std. at 4 decimals in
/// markdown, full precision in CSV) and, in markdown, the attached test
/// results with significance markers at p < 0.01.
pub fn build_report(
    table: &ResultTable,
    tests: Option<&TestReport>,
    format: ReportFormat,
) -> Result<String> {
    match format {
        ReportFormat::Csv => {
            let mut out = String::from("subject");
            for m in &table.methods {
                out.push(',');
                out.push_str(&csv_field(m));
            }
            out.push('\n');
            for (si, subject) in table.subjects.iter().enumerate() {
                out.push_str(&csv_field(subject));
                for mi in 0..table.methods.len() {
                    out.push_str(&format!(",{}", table.accuracies[[si, mi]]));
                }
                out.push('\n');
            }
            if !table.methods.is_empty() && !table.subjects.is_empty() {
                let stats = table.avg_std()?;
                out.push_str("Avg.");
                for (avg, _) in &stats {
                    out.push_str(&format!(",{avg}"));
                }
                out.push('\n');
                out.push_str("Std.");
                for (_, std) in &stats {
                    out.push_str(&format!(",{std}"));
                }
                out.push('\n');
            }
            Ok(out)
        }
        ReportFormat::Markdown => {
            let mut out = String::new();
            out.push_str("| # of subjects |");
            for m in &table.methods {
                out.push_str(&format!(" {m} |"));
            }
            out.push('\n');
            out.push_str("|---|");
            for _ in &table.methods {
                out.push_str("---|");
            }
            out.push('\n');
            for (si, subject) in table.subjects.iter().enumerate() {
                out.push_str(&format!("| {subject} |"));
                for mi in 0..table.methods.len() {
                    out.push_str(&format!(" {:.4} |", table.accuracies[[si, mi]]));
                }
                out.push('\n');
            }
            if !table.methods.is_empty() && !table.subjects.is_empty() {
                let stats = table.avg_std()?;
                out.push_str("| Avg. |");
                for (avg, _) in &stats {
                    out.push_str(&format!(" {avg:.4} |"));
                }
                out.push('\n');
                out.push_str("| Std. |");
                for (_, std) in &stats {
                    out.push_str(&format!(" {std:.4} |"));
                }
                out.push('\n');
            }
            if let Some(tests) = tests {
                out.push_str("\n## Normality (Shapiro-Wilk)\n\n");
                out.push_str("| method | W | p |\n|---|---|---|\n");
                for (name, r) in &tests.shapiro {
                    out.push_str(&format!("| {name} | {:.4} | {:.4} |\n", r.w, r.p));
                }
                out.push_str("\n## Homoscedasticity (Levene)\n\n");
                out.push_str(&format!(
                    "F({}, {}) = {:.4}, p = {:.4}\n",
                    tests.levene.df.0, tests.levene.df.1, tests.levene.f, tests.levene.p
                ));
                out.push_str(&format!(
                    "\n## Paired t-tests (Bonferroni m = {})\n\n",
                    tests.bonferroni_m
                ));
                out.push_str(
                    "| comparison | t | df | p | adjusted p |  |\n|---|---|---|---|---|---|\n",
                );
                for p in &tests.pairwise {
                    let marker = if p.p_adjusted < SIGNIFICANCE_THRESHOLD {
                        "**"
                    } else {
                        ""
                    };
                    out.push_str(&format!(
                        "| {} vs {} | {:.4} | {} | {:.3e} | {:.3e} | {marker} |\n",
                        p.method_a, p.method_b, p.t, p.df, p.p_raw, p.p_adjusted
                    ));
                }
            }
            Ok(out)
        }
    }
}

/// Parse a table CSV produced by `build_report` (Avg./Std. rows are skipped
/// and recomputed on demand).
pub fn parse_result_table(csv: &str) -> Result<ResultTable> {
    let mut lines = csv.lines();
    let header = lines
        .next()
        .ok_or_else(|| EegError::Format("empty CSV".into()))?;
    let fields = split_csv_line(header)?;
    if fields.is_empty() || fields[0] != "subject" {
        return Err(EegError::Format(format!(
            "CSV header must start with \"subject\", got {header:?}"
        )));
    }
    let methods: Vec<String> = fields[1..].to_vec();
    let mut subjects = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields = split_csv_line(line)?;
        if fields[0] == "Avg." || fields[0] == "Std." {
            continue;
        }
        if fields.len() != methods.len() + 1 {
            return Err(EegError::Format(format!(
                "row {:?} has {} fields, expected {}",
                fields[0],
                fields.len(),
                methods.len() + 1
            )));
        }
        subjects.push(fields[0].clone());
        for v in &fields[1..] {
            values.push(v.parse::<f64>().map_err(|e| {
                EegError::Format(format!("bad accuracy value {v:?}: {e}"))
            })?);
        }
    }
    let acc = Array2::from_shape_vec((subjects.len(), methods.len()), values)
        .map_err(|e| EegError::Format(format!("CSV shape: {e}")))?;
    ResultTable::new(methods, subjects, acc)
}

fn split_csv_line(line: &str) -> Result<Vec<String>> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    let mut quoted = false;
    while let Some(c) = chars.next() {
        if quoted {
            if c == '"' {
                if chars.peek() == Some(&'"') {
                    cur.push('"');
                    chars.next();
                } else {
                    quoted = false;
                }
            } else {
                cur.push(c);
            }
        } else {
            match c {
                '"' if cur.is_empty() => quoted = true,
                ',' => {
                    fields.push(std::mem::take(&mut cur));
                }
                _ => cur.push(c),
            }
        }
    }
    if quoted {
        return Err(EegError::Format(format!("unterminated quote in {line:?}")));
    }
    fields.push(cur);
    Ok(fields)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn balanced_dataset(trials_per_class: usize, seed: u64) -> EpochSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = 4 * trials_per_class;
        let (c, s) = (6, 64);
        let mut data = Array3::<f32>::zeros((t, c, s));
        data.mapv_inplace(|_| rng.random_range(-1.0f32..1.0));
        let labels: Vec<usize> = (0..t).map(|i| i % 4).collect();
        EpochSet::new(
            data,
            labels,
            (0..4).map(|k| format!("w{k}")).collect(),
            250.0,
        )
        .unwrap()
    }

    #[test]
    fn stratified_folds_are_balanced() {
        let data = balanced_dataset(50, 1); // 200 trials
        let folds = stratified_kfold(&data.labels, 5, 42).unwrap();
        for fold in &folds {
            assert_eq!(fold.len(), 40);
            for class in 0..4 {
                assert_eq!(
                    fold.iter().filter(|&&i| data.labels[i] == class).count(),
                    10
                );
            }
        }
        // folds partition the trial set
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..200).collect::<Vec<_>>());
    }

    #[test]
    fn stratified_errors_when_class_too_small() {
        let labels = vec![0, 0, 0, 1, 1];
        assert!(matches!(
            stratified_kfold(&labels, 3, 1),
            Err(EegError::InvalidParameter(_))
        ));
    }

    #[test]
    fn constant_classifier_scores_chance_on_balanced_folds() {
        let data = balanced_dataset(10, 2);
        let acc = cross_validate_with(&data, 5, 7, |_train, test, _seed| {
            Ok(vec![2usize; test.trials()])
        })
        .unwrap();
        for a in &acc {
            assert_eq!(*a, 0.25);
        }
    }

    #[test]
    fn cross_validation_is_deterministic() {
        let data = balanced_dataset(10, 3);
        let folds_a = stratified_kfold(&data.labels, 5, 11).unwrap();
        let folds_b = stratified_kfold(&data.labels, 5, 11).unwrap();
        assert_eq!(folds_a, folds_b);
        let folds_c = stratified_kfold(&data.labels, 5, 12).unwrap();
        assert_ne!(folds_a, folds_c);

        let opts = EvalOptions::default();
        let a = cross_validate(Pipeline::CspLda, &data, 5, 9, &opts).unwrap();
        let b = cross_validate(Pipeline::CspLda, &data, 5, 9, &opts).unwrap();
        assert_eq!(a, b);
    }

    fn toy_table() -> ResultTable {
        ResultTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            (1..=10).map(|i| format!("S{i}")).collect(),
            Array2::from_shape_fn((10, 3), |(s, m)| {
                0.3 + 0.05 * m as f64 + 0.01 * ((s * 7 + m * 3) % 10) as f64
            }),
        )
        .unwrap()
    }

    #[test]
    fn csv_roundtrip_is_identity() {
        let table = toy_table();
        let csv = build_report(&table, None, ReportFormat::Csv).unwrap();
        let back = parse_result_table(&csv).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn empty_method_list_gives_header_only() {
        let table = ResultTable::new(vec![], vec![], Array2::zeros((0, 0))).unwrap();
        let csv = build_report(&table, None, ReportFormat::Csv).unwrap();
        assert_eq!(csv, "subject\n");
    }

    #[test]
    fn markdown_report_has_avg_std_and_markers() {
        let table = toy_table();
        let tests = run_test_battery(&table, None).unwrap();
        let md = build_report(&table, Some(&tests), ReportFormat::Markdown).unwrap();
        assert!(md.contains("| # of subjects | a | b | c |"));
        assert!(md.contains("| Avg. |"));
        assert!(md.contains("| Std. |"));
        assert!(md.contains("Shapiro-Wilk"));
        assert!(md.contains("Levene"));
        assert!(md.contains("Bonferroni m = 3"));
    }

    #[test]
    fn quoted_method_names_roundtrip() {
        let table = ResultTable::new(
            vec!["method, with comma".into()],
            vec!["f1".into(), "f2".into()],
            Array2::from_shape_vec((2, 1), vec![0.5, 0.75]).unwrap(),
        )
        .unwrap();
        let csv = build_report(&table, None, ReportFormat::Csv).unwrap();
        let back = parse_result_table(&csv).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn join_tables_checks_rows() {
        let t1 = ResultTable::new(
            vec!["a".into()],
            vec!["f1".into(), "f2".into()],
            Array2::from_shape_vec((2, 1), vec![0.5, 0.6]).unwrap(),
        )
        .unwrap();
        let t2 = ResultTable::new(
            vec!["b".into()],
            vec!["f1".into(), "f2".into()],
            Array2::from_shape_vec((2, 1), vec![0.7, 0.8]).unwrap(),
        )
        .unwrap();
        let joined = ResultTable::join(&[t1.clone(), t2]).unwrap();
        assert_eq!(joined.methods, vec!["a".to_string(), "b".to_string()]);
        assert_eq!(joined.accuracies[[1, 1]], 0.8);

        let bad = ResultTable::new(
            vec!["c".into()],
            vec!["f1".into()],
            Array2::from_shape_vec((1, 1), vec![0.1]).unwrap(),
        )
        .unwrap();
        assert!(ResultTable::join(&[t1, bad]).is_err());
    }
}
