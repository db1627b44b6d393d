// scratch: NN epochs sweep on the frozen generator
use eegdec::eval::{cross_validate, EvalOptions, Pipeline};
use eegdec::signal::standard_preprocess;
use eegdec::synth::{generate_schedule, synthesize_recording, SynthConfig};
use std::time::Instant;

fn main() {
    let schedule = generate_schedule(50, 42).unwrap();
    let cfg = SynthConfig { separability: 1.0, seed: 42, ..SynthConfig::default() };
    let rec = synthesize_recording(&schedule, &cfg).unwrap();
    let epochs = standard_preprocess(&rec, &schedule).unwrap();
    drop(rec);
    for nn_epochs in [12usize, 16] {
        let opts = EvalOptions { nn_epochs, ..EvalOptions::default() };
        let t1 = Instant::now();
        let acc = cross_validate(Pipeline::Eegnet, &epochs, 5, 42, &opts).unwrap();
        let mean = acc.iter().sum::<f64>() / acc.len() as f64;
        println!("epochs={nn_epochs} eegnet: folds {acc:?} mean {mean:.4} ({:.1?})", t1.elapsed());
    }
    // chance level at separability 0 with the same epoch counts
    let cfg0 = SynthConfig { separability: 0.0, seed: 42, ..SynthConfig::default() };
    let rec = synthesize_recording(&schedule, &cfg0).unwrap();
    let epochs0 = standard_preprocess(&rec, &schedule).unwrap();
    drop(rec);
    let opts = EvalOptions { nn_epochs: 16, ..EvalOptions::default() };
    for pipeline in [Pipeline::Eegnet, Pipeline::Adnn] {
        let t1 = Instant::now();
        let acc = cross_validate(pipeline, &epochs0, 5, 42, &opts).unwrap();
        let mean = acc.iter().sum::<f64>() / acc.len() as f64;
        println!("sep=0 epochs=16 {pipeline}: folds {acc:?} mean {mean:.4} ({:.1?})", t1.elapsed());
    }
}
