//! Spoken-command classification on a synthetic corpus: population-coded
//! MFCCs drive a bank of per-class recurrent areas; the highest resonance
//! score wins.
//!
//! ```sh
//! cargo run --release --example classify_commands
//! ```

use assembly_speech::classify::{ClassBank, Segment};
use assembly_speech::encoding::{fit_population_coder, population_encode};
use assembly_speech::features::{mfcc, MfccConfig};
use assembly_speech::synth::synthetic_command;
use assembly_speech::{AreaConfig, PlasticityRule};

fn main() -> assembly_speech::Result<()> {
    let words = ["yes", "no", "stop", "go"];
    let mfcc_cfg = MfccConfig::default();
    let (n_train, n_test) = (12, 4);

    let mut train_feats = Vec::new();
    let mut test_feats = Vec::new();
    for word in &words {
        for i in 0..n_train + n_test {
            let clip = synthetic_command(word, 16000, 1000 + i as u64)?;
            let seq = mfcc(&clip, &mfcc_cfg)?;
            if i < n_train {
                train_feats.push((seq, word.to_string()));
            } else {
                test_feats.push((seq, word.to_string()));
            }
        }
    }

    let sequences: Vec<_> = train_feats.iter().map(|(s, _)| s.clone()).collect();
    let coder = fit_population_coder(&sequences, 9, 0.5, 0.035)?;
    println!("population coder: {} input bits", coder.width());

    let encode = |feats: &[(assembly_speech::features::MfccSequence, String)]| {
        feats
            .iter()
            .map(|(seq, label)| {
                Ok(Segment::new(population_encode(seq, &coder)?, Some(label.clone())))
            })
            .collect::<assembly_speech::Result<Vec<_>>>()
    };
    let train = encode(&train_feats)?;
    let test = encode(&test_feats)?;

    let template = AreaConfig {
        n: 400,
        k: 50,
        k_in: 40,
        k_in_rec: 80,
        rho: 0.0,
        beta: 0.005,
        rule: PlasticityRule::Abs,
        seed: 0,
    };
    let labels: Vec<String> = words.iter().map(|s| s.to_string()).collect();
    let mut bank = ClassBank::build(&labels, &template, coder.width(), 42)?;
    bank.train(&train, 2)?;

    let report = bank.evaluate(&test)?;
    println!(
        "accuracy {:.2} over {} test clips ({} classes, chance {:.2})",
        report.accuracy, report.n_samples, report.n_classes, report.chance_accuracy
    );
    for row in &report.per_class {
        println!(
            "  {:<6} precision {:.2}  recall {:.2}  f1 {:.2}",
            row.label, row.precision, row.recall, row.f1
        );
    }
    Ok(())
}
