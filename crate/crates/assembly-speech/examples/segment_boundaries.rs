//! Unsupervised boundary detection on a synthetic annotated utterance:
//! encode mel frames, run the two-level refractory hierarchy, and compare
//! change-signal peaks against the ground-truth boundaries.
//!
//! ```sh
//! cargo run --release --example segment_boundaries
//! ```

use assembly_speech::area::PlasticityRule;
use assembly_speech::corpus::boundary_frames;
use assembly_speech::encoding::{prob_mel_encode, ProbMelEncoderConfig};
use assembly_speech::eval::match_boundaries;
use assembly_speech::features::{mel_spectrogram, MelConfig};
use assembly_speech::segmentation::{oracle_sweep, Hierarchy, HierarchyConfig};
use assembly_speech::synth::synthetic_utterance;
use assembly_speech::AreaConfig;

fn main() -> assembly_speech::Result<()> {
    let utt = synthetic_utterance(
        "demo",
        &[("she", &["sh", "iy"]), ("had", &["hh", "ae", "d"]), ("you", &["y", "uw"])],
        9600,
        16000,
        13,
    )?;
    let mel_cfg = MelConfig::default();
    let mel = mel_spectrogram(&utt.audio, &mel_cfg)?;
    // a steeper gamma keeps near-silent frames from flickering random bits
    let mut enc = ProbMelEncoderConfig::default();
    enc.gamma = 0.8;
    let frames = prob_mel_encode(&mel, &enc)?;
    let phone_gt = boundary_frames(&utt.phones, mel_cfg.hop);
    let word_gt = boundary_frames(&utt.words, mel_cfg.hop);

    let mut cfg = HierarchyConfig::default_for_input(mel_cfg.n_mels, 3);
    // in-degree below the input width: with full fan-in and uniform initial
    // weights every neuron would see the same drive
    cfg.level1.area.k_in = 24;
    cfg.level1.area.rho = 0.1;
    cfg.level2.area = AreaConfig {
        n: 1531,
        k: 135,
        k_in: 300,
        k_in_rec: 0,
        rho: 0.01,
        beta: 0.0,
        rule: PlasticityRule::Hebbian,
        seed: cfg.level2.area.seed,
    };

    let mut hierarchy = Hierarchy::build(cfg.clone(), mel_cfg.n_mels)?;
    let out = hierarchy.run(&frames)?;

    let l1 = oracle_sweep(&out.level1, &phone_gt, cfg.level1.tolerance, cfg.level1.min_peak_distance)?;
    let l2 = oracle_sweep(&out.level2, &word_gt, cfg.level2.tolerance, cfg.level2.min_peak_distance)?;

    println!("phone ground truth: {phone_gt:?}");
    println!(
        "level 1 detected:   {:?} (prominence {}, F1 {:.2})",
        l1.boundaries.frame_indices, l1.best_prominence, l1.best_f1
    );
    println!("word ground truth:  {word_gt:?}");
    println!(
        "level 2 detected:   {:?} (prominence {}, F1 {:.2})",
        l2.boundaries.frame_indices, l2.best_prominence, l2.best_f1
    );
    let direct = match_boundaries(&l1.boundaries.frame_indices, &word_gt, cfg.level2.tolerance);
    println!("L1-direct baseline at word scale: F1 {:.2}", direct.f1());
    Ok(())
}
