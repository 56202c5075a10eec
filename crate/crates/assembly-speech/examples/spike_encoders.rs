//! Both binary encoders: probabilistic mel binarisation and Gaussian
//! population coding of MFCCs.
//!
//! ```sh
//! cargo run --example spike_encoders
//! ```

use assembly_speech::encoding::{
    fit_population_coder, population_encode, prob_mel_encode, ProbMelEncoderConfig,
};
use assembly_speech::features::{mel_spectrogram, mfcc, MelConfig, MfccConfig};
use assembly_speech::synth::synthetic_utterance;

fn main() -> assembly_speech::Result<()> {
    let utt = synthetic_utterance("demo", &[("go", &["g", "ow"])], 4800, 16000, 3)?;

    // Encoder 1: each mel band fires with probability proportional to its
    // gamma-compressed energy, calibrated to a target active fraction.
    let mel = mel_spectrogram(&utt.audio, &MelConfig::default())?;
    let cfg = ProbMelEncoderConfig::default();
    let spikes = prob_mel_encode(&mel, &cfg)?;
    let active: usize = spikes.iter().map(|f| f.active_count()).sum();
    let total: usize = spikes.iter().map(|f| f.width()).sum();
    println!(
        "prob-mel: {} frames x {} bits, {:.1}% active (target {:.0}%)",
        spikes.len(),
        spikes[0].width(),
        100.0 * active as f64 / total as f64,
        100.0 * cfg.target_active_fraction
    );

    // Encoder 2: each MFCC coefficient drives a row of Gaussian tuning
    // curves; units above threshold fire deterministically.
    let seq = mfcc(&utt.audio, &MfccConfig::default())?;
    let coder = fit_population_coder(&[seq.clone()], 14, 0.5, 0.044)?;
    let pop = population_encode(&seq, &coder)?;
    let active: usize = pop.iter().map(|f| f.active_count()).sum();
    println!(
        "population: {} frames x {} bits ({} coeffs x {} units), mean {:.1} active/frame",
        pop.len(),
        coder.width(),
        seq.n_coeffs,
        coder.width() / seq.n_coeffs,
        active as f64 / pop.len() as f64
    );

    // a scalar sweeping through a coefficient's range lights a moving run of units
    let frame0: Vec<usize> = pop[0].active_indices().collect();
    println!("  frame 0 active units: {frame0:?}");
    Ok(())
}
