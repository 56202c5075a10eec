//! Mel spectrogram and MFCC extraction over a synthetic utterance.
//!
//! ```sh
//! cargo run --example extract_features
//! ```

use assembly_speech::features::{mel_spectrogram, mfcc, MelConfig, MfccConfig};
use assembly_speech::synth::synthetic_utterance;

fn main() -> assembly_speech::Result<()> {
    let utt = synthetic_utterance(
        "demo",
        &[("she", &["sh", "iy"]), ("saw", &["s", "aa"])],
        4800,
        16000,
        7,
    )?;
    println!(
        "utterance: {} samples at {} Hz, {} phones, {} words",
        utt.audio.len(),
        utt.audio.sample_rate,
        utt.phones.len(),
        utt.words.len()
    );

    let mel = mel_spectrogram(&utt.audio, &MelConfig::default())?;
    println!(
        "mel spectrogram: {} frames x {} bands (fft {}, hop {})",
        mel.num_frames(),
        mel.frames[0].len(),
        MelConfig::default().fft_size,
        MelConfig::default().hop
    );
    let mid = &mel.frames[mel.num_frames() / 2];
    let peak = mid
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    println!("  mid-utterance peak band: {} (energy {:.3})", peak.0, peak.1);

    let seq = mfcc(&utt.audio, &MfccConfig::default())?;
    println!("mfcc: {} frames x {} coefficients", seq.num_frames(), seq.n_coeffs);
    let first = &seq.frames[0];
    let row: Vec<String> = first.iter().map(|c| format!("{c:.2}")).collect();
    println!("  frame 0: [{}]", row.join(", "));
    Ok(())
}
