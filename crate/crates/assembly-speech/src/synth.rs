//! Synthetic speech-like fixtures: annotated utterances and
//! Speech-Commands-style corpora for tests, examples, and offline runs.
//!
//! Each label is assigned a stable pair of formant-like frequencies, so
//! different labels occupy different spectral bands while instances of the
//! same label vary only by phase, slight detuning, and noise.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;

use crate::audio::{write_wav, AudioBuffer};
use crate::corpus::{AnnotatedUtterance, Span};
use crate::error::Result;
use crate::seeds;

/// Stable per-label formant pair. The label alone determines the
/// frequencies, so every caller agrees on what a label sounds like.
pub fn formants_for(label: &str) -> (f64, f64, f64) {
    let mut rng = seeds::rng(seeds::derive(0xC0DEC, "synth-formants", label));
    let f1 = rng.gen_range(280.0..900.0);
    let f2 = rng.gen_range(1100.0..2800.0);
    let f3 = rng.gen_range(3200.0..6500.0);
    (f1, f2, f3)
}

/// Render one steady three-formant segment with raised-cosine edge ramps.
fn render_segment(
    (f1, f2, f3): (f64, f64, f64),
    n: usize,
    sample_rate: u32,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let sr = sample_rate as f64;
    let phi1 = rng.gen_range(0.0..2.0 * PI);
    let phi2 = rng.gen_range(0.0..2.0 * PI);
    let phi3 = rng.gen_range(0.0..2.0 * PI);
    let detune = rng.gen_range(0.98..1.02);
    let ramp = (sr * 0.005) as usize;
    (0..n)
        .map(|i| {
            let t = i as f64 / sr;
            let mut s = 0.30 * (2.0 * PI * f1 * detune * t + phi1).sin()
                + 0.21 * (2.0 * PI * f2 * detune * t + phi2).sin()
                + 0.15 * (2.0 * PI * f3 * detune * t + phi3).sin()
                + rng.gen_range(-0.01..0.01);
            if ramp > 0 {
                if i < ramp {
                    s *= 0.5 - 0.5 * (PI * i as f64 / ramp as f64).cos();
                }
                let from_end = n - 1 - i;
                if from_end < ramp {
                    s *= 0.5 - 0.5 * (PI * from_end as f64 / ramp as f64).cos();
                }
            }
            s
        })
        .collect()
}

fn render_silence(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-0.003..0.003)).collect()
}

/// Build an annotated utterance from words spelled as phone sequences.
/// Each phone occupies `phone_samples` samples; a silence span of the same
/// length opens and closes the utterance.
pub fn synthetic_utterance(
    id: &str,
    words: &[(&str, &[&str])],
    phone_samples: usize,
    sample_rate: u32,
    seed: u64,
) -> Result<AnnotatedUtterance> {
    let mut rng = seeds::rng(seeds::derive(seed, "synth-utterance", id));
    let mut samples = render_silence(phone_samples, &mut rng);
    let mut phones = vec![Span {
        start_sample: 0,
        end_sample: phone_samples,
        label: "sil".into(),
        silence: true,
    }];
    let mut word_spans = Vec::new();
    let mut cursor = phone_samples;
    for (word, phone_seq) in words {
        let word_start = cursor;
        for phone in *phone_seq {
            let formants = formants_for(phone);
            samples.extend(render_segment(formants, phone_samples, sample_rate, &mut rng));
            phones.push(Span {
                start_sample: cursor,
                end_sample: cursor + phone_samples,
                label: phone.to_string(),
                silence: false,
            });
            cursor += phone_samples;
        }
        word_spans.push(Span {
            start_sample: word_start,
            end_sample: cursor,
            label: word.to_string(),
            silence: false,
        });
    }
    samples.extend(render_silence(phone_samples, &mut rng));
    phones.push(Span {
        start_sample: cursor,
        end_sample: cursor + phone_samples,
        label: "sil".into(),
        silence: true,
    });
    Ok(AnnotatedUtterance {
        audio: AudioBuffer::new(samples, sample_rate)?,
        phones,
        words: word_spans,
        id: id.to_string(),
    })
}

/// Write an utterance to disk as `<id>.wav`, `<id>.phn`, `<id>.wrd` with
/// sample-offset annotation lines. Synthetic phones use folded labels
/// directly, with silences written as `h#` so the standard map applies.
pub fn write_annotated(dir: &Path, utt: &AnnotatedUtterance) -> Result<()> {
    write_wav(dir.join(format!("{}.wav", utt.id)), &utt.audio)?;
    let phn: String = utt
        .phones
        .iter()
        .map(|s| {
            let raw = if s.silence { "h#" } else { s.label.as_str() };
            format!("{} {} {}\n", s.start_sample, s.end_sample, raw)
        })
        .collect();
    let phn_path = dir.join(format!("{}.phn", utt.id));
    std::fs::write(&phn_path, phn).map_err(|e| crate::Error::io(&phn_path, e))?;
    let wrd: String = utt
        .words
        .iter()
        .map(|s| format!("{} {} {}\n", s.start_sample, s.end_sample, s.label))
        .collect();
    let wrd_path = dir.join(format!("{}.wrd", utt.id));
    std::fs::write(&wrd_path, wrd).map_err(|e| crate::Error::io(&wrd_path, e))?;
    Ok(())
}

/// The default synthetic command vocabulary.
pub const COMMAND_WORDS: [&str; 10] = [
    "yes", "no", "up", "down", "left", "right", "on", "off", "stop", "go",
];

/// Render one spoken-command clip: a three-segment formant trajectory
/// specific to the word, with per-instance phase, detune, and noise.
pub fn synthetic_command(word: &str, sample_rate: u32, seed: u64) -> Result<AudioBuffer> {
    let mut rng = seeds::rng(seed);
    let sr = sample_rate as usize;
    let seg = sr / 3;
    let mut traj_rng = seeds::rng(seeds::derive(0xC0DEC, "synth-trajectory", word));
    let mut samples = Vec::with_capacity(sr);
    for part in 0..3 {
        let f1 = traj_rng.gen_range(280.0..900.0);
        let f2 = traj_rng.gen_range(1100.0..2800.0);
        let f3 = traj_rng.gen_range(3200.0..6500.0);
        let n = if part == 2 { sr - 2 * seg } else { seg };
        samples.extend(render_segment((f1, f2, f3), n, sample_rate, &mut rng));
    }
    AudioBuffer::new(samples, sample_rate)
}

/// Materialise a Speech-Commands-style tree: one folder per word, each with
/// `per_class` one-second clips named `sample_<i>.wav`.
pub fn write_synthetic_speech_commands(
    root: &Path,
    words: &[String],
    per_class: usize,
    sample_rate: u32,
    seed: u64,
) -> Result<()> {
    for word in words {
        let dir = root.join(word);
        std::fs::create_dir_all(&dir).map_err(|e| crate::Error::io(&dir, e))?;
        for i in 0..per_class {
            let clip_seed = seeds::derive_indexed(seed, word, i as u64);
            let clip = synthetic_command(word, sample_rate, clip_seed)?;
            write_wav(dir.join(format!("sample_{i:05}.wav")), &clip)?;
        }
    }
    Ok(())
}
