//! Log-mel spectrogram and MFCC extraction.
//!
//! Framing uses a periodic Hann window and produces
//! `T = floor((len - fft_size) / hop) + 1` frames. Mel energies are
//! log(1+e)-compressed and min-max normalised to `[0, 1]` per utterance;
//! MFCCs use a natural-log mel spectrum followed by an orthonormal DCT-II
//! with C0 retained.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct MelConfig {
    pub fft_size: usize,
    pub hop: usize,
    pub n_mels: usize,
}

impl Default for MelConfig {
    fn default() -> Self {
        MelConfig {
            fft_size: 512,
            hop: 320,
            n_mels: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct MfccConfig {
    pub fft_size: usize,
    pub hop: usize,
    pub n_mels: usize,
    pub n_coeffs: usize,
}

impl Default for MfccConfig {
    fn default() -> Self {
        MfccConfig {
            fft_size: 512,
            hop: 480,
            n_mels: 32,
            n_coeffs: 11,
        }
    }
}

/// T x B matrix of log-compressed mel energies, normalised to [0, 1].
#[derive(Debug, Clone)]
pub struct MelSpectrogram {
    pub frames: Vec<Vec<f64>>,
    pub frame_hop: usize,
    pub fft_size: usize,
    pub n_mels: usize,
}

/// T x M matrix of cepstral coefficients (C0 included).
#[derive(Debug, Clone)]
pub struct MfccSequence {
    pub frames: Vec<Vec<f64>>,
    pub n_coeffs: usize,
    pub fft_size: usize,
    pub hop_length: usize,
}

impl MelSpectrogram {
    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }
}

impl MfccSequence {
    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }
}

/// Number of analysis frames for a signal of `len` samples.
pub fn num_frames(len: usize, fft_size: usize, hop: usize) -> usize {
    if len < fft_size {
        0
    } else {
        (len - fft_size) / hop + 1
    }
}

fn hann_periodic(size: usize) -> Vec<f64> {
    (0..size)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / size as f64).cos())
        .collect()
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular mel filterbank over the one-sided spectrum (fft_size/2 + 1 bins),
/// spanning 0 .. sample_rate/2.
pub fn mel_filterbank(n_mels: usize, fft_size: usize, sample_rate: u32) -> Vec<Vec<f64>> {
    let n_bins = fft_size / 2 + 1;
    let nyquist = sample_rate as f64 / 2.0;
    let mel_max = hz_to_mel(nyquist);
    // n_mels + 2 edge points, uniformly spaced on the mel scale
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(mel_max * i as f64 / (n_mels + 1) as f64))
        .collect();
    let bin_hz = sample_rate as f64 / fft_size as f64;
    let mut bank = vec![vec![0.0; n_bins]; n_mels];
    for (m, filt) in bank.iter_mut().enumerate() {
        let (l, c, r) = (edges[m], edges[m + 1], edges[m + 2]);
        for (b, w) in filt.iter_mut().enumerate() {
            let f = b as f64 * bin_hz;
            let rise = (f - l) / (c - l);
            let fall = (r - f) / (r - c);
            *w = rise.min(fall).max(0.0);
        }
        // unit-sum rows: each mel energy is a weighted average of bin powers,
        // so a flat spectrum maps to a flat mel spectrum
        let sum: f64 = filt.iter().sum();
        if sum > 0.0 {
            for w in filt.iter_mut() {
                *w /= sum;
            }
        }
    }
    bank
}

/// Windowed power spectra, one row per frame.
fn power_frames(audio: &AudioBuffer, fft_size: usize, hop: usize) -> Result<Vec<Vec<f64>>> {
    if audio.len() < fft_size {
        return Err(Error::AudioTooShort {
            len: audio.len(),
            fft_size,
        });
    }
    let window = hann_periodic(fft_size);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(fft_size);
    let t = num_frames(audio.len(), fft_size, hop);
    let n_bins = fft_size / 2 + 1;
    let mut out = Vec::with_capacity(t);
    let mut buf = vec![Complex::new(0.0, 0.0); fft_size];
    for i in 0..t {
        let start = i * hop;
        for (j, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(audio.samples[start + j] * window[j], 0.0);
        }
        fft.process(&mut buf);
        out.push(buf[..n_bins].iter().map(|c| c.norm_sqr()).collect());
    }
    Ok(out)
}

fn apply_filterbank(power: &[Vec<f64>], bank: &[Vec<f64>]) -> Vec<Vec<f64>> {
    power
        .iter()
        .map(|frame| {
            bank.iter()
                .map(|filt| filt.iter().zip(frame).map(|(w, p)| w * p).sum())
                .collect()
        })
        .collect()
}

/// Log-mel spectrogram, min-max normalised to [0, 1] per utterance.
/// A constant (e.g. all-silent) spectrogram normalises to all zeros.
pub fn mel_spectrogram(audio: &AudioBuffer, cfg: &MelConfig) -> Result<MelSpectrogram> {
    let power = power_frames(audio, cfg.fft_size, cfg.hop)?;
    let bank = mel_filterbank(cfg.n_mels, cfg.fft_size, audio.sample_rate);
    let mut frames = apply_filterbank(&power, &bank);
    for row in &mut frames {
        for v in row.iter_mut() {
            *v = v.ln_1p();
        }
    }
    let lo = frames
        .iter()
        .flatten()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hi = frames
        .iter()
        .flatten()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    for row in &mut frames {
        for v in row.iter_mut() {
            *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
        }
    }
    Ok(MelSpectrogram {
        frames,
        frame_hop: cfg.hop,
        fft_size: cfg.fft_size,
        n_mels: cfg.n_mels,
    })
}

/// Orthonormal DCT-II of `input`, first `n_out` coefficients.
fn dct2_ortho(input: &[f64], n_out: usize) -> Vec<f64> {
    let n = input.len() as f64;
    (0..n_out)
        .map(|m| {
            let scale = if m == 0 {
                (1.0 / n).sqrt()
            } else {
                (2.0 / n).sqrt()
            };
            let sum: f64 = input
                .iter()
                .enumerate()
                .map(|(b, &x)| {
                    x * (std::f64::consts::PI * m as f64 * (2.0 * b as f64 + 1.0) / (2.0 * n)).cos()
                })
                .sum();
            scale * sum
        })
        .collect()
}

// floor relative to the frame's peak energy, so global amplitude scaling
// shifts every log-mel value equally and moves only C0
const LOG_FLOOR_REL: f64 = 1e-10;

/// MFCCs via mel filterbank -> natural log -> orthonormal DCT-II.
pub fn mfcc(audio: &AudioBuffer, cfg: &MfccConfig) -> Result<MfccSequence> {
    if cfg.n_coeffs == 0 || cfg.n_coeffs > cfg.n_mels {
        return Err(Error::Config(format!(
            "n_coeffs must be in 1..={}, got {}",
            cfg.n_mels, cfg.n_coeffs
        )));
    }
    let power = power_frames(audio, cfg.fft_size, cfg.hop)?;
    let bank = mel_filterbank(cfg.n_mels, cfg.fft_size, audio.sample_rate);
    let mel = apply_filterbank(&power, &bank);
    let frames = mel
        .iter()
        .map(|row| {
            let peak = row.iter().cloned().fold(0.0f64, f64::max);
            let floor = if peak > 0.0 {
                peak * LOG_FLOOR_REL
            } else {
                f64::MIN_POSITIVE
            };
            let log_row: Vec<f64> = row.iter().map(|&e| e.max(floor).ln()).collect();
            dct2_ortho(&log_row, cfg.n_coeffs)
        })
        .collect();
    Ok(MfccSequence {
        frames,
        n_coeffs: cfg.n_coeffs,
        fft_size: cfg.fft_size,
        hop_length: cfg.hop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::AudioBuffer;

    fn tone(freq: f64, secs: f64, amp: f64) -> AudioBuffer {
        let n = (secs * 16000.0) as usize;
        let samples = (0..n)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / 16000.0).sin())
            .collect();
        AudioBuffer::new(samples, 16000).unwrap()
    }

    fn noise(n: usize, seed: u64) -> AudioBuffer {
        use rand::Rng;
        let mut rng = crate::seeds::rng(seed);
        AudioBuffer::new((0..n).map(|_| rng.gen_range(-0.5..0.5)).collect(), 16000).unwrap()
    }

    /// Independent framing oracle: count window placements directly.
    fn framing_oracle(len: usize, fft: usize, hop: usize) -> usize {
        let mut t = 0;
        let mut start = 0;
        while start + fft <= len {
            t += 1;
            start += hop;
        }
        t
    }

    #[test]
    fn one_second_gives_49_frames() {
        let audio = tone(440.0, 1.0, 0.5);
        let spec = mel_spectrogram(&audio, &MelConfig::default()).unwrap();
        assert_eq!(spec.num_frames(), 49);
        assert_eq!(spec.num_frames(), framing_oracle(16000, 512, 320));
        assert_eq!(spec.frames[0].len(), 32);
    }

    #[test]
    fn frame_count_matches_oracle() {
        for len in [512, 513, 831, 832, 833, 16000, 20000] {
            for hop in [160, 320, 480] {
                assert_eq!(
                    num_frames(len, 512, hop),
                    framing_oracle(len, 512, hop),
                    "len={len} hop={hop}"
                );
            }
        }
    }

    #[test]
    fn exactly_fft_size_gives_one_frame() {
        let audio = noise(512, 1);
        let seq = mfcc(&audio, &MfccConfig::default()).unwrap();
        assert_eq!(seq.num_frames(), 1);
    }

    #[test]
    fn too_short_audio_errors() {
        let audio = noise(511, 2);
        assert!(matches!(
            mel_spectrogram(&audio, &MelConfig::default()),
            Err(Error::AudioTooShort { .. })
        ));
    }

    #[test]
    fn normalisation_attains_bounds() {
        let audio = noise(16000, 3);
        let spec = mel_spectrogram(&audio, &MelConfig::default()).unwrap();
        let vals: Vec<f64> = spec.frames.iter().flatten().cloned().collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(lo, 0.0);
        assert_eq!(hi, 1.0);
        assert!(vals.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn zero_signal_normalises_to_zeros() {
        let audio = AudioBuffer::new(vec![0.0; 16000], 16000).unwrap();
        let spec = mel_spectrogram(&audio, &MelConfig::default()).unwrap();
        assert!(spec.frames.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn tone_energy_lands_in_matching_mel_bin() {
        let audio = tone(1000.0, 1.0, 0.5);
        // un-normalised check through the filterbank directly on a DFT oracle
        let bank = mel_filterbank(32, 512, 16000);
        // direct O(n^2) DFT of the first frame
        let window = hann_periodic(512);
        let mut power = vec![0.0; 257];
        for (b, p) in power.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for j in 0..512 {
                let ang = -2.0 * std::f64::consts::PI * b as f64 * j as f64 / 512.0;
                let x = audio.samples[j] * window[j];
                re += x * ang.cos();
                im += x * ang.sin();
            }
            *p = re * re + im * im;
        }
        let mel_oracle: Vec<f64> = bank
            .iter()
            .map(|f| f.iter().zip(&power).map(|(w, p)| w * p).sum())
            .collect();
        let oracle_argmax = mel_oracle
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;

        // the fft-based spectrogram must agree, frame after frame
        let spec = mel_spectrogram(&audio, &MelConfig::default()).unwrap();
        for frame in &spec.frames {
            let am = frame
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            assert_eq!(am, oracle_argmax);
        }
        // the argmax bin covers 1 kHz
        let bin_hz: f64 = 16000.0 / 512.0;
        let covering: Vec<usize> = bank
            .iter()
            .enumerate()
            .filter(|(_, f)| {
                let b = (1000.0 / bin_hz).round() as usize;
                f[b] > 0.0
            })
            .map(|(i, _)| i)
            .collect();
        assert!(covering.contains(&oracle_argmax));
    }

    #[test]
    fn filterbank_rows_positive_and_tile_spectrum() {
        let bank = mel_filterbank(32, 512, 16000);
        for row in &bank {
            assert!(row.iter().sum::<f64>() > 0.0);
        }
        // every interior bin is covered by some filter
        let first_center = bank[0]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let last_center = bank[31]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        for b in first_center..=last_center {
            let cover: f64 = bank.iter().map(|f| f[b]).sum();
            assert!(cover > 0.0, "bin {b} uncovered");
        }
    }

    /// Independent oracle: DCT of log-mel computed with a separate direct
    /// implementation (different summation path, explicit basis matrix).
    fn dct_oracle(input: &[f64], n_out: usize) -> Vec<f64> {
        let n = input.len();
        let mut basis = vec![vec![0.0; n]; n_out];
        for (m, row) in basis.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = (std::f64::consts::PI / n as f64 * (b as f64 + 0.5) * m as f64).cos();
            }
        }
        (0..n_out)
            .map(|m| {
                let s: f64 = basis[m].iter().zip(input).map(|(a, b)| a * b).sum();
                s * if m == 0 {
                    (1.0 / n as f64).sqrt()
                } else {
                    (2.0 / n as f64).sqrt()
                }
            })
            .collect()
    }

    #[test]
    fn dct_matches_independent_oracle() {
        let input: Vec<f64> = (0..32).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let ours = dct2_ortho(&input, 11);
        let oracle = dct_oracle(&input, 11);
        for (a, b) in ours.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn white_noise_mfcc_concentrates_in_c0() {
        let audio = noise(32000, 4);
        let seq = mfcc(&audio, &MfccConfig::default()).unwrap();
        let t = seq.num_frames() as f64;
        let mean: Vec<f64> = (0..11)
            .map(|m| seq.frames.iter().map(|f| f[m]).sum::<f64>() / t)
            .collect();
        for m in 1..11 {
            assert!(
                mean[m].abs() < 0.12 * mean[0].abs(),
                "C{m}={} vs C0={}",
                mean[m],
                mean[0]
            );
        }
    }

    #[test]
    fn amplitude_scaling_moves_only_c0() {
        let a = tone(700.0, 0.5, 0.6);
        let b = tone(700.0, 0.5, 0.15);
        let fa = mfcc(&a, &MfccConfig::default()).unwrap();
        let fb = mfcc(&b, &MfccConfig::default()).unwrap();
        for (ra, rb) in fa.frames.iter().zip(&fb.frames) {
            for m in 1..11 {
                let denom = ra[m].abs().max(1.0);
                assert!(
                    (ra[m] - rb[m]).abs() / denom < 1e-6,
                    "C{m} differs: {} vs {}",
                    ra[m],
                    rb[m]
                );
            }
        }
    }
}
