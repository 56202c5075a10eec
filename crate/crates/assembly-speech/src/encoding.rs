//! Binary spike encoders.
//!
//! Two encoders bridge continuous features and sparse binary inputs:
//! probabilistic mel binarisation (power-law compression, calibrated scale,
//! per-bin Bernoulli sampling) and Gaussian population coding of MFCCs.

use serde::{Deserialize, Serialize};

use crate::area::SpikeFrame;
use crate::error::{Error, Result};
use crate::features::{MelSpectrogram, MfccSequence};
use crate::seeds;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbMelEncoderConfig {
    pub gamma: f64,
    pub target_active_fraction: f64,
    pub seed: u64,
}

impl ProbMelEncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma must be in (0, 1], got {}", self.gamma)));
        }
        if !(self.target_active_fraction > 0.0 && self.target_active_fraction < 1.0) {
            return Err(Error::Config(format!(
                "target_active_fraction must be in (0, 1), got {}",
                self.target_active_fraction
            )));
        }
        Ok(())
    }
}

impl Default for ProbMelEncoderConfig {
    fn default() -> Self {
        ProbMelEncoderConfig {
            gamma: 0.5,
            target_active_fraction: 0.10,
            seed: 0,
        }
    }
}

/// Calibrate the scale factor s so that the utterance-wide mean of
/// min(1, s * x^gamma) hits the target active fraction. Bisection, 40 rounds.
fn calibrate_scale(compressed: &[f64], target: f64) -> f64 {
    let mean_at = |s: f64| -> f64 {
        compressed.iter().map(|&c| (s * c).min(1.0)).sum::<f64>() / compressed.len() as f64
    };
    let mut hi = 1.0;
    while mean_at(hi) < target && hi < 1e12 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if mean_at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Per-frame firing probabilities p_i = clamp(s * x_i^gamma, 0, 1).
pub fn prob_mel_probabilities(spec: &MelSpectrogram, cfg: &ProbMelEncoderConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let compressed: Vec<f64> = spec
        .frames
        .iter()
        .flatten()
        .map(|&x| x.powf(cfg.gamma))
        .collect();
    if compressed.is_empty() {
        return Err(Error::Config("empty spectrogram".into()));
    }
    let s = if compressed.iter().all(|&c| c == 0.0) {
        0.0
    } else {
        calibrate_scale(&compressed, cfg.target_active_fraction)
    };
    Ok(spec
        .frames
        .iter()
        .map(|row| row.iter().map(|&x| (s * x.powf(cfg.gamma)).clamp(0.0, 1.0)).collect())
        .collect())
}

/// Bernoulli-sample spike frames from a normalised mel spectrogram.
///
/// Each frame draws from an RNG stream derived from (seed, frame index), so
/// frames can be produced in any order with identical results. Callers give
/// each utterance its own `cfg.seed` (derived from the global seed and the
/// utterance id).
pub fn prob_mel_encode(spec: &MelSpectrogram, cfg: &ProbMelEncoderConfig) -> Result<Vec<SpikeFrame>> {
    use rand::Rng;
    let probs = prob_mel_probabilities(spec, cfg)?;
    Ok(probs
        .iter()
        .enumerate()
        .map(|(t, row)| {
            let mut rng = seeds::rng(seeds::derive_indexed(cfg.seed, "prob-mel-frame", t as u64));
            SpikeFrame::new(row.iter().map(|&p| rng.gen::<f64>() < p).collect())
        })
        .collect())
}

/// Gaussian population coder over MFCC coefficients.
///
/// Coefficient m is represented by `n_pop` neurons with centers tiling the
/// 1st..99th percentile range of the training data; a value activates neuron
/// j when exp(-(x-mu_j)^2 / 2 sigma^2) exceeds the threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PopulationCoder {
    pub n_coeffs: usize,
    pub n_pop: usize,
    /// centers[m][j]: preferred value of neuron j for coefficient m
    pub centers: Vec<Vec<f64>>,
    /// one tuning width per coefficient
    pub sigma: Vec<f64>,
    pub threshold: f64,
}

/// Linear-interpolation percentile of a sorted slice, q in [0, 100].
fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q / 100.0 * (n - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < n {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[n - 1]
    }
}

pub fn fit_population_coder(
    train: &[MfccSequence],
    n_pop: usize,
    sigma_frac: f64,
    threshold: f64,
) -> Result<PopulationCoder> {
    if train.is_empty() || n_pop == 0 {
        return Err(Error::Config("need training data and n_pop >= 1".into()));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Config(format!("threshold must be in (0, 1), got {threshold}")));
    }
    if sigma_frac <= 0.0 {
        return Err(Error::Config(format!("sigma_frac must be positive, got {sigma_frac}")));
    }
    let n_coeffs = train[0].n_coeffs;
    let mut centers = Vec::with_capacity(n_coeffs);
    let mut sigma = Vec::with_capacity(n_coeffs);
    for m in 0..n_coeffs {
        let mut vals: Vec<f64> = train
            .iter()
            .flat_map(|seq| seq.frames.iter().map(move |f| f[m]))
            .collect();
        vals.sort_by(f64::total_cmp);
        let lo = percentile_sorted(&vals, 1.0);
        let hi = percentile_sorted(&vals, 99.0);
        if !(hi > lo) {
            return Err(Error::DegenerateRange { coeff: m });
        }
        let (cs, spacing) = if n_pop == 1 {
            (vec![0.5 * (lo + hi)], hi - lo)
        } else {
            let spacing = (hi - lo) / (n_pop - 1) as f64;
            ((0..n_pop).map(|j| lo + spacing * j as f64).collect(), spacing)
        };
        centers.push(cs);
        sigma.push(sigma_frac * spacing);
    }
    Ok(PopulationCoder {
        n_coeffs,
        n_pop,
        centers,
        sigma,
        threshold,
    })
}

impl PopulationCoder {
    /// Output spike-frame width: n_coeffs * n_pop.
    pub fn width(&self) -> usize {
        self.n_coeffs * self.n_pop
    }

    /// Tuning-curve response of neuron j of coefficient m to value x.
    pub fn response(&self, m: usize, j: usize, x: f64) -> f64 {
        let d = x - self.centers[m][j];
        (-d * d / (2.0 * self.sigma[m] * self.sigma[m])).exp()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Serialize(e.to_string()))
    }
}

pub fn population_encode(seq: &MfccSequence, coder: &PopulationCoder) -> Result<Vec<SpikeFrame>> {
    if seq.n_coeffs != coder.n_coeffs {
        return Err(Error::Shape {
            expected: coder.n_coeffs,
            got: seq.n_coeffs,
        });
    }
    Ok(seq
        .frames
        .iter()
        .map(|frame| {
            let mut bits = Vec::with_capacity(coder.width());
            for (m, &x) in frame.iter().enumerate() {
                for j in 0..coder.n_pop {
                    bits.push(coder.response(m, j, x) > coder.threshold);
                }
            }
            SpikeFrame::new(bits)
        })
        .collect())
}
