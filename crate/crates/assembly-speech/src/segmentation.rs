//! Two-level refractory hierarchy for unsupervised boundary detection.
//!
//! Level 1 consumes binarised mel frames; Level 2 consumes the binary
//! indicator of Level 1's assembly stream. Both run frozen (beta = 0) with
//! the frozen-repeat rule: a candidate assembly overlapping the previous one
//! by at least tau * k re-emits the previous assembly, suppressing
//! micro-turnover. Peaks in the per-utterance-normalised change signal are
//! boundary hypotheses.

use serde::{Deserialize, Serialize};

use crate::area::{Area, AreaConfig, Assembly, PlasticityRule, SpikeFrame};
use crate::error::{Error, Result};
use crate::eval::{self, MatchCounts};

/// Prominence thresholds swept during oracle selection.
pub const PROMINENCE_SWEEP: [f64; 7] = [0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelConfig {
    pub area: AreaConfig,
    /// similarity threshold for the frozen-repeat rule
    pub tau: f64,
    /// minimum peak distance in frames
    pub min_peak_distance: usize,
    /// tolerance window (frames) for boundary scoring at this level
    pub tolerance: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HierarchyConfig {
    pub level1: LevelConfig,
    pub level2: LevelConfig,
}

impl HierarchyConfig {
    /// Reference configuration for 32-bin mel input at a 20 ms hop.
    pub fn default_for_input(input_width: usize, seed: u64) -> Self {
        HierarchyConfig {
            level1: LevelConfig {
                area: AreaConfig {
                    n: 1531,
                    k: 135,
                    k_in: input_width.min(32),
                    k_in_rec: 0,
                    rho: 0.989,
                    beta: 0.0,
                    rule: PlasticityRule::Hebbian,
                    seed,
                },
                tau: 0.761,
                min_peak_distance: 3,
                tolerance: 2,
            },
            level2: LevelConfig {
                area: AreaConfig {
                    n: 6557,
                    k: 588,
                    k_in: 1513,
                    k_in_rec: 0,
                    rho: 0.092,
                    beta: 0.0,
                    rule: PlasticityRule::Hebbian,
                    seed: seed.wrapping_add(1),
                },
                tau: 0.745,
                min_peak_distance: 7,
                tolerance: 5,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, l) in [("level1", &self.level1), ("level2", &self.level2)] {
            if !(0.0..=1.0).contains(&l.tau) {
                return Err(Error::Config(format!("{name}: tau must be in [0, 1]")));
            }
            if l.min_peak_distance == 0 {
                return Err(Error::Config(format!("{name}: min peak distance must be >= 1")));
            }
            if l.area.beta != 0.0 {
                return Err(Error::Config(format!("{name}: hierarchy areas must be frozen (beta = 0)")));
            }
        }
        Ok(())
    }
}

/// Per-frame assembly-reconfiguration values in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeSignal {
    pub values: Vec<f64>,
}

impl ChangeSignal {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Raw change values c(t) = 1 - overlap(a(t), a(t-1)) / k for t = 1..T-1.
/// The first frame has no predecessor and is excluded.
pub fn change_signal_raw(assemblies: &[Assembly], k: usize) -> Vec<f64> {
    assemblies
        .windows(2)
        .map(|w| 1.0 - w[0].overlap(&w[1]) as f64 / k as f64)
        .collect()
}

/// Min-max normalise to [0, 1] and pad with a leading 0 so the signal aligns
/// with frame indices. A constant raw signal normalises to all zeros.
pub fn normalise_change(raw: &[f64]) -> ChangeSignal {
    let lo = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut values = Vec::with_capacity(raw.len() + 1);
    values.push(0.0);
    for &v in raw {
        values.push(if span > 0.0 { (v - lo) / span } else { 0.0 });
    }
    ChangeSignal { values }
}

pub struct HierarchyOutput {
    pub level1: ChangeSignal,
    pub level2: ChangeSignal,
    pub level1_assemblies: Vec<Assembly>,
    pub level2_assemblies: Vec<Assembly>,
}

/// A constructed hierarchy: two frozen areas, Level 2 reading Level 1's
/// assembly indicator. One instance per utterance.
pub struct Hierarchy {
    cfg: HierarchyConfig,
    level1: Area,
    level2: Area,
}

impl Hierarchy {
    pub fn build(cfg: HierarchyConfig, input_width: usize) -> Result<Self> {
        cfg.validate()?;
        let level1 = Area::build(cfg.level1.area.clone(), input_width)?;
        let level2 = Area::build(cfg.level2.area.clone(), cfg.level1.area.n)?;
        Ok(Hierarchy { cfg, level1, level2 })
    }

    pub fn config(&self) -> &HierarchyConfig {
        &self.cfg
    }

    /// Combined checksum over both areas' weights.
    pub fn weight_checksum(&self) -> String {
        format!("{}:{}", self.level1.weight_checksum(), self.level2.weight_checksum())
    }

    /// Run one utterance through both levels and emit normalised change
    /// signals. State is reset first, so the instance can be reused.
    pub fn run(&mut self, frames: &[SpikeFrame]) -> Result<HierarchyOutput> {
        self.level1.reset();
        self.level2.reset();
        let n1 = self.cfg.level1.area.n;
        let mut a1s = Vec::with_capacity(frames.len());
        let mut a2s = Vec::with_capacity(frames.len());
        for frame in frames {
            let a1 = self.level1.step_frozen_repeat(frame, self.cfg.level1.tau)?;
            let a2 = self
                .level2
                .step_frozen_repeat(&a1.to_spike_frame(n1), self.cfg.level2.tau)?;
            a1s.push(a1);
            a2s.push(a2);
        }
        let c1 = normalise_change(&change_signal_raw(&a1s, self.cfg.level1.area.k));
        let c2 = normalise_change(&change_signal_raw(&a2s, self.cfg.level2.area.k));
        Ok(HierarchyOutput {
            level1: c1,
            level2: c2,
            level1_assemblies: a1s,
            level2_assemblies: a2s,
        })
    }
}

/// Detected boundary frames for one utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySet {
    pub frame_indices: Vec<usize>,
    pub prominence_used: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub height: f64,
    pub prominence: f64,
}

/// All local maxima with their topographic prominence, unpruned.
///
/// Plateaus count once, attributed to their left edge. Prominence is the
/// height above the higher of the two lowest valleys separating the peak
/// from nearer higher terrain (or the signal edge).
pub fn find_peaks_with_prominence(values: &[f64]) -> Vec<Peak> {
    let n = values.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 <= n.saturating_sub(1) {
        if values[i] > values[i - 1] {
            // scan over any plateau
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                peaks.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
        .into_iter()
        .map(|p| {
            let h = values[p];
            // left base: min value until the nearest strictly higher point
            let mut left_min = h;
            let mut l = p;
            while l > 0 {
                l -= 1;
                if values[l] > h {
                    break;
                }
                left_min = left_min.min(values[l]);
            }
            let mut right_min = h;
            let mut r = p;
            while r + 1 < n {
                r += 1;
                if values[r] > h {
                    break;
                }
                right_min = right_min.min(values[r]);
            }
            Peak {
                index: p,
                height: h,
                prominence: h - left_min.max(right_min),
            }
        })
        .collect()
}

/// Peaks with prominence >= `prominence`, pruned so adjacent detections are
/// at least `min_distance` frames apart (higher peak wins, ties toward the
/// earlier frame).
pub fn detect_peaks(signal: &ChangeSignal, prominence: f64, min_distance: usize) -> BoundarySet {
    let mut candidates: Vec<Peak> = find_peaks_with_prominence(&signal.values)
        .into_iter()
        .filter(|p| p.prominence >= prominence)
        .collect();
    candidates.sort_by(|a, b| b.height.total_cmp(&a.height).then(a.index.cmp(&b.index)));
    let mut kept: Vec<usize> = Vec::new();
    for p in candidates {
        if kept.iter().all(|&q| p.index.abs_diff(q) >= min_distance) {
            kept.push(p.index);
        }
    }
    kept.sort_unstable();
    BoundarySet {
        frame_indices: kept,
        prominence_used: prominence,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub best_f1: f64,
    pub best_prominence: f64,
    pub boundaries: BoundarySet,
    pub counts: MatchCounts,
}

/// Run the prominence sweep and return the per-utterance F1-maximising
/// configuration (ties toward the smaller prominence).
pub fn oracle_sweep(
    signal: &ChangeSignal,
    ground_truth: &[usize],
    tolerance: usize,
    min_distance: usize,
) -> Result<SweepResult> {
    if ground_truth.is_empty() {
        return Err(Error::Config("oracle sweep needs non-empty ground truth".into()));
    }
    let mut best: Option<SweepResult> = None;
    for &prom in &PROMINENCE_SWEEP {
        let bs = detect_peaks(signal, prom, min_distance);
        let counts = eval::match_boundaries(&bs.frame_indices, ground_truth, tolerance);
        let f1 = counts.f1();
        let better = match &best {
            None => true,
            Some(b) => f1 > b.best_f1,
        };
        if better {
            best = Some(SweepResult {
                best_f1: f1,
                best_prominence: prom,
                boundaries: bs,
                counts,
            });
        }
    }
    Ok(best.unwrap())
}
