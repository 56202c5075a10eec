//! Scoring: tolerance-window boundary matching and classification metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl MatchCounts {
    pub fn add(&mut self, other: &MatchCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        harmonic(self.precision(), self.recall())
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// One-to-one greedy boundary matching.
///
/// Ground-truth boundaries are visited in time order; each is matched to the
/// nearest unmatched detection within +-tolerance (ties toward the earlier
/// detection). Unmatched detections count as false positives, unmatched
/// truths as false negatives.
pub fn match_boundaries(detected: &[usize], ground_truth: &[usize], tolerance: usize) -> MatchCounts {
    debug_assert!(detected.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(ground_truth.windows(2).all(|w| w[0] < w[1]));
    let mut used = vec![false; detected.len()];
    let mut tp = 0;
    for &gt in ground_truth {
        let mut best: Option<(usize, usize)> = None; // (distance, det index)
        for (i, &det) in detected.iter().enumerate() {
            if used[i] {
                continue;
            }
            let dist = det.abs_diff(gt);
            if dist <= tolerance {
                let better = match best {
                    None => true,
                    // strict < keeps the earlier detection on ties
                    Some((bd, _)) => dist < bd,
                };
                if better {
                    best = Some((dist, i));
                }
            }
        }
        if let Some((_, i)) = best {
            used[i] = true;
            tp += 1;
        }
    }
    MatchCounts {
        tp,
        fp: detected.len() - tp,
        fn_: ground_truth.len() - tp,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryEvalReport {
    pub tolerance_frames: usize,
    /// micro-averaged counts pooled over seeds
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision_mean: f64,
    pub precision_std: f64,
    pub recall_mean: f64,
    pub recall_std: f64,
    pub f1_mean: f64,
    pub f1_std: f64,
    pub per_seed: Vec<SeedScores>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedScores {
    pub seed: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aggregate per-utterance counts into per-seed micro scores, then mean and
/// std across seeds.
pub fn boundary_report(
    per_seed_counts: &[(u64, Vec<MatchCounts>)],
    tolerance_frames: usize,
) -> Result<BoundaryEvalReport> {
    if per_seed_counts.is_empty() || per_seed_counts.iter().any(|(_, v)| v.is_empty()) {
        return Err(Error::Config("boundary report needs at least one utterance".into()));
    }
    let mut per_seed = Vec::new();
    let mut pooled = MatchCounts::default();
    for (seed, counts) in per_seed_counts {
        let mut micro = MatchCounts::default();
        for c in counts {
            micro.add(c);
        }
        pooled.add(&micro);
        per_seed.push(SeedScores {
            seed: *seed,
            precision: micro.precision(),
            recall: micro.recall(),
            f1: micro.f1(),
        });
    }
    let (pm, ps) = mean_std(&per_seed.iter().map(|s| s.precision).collect::<Vec<_>>());
    let (rm, rs) = mean_std(&per_seed.iter().map(|s| s.recall).collect::<Vec<_>>());
    let (fm, fs) = mean_std(&per_seed.iter().map(|s| s.f1).collect::<Vec<_>>());
    Ok(BoundaryEvalReport {
        tolerance_frames,
        tp: pooled.tp,
        fp: pooled.fp,
        fn_: pooled.fn_,
        precision_mean: pm,
        precision_std: ps,
        recall_mean: rm,
        recall_std: rs,
        f1_mean: fm,
        f1_std: fs,
        per_seed,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassScores {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub chance_accuracy: f64,
    pub n_classes: usize,
    pub n_samples: usize,
    pub per_class: Vec<ClassScores>,
    /// counts[i][j] = #(true class i, predicted class j), labels sorted
    pub labels: Vec<String>,
    pub confusion: Vec<Vec<usize>>,
}

impl ClassificationReport {
    /// Row-normalised confusion matrix; zero-support rows stay all-zero.
    pub fn confusion_normalised(&self) -> Vec<Vec<f64>> {
        self.confusion
            .iter()
            .map(|row| {
                let total: usize = row.iter().sum();
                row.iter()
                    .map(|&c| if total > 0 { c as f64 / total as f64 } else { 0.0 })
                    .collect()
            })
            .collect()
    }
}

/// Multi-class metrics over aligned prediction/truth lists. The label set is
/// the union of both lists, sorted.
pub fn classification_report(predictions: &[String], truths: &[String]) -> Result<ClassificationReport> {
    if predictions.len() != truths.len() {
        return Err(Error::Shape {
            expected: truths.len(),
            got: predictions.len(),
        });
    }
    if truths.is_empty() {
        return Err(Error::Config("empty prediction list".into()));
    }
    let mut labels: Vec<String> = truths.iter().chain(predictions).cloned().collect();
    labels.sort();
    labels.dedup();
    let index = |l: &String| labels.binary_search(l).unwrap();
    let c = labels.len();
    let mut confusion = vec![vec![0usize; c]; c];
    let mut correct = 0usize;
    for (p, t) in predictions.iter().zip(truths) {
        confusion[index(t)][index(p)] += 1;
        if p == t {
            correct += 1;
        }
    }
    let per_class = labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let tp = confusion[i][i];
            let support: usize = confusion[i].iter().sum();
            let predicted: usize = confusion.iter().map(|row| row[i]).sum();
            let p = ratio(tp, predicted);
            let r = ratio(tp, support);
            ClassScores {
                label: label.clone(),
                precision: p,
                recall: r,
                f1: harmonic(p, r),
                support,
            }
        })
        .collect();
    Ok(ClassificationReport {
        accuracy: correct as f64 / truths.len() as f64,
        chance_accuracy: 1.0 / c as f64,
        n_classes: c,
        n_samples: truths.len(),
        per_class,
        labels,
        confusion,
    })
}
