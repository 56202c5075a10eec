//! Random-search hyperparameter tuning with a deterministic trial log.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

/// One tunable dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ParamSpec {
    /// Inclusive integer range.
    Int { low: i64, high: i64 },
    /// Uniform real on `[low, high)`.
    Real { low: f64, high: f64 },
    /// Log-uniform real on `[low, high)`; both bounds must be positive.
    LogReal { low: f64, high: f64 },
    /// One of a fixed set of strings.
    Categorical { choices: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Str(String),
}

impl ParamValue {
    pub fn as_i64(&self) -> Option<i64> {
        match self {
            ParamValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Real(v) => Some(*v),
            ParamValue::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Str(s) => write!(f, "{s}"),
        }
    }
}

pub type Candidate = BTreeMap<String, ParamValue>;

/// A named set of dimensions to sample from. Iteration order (and therefore
/// sampling order) follows the sorted parameter names, so a space built in
/// any insertion order samples identically.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SearchSpace {
    params: BTreeMap<String, ParamSpec>,
}

impl SearchSpace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn int(mut self, name: &str, low: i64, high: i64) -> Self {
        self.params.insert(name.into(), ParamSpec::Int { low, high });
        self
    }

    pub fn real(mut self, name: &str, low: f64, high: f64) -> Self {
        self.params.insert(name.into(), ParamSpec::Real { low, high });
        self
    }

    pub fn log_real(mut self, name: &str, low: f64, high: f64) -> Self {
        self.params.insert(name.into(), ParamSpec::LogReal { low, high });
        self
    }

    pub fn categorical(mut self, name: &str, choices: &[&str]) -> Self {
        self.params.insert(
            name.into(),
            ParamSpec::Categorical {
                choices: choices.iter().map(|s| s.to_string()).collect(),
            },
        );
        self
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, spec) in &self.params {
            let bad = |reason: &str| Error::Config(format!("parameter `{name}`: {reason}"));
            match spec {
                ParamSpec::Int { low, high } if low > high => {
                    return Err(bad("low exceeds high"));
                }
                ParamSpec::Real { low, high } if !(low < high) => {
                    return Err(bad("requires low < high"));
                }
                ParamSpec::LogReal { low, high } => {
                    if !(*low > 0.0 && low < high) {
                        return Err(bad("requires 0 < low < high"));
                    }
                }
                ParamSpec::Categorical { choices } if choices.is_empty() => {
                    return Err(bad("no choices"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Candidate {
        self.params
            .iter()
            .map(|(name, spec)| {
                let value = match spec {
                    ParamSpec::Int { low, high } => ParamValue::Int(rng.gen_range(*low..=*high)),
                    ParamSpec::Real { low, high } => ParamValue::Real(rng.gen_range(*low..*high)),
                    ParamSpec::LogReal { low, high } => {
                        let v = rng.gen_range(low.ln()..high.ln()).exp();
                        ParamValue::Real(v)
                    }
                    ParamSpec::Categorical { choices } => {
                        ParamValue::Str(choices[rng.gen_range(0..choices.len())].clone())
                    }
                };
                (name.clone(), value)
            })
            .collect()
    }
}

/// Outcome of one evaluated candidate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub candidate: Candidate,
    /// `None` when the objective returned an error for this candidate.
    pub score: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchResult {
    pub trials: Vec<Trial>,
    pub best: Option<Trial>,
}

/// Evaluate `n_trials` random candidates, maximising the objective. Failed
/// trials are logged and skipped; ties keep the earlier trial. Each trial's
/// candidate depends only on `(seed, trial index)`, not on objective results,
/// so reruns with the same seed evaluate the same candidates.
pub fn random_search<F>(
    space: &SearchSpace,
    mut objective: F,
    n_trials: usize,
    seed: u64,
) -> Result<SearchResult>
where
    F: FnMut(&Candidate) -> Result<f64>,
{
    space.validate()?;
    if space.is_empty() {
        return Err(Error::Config("search space is empty".into()));
    }
    let mut trials = Vec::with_capacity(n_trials);
    let mut best: Option<Trial> = None;
    for index in 0..n_trials {
        let mut rng = seeds::rng(seeds::derive_indexed(seed, "tuner-trial", index as u64));
        let candidate = space.sample(&mut rng);
        let trial = match objective(&candidate) {
            Ok(score) if score.is_finite() => Trial {
                index,
                candidate,
                score: Some(score),
                error: None,
            },
            Ok(score) => Trial {
                index,
                candidate,
                score: None,
                error: Some(format!("non-finite score {score}")),
            },
            Err(e) => Trial {
                index,
                candidate,
                score: None,
                error: Some(e.to_string()),
            },
        };
        if let Some(s) = trial.score {
            if best.as_ref().and_then(|b| b.score).map_or(true, |bs| s > bs) {
                best = Some(trial.clone());
            }
        }
        trials.push(trial);
    }
    Ok(SearchResult { trials, best })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> SearchSpace {
        SearchSpace::new()
            .int("k", 1, 100)
            .real("tau", 0.0, 1.0)
            .log_real("beta", 1e-5, 1e-1)
            .categorical("rule", &["hebbian", "abs"])
    }

    #[test]
    fn samples_respect_bounds() {
        let sp = space();
        let mut rng = seeds::rng(1);
        for _ in 0..200 {
            let c = sp.sample(&mut rng);
            let k = c["k"].as_i64().unwrap();
            assert!((1..=100).contains(&k));
            let tau = c["tau"].as_f64().unwrap();
            assert!((0.0..1.0).contains(&tau));
            let beta = c["beta"].as_f64().unwrap();
            assert!((1e-5..1e-1).contains(&beta));
            assert!(matches!(c["rule"].as_str().unwrap(), "hebbian" | "abs"));
        }
    }

    #[test]
    fn log_real_spreads_across_decades() {
        let sp = SearchSpace::new().log_real("beta", 1e-5, 1e-1);
        let mut rng = seeds::rng(2);
        let mut below_1e3 = 0;
        let mut above_1e3 = 0;
        for _ in 0..400 {
            let v = sp.sample(&mut rng)["beta"].as_f64().unwrap();
            if v < 1e-3 {
                below_1e3 += 1;
            } else {
                above_1e3 += 1;
            }
        }
        // log-uniform puts half the mass in each half of the exponent range
        assert!(below_1e3 > 120 && above_1e3 > 120);
    }

    #[test]
    fn same_seed_same_trials() {
        let sp = space();
        let obj = |c: &Candidate| Ok(c["tau"].as_f64().unwrap());
        let a = random_search(&sp, obj, 20, 5).unwrap();
        let b = random_search(&sp, obj, 20, 5).unwrap();
        for (x, y) in a.trials.iter().zip(&b.trials) {
            assert_eq!(x.candidate, y.candidate);
            assert_eq!(x.score, y.score);
        }
        assert_eq!(
            a.best.as_ref().unwrap().index,
            b.best.as_ref().unwrap().index
        );
    }

    #[test]
    fn finds_near_optimum_of_smooth_objective() {
        let sp = SearchSpace::new().real("x", 0.0, 1.0).real("y", 0.0, 1.0);
        let obj = |c: &Candidate| {
            let x = c["x"].as_f64().unwrap();
            let y = c["y"].as_f64().unwrap();
            Ok(-((x - 0.3).powi(2) + (y - 0.7).powi(2)))
        };
        let result = random_search(&sp, obj, 200, 11).unwrap();
        let best = result.best.unwrap();
        assert!(best.score.unwrap() > -0.02);
    }

    #[test]
    fn failed_trials_are_logged_and_skipped() {
        let sp = SearchSpace::new().int("k", 0, 9);
        let obj = |c: &Candidate| {
            let k = c["k"].as_i64().unwrap();
            if k % 2 == 0 {
                Err(Error::Config("even k unsupported".into()))
            } else {
                Ok(k as f64)
            }
        };
        let result = random_search(&sp, obj, 50, 3).unwrap();
        assert_eq!(result.trials.len(), 50);
        assert!(result.trials.iter().any(|t| t.error.is_some()));
        let best = result.best.unwrap();
        assert_eq!(best.candidate["k"].as_i64().unwrap() % 2, 1);
        // best among successful trials only
        let max_ok = result
            .trials
            .iter()
            .filter_map(|t| t.score)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(best.score.unwrap(), max_ok);
    }

    #[test]
    fn single_point_space_returns_that_point() {
        let sp = SearchSpace::new().int("k", 7, 7).categorical("rule", &["abs"]);
        let result = random_search(&sp, |_| Ok(1.0), 3, 0).unwrap();
        for t in &result.trials {
            assert_eq!(t.candidate["k"].as_i64(), Some(7));
            assert_eq!(t.candidate["rule"].as_str(), Some("abs"));
        }
    }

    #[test]
    fn invalid_spaces_rejected() {
        assert!(random_search(&SearchSpace::new(), |_| Ok(0.0), 1, 0).is_err());
        let bad = SearchSpace::new().log_real("b", 0.0, 1.0);
        assert!(bad.validate().is_err());
        let bad = SearchSpace::new().real("r", 1.0, 1.0);
        assert!(bad.validate().is_err());
        let bad = SearchSpace::new().int("i", 5, 2);
        assert!(bad.validate().is_err());
    }
}
