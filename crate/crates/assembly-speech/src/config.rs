//! Run configuration: one TOML file drives every command. Missing keys fall
//! back to the reference defaults, so a minimal config only names the corpus.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::area::{AreaConfig, PlasticityRule};
use crate::encoding::ProbMelEncoderConfig;
use crate::error::{Error, Result};
use crate::features::{MelConfig, MfccConfig};
use crate::segmentation::HierarchyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusKind {
    /// Directory of `<id>.wav` + `<id>.phn` + `<id>.wrd` files.
    Annotated,
    /// One folder per word, each full of one-second clips.
    SpeechCommands,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    pub kind: CorpusKind,
    pub root: PathBuf,
    /// Utterance-id list (one per line) selecting the training set for
    /// annotated corpora. Defaults to every wav in the root.
    pub manifest: Option<PathBuf>,
    /// Utterance-id list selecting the held-out test set (annotated).
    pub test_manifest: Option<PathBuf>,
    /// Word folders to use (speech-commands).
    pub words: Vec<String>,
    pub n_train: usize,
    pub n_test: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            kind: CorpusKind::Annotated,
            root: PathBuf::from("."),
            manifest: None,
            test_manifest: None,
            words: Vec::new(),
            n_train: 200,
            n_test: 50,
        }
    }
}

/// Population-coder fitting parameters. The sigma fraction scales the
/// spacing between adjacent tuning-curve centers.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct PopulationSettings {
    pub n_pop: usize,
    pub sigma_frac: f64,
    pub threshold: f64,
}

impl Default for PopulationSettings {
    fn default() -> Self {
        PopulationSettings {
            n_pop: 14,
            sigma_frac: 0.5,
            threshold: 0.044,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierSettings {
    pub epochs: usize,
    pub area: AreaConfig,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        ClassifierSettings {
            epochs: 13,
            area: AreaConfig {
                n: 2250,
                k: 732,
                k_in: 87,
                k_in_rec: 1245,
                rho: 0.0,
                beta: 3.1e-4,
                rule: PlasticityRule::Abs,
                seed: 0,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TuneSettings {
    pub n_trials: usize,
    /// Number of seeds per trial; fewer than the final evaluation to keep
    /// the search cheap.
    pub n_seeds: usize,
    /// Search ranges for the tuned level's refractory rate, similarity
    /// threshold, and minimum peak distance.
    pub rho_range: [f64; 2],
    pub tau_range: [f64; 2],
    pub distance_range: [i64; 2],
}

impl Default for TuneSettings {
    fn default() -> Self {
        TuneSettings {
            n_trials: 20,
            n_seeds: 2,
            rho_range: [0.05, 0.999],
            tau_range: [0.2, 0.999],
            distance_range: [1, 12],
        }
    }
}

/// Partial segmentation settings as they appear in TOML: any omitted key
/// keeps its reference default, so a config can override a single value.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct AreaPatch {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub k_in: Option<usize>,
    pub k_in_rec: Option<usize>,
    pub rho: Option<f64>,
    pub beta: Option<f64>,
    pub rule: Option<PlasticityRule>,
}

impl AreaPatch {
    fn apply(&self, base: &mut AreaConfig) {
        if let Some(v) = self.n {
            base.n = v;
        }
        if let Some(v) = self.k {
            base.k = v;
        }
        if let Some(v) = self.k_in {
            base.k_in = v;
        }
        if let Some(v) = self.k_in_rec {
            base.k_in_rec = v;
        }
        if let Some(v) = self.rho {
            base.rho = v;
        }
        if let Some(v) = self.beta {
            base.beta = v;
        }
        if let Some(v) = self.rule {
            base.rule = v;
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct LevelPatch {
    pub area: AreaPatch,
    pub tau: Option<f64>,
    pub min_peak_distance: Option<usize>,
    pub tolerance: Option<usize>,
}

impl LevelPatch {
    fn apply(&self, base: &mut crate::segmentation::LevelConfig) {
        self.area.apply(&mut base.area);
        if let Some(v) = self.tau {
            base.tau = v;
        }
        if let Some(v) = self.min_peak_distance {
            base.min_peak_distance = v;
        }
        if let Some(v) = self.tolerance {
            base.tolerance = v;
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct SegmentationPatch {
    pub level1: LevelPatch,
    pub level2: LevelPatch,
}

#[derive(Deserialize)]
#[serde(default)]
struct RawRunConfig {
    global_seed: u64,
    n_seeds: usize,
    output_dir: PathBuf,
    threads: usize,
    corpus: CorpusConfig,
    mel: MelConfig,
    mfcc: MfccConfig,
    prob_mel: ProbMelEncoderConfig,
    population: PopulationSettings,
    segmentation: SegmentationPatch,
    classifier: ClassifierSettings,
    tune: TuneSettings,
}

impl Default for RawRunConfig {
    fn default() -> Self {
        let d = RunConfig::default();
        RawRunConfig {
            global_seed: d.global_seed,
            n_seeds: d.n_seeds,
            output_dir: d.output_dir,
            threads: d.threads,
            corpus: d.corpus,
            mel: d.mel,
            mfcc: d.mfcc,
            prob_mel: d.prob_mel,
            population: d.population,
            segmentation: SegmentationPatch::default(),
            classifier: d.classifier,
            tune: d.tune,
        }
    }
}

impl From<RawRunConfig> for RunConfig {
    fn from(raw: RawRunConfig) -> Self {
        let mut seg = HierarchyConfig::default_for_input(raw.mel.n_mels, 0);
        raw.segmentation.level1.apply(&mut seg.level1);
        raw.segmentation.level2.apply(&mut seg.level2);
        RunConfig {
            global_seed: raw.global_seed,
            n_seeds: raw.n_seeds,
            output_dir: raw.output_dir,
            threads: raw.threads,
            corpus: raw.corpus,
            mel: raw.mel,
            mfcc: raw.mfcc,
            prob_mel: raw.prob_mel,
            population: raw.population,
            segmentation: seg,
            classifier: raw.classifier,
            tune: raw.tune,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "RawRunConfig")]
pub struct RunConfig {
    pub global_seed: u64,
    /// Independent area-initialisation repeats for segmentation reports.
    pub n_seeds: usize,
    pub output_dir: PathBuf,
    /// 0 uses one thread per logical core.
    pub threads: usize,
    pub corpus: CorpusConfig,
    pub mel: MelConfig,
    pub mfcc: MfccConfig,
    pub prob_mel: ProbMelEncoderConfig,
    pub population: PopulationSettings,
    pub segmentation: HierarchyConfig,
    pub classifier: ClassifierSettings,
    pub tune: TuneSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            global_seed: 42,
            n_seeds: 10,
            output_dir: PathBuf::from("out"),
            threads: 0,
            corpus: CorpusConfig::default(),
            mel: MelConfig::default(),
            mfcc: MfccConfig::default(),
            prob_mel: ProbMelEncoderConfig::default(),
            population: PopulationSettings::default(),
            segmentation: HierarchyConfig::default_for_input(32, 0),
            classifier: ClassifierSettings::default(),
            tune: TuneSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&body)
    }

    pub fn from_toml(body: &str) -> Result<Self> {
        toml::from_str(body).map_err(|e| Error::Config(format!("bad config file: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_seeds == 0 {
            return Err(Error::Config("n_seeds must be >= 1".into()));
        }
        if !self.corpus.root.exists() {
            return Err(Error::Config(format!(
                "corpus root {} does not exist",
                self.corpus.root.display()
            )));
        }
        self.prob_mel.validate()?;
        self.segmentation.validate()?;
        if self.population.n_pop == 0 {
            return Err(Error::Config("population.n_pop must be >= 1".into()));
        }
        if self.mel.hop == 0 || self.mfcc.hop == 0 {
            return Err(Error::Config("hop must be >= 1".into()));
        }
        Ok(())
    }

    /// Canonical JSON form, embedded into every report.
    pub fn resolved_json(&self) -> Result<serde_json::Value> {
        serde_json::to_value(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// SHA-256 over the canonical JSON form; the content hash reports carry.
    pub fn content_hash(&self) -> Result<String> {
        let body = serde_json::to_string(self).map_err(|e| Error::Serialize(e.to_string()))?;
        let mut h = Sha256::new();
        h.update(body.as_bytes());
        Ok(format!("{:x}", h.finalize()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_toml_gives_reference_defaults() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg.global_seed, 42);
        assert_eq!(cfg.n_seeds, 10);
        assert_eq!(cfg.mel.n_mels, 32);
        assert_eq!(cfg.mfcc.hop, 480);
        assert_eq!(cfg.population.n_pop, 14);
        assert_eq!(cfg.classifier.epochs, 13);
        assert_eq!(cfg.segmentation.level1.area.n, 1531);
        assert_eq!(cfg.segmentation.level2.min_peak_distance, 7);
    }

    #[test]
    fn partial_override_keeps_other_defaults() {
        let cfg = RunConfig::from_toml(
            r#"
global_seed = 7
[corpus]
kind = "speech-commands"
root = "/tmp"
words = ["yes", "no"]
[segmentation.level1]
tau = 0.5
"#,
        )
        .unwrap();
        assert_eq!(cfg.global_seed, 7);
        assert_eq!(cfg.corpus.kind, CorpusKind::SpeechCommands);
        assert_eq!(cfg.segmentation.level1.tau, 0.5);
        // untouched siblings keep defaults
        assert_eq!(cfg.segmentation.level2.tau, 0.745);
        assert_eq!(cfg.n_seeds, 10);
    }

    #[test]
    fn malformed_toml_is_config_error() {
        assert!(matches!(
            RunConfig::from_toml("global_seed = \"not a number\""),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn content_hash_tracks_changes() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.content_hash().unwrap(), b.content_hash().unwrap());
        b.global_seed = 43;
        assert_ne!(a.content_hash().unwrap(), b.content_hash().unwrap());
    }

    #[test]
    fn validation_rejects_missing_root() {
        let mut cfg = RunConfig::default();
        cfg.corpus.root = PathBuf::from("/definitely/not/here");
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
