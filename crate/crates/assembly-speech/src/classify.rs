//! Per-class recurrent areas with resonance readout.
//!
//! One plastic recurrent area per class learns that class's spectro-temporal
//! trajectory. At test time each area runs frozen over the candidate segment;
//! the time-averaged total drive of the k winning neurons (the resonance
//! score) picks the label.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::area::{k_cap, Area, AreaConfig, Assembly, SpikeFrame};
use crate::error::{Error, Result};
use crate::eval::{classification_report, ClassificationReport};
use crate::seeds;

/// A labelled (or unlabelled) run of contiguous spike frames.
#[derive(Debug, Clone)]
pub struct Segment {
    pub frames: Vec<SpikeFrame>,
    pub label: Option<String>,
    pub utterance_id: String,
    pub start_frame: usize,
    pub end_frame: usize,
}

impl Segment {
    pub fn new(frames: Vec<SpikeFrame>, label: impl Into<Option<String>>) -> Self {
        let end = frames.len();
        Segment {
            frames,
            label: label.into(),
            utterance_id: String::new(),
            start_frame: 0,
            end_frame: end,
        }
    }
}

/// Bank of per-class areas. Labels are kept sorted so that argmax ties break
/// toward the lexicographically smallest label.
pub struct ClassBank {
    labels: Vec<String>,
    areas: Vec<Area>,
}

impl ClassBank {
    /// One area per label, identical configuration except for the seed,
    /// which is derived from (global seed, label).
    pub fn build(
        labels: &[String],
        template: &AreaConfig,
        input_width: usize,
        global_seed: u64,
    ) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::Config("class bank needs at least 2 labels".into()));
        }
        let mut labels: Vec<String> = labels.to_vec();
        labels.sort();
        labels.dedup();
        let areas = labels
            .iter()
            .map(|label| {
                let mut cfg = template.clone();
                cfg.seed = seeds::derive(global_seed, "class-area", label);
                Area::build(cfg, input_width)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ClassBank { labels, areas })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn area(&self, label: &str) -> Option<&Area> {
        self.labels
            .binary_search_by(|l| l.as_str().cmp(label))
            .ok()
            .map(|i| &self.areas[i])
    }

    pub fn input_width(&self) -> usize {
        self.areas[0].input_width()
    }

    /// Checksum over all areas' weights, for frozen-eval guarantees.
    pub fn weight_checksum(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for a in &self.areas {
            h.update(a.weight_checksum().as_bytes());
        }
        format!("{:x}", h.finalize())
    }

    /// Train every area on its own class's segments, in corpus order, one
    /// reset per segment. Other classes' areas are untouched by a segment.
    pub fn train(&mut self, segments: &[Segment], epochs: usize) -> Result<()> {
        // index segments per class up front so unknown labels fail fast
        let mut per_class: Vec<Vec<&Segment>> = vec![Vec::new(); self.labels.len()];
        for seg in segments {
            let label = seg
                .label
                .as_ref()
                .ok_or_else(|| Error::UnknownLabel("<unlabelled>".into()))?;
            let idx = self
                .labels
                .binary_search(label)
                .map_err(|_| Error::UnknownLabel(label.clone()))?;
            per_class[idx].push(seg);
        }
        // areas are independent, so training parallelises by class
        self.areas
            .par_iter_mut()
            .zip(per_class.par_iter())
            .try_for_each(|(area, segs)| -> Result<()> {
                for _ in 0..epochs {
                    for seg in segs {
                        area.reset();
                        for frame in &seg.frames {
                            area.step(frame)?;
                        }
                    }
                }
                area.reset();
                Ok(())
            })
    }

    /// Resonance scores for all classes, label-sorted order.
    pub fn resonance_scores(&self, segment: &Segment) -> Result<Vec<f64>> {
        self.areas
            .par_iter()
            .map(|area| resonance(area, segment))
            .collect()
    }

    /// Predicted label and full score vector.
    pub fn classify(&self, segment: &Segment) -> Result<(String, Vec<f64>)> {
        let scores = self.resonance_scores(segment)?;
        let best = scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .unwrap()
            .0;
        Ok((self.labels[best].clone(), scores))
    }

    /// Classify a labelled test set and produce standard metrics.
    pub fn evaluate(&self, segments: &[Segment]) -> Result<ClassificationReport> {
        let predictions = segments
            .par_iter()
            .map(|seg| self.classify(seg).map(|(l, _)| l))
            .collect::<Result<Vec<_>>>()?;
        let truths = segments
            .iter()
            .map(|s| {
                s.label
                    .clone()
                    .ok_or_else(|| Error::UnknownLabel("<unlabelled test segment>".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        classification_report(&predictions, &truths)
    }

    pub fn save(&self, dir: &Path, manifest_extra: &ModelManifest) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let manifest = ModelManifest {
            format_version: MODEL_FORMAT_VERSION,
            labels: self.labels.clone(),
            ..manifest_extra.clone()
        };
        let manifest_path = dir.join("manifest.json");
        let body = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Serialize(e.to_string()))?;
        std::fs::write(&manifest_path, body).map_err(|e| Error::io(&manifest_path, e))?;
        for (label, area) in self.labels.iter().zip(&self.areas) {
            let path = dir.join(format!("class_{label}.area"));
            std::fs::write(&path, area.to_bytes()?).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<(Self, ModelManifest)> {
        let manifest_path = dir.join("manifest.json");
        let body = std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let manifest: ModelManifest =
            serde_json::from_str(&body).map_err(|e| Error::Serialize(e.to_string()))?;
        if manifest.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: manifest.format_version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let mut areas = Vec::with_capacity(manifest.labels.len());
        for label in &manifest.labels {
            let path = dir.join(format!("class_{label}.area"));
            let bytes = std::fs::read(&path).map_err(|_| {
                Error::Integrity(format!("missing area file for class `{label}`"))
            })?;
            areas.push(Area::from_bytes(&bytes)?);
        }
        Ok((
            ClassBank {
                labels: manifest.labels.clone(),
                areas,
            },
            manifest,
        ))
    }
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ModelManifest {
    pub format_version: u32,
    pub labels: Vec<String>,
    /// SHA-256 of the serialised population coder used at train time;
    /// evaluation refuses a mismatched encoder.
    pub encoder_sha256: String,
    pub epochs: usize,
    pub global_seed: u64,
}

/// Sum of the k largest values.
pub fn topk_sum(values: &[f64], k: usize) -> f64 {
    let drive = crate::area::DriveVector {
        values: values.to_vec(),
    };
    let asm = k_cap(&drive, k.min(values.len()));
    asm.indices().iter().map(|&v| values[v as usize]).sum()
}

/// Resonance score: time-averaged total pre-competition drive of the k
/// winning neurons, under frozen dynamics (no plasticity, no refractory
/// bias) starting from a reset state. Pure in the area.
pub fn resonance(area: &Area, segment: &Segment) -> Result<f64> {
    if segment.frames.is_empty() {
        return Err(Error::Config("resonance needs a non-empty segment".into()));
    }
    let k = area.config().k;
    let mut prev = Assembly::empty();
    let mut total = 0.0;
    for frame in &segment.frames {
        let drive = area.drive_with(frame, &prev, None)?;
        let asm = k_cap(&drive, k);
        total += asm.indices().iter().map(|&v| drive.values[v as usize]).sum::<f64>();
        prev = asm;
    }
    Ok(total / segment.frames.len() as f64)
}
