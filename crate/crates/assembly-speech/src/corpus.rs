//! Corpus ingestion: TIMIT-style time-aligned annotations and
//! Speech-Commands-style directory trees.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::audio::{decode_wav, AudioBuffer};
use crate::error::{Error, Result};
use crate::seeds;

/// One time-aligned annotation span, in sample offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start_sample: usize,
    pub end_sample: usize,
    pub label: String,
    pub silence: bool,
}

#[derive(Debug, Clone)]
pub struct AnnotatedUtterance {
    pub audio: AudioBuffer,
    pub phones: Vec<Span>,
    pub words: Vec<Span>,
    pub id: String,
}

/// Folding from the raw phone inventory to the reduced class set, with
/// silence markers flagged and discard markers (mapped to `-`) removed.
#[derive(Debug, Clone)]
pub struct PhoneMap {
    mapping: BTreeMap<String, String>,
    silence: BTreeSet<String>,
}

const STANDARD_39: &str = include_str!("../data/timit_phone_map_39.tsv");

impl PhoneMap {
    /// The commonly used 61-to-39 folding with closures and silence markers
    /// folded to `sil`, and the glottal stop discarded.
    pub fn standard_39() -> Self {
        Self::parse(STANDARD_39).expect("embedded phone map is valid")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&body)
    }

    fn parse(body: &str) -> Result<Self> {
        let mut mapping = BTreeMap::new();
        for line in body.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (raw, folded) = match (it.next(), it.next()) {
                (Some(a), Some(b)) => (a.to_string(), b.to_string()),
                _ => return Err(Error::Config(format!("bad phone map line: `{line}`"))),
            };
            mapping.insert(raw, folded);
        }
        let silence = BTreeSet::from(["sil".to_string()]);
        Ok(PhoneMap { mapping, silence })
    }

    /// Folded label; `None` means the span is discarded entirely.
    pub fn fold(&self, raw: &str) -> Result<Option<String>> {
        match self.mapping.get(raw) {
            Some(f) if f == "-" => Ok(None),
            Some(f) => Ok(Some(f.clone())),
            None => Err(Error::UnknownLabel(raw.to_string())),
        }
    }

    pub fn is_silence(&self, folded: &str) -> bool {
        self.silence.contains(folded)
    }

    /// The non-silence class inventory.
    pub fn classes(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .mapping
            .values()
            .filter(|f| *f != "-" && !self.silence.contains(*f))
            .cloned()
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Parse a "start end label" annotation file (sample offsets).
fn parse_annotation(path: &Path) -> Result<Vec<(usize, usize, String)>> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in body.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse_err = |reason: &str| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason: reason.to_string(),
        };
        let start: usize = it
            .next()
            .ok_or_else(|| parse_err("missing start"))?
            .parse()
            .map_err(|_| parse_err("start is not an integer"))?;
        let end: usize = it
            .next()
            .ok_or_else(|| parse_err("missing end"))?
            .parse()
            .map_err(|_| parse_err("end is not an integer"))?;
        let label = it.next().ok_or_else(|| parse_err("missing label"))?.to_string();
        if end <= start {
            return Err(parse_err("end must exceed start"));
        }
        out.push((start, end, label));
    }
    Ok(out)
}

fn validate_spans(spans: &[Span], audio_len: usize, path: &Path) -> Result<()> {
    for w in spans.windows(2) {
        if w[1].start_sample < w[0].end_sample {
            return Err(Error::Validation {
                path: path.to_path_buf(),
                reason: format!(
                    "overlapping spans at samples {} and {}",
                    w[0].end_sample, w[1].start_sample
                ),
            });
        }
    }
    if let Some(last) = spans.last() {
        if last.end_sample > audio_len {
            return Err(Error::Validation {
                path: path.to_path_buf(),
                reason: format!(
                    "span ends at {} beyond audio length {}",
                    last.end_sample, audio_len
                ),
            });
        }
    }
    Ok(())
}

/// Load one TIMIT-style utterance: WAV audio plus `.PHN` / `.WRD`
/// annotations, folding phone labels through the map.
pub fn load_timit_utterance(
    wav: &Path,
    phn: &Path,
    wrd: &Path,
    map: &PhoneMap,
) -> Result<AnnotatedUtterance> {
    let audio = decode_wav(wav)?;
    let mut phones = Vec::new();
    for (start, end, raw) in parse_annotation(phn)? {
        if let Some(folded) = map.fold(&raw)? {
            let silence = map.is_silence(&folded);
            phones.push(Span {
                start_sample: start,
                end_sample: end,
                label: folded,
                silence,
            });
        }
    }
    validate_spans(&phones, audio.len(), phn)?;
    let mut words = Vec::new();
    for (start, end, label) in parse_annotation(wrd)? {
        words.push(Span {
            start_sample: start,
            end_sample: end,
            label,
            silence: false,
        });
    }
    validate_spans(&words, audio.len(), wrd)?;
    let id = wav
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(AnnotatedUtterance {
        audio,
        phones,
        words,
        id,
    })
}

/// Frame index of a sample offset at the given hop.
pub fn sample_to_frame(sample: usize, hop: usize) -> usize {
    sample / hop
}

/// Boundary ground truth: one frame index per non-initial span onset.
/// The utterance-initial boundary is excluded from scoring.
pub fn boundary_frames(spans: &[Span], hop: usize) -> Vec<usize> {
    let mut out: Vec<usize> = spans
        .iter()
        .skip(1)
        .map(|s| sample_to_frame(s.start_sample, hop))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Classification segments: (label, start_frame, end_frame) for every
/// non-silence span that covers at least one whole frame, clipped to the
/// utterance's frame count.
pub fn segment_spans(spans: &[Span], hop: usize, total_frames: usize) -> Vec<(String, usize, usize)> {
    spans
        .iter()
        .filter(|s| !s.silence)
        .filter_map(|s| {
            let start = sample_to_frame(s.start_sample, hop);
            let end = sample_to_frame(s.end_sample, hop).min(total_frames);
            (end > start && start < total_frames).then(|| (s.label.clone(), start, end))
        })
        .collect()
}

/// Deterministic per-class train/test partition of a Speech-Commands-style
/// directory tree (one folder per word).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeechCommandsSplit {
    pub train: Vec<(PathBuf, String)>,
    pub test: Vec<(PathBuf, String)>,
    pub seed: u64,
}

pub fn load_speech_commands(
    root: &Path,
    words: &[String],
    n_train: usize,
    n_test: usize,
    seed: u64,
) -> Result<SpeechCommandsSplit> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for word in words {
        let dir = root.join(word);
        if !dir.is_dir() {
            return Err(Error::InsufficientFiles {
                class: word.clone(),
                available: 0,
                requested: n_train + n_test,
            });
        }
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "wav"))
            .collect();
        if files.len() < n_train + n_test {
            return Err(Error::InsufficientFiles {
                class: word.clone(),
                available: files.len(),
                requested: n_train + n_test,
            });
        }
        files.sort();
        let mut rng = seeds::rng(seeds::derive(seed, "speech-commands", word));
        files.shuffle(&mut rng);
        for p in files.drain(..n_train) {
            train.push((p, word.clone()));
        }
        for p in files.drain(..n_test) {
            test.push((p, word.clone()));
        }
    }
    Ok(SpeechCommandsSplit { train, test, seed })
}

impl SpeechCommandsSplit {
    pub fn save(&self, path: &Path) -> Result<()> {
        let body = serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))?;
        std::fs::write(path, body).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&body).map_err(|e| Error::Serialize(e.to_string()))
    }
}
