//! Command pipelines behind the `assembly-speech` binary. Each command is a
//! plain function over a [`RunConfig`], so tests and examples can drive them
//! without spawning a process.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::audio::decode_wav;
use crate::classify::{ClassBank, ModelManifest, Segment, MODEL_FORMAT_VERSION};
use crate::config::{CorpusKind, RunConfig};
use crate::corpus::{
    boundary_frames, load_speech_commands, load_timit_utterance, segment_spans, AnnotatedUtterance,
    PhoneMap, SpeechCommandsSplit,
};
use crate::encoding::{fit_population_coder, population_encode, prob_mel_encode, PopulationCoder};
use crate::error::{Error, Result};
use crate::eval::{boundary_report, BoundaryEvalReport};
use crate::features::{mel_spectrogram, mfcc, MfccSequence};
use crate::seeds;
use crate::segmentation::{oracle_sweep, Hierarchy, SweepResult};
use crate::tuner::{random_search, Candidate, SearchSpace};
use crate::SpikeFrame;

#[derive(Debug, Parser)]
#[command(name = "assembly-speech", version, about = "Assembly-based speech segmentation and classification")]
pub struct Cli {
    /// TOML run configuration; defaults apply for missing keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override the config's global seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Extract mel or MFCC features from one WAV file as CSV (one frame per row).
    Features {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = FeatureKind::Mel)]
        kind: FeatureKind,
        /// Output CSV path; defaults to `<output_dir>/features.csv`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the boundary-detection hierarchy over an annotated corpus.
    Segment,
    /// Train a per-class area bank and serialise it as a model directory.
    ClassifyTrain {
        #[arg(long)]
        model_dir: PathBuf,
    },
    /// Evaluate a trained model directory on the held-out test set.
    ClassifyEval {
        #[arg(long)]
        model_dir: PathBuf,
    },
    /// Random-search segmentation hyperparameters, one level at a time.
    Tune {
        #[arg(long, value_enum, default_value_t = TuneTarget::Level1)]
        target: TuneTarget,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureKind {
    Mel,
    Mfcc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TuneTarget {
    Level1,
    Level2,
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.global_seed = seed;
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    dispatch(&cfg, &cli.command)
}

fn dispatch(cfg: &RunConfig, command: &Command) -> Result<()> {
    fn with_pool<F: FnOnce() -> Result<()> + Send>(threads: usize, f: F) -> Result<()> {
        if threads > 0 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(f)
        } else {
            f()
        }
    }
    match command {
        Command::Features { input, kind, output } => {
            let out = output
                .clone()
                .unwrap_or_else(|| cfg.output_dir.join("features.csv"));
            cmd_features(cfg, input, *kind, &out)
        }
        Command::Segment => with_pool(cfg.threads, || cmd_segment(cfg)),
        Command::ClassifyTrain { model_dir } => {
            with_pool(cfg.threads, || cmd_classify_train(cfg, model_dir))
        }
        Command::ClassifyEval { model_dir } => {
            with_pool(cfg.threads, || cmd_classify_eval(cfg, model_dir))
        }
        Command::Tune { target } => with_pool(cfg.threads, || cmd_tune(cfg, *target)),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

fn write_text(path: &Path, body: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let body = serde_json::to_string_pretty(value).map_err(|e| Error::Serialize(e.to_string()))?;
    write_text(path, &(body + "\n"))
}

/// Report envelope: every emitted JSON embeds the resolved configuration
/// and its content hash so a run is reproducible from the report alone.
fn envelope(cfg: &RunConfig, payload: serde_json::Value) -> Result<serde_json::Value> {
    Ok(serde_json::json!({
        "config": cfg.resolved_json()?,
        "config_sha256": cfg.content_hash()?,
        "report": payload,
    }))
}

pub fn cmd_features(cfg: &RunConfig, input: &Path, kind: FeatureKind, output: &Path) -> Result<()> {
    let audio = decode_wav(input)?;
    let (prefix, frames): (&str, Vec<Vec<f64>>) = match kind {
        FeatureKind::Mel => ("m", mel_spectrogram(&audio, &cfg.mel)?.frames),
        FeatureKind::Mfcc => ("c", mfcc(&audio, &cfg.mfcc)?.frames),
    };
    let width = frames.first().map_or(0, |f| f.len());
    let mut csv = String::from("frame");
    for i in 0..width {
        csv.push_str(&format!(",{prefix}{i}"));
    }
    csv.push('\n');
    for (t, row) in frames.iter().enumerate() {
        csv.push_str(&t.to_string());
        for v in row {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    write_text(output, &csv)
}

fn read_manifest(path: &Path) -> Result<Vec<String>> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ids: Vec<String> = body
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect();
    if ids.is_empty() {
        return Err(Error::Config(format!("empty manifest {}", path.display())));
    }
    Ok(ids)
}

fn annotated_ids(cfg: &RunConfig, manifest: Option<&PathBuf>) -> Result<Vec<String>> {
    if let Some(path) = manifest {
        return read_manifest(path);
    }
    let root = &cfg.corpus.root;
    let mut ids: Vec<String> = std::fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "wav"))
        .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .collect();
    ids.sort();
    if ids.is_empty() {
        return Err(Error::Config(format!(
            "no wav files under {}",
            root.display()
        )));
    }
    Ok(ids)
}

fn load_annotated(cfg: &RunConfig, ids: &[String]) -> Result<Vec<AnnotatedUtterance>> {
    let map = PhoneMap::standard_39();
    let root = &cfg.corpus.root;
    ids.iter()
        .map(|id| {
            load_timit_utterance(
                &root.join(format!("{id}.wav")),
                &root.join(format!("{id}.phn")),
                &root.join(format!("{id}.wrd")),
                &map,
            )
        })
        .collect()
}

struct PreparedUtterance {
    id: String,
    frames: Vec<SpikeFrame>,
    phone_gt: Vec<usize>,
    word_gt: Vec<usize>,
}

fn prepare_utterance(cfg: &RunConfig, utt: &AnnotatedUtterance) -> Result<PreparedUtterance> {
    let mel = mel_spectrogram(&utt.audio, &cfg.mel)?;
    let mut enc = cfg.prob_mel.clone();
    enc.seed = seeds::derive(cfg.global_seed, "prob-mel", &utt.id);
    let frames = prob_mel_encode(&mel, &enc)?;
    let phone_gt = boundary_frames(&utt.phones, cfg.mel.hop);
    let word_gt = boundary_frames(&utt.words, cfg.mel.hop);
    if phone_gt.is_empty() || word_gt.is_empty() {
        return Err(Error::Config(format!(
            "utterance {} has no scoreable boundaries",
            utt.id
        )));
    }
    Ok(PreparedUtterance {
        id: utt.id.clone(),
        frames,
        phone_gt,
        word_gt,
    })
}

struct PerUtterance {
    id: String,
    c1: Vec<f64>,
    c2: Vec<f64>,
    level1: SweepResult,
    level2: SweepResult,
    l1_direct: SweepResult,
}

pub struct SegmentationRun {
    /// `level1`, `level2`, `l1_direct` in that order.
    pub methods: Vec<(String, BoundaryEvalReport)>,
    pub failures: Vec<(String, String)>,
    /// Per-utterance CSV bodies from the first seed.
    pub csvs: Vec<(String, String)>,
}

impl SegmentationRun {
    pub fn report(&self, name: &str) -> Option<&BoundaryEvalReport> {
        self.methods
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| r)
    }
}

/// Run the full segmentation protocol: every utterance under every
/// area-initialisation seed, oracle prominence sweep per utterance, micro
/// scores per seed, mean and std across seeds, for Level 1 (phone scale),
/// Level 2 (word scale), and the L1-direct baseline (Level 1 signal scored
/// at word scale).
pub fn run_segmentation(cfg: &RunConfig, n_seeds: usize) -> Result<SegmentationRun> {
    let ids = annotated_ids(cfg, cfg.corpus.manifest.as_ref())?;
    let mut failures: Vec<(String, String)> = Vec::new();
    let mut preps: Vec<PreparedUtterance> = Vec::new();
    for id in &ids {
        let loaded = load_annotated(cfg, std::slice::from_ref(id))
            .and_then(|mut v| prepare_utterance(cfg, &v.remove(0)));
        match loaded {
            Ok(p) => preps.push(p),
            Err(e) => failures.push((id.clone(), e.to_string())),
        }
    }
    if preps.is_empty() {
        return Err(Error::Config("no usable utterances in corpus".into()));
    }
    let input_width = cfg.mel.n_mels;
    let l1 = &cfg.segmentation.level1;
    let l2 = &cfg.segmentation.level2;

    let mut level1_counts = Vec::new();
    let mut level2_counts = Vec::new();
    let mut direct_counts = Vec::new();
    let mut csvs = Vec::new();
    for s in 0..n_seeds {
        let seed_tag = seeds::derive_indexed(cfg.global_seed, "segmentation-repeat", s as u64);
        let results: Vec<Result<PerUtterance>> = preps
            .par_iter()
            .map(|p| {
                let mut hcfg = cfg.segmentation.clone();
                hcfg.level1.area.seed = seeds::derive(seed_tag, "hierarchy-l1", &p.id);
                hcfg.level2.area.seed = seeds::derive(seed_tag, "hierarchy-l2", &p.id);
                let mut hierarchy = Hierarchy::build(hcfg, input_width)?;
                let out = hierarchy.run(&p.frames)?;
                let level1 = oracle_sweep(&out.level1, &p.phone_gt, l1.tolerance, l1.min_peak_distance)?;
                let level2 = oracle_sweep(&out.level2, &p.word_gt, l2.tolerance, l2.min_peak_distance)?;
                let l1_direct =
                    oracle_sweep(&out.level1, &p.word_gt, l2.tolerance, l2.min_peak_distance)?;
                Ok(PerUtterance {
                    id: p.id.clone(),
                    c1: out.level1.values,
                    c2: out.level2.values,
                    level1,
                    level2,
                    l1_direct,
                })
            })
            .collect();
        let mut c1s = Vec::new();
        let mut c2s = Vec::new();
        let mut cds = Vec::new();
        for (p, r) in preps.iter().zip(results) {
            match r {
                Ok(u) => {
                    c1s.push(u.level1.counts);
                    c2s.push(u.level2.counts);
                    cds.push(u.l1_direct.counts);
                    if s == 0 {
                        csvs.push((u.id.clone(), utterance_csv(&u)));
                    }
                }
                Err(e) => failures.push((p.id.clone(), format!("seed {s}: {e}"))),
            }
        }
        if c1s.is_empty() {
            return Err(Error::Config(format!("all utterances failed under seed {s}")));
        }
        level1_counts.push((seed_tag, c1s));
        level2_counts.push((seed_tag, c2s));
        direct_counts.push((seed_tag, cds));
    }
    let methods = vec![
        ("level1".to_string(), boundary_report(&level1_counts, l1.tolerance)?),
        ("level2".to_string(), boundary_report(&level2_counts, l2.tolerance)?),
        ("l1_direct".to_string(), boundary_report(&direct_counts, l2.tolerance)?),
    ];
    Ok(SegmentationRun {
        methods,
        failures,
        csvs,
    })
}

fn utterance_csv(u: &PerUtterance) -> String {
    let phone: std::collections::BTreeSet<usize> =
        u.level1.boundaries.frame_indices.iter().copied().collect();
    let word: std::collections::BTreeSet<usize> =
        u.level2.boundaries.frame_indices.iter().copied().collect();
    let mut csv =
        String::from("frame,c1,c2,is_phone_boundary_detected,is_word_boundary_detected\n");
    for t in 0..u.c1.len() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            t,
            u.c1[t],
            u.c2[t],
            u8::from(phone.contains(&t)),
            u8::from(word.contains(&t)),
        ));
    }
    csv
}

pub fn cmd_segment(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let run = run_segmentation(cfg, cfg.n_seeds)?;
    for (id, body) in &run.csvs {
        write_text(&cfg.output_dir.join("utterances").join(format!("{id}.csv")), body)?;
    }
    let methods: Vec<serde_json::Value> = run
        .methods
        .iter()
        .map(|(name, report)| {
            Ok(serde_json::json!({
                "name": name,
                "precision_mean": report.precision_mean,
                "precision_std": report.precision_std,
                "recall_mean": report.recall_mean,
                "recall_std": report.recall_std,
                "f1_mean": report.f1_mean,
                "f1_std": report.f1_std,
                "detail": serde_json::to_value(report).map_err(|e| Error::Serialize(e.to_string()))?,
            }))
        })
        .collect::<Result<_>>()?;
    let failures: Vec<serde_json::Value> = run
        .failures
        .iter()
        .map(|(id, e)| serde_json::json!({"utterance": id, "error": e}))
        .collect();
    let summary = envelope(
        cfg,
        serde_json::json!({"methods": methods, "failures": failures}),
    )?;
    write_json(&cfg.output_dir.join("segment_summary.json"), &summary)?;
    if run.failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{} utterance runs failed; see segment_summary.json",
            run.failures.len()
        )))
    }
}

fn clip_features(cfg: &RunConfig, items: &[(PathBuf, String)]) -> Result<Vec<(MfccSequence, String)>> {
    items
        .par_iter()
        .map(|(path, label)| Ok((mfcc(&decode_wav(path)?, &cfg.mfcc)?, label.clone())))
        .collect()
}

fn encode_clips(
    coder: &PopulationCoder,
    feats: &[(MfccSequence, String)],
) -> Result<Vec<Segment>> {
    feats
        .par_iter()
        .map(|(seq, label)| {
            Ok(Segment::new(
                population_encode(seq, coder)?,
                Some(label.clone()),
            ))
        })
        .collect()
}

fn annotated_segments(
    cfg: &RunConfig,
    coder: &PopulationCoder,
    utts: &[AnnotatedUtterance],
) -> Result<Vec<Segment>> {
    let mut segments = Vec::new();
    for utt in utts {
        let seq = mfcc(&utt.audio, &cfg.mfcc)?;
        let frames = population_encode(&seq, coder)?;
        for (label, start, end) in segment_spans(&utt.phones, cfg.mfcc.hop, frames.len()) {
            let mut seg = Segment::new(frames[start..end].to_vec(), Some(label));
            seg.utterance_id = utt.id.clone();
            seg.start_frame = start;
            seg.end_frame = end;
            segments.push(seg);
        }
    }
    Ok(segments)
}

fn train_material(cfg: &RunConfig) -> Result<(Vec<(MfccSequence, String)>, Option<SpeechCommandsSplit>, Vec<AnnotatedUtterance>)> {
    match cfg.corpus.kind {
        CorpusKind::SpeechCommands => {
            if cfg.corpus.words.is_empty() {
                return Err(Error::Config("corpus.words must list the class folders".into()));
            }
            let split = load_speech_commands(
                &cfg.corpus.root,
                &cfg.corpus.words,
                cfg.corpus.n_train,
                cfg.corpus.n_test,
                cfg.global_seed,
            )?;
            let feats = clip_features(cfg, &split.train)?;
            Ok((feats, Some(split), Vec::new()))
        }
        CorpusKind::Annotated => {
            let ids = annotated_ids(cfg, cfg.corpus.manifest.as_ref())?;
            let utts = load_annotated(cfg, &ids)?;
            let feats = utts
                .iter()
                .map(|u| Ok((mfcc(&u.audio, &cfg.mfcc)?, u.id.clone())))
                .collect::<Result<Vec<_>>>()?;
            Ok((feats, None, utts))
        }
    }
}

pub fn cmd_classify_train(cfg: &RunConfig, model_dir: &Path) -> Result<()> {
    cfg.validate()?;
    let (feats, split, utts) = train_material(cfg)?;
    let sequences: Vec<MfccSequence> = feats.iter().map(|(s, _)| s.clone()).collect();
    let coder = fit_population_coder(
        &sequences,
        cfg.population.n_pop,
        cfg.population.sigma_frac,
        cfg.population.threshold,
    )?;
    let segments = match (&split, utts.as_slice()) {
        (Some(_), _) => encode_clips(&coder, &feats)?,
        (None, utts) => annotated_segments(cfg, &coder, utts)?,
    };
    if segments.is_empty() {
        return Err(Error::Config("no training segments".into()));
    }
    let mut labels: Vec<String> = segments.iter().filter_map(|s| s.label.clone()).collect();
    labels.sort();
    labels.dedup();
    let mut bank = ClassBank::build(&labels, &cfg.classifier.area, coder.width(), cfg.global_seed)?;
    bank.train(&segments, cfg.classifier.epochs)?;

    let encoder_json = coder.to_json()?;
    let manifest = ModelManifest {
        format_version: MODEL_FORMAT_VERSION,
        labels: Vec::new(),
        encoder_sha256: sha256_hex(encoder_json.as_bytes()),
        epochs: cfg.classifier.epochs,
        global_seed: cfg.global_seed,
    };
    bank.save(model_dir, &manifest)?;
    write_text(&model_dir.join("encoder.json"), &encoder_json)?;
    if let Some(split) = &split {
        split.save(&model_dir.join("split.json"))?;
    }
    write_json(&model_dir.join("train_report.json"), &envelope(cfg, serde_json::json!({
        "n_train_segments": segments.len(),
        "labels": labels,
    }))?)?;
    Ok(())
}

pub fn cmd_classify_eval(cfg: &RunConfig, model_dir: &Path) -> Result<()> {
    cfg.validate()?;
    let (bank, manifest) = ClassBank::load(model_dir)?;
    let encoder_path = model_dir.join("encoder.json");
    let encoder_json =
        std::fs::read_to_string(&encoder_path).map_err(|e| Error::io(&encoder_path, e))?;
    if sha256_hex(encoder_json.as_bytes()) != manifest.encoder_sha256 {
        return Err(Error::Integrity(
            "encoder.json does not match the hash recorded at training time".into(),
        ));
    }
    let coder = PopulationCoder::from_json(&encoder_json)?;
    let segments = match cfg.corpus.kind {
        CorpusKind::SpeechCommands => {
            let split = SpeechCommandsSplit::load(&model_dir.join("split.json"))?;
            let feats = clip_features(cfg, &split.test)?;
            encode_clips(&coder, &feats)?
        }
        CorpusKind::Annotated => {
            let manifest_path = cfg.corpus.test_manifest.as_ref().ok_or_else(|| {
                Error::Config("annotated evaluation needs corpus.test_manifest".into())
            })?;
            let ids = read_manifest(manifest_path)?;
            let utts = load_annotated(cfg, &ids)?;
            annotated_segments(cfg, &coder, &utts)?
        }
    };
    if segments.is_empty() {
        return Err(Error::Config("no test segments".into()));
    }
    let checksum_before = bank.weight_checksum();
    let report = bank.evaluate(&segments)?;
    debug_assert_eq!(checksum_before, bank.weight_checksum());

    let payload = serde_json::to_value(&report).map_err(|e| Error::Serialize(e.to_string()))?;
    write_json(&cfg.output_dir.join("classification_report.json"), &envelope(cfg, payload)?)?;

    let mut csv = String::from("true_label");
    for l in &report.labels {
        csv.push_str(&format!(",{l}"));
    }
    csv.push('\n');
    for (label, row) in report.labels.iter().zip(&report.confusion) {
        csv.push_str(label);
        for c in row {
            csv.push_str(&format!(",{c}"));
        }
        csv.push('\n');
    }
    write_text(&cfg.output_dir.join("confusion.csv"), &csv)?;
    Ok(())
}

pub fn cmd_tune(cfg: &RunConfig, target: TuneTarget) -> Result<()> {
    cfg.validate()?;
    let t = &cfg.tune;
    let space = SearchSpace::new()
        .real("rho", t.rho_range[0], t.rho_range[1])
        .real("tau", t.tau_range[0], t.tau_range[1])
        .int("min_peak_distance", t.distance_range[0], t.distance_range[1]);
    let (target_name, method) = match target {
        TuneTarget::Level1 => ("level1", "level1"),
        TuneTarget::Level2 => ("level2", "level2"),
    };
    let objective = |cand: &Candidate| -> Result<f64> {
        let mut trial_cfg = cfg.clone();
        let level = match target {
            TuneTarget::Level1 => &mut trial_cfg.segmentation.level1,
            TuneTarget::Level2 => &mut trial_cfg.segmentation.level2,
        };
        level.area.rho = cand["rho"].as_f64().expect("rho is real");
        level.tau = cand["tau"].as_f64().expect("tau is real");
        level.min_peak_distance = cand["min_peak_distance"].as_i64().expect("distance is int") as usize;
        let run = run_segmentation(&trial_cfg, cfg.tune.n_seeds)?;
        Ok(run.report(method).map_or(0.0, |r| r.f1_mean))
    };
    let seed = seeds::derive(cfg.global_seed, "tune", target_name);
    let result = random_search(&space, objective, t.n_trials, seed)?;

    let mut csv = String::from("trial,rho,tau,min_peak_distance,score,error\n");
    for trial in &result.trials {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            trial.index,
            trial.candidate["rho"],
            trial.candidate["tau"],
            trial.candidate["min_peak_distance"],
            trial.score.map_or(String::new(), |s| s.to_string()),
            trial.error.clone().unwrap_or_default().replace(',', ";"),
        ));
    }
    write_text(&cfg.output_dir.join(format!("tune_{target_name}_trials.csv")), &csv)?;

    let best = result
        .best
        .as_ref()
        .ok_or_else(|| Error::Config("every tuning trial failed".into()))?;
    let candidate: BTreeMap<String, String> = best
        .candidate
        .iter()
        .map(|(k, v)| (k.clone(), v.to_string()))
        .collect();
    write_json(&cfg.output_dir.join(format!("tune_{target_name}_best.json")), &envelope(cfg, serde_json::json!({
        "target": target_name,
        "trial": best.index,
        "score": best.score,
        "candidate": candidate,
    }))?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::area::PlasticityRule;
    use crate::synth;

    /// Small configuration that runs fast on the synthetic fixtures.
    fn desk_config(root: &Path, out: &Path) -> RunConfig {
        let mut cfg = RunConfig::from_toml("").unwrap();
        cfg.corpus.root = root.to_path_buf();
        cfg.output_dir = out.to_path_buf();
        cfg.global_seed = 11;
        cfg.n_seeds = 2;
        for (level, n, k, k_in) in [
            (&mut cfg.segmentation.level1, 300, 30, 12),
            (&mut cfg.segmentation.level2, 300, 30, 30),
        ] {
            level.area.n = n;
            level.area.k = k;
            level.area.k_in = k_in;
            level.area.rho = 0.2;
        }
        cfg.segmentation.level2.area.rho = 0.1;
        cfg.classifier.area = crate::AreaConfig {
            n: 300,
            k: 40,
            k_in: 30,
            k_in_rec: 60,
            rho: 0.0,
            beta: 0.01,
            rule: PlasticityRule::Abs,
            seed: 0,
        };
        cfg.classifier.epochs = 2;
        cfg
    }

    fn annotated_fixture(dir: &Path, n_utts: usize) {
        for i in 0..n_utts {
            let utt = synth::synthetic_utterance(
                &format!("utt{i}"),
                &[("she", &["sh", "iy"]), ("had", &["hh", "ae", "d"])],
                6400,
                16000,
                100 + i as u64,
            )
            .unwrap();
            synth::write_annotated(dir, &utt).unwrap();
        }
    }

    #[test]
    fn features_csv_has_one_row_per_frame() {
        let dir = tempfile::tempdir().unwrap();
        let utt = synth::synthetic_utterance("f", &[("hi", &["hh", "iy"])], 3200, 16000, 1).unwrap();
        synth::write_annotated(dir.path(), &utt).unwrap();
        let cfg = desk_config(dir.path(), dir.path());
        let out = dir.path().join("mel.csv");
        cmd_features(&cfg, &dir.path().join("f.wav"), FeatureKind::Mel, &out).unwrap();
        let body = std::fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = body.lines().collect();
        let expected = crate::features::num_frames(utt.audio.len(), cfg.mel.fft_size, cfg.mel.hop);
        assert_eq!(lines.len(), expected + 1);
        assert!(lines[0].starts_with("frame,m0,"));
        assert_eq!(lines[0].split(',').count(), cfg.mel.n_mels + 1);

        let out2 = dir.path().join("mfcc.csv");
        cmd_features(&cfg, &dir.path().join("f.wav"), FeatureKind::Mfcc, &out2).unwrap();
        let body2 = std::fs::read_to_string(&out2).unwrap();
        assert_eq!(body2.lines().next().unwrap().split(',').count(), cfg.mfcc.n_coeffs + 1);
    }

    #[test]
    fn segment_summary_has_three_method_rows() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("corpus");
        std::fs::create_dir_all(&corpus).unwrap();
        annotated_fixture(&corpus, 2);
        let out = dir.path().join("out");
        let cfg = desk_config(&corpus, &out);
        cmd_segment(&cfg).unwrap();
        let body = std::fs::read_to_string(out.join("segment_summary.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&body).unwrap();
        let methods = v["report"]["methods"].as_array().unwrap();
        assert_eq!(methods.len(), 3);
        let names: Vec<&str> = methods.iter().map(|m| m["name"].as_str().unwrap()).collect();
        assert_eq!(names, ["level1", "level2", "l1_direct"]);
        for m in methods {
            for key in [
                "precision_mean",
                "precision_std",
                "recall_mean",
                "recall_std",
                "f1_mean",
                "f1_std",
            ] {
                assert!(m[key].is_number(), "missing {key}");
            }
        }
        assert!(v["config_sha256"].as_str().unwrap().len() == 64);
        assert_eq!(v["report"]["failures"].as_array().unwrap().len(), 0);
        // per-utterance CSVs exist with the documented columns
        let csv = std::fs::read_to_string(out.join("utterances/utt0.csv")).unwrap();
        assert!(csv.starts_with("frame,c1,c2,is_phone_boundary_detected,is_word_boundary_detected"));
    }

    #[test]
    fn empty_manifest_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = dir.path().join("list.txt");
        std::fs::write(&manifest, "\n\n").unwrap();
        let mut cfg = desk_config(dir.path(), dir.path());
        cfg.corpus.manifest = Some(manifest);
        assert!(matches!(cmd_segment(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn segment_runs_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("corpus");
        std::fs::create_dir_all(&corpus).unwrap();
        annotated_fixture(&corpus, 1);
        let out_a = dir.path().join("a");
        let out_b = dir.path().join("b");
        let mut cfg_a = desk_config(&corpus, &out_a);
        cfg_a.n_seeds = 1;
        let mut cfg_b = cfg_a.clone();
        cfg_b.output_dir = out_b.clone();
        cmd_segment(&cfg_a).unwrap();
        cmd_segment(&cfg_b).unwrap();
        // summaries differ only through output_dir inside the embedded config
        let a = std::fs::read_to_string(out_a.join("utterances/utt0.csv")).unwrap();
        let b = std::fs::read_to_string(out_b.join("utterances/utt0.csv")).unwrap();
        assert_eq!(a, b);
    }

    fn speech_commands_config(dir: &Path) -> (RunConfig, PathBuf) {
        let root = dir.join("sc");
        let words: Vec<String> = ["one", "two", "three"].iter().map(|s| s.to_string()).collect();
        synth::write_synthetic_speech_commands(&root, &words, 8, 16000, 5).unwrap();
        let mut cfg = desk_config(&root, &dir.join("out"));
        cfg.corpus.kind = CorpusKind::SpeechCommands;
        cfg.corpus.words = words;
        cfg.corpus.n_train = 6;
        cfg.corpus.n_test = 2;
        (cfg, dir.join("model"))
    }

    #[test]
    fn classify_train_eval_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let (cfg, model_dir) = speech_commands_config(dir.path());
        cmd_classify_train(&cfg, &model_dir).unwrap();
        assert!(model_dir.join("manifest.json").exists());
        assert!(model_dir.join("encoder.json").exists());
        assert!(model_dir.join("split.json").exists());
        cmd_classify_eval(&cfg, &model_dir).unwrap();
        let body =
            std::fs::read_to_string(cfg.output_dir.join("classification_report.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&body).unwrap();
        let acc = v["report"]["accuracy"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&acc));
        assert!(acc > 0.5, "synthetic 3-class accuracy {acc} too low");
        // confusion CSV row sums equal per-class test counts
        let csv = std::fs::read_to_string(cfg.output_dir.join("confusion.csv")).unwrap();
        for line in csv.lines().skip(1) {
            let total: usize = line
                .split(',')
                .skip(1)
                .map(|c| c.parse::<usize>().unwrap())
                .sum();
            assert_eq!(total, cfg.corpus.n_test);
        }
    }

    #[test]
    fn tampered_encoder_is_integrity_error() {
        let dir = tempfile::tempdir().unwrap();
        let (cfg, model_dir) = speech_commands_config(dir.path());
        cmd_classify_train(&cfg, &model_dir).unwrap();
        let path = model_dir.join("encoder.json");
        let mut body = std::fs::read_to_string(&path).unwrap();
        body.push(' ');
        std::fs::write(&path, body).unwrap();
        assert!(matches!(
            cmd_classify_eval(&cfg, &model_dir),
            Err(Error::Integrity(_))
        ));
    }

    #[test]
    fn training_twice_gives_byte_identical_models() {
        let dir = tempfile::tempdir().unwrap();
        let (cfg, model_dir) = speech_commands_config(dir.path());
        let model_b = dir.path().join("model_b");
        cmd_classify_train(&cfg, &model_dir).unwrap();
        cmd_classify_train(&cfg, &model_b).unwrap();
        for name in ["manifest.json", "encoder.json", "class_one.area", "class_two.area", "class_three.area"] {
            let a = std::fs::read(model_dir.join(name)).unwrap();
            let b = std::fs::read(model_b.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn tune_emits_trial_log_and_best() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("corpus");
        std::fs::create_dir_all(&corpus).unwrap();
        annotated_fixture(&corpus, 1);
        let out = dir.path().join("out");
        let mut cfg = desk_config(&corpus, &out);
        cfg.tune.n_trials = 3;
        cfg.tune.n_seeds = 1;
        cmd_tune(&cfg, TuneTarget::Level1).unwrap();
        let csv = std::fs::read_to_string(out.join("tune_level1_trials.csv")).unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("trial,rho,tau,min_peak_distance,score,error"));
        let best: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(out.join("tune_level1_best.json")).unwrap(),
        )
        .unwrap();
        assert!(best["report"]["score"].as_f64().unwrap() >= 0.0);
    }
}
