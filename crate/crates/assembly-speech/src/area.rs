//! Assembly Calculus substrate: areas with fixed-in-degree random
//! connectivity, k-cap competition, refractory adaptation and local
//! plasticity.
//!
//! Weights are stored as per-destination edge lists (exactly `k_in` incoming
//! edges per neuron). A reverse index from sources to (destination, slot)
//! pairs makes drive computation scale with the number of *active* inputs
//! rather than with n * k_in.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::seeds;

/// Binary input vector for one acoustic frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpikeFrame {
    bits: Vec<bool>,
}

impl SpikeFrame {
    pub fn new(bits: Vec<bool>) -> Self {
        SpikeFrame { bits }
    }

    pub fn zeros(width: usize) -> Self {
        SpikeFrame {
            bits: vec![false; width],
        }
    }

    pub fn from_active(width: usize, active: &[usize]) -> Self {
        let mut bits = vec![false; width];
        for &i in active {
            bits[i] = true;
        }
        SpikeFrame { bits }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn active_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }
}

/// Sorted set of exactly k active neurons; empty means reset state.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Assembly {
    active: Vec<u32>,
}

impl Assembly {
    pub fn empty() -> Self {
        Assembly { active: Vec::new() }
    }

    /// Build from indices; sorts and deduplicates.
    pub fn from_indices(mut idx: Vec<u32>) -> Self {
        idx.sort_unstable();
        idx.dedup();
        Assembly { active: idx }
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn indices(&self) -> &[u32] {
        &self.active
    }

    /// Number of shared neurons with another assembly.
    pub fn overlap(&self, other: &Assembly) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.active.len() && j < other.active.len() {
            match self.active[i].cmp(&other.active[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    /// Dense indicator over n neurons.
    pub fn indicator(&self, n: usize) -> Vec<bool> {
        let mut v = vec![false; n];
        for &i in &self.active {
            v[i as usize] = true;
        }
        v
    }

    /// View as a spike frame over n positions (input to a downstream area).
    pub fn to_spike_frame(&self, n: usize) -> SpikeFrame {
        SpikeFrame::new(self.indicator(n))
    }
}

/// Length-n vector of pre-competition inputs.
#[derive(Debug, Clone)]
pub struct DriveVector {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlasticityRule {
    Hebbian,
    Abs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AreaConfig {
    pub n: usize,
    pub k: usize,
    pub k_in: usize,
    /// 0 disables recurrence
    pub k_in_rec: usize,
    /// refractory rate
    pub rho: f64,
    /// learning rate; 0 freezes the area
    pub beta: f64,
    pub rule: PlasticityRule,
    pub seed: u64,
}

impl AreaConfig {
    pub fn validate(&self, input_width: usize) -> Result<()> {
        if self.k == 0 || self.k > self.n {
            return Err(Error::Config(format!("k must be in 1..=n, got k={} n={}", self.k, self.n)));
        }
        if self.k_in == 0 || self.k_in > input_width {
            return Err(Error::Config(format!(
                "k_in must be in 1..=input_width ({}), got {}",
                input_width, self.k_in
            )));
        }
        if self.k_in_rec >= self.n {
            return Err(Error::Config(format!(
                "k_in_rec must be < n ({}), got {}",
                self.n, self.k_in_rec
            )));
        }
        if self.rho < 0.0 || self.beta < 0.0 {
            return Err(Error::Config("rho and beta must be non-negative".into()));
        }
        Ok(())
    }
}

/// Per-destination edge lists plus a reverse (source -> destinations) index.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct EdgeMatrix {
    /// srcs[v]: sorted source indices of the edges into v
    srcs: Vec<Vec<u32>>,
    /// weights[v][slot]: weight of the edge srcs[v][slot] -> v
    weights: Vec<Vec<f64>>,
    /// rev[u]: (destination, slot) pairs; rebuilt after deserialisation
    #[serde(skip)]
    rev: Vec<Vec<(u32, u32)>>,
}

impl EdgeMatrix {
    fn empty(n: usize, input_width: usize) -> Self {
        EdgeMatrix {
            srcs: vec![Vec::new(); n],
            weights: vec![Vec::new(); n],
            rev: vec![Vec::new(); input_width],
        }
    }

    fn build_rev(&mut self, input_width: usize) {
        let mut rev = vec![Vec::new(); input_width];
        for (v, srcs) in self.srcs.iter().enumerate() {
            for (slot, &u) in srcs.iter().enumerate() {
                rev[u as usize].push((v as u32, slot as u32));
            }
        }
        self.rev = rev;
    }

    /// Scatter-add the weights of edges leaving `u` into `drive`.
    fn scatter(&self, u: usize, drive: &mut [f64]) {
        for &(v, slot) in &self.rev[u] {
            drive[v as usize] += self.weights[v as usize][slot as usize];
        }
    }

    fn renormalise_dest(&mut self, v: usize) {
        let ws = &mut self.weights[v];
        let sum: f64 = ws.iter().sum();
        if sum > 0.0 {
            for w in ws.iter_mut() {
                *w /= sum;
            }
        }
    }
}

/// A neuron population: mutable state machine driven by one thread at a time;
/// distinct areas share nothing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Area {
    config: AreaConfig,
    input_width: usize,
    ff: EdgeMatrix,
    rec: EdgeMatrix,
    refractory_bias: Vec<f64>,
    prev_assembly: Assembly,
}

/// Select the k largest drive values; ties break toward the lower index.
pub fn k_cap(drive: &DriveVector, k: usize) -> Assembly {
    let n = drive.values.len();
    debug_assert!(k <= n);
    if k == 0 {
        return Assembly::empty();
    }
    let mut pairs: Vec<(f64, u32)> = drive
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as u32))
        .collect();
    // total order: value descending, then index ascending
    let cmp = |a: &(f64, u32), b: &(f64, u32)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    if k < n {
        pairs.select_nth_unstable_by(k - 1, cmp);
    }
    let mut idx: Vec<u32> = pairs[..k].iter().map(|p| p.1).collect();
    idx.sort_unstable();
    Assembly { active: idx }
}

impl Area {
    /// Construct an area with fixed in-degree random connectivity.
    ///
    /// Each neuron's feedforward sources are drawn uniformly without
    /// replacement from the input indices, recurrent sources from the area's
    /// neurons excluding self. All initial weights are 1/k_in (resp.
    /// 1/k_in_rec), so per-destination sums start at 1.
    pub fn build(config: AreaConfig, input_width: usize) -> Result<Self> {
        config.validate(input_width)?;
        let mut rng = seeds::rng(config.seed);
        let n = config.n;

        let mut ff = EdgeMatrix::empty(n, input_width);
        let w0 = 1.0 / config.k_in as f64;
        for v in 0..n {
            let mut srcs: Vec<u32> = rand::seq::index::sample(&mut rng, input_width, config.k_in)
                .into_iter()
                .map(|i| i as u32)
                .collect();
            srcs.sort_unstable();
            ff.weights[v] = vec![w0; srcs.len()];
            ff.srcs[v] = srcs;
        }
        ff.build_rev(input_width);

        let mut rec = EdgeMatrix::empty(n, n);
        if config.k_in_rec > 0 {
            let w0r = 1.0 / config.k_in_rec as f64;
            for v in 0..n {
                // sample from n-1 candidates, skipping self
                let mut srcs: Vec<u32> = rand::seq::index::sample(&mut rng, n - 1, config.k_in_rec)
                    .into_iter()
                    .map(|i| if i >= v { (i + 1) as u32 } else { i as u32 })
                    .collect();
                srcs.sort_unstable();
                rec.weights[v] = vec![w0r; srcs.len()];
                rec.srcs[v] = srcs;
            }
        }
        rec.build_rev(n);

        Ok(Area {
            refractory_bias: vec![0.0; n],
            prev_assembly: Assembly::empty(),
            config,
            input_width,
            ff,
            rec,
        })
    }

    pub fn config(&self) -> &AreaConfig {
        &self.config
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn prev_assembly(&self) -> &Assembly {
        &self.prev_assembly
    }

    pub fn refractory_bias(&self) -> &[f64] {
        &self.refractory_bias
    }

    /// Feedforward edges into neuron v as (source, weight) pairs.
    pub fn ff_edges(&self, v: usize) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.ff.srcs[v]
            .iter()
            .copied()
            .zip(self.ff.weights[v].iter().copied())
    }

    /// Recurrent edges into neuron v as (source, weight) pairs.
    pub fn rec_edges(&self, v: usize) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.rec.srcs[v]
            .iter()
            .copied()
            .zip(self.rec.weights[v].iter().copied())
    }

    /// Pre-competition drive for an arbitrary (input, previous-assembly,
    /// bias) triple, without touching area state. `bias` of `None` means no
    /// refractory subtraction.
    pub fn drive_with(
        &self,
        x: &SpikeFrame,
        prev: &Assembly,
        bias: Option<&[f64]>,
    ) -> Result<DriveVector> {
        if x.width() != self.input_width {
            return Err(Error::Shape {
                expected: self.input_width,
                got: x.width(),
            });
        }
        let mut values = vec![0.0; self.config.n];
        for u in x.active_indices() {
            self.ff.scatter(u, &mut values);
        }
        if self.config.k_in_rec > 0 {
            for &u in prev.indices() {
                self.rec.scatter(u as usize, &mut values);
            }
        }
        if let Some(bias) = bias {
            for (v, b) in bias.iter().enumerate() {
                if *b != 0.0 {
                    values[v] -= b;
                }
            }
        }
        Ok(DriveVector { values })
    }

    /// Drive from the area's current state (previous assembly and bias).
    pub fn compute_drive(&self, x: &SpikeFrame) -> Result<DriveVector> {
        self.drive_with(x, &self.prev_assembly, Some(&self.refractory_bias))
    }

    /// Apply the configured plasticity rule for one step.
    ///
    /// Feedforward pre-activity is the input bit; recurrent pre-activity is
    /// membership of the previous assembly. Only edges into active post
    /// neurons are touched; each touched destination is renormalised to unit
    /// incoming weight per matrix.
    pub fn apply_plasticity(&mut self, x: &SpikeFrame, assembly: &Assembly) {
        let beta = self.config.beta;
        if beta == 0.0 {
            return;
        }
        let rule = self.config.rule;
        let prev_ind = self.prev_assembly.indicator(self.config.n);
        for &v in assembly.indices() {
            let v = v as usize;
            Self::update_dest(&mut self.ff, v, beta, rule, |u| x.get(u));
            if self.config.k_in_rec > 0 && !self.prev_assembly.is_empty() {
                Self::update_dest(&mut self.rec, v, beta, rule, |u| prev_ind[u]);
            }
        }
    }

    fn update_dest(
        m: &mut EdgeMatrix,
        v: usize,
        beta: f64,
        rule: PlasticityRule,
        pre_active: impl Fn(usize) -> bool,
    ) {
        let mut changed = false;
        {
            let srcs = &m.srcs[v];
            let ws = &mut m.weights[v];
            for (slot, &u) in srcs.iter().enumerate() {
                if pre_active(u as usize) {
                    ws[slot] *= 1.0 + beta;
                    changed = true;
                } else if rule == PlasticityRule::Abs {
                    ws[slot] = (ws[slot] * (1.0 - beta)).max(0.0);
                    changed = true;
                }
            }
        }
        if changed {
            m.renormalise_dest(v);
        }
    }

    /// Refractory update: fired neurons get a bias proportional to their raw
    /// (pre-bias) input; all other biases reset. Single-step suppression.
    pub fn apply_refractory(&mut self, drive: &DriveVector, assembly: &Assembly) {
        let rho = self.config.rho;
        let new_vals: Vec<(u32, f64)> = assembly
            .indices()
            .iter()
            .map(|&v| {
                let raw = drive.values[v as usize] + self.refractory_bias[v as usize];
                (v, rho * raw.max(0.0))
            })
            .collect();
        // previous bias support is exactly the previous assembly
        for &v in self.prev_assembly.indices() {
            self.refractory_bias[v as usize] = 0.0;
        }
        for (v, b) in new_vals {
            self.refractory_bias[v as usize] = b;
        }
    }

    /// One dynamics step: drive -> k-cap -> plasticity -> refractory.
    pub fn step(&mut self, x: &SpikeFrame) -> Result<Assembly> {
        let drive = self.compute_drive(x)?;
        let assembly = k_cap(&drive, self.config.k);
        self.apply_plasticity(x, &assembly);
        self.apply_refractory(&drive, &assembly);
        self.prev_assembly = assembly.clone();
        Ok(assembly)
    }

    /// Frozen-repeat step for refractory hierarchies: if the candidate
    /// assembly overlaps the previous one by at least `tau * k`, the previous
    /// assembly is re-emitted verbatim, suppressing micro-turnover.
    pub fn step_frozen_repeat(&mut self, x: &SpikeFrame, tau: f64) -> Result<Assembly> {
        let drive = self.compute_drive(x)?;
        let candidate = k_cap(&drive, self.config.k);
        let emitted = if !self.prev_assembly.is_empty()
            && candidate.overlap(&self.prev_assembly) as f64 >= tau * self.config.k as f64
        {
            self.prev_assembly.clone()
        } else {
            candidate
        };
        self.apply_refractory(&drive, &emitted);
        self.prev_assembly = emitted.clone();
        Ok(emitted)
    }

    /// Clear dynamic state (previous assembly, refractory bias); weights are
    /// untouched.
    pub fn reset(&mut self) {
        self.prev_assembly = Assembly::empty();
        for b in &mut self.refractory_bias {
            *b = 0.0;
        }
    }

    /// SHA-256 over all weights, for frozen-weight guarantees.
    pub fn weight_checksum(&self) -> String {
        let mut h = Sha256::new();
        for m in [&self.ff, &self.rec] {
            for ws in &m.weights {
                for w in ws {
                    h.update(w.to_le_bytes());
                }
            }
        }
        format!("{:x}", h.finalize())
    }

    /// Serialise the full snapshot (edges, weights, config, state) with a
    /// format-version header.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let snap = AreaSnapshot {
            format_version: AREA_FORMAT_VERSION,
            area: self.clone(),
        };
        bincode::serialize(&snap).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let snap: AreaSnapshot =
            bincode::deserialize(bytes).map_err(|e| Error::Serialize(e.to_string()))?;
        if snap.format_version != AREA_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: snap.format_version,
                expected: AREA_FORMAT_VERSION,
            });
        }
        let mut area = snap.area;
        area.ff.build_rev(area.input_width);
        area.rec.build_rev(area.config.n);
        Ok(area)
    }
}

pub const AREA_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct AreaSnapshot {
    format_version: u32,
    area: Area,
}
