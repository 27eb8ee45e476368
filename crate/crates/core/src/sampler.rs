//! Exact enumeration and simulated annealing over an [`IsingModel`].
//!
//! Annealing runs independent Metropolis reads. Each qubit follows the global
//! schedule shifted by its anneal offset, so a positive offset freezes it
//! earlier. Flux-biased qubits feel an extra field toward their target during
//! the dynamics only; reported energies never include it.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QfaError, Result};
use crate::ising::{hex_digest, IsingModel, Spin};

/// Largest free-qubit count `sample_exact` accepts.
pub const MAX_EXACT_QUBITS: usize = 26;
/// Largest anneal offset magnitude.
pub const MAX_OFFSET: f64 = 0.2;
/// Energies within this distance of each other count as equal.
pub const ENERGY_TOL: f64 = 1e-9;

/// Energy of a full assignment; clamped qubits use their stored values and
/// flux biases are ignored.
pub fn evaluate_energy(model: &IsingModel, spins: &BTreeMap<u32, Spin>) -> Result<f64> {
    model
        .energy_with(|q| spins.get(&q).copied())
        .map_err(QfaError::IncompleteAssignment)
}

/// Inverse temperature as a function of progress `s ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Geometric { beta_start: f64, beta_end: f64 },
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Geometric {
            beta_start: 0.1,
            beta_end: 10.0,
        }
    }
}

impl Schedule {
    pub fn beta(&self, s: f64) -> f64 {
        match *self {
            Schedule::Geometric {
                beta_start,
                beta_end,
            } => beta_start * (beta_end / beta_start).powf(s.clamp(0.0, 1.0)),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Geometric {
                beta_start,
                beta_end,
            } => {
                if !(beta_start > 0.0 && beta_end >= beta_start && beta_end.is_finite()) {
                    return Err(QfaError::Config(format!(
                        "geometric schedule needs 0 < beta_start <= beta_end, got {beta_start}..{beta_end}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub num_reads: usize,
    pub sweeps: usize,
    pub schedule: Schedule,
    /// per-qubit anneal offset `δc`
    #[serde(with = "crate::ising::keyed")]
    pub offsets: BTreeMap<u32, f64>,
    /// progress shift per unit of offset
    pub offset_scale: f64,
    pub flux_strength: f64,
    pub master_seed: u64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            num_reads: 1000,
            sweeps: 1000,
            schedule: Schedule::default(),
            offsets: BTreeMap::new(),
            offset_scale: 1.0,
            flux_strength: 10.0,
            master_seed: 0,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 {
            return Err(QfaError::Config("num_reads must be at least 1".into()));
        }
        if self.sweeps == 0 {
            return Err(QfaError::Config("sweeps must be at least 1".into()));
        }
        if !(self.flux_strength >= 0.0 && self.flux_strength.is_finite()) {
            return Err(QfaError::Config(format!(
                "flux_strength must be finite and non-negative, got {}",
                self.flux_strength
            )));
        }
        if !(self.offset_scale >= 0.0 && self.offset_scale.is_finite()) {
            return Err(QfaError::Config(
                "offset_scale must be finite and non-negative".into(),
            ));
        }
        if let Some((q, d)) = self
            .offsets
            .iter()
            .find(|(_, d)| d.is_nan() || d.abs() > MAX_OFFSET)
        {
            return Err(QfaError::Config(format!(
                "offset {d} on qubit {q} exceeds ±{MAX_OFFSET}"
            )));
        }
        self.schedule.validate()
    }

    pub fn digest(&self) -> String {
        hex_digest(&serde_json::to_vec(self).expect("config serializes"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// first read that produced this state
    pub read_id: usize,
    /// spins over `SampleSet::qubits`
    pub spins: Vec<Spin>,
    pub energy: f64,
    pub occurrences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    /// free qubits, ascending; the order of every spin vector
    pub qubits: Vec<u32>,
    pub samples: Vec<Sample>,
    pub num_reads: usize,
    pub model_digest: String,
    pub config_digest: String,
}

impl SampleSet {
    pub fn min_energy(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.energy)
            .fold(f64::INFINITY, f64::min)
    }

    /// Reads whose energy is zero.
    pub fn ground_reads(&self) -> usize {
        self.samples
            .iter()
            .filter(|s| s.energy.abs() <= ENERGY_TOL)
            .map(|s| s.occurrences)
            .sum()
    }

    /// Spins of one sample keyed by qubit, with the model's clamped values.
    pub fn assignment(&self, model: &IsingModel, idx: usize) -> BTreeMap<u32, Spin> {
        let mut out: BTreeMap<u32, Spin> = self
            .qubits
            .iter()
            .copied()
            .zip(self.samples[idx].spins.iter().copied())
            .collect();
        out.extend(model.clamped.iter().map(|(&q, &s)| (q, s)));
        out
    }

    /// CSV with `read_id,energy,occurrences,spins`; spins are `+`/`-` per
    /// qubit in `qubits` order.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["read_id", "energy", "occurrences", "spins"])?;
        for s in &self.samples {
            let spins: String = s
                .spins
                .iter()
                .map(|&z| if z > 0 { '+' } else { '-' })
                .collect();
            wr.write_record([
                s.read_id.to_string(),
                s.energy.to_string(),
                s.occurrences.to_string(),
                spins,
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Writes `<path>` as CSV and `<path>.json` echoing the config and qubit order.
    pub fn export(&self, path: &Path, config: &AnnealConfig) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))?;
        let sidecar = serde_json::json!({
            "config": config,
            "qubits": self.qubits,
            "num_reads": self.num_reads,
            "model_digest": self.model_digest,
            "config_digest": self.config_digest,
        });
        let mut side = path.as_os_str().to_owned();
        side.push(".json");
        std::fs::write(side, serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }
}

/// Model reduced to free qubits: clamped values folded into biases.
struct Compiled {
    qubits: Vec<u32>,
    h: Vec<f64>,
    /// CSR adjacency
    start: Vec<usize>,
    nbr: Vec<usize>,
    weight: Vec<f64>,
}

impl Compiled {
    fn new(model: &IsingModel) -> Self {
        let qubits = model.free_qubits();
        let index: BTreeMap<u32, usize> = qubits.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let n = qubits.len();
        let mut h = vec![0.0; n];
        for (q, &b) in &model.biases {
            if let Some(&i) = index.get(q) {
                h[i] += b;
            }
        }
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(a, b), &j) in &model.couplings {
            match (index.get(&a), index.get(&b)) {
                (Some(&ia), Some(&ib)) => {
                    adj[ia].push((ib, j));
                    adj[ib].push((ia, j));
                }
                (Some(&ia), None) => h[ia] += j * model.clamped[&b] as f64,
                (None, Some(&ib)) => h[ib] += j * model.clamped[&a] as f64,
                (None, None) => {}
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        let (mut nbr, mut weight) = (Vec::new(), Vec::new());
        start.push(0);
        for list in adj {
            for (k, w) in list {
                nbr.push(k);
                weight.push(w);
            }
            start.push(nbr.len());
        }
        Self {
            qubits,
            h,
            start,
            nbr,
            weight,
        }
    }

    fn field(&self, i: usize, spins: &[Spin]) -> f64 {
        let mut f = self.h[i];
        for k in self.start[i]..self.start[i + 1] {
            f += self.weight[k] * spins[self.nbr[k]] as f64;
        }
        f
    }
}

fn recompute(model: &IsingModel, qubits: &[u32], spins: &[Spin]) -> f64 {
    let map: BTreeMap<u32, Spin> = qubits.iter().copied().zip(spins.iter().copied()).collect();
    evaluate_energy(model, &map).expect("sampler assigns every free qubit")
}

/// Every global minimum of the model, by exhaustive Gray-code enumeration.
pub fn sample_exact(model: &IsingModel) -> Result<SampleSet> {
    let c = Compiled::new(model);
    let n = c.qubits.len();
    if n > MAX_EXACT_QUBITS {
        return Err(QfaError::TooManyQubits(n, MAX_EXACT_QUBITS));
    }
    let mut spins: Vec<Spin> = vec![-1; n];
    let mut energy = recompute(model, &c.qubits, &spins);
    let mut best = energy;
    let mut minima: Vec<Vec<Spin>> = vec![spins.clone()];
    for step in 1u64..1u64 << n {
        let i = step.trailing_zeros() as usize;
        energy -= 2.0 * spins[i] as f64 * c.field(i, &spins);
        spins[i] = -spins[i];
        if energy < best - 1e-7 {
            best = energy;
            minima.clear();
            minima.push(spins.clone());
        } else if energy <= best + 1e-7 {
            minima.push(spins.clone());
        }
    }
    // incremental sums drift; settle ties on exact recomputation
    let exact: Vec<(Vec<Spin>, f64)> = minima
        .into_iter()
        .map(|s| {
            let e = recompute(model, &c.qubits, &s);
            (s, e)
        })
        .collect();
    let low = exact.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let mut kept: Vec<(Vec<Spin>, f64)> = exact
        .into_iter()
        .filter(|x| x.1 <= low + ENERGY_TOL)
        .collect();
    kept.sort_by(|a, b| a.0.cmp(&b.0));
    let samples: Vec<Sample> = kept
        .into_iter()
        .enumerate()
        .map(|(i, (spins, energy))| Sample {
            read_id: i,
            spins,
            energy,
            occurrences: 1,
        })
        .collect();
    Ok(SampleSet {
        qubits: c.qubits,
        num_reads: samples.len(),
        samples,
        model_digest: model.digest(),
        config_digest: hex_digest(b"exact"),
    })
}

/// Seeded simulated annealing; results do not depend on thread count.
pub fn sample_sa(model: &IsingModel, config: &AnnealConfig) -> Result<SampleSet> {
    config.validate()?;
    let c = Compiled::new(model);
    let n = c.qubits.len();
    let mut flux = vec![0.0; n];
    for (i, q) in c.qubits.iter().enumerate() {
        if let Some(&t) = model.flux_biases.get(q) {
            flux[i] = -config.flux_strength * t as f64;
        }
    }
    let shift: Vec<f64> = c
        .qubits
        .iter()
        .map(|q| config.offsets.get(q).copied().unwrap_or(0.0) * config.offset_scale)
        .collect();
    let uniform = shift.iter().all(|&d| d == 0.0);
    let sweeps = config.sweeps;
    // per sweep, per qubit inverse temperature
    let betas: Vec<Vec<f64>> = (0..sweeps)
        .map(|t| {
            let s = if sweeps == 1 {
                1.0
            } else {
                t as f64 / (sweeps - 1) as f64
            };
            if uniform {
                vec![config.schedule.beta(s)]
            } else {
                shift.iter().map(|d| config.schedule.beta(s + d)).collect()
            }
        })
        .collect();

    let reads: Vec<Vec<Spin>> = (0..config.num_reads)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
            rng.set_stream(r as u64);
            let mut spins: Vec<Spin> = (0..n)
                .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
                .collect();
            // local fields, flux included, kept current across flips
            let mut field: Vec<f64> = (0..n).map(|i| c.field(i, &spins) + flux[i]).collect();
            for row in &betas {
                for i in 0..n {
                    let beta = if uniform { row[0] } else { row[i] };
                    let delta = -2.0 * spins[i] as f64 * field[i];
                    // acceptance below e^-40 is treated as zero without a draw
                    let x = beta * delta;
                    if delta <= 0.0 || (x < 40.0 && rng.gen::<f64>() < (-x).exp()) {
                        spins[i] = -spins[i];
                        let change = 2.0 * spins[i] as f64;
                        for k in c.start[i]..c.start[i + 1] {
                            field[c.nbr[k]] += c.weight[k] * change;
                        }
                    }
                }
            }
            spins
        })
        .collect();

    let mut index: BTreeMap<&[Spin], usize> = BTreeMap::new();
    let mut samples: Vec<Sample> = Vec::new();
    for (r, spins) in reads.iter().enumerate() {
        match index.get(spins.as_slice()) {
            Some(&k) => samples[k].occurrences += 1,
            None => {
                index.insert(spins.as_slice(), samples.len());
                samples.push(Sample {
                    read_id: r,
                    spins: spins.clone(),
                    energy: recompute(model, &c.qubits, spins),
                    occurrences: 1,
                });
            }
        }
    }
    Ok(SampleSet {
        qubits: c.qubits,
        samples,
        num_reads: config.num_reads,
        model_digest: model.digest(),
        config_digest: config.digest(),
    })
}
