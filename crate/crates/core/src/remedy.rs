//! Incremental anneal-offset remedy: advance the most excited CFA until a
//! ground state appears or the step budget runs out.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diagnostics::excitation_stats;
use crate::error::{QfaError, Result};
use crate::sampler::{sample_sa, AnnealConfig, MAX_OFFSET};

/// Default offset step.
pub const DEFAULT_DELTA: f64 = 0.01;

/// Default step budget: the perimeter `2(n + m)` of the multiplier.
pub fn default_threshold(n: usize, m: usize) -> usize {
    2 * (n + m)
}

/// Seed for iteration `it`; iteration 0 uses the master seed itself.
pub fn iteration_seed(master: u64, it: usize) -> u64 {
    master.wrapping_add((it as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemedyStep {
    pub iteration: usize,
    pub seed: u64,
    pub best_energy: f64,
    pub ground_reads: usize,
    /// excitation counts before this step, keyed `"col,row"`
    #[serde(with = "crate::ising::keyed_pair")]
    pub excitations: BTreeMap<(usize, usize), usize>,
    /// `((col, row), count)` of the most excited tile
    pub most_excited: Option<((usize, usize), usize)>,
    /// tile whose qubits were advanced, if any
    pub target: Option<(usize, usize)>,
    /// cumulative offsets after this step
    #[serde(with = "crate::ising::keyed")]
    pub offsets: BTreeMap<u32, f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemedyResult {
    pub delta: f64,
    pub threshold: usize,
    pub history: Vec<RemedyStep>,
    pub reached_ground: bool,
    pub iterations_used: usize,
}

impl RemedyResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs the loop on `problem`. Offsets are kept as step counts times `delta`,
/// so repeated targeting never accumulates rounding error; offsets beyond the
/// configured bound are clamped with a warning.
pub fn remedy_loop(
    problem: &crate::multiplier::Problem,
    base: &AnnealConfig,
    delta: f64,
    threshold: usize,
) -> Result<RemedyResult> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(QfaError::Config(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if threshold == 0 {
        return Err(QfaError::Config("threshold must be at least 1".into()));
    }
    let layout = &problem.layout;
    let mut steps: BTreeMap<u32, u32> = BTreeMap::new();
    let mut offsets: BTreeMap<u32, f64> = base.offsets.clone();
    let mut history = Vec::new();
    let mut it = 0;
    loop {
        let seed = iteration_seed(base.master_seed, it);
        let cfg = AnnealConfig {
            offsets: offsets.clone(),
            master_seed: seed,
            ..base.clone()
        };
        let samples = sample_sa(&problem.model, &cfg)?;
        let report = excitation_stats(problem, &samples);
        let ground = report.ground_reads();
        let most = report.most_excited();
        let mut step = RemedyStep {
            iteration: it,
            seed,
            best_energy: samples.min_energy(),
            ground_reads: ground,
            excitations: report.per_cfa.clone(),
            most_excited: most,
            target: None,
            offsets: offsets.clone(),
            warnings: Vec::new(),
        };
        if ground > 0 || it >= threshold {
            history.push(step);
            return Ok(RemedyResult {
                delta,
                threshold,
                history,
                reached_ground: ground > 0,
                iterations_used: it,
            });
        }
        if let Some(((col, row), _)) = most {
            for &q in &layout.tile(row, col).qubits {
                let k = steps.entry(q).or_insert(0);
                *k += 1;
                let start = base.offsets.get(&q).copied().unwrap_or(0.0);
                let want = start + *k as f64 * delta;
                let got = want.min(MAX_OFFSET);
                if got < want {
                    step.warnings.push(format!(
                        "qubit {q}: offset {want:.4} clamped to {MAX_OFFSET}"
                    ));
                }
                offsets.insert(q, got);
            }
            step.target = Some((col, row));
            step.offsets = offsets.clone();
        }
        history.push(step);
        it += 1;
    }
}
