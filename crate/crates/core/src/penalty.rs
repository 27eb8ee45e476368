//! Penalty functions for Boolean constraints on a tile of qubits.
//!
//! A penalty function `P(x, a) = o + Σ θ_i z_i + Σ θ_ij z_i z_j` over spins
//! encodes a Boolean predicate `F` when, for every input `x`, the minimum over
//! the ancilla spins `a` is exactly zero if `F(x)` holds and at least the gap
//! `g` otherwise. Synthesis maximizes `g` inside the hardware weight ranges.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use crate::error::{QfaError, Result};
use crate::ising::{keyed, keyed_pair};
use crate::lp::{snap, LinearProgram, Sense, WarmLp};
use crate::topology::{TileAssignment, BIAS_RANGE, COUPLING_RANGE};

/// Residual tolerance applied when verifying floating point penalties.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Slack allowed between the claimed and the measured gap.
pub const GAP_TOL: f64 = 1e-6;

/// Names of the controlled full-adder variables, in truth-table bit order.
pub const CFA_VARS: [&str; 6] = ["m", "q", "in2", "c_in", "out", "c_out"];

/// A Boolean predicate over named variables, optionally restricted by a
/// partial assignment of some of them.
#[derive(Clone, PartialEq, Eq)]
pub struct BooleanSpec {
    variables: Vec<String>,
    /// Bit `i` of the index is the value of `variables[i]`.
    truth: Vec<bool>,
    fixed: BTreeMap<String, bool>,
}

impl fmt::Debug for BooleanSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BooleanSpec")
            .field("variables", &self.variables)
            .field("fixed", &self.fixed)
            .field("satisfying", &self.satisfying_count())
            .finish()
    }
}

impl BooleanSpec {
    /// Builds a spec from a predicate over the variables' truth values.
    pub fn from_fn<F>(variables: &[&str], predicate: F) -> Self
    where
        F: Fn(&[bool]) -> bool,
    {
        let n = variables.len();
        assert!(n <= 16, "too many variables");
        let mut values = vec![false; n];
        let truth = (0..1usize << n)
            .map(|bits| {
                for (i, v) in values.iter_mut().enumerate() {
                    *v = bits >> i & 1 == 1;
                }
                predicate(&values)
            })
            .collect();
        Self {
            variables: variables.iter().map(|s| s.to_string()).collect(),
            truth,
            fixed: BTreeMap::new(),
        }
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn fixed(&self) -> &BTreeMap<String, bool> {
        &self.fixed
    }

    pub fn free_variables(&self) -> Vec<&str> {
        self.variables
            .iter()
            .filter(|v| !self.fixed.contains_key(*v))
            .map(String::as_str)
            .collect()
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    /// Value of the base predicate (fixings ignored).
    pub fn predicate(&self, values: &[bool]) -> bool {
        let idx = values
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &b)| acc | (b as usize) << i);
        self.truth[idx]
    }

    /// The predicate conjoined with the fixing literals.
    pub fn holds(&self, values: &[bool]) -> bool {
        self.predicate(values)
            && self
                .fixed
                .iter()
                .all(|(name, &v)| self.index_of(name).map(|i| values[i] == v).unwrap_or(false))
    }

    /// Evaluates the constraint on an assignment of the free variables only
    /// (in `free_variables()` order); fixed variables take their fixed value.
    pub fn holds_free(&self, free_values: &[bool]) -> bool {
        let mut values = vec![false; self.variables.len()];
        let mut it = free_values.iter();
        for (i, name) in self.variables.iter().enumerate() {
            values[i] = match self.fixed.get(name) {
                Some(&v) => v,
                None => *it.next().expect("free assignment too short"),
            };
        }
        self.holds(&values)
    }

    /// Number of satisfying assignments of the free variables.
    pub fn satisfying_count(&self) -> usize {
        let f = self.free_variables().len();
        (0..1usize << f)
            .filter(|&bits| {
                let vals: Vec<bool> = (0..f).map(|i| bits >> i & 1 == 1).collect();
                self.holds_free(&vals)
            })
            .count()
    }
}

fn majority(a: bool, b: bool, c: bool) -> bool {
    (a as u8 + b as u8 + c as u8) >= 2
}

/// Controlled full adder: `out = in2 ⊕ (m∧q) ⊕ c_in`, `c_out = maj(in2, m∧q, c_in)`.
pub fn cfa_spec() -> BooleanSpec {
    BooleanSpec::from_fn(&CFA_VARS, |v| {
        let (m, q, in2, c_in, out, c_out) = (v[0], v[1], v[2], v[3], v[4], v[5]);
        let pp = m && q;
        out == (in2 ^ pp ^ c_in) && c_out == majority(in2, pp, c_in)
    })
}

/// Conjoins `spec` with the given literals and removes them from the free set.
pub fn specialize(spec: &BooleanSpec, fixing: &[(&str, bool)]) -> Result<BooleanSpec> {
    let mut out = spec.clone();
    for &(name, value) in fixing {
        if out.index_of(name).is_none() {
            return Err(QfaError::UnknownVariable(name.to_string()));
        }
        match out.fixed.get(name) {
            Some(&prev) if prev != value => {
                return Err(QfaError::EmptySpec(format!("{name} fixed both ways")));
            }
            _ => {
                out.fixed.insert(name.to_string(), value);
            }
        }
    }
    if out.satisfying_count() == 0 {
        return Err(QfaError::EmptySpec(format_fixing(&out.fixed)));
    }
    Ok(out)
}

pub fn format_fixing(fixing: &BTreeMap<String, bool>) -> String {
    if fixing.is_empty() {
        return "{}".to_string();
    }
    let parts: Vec<String> = fixing
        .iter()
        .map(|(k, v)| format!("{k}={}", if *v { 1 } else { 0 }))
        .collect();
    parts.join(",")
}

/// Weights of a penalty function expressed on tile-local qubit slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyFunction {
    /// the fixing this penalty was synthesized for
    pub fixing: BTreeMap<String, bool>,
    pub offset: f64,
    /// slot -> bias
    #[serde(with = "keyed")]
    pub biases: BTreeMap<usize, f64>,
    /// (slot, slot) with first < second -> coupling
    #[serde(with = "keyed_pair")]
    pub couplings: BTreeMap<(usize, usize), f64>,
    pub gap: f64,
    /// variable or ancilla name -> slot
    pub placement: BTreeMap<String, usize>,
    pub num_ancillas: usize,
}

impl PenaltyFunction {
    /// Value at a spin assignment indexed by slot.
    pub fn energy(&self, spin_of: impl Fn(usize) -> i8) -> f64 {
        let mut e = self.offset;
        for (&s, &h) in &self.biases {
            e += h * spin_of(s) as f64;
        }
        for (&(a, b), &j) in &self.couplings {
            e += j * (spin_of(a) as f64) * (spin_of(b) as f64);
        }
        e
    }

    pub fn ancilla_names(&self) -> Vec<String> {
        (0..self.num_ancillas).map(|i| format!("a{i}")).collect()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        out.offset *= lambda;
        out.gap *= lambda;
        out.biases.values_mut().for_each(|v| *v *= lambda);
        out.couplings.values_mut().for_each(|v| *v *= lambda);
        out
    }

    pub fn within_ranges(&self) -> bool {
        self.biases
            .values()
            .all(|&h| h >= BIAS_RANGE.0 - RESIDUAL_TOL && h <= BIAS_RANGE.1 + RESIDUAL_TOL)
            && self.couplings.values().all(|&j| {
                j >= COUPLING_RANGE.0 - RESIDUAL_TOL && j <= COUPLING_RANGE.1 + RESIDUAL_TOL
            })
    }

    pub fn max_abs_bias(&self) -> f64 {
        self.biases.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn bias(&self, slot: usize) -> f64 {
        self.biases.get(&slot).copied().unwrap_or(0.0)
    }

    /// Slots carrying a variable or ancilla with a nonzero role in the energy.
    pub fn touches(&self, slot: usize) -> bool {
        self.biases.contains_key(&slot)
            || self.couplings.keys().any(|&(a, b)| a == slot || b == slot)
    }
}

/// Values each variable may be fixed to at a multiplier border; `None`
/// leaves it free.
pub const BORDER_FIXINGS: [(&str, &[Option<bool>]); 4] = [
    ("in2", &[None, Some(false)]),
    ("c_in", &[None, Some(false)]),
    ("out", &[None, Some(true), Some(false)]),
    ("c_out", &[None, Some(true), Some(false)]),
];

/// The border fixings that occur in some array multiplier. A constant carry
/// in (column 0) or a fixed carry out (last tile) always comes with a fixed
/// sum output, so combinations fixing those without `out` are left out.
/// The empty fixing comes first.
pub fn library_fixings() -> Vec<BTreeMap<String, bool>> {
    let mut out = vec![BTreeMap::new()];
    for (name, values) in BORDER_FIXINGS {
        out = out
            .into_iter()
            .flat_map(|f| {
                values.iter().map(move |v| {
                    let mut f = f.clone();
                    if let Some(v) = v {
                        f.insert(name.to_string(), *v);
                    }
                    f
                })
            })
            .collect();
    }
    out.retain(|f| f.contains_key("out") || !(f.contains_key("c_in") || f.contains_key("c_out")));
    out
}

/// Penalties for the CFA and its border-specialized variants, keyed by fixing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpecializedLibrary {
    pub entries: Vec<PenaltyFunction>,
}

impl SpecializedLibrary {
    pub fn get(&self, fixing: &BTreeMap<String, bool>) -> Option<&PenaltyFunction> {
        self.entries.iter().find(|e| &e.fixing == fixing)
    }

    pub fn base(&self) -> Option<&PenaltyFunction> {
        self.get(&BTreeMap::new())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Synthesizes one entry per satisfiable border fixing. Each entry gets two
/// ancillas plus one per fixed variable, the latter reusing the qubits the
/// fixed variables no longer need. Entries are computed in parallel and
/// returned in `library_fixings()` order.
pub fn build_specialized_library(tile: &TileAssignment) -> Result<SpecializedLibrary> {
    let base = cfa_spec();
    let entries: Vec<Option<PenaltyFunction>> = library_fixings()
        .par_iter()
        .map(|fixing| {
            let lits: Vec<(&str, bool)> = fixing.iter().map(|(k, &v)| (k.as_str(), v)).collect();
            let spec = match specialize(&base, &lits) {
                Ok(s) => s,
                Err(QfaError::EmptySpec(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let pf = synthesize_penalty(&spec, tile, 2 + fixing.len())?;
            let check = verify_penalty(&pf, &spec);
            if !check.satisfies_spec {
                return Err(QfaError::Infeasible(format!(
                    "fixing [{}]: synthesized entry fails verification",
                    format_fixing(fixing)
                )));
            }
            Ok(Some(pf))
        })
        .collect::<Result<_>>()?;
    Ok(SpecializedLibrary {
        entries: entries.into_iter().flatten().collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationResult {
    pub satisfies_spec: bool,
    pub measured_gap: f64,
    pub worst_sat_residual: f64,
    /// SAT inputs admitting an ancilla setting with `0 < P < gap`.
    pub slack_solution_count: usize,
    pub within_ranges: bool,
}

/// Exhaustive check of a penalty against a spec over all spin assignments.
pub fn verify_penalty(pf: &PenaltyFunction, spec: &BooleanSpec) -> VerificationResult {
    let free = spec.free_variables();
    let f = free.len();
    let k = pf.num_ancillas;
    let ancillas = pf.ancilla_names();
    let mut slot_value: BTreeMap<usize, i8> = BTreeMap::new();
    for (name, &v) in spec.fixed() {
        if let Some(&s) = pf.placement.get(name) {
            slot_value.insert(s, if v { 1 } else { -1 });
        }
    }
    let mut measured_gap = f64::INFINITY;
    let mut residual: f64 = 0.0;
    let mut slack = 0usize;
    for xbits in 0..1usize << f {
        let xv: Vec<bool> = (0..f).map(|i| xbits >> i & 1 == 1).collect();
        for (i, name) in free.iter().enumerate() {
            if let Some(&s) = pf.placement.get(*name) {
                slot_value.insert(s, if xv[i] { 1 } else { -1 });
            }
        }
        let mut min_p = f64::INFINITY;
        let mut has_slack = false;
        for abits in 0..1usize << k {
            for (i, name) in ancillas.iter().enumerate() {
                if let Some(&s) = pf.placement.get(name) {
                    slot_value.insert(s, if abits >> i & 1 == 1 { 1 } else { -1 });
                }
            }
            let p = pf.energy(|s| *slot_value.get(&s).unwrap_or(&-1));
            min_p = min_p.min(p);
            if p > RESIDUAL_TOL && p < pf.gap - GAP_TOL {
                has_slack = true;
            }
        }
        if spec.holds_free(&xv) {
            residual = residual.max(min_p.abs());
            if has_slack {
                slack += 1;
            }
        } else {
            measured_gap = measured_gap.min(min_p);
        }
    }
    let within_ranges = pf.within_ranges();
    VerificationResult {
        satisfies_spec: residual <= RESIDUAL_TOL
            && measured_gap >= pf.gap - GAP_TOL
            && within_ranges,
        measured_gap,
        worst_sat_residual: residual,
        slack_solution_count: slack,
        within_ranges,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SynthObjective {
    /// Maximize the gap only.
    #[default]
    MaxGap,
    /// Maximize the gap, then prefer the fewest slack rows among optima.
    MaxGapMinSlack,
}

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub objective: SynthObjective,
    /// Upper bound on branch-and-bound nodes; `None` searches exhaustively.
    pub node_limit: Option<usize>,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            objective: SynthObjective::MaxGap,
            node_limit: None,
        }
    }
}

/// Synthesizes a gap-maximal penalty for `spec` on `tile`.
///
/// Spec variables are placed on the tile ports of the same name; ancillas take
/// the remaining tile qubits in order.
pub fn synthesize_penalty(
    spec: &BooleanSpec,
    tile: &TileAssignment,
    num_ancillas: usize,
) -> Result<PenaltyFunction> {
    synthesize_with(spec, tile, num_ancillas, &SynthOptions::default())
}

pub fn synthesize_with(
    spec: &BooleanSpec,
    tile: &TileAssignment,
    num_ancillas: usize,
    opts: &SynthOptions,
) -> Result<PenaltyFunction> {
    let problem = SynthProblem::new(spec, tile, num_ancillas)?;
    problem.solve(opts)
}

/// Offset magnitude bound; the offset is otherwise pinned by the SAT equalities.
const OFFSET_BOUND: f64 = 1e3;

struct SynthProblem {
    placement: BTreeMap<String, usize>,
    fixing: BTreeMap<String, bool>,
    num_ancillas: usize,
    /// used slots, in LP bias order
    slots: Vec<usize>,
    /// couplers among used slots, in LP order
    edges: Vec<(usize, usize)>,
    /// per SAT input: per ancilla pattern, the LP row of P (offset..couplings)
    sat_rows: Vec<Vec<Vec<f64>>>,
    unsat_rows: Vec<Vec<Vec<f64>>>,
    /// description of each UNSAT input, for error reporting
    unsat_labels: Vec<String>,
    nvars: usize,
}

impl SynthProblem {
    fn new(spec: &BooleanSpec, tile: &TileAssignment, num_ancillas: usize) -> Result<Self> {
        let free: Vec<String> = spec
            .free_variables()
            .iter()
            .map(|s| s.to_string())
            .collect();
        let size = tile.qubits.len();
        if free.len() + num_ancillas > size {
            return Err(QfaError::Infeasible(format!(
                "{} variables and {} ancillas exceed a {}-qubit tile",
                free.len(),
                num_ancillas,
                size
            )));
        }
        let mut placement = BTreeMap::new();
        for name in spec.variables() {
            let slot = tile
                .slot_of_role(name)
                .ok_or_else(|| QfaError::UnknownVariable(name.clone()))?;
            placement.insert(name.clone(), slot);
        }
        // Unused tile qubits host ancillas first; slots of fixed variables
        // follow, so a larger budget can reclaim them.
        let taken: Vec<usize> = placement.values().copied().collect();
        let mut spare: Vec<usize> = (0..size).filter(|s| !taken.contains(s)).collect();
        spare.extend(
            spec.fixed()
                .keys()
                .filter_map(|v| placement.get(v).copied()),
        );
        if spare.len() < num_ancillas {
            return Err(QfaError::Infeasible(format!(
                "tile has {} spare qubits for {} ancillas",
                spare.len(),
                num_ancillas
            )));
        }
        // fixed variables are constants and occupy no qubit
        placement.retain(|name, _| !spec.fixed().contains_key(name));
        for (i, &s) in spare.iter().take(num_ancillas).enumerate() {
            placement.insert(format!("a{i}"), s);
        }

        let mut slots: Vec<usize> = free.iter().map(|v| placement[v]).collect();
        slots.extend(spare.iter().take(num_ancillas));
        slots.sort_unstable();
        let edges: Vec<(usize, usize)> = tile
            .local_couplers()
            .into_iter()
            .filter(|(a, b)| slots.contains(a) && slots.contains(b))
            .collect();
        let nvars = 1 + slots.len() + edges.len() + 1;

        let f = free.len();
        let mut sat_rows = Vec::new();
        let mut unsat_rows = Vec::new();
        let mut unsat_labels = Vec::new();
        let mut spin = vec![0i8; size];
        for xbits in 0..1usize << f {
            let xv: Vec<bool> = (0..f).map(|i| xbits >> i & 1 == 1).collect();
            for (i, v) in free.iter().enumerate() {
                spin[placement[v]] = if xv[i] { 1 } else { -1 };
            }
            let mut rows = Vec::with_capacity(1 << num_ancillas);
            for abits in 0..1usize << num_ancillas {
                for i in 0..num_ancillas {
                    spin[placement[&format!("a{i}")]] = if abits >> i & 1 == 1 { 1 } else { -1 };
                }
                let mut row = vec![0.0; nvars];
                row[0] = 1.0;
                for (i, &s) in slots.iter().enumerate() {
                    row[1 + i] = spin[s] as f64;
                }
                for (i, &(a, b)) in edges.iter().enumerate() {
                    row[1 + slots.len() + i] = (spin[a] * spin[b]) as f64;
                }
                rows.push(row);
            }
            if spec.holds_free(&xv) {
                sat_rows.push(rows);
            } else {
                let label: Vec<String> = free
                    .iter()
                    .zip(&xv)
                    .map(|(n, &b)| format!("{n}={}", b as u8))
                    .collect();
                unsat_labels.push(label.join(","));
                unsat_rows.push(rows);
            }
        }
        if sat_rows.is_empty() {
            return Err(QfaError::EmptySpec(format_fixing(spec.fixed())));
        }
        Ok(Self {
            placement,
            fixing: spec.fixed().clone(),
            num_ancillas,
            slots,
            edges,
            sat_rows,
            unsat_rows,
            unsat_labels,
            nvars,
        })
    }

    fn gap_var(&self) -> usize {
        self.nvars - 1
    }

    fn base_lp(&self) -> LinearProgram {
        let n = self.nvars;
        let g = self.gap_var();
        let mut lp = LinearProgram::new(n);
        lp.set_objective(g, 1.0);
        for rows in &self.sat_rows {
            for r in rows {
                lp.add(r.clone(), Sense::Ge, 0.0);
            }
        }
        for rows in &self.unsat_rows {
            for r in rows {
                let mut r = r.clone();
                r[g] = -1.0;
                lp.add(r, Sense::Ge, 0.0);
            }
        }
        lp.bound(0, -OFFSET_BOUND, OFFSET_BOUND);
        for i in 0..self.slots.len() {
            lp.bound(1 + i, BIAS_RANGE.0, BIAS_RANGE.1);
        }
        for i in 0..self.edges.len() {
            lp.bound(1 + self.slots.len() + i, COUPLING_RANGE.0, COUPLING_RANGE.1);
        }
        lp.bound(g, f64::NEG_INFINITY, OFFSET_BOUND);
        lp
    }

    fn with_choices(&self, choices: &[Option<usize>]) -> LinearProgram {
        let mut lp = self.base_lp();
        for (row, choice) in self.sat_rows.iter().zip(choices) {
            if let Some(a) = choice {
                lp.add(row[*a].clone(), Sense::Eq, 0.0);
            }
        }
        lp
    }

    fn dot(row: &[f64], x: &[f64]) -> f64 {
        row.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Per SAT row, the smallest P over ancillas and its argmin.
    fn sat_minima(&self, x: &[f64]) -> Vec<(f64, usize)> {
        self.sat_rows
            .iter()
            .map(|rows| {
                rows.iter()
                    .enumerate()
                    .map(|(a, r)| (Self::dot(&r[..self.nvars - 1], &x[..self.nvars - 1]), a))
                    .fold(
                        (f64::INFINITY, 0),
                        |best, cur| if cur.0 < best.0 { cur } else { best },
                    )
            })
            .collect()
    }

    fn slack_count(&self, x: &[f64], gap: f64) -> usize {
        self.sat_rows
            .iter()
            .filter(|rows| {
                rows.iter().any(|r| {
                    let p = Self::dot(&r[..self.nvars - 1], &x[..self.nvars - 1]);
                    p > 1e-7 && p < gap - 1e-7
                })
            })
            .count()
    }

    fn solve(&self, opts: &SynthOptions) -> Result<PenaltyFunction> {
        let mut search = Search {
            problem: self,
            opts,
            best: None,
            nodes: 0,
        };
        let mut choices = vec![None; self.sat_rows.len()];
        if let Ok(root) = self.base_lp().solve_warm() {
            search.branch(&mut choices, root, f64::INFINITY);
        }
        let Some(best) = search.best.filter(|b| b.gap > GAP_TOL) else {
            return Err(self.infeasibility(None));
        };
        Ok(self.polish(&best))
    }

    /// Names an UNSAT input row that the best zero-gap solution cannot lift
    /// above zero. Ancilla choices come from `best` when the search kept one,
    /// otherwise from the root relaxation's per-row minimizers.
    fn infeasibility(&self, best: Option<&Candidate>) -> QfaError {
        let k = self.nvars - 1;
        let x = best.map(|b| b.x.clone()).or_else(|| {
            let root = self.base_lp().maximize().ok()?;
            let choices: Vec<Option<usize>> = self
                .sat_minima(&root.x)
                .iter()
                .map(|&(_, a)| Some(a))
                .collect();
            let mut lp = self.with_choices(&choices);
            // keep the gap variable finite so the witness LP has an optimum
            let mut lo = vec![0.0; self.nvars];
            lo[self.gap_var()] = 1.0;
            lp.add(lo, Sense::Ge, -OFFSET_BOUND);
            lp.maximize().ok().map(|s| s.x)
        });
        let label = match x {
            Some(x) => self
                .unsat_rows
                .iter()
                .zip(&self.unsat_labels)
                .map(|(rows, l)| {
                    let low = rows
                        .iter()
                        .map(|r| Self::dot(&r[..k], &x[..k]))
                        .fold(f64::INFINITY, f64::min);
                    (low, l)
                })
                .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
                .map(|(_, l)| l.clone()),
            None => self.unsat_labels.first().cloned(),
        }
        .unwrap_or_else(|| "<none>".to_string());
        QfaError::Infeasible(format!(
            "fixing [{}]: input row {label} cannot be separated with positive gap",
            format_fixing(&self.fixing)
        ))
    }

    /// Re-solves the winning ancilla choice with a secondary objective
    /// (smallest bias magnitude at the optimal gap) and snaps values.
    fn polish(&self, best: &Candidate) -> PenaltyFunction {
        let n = self.nvars;
        let g = self.gap_var();
        let choices: Vec<Option<usize>> = best.choices.iter().map(|&c| Some(c)).collect();
        let base = self.with_choices(&choices);
        // Extended LP: one extra variable t bounding every |bias|.
        let mut ext = LinearProgram::new(n + 1);
        ext.set_objective(n, -1.0);
        for c in base.constraints() {
            let mut coeffs = c.coeffs.clone();
            coeffs.push(0.0);
            ext.add(coeffs, c.sense, c.rhs);
        }
        let mut gfix = vec![0.0; n + 1];
        gfix[g] = 1.0;
        ext.add(gfix, Sense::Ge, best.gap - 1e-9);
        for i in 0..self.slots.len() {
            let mut up = vec![0.0; n + 1];
            up[1 + i] = 1.0;
            up[n] = -1.0;
            ext.add(up, Sense::Le, 0.0);
            let mut lo = vec![0.0; n + 1];
            lo[1 + i] = -1.0;
            lo[n] = -1.0;
            ext.add(lo, Sense::Le, 0.0);
        }
        let x = match ext.maximize() {
            Ok(sol) => sol.x[..n].to_vec(),
            Err(_) => best.x.clone(),
        };
        let raw = self.to_penalty(&x, best.gap);
        let mut snapped = raw.clone();
        snapped.offset = snap(snapped.offset, 48, 1e-7);
        snapped.gap = snap(snapped.gap, 48, 1e-7);
        snapped
            .biases
            .values_mut()
            .for_each(|v| *v = snap(*v, 48, 1e-7));
        snapped
            .couplings
            .values_mut()
            .for_each(|v| *v = snap(*v, 48, 1e-7));
        if self.check(&snapped) {
            snapped
        } else {
            raw
        }
    }

    fn check(&self, pf: &PenaltyFunction) -> bool {
        let mut x = vec![0.0; self.nvars];
        x[0] = pf.offset;
        for (i, s) in self.slots.iter().enumerate() {
            x[1 + i] = pf.biases[s];
        }
        for (i, e) in self.edges.iter().enumerate() {
            x[1 + self.slots.len() + i] = pf.couplings[e];
        }
        let sat_ok = self
            .sat_minima(&x)
            .iter()
            .all(|(p, _)| p.abs() <= RESIDUAL_TOL);
        let k = self.nvars - 1;
        let unsat_ok = self.unsat_rows.iter().all(|rows| {
            rows.iter()
                .all(|r| Self::dot(&r[..k], &x[..k]) >= pf.gap - GAP_TOL)
        });
        sat_ok && unsat_ok && pf.within_ranges()
    }

    fn to_penalty(&self, x: &[f64], gap: f64) -> PenaltyFunction {
        let clean = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
        let biases = self
            .slots
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, clean(x[1 + i])))
            .collect();
        let couplings = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, clean(x[1 + self.slots.len() + i])))
            .collect();
        PenaltyFunction {
            offset: clean(x[0]),
            biases,
            couplings,
            gap,
            placement: self.placement.clone(),
            num_ancillas: self.num_ancillas,
            fixing: self.fixing.clone(),
        }
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    gap: f64,
    slack: usize,
    choices: Vec<usize>,
    x: Vec<f64>,
}

struct Search<'a> {
    problem: &'a SynthProblem,
    opts: &'a SynthOptions,
    best: Option<Candidate>,
    nodes: usize,
}

impl Search<'_> {
    fn improves(&self, gap: f64, slack: usize) -> bool {
        match &self.best {
            None => true,
            Some(b) => match self.opts.objective {
                SynthObjective::MaxGap => gap > b.gap + 1e-9,
                SynthObjective::MaxGapMinSlack => {
                    gap > b.gap + 1e-9 || (gap > b.gap - 1e-9 && slack < b.slack)
                }
            },
        }
    }

    fn can_prune(&self, bound: f64) -> bool {
        match &self.best {
            None => false,
            Some(b) => match self.opts.objective {
                SynthObjective::MaxGap => bound <= b.gap + 1e-9,
                SynthObjective::MaxGapMinSlack => {
                    bound < b.gap - 1e-9 || b.slack == 0 && bound <= b.gap + 1e-9
                }
            },
        }
    }

    fn branch(&mut self, choices: &mut [Option<usize>], lp: WarmLp, parent_bound: f64) {
        if let Some(limit) = self.opts.node_limit {
            if self.nodes >= limit && self.best.is_some() {
                return;
            }
        }
        self.nodes += 1;
        let p = self.problem;
        let sol = lp.solution();
        let bound = sol.objective.min(parent_bound);
        if bound <= GAP_TOL || self.can_prune(bound) {
            return;
        }
        let m = p.sat_minima(&sol.x);
        let feasible = m
            .iter()
            .zip(choices.iter())
            .all(|((v, _), c)| c.is_some() || v.abs() <= 1e-9);
        if feasible {
            let full: Vec<usize> = choices
                .iter()
                .zip(&m)
                .map(|(c, (_, a))| c.unwrap_or(*a))
                .collect();
            let slack = p.slack_count(&sol.x, sol.objective);
            if self.improves(sol.objective, slack) {
                self.best = Some(Candidate {
                    gap: sol.objective,
                    slack,
                    choices: full,
                    x: sol.x.clone(),
                });
            }
            if self.opts.objective == SynthObjective::MaxGap || slack == 0 {
                return;
            }
        }
        let Some(row) = (0..choices.len())
            .filter(|&i| choices[i].is_none())
            .max_by(|&a, &b| m[a].0.partial_cmp(&m[b].0).unwrap().then(b.cmp(&a)))
        else {
            return;
        };
        // Try ancilla patterns in order of their current penalty value.
        let k = p.nvars - 1;
        let mut order: Vec<(f64, usize)> = p.sat_rows[row]
            .iter()
            .enumerate()
            .map(|(a, r)| (SynthProblem::dot(&r[..k], &sol.x[..k]), a))
            .collect();
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        for (_, a) in order {
            let mut child = lp.clone();
            if child.add(&p.sat_rows[row][a], Sense::Eq, 0.0).is_err() {
                continue;
            }
            choices[row] = Some(a);
            self.branch(choices, child, bound);
            choices[row] = None;
        }
    }
}
