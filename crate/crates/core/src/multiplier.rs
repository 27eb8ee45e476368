//! Array multipliers built from CFA tiles and chains.
//!
//! Tile `(i, j)` sits in row `i` (multiplier bit `q_i`) and column `j`
//! (multiplicand bit `m_j`) and computes `m_j ∧ q_i` with weight `2^(i+j)`.
//! It takes `in2` from the `out` of tile `(i-1, j+1)`, or from the carry out
//! of tile `(i-1, n-1)` in the last column, and `c_in` from the carry out of
//! tile `(i, j-1)`. Row 0 has `in2 = ⊥` and column 0 has `c_in = ⊥`.
//! Product bits are `o_i = out(i, 0)` for `i < m-1`, `o_(m-1+j) = out(m-1, j)`
//! and `o_(n+m-1) = c_out(m-1, n-1)`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{QfaError, Result};
use crate::ising::{keyed, keyed_pair, spin_of, IsingModel, Spin};
use crate::penalty::{format_fixing, PenaltyFunction, SpecializedLibrary, CFA_VARS};
use crate::topology::{
    place_tiles, HardwareGraph, TileAssignment, TileGrid, BIAS_RANGE, COUPLING_RANGE,
};

/// Longest routed path, in couplers, between two linked ports.
pub const MAX_ROUTE_EDGES: usize = 6;
/// Strength of the pinning terms `2 - 2vz` used by extra chaining.
pub const PIN_STRENGTH: f64 = 2.0;

/// Index of each CFA variable in per-tile value arrays.
pub const M: usize = 0;
pub const Q: usize = 1;
pub const IN2: usize = 2;
pub const C_IN: usize = 3;
pub const OUT: usize = 4;
pub const C_OUT: usize = 5;

/// Spins LSB first; bit 1 maps to `+1`.
pub fn binary_spins(value: u64, width: usize) -> Result<Vec<Spin>> {
    if width < 64 && value >> width != 0 {
        return Err(QfaError::Overflow { value, width });
    }
    Ok((0..width).map(|i| spin_of(value >> i & 1 == 1)).collect())
}

/// MSB-first rendering of LSB-first spins.
pub fn spins_msb_first(spins: &[Spin]) -> Vec<Spin> {
    spins.iter().rev().copied().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    /// `q_i` broadcast to the next column.
    Q,
    /// `m_j` broadcast to the next row.
    M,
    /// carry out to the next column's carry in.
    Carry,
    /// partial sum (or last-column carry) to the next row's `in2`.
    Sum,
}

impl LinkKind {
    pub fn name(self) -> &'static str {
        match self {
            LinkKind::Q => "q",
            LinkKind::M => "m",
            LinkKind::Carry => "carry",
            LinkKind::Sum => "sum",
        }
    }
}

/// One logical equivalence between two tile ports, realized by a path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub kind: LinkKind,
    /// `(row, col)` of the tile holding the source port
    pub from: (usize, usize),
    pub to: (usize, usize),
    /// qubits from source port to target port
    pub path: Vec<u32>,
}

impl Link {
    pub fn label(&self) -> String {
        format!(
            "{}:{},{}>{},{}",
            self.kind.name(),
            self.from.0,
            self.from.1,
            self.to.0,
            self.to.1
        )
    }
}

/// A single chain term `c - c·z_a·z_b` on a hardware coupler.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub a: u32,
    pub b: u32,
    pub role: String,
    /// index into `MultiplierLayout::links`
    pub link: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierLayout {
    /// multiplicand width (columns)
    pub n: usize,
    /// multiplier width (rows)
    pub m: usize,
    pub grid: TileGrid,
    /// row-major penalty of each tile
    pub penalties: Vec<PenaltyFunction>,
    pub links: Vec<Link>,
    pub chains: Vec<Chain>,
    pub role_map: BTreeMap<String, u32>,
    pub chain_strength: f64,
}

impl MultiplierLayout {
    pub fn tile(&self, row: usize, col: usize) -> &TileAssignment {
        self.grid.tile(row, col)
    }

    pub fn penalty(&self, row: usize, col: usize) -> &PenaltyFunction {
        &self.penalties[row * self.n + col]
    }

    /// Row-major `(row, col)` positions.
    pub fn positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.m).flat_map(move |i| (0..self.n).map(move |j| (i, j)))
    }

    /// Hardware qubit of each placed variable or ancilla of a tile's penalty.
    pub fn tile_qubits(&self, row: usize, col: usize) -> BTreeMap<String, u32> {
        let t = self.tile(row, col);
        self.penalty(row, col)
            .placement
            .iter()
            .map(|(name, &s)| (name.clone(), t.qubits[s]))
            .collect()
    }

    /// Qubit carrying product bit `k`.
    pub fn output_qubit(&self, k: usize) -> Option<u32> {
        self.role_map.get(&format!("o_{k}")).copied()
    }

    pub fn num_outputs(&self) -> usize {
        self.n + self.m
    }

    /// Qubits held by tiles or chain paths.
    pub fn used_qubits(&self) -> BTreeSet<u32> {
        let mut s = self.grid.qubits();
        for l in &self.links {
            s.extend(l.path.iter().copied());
        }
        s
    }
}

/// Tile and role carrying product bit `k`.
pub fn output_role(n: usize, m: usize, k: usize) -> Option<(usize, usize, usize)> {
    if k + 1 < m {
        Some((k, 0, OUT))
    } else if k + 1 < m + n {
        Some((m - 1, k + 1 - m, OUT))
    } else if k + 1 == m + n {
        Some((m - 1, n - 1, C_OUT))
    } else {
        None
    }
}

/// Variables each tile must fix for a given target, before any method applies.
/// Returns `(row, col, role index, value)` tuples in row-major tile order.
pub fn problem_constants(
    n: usize,
    m: usize,
    target: u64,
) -> Result<Vec<(usize, usize, usize, bool)>> {
    let bits = n + m;
    if bits < 64 && target >> bits != 0 {
        return Err(QfaError::NotRepresentable {
            n: target,
            a: n,
            b: m,
        });
    }
    let mut out = Vec::new();
    for j in 0..n {
        out.push((0, j, IN2, false));
    }
    for i in 0..m {
        out.push((i, 0, C_IN, false));
    }
    for k in 0..bits {
        let (i, j, r) = output_role(n, m, k).expect("bit index in range");
        out.push((i, j, r, target >> k & 1 == 1));
    }
    out.sort_by_key(|&(i, j, r, _)| (i, j, r));
    Ok(out)
}

/// Per-tile fixings for `target`, row-major.
pub fn tile_fixings(n: usize, m: usize, target: u64) -> Result<Vec<BTreeMap<String, bool>>> {
    let mut out = vec![BTreeMap::new(); n * m];
    for (i, j, r, v) in problem_constants(n, m, target)? {
        out[i * n + j].insert(CFA_VARS[r].to_string(), v);
    }
    Ok(out)
}

/// Values of the six CFA variables at every tile for `p × q`, row-major.
pub fn simulate_circuit(n: usize, m: usize, p: u64, q: u64) -> Vec<[bool; 6]> {
    let mut vals = vec![[false; 6]; n * m];
    for i in 0..m {
        for j in 0..n {
            let mj = p >> j & 1 == 1;
            let qi = q >> i & 1 == 1;
            let in2 = if i == 0 {
                false
            } else if j + 1 < n {
                vals[(i - 1) * n + j + 1][OUT]
            } else {
                vals[(i - 1) * n + n - 1][C_OUT]
            };
            let c_in = if j == 0 {
                false
            } else {
                vals[i * n + j - 1][C_OUT]
            };
            let pp = mj && qi;
            let sum = in2 as u8 + pp as u8 + c_in as u8;
            vals[i * n + j] = [mj, qi, in2, c_in, sum & 1 == 1, sum >= 2];
        }
    }
    vals
}

/// Product read off the circuit outputs.
pub fn circuit_product(n: usize, m: usize, vals: &[[bool; 6]]) -> u64 {
    (0..n + m)
        .map(|k| {
            let (i, j, r) = output_role(n, m, k).unwrap();
            (vals[i * n + j][r] as u64) << k
        })
        .sum()
}

fn check_chain_strength(c: f64) -> Result<()> {
    if c > 0.0 && c <= 2.0 {
        Ok(())
    } else {
        Err(QfaError::ChainStrength(c))
    }
}

/// Places an `m × n` tile grid, routes every link and composes the model.
pub fn build_multiplier(
    n: usize,
    m: usize,
    graph: &HardwareGraph,
    library: &SpecializedLibrary,
    c: f64,
) -> Result<(MultiplierLayout, IsingModel)> {
    check_chain_strength(c)?;
    if n == 0 || m == 0 {
        return Err(QfaError::Usage("multiplier widths must be positive".into()));
    }
    let base = library
        .base()
        .ok_or_else(|| QfaError::MissingLibraryEntry(format_fixing(&BTreeMap::new())))?
        .clone();
    let grid = place_tiles(graph, m, n)?;
    let links = route_links(graph, &grid, n, m)?;
    let mut chains = Vec::new();
    for (idx, l) in links.iter().enumerate() {
        for w in l.path.windows(2) {
            chains.push(Chain {
                a: w[0],
                b: w[1],
                role: l.label(),
                link: idx,
            });
        }
    }
    let mut layout = MultiplierLayout {
        n,
        m,
        grid,
        penalties: vec![base; n * m],
        links,
        chains,
        role_map: BTreeMap::new(),
        chain_strength: c,
    };
    layout.role_map = role_map(&layout);
    let model = compose(&layout);
    Ok((layout, model))
}

fn port(grid: &TileGrid, i: usize, j: usize, role: usize) -> u32 {
    grid.tile(i, j).ports[CFA_VARS[role]]
}

/// Routes links in passes by kind (carry, sum, q, m), row-major within a
/// pass. Carry ports have the fewest spare neighbours, so they go first.
fn route_links(graph: &HardwareGraph, grid: &TileGrid, n: usize, m: usize) -> Result<Vec<Link>> {
    let mut wanted = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if j + 1 < n {
                wanted.push((LinkKind::Q, (i, j), Q, (i, j + 1), Q));
                wanted.push((LinkKind::Carry, (i, j), C_OUT, (i, j + 1), C_IN));
            }
            if i + 1 < m {
                wanted.push((LinkKind::M, (i, j), M, (i + 1, j), M));
                if j + 1 < n {
                    wanted.push((LinkKind::Sum, (i, j + 1), OUT, (i + 1, j), IN2));
                } else {
                    wanted.push((LinkKind::Sum, (i, j), C_OUT, (i + 1, j), IN2));
                }
            }
        }
    }
    let prio = |k: LinkKind| match k {
        LinkKind::Carry => 0,
        LinkKind::Sum => 1,
        LinkKind::Q => 2,
        LinkKind::M => 3,
    };
    wanted.sort_by_key(|w| prio(w.0));
    let mut blocked = grid.qubits();
    let mut links = Vec::with_capacity(wanted.len());
    for (kind, from, fr, to, tr) in wanted {
        let a = port(grid, from.0, from.1, fr);
        let b = port(grid, to.0, to.1, tr);
        let path = graph.route(a, b, &blocked, MAX_ROUTE_EDGES).ok_or_else(|| {
            QfaError::Routing(format!(
                "no path of at most {MAX_ROUTE_EDGES} couplers for {} link from tile ({},{}) to ({},{}) \
                 on a {}x{} grid",
                kind.name(),
                from.0,
                from.1,
                to.0,
                to.1,
                m,
                n
            ))
        })?;
        blocked.extend(path.iter().copied());
        links.push(Link {
            kind,
            from,
            to,
            path,
        });
    }
    Ok(links)
}

fn role_map(layout: &MultiplierLayout) -> BTreeMap<String, u32> {
    let (n, m) = (layout.n, layout.m);
    let mut map = BTreeMap::new();
    for j in 0..n {
        map.insert(format!("m_{j}"), port(&layout.grid, 0, j, M));
    }
    for i in 0..m {
        map.insert(format!("q_{i}"), port(&layout.grid, i, 0, Q));
    }
    for k in 0..n + m {
        let (i, j, r) = output_role(n, m, k).unwrap();
        map.insert(format!("o_{k}"), port(&layout.grid, i, j, r));
    }
    for (i, j) in layout.positions() {
        for (name, q) in layout.tile_qubits(i, j) {
            map.insert(format!("t{i}_{j}.{name}"), q);
        }
    }
    map
}

/// Adds a slot-indexed penalty onto the qubits of `tile`.
pub fn add_penalty(model: &mut IsingModel, tile: &TileAssignment, pf: &PenaltyFunction) {
    model.add_offset(pf.offset);
    for (&s, &h) in &pf.biases {
        model.add_bias(tile.qubits[s], h);
    }
    for (&(a, b), &j) in &pf.couplings {
        model.add_coupling(tile.qubits[a], tile.qubits[b], j);
    }
}

/// Sum of tile penalties plus `c - c·zz'` per chain.
pub fn compose(layout: &MultiplierLayout) -> IsingModel {
    let mut model = IsingModel::default();
    for (i, j) in layout.positions() {
        add_penalty(&mut model, layout.tile(i, j), layout.penalty(i, j));
    }
    let c = layout.chain_strength;
    for ch in &layout.chains {
        model.add_offset(c);
        model.add_coupling(ch.a, ch.b, -c);
    }
    model.gap_reference = layout
        .penalties
        .iter()
        .map(|p| p.gap)
        .fold(f64::INFINITY, f64::min);
    model
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMethod {
    /// Substitute constants into the model, then rescale into range.
    ApiFix,
    /// Swap border tiles for library entries specialized to their constants.
    AdhocLibrary,
    /// Add `2 - 2vz` for every constant qubit.
    ExtraChain,
    /// Leave weights alone and pin constants through flux biases.
    #[default]
    FluxBias,
}

impl InitMethod {
    pub const ALL: [InitMethod; 4] = [
        InitMethod::ApiFix,
        InitMethod::AdhocLibrary,
        InitMethod::ExtraChain,
        InitMethod::FluxBias,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            InitMethod::ApiFix => "api",
            InitMethod::AdhocLibrary => "adhoc",
            InitMethod::ExtraChain => "chain",
            InitMethod::FluxBias => "flux",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "api" | "api_fix" => Ok(InitMethod::ApiFix),
            "adhoc" | "adhoc_library" => Ok(InitMethod::AdhocLibrary),
            "chain" | "extra_chain" => Ok(InitMethod::ExtraChain),
            "flux" | "flux_bias" => Ok(InitMethod::FluxBias),
            other => Err(QfaError::Usage(format!(
                "unknown method `{other}` (expected api, adhoc, chain or flux)"
            ))),
        }
    }
}

/// How extra chaining pins a qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainVariant {
    /// Add `2 - 2vz` directly on the qubit.
    #[default]
    Bias,
    /// Chain the qubit to an unused neighbour `z'` and substitute `z' = v`.
    Neighbour,
}

/// A multiplier model with a target and its constants applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub layout: MultiplierLayout,
    pub model: IsingModel,
    pub target: u64,
    pub method: InitMethod,
    /// per tile, the variables held constant
    pub fixings: Vec<BTreeMap<String, bool>>,
    /// `2 - 2vz` pinning terms added by extra chaining
    pub pins: BTreeMap<u32, Spin>,
    /// the equivalence chains `(z, z')` used by the neighbour variant
    pub pin_chains: Vec<(u32, u32)>,
    /// factor the weights were divided by
    pub scale: f64,
}

impl Problem {
    /// Constant qubits with their values, for methods that keep the roles on qubits.
    pub fn constant_qubits(&self) -> BTreeMap<u32, Spin> {
        let mut out = BTreeMap::new();
        if self.method == InitMethod::AdhocLibrary {
            return out;
        }
        for (i, j) in self.layout.positions() {
            let t = self.layout.tile(i, j);
            for (name, &v) in &self.fixings[i * self.layout.n + j] {
                out.insert(t.ports[name.as_str()], spin_of(v));
            }
        }
        out
    }
}

pub fn apply_problem(
    layout: &MultiplierLayout,
    model: &IsingModel,
    target: u64,
    method: InitMethod,
    library: &SpecializedLibrary,
    graph: &HardwareGraph,
) -> Result<Problem> {
    apply_problem_with(
        layout,
        model,
        target,
        method,
        library,
        graph,
        ChainVariant::Bias,
    )
}

pub fn apply_problem_with(
    layout: &MultiplierLayout,
    model: &IsingModel,
    target: u64,
    method: InitMethod,
    library: &SpecializedLibrary,
    graph: &HardwareGraph,
    variant: ChainVariant,
) -> Result<Problem> {
    let fixings = tile_fixings(layout.n, layout.m, target)?;
    let mut problem = Problem {
        layout: layout.clone(),
        model: model.clone(),
        target,
        method,
        fixings,
        pins: BTreeMap::new(),
        pin_chains: Vec::new(),
        scale: 1.0,
    };
    match method {
        InitMethod::FluxBias => {
            problem.model.flux_biases = problem.constant_qubits();
        }
        InitMethod::ApiFix => {
            let constants = problem.constant_qubits();
            fix_variables(&mut problem.model, &constants);
            let s = rescale_factor(&problem.model);
            problem.model.rescale(s);
            problem.scale = s;
        }
        InitMethod::ExtraChain => {
            let constants = problem.constant_qubits();
            let mut used = layout.used_qubits();
            for (&z, &v) in &constants {
                problem.model.add_offset(PIN_STRENGTH);
                match variant {
                    ChainVariant::Bias => {
                        problem.model.add_bias(z, -PIN_STRENGTH * v as f64);
                    }
                    ChainVariant::Neighbour => {
                        let zp = graph
                            .neighbors(z)
                            .find(|q| !used.contains(q))
                            .ok_or(QfaError::NoFreeNeighbour(z))?;
                        used.insert(zp);
                        problem.model.add_coupling(z, zp, -PIN_STRENGTH);
                        fix_variables(&mut problem.model, &BTreeMap::from([(zp, v)]));
                        problem.pin_chains.push((z, zp));
                    }
                }
                problem.pins.insert(z, v);
            }
        }
        InitMethod::AdhocLibrary => {
            for (idx, fixing) in problem.fixings.iter().enumerate() {
                if fixing.is_empty() {
                    continue;
                }
                let pf = library
                    .get(fixing)
                    .ok_or_else(|| QfaError::MissingLibraryEntry(format_fixing(fixing)))?;
                problem.layout.penalties[idx] = pf.clone();
            }
            problem.layout.role_map = role_map(&problem.layout);
            problem.model = compose(&problem.layout);
        }
    }
    Ok(problem)
}

/// Substitutes spins into the model: couplings fold into the other qubit's
/// bias, fixed biases into the offset. Substituted qubits become clamped.
pub fn fix_variables(model: &mut IsingModel, values: &BTreeMap<u32, Spin>) {
    for (&q, &v) in values {
        if let Some(h) = model.biases.remove(&q) {
            model.offset += h * v as f64;
        }
        let touching: Vec<(u32, u32)> = model
            .couplings
            .keys()
            .filter(|&&(a, b)| a == q || b == q)
            .copied()
            .collect();
        for key in touching {
            let j = model.couplings.remove(&key).unwrap();
            let other = if key.0 == q { key.1 } else { key.0 };
            if let Some(&w) = model.clamped.get(&other) {
                model.offset += j * v as f64 * w as f64;
            } else {
                model.add_bias(other, j * v as f64);
            }
        }
        model.flux_biases.remove(&q);
        model.clamped.insert(q, v);
    }
}

/// Smallest factor bringing every weight back into the hardware ranges.
pub fn rescale_factor(model: &IsingModel) -> f64 {
    let mut s: f64 = 1.0;
    for &h in model.biases.values() {
        s = s.max(h.abs() / BIAS_RANGE.1);
    }
    for &j in model.couplings.values() {
        s = s.max(-j / -COUPLING_RANGE.0).max(j / COUPLING_RANGE.1);
    }
    s
}

/// The zero-energy assignment of the circuit computing `p × q`: chain
/// qubits copy their signal and ancillas take a penalty-minimizing pattern.
pub fn ground_truth(problem: &Problem, p: u64, q: u64) -> BTreeMap<u32, Spin> {
    let layout = &problem.layout;
    let vals = simulate_circuit(layout.n, layout.m, p, q);
    let mut spins = BTreeMap::new();
    for (i, j) in layout.positions() {
        let t = layout.tile(i, j);
        let v = &vals[i * layout.n + j];
        for (r, name) in CFA_VARS.iter().enumerate() {
            spins.insert(t.ports[*name], spin_of(v[r]));
        }
        let pf = layout.penalty(i, j);
        let mut slot_spin: BTreeMap<usize, Spin> = BTreeMap::new();
        for (r, name) in CFA_VARS.iter().enumerate() {
            if let Some(&s) = pf.placement.get(*name) {
                slot_spin.insert(s, spin_of(v[r]));
            }
        }
        let best = best_ancillas(pf, &slot_spin);
        for (k, s) in best.iter().enumerate() {
            let slot = pf.placement[&format!("a{k}")];
            spins.insert(t.qubits[slot], *s);
        }
    }
    for l in &layout.links {
        let src = spins[&l.path[0]];
        for &r in &l.path {
            spins.insert(r, src);
        }
    }
    for &(z, zp) in &problem.pin_chains {
        spins.insert(zp, spins[&z]);
    }
    spins
}

/// Ancilla spins minimizing `pf` given the other slots; ties go to the
/// lowest pattern index.
pub fn best_ancillas(pf: &PenaltyFunction, fixed: &BTreeMap<usize, Spin>) -> Vec<Spin> {
    let k = pf.num_ancillas;
    let slots: Vec<usize> = (0..k).map(|i| pf.placement[&format!("a{i}")]).collect();
    let mut best = (f64::INFINITY, 0usize);
    for bits in 0..1usize << k {
        let e = pf.energy(|s| match slots.iter().position(|&x| x == s) {
            Some(i) => spin_of(bits >> i & 1 == 1),
            None => fixed.get(&s).copied().unwrap_or(-1),
        });
        if e < best.0 {
            best = (e, bits);
        }
    }
    (0..k).map(|i| spin_of(best.1 >> i & 1 == 1)).collect()
}

/// JSON model file; floats round-trip exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub n: usize,
    pub m: usize,
    pub c: f64,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub target: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<InitMethod>,
    pub offset: f64,
    #[serde(with = "keyed")]
    pub biases: BTreeMap<u32, f64>,
    #[serde(with = "keyed_pair")]
    pub couplings: BTreeMap<(u32, u32), f64>,
    #[serde(with = "keyed")]
    pub clamped: BTreeMap<u32, Spin>,
    #[serde(with = "keyed")]
    pub flux_biases: BTreeMap<u32, Spin>,
    pub role_map: BTreeMap<String, u32>,
    pub chains: Vec<Chain>,
    pub gap_reference: f64,
}

impl ModelFile {
    pub fn new(layout: &MultiplierLayout, model: &IsingModel) -> Self {
        Self {
            n: layout.n,
            m: layout.m,
            c: layout.chain_strength,
            target: None,
            method: None,
            offset: model.offset,
            biases: model.biases.clone(),
            couplings: model.couplings.clone(),
            clamped: model.clamped.clone(),
            flux_biases: model.flux_biases.clone(),
            role_map: layout.role_map.clone(),
            chains: layout.chains.clone(),
            gap_reference: model.gap_reference,
        }
    }

    pub fn from_problem(problem: &Problem) -> Self {
        Self {
            target: Some(problem.target),
            method: Some(problem.method),
            ..Self::new(&problem.layout, &problem.model)
        }
    }

    pub fn model(&self) -> IsingModel {
        IsingModel {
            offset: self.offset,
            biases: self.biases.clone(),
            couplings: self.couplings.clone(),
            clamped: self.clamped.clone(),
            flux_biases: self.flux_biases.clone(),
            gap_reference: self.gap_reference,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_spins_of_42() {
        let s = binary_spins(42, 8).unwrap();
        assert_eq!(spins_msb_first(&s), vec![-1, -1, 1, -1, 1, -1, 1, -1]);
        assert_eq!(binary_spins(0, 4).unwrap(), vec![-1; 4]);
        assert!(matches!(
            binary_spins(16, 4),
            Err(QfaError::Overflow {
                value: 16,
                width: 4
            })
        ));
    }

    #[test]
    fn circuit_multiplies() {
        for (n, m) in [(1, 1), (1, 3), (3, 1), (2, 3), (3, 3), (4, 2)] {
            for p in 0..1u64 << n {
                for q in 0..1u64 << m {
                    let vals = simulate_circuit(n, m, p, q);
                    assert_eq!(circuit_product(n, m, &vals), p * q, "{n}x{m} {p}*{q}");
                }
            }
        }
    }

    #[test]
    fn output_roles_cover_each_bit_once() {
        let (n, m) = (4, 3);
        let mut seen = BTreeSet::new();
        for k in 0..n + m {
            assert!(seen.insert(output_role(n, m, k).unwrap()));
        }
        assert_eq!(output_role(n, m, n + m), None);
    }

    #[test]
    fn constants_reject_wide_targets() {
        assert!(matches!(
            problem_constants(2, 2, 16),
            Err(QfaError::NotRepresentable { .. })
        ));
        // 2 in2 + 2 c_in + 4 outputs
        assert_eq!(problem_constants(2, 2, 9).unwrap().len(), 8);
    }

    #[test]
    fn fix_variables_folds_terms() {
        let mut m = IsingModel::default();
        m.add_bias(1, 0.5);
        m.add_coupling(1, 2, -1.0);
        m.add_bias(2, 0.25);
        let before = |z2: Spin| {
            m.energy_with(|q| Some(if q == 1 { -1 } else { z2 }))
                .unwrap()
        };
        let (e_up, e_down) = (before(1), before(-1));
        let mut f = m.clone();
        fix_variables(&mut f, &BTreeMap::from([(1, -1)]));
        assert_eq!(f.clamped[&1], -1);
        assert!(f.couplings.is_empty());
        assert_eq!(f.biases[&2], 1.25);
        assert_eq!(f.energy_with(|_| Some(1)).unwrap(), e_up);
        assert_eq!(f.energy_with(|_| Some(-1)).unwrap(), e_down);
    }

    #[test]
    fn rescale_factor_reads_each_range() {
        let mut m = IsingModel::default();
        m.add_bias(0, 6.0);
        assert_eq!(rescale_factor(&m), 1.5);
        m.add_coupling(0, 1, -5.0);
        assert_eq!(rescale_factor(&m), 2.5);
        m.add_coupling(1, 2, 3.0);
        assert_eq!(rescale_factor(&m), 3.0);
        assert_eq!(rescale_factor(&IsingModel::default()), 1.0);
    }

    #[test]
    fn method_names_parse() {
        for m in InitMethod::ALL {
            assert_eq!(InitMethod::parse(m.short_name()).unwrap(), m);
        }
        assert!(InitMethod::parse("qpu").is_err());
    }
}
