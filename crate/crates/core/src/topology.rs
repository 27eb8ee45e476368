//! Pegasus hardware graph and the tile grid used to lay out multiplier cells.
//!
//! Qubits follow the public Pegasus coordinate scheme `(u, w, k, z)`. Each
//! qubit is a segment on a plane: a vertical qubit (`u = 0`) sits at column
//! `x = 12w + k` and spans rows `12z + OFF0[k] ..= 12z + OFF0[k] + 11`, a
//! horizontal qubit mirrors that with `OFF1`. Internal couplers join crossing
//! segments, odd couplers join `k = 2j, 2j+1` twins and external couplers
//! join consecutive `z` segments on the same line.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{QfaError, Result};
use crate::ising::IsingModel;

pub const BIAS_RANGE: (f64, f64) = (-4.0, 4.0);
pub const COUPLING_RANGE: (f64, f64) = (-2.0, 1.0);

const OFF0: [i64; 12] = [2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6];
const OFF1: [i64; 12] = [6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PegasusCoord {
    pub u: u8,
    pub w: u16,
    pub k: u8,
    pub z: u16,
}

impl PegasusCoord {
    pub fn to_linear(self, m: usize) -> u32 {
        let m = m as u32;
        ((self.u as u32 * m + self.w as u32) * 12 + self.k as u32) * (m - 1) + self.z as u32
    }

    pub fn from_linear(id: u32, m: usize) -> Option<Self> {
        let m32 = m as u32;
        if m < 2 || id >= 24 * m32 * (m32 - 1) {
            return None;
        }
        let z = id % (m32 - 1);
        let r = id / (m32 - 1);
        let k = r % 12;
        let r = r / 12;
        let w = r % m32;
        let u = r / m32;
        Some(Self {
            u: u as u8,
            w: w as u16,
            k: k as u8,
            z: z as u16,
        })
    }

    fn segment(self) -> Segment {
        let line = 12 * self.w as i64 + self.k as i64;
        let off = if self.u == 0 { OFF0 } else { OFF1 }[self.k as usize];
        Segment {
            vertical: self.u == 0,
            line,
            start: 12 * self.z as i64 + off,
        }
    }
}

/// A qubit drawn on the plane; `line` is its fixed coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Segment {
    vertical: bool,
    line: i64,
    start: i64,
}

impl Segment {
    fn to_coord(self, m: usize) -> Option<PegasusCoord> {
        if self.line < 0 {
            return None;
        }
        let (w, k) = (self.line / 12, self.line % 12);
        let off = if self.vertical { OFF0 } else { OFF1 }[k as usize];
        let rel = self.start - off;
        if rel < 0 || rel % 12 != 0 {
            return None;
        }
        let z = rel / 12;
        if w >= m as i64 || z >= m as i64 - 1 {
            return None;
        }
        Some(PegasusCoord {
            u: if self.vertical { 0 } else { 1 },
            w: w as u16,
            k: k as u8,
            z: z as u16,
        })
    }
}

/// Undirected hardware graph with sorted adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardwareGraph {
    /// Pegasus size parameter, when the graph was generated as `P_m`.
    pub m: Option<usize>,
    adjacency: BTreeMap<u32, BTreeSet<u32>>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    m: Option<usize>,
    nodes: Vec<u32>,
    edges: Vec<(u32, u32)>,
}

impl HardwareGraph {
    pub fn from_edges(
        m: Option<usize>,
        nodes: impl IntoIterator<Item = u32>,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Self {
        let mut adjacency: BTreeMap<u32, BTreeSet<u32>> =
            nodes.into_iter().map(|n| (n, BTreeSet::new())).collect();
        for (a, b) in edges {
            if a == b {
                continue;
            }
            adjacency.entry(a).or_default().insert(b);
            adjacency.entry(b).or_default().insert(a);
        }
        Self { m, adjacency }
    }

    pub fn contains(&self, q: u32) -> bool {
        self.adjacency.contains_key(&q)
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.adjacency.get(&a).is_some_and(|n| n.contains(&b))
    }

    pub fn neighbors(&self, q: u32) -> impl Iterator<Item = u32> + '_ {
        self.adjacency.get(&q).into_iter().flatten().copied()
    }

    pub fn degree(&self, q: u32) -> usize {
        self.adjacency.get(&q).map_or(0, BTreeSet::len)
    }

    pub fn nodes(&self) -> impl Iterator<Item = u32> + '_ {
        self.adjacency.keys().copied()
    }

    /// Edges as `(a, b)` with `a < b`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adjacency
            .iter()
            .flat_map(|(&a, n)| n.range(a + 1..).map(move |&b| (a, b)))
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            m: self.m,
            nodes: self.nodes().collect(),
            edges: self.edges().collect(),
        };
        serde_json::to_string(&file).expect("graph serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: GraphFile = serde_json::from_str(s)?;
        Ok(Self::from_edges(f.m, f.nodes, f.edges))
    }

    fn pegasus_size(&self) -> Result<usize> {
        self.m
            .ok_or_else(|| QfaError::Usage("tile placement needs a Pegasus graph".into()))
    }

    /// Shortest path from `from` to `to` whose interior avoids `blocked`,
    /// with at most `max_edges` edges. Ties resolve toward smaller ids.
    pub fn route(
        &self,
        from: u32,
        to: u32,
        blocked: &BTreeSet<u32>,
        max_edges: usize,
    ) -> Option<Vec<u32>> {
        let mut prev: BTreeMap<u32, u32> = BTreeMap::new();
        let mut frontier = vec![from];
        for _ in 0..max_edges {
            let mut next = Vec::new();
            for &u in &frontier {
                for v in self.neighbors(u) {
                    if v == to {
                        let mut path = vec![to, u];
                        while let Some(&p) = prev.get(path.last().unwrap()) {
                            path.push(p);
                        }
                        path.reverse();
                        return Some(path);
                    }
                    if v == from || prev.contains_key(&v) || blocked.contains(&v) {
                        continue;
                    }
                    prev.insert(v, u);
                    next.push(v);
                }
            }
            frontier = next;
        }
        None
    }
}

/// Builds the full Pegasus graph `P_m` with `24m(m-1)` qubits.
pub fn build_pegasus(m: usize) -> Result<HardwareGraph> {
    if m < 2 {
        return Err(QfaError::InvalidSize(m));
    }
    let n = 24 * m * (m - 1);
    let mut edges = Vec::new();
    for id in 0..n as u32 {
        let c = PegasusCoord::from_linear(id, m).expect("id in range");
        // odd coupler
        if c.k.is_multiple_of(2) {
            edges.push((id, PegasusCoord { k: c.k + 1, ..c }.to_linear(m)));
        }
        // external coupler
        if (c.z as usize) + 1 < m - 1 {
            edges.push((id, PegasusCoord { z: c.z + 1, ..c }.to_linear(m)));
        }
        // internal couplers, enumerated from the vertical side
        if c.u == 0 {
            let s = c.segment();
            for y in s.start..s.start + 12 {
                let (hw, hk) = (y / 12, y % 12);
                if hw >= m as i64 {
                    continue;
                }
                let off = OFF1[hk as usize];
                // horizontal segments on line y that contain column s.line
                let rel = s.line - off;
                if rel < 0 {
                    continue;
                }
                let hz = rel / 12;
                if hz < m as i64 - 1 {
                    let h = PegasusCoord {
                        u: 1,
                        w: hw as u16,
                        k: hk as u8,
                        z: hz as u16,
                    };
                    edges.push((id, h.to_linear(m)));
                }
            }
        }
    }
    Ok(HardwareGraph::from_edges(Some(m), 0..n as u32, edges))
}

/// One CFA cell on hardware.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileAssignment {
    pub row: usize,
    pub col: usize,
    /// The tile's qubits in slot order.
    pub qubits: Vec<u32>,
    /// Hardware couplers with both ends in the tile.
    pub internal_couplers: Vec<(u32, u32)>,
    /// Role name -> qubit.
    pub ports: BTreeMap<String, u32>,
}

impl TileAssignment {
    pub fn slot_of_qubit(&self, q: u32) -> Option<usize> {
        self.qubits.iter().position(|&x| x == q)
    }

    pub fn slot_of_role(&self, role: &str) -> Option<usize> {
        self.ports.get(role).and_then(|&q| self.slot_of_qubit(q))
    }

    /// Internal couplers as ascending slot pairs.
    pub fn local_couplers(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .internal_couplers
            .iter()
            .filter_map(|&(a, b)| {
                let (x, y) = (self.slot_of_qubit(a)?, self.slot_of_qubit(b)?);
                Some((x.min(y), x.max(y)))
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Slot of each CFA role inside a tile. Slots 0..4 are the tile's vertical
/// qubits and 4..8 its horizontal ones; `{0,1}`, `{2,3}`, `{4,5}` and `{6,7}`
/// are odd-coupled pairs. Slots 3 and 7 are left for ancillas.
pub const TILE_ROLES: [(&str, usize); 6] = [
    ("m", 0),
    ("q", 1),
    ("in2", 4),
    ("c_in", 6),
    ("out", 5),
    ("c_out", 2),
];

/// The qubits of the 4×4 window whose vertical lines are `x0..x0+4` and
/// horizontal lines `y0..y0+4`, in slot order, when every line has one
/// segment crossing the whole window.
fn window(x0: i64, y0: i64, m: usize) -> Option<[u32; 8]> {
    let mut out = [0u32; 8];
    for i in 0..4 {
        out[i as usize] = covering(true, x0 + i, y0, m)?;
        out[4 + i as usize] = covering(false, y0 + i, x0, m)?;
    }
    Some(out)
}

/// The segment on `line` that covers `at..at+4`.
fn covering(vertical: bool, line: i64, at: i64, m: usize) -> Option<u32> {
    if line < 0 || at < 0 {
        return None;
    }
    let off = if vertical { OFF0 } else { OFF1 }[(line % 12) as usize];
    let start = at - (at - off).rem_euclid(12);
    if start + 11 < at + 3 {
        return None;
    }
    let seg = Segment {
        vertical,
        line,
        start,
    };
    seg.to_coord(m).map(|c| c.to_linear(m))
}

/// Windows at positions `(2, 2) + L` share one internal graph, where `L` is
/// the translation lattice generated by `(12, 0)` and `(4, -4)`.
fn on_lattice(x0: i64, y0: i64) -> bool {
    let (dx, dy) = (x0 - 2, y0 - 2);
    dx.rem_euclid(4) == 0 && (dx + dy).rem_euclid(12) == 0
}

/// How logical grid steps map onto the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layout {
    /// Half the lattice sites; the free sites in between carry routed chains.
    Sparse,
    /// Every lattice site; neighbouring tiles touch but leave no spare qubits.
    Dense,
}

impl Layout {
    /// Plane displacement of one column step and one row step.
    fn steps(self) -> ((i64, i64), (i64, i64)) {
        match self {
            Layout::Sparse => ((8, 4), (0, 12)),
            Layout::Dense => ((4, -4), (8, 4)),
        }
    }
}

const LAYOUTS: [Layout; 2] = [Layout::Sparse, Layout::Dense];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileGrid {
    pub rows: usize,
    pub cols: usize,
    pub layout: Layout,
    /// Row-major tiles.
    pub tiles: Vec<TileAssignment>,
}

impl TileGrid {
    pub fn tile(&self, row: usize, col: usize) -> &TileAssignment {
        &self.tiles[row * self.cols + col]
    }

    /// All qubits held by tiles.
    pub fn qubits(&self) -> BTreeSet<u32> {
        self.tiles
            .iter()
            .flat_map(|t| t.qubits.iter().copied())
            .collect()
    }
}

/// Lattice sites whose window fits in `P_m`, ascending by `(y, x)`.
fn lattice_sites(m: usize) -> BTreeMap<(i64, i64), [u32; 8]> {
    let size = 12 * m as i64;
    let mut sites = BTreeMap::new();
    for y in 0..size {
        for x in 0..size {
            if on_lattice(x, y) {
                if let Some(w) = window(x, y, m) {
                    sites.insert((y, x), w);
                }
            }
        }
    }
    sites
}

fn find_origin(
    sites: &BTreeMap<(i64, i64), [u32; 8]>,
    layout: Layout,
    rows: usize,
    cols: usize,
) -> Option<(i64, i64)> {
    let ((ax, ay), (bx, by)) = layout.steps();
    sites.keys().copied().find(|&(y0, x0)| {
        (0..rows as i64).all(|i| {
            (0..cols as i64)
                .all(|j| sites.contains_key(&(y0 + j * ay + i * by, x0 + j * ax + i * bx)))
        })
    })
}

fn make_tile(graph: &HardwareGraph, row: usize, col: usize, qubits: [u32; 8]) -> TileAssignment {
    let mut internal_couplers = Vec::new();
    for i in 0..8 {
        for j in i + 1..8 {
            if graph.has_edge(qubits[i], qubits[j]) {
                internal_couplers.push((qubits[i].min(qubits[j]), qubits[i].max(qubits[j])));
            }
        }
    }
    internal_couplers.sort_unstable();
    let ports = TILE_ROLES
        .iter()
        .map(|&(r, s)| (r.to_string(), qubits[s]))
        .collect();
    TileAssignment {
        row,
        col,
        qubits: qubits.to_vec(),
        internal_couplers,
        ports,
    }
}

/// Places a `rows × cols` grid of tiles on a Pegasus graph.
///
/// The sparse layout is preferred; the dense one is used when only it fits.
/// Among origins the first in `(y, x)` order wins, so output is a pure
/// function of the inputs.
pub fn place_tiles(graph: &HardwareGraph, rows: usize, cols: usize) -> Result<TileGrid> {
    let m = graph.pegasus_size()?;
    if rows == 0 || cols == 0 {
        return Err(QfaError::Usage(
            "tile grid needs at least one row and column".into(),
        ));
    }
    let sites = lattice_sites(m);
    for layout in LAYOUTS {
        if let Some((y0, x0)) = find_origin(&sites, layout, rows, cols) {
            let ((ax, ay), (bx, by)) = layout.steps();
            let mut tiles = Vec::with_capacity(rows * cols);
            for i in 0..rows {
                for j in 0..cols {
                    let key = (
                        y0 + j as i64 * ay + i as i64 * by,
                        x0 + j as i64 * ax + i as i64 * bx,
                    );
                    tiles.push(make_tile(graph, i, j, sites[&key]));
                }
            }
            return Ok(TileGrid {
                rows,
                cols,
                layout,
                tiles,
            });
        }
    }
    let fits = |r: usize, c: usize| {
        LAYOUTS
            .iter()
            .any(|&l| find_origin(&sites, l, r, c).is_some())
    };
    let max_rows = (0..rows)
        .rev()
        .find(|&r| r == 0 || fits(r, cols))
        .unwrap_or(0);
    let max_cols = (0..cols)
        .rev()
        .find(|&c| c == 0 || fits(rows, c))
        .unwrap_or(0);
    Err(QfaError::Capacity {
        rows,
        cols,
        max_rows,
        max_cols,
    })
}

/// Checks the structural tile-grid invariants against `graph`.
pub fn check_grid(graph: &HardwareGraph, grid: &TileGrid) -> std::result::Result<(), String> {
    let mut seen = BTreeSet::new();
    for t in &grid.tiles {
        if t.qubits.len() != 8 {
            return Err(format!(
                "tile ({},{}) has {} qubits",
                t.row,
                t.col,
                t.qubits.len()
            ));
        }
        for &q in &t.qubits {
            if !graph.contains(q) {
                return Err(format!("tile ({},{}) uses missing qubit {q}", t.row, t.col));
            }
            if !seen.insert(q) {
                return Err(format!("qubit {q} appears in two tiles"));
            }
        }
        for &(a, b) in &t.internal_couplers {
            if !graph.has_edge(a, b) {
                return Err(format!(
                    "tile ({},{}) lists absent coupler {a}-{b}",
                    t.row, t.col
                ));
            }
        }
    }
    let touching = |a: &TileAssignment, b: &TileAssignment| {
        a.ports
            .values()
            .any(|&p| b.ports.values().any(|&q| graph.has_edge(p, q)))
    };
    for i in 0..grid.rows {
        for j in 0..grid.cols {
            let t = grid.tile(i, j);
            if j + 1 < grid.cols && !touching(t, grid.tile(i, j + 1)) {
                return Err(format!(
                    "tiles ({i},{j}) and ({i},{}) share no port edge",
                    j + 1
                ));
            }
            if i + 1 < grid.rows && !touching(t, grid.tile(i + 1, j)) {
                return Err(format!(
                    "tiles ({i},{j}) and ({},{j}) share no port edge",
                    i + 1
                ));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    MissingQubit(u32),
    MissingEdge(u32, u32),
    BiasOutOfRange { qubit: u32, value: f64 },
    CouplingOutOfRange { a: u32, b: u32, value: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

const RANGE_TOL: f64 = 1e-9;

/// Lists every way `model` fails to run on `graph`.
pub fn validate_model(graph: &HardwareGraph, model: &IsingModel) -> ValidationReport {
    let mut violations = Vec::new();
    for q in model.qubits() {
        if !graph.contains(q) {
            violations.push(Violation::MissingQubit(q));
        }
    }
    for (&q, &value) in &model.biases {
        if value < BIAS_RANGE.0 - RANGE_TOL || value > BIAS_RANGE.1 + RANGE_TOL {
            violations.push(Violation::BiasOutOfRange { qubit: q, value });
        }
    }
    for (&(a, b), &value) in &model.couplings {
        if !graph.has_edge(a, b) {
            violations.push(Violation::MissingEdge(a, b));
        }
        if value < COUPLING_RANGE.0 - RANGE_TOL || value > COUPLING_RANGE.1 + RANGE_TOL {
            violations.push(Violation::CouplingOutOfRange { a, b, value });
        }
    }
    ValidationReport { violations }
}
