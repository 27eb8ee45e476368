//! Decoding samples and counting broken chains and excited CFAs.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ising::{spin_of, Spin};
use crate::multiplier::{output_role, Problem, M, Q};
use crate::penalty::{cfa_spec, BooleanSpec, CFA_VARS, GAP_TOL, RESIDUAL_TOL};
use crate::sampler::{SampleSet, ENERGY_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorCandidate {
    pub p: u64,
    pub q: u64,
    pub energy: f64,
    /// every tile's variables satisfy the CFA
    pub circuit_consistent: bool,
    /// some tile satisfies the CFA with `0 < P < gap`
    pub ancilla_slack: bool,
}

impl FactorCandidate {
    pub fn factors(&self, target: u64) -> bool {
        self.p.checked_mul(self.q) == Some(target)
    }
}

/// State of one tile in one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TileState {
    /// CFA variables in `CFA_VARS` order
    pub values: [bool; 6],
    pub satisfied: bool,
    /// local penalty in model units
    pub penalty: f64,
    /// gap in model units
    pub gap: f64,
}

impl TileState {
    pub fn excited(&self) -> bool {
        self.penalty >= self.gap - GAP_TOL
    }

    pub fn slack(&self) -> bool {
        self.penalty > RESIDUAL_TOL && !self.excited()
    }
}

/// Looks spins up in a full assignment.
pub type Spins = BTreeMap<u32, Spin>;

fn spin(spins: &Spins, q: u32) -> Spin {
    *spins
        .get(&q)
        .unwrap_or_else(|| panic!("sample does not assign qubit {q}"))
}

/// Per-tile states, row-major.
pub fn tile_states(problem: &Problem, spins: &Spins) -> Vec<TileState> {
    let spec: BooleanSpec = cfa_spec();
    let layout = &problem.layout;
    layout
        .positions()
        .map(|(i, j)| {
            let idx = i * layout.n + j;
            let t = layout.tile(i, j);
            let pf = layout.penalty(i, j);
            let fixing = &problem.fixings[idx];
            let mut values = [false; 6];
            for (r, name) in CFA_VARS.iter().enumerate() {
                values[r] = match pf.placement.get(*name) {
                    Some(&s) => spin(spins, t.qubits[s]) > 0,
                    None => fixing[*name],
                };
            }
            let penalty = pf.energy(|s| spin(spins, t.qubits[s])) / problem.scale;
            TileState {
                values,
                satisfied: spec.predicate(&values),
                penalty,
                gap: pf.gap / problem.scale,
            }
        })
        .collect()
}

/// Whether each logical link has a disagreeing coupler.
pub fn broken_links(problem: &Problem, spins: &Spins) -> Vec<bool> {
    problem
        .layout
        .links
        .iter()
        .map(|l| {
            l.path
                .windows(2)
                .any(|w| spin(spins, w[0]) != spin(spins, w[1]))
        })
        .collect()
}

/// Energy split into tile, chain and pinning contributions, in model units.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub tiles: Vec<f64>,
    pub chains: Vec<f64>,
    pub pins: f64,
}

impl Decomposition {
    pub fn total(&self) -> f64 {
        self.tiles.iter().sum::<f64>() + self.chains.iter().sum::<f64>() + self.pins
    }
}

pub fn decompose(problem: &Problem, spins: &Spins) -> Decomposition {
    let s = problem.scale;
    let c = problem.layout.chain_strength;
    let tiles = tile_states(problem, spins)
        .iter()
        .map(|t| t.penalty)
        .collect();
    let chains = problem
        .layout
        .chains
        .iter()
        .map(|ch| (c - c * (spin(spins, ch.a) * spin(spins, ch.b)) as f64) / s)
        .collect();
    let pins = problem
        .pins
        .iter()
        .map(|(&q, &v)| 2.0 - 2.0 * (v * spin(spins, q)) as f64)
        .sum::<f64>()
        / s;
    Decomposition {
        tiles,
        chains,
        pins,
    }
}

/// Reads factors off the `m_j` and `q_i` qubits, LSB first.
pub fn decode(problem: &Problem, spins: &Spins, energy: f64) -> FactorCandidate {
    let layout = &problem.layout;
    let bits = |name: &str, width: usize| -> u64 {
        (0..width)
            .map(|k| ((spin(spins, layout.role_map[&format!("{name}_{k}")]) > 0) as u64) << k)
            .sum()
    };
    let states = tile_states(problem, spins);
    FactorCandidate {
        p: bits("m", layout.n),
        q: bits("q", layout.m),
        energy,
        circuit_consistent: states.iter().all(|t| t.satisfied),
        ancilla_slack: states.iter().any(|t| t.satisfied && t.slack()),
    }
}

/// Product encoded by the sum and carry outputs of a sample.
pub fn decoded_product(problem: &Problem, spins: &Spins) -> u64 {
    let layout = &problem.layout;
    let states = tile_states(problem, spins);
    (0..layout.num_outputs())
        .map(|k| {
            let (i, j, r) = output_role(layout.n, layout.m, k).unwrap();
            (states[i * layout.n + j].values[r] as u64) << k
        })
        .sum()
}

/// Flags of one distinct sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFlags {
    pub energy: f64,
    pub occurrences: usize,
    pub broken_chains: usize,
    pub excited_cfas: usize,
    pub slack_tiles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationReport {
    /// broken reads per link label
    pub per_chain: BTreeMap<String, usize>,
    /// excited reads per tile, keyed `(col, row)`
    #[serde(with = "crate::ising::keyed_pair")]
    pub per_cfa: BTreeMap<(usize, usize), usize>,
    pub num_reads: usize,
    pub per_sample: Vec<SampleFlags>,
}

impl ExcitationReport {
    pub fn ground_reads(&self) -> usize {
        self.count(|f| f.energy.abs() <= ENERGY_TOL)
    }

    pub fn no_broken_reads(&self) -> usize {
        self.count(|f| f.broken_chains == 0)
    }

    pub fn no_excited_reads(&self) -> usize {
        self.count(|f| f.excited_cfas == 0)
    }

    pub fn broken_reads(&self) -> usize {
        self.num_reads - self.no_broken_reads()
    }

    fn count(&self, pred: impl Fn(&SampleFlags) -> bool) -> usize {
        self.per_sample
            .iter()
            .filter(|f| pred(f))
            .map(|f| f.occurrences)
            .sum()
    }

    /// Most excited tile as `((col, row), count)`; ties go to the smallest `(col, row)`.
    pub fn most_excited(&self) -> Option<((usize, usize), usize)> {
        self.per_cfa.iter().fold(
            None,
            |best: Option<((usize, usize), usize)>, (&k, &v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((k, v)),
            },
        )
    }

    /// Rows `kind,col,row,count`; chain counts sum over the links leaving a tile.
    pub fn write_csv<W: Write>(&self, problem: &Problem, w: W) -> Result<()> {
        let mut by_tile: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for l in &problem.layout.links {
            *by_tile.entry((l.from.1, l.from.0)).or_insert(0) += self.per_chain[&l.label()];
        }
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["kind", "col", "row", "count"])?;
        for ((col, row), n) in by_tile {
            wr.write_record([
                "chain".to_string(),
                col.to_string(),
                row.to_string(),
                n.to_string(),
            ])?;
        }
        for (&(col, row), &n) in &self.per_cfa {
            wr.write_record([
                "cfa".to_string(),
                col.to_string(),
                row.to_string(),
                n.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn excitation_stats(problem: &Problem, samples: &SampleSet) -> ExcitationReport {
    let layout = &problem.layout;
    let mut per_chain: BTreeMap<String, usize> =
        layout.links.iter().map(|l| (l.label(), 0)).collect();
    let mut per_cfa: BTreeMap<(usize, usize), usize> =
        layout.positions().map(|(i, j)| ((j, i), 0)).collect();
    let mut per_sample = Vec::with_capacity(samples.samples.len());
    for (idx, s) in samples.samples.iter().enumerate() {
        let spins = samples.assignment(&problem.model, idx);
        let broken = broken_links(problem, &spins);
        for (l, &b) in layout.links.iter().zip(&broken) {
            if b {
                *per_chain.get_mut(&l.label()).unwrap() += s.occurrences;
            }
        }
        let states = tile_states(problem, &spins);
        for ((i, j), st) in layout.positions().zip(&states) {
            if st.excited() {
                *per_cfa.get_mut(&(j, i)).unwrap() += s.occurrences;
            }
        }
        per_sample.push(SampleFlags {
            energy: s.energy,
            occurrences: s.occurrences,
            broken_chains: broken.iter().filter(|&&b| b).count(),
            excited_cfas: states.iter().filter(|t| t.excited()).count(),
            slack_tiles: states.iter().filter(|t| t.slack()).count(),
        });
    }
    ExcitationReport {
        per_chain,
        per_cfa,
        num_reads: samples.num_reads,
        per_sample,
    }
}

/// Decodes every distinct sample.
pub fn decode_all(problem: &Problem, samples: &SampleSet) -> Vec<(FactorCandidate, usize)> {
    samples
        .samples
        .iter()
        .enumerate()
        .map(|(idx, s)| {
            let spins = samples.assignment(&problem.model, idx);
            (decode(problem, &spins, s.energy), s.occurrences)
        })
        .collect()
}

/// Spins of `p` on the `m_j` qubits and `q` on the `q_i` qubits only.
pub fn factor_spins(problem: &Problem, p: u64, q: u64) -> Spins {
    let layout = &problem.layout;
    let mut out = Spins::new();
    for j in 0..layout.n {
        out.insert(
            layout.tile(0, j).ports[CFA_VARS[M]],
            spin_of(p >> j & 1 == 1),
        );
    }
    for i in 0..layout.m {
        out.insert(
            layout.tile(i, 0).ports[CFA_VARS[Q]],
            spin_of(q >> i & 1 == 1),
        );
    }
    out
}
