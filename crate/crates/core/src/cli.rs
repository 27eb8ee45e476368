//! Experiment driver behind the `qfa` binary.
//!
//! Settings come from defaults, then an optional JSON config file, then
//! command-line flags, then the `QFA_SEED` environment variable. The resolved
//! settings are written next to every output as `run.json`, which can be fed
//! back through `--config` to reproduce the run.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{decode_all, excitation_stats, FactorCandidate};
use crate::error::{QfaError, Result};
use crate::multiplier::{
    apply_problem_with, build_multiplier, ChainVariant, InitMethod, ModelFile, Problem,
};
use crate::penalty::{
    build_specialized_library, cfa_spec, synthesize_penalty, verify_penalty, SpecializedLibrary,
};
use crate::remedy::{default_threshold, iteration_seed, remedy_loop, DEFAULT_DELTA};
use crate::sampler::{sample_sa, AnnealConfig};
use crate::topology::{build_pegasus, place_tiles, HardwareGraph};

#[derive(Debug, Parser)]
#[command(
    name = "qfa",
    version,
    about = "Factor integers with annealed CFA multipliers"
)]
pub struct Cli {
    /// JSON file with settings; flags given on the command line win
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize and verify the specialized CFA library
    Synth(Overrides),
    /// Factor one integer and report the zero-energy reads
    Factor(Overrides),
    /// Compare chain strengths over a set of biprimes per size
    Sweep(Overrides),
    /// Run the anneal-offset remedy loop on one integer
    Remedy(Overrides),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Factor(_) => "factor",
            Command::Sweep(_) => "sweep",
            Command::Remedy(_) => "remedy",
        }
    }

    fn overrides(&self) -> &Overrides {
        match self {
            Command::Synth(o) | Command::Factor(o) | Command::Sweep(o) | Command::Remedy(o) => o,
        }
    }
}

/// Optional settings shared by flags and config files.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    /// multiplicand width in bits
    #[arg(long)]
    pub n: Option<usize>,
    /// multiplier width in bits
    #[arg(long)]
    pub m: Option<usize>,
    /// integer to factor
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub target: Option<u64>,
    /// initialization: api, adhoc, chain or flux
    #[arg(long)]
    pub method: Option<String>,
    /// extra chaining variant: bias or neighbour
    #[arg(long)]
    pub chain_variant: Option<String>,
    /// chain strength c, in (0, 2]
    #[arg(long)]
    pub chain_strength: Option<f64>,
    /// annealing reads
    #[arg(long)]
    pub reads: Option<usize>,
    /// sweeps per read
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// master seed; QFA_SEED overrides it
    #[arg(long)]
    pub seed: Option<u64>,
    /// pinning field strength for the flux method
    #[arg(long)]
    pub flux_strength: Option<f64>,
    /// remedy offset step
    #[arg(long)]
    pub delta: Option<f64>,
    /// remedy step budget; defaults to 2(n+m)
    #[arg(long)]
    pub threshold: Option<usize>,
    /// output file (synth) or directory (other commands)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// precomputed library JSON
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// sweep sizes as `NxM` list, e.g. `3x3,4x4`
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<String>>,
    /// sweep chain strengths
    #[arg(long, value_delimiter = ',')]
    pub c_list: Option<Vec<f64>>,
    /// biprimes per sweep size
    #[arg(long)]
    pub instances: Option<usize>,
    /// biprime selection: fixed (largest prime times the next ones) or all
    #[arg(long)]
    pub mode: Option<String>,
    /// Pegasus size parameter
    #[arg(long)]
    pub pegasus: Option<usize>,
}

impl Overrides {
    /// Fields set in `other` replace those in `self`.
    fn merge(mut self, other: &Overrides) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f.clone(); } )* };
        }
        take!(
            n,
            m,
            target,
            method,
            chain_variant,
            chain_strength,
            reads,
            sweeps,
            seed,
            flux_strength,
            delta,
            threshold,
            out,
            library,
            sizes,
            c_list,
            instances,
            mode,
            pegasus
        );
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiprimeMode {
    /// the largest `n`-bit prime times the largest `m`-bit primes
    Fixed,
    /// every product of odd primes fitting the widths
    All,
}

/// Fully resolved settings, echoed into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub command: String,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub target: Option<u64>,
    pub method: InitMethod,
    pub chain_variant: ChainVariant,
    pub chain_strength: f64,
    pub reads: usize,
    pub sweeps: usize,
    pub seed: u64,
    pub flux_strength: f64,
    pub delta: f64,
    pub threshold: usize,
    pub out: Option<PathBuf>,
    pub library: Option<PathBuf>,
    pub sizes: Vec<(usize, usize)>,
    pub c_list: Vec<f64>,
    pub instances: usize,
    pub mode: BiprimeMode,
    pub pegasus: usize,
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let bad = || QfaError::Usage(format!("size `{s}` is not of the form NxM"));
    let (a, b) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
}

impl Settings {
    /// Resolves settings for `command` from file, flags and environment.
    pub fn resolve(
        command: &str,
        file: Option<&Overrides>,
        flags: &Overrides,
        env_seed: Option<&str>,
    ) -> Result<Self> {
        let o = file.cloned().unwrap_or_default().merge(flags);
        let n = o.n.unwrap_or(3);
        let m = o.m.unwrap_or(3);
        let method = InitMethod::parse(o.method.as_deref().unwrap_or("flux"))?;
        let chain_variant = match o.chain_variant.as_deref().unwrap_or("bias") {
            "bias" => ChainVariant::Bias,
            "neighbour" | "neighbor" => ChainVariant::Neighbour,
            other => {
                return Err(QfaError::Usage(format!(
                    "unknown chain variant `{other}` (expected bias or neighbour)"
                )))
            }
        };
        let mode = match o.mode.as_deref().unwrap_or("fixed") {
            "fixed" => BiprimeMode::Fixed,
            "all" => BiprimeMode::All,
            other => {
                return Err(QfaError::Usage(format!(
                    "unknown biprime mode `{other}` (expected fixed or all)"
                )))
            }
        };
        let mut seed = o.seed.unwrap_or(0);
        if let Some(s) = env_seed {
            seed = s
                .trim()
                .parse()
                .map_err(|_| QfaError::Usage(format!("QFA_SEED `{s}` is not an integer")))?;
        }
        let sizes = match &o.sizes {
            Some(list) => list.iter().map(|s| parse_size(s)).collect::<Result<_>>()?,
            None => vec![(n, m)],
        };
        Ok(Settings {
            command: command.to_string(),
            n,
            m,
            target: o.target,
            method,
            chain_variant,
            chain_strength: o.chain_strength.unwrap_or(2.0),
            reads: o.reads.unwrap_or(1000),
            sweeps: o.sweeps.unwrap_or(AnnealConfig::default().sweeps),
            seed,
            flux_strength: o
                .flux_strength
                .unwrap_or(AnnealConfig::default().flux_strength),
            delta: o.delta.unwrap_or(DEFAULT_DELTA),
            threshold: o.threshold.unwrap_or_else(|| default_threshold(n, m)),
            out: o.out.clone(),
            library: o.library.clone(),
            sizes,
            c_list: o.c_list.clone().unwrap_or_else(|| vec![1.0, 1.5, 2.0]),
            instances: o.instances.unwrap_or(10),
            mode,
            pegasus: o.pegasus.unwrap_or(16),
        })
    }

    /// The settings as a config file that `--config` accepts.
    pub fn to_overrides(&self) -> Overrides {
        Overrides {
            n: Some(self.n),
            m: Some(self.m),
            target: self.target,
            method: Some(self.method.short_name().to_string()),
            chain_variant: Some(
                match self.chain_variant {
                    ChainVariant::Bias => "bias",
                    ChainVariant::Neighbour => "neighbour",
                }
                .to_string(),
            ),
            chain_strength: Some(self.chain_strength),
            reads: Some(self.reads),
            sweeps: Some(self.sweeps),
            seed: Some(self.seed),
            flux_strength: Some(self.flux_strength),
            delta: Some(self.delta),
            threshold: Some(self.threshold),
            out: self.out.clone(),
            library: self.library.clone(),
            sizes: Some(self.sizes.iter().map(|(a, b)| format!("{a}x{b}")).collect()),
            c_list: Some(self.c_list.clone()),
            instances: Some(self.instances),
            mode: Some(
                match self.mode {
                    BiprimeMode::Fixed => "fixed",
                    BiprimeMode::All => "all",
                }
                .to_string(),
            ),
            pegasus: Some(self.pegasus),
        }
    }

    pub fn anneal(&self, seed: u64) -> AnnealConfig {
        AnnealConfig {
            num_reads: self.reads,
            sweeps: self.sweeps,
            flux_strength: self.flux_strength,
            master_seed: seed,
            ..AnnealConfig::default()
        }
    }

    fn out_dir(&self) -> Result<&Path> {
        match self.out.as_deref() {
            Some(p) if !p.as_os_str().is_empty() => Ok(p),
            _ => Err(QfaError::Usage(format!("{} needs --out", self.command))),
        }
    }

    fn target(&self) -> Result<u64> {
        self.target
            .ok_or_else(|| QfaError::Usage(format!("{} needs --N", self.command)))
    }
}

pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= x {
        if x.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Primes below `2^width`, largest first.
pub fn primes_fitting(width: usize) -> Vec<u64> {
    (2..1u64 << width).rev().filter(|&x| is_prime(x)).collect()
}

/// Biprime instances for an `n × m` multiplier as `(N, p, q)`.
///
/// `Fixed` pairs the largest `n`-bit prime with the `count` largest `m`-bit
/// primes; `All` lists every product of odd primes fitting the widths,
/// largest first, truncated to `count`.
pub fn biprimes(n: usize, m: usize, mode: BiprimeMode, count: usize) -> Vec<(u64, u64, u64)> {
    let ps = primes_fitting(n);
    let qs = primes_fitting(m);
    let mut out: Vec<(u64, u64, u64)> = match mode {
        BiprimeMode::Fixed => match ps.first() {
            Some(&p) => qs.iter().map(|&q| (p * q, p, q)).collect(),
            None => Vec::new(),
        },
        BiprimeMode::All => {
            let mut seen = BTreeMap::new();
            for &p in ps.iter().filter(|&&p| p > 2) {
                for &q in qs.iter().filter(|&&q| q > 2) {
                    seen.entry(p * q).or_insert((p * q, p, q));
                }
            }
            seen.into_values().rev().collect()
        }
    };
    out.truncate(count);
    out
}

fn base_library(graph: &HardwareGraph) -> Result<SpecializedLibrary> {
    let grid = place_tiles(graph, 1, 1)?;
    let base = synthesize_penalty(&cfa_spec(), grid.tile(0, 0), 2)?;
    Ok(SpecializedLibrary {
        entries: vec![base],
    })
}

/// The library a run needs: loaded from disk when given, otherwise
/// synthesized (the full set only for the ad hoc method).
pub fn library_for(settings: &Settings, graph: &HardwareGraph) -> Result<SpecializedLibrary> {
    if let Some(path) = &settings.library {
        return SpecializedLibrary::from_json(&fs::read_to_string(path)?);
    }
    if settings.method == InitMethod::AdhocLibrary {
        let grid = place_tiles(graph, 1, 1)?;
        build_specialized_library(grid.tile(0, 0))
    } else {
        base_library(graph)
    }
}

/// Builds the multiplier for the settings' widths and applies `target`.
pub fn build_problem(
    settings: &Settings,
    graph: &HardwareGraph,
    library: &SpecializedLibrary,
    n: usize,
    m: usize,
    c: f64,
    target: u64,
) -> Result<Problem> {
    let (layout, model) = build_multiplier(n, m, graph, library, c)?;
    apply_problem_with(
        &layout,
        &model,
        target,
        settings.method,
        library,
        graph,
        settings.chain_variant,
    )
}

fn write_run(settings: &Settings, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("run.json"),
        serde_json::to_string_pretty(&settings.to_overrides())?,
    )?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibrarySummary {
    pub entries: usize,
    pub gaps: Vec<(String, f64)>,
}

pub fn cmd_synth(settings: &Settings) -> Result<LibrarySummary> {
    let out = settings.out_dir()?.to_path_buf();
    let graph = build_pegasus(settings.pegasus)?;
    let grid = place_tiles(&graph, 1, 1)?;
    let library = build_specialized_library(grid.tile(0, 0))?;
    let base = cfa_spec();
    for e in &library.entries {
        let lits: Vec<(&str, bool)> = e.fixing.iter().map(|(k, &v)| (k.as_str(), v)).collect();
        let spec = crate::penalty::specialize(&base, &lits)?;
        if !verify_penalty(e, &spec).satisfies_spec {
            return Err(QfaError::Infeasible(format!(
                "library entry [{}] fails verification",
                crate::penalty::format_fixing(&e.fixing)
            )));
        }
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(&out, library.to_json()?)?;
    let mut side = out.as_os_str().to_owned();
    side.push(".run.json");
    fs::write(
        side,
        serde_json::to_string_pretty(&settings.to_overrides())?,
    )?;
    Ok(LibrarySummary {
        entries: library.entries.len(),
        gaps: library
            .entries
            .iter()
            .map(|e| (crate::penalty::format_fixing(&e.fixing), e.gap))
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorReport {
    #[serde(rename = "N")]
    pub target: u64,
    pub n: usize,
    pub m: usize,
    pub method: InitMethod,
    pub reads: usize,
    /// zero-energy reads
    pub ground_reads: usize,
    /// zero-energy reads whose factors multiply to `N`
    pub success_reads: usize,
    /// distinct `(p, q)` found by successful reads
    pub factors: Vec<(u64, u64)>,
    /// successful reads where some tile sits at `0 < P < gap`
    pub slack_reads: usize,
    pub no_broken_reads: usize,
    pub no_excited_reads: usize,
}

impl FactorReport {
    pub fn found(&self) -> bool {
        self.success_reads > 0
    }
}

fn summarize(
    problem: &Problem,
    candidates: &[(FactorCandidate, usize)],
    reads: usize,
) -> FactorReport {
    let mut factors = Vec::new();
    let (mut ground, mut success, mut slack) = (0, 0, 0);
    for (c, occ) in candidates {
        if c.energy.abs() > crate::sampler::ENERGY_TOL {
            continue;
        }
        ground += occ;
        if c.factors(problem.target) {
            success += occ;
            if c.ancilla_slack {
                slack += occ;
            }
            if !factors.contains(&(c.p, c.q)) {
                factors.push((c.p, c.q));
            }
        }
    }
    factors.sort_unstable();
    FactorReport {
        target: problem.target,
        n: problem.layout.n,
        m: problem.layout.m,
        method: problem.method,
        reads,
        ground_reads: ground,
        success_reads: success,
        factors,
        slack_reads: slack,
        no_broken_reads: 0,
        no_excited_reads: 0,
    }
}

pub fn cmd_factor(settings: &Settings) -> Result<FactorReport> {
    let target = settings.target()?;
    let graph = build_pegasus(settings.pegasus)?;
    let library = library_for(settings, &graph)?;
    let problem = build_problem(
        settings,
        &graph,
        &library,
        settings.n,
        settings.m,
        settings.chain_strength,
        target,
    )?;
    let config = settings.anneal(settings.seed);
    let samples = sample_sa(&problem.model, &config)?;
    let stats = excitation_stats(&problem, &samples);
    let mut report = summarize(&problem, &decode_all(&problem, &samples), samples.num_reads);
    report.no_broken_reads = stats.no_broken_reads();
    report.no_excited_reads = stats.no_excited_reads();
    if let Some(dir) = settings.out.as_deref() {
        write_run(settings, dir)?;
        samples.export(&dir.join("samples.csv"), &config)?;
        fs::write(
            dir.join("model.json"),
            ModelFile::from_problem(&problem).to_json()?,
        )?;
        fs::write(
            dir.join("report.json"),
            serde_json::to_string_pretty(&report)?,
        )?;
        stats.write_csv(&problem, fs::File::create(dir.join("excitations.csv"))?)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub m: usize,
    pub c: f64,
    #[serde(rename = "N")]
    pub target: u64,
    pub p: u64,
    pub q: u64,
    pub seed: u64,
    pub reads: usize,
    pub ground_reads: usize,
    pub no_broken_reads: usize,
    pub no_excited_reads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub m: usize,
    pub c: f64,
    pub metric: String,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

fn median(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        (sorted[k / 2 - 1] + sorted[k / 2]) / 2.0
    }
}

/// `(n, m, c)` of a sweep group.
type SweepKey = (usize, usize, f64);

type Metric = (&'static str, fn(&SweepRow) -> usize);

pub fn summarize_sweep(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut groups: Vec<(SweepKey, Vec<&SweepRow>)> = Vec::new();
    for r in rows {
        let key = (r.n, r.m, r.c);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    let metrics: [Metric; 3] = [
        ("ground_reads", |r| r.ground_reads),
        ("no_broken_reads", |r| r.no_broken_reads),
        ("no_excited_reads", |r| r.no_excited_reads),
    ];
    let mut out = Vec::new();
    for ((n, m, c), group) in groups {
        for (name, f) in metrics {
            let mut vals: Vec<f64> = group.iter().map(|r| f(r) as f64).collect();
            vals.sort_by(f64::total_cmp);
            out.push(SummaryRow {
                n,
                m,
                c,
                metric: name.to_string(),
                min: vals[0],
                median: median(&vals),
                max: vals[vals.len() - 1],
            });
        }
    }
    out
}

pub fn cmd_sweep(settings: &Settings) -> Result<Vec<SweepRow>> {
    let graph = build_pegasus(settings.pegasus)?;
    let library = library_for(settings, &graph)?;
    let mut rows = Vec::new();
    let mut run = 0usize;
    for &(n, m) in &settings.sizes {
        let instances = biprimes(n, m, settings.mode, settings.instances);
        for &c in &settings.c_list {
            for &(target, p, q) in &instances {
                let problem = build_problem(settings, &graph, &library, n, m, c, target)?;
                let seed = iteration_seed(settings.seed, run);
                run += 1;
                let samples = sample_sa(&problem.model, &settings.anneal(seed))?;
                let stats = excitation_stats(&problem, &samples);
                rows.push(SweepRow {
                    n,
                    m,
                    c,
                    target,
                    p,
                    q,
                    seed,
                    reads: samples.num_reads,
                    ground_reads: stats.ground_reads(),
                    no_broken_reads: stats.no_broken_reads(),
                    no_excited_reads: stats.no_excited_reads(),
                });
                if let Some(dir) = settings.out.as_deref() {
                    fs::create_dir_all(dir)?;
                    let name = format!("excitations_{n}x{m}_c{c}_N{target}.csv");
                    stats.write_csv(&problem, fs::File::create(dir.join(name))?)?;
                }
            }
        }
    }
    if let Some(dir) = settings.out.as_deref() {
        write_run(settings, dir)?;
        let mut w = csv::Writer::from_path(dir.join("sweep.csv"))?;
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
        for r in summarize_sweep(&rows) {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(rows)
}

pub fn cmd_remedy(settings: &Settings) -> Result<crate::remedy::RemedyResult> {
    let target = settings.target()?;
    let graph = build_pegasus(settings.pegasus)?;
    let library = library_for(settings, &graph)?;
    let problem = build_problem(
        settings,
        &graph,
        &library,
        settings.n,
        settings.m,
        settings.chain_strength,
        target,
    )?;
    let result = remedy_loop(
        &problem,
        &settings.anneal(settings.seed),
        settings.delta,
        settings.threshold,
    )?;
    if let Some(dir) = settings.out.as_deref() {
        write_run(settings, dir)?;
        fs::write(dir.join("remedy.json"), result.to_json()?)?;
    }
    Ok(result)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let file = match &cli.config {
        Some(path) => Some(serde_json::from_str::<Overrides>(&fs::read_to_string(
            path,
        )?)?),
        None => None,
    };
    let env_seed = std::env::var("QFA_SEED").ok();
    let settings = Settings::resolve(
        cli.command.name(),
        file.as_ref(),
        cli.command.overrides(),
        env_seed.as_deref(),
    )?;
    match cli.command {
        Command::Synth(_) => {
            let s = cmd_synth(&settings)?;
            println!("library: {} entries", s.entries);
            for (fixing, gap) in s.gaps {
                println!("  [{fixing}] gap {gap}");
            }
            Ok(0)
        }
        Command::Factor(_) => {
            let r = cmd_factor(&settings)?;
            println!(
                "N={} {}x{} method={} reads={}",
                r.target,
                r.n,
                r.m,
                r.method.short_name(),
                r.reads
            );
            println!(
                "success reads: {} (zero-energy reads: {})",
                r.success_reads, r.ground_reads
            );
            println!("slack solutions: {}", r.slack_reads);
            println!(
                "no broken chain: {}  no excited CFA: {}",
                r.no_broken_reads, r.no_excited_reads
            );
            for (p, q) in &r.factors {
                println!("factors: {p} x {q}");
            }
            Ok(if r.found() { 0 } else { 1 })
        }
        Command::Sweep(_) => {
            let rows = cmd_sweep(&settings)?;
            println!("{} sweep rows", rows.len());
            for r in summarize_sweep(&rows) {
                println!(
                    "{}x{} c={} {}: min {} median {} max {}",
                    r.n, r.m, r.c, r.metric, r.min, r.median, r.max
                );
            }
            Ok(0)
        }
        Command::Remedy(_) => {
            let r = cmd_remedy(&settings)?;
            for s in &r.history {
                println!(
                    "iter {:>3} best {:>8.3} ground {:>4} target {:?}",
                    s.iteration, s.best_energy, s.ground_reads, s.target
                );
            }
            println!(
                "reached ground: {} after {} iterations",
                r.reached_ground, r.iterations_used
            );
            Ok(0)
        }
    }
}
