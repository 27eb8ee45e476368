//! Small dense linear programming.
//!
//! Penalty synthesis produces LPs with a handful of free variables (offset,
//! biases, couplings, gap) and a few hundred constraint rows. The primal
//! `max cᵀx, Ax ≤ b, x free` is solved through its dual
//! `min bᵀy, Aᵀy = c, y ≥ 0`, whose tableau has only one row per primal
//! variable. The primal solution is read back from the simplex multipliers.

use std::fmt;

const EPS: f64 = 1e-10;
const DEGENERATE_SWITCH: usize = 40;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpError {
    /// The primal has no feasible point.
    Infeasible,
    /// The primal is unbounded, or infeasible and unbounded at once.
    Unbounded,
    /// Pivot limit reached (numerical trouble).
    Stalled,
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Infeasible => write!(f, "linear program is infeasible"),
            LpError::Unbounded => write!(f, "linear program is unbounded"),
            LpError::Stalled => write!(f, "simplex pivot limit reached"),
        }
    }
}

impl std::error::Error for LpError {}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

/// `maximize objective·x` over free variables subject to the given rows.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.rows
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    pub fn add(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.num_vars);
        self.rows.push(Constraint { coeffs, sense, rhs });
    }

    /// Adds `lo ≤ x[var] ≤ hi`; infinite sides are skipped.
    pub fn bound(&mut self, var: usize, lo: f64, hi: f64) {
        let mut e = vec![0.0; self.num_vars];
        e[var] = 1.0;
        if lo.is_finite() {
            self.add(e.clone(), Sense::Ge, lo);
        }
        if hi.is_finite() {
            self.add(e, Sense::Le, hi);
        }
    }

    pub fn maximize(&self) -> Result<LpSolution, LpError> {
        self.solve_warm().map(|w| w.solution())
    }

    /// Solves and keeps the final basis so rows can be appended cheaply.
    pub fn solve_warm(&self) -> Result<WarmLp, LpError> {
        let n = self.num_vars;
        let sign: Vec<f64> = self
            .objective
            .iter()
            .map(|&c| if c < 0.0 { -1.0 } else { 1.0 })
            .collect();
        let le = to_le(&self.rows);
        let k = le.len();
        let width = k + n; // dual columns, then artificials
        let mut t = Tableau {
            rows: n,
            width,
            a: vec![0.0; n * width],
            rhs: vec![0.0; n],
            basis: (k..k + n).collect(),
        };
        for i in 0..n {
            for (j, (coeffs, _)) in le.iter().enumerate() {
                t.a[i * width + j] = sign[i] * coeffs[i];
            }
            t.a[i * width + k + i] = 1.0;
            t.rhs[i] = sign[i] * self.objective[i];
        }

        // Phase 1: drive artificials to zero.
        let mut cost1 = vec![0.0; width];
        for c in cost1.iter_mut().skip(k) {
            *c = 1.0;
        }
        t.optimize(&cost1, width)?;
        let infeas: f64 = (0..n).filter(|&i| t.basis[i] >= k).map(|i| t.rhs[i]).sum();
        if infeas > 1e-7 {
            return Err(LpError::Unbounded);
        }
        for i in 0..n {
            if t.basis[i] >= k {
                if let Some(j) = (0..k).find(|&j| t.a[i * width + j].abs() > 1e-9) {
                    t.pivot(i, j);
                }
            }
        }

        let mut warm = WarmLp {
            objective: self.objective.clone(),
            sign,
            cost: le.iter().map(|(_, b)| *b).collect(),
            t,
        };
        warm.phase2()?;
        Ok(warm)
    }
}

fn to_le(rows: &[Constraint]) -> Vec<(Vec<f64>, f64)> {
    let mut le = Vec::with_capacity(rows.len() * 2);
    for row in rows {
        let neg = || row.coeffs.iter().map(|v| -v).collect::<Vec<_>>();
        match row.sense {
            Sense::Le => le.push((row.coeffs.clone(), row.rhs)),
            Sense::Ge => le.push((neg(), -row.rhs)),
            Sense::Eq => {
                le.push((row.coeffs.clone(), row.rhs));
                le.push((neg(), -row.rhs));
            }
        }
    }
    le
}

/// An optimal dual tableau that accepts extra primal rows.
///
/// A new primal row is a new dual column, so the current basis stays
/// feasible and re-optimization usually takes a handful of pivots.
#[derive(Debug, Clone)]
pub struct WarmLp {
    objective: Vec<f64>,
    sign: Vec<f64>,
    /// right-hand side of each `≤` row, i.e. the dual cost
    cost: Vec<f64>,
    t: Tableau,
}

impl WarmLp {
    fn dual_columns(&self) -> usize {
        self.cost.len()
    }

    fn full_cost(&self) -> Vec<f64> {
        let mut c = self.cost.clone();
        c.resize(self.t.width, 0.0);
        c
    }

    fn phase2(&mut self) -> Result<(), LpError> {
        let cost = self.full_cost();
        match self.t.optimize(&cost, self.dual_columns()) {
            Ok(()) => Ok(()),
            Err(LpError::Unbounded) => Err(LpError::Infeasible),
            Err(e) => Err(e),
        }
    }

    /// Appends a primal row and re-optimizes.
    pub fn add(&mut self, coeffs: &[f64], sense: Sense, rhs: f64) -> Result<(), LpError> {
        let row = Constraint {
            coeffs: coeffs.to_vec(),
            sense,
            rhs,
        };
        for (col, b) in to_le(std::slice::from_ref(&row)) {
            let orig: Vec<f64> = col.iter().zip(&self.sign).map(|(v, s)| v * s).collect();
            self.t.insert_column(self.dual_columns(), &orig);
            self.cost.push(b);
        }
        self.phase2()
    }

    pub fn solution(&self) -> LpSolution {
        let n = self.t.rows;
        let k = self.dual_columns();
        let w = self.t.width;
        let cost = self.full_cost();
        // Multipliers: reduced cost of artificial i is -pi_i.
        let mut x = vec![0.0; n];
        for (i, xi) in x.iter_mut().enumerate() {
            let col = k + i;
            let mut pi = 0.0;
            for r in 0..n {
                pi += cost[self.t.basis[r]] * self.t.a[r * w + col];
            }
            *xi = self.sign[i] * pi;
        }
        let objective = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        LpSolution { x, objective }
    }
}

#[derive(Debug, Clone)]
struct Tableau {
    rows: usize,
    width: usize,
    a: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    /// Inserts a column at `at` given in original coordinates. The trailing
    /// artificial block holds the basis inverse, which maps it into the
    /// current basis.
    fn insert_column(&mut self, at: usize, orig: &[f64]) {
        let n = self.rows;
        let w = self.width;
        let art = w - n;
        let mut a = Vec::with_capacity(n * (w + 1));
        for r in 0..n {
            let row = &self.a[r * w..(r + 1) * w];
            let v: f64 = (0..n).map(|i| row[art + i] * orig[i]).sum();
            a.extend_from_slice(&row[..at]);
            a.push(v);
            a.extend_from_slice(&row[at..]);
        }
        self.a = a;
        self.width = w + 1;
        for b in self.basis.iter_mut() {
            if *b >= at {
                *b += 1;
            }
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let p = self.a[pr * w + pc];
        for j in 0..w {
            self.a[pr * w + j] /= p;
        }
        self.rhs[pr] /= p;
        let (before, rest) = self.a.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        let prhs = self.rhs[pr];
        let update = |row: &mut [f64], rhs: &mut f64| {
            let f = row[pc];
            if f.abs() > 0.0 {
                for (x, &y) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * y;
                }
                *rhs -= f * prhs;
            }
        };
        for (r, row) in before.chunks_mut(w).enumerate() {
            update(row, &mut self.rhs[r]);
        }
        for (r, row) in after.chunks_mut(w).enumerate() {
            update(row, &mut self.rhs[pr + 1 + r]);
        }
        self.basis[pr] = pc;
    }

    /// Minimizes `cost` with entering columns restricted to `0..enter_limit`.
    fn optimize(&mut self, cost: &[f64], enter_limit: usize) -> Result<(), LpError> {
        let w = self.width;
        let mut reduced: Vec<f64> = cost.to_vec();
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (d, &a) in reduced.iter_mut().zip(&self.a[i * w..(i + 1) * w]) {
                    *d -= cb * a;
                }
            }
        }
        let mut basic = vec![false; w];
        for &b in &self.basis {
            basic[b] = true;
        }
        let mut degenerate = 0usize;
        for _ in 0..MAX_PIVOTS {
            let bland = degenerate >= DEGENERATE_SWITCH;
            let mut entering = None;
            let mut best = -1e-9;
            for j in 0..enter_limit {
                if basic[j] {
                    continue;
                }
                let r = reduced[j];
                if r < -1e-9 {
                    if bland {
                        entering = Some(j);
                        break;
                    }
                    if r < best {
                        best = r;
                        entering = Some(j);
                    }
                }
            }
            let Some(pc) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let v = self.a[i * w + pc];
                if v > EPS {
                    let ratio = self.rhs[i].max(0.0) / v;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= 1e-12;
                            let better = if tie {
                                if bland {
                                    self.basis[i] < self.basis[li]
                                } else {
                                    v > self.a[li * w + pc]
                                }
                            } else {
                                ratio < lr
                            };
                            if better {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((pr, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            basic[self.basis[pr]] = false;
            basic[pc] = true;
            self.pivot(pr, pc);
            let f = reduced[pc];
            for (d, &a) in reduced.iter_mut().zip(&self.a[pr * w..(pr + 1) * w]) {
                *d -= f * a;
            }
        }
        Err(LpError::Stalled)
    }
}

/// Snaps `v` to a nearby rational with a small denominator when one lies
/// within `tol`; otherwise returns `v` unchanged.
pub fn snap(v: f64, max_den: u32, tol: f64) -> f64 {
    for den in 1..=max_den {
        let d = den as f64;
        let r = (v * d).round() / d;
        if (r - v).abs() <= tol {
            return r;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y; x ≤ 4; 2y ≤ 12; 3x + 2y ≤ 18  ->  (2, 6), 36
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 3.0);
        lp.set_objective(1, 5.0);
        lp.add(vec![1.0, 0.0], Sense::Le, 4.0);
        lp.add(vec![0.0, 2.0], Sense::Le, 12.0);
        lp.add(vec![3.0, 2.0], Sense::Le, 18.0);
        lp.add(vec![1.0, 0.0], Sense::Ge, 0.0);
        lp.add(vec![0.0, 1.0], Sense::Ge, 0.0);
        let s = lp.maximize().unwrap();
        assert!(approx(s.objective, 36.0));
        assert!(approx(s.x[0], 2.0) && approx(s.x[1], 6.0));
    }

    #[test]
    fn negative_objective_and_equality() {
        // max -x - y; x + y = 3; x - y ≥ 1; x,y ≥ 0 -> objective -3
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, -1.0);
        lp.set_objective(1, -1.0);
        lp.add(vec![1.0, 1.0], Sense::Eq, 3.0);
        lp.add(vec![1.0, -1.0], Sense::Ge, 1.0);
        lp.bound(0, 0.0, f64::INFINITY);
        lp.bound(1, 0.0, f64::INFINITY);
        let s = lp.maximize().unwrap();
        assert!(approx(s.objective, -3.0));
        assert!(approx(s.x[0] + s.x[1], 3.0));
        assert!(s.x[0] - s.x[1] >= 1.0 - 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let mut lp = LinearProgram::new(1);
        lp.set_objective(0, 1.0);
        lp.add(vec![1.0], Sense::Le, 1.0);
        lp.add(vec![1.0], Sense::Ge, 2.0);
        assert_eq!(lp.maximize().unwrap_err(), LpError::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 1.0);
        lp.add(vec![0.0, 1.0], Sense::Le, 1.0);
        assert!(lp.maximize().is_err());
    }

    #[test]
    fn two_row_gap_program() {
        // P(z) = o + h z; P(+1) = 0, P(-1) ≥ g, |h| ≤ 4 -> g = 8? h bounded at -4:
        // o = 4, P(-1) = 8.
        let mut lp = LinearProgram::new(3);
        lp.set_objective(2, 1.0);
        lp.add(vec![1.0, 1.0, 0.0], Sense::Eq, 0.0);
        lp.add(vec![1.0, -1.0, -1.0], Sense::Ge, 0.0);
        lp.bound(1, -4.0, 4.0);
        let s = lp.maximize().unwrap();
        assert!(approx(s.objective, 8.0));
        assert!(approx(s.x[1], -4.0));
    }

    #[test]
    fn snapping() {
        assert_eq!(snap(0.333_333_333_333_4, 12, 1e-9), 1.0 / 3.0);
        assert_eq!(snap(2.0 + 1e-13, 12, 1e-9), 2.0);
        let odd = 0.123_456_789;
        assert_eq!(snap(odd, 12, 1e-9), odd);
    }
}
