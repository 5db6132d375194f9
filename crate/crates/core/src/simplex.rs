//! Two-phase primal simplex over an exact ordered scalar, on a dense
//! tableau, with deterministic pivoting and exact certificates.
//!
//! Pivot choice is Dantzig's rule (most negative reduced cost, lowest index
//! on ties) switching to Bland's rule after a run of degenerate pivots;
//! Bland's rule cannot cycle, and the switch only releases once the
//! objective strictly improves, so the method terminates. The artificial
//! columns are kept in the tableau after phase one: they started as the
//! identity, so they carry the current basis inverse, from which dual
//! multipliers and Farkas certificates are read off exactly.
//!
//! Phase one runs once per constraint system; any number of objectives can
//! then be minimized from the stored feasible tableau.

use crate::linalg::{row_dot, SparseRow};
use crate::{Error, Result, Scalar};

const STALL_LIMIT: u32 = 40;
const PIVOT_LIMIT: u64 = 2_000_000;

/// Equality-form feasible region: `A x = b`, `x >= 0`, rows independent.
#[derive(Clone, Debug)]
pub struct ConstraintSystem<S> {
    pub ncols: usize,
    pub rows: Vec<SparseRow<S>>,
    pub rhs: Vec<S>,
}

/// Result of phase one on a constraint system.
pub enum PrepareOutcome<S> {
    Feasible(PreparedSystem<S>),
    /// `y` with `yᵀA <= 0` componentwise and `yᵀb > 0`, over the system's
    /// rows in input order.
    Infeasible { farkas: Vec<S> },
}

/// A feasible basis for a constraint system, ready to minimize objectives.
pub struct PreparedSystem<S> {
    ncols: usize,
    m: usize,
    /// `m x (ncols + m + 1)`: original columns, basis-inverse tracking
    /// columns, right-hand side.
    tab: Vec<Vec<S>>,
    basis: Vec<usize>,
    /// Sign applied to each input row to make the initial rhs nonnegative.
    flipped: Vec<bool>,
    pub phase1_pivots: u64,
}

pub enum MinimizeOutcome<S> {
    Optimal(BasicOptimum<S>),
    Unbounded,
}

/// An optimal basic solution with exact duals.
pub struct BasicOptimum<S> {
    pub x: Vec<S>,
    pub objective: S,
    /// Dual multiplier per input row (sign convention of the original,
    /// unflipped system): `yᵀA <= cᵀ` with equality on the support of `x`,
    /// and `yᵀb = objective`.
    pub duals: Vec<S>,
    pub pivots: u64,
}

struct Tableau<'a, S> {
    tab: &'a mut Vec<Vec<S>>,
    cost: &'a mut Vec<S>,
    basis: &'a mut Vec<usize>,
}

impl<S: Scalar> Tableau<'_, S> {
    fn rhs_col(&self) -> usize {
        self.tab[0].len() - 1
    }

    #[allow(clippy::needless_range_loop)]
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.tab[row][col].clone();
        let width = self.tab[row].len();
        for c in 0..width {
            if !self.tab[row][c].is_zero() {
                self.tab[row][c] = self.tab[row][c].clone() / p.clone();
            }
        }
        let pivot_row = self.tab[row].clone();
        for r in 0..self.tab.len() {
            if r != row && !self.tab[r][col].is_zero() {
                let factor = self.tab[r][col].clone();
                for c in 0..width {
                    if !pivot_row[c].is_zero() {
                        self.tab[r][c] =
                            self.tab[r][c].clone() - factor.clone() * pivot_row[c].clone();
                    }
                }
            }
        }
        if !self.cost[col].is_zero() {
            let factor = self.cost[col].clone();
            for c in 0..width {
                if !pivot_row[c].is_zero() {
                    self.cost[c] = self.cost[c].clone() - factor.clone() * pivot_row[c].clone();
                }
            }
        }
        self.basis[row] = col;
    }

    /// Entering column among `candidates` with negative reduced cost:
    /// Dantzig (most negative, lowest index) or Bland (lowest index).
    fn entering(&self, candidates: usize, bland: bool) -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in 0..candidates {
            if self.cost[j] < S::zero() {
                if bland {
                    return Some(j);
                }
                match best {
                    Some(b) if self.cost[j] >= self.cost[b] => {}
                    _ => best = Some(j),
                }
            }
        }
        best
    }

    /// Leaving row by exact minimum ratio; ties resolved toward the lowest
    /// basic variable index (Bland-compatible).
    fn leaving(&self, col: usize) -> Option<usize> {
        let rhs = self.rhs_col();
        let mut best: Option<(usize, S, S)> = None; // (row, num, den): ratio num/den
        for r in 0..self.tab.len() {
            let a = &self.tab[r][col];
            if *a > S::zero() {
                let num = self.tab[r][rhs].clone();
                let den = a.clone();
                let better = match &best {
                    None => true,
                    Some((brow, bnum, bden)) => {
                        // num/den < bnum/bden  (all denominators positive)
                        let lhs = num.clone() * bden.clone();
                        let rhs_v = bnum.clone() * den.clone();
                        lhs < rhs_v
                            || (lhs == rhs_v && self.basis[r] < self.basis[*brow])
                    }
                };
                if better {
                    best = Some((r, num, den));
                }
            }
        }
        best.map(|(r, _, _)| r)
    }

    /// Shared pivot loop; returns `None` on unbounded.
    fn run(&mut self, candidates: usize, pivots: &mut u64) -> Result<bool> {
        let rhs = self.rhs_col();
        let mut stalled: u32 = 0;
        loop {
            let bland = stalled >= STALL_LIMIT;
            let Some(col) = self.entering(candidates, bland) else {
                return Ok(true);
            };
            let Some(row) = self.leaving(col) else {
                return Ok(false);
            };
            let degenerate = self.tab[row][rhs].is_zero();
            self.pivot(row, col);
            *pivots += 1;
            if *pivots > PIVOT_LIMIT {
                return Err(Error::PivotLimit(*pivots));
            }
            stalled = if degenerate { stalled + 1 } else { 0 };
        }
    }
}

/// Run phase one: find a basic feasible point or a Farkas certificate.
pub fn prepare<S: Scalar>(cs: &ConstraintSystem<S>) -> Result<PrepareOutcome<S>> {
    let m = cs.rows.len();
    let n = cs.ncols;
    if cs.rhs.len() != m {
        return Err(Error::DimensionMismatch("rhs length != row count".into()));
    }
    let width = n + m + 1;
    let mut tab: Vec<Vec<S>> = vec![vec![S::zero(); width]; m];
    let mut flipped = vec![false; m];
    for (r, row) in cs.rows.iter().enumerate() {
        let flip = cs.rhs[r] < S::zero();
        flipped[r] = flip;
        for (c, v) in row {
            let v = if flip { -v.clone() } else { v.clone() };
            tab[r][*c] = tab[r][*c].clone() + v;
        }
        tab[r][n + r] = S::one();
        tab[r][n + m] = if flip { -cs.rhs[r].clone() } else { cs.rhs[r].clone() };
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // phase-1 reduced costs: for column j, 0 - Σ_r tab[r][j]; artificial
    // columns come out zero; the rhs slot holds -objective.
    let mut cost = vec![S::zero(); width];
    for j in 0..width {
        let mut s = S::zero();
        for row in tab.iter() {
            s = s + row[j].clone();
        }
        if j < n || j == n + m {
            cost[j] = -s;
        }
    }
    let mut pivots = 0u64;
    {
        let mut t = Tableau {
            tab: &mut tab,
            cost: &mut cost,
            basis: &mut basis,
        };
        let bounded = t.run(n, &mut pivots)?;
        if !bounded {
            return Err(Error::Internal("phase one cannot be unbounded".into()));
        }
    }
    // cost[n + m] holds -objective
    let objective = -cost[n + m].clone();
    if objective > S::zero() {
        // duals of phase one: y_i = Σ_r c1(basis[r]) · tab[r][n+i], with
        // c1 = 1 exactly on artificial variables.
        let mut farkas = Vec::with_capacity(m);
        for i in 0..m {
            let mut y = S::zero();
            for r in 0..m {
                if basis[r] >= n {
                    y = y + tab[r][n + i].clone();
                }
            }
            if flipped[i] {
                y = -y;
            }
            farkas.push(y);
        }
        return Ok(PrepareOutcome::Infeasible { farkas });
    }
    // Drive any remaining zero-level artificials out of the basis.
    for r in 0..m {
        if basis[r] >= n {
            let col = (0..n).find(|&c| !tab[r][c].is_zero()).ok_or_else(|| {
                Error::Internal("dependent row survived row selection".into())
            })?;
            let mut t = Tableau {
                tab: &mut tab,
                cost: &mut cost,
                basis: &mut basis,
            };
            t.pivot(r, col);
            pivots += 1;
        }
    }
    Ok(PrepareOutcome::Feasible(PreparedSystem {
        ncols: n,
        m,
        tab,
        basis,
        flipped,
        phase1_pivots: pivots,
    }))
}

impl<S: Scalar> PreparedSystem<S> {
    /// Minimize `objective · x` over the prepared region.
    pub fn minimize(&self, objective: &[S]) -> Result<MinimizeOutcome<S>> {
        if objective.len() != self.ncols {
            return Err(Error::DimensionMismatch(
                "objective length != column count".into(),
            ));
        }
        let n = self.ncols;
        let m = self.m;
        let width = n + m + 1;
        let mut tab = self.tab.clone();
        let mut basis = self.basis.clone();
        // reduced costs against the current basis: c_j - Σ_r c_B[r] tab[r][j]
        let mut cost = vec![S::zero(); width];
        let basic_cost: Vec<S> = basis
            .iter()
            .map(|&v| if v < n { objective[v].clone() } else { S::zero() })
            .collect();
        for j in 0..width {
            let mut s = S::zero();
            for r in 0..m {
                if !tab[r][j].is_zero() && !basic_cost[r].is_zero() {
                    s = s + basic_cost[r].clone() * tab[r][j].clone();
                }
            }
            if j < n {
                cost[j] = objective[j].clone() - s;
            } else if j == n + m {
                cost[j] = -s;
            }
        }
        let mut pivots = 0u64;
        let bounded = {
            let mut t = Tableau {
                tab: &mut tab,
                cost: &mut cost,
                basis: &mut basis,
            };
            t.run(n, &mut pivots)?
        };
        if !bounded {
            return Ok(MinimizeOutcome::Unbounded);
        }
        let mut x = vec![S::zero(); n];
        for r in 0..m {
            if basis[r] < n {
                x[basis[r]] = tab[r][n + m].clone();
            }
        }
        let mut duals = Vec::with_capacity(m);
        for i in 0..m {
            let mut y = S::zero();
            for r in 0..m {
                if basis[r] < n && !tab[r][n + i].is_zero() {
                    y = y + objective[basis[r]].clone() * tab[r][n + i].clone();
                }
            }
            if self.flipped[i] {
                y = -y;
            }
            duals.push(y);
        }
        let objective_value = -cost[n + m].clone();
        Ok(MinimizeOutcome::Optimal(BasicOptimum {
            x,
            objective: objective_value,
            duals,
            pivots,
        }))
    }
}

/// Exhaustive basis-enumeration oracle: the best basic feasible solution of
/// the system, found by solving every square column subset. Independent of
/// the simplex path; meant for small models.
pub fn enumerate_basic_minimum<S: Scalar>(
    cs: &ConstraintSystem<S>,
    objective: &[S],
) -> Result<Option<(S, Vec<S>)>> {
    let m = cs.rows.len();
    let n = cs.ncols;
    if m > n {
        return Err(Error::DimensionMismatch(
            "more independent rows than columns".into(),
        ));
    }
    let dense_cols: Vec<Vec<S>> = (0..n)
        .map(|c| {
            let mut col = vec![S::zero(); m];
            for (r, row) in cs.rows.iter().enumerate() {
                for (cc, v) in row {
                    if *cc == c {
                        col[r] = col[r].clone() + v.clone();
                    }
                }
            }
            col
        })
        .collect();
    let mut best: Option<(S, Vec<S>)> = None;
    let mut subset: Vec<usize> = (0..m).collect();
    loop {
        let a: Vec<Vec<S>> = (0..m)
            .map(|r| subset.iter().map(|&c| dense_cols[c][r].clone()).collect())
            .collect();
        if let Some(xb) = crate::linalg::solve_square(&a, &cs.rhs) {
            if xb.iter().all(|v| !v.is_negative()) {
                let mut x = vec![S::zero(); n];
                for (slot, &c) in subset.iter().enumerate() {
                    x[c] = xb[slot].clone();
                }
                let value = objective
                    .iter()
                    .zip(&x)
                    .fold(S::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
                match &best {
                    Some((bv, _)) if *bv <= value => {}
                    _ => best = Some((value, x)),
                }
            }
        }
        // next m-combination of 0..n in lexicographic order
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(best);
            }
            i -= 1;
            if subset[i] != i + n - m {
                subset[i] += 1;
                for k in i + 1..m {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Exact validation of a Farkas certificate against the original system.
pub fn farkas_is_valid<S: Scalar>(cs: &ConstraintSystem<S>, y: &[S]) -> bool {
    if y.len() != cs.rows.len() {
        return false;
    }
    let combo = crate::linalg::combine_rows(&cs.rows, y, cs.ncols);
    if combo.iter().any(|v| *v > S::zero()) {
        return false;
    }
    let yb = y
        .iter()
        .zip(&cs.rhs)
        .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
    yb > S::zero()
}

/// Exact optimality validation: primal feasibility, dual feasibility,
/// complementary slackness, zero gap.
pub fn optimum_is_certified<S: Scalar>(
    cs: &ConstraintSystem<S>,
    objective: &[S],
    opt: &BasicOptimum<S>,
) -> bool {
    if opt.x.iter().any(|v| v.is_negative()) {
        return false;
    }
    for (row, b) in cs.rows.iter().zip(&cs.rhs) {
        if row_dot(row, &opt.x) != *b {
            return false;
        }
    }
    let yta = crate::linalg::combine_rows(&cs.rows, &opt.duals, cs.ncols);
    for j in 0..cs.ncols {
        let slack = objective[j].clone() - yta[j].clone();
        if slack.is_negative() {
            return false; // dual infeasible
        }
        if !opt.x[j].is_zero() && !slack.is_zero() {
            return false; // complementary slackness
        }
    }
    let cx = objective
        .iter()
        .zip(&opt.x)
        .fold(S::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
    let yb = opt
        .duals
        .iter()
        .zip(&cs.rhs)
        .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
    cx == opt.objective && yb == opt.objective
}
