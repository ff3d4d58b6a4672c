//! Two-phase dense tableau simplex for small linear programs.
//!
//! Maximizes cᵀx over Ax {≤,=,≥} b, x ≥ 0. Rows are equilibrated (scaled by
//! their largest coefficient) once at setup so fixed pivot tolerances behave
//! across wildly different row scales (bandwidth rows in bits/s next to a
//! unit budget row). Pivoting is deterministic: Dantzig's rule (most positive
//! reduced cost, ties toward the lowest column index) with the leaving row
//! chosen as the lowest row index among minimum-ratio ties; if the objective
//! stalls long enough to suggest degenerate cycling, the rule switches to
//! Bland's (lowest eligible indexes), which guarantees termination.

use crate::error::{Error, Result};

/// Direction of one constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// One constraint row: `coeffs · x  sense  rhs`.
#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A linear program in maximization form with implicit x ≥ 0.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub maximize: Vec<f64>,
    pub rows: Vec<LpRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

/// Eligibility threshold for pivot elements (post-equilibration scale).
const PIVOT_TOL: f64 = 1e-9;
/// Phase-1 optimum above this (in equilibrated units) certifies
/// infeasibility.
const FEAS_TOL: f64 = 1e-8;
/// Consecutive non-improving pivots tolerated before switching to Bland's
/// rule.
const STALL_LIMIT: usize = 64;
/// Hard cap on total pivots; generous for the problem sizes at hand and only
/// reachable through a bug, never through cycling (Bland terminates).
const MAX_PIVOTS: usize = 50_000;

struct Tableau {
    /// m rows × (ncols + 1); the last column is the rhs.
    rows: Vec<Vec<f64>>,
    /// Reduced-cost row, length ncols.
    reduced: Vec<f64>,
    /// Column index of the basic variable in each row.
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    /// Rebuilds the reduced-cost row r_j = c_j − Σ_i c_{basis_i}·t_ij for a
    /// new cost vector.
    fn price(&mut self, cost: &[f64]) {
        for j in 0..self.ncols {
            let mut r = cost[j];
            for (i, row) in self.rows.iter().enumerate() {
                r -= cost[self.basis[i]] * row[j];
            }
            self.reduced[j] = r;
        }
    }

    /// Objective value of the current basis under `cost`.
    fn objective(&self, cost: &[f64]) -> f64 {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| cost[self.basis[i]] * row[self.ncols])
            .sum()
    }

    /// Gauss-Jordan pivot on (row, col), updating the reduced-cost row too.
    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= pivot;
        }
        // The pivot entry becomes exactly 1 regardless of rounding.
        self.rows[row][col] = 1.0;
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let factor = self.rows[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..=self.ncols {
                let delta = factor * self.rows[row][j];
                self.rows[i][j] -= delta;
            }
            self.rows[i][col] = 0.0;
        }
        let factor = self.reduced[col];
        if factor != 0.0 {
            for j in 0..self.ncols {
                self.reduced[j] -= factor * self.rows[row][j];
            }
            self.reduced[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Lowest row index attaining the minimum ratio rhs_i / t_ic among
    /// eligible rows; `bland` breaks ties toward the lowest basic-variable
    /// index instead, as Bland's rule requires.
    fn leaving_row(&self, col: usize, bland: bool) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let a = row[col];
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs(i) / a;
            best = match best {
                None => Some((ratio, i)),
                Some((r, bi)) => {
                    let tol = 1e-12 * (1.0 + r.abs());
                    if ratio < r - tol {
                        Some((ratio, i))
                    } else if ratio <= r + tol {
                        // Tie: keep the earlier row, or the lower basic
                        // variable under Bland's rule.
                        if bland && self.basis[i] < self.basis[bi] {
                            Some((r, i))
                        } else {
                            Some((r, bi))
                        }
                    } else {
                        best
                    }
                }
            };
        }
        best.map(|(_, i)| i)
    }
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

/// Runs the pivot loop to optimality for the cost vector priced into
/// `tab.reduced`. `allowed` bounds the columns eligible to enter.
fn optimize(
    tab: &mut Tableau,
    cost: &[f64],
    allowed: usize,
    entering_tol: f64,
    pivots: &mut usize,
) -> Result<PhaseOutcome> {
    let mut bland = false;
    let mut stall = 0usize;
    let mut last_obj = tab.objective(cost);
    loop {
        let entering = if bland {
            (0..allowed).find(|&j| tab.reduced[j] > entering_tol)
        } else {
            // Most positive reduced cost; strict > keeps ties at the lowest
            // index.
            let mut best: Option<(f64, usize)> = None;
            for j in 0..allowed {
                let r = tab.reduced[j];
                if r > entering_tol && best.is_none_or(|(br, _)| r > br) {
                    best = Some((r, j));
                }
            }
            best.map(|(_, j)| j)
        };
        let Some(col) = entering else {
            return Ok(PhaseOutcome::Optimal);
        };
        let Some(row) = tab.leaving_row(col, bland) else {
            return Ok(PhaseOutcome::Unbounded);
        };
        tab.pivot(row, col);
        *pivots += 1;
        if *pivots > MAX_PIVOTS {
            return Err(Error::InvalidInstance(
                "simplex exceeded its pivot budget (likely malformed input)".to_string(),
            ));
        }
        let obj = tab.objective(cost);
        if obj <= last_obj + 1e-12 * (1.0 + last_obj.abs()) {
            stall += 1;
            if stall > STALL_LIMIT {
                bland = true;
            }
        } else {
            stall = 0;
        }
        last_obj = obj;
    }
}

/// Solves the LP. Errs only on malformed input (dimension mismatches,
/// non-finite data); infeasibility and unboundedness are ordinary outcomes.
pub fn solve(lp: &LinearProgram) -> Result<LpResult> {
    let n = lp.maximize.len();
    if !lp.maximize.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInstance(
            "objective coefficients must be finite".to_string(),
        ));
    }
    for (i, row) in lp.rows.iter().enumerate() {
        if row.coeffs.len() != n {
            return Err(Error::InvalidInstance(format!(
                "constraint row {i} has {} coefficients, expected {n}",
                row.coeffs.len()
            )));
        }
        if !row.coeffs.iter().all(|v| v.is_finite()) || !row.rhs.is_finite() {
            return Err(Error::InvalidInstance(format!(
                "constraint row {i} contains non-finite values"
            )));
        }
    }

    // Equilibrate rows and normalize to b ≥ 0. All-zero rows are resolved
    // here: either trivially redundant or a direct infeasibility certificate.
    let mut rows: Vec<LpRow> = Vec::with_capacity(lp.rows.len());
    for row in &lp.rows {
        let max_coeff = row
            .coeffs
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        if max_coeff == 0.0 {
            let violated = match row.sense {
                Sense::Le => row.rhs < 0.0,
                Sense::Ge => row.rhs > 0.0,
                Sense::Eq => row.rhs != 0.0,
            };
            if violated {
                return Ok(LpResult::Infeasible);
            }
            continue;
        }
        let mut coeffs: Vec<f64> = row.coeffs.iter().map(|v| v / max_coeff).collect();
        let mut rhs = row.rhs / max_coeff;
        let mut sense = row.sense;
        if rhs < 0.0 {
            for v in &mut coeffs {
                *v = -*v;
            }
            rhs = -rhs;
            sense = match sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
        rows.push(LpRow { coeffs, sense, rhs });
    }

    let m = rows.len();
    let n_extra = m; // one slack or surplus per row (Eq rows leave it unused)
    let num_artificial = rows
        .iter()
        .filter(|r| matches!(r.sense, Sense::Ge | Sense::Eq))
        .count();
    let artificial_start = n + n_extra;
    let ncols = artificial_start + num_artificial;

    let mut tab = Tableau {
        rows: vec![vec![0.0; ncols + 1]; m],
        reduced: vec![0.0; ncols],
        basis: vec![0; m],
        ncols,
    };
    let mut next_artificial = artificial_start;
    for (i, row) in rows.iter().enumerate() {
        tab.rows[i][..n].copy_from_slice(&row.coeffs);
        tab.rows[i][ncols] = row.rhs;
        match row.sense {
            Sense::Le => {
                tab.rows[i][n + i] = 1.0;
                tab.basis[i] = n + i;
            }
            Sense::Ge => {
                tab.rows[i][n + i] = -1.0;
                tab.rows[i][next_artificial] = 1.0;
                tab.basis[i] = next_artificial;
                next_artificial += 1;
            }
            Sense::Eq => {
                tab.rows[i][next_artificial] = 1.0;
                tab.basis[i] = next_artificial;
                next_artificial += 1;
            }
        }
    }

    let mut pivots = 0usize;

    if num_artificial > 0 {
        // Phase 1: maximize −Σ artificials; 0 means a feasible basis exists.
        let mut cost1 = vec![0.0; ncols];
        for c in cost1.iter_mut().skip(artificial_start) {
            *c = -1.0;
        }
        tab.price(&cost1);
        match optimize(&mut tab, &cost1, ncols, PIVOT_TOL, &mut pivots)? {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::Unbounded => {
                // −Σ artificials is bounded above by 0; unbounded is a bug.
                return Err(Error::InvalidInstance(
                    "phase-1 simplex reported an unbounded auxiliary problem".to_string(),
                ));
            }
        }
        if tab.objective(&cost1) < -FEAS_TOL {
            return Ok(LpResult::Infeasible);
        }
        // Pivot leftover artificials out of the basis (they sit at zero), or
        // drop their rows entirely when redundant.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] < artificial_start {
                i += 1;
                continue;
            }
            let col = (0..artificial_start).find(|&j| tab.rows[i][j].abs() > PIVOT_TOL);
            match col {
                Some(j) => {
                    tab.pivot(i, j);
                    i += 1;
                }
                None => {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                }
            }
        }
    }

    // Phase 2 over the original objective; artificial columns are banned.
    let mut cost2 = vec![0.0; ncols];
    cost2[..n].copy_from_slice(&lp.maximize);
    tab.price(&cost2);
    let entering_tol = 1e-9 * (1.0 + lp.maximize.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    match optimize(&mut tab, &cost2, artificial_start, entering_tol, &mut pivots)? {
        PhaseOutcome::Unbounded => Ok(LpResult::Unbounded),
        PhaseOutcome::Optimal => {
            let mut x = vec![0.0; n];
            for (i, &b) in tab.basis.iter().enumerate() {
                if b < n {
                    x[b] = tab.rhs(i).max(0.0);
                }
            }
            // Recomputing cᵀx from the original coefficients keeps the
            // reported objective exact when the solution is a unit vertex.
            let objective = lp
                .maximize
                .iter()
                .zip(&x)
                .map(|(c, v)| c * v)
                .sum();
            Ok(LpResult::Optimal { x, objective })
        }
    }
}
