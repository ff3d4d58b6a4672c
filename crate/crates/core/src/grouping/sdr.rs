//! Semidefinite relaxation of the grouping objective.
//!
//! In spin variables y_c ∈ {−1, 1}^K the grouping objective is
//! ¼·Σ_c (ς − y_cᵀ·W·y_c), so maximizing it means minimizing Σ_c y_cᵀ·W·y_c
//! subject to the membership cap Σ_c y_kc ≤ 2α − C per user and the group
//! size cap 1ᵀy_c ≤ 2τ − K per group. Each group's outer product y_c·y_cᵀ is
//! relaxed to a PSD matrix Y_c with unit diagonal by lifting to the
//! (K+1)×(K+1) block
//!
//!   Z_c = [[Y_c, y_c], [y_cᵀ, 1]] ⪰ 0,
//!
//! whose Schur complement enforces Y_c ⪰ y_c·y_cᵀ (and |y_kc| ≤ 1 via the
//! 2×2 minors). The caps become linear rows with slack variables in a
//! nonnegative orthant, and the whole thing is handed to the interior-point
//! solver in [`crate::conic`].

use nalgebra::{DMatrix, DVector};

use super::WeightGraph;
use crate::conic::{self, BlockVec, ConicOptions, ConicProblem};
use crate::error::{Error, Result};

/// Relative duality gap the returned solution must satisfy.
pub const GAP_TOLERANCE: f64 = 1e-6;
/// Largest constraint violation (unit diagonal, membership and group-size
/// caps) the returned solution may carry.
pub const VIOLATION_TOLERANCE: f64 = 1e-7;

/// Convergence diagnostics for one relaxation solve.
#[derive(Debug, Clone, Copy)]
pub struct SolverStats {
    pub iterations: usize,
    /// Relative duality gap |pobj − dobj| / (1 + |pobj| + |dobj|).
    pub rel_gap: f64,
    /// ∞-norm of the primal residual b − A(X).
    pub primal_residual: f64,
    /// Largest entry of the dual residual C − Z − Aᵀy.
    pub dual_residual: f64,
    /// Worst violation of the relaxation's own constraints, recomputed from
    /// the extracted (Y_c, y_c) blocks.
    pub max_violation: f64,
    /// Whether the solution meets [`GAP_TOLERANCE`] and
    /// [`VIOLATION_TOLERANCE`].
    pub converged: bool,
}

impl SolverStats {
    /// Placeholder stats for hand-built solutions in unit tests.
    #[cfg(test)]
    pub(crate) fn converged_for_tests() -> Self {
        SolverStats {
            iterations: 0,
            rel_gap: 0.0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            max_violation: 0.0,
            converged: true,
        }
    }
}

/// Solution of the relaxation: one correlation matrix and mean vector per
/// group, ready for randomized rounding.
#[derive(Debug, Clone)]
pub struct SdrSolution {
    /// Per-group relaxed spin correlation matrices Y_c (K×K, unit diagonal,
    /// Y_c ⪰ y_c·y_cᵀ up to solver tolerance).
    pub y_mats: Vec<DMatrix<f64>>,
    /// Per-group relaxed spin means y_c (entries in [−1, 1] up to solver
    /// tolerance).
    pub y_vecs: Vec<DVector<f64>>,
    /// Upper bound ¼·Σ_c (ς − Tr(W·Y_c)) on the combinatorial objective, in
    /// the scale of the original weights.
    pub objective_value: f64,
    pub stats: SolverStats,
}

impl SdrSolution {
    /// Worst violation across unit-diagonal rows, membership caps
    /// (Σ_c y_kc ≤ 2α − C) and group-size caps (1ᵀy_c ≤ 2τ − K).
    pub fn max_violation(&self, alpha: usize, tau: usize) -> f64 {
        let num_groups = self.y_mats.len();
        let k_users = self.y_vecs.first().map_or(0, |v| v.len());
        let mut worst = 0.0f64;
        for y in &self.y_mats {
            for d in 0..y.nrows() {
                worst = worst.max((y[(d, d)] - 1.0).abs());
            }
        }
        let user_cap = 2.0 * alpha as f64 - num_groups as f64;
        for k in 0..k_users {
            let total: f64 = self.y_vecs.iter().map(|v| v[k]).sum();
            worst = worst.max(total - user_cap);
        }
        let group_cap = 2.0 * tau as f64 - k_users as f64;
        for v in &self.y_vecs {
            worst = worst.max(v.sum() - group_cap);
            for &e in v.iter() {
                worst = worst.max(e.abs() - 1.0);
            }
        }
        worst
    }
}

/// Builds the lifted conic program for a K-user, C-group instance.
///
/// Constraint order is fixed (and relied on by nothing but kept stable for
/// debuggability): the C·(K+1) unit-diagonal rows block by block, then the K
/// membership-cap rows, then the C group-size rows. W is scaled by its
/// largest entry before the solve so tolerances behave uniformly across
/// instances.
fn build_problem(
    w: &WeightGraph,
    num_groups: usize,
    alpha: usize,
    tau: usize,
) -> ConicProblem {
    let k_users = w.num_users();
    let n = k_users + 1;
    let block_sizes = vec![n; num_groups];
    let lp_dim = k_users + num_groups;

    let w_max = w
        .matrix()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let scale = if w_max > 0.0 { w_max } else { 1.0 };

    let mut cost_block = DMatrix::zeros(n, n);
    cost_block
        .view_mut((0, 0), (k_users, k_users))
        .copy_from(&(w.matrix() / scale));
    let cost = BlockVec {
        mats: vec![cost_block; num_groups],
        lin: DVector::zeros(lp_dim),
    };

    let mut constraints = Vec::with_capacity(num_groups * n + k_users + num_groups);
    let mut rhs = Vec::with_capacity(constraints.capacity());

    // diag(Z_c) = 1, block by block.
    for c in 0..num_groups {
        for d in 0..n {
            let mut a = BlockVec::zeros(&block_sizes, lp_dim);
            a.mats[c][(d, d)] = 1.0;
            constraints.push(a);
            rhs.push(1.0);
        }
    }
    // Membership cap per user: Σ_c y_kc + s_k = 2α − C. The spin y_kc lives
    // in the border of block c, picked out by symmetric half-entries.
    for k in 0..k_users {
        let mut a = BlockVec::zeros(&block_sizes, lp_dim);
        for c in 0..num_groups {
            a.mats[c][(k, k_users)] = 0.5;
            a.mats[c][(k_users, k)] = 0.5;
        }
        a.lin[k] = 1.0;
        constraints.push(a);
        rhs.push(2.0 * alpha as f64 - num_groups as f64);
    }
    // Group size cap: 1ᵀy_c + t_c = 2τ − K.
    for c in 0..num_groups {
        let mut a = BlockVec::zeros(&block_sizes, lp_dim);
        for k in 0..k_users {
            a.mats[c][(k, k_users)] = 0.5;
            a.mats[c][(k_users, k)] = 0.5;
        }
        a.lin[k_users + c] = 1.0;
        constraints.push(a);
        rhs.push(2.0 * tau as f64 - k_users as f64);
    }

    ConicProblem {
        block_sizes,
        lp_dim,
        cost,
        constraints,
        rhs: DVector::from_vec(rhs),
    }
}

/// Solves the semidefinite relaxation of the grouping problem.
///
/// Returns the per-group (Y_c, y_c) blocks and the relaxation value, which
/// upper-bounds every feasible grouping's objective. Errs with
/// [`Error::SolverNotConverged`] — carrying the best iterate — when the
/// solver cannot reach a relative duality gap of 1e-6 and constraint
/// violations below 1e-7 within `max_iter` interior-point iterations.
pub fn solve_sdr(
    w: &WeightGraph,
    num_groups: usize,
    alpha: usize,
    tau: usize,
    max_iter: usize,
) -> Result<SdrSolution> {
    if num_groups == 0 {
        return Err(Error::config("num_groups", "must be at least 1"));
    }
    // α > C is fine (the membership rows just never bind); α = 0 would force
    // the all-empty schedule and is rejected as a config error.
    if alpha == 0 {
        return Err(Error::config("max_memberships", "must be at least 1"));
    }
    if tau == 0 {
        return Err(Error::config("pilot_budget", "must be at least 1"));
    }
    let k_users = w.num_users();
    if k_users == 0 {
        return Err(Error::InvalidInstance(
            "weight graph has no users".to_string(),
        ));
    }

    let problem = build_problem(w, num_groups, alpha, tau);
    let options = ConicOptions {
        max_iter,
        ..ConicOptions::default()
    };
    let conic = conic::solve(&problem, &options);

    // Extract (Y_c, y_c) from the lifted blocks and restate the objective in
    // the original weight scale.
    let y_mats: Vec<DMatrix<f64>> = conic
        .x
        .mats
        .iter()
        .map(|z| z.view((0, 0), (k_users, k_users)).into_owned())
        .collect();
    let y_vecs: Vec<DVector<f64>> = conic
        .x
        .mats
        .iter()
        .map(|z| DVector::from_fn(k_users, |k, _| z[(k, k_users)]))
        .collect();

    let sigma_total = w.total_weight();
    let objective_value = 0.25
        * y_mats
            .iter()
            .map(|y| sigma_total - (w.matrix() * y).trace())
            .sum::<f64>();

    let mut solution = SdrSolution {
        y_mats,
        y_vecs,
        objective_value,
        stats: SolverStats {
            iterations: conic.iterations,
            rel_gap: conic.rel_gap,
            primal_residual: conic.primal_residual,
            dual_residual: conic.dual_residual,
            max_violation: 0.0,
            converged: false,
        },
    };
    // The internal solve targets tighter tolerances than the contract here,
    // so even a non-Converged status can deliver an acceptable iterate.
    let violation = solution.max_violation(alpha, tau);
    solution.stats.max_violation = violation;
    solution.stats.converged = conic.rel_gap <= GAP_TOLERANCE && violation <= VIOLATION_TOLERANCE;

    if solution.stats.converged {
        Ok(solution)
    } else {
        Err(Error::SolverNotConverged {
            iterations: conic.iterations,
            gap: conic.rel_gap,
            best: Box::new(solution),
        })
    }
}
