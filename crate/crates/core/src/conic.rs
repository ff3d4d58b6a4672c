//! Dense primal-dual interior-point solver for small conic programs.
//!
//! Solves the standard-form pair
//!
//!   min ⟨C, X⟩  s.t.  A(X) = b,  X ∈ 𝒦        (primal)
//!   max bᵀy     s.t.  Aᵀ(y) + Z = C,  Z ∈ 𝒦    (dual)
//!
//! where 𝒦 is a product of dense PSD blocks and a nonnegative orthant.
//! The implementation is an infeasible-start Mehrotra predictor-corrector
//! using the HKM search direction: the Schur complement
//! M_ij = Tr(A_i·X·A_j·Z⁻¹) (plus the diagonal orthant terms) is formed
//! densely and solved by LU with one step of iterative refinement. Problem
//! sizes here are tiny (blocks of a few dozen rows, on the order of a
//! hundred constraints), so dense factorizations per iteration are the
//! right trade-off.

use nalgebra::{DMatrix, DVector};

/// Element of the product cone: one symmetric matrix per PSD block plus the
/// orthant part.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVec {
    pub mats: Vec<DMatrix<f64>>,
    pub lin: DVector<f64>,
}

impl BlockVec {
    pub fn zeros(block_sizes: &[usize], lp_dim: usize) -> Self {
        BlockVec {
            mats: block_sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect(),
            lin: DVector::zeros(lp_dim),
        }
    }

    /// Identity in every cone component, scaled by `s` (interior for s > 0).
    pub fn scaled_identity(block_sizes: &[usize], lp_dim: usize, s: f64) -> Self {
        BlockVec {
            mats: block_sizes
                .iter()
                .map(|&n| DMatrix::identity(n, n) * s)
                .collect(),
            lin: DVector::from_element(lp_dim, s),
        }
    }

    /// Cone inner product ⟨U, V⟩ = Σ_b Tr(U_b·V_b) + u·v. Trace terms reduce
    /// to elementwise dots because the blocks are symmetric.
    pub fn inner(&self, other: &Self) -> f64 {
        let mats: f64 = self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| mat_dot(a, b))
            .sum();
        mats + self.lin.dot(&other.lin)
    }

    /// self += s·other
    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        for (a, b) in self.mats.iter_mut().zip(&other.mats) {
            *a += b * s;
        }
        self.lin.axpy(s, &other.lin, 1.0);
    }

    /// Largest absolute entry across all components.
    pub fn max_abs(&self) -> f64 {
        let mats = self
            .mats
            .iter()
            .flat_map(|m| m.iter())
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        self.lin.iter().fold(mats, |acc, v| acc.max(v.abs()))
    }

    /// Barrier degree of the cone: Σ block sizes + orthant dimension.
    pub fn barrier_degree(&self) -> f64 {
        (self.mats.iter().map(|m| m.nrows()).sum::<usize>() + self.lin.len()) as f64
    }
}

fn mat_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x * y)
        .sum()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Conic program data. Constraint matrices must have symmetric PSD-block
/// components.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    pub block_sizes: Vec<usize>,
    pub lp_dim: usize,
    pub cost: BlockVec,
    pub constraints: Vec<BlockVec>,
    pub rhs: DVector<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct ConicOptions {
    pub max_iter: usize,
    /// Target relative primal/dual residual.
    pub tol_feas: f64,
    /// Target relative duality gap.
    pub tol_gap: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for ConicOptions {
    fn default() -> Self {
        ConicOptions {
            max_iter: 200,
            tol_feas: 1e-9,
            tol_gap: 1e-9,
            step_fraction: 0.98,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConicStatus {
    /// All tolerances met.
    Converged,
    /// Iteration cap reached; the best iterate is returned.
    IterationLimit,
    /// No further numerical progress was possible (singular Schur system or
    /// vanishing steps); the best iterate is returned.
    NumericalStall,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub x: BlockVec,
    pub y: DVector<f64>,
    pub z: BlockVec,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// |pobj − dobj| / (1 + |pobj| + |dobj|)
    pub rel_gap: f64,
    /// ‖b − A(X)‖_∞ (absolute).
    pub primal_residual: f64,
    /// max entry of |C − Z − Aᵀy| (absolute).
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: ConicStatus,
}

fn apply_a(problem: &ConicProblem, x: &BlockVec) -> DVector<f64> {
    DVector::from_fn(problem.constraints.len(), |i, _| {
        problem.constraints[i].inner(x)
    })
}

fn apply_a_transpose(problem: &ConicProblem, y: &DVector<f64>) -> BlockVec {
    let mut out = BlockVec::zeros(&problem.block_sizes, problem.lp_dim);
    for (i, a) in problem.constraints.iter().enumerate() {
        out.add_scaled(a, y[i]);
    }
    out
}

/// Largest step α so that V + α·ΔV stays in the cone, via the minimum
/// eigenvalue of L⁻¹·ΔV·L⁻ᵀ per PSD block (V = L·Lᵀ) and ratio tests on the
/// orthant.
fn step_to_boundary(v: &BlockVec, dv: &BlockVec) -> f64 {
    let mut alpha = f64::INFINITY;
    for (vb, dvb) in v.mats.iter().zip(&dv.mats) {
        if vb.nrows() == 0 {
            continue;
        }
        let chol = nalgebra::Cholesky::new(vb.clone())
            .expect("iterate must stay inside the PSD cone");
        let l = chol.l();
        let p = l
            .solve_lower_triangular(dvb)
            .expect("cholesky factor is nonsingular");
        let s = l
            .solve_lower_triangular(&p.transpose())
            .expect("cholesky factor is nonsingular");
        let lambda_min = sym(&s)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if lambda_min < 0.0 {
            alpha = alpha.min(-1.0 / lambda_min);
        }
    }
    for (xv, dxv) in v.lin.iter().zip(dv.lin.iter()) {
        if *dxv < 0.0 {
            alpha = alpha.min(-xv / dxv);
        }
    }
    alpha
}

/// Checks strict cone interiority (Cholesky succeeds, orthant strictly
/// positive).
fn is_interior(v: &BlockVec) -> bool {
    v.lin.iter().all(|&x| x > 0.0)
        && v.mats
            .iter()
            .all(|m| m.nrows() == 0 || nalgebra::Cholesky::new(m.clone()).is_some())
}

struct Residuals {
    r_p: DVector<f64>,
    r_d: BlockVec,
    rel_p: f64,
    rel_d: f64,
    rel_gap: f64,
    pobj: f64,
    dobj: f64,
}

fn residuals(problem: &ConicProblem, x: &BlockVec, y: &DVector<f64>, z: &BlockVec) -> Residuals {
    let r_p = &problem.rhs - apply_a(problem, x);
    let mut r_d = problem.cost.clone();
    r_d.add_scaled(z, -1.0);
    r_d.add_scaled(&apply_a_transpose(problem, y), -1.0);
    let pobj = problem.cost.inner(x);
    let dobj = problem.rhs.dot(y);
    Residuals {
        rel_p: r_p.amax() / (1.0 + problem.rhs.amax()),
        rel_d: r_d.max_abs() / (1.0 + problem.cost.max_abs()),
        rel_gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
        r_p,
        r_d,
        pobj,
        dobj,
    }
}

/// Solves the conic program. Always returns the best iterate observed (by
/// worst-case relative residual); `status` reports whether the tolerances
/// were met.
pub fn solve(problem: &ConicProblem, options: &ConicOptions) -> ConicSolution {
    let m = problem.constraints.len();
    let nu = problem.cost.barrier_degree().max(1.0);

    let tau_p = problem.rhs.amax().max(10.0);
    let tau_d = problem.cost.max_abs().max(10.0);
    let mut x = BlockVec::scaled_identity(&problem.block_sizes, problem.lp_dim, tau_p);
    let mut z = BlockVec::scaled_identity(&problem.block_sizes, problem.lp_dim, tau_d);
    let mut y = DVector::zeros(m);

    let snapshot = |x: &BlockVec,
                    y: &DVector<f64>,
                    z: &BlockVec,
                    res: &Residuals,
                    iterations: usize,
                    status: ConicStatus| ConicSolution {
        x: x.clone(),
        y: y.clone(),
        z: z.clone(),
        primal_objective: res.pobj,
        dual_objective: res.dobj,
        rel_gap: res.rel_gap,
        primal_residual: res.r_p.amax(),
        dual_residual: res.r_d.max_abs(),
        iterations,
        status,
    };

    let mut best: Option<(f64, ConicSolution)> = None;
    let mut stall_count = 0usize;
    let mut stalled = false;
    let mut iters_done = 0usize;

    for iter in 0..options.max_iter {
        iters_done = iter;
        let res = residuals(problem, &x, &y, &z);
        let score = res.rel_p.max(res.rel_d).max(res.rel_gap);
        if !score.is_finite() {
            stalled = true;
            break;
        }
        let improved = best.as_ref().is_none_or(|(s, _)| score < *s);
        if improved {
            best = Some((score, snapshot(&x, &y, &z, &res, iter, ConicStatus::NumericalStall)));
            stall_count = 0;
        } else {
            stall_count += 1;
        }
        if res.rel_p <= options.tol_feas
            && res.rel_d <= options.tol_feas
            && res.rel_gap <= options.tol_gap
        {
            return snapshot(&x, &y, &z, &res, iter, ConicStatus::Converged);
        }
        if stall_count > 15 {
            stalled = true;
            break;
        }

        let mu = x.inner(&z) / nu;
        if !(mu.is_finite() && mu > 0.0) {
            stalled = true;
            break;
        }

        // Inverses of Z per block (via Cholesky) and elementwise for the
        // orthant.
        let z_chols: Vec<_> = match z
            .mats
            .iter()
            .map(|m| nalgebra::Cholesky::new(m.clone()))
            .collect::<Option<Vec<_>>>()
        {
            Some(c) => c,
            None => {
                stalled = true;
                break;
            }
        };
        let z_invs: Vec<DMatrix<f64>> = z_chols.iter().map(|c| c.inverse()).collect();

        // Schur complement M_ij = Σ_b Tr(A_i·X·A_j·Z⁻¹) + Σ_l a_il·a_jl·x_l/z_l.
        let mut schur = DMatrix::zeros(m, m);
        for j in 0..m {
            let aj = &problem.constraints[j];
            let t_blocks: Vec<DMatrix<f64>> = x
                .mats
                .iter()
                .zip(&aj.mats)
                .zip(&z_invs)
                .map(|((xb, ab), zb)| xb * ab * zb)
                .collect();
            let t_lin = DVector::from_fn(problem.lp_dim, |l, _| {
                aj.lin[l] * x.lin[l] / z.lin[l]
            });
            for i in 0..m {
                let ai = &problem.constraints[i];
                let mats: f64 = ai
                    .mats
                    .iter()
                    .zip(&t_blocks)
                    .map(|(a, t)| mat_dot(a, t))
                    .sum();
                schur[(i, j)] = mats + ai.lin.dot(&t_lin);
            }
        }
        let lu = schur.clone().lu();

        let solve_schur = |rhs: &DVector<f64>| -> Option<DVector<f64>> {
            let mut sol = lu.solve(rhs).or_else(|| {
                schur.clone().full_piv_lu().solve(rhs)
            })?;
            // One round of iterative refinement keeps the tight feasibility
            // targets reachable once the system grows ill-conditioned near
            // the optimum.
            let correction = rhs - &schur * &sol;
            if let Some(update) = lu.solve(&correction) {
                sol += update;
            }
            sol.iter().all(|v| v.is_finite()).then_some(sol)
        };

        // Given a complementarity target R_c, assemble the reduced rhs,
        // solve for Δy, and back-substitute ΔZ and ΔX.
        let direction = |r_c: &BlockVec| -> Option<(BlockVec, DVector<f64>, BlockVec)> {
            let mut g = r_c.clone();
            for ((gb, xb), (rdb, zb)) in g
                .mats
                .iter_mut()
                .zip(&x.mats)
                .zip(res.r_d.mats.iter().zip(&z_invs))
            {
                *gb -= xb * rdb * zb;
            }
            for l in 0..problem.lp_dim {
                g.lin[l] -= x.lin[l] * res.r_d.lin[l] / z.lin[l];
            }
            let rhs = &res.r_p - apply_a(problem, &g);
            let dy = solve_schur(&rhs)?;
            let mut dz = res.r_d.clone();
            dz.add_scaled(&apply_a_transpose(problem, &dy), -1.0);
            let mut dx = r_c.clone();
            for ((dxb, xb), (dzb, zb)) in dx
                .mats
                .iter_mut()
                .zip(&x.mats)
                .zip(dz.mats.iter().zip(&z_invs))
            {
                *dxb -= xb * dzb * zb;
                *dxb = sym(dxb);
            }
            for l in 0..problem.lp_dim {
                dx.lin[l] -= x.lin[l] * dz.lin[l] / z.lin[l];
            }
            Some((dx, dy, dz))
        };

        // Predictor: pure affine direction (σ = 0).
        let mut r_c_aff = BlockVec::zeros(&problem.block_sizes, problem.lp_dim);
        r_c_aff.add_scaled(&x, -1.0);
        let Some((dx_aff, _dy_aff, dz_aff)) = direction(&r_c_aff) else {
            stalled = true;
            break;
        };
        let alpha_p_aff = step_to_boundary(&x, &dx_aff).min(1.0);
        let alpha_d_aff = step_to_boundary(&z, &dz_aff).min(1.0);

        let mut x_aff = x.clone();
        x_aff.add_scaled(&dx_aff, alpha_p_aff);
        let mut z_aff = z.clone();
        z_aff.add_scaled(&dz_aff, alpha_d_aff);
        let mu_aff = (x_aff.inner(&z_aff) / nu).max(0.0);
        let sigma = (mu_aff / mu).powi(3).clamp(1e-12, 1.0);

        // Corrector: recentre to σμ and absorb the second-order term
        // ΔX_aff·ΔZ_aff·Z⁻¹.
        let mut r_c = BlockVec::zeros(&problem.block_sizes, problem.lp_dim);
        for (((rb, xb), zb), (dxb, dzb)) in r_c
            .mats
            .iter_mut()
            .zip(&x.mats)
            .zip(&z_invs)
            .zip(dx_aff.mats.iter().zip(&dz_aff.mats))
        {
            *rb = zb * (sigma * mu) - xb - dxb * dzb * zb;
        }
        for l in 0..problem.lp_dim {
            r_c.lin[l] = sigma * mu / z.lin[l]
                - x.lin[l]
                - dx_aff.lin[l] * dz_aff.lin[l] / z.lin[l];
        }
        let Some((dx, dy, dz)) = direction(&r_c) else {
            stalled = true;
            break;
        };

        let mut alpha_p = (options.step_fraction * step_to_boundary(&x, &dx)).min(1.0);
        let mut alpha_d = (options.step_fraction * step_to_boundary(&z, &dz)).min(1.0);

        // Numerical safety: back off until the updated iterate is strictly
        // interior (rounding can push a 0.98 step across the boundary).
        let mut accepted = false;
        for _ in 0..12 {
            let mut x_new = x.clone();
            x_new.add_scaled(&dx, alpha_p);
            let mut z_new = z.clone();
            z_new.add_scaled(&dz, alpha_d);
            if is_interior(&x_new) && is_interior(&z_new) {
                x = x_new;
                z = z_new;
                y += &dy * alpha_d;
                accepted = true;
                break;
            }
            alpha_p *= 0.8;
            alpha_d *= 0.8;
        }
        if !accepted {
            stalled = true;
            break;
        }
        iters_done = iter + 1;
    }

    // Tolerances not met: report the best iterate observed, labelled by how
    // the loop ended (cap exhausted vs. numerical stall).
    let status = if stalled {
        ConicStatus::NumericalStall
    } else {
        ConicStatus::IterationLimit
    };
    let res = residuals(problem, &x, &y, &z);
    let score = res.rel_p.max(res.rel_d).max(res.rel_gap);
    let final_snapshot = snapshot(&x, &y, &z, &res, iters_done, status);
    let mut out = match best {
        Some((best_score, best_sol)) if best_score < score && score.is_finite() => best_sol,
        Some((_, best_sol)) if !score.is_finite() => best_sol,
        _ => final_snapshot,
    };
    out.status = status;
    out.iterations = iters_done;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp_only(c: &[f64], a_rows: &[&[f64]], b: &[f64]) -> ConicProblem {
        ConicProblem {
            block_sizes: vec![],
            lp_dim: c.len(),
            cost: BlockVec {
                mats: vec![],
                lin: DVector::from_row_slice(c),
            },
            constraints: a_rows
                .iter()
                .map(|row| BlockVec {
                    mats: vec![],
                    lin: DVector::from_row_slice(row),
                })
                .collect(),
            rhs: DVector::from_row_slice(b),
        }
    }

    #[test]
    fn solves_a_two_variable_lp() {
        // min x₁ + 2x₂ s.t. x₁ + x₂ = 1, x ≥ 0 → optimum 1 at (1, 0).
        let p = lp_only(&[1.0, 2.0], &[&[1.0, 1.0]], &[1.0]);
        let sol = solve(&p, &ConicOptions::default());
        assert_eq!(sol.status, ConicStatus::Converged);
        assert!((sol.primal_objective - 1.0).abs() < 1e-7);
        assert!((sol.x.lin[0] - 1.0).abs() < 1e-6);
        assert!(sol.x.lin[1].abs() < 1e-6);
        assert!(sol.rel_gap < 1e-8);
    }

    #[test]
    fn solves_min_eigenvalue_sdp() {
        // min Tr(C·X) s.t. Tr(X) = 1, X ⪰ 0 has optimum λ_min(C).
        let c = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 1.5]);
        let lambda_min = c
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let p = ConicProblem {
            block_sizes: vec![3],
            lp_dim: 0,
            cost: BlockVec {
                mats: vec![c],
                lin: DVector::zeros(0),
            },
            constraints: vec![BlockVec {
                mats: vec![DMatrix::identity(3, 3)],
                lin: DVector::zeros(0),
            }],
            rhs: DVector::from_row_slice(&[1.0]),
        };
        let sol = solve(&p, &ConicOptions::default());
        assert_eq!(sol.status, ConicStatus::Converged);
        assert!(
            (sol.primal_objective - lambda_min).abs() < 1e-7,
            "objective {} vs λ_min {}",
            sol.primal_objective,
            lambda_min
        );
    }

    #[test]
    fn solves_a_mixed_sdp_with_slack() {
        // min −X₀₀ s.t. Tr(X) + s = 1, X ⪰ 0, s ≥ 0 → X = e₁e₁ᵀ, optimum −1.
        let mut cost_mat = DMatrix::zeros(2, 2);
        cost_mat[(0, 0)] = -1.0;
        let p = ConicProblem {
            block_sizes: vec![2],
            lp_dim: 1,
            cost: BlockVec {
                mats: vec![cost_mat],
                lin: DVector::zeros(1),
            },
            constraints: vec![BlockVec {
                mats: vec![DMatrix::identity(2, 2)],
                lin: DVector::from_row_slice(&[1.0]),
            }],
            rhs: DVector::from_row_slice(&[1.0]),
        };
        let sol = solve(&p, &ConicOptions::default());
        assert_eq!(sol.status, ConicStatus::Converged);
        assert!((sol.primal_objective + 1.0).abs() < 1e-7);
        assert!(sol.primal_residual < 1e-8);
        assert!(sol.dual_residual < 1e-8);
    }

    #[test]
    fn reports_residuals_consistently() {
        let p = lp_only(&[1.0, 1.0, 1.0], &[&[1.0, 2.0, 0.0], &[0.0, 1.0, 3.0]], &[2.0, 3.0]);
        let sol = solve(&p, &ConicOptions::default());
        assert_eq!(sol.status, ConicStatus::Converged);
        // Recompute residuals from the returned triplet.
        let ax = apply_a(&p, &sol.x);
        let r_p = (&p.rhs - ax).amax();
        assert!((r_p - sol.primal_residual).abs() < 1e-12);
        assert!(sol.rel_gap <= 1e-8);
    }

    #[test]
    fn iteration_cap_returns_best_iterate_without_panicking() {
        let p = lp_only(&[1.0, 2.0], &[&[1.0, 1.0]], &[1.0]);
        let sol = solve(
            &p,
            &ConicOptions {
                max_iter: 1,
                ..ConicOptions::default()
            },
        );
        assert_ne!(sol.status, ConicStatus::Converged);
        assert!(sol.x.lin.iter().all(|v| *v > 0.0));
    }
}
