//! User grouping on the spatial-correlation graph.
//!
//! Users are grouped so that strongly correlated pairs (large
//! w_kj = Σ_m β_mk·β_mj) end up in *different* groups. The combinatorial
//! objective rewards, per group, the total weight between the group's members
//! and everyone outside it:
//!
//!   F(x) = Σ_c Σ_k Σ_{j≠k} w_kj·(1 − x_kc)·x_jc,
//!
//! subject to at most α memberships per user and at most τ users per group.
//! Mapping memberships to spins y = 2x − 1 turns F into
//! ¼·Σ_c (ς − y_cᵀ·W·y_c) with ς = 1ᵀW1, which is the form relaxed by the
//! semidefinite solver in [`sdr`]. This module owns the exact/heuristic
//! machinery: the weight graph, both objective forms, the spin transform,
//! a greedy baseline, exhaustive search for small instances, feasibility
//! repair, and the randomized rounding that extracts groupings from the
//! relaxation.

pub mod sdr;

pub use sdr::{solve_sdr, SdrSolution, SolverStats};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::RoundingNorm;
use crate::error::{Error, Result};
use crate::seed;
use crate::topology::BetaMatrix;

/// Largest assignment space (C+1)^K the exhaustive search accepts.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

/// Symmetric, nonnegative, zero-diagonal matrix of pairwise large-scale
/// correlations between users.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightGraph {
    w: DMatrix<f64>,
}

impl WeightGraph {
    /// Wraps an explicit weight matrix, validating the graph invariants.
    pub fn from_matrix(w: DMatrix<f64>) -> Result<Self> {
        if w.nrows() != w.ncols() {
            return Err(Error::InvalidInstance(format!(
                "weight matrix must be square, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
        for k in 0..w.nrows() {
            if w[(k, k)] != 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "weight matrix diagonal must be zero, found {} at ({k},{k})",
                    w[(k, k)]
                )));
            }
            for j in 0..k {
                let (a, b) = (w[(k, j)], w[(j, k)]);
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "weights must be finite and nonnegative, found {a} at ({k},{j})"
                    )));
                }
                let tol = 1e-9 * (1.0 + a.abs().max(b.abs()));
                if (a - b).abs() > tol {
                    return Err(Error::InvalidInstance(format!(
                        "weight matrix must be symmetric, found {a} at ({k},{j}) vs {b} at ({j},{k})"
                    )));
                }
            }
        }
        Ok(WeightGraph { w })
    }

    pub fn num_users(&self) -> usize {
        self.w.nrows()
    }

    pub fn weight(&self, k: usize, j: usize) -> f64 {
        self.w[(k, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Total weight ς = 1ᵀW1 (every ordered pair counted).
    pub fn total_weight(&self) -> f64 {
        self.w.sum()
    }

    /// Weighted degree d_k = Σ_j w_kj of one user.
    pub fn degree(&self, k: usize) -> f64 {
        self.w.row(k).sum()
    }
}

/// Builds the spatial-correlation graph from large-scale fading: one node per
/// user, edge weight w_kj = Σ_m β_mk·β_mj, zero diagonal.
pub fn build_weight_graph(beta: &BetaMatrix) -> WeightGraph {
    let k_users = beta.ncols();
    let mut w = DMatrix::zeros(k_users, k_users);
    for k in 0..k_users {
        for j in (k + 1)..k_users {
            let value = crate::channel::pair_correlation(beta, k, j);
            w[(k, j)] = value;
            w[(j, k)] = value;
        }
    }
    WeightGraph { w }
}

/// Binary user-to-group assignment: `x[k][c]` says whether user `k` belongs
/// to group `c`. Users may be in several groups or in none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    num_users: usize,
    num_groups: usize,
    // Flattened K×C membership matrix, row-major by user.
    x: Vec<bool>,
}

impl Grouping {
    pub fn empty(num_users: usize, num_groups: usize) -> Self {
        Grouping {
            num_users,
            num_groups,
            x: vec![false; num_users * num_groups],
        }
    }

    /// Builds a grouping from explicit (user, group) memberships.
    pub fn from_members(
        num_users: usize,
        num_groups: usize,
        members: &[(usize, usize)],
    ) -> Result<Self> {
        let mut g = Grouping::empty(num_users, num_groups);
        for &(k, c) in members {
            if k >= num_users || c >= num_groups {
                return Err(Error::InvalidInstance(format!(
                    "membership ({k},{c}) outside a {num_users}-user, {num_groups}-group instance"
                )));
            }
            g.insert(k, c);
        }
        Ok(g)
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn contains(&self, k: usize, c: usize) -> bool {
        self.x[k * self.num_groups + c]
    }

    pub fn insert(&mut self, k: usize, c: usize) {
        self.x[k * self.num_groups + c] = true;
    }

    pub fn remove(&mut self, k: usize, c: usize) {
        self.x[k * self.num_groups + c] = false;
    }

    /// Members of group `c` in ascending user order.
    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.num_users).filter(|&k| self.contains(k, c)).collect()
    }

    pub fn group_size(&self, c: usize) -> usize {
        (0..self.num_users).filter(|&k| self.contains(k, c)).count()
    }

    /// Number of groups user `k` belongs to.
    pub fn memberships(&self, k: usize) -> usize {
        (0..self.num_groups).filter(|&c| self.contains(k, c)).count()
    }

    /// Users that belong to no group.
    pub fn unscheduled(&self) -> Vec<usize> {
        (0..self.num_users)
            .filter(|&k| self.memberships(k) == 0)
            .collect()
    }

    /// Checks the capacity constraints: every user in at most `alpha` groups,
    /// every group with at most `tau` members.
    pub fn is_feasible(&self, alpha: usize, tau: usize) -> bool {
        (0..self.num_users).all(|k| self.memberships(k) <= alpha)
            && (0..self.num_groups).all(|c| self.group_size(c) <= tau)
    }
}

/// Grouping objective in binary form: Σ_c Σ_k Σ_{j≠k} w_kj·(1−x_kc)·x_jc.
pub fn objective_binary(x: &Grouping, w: &WeightGraph) -> f64 {
    assert_eq!(
        x.num_users(),
        w.num_users(),
        "grouping and weight graph disagree on the number of users"
    );
    let k_users = x.num_users();
    let mut total = 0.0;
    for c in 0..x.num_groups() {
        for k in 0..k_users {
            if x.contains(k, c) {
                continue; // (1 − x_kc) = 0
            }
            for j in 0..k_users {
                if j != k && x.contains(j, c) {
                    total += w.weight(k, j);
                }
            }
        }
    }
    total
}

/// Grouping objective in spin form: ¼·Σ_c (ς − y_cᵀ·W·y_c), ς = 1ᵀW1.
///
/// Equals [`objective_binary`] exactly on spin vectors obtained via
/// [`to_spin`].
pub fn spin_objective(spins: &[DVector<f64>], w: &WeightGraph) -> f64 {
    let sigma = w.total_weight();
    spins
        .iter()
        .map(|y| 0.25 * (sigma - (w.matrix() * y).dot(y)))
        .sum()
}

/// Maps memberships to spins: y_kc = 2·x_kc − 1 (±1 entries).
pub fn to_spin(x: &Grouping) -> Vec<DVector<f64>> {
    (0..x.num_groups())
        .map(|c| {
            DVector::from_fn(x.num_users(), |k, _| if x.contains(k, c) { 1.0 } else { -1.0 })
        })
        .collect()
}

/// Inverse of [`to_spin`]: strictly positive entries are memberships.
///
/// Bijective with [`to_spin`] on exact ±1 vectors; intermediate values (as
/// produced by relaxations) are thresholded at zero.
pub fn from_spin(spins: &[DVector<f64>]) -> Grouping {
    let num_groups = spins.len();
    let num_users = spins.first().map_or(0, DVector::len);
    let mut g = Grouping::empty(num_users, num_groups);
    for (c, y) in spins.iter().enumerate() {
        assert_eq!(y.len(), num_users, "spin vectors must share one length");
        for k in 0..num_users {
            if y[k] > 0.0 {
                g.insert(k, c);
            }
        }
    }
    g
}

/// Objective change from adding user `k` to group `c` (k must not be a
/// member): d_k − 2·Σ_{j∈Γ(c)} w_kj.
fn delta_add(x: &Grouping, w: &WeightGraph, k: usize, c: usize) -> f64 {
    debug_assert!(!x.contains(k, c));
    w.degree(k) - 2.0 * intra_weight(x, w, k, c)
}

/// Objective change from removing member `k` from group `c`:
/// 2·Σ_{j∈Γ(c)\{k}} w_kj − d_k.
fn delta_remove(x: &Grouping, w: &WeightGraph, k: usize, c: usize) -> f64 {
    debug_assert!(x.contains(k, c));
    2.0 * intra_weight(x, w, k, c) - w.degree(k)
}

/// Total weight between user `k` and the members of group `c` (excluding `k`
/// itself).
fn intra_weight(x: &Grouping, w: &WeightGraph, k: usize, c: usize) -> f64 {
    (0..x.num_users())
        .filter(|&j| j != k && x.contains(j, c))
        .map(|j| w.weight(k, j))
        .sum()
}

/// Greedy baseline grouping.
///
/// Users are visited in order of decreasing weighted degree (ties toward the
/// lower index). Each user receives up to `alpha` memberships, one at a time:
/// among groups that are not full and do not already contain the user, the
/// group with the least added intra-group weight is chosen (ties toward the
/// lower group index), and the membership is kept only while it strictly
/// increases the objective.
pub fn greedy_grouping(w: &WeightGraph, num_groups: usize, alpha: usize, tau: usize) -> Grouping {
    let k_users = w.num_users();
    let mut order: Vec<usize> = (0..k_users).collect();
    order.sort_by(|&a, &b| {
        w.degree(b)
            .partial_cmp(&w.degree(a))
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut x = Grouping::empty(k_users, num_groups);
    for &k in &order {
        for _ in 0..alpha {
            let candidate = (0..num_groups)
                .filter(|&c| !x.contains(k, c) && x.group_size(c) < tau)
                .min_by(|&a, &b| {
                    intra_weight(&x, w, k, a)
                        .partial_cmp(&intra_weight(&x, w, k, b))
                        .unwrap()
                        .then(a.cmp(&b))
                });
            let Some(c) = candidate else { break };
            if delta_add(&x, w, k, c) > 0.0 {
                x.insert(k, c);
            } else {
                break;
            }
        }
    }
    x
}

/// Exhaustive optimum over single-membership assignments (every user joins
/// exactly one group or none), subject to the group-size cap `tau`.
///
/// Enumerates all (C+1)^K assignments depth-first (per user: unassigned
/// first, then groups in ascending order; the first assignment achieving the
/// best value is kept). Instances with (C+1)^K > [`BRUTE_FORCE_LIMIT`] are
/// rejected with [`Error::InstanceTooLarge`].
pub fn brute_force_optimum(
    w: &WeightGraph,
    num_groups: usize,
    tau: usize,
) -> Result<(Grouping, f64)> {
    let k_users = w.num_users();
    let search_space = ((num_groups + 1) as f64).powi(k_users as i32);
    if search_space > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge {
            search_space,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    struct Dfs<'a> {
        w: &'a WeightGraph,
        tau: usize,
        current: Grouping,
        best: Grouping,
        best_value: f64,
    }

    impl Dfs<'_> {
        fn recurse(&mut self, k: usize, value: f64) {
            if k == self.current.num_users() {
                if value > self.best_value {
                    self.best_value = value;
                    self.best = self.current.clone();
                }
                return;
            }
            // Unassigned.
            self.recurse(k + 1, value);
            for c in 0..self.current.num_groups() {
                if self.current.group_size(c) >= self.tau {
                    continue;
                }
                let delta = delta_add(&self.current, self.w, k, c);
                self.current.insert(k, c);
                self.recurse(k + 1, value + delta);
                self.current.remove(k, c);
            }
        }
    }

    let mut dfs = Dfs {
        w,
        tau,
        current: Grouping::empty(k_users, num_groups),
        best: Grouping::empty(k_users, num_groups),
        best_value: 0.0,
    };
    dfs.recurse(0, 0.0);
    // Re-evaluate the winner from scratch so the reported value is free of
    // accumulated increment error.
    let value = objective_binary(&dfs.best, w);
    Ok((dfs.best, value))
}

/// Repairs a candidate spin assignment into a feasible grouping.
///
/// First, while some user exceeds `alpha` memberships (lowest user index
/// first), the membership whose removal increases the objective the most is
/// dropped (ties toward the lower group index). Then, while some group
/// exceeds `tau` members (lowest group index first), the member with the
/// largest intra-group weight sum is evicted (ties toward the lower user
/// index). Each step removes one membership, so the procedure terminates in
/// at most K·C steps.
pub fn repair_feasibility(
    candidate: &[DVector<f64>],
    w: &WeightGraph,
    alpha: usize,
    tau: usize,
) -> Grouping {
    let mut x = from_spin(candidate);
    repair_grouping(&mut x, w, alpha, tau);
    x
}

fn repair_grouping(x: &mut Grouping, w: &WeightGraph, alpha: usize, tau: usize) {
    // Membership cap per user.
    for k in 0..x.num_users() {
        while x.memberships(k) > alpha {
            let c = (0..x.num_groups())
                .filter(|&c| x.contains(k, c))
                .max_by(|&a, &b| {
                    delta_remove(x, w, k, a)
                        .partial_cmp(&delta_remove(x, w, k, b))
                        .unwrap()
                        .then(b.cmp(&a)) // ties toward the lower group index
                })
                .expect("user with memberships > alpha has at least one group");
            x.remove(k, c);
        }
    }
    // Size cap per group.
    for c in 0..x.num_groups() {
        while x.group_size(c) > tau {
            let k = x
                .members(c)
                .into_iter()
                .max_by(|&a, &b| {
                    intra_weight(x, w, a, c)
                        .partial_cmp(&intra_weight(x, w, b, c))
                        .unwrap()
                        .then(b.cmp(&a)) // ties toward the lower user index
                })
                .expect("group with size > tau has members");
            x.remove(k, c);
        }
    }
}

/// Extracts a feasible grouping from an SDR solution by Gaussian randomized
/// rounding.
///
/// One correlated normal vector ξ_c ~ N(0, Y_c) is drawn per group, scaled
/// per `norm` (divide by the sum of its entries, then clamp to [−1, 1]; or
/// clamp only), and used as a two-point distribution: candidate spins take
/// value +1 with probability (1 + ξ̃_kc)/2. `num_samples` candidates are
/// drawn from independent substreams, each repaired to feasibility, and the
/// best objective wins (ties toward the lowest sample index), so the result
/// does not depend on evaluation order.
pub fn gaussian_round(
    sol: &SdrSolution,
    w: &WeightGraph,
    alpha: usize,
    tau: usize,
    num_samples: usize,
    norm: RoundingNorm,
    rng: &mut impl Rng,
) -> Grouping {
    assert!(num_samples > 0, "at least one rounding sample is required");
    let k_users = w.num_users();

    // Factor each covariance once: Y_c = U·Λ·Uᵀ with small negative
    // eigenvalues (numerical noise) clamped to zero.
    let factors: Vec<DMatrix<f64>> = sol
        .y_mats
        .iter()
        .map(|y| {
            let eig = y.clone().symmetric_eigen();
            let sqrt_vals = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
            &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals)
        })
        .collect();

    // One ξ_c per group, drawn from the caller's stream.
    let tilde: Vec<DVector<f64>> = factors
        .iter()
        .map(|l| {
            let z = DVector::from_fn(k_users, |_, _| rng.sample::<f64, _>(StandardNormal));
            let xi = l * z;
            let scaled = match norm {
                RoundingNorm::SumNormalize => {
                    let sum: f64 = xi.iter().sum();
                    // A zero-sum draw cannot be normalized; fall through to
                    // the clamp with the raw sample.
                    if sum != 0.0 {
                        xi / sum
                    } else {
                        xi
                    }
                }
                RoundingNorm::ClampOnly => xi,
            };
            scaled.map(|v| v.clamp(-1.0, 1.0))
        })
        .collect();

    // Candidate samples come from substreams derived off one base seed, so
    // any parallel schedule would see identical draws per sample index.
    let base_seed: u64 = rng.gen();
    let mut best: Option<(f64, Grouping)> = None;
    for sample in 0..num_samples {
        let mut sample_rng = seed::stream(base_seed, sample as u64, "rounding-sample", &[]);
        let spins: Vec<DVector<f64>> = tilde
            .iter()
            .map(|xi| {
                DVector::from_fn(k_users, |k, _| {
                    let p_plus = 0.5 * (1.0 + xi[k]);
                    if sample_rng.gen::<f64>() < p_plus {
                        1.0
                    } else {
                        -1.0
                    }
                })
            })
            .collect();
        let grouping = repair_feasibility(&spins, w, alpha, tau);
        let value = objective_binary(&grouping, w);
        let better = match &best {
            None => true,
            Some((best_value, _)) => value > *best_value,
        };
        if better {
            best = Some((value, grouping));
        }
    }
    best.expect("num_samples > 0 guarantees a candidate").1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{self, stage};
    use proptest::prelude::*;
    use rand::Rng;

    fn random_graph(k_users: usize, seed_tag: u64) -> WeightGraph {
        let mut rng = seed::stream(seed_tag, 0, "test-graph", &[]);
        let mut w = DMatrix::zeros(k_users, k_users);
        for k in 0..k_users {
            for j in (k + 1)..k_users {
                let v = rng.gen::<f64>();
                w[(k, j)] = v;
                w[(j, k)] = v;
            }
        }
        WeightGraph::from_matrix(w).unwrap()
    }

    fn random_grouping(k_users: usize, num_groups: usize, seed_tag: u64) -> Grouping {
        let mut rng = seed::stream(seed_tag, 1, "test-grouping", &[]);
        let mut x = Grouping::empty(k_users, num_groups);
        for k in 0..k_users {
            for c in 0..num_groups {
                if rng.gen::<bool>() {
                    x.insert(k, c);
                }
            }
        }
        x
    }

    fn two_user_graph(weight: f64) -> WeightGraph {
        WeightGraph::from_matrix(DMatrix::from_row_slice(2, 2, &[0.0, weight, weight, 0.0]))
            .unwrap()
    }

    #[test]
    fn weight_graph_from_beta_matches_pair_correlation() {
        let beta = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let w = build_weight_graph(&beta);
        assert_eq!(w.weight(0, 1), 3.0);
        assert_eq!(w.weight(1, 0), 3.0);
        assert_eq!(w.weight(0, 0), 0.0);

        let disjoint = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(build_weight_graph(&disjoint).weight(0, 1), 0.0);
    }

    #[test]
    fn invalid_weight_matrices_are_rejected() {
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(WeightGraph::from_matrix(asym).is_err());
        let diag = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 0.0]);
        assert!(WeightGraph::from_matrix(diag).is_err());
        let negative = DMatrix::from_row_slice(2, 2, &[0.0, -0.5, -0.5, 0.0]);
        assert!(WeightGraph::from_matrix(negative).is_err());
        let rect = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        assert!(WeightGraph::from_matrix(rect).is_err());
    }

    #[test]
    fn objective_hand_enumeration_two_users() {
        let w = two_user_graph(0.7);
        // Both users in the single group: every (1 − x) factor vanishes.
        let both = Grouping::from_members(2, 1, &[(0, 0), (1, 0)]).unwrap();
        assert_eq!(objective_binary(&both, &w), 0.0);
        // One member: the outsider contributes w once.
        let one = Grouping::from_members(2, 1, &[(0, 0)]).unwrap();
        assert_eq!(objective_binary(&one, &w), 0.7);
        // Split across two groups: w from each group's outsider.
        let split = Grouping::from_members(2, 2, &[(0, 0), (1, 1)]).unwrap();
        assert_eq!(objective_binary(&split, &w), 1.4);
        // Empty grouping scores zero.
        let empty = Grouping::empty(2, 2);
        assert_eq!(objective_binary(&empty, &w), 0.0);
    }

    #[test]
    fn zero_weights_make_every_grouping_equal() {
        let w = WeightGraph::from_matrix(DMatrix::zeros(4, 4)).unwrap();
        for tag in 0..5 {
            let x = random_grouping(4, 3, tag);
            assert_eq!(objective_binary(&x, &w), 0.0);
        }
    }

    #[test]
    fn spin_transform_identity_on_random_instances() {
        let mut rng = seed::stream(20, 0, "transform", &[]);
        for trial in 0..100 {
            let k_users = rng.gen_range(1..=12);
            let num_groups = rng.gen_range(1..=5);
            let w = random_graph(k_users, 100 + trial);
            let x = random_grouping(k_users, num_groups, 200 + trial);
            let binary = objective_binary(&x, &w);
            let spin = spin_objective(&to_spin(&x), &w);
            let tol = 1e-9 * (1.0 + binary.abs());
            assert!(
                (binary - spin).abs() <= tol,
                "trial {trial}: binary {binary} vs spin {spin}"
            );
        }
    }

    #[test]
    fn spin_constraints_mirror_binary_constraints() {
        // Σ_c y_kc = 2·memberships(k) − C and 1ᵀy_c = 2·|Γ(c)| − K, so the
        // spin-space caps are exactly the binary caps.
        for tag in 0..10 {
            let x = random_grouping(6, 4, 300 + tag);
            let spins = to_spin(&x);
            let (alpha, tau) = (2usize, 3usize);
            let alpha_bar = 2.0 * alpha as f64 - 4.0;
            let tau_bar = 2.0 * tau as f64 - 6.0;
            let membership_ok = (0..6).all(|k| {
                let spin_sum: f64 = spins.iter().map(|y| y[k]).sum();
                (spin_sum <= alpha_bar) == (x.memberships(k) <= alpha)
            });
            let size_ok = (0..4).all(|c| {
                let spin_sum: f64 = spins[c].iter().sum();
                (spin_sum <= tau_bar) == (x.group_size(c) <= tau)
            });
            assert!(membership_ok && size_ok);
        }
    }

    #[test]
    fn delta_helpers_match_full_recomputation() {
        let w = random_graph(8, 42);
        let mut x = random_grouping(8, 3, 43);
        let mut rng = seed::stream(44, 0, "delta", &[]);
        for _ in 0..200 {
            let k = rng.gen_range(0..8);
            let c = rng.gen_range(0..3);
            let before = objective_binary(&x, &w);
            if x.contains(k, c) {
                let predicted = delta_remove(&x, &w, k, c);
                x.remove(k, c);
                let after = objective_binary(&x, &w);
                assert!((after - before - predicted).abs() < 1e-9);
            } else {
                let predicted = delta_add(&x, &w, k, c);
                x.insert(k, c);
                let after = objective_binary(&x, &w);
                assert!((after - before - predicted).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn greedy_splits_two_correlated_users() {
        let w = two_user_graph(1.0);
        let x = greedy_grouping(&w, 2, 1, 1);
        assert_eq!(x.memberships(0), 1);
        assert_eq!(x.memberships(1), 1);
        assert_ne!(x.members(0), x.members(1));
        assert_eq!(objective_binary(&x, &w), 2.0);
    }

    #[test]
    fn greedy_respects_capacities_on_random_instances() {
        for tag in 0..20 {
            let w = random_graph(9, 500 + tag);
            let x = greedy_grouping(&w, 3, 2, 2);
            assert!(x.is_feasible(2, 2));
        }
    }

    #[test]
    fn greedy_on_zero_weights_matches_round_robin_value() {
        let w = WeightGraph::from_matrix(DMatrix::zeros(6, 6)).unwrap();
        let x = greedy_grouping(&w, 3, 1, 2);
        assert!(x.is_feasible(1, 2));
        // All assignments tie at zero objective.
        assert_eq!(objective_binary(&x, &w), 0.0);
    }

    #[test]
    fn brute_force_trivial_and_two_user_instances() {
        let single = WeightGraph::from_matrix(DMatrix::zeros(1, 1)).unwrap();
        let (_, value) = brute_force_optimum(&single, 2, 1).unwrap();
        assert_eq!(value, 0.0);

        let w = two_user_graph(0.9);
        let (best, value) = brute_force_optimum(&w, 2, 2).unwrap();
        assert!((value - 1.8).abs() < 1e-12);
        assert_eq!(best.memberships(0), 1);
        assert_eq!(best.memberships(1), 1);
        assert_ne!(best.members(0), best.members(1));
    }

    #[test]
    fn brute_force_rejects_oversized_instances() {
        let w = WeightGraph::from_matrix(DMatrix::zeros(30, 30)).unwrap();
        match brute_force_optimum(&w, 2, 30) {
            Err(Error::InstanceTooLarge { search_space, .. }) => {
                assert!(search_space > BRUTE_FORCE_LIMIT);
            }
            other => panic!("expected InstanceTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn brute_force_dominates_greedy() {
        for tag in 0..20 {
            let w = random_graph(7, 700 + tag);
            let (_, best) = brute_force_optimum(&w, 2, 4).unwrap();
            let greedy = greedy_grouping(&w, 2, 1, 4);
            let greedy_value = objective_binary(&greedy, &w);
            assert!(
                best >= greedy_value - 1e-9,
                "tag {tag}: brute {best} < greedy {greedy_value}"
            );
        }
    }

    #[test]
    fn brute_force_value_is_permutation_invariant() {
        let w = random_graph(6, 900);
        let (_, base) = brute_force_optimum(&w, 2, 3).unwrap();
        // Relabel users by a fixed permutation.
        let perm = [2usize, 0, 4, 1, 5, 3];
        let mut pw = DMatrix::zeros(6, 6);
        for k in 0..6 {
            for j in 0..6 {
                pw[(perm[k], perm[j])] = w.weight(k, j);
            }
        }
        let permuted = WeightGraph::from_matrix(pw).unwrap();
        let (_, value) = brute_force_optimum(&permuted, 2, 3).unwrap();
        assert!((base - value).abs() < 1e-9);
    }

    #[test]
    fn brute_force_argmax_survives_weight_scaling() {
        let w = random_graph(6, 901);
        let (best, value) = brute_force_optimum(&w, 2, 3).unwrap();
        let scaled =
            WeightGraph::from_matrix(w.matrix() * 10.0).unwrap();
        let (best_scaled, value_scaled) = brute_force_optimum(&scaled, 2, 3).unwrap();
        assert_eq!(best, best_scaled);
        assert!((value_scaled - 10.0 * value).abs() < 1e-8 * (1.0 + value_scaled.abs()));
    }

    #[test]
    fn repair_keeps_feasible_candidates_untouched() {
        let w = random_graph(5, 1000);
        let x = Grouping::from_members(5, 2, &[(0, 0), (1, 1), (2, 0)]).unwrap();
        let repaired = repair_feasibility(&to_spin(&x), &w, 1, 3);
        assert_eq!(repaired, x);
    }

    #[test]
    fn repair_evicts_down_to_singletons_when_tau_is_one() {
        // Weights: user 1 is heavily tied to both others, so it is evicted
        // first; between users 0 and 2 the lighter-tied user 2... both remain
        // until the size cap of one forces the heaviest out each round.
        let w = WeightGraph::from_matrix(DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 3.0, 1.0, 3.0, 0.0, 2.0, 1.0, 2.0, 0.0],
        ))
        .unwrap();
        let all = Grouping::from_members(3, 1, &[(0, 0), (1, 0), (2, 0)]).unwrap();
        let repaired = repair_feasibility(&to_spin(&all), &w, 1, 1);
        assert!(repaired.is_feasible(1, 1));
        // Intra sums in the full group: u0 = 4, u1 = 5, u2 = 3 → evict 1;
        // then u0 = 1, u2 = 1 tie → evict the lower index 0; user 2 remains.
        assert_eq!(repaired.members(0), vec![2]);
    }

    #[test]
    fn repair_prefers_removing_the_most_burdening_membership() {
        // User 0 in two groups with alpha = 1: group 0 holds its heavy
        // neighbour, so that membership goes (removal raises the objective
        // more).
        let w = WeightGraph::from_matrix(DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 5.0, 0.1, 5.0, 0.0, 0.0, 0.1, 0.0, 0.0],
        ))
        .unwrap();
        let x = Grouping::from_members(3, 2, &[(0, 0), (1, 0), (0, 1), (2, 1)]).unwrap();
        let repaired = repair_feasibility(&to_spin(&x), &w, 1, 3);
        assert!(repaired.is_feasible(1, 3));
        assert!(!repaired.contains(0, 0), "heavy membership should be dropped");
        assert!(repaired.contains(0, 1));
    }

    #[test]
    fn rounding_recovers_a_rank_one_optimum() {
        // Y = y*·y*ᵀ with Σ_k y*_k = 1 makes the normalized sample equal y*
        // for every draw, so all candidates decode to the same grouping.
        let y_star = DVector::from_row_slice(&[1.0, 1.0, -1.0]);
        let sol = SdrSolution {
            y_mats: vec![&y_star * y_star.transpose()],
            y_vecs: vec![y_star.clone()],
            objective_value: 0.0,
            stats: SolverStats::converged_for_tests(),
        };
        let w = random_graph(3, 1100);
        let mut rng = seed::stream(1100, 0, stage::ROUNDING, &[]);
        let x = gaussian_round(&sol, &w, 1, 2, 16, RoundingNorm::SumNormalize, &mut rng);
        assert_eq!(x.members(0), vec![0, 1]);
    }

    #[test]
    fn rounding_output_is_always_feasible_and_reproducible() {
        let w = random_graph(6, 1200);
        let y = DMatrix::identity(6, 6);
        let sol = SdrSolution {
            y_mats: vec![y.clone(), y],
            y_vecs: vec![DVector::zeros(6), DVector::zeros(6)],
            objective_value: 0.0,
            stats: SolverStats::converged_for_tests(),
        };
        let mut rng = seed::stream(1200, 0, stage::ROUNDING, &[]);
        let a = gaussian_round(&sol, &w, 1, 3, 32, RoundingNorm::SumNormalize, &mut rng);
        assert!(a.is_feasible(1, 3));
        let mut rng = seed::stream(1200, 0, stage::ROUNDING, &[]);
        let b = gaussian_round(&sol, &w, 1, 3, 32, RoundingNorm::SumNormalize, &mut rng);
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn spin_roundtrip_is_identity(
            memberships in proptest::collection::vec(proptest::bool::ANY, 15),
        ) {
            let mut x = Grouping::empty(5, 3);
            for (i, &m) in memberships.iter().enumerate() {
                if m {
                    x.insert(i / 3, i % 3);
                }
            }
            prop_assert_eq!(from_spin(&to_spin(&x)), x);
        }

        #[test]
        fn repair_always_returns_feasible_groupings(
            raw in proptest::collection::vec(-1.0f64..1.0, 12),
            alpha in 1usize..3,
            tau in 1usize..4,
        ) {
            let w = random_graph(6, 1300);
            let spins: Vec<DVector<f64>> = raw
                .chunks(6)
                .map(|chunk| DVector::from_fn(6, |k, _| if chunk[k] > 0.0 { 1.0 } else { -1.0 }))
                .collect();
            let x = repair_feasibility(&spins, &w, alpha, tau);
            prop_assert!(x.is_feasible(alpha, tau));
        }
    }
}
