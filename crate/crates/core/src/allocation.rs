//! Closed-form per-group rates, the conventional cell-free baseline, and the
//! bandwidth-allocation linear program.
//!
//! When group c's members train on |Γ(c)| orthogonal pilots and are served
//! together by conjugate beamforming, user k's achievable rate over the full
//! band is
//!
//!   R̃_kc = B·((T_c − |Γ(c)|)/T_c)·log2(1 + SINR_kc),
//!   SINR_kc = ρ_d·(Σ_m ν_mk)² / (ρ_d·Σ_m Σ_{k'} ν_mk'·β_mk + 1),
//!
//! with the interferer sum k' running over the group. Whether k' = k itself
//! is counted is a printed ambiguity in the source formulas: the per-group
//! form excludes it, the all-active baseline includes it. Both live behind
//! the `exclude_self` flag with those defaults, and every output file
//! records which was used.
//!
//! The bandwidth LP then splits the band across groups: maximize
//! Σ_c γ_c·Σ_k R̃_kc subject to per-user floors Σ_c γ_c·R̃_kc ≥ R̄_k and
//! Σ_c γ_c ≤ 1.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::grouping::Grouping;
use crate::simplex::{self, LinearProgram, LpResult, LpRow, Sense};
use crate::topology::BetaMatrix;

/// Per-group, per-user rates (bits/s) plus the all-active baseline rates.
///
/// `group_rates` is C×K with zeros for users outside a group;
/// `conventional_rates` may be empty when the table was loaded from a CSV
/// that only describes groups.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    group_rates: DMatrix<f64>,
    conventional_rates: Vec<f64>,
}

impl RateTable {
    pub fn new(group_rates: DMatrix<f64>, conventional_rates: Vec<f64>) -> Result<Self> {
        if !conventional_rates.is_empty() && conventional_rates.len() != group_rates.ncols() {
            return Err(Error::InvalidInstance(format!(
                "conventional rates cover {} users, group rates cover {}",
                conventional_rates.len(),
                group_rates.ncols()
            )));
        }
        let all = group_rates.iter().chain(conventional_rates.iter());
        for &r in all {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "rates must be finite and nonnegative, found {r}"
                )));
            }
        }
        Ok(RateTable {
            group_rates,
            conventional_rates,
        })
    }

    pub fn num_groups(&self) -> usize {
        self.group_rates.nrows()
    }

    pub fn num_users(&self) -> usize {
        self.group_rates.ncols()
    }

    /// R̃_kc in bits/s; zero when user k is not in group c.
    pub fn group_rate(&self, c: usize, k: usize) -> f64 {
        self.group_rates[(c, k)]
    }

    pub fn group_rates(&self) -> &DMatrix<f64> {
        &self.group_rates
    }

    pub fn conventional_rates(&self) -> &[f64] {
        &self.conventional_rates
    }

    /// Sum rate Σ_k R̃_kc of one group, in ascending user order.
    pub fn group_sum_rate(&self, c: usize) -> f64 {
        (0..self.num_users()).map(|k| self.group_rates[(c, k)]).sum()
    }
}

/// Termination status of a bandwidth allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationStatus {
    Optimal,
    Infeasible,
}

/// Result of the bandwidth LP: per-group band fractions and the per-user
/// throughput they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub gamma: Vec<f64>,
    pub per_user_rate: Vec<f64>,
    pub objective: f64,
    pub status: AllocationStatus,
}

/// Rate of user `k` inside the group `members`, in bits/s.
///
/// `exclude_self` drops k' = k from the interference sum (the per-group
/// form); keeping it matches the all-active baseline formula as printed.
pub fn group_rate(
    beta: &BetaMatrix,
    nu: &DMatrix<f64>,
    members: &[usize],
    k: usize,
    cfg: &SimConfig,
    exclude_self: bool,
) -> Result<f64> {
    assert!(
        members.contains(&k),
        "user {k} must belong to the group it is rated in"
    );
    let group_size = members.len();
    if group_size > cfg.coherence_length {
        return Err(Error::GroupTooLarge {
            group_size,
            coherence_length: cfg.coherence_length,
        });
    }
    let m_aps = beta.nrows();
    let rho_d = cfg.power_downlink;

    let gain: f64 = (0..m_aps).map(|m| nu[(m, k)]).sum();
    let mut interference = 0.0;
    for m in 0..m_aps {
        let mut nu_sum = 0.0;
        for &j in members {
            if exclude_self && j == k {
                continue;
            }
            nu_sum += nu[(m, j)];
        }
        interference += nu_sum * beta[(m, k)];
    }
    let sinr = rho_d * gain * gain / (rho_d * interference + 1.0);
    let overhead = (cfg.coherence_length - group_size) as f64 / cfg.coherence_length as f64;
    Ok(cfg.bandwidth_hz * overhead * (1.0 + sinr).log2())
}

/// Baseline rates with every user active at once: one super-group of all K
/// users, pilot length K, self-interference included, full band.
pub fn conventional_cf_rates(
    beta: &BetaMatrix,
    nu: &DMatrix<f64>,
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    let k_users = beta.ncols();
    let members: Vec<usize> = (0..k_users).collect();
    members
        .iter()
        .map(|&k| group_rate(beta, nu, &members, k, cfg, false))
        .collect()
}

/// Rates for every (group, member) pair of a grouping, with the per-group
/// self-exclusion default, plus the conventional baseline.
pub fn build_rate_table(
    beta: &BetaMatrix,
    nu: &DMatrix<f64>,
    grouping: &Grouping,
    cfg: &SimConfig,
) -> Result<RateTable> {
    let mut group_rates = DMatrix::zeros(grouping.num_groups(), grouping.num_users());
    for c in 0..grouping.num_groups() {
        let members = grouping.members(c);
        for &k in &members {
            group_rates[(c, k)] = group_rate(beta, nu, &members, k, cfg, true)?;
        }
    }
    let conventional = conventional_cf_rates(beta, nu, cfg)?;
    RateTable::new(group_rates, conventional)
}

/// Splits the band across groups: maximize Σ_c γ_c·Σ_k R̃_kc subject to
/// Σ_c γ_c·R̃_kc ≥ R̄_k for every user with R̄_k > 0 and Σ_c γ_c ≤ 1.
///
/// With all floors at zero the optimum concentrates the whole band on the
/// group with the largest sum rate (ties toward the lowest group index), and
/// the reported objective equals that sum exactly. Errs with
/// [`Error::Infeasible`] when the floors cannot be met — the signal that the
/// grouping must change.
pub fn solve_bandwidth_lp(table: &RateTable, min_rates: &[f64]) -> Result<AllocationResult> {
    let num_groups = table.num_groups();
    let num_users = table.num_users();
    if min_rates.len() != num_users {
        return Err(Error::InvalidInstance(format!(
            "{} rate floors supplied for {num_users} users",
            min_rates.len()
        )));
    }
    if num_groups == 0 {
        return Err(Error::InvalidInstance(
            "rate table has no groups".to_string(),
        ));
    }

    let mut rows = Vec::new();
    for (k, &floor) in min_rates.iter().enumerate() {
        if floor <= 0.0 {
            continue;
        }
        rows.push(LpRow {
            coeffs: (0..num_groups).map(|c| table.group_rate(c, k)).collect(),
            sense: Sense::Ge,
            rhs: floor,
        });
    }
    rows.push(LpRow {
        coeffs: vec![1.0; num_groups],
        sense: Sense::Le,
        rhs: 1.0,
    });
    let lp = LinearProgram {
        maximize: (0..num_groups).map(|c| table.group_sum_rate(c)).collect(),
        rows,
    };

    match simplex::solve(&lp)? {
        LpResult::Optimal { x: gamma, objective } => {
            let per_user_rate = (0..num_users)
                .map(|k| {
                    (0..num_groups)
                        .map(|c| gamma[c] * table.group_rate(c, k))
                        .sum()
                })
                .collect();
            Ok(AllocationResult {
                gamma,
                per_user_rate,
                objective,
                status: AllocationStatus::Optimal,
            })
        }
        LpResult::Infeasible => Err(Error::Infeasible {
            reason: "no band split meets every user's minimum rate".to_string(),
        }),
        // Σ γ_c ≤ 1 with nonnegative rates bounds the objective; unbounded
        // can only mean corrupted input.
        LpResult::Unbounded => Err(Error::InvalidInstance(
            "bandwidth LP reported unbounded despite the band budget".to_string(),
        )),
    }
}
