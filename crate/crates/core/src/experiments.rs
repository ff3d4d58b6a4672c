//! Monte Carlo experiments tying the pipeline together: per-topology
//! scheduling trials, the spatial-correlation CDF comparison, and the
//! throughput sweep over network sizes.
//!
//! Every trial derives its randomness from counter-based streams keyed by
//! (master seed, trial id, stage, M, K), so results are independent of the
//! parallel schedule and of which other sweep points run alongside.

use rayon::prelude::*;
use serde::Serialize;

use crate::allocation::{build_rate_table, solve_bandwidth_lp, AllocationResult};
use crate::channel::{mmse_variance, normalized_pair_correlation};
use crate::config::SimConfig;
use crate::error::Result;
use crate::grouping::{build_weight_graph, gaussian_round, solve_sdr, Grouping};
use crate::seed::{self, stage};
use crate::stats;
use crate::topology::{build_beta_matrix, generate_topology, BetaMatrix};

// ---------------------------------------------------------------------------
// Result types
// ---------------------------------------------------------------------------

/// Which transmission scheme a result row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Spatial grouping with bandwidth allocation across groups.
    SgBa,
    /// All users served together on the whole band.
    Conventional,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::SgBa => write!(f, "sg_ba"),
            Scheme::Conventional => write!(f, "conventional"),
        }
    }
}

/// Outcome of one scheme on one topology draw.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub trial_id: u64,
    pub scheme: Scheme,
    /// Per-user throughput in bits/s (band share already applied).
    pub throughput_bits_s: Vec<f64>,
    /// Normalized fading correlations: intra-group pairs for the grouped
    /// scheme, all user pairs for the conventional one.
    pub correlations: Vec<f64>,
    /// Grouping used (grouped scheme only).
    pub grouping: Option<Grouping>,
    /// Band allocation used (grouped scheme only).
    pub allocation: Option<AllocationResult>,
}

/// Aggregated throughput statistics for one (scheme, M, K) grid point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub scheme: Scheme,
    pub num_aps: usize,
    pub num_users: usize,
    /// Mean over completed trials of the per-user average throughput.
    pub mean_bits_s: f64,
    /// 1.96·s/√n half-width over the same per-trial averages; NaN below 30
    /// completed trials.
    pub ci95_bits_s: f64,
    /// Mean over completed trials of the per-user *sum* throughput.
    pub sum_bits_s: f64,
    /// Completed trials.
    pub trials: usize,
    /// Trials that errored (solver non-convergence etc.); counted, never
    /// silently dropped.
    pub failed: usize,
}

/// One point of an empirical CDF: P(sample ≤ value) = cdf.
#[derive(Debug, Clone, Serialize)]
pub struct CdfPoint {
    pub scheme: Scheme,
    pub num_aps: usize,
    pub value: f64,
    pub cdf: f64,
}

/// Output of a sweep experiment: throughput statistics per grid point and,
/// when the experiment collects them, pooled correlation CDFs.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub cdfs: Vec<CdfPoint>,
}

/// Full record of a single-point simulation campaign.
#[derive(Debug, Clone)]
pub struct SimulationOutput {
    /// Completed trials in trial-id order, one pair (grouped, conventional)
    /// per topology draw.
    pub trials: Vec<(TrialResult, TrialResult)>,
    /// Failed trials as (trial id, error text), in trial-id order.
    pub failures: Vec<(u64, String)>,
    /// Per-scheme summary statistics.
    pub summary: Vec<SweepPoint>,
}

// ---------------------------------------------------------------------------
// Single trial
// ---------------------------------------------------------------------------

/// Runs one topology draw end to end and returns the grouped-scheme and
/// conventional results for it.
///
/// Stages consume independent streams derived from
/// (`cfg.rng_seed`, `trial_id`, stage tag, M, K), so a trial's outcome is a
/// pure function of the configuration and trial id. A solver failure aborts
/// the whole pair: the comparison is paired by design, and callers count the
/// trial as failed rather than mixing schemes from different draws.
pub fn run_trial(cfg: &SimConfig, trial_id: u64) -> Result<(TrialResult, TrialResult)> {
    let extra = [cfg.num_aps as u64, cfg.num_users as u64];
    let mut topo_rng = seed::stream(cfg.rng_seed, trial_id, stage::TOPOLOGY, &extra);
    let topo = generate_topology(cfg, &mut topo_rng);
    let mut shadow_rng = seed::stream(cfg.rng_seed, trial_id, stage::SHADOWING, &extra);
    let beta = build_beta_matrix(&topo, cfg, &mut shadow_rng);

    let w = build_weight_graph(&beta);
    let sdr = solve_sdr(
        &w,
        cfg.num_groups,
        cfg.max_memberships,
        cfg.pilot_budget,
        cfg.sdr_max_iter,
    )?;
    let mut round_rng = seed::stream(cfg.rng_seed, trial_id, stage::ROUNDING, &extra);
    let grouping = gaussian_round(
        &sdr,
        &w,
        cfg.max_memberships,
        cfg.pilot_budget,
        cfg.num_rounding_samples,
        cfg.rounding_norm,
        &mut round_rng,
    );

    let nu = mmse_variance(&beta, cfg.power_pilot);
    let table = build_rate_table(&beta, &nu, &grouping, cfg)?;
    let allocation = solve_bandwidth_lp(&table, &cfg.resolved_min_rates())?;

    let sg = TrialResult {
        trial_id,
        scheme: Scheme::SgBa,
        throughput_bits_s: allocation.per_user_rate.clone(),
        correlations: intra_group_correlations(&beta, &grouping),
        grouping: Some(grouping),
        allocation: Some(allocation),
    };
    let conventional = TrialResult {
        trial_id,
        scheme: Scheme::Conventional,
        throughput_bits_s: table.conventional_rates().to_vec(),
        correlations: all_pair_correlations(&beta),
        grouping: None,
        allocation: None,
    };
    debug_assert!(sg
        .throughput_bits_s
        .iter()
        .chain(&conventional.throughput_bits_s)
        .all(|r| *r >= 0.0));
    debug_assert!(sg
        .correlations
        .iter()
        .chain(&conventional.correlations)
        .all(|v| (0.0..=1.0 + 1e-12).contains(v)));
    Ok((sg, conventional))
}

/// Normalized correlations over every unordered pair scheduled together in
/// some group; a pair sharing several groups contributes once per shared
/// group, matching how often the pilot reuse actually co-schedules it.
fn intra_group_correlations(beta: &BetaMatrix, grouping: &Grouping) -> Vec<f64> {
    let mut values = Vec::new();
    for c in 0..grouping.num_groups() {
        let members = grouping.members(c);
        for (i, &k) in members.iter().enumerate() {
            for &j in &members[i + 1..] {
                values.push(normalized_pair_correlation(beta, k, j));
            }
        }
    }
    values
}

/// Normalized correlations over all unordered user pairs.
fn all_pair_correlations(beta: &BetaMatrix) -> Vec<f64> {
    let k_users = beta.ncols();
    let mut values = Vec::with_capacity(k_users * (k_users - 1) / 2);
    for k in 0..k_users {
        for j in (k + 1)..k_users {
            values.push(normalized_pair_correlation(beta, k, j));
        }
    }
    values
}

// ---------------------------------------------------------------------------
// Campaigns
// ---------------------------------------------------------------------------

/// One grouped/conventional result pair from a completed trial.
type TrialPair = (TrialResult, TrialResult);

/// Runs `cfg.num_trials` paired trials in parallel and splits them into
/// completed pairs and failures, both in trial-id order.
fn collect_trials(cfg: &SimConfig) -> (Vec<TrialPair>, Vec<(u64, String)>) {
    let outcomes: Vec<(u64, Result<TrialPair>)> = (0..cfg.num_trials as u64)
        .into_par_iter()
        .map(|trial_id| (trial_id, run_trial(cfg, trial_id)))
        .collect();
    let mut completed = Vec::new();
    let mut failures = Vec::new();
    for (trial_id, outcome) in outcomes {
        match outcome {
            Ok(pair) => completed.push(pair),
            Err(err) => failures.push((trial_id, err.to_string())),
        }
    }
    (completed, failures)
}

/// Builds the per-scheme summary row from completed trials: the statistics
/// run over per-trial scalars (mean or sum over users) so the confidence
/// interval reflects topology-to-topology variation.
fn summarize(
    scheme: Scheme,
    cfg: &SimConfig,
    trials: &[&TrialResult],
    failed: usize,
) -> SweepPoint {
    let per_trial_mean: Vec<f64> = trials
        .iter()
        .map(|t| stats::mean(&t.throughput_bits_s))
        .collect();
    let per_trial_sum: Vec<f64> = trials
        .iter()
        .map(|t| t.throughput_bits_s.iter().sum())
        .collect();
    SweepPoint {
        scheme,
        num_aps: cfg.num_aps,
        num_users: cfg.num_users,
        mean_bits_s: stats::mean(&per_trial_mean),
        ci95_bits_s: stats::ci95_half_width(&per_trial_mean),
        sum_bits_s: stats::mean(&per_trial_sum),
        trials: trials.len(),
        failed,
    }
}

/// Runs the full campaign at the configured (M, K) point.
///
/// Only configuration errors abort the run; per-trial solver failures are
/// recorded in `failures` and reflected in the summary counts. With zero
/// requested trials the output is empty but well-formed.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimulationOutput> {
    cfg.validate()?;
    let (trials, failures) = collect_trials(cfg);
    let failed = failures.len();
    let sg_refs: Vec<&TrialResult> = trials.iter().map(|(sg, _)| sg).collect();
    let conv_refs: Vec<&TrialResult> = trials.iter().map(|(_, conv)| conv).collect();
    let summary = vec![
        summarize(Scheme::SgBa, cfg, &sg_refs, failed),
        summarize(Scheme::Conventional, cfg, &conv_refs, failed),
    ];
    Ok(SimulationOutput {
        trials,
        failures,
        summary,
    })
}

/// Sorts pooled samples and turns them into empirical CDF points
/// P(X ≤ value) = (i+1)/n.
fn empirical_cdf(mut values: Vec<f64>) -> Vec<(f64, f64)> {
    values.sort_by(|a, b| a.partial_cmp(b).expect("correlations are finite"));
    let n = values.len();
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, (i + 1) as f64 / n as f64))
        .collect()
}

/// Compares the spatial-correlation distributions of the two schemes across
/// AP counts: for each M, pools normalized correlations over intra-group
/// pairs (grouped scheme) and over all pairs (conventional) from
/// `cfg.num_trials` topologies, and emits their empirical CDFs alongside the
/// throughput summary of the same trials.
pub fn correlation_cdf_experiment(cfg: &SimConfig, m_list: &[usize]) -> Result<SweepResult> {
    let mut result = SweepResult::default();
    if cfg.num_trials == 0 {
        return Ok(result);
    }
    for &m in m_list {
        let point_cfg = SimConfig {
            num_aps: m,
            ..cfg.clone()
        };
        point_cfg.validate()?;
        let (trials, failures) = collect_trials(&point_cfg);
        let failed = failures.len();
        let mut sg_values = Vec::new();
        let mut conv_values = Vec::new();
        for (sg, conv) in &trials {
            sg_values.extend_from_slice(&sg.correlations);
            conv_values.extend_from_slice(&conv.correlations);
        }
        for (scheme, values) in [
            (Scheme::SgBa, sg_values),
            (Scheme::Conventional, conv_values),
        ] {
            for (value, cdf) in empirical_cdf(values) {
                result.cdfs.push(CdfPoint {
                    scheme,
                    num_aps: m,
                    value,
                    cdf,
                });
            }
        }
        let sg_refs: Vec<&TrialResult> = trials.iter().map(|(sg, _)| sg).collect();
        let conv_refs: Vec<&TrialResult> = trials.iter().map(|(_, conv)| conv).collect();
        result
            .points
            .push(summarize(Scheme::SgBa, &point_cfg, &sg_refs, failed));
        result
            .points
            .push(summarize(Scheme::Conventional, &point_cfg, &conv_refs, failed));
    }
    Ok(result)
}

/// Sweeps mean throughput over a grid of AP and user counts for both
/// schemes. Per-user minimum rates must be empty or uniform-length-free
/// (the empty default resolves to zeros at each K).
pub fn throughput_sweep_experiment(
    cfg: &SimConfig,
    m_list: &[usize],
    k_list: &[usize],
) -> Result<SweepResult> {
    let mut result = SweepResult::default();
    if cfg.num_trials == 0 {
        return Ok(result);
    }
    for &k in k_list {
        for &m in m_list {
            let point_cfg = SimConfig {
                num_aps: m,
                num_users: k,
                ..cfg.clone()
            };
            point_cfg.validate()?;
            let (trials, failures) = collect_trials(&point_cfg);
            let failed = failures.len();
            let sg_refs: Vec<&TrialResult> = trials.iter().map(|(sg, _)| sg).collect();
            let conv_refs: Vec<&TrialResult> = trials.iter().map(|(_, conv)| conv).collect();
            result
                .points
                .push(summarize(Scheme::SgBa, &point_cfg, &sg_refs, failed));
            result
                .points
                .push(summarize(Scheme::Conventional, &point_cfg, &conv_refs, failed));
        }
    }
    Ok(result)
}
