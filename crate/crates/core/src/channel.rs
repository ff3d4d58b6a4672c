//! Small-scale channels, MMSE estimation, and favorable-propagation
//! statistics.
//!
//! Channels are i.i.d. Rayleigh around the large-scale coefficients:
//! g_mk = √β_mk·h_mk with h_mk ~ CN(0,1). With orthonormal pilots each link
//! reduces to a scalar observation, so the MMSE channel estimate and its
//! variance ν_mk have closed forms. The favorable-propagation diagnostics
//! quantify how far two users' channels are from orthogonal: an empirical
//! CCDF of their normalized inner product against a variance-based
//! concentration bound driven by the pairwise correlation Σ_m β_mk·β_mj.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::FpMetric;
use crate::topology::BetaMatrix;

/// One draw of the M×K small-scale channel matrix.
pub type ChannelRealization = DMatrix<Complex64>;

/// Draws one CN(0,1) variate (unit-variance circularly-symmetric complex
/// normal).
fn standard_complex(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws a full channel realization g_mk = √β_mk·h_mk, h_mk ~ CN(0,1).
///
/// Variates are drawn column by column (user-major), two standard normals
/// per entry; identical `(beta, rng)` reproduce the matrix exactly.
pub fn draw_channel(beta: &BetaMatrix, rng: &mut impl Rng) -> ChannelRealization {
    let (m_aps, k_users) = beta.shape();
    let mut g = DMatrix::zeros(m_aps, k_users);
    for k in 0..k_users {
        for m in 0..m_aps {
            g[(m, k)] = beta[(m, k)].sqrt() * standard_complex(rng);
        }
    }
    g
}

/// Draws the two channel columns of users `k` and `j` only.
fn draw_channel_pair(
    beta: &BetaMatrix,
    k: usize,
    j: usize,
    rng: &mut impl Rng,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let m_aps = beta.nrows();
    let mut gk = Vec::with_capacity(m_aps);
    let mut gj = Vec::with_capacity(m_aps);
    for m in 0..m_aps {
        gk.push(beta[(m, k)].sqrt() * standard_complex(rng));
    }
    for m in 0..m_aps {
        gj.push(beta[(m, j)].sqrt() * standard_complex(rng));
    }
    (gk, gj)
}

/// Variance of the MMSE channel estimate for every link:
/// ν_mk = ρ_p·β_mk²/(1 + ρ_p·β_mk).
pub fn mmse_variance(beta: &BetaMatrix, rho_p: f64) -> DMatrix<f64> {
    beta.map(|b| rho_p * b * b / (1.0 + rho_p * b))
}

/// MMSE estimate of one user's channel column from a unit-variance scalar
/// pilot observation per AP:
/// ĝ_mk = (√ρ_p·β_mk/(ρ_p·β_mk + 1))·(√ρ_p·g_mk + n_m), n_m ~ CN(0,1).
pub fn mmse_estimate(
    g_col: &[Complex64],
    beta_col: &[f64],
    rho_p: f64,
    rng: &mut impl Rng,
) -> Vec<Complex64> {
    assert_eq!(
        g_col.len(),
        beta_col.len(),
        "channel and fading columns must have equal length"
    );
    let sqrt_rho = rho_p.sqrt();
    g_col
        .iter()
        .zip(beta_col)
        .map(|(&g, &b)| {
            let coeff = sqrt_rho * b / (rho_p * b + 1.0);
            let observation = sqrt_rho * g + standard_complex(rng);
            coeff * observation
        })
        .collect()
}

/// Moment check of the MMSE estimator on one link: draws `draws` independent
/// estimates and compares their sample variance against the closed-form ν.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateStats {
    /// Closed-form estimate variance ν_mk.
    pub theoretical_variance: f64,
    /// Sample variance E|ĝ|² over the draws (the estimate has zero mean).
    pub sample_variance: f64,
    pub draws: usize,
}

/// Monte Carlo estimate of the variance of ĝ_mk for a single link, for
/// consistency checks against [`mmse_variance`].
pub fn estimate_stats(beta_mk: f64, rho_p: f64, draws: usize, rng: &mut impl Rng) -> EstimateStats {
    let beta_col = [beta_mk];
    let mut acc = 0.0;
    for _ in 0..draws {
        let g = [beta_mk.sqrt() * standard_complex(rng)];
        let est = mmse_estimate(&g, &beta_col, rho_p, rng);
        acc += est[0].norm_sqr();
    }
    EstimateStats {
        theoretical_variance: rho_p * beta_mk * beta_mk / (1.0 + rho_p * beta_mk),
        sample_variance: acc / draws as f64,
        draws,
    }
}

/// Pairwise large-scale correlation w_kj = Σ_m β_mk·β_mj between two distinct
/// users.
///
/// # Panics
/// Panics when `k == j`; self-pairs carry no pairing information and are
/// always a caller bug.
pub fn pair_correlation(beta: &BetaMatrix, k: usize, j: usize) -> f64 {
    assert_ne!(k, j, "pair correlation requires two distinct users");
    beta.column(k).dot(&beta.column(j))
}

/// Scale-free pairwise correlation: the cosine similarity
/// Σ_m β_mk·β_mj / (‖β_·k‖₂·‖β_·j‖₂) in [0, 1].
///
/// Returns 0 when either column is identically zero.
pub fn normalized_pair_correlation(beta: &BetaMatrix, k: usize, j: usize) -> f64 {
    assert_ne!(k, j, "pair correlation requires two distinct users");
    let nk = beta.column(k).norm();
    let nj = beta.column(j).norm();
    if nk == 0.0 || nj == 0.0 {
        return 0.0;
    }
    beta.column(k).dot(&beta.column(j)) / (nk * nj)
}

/// Concentration bound on the favorable-propagation CCDF:
/// P{⟨g_k, g_j⟩/M ≥ θ} ≤ 1/(1 + M²θ²/Σ_m β_mk·β_mj).
///
/// Degenerate cases: θ = 0 gives 1; a zero correlation sum with θ > 0 gives 0
/// (the inner product is almost surely 0).
pub fn chebyshev_bound(beta: &BetaMatrix, k: usize, j: usize, theta: f64) -> f64 {
    assert!(theta >= 0.0, "threshold must be nonnegative, got {theta}");
    let sum = pair_correlation(beta, k, j);
    let m = beta.nrows() as f64;
    if theta == 0.0 {
        return 1.0;
    }
    if sum == 0.0 {
        return 0.0;
    }
    1.0 / (1.0 + m * m * theta * theta / sum)
}

/// Default threshold grid for favorable-propagation CCDFs: 64 points,
/// logarithmically spaced over [10⁻⁴, 1] and scaled by the largest fading
/// coefficient in `beta`.
pub fn default_theta_grid(beta: &BetaMatrix) -> Vec<f64> {
    let scale = beta.iter().cloned().fold(0.0f64, f64::max);
    let points = 64;
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            scale * 10f64.powf(-4.0 * (1.0 - t))
        })
        .collect()
}

/// Empirical CCDF of the per-antenna-normalized channel inner product of two
/// users over independent channel draws.
///
/// For every θ in `theta_grid` this returns the fraction of draws whose
/// statistic (real part or magnitude of g_k†g_j/M, per `metric`) reached θ.
pub fn empirical_fp_ccdf(
    beta: &BetaMatrix,
    k: usize,
    j: usize,
    theta_grid: &[f64],
    draws: usize,
    metric: FpMetric,
    rng: &mut impl Rng,
) -> Vec<f64> {
    assert_ne!(k, j, "pair correlation requires two distinct users");
    assert!(draws > 0, "at least one draw is required");
    let m = beta.nrows() as f64;
    let mut values: Vec<f64> = Vec::with_capacity(draws);
    for _ in 0..draws {
        let (gk, gj) = draw_channel_pair(beta, k, j, rng);
        let inner: Complex64 = gk
            .iter()
            .zip(&gj)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            / m;
        values.push(match metric {
            FpMetric::Real => inner.re,
            FpMetric::Magnitude => inner.norm(),
        });
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    theta_grid
        .iter()
        .map(|&theta| {
            // Count of sorted values ≥ θ via binary search.
            let idx = values.partition_point(|v| *v < theta);
            (draws - idx) as f64 / draws as f64
        })
        .collect()
}

/// Favorable-propagation diagnostics for one user pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FpPairReport {
    pub k: usize,
    pub j: usize,
    /// Empirical CCDF per grid threshold.
    pub empirical_ccdf: Vec<f64>,
    /// Concentration bound per grid threshold.
    pub bound: Vec<f64>,
    /// Cosine similarity of the two fading columns.
    pub normalized_correlation: f64,
}

/// Favorable-propagation diagnostics over a set of user pairs on a shared
/// threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FpReport {
    pub theta_grid: Vec<f64>,
    pub pairs: Vec<FpPairReport>,
}

/// Builds the favorable-propagation report for the given user pairs.
pub fn fp_report(
    beta: &BetaMatrix,
    pairs: &[(usize, usize)],
    theta_grid: &[f64],
    draws: usize,
    metric: FpMetric,
    rng: &mut impl Rng,
) -> FpReport {
    let pair_reports = pairs
        .iter()
        .map(|&(k, j)| FpPairReport {
            k,
            j,
            empirical_ccdf: empirical_fp_ccdf(beta, k, j, theta_grid, draws, metric, rng),
            bound: theta_grid
                .iter()
                .map(|&t| chebyshev_bound(beta, k, j, t))
                .collect(),
            normalized_correlation: normalized_pair_correlation(beta, k, j),
        })
        .collect();
    FpReport {
        theta_grid: theta_grid.to_vec(),
        pairs: pair_reports,
    }
}
