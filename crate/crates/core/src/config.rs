//! Simulation configuration.
//!
//! [`SimConfig`] carries every knob of the pipeline in resolved form: powers
//! are dimensionless (normalized to the thermal noise power over the
//! configured bandwidth), distances are kilometres, rates are bits/s.
//! [`normalized_power_from_mw`] performs the mW → normalized conversion used
//! when loading configs that state transmit powers in milliwatts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which scalar statistic of the inner product between two users' channels
/// the favorable-propagation CCDF is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FpMetric {
    /// Real part of g_k^H g_j / M (default).
    #[default]
    Real,
    /// Magnitude |g_k^H g_j| / M.
    Magnitude,
}

/// How the Gaussian rounding normalizes the multivariate-normal sample before
/// interpreting its entries as two-point probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RoundingNorm {
    /// Divide by the sum of entries, then clamp to [-1, 1] (default).
    #[default]
    SumNormalize,
    /// Skip the division; clamp only.
    ClampOnly,
}

/// Resolved configuration for one simulation campaign.
///
/// Counts use the conventional symbols: `num_aps` = M, `num_users` = K,
/// `num_groups` = C, `pilot_budget` = τ (maximum group size; a group's pilot
/// length equals its size), `max_memberships` = α, `coherence_length` = T_c
/// samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Number of access points (M).
    pub num_aps: usize,
    /// Number of users (K).
    pub num_users: usize,
    /// Number of user groups (C).
    pub num_groups: usize,
    /// Maximum users per group = pilot sequence budget per group (τ).
    pub pilot_budget: usize,
    /// Maximum group memberships per user (α).
    pub max_memberships: usize,
    /// Coherence interval length in samples (T_c).
    pub coherence_length: usize,
    /// System bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Pilot transmit power, normalized to noise power (ρ_p).
    pub power_pilot: f64,
    /// Downlink transmit power, normalized to noise power (ρ_d).
    pub power_downlink: f64,
    /// Carrier frequency in Hz (recorded in outputs; the path-loss constant
    /// already absorbs it).
    pub carrier_freq_hz: f64,
    /// Receiver noise figure in dB (used for the mW → normalized conversion).
    pub noise_figure_db: f64,
    /// Radius of the circular deployment area in km.
    pub area_radius_km: f64,
    /// Shadow-fading standard deviation in dB (σ_sh).
    pub sigma_shadow_db: f64,
    /// Inner path-loss breakpoint in km (d0).
    pub d0_km: f64,
    /// Outer path-loss breakpoint in km (d1).
    pub d1_km: f64,
    /// Fixed path-loss constant in dB (L_pl).
    pub pathloss_const_db: f64,
    /// Apply shadowing inside the breakpoint distance d1 as well (default:
    /// shadowing only beyond d1).
    pub shadow_inside: bool,
    /// Statistic used by the favorable-propagation CCDF.
    pub fp_metric: FpMetric,
    /// Normalization applied in the rounding step.
    pub rounding_norm: RoundingNorm,
    /// Master seed; all per-trial, per-stage streams derive from it.
    pub rng_seed: u64,
    /// Monte Carlo trials per sweep point.
    pub num_trials: usize,
    /// Candidate samples drawn by the Gaussian rounding (L_s).
    pub num_rounding_samples: usize,
    /// Iteration cap for the interior-point SDR solve.
    pub sdr_max_iter: usize,
    /// Per-user minimum rates in bits/s for standalone allocation runs.
    /// Empty means zero for every user.
    pub min_rates_bits_s: Vec<f64>,
}

impl Default for SimConfig {
    /// Defaults describe a dense urban deployment: 20 MHz band at 1.9 GHz,
    /// 9 dB noise figure, 8 dB shadowing, 200-sample coherence interval,
    /// 200 mW / 150 mW downlink / pilot powers, and a circular area of
    /// 1 km² (radius √(1/π) km) with the three-slope path-loss breakpoints
    /// at 10 m and 50 m.
    fn default() -> Self {
        let bandwidth_hz = 20.0e6;
        let noise_figure_db = 9.0;
        SimConfig {
            num_aps: 100,
            num_users: 20,
            num_groups: 4,
            pilot_budget: 20,
            max_memberships: 6,
            coherence_length: 200,
            bandwidth_hz,
            power_pilot: normalized_power_from_mw(150.0, bandwidth_hz, noise_figure_db),
            power_downlink: normalized_power_from_mw(200.0, bandwidth_hz, noise_figure_db),
            carrier_freq_hz: 1.9e9,
            noise_figure_db,
            area_radius_km: std::f64::consts::FRAC_1_PI.sqrt(),
            sigma_shadow_db: 8.0,
            d0_km: 0.010,
            d1_km: 0.050,
            pathloss_const_db: 140.7,
            shadow_inside: false,
            fp_metric: FpMetric::default(),
            rounding_norm: RoundingNorm::default(),
            rng_seed: 1,
            num_trials: 200,
            num_rounding_samples: 200,
            sdr_max_iter: 200,
            min_rates_bits_s: Vec::new(),
        }
    }
}

impl SimConfig {
    /// Validates the configuration.
    ///
    /// Returns human-readable warnings for suspicious-but-legal settings
    /// (e.g. K ≥ M, which defeats the purpose of a cell-free deployment).
    /// Hard violations return [`Error::InvalidConfig`] naming the field.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.num_aps == 0 {
            return Err(Error::config("num_aps", "must be at least 1"));
        }
        if self.num_users == 0 {
            return Err(Error::config("num_users", "must be at least 1"));
        }
        if self.num_groups == 0 {
            return Err(Error::config("num_groups", "must be at least 1"));
        }
        if self.pilot_budget == 0 {
            return Err(Error::config("pilot_budget", "must be at least 1"));
        }
        if self.pilot_budget > self.coherence_length {
            return Err(Error::config(
                "pilot_budget",
                format!(
                    "τ = {} exceeds the coherence interval T_c = {}; a group's \
                     pilots would not fit in one coherence block",
                    self.pilot_budget, self.coherence_length
                ),
            ));
        }
        // α beyond C is legal (the membership cap simply never binds); only
        // α = 0 makes every schedule empty.
        if self.max_memberships == 0 {
            return Err(Error::config("max_memberships", "must be at least 1"));
        }
        if self.coherence_length == 0 {
            return Err(Error::config("coherence_length", "must be at least 1"));
        }
        // `x <= 0.0 || x.is_nan()` rather than `x <= 0.0` so NaN is rejected.
        if self.bandwidth_hz <= 0.0 || self.bandwidth_hz.is_nan() {
            return Err(Error::config("bandwidth_hz", "must be positive"));
        }
        if self.power_pilot <= 0.0 || self.power_pilot.is_nan() {
            return Err(Error::config("power_pilot", "must be positive"));
        }
        if self.power_downlink <= 0.0 || self.power_downlink.is_nan() {
            return Err(Error::config("power_downlink", "must be positive"));
        }
        if self.area_radius_km <= 0.0 || self.area_radius_km.is_nan() {
            return Err(Error::config("area_radius_km", "must be positive"));
        }
        if self.sigma_shadow_db < 0.0 {
            return Err(Error::config("sigma_shadow_db", "must be nonnegative"));
        }
        if self.d0_km <= 0.0 || self.d0_km.is_nan() {
            return Err(Error::config("d0_km", "must be positive"));
        }
        if self.d1_km <= self.d0_km {
            return Err(Error::config(
                "d1_km",
                format!("d1 = {} must exceed d0 = {}", self.d1_km, self.d0_km),
            ));
        }
        if self.d1_km >= 2.0 * self.area_radius_km {
            return Err(Error::config(
                "d1_km",
                format!(
                    "d1 = {} must be below the area diameter {}",
                    self.d1_km,
                    2.0 * self.area_radius_km
                ),
            ));
        }
        if !self.min_rates_bits_s.is_empty() && self.min_rates_bits_s.len() != self.num_users {
            return Err(Error::config(
                "min_rates_bits_s",
                format!(
                    "expected {} entries (one per user) or an empty list, got {}",
                    self.num_users,
                    self.min_rates_bits_s.len()
                ),
            ));
        }
        if self.min_rates_bits_s.iter().any(|r| *r < 0.0 || !r.is_finite()) {
            return Err(Error::config(
                "min_rates_bits_s",
                "entries must be finite and nonnegative",
            ));
        }
        if self.num_rounding_samples == 0 {
            return Err(Error::config("num_rounding_samples", "must be at least 1"));
        }
        if self.sdr_max_iter == 0 {
            return Err(Error::config("sdr_max_iter", "must be at least 1"));
        }

        let mut warnings = Vec::new();
        if self.num_users >= self.num_aps {
            warnings.push(format!(
                "num_users K = {} is not far below num_aps M = {}; the dense-AP \
                 operating assumptions (K << M) do not hold",
                self.num_users, self.num_aps
            ));
        }
        if self.num_users > self.coherence_length {
            warnings.push(format!(
                "num_users K = {} exceeds coherence_length T_c = {}; the \
                 conventional all-users baseline cannot be evaluated",
                self.num_users, self.coherence_length
            ));
        }
        Ok(warnings)
    }

    /// Per-user minimum rates resolved to a dense vector of length K.
    pub fn resolved_min_rates(&self) -> Vec<f64> {
        if self.min_rates_bits_s.is_empty() {
            vec![0.0; self.num_users]
        } else {
            self.min_rates_bits_s.clone()
        }
    }
}

/// Thermal noise power over `bandwidth_hz` in dBm: −174 dBm/Hz + 10·log10(B)
/// plus the receiver noise figure.
pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// Converts a transmit power in mW into the dimensionless power normalized to
/// the noise power over the configured bandwidth.
pub fn normalized_power_from_mw(power_mw: f64, bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    let power_dbm = 10.0 * power_mw.log10();
    let noise_dbm = noise_power_dbm(bandwidth_hz, noise_figure_db);
    10f64.powf((power_dbm - noise_dbm) / 10.0)
}
