//! Network geometry and large-scale fading.
//!
//! Access points and users are placed uniformly at random on a disk. The
//! channel gain between an AP and a user follows a three-slope path-loss
//! curve (in dB, distances in km) plus optional log-normal shadowing, and is
//! exponentiated once into the linear-scale coefficient β_mk.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::SimConfig;

/// Large-scale fading coefficients, one row per AP and one column per user
/// (M×K, linear scale).
pub type BetaMatrix = DMatrix<f64>;

/// AP and user positions on the deployment disk, in km relative to the
/// disk centre.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub aps: Vec<(f64, f64)>,
    pub users: Vec<(f64, f64)>,
    /// Radius of the deployment disk in km.
    pub area_radius_km: f64,
}

impl Topology {
    pub fn num_aps(&self) -> usize {
        self.aps.len()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    /// Euclidean distance in km between AP `m` and user `k`.
    pub fn distance_km(&self, m: usize, k: usize) -> f64 {
        let (ax, ay) = self.aps[m];
        let (ux, uy) = self.users[k];
        ((ax - ux).powi(2) + (ay - uy).powi(2)).sqrt()
    }
}

/// Draws one point uniformly distributed on the disk of the given radius.
fn uniform_disk_point(radius: f64, rng: &mut impl Rng) -> (f64, f64) {
    // Inverse-CDF sampling: the radial CDF on a disk is (r/R)², so r = R·√u
    // is uniform in area.
    let r = radius * rng.gen::<f64>().sqrt();
    let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    (r * phi.cos(), r * phi.sin())
}

/// Places `cfg.num_aps` APs and then `cfg.num_users` users independently and
/// uniformly on the deployment disk.
///
/// The draw order (all APs first, then all users, two uniforms per point) is
/// part of the reproducibility contract: identical `(cfg, rng)` give a
/// bit-identical topology.
pub fn generate_topology(cfg: &SimConfig, rng: &mut impl Rng) -> Topology {
    let aps = (0..cfg.num_aps)
        .map(|_| uniform_disk_point(cfg.area_radius_km, rng))
        .collect();
    let users = (0..cfg.num_users)
        .map(|_| uniform_disk_point(cfg.area_radius_km, rng))
        .collect();
    Topology {
        aps,
        users,
        area_radius_km: cfg.area_radius_km,
    }
}

/// Three-slope path loss in dB for a link of length `r_km`.
///
/// Beyond the outer breakpoint `d1_km` the loss falls off at 35 dB/decade;
/// between the breakpoints at 20 dB/decade; inside `d0_km` it is constant.
/// The curve is continuous at both breakpoints. `l_pl_db` is the fixed loss
/// constant absorbing carrier frequency and antenna heights.
pub fn path_loss_db(r_km: f64, d0_km: f64, d1_km: f64, l_pl_db: f64) -> f64 {
    assert!(r_km >= 0.0, "distance must be nonnegative, got {r_km}");
    if r_km > d1_km {
        -l_pl_db - 35.0 * r_km.log10()
    } else if r_km >= d0_km {
        -l_pl_db - 15.0 * d1_km.log10() - 20.0 * r_km.log10()
    } else {
        -l_pl_db - 15.0 * d1_km.log10() - 20.0 * d0_km.log10()
    }
}

/// Builds the M×K large-scale fading matrix for a topology.
///
/// The whole model is assembled in dB — path loss plus, for links longer
/// than `d1_km` (or all links when `cfg.shadow_inside` is set), an additive
/// N(0, σ_sh²) shadowing term — and exponentiated once:
/// β_mk = 10^((PL(r_mk) + σ_sh·z_mk)/10).
///
/// One shadowing variate is drawn for every (m, k) pair in row-major order
/// (all users of AP 0, then AP 1, ...), regardless of whether the link
/// applies it, so toggling `shadow_inside` never perturbs the draws of other
/// links.
pub fn build_beta_matrix(topo: &Topology, cfg: &SimConfig, rng: &mut impl Rng) -> BetaMatrix {
    let m_aps = topo.num_aps();
    let k_users = topo.num_users();
    let mut beta = DMatrix::zeros(m_aps, k_users);
    for m in 0..m_aps {
        for k in 0..k_users {
            let r = topo.distance_km(m, k);
            let pl_db = path_loss_db(r, cfg.d0_km, cfg.d1_km, cfg.pathloss_const_db);
            let z: f64 = rng.sample(StandardNormal);
            let shadowed = r > cfg.d1_km || cfg.shadow_inside;
            let gain_db = if shadowed {
                pl_db + cfg.sigma_shadow_db * z
            } else {
                pl_db
            };
            beta[(m, k)] = 10f64.powf(gain_db / 10.0);
        }
    }
    beta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{self, stage};
    use proptest::prelude::*;

    fn test_cfg() -> SimConfig {
        SimConfig::default()
    }

    #[test]
    fn all_points_stay_inside_the_disk() {
        let cfg = SimConfig {
            num_aps: 5000,
            num_users: 5000,
            ..test_cfg()
        };
        let mut rng = seed::stream(11, 0, stage::TOPOLOGY, &[]);
        let topo = generate_topology(&cfg, &mut rng);
        for &(x, y) in topo.aps.iter().chain(topo.users.iter()) {
            assert!(x.hypot(y) <= cfg.area_radius_km + 1e-12);
        }
    }

    #[test]
    fn mean_squared_distance_matches_uniform_disk_value() {
        // For a uniform draw on a disk of radius R, E[d²] = R²/2.
        let cfg = SimConfig {
            num_aps: 100_000,
            num_users: 1,
            area_radius_km: 1.0,
            d1_km: 0.05,
            ..test_cfg()
        };
        let mut rng = seed::stream(42, 0, stage::TOPOLOGY, &[]);
        let topo = generate_topology(&cfg, &mut rng);
        let mean_sq: f64 = topo
            .aps
            .iter()
            .map(|&(x, y)| x * x + y * y)
            .sum::<f64>()
            / topo.num_aps() as f64;
        let expected = cfg.area_radius_km * cfg.area_radius_km / 2.0;
        assert!(
            (mean_sq / expected - 1.0).abs() < 0.01,
            "mean squared distance {mean_sq} deviates from {expected}"
        );
    }

    #[test]
    fn identical_seeds_reproduce_the_topology_bit_for_bit() {
        let cfg = test_cfg();
        let a = generate_topology(&cfg, &mut seed::stream(7, 3, stage::TOPOLOGY, &[]));
        let b = generate_topology(&cfg, &mut seed::stream(7, 3, stage::TOPOLOGY, &[]));
        assert_eq!(a, b);
    }

    #[test]
    fn reference_distance_gives_minus_l_pl() {
        // At r = 1 km only the constant survives: PL = −L_pl − 35·log10(1).
        assert_eq!(path_loss_db(1.0, 0.01, 0.05, 140.7), -140.7);
    }

    #[test]
    fn path_loss_is_continuous_at_both_breakpoints() {
        let (d0, d1, l) = (0.01, 0.05, 140.7);
        let eps = 1e-12;
        let at_d1_above = path_loss_db(d1 + eps, d0, d1, l);
        let at_d1 = path_loss_db(d1, d0, d1, l);
        assert!((at_d1_above - at_d1).abs() < 1e-9);
        let at_d0_below = path_loss_db(d0 - eps, d0, d1, l);
        let at_d0 = path_loss_db(d0, d0, d1, l);
        assert!((at_d0_below - at_d0).abs() < 1e-9);
    }

    #[test]
    fn zero_shadowing_gives_exact_path_loss() {
        let cfg = SimConfig {
            sigma_shadow_db: 0.0,
            ..test_cfg()
        };
        let topo = Topology {
            aps: vec![(0.0, 0.0), (0.2, 0.1)],
            users: vec![(0.3, 0.0), (0.3, 0.0)],
            area_radius_km: cfg.area_radius_km,
        };
        let mut rng = seed::stream(5, 0, stage::SHADOWING, &[]);
        let beta = build_beta_matrix(&topo, &cfg, &mut rng);
        for m in 0..2 {
            for k in 0..2 {
                let pl = path_loss_db(
                    topo.distance_km(m, k),
                    cfg.d0_km,
                    cfg.d1_km,
                    cfg.pathloss_const_db,
                );
                assert_eq!(beta[(m, k)], 10f64.powf(pl / 10.0));
            }
        }
        // Colocated users see identical columns without shadowing.
        assert_eq!(beta.column(0), beta.column(1));
    }

    #[test]
    fn shadowing_spread_matches_sigma() {
        // 10·log10(β) = PL + σ_sh·z at fixed distance, so the dB sample
        // standard deviation over many links estimates σ_sh.
        let cfg = test_cfg();
        let n = 100_000;
        let topo = Topology {
            aps: vec![(0.3, 0.0); n],
            users: vec![(0.0, 0.0)],
            area_radius_km: cfg.area_radius_km,
        };
        let mut rng = seed::stream(9, 0, stage::SHADOWING, &[]);
        let beta = build_beta_matrix(&topo, &cfg, &mut rng);
        let db: Vec<f64> = (0..n).map(|m| 10.0 * beta[(m, 0)].log10()).collect();
        let mean = db.iter().sum::<f64>() / n as f64;
        let var = db.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        assert!(
            (std / cfg.sigma_shadow_db - 1.0).abs() < 0.02,
            "sample std {std} deviates from {}",
            cfg.sigma_shadow_db
        );
    }

    #[test]
    fn shadowing_is_skipped_inside_the_breakpoint_by_default() {
        let cfg = test_cfg();
        let topo = Topology {
            aps: vec![(0.0, 0.0)],
            users: vec![(0.02, 0.0)], // d0 < r < d1
            area_radius_km: cfg.area_radius_km,
        };
        let mut rng = seed::stream(3, 1, stage::SHADOWING, &[]);
        let beta = build_beta_matrix(&topo, &cfg, &mut rng);
        let pl = path_loss_db(0.02, cfg.d0_km, cfg.d1_km, cfg.pathloss_const_db);
        assert_eq!(beta[(0, 0)], 10f64.powf(pl / 10.0));

        // With shadow_inside the same stream produces a shadowed coefficient.
        let cfg_inside = SimConfig {
            shadow_inside: true,
            ..cfg
        };
        let mut rng = seed::stream(3, 1, stage::SHADOWING, &[]);
        let beta_inside = build_beta_matrix(&topo, &cfg_inside, &mut rng);
        assert_ne!(beta_inside[(0, 0)], beta[(0, 0)]);
    }

    #[test]
    fn identical_streams_reproduce_beta() {
        let cfg = test_cfg();
        let topo = generate_topology(&cfg, &mut seed::stream(1, 0, stage::TOPOLOGY, &[]));
        let a = build_beta_matrix(&topo, &cfg, &mut seed::stream(1, 0, stage::SHADOWING, &[]));
        let b = build_beta_matrix(&topo, &cfg, &mut seed::stream(1, 0, stage::SHADOWING, &[]));
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn path_loss_never_increases_with_distance(
            r in 0.0f64..2.0,
            step in 1e-6f64..0.5,
        ) {
            let closer = path_loss_db(r, 0.01, 0.05, 140.7);
            let farther = path_loss_db(r + step, 0.01, 0.05, 140.7);
            prop_assert!(farther <= closer + 1e-12);
        }

        #[test]
        fn beta_is_finite_and_positive(r in 0.0f64..2.0) {
            let pl = path_loss_db(r, 0.01, 0.05, 140.7);
            let beta = 10f64.powf(pl / 10.0);
            prop_assert!(beta.is_finite() && beta > 0.0);
        }
    }
}
