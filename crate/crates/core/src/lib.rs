//! Cell-free massive MIMO user scheduling: spatial-correlation grouping via
//! semidefinite relaxation, randomized rounding, and bandwidth allocation.
//!
//! The pipeline mirrors a downlink cell-free system with M access points and
//! K single-antenna users sharing a coherence interval of T_c samples:
//!
//! 1. [`topology`] drops APs and users uniformly on a disk and produces the
//!    large-scale fading matrix β (three-slope path loss plus log-normal
//!    shadowing).
//! 2. [`channel`] handles the small-scale layer: Rayleigh fading draws, MMSE
//!    channel estimation, and the favorable-propagation statistics that
//!    motivate grouping.
//! 3. [`grouping`] builds the correlation graph w_kj = Σ_m β_mk·β_mj and
//!    partitions users so correlated pairs land in different groups — a
//!    semidefinite relaxation solved by the interior-point method in
//!    [`conic`], rounded by Gaussian sampling, with greedy and exhaustive
//!    baselines.
//! 4. [`allocation`] prices each group's spectral efficiency and splits the
//!    band across groups by the linear-programming solver in [`simplex`].
//! 5. [`experiments`] wires the stages into reproducible Monte Carlo runs,
//!    and [`io`] persists them as CSV/JSON artifacts with plot scripts.

pub mod allocation;
pub mod channel;
pub mod config;
pub mod conic;
pub mod error;
pub mod experiments;
pub mod grouping;
pub mod io;
pub mod seed;
pub mod simplex;
pub mod stats;
pub mod topology;

pub use config::SimConfig;
pub use error::{Error, Result};
