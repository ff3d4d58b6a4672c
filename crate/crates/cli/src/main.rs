//! Command-line front end for the cell-free user-grouping toolkit.
//!
//! Subcommands either run Monte Carlo campaigns (`simulate`, `cdf`, `sweep`)
//! or solve standalone instances from CSV files (`group`, `allocate`). All
//! artifacts land under the output directory; nothing else is written. Every
//! error class maps to its own exit code (see [`exit_code`]).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use cf_grouper::config::{normalized_power_from_mw, FpMetric, RoundingNorm};
use cf_grouper::experiments::{
    correlation_cdf_experiment, run_simulation, throughput_sweep_experiment,
};
use cf_grouper::grouping::{gaussian_round, objective_binary, solve_sdr, WeightGraph};
use cf_grouper::io::{
    read_rate_table_csv, read_weight_matrix_csv, render_allocation_csv, render_grouping_csv,
    render_metadata_json, write_cdf_outputs, write_simulation_outputs, write_sweep_outputs,
    OutputStager, RunMetadata,
};
use cf_grouper::seed::{self, stage};
use cf_grouper::{allocation, SimConfig};

// ---------------------------------------------------------------------------
// Arguments
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "cf-grouper",
    version,
    about = "Cell-free massive MIMO user grouping and bandwidth allocation",
    propagate_version = true
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration file; omitted keys fall back to built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master RNG seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of Monte Carlo trials (overrides the config file).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads; falls back to the CF_GROUPER_JOBS environment
    /// variable, then to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory for all artifacts.
    #[arg(short, long, global = true, default_value = "out")]
    output: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full campaign at the configured network size and write
    /// per-trial CSVs plus a summary.
    Simulate,
    /// Compare spatial-correlation CDFs of the grouped and all-users schemes
    /// across AP counts.
    Cdf {
        /// Comma-separated AP counts.
        #[arg(long, value_delimiter = ',', default_value = "100,200")]
        m_list: Vec<usize>,
    },
    /// Sweep mean per-user throughput over a grid of network sizes.
    Sweep {
        /// Comma-separated AP counts.
        #[arg(long, value_delimiter = ',', default_value = "40,80,120,160,200")]
        m_list: Vec<usize>,
        /// Comma-separated user counts.
        #[arg(long, value_delimiter = ',', default_value = "10,20")]
        k_list: Vec<usize>,
    },
    /// Group users from a K×K weight-matrix CSV (no header, K rows of K
    /// comma-separated values).
    Group {
        /// Weight matrix CSV.
        instance: PathBuf,
    },
    /// Allocate bandwidth from a rate-table CSV with rows
    /// `group,user,rate_bits_s`.
    Allocate {
        /// Rate table CSV.
        instance: PathBuf,
    },
}

// ---------------------------------------------------------------------------
// Errors and exit codes
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum CliError {
    /// Config file missing or unreadable.
    ConfigRead(PathBuf, std::io::Error),
    /// Config file is not valid JSON or has unknown/ill-typed keys.
    ConfigParse(PathBuf, serde_json::Error),
    /// Bad option values outside of the config file.
    BadOption(String),
    Lib(cf_grouper::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::ConfigRead(path, e) => write!(f, "cannot read {}: {e}", path.display()),
            CliError::ConfigParse(path, e) => write!(f, "cannot parse {}: {e}", path.display()),
            CliError::BadOption(msg) => write!(f, "{msg}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<cf_grouper::Error> for CliError {
    fn from(e: cf_grouper::Error) -> Self {
        CliError::Lib(e)
    }
}

/// One exit code per failure class (clap itself uses 2 for usage errors):
/// 3 unreadable config, 4 malformed config, 5 invalid configuration values,
/// 6 solver non-convergence, 7 infeasible instance, 8 instance too large,
/// 9 invalid instance data, 10 output I/O failure.
fn exit_code(err: &CliError) -> u8 {
    use cf_grouper::Error::*;
    match err {
        CliError::ConfigRead(..) => 3,
        CliError::ConfigParse(..) => 4,
        CliError::BadOption(_) => 5,
        CliError::Lib(e) => match e {
            InvalidConfig { .. } => 5,
            SolverNotConverged { .. } => 6,
            Infeasible { .. } => 7,
            InstanceTooLarge { .. } | GroupTooLarge { .. } => 8,
            InvalidInstance(_) => 9,
            Io { .. } => 10,
        },
    }
}

// ---------------------------------------------------------------------------
// Config file handling
// ---------------------------------------------------------------------------

/// JSON configuration schema. Keys mirror the resolved configuration except
/// for transmit powers, which are given in milliwatts (`*_mw`) and converted
/// against the configured bandwidth and noise figure, or directly in
/// noise-normalized form (`*_norm`, which wins when both are present).
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    num_aps: Option<usize>,
    num_users: Option<usize>,
    num_groups: Option<usize>,
    pilot_budget: Option<usize>,
    max_memberships: Option<usize>,
    coherence_length: Option<usize>,
    bandwidth_hz: Option<f64>,
    power_pilot_mw: Option<f64>,
    power_downlink_mw: Option<f64>,
    power_pilot_norm: Option<f64>,
    power_downlink_norm: Option<f64>,
    carrier_freq_hz: Option<f64>,
    noise_figure_db: Option<f64>,
    area_radius_km: Option<f64>,
    sigma_shadow_db: Option<f64>,
    d0_km: Option<f64>,
    d1_km: Option<f64>,
    pathloss_const_db: Option<f64>,
    shadow_inside: Option<bool>,
    fp_metric: Option<FpMetric>,
    rounding_norm: Option<RoundingNorm>,
    rng_seed: Option<u64>,
    num_trials: Option<usize>,
    num_rounding_samples: Option<usize>,
    sdr_max_iter: Option<usize>,
    min_rates_bits_s: Option<Vec<f64>>,
}

/// Milliwatt inputs preserved for the run metadata.
#[derive(Debug, Default, Clone, Copy)]
struct PowerLog {
    pilot_mw: Option<f64>,
    downlink_mw: Option<f64>,
}

/// Loads the config file (when given), overlays it on the defaults, applies
/// command-line overrides, validates, and prints any validation warnings.
fn resolve_config(common: &CommonArgs) -> Result<(SimConfig, PowerLog), CliError> {
    let mut cfg = SimConfig::default();
    let mut log = PowerLog::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::ConfigRead(path.clone(), e))?;
        let file: FileConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::ConfigParse(path.clone(), e))?;
        apply_file_config(&mut cfg, &mut log, &file);
    }
    if let Some(seed) = common.seed {
        cfg.rng_seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.num_trials = trials;
    }
    for warning in cfg.validate()? {
        eprintln!("warning: {warning}");
    }
    Ok((cfg, log))
}

fn apply_file_config(cfg: &mut SimConfig, log: &mut PowerLog, file: &FileConfig) {
    macro_rules! overlay {
        ($($field:ident),*) => {
            $(if let Some(v) = file.$field { cfg.$field = v; })*
        };
    }
    overlay!(
        num_aps,
        num_users,
        num_groups,
        pilot_budget,
        max_memberships,
        coherence_length,
        bandwidth_hz,
        carrier_freq_hz,
        noise_figure_db,
        area_radius_km,
        sigma_shadow_db,
        d0_km,
        d1_km,
        pathloss_const_db,
        shadow_inside,
        fp_metric,
        rounding_norm,
        rng_seed,
        num_trials,
        num_rounding_samples,
        sdr_max_iter
    );
    if let Some(rates) = &file.min_rates_bits_s {
        cfg.min_rates_bits_s = rates.clone();
    }
    // Powers convert against the *final* bandwidth and noise figure; direct
    // normalized values take precedence over milliwatts.
    if let Some(mw) = file.power_pilot_mw {
        log.pilot_mw = Some(mw);
        cfg.power_pilot = normalized_power_from_mw(mw, cfg.bandwidth_hz, cfg.noise_figure_db);
        eprintln!(
            "power_pilot: {mw} mW -> {:.6e} (noise-normalized)",
            cfg.power_pilot
        );
    }
    if let Some(mw) = file.power_downlink_mw {
        log.downlink_mw = Some(mw);
        cfg.power_downlink = normalized_power_from_mw(mw, cfg.bandwidth_hz, cfg.noise_figure_db);
        eprintln!(
            "power_downlink: {mw} mW -> {:.6e} (noise-normalized)",
            cfg.power_downlink
        );
    }
    if let Some(p) = file.power_pilot_norm {
        cfg.power_pilot = p;
    }
    if let Some(p) = file.power_downlink_norm {
        cfg.power_downlink = p;
    }
}

/// Applies `--jobs` / `CF_GROUPER_JOBS` to the global worker pool. Results
/// do not depend on the thread count; this only bounds parallelism.
fn configure_jobs(common: &CommonArgs) -> Result<(), CliError> {
    let jobs = match common.jobs {
        Some(n) => Some(n),
        None => match std::env::var("CF_GROUPER_JOBS") {
            Ok(v) => Some(v.parse::<usize>().map_err(|_| {
                CliError::BadOption(format!("CF_GROUPER_JOBS must be a positive integer, got {v:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::BadOption("--jobs must be at least 1".into()));
        }
        // Ignore the error if a pool already exists (e.g. repeated calls in
        // tests); the run stays correct either way.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

fn cmd_simulate(cfg: &SimConfig, log: PowerLog, out_dir: &Path) -> Result<(), CliError> {
    let out = run_simulation(cfg)?;
    let mut meta = RunMetadata::new("simulate", cfg);
    meta.power_pilot_mw = log.pilot_mw;
    meta.power_downlink_mw = log.downlink_mw;
    let files = write_simulation_outputs(out_dir, &meta, &out)?;
    for point in &out.summary {
        println!(
            "{}: mean {:.4e} bits/s over {} trials ({} failed)",
            point.scheme, point.mean_bits_s, point.trials, point.failed
        );
    }
    println!("wrote {} files to {}", files.len(), out_dir.display());
    Ok(())
}

fn cmd_cdf(cfg: &SimConfig, log: PowerLog, m_list: &[usize], out_dir: &Path) -> Result<(), CliError> {
    let sweep = correlation_cdf_experiment(cfg, m_list)?;
    let mut meta = RunMetadata::new("cdf", cfg);
    meta.power_pilot_mw = log.pilot_mw;
    meta.power_downlink_mw = log.downlink_mw;
    meta.m_list = Some(m_list);
    let files = write_cdf_outputs(out_dir, &meta, &sweep)?;
    println!(
        "collected {} CDF points across M = {m_list:?}; wrote {} files to {}",
        sweep.cdfs.len(),
        files.len(),
        out_dir.display()
    );
    Ok(())
}

fn cmd_sweep(
    cfg: &SimConfig,
    log: PowerLog,
    m_list: &[usize],
    k_list: &[usize],
    out_dir: &Path,
) -> Result<(), CliError> {
    let sweep = throughput_sweep_experiment(cfg, m_list, k_list)?;
    let mut meta = RunMetadata::new("sweep", cfg);
    meta.power_pilot_mw = log.pilot_mw;
    meta.power_downlink_mw = log.downlink_mw;
    meta.m_list = Some(m_list);
    meta.k_list = Some(k_list);
    let files = write_sweep_outputs(out_dir, &meta, &sweep)?;
    for p in &sweep.points {
        println!(
            "{} M={} K={}: mean {:.4e} bits/s ({} trials, {} failed)",
            p.scheme, p.num_aps, p.num_users, p.mean_bits_s, p.trials, p.failed
        );
    }
    println!("wrote {} files to {}", files.len(), out_dir.display());
    Ok(())
}

fn cmd_group(cfg: &SimConfig, instance: &Path, out_dir: &Path) -> Result<(), CliError> {
    let w = WeightGraph::from_matrix(read_weight_matrix_csv(instance)?)?;
    let sdr = solve_sdr(
        &w,
        cfg.num_groups,
        cfg.max_memberships,
        cfg.pilot_budget,
        cfg.sdr_max_iter,
    )?;
    let mut rng = seed::stream(cfg.rng_seed, 0, stage::ROUNDING, &[w.num_users() as u64]);
    let grouping = gaussian_round(
        &sdr,
        &w,
        cfg.max_memberships,
        cfg.pilot_budget,
        cfg.num_rounding_samples,
        cfg.rounding_norm,
        &mut rng,
    );
    let mut stager = OutputStager::new(out_dir)?;
    stager.write_file("grouping.csv", &render_grouping_csv(&grouping))?;
    stager.write_file("metadata.json", &render_metadata_json(&RunMetadata::new("group", cfg)))?;
    stager.commit()?;
    for c in 0..grouping.num_groups() {
        let members: Vec<String> = grouping.members(c).iter().map(usize::to_string).collect();
        println!("group {c}: {}", members.join(" "));
    }
    println!(
        "objective {:.6} (relaxation bound {:.6}); wrote grouping.csv to {}",
        objective_binary(&grouping, &w),
        sdr.objective_value,
        out_dir.display()
    );
    Ok(())
}

fn cmd_allocate(cfg: &SimConfig, instance: &Path, out_dir: &Path) -> Result<(), CliError> {
    let table = read_rate_table_csv(instance)?;
    let min_rates = if cfg.min_rates_bits_s.is_empty() {
        vec![0.0; table.num_users()]
    } else if cfg.min_rates_bits_s.len() == table.num_users() {
        cfg.min_rates_bits_s.clone()
    } else {
        return Err(CliError::BadOption(format!(
            "min_rates_bits_s has {} entries but the rate table covers {} users",
            cfg.min_rates_bits_s.len(),
            table.num_users()
        )));
    };
    let alloc = allocation::solve_bandwidth_lp(&table, &min_rates)?;
    let mut stager = OutputStager::new(out_dir)?;
    stager.write_file("allocation.csv", &render_allocation_csv(&alloc))?;
    stager.write_file("metadata.json", &render_metadata_json(&RunMetadata::new("allocate", cfg)))?;
    stager.commit()?;
    for (c, g) in alloc.gamma.iter().enumerate() {
        println!("group {c}: gamma {g:.6}");
    }
    println!(
        "sum throughput {:.6e} bits/s; wrote allocation.csv to {}",
        alloc.objective,
        out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_jobs(&cli.common)?;
    let (cfg, log) = resolve_config(&cli.common)?;
    let out_dir = &cli.common.output;
    match &cli.command {
        Command::Simulate => cmd_simulate(&cfg, log, out_dir),
        Command::Cdf { m_list } => cmd_cdf(&cfg, log, m_list, out_dir),
        Command::Sweep { m_list, k_list } => cmd_sweep(&cfg, log, m_list, k_list, out_dir),
        Command::Group { instance } => cmd_group(&cfg, instance, out_dir),
        Command::Allocate { instance } => cmd_allocate(&cfg, instance, out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
