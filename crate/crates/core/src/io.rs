//! File input/output: CSV renderers and readers, run metadata, gnuplot
//! scripts, and a staged writer that never leaves partial outputs behind.
//!
//! All renderers are pure (data in, `String` out) so outputs are
//! byte-reproducible; the staging layer writes every file into a scratch
//! subdirectory first and renames into place only once the whole set has
//! been produced.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::allocation::{AllocationResult, RateTable};
use crate::config::{noise_power_dbm, SimConfig};
use crate::error::{Error, Result};
use crate::experiments::{SimulationOutput, SweepResult};
use crate::grouping::Grouping;

/// Note stamped into every rate-bearing CSV: the grouped scheme drops the
/// served user's own beam from its interference sum, the conventional
/// baseline keeps it.
const SELF_INTERFERENCE_NOTE: &str =
    "# self_interference: sg_ba=excluded conventional=included";

// ---------------------------------------------------------------------------
// Staged output directory
// ---------------------------------------------------------------------------

/// Writes a set of output files atomically with respect to failures: files
/// accumulate in a scratch subdirectory and move into the output directory
/// only on [`OutputStager::commit`]. Dropping an uncommitted stager removes
/// the scratch directory, so an error mid-run leaves no partial outputs.
pub struct OutputStager {
    out_dir: PathBuf,
    staging: PathBuf,
    files: Vec<String>,
    committed: bool,
}

impl OutputStager {
    pub fn new(out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
        let staging = out_dir.join(format!(".staging-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging)
                .map_err(|e| Error::io(staging.display().to_string(), e))?;
        }
        fs::create_dir(&staging).map_err(|e| Error::io(staging.display().to_string(), e))?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            staging,
            files: Vec::new(),
            committed: false,
        })
    }

    /// Stages one file (a bare name, no subdirectories).
    pub fn write_file(&mut self, name: &str, contents: &str) -> Result<()> {
        debug_assert!(!name.contains('/'), "staged files are flat");
        let path = self.staging.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(path.display().to_string(), e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Moves every staged file into the output directory and returns their
    /// final paths.
    pub fn commit(mut self) -> Result<Vec<PathBuf>> {
        let mut finals = Vec::with_capacity(self.files.len());
        for name in &self.files {
            let from = self.staging.join(name);
            let to = self.out_dir.join(name);
            fs::rename(&from, &to).map_err(|e| Error::io(to.display().to_string(), e))?;
            finals.push(to);
        }
        fs::remove_dir_all(&self.staging)
            .map_err(|e| Error::io(self.staging.display().to_string(), e))?;
        self.committed = true;
        Ok(finals)
    }
}

impl Drop for OutputStager {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}

// ---------------------------------------------------------------------------
// Run metadata
// ---------------------------------------------------------------------------

/// Everything a reader needs to reproduce a run: the resolved configuration
/// (normalized powers), the original milliwatt inputs when the run came from
/// a config file, and the sweep axes. Contains no timestamps or host
/// details, so reruns serialize identically.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata<'a> {
    pub tool_version: &'static str,
    pub command: &'a str,
    pub config: &'a SimConfig,
    pub noise_power_dbm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_pilot_mw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_downlink_mw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_list: Option<&'a [usize]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_list: Option<&'a [usize]>,
    pub self_interference: SelfInterferenceNote,
}

/// Structured form of [`SELF_INTERFERENCE_NOTE`] for the JSON metadata.
#[derive(Debug, Clone, Serialize)]
pub struct SelfInterferenceNote {
    pub sg_ba: &'static str,
    pub conventional: &'static str,
}

impl<'a> RunMetadata<'a> {
    pub fn new(command: &'a str, config: &'a SimConfig) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            noise_power_dbm: noise_power_dbm(config.bandwidth_hz, config.noise_figure_db),
            power_pilot_mw: None,
            power_downlink_mw: None,
            m_list: None,
            k_list: None,
            self_interference: SelfInterferenceNote {
                sg_ba: "excluded",
                conventional: "included",
            },
        }
    }
}

pub fn render_metadata_json(meta: &RunMetadata) -> String {
    let mut text = serde_json::to_string_pretty(meta).expect("metadata serializes");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// CSV renderers
// ---------------------------------------------------------------------------

/// `scheme,M,value,cdf` rows of the pooled correlation CDFs.
pub fn render_cdf_csv(sweep: &SweepResult) -> String {
    let mut out = String::from("scheme,M,value,cdf\n");
    for p in &sweep.cdfs {
        out.push_str(&format!("{},{},{},{}\n", p.scheme, p.num_aps, p.value, p.cdf));
    }
    out
}

/// `scheme,M,K,mean_bits_s,ci95_bits_s,trials,failed,sum_bits_s` summary
/// rows. The confidence column prints NaN below 30 completed trials.
pub fn render_throughput_csv(sweep: &SweepResult) -> String {
    let mut out = SELF_INTERFERENCE_NOTE.to_string() + "\n";
    out.push_str("scheme,M,K,mean_bits_s,ci95_bits_s,trials,failed,sum_bits_s\n");
    for p in &sweep.points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.scheme,
            p.num_aps,
            p.num_users,
            p.mean_bits_s,
            p.ci95_bits_s,
            p.trials,
            p.failed,
            p.sum_bits_s
        ));
    }
    out
}

/// Per-trial per-user throughputs: `trial_id,scheme,user,throughput_bits_s`.
pub fn render_trials_csv(out_data: &SimulationOutput) -> String {
    let mut out = SELF_INTERFERENCE_NOTE.to_string() + "\n";
    out.push_str("trial_id,scheme,user,throughput_bits_s\n");
    for (sg, conv) in &out_data.trials {
        for t in [sg, conv] {
            for (k, r) in t.throughput_bits_s.iter().enumerate() {
                out.push_str(&format!("{},{},{},{}\n", t.trial_id, t.scheme, k, r));
            }
        }
    }
    out
}

/// Grouped-scheme memberships: `trial_id,user,group`.
pub fn render_assignments_csv(out_data: &SimulationOutput) -> String {
    let mut out = String::from("trial_id,user,group\n");
    for (sg, _) in &out_data.trials {
        let grouping = sg.grouping.as_ref().expect("grouped trials keep their grouping");
        for c in 0..grouping.num_groups() {
            for k in grouping.members(c) {
                out.push_str(&format!("{},{},{}\n", sg.trial_id, k, c));
            }
        }
    }
    out
}

/// Band fractions chosen by the allocation: `trial_id,group,gamma`.
pub fn render_gamma_csv(out_data: &SimulationOutput) -> String {
    let mut out = String::from("trial_id,group,gamma\n");
    for (sg, _) in &out_data.trials {
        let alloc = sg.allocation.as_ref().expect("grouped trials keep their allocation");
        for (c, g) in alloc.gamma.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", sg.trial_id, c, g));
        }
    }
    out
}

/// Pooled correlation samples: `trial_id,scheme,value`.
pub fn render_correlations_csv(out_data: &SimulationOutput) -> String {
    let mut out = String::from("trial_id,scheme,value\n");
    for (sg, conv) in &out_data.trials {
        for t in [sg, conv] {
            for v in &t.correlations {
                out.push_str(&format!("{},{},{}\n", t.trial_id, t.scheme, v));
            }
        }
    }
    out
}

/// Per-scheme summary with the same schema as the sweep table.
pub fn render_summary_csv(out_data: &SimulationOutput) -> String {
    render_throughput_csv(&SweepResult {
        points: out_data.summary.clone(),
        cdfs: Vec::new(),
    })
}

/// Failed trials with their reasons: `trial_id,error`. Errors are quoted so
/// embedded commas stay in one field.
pub fn render_failures_csv(out_data: &SimulationOutput) -> String {
    let mut out = String::from("trial_id,error\n");
    for (trial_id, reason) in &out_data.failures {
        out.push_str(&format!("{},\"{}\"\n", trial_id, reason.replace('"', "\"\"")));
    }
    out
}

/// Standalone grouping output: `user,group` memberships.
pub fn render_grouping_csv(grouping: &Grouping) -> String {
    let mut out = String::from("user,group\n");
    for c in 0..grouping.num_groups() {
        for k in grouping.members(c) {
            out.push_str(&format!("{},{}\n", k, c));
        }
    }
    out
}

/// Standalone allocation output: `group,gamma` then `user,rate_bits_s`.
pub fn render_allocation_csv(alloc: &AllocationResult) -> String {
    let mut out = String::from("group,gamma\n");
    for (c, g) in alloc.gamma.iter().enumerate() {
        out.push_str(&format!("{},{}\n", c, g));
    }
    out.push_str("user,rate_bits_s\n");
    for (k, r) in alloc.per_user_rate.iter().enumerate() {
        out.push_str(&format!("{},{}\n", k, r));
    }
    out
}

// ---------------------------------------------------------------------------
// Gnuplot scripts
// ---------------------------------------------------------------------------

/// Script plotting the correlation CDFs from `cdf.csv`, one curve per
/// (scheme, M).
pub fn render_cdf_gnuplot(m_list: &[usize]) -> String {
    let mut out = String::from(
        "set datafile separator comma\n\
         set xlabel \"normalized spatial correlation\"\n\
         set ylabel \"empirical CDF\"\n\
         set key bottom right\n\
         set grid\n\
         plot \\\n",
    );
    let mut curves = Vec::new();
    for scheme in ["sg_ba", "conventional"] {
        for m in m_list {
            curves.push(format!(
                "  'cdf.csv' every ::1 using 3:(stringcolumn(1) eq \"{scheme}\" && \
                 column(2) == {m} ? column(4) : NaN) with steps title \"{scheme} M={m}\""
            ));
        }
    }
    out.push_str(&curves.join(", \\\n"));
    out.push('\n');
    out
}

/// Script plotting mean throughput (with confidence bars) against M from
/// `throughput.csv`, one curve per (scheme, K).
pub fn render_throughput_gnuplot(k_list: &[usize]) -> String {
    let mut out = String::from(
        "set datafile separator comma\n\
         set xlabel \"number of access points M\"\n\
         set ylabel \"mean per-user throughput (bits/s)\"\n\
         set key top left\n\
         set grid\n\
         plot \\\n",
    );
    let mut curves = Vec::new();
    for scheme in ["sg_ba", "conventional"] {
        for k in k_list {
            let cond = format!("stringcolumn(1) eq \"{scheme}\" && column(3) == {k}");
            curves.push(format!(
                "  'throughput.csv' every ::2 using 2:({cond} ? column(4) : NaN):({cond} ? \
                 column(5) : NaN) with yerrorlines title \"{scheme} K={k}\""
            ));
        }
    }
    out.push_str(&curves.join(", \\\n"));
    out.push('\n');
    out
}

// ---------------------------------------------------------------------------
// Whole-run writers
// ---------------------------------------------------------------------------

/// Writes the full artifact set of a single-point simulation campaign.
pub fn write_simulation_outputs(
    out_dir: &Path,
    meta: &RunMetadata,
    out_data: &SimulationOutput,
) -> Result<Vec<PathBuf>> {
    let mut stager = OutputStager::new(out_dir)?;
    stager.write_file("metadata.json", &render_metadata_json(meta))?;
    stager.write_file("trials.csv", &render_trials_csv(out_data))?;
    stager.write_file("assignments.csv", &render_assignments_csv(out_data))?;
    stager.write_file("gamma.csv", &render_gamma_csv(out_data))?;
    stager.write_file("correlations.csv", &render_correlations_csv(out_data))?;
    stager.write_file("summary.csv", &render_summary_csv(out_data))?;
    stager.write_file("failures.csv", &render_failures_csv(out_data))?;
    stager.commit()
}

/// Writes the correlation-CDF experiment artifacts.
pub fn write_cdf_outputs(
    out_dir: &Path,
    meta: &RunMetadata,
    sweep: &SweepResult,
) -> Result<Vec<PathBuf>> {
    let m_list = meta.m_list.unwrap_or(&[]);
    let mut stager = OutputStager::new(out_dir)?;
    stager.write_file("metadata.json", &render_metadata_json(meta))?;
    stager.write_file("cdf.csv", &render_cdf_csv(sweep))?;
    stager.write_file("summary.csv", &render_throughput_csv(sweep))?;
    stager.write_file("cdf.gp", &render_cdf_gnuplot(m_list))?;
    stager.commit()
}

/// Writes the throughput-sweep artifacts.
pub fn write_sweep_outputs(
    out_dir: &Path,
    meta: &RunMetadata,
    sweep: &SweepResult,
) -> Result<Vec<PathBuf>> {
    let k_list = meta.k_list.unwrap_or(&[]);
    let mut stager = OutputStager::new(out_dir)?;
    stager.write_file("metadata.json", &render_metadata_json(meta))?;
    stager.write_file("throughput.csv", &render_throughput_csv(sweep))?;
    stager.write_file("throughput.gp", &render_throughput_gnuplot(k_list))?;
    stager.commit()
}

// ---------------------------------------------------------------------------
// CSV readers
// ---------------------------------------------------------------------------

/// Splits CSV text into trimmed data lines, skipping blanks and `#` comments.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn bad_row(path: &Path, line: usize, reason: impl std::fmt::Display) -> Error {
    Error::InvalidInstance(format!("{}:{line}: {reason}", path.display()))
}

/// Reads a square symmetric weight matrix from CSV: K rows of K comma-
/// separated values, no header; blank lines and `#` comments are ignored.
pub fn read_weight_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in data_lines(&text) {
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| bad_row(path, line_no, format!("not a number: {cell:?}")))
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(bad_row(
                    path,
                    line_no,
                    format!("expected {} columns, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidInstance(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    if rows.len() != rows[0].len() {
        return Err(Error::InvalidInstance(format!(
            "{}: matrix is {}x{}, expected square",
            path.display(),
            rows.len(),
            rows[0].len()
        )));
    }
    let k = rows.len();
    Ok(DMatrix::from_fn(k, k, |i, j| rows[i][j]))
}

/// Reads a rate table from CSV rows `group,user,rate_bits_s` (an optional
/// header with those names is skipped). Unlisted pairs default to rate 0,
/// i.e. user not in that group; duplicate pairs are rejected.
pub fn read_rate_table_csv(path: &Path) -> Result<RateTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for (line_no, line) in data_lines(&text) {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 3 {
            return Err(bad_row(
                path,
                line_no,
                format!("expected 3 columns (group,user,rate_bits_s), found {}", cells.len()),
            ));
        }
        if cells[0].parse::<usize>().is_err() && entries.is_empty() {
            continue; // header row
        }
        let c: usize = cells[0]
            .parse()
            .map_err(|_| bad_row(path, line_no, format!("bad group index {:?}", cells[0])))?;
        let k: usize = cells[1]
            .parse()
            .map_err(|_| bad_row(path, line_no, format!("bad user index {:?}", cells[1])))?;
        let r: f64 = cells[2]
            .parse()
            .map_err(|_| bad_row(path, line_no, format!("bad rate {:?}", cells[2])))?;
        if entries.iter().any(|&(ec, ek, _)| ec == c && ek == k) {
            return Err(bad_row(path, line_no, format!("duplicate entry for group {c}, user {k}")));
        }
        entries.push((c, k, r));
    }
    if entries.is_empty() {
        return Err(Error::InvalidInstance(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    let num_groups = entries.iter().map(|&(c, _, _)| c).max().unwrap() + 1;
    let num_users = entries.iter().map(|&(_, k, _)| k).max().unwrap() + 1;
    let mut rates = DMatrix::zeros(num_groups, num_users);
    for (c, k, r) in entries {
        rates[(c, k)] = r;
    }
    RateTable::new(rates, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_simulation, CdfPoint, Scheme, SweepPoint};

    fn tiny_simulation() -> SimulationOutput {
        let cfg = SimConfig {
            num_aps: 8,
            num_users: 4,
            num_groups: 2,
            pilot_budget: 2,
            max_memberships: 1,
            num_trials: 3,
            num_rounding_samples: 20,
            rng_seed: 5,
            ..SimConfig::default()
        };
        run_simulation(&cfg).unwrap()
    }

    #[test]
    fn staged_writes_commit_atomically_and_clean_up_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("results");
        {
            let mut stager = OutputStager::new(&out).unwrap();
            stager.write_file("a.csv", "x\n").unwrap();
            // Dropped without commit: simulates a failure mid-run.
        }
        assert!(!out.join("a.csv").exists(), "no partial outputs");
        assert_eq!(fs::read_dir(&out).unwrap().count(), 0, "staging removed");

        let mut stager = OutputStager::new(&out).unwrap();
        stager.write_file("a.csv", "x\n").unwrap();
        stager.write_file("b.csv", "y\n").unwrap();
        let files = stager.commit().unwrap();
        assert_eq!(files.len(), 2);
        assert_eq!(fs::read_to_string(out.join("a.csv")).unwrap(), "x\n");
        assert_eq!(fs::read_dir(&out).unwrap().count(), 2, "only final files remain");
    }

    #[test]
    fn csv_renderers_match_golden_rows() {
        let sweep = SweepResult {
            points: vec![SweepPoint {
                scheme: Scheme::SgBa,
                num_aps: 100,
                num_users: 10,
                mean_bits_s: 1.5,
                ci95_bits_s: 0.25,
                sum_bits_s: 15.0,
                trials: 40,
                failed: 2,
            }],
            cdfs: vec![CdfPoint {
                scheme: Scheme::Conventional,
                num_aps: 100,
                value: 0.5,
                cdf: 1.0,
            }],
        };
        assert_eq!(
            render_cdf_csv(&sweep),
            "scheme,M,value,cdf\nconventional,100,0.5,1\n"
        );
        let throughput = render_throughput_csv(&sweep);
        let mut lines = throughput.lines();
        assert!(lines.next().unwrap().starts_with("# self_interference"));
        assert_eq!(
            lines.next().unwrap(),
            "scheme,M,K,mean_bits_s,ci95_bits_s,trials,failed,sum_bits_s"
        );
        assert_eq!(lines.next().unwrap(), "sg_ba,100,10,1.5,0.25,40,2,15");
    }

    #[test]
    fn simulation_outputs_rewrite_byte_identically() {
        let out_data = tiny_simulation();
        let dir = tempfile::tempdir().unwrap();
        let cfg = SimConfig::default();
        let meta = RunMetadata::new("simulate", &cfg);
        let first = write_simulation_outputs(&dir.path().join("a"), &meta, &out_data).unwrap();
        let second = write_simulation_outputs(&dir.path().join("b"), &meta, &out_data).unwrap();
        assert_eq!(first.len(), second.len());
        for (a, b) in first.iter().zip(&second) {
            assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap(), "{a:?} vs {b:?}");
        }
        // The trial files carry real content.
        let trials = fs::read_to_string(dir.path().join("a/trials.csv")).unwrap();
        assert!(trials.lines().count() > 2);
        let metadata = fs::read_to_string(dir.path().join("a/metadata.json")).unwrap();
        assert!(metadata.contains("\"command\": \"simulate\""));
        assert!(metadata.contains("noise_power_dbm"));
    }

    #[test]
    fn weight_matrix_reader_roundtrips_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        fs::write(&path, "# weights\n0, 1.5, 0.25\n1.5, 0, 2\n0.25, 2, 0\n").unwrap();
        let w = read_weight_matrix_csv(&path).unwrap();
        assert_eq!(w.nrows(), 3);
        assert_eq!(w[(0, 1)], 1.5);
        assert_eq!(w[(2, 1)], 2.0);

        fs::write(&path, "0,1\n1\n").unwrap();
        let err = read_weight_matrix_csv(&path).unwrap_err().to_string();
        assert!(err.contains(":2:"), "line number in {err}");

        fs::write(&path, "0,abc\n1,0\n").unwrap();
        assert!(read_weight_matrix_csv(&path).is_err());

        fs::write(&path, "0,1,0\n1,0,1\n").unwrap();
        let err = read_weight_matrix_csv(&path).unwrap_err().to_string();
        assert!(err.contains("square"), "{err}");

        fs::write(&path, "\n# only comments\n").unwrap();
        assert!(read_weight_matrix_csv(&path).is_err());
    }

    #[test]
    fn rate_table_reader_accepts_headers_and_rejects_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rates.csv");
        fs::write(&path, "group,user,rate_bits_s\n0,0,10\n0,1,5\n1,2,7.5\n").unwrap();
        let table = read_rate_table_csv(&path).unwrap();
        assert_eq!(table.num_groups(), 2);
        assert_eq!(table.num_users(), 3);
        assert_eq!(table.group_rate(0, 1), 5.0);
        assert_eq!(table.group_rate(1, 0), 0.0, "unlisted pairs default to 0");

        fs::write(&path, "0,0,10\n0,0,11\n").unwrap();
        let err = read_rate_table_csv(&path).unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");

        fs::write(&path, "0,0\n").unwrap();
        assert!(read_rate_table_csv(&path).is_err());
    }

    #[test]
    fn gnuplot_scripts_reference_their_data_files() {
        let cdf = render_cdf_gnuplot(&[100, 200]);
        assert!(cdf.contains("'cdf.csv'"));
        assert!(cdf.contains("column(2) == 200"));
        let thr = render_throughput_gnuplot(&[10]);
        assert!(thr.contains("'throughput.csv'"));
        assert!(thr.contains("yerrorlines"));
    }

    #[test]
    fn grouping_and_allocation_render_compact_tables() {
        let grouping = Grouping::from_members(4, 2, &[(0, 0), (2, 0), (1, 1)]).unwrap();
        let text = render_grouping_csv(&grouping);
        assert_eq!(text, "user,group\n0,0\n2,0\n1,1\n");
        let alloc = AllocationResult {
            gamma: vec![0.75, 0.25],
            per_user_rate: vec![1.0, 2.0],
            objective: 3.0,
            status: crate::allocation::AllocationStatus::Optimal,
        };
        let text = render_allocation_csv(&alloc);
        assert!(text.starts_with("group,gamma\n0,0.75\n1,0.25\n"));
        assert!(text.ends_with("user,rate_bits_s\n0,1\n1,2\n"));
    }
}
