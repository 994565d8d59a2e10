//! Config and plan files in, result files out.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use iemo::{Algorithm, ConfigFile, RunConfig};
use serde::{Deserialize, Serialize};

use crate::experiment::{default_seeds, ExperimentSummary, StoredRun};
use crate::HarnessError;

/// Environment variable naming the results directory.
pub const OUTPUT_DIR_VAR: &str = "IEMO_OUTPUT_DIR";
const DEFAULT_OUTPUT_DIR: &str = "results";

pub fn output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

pub fn load_config(path: &Path) -> Result<RunConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, HarnessError> {
    let file: ConfigFile = toml::from_str(text)?;
    Ok(file.resolve()?)
}

/// Replicate plan: every cell is run interactively and as a baseline,
/// once per algorithm and seed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    /// Seeds 1..=replicates. Ignored when `seeds` is given.
    pub replicates: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    /// Overrides each cell's own `algorithm`.
    pub algorithms: Option<Vec<Algorithm>>,
    #[serde(default)]
    pub cell: Vec<ConfigFile>,
}

impl PlanFile {
    pub fn seeds(&self) -> Vec<u64> {
        match (&self.seeds, self.replicates) {
            (Some(s), _) => s.clone(),
            (None, Some(r)) => (1..=r).collect(),
            (None, None) => default_seeds(),
        }
    }

    pub fn bases(&self) -> Result<Vec<RunConfig>, HarnessError> {
        if self.cell.is_empty() {
            return Err(HarnessError::Usage("plan has no [[cell]] entries".into()));
        }
        let mut out = Vec::new();
        for cell in &self.cell {
            match &self.algorithms {
                None => out.push(cell.resolve()?),
                Some(algs) => {
                    for &alg in algs {
                        let mut c = cell.clone();
                        c.algorithm = Some(alg);
                        out.push(c.resolve()?);
                    }
                }
            }
        }
        Ok(out)
    }
}

pub fn load_plan(path: &Path) -> Result<PlanFile, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(toml::from_str(&text)?)
}

fn write(path: &Path, contents: &[u8]) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

pub fn run_path(dir: &Path, run: &StoredRun) -> PathBuf {
    dir.join("runs")
        .join(format!("{}_seed{}.json", file_stem(&run.label), run.result.seed))
}

/// One JSON document per run with the full trajectory.
pub fn write_runs(dir: &Path, runs: &[StoredRun]) -> Result<(), HarnessError> {
    for run in runs {
        write(&run_path(dir, run), &serde_json::to_vec_pretty(run)?)?;
    }
    Ok(())
}

/// One row per run with its final error.
pub fn write_final_csv(path: &Path, runs: &[StoredRun]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "label",
        "problem",
        "m",
        "roi",
        "algorithm",
        "interactive",
        "seed",
        "final_error",
        "evaluations",
        "consultations",
    ])?;
    for r in runs {
        let c = &r.result.config;
        w.write_record([
            r.label.clone(),
            c.problem.id.to_string(),
            c.m().to_string(),
            format!("{:?}", c.golden.roi).to_lowercase(),
            c.algorithm.to_string(),
            c.interactive.to_string(),
            r.result.seed.to_string(),
            format!("{:e}", r.final_error()),
            r.result.evaluations.to_string(),
            r.result.consultations.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Usage(e.to_string()))?;
    write(path, &bytes)
}

/// Per-generation errors of every run, long format, for plotting.
pub fn write_trajectories_csv(path: &Path, runs: &[StoredRun]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "seed", "generation", "error"])?;
    for r in runs {
        for (g, e) in r.result.trajectory.iter().enumerate() {
            w.write_record([
                r.label.clone(),
                r.result.seed.to_string(),
                (g + 1).to_string(),
                format!("{e:e}"),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Usage(e.to_string()))?;
    write(path, &bytes)
}

pub fn write_summary(dir: &Path, runs: &[StoredRun], summary: &ExperimentSummary) -> Result<(), HarnessError> {
    write_final_csv(&dir.join("final_errors.csv"), runs)?;
    write_trajectories_csv(&dir.join("trajectories.csv"), runs)?;
    write(&dir.join("summary.json"), &serde_json::to_vec_pretty(summary)?)
}

/// Every stored run under `dir/runs`, sorted by label then seed.
pub fn load_runs(dir: &Path) -> Result<Vec<StoredRun>, HarnessError> {
    let runs_dir = dir.join("runs");
    let entries = fs::read_dir(&runs_dir).map_err(|e| HarnessError::io(&runs_dir, e))?;
    let mut runs = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| HarnessError::io(&runs_dir, e))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            let bytes = fs::read(&path).map_err(|e| HarnessError::io(&path, e))?;
            runs.push(serde_json::from_slice::<StoredRun>(&bytes)?);
        }
    }
    runs.sort_by(|a, b| a.label.cmp(&b.label).then(a.result.seed.cmp(&b.result.seed)));
    Ok(runs)
}

/// Plain-text table of a summary.
pub fn render(summary: &ExperimentSummary) -> String {
    let width = summary.cells.iter().map(|c| c.label.len()).max().unwrap_or(5).max(5);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:>4}  {:>11}  {:>11}", "arm", "n", "median", "iqr");
    for c in &summary.cells {
        let _ = writeln!(
            out,
            "{:<width$}  {:>4}  {:>11.5e}  {:>11.5e}",
            c.label, c.stats.n, c.stats.median, c.stats.iqr
        );
    }
    if !summary.comparisons.is_empty() {
        out.push('\n');
        for cmp in &summary.comparisons {
            let _ = writeln!(
                out,
                "{} vs {}: {:.5e} vs {:.5e}, p = {:.4}",
                cmp.treatment, cmp.control, cmp.treatment_median, cmp.control_median, cmp.wilcoxon.p_value
            );
        }
    }
    out
}
