//! Replicated runs, paired comparisons and parameter sweeps.

use std::fmt;
use std::str::FromStr;

use iemo::{run_simulated, Algorithm, PreferenceSource, RunConfig, RunResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::stats::{wilcoxon_signed_rank, Summary, Wilcoxon};
use crate::HarnessError;

/// Default replicate seeds: 1 through 21.
pub fn default_seeds() -> Vec<u64> {
    (1..=21).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

impl FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f32" => Ok(Self::F32),
            "f64" => Ok(Self::F64),
            other => Err(format!("unknown precision `{other}` (f32 or f64)")),
        }
    }
}

pub fn run_one(cfg: &RunConfig, precision: Precision) -> iemo::Result<RunResult> {
    match precision {
        Precision::F32 => run_simulated::<f32>(cfg),
        Precision::F64 => run_simulated::<f64>(cfg),
    }
}

/// One configuration to be replicated across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub label: String,
    pub config: RunConfig,
}

impl Arm {
    pub fn new(label: impl Into<String>, config: RunConfig) -> Self {
        Self {
            label: label.into(),
            config,
        }
    }
}

/// A finished run together with the arm it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRun {
    pub label: String,
    pub result: RunResult,
}

impl StoredRun {
    pub fn final_error(&self) -> f64 {
        self.result.final_error().unwrap_or(f64::NAN)
    }
}

/// Runs every arm for every seed. Seeds only replace `config.seed`, so the
/// output depends on (config, seed) alone and not on scheduling.
pub fn run_arms(arms: &[Arm], seeds: &[u64], precision: Precision) -> Result<Vec<StoredRun>, HarnessError> {
    let jobs: Vec<(usize, u64)> = (0..arms.len())
        .flat_map(|a| seeds.iter().map(move |&s| (a, s)))
        .collect();
    jobs.par_iter()
        .map(|&(a, seed)| {
            let mut cfg = arms[a].config.clone();
            cfg.seed = seed;
            run_one(&cfg, precision).map(|result| StoredRun {
                label: arms[a].label.clone(),
                result,
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(HarnessError::from)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub label: String,
    pub problem: String,
    pub m: usize,
    pub roi: String,
    pub algorithm: Algorithm,
    pub interactive: bool,
    pub seeds: Vec<u64>,
    pub errors: Vec<f64>,
    pub stats: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub treatment: String,
    pub control: String,
    pub treatment_median: f64,
    pub control_median: f64,
    pub wilcoxon: Wilcoxon,
}

impl Comparison {
    pub fn significant(&self, alpha: f64) -> bool {
        self.wilcoxon.p_value < alpha
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ExperimentSummary {
    pub cells: Vec<CellSummary>,
    pub comparisons: Vec<Comparison>,
}

impl ExperimentSummary {
    pub fn cell(&self, label: &str) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.label == label)
    }
}

/// Groups runs by arm label, in order of first appearance; each cell's
/// errors are sorted by seed.
pub fn summarize(runs: &[StoredRun], pairs: &[(String, String)]) -> ExperimentSummary {
    let mut labels: Vec<&str> = Vec::new();
    for r in runs {
        if !labels.contains(&r.label.as_str()) {
            labels.push(&r.label);
        }
    }
    let cells: Vec<CellSummary> = labels
        .iter()
        .map(|&label| {
            let mut members: Vec<&StoredRun> = runs.iter().filter(|r| r.label == label).collect();
            members.sort_by_key(|r| r.result.seed);
            let cfg = &members[0].result.config;
            let errors: Vec<f64> = members.iter().map(|r| r.final_error()).collect();
            CellSummary {
                label: label.to_string(),
                problem: cfg.problem.id.to_string(),
                m: cfg.m(),
                roi: format!("{:?}", cfg.golden.roi).to_lowercase(),
                algorithm: cfg.algorithm,
                interactive: cfg.interactive,
                seeds: members.iter().map(|r| r.result.seed).collect(),
                stats: Summary::of(&errors).expect("nonempty cell"),
                errors,
            }
        })
        .collect();
    let comparisons = pairs
        .iter()
        .filter_map(|(t, c)| {
            let tc = cells.iter().find(|x| &x.label == t)?;
            let cc = cells.iter().find(|x| &x.label == c)?;
            // Pair by seed.
            let (a, b): (Vec<f64>, Vec<f64>) = tc
                .seeds
                .iter()
                .zip(&tc.errors)
                .filter_map(|(s, &e)| cc.seeds.iter().position(|x| x == s).map(|j| (e, cc.errors[j])))
                .unzip();
            Some(Comparison {
                treatment: t.clone(),
                control: c.clone(),
                treatment_median: tc.stats.median,
                control_median: cc.stats.median,
                wilcoxon: wilcoxon_signed_rank(&a, &b),
            })
        })
        .collect();
    ExperimentSummary { cells, comparisons }
}

fn cell_label(cfg: &RunConfig) -> String {
    format!(
        "{}-m{}-{}-{}{}",
        cfg.problem.id,
        cfg.m(),
        format!("{:?}", cfg.golden.roi).to_lowercase(),
        match cfg.algorithm {
            Algorithm::Moead => "moead",
            Algorithm::Nsga3 => "nsga3",
        },
        if cfg.interactive { "-interactive" } else { "" }
    )
}

/// The interactive arm and its plain baseline for one configuration,
/// paired for testing.
pub fn paired_arms(base: &RunConfig) -> (Arm, Arm) {
    let mut on = base.clone();
    on.interactive = true;
    let mut off = base.clone();
    off.interactive = false;
    (Arm::new(cell_label(&on), on), Arm::new(cell_label(&off), off))
}

/// Interactive-vs-baseline experiment over several base configurations.
pub fn run_experiment(
    bases: &[RunConfig],
    seeds: &[u64],
    precision: Precision,
) -> Result<(Vec<StoredRun>, ExperimentSummary), HarnessError> {
    let mut arms = Vec::new();
    let mut pairs = Vec::new();
    for base in bases {
        let (on, off) = paired_arms(base);
        pairs.push((on.label.clone(), off.label.clone()));
        arms.push(on);
        arms.push(off);
    }
    let runs = run_arms(&arms, seeds, precision)?;
    let summary = summarize(&runs, &pairs);
    Ok((runs, summary))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Mu,
    Tau,
    Eta,
    Kappa,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mu => "mu",
            Self::Tau => "tau",
            Self::Eta => "eta",
            Self::Kappa => "kappa",
        })
    }
}

impl FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mu" => Ok(Self::Mu),
            "tau" => Ok(Self::Tau),
            "eta" => Ok(Self::Eta),
            "kappa" => Ok(Self::Kappa),
            other => Err(format!("unknown sweep parameter `{other}` (mu, tau, eta, kappa)")),
        }
    }
}

fn whole(param: SweepParam, v: f64) -> Result<usize, HarnessError> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(HarnessError::Usage(format!("{param} takes whole numbers, got {v}")))
    }
}

/// Applies one sweep value to a configuration. A `mu` value sets the
/// candidate count of every session, the first included.
pub fn apply(param: SweepParam, value: f64, cfg: &mut RunConfig) -> Result<(), HarnessError> {
    match param {
        SweepParam::Mu => {
            let mu = whole(param, value)?;
            cfg.schedule.mu_first = mu;
            cfg.schedule.mu_later = mu;
        }
        SweepParam::Tau => cfg.schedule.tau = whole(param, value)?,
        SweepParam::Eta => cfg.eta = value,
        SweepParam::Kappa => cfg.noise.kappa = value,
    }
    cfg.validate()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOptions {
    /// Add an arm whose elicitation uses the golden value function itself.
    pub utopia: bool,
    /// Add the non-interactive baseline and compare every arm to it.
    pub baseline: bool,
}

/// One interactive arm per value (plus optional utopia and baseline arms).
/// (interactive label, baseline label) compared by a paired test.
pub type LabelPair = (String, String);

pub fn sweep_arms(
    param: SweepParam,
    values: &[f64],
    base: &RunConfig,
    options: SweepOptions,
) -> Result<(Vec<Arm>, Vec<LabelPair>), HarnessError> {
    if values.is_empty() {
        return Err(HarnessError::Usage("sweep needs at least one value".into()));
    }
    let mut arms = Vec::new();
    for &v in values {
        let mut cfg = base.clone();
        cfg.interactive = true;
        apply(param, v, &mut cfg)?;
        arms.push(Arm::new(format!("{param}={v}"), cfg));
    }
    if options.utopia {
        let mut cfg = base.clone();
        cfg.interactive = true;
        cfg.preference = PreferenceSource::Golden;
        arms.push(Arm::new("utopia", cfg));
    }
    let mut pairs = Vec::new();
    if options.baseline {
        let mut cfg = base.clone();
        cfg.interactive = false;
        for a in &arms {
            pairs.push((a.label.clone(), "baseline".to_string()));
        }
        arms.push(Arm::new("baseline", cfg));
    }
    Ok((arms, pairs))
}

pub fn run_sweep(
    param: SweepParam,
    values: &[f64],
    base: &RunConfig,
    options: SweepOptions,
    seeds: &[u64],
    precision: Precision,
) -> Result<(Vec<StoredRun>, ExperimentSummary), HarnessError> {
    let (arms, pairs) = sweep_arms(param, values, base, options)?;
    let runs = run_arms(&arms, seeds, precision)?;
    let summary = summarize(&runs, &pairs);
    Ok((runs, summary))
}
