//! Run configuration with built-in defaults per objective count.

use serde::{Deserialize, Serialize};

use crate::elicitation::GuardMode;
use crate::error::{Error, Result};
use crate::learning::{ConsultationSchedule, KernelForm};
use crate::moead::MoeadParams;
use crate::nsga3::population_size_for;
use crate::optimizer::Algorithm;
use crate::problems::{GoldenSpec, NoiseSpec, ProblemId, ProblemSpec, Roi};
use crate::refpoints::{lattice_size, LatticeSpec};
use crate::variation::VariationParams;

/// Generation budgets for m = 3, 5, 8, 10.
const GENERATIONS: [(ProblemId, [usize; 4]); 4] = [
    (ProblemId::Dtlz1, [400, 600, 750, 1000]),
    (ProblemId::Dtlz2, [250, 350, 500, 750]),
    (ProblemId::Dtlz3, [1000, 1000, 1000, 1500]),
    (ProblemId::Dtlz4, [600, 1000, 1250, 2000]),
];
const TABLE_M: [usize; 4] = [3, 5, 8, 10];

/// Default generation budget; objective counts outside the table use the
/// nearest tabulated one.
pub fn default_generations(id: ProblemId, m: usize) -> usize {
    let col = TABLE_M
        .iter()
        .enumerate()
        .min_by_key(|(_, &tm)| tm.abs_diff(m))
        .map(|(i, _)| i)
        .unwrap();
    GENERATIONS.iter().find(|(p, _)| *p == id).unwrap().1[col]
}

/// Source of the value model used between consultations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreferenceSource {
    /// Radial-basis network fit to the decision maker's scores.
    #[default]
    Learned,
    /// The golden value function itself.
    Golden,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoeadSettings {
    pub neighborhood: usize,
    pub delta: f64,
    /// Replacements allowed per offspring; 0 means unlimited.
    pub max_replacements: usize,
}

impl Default for MoeadSettings {
    fn default() -> Self {
        Self {
            neighborhood: 20,
            delta: 0.1,
            max_replacements: 2,
        }
    }
}

impl MoeadSettings {
    pub fn params(&self) -> MoeadParams {
        MoeadParams {
            neighborhood: self.neighborhood,
            delta: self.delta,
            max_replacements: (self.max_replacements > 0).then_some(self.max_replacements),
        }
    }
}

/// Fully resolved description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub algorithm: Algorithm,
    pub interactive: bool,
    pub golden: GoldenSpec<f64>,
    pub noise: NoiseSpec,
    pub schedule: ConsultationSchedule,
    pub variation: VariationParams,
    pub moead: MoeadSettings,
    pub lattice: LatticeSpec,
    pub population: usize,
    pub generations: usize,
    pub eta: f64,
    pub guard: GuardMode,
    pub kernel: KernelForm,
    pub preference: PreferenceSource,
    pub seed: u64,
}

impl RunConfig {
    pub fn defaults(id: ProblemId, m: usize, algorithm: Algorithm, roi: Roi) -> Result<Self> {
        let problem = ProblemSpec::new(id, m)?;
        let lattice = LatticeSpec::default_for(m);
        let references = reference_count(&lattice, m)?;
        let generations = default_generations(id, m);
        Ok(Self {
            problem,
            algorithm,
            interactive: true,
            golden: GoldenSpec::for_roi(roi, m),
            noise: NoiseSpec {
                kappa: 0.0,
                t_max: generations,
            },
            schedule: ConsultationSchedule::for_objectives(m),
            variation: VariationParams::default(),
            moead: MoeadSettings::default(),
            lattice,
            population: default_population(algorithm, references),
            generations,
            eta: 0.5,
            guard: GuardMode::Literal,
            kernel: KernelForm::Linear,
            preference: PreferenceSource::Learned,
            seed: 1,
        })
    }

    pub fn m(&self) -> usize {
        self.problem.m
    }

    pub fn reference_count(&self) -> Result<usize> {
        reference_count(&self.lattice, self.problem.m)
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        self.variation.validate()?;
        self.schedule.validate()?;
        let m = self.problem.m;
        let bad = |field: &str, message: String| {
            Err(Error::InvalidConfig {
                field: field.into(),
                message,
            })
        };
        if self.golden.w_star.len() != m {
            return bad("golden.w_star", format!("expected {m} weights, got {}", self.golden.w_star.len()));
        }
        if self.golden.w_star.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return bad("golden.w_star", "utopia weights must be strictly positive".into());
        }
        if self.golden.z_star.len() != m {
            return bad("golden.z_star", format!("expected {m} coordinates"));
        }
        if !(self.noise.kappa >= 0.0) || !self.noise.kappa.is_finite() {
            return bad("noise.kappa", "noise strength must be a finite value >= 0".into());
        }
        if self.generations == 0 {
            return bad("generations", "at least one generation is required".into());
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return bad("eta", format!("step size must lie in [0, 1], got {}", self.eta));
        }
        let refs = self.reference_count()?;
        match self.algorithm {
            Algorithm::Moead => {
                if self.population != refs {
                    return bad(
                        "population",
                        format!("MOEA/D needs one solution per reference point ({refs}), got {}", self.population),
                    );
                }
                if self.moead.neighborhood < 2 || self.moead.neighborhood > refs {
                    return bad("moead.neighborhood", format!("must lie in 2..={refs}"));
                }
                if !(0.0..=1.0).contains(&self.moead.delta) {
                    return bad("moead.delta", "probability must lie in [0, 1]".into());
                }
            }
            Algorithm::Nsga3 => {
                if self.population < 2 {
                    return bad("population", "need at least two solutions".into());
                }
            }
        }
        let mu = self.schedule.mu_first.max(self.schedule.mu_later);
        if mu > self.population {
            return bad("schedule.mu", format!("cannot present {mu} of {} solutions", self.population));
        }
        Ok(())
    }
}

fn reference_count(lattice: &LatticeSpec, m: usize) -> Result<usize> {
    let overflow = || Error::InvalidArgument("reference lattice too large".into());
    match *lattice {
        LatticeSpec::Single { h } => lattice_size(m, h).ok_or_else(overflow),
        // the inner layer may collapse onto outer points; count the real set
        LatticeSpec::TwoLayer { .. } => Ok(lattice.generate::<f64>(m)?.len()),
    }
}

pub fn default_population(algorithm: Algorithm, references: usize) -> usize {
    match algorithm {
        Algorithm::Moead => references,
        Algorithm::Nsga3 => population_size_for(references),
    }
}

/// Partial configuration as written by users; every field falls back to
/// the defaults for the chosen problem and objective count.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub algorithm: Option<Algorithm>,
    pub interactive: Option<bool>,
    pub generations: Option<usize>,
    pub population: Option<usize>,
    pub eta: Option<f64>,
    pub guard: Option<GuardMode>,
    pub kernel: Option<KernelForm>,
    pub preference: Option<PreferenceSource>,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub golden: GoldenSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    pub variation: Option<VariationParams>,
    pub moead: Option<MoeadSettings>,
    pub lattice: Option<LatticeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub id: ProblemId,
    pub m: usize,
    pub n: Option<usize>,
    pub alpha: Option<f64>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            id: ProblemId::Dtlz2,
            m: 3,
            n: None,
            alpha: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenSection {
    pub roi: Option<Roi>,
    pub w_star: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub kappa: Option<f64>,
    pub t_max: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub tau: Option<usize>,
    pub mu_first: Option<usize>,
    pub mu_later: Option<usize>,
}

impl ConfigFile {
    pub fn resolve(&self) -> Result<RunConfig> {
        let p = &self.problem;
        let algorithm = self.algorithm.unwrap_or(Algorithm::Moead);
        let roi = self.golden.roi.unwrap_or(Roi::Center);
        let mut cfg = RunConfig::defaults(p.id, p.m, algorithm, roi)?;
        if let Some(n) = p.n {
            cfg.problem.n = n;
        }
        if let Some(alpha) = p.alpha {
            cfg.problem.alpha = alpha;
        }
        if let Some(lattice) = self.lattice {
            cfg.lattice = lattice;
            cfg.population = default_population(algorithm, cfg.reference_count()?);
        }
        if let Some(w) = &self.golden.w_star {
            if w.len() != p.m {
                return Err(Error::InvalidConfig {
                    field: "golden.w_star".into(),
                    message: format!("expected {} weights, got {}", p.m, w.len()),
                });
            }
            cfg.golden = GoldenSpec::with_weights(w, roi)?;
        }
        if let Some(g) = self.generations {
            cfg.generations = g;
        }
        cfg.noise = NoiseSpec {
            kappa: self.noise.kappa.unwrap_or(0.0),
            t_max: self.noise.t_max.unwrap_or(cfg.generations),
        };
        let s = &self.schedule;
        cfg.schedule.tau = s.tau.unwrap_or(cfg.schedule.tau);
        cfg.schedule.mu_first = s.mu_first.unwrap_or(cfg.schedule.mu_first);
        cfg.schedule.mu_later = s.mu_later.unwrap_or(cfg.schedule.mu_later);
        if let Some(v) = self.variation {
            cfg.variation = v;
        }
        if let Some(mo) = self.moead {
            cfg.moead = mo;
        }
        if let Some(n) = self.population {
            cfg.population = n;
        }
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.interactive = self.interactive.unwrap_or(cfg.interactive);
        cfg.eta = self.eta.unwrap_or(cfg.eta);
        cfg.guard = self.guard.unwrap_or(cfg.guard);
        cfg.kernel = self.kernel.unwrap_or(cfg.kernel);
        cfg.preference = self.preference.unwrap_or(cfg.preference);
        cfg.validate()?;
        Ok(cfg)
    }
}
