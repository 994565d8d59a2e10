//! The interactive loop: optimize, consult every `tau` generations, learn,
//! migrate the reference points, repeat.

use std::ops::ControlFlow;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::config::{PreferenceSource, RunConfig};
use crate::elicitation::{elicit, identify_promising, resolve_best, BestRecord};
use crate::error::{Error, Result};
use crate::learning::{pick_candidates, train_avf, AvfModel, PopulationView, ScoredRecord, ValueModel};
use crate::model::approximation_error;
use crate::moead::MoeadState;
use crate::nsga3::Nsga3State;
use crate::optimizer::{Algorithm, EngineRng, Optimizer};
use crate::oracle::{ConsultationRequest, DmOracle, SimulatedOracle};
use crate::problems::{golden_point, GoldenSpec};
use crate::scalar::Scalar;

/// Mixed into the run seed to derive the simulated decision maker's stream.
pub const ORACLE_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Outcome of one run, widened to `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: RunConfig,
    pub seed: u64,
    pub golden_point: Vec<f64>,
    /// Approximation error after each generation.
    pub trajectory: Vec<f64>,
    pub final_objectives: Vec<Vec<f64>>,
    pub records: Vec<ScoredRecord<f64>>,
    pub consultations: usize,
    pub evaluations: usize,
    pub aborted: bool,
}

impl RunResult {
    pub fn final_error(&self) -> Option<f64> {
        self.trajectory.last().copied()
    }
}

/// Progress callbacks; returning `Break` from [`RunObserver::generation`]
/// stops the run at that generation boundary.
pub trait RunObserver<T: Scalar> {
    fn generation(&mut self, _generation: usize, _error: T, _population: &[Vec<T>]) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }

    fn consulted(&mut self, _session: usize, _records: &[ScoredRecord<T>]) {}
}

/// Observer that does nothing.
pub struct Silent;

impl<T: Scalar> RunObserver<T> for Silent {}

fn build_optimizer<T: Scalar>(cfg: &RunConfig, rng: &mut EngineRng) -> Result<Box<dyn Optimizer<T>>> {
    let points = cfg.lattice.generate::<T>(cfg.m())?;
    Ok(match cfg.algorithm {
        Algorithm::Moead => Box::new(MoeadState::new(&cfg.problem, points, cfg.moead.params(), rng)?),
        Algorithm::Nsga3 => Box::new(Nsga3State::new(&cfg.problem, points, cfg.population, rng)?),
    })
}

fn golden_in<T: Scalar>(cfg: &RunConfig) -> GoldenSpec<T> {
    GoldenSpec {
        w_star: cfg.golden.w_star.iter().map(|&v| T::lit(v)).collect(),
        z_star: cfg.golden.z_star.iter().map(|&v| T::lit(v)).collect(),
        roi: cfg.golden.roi,
    }
}

fn widen<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64_lossy()).collect()
}

/// State carried between consultation sessions.
struct Consultant<T: Scalar> {
    session: usize,
    records: Vec<ScoredRecord<T>>,
    model: Option<AvfModel<T>>,
    best: Option<BestRecord<T>>,
}

impl<T: Scalar> Consultant<T> {
    fn consult(
        &mut self,
        cfg: &RunConfig,
        golden: &GoldenSpec<T>,
        opt: &mut dyn Optimizer<T>,
        oracle: &mut dyn DmOracle<T>,
        generation: usize,
    ) -> Result<()> {
        self.session += 1;
        let session = self.session;
        let mu = cfg.schedule.mu(session);
        let associations = opt.associations();
        let objectives: Vec<&[T]> = opt.population().iter().map(|s| s.f.as_slice()).collect();

        let picker: Option<&dyn ValueModel<T>> = match (cfg.preference, &self.model) {
            _ if session == 1 => None,
            (PreferenceSource::Golden, _) => Some(golden),
            (PreferenceSource::Learned, Some(m)) => Some(m),
            (PreferenceSource::Learned, None) => None,
        };
        let view = PopulationView {
            objectives: objectives.clone(),
            associations: associations.clone(),
            references: opt.reference_points(),
            ideal: opt.ideal().as_slice(),
        };
        let picks = pick_candidates(&view, picker, mu);
        let request = ConsultationRequest {
            session,
            generation,
            candidates: picks.iter().map(|&i| objectives[i].to_vec()).collect(),
            population: objectives.iter().map(|f| f.to_vec()).collect(),
        };
        let scores = oracle.score(&request)?;
        if scores.len() != picks.len() || scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "expected {} finite scores, got {:?}",
                picks.len(),
                scores.iter().map(|s| s.to_f64_lossy()).collect::<Vec<_>>()
            )));
        }
        let batch: Vec<ScoredRecord<T>> = request
            .candidates
            .into_iter()
            .zip(&scores)
            .map(|(f, &score)| ScoredRecord { f, score, session })
            .collect();
        let batch_refs: Vec<usize> = picks.iter().map(|&i| associations[i]).collect();
        self.best = Some(resolve_best(&batch, &batch_refs)?);
        self.records.extend(batch);
        self.model = Some(train_avf(&self.records, cfg.kernel)?);

        let elicitor: &dyn ValueModel<T> = match cfg.preference {
            PreferenceSource::Golden => golden,
            PreferenceSource::Learned => self.model.as_ref().unwrap(),
        };
        let promising = identify_promising(&objectives, &associations, elicitor, mu);
        let moved = elicit(
            opt.reference_points(),
            &promising,
            self.best.as_ref().unwrap(),
            opt.ideal().as_slice(),
            T::lit(cfg.eta),
            cfg.guard,
        )?;
        drop(objectives);
        opt.adopt_reference_points(moved.points)
    }
}

/// Runs one configuration against the given decision maker.
///
/// Sessions fire after generations `tau, 2 tau, ...` strictly before the
/// last generation. An oracle or observer abort yields a partial result
/// with `aborted` set.
pub fn run_single<T: Scalar>(
    cfg: &RunConfig,
    oracle: &mut dyn DmOracle<T>,
    observer: &mut dyn RunObserver<T>,
) -> Result<RunResult> {
    cfg.validate()?;
    let mut rng = EngineRng::seed_from_u64(cfg.seed);
    let mut opt = build_optimizer::<T>(cfg, &mut rng)?;
    let golden = golden_in::<T>(cfg);
    let target = golden_point(&cfg.problem, &golden);
    let mut consultant = Consultant {
        session: 0,
        records: Vec::new(),
        model: None,
        best: None,
    };
    let mut trajectory = Vec::with_capacity(cfg.generations);
    let mut aborted = false;

    for generation in 1..=cfg.generations {
        opt.step(&cfg.problem, &cfg.variation, &mut rng)?;
        let error = approximation_error(opt.population(), &target)?;
        trajectory.push(error.to_f64_lossy());
        let objectives: Vec<Vec<T>> = opt.population().iter().map(|s| s.f.clone()).collect();
        if observer.generation(generation, error, &objectives).is_break() {
            aborted = true;
            break;
        }
        if cfg.interactive && cfg.schedule.fires_at(generation) && generation < cfg.generations {
            match consultant.consult(cfg, &golden, opt.as_mut(), oracle, generation) {
                Ok(()) => {
                    let start = consultant.records.len() - cfg.schedule.mu(consultant.session).min(consultant.records.len());
                    let session = consultant.session;
                    let fresh: Vec<ScoredRecord<T>> = consultant.records[start..]
                        .iter()
                        .filter(|r| r.session == session)
                        .cloned()
                        .collect();
                    observer.consulted(session, &fresh);
                }
                Err(Error::Aborted) => {
                    aborted = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
    }

    Ok(RunResult {
        config: cfg.clone(),
        seed: cfg.seed,
        golden_point: widen(&target),
        trajectory,
        final_objectives: opt.population().iter().map(|s| widen(&s.f)).collect(),
        records: consultant
            .records
            .iter()
            .map(|r| ScoredRecord {
                f: widen(&r.f),
                score: r.score.to_f64_lossy(),
                session: r.session,
            })
            .collect(),
        consultations: consultant.session,
        evaluations: opt.evaluations(),
        aborted,
    })
}

/// Runs with the simulated decision maker described by the configuration.
pub fn run_simulated<T: Scalar>(cfg: &RunConfig) -> Result<RunResult> {
    let mut oracle = SimulatedOracle::new(golden_in::<T>(cfg), cfg.noise, cfg.seed ^ ORACLE_SEED_SALT);
    run_single::<T>(cfg, &mut oracle, &mut Silent)
}
