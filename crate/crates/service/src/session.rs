//! One optimization run per session, driven on its own thread and parked
//! whenever the decision maker owes scores.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread;

use iemo::learning::ScoredRecord;
use iemo::oracle::ConsultationRequest;
use iemo::{run_single, DmOracle, Error, RunConfig, RunObserver};
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

/// Populations are sent along with a batch only up to this many objectives.
pub const CONTEXT_MAX_OBJECTIVES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Running,
    AwaitingScores,
    Finished,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    pub objectives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingBatch {
    /// 1-based consultation index.
    pub session: usize,
    pub generation: usize,
    pub candidates: Vec<Candidate>,
    pub population: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub id: String,
    pub phase: Phase,
    pub generation: usize,
    pub generations: usize,
    pub consultations: usize,
    pub trajectory: Vec<f64>,
    pub records: Vec<ScoredRecord<f64>>,
    pub final_objectives: Option<Vec<Vec<f64>>>,
    pub error: Option<String>,
}

/// Phase-change notification for streaming clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub phase: Phase,
    pub generation: usize,
    pub consultations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("{0}")]
    InvalidScores(String),
    #[error("{0}")]
    Conflict(String),
}

struct State {
    phase: Phase,
    generation: usize,
    consultations: usize,
    trajectory: Vec<f64>,
    records: Vec<ScoredRecord<f64>>,
    pending: Option<PendingBatch>,
    submitted: Option<Vec<f64>>,
    abort_requested: bool,
    final_objectives: Option<Vec<Vec<f64>>>,
    error: Option<String>,
}

pub struct Session {
    pub id: String,
    pub config: RunConfig,
    state: Mutex<State>,
    wake: Condvar,
    events: broadcast::Sender<Event>,
}

impl Session {
    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn notify(&self, s: &State) {
        // No subscribers is fine.
        let _ = self.events.send(Event {
            phase: s.phase,
            generation: s.generation,
            consultations: s.consultations,
        });
    }

    /// Starts the engine thread; the session is running on return.
    pub fn start(id: String, config: RunConfig) -> Arc<Self> {
        let (events, _) = broadcast::channel(64);
        let session = Arc::new(Self {
            id,
            config,
            state: Mutex::new(State {
                phase: Phase::Running,
                generation: 0,
                consultations: 0,
                trajectory: Vec::new(),
                records: Vec::new(),
                pending: None,
                submitted: None,
                abort_requested: false,
                final_objectives: None,
                error: None,
            }),
            wake: Condvar::new(),
            events,
        });
        let worker = Arc::clone(&session);
        thread::Builder::new()
            .name(format!("session-{}", session.id))
            .spawn(move || worker.drive())
            .expect("spawn session thread");
        session
    }

    fn drive(self: Arc<Self>) {
        let mut link = Link(&self);
        let mut oracle = Link(&self);
        let outcome = run_single::<f64>(&self.config, &mut oracle, &mut link);
        let mut s = self.lock();
        s.pending = None;
        match outcome {
            Ok(result) if !result.aborted && !s.abort_requested => {
                s.final_objectives = Some(result.final_objectives);
                s.phase = Phase::Finished;
            }
            Ok(_) => s.phase = Phase::Aborted,
            Err(e) => {
                s.error = Some(e.to_string());
                s.phase = Phase::Aborted;
            }
        }
        self.notify(&s);
    }

    pub fn subscribe(&self) -> (Event, broadcast::Receiver<Event>) {
        let s = self.lock();
        let rx = self.events.subscribe();
        (
            Event {
                phase: s.phase,
                generation: s.generation,
                consultations: s.consultations,
            },
            rx,
        )
    }

    pub fn snapshot(&self) -> Snapshot {
        let s = self.lock();
        Snapshot {
            id: self.id.clone(),
            phase: s.phase,
            generation: s.generation,
            generations: self.config.generations,
            consultations: s.consultations,
            trajectory: s.trajectory.clone(),
            records: s.records.clone(),
            final_objectives: s.final_objectives.clone(),
            error: s.error.clone(),
        }
    }

    pub fn phase(&self) -> Phase {
        self.lock().phase
    }

    pub fn pending(&self) -> (Phase, Option<PendingBatch>) {
        let s = self.lock();
        (s.phase, s.pending.clone())
    }

    /// Hands a complete score map to the parked engine.
    pub fn submit(&self, scores: &BTreeMap<String, f64>) -> Result<(), SessionError> {
        let mut s = self.lock();
        let batch = match (&s.phase, &s.pending) {
            (Phase::AwaitingScores, Some(b)) => b,
            (phase, _) => {
                return Err(SessionError::Conflict(format!(
                    "session is {}, not awaiting scores",
                    phase_name(*phase)
                )))
            }
        };
        let expected: BTreeSet<&str> = batch.candidates.iter().map(|c| c.id.as_str()).collect();
        let given: BTreeSet<&str> = scores.keys().map(String::as_str).collect();
        if expected != given {
            let missing: Vec<&str> = expected.difference(&given).copied().collect();
            let extra: Vec<&str> = given.difference(&expected).copied().collect();
            return Err(SessionError::InvalidScores(format!(
                "scores must cover exactly the pending candidates (missing {missing:?}, unexpected {extra:?})"
            )));
        }
        if let Some((id, v)) = scores.iter().find(|(_, v)| !v.is_finite()) {
            return Err(SessionError::InvalidScores(format!("score for {id} is not finite: {v}")));
        }
        let ordered: Vec<f64> = batch.candidates.iter().map(|c| scores[&c.id]).collect();
        let session = batch.session;
        let new_records: Vec<ScoredRecord<f64>> = batch
            .candidates
            .iter()
            .zip(&ordered)
            .map(|(c, &score)| ScoredRecord {
                f: c.objectives.clone(),
                score,
                session,
            })
            .collect();
        s.records.extend(new_records);
        s.consultations = session;
        s.submitted = Some(ordered);
        s.pending = None;
        s.phase = Phase::Running;
        self.notify(&s);
        self.wake.notify_all();
        Ok(())
    }

    /// Cancels the run. A parked engine wakes immediately; a running one
    /// stops at the next generation boundary.
    pub fn abort(&self) -> Result<(), SessionError> {
        let mut s = self.lock();
        match s.phase {
            Phase::Finished | Phase::Aborted => Err(SessionError::Conflict(format!(
                "session is already {}",
                phase_name(s.phase)
            ))),
            Phase::Running | Phase::AwaitingScores => {
                s.abort_requested = true;
                s.pending = None;
                s.phase = Phase::Aborted;
                self.notify(&s);
                self.wake.notify_all();
                Ok(())
            }
        }
    }
}

pub fn phase_name(p: Phase) -> &'static str {
    match p {
        Phase::Running => "running",
        Phase::AwaitingScores => "awaiting_scores",
        Phase::Finished => "finished",
        Phase::Aborted => "aborted",
    }
}

/// Engine-side view of a session: both its decision maker and observer.
struct Link<'a>(&'a Session);

impl DmOracle<f64> for Link<'_> {
    fn score(&mut self, request: &ConsultationRequest<f64>) -> iemo::Result<Vec<f64>> {
        let session = self.0;
        let mut s = session.lock();
        if s.abort_requested {
            return Err(Error::Aborted);
        }
        let m = session.config.m();
        s.submitted = None;
        s.pending = Some(PendingBatch {
            session: request.session,
            generation: request.generation,
            candidates: request
                .candidates
                .iter()
                .enumerate()
                .map(|(i, f)| Candidate {
                    id: format!("s{}c{}", request.session, i),
                    objectives: f.clone(),
                })
                .collect(),
            population: (m <= CONTEXT_MAX_OBJECTIVES).then(|| request.population.clone()),
        });
        s.phase = Phase::AwaitingScores;
        session.notify(&s);
        loop {
            if s.abort_requested {
                return Err(Error::Aborted);
            }
            if let Some(scores) = s.submitted.take() {
                return Ok(scores);
            }
            s = session.wake.wait(s).unwrap_or_else(|p| p.into_inner());
        }
    }
}

impl RunObserver<f64> for Link<'_> {
    fn generation(&mut self, generation: usize, error: f64, _population: &[Vec<f64>]) -> ControlFlow<()> {
        let mut s = self.0.lock();
        s.generation = generation;
        s.trajectory.push(error);
        if s.abort_requested {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    }
}
