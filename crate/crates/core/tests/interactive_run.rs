//! End-to-end runs through the public API with hand-written decision makers.

use std::ops::ControlFlow;

use iemo::learning::ScoredRecord;
use iemo::{
    run_simulated, run_single, Algorithm, ConsultationRequest, DmOracle, Error, GoldenSpec, ProblemId,
    Result, Roi, RunConfig, RunObserver, Silent,
};

fn short(alg: Algorithm) -> RunConfig {
    let mut c = RunConfig::defaults(ProblemId::Dtlz2, 3, alg, Roi::Boundary).unwrap();
    c.generations = 50;
    c.schedule.tau = 10;
    c
}

/// Scores with the golden function and remembers what it was shown.
struct Recorder {
    golden: GoldenSpec,
    seen: Vec<(usize, usize, usize)>,
}

impl DmOracle<f64> for Recorder {
    fn score(&mut self, r: &ConsultationRequest) -> Result<Vec<f64>> {
        self.seen.push((r.session, r.generation, r.candidates.len()));
        assert!(r.population.len() >= 91);
        Ok(r.candidates.iter().map(|f| self.golden.psi(f)).collect())
    }
}

#[test]
fn schedule_and_record_log() {
    let cfg = short(Algorithm::Moead);
    let mut dm = Recorder {
        golden: cfg.golden.clone(),
        seen: Vec::new(),
    };
    let r = run_single::<f64>(&cfg, &mut dm, &mut Silent).unwrap();
    assert_eq!(dm.seen, vec![(1, 10, 7), (2, 20, 10), (3, 30, 10), (4, 40, 10)]);
    assert_eq!(r.consultations, 4);
    assert_eq!(r.records.len(), 37);
    assert!(r.records.iter().all(|rec| rec.score > 0.0));
    // Same scores as the built-in simulated decision maker without noise.
    assert_eq!(r, run_simulated::<f64>(&cfg).unwrap());
}

#[test]
fn wrong_score_count_is_an_error() {
    struct Short;
    impl DmOracle<f64> for Short {
        fn score(&mut self, _: &ConsultationRequest) -> Result<Vec<f64>> {
            Ok(vec![1.0])
        }
    }
    let err = run_single::<f64>(&short(Algorithm::Nsga3), &mut Short, &mut Silent).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)), "{err}");
}

#[test]
fn observer_sees_every_generation_and_session() {
    #[derive(Default)]
    struct Log {
        generations: Vec<usize>,
        sessions: Vec<(usize, usize)>,
    }
    impl RunObserver<f64> for Log {
        fn generation(&mut self, g: usize, e: f64, pop: &[Vec<f64>]) -> ControlFlow<()> {
            assert!(e.is_finite() && pop.len() == 92, "NSGA-III pads 91 up to a multiple of four");
            self.generations.push(g);
            ControlFlow::Continue(())
        }
        fn consulted(&mut self, session: usize, records: &[ScoredRecord<f64>]) {
            self.sessions.push((session, records.len()));
        }
    }
    let cfg = short(Algorithm::Nsga3);
    let mut dm = Recorder {
        golden: cfg.golden.clone(),
        seen: Vec::new(),
    };
    let mut log = Log::default();
    run_single::<f64>(&cfg, &mut dm, &mut log).unwrap();
    assert_eq!(log.generations, (1..=50).collect::<Vec<_>>());
    assert_eq!(log.sessions, vec![(1, 7), (2, 10), (3, 10), (4, 10)]);
}

#[test]
fn precisions_agree_roughly() {
    let cfg = short(Algorithm::Moead);
    let wide = run_simulated::<f64>(&cfg).unwrap();
    let narrow = run_simulated::<f32>(&cfg).unwrap();
    assert_eq!(wide.trajectory.len(), narrow.trajectory.len());
    assert!(narrow.final_error().unwrap().is_finite());
    assert_eq!(wide.golden_point.len(), 3);
    assert!((wide.golden_point[0] - narrow.golden_point[0]).abs() < 1e-6);
}
