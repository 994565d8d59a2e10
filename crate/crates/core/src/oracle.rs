//! Scoring authorities for consultation sessions.

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::optimizer::EngineRng;
use crate::problems::{psi_noisy, GoldenSpec, NoiseSpec};
use crate::scalar::Scalar;

/// One batch of candidates put before the decision maker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ConsultationRequest<T> {
    /// 1-based session counter.
    pub session: usize,
    pub generation: usize,
    pub candidates: Vec<Vec<T>>,
    /// Current population objectives, for display.
    pub population: Vec<Vec<T>>,
}

pub trait DmOracle<T: Scalar> {
    /// One score per candidate, in candidate order. Returning
    /// [`crate::Error::Aborted`] cancels the run.
    fn score(&mut self, request: &ConsultationRequest<T>) -> Result<Vec<T>>;
}

impl<T: Scalar, O: DmOracle<T> + ?Sized> DmOracle<T> for &mut O {
    fn score(&mut self, request: &ConsultationRequest<T>) -> Result<Vec<T>> {
        (**self).score(request)
    }
}

impl<T: Scalar, O: DmOracle<T> + ?Sized> DmOracle<T> for Box<O> {
    fn score(&mut self, request: &ConsultationRequest<T>) -> Result<Vec<T>> {
        (**self).score(request)
    }
}

/// Scores with the golden value function, optionally perturbed.
///
/// Noise draws come from a stream owned by the oracle, so the optimizer's
/// own stream is untouched by consultation.
#[derive(Debug, Clone)]
pub struct SimulatedOracle<T> {
    pub golden: GoldenSpec<T>,
    pub noise: NoiseSpec,
    rng: EngineRng,
}

impl<T: Scalar> SimulatedOracle<T> {
    pub fn new(golden: GoldenSpec<T>, noise: NoiseSpec, seed: u64) -> Self {
        Self {
            golden,
            noise,
            rng: EngineRng::seed_from_u64(seed),
        }
    }
}

impl<T: Scalar> DmOracle<T> for SimulatedOracle<T> {
    fn score(&mut self, request: &ConsultationRequest<T>) -> Result<Vec<T>> {
        Ok(request
            .candidates
            .iter()
            .map(|f| psi_noisy(f, &self.golden, &self.noise, request.generation, &mut self.rng))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{golden_point, ProblemId, ProblemSpec, Roi};

    fn request(candidates: Vec<Vec<f64>>) -> ConsultationRequest<f64> {
        ConsultationRequest {
            session: 1,
            generation: 25,
            candidates,
            population: vec![],
        }
    }

    #[test]
    fn golden_point_scores_zero_only_at_origin_and_positive_elsewhere() {
        let g = GoldenSpec::<f64>::for_roi(Roi::Center, 3);
        let z = golden_point(&ProblemSpec::new(ProblemId::Dtlz2, 3).unwrap(), &g);
        let mut o = SimulatedOracle::new(g.clone(), NoiseSpec::none(), 1);
        let s = o.score(&request(vec![z.clone(), vec![0.0; 3]])).unwrap();
        assert!((s[0] - g.psi(&z)).abs() < 1e-15);
        assert_eq!(s[1], 0.0);
    }

    #[test]
    fn deterministic_without_noise() {
        let g = GoldenSpec::<f64>::for_roi(Roi::Boundary, 3);
        let mut o = SimulatedOracle::new(g, NoiseSpec::none(), 1);
        let req = request(vec![vec![0.2, 0.3, 0.9], vec![0.5, 0.5, 0.5]]);
        assert_eq!(o.score(&req).unwrap(), o.score(&req).unwrap());
    }

    #[test]
    fn preserves_candidate_order() {
        let g = GoldenSpec::with_weights(&[0.5, 0.5], Roi::Center).unwrap();
        let mut o = SimulatedOracle::new(g, NoiseSpec::none(), 1);
        let s = o
            .score(&request(vec![vec![0.1, 0.05], vec![0.25, 0.1], vec![0.45, 0.2]]))
            .unwrap();
        let expected = [0.2, 0.5, 0.9];
        for (a, b) in s.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
