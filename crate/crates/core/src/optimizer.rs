//! Interface shared by the decomposition-based optimizers.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{IdealPoint, Solution};
use crate::problems::ProblemSpec;
use crate::refpoints::ReferenceSet;
use crate::scalar::Scalar;
use crate::variation::VariationParams;

/// Random stream driving every stochastic decision of an optimizer.
pub type EngineRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Moead,
    Nsga3,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Moead => "MOEA/D",
            Algorithm::Nsga3 => "NSGA-III",
        })
    }
}

/// A population-based optimizer steered by a set of reference points.
pub trait Optimizer<T: Scalar>: Send {
    fn population(&self) -> &[Solution<T>];

    fn reference_points(&self) -> &[Vec<T>];

    fn ideal(&self) -> &IdealPoint<T>;

    fn generation(&self) -> usize;

    /// Objective evaluations spent by generations (initialization excluded).
    fn evaluations(&self) -> usize;

    fn step(
        &mut self,
        problem: &ProblemSpec,
        variation: &VariationParams,
        rng: &mut EngineRng,
    ) -> Result<()>;

    /// Replaces the reference points wholesale; the count must not change.
    fn adopt_reference_points(&mut self, points: Vec<Vec<T>>) -> Result<()>;

    /// Reference index each population member is attached to.
    fn associations(&self) -> Vec<usize>;
}

/// Uniform random decision vectors, evaluated.
pub fn random_population<T: Scalar, R: Rng + ?Sized>(
    problem: &ProblemSpec,
    size: usize,
    rng: &mut R,
) -> Result<Vec<Solution<T>>> {
    (0..size)
        .map(|_| {
            let x: Vec<T> = (0..problem.n).map(|_| T::lit(rng.random::<f64>())).collect();
            let f = problem.evaluate(&x)?;
            Ok(Solution::new(x, f))
        })
        .collect()
}

/// Two distinct indices drawn uniformly from `pool` (the same index twice
/// only when the pool has a single entry).
pub(crate) fn pick_two<R: Rng + ?Sized>(pool: &[usize], rng: &mut R) -> (usize, usize) {
    let len = pool.len();
    let a = rng.random_range(0..len);
    if len < 2 {
        return (pool[a], pool[a]);
    }
    let mut b = rng.random_range(0..len - 1);
    if b >= a {
        b += 1;
    }
    (pool[a], pool[b])
}

pub(crate) fn as_reference_set<T: Scalar>(points: Vec<Vec<T>>, t: usize) -> Result<ReferenceSet<T>> {
    let t = t.min(points.len());
    ReferenceSet::new(points, t)
}
