//! MOEA/D with Tchebycheff aggregation.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{IdealPoint, Solution};
use crate::optimizer::{as_reference_set, pick_two, random_population, EngineRng, Optimizer};
use crate::problems::ProblemSpec;
use crate::refpoints::ReferenceSet;
use crate::scalar::Scalar;
use crate::variation::{breed_one, VariationParams};

/// Lower bound substituted for zero weights in [`tchebycheff`].
pub const WEIGHT_FLOOR: f64 = 1e-6;

/// `max_i |f_i - z_i| / max(w_i, 1e-6)`.
pub fn tchebycheff<T: Scalar>(f: &[T], w: &[T], z: &[T]) -> T {
    let floor = T::lit(WEIGHT_FLOOR);
    f.iter()
        .zip(w)
        .zip(z)
        .map(|((&fi, &wi), &zi)| (fi - zi).abs() / wi.max(floor))
        .fold(T::zero(), T::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoeadParams {
    /// Neighborhood size `T`.
    pub neighborhood: usize,
    /// Probability of mating and replacing outside the neighborhood.
    pub delta: f64,
    /// Maximum replacements per offspring; `None` means unlimited.
    pub max_replacements: Option<usize>,
}

impl Default for MoeadParams {
    fn default() -> Self {
        Self {
            neighborhood: 20,
            delta: 0.1,
            max_replacements: Some(2),
        }
    }
}

/// Population and reference points are aligned: solution `i` belongs to
/// subproblem `i`.
#[derive(Debug, Clone)]
pub struct MoeadState<T> {
    pub refs: ReferenceSet<T>,
    pub population: Vec<Solution<T>>,
    pub ideal: IdealPoint<T>,
    pub generation: usize,
    pub evaluations: usize,
    pub params: MoeadParams,
}

impl<T: Scalar> MoeadState<T> {
    pub fn new(
        problem: &ProblemSpec,
        points: Vec<Vec<T>>,
        params: MoeadParams,
        rng: &mut EngineRng,
    ) -> Result<Self> {
        let refs = as_reference_set(points, params.neighborhood)?;
        let population = random_population(problem, refs.len(), rng)?;
        Self::from_population(refs, population, params)
    }

    pub fn from_population(
        refs: ReferenceSet<T>,
        population: Vec<Solution<T>>,
        params: MoeadParams,
    ) -> Result<Self> {
        if population.len() != refs.len() {
            return Err(Error::InvalidArgument(format!(
                "population of {} for {} subproblems",
                population.len(),
                refs.len()
            )));
        }
        let ideal = IdealPoint::from_population(&population, refs.m());
        Ok(Self {
            refs,
            population,
            ideal,
            generation: 0,
            evaluations: 0,
            params,
        })
    }

    fn pool<'a>(&'a self, i: usize, rng: &mut EngineRng, all: &'a [usize]) -> &'a [usize] {
        if rng.random::<f64>() < self.params.delta {
            all
        } else {
            &self.refs.neighborhoods[i]
        }
    }

    /// Breeds one child for subproblem `i` and offers it to a pool of
    /// subproblems.
    pub fn update_subproblem(
        &mut self,
        i: usize,
        problem: &ProblemSpec,
        variation: &VariationParams,
        rng: &mut EngineRng,
    ) -> Result<usize> {
        let all: Vec<usize> = (0..self.refs.len()).collect();
        let (a, b) = pick_two(self.pool(i, rng, &all), rng);
        let x = breed_one(&self.population[a].x, &self.population[b].x, variation, rng);
        let f = problem.evaluate(&x)?;
        self.evaluations += 1;
        self.ideal.absorb(&f);
        let child = Solution::new(x, f);
        let mut pool = self.pool(i, rng, &all).to_vec();
        pool.shuffle(rng);
        Ok(self.offer(&child, &pool))
    }

    /// Replaces subproblems in `pool` (visited in the given order) whose
    /// incumbent aggregates strictly worse than `child`, up to the cap.
    pub fn offer(&mut self, child: &Solution<T>, pool: &[usize]) -> usize {
        let cap = self.params.max_replacements.unwrap_or(usize::MAX);
        let mut replaced = 0;
        for &j in pool {
            if replaced >= cap {
                break;
            }
            let w = &self.refs.points[j];
            let z = &self.ideal.z;
            if tchebycheff(&child.f, w, z) < tchebycheff(&self.population[j].f, w, z) {
                self.population[j] = child.clone();
                replaced += 1;
            }
        }
        replaced
    }

    pub fn generation_step(
        &mut self,
        problem: &ProblemSpec,
        variation: &VariationParams,
        rng: &mut EngineRng,
    ) -> Result<()> {
        for i in 0..self.refs.len() {
            self.update_subproblem(i, problem, variation, rng)?;
        }
        self.generation += 1;
        Ok(())
    }

    pub fn adopt(&mut self, points: Vec<Vec<T>>) -> Result<()> {
        if points.len() != self.refs.len() {
            return Err(Error::InvalidArgument(format!(
                "replacement reference set has {} points, expected {}",
                points.len(),
                self.refs.len()
            )));
        }
        self.refs = as_reference_set(points, self.params.neighborhood)?;
        Ok(())
    }
}

impl<T: Scalar> Optimizer<T> for MoeadState<T> {
    fn population(&self) -> &[Solution<T>] {
        &self.population
    }

    fn reference_points(&self) -> &[Vec<T>] {
        &self.refs.points
    }

    fn ideal(&self) -> &IdealPoint<T> {
        &self.ideal
    }

    fn generation(&self) -> usize {
        self.generation
    }

    fn evaluations(&self) -> usize {
        self.evaluations
    }

    fn step(
        &mut self,
        problem: &ProblemSpec,
        variation: &VariationParams,
        rng: &mut EngineRng,
    ) -> Result<()> {
        self.generation_step(problem, variation, rng)
    }

    fn adopt_reference_points(&mut self, points: Vec<Vec<T>>) -> Result<()> {
        self.adopt(points)
    }

    fn associations(&self) -> Vec<usize> {
        (0..self.population.len()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::dominates;
    use crate::problems::ProblemId;
    use crate::refpoints::{build_neighborhoods, das_dennis};
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn setup(seed: u64, delta: f64) -> (ProblemSpec, MoeadState<f64>, EngineRng) {
        let problem = ProblemSpec::new(ProblemId::Dtlz2, 3).unwrap();
        let mut rng = EngineRng::seed_from_u64(seed);
        let params = MoeadParams {
            delta,
            ..Default::default()
        };
        let state = MoeadState::new(&problem, das_dennis(3, 12).unwrap(), params, &mut rng).unwrap();
        (problem, state, rng)
    }

    #[test]
    fn tchebycheff_examples() {
        assert!((tchebycheff(&[0.2f64, 0.4], &[0.5, 0.5], &[0.0, 0.0]) - 0.8).abs() < 1e-12);
        assert_eq!(tchebycheff(&[0.3, 0.1], &[0.5, 0.5], &[0.3, 0.1]), 0.0);
        let v = tchebycheff(&[0.3f64, 0.2], &[1.0, 0.0], &[0.0, 0.0]);
        assert!((v - 200_000.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn one_generation_costs_n_evaluations() {
        let (problem, mut state, mut rng) = setup(1, 0.1);
        state.step(&problem, &VariationParams::default(), &mut rng).unwrap();
        assert_eq!(state.evaluations(), 91);
        assert_eq!(state.generation(), 1);
        assert_eq!(state.population().len(), 91);
    }

    #[test]
    fn ties_do_not_replace() {
        let (_, mut state, _) = setup(2, 0.1);
        let incumbent = state.population[5].clone();
        let twin = Solution::new(vec![0.0; incumbent.x.len()], incumbent.f.clone());
        assert_eq!(state.offer(&twin, &[5]), 0);
        assert_eq!(state.population[5], incumbent);
    }

    #[test]
    fn replacement_is_capped() {
        let (_, mut state, _) = setup(3, 0.1);
        let z = state.ideal.z.clone();
        let child = Solution::new(vec![0.5; 12], z);
        let pool: Vec<usize> = (0..10).collect();
        assert_eq!(state.offer(&child, &pool), 2);
        state.params.max_replacements = None;
        let before = state.population.clone();
        let replaced = state.offer(&child, &pool);
        assert_eq!(
            replaced,
            pool.iter().filter(|&&j| before[j].f != child.f).count()
        );
    }

    #[test]
    fn neighborhood_only_changes_stay_local() {
        let (problem, mut state, mut rng) = setup(4, 0.0);
        let variation = VariationParams::default();
        for i in [0, 17, 45, 90] {
            let before = state.population.clone();
            state.update_subproblem(i, &problem, &variation, &mut rng).unwrap();
            for (j, (a, b)) in before.iter().zip(&state.population).enumerate() {
                if a != b {
                    assert!(state.refs.neighborhoods[i].contains(&j), "slot {j} outside B({i})");
                }
            }
        }
    }

    #[test]
    fn ideal_never_increases() {
        let (problem, mut state, mut rng) = setup(5, 0.1);
        let variation = VariationParams::default();
        let mut prev = state.ideal.clone();
        for _ in 0..30 {
            state.step(&problem, &variation, &mut rng).unwrap();
            assert!(state.ideal.z.iter().zip(&prev.z).all(|(a, b)| a <= b));
            assert_eq!(state.population.len(), 91);
            prev = state.ideal.clone();
        }
    }

    #[test]
    fn deterministic_with_fixed_seed() {
        let variation = VariationParams::default();
        let run = || {
            let (problem, mut state, mut rng) = setup(6, 0.0);
            for _ in 0..10 {
                state.step(&problem, &variation, &mut rng).unwrap();
            }
            state.population
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn adoption() {
        let (_, mut state, _) = setup(7, 0.1);
        let pop = state.population.clone();
        let same = state.refs.points.clone();
        let old = state.refs.clone();
        state.adopt(same).unwrap();
        assert_eq!(state.refs, old);
        assert_eq!(state.population, pop);

        let moved: Vec<Vec<f64>> = state
            .refs
            .points
            .iter()
            .map(|w| w.iter().map(|v| 0.5 * v + 0.5 / 3.0).collect())
            .collect();
        state.adopt(moved.clone()).unwrap();
        assert_eq!(state.refs.neighborhoods, build_neighborhoods(&moved, 20).unwrap());
        assert_eq!(state.population, pop);
        assert!(state.adopt(moved[..90].to_vec()).is_err());
    }

    proptest! {
        #[test]
        fn tchebycheff_respects_dominance(
            a in prop::collection::vec(0.0..2.0f64, 3),
            b in prop::collection::vec(0.0..2.0f64, 3),
            w in prop::collection::vec(0.0..1.0f64, 3),
        ) {
            let z = [0.0; 3];
            if dominates(&a, &b).unwrap() {
                prop_assert!(tchebycheff(&a, &w, &z) <= tchebycheff(&b, &w, &z));
            }
        }
    }
}
