//! NSGA-III survival: non-dominated sorting, perpendicular-distance
//! association with reference lines and crowdedness-based niching.
//!
//! Objectives are translated by the running ideal point and not otherwise
//! normalized.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{dominates_unchecked, IdealPoint, Solution};
use crate::optimizer::{pick_two, random_population, EngineRng, Optimizer};
use crate::problems::ProblemSpec;
use crate::scalar::{norm, Scalar};
use crate::variation::{polynomial_mutation, sbx, VariationParams};

/// Population size for a given number of reference points: the next
/// multiple of four.
pub fn population_size_for(references: usize) -> usize {
    references.div_ceil(4) * 4
}

/// Fast non-dominated sorting. Fronts list indices in ascending order.
pub fn nondominated_sort<T: Scalar>(objectives: &[&[T]]) -> Vec<Vec<usize>> {
    let n = objectives.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates_unchecked(objectives[i], objectives[j]) {
                dominated_by[i].push(j);
                counts[j] += 1;
            } else if dominates_unchecked(objectives[j], objectives[i]) {
                dominated_by[j].push(i);
                counts[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Perpendicular distance from `f - z` to the line through the origin and `w`.
pub fn perpendicular_distance<T: Scalar>(f: &[T], w: &[T], z: &[T]) -> T {
    let wn = norm(w);
    let shifted: Vec<T> = f.iter().zip(z).map(|(&a, &b)| a - b).collect();
    let proj: T = shifted.iter().zip(w).map(|(&a, &b)| a * b / wn).sum();
    shifted
        .iter()
        .zip(w)
        .map(|(&a, &b)| {
            let d = a - proj * b / wn;
            d * d
        })
        .sum::<T>()
        .sqrt()
}

/// Closest reference line to `f` after translating by `z`; ties go to the
/// lower index.
pub fn associate<T: Scalar>(f: &[T], refs: &[Vec<T>], z: &[T]) -> (usize, T) {
    let mut best = (0, T::infinity());
    for (j, w) in refs.iter().enumerate() {
        let d = perpendicular_distance(f, w, z);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Reference attachment for every member of a candidate pool plus the
/// number of already-selected members per reference.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationTable<T> {
    pub links: Vec<(usize, T)>,
    pub crowding: Vec<usize>,
}

impl<T: Scalar> AssociationTable<T> {
    pub fn build(objectives: &[&[T]], refs: &[Vec<T>], z: &[T], selected: &[usize]) -> Self {
        let links: Vec<(usize, T)> = objectives.iter().map(|f| associate(f, refs, z)).collect();
        let mut crowding = vec![0; refs.len()];
        for &i in selected {
            crowding[links[i].0] += 1;
        }
        Self { links, crowding }
    }
}

/// Completes `selected` up to `target` with members of `last_front`,
/// always drawing from the least crowded reference that still has
/// candidates. Ties between references and the choice among a reference's
/// candidates are both uniform.
pub fn niching_fill<T: Scalar, R: Rng + ?Sized>(
    selected: &mut Vec<usize>,
    last_front: &[usize],
    table: &mut AssociationTable<T>,
    target: usize,
    rng: &mut R,
) -> Result<()> {
    if selected.len() >= target || selected.len() + last_front.len() < target {
        return Err(Error::InvalidArgument(format!(
            "cannot fill {} selected + {} candidates to {target}",
            selected.len(),
            last_front.len()
        )));
    }
    if selected.len() + last_front.len() == target {
        for &i in last_front {
            table.crowding[table.links[i].0] += 1;
        }
        selected.extend_from_slice(last_front);
        return Ok(());
    }
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); table.crowding.len()];
    for &i in last_front {
        pools[table.links[i].0].push(i);
    }
    let mut active: Vec<usize> = (0..pools.len()).filter(|&j| !pools[j].is_empty()).collect();
    let mut ties = Vec::new();
    while selected.len() < target {
        let least = active
            .iter()
            .map(|&j| table.crowding[j])
            .min()
            .expect("candidates exhausted before reaching target");
        ties.clear();
        ties.extend(active.iter().copied().filter(|&j| table.crowding[j] == least));
        let j = ties[rng.random_range(0..ties.len())];
        let pool = &mut pools[j];
        let pick = pool.swap_remove(rng.random_range(0..pool.len()));
        selected.push(pick);
        table.crowding[j] += 1;
        if pools[j].is_empty() {
            active.retain(|&r| r != j);
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Nsga3State<T> {
    pub refs: Vec<Vec<T>>,
    pub population: Vec<Solution<T>>,
    pub ideal: IdealPoint<T>,
    pub generation: usize,
    pub evaluations: usize,
}

impl<T: Scalar> Nsga3State<T> {
    pub fn new(
        problem: &ProblemSpec,
        refs: Vec<Vec<T>>,
        population_size: usize,
        rng: &mut EngineRng,
    ) -> Result<Self> {
        let population = random_population(problem, population_size, rng)?;
        Self::from_population(refs, population)
    }

    pub fn from_population(refs: Vec<Vec<T>>, population: Vec<Solution<T>>) -> Result<Self> {
        if refs.is_empty() || population.is_empty() {
            return Err(Error::InvalidArgument(
                "reference set and population must be nonempty".into(),
            ));
        }
        let ideal = IdealPoint::from_population(&population, refs[0].len());
        Ok(Self {
            refs,
            population,
            ideal,
            generation: 0,
            evaluations: 0,
        })
    }

    pub fn offspring(
        &mut self,
        problem: &ProblemSpec,
        variation: &VariationParams,
        rng: &mut EngineRng,
    ) -> Result<Vec<Solution<T>>> {
        let n = self.population.len();
        let all: Vec<usize> = (0..n).collect();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let (a, b) = pick_two(&all, rng);
            let (c1, c2) = sbx(&self.population[a].x, &self.population[b].x, variation, rng);
            for c in [c1, c2] {
                if out.len() == n {
                    break;
                }
                let x = polynomial_mutation(&c, variation, rng);
                let f = problem.evaluate(&x)?;
                self.evaluations += 1;
                self.ideal.absorb(&f);
                out.push(Solution::new(x, f));
            }
        }
        Ok(out)
    }

    /// Environmental selection of `population.len()` survivors from `pool`.
    pub fn survive(&self, pool: Vec<Solution<T>>, rng: &mut EngineRng) -> Result<Vec<Solution<T>>> {
        let target = self.population.len();
        let objectives: Vec<&[T]> = pool.iter().map(|s| s.f.as_slice()).collect();
        let fronts = nondominated_sort(&objectives);
        let mut selected = Vec::with_capacity(target);
        let mut last: &[usize] = &[];
        for front in &fronts {
            if selected.len() + front.len() <= target {
                selected.extend_from_slice(front);
                if selected.len() == target {
                    break;
                }
            } else {
                last = front;
                break;
            }
        }
        if selected.len() < target {
            let mut table = AssociationTable::build(&objectives, &self.refs, &self.ideal.z, &selected);
            niching_fill(&mut selected, last, &mut table, target, rng)?;
        }
        let mut slots: Vec<Option<Solution<T>>> = pool.into_iter().map(Some).collect();
        Ok(selected
            .into_iter()
            .map(|i| slots[i].take().expect("survivor selected twice"))
            .collect())
    }

    pub fn generation_step(
        &mut self,
        problem: &ProblemSpec,
        variation: &VariationParams,
        rng: &mut EngineRng,
    ) -> Result<()> {
        let offspring = self.offspring(problem, variation, rng)?;
        let mut pool = self.population.clone();
        pool.extend(offspring);
        self.population = self.survive(pool, rng)?;
        self.generation += 1;
        Ok(())
    }
}

impl<T: Scalar> Optimizer<T> for Nsga3State<T> {
    fn population(&self) -> &[Solution<T>] {
        &self.population
    }

    fn reference_points(&self) -> &[Vec<T>] {
        &self.refs
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
        if points.len() != self.refs.len() {
            return Err(Error::InvalidArgument(format!(
                "replacement reference set has {} points, expected {}",
                points.len(),
                self.refs.len()
            )));
        }
        self.refs = points;
        Ok(())
    }

    fn associations(&self) -> Vec<usize> {
        self.population
            .iter()
            .map(|s| associate(&s.f, &self.refs, &self.ideal.z).0)
            .collect()
    }
}
