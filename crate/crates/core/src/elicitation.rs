//! Migrating reference points toward the ones the learned value function
//! deems promising.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::{rank_by_value, ScoredRecord, ValueModel};
use crate::moead::tchebycheff;
use crate::scalar::{euclidean, Scalar};

/// Threshold the attraction step is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardMode {
    /// Model value against the Tchebycheff aggregate of the best scored
    /// solution on its own reference point.
    #[default]
    Literal,
    /// Model value against the raw score of the best scored solution.
    Rescored,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromisingPoint<T> {
    pub reference: usize,
    /// Best-ranked population member attached to `reference`.
    pub member: usize,
    pub value: T,
}

/// Distinct promising references, most important first.
#[derive(Debug, Clone, PartialEq)]
pub struct PromisingSet<T> {
    pub points: Vec<PromisingPoint<T>>,
}

impl<T> PromisingSet<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, reference: usize) -> bool {
        self.points.iter().any(|p| p.reference == reference)
    }
}

/// The best-scored candidate of the most recent session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BestRecord<T> {
    pub f: Vec<T>,
    pub score: T,
    pub reference: usize,
}

/// Ranks the population by the model and collects the references of the
/// top `mu` members, dropping repeats.
pub fn identify_promising<T: Scalar>(
    objectives: &[&[T]],
    associations: &[usize],
    model: &dyn ValueModel<T>,
    mu: usize,
) -> PromisingSet<T> {
    let mut points: Vec<PromisingPoint<T>> = Vec::new();
    for &i in rank_by_value(objectives, model).iter().take(mu) {
        let reference = associations[i];
        if points.iter().all(|p| p.reference != reference) {
            points.push(PromisingPoint {
                reference,
                member: i,
                value: model.value(objectives[i]),
            });
        }
    }
    PromisingSet { points }
}

/// Moves `w` a fraction `eta` of the way toward `target`.
pub fn move_point<T: Scalar>(w: &[T], target: &[T], eta: T) -> Vec<T> {
    w.iter()
        .zip(target)
        .map(|(&a, &b)| (T::one() - eta) * a + eta * b)
        .collect()
}

/// Lowest-scored record, earliest on ties, with the reference of the
/// candidate it came from.
pub fn resolve_best<T: Scalar>(
    scored: &[ScoredRecord<T>],
    references: &[usize],
) -> Result<BestRecord<T>> {
    let first = scored.first().ok_or(Error::NoConsultation)?;
    let mut best = (0, first.score);
    for (k, r) in scored.iter().enumerate().skip(1) {
        if r.score < best.1 {
            best = (k, r.score);
        }
    }
    Ok(BestRecord {
        f: scored[best.0].f.clone(),
        score: best.1,
        reference: references[best.0],
    })
}

/// New reference points, plus for each point the reference it was pulled
/// toward (if any).
#[derive(Debug, Clone, PartialEq)]
pub struct Elicited<T> {
    pub points: Vec<Vec<T>>,
    pub attractor: Vec<Option<usize>>,
}

/// Clusters the non-promising references around the promising ones in rank
/// order, each taking its `ceil((N - mu') / mu')` nearest unclaimed points.
/// If a promising point's model value fails the guard, every still
/// unclaimed point is pulled toward the best scored solution's reference
/// instead and the pass ends.
pub fn elicit<T: Scalar>(
    points: &[Vec<T>],
    promising: &PromisingSet<T>,
    best: &BestRecord<T>,
    ideal: &[T],
    eta: T,
    guard: GuardMode,
) -> Result<Elicited<T>> {
    if promising.is_empty() {
        return Err(Error::InvalidArgument("no promising reference points".into()));
    }
    let n = points.len();
    let k = promising.len();
    let share = (n - k).div_ceil(k);
    let threshold = match guard {
        GuardMode::Literal => tchebycheff(&best.f, &points[best.reference], ideal),
        GuardMode::Rescored => best.score,
    };
    let mut out = points.to_vec();
    let mut attractor = vec![None; n];
    let mut unclaimed: Vec<usize> = (0..n).filter(|&j| !promising.contains(j)).collect();
    for p in &promising.points {
        if unclaimed.is_empty() {
            break;
        }
        if !(p.value < threshold) {
            let target = &points[best.reference];
            for &j in &unclaimed {
                out[j] = move_point(&points[j], target, eta);
                attractor[j] = Some(best.reference);
            }
            unclaimed.clear();
            break;
        }
        let target = &points[p.reference];
        let mut by_distance: Vec<(T, usize)> = unclaimed
            .iter()
            .map(|&j| (euclidean(&points[j], target), j))
            .collect();
        by_distance.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        for &(_, j) in by_distance.iter().take(share) {
            out[j] = move_point(&points[j], target, eta);
            attractor[j] = Some(p.reference);
        }
        let taken: Vec<usize> = by_distance.iter().take(share).map(|&(_, j)| j).collect();
        unclaimed.retain(|j| !taken.contains(j));
    }
    Ok(Elicited {
        points: out,
        attractor,
    })
}
