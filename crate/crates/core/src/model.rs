//! Solutions, populations, Pareto dominance and the approximation-error metric.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::scalar::{euclidean, Scalar};

/// A decision vector together with its objective vector.
///
/// `objectives` is only ever produced by evaluating `x`; constructors that
/// change `x` re-evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Solution<T> {
    pub x: Vec<T>,
    pub f: Vec<T>,
}

impl<T: Scalar> Solution<T> {
    pub fn new(x: Vec<T>, f: Vec<T>) -> Self {
        Self { x, f }
    }

    pub fn objectives(&self) -> &[T] {
        &self.f
    }
}

pub type Population<T> = Vec<Solution<T>>;

/// Running coordinate-wise minimum of all evaluated objective vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct IdealPoint<T> {
    pub z: Vec<T>,
}

impl<T: Scalar> IdealPoint<T> {
    /// Every coordinate at +inf, so the first update adopts the vector.
    pub fn unset(m: usize) -> Self {
        Self {
            z: vec![T::infinity(); m],
        }
    }

    pub fn origin(m: usize) -> Self {
        Self {
            z: vec![T::zero(); m],
        }
    }

    pub fn from_population(pop: &[Solution<T>], m: usize) -> Self {
        pop.iter()
            .fold(Self::unset(m), |z, s| update_ideal(&z, &s.f))
    }

    /// In-place variant of [`update_ideal`].
    pub fn absorb(&mut self, f: &[T]) {
        for (z, &v) in self.z.iter_mut().zip(f) {
            if v < *z {
                *z = v;
            }
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.z
    }
}

/// Minimisation dominance: `a` is no worse everywhere and differs somewhere.
pub fn dominates<T: Scalar>(a: &[T], b: &[T]) -> Result<bool> {
    check_len(a.len(), b.len())?;
    Ok(dominates_unchecked(a, b))
}

#[inline]
pub(crate) fn dominates_unchecked<T: Scalar>(a: &[T], b: &[T]) -> bool {
    let mut strictly = false;
    for (&x, &y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Distance in objective space from the golden point to the closest member.
pub fn approximation_error<T: Scalar>(pop: &[Solution<T>], golden: &[T]) -> Result<T> {
    let first = pop.first().ok_or(Error::EmptyPopulation)?;
    check_len(golden.len(), first.f.len())?;
    objective_error(pop.iter().map(|s| s.f.as_slice()), golden)
}

/// [`approximation_error`] over bare objective vectors.
pub fn objective_error<'a, T: Scalar>(
    objectives: impl IntoIterator<Item = &'a [T]>,
    golden: &[T],
) -> Result<T> {
    let mut best: Option<T> = None;
    for f in objectives {
        check_len(golden.len(), f.len())?;
        let d = euclidean(f, golden);
        best = Some(match best {
            Some(b) if b <= d => b,
            _ => d,
        });
    }
    best.ok_or(Error::EmptyPopulation)
}

pub fn update_ideal<T: Scalar>(z: &IdealPoint<T>, f: &[T]) -> IdealPoint<T> {
    let mut next = z.clone();
    next.absorb(f);
    next
}
