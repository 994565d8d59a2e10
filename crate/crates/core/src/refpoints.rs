//! Simplex-lattice reference points and their neighborhood structure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{euclidean, Scalar};

/// Upper bound on lattice sizes accepted by [`das_dennis`].
pub const DEFAULT_LATTICE_CAP: usize = 2_000_000;

/// Weight vectors on the unit simplex plus each one's `t` nearest neighbors
/// (itself included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ReferenceSet<T> {
    pub points: Vec<Vec<T>>,
    pub neighborhoods: Vec<Vec<usize>>,
}

impl<T: Scalar> ReferenceSet<T> {
    pub fn new(points: Vec<Vec<T>>, t: usize) -> Result<Self> {
        let neighborhoods = build_neighborhoods(&points, t)?;
        Ok(Self {
            points,
            neighborhoods,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn neighborhood_size(&self) -> usize {
        self.neighborhoods.first().map_or(0, Vec::len)
    }

    pub fn m(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }
}

/// Number of lattice points, `C(h + m - 1, m - 1)`, or `None` on overflow.
pub fn lattice_size(m: usize, h: usize) -> Option<usize> {
    let k = m.checked_sub(1)?;
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = acc.checked_mul(h as u128 + i)? / i;
    }
    usize::try_from(acc).ok()
}

/// All points with coordinates in `{0, 1/h, ..., 1}` summing to one, in
/// lexicographic order.
pub fn das_dennis<T: Scalar>(m: usize, h: usize) -> Result<Vec<Vec<T>>> {
    das_dennis_capped(m, h, DEFAULT_LATTICE_CAP)
}

pub fn das_dennis_capped<T: Scalar>(m: usize, h: usize, cap: usize) -> Result<Vec<Vec<T>>> {
    if m < 2 || h < 1 {
        return Err(Error::InvalidArgument(format!(
            "lattice needs m >= 2 and h >= 1, got m={m} h={h}"
        )));
    }
    match lattice_size(m, h) {
        Some(count) if count <= cap => {}
        _ => {
            return Err(Error::InvalidArgument(format!(
                "lattice with m={m} h={h} exceeds the cap of {cap} points"
            )))
        }
    }
    let mut out = Vec::with_capacity(lattice_size(m, h).unwrap_or(0));
    let mut counts = vec![0usize; m];
    fill_lattice(&mut out, &mut counts, 0, h, h);
    Ok(out)
}

fn fill_lattice<T: Scalar>(
    out: &mut Vec<Vec<T>>,
    counts: &mut [usize],
    depth: usize,
    left: usize,
    h: usize,
) {
    if depth + 1 == counts.len() {
        counts[depth] = left;
        let denom = T::from_usize_lossy(h);
        out.push(
            counts
                .iter()
                .map(|&c| T::from_usize_lossy(c) / denom)
                .collect(),
        );
        return;
    }
    for c in 0..=left {
        counts[depth] = c;
        fill_lattice(out, counts, depth + 1, left - c, h);
    }
}

/// Boundary lattice with `h1` divisions plus an interior lattice with `h2`
/// divisions shrunk toward the centroid by `w / 2 + 1 / (2m)`.
pub fn two_layer<T: Scalar>(m: usize, h1: usize, h2: usize) -> Result<Vec<Vec<T>>> {
    let mut points = das_dennis::<T>(m, h1)?;
    let half = T::lit(0.5);
    let shift = T::one() / T::from_usize_lossy(2 * m);
    let tol = T::lit(1e-12);
    for w in das_dennis::<T>(m, h2)? {
        let inner: Vec<T> = w.iter().map(|&v| v * half + shift).collect();
        let dup = points
            .iter()
            .any(|p| p.iter().zip(&inner).all(|(&a, &b)| (a - b).abs() <= tol));
        if !dup {
            points.push(inner);
        }
    }
    Ok(points)
}

/// For every point, the indices of its `t` nearest points by Euclidean
/// distance; ties go to the lower index.
pub fn build_neighborhoods<T: Scalar>(points: &[Vec<T>], t: usize) -> Result<Vec<Vec<usize>>> {
    if t > points.len() {
        return Err(Error::InvalidArgument(format!(
            "neighborhood size {t} exceeds {} reference points",
            points.len()
        )));
    }
    Ok(points
        .iter()
        .map(|p| {
            let mut order: Vec<(T, usize)> = points
                .iter()
                .enumerate()
                .map(|(j, q)| (euclidean(p, q), j))
                .collect();
            order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            order.into_iter().take(t).map(|(_, j)| j).collect()
        })
        .collect())
}

/// `mu` well-spread indices: start at the point closest to the simplex
/// centroid, then repeatedly add the point farthest from those chosen.
pub fn select_seed_indices<T: Scalar>(points: &[Vec<T>], mu: usize) -> Vec<usize> {
    let n = points.len();
    let mu = mu.min(n);
    if mu == 0 {
        return Vec::new();
    }
    let m = points[0].len();
    let centroid = vec![T::one() / T::from_usize_lossy(m); m];
    let first = argmin(points.iter().map(|p| euclidean(p, &centroid)));
    let mut chosen = vec![first];
    let mut nearest: Vec<T> = points.iter().map(|p| euclidean(p, &points[first])).collect();
    let mut taken = vec![false; n];
    taken[first] = true;
    while chosen.len() < mu {
        let mut best: Option<(T, usize)> = None;
        for (j, &d) in nearest.iter().enumerate() {
            if taken[j] {
                continue;
            }
            if best.is_none_or(|(bd, _)| d > bd) {
                best = Some((d, j));
            }
        }
        let (_, next) = best.expect("fewer points than requested seeds");
        taken[next] = true;
        chosen.push(next);
        for (j, p) in points.iter().enumerate() {
            let d = euclidean(p, &points[next]);
            if d < nearest[j] {
                nearest[j] = d;
            }
        }
    }
    chosen
}

pub(crate) fn argmin<T: Scalar>(values: impl Iterator<Item = T>) -> usize {
    let mut best = (T::infinity(), 0);
    for (i, v) in values.enumerate() {
        if v < best.0 {
            best = (v, i);
        }
    }
    best.1
}

/// Reference-layer settings per objective count, matching the usual
/// population sizes of 91, 210, 156 and 275.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatticeSpec {
    Single { h: usize },
    TwoLayer { h1: usize, h2: usize },
}

impl LatticeSpec {
    pub fn default_for(m: usize) -> Self {
        match m {
            2 => LatticeSpec::Single { h: 99 },
            3 => LatticeSpec::Single { h: 12 },
            4 => LatticeSpec::Single { h: 7 },
            5 => LatticeSpec::Single { h: 6 },
            6 => LatticeSpec::Single { h: 4 },
            7 => LatticeSpec::Single { h: 3 },
            _ => LatticeSpec::TwoLayer { h1: 3, h2: 2 },
        }
    }

    pub fn generate<T: Scalar>(&self, m: usize) -> Result<Vec<Vec<T>>> {
        match *self {
            LatticeSpec::Single { h } => das_dennis(m, h),
            LatticeSpec::TwoLayer { h1, h2 } => two_layer(m, h1, h2),
        }
    }
}
