//! DTLZ1–DTLZ4 benchmarks and the simulated decision maker's value function.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::scalar::{norm, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ProblemId {
    Dtlz1,
    Dtlz2,
    Dtlz3,
    Dtlz4,
}

impl ProblemId {
    /// Number of distance variables in the standard formulation.
    pub fn default_k(self) -> usize {
        match self {
            ProblemId::Dtlz1 => 5,
            _ => 10,
        }
    }

    pub fn has_linear_front(self) -> bool {
        self == ProblemId::Dtlz1
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProblemId::Dtlz1 => "DTLZ1",
            ProblemId::Dtlz2 => "DTLZ2",
            ProblemId::Dtlz3 => "DTLZ3",
            ProblemId::Dtlz4 => "DTLZ4",
        };
        f.write_str(s)
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DTLZ1" => Ok(ProblemId::Dtlz1),
            "DTLZ2" => Ok(ProblemId::Dtlz2),
            "DTLZ3" => Ok(ProblemId::Dtlz3),
            "DTLZ4" => Ok(ProblemId::Dtlz4),
            other => Err(Error::InvalidArgument(format!("unknown problem `{other}`"))),
        }
    }
}

pub const DTLZ4_ALPHA: f64 = 100.0;
pub const MAX_OBJECTIVES: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub id: ProblemId,
    pub m: usize,
    pub n: usize,
    /// Position-variable bias exponent; only read by DTLZ4.
    pub alpha: f64,
}

impl ProblemSpec {
    /// Standard sizing: `n = m + k - 1`.
    pub fn new(id: ProblemId, m: usize) -> Result<Self> {
        if !(2..=MAX_OBJECTIVES).contains(&m) {
            return Err(Error::InvalidConfig {
                field: "problem.m".into(),
                message: format!("objective count must be in 2..={MAX_OBJECTIVES}, got {m}"),
            });
        }
        Ok(Self {
            id,
            m,
            n: m + id.default_k() - 1,
            alpha: DTLZ4_ALPHA,
        })
    }

    pub fn k(&self) -> usize {
        self.n + 1 - self.m
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_OBJECTIVES).contains(&self.m) {
            return Err(Error::InvalidConfig {
                field: "problem.m".into(),
                message: format!("objective count must be in 2..={MAX_OBJECTIVES}, got {}", self.m),
            });
        }
        if self.n < self.m {
            return Err(Error::InvalidConfig {
                field: "problem.n".into(),
                message: format!("need n >= m, got n={} m={}", self.n, self.m),
            });
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidConfig {
                field: "problem.alpha".into(),
                message: "bias exponent must be positive".into(),
            });
        }
        Ok(())
    }

    pub fn evaluate<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        evaluate(self, x)
    }
}

/// Evaluates a DTLZ problem at `x`, which must already lie in the unit box.
pub fn evaluate<T: Scalar>(spec: &ProblemSpec, x: &[T]) -> Result<Vec<T>> {
    check_len(spec.n, x.len())?;
    for (index, &v) in x.iter().enumerate() {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(Error::OutOfBounds {
                index,
                value: v.to_f64_lossy(),
            });
        }
    }
    let m = spec.m;
    let (pos, dist) = x.split_at(m - 1);
    let half = T::lit(0.5);
    Ok(match spec.id {
        ProblemId::Dtlz1 => {
            let g = rastrigin_g(dist);
            linear_front(pos, half * (T::one() + g))
        }
        ProblemId::Dtlz2 => spherical_front(pos.iter().copied(), T::one() + sphere_g(dist), m),
        ProblemId::Dtlz3 => spherical_front(pos.iter().copied(), T::one() + rastrigin_g(dist), m),
        ProblemId::Dtlz4 => {
            let alpha = T::lit(spec.alpha);
            spherical_front(pos.iter().map(|&v| v.powf(alpha)), T::one() + sphere_g(dist), m)
        }
    })
}

fn sphere_g<T: Scalar>(dist: &[T]) -> T {
    let half = T::lit(0.5);
    dist.iter().map(|&v| (v - half) * (v - half)).sum()
}

fn rastrigin_g<T: Scalar>(dist: &[T]) -> T {
    let half = T::lit(0.5);
    let twenty_pi = T::lit(20.0) * T::PI();
    let s: T = dist
        .iter()
        .map(|&v| (v - half) * (v - half) - (twenty_pi * (v - half)).cos())
        .sum();
    T::lit(100.0) * (T::from_usize_lossy(dist.len()) + s)
}

fn linear_front<T: Scalar>(pos: &[T], scale: T) -> Vec<T> {
    let m = pos.len() + 1;
    (0..m)
        .map(|i| {
            let kept = m - 1 - i;
            let mut f = scale;
            for &p in &pos[..kept] {
                f = f * p;
            }
            if i > 0 {
                f = f * (T::one() - pos[kept]);
            }
            f
        })
        .collect()
}

fn spherical_front<T: Scalar>(pos: impl Iterator<Item = T>, scale: T, m: usize) -> Vec<T> {
    let angles: Vec<T> = pos.map(|p| p * T::FRAC_PI_2()).collect();
    (0..m)
        .map(|i| {
            let kept = m - 1 - i;
            let mut f = scale;
            for &a in &angles[..kept] {
                f = f * a.cos();
            }
            if i > 0 {
                f = f * angles[kept].sin();
            }
            f
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Roi {
    Center,
    Boundary,
}

impl fmt::Display for Roi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Roi::Center => "center",
            Roi::Boundary => "boundary",
        })
    }
}

/// The simulated decision maker: a weighted Tchebycheff value function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GoldenSpec<T> {
    pub w_star: Vec<T>,
    pub z_star: Vec<T>,
    pub roi: Roi,
}

impl<T: Scalar> GoldenSpec<T> {
    /// Center: uniform weights. Boundary: 0.7 on the first objective, the
    /// rest shared evenly.
    pub fn for_roi(roi: Roi, m: usize) -> Self {
        let w_star = match roi {
            Roi::Center => vec![T::one() / T::from_usize_lossy(m); m],
            Roi::Boundary => {
                let rest = T::lit(0.3) / T::from_usize_lossy(m - 1);
                std::iter::once(T::lit(0.7))
                    .chain(std::iter::repeat_n(rest, m - 1))
                    .collect()
            }
        };
        Self {
            w_star,
            z_star: vec![T::zero(); m],
            roi,
        }
    }

    /// Uses the supplied weights, normalised to sum to one.
    pub fn with_weights(w: &[T], roi: Roi) -> Result<Self> {
        if w.iter().any(|&v| !(v > T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidConfig {
                field: "golden.w_star".into(),
                message: "utopia weights must be strictly positive and finite".into(),
            });
        }
        let s: T = w.iter().copied().sum();
        Ok(Self {
            w_star: w.iter().map(|&v| v / s).collect(),
            z_star: vec![T::zero(); w.len()],
            roi,
        })
    }

    pub fn m(&self) -> usize {
        self.w_star.len()
    }

    pub fn psi(&self, f: &[T]) -> T {
        psi(f, self)
    }
}

/// Noise on the simulated decision maker's scores; the spread decays
/// linearly to zero at `t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kappa: f64,
    pub t_max: usize,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            kappa: 0.0,
            t_max: 1,
        }
    }

    pub fn std_dev(&self, t: usize) -> f64 {
        if self.t_max == 0 {
            return 0.0;
        }
        let frac = (t.min(self.t_max) as f64) / (self.t_max as f64);
        self.kappa * (1.0 - frac)
    }
}

/// Point on the Pareto front along the ray through `w_star`.
pub fn golden_point<T: Scalar>(spec: &ProblemSpec, g: &GoldenSpec<T>) -> Vec<T> {
    if spec.id.has_linear_front() {
        let s: T = g.w_star.iter().copied().sum();
        let scale = T::lit(0.5) / s;
        g.w_star.iter().map(|&w| w * scale).collect()
    } else {
        let n = norm(&g.w_star);
        g.w_star.iter().map(|&w| w / n).collect()
    }
}

pub fn psi<T: Scalar>(f: &[T], g: &GoldenSpec<T>) -> T {
    f.iter()
        .zip(&g.z_star)
        .zip(&g.w_star)
        .map(|((&fi, &zi), &wi)| (fi - zi).abs() / wi)
        .fold(T::zero(), T::max)
}

/// `psi` scaled by a Gaussian factor with mean one and spread `kappa (1 - t/t_max)`.
///
/// No random number is drawn when the spread is zero.
pub fn psi_noisy<T: Scalar, R: Rng + ?Sized>(
    f: &[T],
    g: &GoldenSpec<T>,
    noise: &NoiseSpec,
    t: usize,
    rng: &mut R,
) -> T {
    let clean = psi(f, g);
    let sd = noise.std_dev(t);
    if sd == 0.0 {
        return clean;
    }
    let z: f64 = rng.sample(StandardNormal);
    clean * T::lit(1.0 + sd * z)
}
