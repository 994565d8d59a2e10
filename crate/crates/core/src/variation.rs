//! Simulated binary crossover and polynomial mutation on the unit box.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How `p_m` is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MutationGate {
    /// `p_m` decides whether a child is mutated at all; each variable is
    /// then perturbed with probability `1/n`.
    #[default]
    PerSolution,
    /// Each variable is perturbed independently with probability `p_m`.
    PerVariable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VariationParams {
    pub p_c: f64,
    pub eta_c: f64,
    pub p_m: f64,
    pub eta_m: f64,
    pub gate: MutationGate,
}

impl Default for VariationParams {
    fn default() -> Self {
        Self {
            p_c: 1.0,
            eta_c: 30.0,
            p_m: 0.9,
            eta_m: 20.0,
            gate: MutationGate::PerSolution,
        }
    }
}

impl VariationParams {
    pub fn validate(&self) -> Result<()> {
        for (field, p) in [("variation.p_c", self.p_c), ("variation.p_m", self.p_m)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig {
                    field: field.into(),
                    message: format!("probability must lie in [0, 1], got {p}"),
                });
            }
        }
        for (field, eta) in [("variation.eta_c", self.eta_c), ("variation.eta_m", self.eta_m)] {
            if !(eta > 0.0) {
                return Err(Error::InvalidConfig {
                    field: field.into(),
                    message: format!("distribution index must be positive, got {eta}"),
                });
            }
        }
        Ok(())
    }
}

fn clamp01<T: Scalar>(v: T) -> T {
    v.max(T::zero()).min(T::one())
}

/// SBX on two parents. Each variable crosses with probability one half;
/// children are clamped to the unit box.
pub fn sbx<T: Scalar, R: Rng + ?Sized>(
    p1: &[T],
    p2: &[T],
    params: &VariationParams,
    rng: &mut R,
) -> (Vec<T>, Vec<T>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    if rng.random::<f64>() >= params.p_c {
        return (c1, c2);
    }
    let exponent = 1.0 / (params.eta_c + 1.0);
    let half = T::lit(0.5);
    for i in 0..p1.len() {
        if rng.random::<f64>() > 0.5 {
            continue;
        }
        let (a, b) = (p1[i], p2[i]);
        if (a - b).abs() <= T::lit(1e-14) {
            continue;
        }
        let u: f64 = rng.random();
        let beta = if u <= 0.5 {
            (2.0 * u).powf(exponent)
        } else {
            (1.0 / (2.0 * (1.0 - u))).powf(exponent)
        };
        let beta = T::lit(beta);
        let one = T::one();
        c1[i] = clamp01(half * ((one + beta) * a + (one - beta) * b));
        c2[i] = clamp01(half * ((one - beta) * a + (one + beta) * b));
    }
    (c1, c2)
}

/// Bounded polynomial mutation with distribution index `eta_m`.
pub fn polynomial_mutation<T: Scalar, R: Rng + ?Sized>(
    x: &[T],
    params: &VariationParams,
    rng: &mut R,
) -> Vec<T> {
    let mut out = x.to_vec();
    let n = x.len();
    if n == 0 {
        return out;
    }
    let per_var = match params.gate {
        MutationGate::PerSolution => {
            if rng.random::<f64>() >= params.p_m {
                return out;
            }
            1.0 / n as f64
        }
        MutationGate::PerVariable => params.p_m,
    };
    let power = 1.0 / (params.eta_m + 1.0);
    for v in out.iter_mut() {
        if rng.random::<f64>() >= per_var {
            continue;
        }
        let y = v.to_f64_lossy();
        let d1 = y;
        let d2 = 1.0 - y;
        let u: f64 = rng.random();
        let dq = if u < 0.5 {
            let xy = 1.0 - d1;
            let val = 2.0 * u + (1.0 - 2.0 * u) * xy.powf(params.eta_m + 1.0);
            val.powf(power) - 1.0
        } else {
            let xy = 1.0 - d2;
            let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy.powf(params.eta_m + 1.0);
            1.0 - val.powf(power)
        };
        *v = clamp01(T::lit(y + dq));
    }
    out
}

/// Produces one crossover child, then mutates it.
pub fn breed_one<T: Scalar, R: Rng + ?Sized>(
    p1: &[T],
    p2: &[T],
    params: &VariationParams,
    rng: &mut R,
) -> Vec<T> {
    let (c1, _) = sbx(p1, p2, params, rng);
    polynomial_mutation(&c1, params, rng)
}
