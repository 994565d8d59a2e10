//! Consultation: choosing candidates for the decision maker and fitting a
//! Gaussian radial-basis network to the scores they return.
//!
//! Scores follow the decision maker's polarity throughout: lower is better.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve;
use crate::nsga3::perpendicular_distance;
use crate::problems::GoldenSpec;
use crate::refpoints::select_seed_indices;
use crate::scalar::{euclidean, Scalar};

/// Ridge term added to the kernel diagonal.
pub const RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ScoredRecord<T> {
    pub f: Vec<T>,
    pub score: T,
    pub session: usize,
}

/// Exponent of the Gaussian basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelForm {
    /// `exp(-|f - c| / sigma^2)`, unsquared distance.
    #[default]
    Linear,
    /// `exp(-|f - c|^2 / sigma^2)`.
    Squared,
}

pub fn rbf_kernel<T: Scalar>(f: &[T], c: &[T], sigma: T) -> T {
    kernel_with(KernelForm::Linear, f, c, sigma)
}

pub fn kernel_with<T: Scalar>(form: KernelForm, f: &[T], c: &[T], sigma: T) -> T {
    let d = euclidean(f, c);
    let r = match form {
        KernelForm::Linear => d,
        KernelForm::Squared => d * d,
    };
    (-r / (sigma * sigma)).exp()
}

/// Anything that assigns a (lower is better) value to an objective vector.
pub trait ValueModel<T: Scalar> {
    fn value(&self, f: &[T]) -> T;
}

impl<T: Scalar> ValueModel<T> for GoldenSpec<T> {
    fn value(&self, f: &[T]) -> T {
        self.psi(f)
    }
}

/// Approximated value function: `bias + sum_i weights[i] * phi(f, centers[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AvfModel<T> {
    pub centers: Vec<Vec<T>>,
    pub sigma: T,
    pub weights: Vec<T>,
    pub bias: T,
    pub kernel: KernelForm,
}

impl<T: Scalar> AvfModel<T> {
    pub fn score(&self, f: &[T]) -> T {
        avf_score(self, f)
    }
}

impl<T: Scalar> ValueModel<T> for AvfModel<T> {
    fn value(&self, f: &[T]) -> T {
        avf_score(self, f)
    }
}

pub fn avf_score<T: Scalar>(model: &AvfModel<T>, f: &[T]) -> T {
    model
        .centers
        .iter()
        .zip(&model.weights)
        .fold(model.bias, |acc, (c, &w)| {
            acc + w * kernel_with(model.kernel, f, c, model.sigma)
        })
}

/// Collapses exact duplicate inputs to their mean score, keeping first-seen order.
fn dedup_records<T: Scalar>(records: &[ScoredRecord<T>]) -> (Vec<Vec<T>>, Vec<T>) {
    let mut inputs: Vec<Vec<T>> = Vec::new();
    let mut sums: Vec<(T, usize)> = Vec::new();
    for r in records {
        match inputs.iter().position(|f| *f == r.f) {
            Some(k) => {
                sums[k].0 = sums[k].0 + r.score;
                sums[k].1 += 1;
            }
            None => {
                inputs.push(r.f.clone());
                sums.push((r.score, 1));
            }
        }
    }
    let targets = sums
        .into_iter()
        .map(|(s, c)| s / T::from_usize_lossy(c))
        .collect();
    (inputs, targets)
}

fn median<T: Scalar>(mut v: Vec<T>) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    }
}

/// Fits the network with one center per distinct training input.
///
/// The width is the median pairwise distance between centers, the bias is
/// the mean target, and the weights solve the ridge-regularised kernel
/// system on the bias-adjusted targets.
pub fn train_avf<T: Scalar>(records: &[ScoredRecord<T>], kernel: KernelForm) -> Result<AvfModel<T>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    if records.iter().any(|r| !r.score.is_finite()) {
        return Err(Error::InvalidArgument("training scores must be finite".into()));
    }
    let (centers, targets) = dedup_records(records);
    let n = centers.len();
    let bias = targets.iter().copied().sum::<T>() / T::from_usize_lossy(n);
    let sigma = if n == 1 {
        T::one()
    } else {
        let mut dists = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                dists.push(euclidean(&centers[i], &centers[j]));
            }
        }
        median(dists)
    };
    let ridge = T::lit(RIDGE);
    let gram: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let k = kernel_with(kernel, &centers[i], &centers[j], sigma);
                    if i == j {
                        k + ridge
                    } else {
                        k
                    }
                })
                .collect()
        })
        .collect();
    let rhs: Vec<T> = targets.iter().map(|&s| s - bias).collect();
    let weights = solve(gram, rhs)?;
    Ok(AvfModel {
        centers,
        sigma,
        weights,
        bias,
        kernel,
    })
}

/// How often and how widely the decision maker is consulted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsultationSchedule {
    /// Generations between sessions; sessions fire at tau, 2 tau, ...
    pub tau: usize,
    pub mu_first: usize,
    pub mu_later: usize,
}

impl ConsultationSchedule {
    pub fn for_objectives(m: usize) -> Self {
        Self {
            tau: 25,
            mu_first: 2 * m + 1,
            mu_later: 10,
        }
    }

    pub fn mu(&self, session: usize) -> usize {
        if session <= 1 {
            self.mu_first
        } else {
            self.mu_later
        }
    }

    pub fn fires_at(&self, generation: usize) -> bool {
        generation > 0 && generation.is_multiple_of(self.tau)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau < 2 {
            return Err(Error::InvalidConfig {
                field: "schedule.tau".into(),
                message: format!("sessions must be more than one generation apart, got {}", self.tau),
            });
        }
        if self.mu_first == 0 || self.mu_later == 0 {
            return Err(Error::InvalidConfig {
                field: "schedule.mu".into(),
                message: "candidate counts must be positive".into(),
            });
        }
        Ok(())
    }
}

/// What a candidate picker needs to know about the optimizer.
pub struct PopulationView<'a, T> {
    pub objectives: Vec<&'a [T]>,
    pub associations: Vec<usize>,
    pub references: &'a [Vec<T>],
    pub ideal: &'a [T],
}

/// Indices of the population members to present at a session.
///
/// Without a model, well-spread seed reference points are chosen and each
/// contributes the member attached to it (or, failing that, the member
/// closest to its reference line). With a model, the `mu` members of lowest
/// value are returned. Candidates always have distinct objective vectors.
pub fn pick_candidates<T: Scalar>(
    view: &PopulationView<'_, T>,
    model: Option<&dyn ValueModel<T>>,
    mu: usize,
) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::with_capacity(mu);
    let is_new = |chosen: &[usize], i: usize| {
        chosen.iter().all(|&c| view.objectives[c] != view.objectives[i])
    };
    match model {
        None => {
            for seed in select_seed_indices(view.references, mu) {
                let line = &view.references[seed];
                let mut order: Vec<(bool, T, usize)> = view
                    .objectives
                    .iter()
                    .enumerate()
                    .map(|(i, f)| {
                        (
                            view.associations[i] != seed,
                            perpendicular_distance(f, line, view.ideal),
                            i,
                        )
                    })
                    .collect();
                order.sort_by(|a, b| {
                    a.0.cmp(&b.0)
                        .then(a.1.partial_cmp(&b.1).unwrap())
                        .then(a.2.cmp(&b.2))
                });
                if let Some(&(_, _, i)) = order.iter().find(|(_, _, i)| is_new(&chosen, *i)) {
                    chosen.push(i);
                }
            }
        }
        Some(model) => {
            for i in rank_by_value(&view.objectives, model) {
                if chosen.len() == mu {
                    break;
                }
                if is_new(&chosen, i) {
                    chosen.push(i);
                }
            }
        }
    }
    chosen
}

/// Population indices sorted by ascending model value, ties by index.
pub fn rank_by_value<T: Scalar>(objectives: &[&[T]], model: &dyn ValueModel<T>) -> Vec<usize> {
    let values: Vec<T> = objectives.iter().map(|f| model.value(f)).collect();
    let mut order: Vec<usize> = (0..objectives.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    order
}
