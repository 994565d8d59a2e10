//! Order statistics and the Wilcoxon signed-rank test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Largest sample size handled by exact enumeration.
pub const EXACT_LIMIT: usize = 12;

/// Quantile by linear interpolation between closest ranks
/// (`(n - 1) p` positioning). `sorted` must be ascending and nonempty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn median(xs: &[f64]) -> f64 {
    quantile_sorted(&sorted(xs), 0.5)
}

/// Q3 - Q1.
pub fn iqr(xs: &[f64]) -> f64 {
    let s = sorted(xs);
    quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let s = sorted(xs);
        let q1 = quantile_sorted(&s, 0.25);
        let q3 = quantile_sorted(&s, 0.75);
        Some(Self {
            n: s.len(),
            median: quantile_sorted(&s, 0.5),
            q1,
            q3,
            iqr: q3 - q1,
            min: s[0],
            max: s[s.len() - 1],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    /// Every difference was zero.
    Degenerate,
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wilcoxon {
    /// Pairs left after dropping zero differences.
    pub n: usize,
    /// Sum of ranks of positive differences `a - b`.
    pub w_plus: f64,
    /// Two-sided.
    pub p_value: f64,
    pub method: WilcoxonMethod,
}

/// Midranks of `|d|`, 1-based.
fn abs_ranks(d: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&i, &j| d[i].abs().total_cmp(&d[j].abs()));
    let mut ranks = vec![0.0; d.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && d[order[j + 1]].abs() == d[order[i]].abs() {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mid;
        }
        i = j + 1;
    }
    ranks
}

/// Exact two-sided p-value for `W+` given the (possibly tied) ranks.
///
/// Doubled midranks are integers, so the null distribution of `2 W+` is a
/// subset-sum count over those integers.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0f64; total + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let all = 2f64.powi(ranks.len() as i32);
    let w = (2.0 * w_plus).round() as usize;
    let lower: f64 = counts[..=w].iter().sum::<f64>() / all;
    let upper: f64 = counts[w..].iter().sum::<f64>() / all;
    (2.0 * lower.min(upper)).min(1.0)
}

fn normal_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut ties = 0.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&r| r == sorted[i]).count();
        let t = j as f64;
        ties += t * t * t - t;
        i += j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - ties / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let dev = ((w_plus - mean).abs() - 0.5).max(0.0);
    let z = dev / var.sqrt();
    let std = Normal::standard();
    (2.0 * (1.0 - std.cdf(z))).min(1.0)
}

/// Paired two-sided signed-rank test on `a - b`. Zero differences are
/// dropped; ties among the rest get midranks.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Wilcoxon {
    assert_eq!(a.len(), b.len(), "paired samples differ in length");
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if d.is_empty() {
        return Wilcoxon {
            n: 0,
            w_plus: 0.0,
            p_value: 1.0,
            method: WilcoxonMethod::Degenerate,
        };
    }
    let ranks = abs_ranks(&d);
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let (p_value, method) = if d.len() <= EXACT_LIMIT {
        (exact_p(&ranks, w_plus), WilcoxonMethod::Exact)
    } else {
        (normal_p(&ranks, w_plus), WilcoxonMethod::Normal)
    };
    Wilcoxon {
        n: d.len(),
        w_plus,
        p_value,
        method,
    }
}

/// Reference p-value by listing all `2^n` sign patterns. Only usable for
/// small `n`; exposed for cross-checks.
pub fn wilcoxon_enumerated(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if d.is_empty() {
        return 1.0;
    }
    let ranks = abs_ranks(&d);
    let observed: f64 = d.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let n = d.len();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w <= observed + 1e-9 {
            le += 1;
        }
        if w >= observed - 1e-9 {
            ge += 1;
        }
    }
    let total = (1u64 << n) as f64;
    (2.0 * (le.min(ge) as f64) / total).min(1.0)
}
