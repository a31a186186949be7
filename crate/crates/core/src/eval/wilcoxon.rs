//! Two-sided Wilcoxon signed-rank test for paired samples.
//!
//! Zero differences are dropped. Up to [`WILCOXON_EXACT_MAX_N`] nonzero
//! pairs the p-value comes from the exact permutation distribution of the
//! rank sum (computed over the observed, possibly tied, ranks); above that a
//! normal approximation with tie correction is used, without continuity
//! correction.

use statrs::distribution::{ContinuousCDF, Normal};

use super::EvalError;

/// Largest sample size evaluated with the exact distribution.
pub const WILCOXON_EXACT_MAX_N: usize = 25;

/// Fewest nonzero pairs the test accepts.
const MIN_PAIRS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PValueMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone)]
pub struct WilcoxonResult {
    /// The smaller of the positive and negative rank sums.
    pub statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// Number of nonzero differences.
    pub n: usize,
    pub method: PValueMethod,
}

/// Paired two-sided signed-rank test of `x` against `y`.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    let diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n < MIN_PAIRS {
        return Err(EvalError::TooFewPairs { n, min: MIN_PAIRS });
    }

    let ranks = average_ranks(&diffs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();
    let total = n as f64 * (n as f64 + 1.0) / 2.0;
    let w_minus = total - w_plus;
    let statistic = w_plus.min(w_minus);

    let (p_value, method) = if n <= WILCOXON_EXACT_MAX_N {
        (exact_p(&ranks, statistic), PValueMethod::Exact)
    } else {
        (approx_p(&diffs, statistic, n), PValueMethod::NormalApprox)
    };

    Ok(WilcoxonResult {
        statistic,
        p_value,
        n,
        method,
    })
}

/// Ranks of |d|, ascending, with tied values sharing their average rank.
fn average_ranks(diffs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&a, &b| {
        diffs[a]
            .abs()
            .partial_cmp(&diffs[b].abs())
            .expect("differences are finite")
    });
    let mut ranks = vec![0.0; diffs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && diffs[order[j + 1]].abs() == diffs[order[i]].abs() {
            j += 1;
        }
        // Ranks are 1-based; a tie group spanning positions i..=j shares the
        // average (i+1 + j+1) / 2.
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Exact two-sided p-value of the observed min rank sum, by enumerating the
/// distribution of the positive rank sum over all 2^n sign assignments.
/// Ranks are doubled so tied (half-integer) ranks stay integral.
fn exact_p(ranks: &[f64], statistic: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let w2 = (2.0 * statistic).round() as usize;
    let at_most: u64 = counts[..=w2.min(total)].iter().sum();
    let all = 2f64.powi(ranks.len() as i32);
    // The null distribution is symmetric, so doubling the lower tail gives
    // the two-sided value.
    (2.0 * at_most as f64 / all).min(1.0)
}

/// Normal approximation with tie correction.
fn approx_p(diffs: &[f64], statistic: f64, n: usize) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;

    let mut abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    abs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut i = 0;
    while i < abs.len() {
        let mut j = i;
        while j + 1 < abs.len() && abs[j + 1] == abs[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        var -= (t * t * t - t) / 48.0;
        i = j + 1;
    }

    let z = (statistic - mean) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * normal.cdf(-z.abs())).min(1.0)
}
