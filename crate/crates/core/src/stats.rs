//! Significance tests for method comparisons: Wilcoxon signed-rank,
//! Friedman, and Nemenyi critical differences.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::numeric::average_ranks;

/// Largest sample size given an exact null distribution.
pub const WILCOXON_EXACT_MAX: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wilcoxon {
    /// `min(w_plus, w_minus)`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Non-zero differences used.
    pub n: usize,
    pub p_two_sided: f64,
    /// Alternative: `a` tends to exceed `b`.
    pub p_greater: f64,
    pub p_less: f64,
}

/// Signed ranks of the non-zero differences `a - b` (average ranks for
/// tied magnitudes).
fn signed_ranks(a: &[f64], b: &[f64]) -> Result<(Vec<f64>, Vec<bool>)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if d.is_empty() {
        return Err(Error::AllZeroDifferences);
    }
    let mags: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    Ok((average_ranks(&mags), d.iter().map(|v| *v > 0.0).collect()))
}

/// Exact upper and lower tail probabilities `P(W+ >= w)` and `P(W+ <= w)`
/// under the null, counting all `2^n` sign patterns. Ranks may be
/// half-integers (ties); sums are tracked in half units.
pub fn wilcoxon_exact_tails(ranks: &[f64], w_plus: f64) -> (f64, f64) {
    let units: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let total: usize = units.iter().sum();
    let mut counts = vec![0f64; total + 1];
    counts[0] = 1.0;
    for &u in &units {
        for s in (u..=total).rev() {
            counts[s] += counts[s - u];
        }
    }
    let patterns = 2f64.powi(ranks.len() as i32);
    let w = (w_plus * 2.0).round() as usize;
    let upper: f64 = counts[w.min(total + 1)..].iter().sum();
    let lower: f64 = counts[..=w.min(total)].iter().sum();
    (upper / patterns, lower / patterns)
}

/// Normal approximation with tie correction and a 0.5 continuity
/// correction; returns `(P(W+ >= w), P(W+ <= w))`.
pub fn wilcoxon_normal_tails(ranks: &[f64], w_plus: f64) -> (f64, f64) {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&r| r == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return (1.0, 1.0);
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let sd = var.sqrt();
    let upper = 1.0 - normal.cdf((w_plus - mean - 0.5) / sd);
    let lower = normal.cdf((w_plus - mean + 0.5) / sd);
    (upper.min(1.0), lower.min(1.0))
}

/// Wilcoxon signed-rank test on paired samples; zero differences are dropped.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<Wilcoxon> {
    let (ranks, positive) = signed_ranks(a, b)?;
    let w_plus: f64 = ranks.iter().zip(&positive).filter(|(_, &p)| p).map(|(r, _)| r).sum();
    let total: f64 = ranks.iter().sum();
    let w_minus = total - w_plus;
    let (p_greater, p_less) = if ranks.len() <= WILCOXON_EXACT_MAX {
        wilcoxon_exact_tails(&ranks, w_plus)
    } else {
        wilcoxon_normal_tails(&ranks, w_plus)
    };
    Ok(Wilcoxon {
        statistic: w_plus.min(w_minus),
        w_plus,
        w_minus,
        n: ranks.len(),
        p_two_sided: (2.0 * p_greater.min(p_less)).min(1.0),
        p_greater,
        p_less,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Friedman {
    pub statistic: f64,
    pub p_value: f64,
    /// Mean rank per method (rank 1 = smallest value).
    pub mean_ranks: Vec<f64>,
}

fn check_shape(results: &[Vec<f64>], min_k: usize, min_n: usize) -> Result<(usize, usize)> {
    let k = results.len();
    let n = results.first().map_or(0, Vec::len);
    if k < min_k || n < min_n {
        return Err(Error::DegenerateShape(format!(
            "need at least {min_k} methods and {min_n} datasets, got {k} x {n}"
        )));
    }
    if results.iter().any(|r| r.len() != n) {
        return Err(Error::DegenerateShape("ragged result matrix".into()));
    }
    Ok((k, n))
}

/// Mean rank of each method over datasets; `results[method][dataset]`.
/// With `higher_better`, the largest value gets rank 1.
pub fn mean_ranks(results: &[Vec<f64>], higher_better: bool) -> Result<Vec<f64>> {
    let (k, n) = check_shape(results, 1, 1)?;
    let mut sums = vec![0.0; k];
    for d in 0..n {
        let column: Vec<f64> = results
            .iter()
            .map(|r| if higher_better { -r[d] } else { r[d] })
            .collect();
        for (s, r) in sums.iter_mut().zip(average_ranks(&column)) {
            *s += r;
        }
    }
    Ok(sums.into_iter().map(|s| s / n as f64).collect())
}

/// Friedman test over a `k methods x N datasets` matrix.
pub fn friedman(results: &[Vec<f64>]) -> Result<Friedman> {
    let (k, n) = check_shape(results, 3, 2)?;
    let ranks = mean_ranks(results, false)?;
    let (kf, nf) = (k as f64, n as f64);
    let centre = (kf + 1.0) / 2.0;
    let statistic =
        12.0 * nf / (kf * (kf + 1.0)) * ranks.iter().map(|r| (r - centre) * (r - centre)).sum::<f64>();
    let chi = ChiSquared::new(kf - 1.0).expect("k >= 3");
    Ok(Friedman {
        statistic,
        p_value: 1.0 - chi.cdf(statistic),
        mean_ranks: ranks,
    })
}

/// Critical values `q_alpha` of the Nemenyi test for k = 2..=50 (the
/// studentized range quantile divided by sqrt(2)).
const Q_05: [f64; 49] = [
    1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164, 3.219, 3.268, 3.313, 3.354,
    3.391, 3.426, 3.458, 3.489, 3.517, 3.544, 3.569, 3.593, 3.616, 3.637, 3.658, 3.678, 3.696,
    3.714, 3.732, 3.749, 3.765, 3.780, 3.795, 3.810, 3.824, 3.837, 3.850, 3.863, 3.876, 3.888,
    3.899, 3.911, 3.922, 3.933, 3.943, 3.954, 3.964, 3.973, 3.983, 3.992,
];
const Q_10: [f64; 49] = [
    1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978, 3.030, 3.077, 3.120,
    3.159, 3.196, 3.230, 3.261, 3.291, 3.319, 3.346, 3.371, 3.394, 3.417, 3.439, 3.459, 3.479,
    3.498, 3.516, 3.533, 3.550, 3.567, 3.582, 3.597, 3.612, 3.626, 3.640, 3.653, 3.666, 3.679,
    3.691, 3.703, 3.714, 3.726, 3.737, 3.747, 3.758, 3.768, 3.778, 3.788,
];

pub fn nemenyi_q(k: usize, alpha: f64) -> Result<f64> {
    let table = if (alpha - 0.05).abs() < 1e-12 {
        &Q_05
    } else if (alpha - 0.10).abs() < 1e-12 {
        &Q_10
    } else {
        return Err(Error::UnsupportedK { k, alpha });
    };
    if !(2..=50).contains(&k) {
        return Err(Error::UnsupportedK { k, alpha });
    }
    Ok(table[k - 2])
}

/// Nemenyi critical difference of mean ranks for k methods on n datasets.
pub fn nemenyi_cd(k: usize, n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::DegenerateShape("no datasets".into()));
    }
    let q = nemenyi_q(k, alpha)?;
    let kf = k as f64;
    Ok(q * (kf * (kf + 1.0) / (6.0 * n as f64)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub methods: Vec<String>,
    pub mean_ranks: Vec<f64>,
    pub critical_difference: f64,
    pub alpha: f64,
    /// Method indices sorted by mean rank (best first; name breaks ties).
    pub order: Vec<usize>,
    /// `connected[i][j]`: methods i and j differ by less than the CD.
    pub connected: Vec<Vec<bool>>,
    /// Maximal runs of at least two methods, as (first, last) positions in
    /// `order`, whose extreme ranks differ by less than the CD.
    pub groups: Vec<(usize, usize)>,
}

/// Mean ranks and Nemenyi connectivity of methods over datasets;
/// `results[method][dataset]`.
pub fn rank_table(
    methods: &[String],
    results: &[Vec<f64>],
    higher_better: bool,
    alpha: f64,
) -> Result<RankTable> {
    let (k, n) = check_shape(results, 2, 1)?;
    if methods.len() != k {
        return Err(Error::LengthMismatch {
            left: methods.len(),
            right: k,
        });
    }
    let ranks = mean_ranks(results, higher_better)?;
    let cd = nemenyi_cd(k, n, alpha)?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| ranks[a].total_cmp(&ranks[b]).then_with(|| methods[a].cmp(&methods[b])));
    let connected = (0..k)
        .map(|i| (0..k).map(|j| (ranks[i] - ranks[j]).abs() < cd).collect())
        .collect();
    let mut groups: Vec<(usize, usize)> = Vec::new();
    for start in 0..k {
        let mut end = start;
        while end + 1 < k && ranks[order[end + 1]] - ranks[order[start]] < cd {
            end += 1;
        }
        if end > start && groups.last().is_none_or(|&(_, e)| end > e) {
            groups.push((start, end));
        }
    }
    Ok(RankTable {
        methods: methods.to_vec(),
        mean_ranks: ranks,
        critical_difference: cd,
        alpha,
        order,
        connected,
        groups,
    })
}
