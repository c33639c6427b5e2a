//! Left matrix profile over z-normalized subsequences.

use rayon::prelude::*;

use super::{Detector, DetectorKind, FittedDetector};
use crate::error::{Error, Result};
use crate::types::{Matrix, Overlap, ScoreSeries};

#[derive(Debug, Clone, Copy)]
pub struct MatrixProfile {
    pub window: usize,
}

/// Subsequences whose standard deviation falls below this are constant.
const FLAT_STD: f64 = 1e-10;

/// Z-normalized Euclidean distance between `a` and `b` given their means and
/// standard deviations. Two constant subsequences are identical; a constant
/// and a non-constant one are `sqrt(w)` apart.
fn znorm_distance(a: &[f64], (ma, sa): (f64, f64), b: &[f64], (mb, sb): (f64, f64)) -> f64 {
    match (sa < FLAT_STD, sb < FLAT_STD) {
        (true, true) => 0.0,
        (true, false) | (false, true) => (a.len() as f64).sqrt(),
        (false, false) => a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                let d = (x - ma) / sa - (y - mb) / sb;
                d * d
            })
            .sum::<f64>()
            .sqrt(),
    }
}

fn subsequence_stats(x: &[f64], w: usize) -> Vec<(f64, f64)> {
    (0..=x.len() - w)
        .map(|s| {
            let seg = &x[s..s + w];
            let m = seg.iter().sum::<f64>() / w as f64;
            let v = seg.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / w as f64;
            (m, v.sqrt())
        })
        .collect()
}

/// Left matrix profile of `x` for subsequences starting at `from..`: the
/// distance from each to its nearest earlier subsequence outside the
/// exclusion zone `ceil(w/2)`, or 0 when there is none.
pub fn left_profile(x: &[f64], w: usize, from: usize) -> Vec<f64> {
    if x.len() < w {
        return Vec::new();
    }
    let stats = subsequence_stats(x, w);
    let exclusion = w.div_ceil(2);
    (from..stats.len())
        .into_par_iter()
        .map(|i| {
            if i < exclusion {
                return 0.0;
            }
            (0..=i - exclusion)
                .map(|j| znorm_distance(&x[i..i + w], stats[i], &x[j..j + w], stats[j]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

struct FittedMatrixProfile {
    window: usize,
    history: Matrix,
}

impl Detector for MatrixProfile {
    fn kind(&self) -> DetectorKind {
        DetectorKind::MatrixProfile
    }

    fn window(&self) -> Option<usize> {
        Some(self.window)
    }

    fn min_train_rows(&self) -> usize {
        0
    }

    fn fit(&self, train: &Matrix) -> Result<Box<dyn FittedDetector>> {
        Ok(Box::new(FittedMatrixProfile {
            window: self.window,
            history: train.clone(),
        }))
    }
}

impl FittedDetector for FittedMatrixProfile {
    fn score(&self, test: &Matrix, _overlap: Overlap) -> Result<ScoreSeries> {
        let w = self.window;
        let n = test.rows();
        if n < w {
            return Err(Error::WindowTooLarge { window: w, len: n });
        }
        if !self.history.is_empty() && self.history.cols() != test.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.history.cols(),
                got: test.cols(),
            });
        }
        let h = self.history.rows();
        let mut out = vec![f64::NEG_INFINITY; n];
        for c in 0..test.cols() {
            let mut x = if h > 0 { self.history.column(c) } else { Vec::new() };
            x.extend(test.column(c));
            let profile = left_profile(&x, w, h);
            // Each point takes the worst subsequence that covers it.
            for (s, d) in profile.iter().enumerate() {
                for o in &mut out[s..s + w] {
                    *o = o.max(*d);
                }
            }
        }
        ScoreSeries::new(out, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force: explicit z-normalization and every pair of subsequences.
    fn oracle(x: &[f64], w: usize) -> Vec<f64> {
        let znorm = |s: &[f64]| -> Option<Vec<f64>> {
            let m = s.iter().sum::<f64>() / s.len() as f64;
            let sd = (s.iter().map(|v| (v - m).powi(2)).sum::<f64>() / s.len() as f64).sqrt();
            (sd >= FLAT_STD).then(|| s.iter().map(|v| (v - m) / sd).collect())
        };
        let excl = w.div_ceil(2);
        let mut profile = Vec::new();
        for i in 0..=x.len() - w {
            let mut best: Option<f64> = None;
            for j in 0..=x.len() - w {
                if j + excl > i {
                    continue;
                }
                let d = match (znorm(&x[i..i + w]), znorm(&x[j..j + w])) {
                    (None, None) => 0.0,
                    (Some(a), Some(b)) => a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt(),
                    _ => (w as f64).sqrt(),
                };
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
            profile.push(best.unwrap_or(0.0));
        }
        let mut pts = vec![0.0f64; x.len()];
        for (i, d) in profile.iter().enumerate() {
            for p in &mut pts[i..i + w] {
                *p = p.max(*d);
            }
        }
        pts
    }

    fn score(x: &[f64], w: usize) -> Vec<f64> {
        MatrixProfile { window: w }
            .fit(&Matrix::empty(1))
            .unwrap()
            .score(&Matrix::from_column(x), Overlap::NonOverlapping)
            .unwrap()
            .into_inner()
    }

    #[test]
    fn spike_matches_brute_force() {
        let x = [0.0, 0.0, 0.0, 0.0, 10.0, 0.0, 0.0, 0.0];
        let got = score(&x, 2);
        let want = oracle(&x, 2);
        for (g, e) in got.iter().zip(&want) {
            assert!((g - e).abs() < 1e-12, "{got:?} vs {want:?}");
        }
        assert!(got[4] > got[0]);
    }

    #[test]
    fn noisy_series_matches_brute_force() {
        let x: Vec<f64> = (0..60).map(|i| ((i * 37 % 11) as f64).sin() + i as f64 * 0.01).collect();
        for w in [3, 4, 8] {
            let got = score(&x, w);
            for (g, e) in got.iter().zip(oracle(&x, w)) {
                assert!((g - e).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn repeated_pattern_has_near_zero_profile() {
        let pattern: Vec<f64> = (0..20).map(|i| ((i * i) % 7) as f64).collect();
        let x: Vec<f64> = pattern.iter().cycle().take(60).copied().collect();
        let s = score(&x, 5);
        // Points from 24 on are covered only by subsequences starting in a
        // later repetition.
        assert!(s[24..].iter().all(|&v| v < 1e-6), "{:?}", &s[24..]);
    }

    #[test]
    fn history_supplies_left_neighbors() {
        let pattern: Vec<f64> = (0..20).map(|i| ((i * 3) % 5) as f64).collect();
        let fitted = MatrixProfile { window: 4 }.fit(&Matrix::from_column(&pattern)).unwrap();
        let s = fitted.score(&Matrix::from_column(&pattern), Overlap::NonOverlapping).unwrap();
        assert!(s.scores().iter().all(|&v| v < 1e-6));
    }
}
