use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Overlap;

/// Test-time windowing rule shared by every window-based detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPolicy {
    pub window: usize,
    #[serde(default)]
    pub overlap: Overlap,
}

impl WindowPolicy {
    pub fn new(window: usize, overlap: Overlap) -> Result<Self> {
        if window < 2 {
            return Err(Error::InvalidArgument(format!("window {window} < 2")));
        }
        Ok(Self { window, overlap })
    }
}

/// Windows laid over a segment of `len` points, plus the rule that turns one
/// score per window into one score per point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPlan {
    len: usize,
    overlap: Overlap,
    windows: Vec<(usize, usize)>,
}

/// Lay windows of `window` points over `len` points.
///
/// Non-overlapping windows start at 0, w, 2w, ...; when `len` is not a
/// multiple of w the last window is `[len - w, len)`, so no point is dropped.
/// Overlapping windows use stride 1.
pub fn expand_windows(len: usize, window: usize, overlap: Overlap) -> Result<WindowPlan> {
    if window == 0 || len < window {
        return Err(Error::WindowTooLarge { window, len });
    }
    let windows = match overlap {
        Overlap::NonOverlapping => {
            let mut w: Vec<(usize, usize)> = (0..len / window)
                .map(|i| (i * window, (i + 1) * window))
                .collect();
            if !len.is_multiple_of(window) {
                w.push((len - window, len));
            }
            w
        }
        Overlap::Overlapping => (0..=len - window).map(|s| (s, s + window)).collect(),
    };
    Ok(WindowPlan {
        len,
        overlap,
        windows,
    })
}

impl WindowPlan {
    pub fn windows(&self) -> &[(usize, usize)] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Window index that owns each point (non-overlapping plans only; the
    /// final, left-extended window wins on shared points).
    pub fn owners(&self) -> Vec<usize> {
        let mut owner = vec![0; self.len];
        for (i, &(s, e)) in self.windows.iter().enumerate() {
            owner[s..e].iter_mut().for_each(|o| *o = i);
        }
        owner
    }

    /// Spread one score per window onto the points. Non-overlapping: each
    /// point takes its owning window's score. Overlapping: each point takes
    /// the mean over the windows covering it.
    pub fn point_scores(&self, window_scores: &[f64]) -> Vec<f64> {
        assert_eq!(window_scores.len(), self.windows.len());
        match self.overlap {
            Overlap::NonOverlapping => self
                .owners()
                .into_iter()
                .map(|w| window_scores[w])
                .collect(),
            Overlap::Overlapping => {
                let mut sum = vec![0.0; self.len];
                let mut count = vec![0usize; self.len];
                for (&(s, e), &score) in self.windows.iter().zip(window_scores) {
                    for t in s..e {
                        sum[t] += score;
                        count[t] += 1;
                    }
                }
                sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect()
            }
        }
    }
}
