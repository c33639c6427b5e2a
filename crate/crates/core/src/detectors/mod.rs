//! Classical detectors behind one fit/score contract.
//!
//! Feature-vector detectors (hbos, lof, knn, kmeans, cblof, iforest, loda,
//! pca) see flattened windows of `window` rows: sliding windows at fit time,
//! and the protocol's window plan at score time. The remaining kinds score
//! points natively; spectral residual, matrix profile, dwt-mlead and z-score
//! score each channel separately and take the maximum.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::protocol::windows::expand_windows;
use crate::types::{Matrix, Overlap, ScoreSeries};

pub mod ar;
pub mod dwt;
pub mod grid;
pub mod histogram;
pub mod iforest;
pub mod kmeans;
pub mod matrix_profile;
pub mod neighbors;
pub mod pca;
mod params;
pub mod spectral_residual;
pub mod zscore;

use params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Zscore,
    Hbos,
    Lof,
    Knn,
    Kmeans,
    Cblof,
    Iforest,
    Loda,
    Pca,
    SpectralResidual,
    MatrixProfile,
    DwtMlead,
    ArForecast,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 13] = [
        DetectorKind::Zscore,
        DetectorKind::Hbos,
        DetectorKind::Lof,
        DetectorKind::Knn,
        DetectorKind::Kmeans,
        DetectorKind::Cblof,
        DetectorKind::Iforest,
        DetectorKind::Loda,
        DetectorKind::Pca,
        DetectorKind::SpectralResidual,
        DetectorKind::MatrixProfile,
        DetectorKind::DwtMlead,
        DetectorKind::ArForecast,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Zscore => "zscore",
            DetectorKind::Hbos => "hbos",
            DetectorKind::Lof => "lof",
            DetectorKind::Knn => "knn",
            DetectorKind::Kmeans => "kmeans",
            DetectorKind::Cblof => "cblof",
            DetectorKind::Iforest => "iforest",
            DetectorKind::Loda => "loda",
            DetectorKind::Pca => "pca",
            DetectorKind::SpectralResidual => "spectral_residual",
            DetectorKind::MatrixProfile => "matrix_profile",
            DetectorKind::DwtMlead => "dwt_mlead",
            DetectorKind::ArForecast => "ar_forecast",
        }
    }

    /// Kinds that can score a test segment without any training data.
    pub fn is_fit_free(self) -> bool {
        matches!(
            self,
            DetectorKind::Zscore
                | DetectorKind::SpectralResidual
                | DetectorKind::MatrixProfile
                | DetectorKind::DwtMlead
        )
    }

    /// Kinds that score flattened windows of rows.
    pub fn is_windowed(self) -> bool {
        matches!(
            self,
            DetectorKind::Hbos
                | DetectorKind::Lof
                | DetectorKind::Knn
                | DetectorKind::Kmeans
                | DetectorKind::Cblof
                | DetectorKind::Iforest
                | DetectorKind::Loda
                | DetectorKind::Pca
        )
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DetectorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

/// A detector kind with its hyperparameters and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub kind: DetectorKind,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub seed: u64,
}

impl DetectorSpec {
    pub fn new(kind: DetectorKind) -> Self {
        Self {
            kind,
            params: BTreeMap::new(),
            seed: 0,
        }
    }

    pub fn with_param(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.params.insert(name.to_string(), value.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Default window length of window-based kinds.
pub const DEFAULT_WINDOW: usize = 16;
/// Default subsequence length of the matrix profile.
pub const DEFAULT_MP_WINDOW: usize = 32;

/// An unfitted detector.
pub trait Detector: Send + Sync {
    fn kind(&self) -> DetectorKind;

    /// Window length for window-based kinds and the matrix profile.
    fn window(&self) -> Option<usize>;

    /// Fewest training rows `fit` accepts (0 for fit-free kinds).
    fn min_train_rows(&self) -> usize;

    fn fit(&self, train: &Matrix) -> Result<Box<dyn FittedDetector>>;
}

/// Immutable fitted state; scoring is pure.
pub trait FittedDetector: Send + Sync {
    /// One score per test row; higher is more anomalous.
    fn score(&self, test: &Matrix, overlap: Overlap) -> Result<ScoreSeries>;
}

/// Validate a spec and build its detector.
pub fn build_detector(spec: &DetectorSpec) -> Result<Box<dyn Detector>> {
    build_with_window(spec, None)
}

/// Like [`build_detector`], with a fallback window for specs that leave the
/// `window` hyperparameter unset.
pub fn build_with_window(
    spec: &DetectorSpec,
    default_window: Option<usize>,
) -> Result<Box<dyn Detector>> {
    let p = Params::new(&spec.params);
    let seed = spec.seed;
    let window = |fallback: usize| p.usize("window", default_window.unwrap_or(fallback), 2);
    let detector: Box<dyn Detector> = match spec.kind {
        DetectorKind::Zscore => Box::new(zscore::ZScore {
            robust: p.bool("robust", false)?,
        }),
        DetectorKind::SpectralResidual => Box::new(spectral_residual::SpectralResidual {
            average_window: p.usize("q", 3, 1)?,
        }),
        DetectorKind::MatrixProfile => Box::new(matrix_profile::MatrixProfile {
            window: window(DEFAULT_MP_WINDOW)?,
        }),
        DetectorKind::DwtMlead => Box::new(dwt::DwtMlead {
            min_coefficients: p.usize("min_coefficients", 4, 2)?,
        }),
        DetectorKind::ArForecast => Box::new(ar::ArForecast {
            order: p.usize("order", 5, 1)?,
        }),
        kind => {
            let w = window(DEFAULT_WINDOW)?;
            let model: Box<dyn VectorModel> = match kind {
                DetectorKind::Hbos => Box::new(histogram::Hbos {
                    bins: p.usize("bins", 10, 2)?,
                }),
                DetectorKind::Lof => Box::new(neighbors::LofModel {
                    k: p.usize("k", 20, 1)?,
                    max_train: p.usize("max_train", 2000, 2)?,
                }),
                DetectorKind::Knn => Box::new(neighbors::KnnModel {
                    k: p.usize("k", 5, 1)?,
                    max_train: p.usize("max_train", 2000, 1)?,
                }),
                DetectorKind::Kmeans => Box::new(kmeans::KMeansModel {
                    config: kmeans_config(&p, seed)?,
                }),
                DetectorKind::Cblof => Box::new(kmeans::CblofModel {
                    config: kmeans_config(&p, seed)?,
                    alpha: p.f64_in("alpha", 0.9, 0.5, 1.0)?,
                }),
                DetectorKind::Iforest => Box::new(iforest::IForestModel {
                    trees: p.usize("trees", 100, 1)?,
                    subsample: p.usize("subsample", 256, 2)?,
                    seed,
                }),
                DetectorKind::Loda => Box::new(histogram::Loda {
                    projections: p.usize("projections", 100, 1)?,
                    bins: p.usize("bins", 10, 2)?,
                    seed,
                }),
                DetectorKind::Pca => Box::new(pca::PcaModel {
                    variance: p.f64_in("variance", 0.9, 1e-6, 1.0)?,
                    components: p.opt_usize("components", 1)?,
                }),
                _ => unreachable!("fit-free and point-wise kinds handled above"),
            };
            Box::new(Windowed {
                kind,
                window: w,
                model,
            })
        }
    };
    p.finish()?;
    Ok(detector)
}

fn kmeans_config(p: &Params<'_>, seed: u64) -> Result<kmeans::KMeansConfig> {
    Ok(kmeans::KMeansConfig {
        k: p.usize("k", 8, 1)?,
        max_iter: p.usize("max_iter", 100, 1)?,
        restarts: p.usize("restarts", 3, 1)?,
        seed,
    })
}

/// A model over feature vectors (one matrix row per vector).
pub(crate) trait VectorModel: Send + Sync {
    fn min_rows(&self) -> usize;
    fn fit(&self, rows: &Matrix) -> Result<Box<dyn VectorScorer>>;
}

pub(crate) trait VectorScorer: Send + Sync {
    fn score_rows(&self, rows: &Matrix) -> Vec<f64>;
}

/// Adapter that turns a vector model into a window-based detector.
struct Windowed {
    kind: DetectorKind,
    window: usize,
    model: Box<dyn VectorModel>,
}

struct FittedWindowed {
    window: usize,
    cols: usize,
    scorer: Box<dyn VectorScorer>,
}

/// Flatten windows `[s, s + w)` of `data` into feature rows.
fn window_features(data: &Matrix, starts: impl Iterator<Item = usize>, w: usize) -> Matrix {
    let mut out = Vec::new();
    let mut rows = 0;
    for s in starts {
        out.extend_from_slice(data.window(s, w));
        rows += 1;
    }
    Matrix::new(rows, w * data.cols(), out).expect("window features are rectangular")
}

impl Detector for Windowed {
    fn kind(&self) -> DetectorKind {
        self.kind
    }

    fn window(&self) -> Option<usize> {
        Some(self.window)
    }

    fn min_train_rows(&self) -> usize {
        self.window + self.model.min_rows() - 1
    }

    fn fit(&self, train: &Matrix) -> Result<Box<dyn FittedDetector>> {
        let needed = self.min_train_rows();
        if train.rows() < needed {
            return Err(Error::InsufficientTrainData {
                needed,
                got: train.rows(),
            });
        }
        let features = window_features(train, 0..=train.rows() - self.window, self.window);
        Ok(Box::new(FittedWindowed {
            window: self.window,
            cols: train.cols(),
            scorer: self.model.fit(&features)?,
        }))
    }
}

impl FittedDetector for FittedWindowed {
    fn score(&self, test: &Matrix, overlap: Overlap) -> Result<ScoreSeries> {
        if test.cols() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: test.cols(),
            });
        }
        let plan = expand_windows(test.rows(), self.window, overlap)?;
        let features = window_features(test, plan.windows().iter().map(|w| w.0), self.window);
        let window_scores = self.scorer.score_rows(&features);
        ScoreSeries::new(plan.point_scores(&window_scores), 0)
    }
}

/// Apply a univariate scorer to each channel and keep the per-point maximum.
pub(crate) fn max_over_channels(
    test: &Matrix,
    mut score_channel: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let mut out = vec![f64::NEG_INFINITY; test.rows()];
    for c in 0..test.cols() {
        let scores = score_channel(&test.column(c))?;
        for (o, s) in out.iter_mut().zip(scores) {
            *o = o.max(s);
        }
    }
    Ok(out)
}

/// Evenly spaced subset of at most `max` rows, deterministic.
pub(crate) fn subsample_rows(rows: &Matrix, max: usize) -> Matrix {
    if rows.rows() <= max {
        return rows.clone();
    }
    let n = rows.rows();
    let mut data = Vec::with_capacity(max * rows.cols());
    for i in 0..max {
        data.extend_from_slice(rows.row(i * n / max));
    }
    Matrix::new(max, rows.cols(), data).expect("subsample is rectangular")
}
