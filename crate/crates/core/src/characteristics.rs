//! Data characteristics: trend, seasonality, shifting, transition and
//! stationarity scores with flag thresholds.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{detrend, mean, sorted, std_dev, variance};
use crate::types::TimeSeries;

/// Flag thresholds; a characteristic is flagged when its score reaches the
/// threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicThresholds {
    pub trend: f64,
    pub seasonality: f64,
    pub shifting: f64,
    pub stationarity: f64,
}

impl Default for CharacteristicThresholds {
    fn default() -> Self {
        Self {
            trend: 0.6,
            seasonality: 0.5,
            shifting: 0.3,
            stationarity: 0.7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flagged {
    pub score: f64,
    pub flag: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seasonality {
    pub score: f64,
    pub period: usize,
    pub flag: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicProfile {
    pub trend: Flagged,
    pub seasonality: Seasonality,
    pub shifting: Flagged,
    pub transition: bool,
    pub stationarity: Flagged,
}

impl CharacteristicProfile {
    /// Names of the flagged characteristics, in a fixed order.
    pub fn tags(&self) -> Vec<String> {
        let flags = [
            ("trend", self.trend.flag),
            ("seasonality", self.seasonality.flag),
            ("shifting", self.shifting.flag),
            ("transition", self.transition),
            ("stationarity", self.stationarity.flag),
        ];
        flags
            .iter()
            .filter(|(_, f)| *f)
            .map(|(n, _)| n.to_string())
            .collect()
    }
}

pub const MIN_TREND_LEN: usize = 8;
pub const MIN_SEASONALITY_LEN: usize = 16;
const WINDOWS: usize = 10;
const EPS: f64 = 1e-12;

fn require(x: &[f64], needed: usize) -> Result<()> {
    if x.len() < needed {
        return Err(Error::SeriesTooShort {
            needed,
            got: x.len(),
        });
    }
    Ok(())
}

/// Share of variance explained by a least-squares line, in [0, 1].
pub fn trend_score(x: &[f64]) -> Result<f64> {
    require(x, MIN_TREND_LEN)?;
    let total = variance(x);
    if total <= EPS * (1.0 + mean(x).abs()).powi(2) {
        return Ok(0.0);
    }
    let resid = variance(&detrend(x));
    Ok((1.0 - resid / total).clamp(0.0, 1.0))
}

/// Autocorrelation of the detrended series at lags `0..=max_lag`, each lag
/// normalized by its own overlap length.
fn autocorrelation(y: &[f64], max_lag: usize) -> Vec<f64> {
    let n = y.len();
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = y
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let scale = size as f64;
    let c0 = buf[0].re / scale / n as f64;
    (0..=max_lag)
        .map(|k| {
            if c0 <= 0.0 {
                0.0
            } else {
                buf[k].re / scale / (n - k) as f64 / c0
            }
        })
        .collect()
}

/// Strongest autocorrelation over lags `[2, T/2]` of the detrended series and
/// the lag attaining it (smallest lag on ties).
pub fn seasonality_score(x: &[f64]) -> Result<(f64, usize)> {
    require(x, MIN_SEASONALITY_LEN)?;
    let y = detrend(x);
    let max_lag = x.len() / 2;
    if variance(&y) <= EPS * (1.0 + mean(x).abs()).powi(2) {
        return Ok((0.0, 2));
    }
    let acf = autocorrelation(&y, max_lag);
    let mut best = (f64::NEG_INFINITY, 2);
    for (lag, &r) in acf.iter().enumerate().skip(2) {
        if r > best.0 {
            best = (r, lag);
        }
    }
    Ok((best.0.clamp(0.0, 1.0), best.1))
}

/// Two-sample Kolmogorov-Smirnov statistic between the two halves.
pub fn shifting_score(x: &[f64]) -> Result<f64> {
    require(x, 2)?;
    let (a, b) = x.split_at(x.len() / 2);
    Ok(ks_statistic(a, b))
}

pub(crate) fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let a = sorted(a);
    let b = sorted(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// One minus the normalized dispersion of the means and deviations of ten
/// equal windows.
pub fn stationarity_score(x: &[f64]) -> Result<f64> {
    require(x, WINDOWS * 2)?;
    let overall = std_dev(x);
    if overall <= EPS * (1.0 + mean(x).abs()) {
        return Ok(1.0);
    }
    let n = x.len();
    let mut means = Vec::with_capacity(WINDOWS);
    let mut stds = Vec::with_capacity(WINDOWS);
    for w in 0..WINDOWS {
        let chunk = &x[w * n / WINDOWS..(w + 1) * n / WINDOWS];
        means.push(mean(chunk));
        stds.push(std_dev(chunk));
    }
    let score = 1.0 - std_dev(&means) / overall - std_dev(&stds) / overall;
    Ok(score.clamp(0.0, 1.0))
}

pub fn classify(x: &[f64], thresholds: &CharacteristicThresholds) -> Result<CharacteristicProfile> {
    require(x, MIN_SEASONALITY_LEN.max(WINDOWS * 2))?;
    let trend = trend_score(x)?;
    let (seasonal, period) = seasonality_score(x)?;
    let shifting = shifting_score(x)?;
    let stationarity = stationarity_score(x)?;
    let trend = Flagged {
        score: trend,
        flag: trend >= thresholds.trend,
    };
    let seasonality = Seasonality {
        score: seasonal,
        period,
        flag: seasonal >= thresholds.seasonality,
    };
    Ok(CharacteristicProfile {
        transition: trend.flag && seasonality.flag,
        trend,
        seasonality,
        shifting: Flagged {
            score: shifting,
            flag: shifting >= thresholds.shifting,
        },
        stationarity: Flagged {
            score: stationarity,
            flag: stationarity >= thresholds.stationarity,
        },
    })
}

/// Majority-vote flags over channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateFlags {
    pub trend: bool,
    pub seasonality: bool,
    pub shifting: bool,
    pub transition: bool,
    pub stationarity: bool,
}

impl AggregateFlags {
    pub fn tags(&self) -> Vec<String> {
        [
            ("trend", self.trend),
            ("seasonality", self.seasonality),
            ("shifting", self.shifting),
            ("transition", self.transition),
            ("stationarity", self.stationarity),
        ]
        .iter()
        .filter(|(_, f)| *f)
        .map(|(n, _)| n.to_string())
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesProfile {
    pub series: String,
    pub channels: Vec<CharacteristicProfile>,
    pub aggregate: AggregateFlags,
}

/// Per-channel profiles plus a strict-majority aggregate.
pub fn classify_series(
    series: &TimeSeries,
    thresholds: &CharacteristicThresholds,
) -> Result<SeriesProfile> {
    let channels = (0..series.dim())
        .map(|d| classify(&series.channel(d), thresholds))
        .collect::<Result<Vec<_>>>()?;
    let majority = |f: fn(&CharacteristicProfile) -> bool| {
        2 * channels.iter().filter(|p| f(p)).count() > channels.len()
    };
    let aggregate = AggregateFlags {
        trend: majority(|p| p.trend.flag),
        seasonality: majority(|p| p.seasonality.flag),
        shifting: majority(|p| p.shifting.flag),
        transition: majority(|p| p.transition),
        stationarity: majority(|p| p.stationarity.flag),
    };
    Ok(SeriesProfile {
        series: series.name().to_string(),
        channels,
        aggregate,
    })
}
