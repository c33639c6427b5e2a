//! Labeled synthetic corpora: a seasonal base signal with trend and noise,
//! and injectors for the six anomaly types (global, contextual, shapelet,
//! seasonal, trend, mixed).
//!
//! Anomalies are placed only inside the test segment, regions are disjoint
//! and separated by a small gap, and every modified point is labeled.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::characteristics::{classify_series, seasonality_score, CharacteristicThresholds};
use crate::error::{Error, Result};
use crate::ingest::{self, split_len, Corpus, SplitPolicy};
use crate::numeric::{detrend, mean, std_dev};
use crate::types::{
    extract_events, AnomalyEvent, DatasetManifest, ManifestEntry, Matrix, SeriesTags, Split,
    TimeSeries,
};

/// Parameters of `x_t = a·sin(2πt/p) + m·t + ε_t`, `ε ~ N(0, σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseSignalSpec {
    pub length: usize,
    pub dim: usize,
    pub period: usize,
    pub amplitude: f64,
    pub slope: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl BaseSignalSpec {
    fn validate(&self) -> Result<()> {
        if self.length == 0 || self.dim == 0 {
            return Err(Error::InvalidArgument("length and dim must be positive".into()));
        }
        if self.period < 4 {
            return Err(Error::InvalidArgument(format!("period {} < 4", self.period)));
        }
        if !(self.noise_std >= 0.0) || !self.amplitude.is_finite() || !self.slope.is_finite() {
            return Err(Error::InvalidArgument("invalid amplitude, slope or noise".into()));
        }
        Ok(())
    }
}

/// Generate the clean base signal; all labels are 0. Channel `d` of a
/// multivariate signal is phase-shifted by `2πd/D` and has its own noise.
pub fn gen_base(spec: &BaseSignalSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_std).expect("validated noise std");
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut data = Vec::with_capacity(spec.length * spec.dim);
    for t in 0..spec.length {
        for d in 0..spec.dim {
            let phase = two_pi * d as f64 / spec.dim as f64;
            let clean = spec.amplitude * (two_pi * t as f64 / spec.period as f64 + phase).sin()
                + spec.slope * t as f64;
            let eps = if spec.noise_std > 0.0 {
                noise.sample(&mut rng)
            } else {
                0.0
            };
            data.push(clean + eps);
        }
    }
    let values = Matrix::new(spec.length, spec.dim, data)?;
    TimeSeries::new(
        format!("base_{}", spec.seed),
        "synthetic",
        values,
        vec![0; spec.length],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnomalyKind {
    Global,
    Contextual,
    Shapelet,
    Seasonal,
    Trend,
    Mixed,
}

impl AnomalyKind {
    pub const ALL: [AnomalyKind; 6] = [
        AnomalyKind::Global,
        AnomalyKind::Contextual,
        AnomalyKind::Shapelet,
        AnomalyKind::Seasonal,
        AnomalyKind::Trend,
        AnomalyKind::Mixed,
    ];

    const BASIC: [AnomalyKind; 5] = [
        AnomalyKind::Global,
        AnomalyKind::Contextual,
        AnomalyKind::Shapelet,
        AnomalyKind::Seasonal,
        AnomalyKind::Trend,
    ];

    pub fn is_point(self) -> bool {
        matches!(self, AnomalyKind::Global | AnomalyKind::Contextual)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AnomalyKind::Global => "global",
            AnomalyKind::Contextual => "contextual",
            AnomalyKind::Shapelet => "shapelet",
            AnomalyKind::Seasonal => "seasonal",
            AnomalyKind::Trend => "trend",
            AnomalyKind::Mixed => "mixed",
        }
    }

    /// Magnitude used when the spec leaves it unset, in units of local σ.
    pub fn default_magnitude(self) -> f64 {
        match self {
            AnomalyKind::Global => 8.0,
            _ => 3.0,
        }
    }
}

impl fmt::Display for AnomalyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnomalyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AnomalyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown anomaly kind `{s}`")))
    }
}

/// What to inject and where the randomness comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalySpec {
    pub kind: AnomalyKind,
    pub count: usize,
    /// Region length for subsequence kinds; point kinds always use 1.
    pub length: usize,
    pub magnitude: Option<f64>,
    /// Seasonal period of the carrier; estimated from the train segment when
    /// unset.
    pub period: Option<usize>,
    pub seed: u64,
}

/// Minimum number of clean points between two injected regions.
pub const REGION_GAP: usize = 5;
/// Half-width of the contextual neighborhood (11 points in total).
pub const CONTEXT_HALF_WIDTH: usize = 5;
const MAX_PLACEMENT_ATTEMPTS: usize = 20_000;

/// Result of an injection: the anomalous series and the regions it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct Injected {
    pub series: TimeSeries,
    pub events: Vec<AnomalyEvent>,
    /// Basic kind applied to each event (matters for mixed specs).
    pub kinds: Vec<AnomalyKind>,
}

fn region_len(kind: AnomalyKind, spec: &AnomalySpec) -> usize {
    if kind.is_point() {
        1
    } else {
        spec.length
    }
}

/// Inject anomalies of `spec.kind` into the test segment of `series`.
pub fn inject(series: &TimeSeries, spec: &AnomalySpec, split: &Split) -> Result<Injected> {
    if spec.count == 0 {
        return Err(Error::InvalidAnomalySpec("count must be at least 1".into()));
    }
    if !spec.kind.is_point() && spec.length < 2 {
        return Err(Error::InvalidAnomalySpec(format!(
            "{} anomalies need length >= 2",
            spec.kind
        )));
    }
    if spec.kind == AnomalyKind::Mixed && spec.count < 2 {
        return Err(Error::InvalidAnomalySpec("mixed anomalies need count >= 2".into()));
    }
    if split.test_end != series.len() {
        return Err(Error::InvalidArgument("split does not match series".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let kinds: Vec<AnomalyKind> = if spec.kind == AnomalyKind::Mixed {
        let mut pool = AnomalyKind::BASIC.to_vec();
        pool.shuffle(&mut rng);
        let m = rng.gen_range(2..=spec.count.min(pool.len()));
        (0..spec.count).map(|i| pool[i % m]).collect()
    } else {
        vec![spec.kind; spec.count]
    };
    let total: usize = kinds.iter().map(|&k| region_len(k, spec)).sum();
    let existing = series.labels().iter().filter(|&&l| l == 1).count();
    let budget = series.len() / 10;
    if total + existing > budget {
        return Err(Error::InvalidAnomalySpec(format!(
            "{} anomalous points exceed the 10% budget of {budget}",
            total + existing
        )));
    }

    let period = match spec.period {
        Some(p) if p >= 2 => p,
        Some(p) => return Err(Error::InvalidAnomalySpec(format!("period {p} < 2"))),
        None => estimate_period(series, split)?,
    };

    let channels: Vec<Vec<f64>> = (0..series.dim()).map(|d| series.channel(d)).collect();
    let stats: Vec<(f64, f64, f64, f64)> = channels
        .iter()
        .map(|c| {
            let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (mean(c), std_dev(c), lo, hi)
        })
        .collect();

    let mut occupied: Vec<AnomalyEvent> = extract_events(series.labels());
    let mut out = channels.clone();
    let mut events = Vec::with_capacity(kinds.len());
    let n = series.len();
    let magnitude = |k: AnomalyKind| spec.magnitude.unwrap_or(k.default_magnitude());

    for &kind in &kinds {
        let len = region_len(kind, spec);
        // seasonal anomalies read a source span twice the region length
        let span = if kind == AnomalyKind::Seasonal { 2 * len } else { len };
        let (lo, hi) = match kind {
            AnomalyKind::Contextual => (
                split.val_end.max(CONTEXT_HALF_WIDTH),
                n.saturating_sub(CONTEXT_HALF_WIDTH + 1),
            ),
            _ => (split.val_end, n.saturating_sub(span)),
        };
        if lo > hi {
            return Err(Error::RegionOverflow(format!(
                "a {kind} region of {span} points does not fit the test segment"
            )));
        }
        let mut placed = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let start = rng.gen_range(lo..=hi);
            let candidate = AnomalyEvent::new(start, start + len);
            let clashes = occupied.iter().any(|e| {
                candidate.start < e.end + REGION_GAP && e.start < candidate.end + REGION_GAP
            });
            if clashes {
                continue;
            }
            let values: Option<Vec<Vec<f64>>> = channels
                .iter()
                .zip(&stats)
                .map(|(c, st)| modify(kind, c, st, candidate, period, magnitude(kind)))
                .collect();
            if let Some(v) = values {
                placed = Some((candidate, v));
                break;
            }
        }
        let (event, values) = placed.ok_or_else(|| {
            Error::RegionOverflow(format!(
                "could not place {} disjoint {kind} regions of {len} points",
                kinds.len()
            ))
        })?;
        for (d, v) in values.into_iter().enumerate() {
            out[d][event.start..event.end].copy_from_slice(&v);
        }
        occupied.push(event);
        events.push((event, kind));
    }

    events.sort();
    let mut labels = series.labels().to_vec();
    for (e, _) in &events {
        labels[e.start..e.end].iter_mut().for_each(|l| *l = 1);
    }
    let dim = series.dim();
    let mut data = Vec::with_capacity(n * dim);
    for t in 0..n {
        for channel in &out {
            data.push(channel[t]);
        }
    }
    let injected = TimeSeries::new(
        series.name(),
        series.domain(),
        Matrix::new(n, dim, data)?,
        labels,
    )?;
    Ok(Injected {
        series: injected,
        kinds: events.iter().map(|(_, k)| *k).collect(),
        events: events.into_iter().map(|(e, _)| e).collect(),
    })
}

fn estimate_period(series: &TimeSeries, split: &Split) -> Result<usize> {
    let ch = series.channel(0);
    let head = &ch[..split.val_end];
    let source = if head.len() >= 16 { head } else { &ch[..] };
    Ok(seasonality_score(source)?.1)
}

/// Replacement values for `region` in one channel, or `None` when the
/// region is unsuitable for this kind (e.g. a contextual value would leave
/// the global range).
fn modify(
    kind: AnomalyKind,
    x: &[f64],
    &(mu, sigma, lo, hi): &(f64, f64, f64, f64),
    region: AnomalyEvent,
    period: usize,
    k: f64,
) -> Option<Vec<f64>> {
    let (s, e) = (region.start, region.end);
    match kind {
        AnomalyKind::Global => {
            let sign = if x[s] >= mu { 1.0 } else { -1.0 };
            let scale = if sigma > 0.0 { sigma } else { 1.0 };
            Some(vec![x[s] + sign * k * scale])
        }
        AnomalyKind::Contextual => {
            let hood = &x[s - CONTEXT_HALF_WIDTH..=s + CONTEXT_HALF_WIDTH];
            let m = mean(hood);
            let sd = std_dev(hood);
            if sd <= 1e-9 * (1.0 + m.abs()) {
                return None;
            }
            let mut candidates = [m + k * sd, m - k * sd];
            candidates.sort_by(|a, b| (b - x[s]).abs().total_cmp(&(a - x[s]).abs()));
            candidates
                .into_iter()
                .find(|v| (lo..=hi).contains(v))
                .map(|v| vec![v])
        }
        AnomalyKind::Shapelet => {
            let window = &x[s..e];
            let resid = detrend(window);
            let amplitude = std_dev(&resid) * std::f64::consts::SQRT_2;
            let line: Vec<f64> = window.iter().zip(&resid).map(|(v, r)| v - r).collect();
            let two_pi = 2.0 * std::f64::consts::PI;
            Some(
                (s..e)
                    .zip(line)
                    .map(|(t, base)| {
                        let phase = (two_pi * t as f64 / period as f64).sin();
                        base + if phase >= 0.0 { amplitude } else { -amplitude }
                    })
                    .collect(),
            )
        }
        AnomalyKind::Seasonal => {
            // time-compress the detrended source span so the period halves,
            // then add back the original local trend
            let len = e - s;
            let source = &x[s..s + 2 * len];
            let resid = detrend(source);
            let line: Vec<f64> = source.iter().zip(&resid).map(|(v, r)| v - r).collect();
            Some((0..len).map(|j| line[j] + resid[2 * j]).collect())
        }
        AnomalyKind::Trend => {
            let window = &x[s..e];
            let local = std_dev(window);
            let scale = if local > 0.0 { local } else { 1.0 };
            let len = (e - s) as f64;
            Some(
                window
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v + k * scale * (j + 1) as f64 / len)
                    .collect(),
            )
        }
        AnomalyKind::Mixed => unreachable!("mixed regions are resolved to basic kinds"),
    }
}

/// Knobs for [`gen_suite`]; per-series carrier parameters are drawn from
/// these ranges with the suite seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub length: usize,
    pub period_range: (usize, usize),
    pub amplitude: f64,
    pub max_abs_slope: f64,
    pub noise_std: f64,
    pub point_count: usize,
    pub subsequence_count: usize,
    pub subsequence_length: usize,
    pub mixed_count: usize,
    pub mixed_length: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            length: 1000,
            period_range: (20, 50),
            amplitude: 1.0,
            max_abs_slope: 0.0005,
            noise_std: 0.05,
            point_count: 5,
            subsequence_count: 2,
            subsequence_length: 40,
            mixed_count: 3,
            mixed_length: 30,
        }
    }
}

impl SuiteConfig {
    fn anomaly_shape(&self, kind: AnomalyKind) -> (usize, usize) {
        match kind {
            AnomalyKind::Global | AnomalyKind::Contextual => (self.point_count, 1),
            AnomalyKind::Mixed => (self.mixed_count, self.mixed_length),
            _ => (self.subsequence_count, self.subsequence_length),
        }
    }
}

/// `n_series` independently seeded series of one anomaly kind, with a
/// manifest carrying anomaly-type and characteristic tags.
pub fn gen_suite(
    kind: AnomalyKind,
    n_series: usize,
    seed: u64,
    config: &SuiteConfig,
) -> Result<Corpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (kind as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let thresholds = CharacteristicThresholds::default();
    let (count, length) = config.anomaly_shape(kind);
    let mut manifest = DatasetManifest::default();
    let mut series = Vec::with_capacity(n_series);
    for i in 0..n_series {
        let base_spec = BaseSignalSpec {
            length: config.length,
            dim: 1,
            period: rng.gen_range(config.period_range.0..=config.period_range.1),
            amplitude: config.amplitude,
            slope: rng.gen_range(-config.max_abs_slope..=config.max_abs_slope),
            noise_std: config.noise_std,
            seed: rng.gen(),
        };
        let anomaly = AnomalySpec {
            kind,
            count,
            length,
            magnitude: None,
            period: Some(base_spec.period),
            seed: rng.gen(),
        };
        let name = format!("{kind}_{i:03}");
        let base = gen_base(&base_spec)?.with_name(name.clone());
        let split = split_len(base.len(), &SplitPolicy::Default)?;
        let injected = inject(&base, &anomaly, &split)?.series;
        let profile = classify_series(&injected, &thresholds)?;
        manifest.entries.push(ManifestEntry {
            name: name.clone(),
            path: format!("{name}.csv").into(),
            domain: "synthetic".into(),
            dim: injected.dim(),
            length: injected.len(),
            anomaly_ratio: injected.anomaly_ratio(),
            train_end: None,
            val_end: None,
            dataset: Some(format!("synthetic-{kind}")),
            tags: SeriesTags {
                anomaly_type: Some(kind.to_string()),
                characteristics: profile.aggregate.tags(),
            },
        });
        series.push(injected);
    }
    Ok(Corpus { manifest, series })
}

/// Write every series as `<dir>/<path>` plus `<dir>/manifest.json`.
pub fn write_corpus(corpus: &Corpus, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (entry, series) in corpus.iter() {
        let path = dir.join(&entry.path);
        fs::write(&path, ingest::write_series_csv(series)).map_err(|e| Error::io(&path, e))?;
    }
    ingest::write_manifest(&corpus.manifest, dir.join("manifest.json"))
}

/// Concatenate corpora into one (manifests and series in order).
pub fn merge_corpora(parts: Vec<Corpus>) -> Corpus {
    let mut merged = Corpus {
        manifest: DatasetManifest::default(),
        series: Vec::new(),
    };
    for part in parts {
        merged.manifest.entries.extend(part.manifest.entries);
        merged.series.extend(part.series);
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::filter_univariate;

    fn base(sigma: f64, slope: f64, seed: u64) -> TimeSeries {
        gen_base(&BaseSignalSpec {
            length: 1000,
            dim: 1,
            period: 40,
            amplitude: 1.0,
            slope,
            noise_std: sigma,
            seed,
        })
        .unwrap()
    }

    fn split(n: usize) -> Split {
        split_len(n, &SplitPolicy::Default).unwrap()
    }

    fn spec(kind: AnomalyKind, count: usize, length: usize) -> AnomalySpec {
        AnomalySpec {
            kind,
            count,
            length,
            magnitude: None,
            period: Some(40),
            seed: 17,
        }
    }

    #[test]
    fn noiseless_base_is_periodic() {
        let s = base(0.0, 0.0, 1).channel(0);
        for t in 0..960 {
            assert!((s[t] - s[t + 40]).abs() < 1e-9);
        }
    }

    #[test]
    fn base_is_deterministic() {
        assert_eq!(base(0.3, 0.01, 5), base(0.3, 0.01, 5));
        assert_ne!(base(0.3, 0.01, 5), base(0.3, 0.01, 6));
    }

    #[test]
    fn base_noise_has_requested_std() {
        let spec = BaseSignalSpec {
            length: 10_000,
            dim: 1,
            period: 50,
            amplitude: 0.0,
            slope: 0.0,
            noise_std: 1.0,
            seed: 3,
        };
        let s = gen_base(&spec).unwrap().channel(0);
        assert!((std_dev(&s) - 1.0).abs() < 0.02);
    }

    #[test]
    fn global_point_is_far_from_mean() {
        let clean = base(0.0, 0.0, 1);
        let out = inject(&clean, &spec(AnomalyKind::Global, 1, 1), &split(1000)).unwrap();
        let ones: Vec<usize> = (0..1000).filter(|&i| out.series.labels()[i] == 1).collect();
        assert_eq!(ones.len(), 1);
        let i = ones[0];
        assert!(i >= 500);
        let c = clean.channel(0);
        let (mu, sd) = (mean(&c), std_dev(&c));
        assert!((out.series.channel(0)[i] - mu).abs() >= 6.0 * sd);
    }

    #[test]
    fn contextual_point_is_locally_deviant_but_in_range() {
        let clean = base(0.05, 0.0, 2);
        let c = clean.channel(0);
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let out = inject(&clean, &spec(AnomalyKind::Contextual, 5, 1), &split(1000)).unwrap();
        assert_eq!(out.events.len(), 5);
        let x = out.series.channel(0);
        for e in &out.events {
            let i = e.start;
            let hood = &c[i - 5..=i + 5];
            let (m, sd) = (mean(hood), std_dev(hood));
            assert!((lo..=hi).contains(&x[i]));
            assert!((x[i] - m).abs() >= 3.0 * sd - 1e-12);
        }
    }

    #[test]
    fn seasonal_window_halves_the_period() {
        let clean = base(0.0, 0.0, 1);
        let out = inject(&clean, &spec(AnomalyKind::Seasonal, 1, 100), &split(1000)).unwrap();
        let e = out.events[0];
        let window = &out.series.channel(0)[e.start..e.end];
        // direct ACF over the window
        let y = detrend(window);
        let n = y.len();
        let acf: Vec<f64> = (2..=n / 2)
            .map(|k| (0..n - k).map(|t| y[t] * y[t + k]).sum::<f64>() / (n - k) as f64)
            .collect();
        let top = acf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // multiples of the period tie up to rounding; take the smallest
        let lag = 2 + acf.iter().position(|&r| r >= top - 1e-9 * top.abs()).unwrap();
        assert_eq!(lag, 20);
    }

    #[test]
    fn outside_regions_is_bit_exact_and_labels_match_events() {
        for kind in AnomalyKind::ALL {
            let clean = base(0.1, 0.001, 4);
            let (count, len) = SuiteConfig::default().anomaly_shape(kind);
            let out = inject(&clean, &spec(kind, count, len), &split(1000)).unwrap();
            let labels = out.series.labels();
            assert_eq!(extract_events(labels), out.events, "{kind}");
            let (a, b) = (clean.channel(0), out.series.channel(0));
            for t in 0..1000 {
                if labels[t] == 0 {
                    assert_eq!(a[t].to_bits(), b[t].to_bits(), "{kind} at {t}");
                } else {
                    assert!(t >= 500);
                }
            }
            let ar = out.series.anomaly_ratio();
            assert!(ar > 0.0 && ar <= 0.10);
        }
    }

    #[test]
    fn mixed_uses_at_least_two_kinds() {
        let clean = base(0.1, 0.0, 4);
        for seed in 0..10 {
            let mut s = spec(AnomalyKind::Mixed, 3, 20);
            s.seed = seed;
            let out = inject(&clean, &s, &split(1000)).unwrap();
            let mut kinds = out.kinds.clone();
            kinds.sort();
            kinds.dedup();
            assert!(kinds.len() >= 2);
            assert!(!kinds.contains(&AnomalyKind::Mixed));
        }
    }

    #[test]
    fn overflow_and_budget_errors() {
        let clean = base(0.1, 0.0, 4);
        assert!(matches!(
            inject(&clean, &spec(AnomalyKind::Shapelet, 5, 30), &split(1000)),
            Err(Error::InvalidAnomalySpec(_))
        ));
        let short = gen_base(&BaseSignalSpec {
            length: 100,
            dim: 1,
            period: 10,
            amplitude: 1.0,
            slope: 0.0,
            noise_std: 0.0,
            seed: 1,
        })
        .unwrap();
        // 10 points fit the budget but 10 gapped single points do not fit in 50
        assert!(matches!(
            inject(&short, &spec(AnomalyKind::Global, 10, 1), &split(100)),
            Err(Error::RegionOverflow(_))
        ));
    }

    #[test]
    fn suite_is_deterministic_and_tagged() {
        let config = SuiteConfig::default();
        let a = gen_suite(AnomalyKind::Global, 3, 7, &config).unwrap();
        let b = gen_suite(AnomalyKind::Global, 3, 7, &config).unwrap();
        assert_eq!(a.manifest, b.manifest);
        assert_eq!(a.series, b.series);
        for e in &a.manifest.entries {
            assert_eq!(e.tags.anomaly_type.as_deref(), Some("global"));
        }
        let (kept, rejected) = filter_univariate(a.series.clone(), None);
        assert_eq!(kept.len(), 3);
        assert!(rejected.is_empty());
    }

    #[test]
    fn corpus_files_are_byte_identical() {
        let config = SuiteConfig::default();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        write_corpus(&gen_suite(AnomalyKind::Global, 10, 7, &config).unwrap(), dir_a.path()).unwrap();
        write_corpus(&gen_suite(AnomalyKind::Global, 10, 7, &config).unwrap(), dir_b.path()).unwrap();
        for entry in fs::read_dir(dir_a.path()).unwrap() {
            let entry = entry.unwrap();
            let other = dir_b.path().join(entry.file_name());
            assert_eq!(fs::read(entry.path()).unwrap(), fs::read(other).unwrap());
        }
        let loaded = ingest::load_corpus(dir_a.path().join("manifest.json")).unwrap();
        assert_eq!(loaded.series.len(), 10);
    }
}
