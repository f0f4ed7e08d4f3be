//! End-to-end workflow: series → delay embedding → sliding windows → Rips
//! persistence → landscape → Lᵖ norm series → feature table → k-means.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::clustering::{kmeans, ClusterModel, ClusteringError, KMeansOptions};
use crate::embedding::{self, delay_embed, window_at, window_count, EmbeddingError, PointCloud};
use crate::filtration::Threshold;
use crate::landscape::{build_landscape, lp_norm, EssentialPolicy, LandscapeError};
use crate::persistence::{rips_diagram, PersistenceDiagram, PersistenceError};
use crate::timeseries::{first_difference, log_returns, normalize_unit, SeriesError, TimeSeries, Timestamp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WindowError {
    #[error(transparent)]
    Persistence(#[from] PersistenceError),
    #[error(transparent)]
    Landscape(#[from] LandscapeError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("series of length {len} is too short for embedding dimension {dim} and window {window}")]
    SeriesTooShort { len: usize, dim: usize, window: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("window {index}: {source}")]
    Window { index: usize, source: WindowError },
    #[error(transparent)]
    Clustering(#[from] ClusteringError),
    #[error("feature {feature} is missing at {timestamp}")]
    AlignmentGap { timestamp: Timestamp, feature: Feature },
    #[error("window index {index} out of range ({count} windows)")]
    NoSuchWindow { index: usize, count: usize },
}

/// Columns available to the clustering stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feature {
    /// The input series itself (the simulated `x` value).
    Value,
    /// `ln(price)`.
    LogPrice,
    /// `ln(p[t] / p[t-1])`.
    LogReturn,
    /// Landscape norm of the window ending at `t`.
    L1Norm,
}

impl Feature {
    pub fn name(self) -> &'static str {
        match self {
            Feature::Value => "value",
            Feature::LogPrice => "log_price",
            Feature::LogReturn => "log_return",
            Feature::L1Norm => "l1_norm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "value" | "x" => Some(Feature::Value),
            "log_price" => Some(Feature::LogPrice),
            "log_return" => Some(Feature::LogReturn),
            "l1_norm" | "norm" => Some(Feature::L1Norm),
            _ => None,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which series the persistence stage sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdaInput {
    /// The input series as is.
    Raw,
    /// Log-returns of the input, which must then be a positive price series.
    LogReturns,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub embed_dim: usize,
    pub window: usize,
    pub homology_dim: usize,
    pub threshold: Threshold,
    /// Landscape norm exponent.
    pub p: f64,
    pub tda_input: TdaInput,
    pub features: Vec<Feature>,
    pub kmeans: KMeansOptions,
    pub parallel: bool,
    /// Window indices whose persistence diagrams are kept in the result.
    pub diagram_windows: Vec<usize>,
}

impl PipelineConfig {
    /// Price data: log-returns embedded in ℝ⁴, windows of 50, 18 clusters on
    /// (log-price, log-return, L¹ norm).
    pub fn assets() -> Self {
        Self {
            embed_dim: 4,
            window: 50,
            homology_dim: 1,
            threshold: Threshold::Auto,
            p: 1.0,
            tda_input: TdaInput::LogReturns,
            features: vec![Feature::LogPrice, Feature::LogReturn, Feature::L1Norm],
            kmeans: KMeansOptions::new(18),
            parallel: true,
            diagram_windows: Vec::new(),
        }
    }

    /// Simulated series: raw values embedded in ℝ⁴, windows of 100,
    /// 8 clusters on (value, L¹ norm).
    pub fn lorenz() -> Self {
        Self {
            embed_dim: 4,
            window: 100,
            tda_input: TdaInput::Raw,
            features: vec![Feature::Value, Feature::L1Norm],
            kmeans: KMeansOptions::new(8),
            ..Self::assets()
        }
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn with_embed_dim(mut self, embed_dim: usize) -> Self {
        self.embed_dim = embed_dim;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.kmeans.k = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.kmeans.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.kmeans = self.kmeans.restarts(restarts);
        self
    }

    pub fn serial(mut self) -> Self {
        self.parallel = false;
        self
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: String| Err(PipelineError::Config(m));
        if self.embed_dim < 2 {
            return fail(format!("embedding dimension must be at least 2, got {}", self.embed_dim));
        }
        if self.window <= self.embed_dim {
            return fail(format!(
                "window ({}) must exceed the embedding dimension ({})",
                self.window, self.embed_dim
            ));
        }
        if self.kmeans.k == 0 {
            return fail("k must be at least 1".into());
        }
        if self.homology_dim > 1 {
            return fail(format!("homology dimension must be 0 or 1, got {}", self.homology_dim));
        }
        if !(self.p >= 1.0) {
            return fail(format!("norm exponent must be at least 1, got {}", self.p));
        }
        if self.features.is_empty() {
            return fail("at least one feature is required".into());
        }
        Ok(())
    }
}

fn window_norm(cloud: &PointCloud, config: &PipelineConfig) -> Result<f64, WindowError> {
    let diagram = rips_diagram(cloud, config.threshold)?;
    let landscape = build_landscape(&diagram, config.homology_dim, EssentialPolicy::Exclude)?;
    Ok(lp_norm(&landscape, config.p)?)
}

fn check_length(series: &TimeSeries, config: &PipelineConfig) -> Result<(), PipelineError> {
    if series.len() + 1 < config.embed_dim + config.window {
        return Err(PipelineError::SeriesTooShort {
            len: series.len(),
            dim: config.embed_dim,
            window: config.window,
        });
    }
    Ok(())
}

/// Landscape norm of every window of `series`, stamped with the window's last
/// observation. `series` is the persistence input (already transformed).
pub fn run_tda(series: &TimeSeries, config: &PipelineConfig) -> Result<TimeSeries, PipelineError> {
    config.validate()?;
    check_length(series, config)?;
    let vectors = delay_embed(series, config.embed_dim)?;
    let count = window_count(series.len(), config.embed_dim, config.window);
    let w = config.window;
    let compute = |t: usize| -> Result<(Timestamp, f64), PipelineError> {
        let cloud = window_at(&vectors, w, t);
        let norm = window_norm(&cloud, config).map_err(|source| PipelineError::Window { index: t, source })?;
        Ok((cloud.label(), norm))
    };
    let results: Vec<(Timestamp, f64)> = if config.parallel {
        (0..count).into_par_iter().map(compute).collect::<Result<_, _>>()?
    } else {
        (0..count).map(compute).collect::<Result<_, _>>()?
    };
    let (timestamps, values) = results.into_iter().unzip();
    Ok(TimeSeries::new(timestamps, values)?)
}

/// Persistence diagram of window `index` of `series`, with its label.
pub fn window_diagram(
    series: &TimeSeries,
    config: &PipelineConfig,
    index: usize,
) -> Result<(Timestamp, PersistenceDiagram), PipelineError> {
    check_length(series, config)?;
    let vectors = delay_embed(series, config.embed_dim)?;
    embedding::check_window(&vectors, config.window)?;
    let count = window_count(series.len(), config.embed_dim, config.window);
    if index >= count {
        return Err(PipelineError::NoSuchWindow { index, count });
    }
    let cloud = window_at(&vectors, config.window, index);
    let diagram = rips_diagram(&cloud, config.threshold).map_err(|e| PipelineError::Window {
        index,
        source: e.into(),
    })?;
    Ok((cloud.label(), diagram))
}

/// The series handed to the persistence stage for a given input.
pub fn tda_series(input: &TimeSeries, config: &PipelineConfig) -> Result<TimeSeries, PipelineError> {
    Ok(match config.tda_input {
        TdaInput::Raw => input.clone(),
        TdaInput::LogReturns => log_returns(input)?,
    })
}

/// Clustering input: one row per norm timestamp, every column scaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub features: Vec<Feature>,
    pub timestamps: Vec<Timestamp>,
    pub rows: Vec<Vec<f64>>,
}

pub fn assemble_features(
    input: &TimeSeries,
    norms: &TimeSeries,
    features: &[Feature],
) -> Result<FeatureTable, PipelineError> {
    let needs_returns = features.contains(&Feature::LogReturn);
    let returns = if needs_returns { Some(log_returns(input)?) } else { None };
    if features.contains(&Feature::LogPrice) {
        if let Some((index, &value)) = input.values().iter().enumerate().find(|(_, &v)| v <= 0.0) {
            return Err(SeriesError::NonPositivePrice { index, value }.into());
        }
    }

    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(features.len());
    for &feature in features {
        let mut col = Vec::with_capacity(norms.len());
        for (ts, norm) in norms.iter() {
            let value = match feature {
                Feature::L1Norm => Some(norm),
                Feature::Value => input.get(ts),
                Feature::LogPrice => input.get(ts).map(f64::ln),
                Feature::LogReturn => returns.as_ref().and_then(|r| r.get(ts)),
            };
            col.push(value.ok_or(PipelineError::AlignmentGap { timestamp: ts, feature })?);
        }
        let col = TimeSeries::new(norms.timestamps().to_vec(), col)?;
        columns.push(normalize_unit(&col).values().to_vec());
    }
    let rows = (0..norms.len())
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    Ok(FeatureTable {
        features: features.to_vec(),
        timestamps: norms.timestamps().to_vec(),
        rows,
    })
}

/// Ordered key–value description of a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunMetadata {
    entries: Vec<(String, String)>,
}

impl RunMetadata {
    pub fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for RunMetadata {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub norm_series: TimeSeries,
    pub norm_diffs: TimeSeries,
    pub table: FeatureTable,
    pub model: ClusterModel,
    pub diagrams: Vec<(Timestamp, PersistenceDiagram)>,
    pub metadata: RunMetadata,
}

impl PipelineResult {
    /// `(timestamp, feature row, cluster id)` triples.
    pub fn cluster_rows(&self) -> impl Iterator<Item = (Timestamp, &[f64], usize)> + '_ {
        self.table
            .timestamps
            .iter()
            .zip(&self.table.rows)
            .zip(&self.model.assignments)
            .map(|((&t, r), &c)| (t, r.as_slice(), c))
    }
}

fn threshold_label(t: Threshold) -> String {
    match t {
        Threshold::Auto => "auto".into(),
        Threshold::Value(v) => v.to_string(),
    }
}

pub fn run_full(input: &TimeSeries, config: &PipelineConfig) -> Result<PipelineResult, PipelineError> {
    config.validate()?;
    let tda_input = tda_series(input, config)?;
    let norm_series = run_tda(&tda_input, config)?;
    let norm_diffs = if norm_series.len() >= 2 {
        first_difference(&norm_series)?
    } else {
        TimeSeries::new(Vec::new(), Vec::new())?
    };
    let table = assemble_features(input, &norm_series, &config.features)?;
    let model = kmeans(&table.rows, config.kmeans)?;
    let diagrams = config
        .diagram_windows
        .iter()
        .map(|&i| window_diagram(&tda_input, config, i))
        .collect::<Result<Vec<_>, _>>()?;

    let mut metadata = RunMetadata::default();
    metadata.push("version", env!("CARGO_PKG_VERSION"));
    metadata.push("input_length", input.len());
    if let (Some(first), Some(last)) = (input.timestamps().first(), input.timestamps().last()) {
        metadata.push("input_range", format!("{first}..{last}"));
    }
    metadata.push(
        "tda_input",
        match config.tda_input {
            TdaInput::Raw => "raw",
            TdaInput::LogReturns => "log_returns",
        },
    );
    metadata.push("embed_dim", config.embed_dim);
    metadata.push("delay", 1);
    metadata.push("window", config.window);
    metadata.push("homology_dim", config.homology_dim);
    metadata.push("rips_threshold", threshold_label(config.threshold));
    metadata.push("landscape_norm_p", config.p);
    metadata.push("windows", norm_series.len());
    metadata.push(
        "features",
        config.features.iter().map(|f| f.name()).collect::<Vec<_>>().join(","),
    );
    metadata.push("k", config.kmeans.k);
    metadata.push("restarts", config.kmeans.restarts);
    metadata.push("max_iters", config.kmeans.max_iters);
    metadata.push("seed", config.kmeans.seed);
    metadata.push("kmeans_init", "uniform distinct rows; ChaCha20Rng(seed_from_u64(seed)), stream = restart index");
    metadata.push("best_restart", model.best_restart);
    metadata.push("converged", model.converged);
    metadata.push("sse", crate::io::format_sig(model.sse));
    Ok(PipelineResult {
        norm_series,
        norm_diffs,
        table,
        model,
        diagrams,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::compute_persistence;
    use crate::filtration::build_rips;

    fn sine(n: usize, period: f64) -> TimeSeries {
        TimeSeries::from_values(
            (0..n)
                .map(|t| (2.0 * std::f64::consts::PI * t as f64 / period).sin())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_series_has_zero_norms() {
        let s = TimeSeries::from_values(vec![0.7; 80]).unwrap();
        let cfg = PipelineConfig::lorenz().with_window(20);
        let n = run_tda(&s, &cfg).unwrap();
        assert_eq!(n.len(), 80 - 4 - 20 + 2);
        assert!(n.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn periodic_loop_gives_constant_norm() {
        let s = sine(200, 20.0);
        let cfg = PipelineConfig::lorenz().with_window(50);
        let n = run_tda(&s, &cfg).unwrap();
        let lo = n.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = n.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo > 0.0);
        assert!(hi - lo < 1e-9, "spread {}", hi - lo);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let s = sine(150, 13.0);
        let cfg = PipelineConfig::lorenz().with_window(30);
        assert_eq!(run_tda(&s, &cfg).unwrap(), run_tda(&s, &cfg.clone().serial()).unwrap());
    }

    #[test]
    fn window_diagram_matches_boundary_route() {
        let s = sine(60, 11.0);
        let cfg = PipelineConfig::lorenz().with_window(12);
        let (label, d) = window_diagram(&s, &cfg, 5).unwrap();
        assert_eq!(label, Timestamp::Tick(5 + 12 + 4 - 2));
        let vectors = delay_embed(&s, 4).unwrap();
        let cloud = window_at(&vectors, 12, 5);
        let slow = compute_persistence(&build_rips(&cloud, Threshold::Auto, 2).unwrap()).unwrap();
        assert_eq!(d, slow);
        assert!(matches!(
            window_diagram(&s, &cfg, 10_000),
            Err(PipelineError::NoSuchWindow { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(PipelineConfig::lorenz().with_embed_dim(1).validate().is_err());
        assert!(PipelineConfig::lorenz().with_window(4).validate().is_err());
        assert!(PipelineConfig::lorenz().with_k(0).validate().is_err());
        assert!(PipelineConfig::assets().validate().is_ok());
    }

    #[test]
    fn too_short_series() {
        let s = sine(20, 5.0);
        assert!(matches!(
            run_tda(&s, &PipelineConfig::lorenz()),
            Err(PipelineError::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn features_are_normalized_and_aligned() {
        let prices: Vec<f64> = (0..120).map(|t| 100.0 * (1.0 + 0.3 * (t as f64 * 0.37).sin())).collect();
        let input = TimeSeries::from_values(prices).unwrap();
        let cfg = PipelineConfig::assets().with_window(20).with_k(3).with_restarts(5);
        let r = run_full(&input, &cfg).unwrap();
        assert_eq!(r.norm_series.len(), 119 - 4 - 20 + 2);
        assert_eq!(r.table.rows.len(), r.norm_series.len());
        assert_eq!(r.norm_diffs.len(), r.norm_series.len() - 1);
        assert!(r.table.rows.iter().all(|row| row.len() == 3 && row.iter().all(|v| (0.0..=1.0).contains(v))));
        for (t, _, c) in r.cluster_rows() {
            assert!(r.norm_series.get(t).is_some());
            assert!(c < 3);
        }

        let lorenz = PipelineConfig::lorenz().with_window(20).with_k(3).with_restarts(5);
        let r = run_full(&input, &lorenz).unwrap();
        assert!(r.table.rows.iter().all(|row| row.len() == 2));
    }

    #[test]
    fn alignment_gap_is_reported() {
        let input = TimeSeries::from_values(vec![1.0, 2.0, 3.0]).unwrap();
        let norms = TimeSeries::from_values(vec![0.0; 5]).unwrap();
        assert!(matches!(
            assemble_features(&input, &norms, &[Feature::Value]),
            Err(PipelineError::AlignmentGap { feature: Feature::Value, .. })
        ));
    }

    #[test]
    fn too_many_clusters() {
        let s = sine(60, 9.0);
        let cfg = PipelineConfig::lorenz().with_window(20).with_k(500);
        assert!(matches!(
            run_full(&s, &cfg),
            Err(PipelineError::Clustering(ClusteringError::TooFewRows { .. }))
        ));
    }
}
