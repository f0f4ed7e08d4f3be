//! Delay-coordinate embedding and sliding-window point clouds.
//!
//! A series `x₀, …, x_{N-1}` becomes `N - d + 1` vectors
//! `z_t = (x_t, …, x_{t+d-1})` (delay of one sample). A window of size `w`
//! over those vectors is the point cloud `{z_t, …, z_{t+w-1}}`; there are
//! `N - d - w + 2` of them. Every vector and cloud is labeled by the last raw
//! observation that entered it, so anything derived from cloud `t` is known
//! at its label.

use thiserror::Error;

use crate::timeseries::{TimeSeries, Timestamp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbeddingError {
    #[error("embedding dimension must be positive")]
    ZeroDimension,
    #[error("embedding dimension {dim} exceeds series length {len}")]
    DimensionExceedsLength { dim: usize, len: usize },
    #[error("window size must be at least 2, got {0}")]
    WindowTooSmall(usize),
    #[error("window size {window} exceeds the {count} available points")]
    WindowExceedsCount { window: usize, count: usize },
    #[error("point {index} has dimension {found}, expected {expected}")]
    RaggedPoints { index: usize, expected: usize, found: usize },
}

/// An ordered set of points in ℝᵈ, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    label: Timestamp,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>, label: Timestamp) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(EmbeddingError::RaggedPoints {
                index: coords.len() / dim,
                expected: dim,
                found: coords.len() % dim,
            });
        }
        Ok(Self { dim, coords, label })
    }

    /// Builds a cloud from explicit points, labeled with tick 0.
    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self, EmbeddingError> {
        let dim = points.first().map_or(1, |p| p.as_ref().len());
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (index, p) in points.iter().enumerate() {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(EmbeddingError::RaggedPoints {
                    index,
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords, Timestamp::Tick(0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Timestamp of the last raw observation in the cloud.
    pub fn label(&self) -> Timestamp {
        self.label
    }

    pub fn with_label(mut self, label: Timestamp) -> Self {
        self.label = label;
        self
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Delay vectors of a series, each labeled by its last coordinate's timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayVectors {
    dim: usize,
    coords: Vec<f64>,
    labels: Vec<Timestamp>,
}

impl DelayVectors {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn point(&self, t: usize) -> &[f64] {
        &self.coords[t * self.dim..(t + 1) * self.dim]
    }

    pub fn labels(&self) -> &[Timestamp] {
        &self.labels
    }
}

pub fn delay_embed(series: &TimeSeries, dim: usize) -> Result<DelayVectors, EmbeddingError> {
    if dim == 0 {
        return Err(EmbeddingError::ZeroDimension);
    }
    let n = series.len();
    if dim > n {
        return Err(EmbeddingError::DimensionExceedsLength { dim, len: n });
    }
    let x = series.values();
    let count = n - dim + 1;
    let mut coords = Vec::with_capacity(count * dim);
    for t in 0..count {
        coords.extend_from_slice(&x[t..t + dim]);
    }
    Ok(DelayVectors {
        dim,
        coords,
        labels: series.timestamps()[dim - 1..].to_vec(),
    })
}

/// Number of windows produced from a series of length `n`.
pub fn window_count(n: usize, dim: usize, window: usize) -> usize {
    (n + 2).saturating_sub(dim + window)
}

pub fn sliding_windows(
    points: &DelayVectors,
    window: usize,
) -> Result<Vec<PointCloud>, EmbeddingError> {
    check_window(points, window)?;
    Ok((0..points.len() - window + 1)
        .map(|t| window_at(points, window, t))
        .collect())
}

/// The `t`-th window without materializing the others.
pub fn window_at(points: &DelayVectors, window: usize, t: usize) -> PointCloud {
    let d = points.dim;
    PointCloud {
        dim: d,
        coords: points.coords[t * d..(t + window) * d].to_vec(),
        label: points.labels[t + window - 1],
    }
}

pub(crate) fn check_window(points: &DelayVectors, window: usize) -> Result<(), EmbeddingError> {
    if window < 2 {
        return Err(EmbeddingError::WindowTooSmall(window));
    }
    if window > points.len() {
        return Err(EmbeddingError::WindowExceedsCount {
            window,
            count: points.len(),
        });
    }
    Ok(())
}
