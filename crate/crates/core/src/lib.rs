//! Early-warning signals of critical transitions in time series.
//!
//! The crate turns a scalar series into a series of persistence-landscape
//! norms: the series is delay-embedded, scanned with a sliding window, each
//! window's point cloud is filtered by a Vietoris–Rips complex, and the
//! one-dimensional persistence diagram of that filtration is summarized by the
//! L¹ norm of its persistence landscape. The norm series, together with the
//! series itself, is then segmented into regimes with k-means.
//!
//! Module map, bottom-up:
//!
//! - [`timeseries`]: the [`TimeSeries`] container and scalar transforms.
//! - [`embedding`]: delay vectors and sliding-window point clouds.
//! - [`filtration`]: Vietoris–Rips filtrations of point clouds.
//! - [`persistence`]: persistence diagrams (H₀ and H₁ over GF(2)).
//! - [`landscape`]: exact persistence landscapes and their Lᵖ norms.
//! - [`clustering`]: k-means with restarts and a PCA projection helper.
//! - [`simulate`]: the Lorenz-type map, its bifurcation scans and slow sweeps.
//! - [`pipeline`]: the end-to-end workflow.
//! - [`io`]: CSV ingestion and output writers.
//!
//! ```
//! use topowarn::pipeline::{run_tda, PipelineConfig};
//! use topowarn::TimeSeries;
//!
//! let xs: Vec<f64> = (0..120)
//!     .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 20.0).sin())
//!     .collect();
//! let series = TimeSeries::from_values(xs).unwrap();
//! let config = PipelineConfig::lorenz().with_window(50);
//! let norms = run_tda(&series, &config).unwrap();
//! assert_eq!(norms.len(), 120 - 4 - 50 + 2);
//! ```

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clustering;
pub mod embedding;
pub mod filtration;
pub mod io;
pub mod landscape;
pub mod persistence;
pub mod pipeline;
pub mod simulate;
pub mod timeseries;

mod error;

pub use error::Error;
pub use timeseries::{TimeSeries, Timestamp};

pub type Result<T, E = Error> = std::result::Result<T, E>;
