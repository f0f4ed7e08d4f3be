//! Time-series container and the scalar transforms used by the pipeline.

use std::fmt;

use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("timestamps and values differ in length ({timestamps} vs {values})")]
    LengthMismatch { timestamps: usize, values: usize },
    #[error("timestamps are not strictly increasing at index {index}")]
    NotIncreasing { index: usize },
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("non-positive price {value} at index {index}")]
    NonPositivePrice { index: usize, value: f64 },
    #[error("series too short: need at least {needed} values, got {len}")]
    TooShort { needed: usize, len: usize },
}

/// Position of an observation: an integer tick or a calendar date.
///
/// A series mixes the two only at its own risk; ticks order before dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Timestamp {
    Tick(i64),
    Date(NaiveDate),
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Timestamp::Tick(t) => write!(f, "{t}"),
            Timestamp::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

impl From<NaiveDate> for Timestamp {
    fn from(d: NaiveDate) -> Self {
        Timestamp::Date(d)
    }
}

impl From<i64> for Timestamp {
    fn from(t: i64) -> Self {
        Timestamp::Tick(t)
    }
}

/// Timestamped scalar observations.
///
/// Timestamps are strictly increasing and every value is finite. Gaps in the
/// calendar are not interpolated: the series is treated as evenly indexed.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    timestamps: Vec<Timestamp>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(timestamps: Vec<Timestamp>, values: Vec<f64>) -> Result<Self, SeriesError> {
        if timestamps.len() != values.len() {
            return Err(SeriesError::LengthMismatch {
                timestamps: timestamps.len(),
                values: values.len(),
            });
        }
        if let Some(index) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(SeriesError::NotIncreasing { index: index + 1 });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(SeriesError::NonFinite { index, value });
        }
        Ok(Self { timestamps, values })
    }

    /// Series indexed by ticks `0, 1, 2, …`.
    pub fn from_values(values: Vec<f64>) -> Result<Self, SeriesError> {
        let timestamps = (0..values.len() as i64).map(Timestamp::Tick).collect();
        Self::new(timestamps, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> &[Timestamp] {
        &self.timestamps
    }

    pub fn iter(&self) -> impl Iterator<Item = (Timestamp, f64)> + '_ {
        self.timestamps.iter().copied().zip(self.values.iter().copied())
    }

    /// Value observed at `ts`, if any.
    pub fn get(&self, ts: Timestamp) -> Option<f64> {
        self.timestamps
            .binary_search(&ts)
            .ok()
            .map(|i| self.values[i])
    }

    /// Keeps observations up to and including `end`.
    pub fn truncate_through(&self, end: Timestamp) -> TimeSeries {
        let cut = self.timestamps.partition_point(|&t| t <= end);
        TimeSeries {
            timestamps: self.timestamps[..cut].to_vec(),
            values: self.values[..cut].to_vec(),
        }
    }

    /// Same timestamps, values replaced by `f(value)`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<TimeSeries, SeriesError> {
        TimeSeries::new(
            self.timestamps.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    fn require_len(&self, needed: usize) -> Result<(), SeriesError> {
        if self.len() < needed {
            Err(SeriesError::TooShort {
                needed,
                len: self.len(),
            })
        } else {
            Ok(())
        }
    }
}

/// `ln(p[t+1] / p[t])`, stamped with the timestamp of `p[t+1]`.
pub fn log_returns(prices: &TimeSeries) -> Result<TimeSeries, SeriesError> {
    prices.require_len(2)?;
    if let Some((index, &value)) = prices.values.iter().enumerate().find(|(_, &p)| p <= 0.0) {
        return Err(SeriesError::NonPositivePrice { index, value });
    }
    let values = prices.values.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    TimeSeries::new(prices.timestamps[1..].to_vec(), values)
}

/// Affine map onto `[0, 1]`. A constant series maps to all zeros.
pub fn normalize_unit(series: &TimeSeries) -> TimeSeries {
    let (lo, hi) = series
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = hi - lo;
    let values = if span > 0.0 {
        series
            .values
            .iter()
            .map(|&v| ((v - lo) / span).clamp(0.0, 1.0))
            .collect()
    } else {
        vec![0.0; series.len()]
    };
    TimeSeries {
        timestamps: series.timestamps.clone(),
        values,
    }
}

/// `x[t+1] - x[t]`, stamped with the later timestamp.
pub fn first_difference(series: &TimeSeries) -> Result<TimeSeries, SeriesError> {
    series.require_len(2)?;
    let values = series.values.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(TimeSeries {
        timestamps: series.timestamps[1..].to_vec(),
        values,
    })
}

/// Kendall's tau-b between the values and their time order.
///
/// Positive values indicate an increasing trend. Returns 0 when fewer than two
/// values are present or every value is tied.
pub fn kendall_trend(values: &[f64]) -> f64 {
    let n = values.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    let mut value_ties = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            match values[j].partial_cmp(&values[i]) {
                Some(std::cmp::Ordering::Greater) => concordant += 1,
                Some(std::cmp::Ordering::Less) => discordant += 1,
                _ => value_ties += 1,
            }
        }
    }
    let pairs = (n * n.saturating_sub(1) / 2) as f64;
    let denom = (pairs * (pairs - value_ties as f64)).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        (concordant - discordant) as f64 / denom
    }
}
