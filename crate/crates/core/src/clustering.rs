//! k-means regime segmentation and a PCA projection used only for rendering.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusteringError {
    #[error("no rows to cluster")]
    EmptyInput,
    #[error("need at least {k} rows for k = {k}, got {rows}")]
    TooFewRows { k: usize, rows: usize },
    #[error("k must be at least 1")]
    ZeroClusters,
    #[error("row {index} has {found} columns, expected {expected}")]
    RaggedRows { index: usize, expected: usize, found: usize },
    #[error("row {index} contains a non-finite value")]
    NonFinite { index: usize },
    #[error("data has zero covariance")]
    DegenerateData,
    #[error("invalid principal axis {axis} for {dim}-dimensional data")]
    InvalidAxis { axis: usize, dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansOptions {
    pub k: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl KMeansOptions {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            restarts: 100,
            max_iters: 300,
            seed: 0,
        }
    }

    pub fn restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts.max(1);
        self
    }

    pub fn max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters.max(1);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Best-of-restarts Lloyd solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub sse: f64,
    pub seed: u64,
    pub restarts: usize,
    /// Restart that produced this model.
    pub best_restart: usize,
    pub converged: bool,
    /// Per restart, the SSE after every assignment step.
    pub sse_traces: Vec<Vec<f64>>,
}

impl ClusterModel {
    /// Partition as sorted member lists, ordered by smallest member.
    /// Independent of the label values.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        partition_of(&self.assignments, self.k)
    }
}

pub(crate) fn partition_of(assignments: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); k];
    for (i, &c) in assignments.iter().enumerate() {
        groups[c].push(i);
    }
    groups.retain(|g| !g.is_empty());
    groups.sort();
    groups
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid, lowest index on ties.
fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(row, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

pub fn sse_of(rows: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &[usize]) -> f64 {
    rows.iter()
        .zip(assignments)
        .map(|(r, &c)| sq_dist(r, &centroids[c]))
        .sum()
}

struct Run {
    centroids: Vec<Vec<f64>>,
    assignments: Vec<usize>,
    sse: f64,
    converged: bool,
    trace: Vec<f64>,
}

fn lloyd(rows: &[Vec<f64>], k: usize, max_iters: usize, rng: &mut ChaCha20Rng) -> Run {
    let n = rows.len();
    let m = rows[0].len();
    let mut centroids: Vec<Vec<f64>> = sample(rng, n, k).into_iter().map(|i| rows[i].clone()).collect();
    let mut assignments = vec![usize::MAX; n];
    let mut trace = Vec::new();
    let mut converged = false;

    for _ in 0..max_iters {
        let mut changed = false;
        let mut sse = 0.0;
        for (i, row) in rows.iter().enumerate() {
            let (c, d) = nearest(row, &centroids);
            sse += d;
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
        }
        trace.push(sse);
        if !changed {
            converged = true;
            break;
        }

        let mut sums = vec![vec![0.0; m]; k];
        let mut counts = vec![0usize; k];
        for (row, &c) in rows.iter().zip(&assignments) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(row) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        // empty clusters restart at the row farthest from its own centroid
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        sq_dist(&rows[a], &centroids[assignments[a]])
                            .total_cmp(&sq_dist(&rows[b], &centroids[assignments[b]]))
                            .then(b.cmp(&a))
                    })
                    .expect("rows are non-empty");
                centroids[c] = rows[far].clone();
            }
        }
    }

    if converged {
        // centroids are the means of the final assignment
        let mut sums = vec![vec![0.0; m]; k];
        let mut counts = vec![0usize; k];
        for (row, &c) in rows.iter().zip(&assignments) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(row) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    let sse = sse_of(rows, &centroids, &assignments);
    Run {
        centroids,
        assignments,
        sse,
        converged,
        trace,
    }
}

fn validate(rows: &[Vec<f64>]) -> Result<usize, ClusteringError> {
    let m = rows.first().ok_or(ClusteringError::EmptyInput)?.len();
    for (index, r) in rows.iter().enumerate() {
        if r.len() != m {
            return Err(ClusteringError::RaggedRows {
                index,
                expected: m,
                found: r.len(),
            });
        }
        if r.iter().any(|x| !x.is_finite()) {
            return Err(ClusteringError::NonFinite { index });
        }
    }
    Ok(m)
}

/// Lloyd's algorithm from `restarts` random initializations; keeps the run
/// with the lowest SSE (lowest restart index on ties).
///
/// Each restart draws `k` distinct rows as initial centroids from its own
/// ChaCha20 stream, keyed by `seed` and the restart index, so the result does
/// not depend on how restarts are scheduled.
pub fn kmeans(rows: &[Vec<f64>], options: KMeansOptions) -> Result<ClusterModel, ClusteringError> {
    validate(rows)?;
    let KMeansOptions {
        k,
        restarts,
        max_iters,
        seed,
    } = options;
    if k == 0 {
        return Err(ClusteringError::ZeroClusters);
    }
    if rows.len() < k {
        return Err(ClusteringError::TooFewRows { k, rows: rows.len() });
    }
    let restarts = restarts.max(1);
    let runs: Vec<Run> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            lloyd(rows, k, max_iters.max(1), &mut rng)
        })
        .collect();

    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.sse.total_cmp(&b.1.sse).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("at least one restart");
    let sse_traces = runs.iter().map(|r| r.trace.clone()).collect();
    let run = runs.into_iter().nth(best).expect("best restart exists");
    Ok(ClusterModel {
        k,
        centroids: run.centroids,
        assignments: run.assignments,
        sse: run.sse,
        seed,
        restarts,
        best_restart: best,
        converged: run.converged,
        sse_traces,
    })
}

/// Principal-component projection onto two chosen axes.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    /// Eigenvalues of the sample covariance, descending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors matching `eigenvalues`; the largest-magnitude entry
    /// of each is positive.
    pub components: Vec<Vec<f64>>,
    pub axes: (usize, usize),
    pub points: Vec<[f64; 2]>,
}

impl PcaProjection {
    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        let total: f64 = self.eigenvalues.iter().sum();
        self.eigenvalues.iter().map(|e| e / total).collect()
    }
}

/// Cyclic Jacobi rotations on a symmetric matrix. Returns eigenvalues and
/// eigenvectors (as columns of the accumulated rotation), unsorted.
#[allow(clippy::needless_range_loop)]
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = a.len();
    let mut v: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..m).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..m {
                    let (arp, arq) = (a[r][p], a[r][q]);
                    a[r][p] = c * arp - s * arq;
                    a[r][q] = s * arp + c * arq;
                }
                for r in 0..m {
                    let (apr, aqr) = (a[p][r], a[q][r]);
                    a[p][r] = c * apr - s * aqr;
                    a[q][r] = s * apr + c * aqr;
                }
                for r in 0..m {
                    let (vrp, vrq) = (v[r][p], v[r][q]);
                    v[r][p] = c * vrp - s * vrq;
                    v[r][q] = s * vrp + c * vrq;
                }
            }
        }
    }
    let values = (0..m).map(|i| a[i][i]).collect();
    let vectors = (0..m).map(|j| (0..m).map(|i| v[i][j]).collect()).collect();
    (values, vectors)
}

/// Centers `rows`, eigen-decomposes their covariance and projects onto the
/// principal axes `axes` (1-based, ordered by descending eigenvalue).
pub fn pca_project(rows: &[Vec<f64>], axes: (usize, usize)) -> Result<PcaProjection, ClusteringError> {
    let m = validate(rows)?;
    if rows.len() < 2 {
        return Err(ClusteringError::TooFewRows { k: 2, rows: rows.len() });
    }
    if m < 2 {
        return Err(ClusteringError::InvalidAxis { axis: 2, dim: m });
    }
    for axis in [axes.0, axes.1] {
        if axis == 0 || axis > m {
            return Err(ClusteringError::InvalidAxis { axis, dim: m });
        }
    }
    let n = rows.len() as f64;
    let mean: Vec<f64> = (0..m).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let centered: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().zip(&mean).map(|(x, mu)| x - mu).collect())
        .collect();
    let mut cov = vec![vec![0.0; m]; m];
    for r in &centered {
        for i in 0..m {
            for j in 0..m {
                cov[i][j] += r[i] * r[j];
            }
        }
    }
    for row in cov.iter_mut() {
        for c in row.iter_mut() {
            *c /= n - 1.0;
        }
    }
    if cov.iter().enumerate().all(|(i, r)| r[i] == 0.0) {
        return Err(ClusteringError::DegenerateData);
    }

    let (values, vectors) = jacobi_eigen(cov);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i].max(0.0)).collect();
    let components: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| {
            let v = &vectors[i];
            let lead = v
                .iter()
                .copied()
                .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            let sign = if lead < 0.0 { -1.0 } else { 1.0 };
            v.iter().map(|x| x * sign).collect()
        })
        .collect();
    let (a, b) = (&components[axes.0 - 1], &components[axes.1 - 1]);
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
    let points = centered.iter().map(|r| [dot(r, a), dot(r, b)]).collect();
    Ok(PcaProjection {
        eigenvalues,
        components,
        axes,
        points,
    })
}
