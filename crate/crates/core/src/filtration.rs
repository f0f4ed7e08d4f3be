//! Vietoris–Rips filtrations (vertices, edges, triangles) under the Euclidean metric.
//!
//! A simplex enters the filtration at the largest pairwise distance among its
//! vertices, so vertices appear at 0, edges at their length and triangles at
//! their longest edge. The inclusion condition is closed: an edge of length
//! exactly `ε` belongs to the complex at scale `ε`.

use std::cmp::Ordering;

use thiserror::Error;

use crate::embedding::PointCloud;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FiltrationError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("maximum simplex dimension must be 1 or 2, got {0}")]
    UnsupportedDimension(usize),
    #[error("threshold must be positive and finite, got {0}")]
    InvalidThreshold(f64),
}

/// Scale at which the filtration stops.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Threshold {
    /// The largest pairwise distance; every edge and triangle is included.
    #[default]
    Auto,
    Value(f64),
}

impl Threshold {
    pub(crate) fn resolve(self, distances: &DistanceMatrix) -> Result<f64, FiltrationError> {
        match self {
            Threshold::Auto => Ok(distances.max()),
            Threshold::Value(v) if v > 0.0 && v.is_finite() => Ok(v),
            Threshold::Value(v) => Err(FiltrationError::InvalidThreshold(v)),
        }
    }
}

/// Dense symmetric matrix of pairwise Euclidean distances.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(cloud: &PointCloud) -> Self {
        let n = cloud.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = cloud.distance(i, j);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Self { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// `min_i max_j d(i, j)`. Above this scale the Rips complex is a cone.
    pub fn enclosing_radius(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().copied().fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A vertex, edge or triangle with its appearance value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simplex {
    vertices: [u32; 3],
    len: u8,
    value: f64,
}

impl Simplex {
    /// `vertices` must be strictly increasing and hold 1 to 3 indices.
    pub fn new(vertices: &[u32], value: f64) -> Self {
        assert!(
            (1..=3).contains(&vertices.len()) && vertices.windows(2).all(|w| w[0] < w[1]),
            "simplex vertices must be 1..=3 strictly increasing indices"
        );
        let mut v = [0u32; 3];
        v[..vertices.len()].copy_from_slice(vertices);
        Self {
            vertices: v,
            len: vertices.len() as u8,
            value,
        }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices[..self.len as usize]
    }

    pub fn dim(&self) -> usize {
        self.len as usize - 1
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Codimension-one faces, in increasing lexicographic order.
    pub fn facets(&self) -> impl Iterator<Item = ([u32; 3], usize)> + '_ {
        let k = self.len as usize;
        let count = if k > 1 { k } else { 0 };
        (0..count).rev().map(move |skip| {
            let mut out = [0u32; 3];
            let mut m = 0;
            for (i, &v) in self.vertices().iter().enumerate() {
                if i != skip {
                    out[m] = v;
                    m += 1;
                }
            }
            (out, k - 1)
        })
    }

    /// Filtration order: value, then dimension, then lexicographic vertices.
    pub fn filtration_cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.len.cmp(&other.len))
            .then_with(|| self.vertices().cmp(other.vertices()))
    }
}

/// Simplices sorted so that every face precedes its cofaces.
#[derive(Debug, Clone)]
pub struct Filtration {
    simplices: Vec<Simplex>,
    max_value: f64,
    max_dim: usize,
}

impl Filtration {
    /// Sorts `simplices` into filtration order. Face closure is not checked
    /// here; [`crate::persistence::compute_persistence`] rejects violations.
    pub fn from_simplices(mut simplices: Vec<Simplex>, max_value: f64, max_dim: usize) -> Self {
        simplices.sort_by(Simplex::filtration_cmp);
        Self {
            simplices,
            max_value,
            max_dim,
        }
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn count_dim(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.dim() == dim).count()
    }
}

pub fn build_rips(
    cloud: &PointCloud,
    threshold: Threshold,
    max_dim: usize,
) -> Result<Filtration, FiltrationError> {
    if cloud.is_empty() {
        return Err(FiltrationError::EmptyCloud);
    }
    if !(1..=2).contains(&max_dim) {
        return Err(FiltrationError::UnsupportedDimension(max_dim));
    }
    let dist = DistanceMatrix::new(cloud);
    let max_value = if dist.len() == 1 {
        match threshold {
            Threshold::Auto => 0.0,
            t => t.resolve(&dist)?,
        }
    } else {
        threshold.resolve(&dist)?
    };
    let n = dist.len() as u32;

    let mut simplices: Vec<Simplex> = (0..n).map(|i| Simplex::new(&[i], 0.0)).collect();
    for i in 0..n {
        for j in i + 1..n {
            let d = dist.get(i as usize, j as usize);
            if d <= max_value {
                simplices.push(Simplex::new(&[i, j], d));
            }
        }
    }
    if max_dim == 2 {
        for i in 0..n {
            for j in i + 1..n {
                let dij = dist.get(i as usize, j as usize);
                if dij > max_value {
                    continue;
                }
                for k in j + 1..n {
                    let v = dij
                        .max(dist.get(i as usize, k as usize))
                        .max(dist.get(j as usize, k as usize));
                    if v <= max_value {
                        simplices.push(Simplex::new(&[i, j, k], v));
                    }
                }
            }
        }
    }
    Ok(Filtration::from_simplices(simplices, max_value, max_dim))
}
