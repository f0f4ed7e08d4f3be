//! Persistence diagrams of Rips filtrations in dimensions 0 and 1, with
//! coefficients in the two-element field.
//!
//! Two routes compute the same diagram:
//!
//! - [`compute_persistence`] reduces the boundary matrix of an explicit
//!   [`Filtration`] (standard column algorithm with clearing). It accepts any
//!   well-formed filtration.
//! - [`rips_diagram`] works directly from a point cloud: components via
//!   union-find and loops via reduction of the coboundary matrix, truncated at
//!   the enclosing radius. It is the route used for long sliding-window runs.
//!
//! Zero-length pairs are never reported.

mod oracle;
mod reduction;
mod rips;

use thiserror::Error;

use crate::filtration::FiltrationError;

pub use oracle::{betti_bruteforce, ORACLE_MAX_POINTS};
pub use reduction::{compute_persistence, reduce_boundary, Pairing};
pub use rips::rips_diagram;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PersistenceError {
    #[error("malformed filtration: simplex {index} has a face that does not precede it")]
    MalformedFiltration { index: usize },
    #[error("cloud of {size} points exceeds the brute-force limit of {limit}")]
    CloudTooLarge { size: usize, limit: usize },
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
}

/// A point of a persistence diagram. Essential classes have `death == ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub dimension: usize,
    pub birth: f64,
    pub death: f64,
    pub multiplicity: u32,
}

impl PersistencePair {
    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    /// Alive on `[birth, death)`.
    pub fn alive_at(&self, eps: f64) -> bool {
        self.birth <= eps && eps < self.death
    }
}

/// Multiset of birth–death pairs, sorted by (dimension, birth, death).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    /// Collects `(dimension, birth, death)` intervals, dropping zero-length
    /// ones and merging repeats into multiplicities.
    pub fn from_intervals(intervals: impl IntoIterator<Item = (usize, f64, f64)>) -> Self {
        let mut raw: Vec<(usize, f64, f64)> = intervals
            .into_iter()
            .filter(|&(_, b, d)| d > b)
            .collect();
        raw.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then(a.2.total_cmp(&b.2))
        });
        let mut pairs: Vec<PersistencePair> = Vec::with_capacity(raw.len());
        for (dimension, birth, death) in raw {
            match pairs.last_mut() {
                Some(p) if p.dimension == dimension && p.birth == birth && p.death == death => {
                    p.multiplicity += 1
                }
                _ => pairs.push(PersistencePair {
                    dimension,
                    birth,
                    death,
                    multiplicity: 1,
                }),
            }
        }
        Self { pairs }
    }

    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn in_dimension(&self, dimension: usize) -> impl Iterator<Item = &PersistencePair> + '_ {
        self.pairs.iter().filter(move |p| p.dimension == dimension)
    }

    /// Number of classes, with multiplicity, in the given dimension.
    pub fn count(&self, dimension: usize) -> usize {
        self.in_dimension(dimension)
            .map(|p| p.multiplicity as usize)
            .sum()
    }

    /// Betti number read off the diagram at scale `eps`.
    pub fn betti_at(&self, dimension: usize, eps: f64) -> usize {
        self.in_dimension(dimension)
            .filter(|p| p.alive_at(eps))
            .map(|p| p.multiplicity as usize)
            .sum()
    }

    /// Expands multiplicities into individual `(birth, death)` intervals.
    pub fn intervals(&self, dimension: usize) -> Vec<(f64, f64)> {
        self.in_dimension(dimension)
            .flat_map(|p| std::iter::repeat_n((p.birth, p.death), p.multiplicity as usize))
            .collect()
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}
