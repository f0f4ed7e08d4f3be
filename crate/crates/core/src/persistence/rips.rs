//! Rips persistence straight from a point cloud.
//!
//! H₀ comes from Kruskal's algorithm over the sorted edges. H₁ comes from
//! reducing the coboundary matrix: edge columns are processed from the last
//! edge to the first, a column's pivot is its earliest cofacet triangle, and
//! edges that already killed a component are cleared. The total order on
//! simplices is the one [`crate::filtration::Filtration`] uses, so the pairs
//! coincide with those of the boundary reduction.
//!
//! Above the enclosing radius the complex is a cone and every class born
//! later has zero length, so edges and triangles beyond it are never built.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::{PersistenceDiagram, PersistenceError, UnionFind};
use crate::embedding::PointCloud;
use crate::filtration::{DistanceMatrix, FiltrationError, Threshold};

#[derive(Debug, Clone, Copy)]
struct Edge {
    value: f64,
    a: u32,
    b: u32,
}

#[derive(Debug, Clone, Copy)]
struct Triangle {
    value: f64,
    v: [u32; 3],
}

impl Triangle {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value).then(self.v.cmp(&other.v))
    }

    fn code(&self, n: u64) -> u64 {
        (self.v[0] as u64 * n + self.v[1] as u64) * n + self.v[2] as u64
    }
}

fn cofacet(edge: Edge, c: usize, dist: &DistanceMatrix, cutoff: f64) -> Option<Triangle> {
    let (a, b) = (edge.a as usize, edge.b as usize);
    if c == a || c == b {
        return None;
    }
    let (dac, dbc) = (dist.get(a, c), dist.get(b, c));
    if dac > cutoff || dbc > cutoff {
        return None;
    }
    let value = edge.value.max(dac).max(dbc);
    let c = c as u32;
    let v = if c < edge.a {
        [c, edge.a, edge.b]
    } else if c < edge.b {
        [edge.a, c, edge.b]
    } else {
        [edge.a, edge.b, c]
    };
    Some(Triangle { value, v })
}

fn earliest_cofacet(edge: Edge, dist: &DistanceMatrix, cutoff: f64) -> Option<Triangle> {
    (0..dist.len())
        .filter_map(|c| cofacet(edge, c, dist, cutoff))
        .min_by(Triangle::cmp)
}

fn edge_key(value: f64, a: u32, b: u32) -> (f64, u32, u32) {
    (value, a.min(b), a.max(b))
}

fn key_cmp(x: (f64, u32, u32), y: (f64, u32, u32)) -> Ordering {
    x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2))
}

/// Whether `edge` is the last facet of `t` in filtration order.
fn is_youngest_facet(edge: Edge, t: &Triangle, dist: &DistanceMatrix) -> bool {
    let e = edge_key(edge.value, edge.a, edge.b);
    let [x, y, z] = t.v;
    [(x, y), (x, z), (y, z)]
        .into_iter()
        .map(|(p, q)| edge_key(dist.get(p as usize, q as usize), p, q))
        .all(|f| key_cmp(f, e) != Ordering::Greater)
}

fn coboundary(edge: Edge, dist: &DistanceMatrix, cutoff: f64, out: &mut Vec<Triangle>) {
    out.clear();
    out.extend((0..dist.len()).filter_map(|c| cofacet(edge, c, dist, cutoff)));
    out.sort_unstable_by(Triangle::cmp);
}

/// `a ← a + b` over GF(2), both sorted in filtration order.
fn add_into(a: &mut Vec<Triangle>, b: &[Triangle], scratch: &mut Vec<Triangle>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                scratch.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                scratch.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&a[i..]);
    scratch.extend_from_slice(&b[j..]);
    std::mem::swap(a, scratch);
}

/// H₀ and H₁ diagram of the Rips filtration of `cloud` up to `threshold`.
pub fn rips_diagram(cloud: &PointCloud, threshold: Threshold) -> Result<PersistenceDiagram, PersistenceError> {
    if cloud.is_empty() {
        return Err(FiltrationError::EmptyCloud.into());
    }
    let dist = DistanceMatrix::new(cloud);
    let n = dist.len();
    if n == 1 {
        return Ok(PersistenceDiagram::from_intervals([(0, 0.0, f64::INFINITY)]));
    }
    let max_value = threshold.resolve(&dist)?;
    let cutoff = max_value.min(dist.enclosing_radius());

    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            let value = dist.get(a, b);
            if value <= cutoff {
                edges.push(Edge {
                    value,
                    a: a as u32,
                    b: b as u32,
                });
            }
        }
    }
    edges.sort_unstable_by(|x, y| {
        x.value
            .total_cmp(&y.value)
            .then(x.a.cmp(&y.a))
            .then(x.b.cmp(&y.b))
    });

    let mut intervals = Vec::new();
    let mut components = UnionFind::new(n);
    let mut cycle_edges = Vec::new();
    for e in &edges {
        if components.union(e.a as usize, e.b as usize) {
            intervals.push((0, 0.0, e.value));
        } else {
            cycle_edges.push(*e);
        }
    }
    let roots = (0..n).filter(|&i| components.find(i) == i).count();
    intervals.extend(std::iter::repeat_n((0, 0.0, f64::INFINITY), roots));

    // Columns of apparent pairs are only materialized when another column
    // needs them as an addend.
    let mut reduced: Vec<(Edge, Option<Vec<Triangle>>)> = Vec::new();
    let mut pivot_owner: HashMap<u64, usize> = HashMap::new();
    let mut scratch = Vec::new();
    let mut col = Vec::new();
    for e in cycle_edges.iter().rev() {
        if let Some(t) = earliest_cofacet(*e, &dist, cutoff) {
            if is_youngest_facet(*e, &t, &dist) {
                intervals.push((1, e.value, t.value));
                pivot_owner.insert(t.code(n as u64), reduced.len());
                reduced.push((*e, None));
                continue;
            }
        }
        coboundary(*e, &dist, cutoff, &mut col);
        loop {
            match col.first() {
                None => {
                    intervals.push((1, e.value, f64::INFINITY));
                    break;
                }
                Some(pivot) => match pivot_owner.get(&pivot.code(n as u64)) {
                    Some(&k) => {
                        let (owner, stored) = &mut reduced[k];
                        let addend = stored.get_or_insert_with(|| {
                            let mut c = Vec::new();
                            coboundary(*owner, &dist, cutoff, &mut c);
                            c
                        });
                        add_into(&mut col, addend, &mut scratch)
                    }
                    None => {
                        intervals.push((1, e.value, pivot.value));
                        pivot_owner.insert(pivot.code(n as u64), reduced.len());
                        reduced.push((*e, Some(std::mem::take(&mut col))));
                        break;
                    }
                },
            }
        }
    }
    Ok(PersistenceDiagram::from_intervals(intervals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::build_rips;
    use crate::persistence::compute_persistence;
    use proptest::prelude::*;

    #[test]
    fn hexagon_loop() {
        let pts: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                let a = std::f64::consts::PI * i as f64 / 3.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let d = rips_diagram(&PointCloud::from_points(&pts).unwrap(), Threshold::Auto).unwrap();
        let h1: Vec<_> = d.in_dimension(1).collect();
        assert_eq!(h1.len(), 1);
        assert!((h1[0].birth - 1.0).abs() < 1e-12);
        assert!((h1[0].death - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn user_threshold_leaves_loop_open() {
        let sq = PointCloud::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let d = rips_diagram(&sq, Threshold::Value(1.2)).unwrap();
        let h1: Vec<_> = d.in_dimension(1).collect();
        assert_eq!(h1.len(), 1);
        assert!(h1[0].is_essential());
    }

    #[test]
    fn duplicate_points() {
        let c = PointCloud::from_points(&[[1.0, 1.0]; 5]).unwrap();
        let d = rips_diagram(&c, Threshold::Auto).unwrap();
        assert_eq!(d.count(0), 1);
        assert_eq!(d.count(1), 0);
    }

    fn arb_cloud() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (2usize..14, 2usize..5).prop_flat_map(|(n, dim)| {
            proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, dim), n)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]
        #[test]
        fn matches_boundary_reduction(points in arb_cloud(), cap in prop::option::of(0.3f64..2.0)) {
            let c = PointCloud::from_points(&points).unwrap();
            let t = cap.map_or(Threshold::Auto, Threshold::Value);
            let fast = rips_diagram(&c, t).unwrap();
            let slow = compute_persistence(&build_rips(&c, t, 2).unwrap()).unwrap();
            prop_assert_eq!(fast, slow);
        }
    }
}
