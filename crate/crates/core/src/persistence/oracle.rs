//! Betti numbers of a single Rips complex by explicit matrix ranks.
//!
//! Shares nothing with the reduction code: the complex at one scale is built
//! from distances, its boundary matrices are packed into bit rows, and ranks
//! come from Gaussian elimination over GF(2).

use super::PersistenceError;
use crate::embedding::PointCloud;

pub const ORACLE_MAX_POINTS: usize = 12;

fn rank_gf2(mut rows: Vec<u128>) -> usize {
    let mut rank = 0;
    for bit in 0..128 {
        let mask = 1u128 << bit;
        let Some(p) = (rank..rows.len()).find(|&r| rows[r] & mask != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row & mask != 0 {
                *row ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

/// `(b₀, b₁)` of the Rips complex of `cloud` at scale `epsilon`
/// (simplices whose pairwise distances are all `≤ epsilon`).
pub fn betti_bruteforce(cloud: &PointCloud, epsilon: f64) -> Result<(usize, usize), PersistenceError> {
    let n = cloud.len();
    if n > ORACLE_MAX_POINTS {
        return Err(PersistenceError::CloudTooLarge {
            size: n,
            limit: ORACLE_MAX_POINTS,
        });
    }
    let close = |i: usize, j: usize| cloud.distance(i, j) <= epsilon;

    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if close(i, j) {
                edges.push((i, j));
            }
        }
    }
    let edge_id = |i: usize, j: usize| edges.iter().position(|&e| e == (i, j)).unwrap();

    // one bit row per column: edges over vertices, triangles over edges
    let d1: Vec<u128> = edges.iter().map(|&(i, j)| (1u128 << i) | (1u128 << j)).collect();
    let mut d2 = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if close(i, j) && close(i, k) && close(j, k) {
                    d2.push((1u128 << edge_id(i, j)) | (1u128 << edge_id(i, k)) | (1u128 << edge_id(j, k)));
                }
            }
        }
    }
    let r1 = rank_gf2(d1);
    let r2 = rank_gf2(d2);
    Ok((n - r1, edges.len() - r1 - r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> PointCloud {
        PointCloud::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn unit_square_scales() {
        assert_eq!(betti_bruteforce(&square(), 0.5).unwrap(), (4, 0));
        assert_eq!(betti_bruteforce(&square(), 1.2).unwrap(), (1, 1));
        assert_eq!(betti_bruteforce(&square(), 1.5).unwrap(), (1, 0));
    }

    #[test]
    fn isolated_points() {
        let c = PointCloud::from_points(&[[0.0], [10.0], [20.0]]).unwrap();
        assert_eq!(betti_bruteforce(&c, 1.0).unwrap(), (3, 0));
    }

    #[test]
    fn guard() {
        let c = PointCloud::from_points(&[[0.0]; 13]).unwrap();
        assert!(matches!(betti_bruteforce(&c, 1.0), Err(PersistenceError::CloudTooLarge { .. })));
    }

    #[test]
    fn rank_of_small_matrices() {
        assert_eq!(rank_gf2(vec![0b011, 0b110, 0b101]), 2);
        assert_eq!(rank_gf2(vec![0b001, 0b010, 0b100]), 3);
        assert_eq!(rank_gf2(vec![]), 0);
    }
}
