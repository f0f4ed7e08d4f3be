//! Standard column reduction of a sorted boundary matrix, with clearing.

use std::collections::HashMap;

use super::{PersistenceDiagram, PersistenceError};
use crate::filtration::Filtration;

/// Pairing of simplex indices produced by the reduction.
///
/// Every simplex index appears exactly once: as the birth or death of a pair,
/// or in `essential`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Pairing {
    /// `(birth simplex, death simplex)` index pairs, zero-length ones included.
    pub pairs: Vec<(usize, usize)>,
    pub essential: Vec<usize>,
}

type Column = Vec<usize>;

/// Boundary columns as sorted row indices; rejects filtrations whose faces
/// do not precede their cofaces.
fn boundary_columns(filtration: &Filtration) -> Result<Vec<Column>, PersistenceError> {
    let simplices = filtration.simplices();
    let mut index: HashMap<([u32; 3], usize), usize> = HashMap::with_capacity(simplices.len());
    let mut columns = Vec::with_capacity(simplices.len());
    for (i, s) in simplices.iter().enumerate() {
        let mut col: Column = Vec::with_capacity(s.vertices().len());
        for (face, len) in s.facets() {
            match index.get(&(face, len)) {
                Some(&j) if simplices[j].value() <= s.value() => col.push(j),
                _ => return Err(PersistenceError::MalformedFiltration { index: i }),
            }
        }
        col.sort_unstable();
        let mut key = [0u32; 3];
        key[..s.vertices().len()].copy_from_slice(s.vertices());
        index.insert((key, s.vertices().len()), i);
        columns.push(col);
    }
    Ok(columns)
}

/// `a ← a + b` over GF(2) for sorted columns.
fn add_into(a: &mut Column, b: &[usize]) {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    *a = out;
}

/// Reduces the boundary matrix one dimension at a time from the top down.
/// Rows that become pivots in dimension `k + 1` are cleared before the
/// dimension-`k` columns are processed.
pub fn reduce_boundary(filtration: &Filtration) -> Result<Pairing, PersistenceError> {
    let mut columns = boundary_columns(filtration)?;
    let n = columns.len();
    let dims: Vec<usize> = filtration.simplices().iter().map(|s| s.dim()).collect();
    let top = dims.iter().copied().max().unwrap_or(0);

    let mut pivot_owner: Vec<Option<usize>> = vec![None; n];
    let mut cleared = vec![false; n];

    for dim in (1..=top).rev() {
        for j in 0..n {
            if dims[j] != dim {
                continue;
            }
            if cleared[j] {
                columns[j].clear();
                continue;
            }
            let mut col = std::mem::take(&mut columns[j]);
            while let Some(&low) = col.last() {
                match pivot_owner[low] {
                    Some(k) => add_into(&mut col, &columns[k]),
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                pivot_owner[low] = Some(j);
                cleared[low] = true;
            }
            columns[j] = col;
        }
    }

    let mut pairing = Pairing::default();
    let mut paired = vec![false; n];
    for (j, col) in columns.iter().enumerate() {
        if let Some(&low) = col.last() {
            pairing.pairs.push((low, j));
            paired[low] = true;
            paired[j] = true;
        }
    }
    pairing.essential = (0..n).filter(|&i| !paired[i]).collect();
    Ok(pairing)
}

/// H₀ and H₁ diagram of a filtration via boundary-matrix reduction.
pub fn compute_persistence(filtration: &Filtration) -> Result<PersistenceDiagram, PersistenceError> {
    let pairing = reduce_boundary(filtration)?;
    let s = filtration.simplices();
    let finite = pairing
        .pairs
        .iter()
        .map(|&(b, d)| (s[b].dim(), s[b].value(), s[d].value()));
    let essential = pairing
        .essential
        .iter()
        .map(|&b| (s[b].dim(), s[b].value(), f64::INFINITY));
    Ok(PersistenceDiagram::from_intervals(
        finite.chain(essential).filter(|&(dim, _, _)| dim <= 1),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::PointCloud;
    use crate::filtration::{build_rips, Simplex, Threshold};

    fn cloud(points: &[Vec<f64>]) -> PointCloud {
        PointCloud::from_points(points).unwrap()
    }

    #[test]
    fn two_points_merge_at_one() {
        let c = cloud(&[vec![0.0], vec![1.0]]);
        let d = compute_persistence(&build_rips(&c, Threshold::Value(2.0), 1).unwrap()).unwrap();
        let h0: Vec<_> = d.in_dimension(0).map(|p| (p.birth, p.death)).collect();
        assert_eq!(h0, vec![(0.0, 1.0), (0.0, f64::INFINITY)]);
        assert_eq!(d.count(1), 0);
    }

    #[test]
    fn square_has_one_loop() {
        let c = cloud(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]);
        let d = compute_persistence(&build_rips(&c, Threshold::Auto, 2).unwrap()).unwrap();
        let h1: Vec<_> = d.in_dimension(1).collect();
        assert_eq!(h1.len(), 1);
        assert_eq!((h1[0].birth, h1[0].death), (1.0, 2f64.sqrt()));
        assert_eq!(d.count(0), 4);
    }

    #[test]
    fn hollow_triangle_is_essential_without_two_cells() {
        let c = cloud(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.8]]);
        let d = compute_persistence(&build_rips(&c, Threshold::Auto, 1).unwrap()).unwrap();
        assert_eq!(d.count(1), 1);
        assert!(d.in_dimension(1).next().unwrap().is_essential());
    }

    #[test]
    fn missing_face_is_rejected() {
        let f = Filtration::from_simplices(
            vec![Simplex::new(&[0], 0.0), Simplex::new(&[0, 1], 1.0)],
            1.0,
            1,
        );
        assert_eq!(
            compute_persistence(&f),
            Err(PersistenceError::MalformedFiltration { index: 1 })
        );
    }

    #[test]
    fn face_with_larger_value_is_rejected() {
        // edge value below its vertex's value
        let f = Filtration::from_simplices(
            vec![
                Simplex::new(&[0], 0.0),
                Simplex::new(&[1], 0.5),
                Simplex::new(&[0, 1], 0.2),
            ],
            1.0,
            1,
        );
        assert!(matches!(
            compute_persistence(&f),
            Err(PersistenceError::MalformedFiltration { .. })
        ));
    }

    #[test]
    fn pairing_partitions_simplices() {
        let pts: Vec<Vec<f64>> = (0..7)
            .map(|i| {
                let a = i as f64 * 0.9;
                vec![a.cos() * (1.0 + 0.1 * i as f64), a.sin(), 0.05 * i as f64]
            })
            .collect();
        let f = build_rips(&cloud(&pts), Threshold::Auto, 2).unwrap();
        let p = reduce_boundary(&f).unwrap();
        let mut seen = vec![0u8; f.len()];
        for &(b, d) in &p.pairs {
            seen[b] += 1;
            seen[d] += 1;
            assert_eq!(f.simplices()[b].dim() + 1, f.simplices()[d].dim());
            assert!(b < d);
        }
        for &e in &p.essential {
            seen[e] += 1;
        }
        assert!(seen.iter().all(|&c| c == 1));
        // every vertex is an H0 birth: paired with an edge or essential
        let vertex_births = p.pairs.iter().filter(|&&(b, _)| f.simplices()[b].dim() == 0).count();
        let vertex_essential = p.essential.iter().filter(|&&e| f.simplices()[e].dim() == 0).count();
        assert_eq!(vertex_births + vertex_essential, 7);
        assert_eq!(vertex_essential, 1);
    }
}
