//! Exact persistence landscapes and their Lᵖ norms.
//!
//! Each finite pair `(b, d)` contributes a tent `f(x) = max(0, min(x - b, d - x))`.
//! Layer `λᵢ(x)` is the i-th largest tent value at `x`. Layers are stored as
//! their critical points (tent endpoints, apexes and tent crossings), which
//! makes every layer piecewise linear with slopes in `{-1, 0, 1}` and every
//! norm an exact sum over segments.

use log::debug;
use thiserror::Error;

use crate::persistence::PersistenceDiagram;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LandscapeError {
    #[error("invalid pair: birth {birth} is not below death {death}")]
    InvalidPair { birth: f64, death: f64 },
    #[error("diagram has an essential pair born at {birth} in dimension {dimension}")]
    EssentialPairPresent { dimension: usize, birth: f64 },
    #[error("norm exponent must be at least 1, got {0}")]
    InvalidP(f64),
}

/// What to do with pairs that never die.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EssentialPolicy {
    #[default]
    Exclude,
    Reject,
}

pub fn tent(birth: f64, death: f64, x: f64) -> Result<f64, LandscapeError> {
    if !(birth < death) {
        return Err(LandscapeError::InvalidPair { birth, death });
    }
    let mid = 0.5 * (birth + death);
    Ok(if x <= birth || x >= death {
        0.0
    } else if x <= mid {
        x - birth
    } else {
        death - x
    })
}

/// One landscape layer: critical points sorted by `x`, zero at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    points: Vec<(f64, f64)>,
}

impl Layer {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = &self.points;
        if p.is_empty() || x <= p[0].0 || x >= p[p.len() - 1].0 {
            return 0.0;
        }
        let i = p.partition_point(|q| q.0 <= x);
        let (x0, y0) = p[i - 1];
        let (x1, y1) = p[i];
        if x1 == x0 {
            return y0.max(y1);
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn sup(&self) -> f64 {
        self.points.iter().map(|q| q.1).fold(0.0, f64::max)
    }

    /// `∫ λ(x)^p dx`, integrated exactly segment by segment.
    pub fn integral_pow(&self, p: f64) -> f64 {
        self.points
            .windows(2)
            .map(|w| {
                let ((x0, y0), (x1, y1)) = (w[0], w[1]);
                let h = x1 - x0;
                if h <= 0.0 {
                    0.0
                } else if p == 1.0 {
                    0.5 * h * (y0 + y1)
                } else if y0 == y1 {
                    h * y0.powf(p)
                } else {
                    h * (y1.powf(p + 1.0) - y0.powf(p + 1.0)) / ((p + 1.0) * (y1 - y0))
                }
            })
            .sum()
    }
}

/// Sequence of layers `λ₁ ≥ λ₂ ≥ …`; layers past the last stored one are zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceLandscape {
    layers: Vec<Layer>,
}

impl PersistenceLandscape {
    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// `λₖ(x)` with `k` starting at 1.
    pub fn eval(&self, k: usize, x: f64) -> f64 {
        assert!(k >= 1, "landscape layers are numbered from 1");
        self.layers.get(k - 1).map_or(0.0, |l| l.eval(x))
    }

    /// Landscape of explicit `(birth, death)` pairs; zero-length pairs vanish.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, LandscapeError> {
        for &(birth, death) in pairs {
            if !(birth <= death) || !death.is_finite() || !birth.is_finite() {
                return Err(LandscapeError::InvalidPair { birth, death });
            }
        }
        let mut sorted: Vec<(f64, f64)> = pairs.iter().copied().filter(|&(b, d)| d > b).collect();
        // birth ascending, death descending
        sorted.sort_by(|p, q| p.0.total_cmp(&q.0).then(q.1.total_cmp(&p.1)));
        Ok(Self {
            layers: sweep_layers(sorted),
        })
    }
}

/// Peels layers off a sorted pair list, one per pass. Each pass follows the
/// upper envelope left to right; where the next tent starts under the current
/// one, the crossing is recorded and the clipped remainder `(b', d)` is pushed
/// back for the deeper layers.
fn sweep_layers(mut pairs: Vec<(f64, f64)>) -> Vec<Layer> {
    let mut layers = Vec::new();
    while !pairs.is_empty() {
        let (b, mut d) = pairs.remove(0);
        let mut pts = vec![(b, 0.0), (0.5 * (b + d), 0.5 * (d - b))];
        let mut p = 0;
        loop {
            // first tent after position p that reaches past the current one
            let next = (p..pairs.len()).find(|&i| pairs[i].1 > d);
            let Some(i) = next else {
                pts.push((d, 0.0));
                break;
            };
            let (nb, nd) = pairs.remove(i);
            if nb > d {
                pts.push((d, 0.0));
            }
            if nb >= d {
                pts.push((nb, 0.0));
            } else {
                pts.push((0.5 * (nb + d), 0.5 * (d - nb)));
                let clipped = (nb, d);
                let at = i + pairs[i..].partition_point(|q| {
                    q.0.total_cmp(&clipped.0)
                        .then(clipped.1.total_cmp(&q.1))
                        .is_lt()
                });
                pairs.insert(at, clipped);
            }
            pts.push((0.5 * (nb + nd), 0.5 * (nd - nb)));
            d = nd;
            p = i;
        }
        layers.push(Layer { points: pts });
    }
    layers
}

pub fn build_landscape(
    diagram: &PersistenceDiagram,
    dimension: usize,
    policy: EssentialPolicy,
) -> Result<PersistenceLandscape, LandscapeError> {
    let mut pairs = Vec::new();
    let mut skipped = 0usize;
    for p in diagram.in_dimension(dimension) {
        if p.is_essential() {
            if policy == EssentialPolicy::Reject {
                return Err(LandscapeError::EssentialPairPresent {
                    dimension,
                    birth: p.birth,
                });
            }
            skipped += p.multiplicity as usize;
            continue;
        }
        pairs.extend(std::iter::repeat_n((p.birth, p.death), p.multiplicity as usize));
    }
    if skipped > 0 {
        debug!("excluded {skipped} essential class(es) in dimension {dimension} from landscape");
    }
    PersistenceLandscape::from_pairs(&pairs)
}

/// `‖λ‖ₚ = (Σᵢ ‖λᵢ‖ₚᵖ)^{1/p}`.
pub fn lp_norm(landscape: &PersistenceLandscape, p: f64) -> Result<f64, LandscapeError> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(LandscapeError::InvalidP(p));
    }
    let total: f64 = landscape.layers.iter().map(|l| l.integral_pow(p)).sum();
    Ok(if p == 1.0 { total } else { total.powf(1.0 / p) })
}
