use std::fmt;

use crate::diffusion::SpiderPoint;
use crate::error::{invalid, Result};
use crate::function::Side;

/// Closed subset of the star graph given by closed intervals on each leg.
/// Upper ends may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingRegion {
    legs: Vec<Vec<(f64, f64)>>,
    vertex: bool,
}

/// Boundary point of a region together with the side on which the
/// continuation region lies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: SpiderPoint,
    pub continuation: Side,
}

impl StoppingRegion {
    pub fn empty(n: usize) -> Self {
        Self {
            legs: vec![Vec::new(); n],
            vertex: false,
        }
    }

    pub fn everything(n: usize) -> Self {
        Self {
            legs: vec![vec![(0.0, f64::INFINITY)]; n],
            vertex: true,
        }
    }

    /// `{x >= z_i on leg i}`.
    pub fn upper_rays(z: &[f64]) -> Result<Self> {
        let mut r = Self::empty(z.len());
        for (i, &zi) in z.iter().enumerate() {
            r = r.with_interval(i + 1, zi, f64::INFINITY)?;
        }
        Ok(r)
    }

    pub fn with_vertex(mut self) -> Self {
        self.vertex = true;
        self
    }

    /// Adds `[a, b]` on `leg`, merging overlapping or touching intervals.
    pub fn with_interval(mut self, leg: usize, a: f64, b: f64) -> Result<Self> {
        if leg == 0 || leg > self.legs.len() {
            return invalid(format!("leg {leg} outside 1..={}", self.legs.len()));
        }
        if !(a >= 0.0 && a.is_finite() && b >= a) {
            return invalid(format!("bad interval [{a}, {b}]"));
        }
        let ivs = &mut self.legs[leg - 1];
        ivs.push((a, b));
        ivs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(ivs.len());
        for &(a, b) in ivs.iter() {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        *ivs = merged;
        if a == 0.0 {
            self.vertex = true;
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.legs.len()
    }

    pub fn intervals(&self, leg: usize) -> &[(f64, f64)] {
        &self.legs[leg - 1]
    }

    pub fn vertex_included(&self) -> bool {
        self.vertex
    }

    pub fn is_empty(&self) -> bool {
        !self.vertex && self.legs.iter().all(Vec::is_empty)
    }

    pub fn contains(&self, pt: &SpiderPoint) -> bool {
        if pt.is_vertex() {
            return self.vertex;
        }
        self.contains_on_leg(pt.x, pt.leg)
    }

    pub fn contains_on_leg(&self, x: f64, leg: usize) -> bool {
        if x == 0.0 {
            return self.vertex;
        }
        self.legs[leg - 1].iter().any(|&(a, b)| a <= x && x <= b)
    }

    /// Non-vertex boundary points in leg order.
    pub fn boundary_points(&self) -> Vec<BoundaryPoint> {
        let mut out = Vec::new();
        for (i, ivs) in self.legs.iter().enumerate() {
            let leg = i + 1;
            for &(a, b) in ivs {
                if a > 0.0 {
                    out.push(BoundaryPoint {
                        point: SpiderPoint { x: a, leg },
                        continuation: Side::Left,
                    });
                }
                if b.is_finite() && b > 0.0 {
                    out.push(BoundaryPoint {
                        point: SpiderPoint { x: b, leg },
                        continuation: Side::Right,
                    });
                }
            }
        }
        out
    }

    /// Lower end of the first interval on `leg` above the vertex, if any.
    pub fn first_entry(&self, leg: usize) -> Option<f64> {
        self.legs[leg - 1].first().map(|iv| iv.0)
    }
}

impl fmt::Display for StoppingRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.vertex {
            parts.push("{0}".to_string());
        }
        for (i, ivs) in self.legs.iter().enumerate() {
            for &(a, b) in ivs {
                let hi = if b.is_infinite() {
                    "inf".to_string()
                } else {
                    format!("{b}")
                };
                parts.push(format!("[{a}, {hi}]@{}", i + 1));
            }
        }
        if parts.is_empty() {
            write!(f, "(empty)")
        } else {
            write!(f, "{}", parts.join(" u "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merging_and_vertex_consistency() {
        let r = StoppingRegion::empty(2)
            .with_interval(1, 1.0, 2.0)
            .unwrap()
            .with_interval(1, 1.5, 3.0)
            .unwrap();
        assert_eq!(r.intervals(1), &[(1.0, 3.0)]);
        assert!(!r.vertex_included());
        let r = r.with_interval(2, 0.0, 0.5).unwrap();
        assert!(r.vertex_included());
        assert!(r.contains(&SpiderPoint::VERTEX));
        assert!(StoppingRegion::empty(2).with_interval(1, 2.0, 1.0).is_err());
    }

    #[test]
    fn boundaries() {
        let r = StoppingRegion::upper_rays(&[1.0, 2.0]).unwrap();
        let b = r.boundary_points();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].continuation, Side::Left);
        let r = StoppingRegion::everything(3).with_interval(2, 0.0, 1.0).unwrap();
        assert!(r.boundary_points().is_empty());
        let r = StoppingRegion::empty(3).with_interval(2, 0.0, 1.0).unwrap();
        assert_eq!(r.boundary_points()[0].continuation, Side::Right);
    }
}
