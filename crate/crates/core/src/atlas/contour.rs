//! Closed contours parametrised by `t in [0, 1]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Contour {
    Circle { center: Complex64, radius: f64 },
    /// Boundary of `{Re >= 0, exclusion <= |lambda| <= radius}`: the
    /// imaginary segments, the outer arc and the small arc about the origin.
    HalfDisk { radius: f64, exclusion: f64 },
    /// Closed polygon through the vertices, in the given order.
    Polyline { vertices: Vec<Complex64> },
}

impl Contour {
    pub fn circle(center: Complex64, radius: f64) -> Self {
        Contour::Circle { center, radius }
    }

    pub fn half_disk(radius: f64, exclusion: f64) -> Self {
        Contour::HalfDisk { radius, exclusion }
    }

    /// Counter-clockwise rectangle.
    pub fn rectangle(lo: Complex64, hi: Complex64) -> Self {
        Contour::Polyline {
            vertices: vec![
                lo,
                Complex64::new(hi.re, lo.im),
                hi,
                Complex64::new(lo.re, hi.im),
            ],
        }
    }

    /// Point at parameter `t in [0, 1]`, positively oriented.
    pub fn point(&self, t: f64) -> Complex64 {
        match self {
            Contour::Circle { center, radius } => center + Complex64::from_polar(*radius, 2.0 * PI * t),
            Contour::HalfDisk { .. } => {
                // Full contour: upper half for t <= 1/2, conjugate mirror after.
                if t <= 0.5 {
                    self.upper_half_point(2.0 * t)
                } else {
                    self.upper_half_point(2.0 - 2.0 * t).conj()
                }
            }
            Contour::Polyline { vertices } => {
                let n = vertices.len();
                let s = (t * n as f64).min(n as f64 - 1e-300);
                let i = (s.floor() as usize).min(n - 1);
                let f = s - i as f64;
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                a + (b - a) * f
            }
        }
    }

    /// Upper half of the half-disk boundary, from `radius` on the real axis
    /// counter-clockwise along the arc to `i radius`, down the imaginary axis
    /// to `i exclusion`, then clockwise along the small arc to `exclusion`.
    /// Panics for other contour kinds.
    pub fn upper_half_point(&self, t: f64) -> Complex64 {
        let Contour::HalfDisk { radius, exclusion } = *self else {
            panic!("upper_half_point is defined for half-disks only");
        };
        // Arc-length weighted split so that sampling is roughly uniform.
        let l_arc = 0.5 * PI * radius;
        let l_seg = radius - exclusion;
        let l_small = 0.5 * PI * exclusion;
        let total = l_arc + l_seg + l_small;
        let s = t * total;
        if s <= l_arc {
            Complex64::from_polar(radius, s / radius)
        } else if s <= l_arc + l_seg {
            Complex64::new(0.0, radius - (s - l_arc))
        } else {
            let th = 0.5 * PI * (1.0 - (s - l_arc - l_seg) / l_small);
            Complex64::from_polar(exclusion, th)
        }
    }

    /// Whether the contour is symmetric under conjugation with its upper
    /// half as a parametrised path (used to halve the work for real
    /// evaluators).
    pub fn is_conjugate_symmetric(&self) -> bool {
        matches!(self, Contour::HalfDisk { .. })
    }

    /// Natural breakpoints in `t` where the path has corners.
    pub fn breakpoints(&self, upper_only: bool) -> Vec<f64> {
        match self {
            Contour::Circle { .. } => vec![0.0, 0.25, 0.5, 0.75, 1.0],
            Contour::Polyline { vertices } => {
                let n = vertices.len();
                (0..=n).map(|i| i as f64 / n as f64).collect()
            }
            Contour::HalfDisk { radius, exclusion } => {
                let l_arc = 0.5 * PI * radius;
                let l_seg = radius - exclusion;
                let l_small = 0.5 * PI * exclusion;
                let total = l_arc + l_seg + l_small;
                let upper = [0.0, l_arc / total, (l_arc + l_seg) / total, 1.0];
                if upper_only {
                    upper.to_vec()
                } else {
                    let mut v: Vec<f64> = upper.iter().map(|t| 0.5 * t).collect();
                    v.extend(upper.iter().rev().skip(1).map(|t| 1.0 - 0.5 * t));
                    v
                }
            }
        }
    }

    /// Perimeter, used to choose the initial sampling density.
    pub fn length(&self) -> f64 {
        match self {
            Contour::Circle { radius, .. } => 2.0 * PI * radius,
            Contour::HalfDisk { radius, exclusion } => PI * radius + 2.0 * (radius - exclusion) + PI * exclusion,
            Contour::Polyline { vertices } => {
                let n = vertices.len();
                (0..n).map(|i| (vertices[(i + 1) % n] - vertices[i]).norm()).sum()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_disk_is_closed_and_symmetric() {
        let c = Contour::half_disk(10.0, 0.01);
        assert!((c.point(0.0) - c.point(1.0)).norm() < 1e-12);
        assert!((c.point(0.0) - Complex64::new(10.0, 0.0)).norm() < 1e-12);
        assert!((c.point(0.5) - Complex64::new(0.01, 0.0)).norm() < 1e-12);
        for t in [0.1, 0.3, 0.45] {
            assert!((c.point(t) - c.point(1.0 - t).conj()).norm() < 1e-12);
            assert!(c.point(t).re >= -1e-12);
        }
    }

    #[test]
    fn rectangle_corners() {
        let c = Contour::rectangle(Complex64::new(-1.0, -2.0), Complex64::new(3.0, 4.0));
        assert_eq!(c.point(0.25), Complex64::new(3.0, -2.0));
        assert_eq!(c.point(0.5), Complex64::new(3.0, 4.0));
    }
}
