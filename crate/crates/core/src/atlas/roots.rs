//! Root localisation by recursive quadrisection on winding numbers.

use super::contour::Contour;
use super::winding::{winding, Cached, Evaluator, RefineControl};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub lambda: Complex64,
    pub multiplicity: i64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LocateControl {
    /// Boxes with a multiple count are split down to this side length.
    pub target_box: f64,
    pub max_boxes: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub refine: RefineControl,
}

impl Default for LocateControl {
    fn default() -> Self {
        Self {
            target_box: 1e-3,
            max_boxes: 20_000,
            newton_tol: 1e-12,
            newton_max_iter: 60,
            refine: RefineControl::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Rect {
    lo: Complex64,
    hi: Complex64,
}

impl Rect {
    fn size(&self) -> f64 {
        (self.hi.re - self.lo.re).max(self.hi.im - self.lo.im)
    }

    fn center(&self) -> Complex64 {
        (self.lo + self.hi) * 0.5
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.lo.re - slack && z.re <= self.hi.re + slack && z.im >= self.lo.im - slack && z.im <= self.hi.im + slack
    }

    /// Quadrisection at a slightly off-centre point, shifted further on
    /// each retry so that a root on a split line can be avoided.
    fn split(&self, attempt: usize) -> [Rect; 4] {
        let f = 0.5 + 0.0137 * attempt as f64;
        let m = Complex64::new(
            self.lo.re + f * (self.hi.re - self.lo.re),
            self.lo.im + (1.0 - f) * (self.hi.im - self.lo.im),
        );
        [
            Rect { lo: self.lo, hi: m },
            Rect {
                lo: Complex64::new(m.re, self.lo.im),
                hi: Complex64::new(self.hi.re, m.im),
            },
            Rect {
                lo: Complex64::new(self.lo.re, m.im),
                hi: Complex64::new(m.re, self.hi.im),
            },
            Rect { lo: m, hi: self.hi },
        ]
    }
}

/// Newton iteration on `f` with a central-difference derivative, using
/// the ratios `f(z +- h) / f(z)` so that no raw value can overflow.
pub fn newton_polish<E: Evaluator + ?Sized>(ev: &E, start: Complex64, tol: f64, max_iter: usize) -> Result<Option<Complex64>> {
    let mut z = start;
    for _ in 0..max_iter {
        let h = 1e-7 * z.norm().max(1.0);
        let f0 = ev.eval(z)?;
        if f0.is_zero() {
            return Ok(Some(z));
        }
        let rp = ev.eval(z + h)?.ratio(f0);
        let rm = ev.eval(z - h)?.ratio(f0);
        // dz = -f / f' with f'/f = (rp - rm) / 2h.
        let step = -2.0 * h / (rp - rm);
        if !step.re.is_finite() || !step.im.is_finite() {
            return Ok(None);
        }
        z += step;
        if step.norm() <= tol * z.norm().max(1.0) {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootReport {
    pub roots: Vec<Root>,
    pub region_count: i64,
    pub boxes: usize,
    pub evaluations: usize,
}

/// All roots in the rectangle `[lo, hi]` with multiplicities.
pub fn locate_roots<E: Evaluator + ?Sized>(ev: &E, lo: Complex64, hi: Complex64, ctrl: &LocateControl) -> Result<RootReport> {
    let cached = Cached::new(ev);
    let count = |r: &Rect| -> Result<i64> {
        Ok(winding(&cached, &Contour::rectangle(r.lo, r.hi), &ctrl.refine)?.count)
    };
    let region = Rect { lo, hi };
    let region_count = count(&region)?;
    let mut stack = vec![(region, region_count)];
    let mut roots = Vec::new();
    let mut boxes = 1;
    while let Some((r, n)) = stack.pop() {
        if n <= 0 {
            continue;
        }
        if n == 1 || r.size() <= ctrl.target_box {
            if let Some(z) = newton_polish(&cached, r.center(), ctrl.newton_tol, ctrl.newton_max_iter)? {
                if r.contains(z, 1e-9 * r.size()) {
                    roots.push(Root { lambda: z, multiplicity: n });
                    continue;
                }
            }
            if r.size() <= ctrl.target_box {
                // Newton failed on a tiny box: report its centre.
                roots.push(Root {
                    lambda: r.center(),
                    multiplicity: n,
                });
                continue;
            }
        }
        let mut done = false;
        for attempt in 0..6 {
            let kids = r.split(attempt);
            let mut counts = Vec::with_capacity(4);
            let mut failed = false;
            for k in &kids {
                match count(k) {
                    Ok(c) => counts.push(c),
                    Err(Error::NearZeroOnContour { .. }) => {
                        failed = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            boxes += 4;
            if !failed && counts.iter().sum::<i64>() == n {
                for (k, c) in kids.into_iter().zip(counts) {
                    stack.push((k, c));
                }
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::Budget { unresolved: stack.len() + 1 });
        }
        if boxes > ctrl.max_boxes {
            return Err(Error::Budget { unresolved: stack.len() });
        }
    }
    roots.sort_by(|a, b| a.lambda.im.total_cmp(&b.lambda.im).then(a.lambda.re.total_cmp(&b.lambda.re)));
    Ok(RootReport {
        roots,
        region_count,
        boxes,
        evaluations: cached.len(),
    })
}

/// Unstable roots `{Re >= 0, exclusion <= |lambda| <= radius}` of a real
/// evaluator: searched in the upper half-plane and mirrored.
pub fn unstable_roots<E: Evaluator + ?Sized>(ev: &E, radius: f64, exclusion: f64, ctrl: &LocateControl) -> Result<RootReport> {
    if !ev.is_real() {
        return Err(Error::Config("unstable_roots needs a conjugate-symmetric evaluator".into()));
    }
    // Margins keep the box edges off the imaginary and real axes.
    let eta = 0.37 * exclusion;
    let lo = Complex64::new(-eta, -0.53 * exclusion);
    let hi = Complex64::new(radius, radius);
    let rep = locate_roots(ev, lo, hi, ctrl)?;
    let axis_tol = 1e-8 * radius.max(1.0);
    let mut roots = Vec::new();
    for r in &rep.roots {
        let z = r.lambda;
        if z.norm() < exclusion || z.norm() > radius || z.re < 0.0 {
            continue;
        }
        if z.im.abs() <= axis_tol {
            roots.push(Root { lambda: Complex64::new(z.re, 0.0), ..*r });
        } else if z.im > 0.0 {
            roots.push(*r);
            roots.push(Root { lambda: z.conj(), ..*r });
        }
    }
    roots.sort_by(|a, b| a.lambda.im.total_cmp(&b.lambda.im).then(a.lambda.re.total_cmp(&b.lambda.re)));
    Ok(RootReport { roots, ..rep })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::FnEvaluator;
    use crate::LogComplex;

    #[test]
    fn finds_polynomial_roots_with_multiplicity() {
        let rts = [
            Complex64::new(0.5, 0.25),
            Complex64::new(-0.7, 0.6),
            Complex64::new(0.1, -0.8),
        ];
        let f = FnEvaluator::new(move |z: Complex64| {
            let v = (z - rts[0]) * (z - rts[1]) * (z - rts[1]) * (z - rts[2]);
            Ok(LogComplex::from_complex(v))
        });
        let rep = locate_roots(&f, Complex64::new(-1.0, -1.0), Complex64::new(1.0, 1.0), &LocateControl::default()).unwrap();
        assert_eq!(rep.region_count, 4);
        assert_eq!(rep.roots.iter().map(|r| r.multiplicity).sum::<i64>(), 4);
        for r in &rts {
            assert!(rep.roots.iter().any(|x| (x.lambda - r).norm() < 1e-6), "missing {r}");
        }
        let double = rep.roots.iter().find(|x| (x.lambda - rts[1]).norm() < 1e-6).unwrap();
        assert_eq!(double.multiplicity, 2);
    }

    #[test]
    fn unstable_roots_pair_up() {
        let rts = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.3, 2.0),
            Complex64::new(0.3, -2.0),
            Complex64::new(1.5, 0.0),
            Complex64::new(-0.4, 1.0),
            Complex64::new(-0.4, -1.0),
        ];
        let f = FnEvaluator::real(move |z: Complex64| Ok(LogComplex::from_complex(rts.iter().map(|r| z - r).product())));
        let rep = unstable_roots(&f, 5.0, 1e-2, &LocateControl::default()).unwrap();
        assert_eq!(rep.roots.len(), 3);
        for r in &rep.roots {
            if r.lambda.im != 0.0 {
                assert!(rep.roots.iter().any(|s| (s.lambda - r.lambda.conj()).norm() < 1e-8));
            }
        }
    }
}
