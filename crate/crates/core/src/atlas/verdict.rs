//! Stability verdicts with radius-doubling confirmation, and neutral-curve
//! tracing by bisection in the activation energy.

use super::contour::Contour;
use super::winding::{winding, Evaluator, RefineControl};
use crate::error::{Error, Result};
use crate::evans1d::{Evans1d, EvansControls};
use crate::profile::ChemParams;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable { count: i64 },
    /// The count changed under radius doubling.
    Inconclusive { count: i64, count_doubled: i64 },
}

impl Verdict {
    pub fn is_stable(&self) -> bool {
        matches!(self, Verdict::Stable)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VerdictControl {
    pub radius: f64,
    pub exclusion: f64,
    pub refine: RefineControl,
}

impl Default for VerdictControl {
    fn default() -> Self {
        Self {
            radius: 10.0,
            exclusion: 1e-2,
            refine: RefineControl::default(),
        }
    }
}

/// Counts zeros in `{Re >= 0, exclusion <= |lambda| <= R}` for `R` and `2R`.
pub fn verdict<E: Evaluator + ?Sized>(ev: &E, ctrl: &VerdictControl) -> Result<Verdict> {
    let c1 = winding(ev, &Contour::half_disk(ctrl.radius, ctrl.exclusion), &ctrl.refine)?.count;
    let c2 = winding(ev, &Contour::half_disk(2.0 * ctrl.radius, ctrl.exclusion), &ctrl.refine)?.count;
    Ok(if c1 != c2 {
        Verdict::Inconclusive {
            count: c1,
            count_doubled: c2,
        }
    } else if c1 == 0 {
        Verdict::Stable
    } else {
        Verdict::Unstable { count: c1 }
    })
}

/// Evans evaluator for a parameter set, with `k` normalised to unit
/// half-reaction length so that a fixed radius is meaningful across the
/// parameter space.
pub fn normalized_evaluator(params: &ChemParams, controls: EvansControls) -> Result<Evans1d> {
    Evans1d::new(&params.with_unit_half_length()?, controls)
}

pub fn verdict_for(params: &ChemParams, ctrl: &VerdictControl) -> Result<Verdict> {
    verdict(&normalized_evaluator(params, EvansControls::default())?, ctrl)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub q: f64,
    pub e_lo: f64,
    pub e_hi: f64,
    pub count_below: i64,
    pub count_above: i64,
}

impl BoundaryPoint {
    pub fn activation(&self) -> f64 {
        0.5 * (self.e_lo + self.e_hi)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryOutcome {
    pub q: f64,
    pub point: Option<BoundaryPoint>,
    pub message: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TraceControl {
    pub e_lo: f64,
    pub e_hi: f64,
    /// Bracket growth factor when searching upward from `e_lo`.
    pub growth: f64,
    pub tol: f64,
    /// Radius of the half-disk used for the count during bisection.
    pub radius: f64,
    pub exclusion: f64,
    pub refine: RefineControl,
}

impl Default for TraceControl {
    fn default() -> Self {
        Self {
            e_lo: 0.5,
            e_hi: 40.0,
            growth: 1.25,
            tol: 1e-3,
            radius: 10.0,
            exclusion: 1e-2,
            refine: RefineControl::default(),
        }
    }
}

fn count_at(base: &ChemParams, q: f64, activation: f64, ctrl: &TraceControl) -> Result<i64> {
    let p = ChemParams {
        heat_release: q,
        activation,
        ..*base
    };
    let ev = normalized_evaluator(&p, EvansControls::default())?;
    // A real root leaving the origin can sit on the exclusion arc; move the
    // arc rather than fail.
    let mut last = None;
    for scale in [1.0, 0.37, 2.9] {
        let c = Contour::half_disk(ctrl.radius, ctrl.exclusion * scale);
        match winding(&ev, &c, &ctrl.refine) {
            Ok(r) => return Ok(r.count),
            Err(e @ Error::NearZeroOnContour { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Neutral activation energy at one `q`: the bracket is grown from `e_lo`
/// by the factor `growth` until the count turns positive (never beyond
/// `e_hi`), then bisected.
pub fn boundary_point(base: &ChemParams, q: f64, ctrl: &TraceControl) -> Result<BoundaryPoint> {
    let mut lo = ctrl.e_lo;
    let mut c_lo = count_at(base, q, lo, ctrl)?;
    if c_lo != 0 {
        return Err(Error::Domain(format!(
            "already unstable at the lower bracket end E = {lo} (q = {q}, count {c_lo})"
        )));
    }
    let (mut hi, mut c_hi);
    loop {
        hi = (lo * ctrl.growth).min(ctrl.e_hi);
        c_hi = count_at(base, q, hi, ctrl)?;
        if c_hi != 0 {
            break;
        }
        if hi >= ctrl.e_hi {
            return Err(Error::Domain(format!(
                "no stable-to-unstable transition in [{}, {}] at q = {q}",
                ctrl.e_lo, ctrl.e_hi
            )));
        }
        lo = hi;
    }
    while hi - lo > ctrl.tol {
        let mid = 0.5 * (lo + hi);
        let c = count_at(base, q, mid, ctrl)?;
        if c == 0 {
            lo = mid;
            c_lo = c;
        } else {
            hi = mid;
            c_hi = c;
        }
    }
    Ok(BoundaryPoint {
        q,
        e_lo: lo,
        e_hi: hi,
        count_below: c_lo,
        count_above: c_hi,
    })
}

/// Boundary points over a `q` grid, in input order; failures are reported
/// per point and do not stop the trace.
pub fn trace_boundary(base: &ChemParams, q_grid: &[f64], ctrl: &TraceControl) -> Vec<BoundaryOutcome> {
    q_grid
        .par_iter()
        .map(|&q| match boundary_point(base, q, ctrl) {
            Ok(p) => BoundaryOutcome {
                q,
                point: Some(p),
                message: None,
            },
            Err(e) => BoundaryOutcome {
                q,
                point: None,
                message: Some(e.to_string()),
            },
        })
        .collect()
}

/// Degree-`deg` polynomial fit of `log E` against `log q` with the mean
/// relative error of the reconstructed `E`.
pub fn loglog_fit(points: &[BoundaryPoint], deg: usize) -> Option<(Vec<f64>, f64)> {
    let x: Vec<f64> = points.iter().map(|p| p.q.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.activation().ln()).collect();
    let c = crate::numerics::fit::polyfit(&x, &y, deg)?;
    let err = points
        .iter()
        .zip(&x)
        .map(|(p, xi)| (crate::numerics::fit::polyval(&c, *xi).exp() / p.activation() - 1.0).abs())
        .sum::<f64>()
        / points.len() as f64;
    Some((c, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::FnEvaluator;
    use crate::LogComplex;
    use num_complex::Complex64;

    #[test]
    fn verdict_on_synthetic_functions() {
        let stable = FnEvaluator::real(|z: Complex64| Ok(LogComplex::from_complex(z * (z + 1.0))));
        assert_eq!(verdict(&stable, &VerdictControl::default()).unwrap(), Verdict::Stable);
        let unstable = FnEvaluator::real(|z: Complex64| {
            Ok(LogComplex::from_complex(z * ((z - 1.0) * (z - 1.0) + 4.0)))
        });
        assert_eq!(
            verdict(&unstable, &VerdictControl::default()).unwrap(),
            Verdict::Unstable { count: 2 }
        );
        let far = FnEvaluator::real(|z: Complex64| Ok(LogComplex::from_complex(z * (z - 15.0))));
        assert_eq!(
            verdict(&far, &VerdictControl::default()).unwrap(),
            Verdict::Inconclusive {
                count: 0,
                count_doubled: 1
            }
        );
    }
}
