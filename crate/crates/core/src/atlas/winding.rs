//! Argument-principle winding numbers with adaptive phase-step refinement.

use super::contour::Contour;
use crate::error::{Error, Result};
use crate::numerics::logval::{wrap_phase, LogComplex};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

/// An analytic function sampled in log-polar form.
pub trait Evaluator: Sync {
    fn eval(&self, lambda: Complex64) -> Result<LogComplex>;

    /// `f(conj z) = conj f(z)`; lets symmetric contours be traced by halves.
    fn is_real(&self) -> bool {
        false
    }
}

/// Wraps a closure as an [`Evaluator`].
pub struct FnEvaluator<F> {
    pub f: F,
    pub real: bool,
}

impl<F> FnEvaluator<F>
where
    F: Fn(Complex64) -> Result<LogComplex> + Sync,
{
    pub fn new(f: F) -> Self {
        Self { f, real: false }
    }

    pub fn real(f: F) -> Self {
        Self { f, real: true }
    }
}

impl<F> Evaluator for FnEvaluator<F>
where
    F: Fn(Complex64) -> Result<LogComplex> + Sync,
{
    fn eval(&self, lambda: Complex64) -> Result<LogComplex> {
        (self.f)(lambda)
    }

    fn is_real(&self) -> bool {
        self.real
    }
}

/// Memoising wrapper keyed on the exact bits of `lambda`.
pub struct Cached<'a, E: Evaluator + ?Sized> {
    inner: &'a E,
    cache: Mutex<HashMap<(u64, u64), LogComplex>>,
}

impl<'a, E: Evaluator + ?Sized> Cached<'a, E> {
    pub fn new(inner: &'a E) -> Self {
        Self {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<E: Evaluator + ?Sized> Evaluator for Cached<'_, E> {
    fn eval(&self, lambda: Complex64) -> Result<LogComplex> {
        let key = (lambda.re.to_bits(), lambda.im.to_bits());
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let v = self.inner.eval(lambda)?;
        self.cache.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }

    fn is_real(&self) -> bool {
        self.inner.is_real()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RefineControl {
    /// Initial samples per unit contour length (rounded up to a power of two
    /// per smooth piece).
    pub density: f64,
    pub min_per_piece: usize,
    /// Maximal accepted phase step between consecutive samples.
    pub max_step: f64,
    /// Smallest parameter gap before refinement is declared stuck.
    pub min_gap: f64,
    pub max_samples: usize,
}

impl Default for RefineControl {
    fn default() -> Self {
        Self {
            density: 4.0,
            min_per_piece: 8,
            max_step: PI / 2.0,
            min_gap: 1e-13,
            max_samples: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub lambda: Complex64,
    pub value: LogComplex,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindingReport {
    pub contour: Contour,
    /// Ordered samples; only the upper half when `half_path` is set.
    pub samples: Vec<Sample>,
    pub count: i64,
    /// Total phase change divided by `2 pi`, before rounding.
    pub raw_winding: f64,
    pub max_phase_step: f64,
    pub half_path: bool,
}

/// Number of zeros enclosed by `contour`, counted with multiplicity.
pub fn winding<E: Evaluator + ?Sized>(ev: &E, contour: &Contour, ctrl: &RefineControl) -> Result<WindingReport> {
    let half = ev.is_real() && contour.is_conjugate_symmetric();
    let path = |t: f64| {
        if half {
            contour.upper_half_point(t)
        } else {
            contour.point(t)
        }
    };
    let breaks = contour.breakpoints(half);
    let mut ts: Vec<f64> = Vec::new();
    for w in breaks.windows(2) {
        let len = (path(w[1]) - path(w[0])).norm().max(
            // Arcs: chord underestimates; sample the midpoint too.
            (path(0.5 * (w[0] + w[1])) - path(w[0])).norm() * 2.0,
        );
        let n = ((len * ctrl.density).ceil() as usize)
            .max(ctrl.min_per_piece)
            .next_power_of_two();
        for i in 0..n {
            ts.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
        }
    }
    ts.push(1.0);

    let eval_all = |ts: &[f64]| -> Result<Vec<Sample>> {
        ts.par_iter()
            .map(|&t| {
                let lambda = path(t);
                let value = ev.eval(lambda)?;
                if value.is_zero() || !value.log_magnitude.is_finite() {
                    return Err(Error::NearZeroOnContour { lambda });
                }
                Ok(Sample { lambda, value })
            })
            .collect()
    };

    let mut samples = eval_all(&ts)?;
    if !half {
        // Close the loop with the identical starting value.
        let last = samples.len() - 1;
        samples[last].value = samples[0].value;
    }
    loop {
        let mut mids = Vec::new();
        let mut positions = Vec::new();
        for i in 0..ts.len() - 1 {
            let d = wrap_phase(samples[i + 1].value.phase - samples[i].value.phase);
            if d.abs() >= ctrl.max_step {
                if ts[i + 1] - ts[i] < ctrl.min_gap {
                    return Err(Error::NearZeroOnContour {
                        lambda: samples[i].lambda,
                    });
                }
                mids.push(0.5 * (ts[i] + ts[i + 1]));
                positions.push(i + 1);
            }
        }
        if mids.is_empty() {
            break;
        }
        if ts.len() + mids.len() > ctrl.max_samples {
            return Err(Error::NearZeroOnContour {
                lambda: samples[positions[0]].lambda,
            });
        }
        let new = eval_all(&mids)?;
        let mut ts2 = Vec::with_capacity(ts.len() + mids.len());
        let mut s2 = Vec::with_capacity(ts.len() + mids.len());
        let mut k = 0;
        for i in 0..ts.len() {
            if k < positions.len() && positions[k] == i {
                ts2.push(mids[k]);
                s2.push(new[k]);
                k += 1;
            }
            ts2.push(ts[i]);
            s2.push(samples[i]);
        }
        ts = ts2;
        samples = s2;
    }

    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    for w in samples.windows(2) {
        let d = wrap_phase(w[1].value.phase - w[0].value.phase);
        max_step = max_step.max(d.abs());
        total += d;
    }
    let raw = if half { total / PI } else { total / (2.0 * PI) };
    Ok(WindingReport {
        contour: contour.clone(),
        samples,
        count: raw.round() as i64,
        raw_winding: raw,
        max_phase_step: max_step,
        half_path: half,
    })
}
