//! Oscillatory integrals `I(x, h) = int_{-x}^{x} exp(-(y^2 + 2iy)/h) a(y) dy`,
//! the scalar Riccati equation of the triangular model system, and the
//! block Riccati iteration for slow-fast systems.

use crate::error::{Error, Result};
use crate::numerics::cheb;
use crate::numerics::fit::lstsq;
use crate::numerics::linalg::solve_sylvester;
use crate::numerics::logval::LogComplex;
use crate::numerics::ode::{CVec, Dop853, Dop853Options};
use crate::numerics::quad::{gauss_legendre, integrate_gk};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest admissible `|log|` for raw complex values.
pub const RAW_LOG_LIMIT: f64 = 300.0;

/// `a(y) = exp(-y^{-1/(s-1)})` for `y > 0`, zero otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreySymbol {
    pub s: f64,
    /// Radius parameter of the Gevrey norm; carried for reporting only.
    pub t_norm: f64,
}

impl GevreySymbol {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 1.0) || !s.is_finite() {
            return Err(Error::Domain(format!("Gevrey index must lie in (1, inf), got {s}")));
        }
        Ok(Self { s, t_norm: 1.0 })
    }

    pub fn theta(&self) -> f64 {
        1.0 / (self.s - 1.0)
    }

    pub fn eval(&self, y: f64) -> f64 {
        if y <= 0.0 {
            0.0
        } else {
            (-y.powf(-self.theta())).exp()
        }
    }

    fn log_at(&self, y: Complex64) -> Complex64 {
        -y.powf(-self.theta())
    }
}

/// Symbols with a closed-form continuation into the lower half plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Symbol {
    /// Ascending coefficients of a real polynomial.
    Polynomial(Vec<f64>),
    Gevrey(GevreySymbol),
}

impl Symbol {
    pub fn constant(c: f64) -> Self {
        Symbol::Polynomial(vec![c])
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Symbol::Polynomial(c) => c.iter().rev().fold(0.0, |acc, ci| acc * y + ci),
            Symbol::Gevrey(g) => g.eval(y),
        }
    }

    pub fn eval_complex(&self, y: Complex64) -> Complex64 {
        match self {
            Symbol::Polynomial(c) => c
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, ci| acc * y + ci),
            Symbol::Gevrey(g) => {
                if y.re <= 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    g.log_at(y).exp()
                }
            }
        }
    }

    /// Logarithm of the continued symbol; real part `-inf` at zeros.
    fn log_at(&self, y: Complex64) -> Complex64 {
        match self {
            Symbol::Polynomial(_) => {
                let v = self.eval_complex(y);
                if v.norm() == 0.0 {
                    Complex64::new(f64::NEG_INFINITY, 0.0)
                } else {
                    v.ln()
                }
            }
            Symbol::Gevrey(g) => g.log_at(y),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadControl {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Panel width as a fraction of `pi h`.
    pub panel_fraction: f64,
    /// Panel halvings attempted before the precision warning is raised.
    pub max_halvings: usize,
}

impl Default for QuadControl {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            panel_fraction: 0.25,
            max_halvings: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OscIntegral {
    pub x: f64,
    pub h: f64,
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
    /// Tolerance not reached at machine precision.
    pub precision_warning: bool,
}

/// Real-line panel quadrature of `I(x, h)` in the scaled variable
/// `y = sqrt(h) t`. `x = inf` is accepted for symbols of at most polynomial
/// growth.
pub fn osc_integral<F>(a: F, x: f64, h: f64, ctrl: &QuadControl) -> Result<OscIntegral>
where
    F: Fn(f64) -> Complex64,
{
    if !(h > 0.0) || !(x >= 0.0) {
        return Err(Error::Domain(format!("osc_integral needs h > 0 and x >= 0, got h={h}, x={x}")));
    }
    let sh = h.sqrt();
    // exp(-t^2) underflows beyond |t| = 27.3.
    let t_max = (x / sh).min(27.5);
    let result = |panels: usize| -> (Complex64, f64) {
        if t_max == 0.0 {
            return (Complex64::new(0.0, 0.0), 0.0);
        }
        let (n20, w20) = gauss_legendre(20);
        let (n10, w10) = gauss_legendre(10);
        let width = 2.0 * t_max / panels as f64;
        let f = |t: f64| -> Complex64 {
            let kernel = Complex64::new(-t * t, -2.0 * t / sh).exp();
            kernel * a(sh * t) * sh
        };
        let mut sum = Complex64::new(0.0, 0.0);
        let mut diff = 0.0;
        let mut mass = 0.0;
        for p in 0..panels {
            let c = -t_max + (p as f64 + 0.5) * width;
            let mut s20 = Complex64::new(0.0, 0.0);
            for (xi, wi) in n20.iter().zip(&w20) {
                let v = f(c + 0.5 * width * xi);
                s20 += v * *wi;
                mass += v.norm() * wi * 0.5 * width;
            }
            let mut s10 = Complex64::new(0.0, 0.0);
            for (xi, wi) in n10.iter().zip(&w10) {
                s10 += f(c + 0.5 * width * xi) * *wi;
            }
            sum += s20 * (0.5 * width);
            diff += (s20 - s10).norm() * 0.5 * width;
        }
        (sum, diff + 8.0 * f64::EPSILON * mass)
    };
    let base = (2.0 * t_max / (ctrl.panel_fraction * PI * sh)).ceil().max(1.0) as usize;
    let mut panels = base;
    let (mut value, mut error) = result(panels);
    let mut halvings = 0;
    while error > ctrl.abs_tol + ctrl.rel_tol * value.norm() && halvings < ctrl.max_halvings {
        panels *= 2;
        halvings += 1;
        let (v, e) = result(panels);
        error = e.max((v - value).norm());
        value = v;
    }
    Ok(OscIntegral {
        x,
        h,
        value,
        error,
        panels,
        precision_warning: error > ctrl.abs_tol + ctrl.rel_tol * value.norm(),
    })
}

/// Integral along a polygonal path, carried in log form.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PathIntegral {
    pub value: LogComplex,
    /// Maximal log-magnitude of the integrand along the path.
    pub log_peak: f64,
    /// Estimated relative error of `value`.
    pub rel_error: f64,
}

fn segment_pieces(t_star: f64, finest: f64) -> Vec<f64> {
    let mut cuts = vec![0.0, 1.0];
    for centre in [0.0, t_star, 1.0] {
        let mut d = finest;
        while d < 1.0 {
            for p in [centre - d, centre + d] {
                if p > 0.0 && p < 1.0 {
                    cuts.push(p);
                }
            }
            d *= 4.0;
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    cuts
}

/// `int exp(log_f(y)) dy` along straight segments joining `vertices`.
/// `scale` is the smallest feature length expected along the path.
pub fn path_integral<F>(log_f: F, vertices: &[Complex64], scale: f64) -> PathIntegral
where
    F: Fn(Complex64) -> Complex64,
{
    const SAMPLES: usize = 512;
    let mut peak = f64::NEG_INFINITY;
    let mut stars = Vec::with_capacity(vertices.len());
    for w in vertices.windows(2) {
        let (mut best, mut t_best) = (f64::NEG_INFINITY, 0.0);
        for k in 0..=SAMPLES {
            let t = k as f64 / SAMPLES as f64;
            let v = log_f(w[0] + (w[1] - w[0]) * t).re;
            if v > best {
                best = v;
                t_best = t;
            }
        }
        peak = peak.max(best);
        stars.push(t_best);
    }
    if peak == f64::NEG_INFINITY {
        return PathIntegral {
            value: LogComplex::ZERO,
            log_peak: peak,
            rel_error: 0.0,
        };
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for (w, &t_star) in vertices.windows(2).zip(&stars) {
        let d = w[1] - w[0];
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let finest = (1e-3 * scale / len).clamp(1e-14, 0.25);
        let cuts = segment_pieces(t_star, finest);
        let g = |t: f64| {
            let l = log_f(w[0] + d * t) - peak;
            if l.re == f64::NEG_INFINITY || !l.re.is_finite() {
                Complex64::new(0.0, 0.0)
            } else {
                l.exp() * d
            }
        };
        for c in cuts.windows(2) {
            let (v, e) = integrate_gk(g, c[0], c[1], 1e-17, 1e-14, 400);
            total += v;
            err += e;
        }
    }
    let value = LogComplex::from_scaled(total, peak);
    let rel_error = if total.norm() == 0.0 {
        0.0
    } else {
        err / total.norm()
    };
    PathIntegral {
        value,
        log_peak: peak,
        rel_error,
    }
}

fn kernel_log(y: Complex64, h: f64) -> Complex64 {
    -(y * y + 2.0 * I * y) / h
}

/// Saddle of `-(y^2 + 2iy)/h - y^{-theta}` next to the origin, in the fourth
/// quadrant.
pub fn gevrey_saddle(g: &GevreySymbol, h: f64) -> Result<Complex64> {
    let th = g.theta();
    let alpha = 1.0 / (th + 1.0);
    let mut y = Complex64::from_polar((h * th / 2.0).powf(alpha), -PI * alpha / 2.0);
    for _ in 0..100 {
        let d1 = -2.0 * (y + I) / h + th * y.powf(-th - 1.0);
        let d2 = Complex64::new(-2.0 / h, 0.0) - th * (th + 1.0) * y.powf(-th - 2.0);
        let step = d1 / d2;
        y -= step;
        if y.re <= 0.0 {
            return Err(Error::Domain("Gevrey saddle search left the right half plane".into()));
        }
        if step.norm() <= 1e-15 * y.norm() {
            return Ok(y);
        }
    }
    Err(Error::Domain(format!("Gevrey saddle search did not converge at h={h}")))
}

/// `int_a^b exp(-(y^2 + 2iy)/h) a(y) dy` in log form, deforming into the
/// lower half plane.
pub fn osc_segment(symbol: &Symbol, a: f64, b: f64, h: f64) -> Result<PathIntegral> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("h must be positive, got {h}")));
    }
    if a == b {
        return Ok(PathIntegral {
            value: LogComplex::ZERO,
            log_peak: f64::NEG_INFINITY,
            rel_error: 0.0,
        });
    }
    if a > b {
        let mut r = osc_segment(symbol, b, a, h)?;
        r.value = r.value.mul(LogComplex::new(0.0, PI));
        return Ok(r);
    }
    let log_f = |y: Complex64| kernel_log(y, h) + symbol.log_at(y);
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let vertices = match symbol {
        Symbol::Polynomial(_) => vec![c(a, 0.0), c(a, -1.0), c(b, -1.0), c(b, 0.0)],
        Symbol::Gevrey(g) => {
            if b <= 0.0 {
                return Ok(PathIntegral {
                    value: LogComplex::ZERO,
                    log_peak: f64::NEG_INFINITY,
                    rel_error: 0.0,
                });
            }
            let lo = a.max(0.0);
            if lo == 0.0 {
                let ys = gevrey_saddle(g, h)?;
                if ys.re < b {
                    vec![c(0.0, 0.0), ys, c(ys.re, -1.0), c(b, -1.0), c(b, 0.0)]
                } else {
                    vec![c(0.0, 0.0), c(b, 0.0)]
                }
            } else {
                vec![c(lo, 0.0), c(lo, -1.0), c(b, -1.0), c(b, 0.0)]
            }
        }
    };
    let scale = match symbol {
        Symbol::Gevrey(g) => (h / 2.0).min(gevrey_saddle(g, h).map(|y| y.norm()).unwrap_or(h)),
        Symbol::Polynomial(_) => h / 2.0,
    };
    Ok(path_integral(log_f, &vertices, scale))
}

/// `I(x, h)` in log form.
pub fn osc_integral_log(symbol: &Symbol, x: f64, h: f64) -> Result<PathIntegral> {
    osc_segment(symbol, -x, x, h)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayRow {
    pub x: f64,
    pub h: f64,
    pub log_abs: f64,
    pub arg: f64,
    /// The raw value would underflow double precision.
    pub underflow: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub x: f64,
    pub rows: Vec<DecayRow>,
    /// Fitted `r` in `log|I| = A + gamma log h - r/h`.
    pub rate: f64,
    pub prefactor_exponent: f64,
    /// `min(x^2, 1)`.
    pub predicted_rate: f64,
    /// Rows entering the fit (envelope peaks when `I` oscillates in `h`).
    pub fitted_rows: usize,
}

fn decay_rows(symbol: &Symbol, x: f64, h_grid: &[f64]) -> Result<Vec<DecayRow>> {
    h_grid
        .par_iter()
        .map(|&h| {
            let v = osc_integral_log(symbol, x, h)?.value;
            Ok(DecayRow {
                x,
                h,
                log_abs: v.log_magnitude,
                arg: v.phase,
                underflow: v.log_magnitude < -708.0,
            })
        })
        .collect()
}

/// Fits `log|I| = A + gamma log h - r/h`; returns `(r, gamma, A)`.
fn fit_rate(rows: &[&DecayRow]) -> Result<(f64, f64, f64)> {
    let design = DMatrix::from_fn(rows.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => rows[i].h.ln(),
        _ => -1.0 / rows[i].h,
    });
    let y: Vec<f64> = rows.iter().map(|r| r.log_abs).collect();
    let (beta, _) = lstsq(&design, &y).ok_or_else(|| Error::Domain("rate fit failed".into()))?;
    Ok((beta[2], beta[1], beta[0]))
}

/// Local maxima of `log|I|` along the grid ordered by `1/h`; all rows when
/// fewer than four exist.
fn envelope<'a>(rows: &'a [DecayRow]) -> Vec<&'a DecayRow> {
    let mut sorted: Vec<&DecayRow> = rows.iter().filter(|r| r.log_abs.is_finite()).collect();
    sorted.sort_by(|a, b| b.h.total_cmp(&a.h));
    let peaks: Vec<&DecayRow> = (1..sorted.len().saturating_sub(1))
        .filter(|&i| sorted[i].log_abs > sorted[i - 1].log_abs && sorted[i].log_abs > sorted[i + 1].log_abs)
        .map(|i| sorted[i])
        .collect();
    if peaks.len() >= 4 {
        peaks
    } else {
        sorted
    }
}

/// Tabulates `|I(x, h)|` for an analytic symbol and fits the exponential
/// rate in `1/h`.
pub fn analytic_decay_check(symbol: &Symbol, x: f64, h_grid: &[f64]) -> Result<DecayReport> {
    if matches!(symbol, Symbol::Gevrey(_)) {
        return Err(Error::Domain("analytic_decay_check needs an analytic symbol".into()));
    }
    if h_grid.len() < 4 {
        return Err(Error::Domain("rate fit needs at least four h values".into()));
    }
    let rows = decay_rows(symbol, x, h_grid)?;
    let used = envelope(&rows);
    let (rate, gamma, _) = fit_rate(&used)?;
    let fitted_rows = used.len();
    Ok(DecayReport {
        x,
        rate,
        prefactor_exponent: gamma,
        predicted_rate: (x * x).min(1.0),
        fitted_rows,
        rows,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegimeReport {
    pub below: DecayReport,
    pub above: DecayReport,
    pub tolerance: f64,
    /// Both fitted rates within `tolerance` of `min(x^2, 1)`.
    pub split_observed: bool,
}

/// Decay rates on both sides of `x = 1`.
pub fn analytic_regimes(symbol: &Symbol, x_below: f64, x_above: f64, h_grid: &[f64], tolerance: f64) -> Result<RegimeReport> {
    let below = analytic_decay_check(symbol, x_below, h_grid)?;
    let above = analytic_decay_check(symbol, x_above, h_grid)?;
    let ok = |r: &DecayReport| ((r.rate - r.predicted_rate) / r.predicted_rate).abs() <= tolerance;
    Ok(RegimeReport {
        split_observed: ok(&below) && ok(&above),
        below,
        above,
        tolerance,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GevreyReport {
    pub s: f64,
    pub x: f64,
    pub rows: Vec<DecayRow>,
    /// Fitted exponent in `log|I| = A + gamma log h - c h^{-beta}`.
    pub beta: f64,
    pub c: f64,
    pub gamma: f64,
    pub expected_beta: f64,
    pub rel_error: f64,
    pub residual: f64,
    /// Singular-value ratio of the design matrix at the optimum.
    pub condition: f64,
}

fn gevrey_fit(rows: &[DecayRow], beta: f64) -> Option<(Vec<f64>, f64, f64)> {
    let design = DMatrix::from_fn(rows.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => rows[i].h.ln(),
        _ => -rows[i].h.powf(-beta),
    });
    // Column scaling keeps the conditioning meaningful.
    let norms: Vec<f64> = (0..3).map(|j| design.column(j).norm()).collect();
    let scaled = DMatrix::from_fn(rows.len(), 3, |i, j| design[(i, j)] / norms[j]);
    let y: Vec<f64> = rows.iter().map(|r| r.log_abs).collect();
    let (b, res) = lstsq(&scaled, &y)?;
    let sv = scaled.singular_values();
    let cond = sv.max() / sv.min();
    Some(((0..3).map(|j| b[j] / norms[j]).collect(), res, cond))
}

/// Decay exponent of `I(x, h)` for the Gevrey symbol of index `s`.
pub fn gevrey_decay_check(s: f64, x: f64, h_grid: &[f64]) -> Result<GevreyReport> {
    let g = GevreySymbol::new(s)?;
    if h_grid.len() < 4 {
        return Err(Error::Domain("exponent fit needs at least four h values".into()));
    }
    let rows = decay_rows(&Symbol::Gevrey(g), x, h_grid)?;
    if rows.iter().any(|r| !r.log_abs.is_finite()) {
        return Err(Error::Domain("Gevrey integral vanished to working precision".into()));
    }
    let objective = |b: f64| gevrey_fit(&rows, b).map(|f| f.1).unwrap_or(f64::INFINITY);
    let (lo, hi) = (0.02, 2.0);
    let n = 400;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=n {
        let b = lo + (hi - lo) * k as f64 / n as f64;
        let r = objective(b);
        if r < best.0 {
            best = (r, b);
        }
    }
    let step = (hi - lo) / n as f64;
    let (mut a, mut b) = ((best.1 - step).max(lo), (best.1 + step).min(hi));
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c1 = b - gr * (b - a);
        let c2 = a + gr * (b - a);
        if objective(c1) < objective(c2) {
            b = c2;
        } else {
            a = c1;
        }
    }
    let beta = 0.5 * (a + b);
    let (coef, residual, condition) =
        gevrey_fit(&rows, beta).ok_or_else(|| Error::Domain("Gevrey fit failed".into()))?;
    Ok(GevreyReport {
        s,
        x,
        rows,
        beta,
        c: coef[2],
        gamma: coef[1],
        expected_beta: 1.0 / s,
        rel_error: (beta * s - 1.0).abs(),
        residual,
        condition,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RiccatiPoint {
    pub x: f64,
    pub log_abs: f64,
    pub arg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiccatiScalar {
    pub h: f64,
    pub l: f64,
    pub alpha0: Complex64,
    pub points: Vec<RiccatiPoint>,
    /// Largest relative deviation from direct integration over the stretches
    /// where `|alpha| <= 1e10`; `None` when no such stretch exists.
    pub ode_deviation: Option<f64>,
}

impl RiccatiScalar {
    pub fn value(&self, i: usize) -> LogComplex {
        LogComplex::new(self.points[i].log_abs, self.points[i].arg)
    }
}

/// `Phi(x) = (x^2 + 2ix)/h`.
fn phi(x: f64, h: f64) -> Complex64 {
    Complex64::new(x * x, 2.0 * x) / h
}

/// `alpha(x) = exp(Phi(x)) (alpha0 + h^{-1} int_0^x exp(-Phi) theta)`, the
/// solution of `h alpha' = 2(x + i) alpha + theta` with `alpha(0) = alpha0`.
pub fn riccati_value(theta: &Symbol, alpha0: Complex64, h: f64, x: f64) -> Result<LogComplex> {
    let j = osc_segment(theta, 0.0, x, h)?.value.mul(LogComplex::new(-h.ln(), 0.0));
    let inner = LogComplex::from_complex(alpha0).add(j);
    let p = phi(x, h);
    Ok(inner.mul(LogComplex::new(p.re, p.im)))
}

/// The `alpha0` making `alpha(L) = 0`: `-h^{-1} int_0^L exp(-Phi) theta`.
pub fn optimal_alpha0(theta: &Symbol, h: f64, l: f64) -> Result<LogComplex> {
    Ok(osc_segment(theta, 0.0, l, h)?
        .value
        .mul(LogComplex::new(-h.ln(), PI)))
}

/// Solves the scalar Riccati equation on `n + 1` equispaced points of
/// `[-L, L]` and cross-checks against direct integration.
pub fn riccati_scalar(theta: &Symbol, alpha0: Complex64, h: f64, l: f64, n: usize) -> Result<RiccatiScalar> {
    if !(h > 0.0) || !(l > 0.0) || n < 2 {
        return Err(Error::Domain("riccati_scalar needs h > 0, L > 0 and n >= 2".into()));
    }
    let xs: Vec<f64> = (0..=n).map(|k| -l + 2.0 * l * k as f64 / n as f64).collect();
    let points = xs
        .par_iter()
        .map(|&x| {
            let v = riccati_value(theta, alpha0, h, x)?;
            Ok(RiccatiPoint {
                x,
                log_abs: v.log_magnitude,
                arg: v.phase,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ode_deviation = ode_cross_check(theta, h, &points)?;
    Ok(RiccatiScalar {
        h,
        l,
        alpha0,
        points,
        ode_deviation,
    })
}

fn ode_cross_check(theta: &Symbol, h: f64, points: &[RiccatiPoint]) -> Result<Option<f64>> {
    let limit = 1e10f64.ln();
    let mut worst: Option<f64> = None;
    let mut i = 0;
    while i < points.len() {
        if points[i].log_abs > limit {
            i += 1;
            continue;
        }
        let start = i;
        while i < points.len() && points[i].log_abs <= limit {
            i += 1;
        }
        if i - start < 2 {
            continue;
        }
        let run = &points[start..i];
        let y0 = CVec::<1>::new(LogComplex::new(run[0].log_abs, run[0].arg).to_complex());
        let rhs = |x: f64, a: &CVec<1>| {
            CVec::<1>::new((2.0 * Complex64::new(x, 1.0) * a[0] + theta.eval(x)) / h)
        };
        let opts = Dop853Options {
            rtol: 1e-12,
            atol: 1e-14,
            ..Default::default()
        };
        let mut solver = Dop853::new(rhs, run[0].x, y0, opts);
        for p in &run[1..] {
            solver.advance_to(p.x)?;
            let exact = LogComplex::new(p.log_abs, p.arg).to_complex();
            let dev = (solver.y()[0] - exact).norm() / (1.0 + exact.norm());
            worst = Some(worst.map_or(dev, |w: f64| w.max(dev)));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Unbounded,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VerdictRow {
    pub h: f64,
    /// `log sup_x |I(x, h)| / (h exp(-x^2/h))`.
    pub log_sup_ratio: f64,
    pub x_at_sup: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConjugatorVerdict {
    pub verdict: Verdict,
    pub l: f64,
    pub margin: f64,
    /// Rows ordered by decreasing `h`.
    pub evidence: Vec<VerdictRow>,
    /// Slope of `log sup ratio` against `1/h` over the finest three rows.
    pub growth_rate: f64,
    /// Grid-based evidence, not a proof.
    pub kind: String,
}

/// Bounded-conjugator test for the triangular model system.
pub fn conjugator_verdict(theta: &Symbol, l: f64, h_grid: &[f64], nx: usize) -> Result<ConjugatorVerdict> {
    if h_grid.len() < 3 || nx == 0 || !(l > 0.0) {
        return Err(Error::Domain("conjugator_verdict needs three h values, nx >= 1 and L > 0".into()));
    }
    let mut hs = h_grid.to_vec();
    hs.sort_by(|a, b| b.total_cmp(a));
    let xs: Vec<f64> = (1..=nx).map(|k| l * k as f64 / nx as f64).collect();
    let evidence = hs
        .par_iter()
        .map(|&h| {
            let mut best = (f64::NEG_INFINITY, 0.0);
            for &x in &xs {
                let v = osc_integral_log(theta, x, h)?.value;
                let r = v.log_magnitude - h.ln() + x * x / h;
                if r > best.0 {
                    best = (r, x);
                }
            }
            Ok(VerdictRow {
                h,
                log_sup_ratio: best.0,
                x_at_sup: best.1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let margin = 10.0f64;
    let s0 = evidence[0].log_sup_ratio;
    let smax = evidence.iter().map(|r| r.log_sup_ratio).fold(f64::NEG_INFINITY, f64::max);
    let m = evidence.len();
    let tail = &evidence[m - 3..];
    let increasing = tail.windows(2).all(|w| w[1].log_sup_ratio > w[0].log_sup_ratio);
    let verdict = if smax <= s0 + margin.ln() {
        Verdict::Bounded
    } else if evidence[m - 1].log_sup_ratio > s0 + margin.ln() && increasing {
        Verdict::Unbounded
    } else {
        Verdict::Inconclusive
    };
    let growth_rate = (tail[2].log_sup_ratio - tail[0].log_sup_ratio) / (1.0 / tail[2].h - 1.0 / tail[0].h);
    Ok(ConjugatorVerdict {
        verdict,
        l,
        margin,
        evidence,
        growth_rate,
        kind: "numerical evidence on a finite (x, h) grid".into(),
    })
}

/// Coefficient `C(x)` of `h W' = C W` sampled on Chebyshev nodes, with the
/// first `n1` components forming the leading block.
#[derive(Debug, Clone)]
pub struct RiccatiBlocks {
    pub h: f64,
    pub n1: usize,
    /// Order of the original off-diagonal perturbation.
    pub p: i32,
    pub interval: (f64, f64),
    pub nodes: Vec<f64>,
    pub coefficients: Vec<DMatrix<Complex64>>,
    /// Accumulated conjugator `T`, with `W = T Z`.
    pub conjugator: Vec<DMatrix<Complex64>>,
    pub iterations: usize,
}

impl RiccatiBlocks {
    /// Samples `C(x) = blockdiag(A11, A22)(x) + h^p Theta(x)`.
    pub fn sample<A, B, T>(a11: A, a22: B, theta: T, p: i32, h: f64, interval: (f64, f64), degree: usize) -> Self
    where
        A: Fn(f64) -> DMatrix<Complex64>,
        B: Fn(f64) -> DMatrix<Complex64>,
        T: Fn(f64) -> DMatrix<Complex64>,
    {
        let nodes = cheb::nodes(degree, interval.0, interval.1);
        let coefficients: Vec<DMatrix<Complex64>> = nodes
            .iter()
            .map(|&x| {
                let (m1, m2) = (a11(x), a22(x));
                let (n1, n2) = (m1.nrows(), m2.nrows());
                let mut c = theta(x) * Complex64::new(h.powi(p), 0.0);
                let mut v = c.view_mut((0, 0), (n1, n1));
                v += &m1;
                let mut v = c.view_mut((n1, n1), (n2, n2));
                v += &m2;
                c
            })
            .collect();
        let n1 = a11(nodes[0]).nrows();
        let n = coefficients[0].nrows();
        Self {
            h,
            n1,
            p,
            interval,
            conjugator: vec![DMatrix::identity(n, n); nodes.len()],
            nodes,
            coefficients,
            iterations: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.coefficients[0].nrows()
    }

    /// Largest Frobenius norm of the off-diagonal blocks over the nodes.
    pub fn off_diagonal_residual(&self) -> f64 {
        let (n1, n) = (self.n1, self.dim());
        self.coefficients
            .iter()
            .map(|c| {
                let a = c.view((0, n1), (n1, n - n1)).norm();
                let b = c.view((n1, 0), (n - n1, n1)).norm();
                (a * a + b * b).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

fn derivative(values: &[DMatrix<Complex64>], d: &DMatrix<f64>) -> Vec<DMatrix<Complex64>> {
    let m = values.len();
    (0..m)
        .map(|i| {
            let mut acc = DMatrix::<Complex64>::zeros(values[0].nrows(), values[0].ncols());
            for j in 0..m {
                acc += &values[j] * Complex64::new(d[(i, j)], 0.0);
            }
            acc
        })
        .collect()
}

/// One conjugation step: Sylvester solve for the off-diagonal corrector at
/// each node, then `C <- T^{-1} (C T - h T')` with `T = I + Y`.
fn block_step(b: &RiccatiBlocks, d: &DMatrix<f64>) -> Result<RiccatiBlocks> {
    let (n1, n) = (b.n1, b.dim());
    let n2 = n - n1;
    let ys = b
        .nodes
        .iter()
        .zip(&b.coefficients)
        .map(|(&x, c)| {
            let d11 = c.view((0, 0), (n1, n1)).into_owned();
            let d22 = c.view((n1, n1), (n2, n2)).into_owned();
            let f12 = -c.view((0, n1), (n1, n2)).into_owned();
            let f21 = -c.view((n1, 0), (n2, n1)).into_owned();
            let y12 = solve_sylvester(&d11, &d22, &f12).ok_or(Error::Sylvester { x })?;
            let y21 = solve_sylvester(&d22, &d11, &f21).ok_or(Error::Sylvester { x })?;
            let mut y = DMatrix::<Complex64>::zeros(n, n);
            y.view_mut((0, n1), (n1, n2)).copy_from(&y12);
            y.view_mut((n1, 0), (n2, n1)).copy_from(&y21);
            Ok(y)
        })
        .collect::<Result<Vec<_>>>()?;
    let dy = derivative(&ys, d);
    let h = Complex64::new(b.h, 0.0);
    let mut coefficients = Vec::with_capacity(ys.len());
    let mut conjugator = Vec::with_capacity(ys.len());
    for (k, (y, c)) in ys.iter().zip(&b.coefficients).enumerate() {
        let t = DMatrix::<Complex64>::identity(n, n) + y;
        let t_inv = t
            .clone()
            .try_inverse()
            .ok_or(Error::Sylvester { x: b.nodes[k] })?;
        coefficients.push(&t_inv * (c * &t - &dy[k] * h));
        conjugator.push(&b.conjugator[k] * &t);
    }
    Ok(RiccatiBlocks {
        coefficients,
        conjugator,
        iterations: b.iterations + 1,
        ..b.clone()
    })
}

#[derive(Debug, Clone)]
pub struct BlockIteration {
    pub blocks: RiccatiBlocks,
    /// Off-diagonal residual before the first and after each iteration.
    pub residuals: Vec<f64>,
}

/// Applies `iterations` block-diagonalising conjugations.
pub fn riccati_block_iterate(blocks: &RiccatiBlocks, iterations: usize) -> Result<BlockIteration> {
    let m = blocks.nodes.len() - 1;
    let d = cheb::diff_matrix(m, blocks.interval.0, blocks.interval.1);
    let mut current = blocks.clone();
    let mut residuals = vec![current.off_diagonal_residual()];
    for _ in 0..iterations {
        if residuals.last().copied() == Some(0.0) {
            residuals.push(0.0);
            continue;
        }
        current = block_step(&current, &d)?;
        residuals.push(current.off_diagonal_residual());
    }
    Ok(BlockIteration {
        blocks: current,
        residuals,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResidualRow {
    pub h: f64,
    pub iteration: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderReport {
    pub rows: Vec<ResidualRow>,
    /// Fitted log-log slope of the residual against `h`, per iteration count.
    pub orders: Vec<f64>,
    /// `orders[k] - orders[k - 1]`.
    pub gains: Vec<f64>,
}

/// Residual orders of the block iteration over `h_grid`.
pub fn block_order_report<F>(build: F, h_grid: &[f64], iterations: usize) -> Result<OrderReport>
where
    F: Fn(f64) -> RiccatiBlocks + Sync,
{
    let runs = h_grid
        .par_iter()
        .map(|&h| riccati_block_iterate(&build(h), iterations).map(|r| (h, r.residuals)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (h, res) in &runs {
        for (k, &r) in res.iter().enumerate() {
            rows.push(ResidualRow {
                h: *h,
                iteration: k,
                residual: r,
            });
        }
    }
    let mut orders = Vec::with_capacity(iterations + 1);
    for k in 0..=iterations {
        let pts: Vec<(f64, f64)> = runs
            .iter()
            .filter(|(_, r)| r[k] > 0.0)
            .map(|(h, r)| (h.ln(), r[k].ln()))
            .collect();
        if pts.len() < 2 {
            orders.push(f64::NAN);
            continue;
        }
        let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let c = crate::numerics::fit::polyfit(&x, &y, 1)
            .ok_or_else(|| Error::Domain("order fit failed".into()))?;
        orders.push(c[1]);
    }
    let gains = orders.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(OrderReport { rows, orders, gains })
}

/// Synthetic 2+2 system with constant separated diagonal blocks and a smooth
/// full perturbation, on `[-1, 1]`.
pub fn synthetic_two_plus_two(h: f64, degree: usize) -> RiccatiBlocks {
    let c = Complex64::new;
    let a11 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.5), c(0.3, 0.0), c(-0.2, 0.0), c(2.0, -0.3)]);
    let a22 = DMatrix::from_row_slice(2, 2, &[c(-1.0, 0.2), c(0.4, 0.0), c(0.1, 0.0), c(-2.0, 0.4)]);
    RiccatiBlocks::sample(
        move |_| a11.clone(),
        move |_| a22.clone(),
        |x| {
            DMatrix::from_fn(4, 4, |i, j| {
                let (fi, fj) = (i as f64, j as f64);
                ((fi + 1.0) * x * 0.7 + fj).cos() * (0.5 + 0.1 * fi)
                    + I * (0.3 * x * (fj + 1.0) - 0.2 * fi).sin()
            })
        },
        1,
        h,
        (-1.0, 1.0),
        degree,
    )
}
