//! Multi-dimensional (d = 2) Evans-Lopatinski determinant for planar ZND
//! fronts in Eulerian coordinates, `W = (rho, rho u1, rho u2, rho E, rho z)`.
//!
//! Unburned gas enters from `x < 0` with `rho = 1`, `u1 = 1`; the reaction
//! tail occupies `x > 0`. The dual equation
//! `Z' = A1^{-T} (lambda + i xi A2 - E)^T Z` is integrated from the burned
//! end toward `x = 0+` in `s = ln z`, where `dx/ds = -tau / (k phi)`.

use crate::atlas::Evaluator;
use crate::error::{Error, Result};
use crate::numerics::linalg::{c, eigenvalues, null_vector, CMat};
use crate::numerics::logval::LogComplex;
use crate::numerics::ode::{CVec, Dop853, Dop853Options};
use crate::numerics::quad::{gauss_legendre, integrate_gk};
use crate::profile::{arrhenius, q_cj, ChemParams, GridControl, GasState};
use crate::evans1d::{EvansControls, EvansValue, TAIL_TOLERANCE};
use nalgebra::{Matrix5, Vector5};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Vec5 = Vector5<f64>;
pub type Mat5 = Matrix5<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerState {
    pub x: f64,
    pub rho: f64,
    pub u1: f64,
    pub u2: f64,
    pub e: f64,
    pub z: f64,
    pub p: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub phi: f64,
}

impl EulerState {
    #[allow(clippy::too_many_arguments)]
    pub fn from_primitive(x: f64, rho: f64, u1: f64, u2: f64, e: f64, z: f64, params: &ChemParams) -> Self {
        let temperature = e / params.specific_heat;
        Self {
            x,
            rho,
            u1,
            u2,
            e,
            z,
            p: params.gamma * rho * e,
            temperature,
            phi: arrhenius(temperature, params.activation),
        }
    }

    pub fn from_conserved(w: &Vec5, params: &ChemParams) -> Self {
        let rho = w[0];
        let (u1, u2) = (w[1] / rho, w[2] / rho);
        let e = w[3] / rho - 0.5 * (u1 * u1 + u2 * u2);
        Self::from_primitive(0.0, rho, u1, u2, e, w[4] / rho, params)
    }

    /// Lagrangian state seen in the rest frame of the front, mirrored so
    /// that the flow runs toward `+x`.
    pub fn from_lagrangian(s: &GasState, x: f64) -> Self {
        Self {
            x,
            rho: 1.0 / s.tau,
            u1: s.tau,
            u2: 0.0,
            e: s.e,
            z: s.z,
            p: s.p,
            temperature: s.temperature,
            phi: s.phi,
        }
    }

    pub fn unburned(params: &ChemParams) -> Self {
        Self::from_primitive(0.0, 1.0, 1.0, 0.0, params.e_plus, 1.0, params)
    }

    /// Specific total energy `e + |u|^2 / 2`.
    pub fn total_energy(&self) -> f64 {
        self.e + 0.5 * (self.u1 * self.u1 + self.u2 * self.u2)
    }

    pub fn conserved(&self) -> Vec5 {
        let r = self.rho;
        Vec5::new(r, r * self.u1, r * self.u2, r * self.total_energy(), r * self.z)
    }

    pub fn flux1(&self) -> Vec5 {
        let r = self.rho;
        let h = r * self.total_energy() + self.p;
        Vec5::new(
            r * self.u1,
            r * self.u1 * self.u1 + self.p,
            r * self.u1 * self.u2,
            self.u1 * h,
            r * self.u1 * self.z,
        )
    }

    pub fn flux2(&self) -> Vec5 {
        let r = self.rho;
        let h = r * self.total_energy() + self.p;
        Vec5::new(
            r * self.u2,
            r * self.u1 * self.u2,
            r * self.u2 * self.u2 + self.p,
            self.u2 * h,
            r * self.u2 * self.z,
        )
    }

    /// `R = rho k phi z (0, 0, 0, q, -1)`.
    pub fn source(&self, params: &ChemParams) -> Vec5 {
        let w = self.rho * params.rate * self.phi * self.z;
        Vec5::new(0.0, 0.0, 0.0, params.heat_release * w, -w)
    }

    /// `c0^2 = Gamma (Gamma + 1) e`.
    pub fn sound_speed_sq(&self, gamma: f64) -> f64 {
        gamma * (gamma + 1.0) * self.e
    }

    /// `c0^2 - u1^2`, positive behind a Lax shock.
    pub fn subsonic_gap(&self, gamma: f64) -> f64 {
        self.sound_speed_sq(gamma) - self.u1 * self.u1
    }
}

/// Tail state from the three conserved flux constants at reactant fraction
/// `z` (smaller root of the momentum/energy quadratic).
pub fn flux_state(z: f64, params: &ChemParams) -> Result<EulerState> {
    let g = params.gamma;
    let ep = params.e_plus;
    let q = params.heat_release;
    let mom = 1.0 + g * ep;
    let hc = (g + 1.0) * ep + 0.5 + q;
    let b = (g + 1.0) * mom;
    let disc = b * b - 2.0 * g * (g + 2.0) * (hc - q * z);
    if disc < 0.0 {
        return Err(Error::Domain(format!(
            "negative discriminant {disc:e} at z = {z}: heat release violates q <= q_cj"
        )));
    }
    let u1 = (b - disc.sqrt()) / (g + 2.0);
    let e = u1 * (mom - u1) / g;
    Ok(EulerState::from_primitive(0.0, 1.0 / u1, u1, 0.0, e, z, params))
}

/// `dx/ds` along the tail in `s = ln z`.
fn dx_ds(st: &EulerState, params: &ChemParams) -> f64 {
    -1.0 / (st.rho * params.rate * st.phi)
}

fn x_between(z_lo: f64, z_hi: f64, params: &ChemParams) -> Result<f64> {
    flux_state(z_lo, params)?;
    flux_state(z_hi, params)?;
    let (v, _) = integrate_gk(
        |s| {
            let st = flux_state(s.exp(), params).expect("validated range");
            c(-dx_ds(&st, params), 0.0)
        },
        z_lo.ln(),
        z_hi.ln(),
        0.0,
        1e-14,
        4000,
    );
    Ok(v.re)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiDProfile {
    pub params: ChemParams,
    pub z_min: f64,
    /// Ordered by increasing `x` on `[0, M]`.
    pub grid: Vec<EulerState>,
    pub unburned: EulerState,
    pub neumann: EulerState,
    pub domain_length: f64,
}

pub fn eulerian_profile(params: &ChemParams, z_min: f64, grid: GridControl) -> Result<MultiDProfile> {
    params.validate()?;
    let qcj = q_cj(params.gamma, params.e_plus)?;
    if params.heat_release >= qcj {
        return Err(Error::DegenerateProfile { q_cj: qcj });
    }
    if !(z_min > 0.0 && z_min < 1.0) {
        return Err(Error::Domain(format!("z_min must lie in (0, 1), got {z_min}")));
    }
    let n = grid.intervals.max(2);
    let lz = z_min.ln();
    let zs: Vec<f64> = (0..=n)
        .map(|i| if i == 0 { 1.0 } else { (lz * i as f64 / n as f64).exp() })
        .collect();
    let mut pts = Vec::with_capacity(n + 1);
    let mut x = 0.0;
    for i in 0..=n {
        if i > 0 {
            x += x_between(zs[i], zs[i - 1], params)?;
        }
        let mut st = flux_state(zs[i], params)?;
        st.x = x;
        pts.push(st);
    }
    let neumann = pts[0];
    Ok(MultiDProfile {
        params: *params,
        z_min,
        domain_length: x,
        grid: pts,
        unburned: EulerState::unburned(params),
        neumann,
    })
}

impl MultiDProfile {
    /// Largest deviation of the grid from the Lagrangian closed form mapped to
    /// Eulerian variables at equal `z`.
    pub fn lagrangian_mismatch(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in &self.grid {
            let l = EulerState::from_lagrangian(&GasState::at(p.z, &self.params)?, p.x);
            let d = (p.conserved() - l.conserved()).amax() / l.conserved().amax();
            worst = worst.max(d);
        }
        Ok(worst)
    }

    pub fn burned(&self) -> Result<EulerState> {
        flux_state(0.0, &self.params)
    }

    /// Profile state at position `x` in `[0, M]`.
    pub fn state_at(&self, x: f64) -> Result<EulerState> {
        let m = self.domain_length;
        if !(0.0..=m).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, {m}]")));
        }
        let i = self.grid.partition_point(|p| p.x <= x).clamp(1, self.grid.len() - 1) - 1;
        let (a, b) = (self.grid[i], self.grid[i + 1]);
        let (s_hi, s_lo) = (a.z.ln(), b.z.ln());
        let (gx, gw) = gauss_legendre(12);
        let params = self.params;
        // x(s) for s in [s_lo, s_hi], measured from node a.
        let x_of = |s: f64| -> f64 {
            let half = 0.5 * (s_hi - s);
            let mid = 0.5 * (s_hi + s);
            let mut acc = 0.0;
            for (t, w) in gx.iter().zip(&gw) {
                let st = flux_state((mid + half * t).exp(), &params).expect("profile range");
                acc += w * -dx_ds(&st, &params);
            }
            a.x + acc * half
        };
        let (mut lo, mut hi) = (s_lo, s_hi);
        let mut s = s_hi + (s_lo - s_hi) * (x - a.x) / (b.x - a.x).max(f64::MIN_POSITIVE);
        for _ in 0..60 {
            let f = x_of(s) - x;
            if f > 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let st = flux_state(s.exp(), &params)?;
            let mut next = s - f / dx_ds(&st, &params);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() <= 1e-15 * (1.0 + s.abs()) {
                s = next;
                break;
            }
            s = next;
        }
        let mut st = flux_state(s.exp(), &params)?;
        st.x = x;
        Ok(st)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiDCoeffs {
    pub a1: Mat5,
    pub a2: Mat5,
    pub e: Mat5,
    /// `E = r g^T` with `r = (0, 0, 0, q, -1)`.
    pub g: Vec5,
    pub a1_inv: Mat5,
}

/// Flux Jacobians `(A1, A2)` of the gas dynamics and species transport.
pub fn flux_jacobians(s: &EulerState, gamma: f64) -> (Mat5, Mat5) {
    let gm = gamma;
    let (u1, u2, z) = (s.u1, s.u2, s.z);
    let k2 = u1 * u1 + u2 * u2;
    let h = s.total_energy() + s.p / s.rho;
    let pk = 0.5 * gm * k2;
    #[rustfmt::skip]
    let a1 = Mat5::from_row_slice(&[
        0.0, 1.0, 0.0, 0.0, 0.0,
        -u1 * u1 + pk, (2.0 - gm) * u1, -gm * u2, gm, 0.0,
        -u1 * u2, u2, u1, 0.0, 0.0,
        u1 * (pk - h), h - gm * u1 * u1, -gm * u1 * u2, u1 * (1.0 + gm), 0.0,
        -u1 * z, z, 0.0, 0.0, u1,
    ]);
    #[rustfmt::skip]
    let a2 = Mat5::from_row_slice(&[
        0.0, 0.0, 1.0, 0.0, 0.0,
        -u1 * u2, u2, u1, 0.0, 0.0,
        -u2 * u2 + pk, -gm * u1, (2.0 - gm) * u2, gm, 0.0,
        u2 * (pk - h), -gm * u1 * u2, h - gm * u2 * u2, u2 * (1.0 + gm), 0.0,
        -u2 * z, 0.0, z, 0.0, u2,
    ]);
    (a1, a2)
}

pub fn multid_jacobians(s: &EulerState, params: &ChemParams) -> Result<MultiDCoeffs> {
    let (a1, a2) = flux_jacobians(s, params.gamma);
    let (u1, u2, z) = (s.u1, s.u2, s.z);
    let k2 = u1 * u1 + u2 * u2;
    let k = params.rate;
    let dphi = if params.activation == 0.0 {
        0.0
    } else {
        s.phi * params.activation / (s.temperature * s.temperature)
    };
    let scale = k * s.rho * z * dphi / params.specific_heat;
    let r = s.rho;
    let de = Vec5::new((k2 - s.total_energy()) / r, -u1 / r, -u2 / r, 1.0 / r, 0.0);
    let mut g = de * scale;
    g[4] += k * s.phi;
    let rv = Vec5::new(0.0, 0.0, 0.0, params.heat_release, -1.0);
    let a1_inv = a1
        .try_inverse()
        .ok_or_else(|| Error::SingularJacobian(format!("A1 singular at u1 = {u1}")))?;
    Ok(MultiDCoeffs {
        a1,
        a2,
        e: rv * g.transpose(),
        g,
        a1_inv,
    })
}

/// `sqrt(lambda^2 + b)` for `b >= 0` as `sqrt(lambda - i a) sqrt(lambda + i a)`,
/// `a = sqrt(b)`: equal to the principal root on `Re lambda > 0`, continuous
/// onto the imaginary axis, with cuts running left from the branch points.
pub fn acoustic_root(lambda: Complex64, b: f64) -> Complex64 {
    let a = b.max(0.0).sqrt();
    (lambda - c(0.0, a)).sqrt() * (lambda + c(0.0, a)).sqrt()
}

/// Decaying acoustic rate `-(lambda u1 + c0 s) / (c0^2 - u1^2)`,
/// `s = sqrt(lambda^2 + (c0^2 - u1^2) xi^2)`.
pub fn decaying_rate(st: &EulerState, gamma: f64, lambda: Complex64, xi: f64) -> Complex64 {
    let gap = st.subsonic_gap(gamma);
    let c0 = st.sound_speed_sq(gamma).sqrt();
    let s = acoustic_root(lambda, gap * xi * xi);
    -(lambda * st.u1 + s * c0) / gap
}

/// `-G^T = A1^{-T} (lambda + i xi A2 - E)^T`.
pub fn dual_matrix(lin: &MultiDCoeffs, lambda: Complex64, xi: f64) -> CMat<5> {
    let inner = CMat::<5>::from_fn(|i, j| {
        let d = if i == j { lambda } else { c(0.0, 0.0) };
        d + c(-lin.e[(i, j)], xi * lin.a2[(i, j)])
    });
    let ainv = lin.a1_inv.map(|x| c(x, 0.0));
    (inner * ainv).transpose()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualMode {
    /// Rate `mu` of `Z = exp(mu x) v` as `x -> +inf`, `Re mu < 0`.
    pub rate: Complex64,
    pub vector: CVec<5>,
}

/// Fix the scale of a complex vector so that its largest component is real
/// and positive and its norm is 1.
fn canonical(v: CVec<5>) -> CVec<5> {
    let j = v.icamax();
    let ph = v[j] / v[j].norm();
    v / (ph * v.norm())
}

#[derive(Debug, Clone)]
pub struct EvansMultiD {
    pub params: ChemParams,
    pub controls: EvansControls,
    unburned: EulerState,
    neumann: EulerState,
    burned: EulerState,
    burned_lin: MultiDCoeffs,
}

impl EvansMultiD {
    pub fn new(params: &ChemParams, controls: EvansControls) -> Result<Self> {
        params.validate()?;
        let qcj = q_cj(params.gamma, params.e_plus)?;
        if params.heat_release >= qcj {
            return Err(Error::DegenerateProfile { q_cj: qcj });
        }
        let burned = flux_state(0.0, params)?;
        let neumann = flux_state(1.0, params)?;
        if burned.subsonic_gap(params.gamma) <= 0.0 || neumann.subsonic_gap(params.gamma) <= 0.0 {
            return Err(Error::Domain("Lax condition c0^2 > u1^2 fails on the tail".into()));
        }
        let burned_lin = multid_jacobians(&burned, params)?;
        let tail = multid_jacobians(&flux_state(controls.z_min, params)?, params)?;
        let residual = ((tail.a1 - burned_lin.a1).norm()
            + (tail.a2 - burned_lin.a2).norm()
            + (tail.e - burned_lin.e).norm())
            / (burned_lin.a1.norm() + burned_lin.a2.norm() + burned_lin.e.norm());
        if residual > TAIL_TOLERANCE {
            return Err(Error::Truncation {
                residual,
                tolerance: TAIL_TOLERANCE,
            });
        }
        Ok(Self {
            params: *params,
            controls,
            unburned: EulerState::unburned(params),
            neumann,
            burned,
            burned_lin,
        })
    }

    pub fn burned_state(&self) -> EulerState {
        self.burned
    }

    pub fn neumann_state(&self) -> EulerState {
        self.neumann
    }

    pub fn unburned_state(&self) -> EulerState {
        self.unburned
    }

    fn raw_mode(&self, lambda: Complex64, xi: f64) -> Result<(Complex64, CVec<5>)> {
        let m = dual_matrix(&self.burned_lin, lambda, xi);
        let mu = decaying_rate(&self.burned, self.params.gamma, lambda, xi);
        let (v, rel) = null_vector(&(m - CMat::<5>::identity() * mu));
        if !(rel < 1e-8) {
            return Err(Error::ModeCount {
                lambda,
                spectrum: eigenvalues(&m)?,
            });
        }
        Ok((mu, v))
    }

    /// Decaying dual mode at the burned state, normalised against the mode at
    /// `lambda = 1` (analytic in `lambda`). The mode count is checked at
    /// `lambda` or, off the open right half-plane, at a real shift of it.
    pub fn dual_mode(&self, lambda: Complex64, xi: f64) -> Result<DualMode> {
        let probe = if lambda.re > 1e-6 * (1.0 + lambda.norm()) {
            lambda
        } else {
            c(lambda.re.max(0.0) + 1e-2 * (1.0 + lambda.norm()), lambda.im)
        };
        let m = dual_matrix(&self.burned_lin, probe, xi);
        let spectrum = eigenvalues(&m)?;
        let mu = decaying_rate(&self.burned, self.params.gamma, probe, xi);
        let neg: Vec<&Complex64> = spectrum.iter().filter(|z| z.re < 0.0).collect();
        if neg.len() != 1 || (neg[0] - mu).norm() > 1e-8 * (1.0 + mu.norm()) {
            return Err(Error::ModeCount {
                lambda,
                spectrum,
            });
        }
        let (_, reference) = self.raw_mode(c(1.0, 0.0), xi)?;
        let reference = canonical(reference);
        let (rate, v) = self.raw_mode(lambda, xi)?;
        let proj = reference.dotc(&v);
        Ok(DualMode { rate, vector: v / proj })
    }

    /// Rescaled dual solution `exp(-mu x) Z` at `x = 0+`, as vector and log
    /// scale.
    pub fn dual_at_front(&self, lambda: Complex64, xi: f64) -> Result<(CVec<5>, f64)> {
        let mode = self.dual_mode(lambda, xi)?;
        let mu = mode.rate;
        let params = self.params;
        let rhs = move |s: f64, y: &CVec<5>| -> CVec<5> {
            let st = flux_state(s.exp(), &params).expect("validated profile");
            let lin = multid_jacobians(&st, &params).expect("noncharacteristic profile");
            let m = dual_matrix(&lin, lambda, xi);
            (m * y - y * mu) * c(dx_ds(&st, &params), 0.0)
        };
        let opts = Dop853Options {
            rtol: self.controls.rtol,
            atol: self.controls.atol,
            max_steps: self.controls.max_steps,
            renormalize: true,
            ..Default::default()
        };
        let mut solver = Dop853::new(rhs, self.controls.z_min.ln(), mode.vector, opts);
        solver.advance_to(0.0)?;
        Ok((*solver.y(), solver.log_scale()))
    }

    /// `lambda [W] + i xi [F2] + R(W)(0+)` with `[h] = h(0-) - h(0+)`.
    pub fn boundary_vector(&self, lambda: Complex64, xi: f64) -> CVec<5> {
        let jw = self.unburned.conserved() - self.neumann.conserved();
        let jf = self.unburned.flux2() - self.neumann.flux2();
        let r = self.neumann.source(&self.params);
        CVec::<5>::from_fn(|i, _| lambda * jw[i] + c(0.0, xi * jf[i]) + r[i])
    }

    pub fn evaluate(&self, lambda: Complex64, xi: f64) -> Result<EvansValue> {
        let (y, ls) = self.dual_at_front(lambda, xi)?;
        let b = self.boundary_vector(lambda, xi);
        Ok(LogComplex::from_scaled(y.dot(&b), ls))
    }

    /// Evaluator in `lambda` at a fixed transverse wavenumber.
    pub fn at_wavenumber(&self, xi: f64) -> AtWavenumber<'_> {
        AtWavenumber { inner: self, xi }
    }
}

pub struct AtWavenumber<'a> {
    inner: &'a EvansMultiD,
    pub xi: f64,
}

impl Evaluator for AtWavenumber<'_> {
    fn eval(&self, lambda: Complex64) -> Result<LogComplex> {
        self.inner.evaluate(lambda, self.xi)
    }

    fn is_real(&self) -> bool {
        self.xi == 0.0
    }
}

/// `D(lambda, xi)` for one query; see [`EvansMultiD`] for repeated use.
pub fn evans_multid(lambda: Complex64, xi: f64, params: &ChemParams, controls: EvansControls) -> Result<EvansValue> {
    EvansMultiD::new(params, controls)?.evaluate(lambda, xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linalg::eigenvalues_dyn;

    fn params() -> ChemParams {
        ChemParams::new(0.2, 6.23e-2, 6.23e-1, 6.0, 1.0)
            .with_unit_half_length()
            .unwrap()
    }

    fn fd(f: impl Fn(&Vec5) -> Vec5, w: &Vec5) -> Mat5 {
        let mut m = Mat5::zeros();
        for j in 0..5 {
            let h = 1e-6 * w[j].abs().max(1e-2);
            let (mut wp, mut wm) = (*w, *w);
            wp[j] += h;
            wm[j] -= h;
            m.set_column(j, &((f(&wp) - f(&wm)) / (2.0 * h)));
        }
        m
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let p = params();
        for z in [1.0, 0.4, 0.02] {
            let mut st = flux_state(z, &p).unwrap();
            // A nonzero transverse velocity exercises every entry.
            st.u2 = 0.13;
            let st = EulerState::from_conserved(&st.conserved(), &p);
            let lin = multid_jacobians(&st, &p).unwrap();
            let w = st.conserved();
            let f1 = fd(|w| EulerState::from_conserved(w, &p).flux1(), &w);
            let f2 = fd(|w| EulerState::from_conserved(w, &p).flux2(), &w);
            let fr = fd(|w| EulerState::from_conserved(w, &p).source(&p), &w);
            assert!((f1 - lin.a1).amax() <= 1e-7 * lin.a1.amax());
            assert!((f2 - lin.a2).amax() <= 1e-7 * lin.a2.amax());
            assert!((fr - lin.e).amax() <= 1e-7 * lin.e.amax());
        }
    }

    #[test]
    fn a1_speeds_are_characteristic() {
        let p = params();
        for z in [1.0, 0.5, 0.0] {
            let st = flux_state(z, &p).unwrap();
            let lin = multid_jacobians(&st, &p).unwrap();
            let mut ev: Vec<f64> = eigenvalues_dyn(&crate::numerics::linalg::to_dyn(&lin.a1.map(|x| c(x, 0.0))))
                .unwrap()
                .iter()
                .map(|z| z.re)
                .collect();
            ev.sort_by(f64::total_cmp);
            let c0 = st.sound_speed_sq(p.gamma).sqrt();
            let want = [st.u1 - c0, st.u1, st.u1, st.u1, st.u1 + c0];
            for (a, b) in ev.iter().zip(want) {
                assert!((a - b).abs() < 1e-10, "{ev:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn zero_heat_release_decouples_species() {
        let p = ChemParams { heat_release: 0.0, ..params() };
        let lin = multid_jacobians(&flux_state(0.3, &p).unwrap(), &p).unwrap();
        assert_eq!(lin.e.fixed_view::<4, 5>(0, 0).amax(), 0.0);
    }

    #[test]
    fn profile_matches_lagrangian_and_conserves_fluxes() {
        let p = params();
        let prof = eulerian_profile(&p, 1e-8, GridControl { intervals: 60 }).unwrap();
        assert!(prof.lagrangian_mismatch().unwrap() < 1e-12);
        let f0 = prof.unburned.flux1();
        for st in &prof.grid {
            let f = st.flux1();
            assert!((f[0] - f0[0]).abs() < 1e-12);
            assert!((f[1] - f0[1]).abs() < 1e-12);
            let energy = f[3] + p.heat_release * st.z;
            assert!((energy - f0[3] - p.heat_release).abs() < 1e-12);
            assert!(st.subsonic_gap(p.gamma) > 0.0);
        }
        let mid = prof.grid[30];
        let back = prof.state_at(mid.x).unwrap();
        assert!((back.z - mid.z).abs() <= 1e-12 * mid.z);
    }

    #[test]
    fn dual_mode_is_the_decaying_eigenpair() {
        let ev = EvansMultiD::new(&params(), EvansControls::default()).unwrap();
        for (lam, xi) in [(c(1.0, 0.0), 0.0), (c(0.5, 2.0), 1.5), (c(2.0, -3.0), -4.0)] {
            let m = dual_matrix(&ev.burned_lin, lam, xi);
            let mode = ev.dual_mode(lam, xi).unwrap();
            assert!(mode.rate.re < 0.0);
            let res = m * mode.vector - mode.vector * mode.rate;
            assert!(res.norm() <= 1e-10 * mode.vector.norm() * (1.0 + m.norm()));
        }
    }

    #[test]
    fn transverse_reflection_symmetry() {
        let ev = EvansMultiD::new(&params(), EvansControls::default()).unwrap();
        let lam = c(0.4, 1.1);
        let a = ev.evaluate(lam, 0.7).unwrap().to_complex();
        let b = ev.evaluate(lam.conj(), -0.7).unwrap().to_complex();
        assert!((a - b.conj()).norm() <= 1e-9 * a.norm());
        let d0 = ev.evaluate(lam, 0.0).unwrap().to_complex();
        let d1 = ev.evaluate(lam.conj(), 0.0).unwrap().to_complex();
        assert!((d0 - d1.conj()).norm() <= 1e-9 * d0.norm());
    }
}
