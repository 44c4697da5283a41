//! One-dimensional Evans-Lopatinski determinant in Lagrangian coordinates,
//! `W = (tau, u, E, z)`, via the dual interior equation `Y' = -G^T Y`,
//! `G = (-lambda + E) A^{-1}`.
//!
//! The dual solution is integrated in `s = ln z`, where `dx/ds = 1/(k phi)`,
//! with the growth `exp(nu x)` of the initial mode factored out.

use crate::error::{Error, Result};
use crate::numerics::linalg::{c, eigenvalues, CMat};
use crate::numerics::logval::LogComplex;
use crate::numerics::ode::{CVec, Dop853, Dop853Options};
use crate::profile::{lagrangian_flux, ChemParams, GasState};
use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type EvansValue = LogComplex;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedCoeffs {
    pub a: Matrix4<f64>,
    pub e: Matrix4<f64>,
    /// `E = r g^T` with `r = (0, 0, q, -1)`.
    pub g: Vector4<f64>,
}

/// Flux and source Jacobians at a profile state.
pub fn jacobians(s: &GasState, params: &ChemParams) -> LinearizedCoeffs {
    let gm = params.gamma;
    let (tau, u, p) = (s.tau, s.u, s.p);
    let p_tau = -p / tau;
    let p_u = -gm * u / tau;
    let p_e = gm / tau;
    #[rustfmt::skip]
    let a = Matrix4::new(
        -1.0, -1.0, 0.0, 0.0,
        p_tau, p_u - 1.0, p_e, 0.0,
        u * p_tau, p + u * p_u, u * p_e - 1.0, 0.0,
        0.0, 0.0, 0.0, -1.0,
    );
    let g = source_gradient(s, params, u);
    let r = Vector4::new(0.0, 0.0, params.heat_release, -1.0);
    LinearizedCoeffs { a, e: r * g.transpose(), g }
}

/// Gradient of `k phi(T) z` in conserved variables (shared with the
/// Eulerian module through the velocity argument).
fn source_gradient(s: &GasState, params: &ChemParams, u: f64) -> Vector4<f64> {
    let k = params.rate;
    let cv = params.specific_heat;
    let dphi = if params.activation == 0.0 {
        0.0
    } else {
        s.phi * params.activation / (s.temperature * s.temperature)
    };
    Vector4::new(0.0, -k * s.z * dphi * u / cv, k * s.z * dphi / cv, k * s.phi)
}

/// Source `R = (0, 0, q k phi z, -k phi z)`.
pub fn source(s: &GasState, params: &ChemParams) -> Vector4<f64> {
    let w = params.rate * s.phi * s.z;
    Vector4::new(0.0, 0.0, params.heat_release * w, -w)
}

pub fn conserved(s: &GasState) -> Vector4<f64> {
    Vector4::new(s.tau, s.u, s.energy(), s.z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    /// `W(0+) - W(0-)`.
    pub jump: [f64; 4],
    /// `R(W)(0-)`.
    pub source_at_front: [f64; 4],
}

impl BoundaryData {
    pub fn new(params: &ChemParams) -> Result<Self> {
        let minus = GasState::at(1.0, params)?;
        let plus = GasState::quiescent(params);
        let jump = conserved(&plus) - conserved(&minus);
        let src = source(&minus, params);
        Ok(Self {
            jump: jump.into(),
            source_at_front: src.into(),
        })
    }

    pub fn vector(&self, lambda: Complex64) -> CVec<4> {
        CVec::<4>::from_fn(|i, _| lambda * self.jump[i] + self.source_at_front[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualMode {
    /// Growth rate `nu` of `Y = exp(nu x) v` as `x -> -inf`.
    pub rate: Complex64,
    pub vector: CVec<4>,
}

/// Burned-state data from which the decaying dual mode is built in closed
/// form.
#[derive(Debug, Clone, Copy)]
struct BurnedMode {
    /// Positive eigenvalue `sigma_b - 1` of the gas block of `A`.
    a_plus: f64,
    /// Real left eigenvector of the gas block for `a_plus`, unit norm.
    left: Vector3<f64>,
    k_phi: f64,
    q: f64,
    state: GasState,
}

impl BurnedMode {
    fn new(params: &ChemParams) -> Result<Self> {
        let state = GasState::at(0.0, params)?;
        let lin = jacobians(&state, params);
        let gas: Matrix3<f64> = lin.a.fixed_view::<3, 3>(0, 0).into_owned();
        let ev = gas.transpose().complex_eigenvalues();
        let pos: Vec<f64> = ev.iter().filter(|z| z.re > 0.0).map(|z| z.re).collect();
        if pos.len() != 1 {
            return Err(Error::Domain(format!(
                "burned state is not subsonic: gas characteristic speeds {ev:?}"
            )));
        }
        let a_plus = pos[0];
        let shifted = gas.transpose() - Matrix3::identity() * a_plus;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.expect("v_t requested");
        let j = svd.singular_values.imin();
        let mut left: Vector3<f64> = vt.row(j).transpose();
        let big = left.iamax();
        if left[big] < 0.0 {
            left = -left;
        }
        left /= left.norm();
        Ok(Self {
            a_plus,
            left,
            k_phi: params.rate * state.phi,
            q: params.heat_release,
            state,
        })
    }

    fn mode(&self, lambda: Complex64) -> DualMode {
        let nu = lambda / self.a_plus;
        let v3 = c(self.left[2], 0.0);
        let v4 = self.q * self.k_phi * v3 / (lambda + nu + self.k_phi);
        DualMode {
            rate: nu,
            vector: CVec::<4>::new(c(self.left[0], 0.0), c(self.left[1], 0.0), v3, v4),
        }
    }
}

/// `-G^T` at a linearisation for frequency `lambda`.
pub fn dual_matrix(lin: &LinearizedCoeffs, lambda: Complex64) -> Result<CMat<4>> {
    let ainv = lin
        .a
        .try_inverse()
        .ok_or_else(|| Error::SingularJacobian("A not invertible".into()))?;
    let g = (lin.e.map(|x| c(x, 0.0)) - CMat::<4>::identity() * lambda) * ainv.map(|x| c(x, 0.0));
    Ok(-g.transpose())
}

fn spectral_check(lambda: Complex64, m: &CMat<4>, nu: Complex64) -> Result<()> {
    let spectrum = eigenvalues(m)?;
    let positive: Vec<&Complex64> = spectrum.iter().filter(|z| z.re > 0.0).collect();
    let scale = 1.0 + nu.norm();
    if positive.len() != 1 || (positive[0] - nu).norm() > 1e-8 * scale {
        return Err(Error::ModeCount { lambda, spectrum });
    }
    Ok(())
}

/// Decaying dual mode at the burned end state, with runtime check that it is
/// the unique eigenvalue of `-G^T(-inf)` with positive real part. Off the
/// open right half-plane the check is done at a real shift of `lambda`.
pub fn dual_init(lambda: Complex64, params: &ChemParams) -> Result<DualMode> {
    let bm = BurnedMode::new(params)?;
    let lin = jacobians(&bm.state, params);
    let probe = if lambda.re > 1e-6 * (1.0 + lambda.norm()) {
        lambda
    } else {
        c(lambda.re.max(0.0) + 1e-2 * (1.0 + lambda.norm()), lambda.im)
    };
    spectral_check(probe, &dual_matrix(&lin, probe)?, bm.mode(probe).rate)?;
    Ok(bm.mode(lambda))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EvansControls {
    pub z_min: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for EvansControls {
    fn default() -> Self {
        Self {
            z_min: 1e-12,
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 200_000,
        }
    }
}

/// Largest relative deviation of the coefficients at `z_min` from their
/// burned-state limit that is accepted as a converged tail.
pub const TAIL_TOLERANCE: f64 = 1e-6;

/// Prepared evaluator of `D(lambda)` for one parameter set.
#[derive(Debug, Clone)]
pub struct Evans1d {
    pub params: ChemParams,
    pub controls: EvansControls,
    pub boundary: BoundaryData,
    burned: BurnedMode,
}

impl Evans1d {
    pub fn new(params: &ChemParams, controls: EvansControls) -> Result<Self> {
        params.validate()?;
        let qcj = crate::profile::q_cj(params.gamma, params.e_plus)?;
        if params.heat_release >= qcj {
            return Err(Error::DegenerateProfile { q_cj: qcj });
        }
        let burned = BurnedMode::new(params)?;
        let tail = GasState::at(controls.z_min, params)?;
        let lt = jacobians(&tail, params);
        let lb = jacobians(&burned.state, params);
        let residual = ((lt.a - lb.a).norm() + (lt.e - lb.e).norm()) / (lb.a.norm() + lb.e.norm());
        if residual > TAIL_TOLERANCE {
            return Err(Error::Truncation {
                residual,
                tolerance: TAIL_TOLERANCE,
            });
        }
        Ok(Self {
            params: *params,
            controls,
            boundary: BoundaryData::new(params)?,
            burned,
        })
    }

    pub fn dual_mode(&self, lambda: Complex64) -> DualMode {
        self.burned.mode(lambda)
    }

    /// Rescaled dual solution `exp(-nu x) Y` at `z = 1` (that is, `x = 0-`),
    /// returned as unit vector and log scale.
    pub fn dual_at_front(&self, lambda: Complex64) -> Result<(CVec<4>, f64)> {
        let mode = self.burned.mode(lambda);
        let nu = mode.rate;
        let params = self.params;
        let rhs = move |s: f64, y: &CVec<4>| -> CVec<4> {
            let st = GasState::at(s.exp(), &params).expect("validated profile");
            let lin = jacobians(&st, &params);
            let ainv = lin.a.try_inverse().expect("noncharacteristic profile");
            // -G^T y = -A^{-T} (-lambda y + g (r . y)).
            let r_dot = y[2] * params.heat_release - y[3];
            let w = CVec::<4>::from_fn(|i, _| -lambda * y[i] + lin.g[i] * r_dot);
            let mut out = CVec::<4>::zeros();
            for i in 0..4 {
                let mut acc = c(0.0, 0.0);
                for j in 0..4 {
                    acc += ainv[(j, i)] * w[j];
                }
                out[i] = -acc - nu * y[i];
            }
            out / c(params.rate * st.phi, 0.0)
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

    pub fn evaluate(&self, lambda: Complex64) -> Result<EvansValue> {
        let (y, ls) = self.dual_at_front(lambda)?;
        let b = self.boundary.vector(lambda);
        Ok(LogComplex::from_scaled(y.dot(&b), ls))
    }
}

impl crate::atlas::Evaluator for Evans1d {
    fn eval(&self, lambda: Complex64) -> Result<EvansValue> {
        self.evaluate(lambda)
    }

    fn is_real(&self) -> bool {
        true
    }
}

/// `D(lambda)` for one frequency; see [`Evans1d`] for repeated evaluation.
pub fn evans_1d(lambda: Complex64, params: &ChemParams, controls: EvansControls) -> Result<EvansValue> {
    Evans1d::new(params, controls)?.evaluate(lambda)
}

/// Flux used for finite-difference validation of `A`.
pub fn flux_of_conserved(w: &Vector4<f64>, gamma: f64) -> Vector4<f64> {
    Vector4::from(lagrangian_flux(w[0], w[1], w[2], w[3], gamma))
}

/// Source as a function of conserved variables.
pub fn source_of_conserved(w: &Vector4<f64>, params: &ChemParams) -> Vector4<f64> {
    let e = w[2] - 0.5 * w[1] * w[1];
    let st = GasState::from_primitive(w[0], w[1], e, w[3], params);
    source(&st, params)
}
