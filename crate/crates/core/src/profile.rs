//! Closed-form inviscid ZND profiles in Lagrangian coordinates (s = 1,
//! tau_+ = 1, u_+ = 0), with the classical overdrive scaling conversion.

use crate::error::{Error, Result};
use crate::numerics::quad::integrate_gk;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChemParams {
    pub gamma: f64,
    pub activation: f64,
    pub heat_release: f64,
    pub rate: f64,
    #[serde(default = "one")]
    pub specific_heat: f64,
    pub e_plus: f64,
    #[serde(default = "one")]
    pub speed: f64,
}

fn one() -> f64 {
    1.0
}

impl ChemParams {
    /// Parameters with `c = 1`, `s = 1`.
    pub fn new(gamma: f64, e_plus: f64, heat_release: f64, activation: f64, rate: f64) -> Self {
        Self {
            gamma,
            activation,
            heat_release,
            rate,
            specific_heat: 1.0,
            e_plus,
            speed: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.gamma;
        if !(g > 0.0) {
            return Err(Error::Domain(format!("gamma must be positive, got {g}")));
        }
        if !(self.rate > 0.0) || !(self.specific_heat > 0.0) {
            return Err(Error::Domain("rate k and specific heat c must be positive".into()));
        }
        if !(self.activation >= 0.0) || !(self.heat_release >= 0.0) {
            return Err(Error::Domain("activation energy and heat release must be nonnegative".into()));
        }
        if self.speed != 1.0 {
            return Err(Error::Domain("wave speed is fixed to s = 1 in this scaling".into()));
        }
        let qcj = q_cj(g, self.e_plus)?;
        if self.heat_release > qcj * (1.0 + 1e-14) {
            return Err(Error::Domain(format!(
                "heat release q = {} exceeds q_cj = {qcj}",
                self.heat_release
            )));
        }
        Ok(())
    }

    /// Same parameters with `k` rescaled so that the half-reaction length is 1.
    pub fn with_unit_half_length(&self) -> Result<Self> {
        let l = half_reaction_length(self)?;
        Ok(Self {
            rate: self.rate * l,
            ..*self
        })
    }
}

/// Maximal heat release for a strong detonation at speed 1.
pub fn q_cj(gamma: f64, e_plus: f64) -> Result<f64> {
    let g = gamma;
    if !(g > 0.0) {
        return Err(Error::Domain(format!("gamma must be positive, got {g}")));
    }
    let e_max = 1.0 / (g * (g + 1.0));
    if !(0.0..=e_max * (1.0 + 1e-14)).contains(&e_plus) {
        return Err(Error::Domain(format!(
            "e_plus = {e_plus} outside [0, 1/(Gamma(Gamma+1))] = [0, {e_max}]"
        )));
    }
    let a = (g + 1.0) * (g * e_plus + 1.0);
    let num = a * a - g * (g + 2.0) * (1.0 + 2.0 * (g + 1.0) * e_plus);
    Ok(num / (2.0 * g * (g + 2.0)))
}

/// `(tau, u, e)` on the strong-detonation branch at reactant fraction `z`.
pub fn algebraic_state(z: f64, p: &ChemParams) -> Result<(f64, f64, f64)> {
    let g = p.gamma;
    let a = (g + 1.0) * (g * p.e_plus + 1.0);
    let disc = a * a
        - g * (g + 2.0) * (1.0 + 2.0 * (g + 1.0) * p.e_plus - 2.0 * p.heat_release * (z - 1.0));
    if disc < 0.0 {
        return Err(Error::Domain(format!(
            "negative discriminant {disc:e} at z = {z}: heat release violates q <= q_cj"
        )));
    }
    let tau = (a - disc.sqrt()) / (g + 2.0);
    let u = 1.0 - tau;
    let e = tau * (g * p.e_plus + 1.0 - tau) / g;
    Ok((tau, u, e))
}

/// Thermodynamic state of the profile at a given `z`, with the quantities
/// needed for linearisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasState {
    pub tau: f64,
    pub u: f64,
    pub e: f64,
    pub z: f64,
    pub p: f64,
    pub temperature: f64,
    pub phi: f64,
}

impl GasState {
    pub fn at(z: f64, params: &ChemParams) -> Result<Self> {
        let (tau, u, e) = algebraic_state(z, params)?;
        Ok(Self::from_primitive(tau, u, e, z, params))
    }

    pub fn from_primitive(tau: f64, u: f64, e: f64, z: f64, params: &ChemParams) -> Self {
        let temperature = e / params.specific_heat;
        Self {
            tau,
            u,
            e,
            z,
            p: params.gamma * e / tau,
            temperature,
            phi: arrhenius(temperature, params.activation),
        }
    }

    /// Quiescent unburned state ahead of the shock.
    pub fn quiescent(params: &ChemParams) -> Self {
        Self::from_primitive(1.0, 0.0, params.e_plus, 1.0, params)
    }

    /// Total specific energy `e + u^2/2`.
    pub fn energy(&self) -> f64 {
        self.e + 0.5 * self.u * self.u
    }
}

pub fn arrhenius(temperature: f64, activation: f64) -> f64 {
    if activation == 0.0 {
        1.0
    } else {
        (-activation / temperature).exp()
    }
}

/// `dz/dx = k phi(T(z)) z` on the reaction zone.
pub fn reaction_rhs(z: f64, params: &ChemParams) -> Result<f64> {
    let s = GasState::at(z, params)?;
    Ok(params.rate * s.phi * z)
}

/// `x(z) = -int_z^1 dzeta / (k phi zeta)`, integrated in `ln zeta`.
pub fn x_of_z(z: f64, params: &ChemParams) -> Result<f64> {
    x_between(z, 1.0, params)
}

fn x_between(z_lo: f64, z_hi: f64, params: &ChemParams) -> Result<f64> {
    if !(z_lo > 0.0 && z_lo <= z_hi) {
        return Err(Error::Domain(format!("invalid z interval [{z_lo}, {z_hi}]")));
    }
    if z_lo == z_hi {
        return Ok(0.0);
    }
    // Validate once so that the integrand below cannot fail.
    algebraic_state(z_lo, params)?;
    algebraic_state(z_hi, params)?;
    let (v, _) = integrate_gk(
        |s| {
            let st = GasState::at(s.exp(), params).expect("validated range");
            Complex64::new(1.0 / (params.rate * st.phi), 0.0)
        },
        z_lo.ln(),
        z_hi.ln(),
        0.0,
        1e-14,
        4000,
    );
    Ok(-v.re)
}

pub fn half_reaction_length(params: &ChemParams) -> Result<f64> {
    Ok(-x_of_z(0.5, params)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub x: f64,
    pub tau: f64,
    pub u: f64,
    pub e: f64,
    pub z: f64,
    pub p: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
}

impl ProfilePoint {
    fn new(x: f64, s: &GasState) -> Self {
        Self {
            x,
            tau: s.tau,
            u: s.u,
            e: s.e,
            z: s.z,
            p: s.p,
            temperature: s.temperature,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GridControl {
    /// Number of grid intervals, uniform in `ln z`.
    pub intervals: usize,
}

impl Default for GridControl {
    fn default() -> Self {
        Self { intervals: 400 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZndProfile {
    pub params: ChemParams,
    pub z_min: f64,
    /// Ordered by increasing `x` on `[-M, 0]`.
    pub grid: Vec<ProfilePoint>,
    pub neumann_minus: ProfilePoint,
    pub quiescent_plus: ProfilePoint,
    pub half_reaction_length: f64,
    /// Domain length `M = |x(z_min)|`.
    pub domain_length: f64,
}

pub const DEFAULT_Z_MIN: f64 = 1e-8;

pub fn compute_profile(params: &ChemParams, z_min: f64, grid: GridControl) -> Result<ZndProfile> {
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
        .map(|i| if i == n { 1.0 } else { (lz * (1.0 - i as f64 / n as f64)).exp() })
        .collect();
    // Cumulative x from z = 1 downward, interval by interval.
    let mut xs = vec![0.0; n + 1];
    for i in (0..n).rev() {
        xs[i] = xs[i + 1] + x_between(zs[i], zs[i + 1], params)?;
    }
    let mut pts = Vec::with_capacity(n + 1);
    for i in 0..=n {
        pts.push(ProfilePoint::new(xs[i], &GasState::at(zs[i], params)?));
    }
    let neumann_minus = ProfilePoint::new(0.0, &GasState::at(1.0, params)?);
    let quiescent_plus = ProfilePoint::new(0.0, &GasState::quiescent(params));
    Ok(ZndProfile {
        params: *params,
        z_min,
        domain_length: -xs[0],
        grid: pts,
        neumann_minus,
        quiescent_plus,
        half_reaction_length: half_reaction_length(params)?,
    })
}

/// Lagrangian flux in the frame of the shock: `(-u - tau, p - u, p u - E, -z)`.
pub fn lagrangian_flux(tau: f64, u: f64, energy: f64, z: f64, gamma: f64) -> [f64; 4] {
    let e = energy - 0.5 * u * u;
    let p = gamma * e / tau;
    [-u - tau, p - u, p * u - energy, -z]
}

impl ProfilePoint {
    pub fn flux(&self, gamma: f64) -> [f64; 4] {
        lagrangian_flux(self.tau, self.u, self.e + 0.5 * self.u * self.u, self.z, gamma)
    }
}

impl ZndProfile {
    /// Componentwise Rankine-Hugoniot residual `F(W(0-)) - F(W(0+))` of the
    /// steady Neumann shock.
    pub fn rankine_hugoniot_residual(&self) -> [f64; 4] {
        let g = self.params.gamma;
        let a = self.neumann_minus.flux(g);
        let b = self.quiescent_plus.flux(g);
        [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
    }

    /// Maximal residual of the two algebraic profile relations on the grid.
    pub fn algebraic_residual(&self) -> f64 {
        let g = self.params.gamma;
        let ep = self.params.e_plus;
        self.grid
            .iter()
            .map(|p| {
                let r1 = (p.u - (1.0 - p.tau)).abs();
                let r2 = (p.e - p.tau * (g * ep + 1.0 - p.tau) / g).abs();
                r1.max(r2)
            })
            .fold(0.0, f64::max)
    }

    pub fn burned_state(&self) -> Result<GasState> {
        GasState::at(0.0, &self.params)
    }
}

/// Classical overdrive parametrisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingClassical {
    pub overdrive: f64,
    pub activation_classical: f64,
    pub heat_classical: f64,
    pub gamma: f64,
}

/// Unburned energy `y` of the Chapman-Jouguet reference wave with heat
/// ratio `Q0 = q / e_+`, i.e. the root of `Q0 y = q_cj(Gamma, y)`.
fn cj_reference_energy(gamma: f64, q0: f64) -> Result<f64> {
    if !(q0 > 0.0) {
        return Err(Error::Domain(format!("classical heat release must be positive, got {q0}")));
    }
    let mut lo = 0.0;
    let mut hi = 1.0 / (gamma * (gamma + 1.0));
    // q_cj(lo) - Q0 lo > 0, q_cj(hi) - Q0 hi < 0.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q_cj(gamma, mid)? - q0 * mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Classical `(f, E0, Q0)` to paper scaling with `k` and `c` as given.
pub fn classical_to_paper(c: &ScalingClassical, rate: f64) -> Result<ChemParams> {
    if !(c.overdrive > 1.0) {
        return Err(Error::Domain(format!(
            "overdrive f must exceed 1 (f = 1 is the degenerate CJ case), got {}",
            c.overdrive
        )));
    }
    let y = cj_reference_energy(c.gamma, c.heat_classical)?;
    let e_plus = y / c.overdrive;
    Ok(ChemParams::new(
        c.gamma,
        e_plus,
        c.heat_classical * e_plus,
        c.activation_classical * e_plus,
        rate,
    ))
}

pub fn paper_to_classical(p: &ChemParams) -> Result<ScalingClassical> {
    if !(p.e_plus > 0.0) || !(p.heat_release > 0.0) {
        return Err(Error::Domain(
            "classical scaling needs e_plus > 0 and q > 0".into(),
        ));
    }
    let q0 = p.heat_release / p.e_plus;
    let y = cj_reference_energy(p.gamma, q0)?;
    let f = y / p.e_plus;
    if !(f > 1.0) {
        return Err(Error::Domain(format!("overdrive f = {f} does not exceed 1")));
    }
    Ok(ScalingClassical {
        overdrive: f,
        activation_classical: p.activation / p.e_plus,
        heat_classical: q0,
        gamma: p.gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> ChemParams {
        ChemParams::new(0.2, 6.23e-2, 6.23e-1, 6.0, 1.53e4)
    }

    #[test]
    fn q_cj_closed_form_limits() {
        for g in [0.2, 1.2] {
            let e_max = 1.0 / (g * (g + 1.0));
            assert!(q_cj(g, e_max).unwrap().abs() < 1e-12);
            assert!((q_cj(g, 0.0).unwrap() - 1.0 / (2.0 * g * (g + 2.0))).abs() < 1e-12);
        }
        assert!(q_cj(0.2, -0.1).is_err());
    }

    #[test]
    fn z_one_state_is_q_independent() {
        let a = algebraic_state(1.0, &fig1()).unwrap();
        let b = algebraic_state(1.0, &ChemParams { heat_release: 0.0, ..fig1() }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cj_discriminant_vanishes() {
        let g = 0.2;
        let ep = 6.23e-2;
        let p = ChemParams::new(g, ep, q_cj(g, ep).unwrap(), 0.0, 1.0);
        let (tau, _, _) = algebraic_state(0.0, &p).unwrap();
        assert!((tau - (g + 1.0) * (g * ep + 1.0) / (g + 2.0)).abs() < 1e-7);
    }

    #[test]
    fn rate_vanishes_linearly_and_is_pure_for_zero_activation() {
        let p = ChemParams { activation: 0.0, rate: 2.5, ..fig1() };
        for z in [1e-6, 0.3, 1.0] {
            assert!((reaction_rhs(z, &p).unwrap() - 2.5 * z).abs() < 1e-15);
        }
        let r = reaction_rhs(1e-12, &fig1()).unwrap();
        assert!(r < 1e-6);
    }

    #[test]
    fn zero_activation_profile_is_exponential() {
        let p = ChemParams { activation: 0.0, rate: 2.0, ..fig1() };
        for z in [0.9, 0.5, 1e-3] {
            assert!((x_of_z(z, &p).unwrap() - z.ln() / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_half_length_normalisation() {
        let p = fig1().with_unit_half_length().unwrap();
        assert!((half_reaction_length(&p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conversion_round_trip_and_benchmark() {
        let c = ScalingClassical {
            overdrive: 1.4,
            activation_classical: 50.0,
            heat_classical: 10.0,
            gamma: 0.2,
        };
        let p = classical_to_paper(&c, 1.0).unwrap();
        p.validate().unwrap();
        let back = paper_to_classical(&p).unwrap();
        assert!((back.overdrive / c.overdrive - 1.0).abs() < 1e-12);
        assert!((back.activation_classical / 50.0 - 1.0).abs() < 1e-12);
        assert!((back.heat_classical / 10.0 - 1.0).abs() < 1e-12);
        let bench = paper_to_classical(&fig1()).unwrap();
        assert!((bench.heat_classical - 10.0).abs() < 1e-12);
        assert!(bench.overdrive > 1.0);
        let zero = ScalingClassical { activation_classical: 0.0, ..c };
        assert_eq!(classical_to_paper(&zero, 1.0).unwrap().activation, 0.0);
        assert!(classical_to_paper(&ScalingClassical { overdrive: 1.0, ..c }, 1.0).is_err());
    }
}
