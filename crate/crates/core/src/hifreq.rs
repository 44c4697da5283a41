//! Semiclassical symbol analysis at `(lambda, xi) = h^{-1} (zeta, 1)`:
//! closed-form eigenvalues of `G0 = [(zeta + i A2) A1^{-1}]^T`, glancing
//! points, turning points, type classification, the Neumann-shock
//! Lopatinski determinant and the ratio `D_ZND / D_N`.

use crate::error::{Error, Result};
use crate::numerics::fit::polyfit;
use crate::numerics::linalg::{c, left_eigenvector, null_vector, CMat};
use crate::multid::{acoustic_root, flux_jacobians, EulerState, EvansMultiD, MultiDProfile};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Below this `|s|` the acoustic pair is treated as glancing.
pub const GLANCING_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolPoint {
    pub x: f64,
    pub zeta: Complex64,
    pub c0: f64,
    pub u1: f64,
    pub kappa: f64,
    pub eta: f64,
    pub s_val: Complex64,
    pub mu: [Complex64; 5],
}

/// Principal symbol `[(zeta + i A2) A1^{-1}]^T` at a state.
pub fn g0_matrix(st: &EulerState, gamma: f64, zeta: Complex64) -> Result<CMat<5>> {
    let (a1, a2) = flux_jacobians(st, gamma);
    let a1_inv = a1
        .try_inverse()
        .ok_or_else(|| Error::SingularJacobian(format!("A1 singular at u1 = {}", st.u1)))?;
    let inner = CMat::<5>::from_fn(|i, j| {
        let d = if i == j { zeta } else { c(0.0, 0.0) };
        d + c(0.0, a2[(i, j)])
    });
    Ok((inner * a1_inv.map(|x| c(x, 0.0))).transpose())
}

/// Closed-form symbol eigenvalues at a state.
pub fn symbol_at_state(st: &EulerState, gamma: f64, zeta: Complex64) -> Result<SymbolPoint> {
    let c0 = st.sound_speed_sq(gamma).sqrt();
    let u1 = st.u1;
    if u1 == 0.0 {
        return Err(Error::Domain("u1 = 0: symbol undefined".into()));
    }
    let kappa = u1 / c0;
    let eta = 1.0 - kappa * kappa;
    let s = acoustic_root(zeta, st.subsonic_gap(gamma));
    if s.norm() < GLANCING_TOLERANCE {
        return Err(Error::Glancing { zeta });
    }
    let mu1 = -kappa * (kappa * zeta + s) / (eta * u1);
    let mu2 = -kappa * (kappa * zeta - s) / (eta * u1);
    let mu3 = zeta / u1;
    Ok(SymbolPoint {
        x: st.x,
        zeta,
        c0,
        u1,
        kappa,
        eta,
        s_val: s,
        mu: [mu1, mu2, mu3, mu3, mu3],
    })
}

pub fn symbol_eigs(x: f64, zeta: Complex64, profile: &MultiDProfile) -> Result<SymbolPoint> {
    symbol_at_state(&profile.state_at(x)?, profile.params.gamma, zeta)
}

/// Distance between two multisets of equal size under the best matching.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    // Heap's algorithm over permutations; n is tiny.
    let mut cnt = vec![0usize; n];
    let score = |p: &[usize]| a.iter().zip(p).map(|(x, &j)| (x - b[j]).norm()).fold(0.0, f64::max);
    best = best.min(score(&idx));
    let mut i = 0;
    while i < n {
        if cnt[i] < i {
            if i % 2 == 0 {
                idx.swap(0, i);
            } else {
                idx.swap(cnt[i], i);
            }
            best = best.min(score(&idx));
            cnt[i] += 1;
            i = 0;
        } else {
            cnt[i] = 0;
            i += 1;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlancingPoint {
    pub x: f64,
    /// `i sqrt(c0^2 - u1^2)`; its conjugate is glancing as well.
    pub zeta: Complex64,
}

pub fn glancing_locus(profile: &MultiDProfile) -> Vec<GlancingPoint> {
    let g = profile.params.gamma;
    profile
        .grid
        .iter()
        .map(|st| GlancingPoint {
            x: st.x,
            zeta: c(0.0, st.subsonic_gap(g).max(0.0).sqrt()),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetonationType {
    /// `c0^2 - u1^2` increasing along the profile.
    I,
    /// `c0^2 - u1^2` decreasing along the profile.
    D,
    Neither,
}

/// Monotonicity class of sampled values, with steps within
/// `band * max |value|` treated as flat.
pub fn classify_samples(values: &[f64], band: f64) -> DetonationType {
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = band * scale;
    let mut up = false;
    let mut down = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        up |= d > tol;
        down |= d < -tol;
    }
    match (up, down) {
        (true, false) => DetonationType::I,
        (false, true) => DetonationType::D,
        _ => DetonationType::Neither,
    }
}

pub fn classify_type(profile: &MultiDProfile) -> DetonationType {
    let g = profile.params.gamma;
    let v: Vec<f64> = profile.grid.iter().map(|s| s.subsonic_gap(g)).collect();
    classify_samples(&v, 1e-12)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoint {
    pub x_star: f64,
    pub zeta_star: Complex64,
    /// `(s^2)'(x_star)`.
    pub ds2: f64,
    pub nondegenerate: bool,
}

/// Real zeros of `s^2(x) = zeta^2 + gap(x)` on `[a, b]`: sign changes are
/// bisected, and tangential zeros are caught as near-zero local minima of
/// `|s^2|`, refined by golden section and flagged degenerate.
pub fn turning_points<F: Fn(f64) -> f64>(zeta: Complex64, gap: F, a: f64, b: f64, n_scan: usize) -> Vec<TurningPoint> {
    let z2 = zeta * zeta;
    let scale = 1.0 + z2.norm();
    if z2.im.abs() > 1e-12 * scale {
        return Vec::new();
    }
    let f = |x: f64| z2.re + gap(x);
    let n = n_scan.max(4);
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let tol = 1e-10 * scale;
    let derivative = |x: f64| {
        let h = 1e-6 * (b - a);
        let (l, r) = ((x - h).max(a), (x + h).min(b));
        (gap(r) - gap(l)) / (r - l)
    };
    let mut out: Vec<TurningPoint> = Vec::new();
    let push = |x: f64, out: &mut Vec<TurningPoint>| {
        if out.iter().any(|t| (t.x_star - x).abs() < 1e-9 * (b - a)) {
            return;
        }
        let d = derivative(x);
        out.push(TurningPoint {
            x_star: x,
            zeta_star: zeta,
            ds2: d,
            nondegenerate: d.abs() > 1e-6 * scale,
        });
    };
    for i in 0..n {
        let (x0, x1, f0, f1) = (xs[i], xs[i + 1], fs[i], fs[i + 1]);
        if f0 == 0.0 {
            push(x0, &mut out);
            continue;
        }
        if f0 * f1 < 0.0 {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm * flo > 0.0 {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 * (1.0 + hi.abs()) {
                    break;
                }
            }
            push(0.5 * (lo + hi), &mut out);
        }
    }
    if fs[n] == 0.0 {
        push(xs[n], &mut out);
    }
    // Tangential zeros: local minima of |f| without a sign change.
    for i in 1..n {
        let (l, m, r) = (fs[i - 1].abs(), fs[i].abs(), fs[i + 1].abs());
        let (mut lo, mut hi) = (xs[i - 1], xs[i + 1]);
        let known = out.iter().any(|t| t.x_star >= lo && t.x_star <= hi);
        if m <= l && m <= r && fs[i - 1] * fs[i + 1] > 0.0 && !known {
            let gr = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..200 {
                let c1 = hi - gr * (hi - lo);
                let c2 = lo + gr * (hi - lo);
                if f(c1).abs() < f(c2).abs() {
                    hi = c2;
                } else {
                    lo = c1;
                }
                if hi - lo < 1e-12 * (b - a) {
                    break;
                }
            }
            let xm = 0.5 * (lo + hi);
            if f(xm).abs() <= tol {
                push(xm, &mut out);
            }
        }
    }
    out.sort_by(|p, q| p.x_star.total_cmp(&q.x_star));
    out
}

pub fn turning_points_profile(zeta: Complex64, profile: &MultiDProfile, n_scan: usize) -> Result<Vec<TurningPoint>> {
    let g = profile.params.gamma;
    // Validate the range once; the closure below cannot fail inside it.
    profile.state_at(profile.domain_length)?;
    Ok(turning_points(
        zeta,
        |x| profile.state_at(x).expect("inside profile").subsonic_gap(g),
        0.0,
        profile.domain_length,
        n_scan,
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeumannLopatinski {
    pub zeta: Complex64,
    /// `zeta [W] + i [F2]`, `[h] = h(0-) - h(0+)`.
    pub ell0: Vec<Complex64>,
    /// Eigenvector of `G0(0+)` for `mu1`.
    pub r1: Vec<Complex64>,
    pub value: Complex64,
    /// Set when the fixed reference projection was too small and the
    /// vector was normalised by its largest component instead.
    pub reanchored: bool,
}

fn mu1_eigenvector(st: &EulerState, gamma: f64, zeta: Complex64) -> Result<(Complex64, nalgebra::SVector<Complex64, 5>)> {
    let sp = symbol_at_state(st, gamma, zeta)?;
    let g0 = g0_matrix(st, gamma, zeta)?;
    let (v, rel) = null_vector(&(g0 - CMat::<5>::identity() * sp.mu[0]));
    if !(rel < 1e-8) {
        return Err(Error::Glancing { zeta });
    }
    Ok((sp.mu[0], v))
}

/// Neumann-shock Lopatinski determinant `D_N = ell0 . R1` at `x = 0+`.
pub fn neumann_lopatinski(zeta: Complex64, ev: &EvansMultiD) -> Result<NeumannLopatinski> {
    let g = ev.params.gamma;
    let plus = ev.neumann_state();
    let minus = ev.unburned_state();
    let (_, r) = mu1_eigenvector(&plus, g, zeta)?;
    let (_, reference) = mu1_eigenvector(&plus, g, c(1.0, 0.0))?;
    let j = reference.icamax();
    let reference = reference * (reference[j].conj() / (reference[j].norm() * reference.norm()));
    let proj = reference.dotc(&r);
    let (r1, reanchored) = if proj.norm() >= 0.1 * r.norm() {
        (r / proj, false)
    } else {
        let k = r.icamax();
        (r / r[k], true)
    };
    let jw = minus.conserved() - plus.conserved();
    let jf = minus.flux2() - plus.flux2();
    let ell0: Vec<Complex64> = (0..5).map(|i| zeta * jw[i] + c(0.0, jf[i])).collect();
    let value = ell0.iter().zip(r1.iter()).map(|(a, b)| a * b).sum();
    Ok(NeumannLopatinski {
        zeta,
        ell0,
        r1: r1.iter().copied().collect(),
        value,
        reanchored,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HfRow {
    pub h: f64,
    pub ratio: Complex64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HfRatio {
    pub zeta: Complex64,
    pub rows: Vec<HfRow>,
    /// Least-squares slope of `ln deviation` against `ln h`.
    pub order: f64,
    pub monotone: bool,
}

/// `D_ZND / D_N` at `(lambda, xi) = h^{-1}(zeta, 1)`. The dual solution at
/// `0+` is scaled so that its spectral component along `R1` is `R1`; then the
/// ratio is `h (Z . b) / (R1 . ell0)`.
pub fn hf_ratio(zeta: Complex64, h_grid: &[f64], ev: &EvansMultiD) -> Result<HfRatio> {
    let g = ev.params.gamma;
    let plus = ev.neumann_state();
    for x in [plus, ev.burned_state()] {
        let sp = symbol_at_state(&x, g, zeta)?;
        if sp.s_val.norm() < 1e-6 {
            return Err(Error::Glancing { zeta });
        }
    }
    if zeta.re <= 0.0 {
        let gaps = [plus.subsonic_gap(g), ev.burned_state().subsonic_gap(g)];
        let (lo, hi) = (gaps[0].min(gaps[1]), gaps[0].max(gaps[1]));
        let t2 = zeta.im * zeta.im;
        if t2 >= lo && t2 <= hi {
            return Err(Error::Glancing { zeta });
        }
    }
    let (mu1, r1) = mu1_eigenvector(&plus, g, zeta)?;
    let g0 = g0_matrix(&plus, g, zeta)?;
    let l1 = left_eigenvector(&g0, mu1);
    let dn = neumann_lopatinski(zeta, ev)?;
    let ell0 = nalgebra::SVector::<Complex64, 5>::from_iterator(dn.ell0.iter().copied());
    let rows: Vec<Result<HfRow>> = h_grid
        .par_iter()
        .map(|&h| {
            let lambda = zeta / h;
            let xi = 1.0 / h;
            let (y, _) = ev.dual_at_front(lambda, xi)?;
            let coef = l1.dot(&y) / l1.dot(&r1);
            let b = ev.boundary_vector(lambda, xi);
            let ratio = y.dot(&b) * h / (coef * r1.dot(&ell0));
            Ok(HfRow {
                h,
                ratio,
                deviation: (ratio - 1.0).norm(),
            })
        })
        .collect();
    let rows: Vec<HfRow> = rows.into_iter().collect::<Result<_>>()?;
    let lx: Vec<f64> = rows.iter().map(|r| r.h.ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.deviation.ln()).collect();
    let order = polyfit(&lx, &ly, 1).map(|p| p[1]).unwrap_or(f64::NAN);
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| b.h.total_cmp(&a.h));
    let monotone = sorted.windows(2).all(|w| w[1].deviation < w[0].deviation);
    Ok(HfRatio {
        zeta,
        rows,
        order,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evans1d::EvansControls;
    use crate::multid::{eulerian_profile, flux_state};
    use crate::numerics::linalg::eigenvalues;
    use crate::profile::{ChemParams, GridControl};

    fn params() -> ChemParams {
        ChemParams::new(0.2, 6.23e-2, 6.23e-1, 6.0, 1.0)
            .with_unit_half_length()
            .unwrap()
    }

    #[test]
    fn closed_form_matches_dense_spectrum() {
        let p = params();
        for (z, zeta) in [(1.0, c(1.0, 0.3)), (0.3, c(1.0, -2.0)), (1e-4, c(0.2, 5.0))] {
            let st = flux_state(z, &p).unwrap();
            let sp = symbol_at_state(&st, p.gamma, zeta).unwrap();
            let ev = eigenvalues(&g0_matrix(&st, p.gamma, zeta).unwrap()).unwrap();
            assert!(multiset_distance(&sp.mu, &ev) < 1e-10 * (1.0 + zeta.norm()));
            // Sum and product of the acoustic pair.
            let k = sp.kappa;
            let sum = -2.0 * k * k * zeta / (sp.eta * sp.u1);
            assert!((sp.mu[0] + sp.mu[1] - sum).norm() < 1e-12 * sum.norm().max(1.0));
        }
    }

    #[test]
    fn glancing_zeta_merges_acoustic_pair() {
        let p = params();
        let st = flux_state(0.5, &p).unwrap();
        let zeta = c(0.0, st.subsonic_gap(p.gamma).sqrt());
        assert!(matches!(symbol_at_state(&st, p.gamma, zeta), Err(Error::Glancing { .. })));
        let near = symbol_at_state(&st, p.gamma, zeta + c(1e-6, 0.0)).unwrap();
        assert!((near.mu[0] - near.mu[1]).norm() < 1e-2);
    }

    #[test]
    fn multiset_distance_is_permutation_invariant() {
        let a = [c(1.0, 0.0), c(2.0, 1.0), c(-1.0, 0.5)];
        let b = [c(-1.0, 0.5), c(1.0, 0.0), c(2.0, 1.0)];
        assert_eq!(multiset_distance(&a, &b), 0.0);
    }

    #[test]
    fn classification_of_synthetic_samples() {
        let inc: Vec<f64> = (0..50).map(|i| 1.0 + i as f64 * 0.1).collect();
        let dec: Vec<f64> = inc.iter().rev().copied().collect();
        assert_eq!(classify_samples(&inc, 1e-12), DetonationType::I);
        assert_eq!(classify_samples(&dec, 1e-12), DetonationType::D);
        assert_eq!(classify_samples(&[2.0; 10], 1e-12), DetonationType::Neither);
        let bump: Vec<f64> = (0..50).map(|i| ((i as f64) * 0.1).sin()).collect();
        assert_eq!(classify_samples(&bump, 1e-12), DetonationType::Neither);
    }

    #[test]
    fn turning_points_of_synthetic_gaps() {
        // s^2 = -tau^2 + 1 + x on [0, 2]: one simple zero at x = tau^2 - 1.
        let tp = turning_points(c(0.0, 1.5), |x| 1.0 + x, 0.0, 2.0, 64);
        assert_eq!(tp.len(), 1);
        assert!((tp[0].x_star - 1.25).abs() < 1e-12 && tp[0].nondegenerate);
        assert!(turning_points(c(0.0, 2.0), |x| 1.0 + x, 0.0, 2.0, 64).is_empty());
        assert!(turning_points(c(0.0, 0.5), |x| 1.0 + x, 0.0, 2.0, 64).is_empty());
        // Tangential zero at the minimum of 1 + (x - 1)^2.
        let tp = turning_points(c(0.0, 1.0), |x| 1.0 + (x - 1.0) * (x - 1.0), 0.0, 2.0, 64);
        assert_eq!(tp.len(), 1);
        assert!(!tp[0].nondegenerate && (tp[0].x_star - 1.0).abs() < 1e-4);
        // Off the imaginary axis s^2 is not real: no real turning points.
        assert!(turning_points(c(0.3, 1.5), |x| 1.0 + x, 0.0, 2.0, 64).is_empty());
    }

    #[test]
    fn glancing_locus_squares_to_gap() {
        let p = params();
        let prof = eulerian_profile(&p, 1e-8, GridControl { intervals: 40 }).unwrap();
        for (gp, st) in glancing_locus(&prof).iter().zip(&prof.grid) {
            assert_eq!(gp.zeta.re, 0.0);
            assert!((gp.zeta.im * gp.zeta.im - st.subsonic_gap(p.gamma)).abs() < 1e-12);
        }
    }

    #[test]
    fn neumann_determinant_is_conjugate_symmetric() {
        let ev = EvansMultiD::new(&params(), EvansControls::default()).unwrap();
        let zeta = c(0.7, 1.9);
        let a = neumann_lopatinski(zeta, &ev).unwrap().value;
        let b = neumann_lopatinski(zeta.conj(), &ev).unwrap().value;
        assert!((a - b.conj()).norm() < 1e-10 * a.norm());
    }
}
