//! Adaptive explicit Runge-Kutta 8(5,3) (DOP853) for complex linear and
//! nonlinear systems.

use super::dop853_tableau::{A, B, BHH, C, ER};
use crate::error::{Error, Result};
use nalgebra::SVector;
use num_complex::Complex64;

pub type CVec<const N: usize> = SVector<Complex64, N>;

#[derive(Debug, Clone, Copy)]
pub struct Dop853Options {
    pub rtol: f64,
    pub atol: f64,
    pub h0: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    /// Rescale the state to unit norm after every accepted step and
    /// accumulate the logarithm of the scale. Only meaningful for linear
    /// right-hand sides.
    pub renormalize: bool,
}

impl Default for Dop853Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h0: None,
            h_max: f64::INFINITY,
            max_steps: 200_000,
            renormalize: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Stepper state that can be advanced to successive targets, so that a
/// solution can be sampled at many points without dense output.
pub struct Dop853<const N: usize, F>
where
    F: FnMut(f64, &CVec<N>) -> CVec<N>,
{
    f: F,
    opts: Dop853Options,
    t: f64,
    y: CVec<N>,
    k0: CVec<N>,
    h: f64,
    facold: f64,
    log_scale: f64,
    pub stats: Stats,
}

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;
const BETA: f64 = 0.0;

impl<const N: usize, F> Dop853<N, F>
where
    F: FnMut(f64, &CVec<N>) -> CVec<N>,
{
    pub fn new(mut f: F, t0: f64, y0: CVec<N>, opts: Dop853Options) -> Self {
        let k0 = f(t0, &y0);
        let mut s = Self {
            f,
            opts,
            t: t0,
            y: y0,
            k0,
            h: 0.0,
            facold: 1e-4,
            log_scale: 0.0,
            stats: Stats {
                evaluations: 1,
                ..Stats::default()
            },
        };
        if s.opts.renormalize {
            s.rescale();
        }
        s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Current state; with renormalisation the true state is
    /// `exp(log_scale) * y`.
    pub fn y(&self) -> &CVec<N> {
        &self.y
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    fn rescale(&mut self) {
        let n = self.y.norm();
        if n > 0.0 && n.is_finite() {
            self.y /= Complex64::new(n, 0.0);
            self.k0 /= Complex64::new(n, 0.0);
            self.log_scale += n.ln();
        }
    }

    fn weights(&self, y: &CVec<N>, y_new: &CVec<N>) -> [f64; N] {
        let mut sk = [0.0; N];
        for i in 0..N {
            sk[i] = self.opts.atol + self.opts.rtol * y[i].norm().max(y_new[i].norm());
        }
        sk
    }

    fn initial_step(&mut self, dir: f64) -> f64 {
        // Hairer's starting step heuristic for an order 8 method.
        let sk = self.weights(&self.y, &self.y);
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..N {
            dnf += (self.k0[i].norm() / sk[i]).powi(2);
            dny += (self.y[i].norm() / sk[i]).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h = h.min(self.opts.h_max);
        let y1 = self.y + self.k0 * Complex64::new(h * dir, 0.0);
        let f1 = (self.f)(self.t + h * dir, &y1);
        self.stats.evaluations += 1;
        let mut der2 = 0.0;
        for i in 0..N {
            der2 += ((f1[i] - self.k0[i]).norm() / sk[i]).powi(2);
        }
        let der2 = der2.sqrt() / h;
        let der12 = der2.max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(1.0 / 8.0)
        };
        (100.0 * h).min(h1).min(self.opts.h_max)
    }

    /// Integrates to `t_end`, landing exactly on it.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        if t_end == self.t {
            return Ok(());
        }
        let dir = (t_end - self.t).signum();
        if self.h == 0.0 {
            self.h = match self.opts.h0 {
                Some(h0) => h0.abs(),
                None => self.initial_step(dir),
            };
        }
        let mut last_rejected = false;
        let mut k: [CVec<N>; 12] = [CVec::<N>::zeros(); 12];
        loop {
            let remaining = (t_end - self.t) * dir;
            if remaining <= 1e-14 * self.t.abs().max(1.0) {
                self.t = t_end;
                return Ok(());
            }
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(Error::Integrator(format!(
                    "step budget of {} exhausted at t = {}",
                    self.opts.max_steps, self.t
                )));
            }
            let mut h = self.h.min(self.opts.h_max);
            let clipped = h >= remaining;
            if clipped {
                h = remaining;
            }
            if h < 1e-15 * self.t.abs().max(1.0) {
                return Err(Error::Integrator(format!(
                    "step size underflow at t = {}",
                    self.t
                )));
            }
            let hs = h * dir;

            k[0] = self.k0;
            for i in 1..12 {
                let mut yi = self.y;
                for (j, kj) in k.iter().enumerate().take(i) {
                    let a = A[i][j];
                    if a != 0.0 {
                        yi += kj * Complex64::new(a * hs, 0.0);
                    }
                }
                k[i] = (self.f)(self.t + C[i] * hs, &yi);
            }
            self.stats.evaluations += 11;

            let mut incr = CVec::<N>::zeros();
            let mut e5 = CVec::<N>::zeros();
            for j in 0..12 {
                if B[j] != 0.0 {
                    incr += k[j] * Complex64::new(B[j], 0.0);
                }
                if ER[j] != 0.0 {
                    e5 += k[j] * Complex64::new(ER[j], 0.0);
                }
            }
            let e3 = incr
                - k[0] * Complex64::new(BHH[0], 0.0)
                - k[8] * Complex64::new(BHH[1], 0.0)
                - k[11] * Complex64::new(BHH[2], 0.0);
            let y_new = self.y + incr * Complex64::new(hs, 0.0);

            let sk = self.weights(&self.y, &y_new);
            let mut err = 0.0;
            let mut err2 = 0.0;
            for i in 0..N {
                err += (e5[i].norm() / sk[i]).powi(2);
                err2 += (e3[i].norm() / sk[i]).powi(2);
            }
            let mut deno = err + 0.01 * err2;
            if deno <= 0.0 {
                deno = 1.0;
            }
            let err = h * err * (1.0 / (deno * N as f64)).sqrt();
            if !err.is_finite() {
                self.stats.rejected += 1;
                self.h = h * 0.1;
                last_rejected = true;
                continue;
            }

            let fac11 = err.powf(1.0 / 8.0 - BETA * 0.2);
            let fac = fac11 / self.facold.powf(BETA);
            let fac = (1.0 / FAC_MAX).max((1.0 / FAC_MIN).min(fac / SAFE));
            let mut h_new = h / fac;

            if err <= 1.0 {
                self.facold = err.max(1e-4);
                self.stats.accepted += 1;
                self.t = if clipped { t_end } else { self.t + hs };
                self.y = y_new;
                self.k0 = (self.f)(self.t, &self.y);
                self.stats.evaluations += 1;
                if self.opts.renormalize {
                    self.rescale();
                }
                if last_rejected {
                    h_new = h_new.min(h);
                }
                last_rejected = false;
                // A clipped final step says nothing about the natural step.
                if !clipped {
                    self.h = h_new;
                } else {
                    self.h = self.h.max(h_new);
                }
            } else {
                self.stats.rejected += 1;
                self.h = h / (1.0 / FAC_MIN).min(fac11 / SAFE);
                last_rejected = true;
            }
        }
    }
}

/// Convenience wrapper: integrates from `t0` to `t1` and returns the final
/// state together with the accumulated log scale.
pub fn integrate<const N: usize, F>(
    f: F,
    t0: f64,
    t1: f64,
    y0: CVec<N>,
    opts: Dop853Options,
) -> Result<(CVec<N>, f64, Stats)>
where
    F: FnMut(f64, &CVec<N>) -> CVec<N>,
{
    let mut s = Dop853::new(f, t0, y0, opts);
    s.advance_to(t1)?;
    Ok((s.y, s.log_scale, s.stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_exponential_matches_closed_form() {
        let lam = Complex64::new(-0.3, 2.0);
        let y0 = CVec::<1>::new(Complex64::new(1.0, 0.5));
        let (y, ls, _) = integrate(|_, y| y * lam, 0.0, 5.0, y0, Dop853Options::default()).unwrap();
        let exact = y0[0] * (lam * 5.0).exp();
        assert!((y[0] * ls.exp() - exact).norm() < 1e-9 * exact.norm());
    }

    #[test]
    fn backward_integration_and_renormalisation() {
        // Rotation plus growth: y' = M y with known exponential.
        let m = nalgebra::SMatrix::<Complex64, 2, 2>::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(-3.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(1.0, 0.0),
        );
        let y0 = CVec::<2>::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let opts = Dop853Options {
            renormalize: true,
            ..Default::default()
        };
        let (y, ls, _) = integrate(|_, y| m * y, 0.0, -40.0, y0, opts).unwrap();
        // exp(-40) * (cos 120, -sin 120)
        let expect_ls = -40.0;
        assert!((ls + y.norm().ln() - expect_ls).abs() < 1e-8);
        let ratio = y[1] / y[0];
        assert!((ratio - Complex64::new(-(120.0f64).tan(), 0.0)).norm() < 1e-6 * (1.0 + (120.0f64).tan().abs()));
    }

    #[test]
    fn eighth_order_convergence_with_fixed_steps() {
        // y' = cos(t) y, y(0)=1 -> exp(sin t).
        let run = |n: usize| {
            let h = 1.0 / n as f64;
            let opts = Dop853Options {
                rtol: 1.0,
                atol: 1.0,
                h0: Some(h),
                h_max: h,
                ..Default::default()
            };
            let (y, _, _) = integrate(
                |t, y| y * Complex64::new(t.cos(), 0.0),
                0.0,
                1.0,
                CVec::<1>::new(Complex64::new(1.0, 0.0)),
                opts,
            )
            .unwrap();
            (y[0] - Complex64::new((1.0f64).sin().exp(), 0.0)).norm()
        };
        let e1 = run(2);
        let e2 = run(4);
        let order = (e1 / e2).log2();
        assert!(order > 7.0, "observed order {order}");
    }
}
