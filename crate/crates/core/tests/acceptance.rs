//! Acceptance criteria 1-14. Each test writes one PASS/FAIL line to stdout
//! (outside the harness capture) before asserting.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;
use znd_core::atlas::verdict::normalized_evaluator;
use znd_core::atlas::{
    loglog_fit, trace_boundary, unstable_roots, verdict, verdict_for, winding, Contour, Evaluator, LocateControl,
    RefineControl, Root, TraceControl, Verdict, VerdictControl,
};
use znd_core::evans1d::{Evans1d, EvansControls};
use znd_core::hifreq::{g0_matrix, hf_ratio, multiset_distance, symbol_eigs};
use znd_core::multid::{eulerian_profile, EvansMultiD};
use znd_core::numerics::linalg::eigenvalues;
use znd_core::oscint::{
    analytic_decay_check, block_order_report, conjugator_verdict, gevrey_decay_check, osc_integral,
    synthetic_two_plus_two, QuadControl, Symbol, Verdict as ConjVerdict,
};
use znd_core::profile::{compute_profile, q_cj, ChemParams, GridControl};

fn report(n: u32, pass: bool, detail: String, started: Instant) {
    let line = format!(
        "criterion {n:>2}: {} ({detail}; {:.2?})\n",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn benchmark(activation: f64) -> ChemParams {
    ChemParams::new(0.2, 6.23e-2, 6.23e-1, activation, 1.53e4)
}

fn small_q() -> ChemParams {
    let qcj = q_cj(0.2, 6.23e-2).unwrap();
    ChemParams::new(0.2, 6.23e-2, 1e-3 * qcj, 6.0, 1.53e4)
}

fn hausdorff(a: &[Root], b: &[Root]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_sided = |x: &[Root], y: &[Root]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p.lambda - q.lambda).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

#[test]
fn criterion_01_profile_relations() {
    let t = Instant::now();
    let p = benchmark(6.0);
    let prof = compute_profile(&p, 1e-12, GridControl::default()).unwrap();
    let (g, ep) = (p.gamma, p.e_plus);
    let mut worst: f64 = 0.0;
    for s in &prof.grid {
        worst = worst.max((s.u - (1.0 - s.tau)).abs());
        worst = worst.max((s.e - s.tau * (g * ep + 1.0 - s.tau) / g).abs());
    }
    // Lagrangian fluxes (-u, p, p u) in the lab frame.
    let flux = |tau: f64, u: f64, e: f64| {
        let pr = g * e / tau;
        [-u, pr, pr * u]
    };
    let a = prof.neumann_minus;
    let b = prof.quiescent_plus;
    let fa = flux(a.tau, a.u, a.e);
    let fb = flux(b.tau, b.u, b.e);
    let ea = a.e + 0.5 * a.u * a.u;
    let eb = b.e + 0.5 * b.u * b.u;
    // Unit-speed shock: [f(W)] = [W] with W = (tau, u, E, z).
    let rh = [
        ((fa[0] - fb[0]) - (a.tau - b.tau)).abs(),
        ((fa[1] - fb[1]) - (a.u - b.u)).abs(),
        ((fa[2] - fb[2]) - (ea - eb)).abs(),
        (a.z - b.z).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let rh_lib = prof
        .rankine_hugoniot_residual()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let pass = worst <= 1e-12 && rh <= 1e-10 && rh_lib <= 1e-10 && prof.grid.len() > 100;
    report(
        1,
        pass,
        format!("algebraic {worst:.1e}, RH {rh:.1e} (library {rh_lib:.1e}), {} points", prof.grid.len()),
        t,
    );
    assert!(pass);
}

#[test]
fn criterion_02_qcj_identities() {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for g in [0.2, 1.2] {
        worst = worst.max(q_cj(g, 1.0 / (g * (g + 1.0))).unwrap().abs());
        worst = worst.max((q_cj(g, 0.0).unwrap() - 1.0 / (2.0 * g * (g + 2.0))).abs());
    }
    let bench = q_cj(0.2, 6.23e-2).unwrap();
    let pass = worst <= 1e-12 && bench > 6.23e-1;
    report(2, pass, format!("identity error {worst:.1e}, q_cj(0.2, 6.23e-2) = {bench:.6}"), t);
    assert!(pass);
}

#[test]
fn criterion_03_translational_zero() {
    let t = Instant::now();
    let ev = normalized_evaluator(&small_q(), EvansControls::default()).unwrap();
    let scale = (0..64)
        .map(|k| {
            let l = Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / 64.0);
            ev.evaluate(l).unwrap().log_magnitude
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let d0 = ev.evaluate(Complex64::new(0.0, 0.0)).unwrap();
    let rel = (d0.log_magnitude - scale).exp();
    let w = winding(&ev, &Contour::circle(Complex64::new(0.0, 0.0), 1e-2), &RefineControl::default()).unwrap();
    let pass = rel <= 1e-6 && w.count == 1;
    report(3, pass, format!("|D(0)|/scale = {rel:.1e}, winding {}", w.count), t);
    assert!(pass);
}

#[test]
fn criterion_04_small_heat_release_stable() {
    let t = Instant::now();
    let v = verdict_for(
        &small_q(),
        &VerdictControl {
            radius: 10.0,
            ..VerdictControl::default()
        },
    )
    .unwrap();
    let pass = v == Verdict::Stable;
    report(4, pass, format!("verdict {v:?} at radius 10 and 20"), t);
    assert!(pass);
}

#[test]
fn criterion_05_zero_activation_stable() {
    let t = Instant::now();
    let mut results = Vec::new();
    for ep in [0.01, 6.23e-2, 0.3] {
        let qcj = q_cj(0.2, ep).unwrap();
        for frac in [0.1, 0.5, 0.9] {
            let p = ChemParams::new(0.2, ep, frac * qcj, 0.0, 1.0);
            results.push(((ep, frac), verdict_for(&p, &VerdictControl::default()).unwrap()));
        }
    }
    let bad: Vec<_> = results.iter().filter(|r| !r.1.is_stable()).collect();
    let pass = bad.is_empty();
    report(5, pass, format!("{} of 9 grid points stable; failures {bad:?}", 9 - bad.len()), t);
    assert!(pass);
}

#[test]
fn criterion_06_benchmark_root_count() {
    let t = Instant::now();
    let ev = normalized_evaluator(&benchmark(7.1), EvansControls::default()).unwrap();
    let refine = RefineControl::default();
    let radius = 256.0;
    let c1 = winding(&ev, &Contour::half_disk(radius, 1e-2), &refine).unwrap().count;
    let c2 = winding(&ev, &Contour::half_disk(2.0 * radius, 1e-2), &refine).unwrap().count;
    let rep = unstable_roots(&ev, radius, 1e-2, &LocateControl::default()).unwrap();
    let located: i64 = rep.roots.iter().map(|r| r.multiplicity).sum();
    let paired = rep.roots.iter().all(|r| {
        r.lambda.im == 0.0 || rep.roots.iter().any(|s| (s.lambda - r.lambda.conj()).norm() < 1e-8)
    });
    let pass = c1 == c2 && (located - 48).abs() <= 3 && paired;
    report(
        6,
        pass,
        format!("winding {c1} at R = {radius}, {c2} at 2R; located {located}; conjugate pairs {paired}"),
        t,
    );
    assert!(pass, "expected 48 +/- 3 unstable roots, found {located}");
}

#[test]
fn criterion_07_neutral_boundary_fit() {
    let t = Instant::now();
    let base = ChemParams::new(0.2, 6.23e-2, 0.1, 1.0, 1.0);
    let qs: Vec<f64> = (0..10).map(|k| 0.05 * (1.05f64 / 0.05).powf(k as f64 / 9.0)).collect();
    let out = trace_boundary(&base, &qs, &TraceControl::default());
    let pts: Vec<_> = out.iter().filter_map(|o| o.point).collect();
    let bisected = pts.iter().all(|p| p.count_below == 0 && p.count_above > 0);
    let (_, err) = loglog_fit(&pts, 4).unwrap_or((Vec::new(), f64::INFINITY));
    let pass = pts.len() >= 8 && bisected && err <= 0.02;
    report(
        7,
        pass,
        format!("{} boundary points, degree-4 log-log mean relative error {:.3}%", pts.len(), 100.0 * err),
        t,
    );
    assert!(pass);
}

#[test]
fn criterion_08_symbol_oracle() {
    let t = Instant::now();
    let p = benchmark(6.0).with_unit_half_length().unwrap();
    let prof = eulerian_profile(&p, 1e-8, GridControl::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 200 {
        let x = rng.random_range(0.0..prof.domain_length);
        let zeta = Complex64::new(rng.random_range(0.05..3.0), rng.random_range(-3.0..3.0));
        let sp = symbol_eigs(x, zeta, &prof).unwrap();
        let st = prof.state_at(x).unwrap();
        let dense = eigenvalues(&g0_matrix(&st, p.gamma, zeta).unwrap()).unwrap();
        worst = worst.max(multiset_distance(&sp.mu, &dense));
        n += 1;
    }
    let pass = worst <= 1e-10;
    report(8, pass, format!("max multiset distance {worst:.1e} over {n} points"), t);
    assert!(pass);
}

#[test]
fn criterion_09_high_frequency_limit() {
    let t = Instant::now();
    let p = benchmark(6.0).with_unit_half_length().unwrap();
    let ev = EvansMultiD::new(&p, EvansControls::default()).unwrap();
    let r = hf_ratio(Complex64::new(1.0, 0.5), &[0.1, 0.05, 0.025, 0.0125], &ev).unwrap();
    let pass = r.monotone && (0.7..=1.3).contains(&r.order);
    let devs: Vec<String> = r.rows.iter().map(|w| format!("{:.2e}", w.deviation)).collect();
    report(9, pass, format!("deviations [{}], order {:.3}", devs.join(", "), r.order), t);
    assert!(pass);
}

#[test]
fn criterion_10_analytic_stationary_phase() {
    let t = Instant::now();
    let one = Symbol::constant(1.0);
    let hs: Vec<f64> = (0..200).map(|k| 1.0 / (10.0 + k as f64)).collect();
    let lo = analytic_decay_check(&one, 0.5, &hs).unwrap();
    let hi = analytic_decay_check(&one, 2.0, &hs).unwrap();
    let ok_lo = ((lo.rate - 0.25) / 0.25).abs() <= 0.1;
    let ok_hi = (hi.rate - 1.0).abs() <= 0.1;
    let mut gauss_ok = true;
    let mut gauss_err: f64 = 0.0;
    for h in [0.05, 0.1, 0.2] {
        let ctrl = QuadControl::default();
        let r = osc_integral(|_| Complex64::new(1.0, 0.0), f64::INFINITY, h, &ctrl).unwrap();
        let exact = (PI * h).sqrt() * (-1.0 / h).exp();
        let err = (r.value - exact).norm();
        gauss_err = gauss_err.max(err / exact);
        gauss_ok &= err <= ctrl.abs_tol + ctrl.rel_tol * exact && !r.precision_warning;
    }
    let pass = ok_lo && ok_hi && gauss_ok;
    report(
        10,
        pass,
        format!(
            "rate {:.4} at x = 0.5, {:.4} at x = 2; Gaussian identity relative error {gauss_err:.1e}",
            lo.rate, hi.rate
        ),
        t,
    );
    assert!(pass);
}

#[test]
fn criterion_11_gevrey_stationary_phase() {
    let t = Instant::now();
    let hs: Vec<f64> = (0..25).map(|k| 10f64.powf(-2.0 - 8.0 * k as f64 / 24.0)).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [1.5, 2.0, 3.0] {
        let r = gevrey_decay_check(s, 2.0, &hs).unwrap();
        pass &= r.rel_error <= 0.05;
        parts.push(format!("s = {s}: beta {:.4} (1/s = {:.4})", r.beta, 1.0 / s));
    }
    report(11, pass, parts.join(", "), t);
    assert!(pass);
}

#[test]
fn criterion_12_conjugator_dichotomy() {
    let t = Instant::now();
    let one = Symbol::constant(1.0);
    let hs: Vec<f64> = (4..=10).map(|k| 2f64.powi(-k)).collect();
    let short = conjugator_verdict(&one, 0.5, &hs, 64).unwrap();
    let long = conjugator_verdict(&one, 2.0, &hs, 64).unwrap();
    let pass = short.verdict == ConjVerdict::Bounded && long.verdict == ConjVerdict::Unbounded;
    report(
        12,
        pass,
        format!(
            "L = 0.5: {:?}, L = 2: {:?} (growth {:.3} per unit 1/h)",
            short.verdict, long.verdict, long.growth_rate
        ),
        t,
    );
    assert!(pass);
}

#[test]
fn criterion_13_riccati_iteration_order() {
    let t = Instant::now();
    let hs: Vec<f64> = (3..=10).map(|k| 2f64.powi(-k)).collect();
    let r = block_order_report(|h| synthetic_two_plus_two(h, 32), &hs, 3).unwrap();
    let pass = r.gains.len() == 3 && r.gains.iter().all(|g| (g - 1.0).abs() <= 0.1);
    let gains: Vec<String> = r.gains.iter().map(|g| format!("{g:.3}")).collect();
    report(13, pass, format!("order gains [{}]", gains.join(", ")), t);
    assert!(pass);
}

#[test]
fn criterion_14_cross_coordinate_consistency() {
    let t = Instant::now();
    let ctrl = LocateControl::default();
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, p) in [("stable", small_q()), ("unstable", benchmark(6.0))] {
        let p = p.with_unit_half_length().unwrap();
        let one = Evans1d::new(&p, EvansControls::default()).unwrap();
        let multi = EvansMultiD::new(&p, EvansControls::default()).unwrap();
        let planar = multi.at_wavenumber(0.0);
        assert!(planar.is_real());
        let r1 = unstable_roots(&one, 10.0, 1e-2, &ctrl).unwrap().roots;
        let r2 = unstable_roots(&planar, 10.0, 1e-2, &ctrl).unwrap().roots;
        let d = hausdorff(&r1, &r2);
        let counts_agree = r1.len() == r2.len();
        if name == "stable" {
            let v = verdict(&one, &VerdictControl::default()).unwrap();
            pass &= v.is_stable() && r1.is_empty();
        } else {
            pass &= !r1.is_empty();
        }
        pass &= counts_agree && d <= 1e-6;
        parts.push(format!("{name}: {} / {} roots, Hausdorff {d:.1e}", r1.len(), r2.len()));
    }
    report(14, pass, parts.join("; "), t);
    assert!(pass);
}
