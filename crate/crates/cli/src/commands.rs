//! Subcommand bodies: each computes, writes its artifacts and returns the
//! summary placed in the manifest.

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;
use znd_core::atlas::{locate_roots, trace_boundary, unstable_roots, verdict_for, Verdict};
use znd_core::evans1d::Evans1d;
use znd_core::hifreq::{classify_type, glancing_locus, hf_ratio, symbol_eigs, turning_points_profile};
use znd_core::multid::{eulerian_profile, EvansMultiD};
use znd_core::oscint::{
    analytic_decay_check, conjugator_verdict, gevrey_decay_check, optimal_alpha0, osc_integral,
    riccati_scalar, synthetic_two_plus_two, block_order_report, QuadControl, Symbol,
    Verdict as ConjVerdict,
};
use znd_core::profile::{compute_profile, GridControl};

use crate::config::RunConfig;
use crate::output::{num, Artifacts};
use crate::CliError;

pub struct Outcome {
    pub result: serde_json::Value,
    pub counts: serde_json::Value,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn new(result: serde_json::Value, counts: serde_json::Value) -> Self {
        Self {
            result,
            counts,
            warnings: Vec::new(),
        }
    }
}

fn cplx(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn profile(cfg: &RunConfig, out: &mut Artifacts) -> Result<Outcome, CliError> {
    let params = cfg.chem_params()?;
    let prof = compute_profile(
        &params,
        cfg.profile.z_min,
        GridControl {
            intervals: cfg.profile.intervals,
        },
    )?;
    let rows: Vec<Vec<String>> = prof
        .grid
        .iter()
        .map(|p| vec![num(p.x), num(p.tau), num(p.u), num(p.e), num(p.z), num(p.p), num(p.temperature)])
        .collect();
    out.write_csv("profile.csv", &["x", "tau", "u", "e", "z", "p", "T"], &rows)?;
    let header = json!({
        "params": params,
        "z_min": prof.z_min,
        "half_reaction_length": prof.half_reaction_length,
        "domain_length": prof.domain_length,
        "neumann_minus": prof.neumann_minus,
        "quiescent_plus": prof.quiescent_plus,
        "rankine_hugoniot_residual": prof.rankine_hugoniot_residual(),
        "algebraic_residual": prof.algebraic_residual(),
    });
    out.write_json("profile.json", &header)?;
    Ok(Outcome::new(
        json!({
            "half_reaction_length": prof.half_reaction_length,
            "domain_length": prof.domain_length,
        }),
        json!({ "grid_points": prof.grid.len() }),
    ))
}

pub fn evans1d(cfg: &RunConfig, out: &mut Artifacts) -> Result<Outcome, CliError> {
    let points = cfg.evans1d.points();
    if points.is_empty() {
        return Err(CliError::Validation("evans1d needs [evans1d] lambda or grid".into()));
    }
    let ev = Evans1d::new(&cfg.evans_params()?, cfg.evans.controls())?;
    let values = points
        .par_iter()
        .map(|&p| ev.evaluate(cplx(p)))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .zip(&values)
        .map(|(p, v)| vec![num(p[0]), num(p[1]), num(v.log_magnitude), num(v.phase)])
        .collect();
    out.write_csv("evans1d.csv", &["re_lambda", "im_lambda", "log_mag", "phase"], &rows)?;
    Ok(Outcome::new(json!({}), json!({ "evaluations": points.len() })))
}

pub fn roots(cfg: &RunConfig, out: &mut Artifacts) -> Result<Outcome, CliError> {
    let ev = Evans1d::new(&cfg.evans_params()?, cfg.evans.controls())?;
    let r = &cfg.roots;
    let ctrl = r.control();
    let (report, rectangle) = match (r.lo, r.hi) {
        (Some(lo), Some(hi)) => (locate_roots(&ev, cplx(lo), cplx(hi), &ctrl)?, true),
        (None, None) => (unstable_roots(&ev, r.radius, r.exclusion, &ctrl)?, false),
        _ => return Err(CliError::Validation("roots.lo and roots.hi must be given together".into())),
    };
    let list: Vec<serde_json::Value> = report
        .roots
        .iter()
        .map(|z| json!({ "re": z.lambda.re, "im": z.lambda.im, "multiplicity": z.multiplicity }))
        .collect();
    let total: i64 = report.roots.iter().map(|z| z.multiplicity).sum();
    let mut o = Outcome::new(
        json!({ "located": total, "search_region_count": report.region_count }),
        json!({ "boxes": report.boxes, "evaluations": report.evaluations }),
    );
    // The half-disk search box also holds the translational zero and only
    // the upper half plane, so the totals agree only in rectangle mode.
    if rectangle && total != report.region_count {
        o.warnings.push(format!(
            "located multiplicity {total} differs from the region winding count {}",
            report.region_count
        ));
    }
    out.write_json("roots.json", &json!({ "roots": list }))?;
    Ok(o)
}

pub fn verdict(cfg: &RunConfig, out: &mut Artifacts) -> Result<Outcome, CliError> {
    let params = cfg.chem_params()?;
    let v = verdict_for(&params, &cfg.verdict.control())?;
    let unstable = match v {
        Verdict::Stable => 0,
        Verdict::Unstable { count } => count,
        Verdict::Inconclusive { count, .. } => count,
    };
    let mut o = Outcome::new(
        json!({ "verdict": v, "unstable_roots": unstable }),
        json!({ "windings": 2 }),
    );
    if let Verdict::Inconclusive { count, count_doubled } = v {
        o.warnings.push(format!(
            "inconclusive verdict: count {count} at radius R, {count_doubled} at 2R"
        ));
    }
    out.write_json("verdict.json", &o.result)?;
    Ok(o)
}

pub fn boundary(cfg: &RunConfig, out: &mut Artifacts) -> Result<Outcome, CliError> {
    let base = cfg.chem_params()?;
    if cfg.boundary.q.is_empty() {
        return Err(CliError::Validation("boundary needs a nonempty boundary.q grid".into()));
    }
    let outcomes = trace_boundary(&base, &cfg.boundary.q, &cfg.boundary.control());
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for o in &outcomes {
        match (&o.point, &o.message) {
            (Some(p), _) => rows.push(vec![
                num(p.q),
                num(p.e_lo),
                num(p.e_hi),
                p.count_below.to_string(),
                p.count_above.to_string(),
            ]),
            (None, m) => warnings.push(format!("q = {}: {}", o.q, m.clone().unwrap_or_default())),
        }
    }
    out.write_csv("boundary.csv", &["q", "E_lo", "E_hi", "count_below", "count_above"], &rows)?;
    let mut o = Outcome::new(
        json!({ "points": rows.len(), "failed": outcomes.len() - rows.len() }),
        json!({ "q_points": outcomes.len() }),
    );
    o.warnings = warnings;
    Ok(o)
}

pub fn evans2d(cfg: &RunConfig, out: &mut Artifacts) -> Result<Outcome, CliError> {
    let s = &cfg.evans2d;
    let mut lambdas = s.lambda.clone();
    if let Some(g) = &s.grid {
        lambdas.extend(g.points());
    }
    if lambdas.is_empty() || s.xi.is_empty() {
        return Err(CliError::Validation("evans2d needs lambda values and a xi list".into()));
    }
    let ev = EvansMultiD::new(&cfg.evans_params()?, cfg.evans.controls())?;
    let jobs: Vec<(f64, [f64; 2])> = s
        .xi
        .iter()
        .flat_map(|&xi| lambdas.iter().map(move |&l| (xi, l)))
        .collect();
    let values = jobs
        .par_iter()
        .map(|&(xi, l)| ev.evaluate(cplx(l), xi))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> = jobs
        .iter()
        .zip(&values)
        .map(|((xi, l), v)| vec![num(*xi), num(l[0]), num(l[1]), num(v.log_magnitude), num(v.phase)])
        .collect();
    out.write_csv("evans2d.csv", &["xi", "re_lambda", "im_lambda", "log_mag", "phase"], &rows)?;
    Ok(Outcome::new(json!({}), json!({ "evaluations": jobs.len() })))
}

pub fn hifreq(cfg: &RunConfig, out: &mut Artifacts) -> Result<Outcome, CliError> {
    let params = cfg.evans_params()?;
    let s = &cfg.hifreq;
    let zeta = cplx(s.zeta);
    let prof = eulerian_profile(
        &params,
        cfg.profile.z_min,
        GridControl {
            intervals: cfg.profile.intervals,
        },
    )?;
    let n = s.symbol_points.max(2);
    let mut sym_rows = Vec::with_capacity(n);
    for k in 0..n {
        let x = prof.domain_length * k as f64 / (n - 1) as f64;
        let sp = symbol_eigs(x, zeta, &prof)?;
        let mut r = vec![num(x), num(zeta.re), num(zeta.im)];
        for m in &sp.mu {
            r.push(num(m.re));
            r.push(num(m.im));
        }
        sym_rows.push(r);
    }
    out.write_csv(
        "hifreq_symbols.csv",
        &[
            "x", "re_zeta", "im_zeta", "re_mu1", "im_mu1", "re_mu2", "im_mu2", "re_mu3", "im_mu3", "re_mu4",
            "im_mu4", "re_mu5", "im_mu5",
        ],
        &sym_rows,
    )?;
    let glancing: Vec<Vec<String>> = glancing_locus(&prof)
        .iter()
        .map(|g| vec![num(g.x), num(g.zeta.re), num(g.zeta.im)])
        .collect();
    out.write_csv("hifreq_glancing.csv", &["x", "re_zeta", "im_zeta"], &glancing)?;
    let turning = turning_points_profile(zeta, &prof, s.n_scan)?;
    let trows: Vec<Vec<String>> = turning
        .iter()
        .map(|t| {
            vec![
                num(t.x_star),
                num(t.zeta_star.re),
                num(t.zeta_star.im),
                num(t.ds2),
                t.nondegenerate.to_string(),
            ]
        })
        .collect();
    out.write_csv(
        "hifreq_turning.csv",
        &["x_star", "re_zeta", "im_zeta", "ds2", "nondegenerate"],
        &trows,
    )?;
    let mut warnings = Vec::new();
    let ratio = if s.h.is_empty() {
        None
    } else {
        let ev = EvansMultiD::new(&params, cfg.evans.controls())?;
        let r = hf_ratio(zeta, &s.h, &ev)?;
        let rows: Vec<Vec<String>> = r
            .rows
            .iter()
            .map(|w| vec![num(w.h), num(w.ratio.re), num(w.ratio.im), num(w.deviation)])
            .collect();
        out.write_csv("hifreq_ratio.csv", &["h", "re_ratio", "im_ratio", "deviation"], &rows)?;
        if !r.monotone {
            warnings.push("ratio deviation is not monotone in h".to_string());
        }
        Some(json!({ "order": r.order, "monotone": r.monotone }))
    };
    let ty = classify_type(&prof);
    let mut o = Outcome::new(
        json!({ "detonation_type": ty, "turning_points": turning.len(), "ratio": ratio }),
        json!({ "symbol_points": n, "h_points": s.h.len() }),
    );
    o.warnings = warnings;
    out.write_json("hifreq.json", &o.result)?;
    Ok(o)
}

pub fn oscint(cfg: &RunConfig, out: &mut Artifacts) -> Result<Outcome, CliError> {
    let s = &cfg.oscint;
    let symbol = Symbol::Polynomial(s.symbol.clone());
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &x in &s.x {
        let r = analytic_decay_check(&symbol, x, &s.h)?;
        for w in &r.rows {
            rows.push(vec!["analytic".into(), num(w.x), num(w.h), num(w.log_abs), num(w.arg)]);
        }
        fits.push(json!({
            "x": x, "rate": r.rate, "predicted_rate": r.predicted_rate,
            "prefactor_exponent": r.prefactor_exponent, "fitted_rows": r.fitted_rows,
        }));
    }
    let mut gevrey = Vec::new();
    for &gs in &s.gevrey_s {
        let r = gevrey_decay_check(gs, s.gevrey_x, &s.gevrey_h)?;
        for w in &r.rows {
            rows.push(vec![format!("gevrey_s={gs}"), num(w.x), num(w.h), num(w.log_abs), num(w.arg)]);
        }
        gevrey.push(json!({
            "s": gs, "beta": r.beta, "expected_beta": r.expected_beta, "c": r.c,
            "gamma": r.gamma, "residual": r.residual, "condition": r.condition,
        }));
    }
    out.write_csv("oscint_decay.csv", &["symbol", "x", "h", "log_abs_I", "arg_I"], &rows)?;
    let mut warnings = Vec::new();
    let mut gaussian = Vec::new();
    for &h in &s.gaussian_h {
        let r = osc_integral(
            |y| Complex64::new(symbol.eval(y), 0.0),
            f64::INFINITY,
            h,
            &QuadControl::default(),
        )?;
        if r.precision_warning {
            warnings.push(format!("precision limit reached for the real-line integral at h = {h}"));
        }
        gaussian.push(json!({ "h": h, "re": r.value.re, "im": r.value.im, "error": r.error }));
    }
    let mut verdicts = Vec::new();
    for &l in &s.verdict_l {
        let v = conjugator_verdict(&symbol, l, &s.verdict_h, s.verdict_nx)?;
        if v.verdict == ConjVerdict::Inconclusive {
            warnings.push(format!("inconclusive conjugator verdict at L = {l}"));
        }
        verdicts.push(v);
    }
    let result = json!({ "analytic": fits, "gevrey": gevrey, "gaussian": gaussian, "verdicts": verdicts });
    out.write_json("oscint.json", &result)?;
    let mut o = Outcome::new(
        json!({ "analytic": fits, "gevrey": gevrey, "verdicts": verdicts.iter().map(|v| json!({"l": v.l, "verdict": v.verdict})).collect::<Vec<_>>() }),
        json!({ "decay_rows": rows.len() }),
    );
    o.warnings = warnings;
    Ok(o)
}

pub fn riccati(cfg: &RunConfig, out: &mut Artifacts) -> Result<Outcome, CliError> {
    let s = &cfg.riccati;
    if s.h.len() < 2 {
        return Err(CliError::Validation("riccati.h needs at least two values".into()));
    }
    let report = block_order_report(|h| synthetic_two_plus_two(h, s.degree), &s.h, s.iterations)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| vec![num(r.h), num(r.residual), r.iteration.to_string()])
        .collect();
    out.write_csv("riccati_residuals.csv", &["h", "residual_norm", "iteration"], &rows)?;

    let theta = Symbol::Polynomial(s.theta.clone());
    let alpha0 = match s.alpha0 {
        Some(a) => cplx(a),
        None => {
            let a = optimal_alpha0(&theta, s.scalar_h, s.scalar_l)?;
            if a.log_magnitude.abs() > znd_core::oscint::RAW_LOG_LIMIT {
                return Err(CliError::Numerical(
                    "optimal alpha0 lies outside the raw double range".into(),
                ));
            }
            a.to_complex()
        }
    };
    let sc = riccati_scalar(&theta, alpha0, s.scalar_h, s.scalar_l, s.scalar_points)?;
    let srows: Vec<Vec<String>> = sc
        .points
        .iter()
        .map(|p| vec![num(p.x), num(p.log_abs), num(p.arg)])
        .collect();
    out.write_csv("riccati_scalar.csv", &["x", "log_abs_alpha", "arg_alpha"], &srows)?;
    let result = json!({
        "orders": report.orders,
        "gains": report.gains,
        "scalar": { "h": sc.h, "l": sc.l, "alpha0": [alpha0.re, alpha0.im], "ode_deviation": sc.ode_deviation },
    });
    out.write_json("riccati.json", &result)?;
    Ok(Outcome::new(result, json!({ "h_points": s.h.len(), "iterations": s.iterations })))
}
