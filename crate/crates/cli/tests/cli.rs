use serde_json::Value;
use sha2::{Digest, Sha256};
use std::path::Path;
use std::process::{Command, Output};
use znd_core::atlas::{winding, Contour, RefineControl};
use znd_core::atlas::verdict::normalized_evaluator;
use znd_core::evans1d::EvansControls;
use znd_core::profile::{half_reaction_length, ChemParams};

const BENCH: &str = "[params]\ngamma = 0.2\ne_plus = 0.0623\nheat_release = 0.623\nactivation = 6.0\nrate = 15300.0\n";

fn znd(args: &[&str], dir: &Path, config: &str) -> Output {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_znd"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir)
        .env_remove("ZND_THREADS")
        .output()
        .unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|x| x.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn zero_activation_verdict_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = BENCH.replace("activation = 6.0", "activation = 0.0");
    let out = znd(&["verdict"], dir.path(), &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path());
    assert_eq!(m["status"], "ok");
    assert_eq!(m["result"]["verdict"]["verdict"], "stable");
    assert_eq!(m["result"]["unstable_roots"], 0);
}

#[test]
fn profile_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = znd(&["profile"], dir.path(), BENCH);
    assert!(out.status.success());
    let header: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("profile.json")).unwrap()).unwrap();
    let params: ChemParams = serde_json::from_value(header["params"].clone()).unwrap();
    let stored = header["half_reaction_length"].as_f64().unwrap();
    let again = half_reaction_length(&params).unwrap();
    assert!((again - stored).abs() <= 1e-12 * stored.abs());

    let (cols, rows) = csv_rows(&dir.path().join("profile.csv"));
    assert_eq!(cols, ["x", "tau", "u", "e", "z", "p", "T"]);
    assert!(rows.len() > 100);
    for r in &rows {
        let v: Vec<f64> = r.iter().map(|s| s.parse().unwrap()).collect();
        // The formatted values survive a parse/format cycle unchanged.
        for (s, x) in r.iter().zip(&v) {
            assert_eq!(*s, format!("{x:.16e}"));
        }
    }
}

#[test]
fn boundary_points_satisfy_bisection_postcondition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{BENCH}[boundary]\nq = [0.1, 0.2, 0.3, 0.45, 0.6]\ntol = 1e-2\n");
    let out = znd(&["boundary"], dir.path(), &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (cols, rows) = csv_rows(&dir.path().join("boundary.csv"));
    assert_eq!(cols, ["q", "E_lo", "E_hi", "count_below", "count_above"]);
    assert_eq!(rows.len(), 5);
    let base = ChemParams::new(0.2, 0.0623, 0.623, 6.0, 15300.0);
    for r in &rows {
        let q: f64 = r[0].parse().unwrap();
        let (lo, hi): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!(hi > lo && hi - lo <= 1e-2);
        assert_eq!(r[3], "0");
        let count = |e: f64| {
            let p = ChemParams {
                heat_release: q,
                activation: e,
                ..base
            };
            let ev = normalized_evaluator(&p, EvansControls::default()).unwrap();
            winding(&ev, &Contour::half_disk(10.0, 1e-2), &RefineControl::default())
                .unwrap()
                .count
        };
        assert_eq!(count(lo), 0, "q={q}");
        assert!(count(hi) > 0, "q={q}");
    }
}

#[test]
fn outputs_are_deterministic_and_hashed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = "[oscint]\nx = [0.5, 2.0]\nh = [0.1, 0.08, 0.06, 0.05, 0.04]\ngevrey_s = [2.0]\n\
               gevrey_h = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]\nverdict_h = [0.0625, 0.03125, 0.015625]\nverdict_nx = 8\n";
    for d in [&a, &b] {
        let out = znd(&["oscint", "--threads", "1"], d.path(), cfg);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let m = manifest(a.path());
    let files = m["outputs"].as_array().unwrap();
    assert_eq!(files.len(), 2);
    for f in files {
        let name = f["path"].as_str().unwrap();
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&x)));
        assert!(!x.contains(&b'\r'));
    }
    assert_eq!(m["threads"], 1);
    assert_eq!(m["config"]["oscint"]["verdict_nx"], 8);
}

#[test]
fn error_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = znd(&["verdict"], dir.path(), "");
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(err["status"], "error");
    assert_eq!(err["kind"], "validation");

    let out = znd(&["profile"], dir.path(), &format!("{BENCH}[evans]\nrtl = 1.0\n"));
    assert_eq!(out.status.code(), Some(1));

    // A truncation point far from the burned state fails the tail check.
    let out = znd(
        &["evans1d"],
        dir.path(),
        &format!("{BENCH}[evans]\nz_min = 0.3\n[evans1d]\nlambda = [[1.0, 0.0]]\n"),
    );
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(err["kind"], "numerical");
}

#[test]
fn evans_tables_have_stable_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        "{BENCH}[evans]\nunit_half_length = true\n[evans1d]\nlambda = [[0.5, 0.0]]\n\
         [evans1d.grid]\nre = [0.1, 0.3]\nim = [1.0, 2.0]\nn_re = 2\nn_im = 2\n"
    );
    assert!(znd(&["evans1d"], dir.path(), &cfg).status.success());
    let (cols, rows) = csv_rows(&dir.path().join("evans1d.csv"));
    assert_eq!(cols, ["re_lambda", "im_lambda", "log_mag", "phase"]);
    assert_eq!(rows.len(), 5);

    let cfg = format!("{BENCH}[evans]\nunit_half_length = true\n[evans2d]\nlambda = [[0.5, 0.0]]\nxi = [0.0, 0.5]\n");
    assert!(znd(&["evans2d"], dir.path(), &cfg).status.success());
    let (cols, rows) = csv_rows(&dir.path().join("evans2d.csv"));
    assert_eq!(cols, ["xi", "re_lambda", "im_lambda", "log_mag", "phase"]);
    assert_eq!(rows.len(), 2);
}

#[test]
fn riccati_and_hifreq_reports() {
    let dir = tempfile::tempdir().unwrap();
    assert!(znd(&["riccati"], dir.path(), "").status.success());
    let m = manifest(dir.path());
    let gains = m["result"]["gains"].as_array().unwrap();
    assert_eq!(gains.len(), 3);
    for g in gains {
        assert!((g.as_f64().unwrap() - 1.0).abs() < 0.1);
    }
    let (cols, _) = csv_rows(&dir.path().join("riccati_residuals.csv"));
    assert_eq!(cols, ["h", "residual_norm", "iteration"]);

    let cfg = format!("{BENCH}[evans]\nunit_half_length = true\n[hifreq]\nh = [0.1, 0.05, 0.025]\n");
    let out = znd(&["hifreq"], dir.path(), &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path());
    assert_eq!(m["result"]["detonation_type"], "I");
    for f in ["hifreq_symbols.csv", "hifreq_glancing.csv", "hifreq_turning.csv", "hifreq_ratio.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}
