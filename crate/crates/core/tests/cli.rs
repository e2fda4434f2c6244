use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nsubdiv::catalog::{self, CatalogParams};
use nsubdiv::io::{GridFile, SchemeFile, SpaceFile};
use nsubdiv::*;
use num_complex::Complex64;
use tempfile::TempDir;

fn nsubdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsubdiv"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        Files {
            dir: TempDir::new().unwrap(),
        }
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn emit(&self, name: &str, id: &str, params: &str) -> PathBuf {
        let p = self.path(name);
        let o = nsubdiv(&[
            "catalog",
            "emit",
            "--id",
            id,
            "--params",
            params,
            "--out",
            s(&p),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        p
    }

    /// Explicit levels and no tau, so nothing documented rides along.
    fn emit_bare(&self, name: &str, id: &str, params: &str) -> PathBuf {
        let p = self.path(name);
        let o = nsubdiv(&[
            "catalog",
            "emit",
            "--id",
            id,
            "--params",
            params,
            "--levels",
            "6",
            "--out",
            s(&p),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let mut file: SchemeFile = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        file.tau = None;
        self.write(name, &serde_json::to_string(&file).unwrap())
    }

    fn space(&self, name: &str, space: &ExpPolySpace) -> PathBuf {
        self.write(
            name,
            &serde_json::to_string(&SpaceFile::from_space(space)).unwrap(),
        )
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn conic(lambda: f64) -> ExpPolySpace {
    let c = |x| Complex64::new(x, 0.0);
    ExpPolySpace::new(
        1,
        vec![
            ExpPolyPair::new(vec![1], vec![c(0.0)]),
            ExpPolyPair::new(vec![0], vec![c(lambda)]),
            ExpPolyPair::new(vec![0], vec![c(-lambda)]),
        ],
    )
    .unwrap()
}

#[test]
fn check_binary_dual4_exit_codes() {
    let f = Files::new();
    let scheme = f.emit("d4.json", "dual4_binary", "{}");
    let space = f.space("conic.json", &conic(1.0));
    let report = f.path("report.json");

    let ok = nsubdiv(&[
        "check",
        "--scheme",
        s(&scheme),
        "--space",
        s(&space),
        "--tau",
        "-0.5",
        "--report",
        s(&report),
    ]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("verdict: Pass"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["verdict"], "pass");
    assert_eq!(json["tau"], serde_json::json!([-0.5]));
    assert!(json["reproduction"]["records"].as_array().unwrap().len() > 10);

    let bad = nsubdiv(&[
        "check",
        "--scheme",
        s(&scheme),
        "--space",
        s(&space),
        "--tau",
        "0",
        "--report",
        s(&report),
    ]);
    assert_eq!(bad.status.code(), Some(1));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let failing: Vec<_> = json["reproduction"]["records"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["residual"].as_f64().unwrap() > 1e-9)
        .collect();
    assert!(!failing.is_empty());
}

#[test]
fn report_is_stable_across_runs() {
    let f = Files::new();
    let scheme = f.emit("d4.json", "dual4_ternary", "{}");
    let space = f.space("conic.json", &conic(1.0));
    let (a, b) = (f.path("a.json"), f.path("b.json"));
    for r in [&a, &b] {
        let o = nsubdiv(&[
            "check",
            "--scheme",
            s(&scheme),
            "--space",
            s(&space),
            "--report",
            s(r),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn input_errors_exit_2() {
    let f = Files::new();
    let bad = f.write("bad.json", "{ not json");
    let space = f.space("conic.json", &conic(1.0));
    let o = nsubdiv(&["check", "--scheme", s(&bad), "--space", s(&space)]);
    assert_eq!(o.status.code(), Some(2));

    let missing = f.path("missing.json");
    let o = nsubdiv(&["solve-tau", "--scheme", s(&missing), "--space", s(&space)]);
    assert_eq!(o.status.code(), Some(2));

    let o = nsubdiv(&["check", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));

    let o = nsubdiv(&["catalog", "emit", "--id", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_without_tau_and_unsolvable_exits_2() {
    let f = Files::new();
    let scheme = f.emit_bare(
        "sh.json",
        "sheared_convolution",
        r#"{"lambda": [[1, 0], [0.5, 0]]}"#,
    );
    let lambda = vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)];
    let space = f.space("lin.json", &ExpPolySpace::exp_polynomials(lambda, 1));
    let o = nsubdiv(&[
        "check",
        "--scheme",
        s(&scheme),
        "--space",
        s(&space),
        "--mode",
        "reproduction",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_tau_prints_documented_values() {
    let f = Files::new();
    let ternary = f.emit("t.json", "dual4_ternary", "{}");
    let space = f.space("conic.json", &conic(1.0));
    let o = nsubdiv(&["solve-tau", "--scheme", s(&ternary), "--space", s(&space)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "-0.25");

    let sqrt3 = f.emit("s3.json", "sqrt3", r#"{"variant": "approximating"}"#);
    let lin = f.space("lin.json", &ExpPolySpace::polynomials(2, 1));
    let o = nsubdiv(&["solve-tau", "--scheme", s(&sqrt3), "--space", s(&lin)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0 0");
}

#[test]
fn solve_tau_unnormalized_sheared_exits_1() {
    let f = Files::new();
    let scheme = f.emit(
        "sh.json",
        "sheared_convolution",
        r#"{"lambda": [[1, 0], [0.5, 0]]}"#,
    );
    let lambda = vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)];
    let space = f.space("lin.json", &ExpPolySpace::exp_polynomials(lambda, 1));
    let o = nsubdiv(&["solve-tau", "--scheme", s(&scheme), "--space", s(&space)]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn emit_bspline_lambda_zero_is_one_one() {
    let f = Files::new();
    let scheme = f.emit("b.json", "exp_bspline", r#"{"m": 2, "lambda": [[0, 0]]}"#);
    let file: SchemeFile = serde_json::from_str(&fs::read_to_string(&scheme).unwrap()).unwrap();
    let a = file.to_scheme().unwrap().symbol_at(0).unwrap();
    assert_eq!(a, LaurentSymbol::from_real_coeffs(0, &[1.0, 1.0]));
}

#[test]
fn catalog_list_is_complete() {
    let o = nsubdiv(&["catalog", "list"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ids: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, catalog::ids());
    for id in [
        "exp_bspline",
        "exp_product",
        "dual4_binary",
        "dual4_ternary",
        "butterfly",
        "sheared_convolution",
        "sqrt3",
    ] {
        assert!(ids.contains(&id), "{id}");
    }
}

#[test]
fn emitted_file_checks_like_in_process() {
    let f = Files::new();
    let params = r#"{"lambda": [[0, 1], [0, 1]]}"#;
    let scheme = f.emit("bf.json", "butterfly", params);
    let lambda = vec![Complex64::new(0.0, 1.0); 2];
    let space_def = ExpPolySpace::exp_polynomials(lambda, 1);
    let space = f.space("sp.json", &space_def);
    let report = f.path("r.json");
    let o = nsubdiv(&[
        "check",
        "--scheme",
        s(&scheme),
        "--space",
        s(&space),
        "--mode",
        "reproduction",
        "--kmax",
        "3",
        "--report",
        s(&report),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let from_file: ConditionReport = serde_json::from_value(json["reproduction"].clone()).unwrap();

    let p: CatalogParams = serde_json::from_str(params).unwrap();
    let direct = catalog::instantiate("butterfly", &p).unwrap();
    let in_process = check_reproduction(
        &direct,
        &space_def,
        &Parametrization::zero(2),
        0..=3,
        DEFAULT_TOL,
    )
    .unwrap();
    assert_eq!(from_file.records, in_process.records);
    assert_eq!(from_file.max_residual, in_process.max_residual);
}

#[test]
fn explicit_emit_round_trips() {
    let f = Files::new();
    let p = f.path("x.json");
    let o = nsubdiv(&[
        "catalog",
        "emit",
        "--id",
        "dual4_binary",
        "--params",
        r#"{"lambda": [[0.3, 0.2]]}"#,
        "--levels",
        "4",
        "--out",
        s(&p),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let file: SchemeFile = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(file.kind, "explicit");
    let s2 = file.to_scheme().unwrap();
    let s1 = catalog::dual4_binary(Complex64::new(0.3, 0.2)).unwrap();
    for k in 0..4 {
        assert_eq!(s1.symbol_at(k).unwrap(), s2.symbol_at(k).unwrap());
    }
    assert_eq!(s1.symbol_at(4).unwrap(), s2.symbol_at(9).unwrap());
}

#[test]
fn params_from_file() {
    let f = Files::new();
    let params = f.write("p.json", r#"{"variant": "interpolatory"}"#);
    let at = format!("@{}", s(&params));
    let o = nsubdiv(&["catalog", "emit", "--id", "sqrt3", "--params", &at]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("interpolatory"));
}

fn grid_file(g: &GridData) -> String {
    serde_json::to_string(&GridFile::from_grid(g, None).unwrap()).unwrap()
}

#[test]
fn refine_zero_levels_is_identity() {
    let f = Files::new();
    let scheme = f.emit("d4.json", "dual4_binary", "{}");
    let mut g = GridData::new(1, 0, Parametrization::new(vec![-0.5]));
    g.values.insert(vec![-1], Complex64::new(0.25, 1.0));
    g.values.insert(vec![2], Complex64::new(-3.0, 0.0));
    let input = f.write("in.json", &grid_file(&g));
    let o = nsubdiv(&[
        "refine",
        "--scheme",
        s(&scheme),
        "--input",
        s(&input),
        "--levels",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let back: GridFile = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(back.to_grid().unwrap(), g);
}

#[test]
fn refine_delta_gives_mask() {
    let f = Files::new();
    let scheme = f.emit(
        "b.json",
        "exp_bspline",
        r#"{"m": 3, "n": 2, "lambda": [[0.5, 0]]}"#,
    );
    let input = f.write(
        "delta.json",
        &grid_file(&GridData::delta(1, 0, Parametrization::zero(1))),
    );
    let out = f.path("out.csv");
    let o = nsubdiv(&[
        "refine",
        "--scheme",
        s(&scheme),
        "--input",
        s(&input),
        "--levels",
        "1",
        "--out",
        "csv",
        "--output",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mask = catalog::exp_bspline(3, Complex64::new(0.5, 0.0), 2, catalog::Normalization::None)
        .unwrap()
        .symbol_at(0)
        .unwrap();
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["i0", "t0", "re", "im"]);
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let i: i64 = rec[0].parse().unwrap();
        let t: f64 = rec[1].parse().unwrap();
        let re: f64 = rec[2].parse().unwrap();
        assert_eq!(t, i as f64 / 3.0);
        assert_eq!(re, mask.coeff(&[i]).re);
        rows += 1;
    }
    assert_eq!(rows, mask.len());
}

#[test]
fn refine_exponential_samples_with_dual4() {
    let f = Files::new();
    let scheme_path = f.emit("d4.json", "dual4_binary", "{}");
    let scheme = catalog::dual4_binary(Complex64::new(1.0, 0.0)).unwrap();
    let tau = Parametrization::new(vec![-0.5]);
    let pair = ExpPolyPair::new(vec![0], vec![Complex64::new(1.0, 0.0)]);
    let g0 = sample_exp_poly(
        &pair,
        &scheme.dilation,
        &tau,
        0,
        &Window::new(vec![-10], vec![10]),
    )
    .unwrap();
    let input = f.write("exp.json", &grid_file(&g0));
    let o = nsubdiv(&[
        "refine",
        "--scheme",
        s(&scheme_path),
        "--input",
        s(&input),
        "--levels",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out: GridFile = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(out.level, 3);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for v in &out.values {
        let t = v.t.as_ref().unwrap()[0];
        // three rounds of a 4-tap stencil eat at most 4 coarse samples from each side
        if t.abs() <= 5.0 {
            worst = worst.max((v.c - Complex64::new(t.exp(), 0.0)).norm() / t.exp().max(1.0));
            checked += 1;
        }
    }
    assert!(checked > 70);
    assert!(worst < 1e-9, "{worst:e}");
}

#[test]
fn limit_of_exp_bspline_samples_exponential() {
    let f = Files::new();
    let scheme = f.emit("b.json", "exp_bspline", r#"{"m": 2, "lambda": [[1, 0]]}"#);
    let out = f.path("limit.csv");
    let o = nsubdiv(&[
        "limit",
        "--scheme",
        s(&scheme),
        "--rounds",
        "12",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["t0", "re", "im"]);
    let mut found = false;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let t: f64 = rec[0].parse().unwrap();
        if t == 0.5 {
            let re: f64 = rec[1].parse().unwrap();
            assert!((re - 0.5f64.exp()).abs() < 1e-3);
            found = true;
        }
    }
    assert!(found);
}

#[test]
fn generation_mode_needs_no_tau() {
    let f = Files::new();
    let scheme = f.emit_bare("bf.json", "butterfly", "{}");
    let lambda = vec![Complex64::new(1.0, 0.0); 2];
    let space = f.space("sp.json", &ExpPolySpace::exp_polynomials(lambda, 3));
    let o = nsubdiv(&[
        "check",
        "--scheme",
        s(&scheme),
        "--space",
        s(&space),
        "--mode",
        "generation",
        "--kmax",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("tau:"));
}
