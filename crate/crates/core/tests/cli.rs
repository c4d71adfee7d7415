use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use wrtkit::fields::rel_l2_error;
use wrtkit::io;

const GAUSS: &str = r#"{"kind":"gaussian","center":[0.3,-0.2],"sigma":0.5}"#;
const WINDOW: &str = r#"{"kind":"gaussian","sigma":1.0}"#;

fn wrtkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wrtkit")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

struct Work(TempDir);

impl Work {
    fn new() -> Self {
        Work(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }
}

fn phantom(w: &Work, spec: &str, name: &str, extra: &[&str]) -> Output {
    let out = w.s(name);
    let mut args = vec!["phantom", "--spec", spec, "--out", &out];
    args.extend_from_slice(extra);
    wrtkit(&args)
}

#[test]
fn phantom_shape_and_bad_spec() {
    let w = Work::new();
    let out = phantom(&w, GAUSS, "g", &["--shape", "64"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let f = io::read_scalar_field(&w.path("g")).unwrap();
    assert_eq!(f.grid.shape, vec![64, 64]);

    let out = phantom(&w, r#"{"kind":"gaussian","center":[0,0]}"#, "bad", &[]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("sigma"), "{}", stderr(&out));
    let out = phantom(&w, "{not json", "bad", &[]);
    assert_eq!(code(&out), 1);
}

#[test]
fn mixture_is_sum_of_bumps() {
    let w = Work::new();
    phantom(&w, r#"{"kind":"gaussian","center":[0.5,0],"sigma":0.4,"amplitude":1.0}"#, "a", &["--shape", "32"]);
    phantom(&w, r#"{"kind":"gaussian","center":[-1,0.5],"sigma":0.7,"amplitude":0.5}"#, "b", &["--shape", "32"]);
    let mix = r#"{"kind":"gaussian-mixture","components":[
        {"center":[0.5,0],"sigma":0.4,"amplitude":1.0},{"center":[-1,0.5],"sigma":0.7,"amplitude":0.5}]}"#;
    phantom(&w, mix, "m", &["--shape", "32"]);
    let a = io::read_scalar_field(&w.path("a")).unwrap();
    let b = io::read_scalar_field(&w.path("b")).unwrap();
    let m = io::read_scalar_field(&w.path("m")).unwrap();
    for i in 0..m.values.len() {
        assert!((m.values[i] - a.values[i] - b.values[i]).abs() < 1e-15);
    }
}

#[test]
fn forward_shape_oracle_and_dtype() {
    let w = Work::new();
    let out = w.s("d");
    let res = wrtkit(&[
        "--json", "forward", "--phantom", GAUSS, "--window", WINDOW, "--shape", "64", "--dirs", "8", "--n-radii", "4",
        "--r-max", "4", "--oracle", "--out", &out,
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let report = json_stdout(&res);
    assert!(report["oracle_max_rel_deviation"].as_f64().unwrap() <= 1e-8);
    let d = io::read_wrt(&w.path("d")).unwrap();
    assert_eq!((d.u_grid.len(), d.nv()), (4096, 32));
    assert_eq!(d.values.len(), 4096 * 32);

    let out = w.s("ast");
    let res = wrtkit(&[
        "forward", "--phantom", GAUSS, "--window", r#"{"kind":"analytic-signal"}"#, "--shape", "8", "--dirs", "2",
        "--n-radii", "2", "--out", &out,
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    assert!(io::read_wrt(&w.path("ast")).unwrap().is_complex());
}

fn bytes(dir: &Path) -> Vec<u8> {
    std::fs::read(dir.join(io::DATA_FILE)).unwrap()
}

#[test]
fn seeded_runs_are_bit_identical() {
    let w = Work::new();
    let run = |name: &str, seed: &str| {
        let out = w.s(name);
        let res = wrtkit(&[
            "--seed", seed, "forward", "--phantom", GAUSS, "--window", WINDOW, "--shape", "12", "--dirs", "5",
            "--n-radii", "3", "--jitter", "--out", &out,
        ]);
        assert_eq!(code(&res), 0, "{}", stderr(&res));
    };
    run("a", "11");
    run("b", "11");
    run("c", "12");
    assert_eq!(bytes(&w.path("a")), bytes(&w.path("b")));
    assert_ne!(bytes(&w.path("a")), bytes(&w.path("c")));
    let meta = |n: &str| std::fs::read_to_string(w.path(n).join(io::META_FILE)).unwrap();
    assert_eq!(meta("a"), meta("b"));
}

#[test]
fn compare_metrics() {
    let w = Work::new();
    phantom(&w, GAUSS, "f", &["--shape", "32"]);
    phantom(&w, r#"{"kind":"gaussian","center":[0.3,-0.2],"sigma":0.5,"amplitude":1.1}"#, "f11", &["--shape", "32"]);
    phantom(&w, GAUSS, "small", &["--shape", "16"]);

    let res = wrtkit(&["--json", "compare", &w.s("f"), &w.s("f")]);
    assert_eq!(json_stdout(&res)["rel_l2"].as_f64().unwrap(), 0.0);

    let pgm = w.s("diff.pgm");
    let res = wrtkit(&["--json", "compare", &w.s("f11"), &w.s("f"), "--pgm", &pgm]);
    assert_eq!(code(&res), 0);
    assert!((json_stdout(&res)["rel_l2"].as_f64().unwrap() - 0.1).abs() < 1e-12);
    assert!(std::fs::read(&pgm).unwrap().starts_with(b"P5\n32 32\n255\n"));

    let res = wrtkit(&["compare", &w.s("f"), &w.s("small")]);
    assert_eq!(code(&res), 1);
}

#[test]
fn invert_and_compare_match_library_metric() {
    let w = Work::new();
    let data = w.s("d");
    let res = wrtkit(&[
        "forward", "--phantom", GAUSS, "--window", WINDOW, "--shape", "32", "--extent", "16", "--dirs", "24",
        "--r-min", "0.05", "--r-max", "2", "--n-radii", "12", "--out", &data,
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    phantom(&w, GAUSS, "truth", &["--shape", "16", "--extent", "8"]);
    let rec = w.s("rec");
    let res = wrtkit(&["invert", "--method", "t2", "--input", &data, "--shape", "16", "--extent", "8", "--out", &rec]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    assert!(String::from_utf8_lossy(&res.stdout).contains("Derived"));

    let res = wrtkit(&["--json", "compare", &rec, &w.s("truth")]);
    let reported = json_stdout(&res)["rel_l2"].as_f64().unwrap();
    let a = io::read_scalar_field(&w.path("rec")).unwrap();
    let b = io::read_scalar_field(&w.path("truth")).unwrap();
    assert_eq!(reported, rel_l2_error(&a, &b).unwrap());
    assert!(reported < 0.1, "{reported}");

    // Geometry mismatch is a validation error.
    let res = wrtkit(&["invert", "--method", "slice", "--input", &data, "--out", &rec]);
    assert_eq!(code(&res), 1);
    assert!(stderr(&res).contains("v1-line"));
}

#[test]
fn calibrate_rejects_degenerate_set() {
    let set = r#"[{"kind":"gaussian","center":[0,0],"sigma":0.5},
                  {"kind":"gaussian","center":[0,0],"sigma":0.5,"amplitude":0},
                  {"kind":"gaussian","center":[1,0],"sigma":0.5}]"#;
    let res = wrtkit(&["calibrate", "--method", "t2", "--phantoms", set, "--shape", "8"]);
    assert_eq!(code(&res), 1);
    assert!(stderr(&res).contains("degenerate"));
    let res = wrtkit(&["calibrate", "--method", "t3"]);
    assert_eq!(code(&res), 1);
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(code(&wrtkit(&["bogus"])), 1);
    assert_eq!(code(&wrtkit(&["invert", "--method", "t9", "--input", "x", "--out", "y"])), 1);
    assert_eq!(code(&wrtkit(&["--help"])), 0);
    let res = Command::new(env!("CARGO_BIN_EXE_wrtkit"))
        .env("WRTKIT_THREADS", "many")
        .args(["phantom", "--spec", GAUSS, "--out", "/dev/null/x"])
        .output()
        .unwrap();
    assert_eq!(code(&res), 1);
}

#[test]
fn selftest_fault_injection() {
    let res = wrtkit(&["--json", "selftest", "--corrupt-constant"]);
    assert_eq!(code(&res), 2);
    let report = json_stdout(&res);
    let failed: Vec<&str> = report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| !r["passed"].as_bool().unwrap())
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, vec!["bp/reconstruction", "fourier/reconstruction"]);
}
