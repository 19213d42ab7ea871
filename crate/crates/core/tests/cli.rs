use std::path::PathBuf;
use std::process::{Command, Output};

use carnot_core::cli::{load_algebra, load_frame, AlgebraFile, FrameFile};
use carnot_core::fixtures;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carnot"))
        .current_dir(fixture(""))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

const ALGEBRAS: &[(&str, &str)] = &[
    ("heisenberg23", "heisenberg23.json"),
    ("rolling235", "rolling235.json"),
    ("free_step2_n3", "free2_n3.json"),
    ("free_step2_n4", "free2_n4.json"),
    ("contact_std", "contact_std.json"),
    ("contact_two_eigen", "contact_two_eigen.json"),
];

const MODELS: &[(&str, &str)] = &[
    ("heis_model", "heis_model.json"),
    ("heis_perturbed", "heis_perturbed.json"),
    ("heis_polynomial", "heis_polynomial.json"),
    ("rolling_model", "rolling_model.json"),
    ("rolling_perturbed", "rolling_perturbed.json"),
    ("free2_n3_model", "free2_n3_model.json"),
    ("free2_n4_model", "free2_n4_model.json"),
    ("contact_std_model", "contact_std_model.json"),
    ("contact_two_eigen_model", "contact_two_eigen_model.json"),
];

#[test]
fn fixture_files_match_the_builtin_fixtures() {
    for ((name, spec), (fname, file)) in fixtures::all().into_iter().zip(ALGEBRAS) {
        assert_eq!(name, *fname);
        let (loaded, _) = load_algebra(&fixture(file)).unwrap();
        assert_eq!(loaded, spec, "{name}");
        assert_eq!(AlgebraFile::from_spec(&spec).to_spec(name).unwrap(), spec, "{name}");
    }
    for ((name, spec), (fname, file)) in fixtures::all_models().into_iter().zip(MODELS) {
        assert_eq!(name, *fname);
        let (loaded, _) = load_frame(&fixture(file)).unwrap();
        assert_eq!(loaded, spec, "{name}");
        let again = FrameFile::from_spec(&spec);
        let symbol = spec.symbol.clone();
        assert_eq!(again.to_spec(name, symbol).unwrap(), spec, "{name}");
    }
}

#[test]
fn check_reports_g0() {
    let out = run(&["check", "heisenberg23.json"]);
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["command"], "check");
    assert_eq!(r["results"]["dim_g0"], 1);
    assert_eq!(r["results"]["tanaka_rigidity"], true);
}

#[test]
fn complex_identities_hold() {
    let out = run(&["complex", "rolling235.json", "--k", "1"]);
    assert!(out.status.success());
    let ids = &json(&out)["results"]["identities"];
    assert!(ids.as_object().unwrap().values().all(|v| v == true), "{ids}");
}

#[test]
fn normalize_heisenberg_unit_curvature() {
    let out = run(&["normalize", "heisenberg23.json", "heis_unit_kappa.json"]);
    assert!(out.status.success());
    let r = json(&out)["results"].clone();
    assert_eq!(r["alpha_1"], serde_json::json!({"s1|A1": "1"}));
    assert_eq!(r["kappa_1"], serde_json::json!({}));
}

#[test]
fn exit_codes() {
    let inconsistent = run(&["normalize", "rolling235.json", "rolling_non_closed_kappa.json"]);
    assert_eq!(inconsistent.status.code(), Some(2));
    assert!(json(&inconsistent)["results"]["residual"].is_array());
    assert_eq!(run(&["check", "malformed_brackets.json"]).status.code(), Some(1));
    assert_eq!(run(&["frame", "underfull_frame.json"]).status.code(), Some(1));
    assert_eq!(run(&["check", "no_such_file.json"]).status.code(), Some(1));
    assert_eq!(run(&["normalize", "rolling235.json", "zero_kappa.json", "--rule", "literal"]).status.code(), Some(0));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let mut runs: Vec<Vec<String>> = ALGEBRAS
        .iter()
        .flat_map(|(_, f)| {
            [vec!["check".to_string(), f.to_string()], vec!["complex".into(), f.to_string(), "--k".into(), "2".into()]]
        })
        .collect();
    runs.extend(MODELS.iter().map(|(_, f)| vec!["frame".to_string(), f.to_string()]));
    for args in runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (a, b) = (run(&args), run(&args));
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn out_flag_writes_the_same_report() {
    let dir = std::env::temp_dir().join(format!("carnot-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let to_file = run(&["--out", path.to_str().unwrap(), "check", "rolling235.json"]);
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), run(&["check", "rolling235.json"]).stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}
