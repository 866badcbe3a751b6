use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use bvphi_cli::report::{write_bundle, ALL_FORMATS, PROFILE_HEADER};
use bvphi_cli::{run_convergence, run_scenario, Options, Scenario};

fn scenarios() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    v.sort();
    v
}

fn scenario(name: &str) -> PathBuf {
    scenarios().into_iter().find(|p| p.file_stem().unwrap() == name).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bvphi"))
}

const RIEMANN: &str = r#"
name = "flat"
eps = 0.5
times = [1.0]

[flux]
kind = "burgers"
bound = 1.0

[datum]
kind = "riemann"
left = 0.25
right = 0.25
"#;

#[test]
fn scenarios_round_trip() {
    assert!(scenarios().len() >= 4);
    for p in scenarios() {
        let sc = Scenario::load(&p).unwrap();
        let again = Scenario::from_toml(&sc.to_toml().unwrap()).unwrap();
        assert_eq!(sc, again, "{}", p.display());
    }
}

#[test]
fn malformed_eps_names_the_field() {
    let text = RIEMANN.replace("eps = 0.5", "eps = -1.0");
    let err = format!("{:#}", Scenario::from_toml(&text).unwrap_err());
    assert!(err.contains("`eps`"), "{err}");
    let text = RIEMANN.replace("left = 0.25", "left = 2.0");
    let err = format!("{:#}", Scenario::from_toml(&text).unwrap_err());
    assert!(err.contains("datum.left"), "{err}");
    let text = RIEMANN.replace("times = [1.0]", "times = [1.0, 0.0]");
    let err = format!("{:#}", Scenario::from_toml(&text).unwrap_err());
    assert!(err.contains("times[1]"), "{err}");
    let text = RIEMANN.replace("eps = 0.5", "eps = 0.5\nepsilon = 1.0");
    assert!(Scenario::from_toml(&text).is_err());
}

#[test]
fn bundles_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for p in scenarios() {
        let sc = Scenario::load(&p).unwrap();
        let a = run_scenario(&sc, &Options::default()).unwrap();
        let b = run_scenario(&sc, &Options::default()).unwrap();
        let (da, db) = (tmp.path().join("a").join(&sc.name), tmp.path().join("b").join(&sc.name));
        let fa = write_bundle(&a, &da, &ALL_FORMATS).unwrap();
        let fb = write_bundle(&b, &db, &ALL_FORMATS).unwrap();
        let again = write_bundle(&a, &db, &ALL_FORMATS).unwrap();
        assert_eq!(fa.len(), fb.len());
        for ((x, y), z) in fa.iter().zip(&fb).zip(&again) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
            assert_eq!(fs::read(x).unwrap(), fs::read(z).unwrap(), "{}", x.display());
        }
    }
}

#[test]
fn seed_changes_random_data_only_through_the_seed() {
    let sc = Scenario::load(&scenario("atomic_random")).unwrap();
    let a = run_scenario(&sc, &Options { seed: Some(1), ..Options::default() }).unwrap();
    let b = run_scenario(&sc, &Options { seed: Some(1), ..Options::default() }).unwrap();
    let c = run_scenario(&sc, &Options { seed: Some(2), ..Options::default() }).unwrap();
    assert_eq!(a.report.snapshots, b.report.snapshots);
    assert_ne!(a.report.snapshots, c.report.snapshots);
}

#[test]
fn builtin_scenarios_pass_every_asserted_check() {
    for p in scenarios() {
        let sc = Scenario::load(&p).unwrap();
        let bundle = run_scenario(&sc, &Options::default()).unwrap();
        assert!(bundle.failures().is_empty(), "{}: {:?}", sc.name, bundle.failures());
        assert!(bundle.report.checks.iter().any(|c| c.asserted));
    }
}

#[test]
fn constant_data_give_one_region_per_time() {
    let sc = Scenario::from_toml(RIEMANN).unwrap();
    let bundle = run_scenario(&sc, &Options::default()).unwrap();
    let csv = bvphi_cli::report::profiles_csv(&bundle.report.snapshots).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], PROFILE_HEADER.join(","));
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1,-inf,inf,"), "{}", lines[1]);
    assert!(lines[1].ends_with(",none,none"));
}

#[test]
fn convergence_needs_riemann_data() {
    let sc = Scenario::load(&scenario("power_steps")).unwrap();
    assert!(run_convergence(&sc, &[0.5], 5.0).is_err());
    let sc = Scenario::load(&scenario("example12")).unwrap();
    let t = run_convergence(&sc, &[0.8, 0.4], 5.0).unwrap();
    assert!(t.nonincreasing);
    assert!(run_convergence(&sc, &[0.8, -0.4], 5.0).is_err());
}

#[test]
fn list_builtins() {
    let out = bin().arg("list-builtins").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().collect();
    assert_eq!(names, ["burgers", "power(p)", "example12", "atomic(N, δ)"]);
}

#[test]
fn verify_exit_status() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario("example12");
    let ok = bin().arg("verify").arg(&cfg).arg("--out-dir").arg(tmp.path()).output().unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    for f in ["profiles.csv", "events.csv", "checks.json", "profile_0.svg"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
    let checks: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("checks.json")).unwrap()).unwrap();
    assert!(checks.as_array().unwrap().iter().all(|c| c["pass"] == true || c["asserted"] == false));
    // a negative tolerance demands slack of at least 1, which some checks lack
    let strict = bin()
        .args(["verify", "--tolerance=-1"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(1));
    let run = bin().args(["run", "--tolerance=-1"]).arg(&cfg).arg("--out-dir").arg(tmp.path()).output().unwrap();
    assert!(run.status.success());
}

#[test]
fn bad_config_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, RIEMANN.replace("eps = 0.5", "eps = -1.0")).unwrap();
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`eps`"));
}

#[test]
fn svg_has_one_path_per_region() {
    let sc = Scenario::load(&scenario("example12")).unwrap();
    let bundle = run_scenario(&sc, &Options::default()).unwrap();
    for snap in &bundle.report.snapshots {
        let svg = bvphi_cli::report::profile_svg(snap);
        assert_eq!(svg.matches("<path").count(), 2 * snap.regions.len());
    }
}

#[test]
fn phi_tables_and_formats() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = scenario("example12");
    let out = bin()
        .args(["phi", "--format", "csv"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let gauge = fs::read_to_string(tmp.path().join("gauge.csv")).unwrap();
    assert_eq!(gauge, "s,Phi\n0,0\n1,2\n2,6\n");
    assert!(!tmp.path().join("gauge.svg").exists());
}
