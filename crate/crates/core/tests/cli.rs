use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"))
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contact"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn integrate_damped_oscillator() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["integrate"], &scenario("damped_oscillator"), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&dir.path().join("trajectory.csv"));
    assert_eq!(header, ["t", "x1", "y1", "z", "H", "RH", "energy_defect", "div_defect"]);
    assert_eq!(rows.len(), 10_001);
    for r in &rows {
        assert!((r[4] - 0.5 * (-0.1 * r[0]).exp()).abs() <= 1e-6);
    }
    let report = read_json(&dir.path().join("integrate.json"));
    for key in ["tool", "version", "command", "config_sha256", "seed", "passed", "result"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report["command"], "integrate");
    assert_eq!(report["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn integrate_conservative_keeps_energy_defect_small() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["integrate"], &scenario("conservative"), dir.path());
    assert_eq!(code(&o), 0);
    for i in 0..2 {
        let (header, rows) = csv_rows(&dir.path().join(format!("trajectory_{i}.csv")));
        let col = header.iter().position(|h| h == "energy_defect").unwrap();
        assert!(rows.iter().all(|r| r[col] <= 1e-9));
    }
}

#[test]
fn malformed_expression_is_a_config_error_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("damped_oscillator"))
        .unwrap()
        .replace("(x1^2 + y1^2)/2 + $gamma*z", "(x1^2 + + y1^2");
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, text).unwrap();
    let out = dir.path().join("out");
    let o = run(&["integrate"], &cfg, &out);
    assert_eq!(code(&o), 2);
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    assert!(!out.exists());
}

#[test]
fn unknown_keys_and_missing_config_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("damped_oscillator")).unwrap() + "\n[extra]\nkey = 1\n";
    let cfg = dir.path().join("extra.toml");
    std::fs::write(&cfg, text).unwrap();
    assert_eq!(code(&run(&["integrate"], &cfg, dir.path())), 2);
    assert_eq!(code(&run(&["integrate"], &dir.path().join("absent.toml"), dir.path())), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_contact")).arg("integrate").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn blow_up_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("blowup.toml");
    std::fs::write(
        &cfg,
        "initial_conditions = [[0.0, 0.0, -1.0]]\n[chart]\nn = 1\n[hamiltonian]\nexpr = \"z^2\"\n\
         [integrator]\nmethod = \"rk4\"\nt1 = 2.0\nstep = 0.01\n",
    )
    .unwrap();
    assert_eq!(code(&run(&["integrate"], &cfg, &dir.path().join("out"))), 3);
}

#[test]
fn check_exit_codes() {
    let cases = [
        ("brackets", "brackets", 0),
        ("submanifold", "coisotropic", 0),
        ("submanifold", "not_coisotropic", 1),
        ("submanifold", "legendrian_curve", 0),
        ("lift", "lift_hamiltonian", 0),
        ("frame", "brackets", 0),
    ];
    for (what, name, expected) in cases {
        let dir = tempfile::tempdir().unwrap();
        let o = run(&["check", what], &scenario(name), dir.path());
        assert_eq!(code(&o), expected, "check {what} on {name}: {}", String::from_utf8_lossy(&o.stderr));
        let report = read_json(&dir.path().join(format!("check_{what}.json")));
        assert_eq!(report["passed"], Value::Bool(expected == 0));
    }
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check", "submanifold"], &scenario("not_coisotropic"), dir.path());
    assert_eq!(code(&o), 1);
    let text = std::fs::read_to_string(dir.path().join("check_submanifold.json")).unwrap();
    assert!(text.contains("max_residual"));
}

#[test]
fn lift_check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["lift-check"], &scenario("lift_hamiltonian"), dir.path())), 0);
    assert_eq!(code(&run(&["lift-check"], &scenario("lift_non_hamiltonian"), dir.path())), 1);
    assert!(dir.path().join("lift_check.json").exists());
}

#[test]
fn reduce_worked_example_and_guarded_paths() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["reduce"], &scenario("reduction"), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&dir.path().join("reduce_mismatch.csv"));
    let col = header.iter().position(|h| h == "mismatch").unwrap();
    assert!(!rows.is_empty() && rows.iter().all(|r| r[col] <= 1e-6));
    assert!(dir.path().join("reduced.toml").exists());
    assert!(dir.path().join("reconstruction.csv").exists());
    let reduced = std::fs::read_to_string(dir.path().join("reduced.toml")).unwrap();
    let parsed: toml::Value = toml::from_str(&reduced).unwrap();
    assert_eq!(parsed["chart"]["n"].as_integer(), Some(1));

    let o = run(&["reduce"], &scenario("reduction_nonzero_mu"), &dir.path().join("mu"));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("0"));
    let o = run(&["reduce"], &scenario("reduction_not_invariant"), &dir.path().join("inv"));
    assert_eq!(code(&o), 1);
}

#[test]
fn outputs_are_deterministic_and_seed_sensitive() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (args, name, file) in [
        (vec!["check", "brackets"], "brackets", "check_brackets.json"),
        (vec!["integrate"], "damped_oscillator", "trajectory.csv"),
        (vec!["integrate"], "damped_oscillator", "integrate.json"),
        (vec!["reduce"], "reduction", "reduce.json"),
    ] {
        run(&args, &scenario(name), a.path());
        run(&args, &scenario(name), b.path());
        assert_eq!(
            std::fs::read(a.path().join(file)).unwrap(),
            std::fs::read(b.path().join(file)).unwrap(),
            "{file} differs"
        );
    }
    let c = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_contact"))
        .args(["check", "brackets", "--quiet", "--seed", "99", "--config"])
        .arg(scenario("brackets"))
        .arg("--out")
        .arg(c.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let seeded = read_json(&c.path().join("check_brackets.json"));
    assert_eq!(seeded["seed"], 99);
    assert_ne!(seeded["result"], read_json(&a.path().join("check_brackets.json"))["result"]);
}
