use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_diophantine");

fn run(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("DIOPHANTINE_OUT_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const SMALL: &str = r#"
schema_version = 1
seed = 5

[exponent]
modes = ["standard", "multiplicative"]
tail_fraction = 0.5
grid = { q_max = 2000 }

[[exponent.instances]]
kind = "explicit"
id = "half"
m = 1
n = 1
x = [0.5]

[[exponent.instances]]
kind = "explicit"
id = "sqrt2"
m = 1
n = 1
x = [1.4142135623730951]
"#;

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(Result::unwrap).collect()
}

#[test]
fn small_run_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", SMALL);
    let out = tmp.path().join("out");
    let o = run(&["exponent", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["exponent_curves.csv", "exponent_estimates.csv", "summary.json", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let hash = manifest["config_hash"].as_str().unwrap().to_owned();
    assert_eq!(hash.len(), 64);
    assert_eq!(manifest["seed"], 5);

    let est = rows(&out.join("exponent_estimates.csv"));
    assert!(est.iter().all(|r| r[0] == hash));
    let half: Vec<_> = est.iter().filter(|r| &r[1] == "half").collect();
    assert_eq!(half.len(), 2);
    assert!(half.iter().all(|r| &r[5] == "true"));
    assert!(est.iter().filter(|r| &r[1] == "sqrt2").all(|r| &r[5] == "false"));

    let raw = std::fs::read_to_string(out.join("exponent_curves.csv")).unwrap();
    assert!(raw.contains("\r\n"));
}

#[test]
fn env_var_sets_output_dir_and_flag_wins() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", SMALL);
    let env_dir = tmp.path().join("from-env");
    let o = run(&["exponent", "--config", cfg.to_str().unwrap()], &[("DIOPHANTINE_OUT_DIR", &env_dir)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(env_dir.join("manifest.json").exists());

    let flag_dir = tmp.path().join("from-flag");
    let env2 = tmp.path().join("unused");
    let o = run(
        &["exponent", "--config", cfg.to_str().unwrap(), "--out", flag_dir.to_str().unwrap()],
        &[("DIOPHANTINE_OUT_DIR", &env2)],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(flag_dir.join("manifest.json").exists());
    assert!(!env2.exists());
}

#[test]
fn worker_count_does_not_change_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", SMALL);
    let dirs: Vec<_> = ["1", "8"]
        .iter()
        .map(|w| {
            let d = tmp.path().join(w);
            let o = run(&["exponent", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap(), "--workers", w], &[]);
            assert_eq!(o.status.code(), Some(0));
            d
        })
        .collect();
    for f in ["exponent_curves.csv", "exponent_estimates.csv", "summary.json"] {
        assert_eq!(std::fs::read(dirs[0].join(f)).unwrap(), std::fs::read(dirs[1].join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let out = out.to_str().unwrap();

    let unknown = write(tmp.path(), "u.toml", &format!("{SMALL}\nbogus = 1\n"));
    let o = run(&["exponent", "--config", unknown.to_str().unwrap(), "--out", out], &[]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["exponent", "--out", out], &[]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["exponent", "--config", "/nonexistent/c.toml", "--out", out], &[]);
    assert_eq!(o.status.code(), Some(1));

    let empty_grid = write(tmp.path(), "g.toml", &SMALL.replace("grid = { q_max = 2000 }", "grid = { scales = [] }"));
    let o = run(&["exponent", "--config", empty_grid.to_str().unwrap(), "--out", out], &[]);
    assert_eq!(o.status.code(), Some(1));

    // Section for a different command.
    let o = run(&["cover", "--config", unknown.to_str().unwrap().replace("u.toml", "c.toml").as_str(), "--out", out], &[]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["frobnicate"], &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn variant_flag_requires_reformulate() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", SMALL);
    let out = tmp.path().join("o");
    let o = run(&["exponent", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--variant", "step1"], &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"], &[]).status.code(), Some(0));
}
