use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn altxy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_altxy")).args(args).output().unwrap()
}

fn body(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("# timestamp="))
        .map(|l| format!("{l}\n"))
        .collect()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[grid]\nlambda1 = \"-1.2:1.2:5\"\nlambda2 = \"-0.5:0.5:3\"\n");
    let mut bodies = Vec::new();
    for workers in ["1", "2", "5"] {
        let out = dir.path().join(format!("pd{workers}.csv"));
        let o = altxy(&["phase-diagram", "--config", &cfg, "--out", out.to_str().unwrap(), "--workers", workers]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        bodies.push((body(&dir.path().join(format!("pd{workers}.ln.csv"))), body(&dir.path().join(format!("pd{workers}.qd.csv")))));
    }
    assert!(bodies.iter().all(|b| *b == bodies[0]));
    let (ln, qd) = &bodies[0];
    assert!(ln.contains("index,lambda1,lambda2,beta,ln,error\n"));
    assert!(qd.contains("# measure=qd\n"));
    assert_eq!(ln.lines().filter(|l| !l.starts_with('#')).count(), 16);
    assert!(!ln.contains("\r"));
}

#[test]
fn spectrum_defaults_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = altxy(&["spectrum", "--gamma", "0.5", "--lambda1", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("# gamma=5.00000000000e-1\n"));
    assert!(text.contains("# override.gamma=0.5\n"));
    assert!(text.contains("# phi_points=2048\n"));
    assert!(text.lines().any(|l| l.starts_with("# timestamp=")));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 2049);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[system]\nanisotropy = 0.3\n");
    let o = altxy(&["spectrum", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("kind=config") && err.contains("anisotropy"), "{err}");
    assert_eq!(altxy(&["nonsense"]).status.code(), Some(2));
    assert_eq!(altxy(&["spectrum", "--lambda1", "0:1:0"]).status.code(), Some(2));
    assert_eq!(altxy(&["spectrum", "--bogus", "1"]).status.code(), Some(2));
    let cfg = write_config(dir.path(), "task = \"quench\"\n");
    assert_eq!(altxy(&["spectrum", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn failed_points_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[quench]\ntimes = \"0:1:3\"\n[run]\nsize = 8\nlattice = \"exact\"\n");
    let out = dir.path().join("q.csv");
    let o = altxy(&["quench", "--config", &cfg, "--measure", "ln", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains(",NaN,")).count(), 3);
}

#[test]
fn rerun_recomputes_only_missing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    let args = ["factorization", "--lambda1", "0:1.2:4", "--lambda2", "0:0.6:3", "--out", out.to_str().unwrap()];
    assert_eq!(altxy(&args).status.code(), Some(0));
    let full = body(&out);
    let trimmed: String = fs::read_to_string(&out)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("5,") && !l.starts_with("11,"))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(&out, trimmed).unwrap();
    let o = altxy(&args);
    assert!(String::from_utf8_lossy(&o.stdout).contains("rows=12 computed=2 failed=0"));
    assert_eq!(body(&out), full);
}
