use std::process::Command;

fn fpme() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fpme"))
}

#[test]
fn weights_subcommand_prints_csv() {
    let out = fpme().args(["weights", "--s", "0.5", "--h", "1", "--k", "3"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,w,scaled_cumsum");
    assert_eq!(lines.len(), 4);
    let w1: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((w1 - 4.0 / (3.0 * std::f64::consts::PI)).abs() < 1e-12);
}

#[test]
fn preset_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpme()
        .args(["preset", "exp4", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("pair0.cs = "));
    assert!(manifest.contains("pair0.tau = "));
    let snap = std::fs::read_to_string(dir.path().join("pair0/u2/snapshot_t1.csv")).unwrap();
    assert!(snap.starts_with("x,V,U\n"));
}

#[test]
fn run_subcommand_with_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out_dir = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            "s = 0.5\ndatum = explicit\nt0 = 1\nR = 0.5\nT = 0.25\nladder = 2^-3, 2^-4\nreference = analytic\nout = {}\n",
            out_dir.display()
        ),
    )
    .unwrap();
    let out = fpme().arg("run").arg("--config").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("errors.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(out_dir.join("rung1/snapshot_t0.25.csv").exists());
}

#[test]
fn bad_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "s = 0.5\ndatum = bumps\nladder = 2^-4, 2^-3\n").unwrap();
    assert!(!fpme().arg("run").arg("--config").arg(&cfg).status().unwrap().success());
    assert!(!fpme().args(["preset", "exp9"]).status().unwrap().success());
    assert!(!fpme().args(["weights", "--s", "1.5", "--h", "0.1"]).status().unwrap().success());
}

#[test]
fn aborted_rung_exits_nonzero() {
    // a window that cuts through the support is rejected when sampling
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("narrow.cfg");
    std::fs::write(&cfg, "s = 0.5\ndatum = explicit\ndomain = -0.2, 0.2\nladder = 2^-4\nreference = analytic\n").unwrap();
    let out = fpme().arg("run").arg("--config").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed"));
}

#[test]
fn props_subcommand_passes() {
    let out = fpme().args(["props", "--seed", "7"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("cfl1: 200 pairs x 50 steps, 0 violations"));
}
