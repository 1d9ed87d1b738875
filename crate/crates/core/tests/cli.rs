use std::fs;
use std::path::Path;
use std::process::Command;

fn memkern() -> Command {
    Command::new(env!("CARGO_BIN_EXE_memkern"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p
}

const BARE_SPIN: &str = r#"{
    "model": {"delta": 1.0, "epsilon": 0.0, "beta": 0.0},
    "hierarchy": {"order": 3, "scheme": "factorial", "lambda": "auto"},
    "grid": {"t_max": 5.0, "n_steps": 500},
    "spectra": {"omega_min": -3.0, "omega_max": 3.0, "points": 121},
    "oracle": {"enabled": true}
}"#;

fn column(csv_text: &str, name: &str) -> Vec<f64> {
    let mut lines = csv_text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn bare_spin_run_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BARE_SPIN);
    let out = dir.path().join("run");
    let status = memkern()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for f in [
        "kernel.csv",
        "correlation.csv",
        "lineshape.csv",
        "kernel_spectrum.csv",
        "moments.csv",
        "stability.json",
        "manifest.json",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let kernel = fs::read_to_string(out.join("kernel.csv")).unwrap();
    let err = column(&kernel, "abs_err");
    assert_eq!(err.len(), 501);
    assert!(
        err.iter().all(|&e| e <= 1e-8),
        "{:e}",
        err.iter().cloned().fold(0.0, f64::max)
    );
    let second = kernel.lines().nth(1).unwrap();
    assert!(second.starts_with("# config="));
    assert!(second.contains("source=pmkct"));
}

#[test]
fn invalid_scheme_is_a_config_error_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &BARE_SPIN.replace("factorial", "quadratic"));
    let out = dir.path().join("run");
    let o = memkern()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn numerical_failure_exits_one_with_stage() {
    let dir = tempfile::tempdir().unwrap();
    let body = BARE_SPIN
        .replace("\"factorial\"", "\"power\"")
        .replace("\"auto\"", "1e-300");
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("run");
    let o = memkern()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("hierarchy"), "{stderr}");
    assert!(!out.join("kernel.csv").exists());
}

#[test]
fn runs_are_byte_identical_and_reproducible_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &BARE_SPIN.replace("\"epsilon\": 0.0", "\"epsilon\": 0.3"),
    );
    let run = |out: &Path, cfg: &Path| {
        assert!(memkern()
            .arg("run")
            .arg("--config")
            .arg(cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap()
            .success());
    };
    let (a, b, c) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("c"),
    );
    run(&a, &cfg);
    run(&b, &cfg);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    let resolved = dir.path().join("resolved.json");
    fs::write(
        &resolved,
        serde_json::to_string(&manifest["config"]).unwrap(),
    )
    .unwrap();
    run(&c, &resolved);
    for f in [
        "kernel.csv",
        "correlation.csv",
        "lineshape.csv",
        "kernel_spectrum.csv",
        "moments.csv",
    ] {
        let x = fs::read(a.join(f)).unwrap();
        assert_eq!(x, fs::read(b.join(f)).unwrap(), "{f}");
        assert_eq!(x, fs::read(c.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn moments_export_import_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &BARE_SPIN.replace("\"epsilon\": 0.0", "\"epsilon\": 0.3"),
    );
    let m = dir.path().join("m.csv");
    assert!(memkern()
        .arg("export-moments")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&m)
        .status()
        .unwrap()
        .success());
    let direct = dir.path().join("direct");
    let imported = dir.path().join("imported");
    assert!(memkern()
        .args(["run", "--oracle", "off", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&direct)
        .status()
        .unwrap()
        .success());
    assert!(memkern()
        .arg("import-moments")
        .arg("--config")
        .arg(&cfg)
        .arg("--moments")
        .arg(&m)
        .arg("--out")
        .arg(&imported)
        .status()
        .unwrap()
        .success());
    let a = fs::read_to_string(direct.join("kernel.csv")).unwrap();
    let b = fs::read_to_string(imported.join("kernel.csv")).unwrap();
    assert_eq!(column(&a, "re_k1"), column(&b, "re_k1"));
}

#[test]
fn sweeps_and_oracle_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &BARE_SPIN.replace("\"epsilon\": 0.0", "\"epsilon\": 0.3"),
    );
    let out = dir.path().join("s");
    let o = memkern()
        .args(["sweep-stability", "--sweep-n", "2,3,4", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("stability_sweep.csv")).unwrap();
    let post = column(&table, "post_max_re");
    let tol = column(&table, "tol");
    assert_eq!(post.len(), 3);
    assert!(post.iter().zip(&tol).all(|(p, t)| p <= t));

    let o = memkern()
        .args([
            "sweep-convergence",
            "--sweep-n",
            "2,4,4",
            "--t-star",
            "1.0",
            "--config",
        ])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let conv = fs::read_to_string(out.join("convergence.csv")).unwrap();
    let err = column(&conv, "abs_err");
    assert_eq!(err[1], err[2]);

    let o = memkern()
        .args(["sweep-convergence", "--oracle", "off", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));

    let od = dir.path().join("o");
    assert!(memkern()
        .arg("oracle")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&od)
        .status()
        .unwrap()
        .success());
    let c = fs::read_to_string(od.join("correlation.csv")).unwrap();
    assert!(c.lines().nth(1).unwrap().contains("source=oracle"));
    assert!((column(&c, "re_c")[0] - 1.0).abs() < 1e-12);
}
