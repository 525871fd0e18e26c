//! End-to-end tests of the `tubebeta` binary: exit codes per outcome class,
//! format consistency between the CSV and JSON reports, and the worker-count
//! override precedence.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tubebeta"));
    // A fixed environment regardless of what the harness carries.
    cmd.env_remove("TUBEBETA_WORKERS");
    cmd
}

fn tmp(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(dir).unwrap();
    dir.join(name)
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let path = tmp(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL_ANCHOR: &str = "budget = 5000\nseed = 3\nworkers = 2\n\n\
    [set]\nlabel = anchor\nn = 1\nlambda1 = 2\nlambda2 = 2\n\
    sigma1 = 3\nsigma2 = 3\ntau1 = 2\ntau2 = 2\n";

#[test]
fn exit_codes_cover_the_outcome_classes() {
    // 0: verified (closed-form evaluation of a valid set).
    let out = bin()
        .args(["rhs", "--n", "2", "--lambda1", "3", "--lambda2", "3"])
        .args(["--sigma1", "4", "--sigma2", "4", "--tau1", "3", "--tau2", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));

    // 0: help and version.
    for flag in ["--help", "--version"] {
        let out = bin().arg(flag).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
    }

    // 3: invalid parameters (gamma pole / failed convergence condition).
    let out = bin()
        .args(["rhs", "--n", "2", "--lambda1", "1", "--lambda2", "3"])
        .args(["--sigma1", "4", "--sigma2", "4", "--tau1", "3", "--tau2", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", stderr_of(&out));

    // 3: divergent auxiliary integral.
    let out = bin()
        .args(["aux", "--alpha", "3", "--beta", "1", "--gamma", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", stderr_of(&out));

    // 0: convergent auxiliary integral.
    let out = bin()
        .args(["aux", "--alpha", "1", "--beta", "2", "--gamma", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));

    // 4: usage errors.
    let out = bin().args(["rhs", "--bogus-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));

    // 4: missing config file.
    let out = bin()
        .args(["verify", "--config", "/nonexistent/x.conf"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4), "{}", stderr_of(&out));

    // 4: malformed config (unknown key), with the line number in the message.
    let config = write_config(
        "cli-bad-key.conf",
        "budget = 1000\nseed = 1\n\n[set]\nlabel = x\nn = 1\nlambda1 = 2\n\
         lambda2 = 2\nsigma1 = 3\nsigma2 = 3\ntau1 = 2\ntau2 = 2\nwhat = 9\n",
    );
    let out = bin()
        .arg("verify")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let err = stderr_of(&out);
    assert!(err.contains("line 13"), "missing line number: {err}");

    // 2: mismatch — a set that verifies fine but was declared expect_reject.
    let config = write_config(
        "cli-expect-reject.conf",
        &format!("{SMALL_ANCHOR}expect_reject = true\n"),
    );
    let out = bin()
        .arg("verify")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));

    // 0: the same set without the expectation.
    let config = write_config("cli-anchor.conf", SMALL_ANCHOR);
    let out = bin()
        .arg("verify")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));

    // 0: an expected rejection that does occur.
    let config = write_config(
        "cli-expected-invalid.conf",
        "budget = 5000\nseed = 3\n\n[set]\nlabel = invalid\nn = 2\n\
         lambda1 = 1\nlambda2 = 4\nsigma1 = 4\nsigma2 = 4\ntau1 = 3\ntau2 = 3\n\
         expect_reject = true\n",
    );
    let out = bin()
        .arg("verify")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));

    // 2: steps with the injected unit-Jacobian fault; 0 without.
    let out = bin()
        .args(["steps", "--n-list", "2", "--samples", "200"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let out = bin()
        .args(["steps", "--n-list", "2", "--samples", "200", "--fault-unit-jacobian"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
}

#[test]
fn csv_and_json_reports_carry_identical_numbers() {
    let config = write_config("cli-format.conf", SMALL_ANCHOR);
    let csv_path = tmp("cli-format.csv");
    let json_path = tmp("cli-format.json");

    for (format, path) in [("csv", &csv_path), ("json", &json_path)] {
        let out = bin()
            .arg("verify")
            .arg("--config")
            .arg(&config)
            .args(["--format", format, "--output"])
            .arg(path)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    }

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), row.len());
    let field = |name: &str| -> &str {
        let idx = header.iter().position(|h| *h == name).unwrap();
        row[idx]
    };

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let jrow = &doc["payload"]["rows"][0];

    // Float fields must round-trip to the same bits through both formats;
    // wall time is a timing field, deliberately absent from the payload.
    for name in [
        "lhs_re",
        "lhs_im",
        "lhs_stderr",
        "rhs_plus_re",
        "rhs_zero_re",
        "rhs_minus_re",
        "z_plus",
        "z_zero",
        "z_minus",
        "weight_ratio",
    ] {
        let from_csv: f64 = field(name).parse().unwrap();
        let from_json = jrow[name].as_f64().unwrap();
        assert_eq!(
            from_csv.to_bits(),
            from_json.to_bits(),
            "field {name}: csv {from_csv} vs json {from_json}"
        );
    }
    assert_eq!(field("label"), "anchor");
    assert_eq!(jrow["label"], "anchor");
    assert_eq!(field("matched_variant"), "0");
    assert_eq!(jrow["matched_variant"], "0");
    assert_eq!(field("n_samples"), "5000");
    assert_eq!(jrow["n_samples"].as_u64(), Some(5000));
    assert!(header.contains(&"wall_time_s"));
    assert!(jrow.get("wall_time_s").is_none());
    assert!(doc["timing"]["rows"][0]["seconds"].as_f64().is_some());
}

#[test]
fn worker_override_precedence_flag_env_config() {
    let config = write_config("cli-workers.conf", SMALL_ANCHOR); // workers = 2
    let json_path = tmp("cli-workers.json");
    let run = |env: Option<&str>, flag: Option<&str>| -> serde_json::Value {
        let mut cmd = bin();
        cmd.arg("verify")
            .arg("--config")
            .arg(&config)
            .args(["--format", "json", "--output"])
            .arg(&json_path);
        if let Some(env) = env {
            cmd.env("TUBEBETA_WORKERS", env);
        }
        if let Some(flag) = flag {
            cmd.args(["--workers", flag]);
        }
        let out = cmd.output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap()
    };

    assert_eq!(run(None, None)["payload"]["workers"].as_u64(), Some(2));
    assert_eq!(run(Some("3"), None)["payload"]["workers"].as_u64(), Some(3));
    assert_eq!(run(Some("3"), Some("5"))["payload"]["workers"].as_u64(), Some(5));

    // An unusable env value is a configuration error.
    let out = bin()
        .arg("verify")
        .arg("--config")
        .arg(&config)
        .env("TUBEBETA_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4), "{}", stderr_of(&out));
}
