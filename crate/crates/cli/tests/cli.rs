//! Black-box tests of the `mramsim` binary: argument handling, file
//! formats, error wording, seed precedence, and report round-trips.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mramsim_core::MacroConfig;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_mramsim");

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

/// Runs the binary with a scrubbed seed environment.
fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("MRAMSIM_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).expect("fixture written");
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout_str(out)).expect("stdout is a JSON report")
}

#[test]
fn ideal_mvm_reproduces_the_dot_product() {
    let dir = TempDir::new().unwrap();
    let w = dir.path().join("w.txt");
    let x = dir.path().join("x.txt");
    write(&w, "1\n1\n1\n1\n");
    write(&x, "3\n3\n3\n3\n");
    let cfg = repo_config("ideal.toml");
    let out = run(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            dir.path().to_str().unwrap(),
            "mvm",
            w.to_str().unwrap(),
            x.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let rep = json(&out);
    let col = &rep["payload"]["run"]["results"][0];
    assert_eq!(col["oracle"], 12);
    assert_eq!(col["code"], 12);
    assert_eq!(rep["payload"]["exact_columns"], 1);
}

#[test]
fn malformed_weight_names_row_and_column() {
    let dir = TempDir::new().unwrap();
    let w = dir.path().join("w.txt");
    let x = dir.path().join("x.txt");
    write(&w, "101\n1x1\n");
    write(&x, "1\n1\n");
    let out = run(&["mvm", w.to_str().unwrap(), x.to_str().unwrap()], &[]);
    assert!(!out.status.success());
    let err = stderr_str(&out);
    assert!(err.contains("row 2"), "stderr: {err}");
    assert!(err.contains("column 2"), "stderr: {err}");
}

#[test]
fn malformed_input_names_line() {
    let dir = TempDir::new().unwrap();
    let w = dir.path().join("w.txt");
    let x = dir.path().join("x.txt");
    write(&w, "1\n1\n");
    write(&x, "2\n7\n");
    let out = run(&["mvm", w.to_str().unwrap(), x.to_str().unwrap()], &[]);
    assert!(!out.status.success());
    let err = stderr_str(&out);
    assert!(err.contains("line 2"), "stderr: {err}");
    assert!(err.contains("0..=3"), "stderr: {err}");
}

#[test]
fn dimension_mismatch_is_reported() {
    let dir = TempDir::new().unwrap();
    let w = dir.path().join("w.txt");
    let x = dir.path().join("x.txt");
    write(&w, "11\n11\n11\n");
    write(&x, "1\n1\n");
    let out = run(&["mvm", w.to_str().unwrap(), x.to_str().unwrap()], &[]);
    assert!(!out.status.success());
    let err = stderr_str(&out);
    assert!(err.contains("3 rows"), "stderr: {err}");
    assert!(err.contains("2 activations"), "stderr: {err}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.toml");
    write(&cfg, "seed = 1\n[latch]\ngain = 3.0\n");
    let out = run(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            dir.path().to_str().unwrap(),
            "inl",
        ],
        &[],
    );
    assert!(!out.status.success());
    assert!(stderr_str(&out).contains("unknown field"), "{}", stderr_str(&out));
}

#[test]
fn seed_precedence_flag_then_env_then_config() {
    let dir = TempDir::new().unwrap();
    let args = |n: &str| {
        vec![
            "--out-dir".to_string(),
            dir.path().join(n).to_str().unwrap().to_string(),
            "adc-test".to_string(),
            "--grid".to_string(),
            "16".to_string(),
        ]
    };
    fn strs(v: &[String]) -> Vec<&str> {
        v.iter().map(String::as_str).collect()
    }

    // Flag beats environment.
    let a1 = args("a1");
    let mut with_flag = vec!["--seed", "5"];
    with_flag.extend(strs(&a1));
    let a2 = args("a2");
    let mut env_differs = strs(&a2);
    env_differs.insert(0, "--seed");
    env_differs.insert(1, "5");
    let r1 = run(&with_flag, &[]);
    let r2 = run(&env_differs, &[("MRAMSIM_SEED", "77")]);
    assert!(r1.status.success() && r2.status.success());
    let j1 = json(&r1);
    let j2 = json(&r2);
    assert_eq!(j1["provenance"]["seed"], 5);
    assert_eq!(j2["provenance"]["seed"], 5);
    assert_eq!(j1["payload"], j2["payload"]);

    // Environment beats the config default.
    let a3 = args("a3");
    let r3 = run(&strs(&a3), &[("MRAMSIM_SEED", "5")]);
    assert!(r3.status.success());
    let j3 = json(&r3);
    assert_eq!(j3["provenance"]["seed"], 5);
    assert_eq!(j3["payload"], j1["payload"]);

    // Nothing set: the built-in default seed.
    let a4 = args("a4");
    let r4 = run(&strs(&a4), &[]);
    assert_eq!(json(&r4)["provenance"]["seed"], 42);

    // Garbage in the environment is a hard error.
    let a5 = args("a5");
    let r5 = run(&strs(&a5), &[("MRAMSIM_SEED", "not-a-number")]);
    assert!(!r5.status.success());
    assert!(stderr_str(&r5).contains("MRAMSIM_SEED"));
}

#[test]
fn uncalibrated_energy_fails_with_guidance() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.toml");
    write(&cfg, "seed = 1\n");
    let out = run(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            dir.path().to_str().unwrap(),
            "energy",
        ],
        &[],
    );
    assert!(!out.status.success());
    let err = stderr_str(&out);
    assert!(err.contains("calibrat"), "stderr: {err}");
}

#[test]
fn calibration_file_feeds_energy() {
    let dir = TempDir::new().unwrap();
    let cal_path = dir.path().join("cal.toml");
    let fit = run(
        &[
            "--out-dir",
            dir.path().to_str().unwrap(),
            "calibrate",
            "--output",
            cal_path.to_str().unwrap(),
        ],
        &[],
    );
    assert!(fit.status.success(), "stderr: {}", stderr_str(&fit));
    assert!(cal_path.exists());

    let cfg = dir.path().join("cfg.toml");
    write(
        &cfg,
        &format!("seed = 1\ncalibration_file = {:?}\n", cal_path.to_str().unwrap()),
    );
    let out = run(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            dir.path().to_str().unwrap(),
            "energy",
            "--rows",
            "64",
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let rep = json(&out);
    let tops = rep["payload"]["reports"][0]["tops_per_watt"].as_f64().unwrap();
    assert!((tops - 25.4).abs() < 0.5, "tops {tops}");
    // The echoed config must carry the folded calibration, not the path.
    assert!(rep["config"]["calibration_file"].is_null());
    assert!(rep["config"]["calibration"].is_object());
}

#[test]
fn inline_and_file_calibration_are_mutually_exclusive() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.toml");
    write(
        &cfg,
        "seed = 1\ncalibration_file = \"x.toml\"\n[calibration]\ngain_k = 100.0\n",
    );
    let out = run(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            dir.path().to_str().unwrap(),
            "inl",
        ],
        &[],
    );
    assert!(!out.status.success());
    assert!(
        stderr_str(&out).contains("mutually exclusive"),
        "stderr: {}",
        stderr_str(&out)
    );
}

#[test]
fn echoed_config_is_a_fixed_point_and_replays_the_payload() {
    let dir = TempDir::new().unwrap();
    let w = dir.path().join("w.txt");
    let x = dir.path().join("x.txt");
    write(&w, "10\n01\n11\n");
    write(&x, "2\n3\n1\n");
    let first = run(
        &[
            "--seed",
            "911",
            "--out-dir",
            dir.path().join("a").to_str().unwrap(),
            "mvm",
            w.to_str().unwrap(),
            x.to_str().unwrap(),
        ],
        &[],
    );
    assert!(first.status.success(), "stderr: {}", stderr_str(&first));
    let rep1 = json(&first);

    // The echo parses back into a well-formed config object...
    let cfg: MacroConfig = serde_json::from_value(rep1["config"].clone()).unwrap();
    cfg.validate().unwrap();
    // ...whose TOML form drives an identical run (no --seed: it is echoed).
    let cfg_path = dir.path().join("echo.toml");
    write(&cfg_path, &toml::to_string(&cfg).unwrap());
    let second = run(
        &[
            "--config",
            cfg_path.to_str().unwrap(),
            "--out-dir",
            dir.path().join("b").to_str().unwrap(),
            "mvm",
            w.to_str().unwrap(),
            x.to_str().unwrap(),
        ],
        &[],
    );
    assert!(second.status.success(), "stderr: {}", stderr_str(&second));
    let rep2 = json(&second);
    assert_eq!(rep1["payload"], rep2["payload"]);
    assert_eq!(rep1["config"], rep2["config"], "echo must be a fixed point");
}

#[test]
fn stdout_report_matches_written_file() {
    let dir = TempDir::new().unwrap();
    let out = run(
        &[
            "--out-dir",
            dir.path().to_str().unwrap(),
            "adc-test",
            "--grid",
            "32",
        ],
        &[],
    );
    assert!(out.status.success());
    let file = fs::read_to_string(dir.path().join("adc_test_report.json")).unwrap();
    assert_eq!(stdout_str(&out), format!("{file}\n"));
}

#[test]
fn trace_export_schema() {
    let dir = TempDir::new().unwrap();
    let w = dir.path().join("w.txt");
    let x = dir.path().join("x.txt");
    write(&w, "11\n01\n");
    write(&x, "3\n2\n");
    let traces = dir.path().join("traces");
    let out = run(
        &[
            "--out-dir",
            dir.path().to_str().unwrap(),
            "mvm",
            w.to_str().unwrap(),
            x.to_str().unwrap(),
            "--trace-dir",
            traces.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    for col in 0..2 {
        let text = fs::read_to_string(traces.join(format!("trace_col{col:02}.csv"))).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("time_ps,v_out_mv,i_out_ua"));
        // Reset sample plus 64 steps per charge quantum, three quanta.
        assert_eq!(lines.count(), 193);
    }
}

#[test]
fn checked_in_configs_stay_pinned_to_the_library_defaults() {
    let default_text = fs::read_to_string(repo_config("default.toml")).unwrap();
    let default_cfg: MacroConfig = toml::from_str(&default_text).unwrap();
    assert_eq!(default_cfg, MacroConfig::default());

    let ideal_text = fs::read_to_string(repo_config("ideal.toml")).unwrap();
    let ideal_cfg: MacroConfig = toml::from_str(&ideal_text).unwrap();
    let mut want = MacroConfig::ideal();
    want.calibration = None;
    assert_eq!(ideal_cfg, want);
}

#[test]
fn compare_csv_covers_both_arrangements_per_contrast() {
    let dir = TempDir::new().unwrap();
    let out = run(
        &[
            "--out-dir",
            dir.path().to_str().unwrap(),
            "compare-conventional",
            "--tmr",
            "1.0,2.0",
        ],
        &[],
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("fig8e_compare.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 4, "header plus one row per (contrast, mode)");
    assert!(lines[0].starts_with("tmr0,mode,i_on_ua,i_off_ua,off_leak_units,w_curve_0"));
    let rep = json(&out);
    assert_eq!(rep["payload"]["report"]["factors"].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_csv_row_count_tracks_the_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.toml");
    write(
        &cfg,
        "[analysis]\nr_ref_ohm = [9000.0, 9500.0]\nv_l_mv = [600.0]\ntmr0 = [1.0, 1.5, 2.0]\ntrials = 120\n",
    );
    let out = run(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            dir.path().to_str().unwrap(),
            "sweep",
        ],
        &[],
    );
    assert!(out.status.success(), "stderr: {}", stderr_str(&out));
    let text = fs::read_to_string(dir.path().join("fig7_yield.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 3, "header plus r_ref x tmr rows");
}

#[test]
fn energy_rows_out_of_range_fails() {
    let dir = TempDir::new().unwrap();
    let out = run(
        &[
            "--out-dir",
            dir.path().to_str().unwrap(),
            "energy",
            "--rows",
            "65",
        ],
        &[],
    );
    assert!(!out.status.success());
    assert!(stderr_str(&out).contains("rows_on"), "{}", stderr_str(&out));
}

#[test]
fn input_files_are_never_mutated() {
    let dir = TempDir::new().unwrap();
    let w = dir.path().join("w.txt");
    let x = dir.path().join("x.txt");
    write(&w, "11\n10\n");
    write(&x, "1\n2\n");
    let before_w = fs::read(&w).unwrap();
    let before_x = fs::read(&x).unwrap();
    let out = run(
        &[
            "--out-dir",
            dir.path().to_str().unwrap(),
            "mvm",
            w.to_str().unwrap(),
            x.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success());
    assert_eq!(fs::read(&w).unwrap(), before_w);
    assert_eq!(fs::read(&x).unwrap(), before_x);
}
