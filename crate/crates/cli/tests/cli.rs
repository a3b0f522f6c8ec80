use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tinytasks(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tinytasks"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("TINYTASKS_OUT")
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn simulate_deterministic_single_job() {
    let dir = tempfile::tempdir().unwrap();
    let o = tinytasks(
        dir.path(),
        &[
            "simulate",
            "--model",
            "sm",
            "--l",
            "2",
            "--k",
            "2",
            "--arrival",
            "det:10",
            "--exec",
            "det:1",
            "--jobs",
            "1",
        ],
    );
    let v = stdout_json(&o);
    assert_eq!(v["mean_sojourn"].as_f64(), Some(1.0));
    assert!(dir.path().join("sm_l2_k2_s0_jobs.csv").exists());
    assert!(dir.path().join("sm_l2_k2_s0_summary.json").exists());
    let manifest: Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("sm_l2_k2_s0_manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["artifacts"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate",
        "--model",
        "sqfj",
        "--l",
        "50",
        "--k",
        "100",
        "--arrival",
        "exp:0.5",
        "--exec",
        "exp:2",
        "--jobs",
        "30000",
        "--seed",
        "7",
    ];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(tinytasks(a.path(), &args).status.success());
    assert!(tinytasks(b.path(), &args).status.success());
    for name in ["sqfj_l50_k100_s7_jobs.csv", "sqfj_l50_k100_s7_summary.json"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
    let m = |d: &Path| -> Value {
        serde_json::from_str(&fs::read_to_string(d.join("sqfj_l50_k100_s7_manifest.json")).unwrap())
            .unwrap()
    };
    assert_eq!(m(a.path())["config_digest"], m(b.path())["config_digest"]);
}

#[test]
fn simulate_rejects_fewer_tasks_than_workers() {
    let dir = tempfile::tempdir().unwrap();
    let o = tinytasks(
        dir.path(),
        &["simulate", "--model", "sm", "--l", "4", "--k", "2"],
    );
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("k must be ≥ l"), "{err}");
}

#[test]
fn bad_distribution_names_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = tinytasks(
        dir.path(),
        &["simulate", "--model", "sm", "--l", "2", "--exec", "gamma:3"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exec"));
}

#[test]
fn bound_mm1_waiting() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&tinytasks(
        dir.path(),
        &[
            "bound", "--model", "mm1", "--lambda", "0.5", "--mu", "1", "--eps", "1e-3", "--metric",
            "waiting",
        ],
    ));
    assert_eq!(v["feasible"], true);
    assert!(close(v["tau"].as_f64().unwrap(), 1000f64.ln() / 0.5, 1e-3));
    assert!(close(v["theta_star"].as_f64().unwrap(), 0.5, 1e-4));
}

#[test]
fn bound_infeasible_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = tinytasks(
        dir.path(),
        &[
            "bound", "--model", "sm-tiny", "--l", "50", "--k", "50", "--lambda", "0.5", "--mu",
            "1", "--eps", "1e-6",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["feasible"], false);
    assert!(v["tau"].is_null());
}

#[test]
fn bound_forkjoin_single_server_matches_mm1() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--lambda", "0.3", "--mu", "1.1", "--eps", "1e-4"];
    let mm1 = stdout_json(&tinytasks(
        dir.path(),
        &[&["bound", "--model", "mm1"][..], &common].concat(),
    ));
    let fj = stdout_json(&tinytasks(
        dir.path(),
        &[
            &["bound", "--model", "fj-tiny", "--l", "1", "--k", "1"][..],
            &common,
        ]
        .concat(),
    ));
    assert!(close(
        mm1["tau"].as_f64().unwrap(),
        fj["tau"].as_f64().unwrap(),
        1e-9
    ));
}

#[test]
fn bound_k_list_writes_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&tinytasks(
        dir.path(),
        &[
            "bound",
            "--model",
            "fj-tiny",
            "--l",
            "50",
            "--k",
            "50",
            "--k-list",
            "50,100,200",
            "--lambda",
            "0.5",
            "--mu",
            "1",
            "--eps",
            "1e-6",
        ],
    ));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(close(rows[2]["mu_per_s"].as_f64().unwrap(), 4.0, 1e-12));
    let csv = fs::read_to_string(dir.path().join("bound_fj-tiny_l50_k50_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn bound_overhead_needs_supported_model() {
    let dir = tempfile::tempdir().unwrap();
    let o = tinytasks(
        dir.path(),
        &[
            "bound",
            "--model",
            "ideal",
            "--l",
            "2",
            "--k",
            "4",
            "--lambda",
            "0.5",
            "--mu",
            "2",
            "--overhead",
            "paper",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compare_identical_runs() {
    let root = tempfile::tempdir().unwrap();
    let (a, b) = (root.path().join("sim1"), root.path().join("sim2"));
    let args = [
        "simulate", "--model", "sqfj", "--l", "5", "--k", "10", "--jobs", "5000", "--seed", "3",
    ];
    assert!(tinytasks(&a, &args).status.success());
    assert!(tinytasks(&b, &args).status.success());
    // Manifests live beside the traces; compare only looks at the tables.
    let out = root.path().join("cmp");
    let v = stdout_json(&tinytasks(
        &out,
        &[
            "compare",
            "--a",
            a.to_str().unwrap(),
            "--b",
            b.to_str().unwrap(),
        ],
    ));
    assert_eq!(v["max_pp_deviation"].as_f64(), Some(0.0));
    for q in v["quantiles"].as_array().unwrap() {
        assert_eq!(q["delta_ms"].as_f64(), Some(0.0));
    }
    assert!(out.join("compare_pp.csv").exists());
    assert!(out.join("compare_quantiles.csv").exists());
    assert!(out.join("compare_manifest.json").exists());
}

#[test]
fn fit_overhead_recovers_paper_table() {
    let root = tempfile::tempdir().unwrap();
    let mut tasks = Vec::new();
    let mut jobs = Vec::new();
    for k in ["100", "400"] {
        let d = root.path().join(format!("k{k}"));
        let o = tinytasks(
            &d,
            &[
                "simulate",
                "--model",
                "sqfj",
                "--l",
                "10",
                "--k",
                k,
                "--arrival",
                "exp:0.2",
                "--exec",
                "exp:40",
                "--overhead",
                "paper",
                "--jobs",
                "300",
                "--record-tasks",
            ],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        tasks.push(d.join(format!("sqfj_l10_k{k}_s0_tasks.csv")));
        jobs.push(d.join(format!("sqfj_l10_k{k}_s0_jobs.csv")));
    }
    let mut args: Vec<String> = vec!["fit-overhead".into()];
    for (t, j) in tasks.iter().zip(&jobs) {
        args.extend([
            "--tasks".into(),
            t.display().to_string(),
            "--jobs".into(),
            j.display().to_string(),
        ]);
    }
    let out = root.path().join("fit");
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let v = stdout_json(&tinytasks(&out, &args));
    let f = |k: &str| v[k].as_f64().unwrap();
    assert!(close(f("c_ts_task"), 2.6, 0.1), "{v}");
    assert!(close(f("mu_ts_task"), 2.0, 0.1), "{v}");
    assert!(close(f("c_pd_job"), 20.0, 1.0), "{v}");
    assert!(close(f("c_pd_task"), 7.4e-3, 7.4e-4), "{v}");
    assert!(out.join("overhead_fit.json").exists());
}

#[test]
fn fit_overhead_requires_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let o = tinytasks(
        dir.path(),
        &[
            "fit-overhead",
            "--tasks",
            "a.csv",
            "--tasks",
            "b.csv",
            "--jobs",
            "c.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_trace_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = tinytasks(
        dir.path(),
        &["compare", "--a", "/nonexistent/a", "--b", "/nonexistent/b"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_and_version() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(tinytasks(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(tinytasks(dir.path(), &["--version"]).status.code(), Some(0));
    assert_eq!(
        tinytasks(dir.path(), &["--no-such-flag"]).status.code(),
        Some(1)
    );
    assert_eq!(tinytasks(dir.path(), &[]).status.code(), Some(1));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("system.toml");
    fs::write(&cfg, "model = \"sm\"\nl = 2\nk = 2\narrival = \"det:10\"\nexec = \"det:1\"\njobs = 3\nseed = 5\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let v = stdout_json(&tinytasks(dir.path(), &["simulate", "--config", cfg]));
    assert_eq!(v["mean_sojourn"].as_f64(), Some(1.0));
    assert_eq!(v["config"]["n_jobs"], 3);

    let v = stdout_json(&tinytasks(
        dir.path(),
        &["simulate", "--config", cfg, "--exec", "det:2", "--k", "4"],
    ));
    assert_eq!(v["mean_sojourn"].as_f64(), Some(4.0));
    assert_eq!(v["config"]["seed"], 5);

    let manifest: Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("sm_l2_k4_s5_manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["config"]["system"]["exec"], "det:2");
    assert_eq!(manifest["config"]["system"]["jobs"], 3);
}

#[test]
fn unknown_config_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "modle = \"sm\"\n").unwrap();
    let o = tinytasks(dir.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env-out");
    let o = Command::new(env!("CARGO_BIN_EXE_tinytasks"))
        .args([
            "bound", "--model", "mm1", "--lambda", "0.5", "--mu", "1", "--eps", "0.01",
        ])
        .env("TINYTASKS_OUT", &out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(out.join("bound_mm1_l1_k1.json").exists());
    assert!(out.join("bound_mm1_l1_k1_manifest.json").exists());
}

#[test]
fn stability_writes_region_csv() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&tinytasks(
        dir.path(),
        &[
            "stability",
            "--model",
            "sm",
            "--l",
            "5",
            "--k-list",
            "5,20",
            "--probe-jobs",
            "3000",
        ],
    ));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0]["rho_max_sim"].as_f64().unwrap() < rows[1]["rho_max_sim"].as_f64().unwrap());
    let csv = fs::read_to_string(dir.path().join("sm_l5_s0_stability.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("sm_l5_s0_stability_manifest.json").exists());
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = tinytasks(
        dir.path(),
        &[
            "sweep",
            "--model",
            "sqfj",
            "--l",
            "5",
            "--k",
            "5",
            "--arrival",
            "exp:0.5",
            "--exec",
            "exp:5",
            "--jobs",
            "3000",
            "--vary",
            "k",
            "--values",
            "5,10,20",
            "--eps",
            "0.01",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join("sqfj_l5_k5_s0_sweep_k.csv");
    let csv = fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().next().unwrap().contains("tau_eps0.01_ms"));
}
