use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use tinytasks::calculus::{
    approx_sojourn_fj_overhead, approx_sojourn_sm_overhead, bound_forkjoin_conventional,
    bound_forkjoin_tiny, bound_ideal_partition, bound_single_server, bound_splitmerge_big,
    bound_splitmerge_tiny, envelope_arrival_exponential, envelope_service_exponential,
    write_bound_sweep_csv, BoundResult, BoundSweepRow, Metric, ModelParams,
};
use tinytasks::experiments::{
    compare_traces, fit_overhead_datasets, ingest_trace, read_jobs_csv, read_tasks_csv, run_sweep,
    stability_region_curve, write_comparison_csv, write_fit_json, write_region_csv,
    write_sim_artifacts, write_sweep_csv, SweepParameter, SweepSpec, TraceDataset,
};
use tinytasks::simulator::{run, DetectionRule, OverheadParams};

use crate::args::{
    BoundArgs, BoundModel, CompareArgs, FitArgs, MetricArg, SimulateArgs, StabilityArgs, SweepArgs,
};
use crate::config::{parse_overhead, resolve, Defaults};
use crate::manifest::RunManifest;
use crate::CliError;

fn runtime(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn out_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| runtime(out, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| runtime(path, e))
}

fn print_json(value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    emit(&text)
}

fn emit(text: &str) -> Result<(), CliError> {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Runtime(e.to_string())),
        _ => Ok(()),
    }
}

fn finish(
    mut manifest: RunManifest,
    out: &Path,
    stem: &str,
    artifacts: Vec<PathBuf>,
) -> Result<(), CliError> {
    manifest.artifacts = artifacts;
    let path = manifest.write(out, stem)?;
    log::info!("manifest written to {}", path.display());
    Ok(())
}

pub fn simulate(out: &Path, a: &SimulateArgs) -> Result<(), CliError> {
    let resolved = resolve(&a.system, &Defaults::default())?;
    let config = resolved.system.clone().with_tasks_recorded(a.record_tasks);
    let result = run(&config)?;
    out_dir(out)?;
    let artifacts = write_sim_artifacts(&result, out, a.warmup)?;
    print_json(&result.summary(a.warmup)?)?;

    let echoed = json!({
        "system": resolved,
        "record_tasks": a.record_tasks,
        "warmup": a.warmup,
    });
    let manifest = RunManifest::new("simulate", &echoed, Some(config.seed))?;
    let stem = format!(
        "{}_l{}_k{}_s{}",
        resolved.model, config.l, config.k, config.seed
    );
    finish(manifest, out, &stem, artifacts)
}

fn bound_model_name(m: BoundModel) -> &'static str {
    match m {
        BoundModel::Mm1 => "mm1",
        BoundModel::SmTiny => "sm-tiny",
        BoundModel::SmBig => "sm-big",
        BoundModel::FjTiny => "fj-tiny",
        BoundModel::FjConv => "fj-conv",
        BoundModel::Ideal => "ideal",
    }
}

/// Overhead parameters expressed in seconds, matching rates given in 1/s.
fn overhead_in_seconds(o: OverheadParams) -> OverheadParams {
    OverheadParams {
        c_ts_task: o.c_ts_task / 1000.0,
        mu_ts_task: o.mu_ts_task * 1000.0,
        c_pd_job: o.c_pd_job / 1000.0,
        c_pd_task: o.c_pd_task / 1000.0,
    }
}

fn evaluate_bound(
    a: &BoundArgs,
    k: usize,
    mu: f64,
    overhead: OverheadParams,
) -> Result<BoundResult, CliError> {
    let metric = match a.metric {
        MetricArg::Waiting => Metric::Waiting,
        MetricArg::Sojourn => Metric::Sojourn,
    };
    let with_overhead = !overhead.is_zero();
    if with_overhead && !matches!(a.model, BoundModel::SmTiny | BoundModel::FjTiny) {
        return Err(CliError::Usage(
            "--overhead is supported for sm-tiny and fj-tiny only".into(),
        ));
    }
    if with_overhead && metric == Metric::Waiting {
        return Err(CliError::Usage(
            "--overhead applies to the sojourn metric only".into(),
        ));
    }
    if a.model == BoundModel::Mm1 {
        let service = envelope_service_exponential(mu)?;
        let arrival = envelope_arrival_exponential(a.lambda)?;
        return Ok(bound_single_server(&service, &arrival, a.eps, metric)?);
    }
    let params = ModelParams::new(a.l, k, a.lambda, mu)?;
    let r = match a.model {
        BoundModel::Mm1 => unreachable!(),
        BoundModel::SmTiny if with_overhead => {
            approx_sojourn_sm_overhead(&params.with_overhead(overhead), a.eps)?
        }
        BoundModel::SmTiny => bound_splitmerge_tiny(&params, a.eps, metric)?,
        BoundModel::SmBig => bound_splitmerge_big(&params, a.eps, metric)?,
        BoundModel::FjTiny if with_overhead => {
            approx_sojourn_fj_overhead(&params.with_overhead(overhead), a.eps)?
        }
        BoundModel::FjTiny => bound_forkjoin_tiny(&params, a.eps, metric, a.task_index)?,
        BoundModel::FjConv => bound_forkjoin_conventional(&params, a.eps, metric)?,
        BoundModel::Ideal => bound_ideal_partition(&params, a.eps, metric)?,
    };
    Ok(r)
}

#[derive(Debug, Serialize)]
struct BoundOutput {
    model: &'static str,
    metric: &'static str,
    l: usize,
    k: usize,
    lambda_per_s: f64,
    mu_per_s: f64,
    epsilon: f64,
    feasible: bool,
    theta_star: Option<f64>,
    /// Seconds.
    tau: Option<f64>,
    tau_ms: Option<f64>,
    approximation: bool,
}

pub fn bound(out: &Path, a: &BoundArgs) -> Result<(), CliError> {
    let overhead = overhead_in_seconds(parse_overhead(&a.overhead)?);
    let ks = a.k_list.clone().unwrap_or_else(|| vec![a.k]);
    let model = bound_model_name(a.model);
    let metric = match a.metric {
        MetricArg::Waiting => "waiting",
        MetricArg::Sojourn => "sojourn",
    };
    let mut outputs = Vec::with_capacity(ks.len());
    for &k in &ks {
        let mu = if a.k_list.is_some() && !a.pin_mu {
            a.mu * k as f64 / a.k as f64
        } else {
            a.mu
        };
        let r = evaluate_bound(a, k, mu, overhead)?;
        outputs.push(BoundOutput {
            model,
            metric,
            l: a.l,
            k,
            lambda_per_s: a.lambda,
            mu_per_s: mu,
            epsilon: r.epsilon,
            feasible: r.feasible,
            theta_star: r.theta_star,
            tau: r.tau,
            tau_ms: r.tau.map(|t| t * 1000.0),
            approximation: r.approximation,
        });
    }
    out_dir(out)?;
    let mut artifacts = Vec::new();
    let stem = format!("bound_{model}_l{}_k{}", a.l, a.k);
    if a.k_list.is_some() {
        let rows: Vec<BoundSweepRow> = outputs
            .iter()
            .map(|o| BoundSweepRow {
                k: o.k,
                epsilon: o.epsilon,
                theta_star: o.theta_star,
                tau_ms: o.tau_ms,
                feasible: o.feasible,
            })
            .collect();
        let path = out.join(format!("{stem}_sweep.csv"));
        write_bound_sweep_csv(create(&path)?, &rows)?;
        artifacts.push(path);
        print_json(&outputs)?;
    } else {
        let path = out.join(format!("{stem}.json"));
        let text = serde_json::to_string_pretty(&outputs[0])
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| runtime(&path, e))?;
        artifacts.push(path);
        print_json(&outputs[0])?;
    }
    let echoed = json!({
        "model": model,
        "metric": metric,
        "l": a.l,
        "k": a.k,
        "k_list": a.k_list,
        "pin_mu": a.pin_mu,
        "lambda_per_s": a.lambda,
        "mu_per_s": a.mu,
        "epsilon": a.eps,
        "task_index": a.task_index,
        "overhead": a.overhead,
    });
    finish(
        RunManifest::new("bound", &echoed, None)?,
        out,
        &stem,
        artifacts,
    )
}

pub fn stability(out: &Path, a: &StabilityArgs) -> Result<(), CliError> {
    let resolved = resolve(&a.system, &Defaults::default())?;
    let rule = DetectionRule {
        n_jobs: a.probe_jobs,
        ..DetectionRule::default()
    };
    let rows = stability_region_curve(&resolved.system, &a.k_list, &rule)?;
    out_dir(out)?;
    let stem = format!(
        "{}_l{}_s{}_stability",
        resolved.model, resolved.l, resolved.seed
    );
    let path = out.join(format!("{stem}.csv"));
    write_region_csv(create(&path)?, &rows)?;
    print_json(&rows)?;
    let echoed = json!({
        "system": resolved,
        "k_list": a.k_list,
        "probe_jobs": a.probe_jobs,
    });
    finish(
        RunManifest::new("stability", &echoed, Some(resolved.seed))?,
        out,
        &stem,
        vec![path],
    )
}

pub fn sweep(out: &Path, a: &SweepArgs) -> Result<(), CliError> {
    let resolved = resolve(&a.system, &Defaults::default())?;
    let vary: SweepParameter = a.vary.parse()?;
    let values = match vary {
        SweepParameter::Lambda => a.values.iter().map(|v| v / 1000.0).collect(),
        _ => a.values.clone(),
    };
    let spec = SweepSpec {
        base: resolved.system.clone(),
        vary,
        values,
        epsilon_list: a.eps.clone(),
        compare_analytical: !a.no_analytical,
        pin_mu: a.pin_mu,
        warmup: a.warmup,
    };
    let rows = run_sweep(&spec)?;
    out_dir(out)?;
    let stem = format!(
        "{}_l{}_k{}_s{}_sweep_{vary}",
        resolved.model, resolved.l, resolved.k, resolved.seed
    );
    let path = out.join(format!("{stem}.csv"));
    write_sweep_csv(create(&path)?, &spec, &rows)?;
    for row in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: row {} failed: {}",
            row.value,
            row.error.as_deref().unwrap_or_default()
        );
    }
    emit(&path.display().to_string())?;
    let echoed = json!({
        "system": resolved,
        "vary": vary,
        "values": a.values,
        "epsilon": a.eps,
        "analytical": !a.no_analytical,
        "pin_mu": a.pin_mu,
        "warmup": a.warmup,
    });
    finish(
        RunManifest::new("sweep", &echoed, Some(resolved.seed))?,
        out,
        &stem,
        vec![path],
    )
}

fn load(path: &Path) -> Result<TraceDataset, CliError> {
    let (data, report) = ingest_trace(path)?;
    for r in &report.rejected {
        eprintln!(
            "warning: {}: {} line {}: {}",
            path.display(),
            r.table,
            r.line,
            r.reason
        );
    }
    Ok(data)
}

pub fn compare(out: &Path, a: &CompareArgs) -> Result<(), CliError> {
    let da = load(&a.a)?;
    let db = load(&a.b)?;
    let c = compare_traces(&da, &db, a.grid)?;
    out_dir(out)?;
    let pp_path = out.join("compare_pp.csv");
    let q_path = out.join("compare_quantiles.csv");
    write_comparison_csv(create(&pp_path)?, create(&q_path)?, &c)?;
    print_json(&json!({
        "a": a.a,
        "b": a.b,
        "jobs_a": da.jobs.len(),
        "jobs_b": db.jobs.len(),
        "max_pp_deviation": c.max_pp_deviation,
        "quantiles": c.quantiles,
    }))?;
    let echoed = json!({ "a": a.a, "b": a.b, "grid": a.grid });
    finish(
        RunManifest::new("compare", &echoed, None)?,
        out,
        "compare",
        vec![pp_path, q_path],
    )
}

pub fn fit_overhead(out: &Path, a: &FitArgs) -> Result<(), CliError> {
    if a.tasks.len() != a.jobs.len() {
        return Err(CliError::Usage(format!(
            "{} --tasks files but {} --jobs files; pass them in pairs",
            a.tasks.len(),
            a.jobs.len()
        )));
    }
    let mut datasets = Vec::new();
    for (tp, jp) in a.tasks.iter().zip(&a.jobs) {
        let (tasks, rejected_t) = read_tasks_csv(File::open(tp).map_err(|e| runtime(tp, e))?, tp)?;
        let (jobs, rejected_j) = read_jobs_csv(File::open(jp).map_err(|e| runtime(jp, e))?, jp)?;
        for r in rejected_t.iter().chain(&rejected_j) {
            eprintln!("warning: {} line {}: {}", r.table, r.line, r.reason);
        }
        datasets.push(TraceDataset {
            tasks,
            jobs,
            source_label: tp.display().to_string(),
        });
    }
    let fit = fit_overhead_datasets(&datasets)?;
    out_dir(out)?;
    let path = out.join("overhead_fit.json");
    write_fit_json(create(&path)?, &fit)?;
    print_json(&fit)?;
    let echoed = json!({ "tasks": a.tasks, "jobs": a.jobs });
    finish(
        RunManifest::new("fit-overhead", &echoed, None)?,
        out,
        "overhead_fit",
        vec![path],
    )
}
