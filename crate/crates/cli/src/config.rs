use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tinytasks::simulator::{Model, OverheadParams, SystemConfig};
use tinytasks::stochastic::Distribution;

use crate::args::SystemArgs;
use crate::CliError;

/// Contents of a `--config` file. Keys mirror the command-line flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    model: Option<String>,
    l: Option<usize>,
    k: Option<usize>,
    arrival: Option<String>,
    exec: Option<String>,
    overhead: Option<String>,
    jobs: Option<usize>,
    seed: Option<u64>,
    in_sequence: Option<bool>,
}

fn read_file(path: &Path) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Parses `none`, `paper` or `custom:<c_ts ms>:<mu_ts /s>:<c_pd_job ms>:<c_pd_task ms>`.
pub fn parse_overhead(s: &str) -> Result<OverheadParams, CliError> {
    match s.trim() {
        "none" | "zero" => Ok(OverheadParams::zero()),
        "paper" => Ok(OverheadParams::paper()),
        other => {
            let bad = || {
                CliError::Usage(format!(
                    "overhead `{other}`: expected none, paper or custom:<c_ts>:<mu_ts>:<c_pd_job>:<c_pd_task>"
                ))
            };
            let rest = other.strip_prefix("custom:").ok_or_else(bad)?;
            let v: Vec<f64> = rest
                .split(':')
                .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_, _>>()?;
            let [c_ts_task, mu_per_s, c_pd_job, c_pd_task] = v[..] else {
                return Err(bad());
            };
            let o = OverheadParams {
                c_ts_task,
                mu_ts_task: mu_per_s / 1000.0,
                c_pd_job,
                c_pd_task,
            };
            o.validate()?;
            Ok(o)
        }
    }
}

/// The system configuration after merging file values and flags, plus the
/// textual form it was given in (echoed into manifests).
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub model: String,
    pub l: usize,
    pub k: usize,
    pub arrival: String,
    pub exec: String,
    pub overhead: String,
    pub jobs: usize,
    pub seed: u64,
    pub in_sequence: bool,
    #[serde(skip)]
    pub system: SystemConfig,
}

pub struct Defaults {
    pub l: Option<usize>,
    pub arrival: &'static str,
    pub exec: &'static str,
    pub jobs: usize,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            l: None,
            arrival: "exp:0.5",
            exec: "exp:1",
            jobs: 10_000,
        }
    }
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing --{flag} (flag or config file)")))
}

fn field<T>(name: &str, r: tinytasks::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::from(e).in_field(name))
}

pub fn resolve(args: &SystemArgs, defaults: &Defaults) -> Result<Resolved, CliError> {
    let file = match &args.config {
        Some(p) => read_file(p)?,
        None => ConfigFile::default(),
    };
    let model = required(args.model.clone().or(file.model), "model")?;
    let l = required(args.l.or(file.l).or(defaults.l), "l")?;
    let k = args.k.or(file.k).unwrap_or(l);
    let arrival = args
        .arrival
        .clone()
        .or(file.arrival)
        .unwrap_or_else(|| defaults.arrival.into());
    let exec = args
        .exec
        .clone()
        .or(file.exec)
        .unwrap_or_else(|| defaults.exec.into());
    let overhead = args
        .overhead
        .clone()
        .or(file.overhead)
        .unwrap_or_else(|| "none".into());
    let jobs = args.jobs.or(file.jobs).unwrap_or(defaults.jobs);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let in_sequence = args.in_sequence || file.in_sequence.unwrap_or(false);

    let parsed_model: Model = model.parse()?;
    let system = SystemConfig::new(
        parsed_model,
        l,
        k,
        field("arrival", Distribution::from_flag(&arrival))?,
        field("exec", Distribution::from_flag(&exec))?,
    )
    .with_overhead(parse_overhead(&overhead).map_err(|e| e.in_field("overhead"))?)
    .with_jobs(jobs)
    .with_seed(seed)
    .with_in_sequence(in_sequence);
    system.validate()?;
    Ok(Resolved {
        model: parsed_model.short_name().into(),
        l,
        k,
        arrival,
        exec,
        overhead,
        jobs,
        seed,
        in_sequence,
        system,
    })
}
