use std::collections::{HashMap, HashSet};
use std::fs::{self, File};
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::simulator::{JobRecord, SimResult, TaskRecord, JOBS_HEADER, TASKS_HEADER};
use crate::{Error, Result};

/// Job and task tables from a simulation or an external system.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceDataset {
    pub tasks: Vec<TaskRecord>,
    pub jobs: Vec<JobRecord>,
    pub source_label: String,
}

impl TraceDataset {
    pub fn from_sim(result: &SimResult, label: impl Into<String>) -> Self {
        TraceDataset {
            tasks: result.tasks.clone().unwrap_or_default(),
            jobs: result.jobs.clone(),
            source_label: label.into(),
        }
    }

    /// Number of tasks per job index.
    pub fn tasks_per_job(&self) -> HashMap<u64, usize> {
        let mut counts = HashMap::new();
        for t in &self.tasks {
            *counts.entry(t.job_index).or_insert(0) += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub table: String,
    /// 1-based line number in the file, counting the header.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub accepted_jobs: usize,
    pub accepted_tasks: usize,
    pub rejected: Vec<Rejection>,
}

fn check_header(path: &Path, headers: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let present: HashSet<&str> = headers.iter().collect();
    let missing: Vec<String> = expected
        .iter()
        .filter(|c| !present.contains(*c))
        .map(|c| c.to_string())
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::Schema {
            path: path.to_path_buf(),
            missing,
        })
    }
}

fn read_table<T, R>(
    reader: R,
    path: &Path,
    table: &str,
    expected: &[&str],
    check: impl Fn(&T) -> Option<String>,
) -> Result<(Vec<T>, Vec<Rejection>)>
where
    T: DeserializeOwned,
    R: Read,
{
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    check_header(path, &headers, expected)?;
    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let reason = match rec {
            Err(e) => Some(e.to_string()),
            Ok(rec) => match rec.deserialize::<T>(Some(&headers)) {
                Err(e) => Some(e.to_string()),
                Ok(row) => match check(&row) {
                    None => {
                        rows.push(row);
                        None
                    }
                    reason => reason,
                },
            },
        };
        if let Some(reason) = reason {
            rejected.push(Rejection {
                table: table.to_string(),
                line,
                reason,
            });
        }
    }
    Ok((rows, rejected))
}

fn all_finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

fn check_job(j: &JobRecord) -> Option<String> {
    let values = [
        j.arrival,
        j.first_start,
        j.last_task_finish,
        j.departure,
        j.sojourn,
        j.waiting,
        j.workload,
        j.job_service,
    ];
    if !all_finite(&values) {
        return Some("non-finite timestamp".into());
    }
    if j.first_start < j.arrival {
        return Some(format!(
            "first_start_ms {} < arrival_ms {}",
            j.first_start, j.arrival
        ));
    }
    if j.last_task_finish < j.first_start {
        return Some(format!(
            "last_finish_ms {} < first_start_ms {}",
            j.last_task_finish, j.first_start
        ));
    }
    if j.departure < j.last_task_finish {
        return Some(format!(
            "departure_ms {} < last_finish_ms {}",
            j.departure, j.last_task_finish
        ));
    }
    if j.sojourn < 0.0 || j.waiting < 0.0 || j.workload < 0.0 {
        return Some("negative duration".into());
    }
    None
}

fn check_task(t: &TaskRecord) -> Option<String> {
    if !all_finite(&[t.start, t.execution, t.overhead, t.service, t.finish]) {
        return Some("non-finite timestamp".into());
    }
    if t.finish < t.start {
        return Some(format!("finish_ms {} < start_ms {}", t.finish, t.start));
    }
    if t.execution < 0.0 || t.overhead < 0.0 || t.service < 0.0 {
        return Some("negative duration".into());
    }
    None
}

/// Reads a jobs table; rows failing to parse or with inconsistent timestamps
/// are rejected individually.
pub fn read_jobs_csv<R: Read>(reader: R, path: &Path) -> Result<(Vec<JobRecord>, Vec<Rejection>)> {
    read_table(reader, path, "jobs", &JOBS_HEADER, check_job)
}

pub fn read_tasks_csv<R: Read>(
    reader: R,
    path: &Path,
) -> Result<(Vec<TaskRecord>, Vec<Rejection>)> {
    read_table(reader, path, "tasks", &TASKS_HEADER, check_task)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn find_with_suffix(dir: &Path, suffix: &str) -> Result<Option<PathBuf>> {
    let mut found: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(suffix))
        })
        .collect();
    found.sort();
    match found.len() {
        0 => Ok(None),
        1 => Ok(found.pop()),
        n => Err(Error::InvalidArgument(format!(
            "{}: {n} files ending in {suffix}, expected one",
            dir.display()
        ))),
    }
}

/// Locates the jobs and tasks tables for `path`: a directory holding one
/// `*jobs.csv` and optionally one `*tasks.csv`, a jobs file (the sibling
/// tasks file is picked up when present), or a tasks file alone.
fn locate(path: &Path) -> Result<(Option<PathBuf>, Option<PathBuf>)> {
    if path.is_dir() {
        return Ok((
            find_with_suffix(path, "jobs.csv")?,
            find_with_suffix(path, "tasks.csv")?,
        ));
    }
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default()
        .to_string();
    if let Some(stem) = name.strip_suffix("tasks.csv") {
        let jobs = path.with_file_name(format!("{stem}jobs.csv"));
        return Ok((jobs.exists().then_some(jobs), Some(path.to_path_buf())));
    }
    let tasks = name
        .strip_suffix("jobs.csv")
        .map(|stem| path.with_file_name(format!("{stem}tasks.csv")))
        .filter(|p| p.exists());
    Ok((Some(path.to_path_buf()), tasks))
}

/// Loads and validates a CSV trace in the simulator's jobs/tasks format.
///
/// Schema mismatches are errors naming the missing columns. Rows with
/// inconsistent timestamps, and tasks whose job is not in the jobs table,
/// are dropped and listed in the report.
pub fn ingest_trace(path: &Path) -> Result<(TraceDataset, IngestReport)> {
    let (jobs_path, tasks_path) = locate(path)?;
    if jobs_path.is_none() && tasks_path.is_none() {
        return Err(Error::InvalidArgument(format!(
            "{}: no jobs or tasks table found",
            path.display()
        )));
    }
    let mut report = IngestReport::default();
    let jobs = match &jobs_path {
        Some(p) => {
            let (rows, rejected) = read_jobs_csv(open(p)?, p)?;
            report.rejected.extend(rejected);
            rows
        }
        None => Vec::new(),
    };
    let mut tasks = match &tasks_path {
        Some(p) => {
            let (rows, rejected) = read_tasks_csv(open(p)?, p)?;
            report.rejected.extend(rejected);
            rows
        }
        None => Vec::new(),
    };
    if jobs_path.is_some() {
        let known: HashSet<u64> = jobs.iter().map(|j| j.index).collect();
        let mut kept = Vec::with_capacity(tasks.len());
        for (i, t) in tasks.into_iter().enumerate() {
            if known.contains(&t.job_index) {
                kept.push(t);
            } else {
                report.rejected.push(Rejection {
                    table: "tasks".into(),
                    line: i as u64 + 2,
                    reason: format!("job {} not in jobs table", t.job_index),
                });
            }
        }
        tasks = kept;
    }
    report.accepted_jobs = jobs.len();
    report.accepted_tasks = tasks.len();
    if !report.rejected.is_empty() {
        log::warn!(
            "{}: {} rows rejected",
            path.display(),
            report.rejected.len()
        );
    }
    Ok((
        TraceDataset {
            tasks,
            jobs,
            source_label: path.display().to_string(),
        },
        report,
    ))
}
