use std::io::Write;

use super::records::{JobRecord, TaskRecord};
use crate::{Error, Result};

pub const JOBS_HEADER: [&str; 9] = [
    "job",
    "arrival_ms",
    "first_start_ms",
    "last_finish_ms",
    "departure_ms",
    "sojourn_ms",
    "waiting_ms",
    "workload_ms",
    "service_ms",
];

pub const TASKS_HEADER: [&str; 7] = [
    "job",
    "task",
    "start_ms",
    "exec_ms",
    "overhead_ms",
    "service_ms",
    "finish_ms",
];

fn write_rows<W: Write, T: serde::Serialize>(writer: W, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Writes the jobs table. The header is written even when `jobs` is empty.
pub fn write_jobs_csv<W: Write>(writer: W, jobs: &[JobRecord]) -> Result<()> {
    write_rows(writer, &JOBS_HEADER, jobs)
}

pub fn write_tasks_csv<W: Write>(writer: W, tasks: &[TaskRecord]) -> Result<()> {
    write_rows(writer, &TASKS_HEADER, tasks)
}
