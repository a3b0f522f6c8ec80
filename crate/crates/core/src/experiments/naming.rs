use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::simulator::{write_jobs_csv, write_tasks_csv, SimResult, SystemConfig};
use crate::{Error, Result};

/// `{model}_l{l}_k{k}_s{seed}_{kind}.{ext}`, e.g. `sqfj_l50_k100_s7_jobs.csv`.
pub fn artifact_name(config: &SystemConfig, kind: &str, ext: &str) -> String {
    format!(
        "{}_l{}_k{}_s{}_{kind}.{ext}",
        config.model.short_name(),
        config.l,
        config.k,
        config.seed
    )
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes the jobs table, the tasks table when recorded, and a JSON summary
/// (statistics after `warmup` jobs) into `dir`. Returns the written paths.
pub fn write_sim_artifacts(result: &SimResult, dir: &Path, warmup: usize) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let jobs_path = dir.join(artifact_name(&result.config, "jobs", "csv"));
    write_jobs_csv(create(&jobs_path)?, &result.jobs)?;
    written.push(jobs_path);

    if let Some(tasks) = &result.tasks {
        let tasks_path = dir.join(artifact_name(&result.config, "tasks", "csv"));
        write_tasks_csv(create(&tasks_path)?, tasks)?;
        written.push(tasks_path);
    }

    let summary_path = dir.join(artifact_name(&result.config, "summary", "json"));
    let summary = result.summary(warmup)?;
    let mut w = create(&summary_path)?;
    serde_json::to_writer_pretty(&mut w, &summary)?;
    w.flush().map_err(|e| Error::io(&summary_path, e))?;
    written.push(summary_path);
    Ok(written)
}
