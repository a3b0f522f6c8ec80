use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::config::{Model, SystemConfig};
use super::records::{JobRecord, SimResult, TaskRecord};
use crate::stochastic::{Distribution, RngStream};
use crate::Result;

/// Event classes in tie-breaking order: at equal times task finishes are
/// handled first, then job departures, then job arrivals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    TaskFinish = 0,
    Departure = 1,
    Arrival = 2,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    kind: Kind,
    job: u32,
    task: u32,
    worker: u32,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // Reversed so that `BinaryHeap` pops the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.kind.cmp(&self.kind))
            .then(other.job.cmp(&self.job))
            .then(other.task.cmp(&self.task))
    }
}

#[derive(Debug, Clone, Copy)]
struct JobState {
    arrival: f64,
    first_start: f64,
    last_finish: f64,
    departure: f64,
    workload: f64,
    remaining: u32,
}

struct Engine<'a> {
    config: &'a SystemConfig,
    k: u32,
    overhead_law: Option<Distribution>,
    events: BinaryHeap<Event>,
    jobs: Vec<JobState>,
    tasks: Option<Vec<TaskRecord>>,
    arrived: u32,
    idle: Vec<u32>,
    // split-merge
    in_service: Option<u32>,
    next_to_split: u32,
    next_task: u32,
    // single-queue fork-join: head-of-line task
    head_job: u32,
    head_task: u32,
    // conventional fork-join: per-server queue position
    server_busy: Vec<bool>,
    server_next_job: Vec<u32>,
}

/// Runs one simulation. Deterministic for a fixed configuration.
pub fn run(config: &SystemConfig) -> Result<SimResult> {
    config.validate()?;
    let mut engine = Engine::new(config);
    engine.simulate();
    Ok(engine.finish())
}

impl<'a> Engine<'a> {
    fn new(config: &'a SystemConfig) -> Self {
        let l = config.l as u32;
        let k = config.k as u32;
        let tasks = config
            .record_tasks
            .then(|| Vec::with_capacity(config.n_jobs.saturating_mul(config.k).min(1 << 26)));
        Engine {
            config,
            k,
            overhead_law: config.overhead.task_law(),
            events: BinaryHeap::with_capacity(config.l + 4),
            jobs: vec![
                JobState {
                    arrival: 0.0,
                    first_start: f64::INFINITY,
                    last_finish: f64::NEG_INFINITY,
                    departure: f64::NAN,
                    workload: 0.0,
                    remaining: k,
                };
                config.n_jobs
            ],
            tasks,
            arrived: 0,
            idle: (0..l).rev().collect(),
            in_service: None,
            next_to_split: 0,
            next_task: 1,
            head_job: 0,
            head_task: 1,
            server_busy: vec![false; config.l],
            server_next_job: vec![0; config.l],
        }
    }

    fn push(&mut self, time: f64, kind: Kind, job: u32, task: u32, worker: u32) {
        self.events.push(Event {
            time,
            kind,
            job,
            task,
            worker,
        });
    }

    fn simulate(&mut self) {
        let mut arrivals = RngStream::for_arrivals(self.config.seed);
        let n_jobs = self.config.n_jobs as u32;
        self.push(0.0, Kind::Arrival, 0, 0, 0);
        while let Some(ev) = self.events.pop() {
            match ev.kind {
                Kind::Arrival => {
                    let n = ev.job;
                    self.jobs[n as usize].arrival = ev.time;
                    self.arrived = n + 1;
                    if n + 1 < n_jobs {
                        let gap = self.config.arrival.sample(&mut arrivals);
                        self.push(ev.time + gap, Kind::Arrival, n + 1, 0, 0);
                    }
                    self.on_arrival(n, ev.time);
                }
                Kind::TaskFinish => self.on_task_finish(ev),
                Kind::Departure => {
                    self.jobs[ev.job as usize].departure = ev.time;
                    self.in_service = None;
                    self.split_next(ev.time);
                }
            }
        }
    }

    fn on_arrival(&mut self, n: u32, t: f64) {
        match self.config.model {
            Model::SplitMerge => self.split_next(t),
            Model::SingleQueueForkJoin => self.dispatch_single_queue(t),
            Model::ConventionalForkJoin => {
                for server in 0..self.config.l {
                    if !self.server_busy[server] && self.server_next_job[server] == n {
                        self.start_task(n, server as u32 + 1, server as u32, t);
                    }
                }
            }
        }
    }

    fn on_task_finish(&mut self, ev: Event) {
        let job = &mut self.jobs[ev.job as usize];
        job.remaining -= 1;
        if ev.time > job.last_finish {
            job.last_finish = ev.time;
        }
        let complete = job.remaining == 0;
        match self.config.model {
            Model::SplitMerge => {
                self.idle.push(ev.worker);
                if complete {
                    let delay = self.config.overhead.pre_departure(self.config.k);
                    self.push(ev.time + delay, Kind::Departure, ev.job, 0, 0);
                } else {
                    self.dispatch_split_merge(ev.time);
                }
            }
            Model::SingleQueueForkJoin => {
                self.idle.push(ev.worker);
                self.dispatch_single_queue(ev.time);
            }
            Model::ConventionalForkJoin => {
                let server = ev.worker as usize;
                self.server_busy[server] = false;
                self.server_next_job[server] += 1;
                let next = self.server_next_job[server];
                if next < self.arrived {
                    self.start_task(next, ev.worker + 1, ev.worker, ev.time);
                }
            }
        }
    }

    /// Split-merge: split the head-of-line job if the system is empty.
    fn split_next(&mut self, t: f64) {
        if self.in_service.is_none() && self.next_to_split < self.arrived {
            self.in_service = Some(self.next_to_split);
            self.next_to_split += 1;
            self.next_task = 1;
            self.dispatch_split_merge(t);
        }
    }

    fn dispatch_split_merge(&mut self, t: f64) {
        let Some(job) = self.in_service else { return };
        while self.next_task <= self.k {
            let Some(worker) = self.idle.pop() else { break };
            self.start_task(job, self.next_task, worker, t);
            self.next_task += 1;
        }
    }

    fn dispatch_single_queue(&mut self, t: f64) {
        while self.head_job < self.arrived {
            let Some(worker) = self.idle.pop() else { break };
            self.start_task(self.head_job, self.head_task, worker, t);
            if self.head_task == self.k {
                self.head_job += 1;
                self.head_task = 1;
            } else {
                self.head_task += 1;
            }
        }
    }

    fn start_task(&mut self, job: u32, task: u32, worker: u32, t: f64) {
        let mut rng = RngStream::for_task(self.config.seed, u64::from(job) + 1, task);
        let execution = self.config.task_execution.sample(&mut rng);
        let overhead = match self.overhead_law {
            Some(law) => law.sample(&mut rng),
            None => self.config.overhead.c_ts_task,
        };
        let service = execution + overhead;
        let finish = t + service;
        let state = &mut self.jobs[job as usize];
        if t < state.first_start {
            state.first_start = t;
        }
        state.workload += service;
        if self.config.model == Model::ConventionalForkJoin {
            self.server_busy[worker as usize] = true;
        }
        if let Some(tasks) = self.tasks.as_mut() {
            tasks.push(TaskRecord {
                job_index: u64::from(job) + 1,
                task_index: task,
                start: t,
                execution,
                overhead,
                service,
                finish,
            });
        }
        self.push(finish, Kind::TaskFinish, job, task, worker);
    }

    fn finish(self) -> SimResult {
        let config = self.config;
        let delay = config.overhead.pre_departure(config.k);
        let mut previous = f64::NEG_INFINITY;
        let jobs = self
            .jobs
            .iter()
            .enumerate()
            .map(|(n, s)| {
                let departure = match config.model {
                    Model::SplitMerge => s.departure,
                    Model::SingleQueueForkJoin | Model::ConventionalForkJoin => {
                        // overhead goes on top of the (possibly reordered) departure
                        let base = if config.in_sequence_departures {
                            s.last_finish.max(previous)
                        } else {
                            s.last_finish
                        };
                        previous = base;
                        base + delay
                    }
                };
                JobRecord {
                    index: n as u64 + 1,
                    arrival: s.arrival,
                    first_start: s.first_start,
                    last_task_finish: s.last_finish,
                    departure,
                    sojourn: departure - s.arrival,
                    waiting: s.first_start - s.arrival,
                    workload: s.workload,
                    job_service: s.last_finish - s.first_start,
                }
            })
            .collect();
        SimResult {
            config: config.clone(),
            jobs,
            tasks: self.tasks,
        }
    }
}
