//! Sequential-task-flow runtime.
//!
//! Tasks are submitted in program order with read/write hints on opaque
//! data ids; the dependency DAG is inferred by last-writer tracking
//! (read-after-write, write-after-write, write-after-read) and executed on
//! a pool of workers with per-worker deques and work stealing. The policy
//! affects only timing: every tile's writers are totally ordered by edges,
//! so results are bitwise-identical for any worker count.

use crate::error::{Error, Result};
use crate::tile::DataId;
use crossbeam::deque::{Injector, Steal, Stealer, Worker as WorkerQueue};
use crossbeam::utils::Backoff;
use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

type Kernel<'a> = Box<dyn FnOnce() -> Result<()> + Send + 'a>;

pub struct Task<'a> {
    pub name: &'static str,
    pub reads: Vec<DataId>,
    pub writes: Vec<DataId>,
    /// Submission index; strictly increasing within a stream.
    pub seq: usize,
    kernel: Kernel<'a>,
}

/// An ordered stream of tasks, submitted before any of them runs.
#[derive(Default)]
pub struct TaskStream<'a> {
    tasks: Vec<Task<'a>>,
}

impl<'a> TaskStream<'a> {
    pub fn new() -> Self {
        TaskStream { tasks: Vec::new() }
    }

    pub fn push<F>(&mut self, name: &'static str, reads: Vec<DataId>, writes: Vec<DataId>, kernel: F)
    where
        F: FnOnce() -> Result<()> + Send + 'a,
    {
        let seq = self.tasks.len();
        self.tasks.push(Task { name, reads, writes, seq, kernel: Box::new(kernel) });
    }

    /// Append every task of `other`, renumbering its submission order.
    pub fn extend(&mut self, other: TaskStream<'a>) {
        for mut t in other.tasks {
            t.seq = self.tasks.len();
            self.tasks.push(t);
        }
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }
}

/// One task execution, timestamped relative to the start of `execute`.
#[derive(Clone, Debug)]
pub struct TraceEvent {
    pub task: usize,
    pub name: &'static str,
    pub begin_ns: u64,
    pub end_ns: u64,
    pub worker: usize,
}

pub struct TaskGraph<'a> {
    tasks: Vec<Task<'a>>,
    successors: Vec<Vec<usize>>,
    indegree: Vec<usize>,
}

/// Infer the dependency DAG from a task stream.
///
/// Edge i → j exists iff i precedes j in submission order and their
/// read/write sets conflict (i wrote what j touches, or j overwrites what i
/// read). Only the last writer and the readers since it are tracked, so the
/// edge set is transitively reduced per datum; the transitive closure is
/// the full conflict relation.
pub fn build_dag(stream: TaskStream<'_>) -> TaskGraph<'_> {
    let tasks = stream.tasks;
    let n = tasks.len();
    let mut last_writer: HashMap<DataId, usize> = HashMap::new();
    let mut readers_since: HashMap<DataId, Vec<usize>> = HashMap::new();
    let mut successors: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    let mut preds: Vec<usize> = Vec::new();

    for (i, t) in tasks.iter().enumerate() {
        preds.clear();
        for r in &t.reads {
            if let Some(&w) = last_writer.get(r) {
                preds.push(w);
            }
        }
        for w in &t.writes {
            if let Some(&lw) = last_writer.get(w) {
                preds.push(lw);
            }
            if let Some(rs) = readers_since.get(w) {
                preds.extend(rs.iter().copied());
            }
        }
        preds.sort_unstable();
        preds.dedup();
        for &p in preds.iter().filter(|&&p| p != i) {
            successors[p].push(i);
            indegree[i] += 1;
        }
        for w in &t.writes {
            last_writer.insert(*w, i);
            readers_since.insert(*w, Vec::new());
        }
        for r in &t.reads {
            if !t.writes.contains(r) {
                readers_since.entry(*r).or_default().push(i);
            }
        }
    }
    TaskGraph { tasks, successors, indegree }
}

impl<'a> TaskGraph<'a> {
    pub fn task_count(&self) -> usize {
        self.tasks.len()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(i, ss)| ss.iter().map(move |&s| (i, s)))
            .collect()
    }

    /// Longest path through the DAG, counted in tasks.
    pub fn critical_path_len(&self) -> usize {
        let n = self.tasks.len();
        let mut dist = vec![1usize; n];
        // edges always point from lower to higher seq
        for i in 0..n {
            for &s in &self.successors[i] {
                dist[s] = dist[s].max(dist[i] + 1);
            }
        }
        dist.into_iter().max().unwrap_or(0)
    }

    pub fn execute(self, workers: usize) -> Result<()> {
        self.run(workers, false).0
    }

    pub fn execute_traced(self, workers: usize) -> (Result<()>, Vec<TraceEvent>) {
        self.run(workers, true)
    }

    fn run(self, workers: usize, tracing: bool) -> (Result<()>, Vec<TraceEvent>) {
        assert!(workers >= 1, "need at least one worker");
        let n = self.tasks.len();
        if n == 0 {
            return (Ok(()), Vec::new());
        }

        let names: Vec<&'static str> = self.tasks.iter().map(|t| t.name).collect();
        let seqs: Vec<usize> = self.tasks.iter().map(|t| t.seq).collect();
        let slots: Vec<Mutex<Option<Kernel<'a>>>> =
            self.tasks.into_iter().map(|t| Mutex::new(Some(t.kernel))).collect();
        let successors = self.successors;
        let pending: Vec<AtomicUsize> = self.indegree.iter().map(|&d| AtomicUsize::new(d)).collect();
        let poisoned: Vec<AtomicBool> = (0..n).map(|_| AtomicBool::new(false)).collect();
        let remaining = AtomicUsize::new(n);
        // first failure wins; ties broken toward the earliest submission
        let first_error: Mutex<Option<(usize, Error)>> = Mutex::new(None);

        let injector = Injector::new();
        for (i, &d) in self.indegree.iter().enumerate() {
            if d == 0 {
                injector.push(i);
            }
        }
        let queues: Vec<WorkerQueue<usize>> = (0..workers).map(|_| WorkerQueue::new_lifo()).collect();
        let stealers: Vec<Stealer<usize>> = queues.iter().map(WorkerQueue::stealer).collect();
        let trace_parts: Vec<Mutex<Vec<TraceEvent>>> = (0..workers).map(|_| Mutex::new(Vec::new())).collect();
        let t0 = Instant::now();

        std::thread::scope(|scope| {
            for (wid, local) in queues.into_iter().enumerate() {
                let slots = &slots;
                let names = &names;
                let seqs = &seqs;
                let successors = &successors;
                let pending = &pending;
                let poisoned = &poisoned;
                let remaining = &remaining;
                let first_error = &first_error;
                let injector = &injector;
                let stealers = &stealers;
                let trace_parts = &trace_parts;
                scope.spawn(move || {
                    let backoff = Backoff::new();
                    loop {
                        if remaining.load(Ordering::SeqCst) == 0 {
                            break;
                        }
                        let next = local.pop().or_else(|| {
                            match injector.steal_batch_and_pop(&local) {
                                Steal::Success(i) => Some(i),
                                _ => stealers.iter().enumerate().find_map(|(other, st)| {
                                    if other == wid {
                                        return None;
                                    }
                                    match st.steal() {
                                        Steal::Success(i) => Some(i),
                                        _ => None,
                                    }
                                }),
                            }
                        });
                        let Some(idx) = next else {
                            backoff.snooze();
                            continue;
                        };
                        backoff.reset();

                        let kernel = slots[idx]
                            .lock()
                            .expect("task slot poisoned")
                            .take()
                            .expect("task executed twice");
                        let skip = poisoned[idx].load(Ordering::SeqCst);
                        let mut failed = skip;
                        if !skip {
                            let begin = t0.elapsed().as_nanos() as u64;
                            let outcome = catch_unwind(AssertUnwindSafe(kernel));
                            let end = t0.elapsed().as_nanos() as u64;
                            if tracing {
                                trace_parts[wid].lock().unwrap().push(TraceEvent {
                                    task: idx,
                                    name: names[idx],
                                    begin_ns: begin,
                                    end_ns: end,
                                    worker: wid,
                                });
                            }
                            let err = match outcome {
                                Ok(Ok(())) => None,
                                Ok(Err(e)) => Some(e),
                                Err(payload) => Some(Error::KernelPanic(panic_message(&*payload))),
                            };
                            if let Some(e) = err {
                                failed = true;
                                let mut guard = first_error.lock().unwrap();
                                match &*guard {
                                    Some((seq, _)) if *seq <= seqs[idx] => {}
                                    _ => *guard = Some((seqs[idx], e)),
                                }
                            }
                        }
                        for &s in &successors[idx] {
                            if failed {
                                poisoned[s].store(true, Ordering::SeqCst);
                            }
                            if pending[s].fetch_sub(1, Ordering::SeqCst) == 1 {
                                local.push(s);
                            }
                        }
                        remaining.fetch_sub(1, Ordering::SeqCst);
                    }
                });
            }
        });

        let mut trace = Vec::new();
        if tracing {
            for part in trace_parts {
                trace.extend(part.into_inner().unwrap());
            }
            trace.sort_by_key(|e| e.begin_ns);
        }
        let result = match first_error.into_inner().unwrap() {
            Some((_, e)) => Err(e),
            None => Ok(()),
        };
        (result, trace)
    }
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown panic".to_string()
    }
}

/// Build the DAG for `stream` and run it.
pub fn run_stream(stream: TaskStream<'_>, workers: usize) -> Result<()> {
    build_dag(stream).execute(workers)
}
