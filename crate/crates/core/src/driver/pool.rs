use std::thread::{self, JoinHandle};

use crossbeam_channel::Sender;

/// Environment variable overriding the number of query workers.
pub const WORKERS_ENV: &str = "EXPLOREBENCH_WORKERS";

const DEFAULT_WORKERS: usize = 16;

/// Worker count from [`WORKERS_ENV`], falling back to 16.
pub fn pool_size() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or(DEFAULT_WORKERS)
}

type Job = Box<dyn FnOnce() + Send>;

/// Fixed set of threads running submitted closures in FIFO order.
pub struct WorkerPool {
    jobs: Option<Sender<Job>>,
    workers: Vec<JoinHandle<()>>,
}

impl WorkerPool {
    pub fn new(size: usize) -> Self {
        let (tx, rx) = crossbeam_channel::unbounded::<Job>();
        let workers = (0..size.max(1))
            .map(|i| {
                let rx = rx.clone();
                thread::Builder::new()
                    .name(format!("query-worker-{i}"))
                    .spawn(move || {
                        for job in rx {
                            job();
                        }
                    })
                    .expect("spawn worker")
            })
            .collect();
        WorkerPool {
            jobs: Some(tx),
            workers,
        }
    }

    pub fn size(&self) -> usize {
        self.workers.len()
    }

    pub fn submit(&self, job: impl FnOnce() + Send + 'static) {
        if let Some(tx) = &self.jobs {
            let _ = tx.send(Box::new(job));
        }
    }
}

impl Drop for WorkerPool {
    fn drop(&mut self) {
        self.jobs.take();
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}
