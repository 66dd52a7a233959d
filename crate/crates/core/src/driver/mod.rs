//! Workflow replay under a hard per-query time requirement.

mod pool;
mod record;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant, SystemTime};

use crossbeam_channel::RecvTimeoutError;

pub use pool::{pool_size, WorkerPool, WORKERS_ENV};
pub use record::{size_label, QueryRecord};

use crate::adapters::{Adapter, DatasetSource, ExactEngine, QueryOutcome, QueryRequest};
use crate::metrics::MetricSet;
use crate::model::{epoch_ms, FilterPredicate, ResultTable, VizGraph, VizSpec, Workflow};
use crate::schema::Schema;
use crate::table::Table;
use crate::{Error, Result};

/// Slack allowed between the deadline and the moment a query is recorded
/// as finished.
pub const GRACE: Duration = Duration::from_millis(100);

/// Time requirements of the default grid, in seconds.
pub const DEFAULT_TIME_REQUIREMENTS: [f64; 5] = [0.5, 1.0, 3.0, 5.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSettings {
    pub time_requirement: Duration,
    pub think_time: Duration,
    pub dataset: String,
    pub data_size: u64,
    pub use_joins: bool,
    pub confidence: f64,
}

impl BenchmarkSettings {
    /// Confidence 0.95, think time 1 s, no joins.
    pub fn new(time_requirement: Duration, dataset: impl Into<String>, data_size: u64) -> Self {
        BenchmarkSettings {
            time_requirement,
            think_time: Duration::from_secs(1),
            dataset: dataset.into(),
            data_size,
            use_joins: false,
            confidence: 0.95,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.time_requirement.is_zero() {
            return Err(Error::spec("time requirement must be positive"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::spec(format!("confidence {} outside (0, 1)", self.confidence)));
        }
        Ok(())
    }
}

/// Exact answers, computed without a deadline and cached per
/// (binning, aggregate, effective filter) for the lifetime of the value.
pub struct GroundTruth {
    engine: ExactEngine,
    cache: Mutex<HashMap<String, Arc<ResultTable>>>,
}

impl GroundTruth {
    pub fn new(table: Arc<Table>, schema: Schema) -> Self {
        GroundTruth {
            engine: ExactEngine::with_table(table, schema),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn from_source(source: &DatasetSource, schema: Schema) -> Result<Self> {
        Ok(Self::new(source.load()?, schema))
    }

    pub fn compute(&self, viz: &VizSpec, filter: &FilterPredicate) -> Result<Arc<ResultTable>> {
        let key = viz.query_key(filter);
        if let Some(hit) = self.cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(hit.clone());
        }
        let result = self
            .engine
            .execute(viz, filter, None)?
            .expect("no deadline");
        let result = Arc::new(result);
        self.cache
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .entry(key)
            .or_insert(result.clone());
        Ok(result)
    }

    pub fn cached(&self) -> usize {
        self.cache.lock().unwrap_or_else(|e| e.into_inner()).len()
    }
}

/// Records of one workflow; `error` is set when the run was aborted.
#[derive(Debug, Clone, Default)]
pub struct WorkflowRun {
    pub records: Vec<QueryRecord>,
    pub error: Option<String>,
}

struct Issued {
    viz: VizSpec,
    filter: FilterPredicate,
    start: SystemTime,
    end: Option<SystemTime>,
    outcome: Option<std::result::Result<QueryOutcome, String>>,
}

/// Replays `workflow` against `adapter`. One record per issued query,
/// ordered by interaction index and viz name.
pub fn run_workflow(
    workflow: &Workflow,
    adapter: &Arc<dyn Adapter>,
    settings: &BenchmarkSettings,
    truth: &GroundTruth,
    schema: &Schema,
    pool: &WorkerPool,
) -> WorkflowRun {
    let mut run = WorkflowRun::default();
    if let Err(e) = settings.validate() {
        run.error = Some(e.to_string());
        return run;
    }
    if let Err(e) = adapter.workflow_start() {
        run.error = Some(e.to_string());
        return run;
    }
    let mut graph = VizGraph::new();
    'interactions: for (index, interaction) in workflow.interactions.iter().enumerate() {
        let dirty = match graph.apply(interaction) {
            Ok(d) => d,
            Err(e) => {
                run.error = Some(format!("interaction {index}: {e}"));
                break;
            }
        };
        let notified = match interaction {
            crate::model::Interaction::Link { source, target } => adapter.link_vizs(source, target),
            crate::model::Interaction::Discard { viz } => adapter.delete_vizs(std::slice::from_ref(viz)),
            _ => Ok(()),
        };
        if let Err(e) = notified {
            run.error = Some(format!("interaction {index}: {e}"));
            break;
        }

        let mut issued = Vec::with_capacity(dirty.len());
        for name in &dirty {
            let viz = graph.viz(name).expect("dirty vizs are live").clone();
            let filter = graph.effective_filter(name).expect("live viz");
            issued.push(Issued {
                viz,
                filter,
                start: SystemTime::now(),
                end: None,
                outcome: None,
            });
        }
        let (tx, rx) = crossbeam_channel::unbounded();
        let now = Instant::now();
        let deadline = now + settings.time_requirement;
        let start = SystemTime::now();
        for (slot, q) in issued.iter_mut().enumerate() {
            q.start = start;
            let req = QueryRequest {
                viz: q.viz.clone(),
                filter: q.filter.clone(),
                table: settings.dataset.clone(),
                time_requirement: settings.time_requirement,
                deadline,
                confidence: settings.confidence,
            };
            let adapter = adapter.clone();
            let tx = tx.clone();
            pool.submit(move || {
                let outcome = adapter.process_request(&req).map_err(|e| e.to_string());
                let _ = tx.send((slot, outcome, Instant::now(), SystemTime::now()));
            });
        }
        drop(tx);

        let mut pending = issued.len();
        while pending > 0 {
            match rx.recv_deadline(deadline) {
                Ok((slot, outcome, at, wall)) => {
                    pending -= 1;
                    let q = &mut issued[slot];
                    if at <= deadline {
                        q.outcome = Some(outcome);
                        q.end = Some(wall);
                    } else {
                        // finished, but too late to count
                        q.end = Some(start + settings.time_requirement);
                    }
                }
                Err(RecvTimeoutError::Timeout) | Err(RecvTimeoutError::Disconnected) => break,
            }
        }
        let stopped = SystemTime::now();

        let mut hard_failure = None;
        let mut batch = Vec::with_capacity(issued.len());
        for q in issued {
            let end = q.end.unwrap_or(stopped);
            let (delivered, violated, error) = match q.outcome {
                Some(Ok(QueryOutcome::Completed(r))) => (Some(r), false, None),
                Some(Ok(QueryOutcome::TimedOut)) | None => (None, true, None),
                Some(Ok(QueryOutcome::Failed(m))) => (None, true, Some(m)),
                Some(Err(m)) => {
                    hard_failure.get_or_insert_with(|| m.clone());
                    (None, true, Some(m))
                }
            };
            let metrics = match truth.compute(&q.viz, &q.filter) {
                Ok(t) => MetricSet::evaluate(delivered.as_ref(), &t, violated),
                Err(e) => {
                    hard_failure.get_or_insert_with(|| format!("ground truth: {e}"));
                    MetricSet {
                        tr_violated: violated,
                        ..MetricSet::default()
                    }
                }
            };
            batch.push(QueryRecord::new(
                &workflow.name,
                index,
                &q.viz,
                schema,
                adapter.name(),
                settings,
                epoch_ms(q.start),
                epoch_ms(end),
                &metrics,
                delivered.as_ref().map(|r| r.progress),
                error,
            ));
        }
        batch.sort_by(|a, b| a.viz_name.cmp(&b.viz_name));
        run.records.extend(batch);
        if let Some(m) = hard_failure {
            run.error = Some(format!("interaction {index}: {m}"));
            break 'interactions;
        }
        if index + 1 < workflow.interactions.len() && !settings.think_time.is_zero() {
            std::thread::sleep(settings.think_time);
        }
    }
    for (id, r) in run.records.iter_mut().enumerate() {
        r.id = id;
    }
    if let Err(e) = adapter.workflow_end() {
        run.error.get_or_insert_with(|| e.to_string());
    }
    run
}

/// One workflow that could not be completed in a suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteFailure {
    pub workflow: String,
    pub time_requirement: Duration,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct SuiteRun {
    pub records: Vec<QueryRecord>,
    pub failures: Vec<SuiteFailure>,
}

/// Runs every workflow under every time requirement, TR-major. Failed
/// workflows keep their partial records and the suite continues.
pub fn run_suite(
    time_requirements: &[Duration],
    base: &BenchmarkSettings,
    workflows: &[Workflow],
    adapter: &Arc<dyn Adapter>,
    truth: &GroundTruth,
    schema: &Schema,
) -> SuiteRun {
    let pool = WorkerPool::new(pool_size());
    let mut suite = SuiteRun::default();
    for &tr in time_requirements {
        let settings = BenchmarkSettings {
            time_requirement: tr,
            ..base.clone()
        };
        for wf in workflows {
            let run = run_workflow(wf, adapter, &settings, truth, schema, &pool);
            suite.records.extend(run.records);
            if let Some(message) = run.error {
                suite.failures.push(SuiteFailure {
                    workflow: wf.name.clone(),
                    time_requirement: tr,
                    message,
                });
            }
        }
    }
    suite
}
