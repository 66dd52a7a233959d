mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use common::random_table;
use explorebench::adapters::{
    Adapter, Capabilities, DatasetSource, ExactEngine, ProgressiveEngine, QueryOutcome, QueryRequest,
    SubprocessAdapter,
};
use explorebench::datagen::{normalize, DimensionSpec, StarSchemaSpec};
use explorebench::driver::{
    run_suite, run_workflow, BenchmarkSettings, GroundTruth, QueryRecord, WorkerPool, GRACE,
};
use explorebench::{
    AggregateFn, AggregateSpec, BinningSpec, Condition, FilterPredicate, Interaction, Result, Schema,
    Table, VizSpec, Workflow, WorkflowType,
};

fn create(name: &str, column: &str) -> Interaction {
    Interaction::Create {
        viz: VizSpec::new(name, vec![BinningSpec::nominal(column)], AggregateSpec::count()),
    }
}

fn link(s: &str, t: &str) -> Interaction {
    Interaction::Link {
        source: s.into(),
        target: t.into(),
    }
}

fn select(viz: &str, category: &str) -> Interaction {
    Interaction::Select {
        viz: viz.into(),
        selection: FilterPredicate::single("carrier", Condition::Eq(category.into())),
    }
}

fn one_to_three() -> Workflow {
    Workflow {
        name: "one_to_n_0".into(),
        workflow_type: WorkflowType::OneToN,
        interactions: vec![
            create("viz_0", "carrier"),
            create("viz_1", "day"),
            link("viz_0", "viz_1"),
            Interaction::Create {
                viz: VizSpec::new(
                    "viz_2",
                    vec![BinningSpec::fixed_count("x", 10)],
                    AggregateSpec::over(AggregateFn::Avg, "y"),
                ),
            },
            link("viz_0", "viz_2"),
            create("viz_3", "day"),
            link("viz_0", "viz_3"),
            select("viz_0", "AA"),
            select("viz_0", "DL"),
        ],
    }
}

struct Fixture {
    table: Arc<Table>,
    schema: Schema,
    truth: GroundTruth,
    pool: WorkerPool,
}

fn fixture(rows: usize) -> Fixture {
    let table = Arc::new(random_table(rows, 9));
    let schema = table.schema("t");
    Fixture {
        truth: GroundTruth::new(table.clone(), schema.clone()),
        table,
        schema,
        pool: WorkerPool::new(8),
    }
}

fn settings(tr_ms: u64, rows: usize) -> BenchmarkSettings {
    BenchmarkSettings {
        think_time: Duration::ZERO,
        ..BenchmarkSettings::new(Duration::from_millis(tr_ms), "t", rows as u64)
    }
}

fn setup(mut adapter: Box<dyn Adapter>, f: &Fixture) -> Arc<dyn Adapter> {
    let source = DatasetSource::Memory {
        name: "t".into(),
        table: f.table.clone(),
    };
    adapter.setup(&source, &f.schema).unwrap();
    Arc::from(adapter)
}

fn untimed(records: &[QueryRecord]) -> Vec<QueryRecord> {
    records
        .iter()
        .map(|r| QueryRecord {
            start_time: 0,
            end_time: 0,
            ..r.clone()
        })
        .collect()
}

#[test]
fn single_create_on_exact_engine() {
    let f = fixture(1_000);
    let adapter = setup(Box::new(ExactEngine::new()), &f);
    let wf = Workflow {
        name: "independent_0".into(),
        workflow_type: WorkflowType::Independent,
        interactions: vec![create("viz_0", "carrier")],
    };
    let run = run_workflow(&wf, &adapter, &settings(10_000, 1_000), &f.truth, &f.schema, &f.pool);
    assert_eq!(run.error, None);
    assert_eq!(run.records.len(), 1);
    let r = &run.records[0];
    assert!(!r.tr_violated);
    assert_eq!(r.rel_error_avg, Some(0.0));
    assert_eq!(r.missing_bins, Some(0.0));
    assert_eq!(r.cosine_distance, Some(0.0));
    assert_eq!(r.bins_delivered, 5);
    assert_eq!(r.driver, "exact");
    assert_eq!(r.data_size, "1k");
    assert_eq!(r.binning_type, "nominal");
    assert_eq!(r.agg_type, "count");
    assert_eq!(r.margin_avg, None);
}

#[test]
fn one_to_n_select_fans_out_concurrently() {
    let f = fixture(5_000);
    let adapter = setup(Box::new(ProgressiveEngine::new(1)), &f);
    let run = run_workflow(&one_to_three(), &adapter, &settings(300, 5_000), &f.truth, &f.schema, &f.pool);
    assert_eq!(run.error, None);
    let fan: Vec<&QueryRecord> = run.records.iter().filter(|r| r.interaction == 7).collect();
    assert_eq!(fan.len(), 4);
    let names: Vec<&str> = fan.iter().map(|r| r.viz_name.as_str()).collect();
    assert_eq!(names, ["viz_0", "viz_1", "viz_2", "viz_3"]);
    let first = fan.iter().map(|r| r.start_time).min().unwrap();
    let last = fan.iter().map(|r| r.start_time).max().unwrap();
    assert!(last - first <= 10);
    // every pair of [start, end] intervals overlaps
    for a in &fan {
        for b in &fan {
            assert!(a.start_time <= b.end_time && b.start_time <= a.end_time);
        }
    }
    // ids follow (interaction, viz name)
    for (i, r) in run.records.iter().enumerate() {
        assert_eq!(r.id, i);
    }
    assert!(run
        .records
        .windows(2)
        .all(|w| (w[0].interaction, &w[0].viz_name) < (w[1].interaction, &w[1].viz_name)));
}

#[test]
fn ground_truth_is_cached_per_query() {
    let f = fixture(2_000);
    let viz = VizSpec::new("a", vec![BinningSpec::nominal("day")], AggregateSpec::count());
    let other_name = VizSpec { name: "b".into(), ..viz.clone() };
    let filter = FilterPredicate::single("x", Condition::Lt(50.0));
    let t1 = f.truth.compute(&viz, &filter).unwrap();
    let t2 = f.truth.compute(&other_name, &filter).unwrap();
    assert!(Arc::ptr_eq(&t1, &t2));
    let direct = ExactEngine::with_table(f.table.clone(), f.schema.clone())
        .execute(&viz, &filter, None)
        .unwrap()
        .unwrap();
    assert_eq!(t1.bins, direct.bins);
    let t3 = f.truth.compute(&viz, &FilterPredicate::default()).unwrap();
    assert!(!Arc::ptr_eq(&t1, &t3));
    assert_eq!(f.truth.cached(), 2);
}

#[test]
fn replay_is_deterministic_for_exact_engine() {
    let f = fixture(3_000);
    let adapter = setup(Box::new(ExactEngine::new()), &f);
    let s = settings(5_000, 3_000);
    let a = run_workflow(&one_to_three(), &adapter, &s, &f.truth, &f.schema, &f.pool);
    let b = run_workflow(&one_to_three(), &adapter, &s, &f.truth, &f.schema, &f.pool);
    assert_eq!(a.records.len(), 1 + 1 + 1 + 1 + 1 + 1 + 1 + 4 + 4);
    assert_eq!(untimed(&a.records), untimed(&b.records));
}

/// Ignores deadlines entirely.
struct Sleepy(Duration);

impl Adapter for Sleepy {
    fn name(&self) -> &str {
        "sleepy"
    }
    fn capabilities(&self) -> Capabilities {
        Capabilities::default()
    }
    fn setup(&mut self, _: &DatasetSource, _: &Schema) -> Result<Duration> {
        Ok(Duration::ZERO)
    }
    fn process_request(&self, _: &QueryRequest) -> Result<QueryOutcome> {
        std::thread::sleep(self.0);
        Ok(QueryOutcome::Completed(Default::default()))
    }
}

#[test]
fn driver_stops_waiting_at_the_deadline() {
    let f = fixture(100);
    let adapter: Arc<dyn Adapter> = Arc::new(Sleepy(Duration::from_millis(700)));
    let wf = Workflow {
        name: "sequential_0".into(),
        workflow_type: WorkflowType::Sequential,
        interactions: vec![create("viz_0", "carrier"), create("viz_1", "day")],
    };
    let run = run_workflow(&wf, &adapter, &settings(200, 100), &f.truth, &f.schema, &f.pool);
    assert_eq!(run.records.len(), 2);
    for r in &run.records {
        assert!(r.tr_violated);
        assert!(r.duration_ms() <= 200 + GRACE.as_millis() as u64, "{r:?}");
        assert_eq!(r.missing_bins, Some(1.0));
        assert_eq!(r.bins_delivered, 0);
    }
}

/// Fails hard on the n-th query.
struct Flaky {
    inner: ExactEngine,
    calls: AtomicUsize,
    fail_at: usize,
}

impl Adapter for Flaky {
    fn name(&self) -> &str {
        "flaky"
    }
    fn capabilities(&self) -> Capabilities {
        Capabilities::default()
    }
    fn setup(&mut self, d: &DatasetSource, s: &Schema) -> Result<Duration> {
        self.inner.setup(d, s)
    }
    fn process_request(&self, req: &QueryRequest) -> Result<QueryOutcome> {
        if self.calls.fetch_add(1, Ordering::SeqCst) + 1 == self.fail_at {
            return Err(explorebench::Error::Adapter("engine crashed".into()));
        }
        self.inner.process_request(req)
    }
}

#[test]
fn hard_failure_aborts_workflow_but_keeps_records() {
    let f = fixture(1_000);
    let flaky = Flaky {
        inner: ExactEngine::new(),
        calls: AtomicUsize::new(0),
        fail_at: 3,
    };
    let adapter = setup(Box::new(flaky), &f);
    let run = run_workflow(&one_to_three(), &adapter, &settings(5_000, 1_000), &f.truth, &f.schema, &f.pool);
    let err = run.error.expect("aborted");
    assert!(err.contains("engine crashed"), "{err}");
    assert_eq!(run.records.len(), 3);
    assert!(run.records[2].tr_violated);
    assert!(run.records[2].error.as_deref().unwrap().contains("engine crashed"));
}

#[test]
fn suite_continues_after_failures() {
    let f = fixture(1_000);
    let adapter = setup(Box::new(ExactEngine::new()), &f);
    let broken = Workflow {
        name: "sequential_1".into(),
        workflow_type: WorkflowType::Sequential,
        interactions: vec![create("viz_0", "carrier"), link("viz_0", "nope")],
    };
    let single = Workflow {
        name: "independent_0".into(),
        workflow_type: WorkflowType::Independent,
        interactions: vec![create("viz_0", "carrier"), create("viz_1", "day")],
    };
    let base = settings(5_000, 1_000);
    let trs = [Duration::from_millis(500), Duration::from_secs(1)];
    let suite = run_suite(&trs, &base, &[broken, single], &adapter, &f.truth, &f.schema);
    assert_eq!(suite.failures.len(), 2);
    assert!(suite.failures.iter().all(|x| x.workflow == "sequential_1"));
    // 1 record from the broken workflow and 2 from the other, per TR
    assert_eq!(suite.records.len(), 6);
    assert_eq!(suite.records.iter().filter(|r| r.time_req == 500).count(), 3);
}

fn mock_command(extra: &str) -> String {
    let script = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/mock_adapter.py");
    format!("python3 {script} {extra}")
}

fn ten_interactions() -> Workflow {
    let mut interactions = vec![create("viz_0", "carrier"), create("viz_1", "day"), link("viz_0", "viz_1")];
    for c in ["AA", "DL", "UA", "WN", "B6", "AA", "DL"] {
        interactions.push(select("viz_0", c));
    }
    Workflow {
        name: "sequential_0".into(),
        workflow_type: WorkflowType::Sequential,
        interactions,
    }
}

#[test]
fn subprocess_bridge_runs_a_workflow() {
    let f = fixture(500);
    let adapter = setup(Box::new(SubprocessAdapter::new(mock_command(""))), &f);
    let run = run_workflow(&ten_interactions(), &adapter, &settings(2_000, 500), &f.truth, &f.schema, &f.pool);
    assert_eq!(run.error, None);
    assert_eq!(run.records.len(), 1 + 1 + 1 + 7 * 2);
    for r in &run.records {
        assert!(!r.tr_violated, "{r:?}");
        assert_eq!(r.bins_delivered, 1);
        assert!(r.margin_avg.is_some());
    }
}

#[test]
fn malformed_bridge_replies_are_recorded() {
    let f = fixture(500);
    let adapter = setup(Box::new(SubprocessAdapter::new(mock_command("--malformed-every 3"))), &f);
    let run = run_workflow(&ten_interactions(), &adapter, &settings(2_000, 500), &f.truth, &f.schema, &f.pool);
    assert_eq!(run.error, None);
    let failed: Vec<_> = run.records.iter().filter(|r| r.error.is_some()).collect();
    assert!(!failed.is_empty());
    for r in &failed {
        assert!(r.tr_violated);
        assert!(r.error.as_ref().unwrap().contains("unreadable"), "{r:?}");
    }
    assert!(run.records.iter().any(|r| r.error.is_none() && !r.tr_violated));
}

#[test]
fn ground_truth_on_star_schema_matches_flat_table() {
    let f = fixture(2_000);
    let spec = StarSchemaSpec {
        fact: "t".into(),
        dimensions: vec![DimensionSpec {
            name: "carriers".into(),
            key: "carrier_id".into(),
            columns: vec!["carrier".into()],
        }],
    };
    let dir = tempfile::tempdir().unwrap();
    normalize(&f.table, &spec).unwrap().write_dir(dir.path()).unwrap();
    let star = GroundTruth::from_source(&DatasetSource::open(dir.path()), f.schema.clone()).unwrap();
    let viz = VizSpec::new(
        "v",
        vec![BinningSpec::nominal("carrier"), BinningSpec::fixed_count("x", 4)],
        AggregateSpec::over(AggregateFn::Sum, "y"),
    );
    let filter = FilterPredicate::single("carrier", Condition::Ne("UA".into()));
    assert_eq!(
        star.compute(&viz, &filter).unwrap().bins,
        f.truth.compute(&viz, &filter).unwrap().bins
    );
}
