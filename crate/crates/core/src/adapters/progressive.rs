use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::scan::{Acc, Groups, Plan, CHECK_EVERY};
use super::{Adapter, Capabilities, DatasetSource, QueryOutcome, QueryRequest};
use crate::datagen::normal_quantile;
use crate::model::{AggregateFn, BinValue, FilterPredicate, ResultTable, VizSpec};
use crate::schema::Schema;
use crate::table::{Column, ColumnData, Table};
use crate::{Error, Result};

/// Two-sided normal critical value for `confidence`.
pub fn z_value(confidence: f64) -> f64 {
    normal_quantile((1.0 + confidence) / 2.0)
}

/// Online-aggregation engine over one fixed random permutation of the rows.
/// Queries consume the permuted rows from the start until shortly before
/// the deadline and report scaled estimates with CLT margins.
pub struct ProgressiveEngine {
    seed: u64,
    data: Option<(Arc<Table>, Schema)>,
}

impl ProgressiveEngine {
    pub fn new(seed: u64) -> Self {
        ProgressiveEngine { seed, data: None }
    }

    /// Engine over `table`, shuffled with `seed`.
    pub fn with_table(table: &Table, schema: Schema, seed: u64) -> Self {
        ProgressiveEngine {
            seed,
            data: Some((Arc::new(permute(table, seed)), schema)),
        }
    }

    /// Engine over rows already stored in random order (e.g. i.i.d.
    /// generated data). The table is shared, not copied.
    pub fn presampled(table: Arc<Table>, schema: Schema) -> Self {
        ProgressiveEngine {
            seed: 0,
            data: Some((table, schema)),
        }
    }

    fn loaded(&self) -> Result<(&Table, &Schema)> {
        self.data
            .as_ref()
            .map(|(t, s)| (t.as_ref(), s))
            .ok_or_else(|| Error::Adapter("progressive engine used before setup".into()))
    }

    pub fn total_rows(&self) -> usize {
        self.data.as_ref().map_or(0, |(t, _)| t.rows())
    }

    /// Snapshot after exactly `rows_consumed` permuted rows.
    pub fn snapshot(
        &self,
        viz: &VizSpec,
        filter: &FilterPredicate,
        rows_consumed: usize,
        confidence: f64,
    ) -> Result<ResultTable> {
        let (table, schema) = self.loaded()?;
        let plan = Plan::compile(table, schema, viz, filter)?;
        let m = rows_consumed.min(table.rows());
        let mut groups = Groups::default();
        plan.scan(0, m, &mut groups, None);
        Ok(estimate(&plan, &groups, m, table.rows(), confidence))
    }

    /// Consumes rows until `stop_at`, then snapshots.
    fn run(&self, req: &QueryRequest, stop_at: Instant) -> Result<ResultTable> {
        let (table, schema) = self.loaded()?;
        let plan = Plan::compile(table, schema, &req.viz, &req.filter)?;
        let n = table.rows();
        let mut groups = Groups::default();
        let mut m = 0;
        while m < n && Instant::now() < stop_at {
            let end = (m + CHECK_EVERY).min(n);
            plan.scan(m, end, &mut groups, None);
            m = end;
        }
        Ok(estimate(&plan, &groups, m, n, req.confidence))
    }
}

/// Time kept back before the deadline to build and hand over the snapshot.
pub fn reserve(time_requirement: Duration) -> Duration {
    time_requirement
        .mul_f64(0.05)
        .clamp(Duration::from_millis(2), Duration::from_millis(50))
}

fn permute(table: &Table, seed: u64) -> Table {
    // u32 indices halve the scratch memory on large tables
    let rows = u32::try_from(table.rows()).expect("at most 2^32 rows");
    let mut order: Vec<u32> = (0..rows).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let columns = table
        .columns()
        .iter()
        .map(|c| Column {
            name: c.name.clone(),
            data: match &c.data {
                ColumnData::Quantitative(v) => ColumnData::Quantitative(order.iter().map(|&i| v[i as usize]).collect()),
                ColumnData::Nominal { codes, categories } => ColumnData::Nominal {
                    codes: order.iter().map(|&i| codes[i as usize]).collect(),
                    categories: categories.clone(),
                },
            },
        })
        .collect();
    Table::new(columns).expect("same shape as input")
}

/// Scaled estimates and margins from `m` of `n` rows.
///
/// COUNT and SUM scale the sample total by `n / m`; their margin uses the
/// spread of the per-row contribution over all `m` sampled rows (a Bernoulli
/// indicator for COUNT). AVG is the bin's sample mean with the spread taken
/// over the bin's own rows. Margins carry the finite-population correction
/// and are zero once every row has been read. Bins seen fewer than twice
/// get an unbounded margin, as do MIN and MAX before completion.
fn estimate(plan: &Plan<'_>, groups: &Groups, m: usize, n: usize, confidence: f64) -> ResultTable {
    let progress = if n == 0 { 1.0 } else { m as f64 / n as f64 };
    if m == 0 {
        return ResultTable::new(Default::default(), progress);
    }
    let complete = m == n;
    let z = z_value(confidence);
    let fpc = if n > 1 {
        ((n - m) as f64 / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mf = m as f64;
    let scale = n as f64 / mf;
    let bins = plan.sorted(groups, |a: &Acc| {
        let est = match plan.function {
            AggregateFn::Count => a.rows as f64 * scale,
            _ if a.n == 0 => return None,
            AggregateFn::Sum => a.sum * scale,
            AggregateFn::Avg => a.sum / a.n as f64,
            AggregateFn::Min => a.min,
            AggregateFn::Max => a.max,
        };
        let margin = if complete {
            0.0
        } else {
            let seen = match plan.function {
                AggregateFn::Count => a.rows,
                _ => a.n,
            };
            if seen < 2 {
                f64::INFINITY
            } else {
                match plan.function {
                    AggregateFn::Count => {
                        let p = a.rows as f64 / mf;
                        let s = (p * (1.0 - p) * mf / (mf - 1.0)).max(0.0).sqrt();
                        z * n as f64 * s / mf.sqrt() * fpc
                    }
                    AggregateFn::Sum => {
                        let mean = a.sum / mf;
                        let var = ((a.sumsq - mf * mean * mean) / (mf - 1.0)).max(0.0);
                        z * n as f64 * var.sqrt() / mf.sqrt() * fpc
                    }
                    AggregateFn::Avg => {
                        let k = a.n as f64;
                        let mean = a.sum / k;
                        let var = ((a.sumsq - k * mean * mean) / (k - 1.0)).max(0.0);
                        z * var.sqrt() / k.sqrt() * fpc
                    }
                    AggregateFn::Min | AggregateFn::Max => f64::INFINITY,
                }
            }
        };
        Some(BinValue::with_margin(est, margin))
    });
    ResultTable::new(bins, progress)
}

impl Adapter for ProgressiveEngine {
    fn name(&self) -> &str {
        "progressive"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            supports_progressive_poll: true,
            supports_margins: true,
            supports_joins: true,
            supports_cancellation: true,
        }
    }

    fn setup(&mut self, dataset: &DatasetSource, schema: &Schema) -> Result<Duration> {
        let start = Instant::now();
        let table = dataset.load()?;
        self.data = Some((Arc::new(permute(&table, self.seed)), schema.clone()));
        Ok(start.elapsed())
    }

    fn process_request(&self, req: &QueryRequest) -> Result<QueryOutcome> {
        let stop_at = req
            .deadline
            .checked_sub(reserve(req.time_requirement))
            .unwrap_or(req.deadline);
        Ok(QueryOutcome::Completed(self.run(req, stop_at)?))
    }
}
