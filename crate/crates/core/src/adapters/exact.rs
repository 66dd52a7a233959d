use std::sync::Arc;
use std::time::{Duration, Instant};

use super::scan::{Groups, Plan};
use super::{Adapter, Capabilities, DatasetSource, QueryOutcome, QueryRequest};
use crate::model::{BinValue, FilterPredicate, ResultTable, VizSpec};
use crate::schema::Schema;
use crate::table::Table;
use crate::{Error, Result};

/// Blocking engine: scans every row before answering, or gives up at the
/// deadline without a partial result.
#[derive(Default)]
pub struct ExactEngine {
    data: Option<(Arc<Table>, Schema)>,
}

impl ExactEngine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Engine over an already loaded table.
    pub fn with_table(table: Arc<Table>, schema: Schema) -> Self {
        ExactEngine {
            data: Some((table, schema)),
        }
    }

    fn loaded(&self) -> Result<(&Table, &Schema)> {
        self.data
            .as_ref()
            .map(|(t, s)| (t.as_ref(), s))
            .ok_or_else(|| Error::Adapter("exact engine used before setup".into()))
    }

    /// Runs the query; `None` if `deadline` passes first.
    pub fn execute(
        &self,
        viz: &VizSpec,
        filter: &FilterPredicate,
        deadline: Option<Instant>,
    ) -> Result<Option<ResultTable>> {
        let (table, schema) = self.loaded()?;
        let plan = Plan::compile(table, schema, viz, filter)?;
        let mut groups = Groups::default();
        if !plan.scan(0, table.rows(), &mut groups, deadline) {
            return Ok(None);
        }
        let bins = plan.sorted(&groups, |a| plan.exact_value(a).map(BinValue::exact));
        Ok(Some(ResultTable::new(bins, 1.0)))
    }
}

impl Adapter for ExactEngine {
    fn name(&self) -> &str {
        "exact"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            supports_joins: true,
            supports_cancellation: true,
            ..Capabilities::default()
        }
    }

    fn setup(&mut self, dataset: &DatasetSource, schema: &Schema) -> Result<Duration> {
        let start = Instant::now();
        let table = dataset.load()?;
        self.data = Some((table, schema.clone()));
        Ok(start.elapsed())
    }

    fn process_request(&self, req: &QueryRequest) -> Result<QueryOutcome> {
        Ok(match self.execute(&req.viz, &req.filter, Some(req.deadline))? {
            Some(r) => QueryOutcome::Completed(r),
            None => QueryOutcome::TimedOut,
        })
    }
}
