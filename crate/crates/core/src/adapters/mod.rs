//! Boundary to the system under test.

mod exact;
mod progressive;
pub mod scan;
mod subprocess;

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use exact::ExactEngine;
pub use progressive::{z_value, ProgressiveEngine};
pub use subprocess::SubprocessAdapter;

use crate::datagen::{denormalize, StarTables};
use crate::model::{FilterPredicate, ResultTable, VizSpec};
use crate::schema::Schema;
use crate::table::Table;
use crate::{Error, Result};

/// One query as issued by the driver.
#[derive(Debug, Clone)]
pub struct QueryRequest {
    pub viz: VizSpec,
    /// The viz's own filter conjoined with everything inherited over links.
    pub filter: FilterPredicate,
    pub table: String,
    pub time_requirement: Duration,
    pub deadline: Instant,
    pub confidence: f64,
}

impl QueryRequest {
    pub fn new(
        viz: VizSpec,
        filter: FilterPredicate,
        table: impl Into<String>,
        time_requirement: Duration,
        confidence: f64,
    ) -> Self {
        QueryRequest {
            viz,
            filter,
            table: table.into(),
            time_requirement,
            deadline: Instant::now() + time_requirement,
            confidence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Capabilities {
    pub supports_progressive_poll: bool,
    pub supports_margins: bool,
    pub supports_joins: bool,
    pub supports_cancellation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryOutcome {
    Completed(ResultTable),
    /// Nothing could be delivered before the deadline.
    TimedOut,
    /// The engine answered with an error or an unreadable response.
    Failed(String),
}

/// Where an adapter loads its data from.
#[derive(Debug, Clone)]
pub enum DatasetSource {
    Csv(PathBuf),
    /// Directory written by [`StarTables::write_dir`].
    Star(PathBuf),
    Memory { name: String, table: Arc<Table> },
}

impl DatasetSource {
    /// A directory is read as a star schema, anything else as CSV.
    pub fn open(path: impl AsRef<Path>) -> Self {
        let path = path.as_ref().to_path_buf();
        if path.is_dir() {
            DatasetSource::Star(path)
        } else {
            DatasetSource::Csv(path)
        }
    }

    pub fn name(&self) -> String {
        match self {
            DatasetSource::Csv(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "data".into()),
            DatasetSource::Star(p) => StarTables::read_dir(p)
                .map(|s| s.spec.fact)
                .unwrap_or_else(|_| "data".into()),
            DatasetSource::Memory { name, .. } => name.clone(),
        }
    }

    pub fn path(&self) -> Option<&Path> {
        match self {
            DatasetSource::Csv(p) | DatasetSource::Star(p) => Some(p),
            DatasetSource::Memory { .. } => None,
        }
    }

    /// Loads the de-normalized table, joining star schemas.
    pub fn load(&self) -> Result<Arc<Table>> {
        match self {
            DatasetSource::Csv(p) => {
                if !p.exists() {
                    return Err(Error::file(p, std::io::ErrorKind::NotFound.into()));
                }
                Ok(Arc::new(Table::read_csv(p)?))
            }
            DatasetSource::Star(p) => Ok(Arc::new(denormalize(&StarTables::read_dir(p)?)?)),
            DatasetSource::Memory { table, .. } => Ok(table.clone()),
        }
    }
}

/// The interface every system under test implements. The driver calls
/// `setup` once, then shares the adapter across its worker threads.
pub trait Adapter: Send + Sync {
    fn name(&self) -> &str;

    fn capabilities(&self) -> Capabilities;

    /// Prepares the engine and returns the wall-clock preparation time.
    fn setup(&mut self, dataset: &DatasetSource, schema: &Schema) -> Result<Duration>;

    /// Answers one query. `Err` is a hard failure that aborts the workflow.
    fn process_request(&self, request: &QueryRequest) -> Result<QueryOutcome>;

    fn link_vizs(&self, _source: &str, _target: &str) -> Result<()> {
        Ok(())
    }

    fn delete_vizs(&self, _vizs: &[String]) -> Result<()> {
        Ok(())
    }

    fn workflow_start(&self) -> Result<()> {
        Ok(())
    }

    fn workflow_end(&self) -> Result<()> {
        Ok(())
    }
}

/// Builds an adapter from its command-line name: `exact`, `progressive` or
/// `subprocess:<command>`.
pub fn from_name(name: &str, seed: u64) -> Result<Box<dyn Adapter>> {
    match name {
        "exact" => Ok(Box::new(ExactEngine::new())),
        "progressive" => Ok(Box::new(ProgressiveEngine::new(seed))),
        _ => match name.strip_prefix("subprocess:") {
            Some(cmd) if !cmd.trim().is_empty() => Ok(Box::new(SubprocessAdapter::new(cmd))),
            _ => Err(Error::spec(format!(
                "unknown adapter `{name}` (expected exact, progressive or subprocess:<cmd>)"
            ))),
        },
    }
}
