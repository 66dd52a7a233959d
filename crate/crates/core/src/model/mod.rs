//! Domain types shared by every stage: visualization and query specs,
//! binning, filters, the link graph, workflows and result tables.

mod binning;
mod filter;
mod graph;
mod result;
mod sql;
mod viz;
mod workflow;

pub use binning::{bin_of, BinComponent, BinKey, BinningMethod, BinningSpec, Quantizer};
pub use filter::{Atom, Condition, FilterPredicate};
pub use graph::VizGraph;
pub use result::{epoch_ms, BinValue, ResultTable};
pub use sql::render_sql;
pub use viz::{AggregateFn, AggregateSpec, VizSpec};
pub use workflow::{Interaction, Workflow, WorkflowType};
