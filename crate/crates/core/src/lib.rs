//! Benchmark harness for interactive data exploration (IDE) query backends.
//!
//! The crate is organised around the life cycle of a benchmark run:
//!
//! * [`datagen`] scales a seed dataset with a Gaussian copula and can split
//!   the result into a star schema.
//! * [`workloadgen`] samples user-like exploration workflows from per-type
//!   Markov chains.
//! * [`adapters`] is the boundary to the system under test, with an exact
//!   blocking engine, a progressive sampling engine and a subprocess bridge.
//! * [`driver`] replays workflows under a hard per-query time requirement.
//! * [`metrics`] and [`report`] score delivered results against ground truth.
//!
//! Shared domain types (visualization specs, filters, the link graph and
//! result tables) live in [`model`] and are re-exported at the crate root.

pub mod adapters;
pub mod datagen;
pub mod driver;
mod error;
pub mod metrics;
pub mod model;
pub mod report;
pub mod schema;
pub mod table;
pub mod workloadgen;

pub use error::{Error, Result};
pub use model::{
    AggregateFn, AggregateSpec, Atom, BinComponent, BinKey, BinValue, BinningMethod, BinningSpec,
    Condition, FilterPredicate, Interaction, ResultTable, VizGraph, VizSpec, Workflow,
    WorkflowType,
};
pub use schema::{ColumnDomain, ColumnSchema, Schema};
pub use table::{Column, ColumnData, Table};
