//! Fixtures shared by the criterion benches.

use std::sync::Arc;

use explorebench::datagen::seed;
use explorebench::{
    AggregateFn, AggregateSpec, BinningSpec, Condition, FilterPredicate, Schema, Table, VizSpec,
};

/// Synthetic flights table with its schema.
pub fn flights(rows: usize) -> (Arc<Table>, Schema) {
    let table = seed::flights(rows, 1);
    let mut schema = table.schema("flights");
    schema.rows = rows as u64;
    (Arc::new(table), schema)
}

/// A small mix of query shapes: nominal count, binned average, 2D count
/// with a range filter.
pub fn queries() -> Vec<(VizSpec, FilterPredicate)> {
    vec![
        (
            VizSpec::new("by_carrier", vec![BinningSpec::nominal("carrier")], AggregateSpec::count()),
            FilterPredicate::default(),
        ),
        (
            VizSpec::new(
                "delay_by_distance",
                vec![BinningSpec::fixed_count("distance", 20)],
                AggregateSpec::over(AggregateFn::Avg, "arr_delay"),
            ),
            FilterPredicate::default(),
        ),
        (
            VizSpec::new(
                "hour_x_delay",
                vec![BinningSpec::fixed_count("dep_time", 12), BinningSpec::fixed_count("dep_delay", 10)],
                AggregateSpec::count(),
            ),
            FilterPredicate::single("distance", Condition::InRange(300.0, 1500.0)),
        ),
    ]
}
