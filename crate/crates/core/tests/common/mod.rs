//! Shared fixtures: random tables and queries, and a row-at-a-time oracle
//! that shares no code with the engines.
#![allow(dead_code)]

use std::collections::BTreeMap;

use explorebench::table::Value;
use explorebench::{
    AggregateFn, AggregateSpec, Atom, BinComponent, BinKey, BinValue, BinningMethod, BinningSpec,
    Column, ColumnDomain, Condition, FilterPredicate, ResultTable, Schema, Table, VizSpec,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CARRIERS: [&str; 5] = ["AA", "DL", "UA", "WN", "B6"];
pub const DAYS: [&str; 3] = ["mon", "tue", "wed"];

/// Two nominal and three quantitative columns; `z` has about 2% NaNs.
pub fn random_table(rows: usize, seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let carrier: Vec<&str> = (0..rows).map(|_| *CARRIERS.choose(&mut rng).unwrap()).collect();
    let day: Vec<&str> = (0..rows).map(|_| *DAYS.choose(&mut rng).unwrap()).collect();
    let x: Vec<f64> = (0..rows).map(|_| rng.random_range(0.0..100.0)).collect();
    let y: Vec<f64> = x.iter().map(|x| x * 0.5 + rng.random_range(-20.0..20.0)).collect();
    let z: Vec<f64> = (0..rows)
        .map(|_| if rng.random_bool(0.02) { f64::NAN } else { rng.random_range(-5.0..5.0) })
        .collect();
    Table::new(vec![
        Column::nominal("carrier", carrier),
        Column::nominal("day", day),
        Column::quantitative("x", x),
        Column::quantitative("y", y),
        Column::quantitative("z", z),
    ])
    .unwrap()
}

fn quantitative_columns(schema: &Schema) -> Vec<&str> {
    schema
        .columns
        .iter()
        .filter(|c| c.is_quantitative())
        .map(|c| c.name.as_str())
        .collect()
}

fn random_binning(schema: &Schema, column: &str, rng: &mut impl Rng) -> BinningSpec {
    let col = schema.column(column).unwrap();
    if col.is_nominal() {
        return BinningSpec::nominal(column);
    }
    if rng.random_bool(0.6) {
        BinningSpec::fixed_count(column, rng.random_range(1..=12))
    } else {
        let w = [0.5, 1.0, 2.5, 7.0, 10.0][rng.random_range(0..5)];
        let reference = [0.0, -3.0, 1.25][rng.random_range(0..3)];
        BinningSpec::fixed_width(column, w, reference)
    }
}

pub fn random_filter(schema: &Schema, rng: &mut impl Rng) -> FilterPredicate {
    let atoms = (0..rng.random_range(0..=3))
        .map(|_| {
            let col = &schema.columns[rng.random_range(0..schema.columns.len())];
            let condition = match &col.domain {
                ColumnDomain::Nominal { categories } => {
                    let c = categories[rng.random_range(0..categories.len())].clone();
                    if rng.random_bool(0.5) {
                        Condition::Eq(c)
                    } else {
                        Condition::Ne(c)
                    }
                }
                ColumnDomain::Quantitative { min, max } => {
                    let a = rng.random_range(*min..=*max);
                    let b = rng.random_range(*min..=*max);
                    match rng.random_range(0..5) {
                        0 => Condition::Lt(a),
                        1 => Condition::Le(a),
                        2 => Condition::Gt(a),
                        3 => Condition::Ge(a),
                        _ => Condition::InRange(a.min(b), a.max(b)),
                    }
                }
            };
            Atom::new(col.name.clone(), condition)
        })
        .collect();
    FilterPredicate::new(atoms)
}

/// Random 1-D or 2-D query over any column with any aggregate.
pub fn random_query(schema: &Schema, rng: &mut impl Rng) -> (VizSpec, FilterPredicate) {
    let dims = rng.random_range(1..=2);
    let binning = (0..dims)
        .map(|_| {
            let name = schema.columns[rng.random_range(0..schema.columns.len())].name.clone();
            random_binning(schema, &name, rng)
        })
        .collect();
    let quant = quantitative_columns(schema);
    let agg = match rng.random_range(0..5) {
        0 => AggregateSpec::count(),
        i => {
            let f = [AggregateFn::Sum, AggregateFn::Avg, AggregateFn::Min, AggregateFn::Max][i - 1];
            AggregateSpec::over(f, *quant.choose(rng).unwrap())
        }
    };
    let viz = VizSpec::new("q", binning, agg);
    (viz, random_filter(schema, rng))
}

fn holds(cond: &Condition, v: &Value) -> bool {
    match (cond, v) {
        (Condition::Eq(c), Value::Text(s)) => s == c,
        (Condition::Ne(c), Value::Text(s)) => s != c,
        (Condition::Lt(t), Value::Number(x)) => x < t,
        (Condition::Le(t), Value::Number(x)) => x <= t,
        (Condition::Gt(t), Value::Number(x)) => x > t,
        (Condition::Ge(t), Value::Number(x)) => x >= t,
        (Condition::InRange(lo, hi), Value::Number(x)) => lo <= x && x < hi,
        _ => false,
    }
}

/// Bin of `x` found by walking the interval list rather than by division.
fn oracle_bin(spec: &BinningSpec, min: f64, max: f64, x: f64) -> i64 {
    match spec.method {
        BinningMethod::FixedCount { k } => {
            let span = max - min;
            if span <= 0.0 {
                return 0;
            }
            let last = i64::from(k) - 1;
            (0..=last)
                .find(|&i| {
                    let hi = min + span * (i + 1) as f64 / f64::from(k);
                    x < hi || i == last
                })
                .unwrap()
        }
        BinningMethod::FixedWidth { w, reference } => {
            let mut i = ((x - reference) / w) as i64 - 2;
            while reference + (i + 1) as f64 * w <= x {
                i += 1;
            }
            i
        }
        BinningMethod::Nominal => unreachable!(),
    }
}

/// Row-loop evaluation of a query with SQL group-by semantics. Rows whose
/// binned value is NaN are skipped; aggregates other than COUNT ignore NaN
/// targets and omit groups with no valid target.
pub fn oracle(table: &Table, schema: &Schema, viz: &VizSpec, filter: &FilterPredicate) -> ResultTable {
    let mut groups: BTreeMap<BinKey, (u64, Vec<f64>)> = BTreeMap::new();
    'rows: for i in 0..table.rows() {
        let row = table.row(i);
        let value = |name: &str| row[table.column_index(name).unwrap()].clone();
        for a in &filter.atoms {
            if !holds(&a.condition, &value(&a.column)) {
                continue 'rows;
            }
        }
        let mut key = Vec::new();
        for b in &viz.binning {
            match (value(&b.column), &schema.column(&b.column).unwrap().domain) {
                (Value::Text(s), _) => key.push(BinComponent::Category(s)),
                (Value::Number(x), _) if x.is_nan() => continue 'rows,
                (Value::Number(x), ColumnDomain::Quantitative { min, max }) => {
                    key.push(BinComponent::Index(oracle_bin(b, *min, *max, x)))
                }
                _ => panic!("kind mismatch"),
            }
        }
        let g = groups.entry(BinKey(key)).or_default();
        g.0 += 1;
        if let Some(t) = &viz.agg.column {
            if let Value::Number(x) = value(t) {
                if !x.is_nan() {
                    g.1.push(x);
                }
            }
        }
    }
    let bins = groups
        .into_iter()
        .filter_map(|(k, (rows, vals))| {
            let v = match viz.agg.function {
                AggregateFn::Count => rows as f64,
                _ if vals.is_empty() => return None,
                AggregateFn::Sum => vals.iter().fold(0.0, |a, b| a + b),
                AggregateFn::Avg => vals.iter().fold(0.0, |a, b| a + b) / vals.len() as f64,
                AggregateFn::Min => vals.iter().cloned().fold(f64::INFINITY, f64::min),
                AggregateFn::Max => vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            };
            Some((k, BinValue::exact(v)))
        })
        .collect();
    ResultTable::new(bins, 1.0)
}

/// Same keys and bitwise-equal estimates.
pub fn same_values(a: &ResultTable, b: &ResultTable) -> bool {
    a.bins.len() == b.bins.len()
        && a.bins
            .iter()
            .all(|(k, v)| b.bins.get(k).is_some_and(|w| w.estimate.to_bits() == v.estimate.to_bits()))
}
