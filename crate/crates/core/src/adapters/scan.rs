//! Column-major scan kernel shared by the built-in engines.

use std::collections::BTreeMap;
use std::time::Instant;

use rustc_hash::FxHashMap;

use crate::model::{
    AggregateFn, BinComponent, BinKey, Condition, FilterPredicate, Quantizer, VizSpec,
};
use crate::schema::Schema;
use crate::table::{ColumnData, Table};
use crate::Result;

/// Rows between two deadline checks.
pub const CHECK_EVERY: usize = 10_000;

enum Dim<'t> {
    Code {
        codes: &'t [u32],
        categories: &'t [String],
    },
    Bin {
        values: &'t [f64],
        quantizer: Quantizer,
    },
}

enum Pred<'t> {
    Codes { codes: &'t [u32], accept: Vec<bool> },
    Number { values: &'t [f64], condition: Condition },
    Never,
}

/// A viz query bound to the columns of one table.
pub struct Plan<'t> {
    dims: Vec<Dim<'t>>,
    preds: Vec<Pred<'t>>,
    target: Option<&'t [f64]>,
    pub function: AggregateFn,
}

/// Per-bin running state. `sum`/`sumsq`/`min`/`max` ignore NaN targets.
#[derive(Debug, Clone, Copy)]
pub struct Acc {
    pub rows: u64,
    pub n: u64,
    pub sum: f64,
    pub sumsq: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for Acc {
    fn default() -> Self {
        Acc {
            rows: 0,
            n: 0,
            sum: 0.0,
            sumsq: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

pub type Key = [i64; 2];
pub type Groups = FxHashMap<Key, Acc>;

fn quantitative<'t>(table: &'t Table, name: &str) -> Result<&'t [f64]> {
    match &table.column(name)?.data {
        ColumnData::Quantitative(v) => Ok(v),
        ColumnData::Nominal { .. } => Err(crate::Error::spec(format!("column `{name}` is not quantitative"))),
    }
}

impl<'t> Plan<'t> {
    pub fn compile(
        table: &'t Table,
        schema: &Schema,
        viz: &VizSpec,
        filter: &FilterPredicate,
    ) -> Result<Self> {
        viz.validate(schema)?;
        filter.validate(schema)?;
        let mut dims = Vec::new();
        for b in &viz.binning {
            let col = table.column(&b.column)?;
            dims.push(match (&col.data, b.quantizer(schema.column(&b.column)?)) {
                (ColumnData::Nominal { codes, categories }, _) => Dim::Code { codes, categories },
                (ColumnData::Quantitative(values), Some(quantizer)) => Dim::Bin { values, quantizer },
                (ColumnData::Quantitative(_), None) => {
                    return Err(crate::Error::spec(format!("no quantizer for `{}`", b.column)))
                }
            });
        }
        let mut preds = Vec::new();
        for a in &filter.atoms {
            let col = table.column(&a.column)?;
            preds.push(match (&col.data, &a.condition) {
                (ColumnData::Nominal { codes, categories }, c) if c.is_nominal() => Pred::Codes {
                    codes,
                    accept: categories.iter().map(|l| c.test_label(l)).collect(),
                },
                (ColumnData::Quantitative(values), c) if !c.is_nominal() => Pred::Number {
                    values,
                    condition: c.clone(),
                },
                _ => Pred::Never,
            });
        }
        let target = match &viz.agg.column {
            Some(c) if viz.agg.function != AggregateFn::Count => Some(quantitative(table, c)?),
            _ => None,
        };
        Ok(Plan {
            dims,
            preds,
            target,
            function: viz.agg.function,
        })
    }

    #[inline]
    fn matches(&self, row: usize) -> bool {
        self.preds.iter().all(|p| match p {
            Pred::Codes { codes, accept } => accept[codes[row] as usize],
            Pred::Number { values, condition } => condition.test_number(values[row]),
            Pred::Never => false,
        })
    }

    /// Bin key of a row, `None` when a binned value is NaN.
    #[inline]
    fn key(&self, row: usize) -> Option<Key> {
        let mut key = [0i64; 2];
        for (slot, d) in key.iter_mut().zip(&self.dims) {
            *slot = match d {
                Dim::Code { codes, .. } => i64::from(codes[row]),
                Dim::Bin { values, quantizer } => {
                    let v = values[row];
                    if v.is_nan() {
                        return None;
                    }
                    quantizer.index(v)
                }
            };
        }
        Some(key)
    }

    /// Folds rows `from..to` into `groups`. Returns false if `deadline`
    /// passed before the range was finished.
    pub fn scan(&self, from: usize, to: usize, groups: &mut Groups, deadline: Option<Instant>) -> bool {
        let mut start = from;
        while start < to {
            if deadline.is_some_and(|d| Instant::now() >= d) {
                return false;
            }
            let end = (start + CHECK_EVERY).min(to);
            for row in start..end {
                if !self.matches(row) {
                    continue;
                }
                let Some(key) = self.key(row) else { continue };
                let acc = groups.entry(key).or_default();
                acc.rows += 1;
                if let Some(t) = self.target {
                    let v = t[row];
                    if !v.is_nan() {
                        acc.n += 1;
                        acc.sum += v;
                        acc.sumsq += v * v;
                        acc.min = acc.min.min(v);
                        acc.max = acc.max.max(v);
                    }
                }
            }
            start = end;
        }
        true
    }

    pub fn bin_key(&self, key: &Key) -> BinKey {
        BinKey(
            self.dims
                .iter()
                .zip(key)
                .map(|(d, &k)| match d {
                    Dim::Code { categories, .. } => BinComponent::Category(categories[k as usize].clone()),
                    Dim::Bin { .. } => BinComponent::Index(k),
                })
                .collect(),
        )
    }

    /// Exact aggregate of an accumulator; `None` for groups SQL would not
    /// report a value for.
    pub fn exact_value(&self, acc: &Acc) -> Option<f64> {
        match self.function {
            AggregateFn::Count => Some(acc.rows as f64),
            _ if acc.n == 0 => None,
            AggregateFn::Sum => Some(acc.sum),
            AggregateFn::Avg => Some(acc.sum / acc.n as f64),
            AggregateFn::Min => Some(acc.min),
            AggregateFn::Max => Some(acc.max),
        }
    }

    pub fn sorted<T>(&self, groups: &Groups, mut f: impl FnMut(&Acc) -> Option<T>) -> BTreeMap<BinKey, T> {
        groups
            .iter()
            .filter_map(|(k, a)| f(a).map(|v| (self.bin_key(k), v)))
            .collect()
    }
}
