use serde::{Deserialize, Serialize};

use super::{BinningSpec, FilterPredicate};
use crate::schema::Schema;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateFn {
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl AggregateFn {
    pub fn as_str(&self) -> &'static str {
        match self {
            AggregateFn::Count => "count",
            AggregateFn::Sum => "sum",
            AggregateFn::Avg => "avg",
            AggregateFn::Min => "min",
            AggregateFn::Max => "max",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSpec {
    #[serde(rename = "fn")]
    pub function: AggregateFn,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
}

impl AggregateSpec {
    pub fn count() -> Self {
        AggregateSpec {
            function: AggregateFn::Count,
            column: None,
        }
    }

    pub fn over(function: AggregateFn, column: impl Into<String>) -> Self {
        AggregateSpec {
            function,
            column: Some(column.into()),
        }
    }
}

/// A visualization request: what to bin, what to aggregate and the viz-local
/// filter and brushed selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VizSpec {
    pub name: String,
    pub binning: Vec<BinningSpec>,
    pub agg: AggregateSpec,
    #[serde(default, skip_serializing_if = "FilterPredicate::is_empty")]
    pub filter: FilterPredicate,
    #[serde(default, skip_serializing_if = "FilterPredicate::is_empty")]
    pub selection: FilterPredicate,
}

impl VizSpec {
    pub fn new(name: impl Into<String>, binning: Vec<BinningSpec>, agg: AggregateSpec) -> Self {
        VizSpec {
            name: name.into(),
            binning,
            agg,
            filter: FilterPredicate::default(),
            selection: FilterPredicate::default(),
        }
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        if self.binning.is_empty() || self.binning.len() > 2 {
            return Err(Error::spec(format!(
                "viz `{}` needs 1 or 2 binning dimensions, has {}",
                self.name,
                self.binning.len()
            )));
        }
        for b in &self.binning {
            b.validate(schema.column(&b.column)?)?;
        }
        match (self.agg.function, &self.agg.column) {
            (AggregateFn::Count, _) => {}
            (f, None) => {
                return Err(Error::spec(format!(
                    "viz `{}`: {} needs a target column",
                    self.name,
                    f.as_str()
                )))
            }
            (f, Some(c)) => {
                if !schema.column(c)?.is_quantitative() {
                    return Err(Error::spec(format!(
                        "viz `{}`: {} target `{c}` must be quantitative",
                        self.name,
                        f.as_str()
                    )));
                }
            }
        }
        self.filter.validate(schema)?;
        self.selection.validate(schema)
    }

    pub fn bin_dims(&self) -> usize {
        self.binning.len()
    }

    /// `nominal`, `quantitative`, `quantitative_nominal`, ... in dimension order.
    pub fn binning_type(&self, schema: &Schema) -> String {
        self.binning
            .iter()
            .map(|b| match schema.column(&b.column) {
                Ok(c) if c.is_nominal() => "nominal",
                _ => "quantitative",
            })
            .collect::<Vec<_>>()
            .join("_")
    }

    /// Canonical identity of the query this viz issues under `effective`.
    /// Independent of the viz name and its own selection.
    pub fn query_key(&self, effective: &FilterPredicate) -> String {
        serde_json::json!({
            "binning": self.binning,
            "agg": self.agg,
            "filter": effective,
        })
        .to_string()
    }
}
