use serde::{Deserialize, Serialize};

use crate::schema::{ColumnDomain, ColumnSchema};
use crate::table::Value;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum BinningMethod {
    /// One bin per distinct category. The only method for nominal columns.
    #[default]
    Nominal,
    /// `k` equal-width bins over the column's `[min, max]`, last bin closed.
    FixedCount { k: u32 },
    /// Bins `[reference + i*w, reference + (i+1)*w)` for every integer `i`.
    FixedWidth {
        w: f64,
        #[serde(default)]
        reference: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BinningRepr")]
pub struct BinningSpec {
    pub column: String,
    #[serde(flatten)]
    pub method: BinningMethod,
}

/// Wire form; `method` may be omitted for nominal binning.
#[derive(Deserialize)]
struct BinningRepr {
    column: String,
    method: Option<String>,
    k: Option<u32>,
    w: Option<f64>,
    reference: Option<f64>,
}

impl TryFrom<BinningRepr> for BinningSpec {
    type Error = String;

    fn try_from(r: BinningRepr) -> std::result::Result<Self, String> {
        let method = match r.method.as_deref() {
            None | Some("nominal") => BinningMethod::Nominal,
            Some("fixed-count") => BinningMethod::FixedCount {
                k: r.k.ok_or("fixed-count binning needs `k`")?,
            },
            Some("fixed-width") => BinningMethod::FixedWidth {
                w: r.w.ok_or("fixed-width binning needs `w`")?,
                reference: r.reference.unwrap_or(0.0),
            },
            Some(other) => return Err(format!("unknown binning method `{other}`")),
        };
        Ok(BinningSpec {
            column: r.column,
            method,
        })
    }
}

impl BinningSpec {
    pub fn nominal(column: impl Into<String>) -> Self {
        BinningSpec {
            column: column.into(),
            method: BinningMethod::Nominal,
        }
    }

    pub fn fixed_count(column: impl Into<String>, k: u32) -> Self {
        BinningSpec {
            column: column.into(),
            method: BinningMethod::FixedCount { k },
        }
    }

    pub fn fixed_width(column: impl Into<String>, w: f64, reference: f64) -> Self {
        BinningSpec {
            column: column.into(),
            method: BinningMethod::FixedWidth { w, reference },
        }
    }

    pub fn validate(&self, column: &ColumnSchema) -> Result<()> {
        match (&column.domain, &self.method) {
            (ColumnDomain::Nominal { .. }, _) => Ok(()),
            (ColumnDomain::Quantitative { .. }, BinningMethod::Nominal) => Err(Error::spec(
                format!("quantitative column `{}` needs fixed-count or fixed-width binning", self.column),
            )),
            (_, BinningMethod::FixedCount { k }) if *k < 1 => {
                Err(Error::spec(format!("binning on `{}`: k must be >= 1", self.column)))
            }
            (_, BinningMethod::FixedWidth { w, reference })
                if !(*w > 0.0) || !w.is_finite() || !reference.is_finite() =>
            {
                Err(Error::spec(format!(
                    "binning on `{}`: width must be positive and finite",
                    self.column
                )))
            }
            _ => Ok(()),
        }
    }

    /// Numeric bin function for a quantitative column; `None` for nominal columns.
    pub fn quantizer(&self, column: &ColumnSchema) -> Option<Quantizer> {
        let ColumnDomain::Quantitative { min, max } = column.domain else {
            return None;
        };
        match self.method {
            BinningMethod::Nominal => None,
            BinningMethod::FixedCount { k } => Some(Quantizer::Count {
                k,
                min,
                span: max - min,
            }),
            BinningMethod::FixedWidth { w, reference } => Some(Quantizer::Width { w, reference }),
        }
    }
}

/// Maps a number to its bin index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantizer {
    Count { k: u32, min: f64, span: f64 },
    Width { w: f64, reference: f64 },
}

impl Quantizer {
    #[inline]
    pub fn index(&self, v: f64) -> i64 {
        match *self {
            Quantizer::Count { k, min, span } => {
                if span <= 0.0 {
                    return 0;
                }
                let raw = (f64::from(k) * (v - min) / span).floor();
                (raw as i64).clamp(0, i64::from(k) - 1)
            }
            Quantizer::Width { w, reference } => ((v - reference) / w).floor() as i64,
        }
    }

    /// Lower and upper edge of bin `i`, and whether the upper edge is inclusive.
    pub fn bounds(&self, i: i64) -> (f64, f64, bool) {
        match *self {
            Quantizer::Count { k, min, span } => {
                let k = f64::from(k);
                let lo = min + span * (i as f64) / k;
                let hi = min + span * ((i + 1) as f64) / k;
                (lo, hi, i + 1 >= k as i64)
            }
            Quantizer::Width { w, reference } => {
                (reference + i as f64 * w, reference + (i + 1) as f64 * w, false)
            }
        }
    }
}

/// One component of a bin key: a category label or a bin index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BinComponent {
    Index(i64),
    Category(String),
}

impl std::fmt::Display for BinComponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BinComponent::Index(i) => write!(f, "{i}"),
            BinComponent::Category(c) => f.write_str(c),
        }
    }
}

/// Key of a result bin; one component per binning dimension, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BinKey(pub Vec<BinComponent>);

impl BinKey {
    pub fn arity(&self) -> usize {
        self.0.len()
    }
}

impl<const N: usize> From<[BinComponent; N]> for BinKey {
    fn from(c: [BinComponent; N]) -> Self {
        BinKey(c.to_vec())
    }
}

/// Bin of a single value under `spec`.
pub fn bin_of(value: &Value, spec: &BinningSpec, column: &ColumnSchema) -> Result<BinComponent> {
    match (&column.domain, value) {
        (ColumnDomain::Nominal { categories }, Value::Text(s)) => {
            if categories.iter().any(|c| c == s) {
                Ok(BinComponent::Category(s.clone()))
            } else {
                Err(Error::UnknownCategory {
                    column: column.name.clone(),
                    category: s.clone(),
                })
            }
        }
        (ColumnDomain::Quantitative { .. }, Value::Number(v)) => {
            spec.validate(column)?;
            let q = spec
                .quantizer(column)
                .expect("validated quantitative binning");
            Ok(BinComponent::Index(q.index(*v)))
        }
        _ => Err(Error::spec(format!(
            "value {value:?} does not match the kind of column `{}`",
            column.name
        ))),
    }
}
