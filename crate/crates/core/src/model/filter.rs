use serde::{Deserialize, Serialize};

use crate::schema::{ColumnDomain, Schema};
use crate::{Error, Result};

/// A comparison against a single column.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    Eq(String),
    Ne(String),
    Lt(f64),
    Le(f64),
    Gt(f64),
    Ge(f64),
    /// Half-open `[lo, hi)`.
    InRange(f64, f64),
}

impl Condition {
    pub fn is_nominal(&self) -> bool {
        matches!(self, Condition::Eq(_) | Condition::Ne(_))
    }

    #[inline]
    pub fn test_number(&self, v: f64) -> bool {
        match *self {
            Condition::Lt(x) => v < x,
            Condition::Le(x) => v <= x,
            Condition::Gt(x) => v > x,
            Condition::Ge(x) => v >= x,
            Condition::InRange(lo, hi) => lo <= v && v < hi,
            Condition::Eq(_) | Condition::Ne(_) => false,
        }
    }

    pub fn test_label(&self, label: &str) -> bool {
        match self {
            Condition::Eq(c) => c == label,
            Condition::Ne(c) => c != label,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AtomRepr", into = "AtomRepr")]
pub struct Atom {
    pub column: String,
    pub condition: Condition,
}

impl Atom {
    pub fn new(column: impl Into<String>, condition: Condition) -> Self {
        Atom {
            column: column.into(),
            condition,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct AtomRepr {
    column: String,
    op: String,
    value: serde_json::Value,
}

impl TryFrom<AtomRepr> for Atom {
    type Error = String;

    fn try_from(r: AtomRepr) -> std::result::Result<Self, String> {
        let num = |v: &serde_json::Value| {
            v.as_f64()
                .ok_or_else(|| format!("`{}`: operator {} needs a number", r.column, r.op))
        };
        let text = |v: &serde_json::Value| match v {
            serde_json::Value::String(s) => Ok(s.clone()),
            serde_json::Value::Number(n) => Ok(n.to_string()),
            _ => Err(format!("`{}`: operator {} needs a category", r.column, r.op)),
        };
        let condition = match r.op.as_str() {
            "=" => Condition::Eq(text(&r.value)?),
            "!=" | "<>" => Condition::Ne(text(&r.value)?),
            "<" => Condition::Lt(num(&r.value)?),
            "<=" => Condition::Le(num(&r.value)?),
            ">" => Condition::Gt(num(&r.value)?),
            ">=" => Condition::Ge(num(&r.value)?),
            "range" => match r.value.as_array().map(Vec::as_slice) {
                Some([a, b]) => Condition::InRange(num(a)?, num(b)?),
                _ => return Err(format!("`{}`: range needs [lo, hi]", r.column)),
            },
            other => return Err(format!("unknown filter operator `{other}`")),
        };
        Ok(Atom {
            column: r.column,
            condition,
        })
    }
}

impl From<Atom> for AtomRepr {
    fn from(a: Atom) -> Self {
        use serde_json::json;
        let (op, value) = match a.condition {
            Condition::Eq(c) => ("=", json!(c)),
            Condition::Ne(c) => ("!=", json!(c)),
            Condition::Lt(x) => ("<", json!(x)),
            Condition::Le(x) => ("<=", json!(x)),
            Condition::Gt(x) => (">", json!(x)),
            Condition::Ge(x) => (">=", json!(x)),
            Condition::InRange(lo, hi) => ("range", json!([lo, hi])),
        };
        AtomRepr {
            column: a.column,
            op: op.to_string(),
            value,
        }
    }
}

/// Conjunction of atoms. The empty predicate matches every row.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FilterPredicate {
    pub atoms: Vec<Atom>,
}

impl FilterPredicate {
    pub fn new(atoms: Vec<Atom>) -> Self {
        FilterPredicate { atoms }
    }

    pub fn single(column: impl Into<String>, condition: Condition) -> Self {
        FilterPredicate {
            atoms: vec![Atom::new(column, condition)],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn and(mut self, other: &FilterPredicate) -> Self {
        self.atoms.extend(other.atoms.iter().cloned());
        self
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        for a in &self.atoms {
            let col = schema.column(&a.column)?;
            match (&col.domain, &a.condition) {
                (ColumnDomain::Nominal { .. }, c) if !c.is_nominal() => {
                    return Err(Error::spec(format!(
                        "nominal column `{}` only supports = and !=",
                        a.column
                    )))
                }
                (ColumnDomain::Quantitative { .. }, c) if c.is_nominal() => {
                    return Err(Error::spec(format!(
                        "quantitative column `{}` does not support = or !=",
                        a.column
                    )))
                }
                (_, Condition::InRange(lo, hi)) if !(lo <= hi) => {
                    return Err(Error::spec(format!(
                        "range on `{}` has lo {lo} > hi {hi}",
                        a.column
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}
