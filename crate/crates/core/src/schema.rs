//! Column metadata shared by binning, filtering and data generation.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Domain of a column: the observed numeric range or the category list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnDomain {
    Quantitative { min: f64, max: f64 },
    Nominal { categories: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    #[serde(flatten)]
    pub domain: ColumnDomain,
}

impl ColumnSchema {
    pub fn quantitative(name: impl Into<String>, min: f64, max: f64) -> Self {
        ColumnSchema {
            name: name.into(),
            domain: ColumnDomain::Quantitative { min, max },
        }
    }

    pub fn nominal<S: Into<String>>(
        name: impl Into<String>,
        categories: impl IntoIterator<Item = S>,
    ) -> Self {
        ColumnSchema {
            name: name.into(),
            domain: ColumnDomain::Nominal {
                categories: categories.into_iter().map(Into::into).collect(),
            },
        }
    }

    pub fn is_nominal(&self) -> bool {
        matches!(self.domain, ColumnDomain::Nominal { .. })
    }

    pub fn is_quantitative(&self) -> bool {
        !self.is_nominal()
    }

    pub fn validate(&self) -> Result<()> {
        match &self.domain {
            ColumnDomain::Quantitative { min, max } => {
                if !(min <= max) {
                    return Err(Error::spec(format!(
                        "column `{}`: min {min} exceeds max {max}",
                        self.name
                    )));
                }
            }
            ColumnDomain::Nominal { categories } => {
                if categories.is_empty() {
                    return Err(Error::spec(format!(
                        "column `{}` has no categories",
                        self.name
                    )));
                }
                let mut seen = std::collections::HashSet::new();
                for c in categories {
                    if !seen.insert(c) {
                        return Err(Error::spec(format!(
                            "column `{}` lists category `{c}` twice",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Schema of a (de-normalized) dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub table: String,
    #[serde(default)]
    pub rows: u64,
    pub columns: Vec<ColumnSchema>,
}

impl Schema {
    pub fn column(&self, name: &str) -> Result<&ColumnSchema> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for c in &self.columns {
            c.validate()?;
            if !seen.insert(&c.name) {
                return Err(Error::spec(format!("duplicate column `{}`", c.name)));
            }
        }
        Ok(())
    }
}
