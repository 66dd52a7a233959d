use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::table::{Column, ColumnData, Table};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSpec {
    pub name: String,
    pub key: String,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarSchemaSpec {
    pub fact: String,
    #[serde(default)]
    pub dimensions: Vec<DimensionSpec>,
}

impl StarSchemaSpec {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self, table: &Table) -> Result<()> {
        let mut seen = HashSet::new();
        let mut names: HashSet<&str> = table.columns().iter().map(|c| c.name.as_str()).collect();
        for d in &self.dimensions {
            if d.columns.is_empty() {
                return Err(Error::spec(format!("dimension `{}` has no columns", d.name)));
            }
            for c in &d.columns {
                table.column(c)?;
                if !seen.insert(c.as_str()) {
                    return Err(Error::spec(format!("column `{c}` is in two dimensions")));
                }
            }
            if !names.insert(d.key.as_str()) {
                return Err(Error::spec(format!(
                    "key `{}` of dimension `{}` clashes with an existing column",
                    d.key, d.name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarTables {
    pub spec: StarSchemaSpec,
    pub fact: Table,
    /// One table per dimension, in spec order: key column first.
    pub dimensions: Vec<Table>,
    /// Column order of the de-normalized table.
    pub column_order: Vec<String>,
}

/// Splits `table` into a fact table and one table per dimension. Dimension
/// rows are the distinct attribute combinations in first-appearance order,
/// keyed densely from 0.
pub fn normalize(table: &Table, spec: &StarSchemaSpec) -> Result<StarTables> {
    spec.validate(table)?;
    let moved: HashSet<&str> = spec
        .dimensions
        .iter()
        .flat_map(|d| d.columns.iter().map(String::as_str))
        .collect();
    let mut fact_columns: Vec<Column> = table
        .columns()
        .iter()
        .filter(|c| !moved.contains(c.name.as_str()))
        .cloned()
        .collect();
    let mut dimensions = Vec::new();
    for d in &spec.dimensions {
        let idx: Vec<usize> = d
            .columns
            .iter()
            .map(|c| table.column_index(c))
            .collect::<Result<_>>()?;
        let mut keys: HashMap<Vec<String>, u32> = HashMap::new();
        let mut representative = Vec::new();
        let mut fk = Vec::with_capacity(table.rows());
        for r in 0..table.rows() {
            let combo: Vec<String> = idx
                .iter()
                .map(|&i| cell_key(&table.columns()[i].data, r))
                .collect();
            let next = keys.len() as u32;
            let k = *keys.entry(combo).or_insert_with(|| {
                representative.push(r);
                next
            });
            fk.push(f64::from(k));
        }
        let mut cols = vec![Column::quantitative(
            &d.key,
            (0..representative.len()).map(|k| k as f64).collect(),
        )];
        for &i in &idx {
            cols.push(take_rows(&table.columns()[i], &representative));
        }
        dimensions.push(Table::new(cols)?);
        fact_columns.push(Column::quantitative(&d.key, fk));
    }
    Ok(StarTables {
        spec: spec.clone(),
        fact: Table::new(fact_columns)?,
        dimensions,
        column_order: table.columns().iter().map(|c| c.name.clone()).collect(),
    })
}

fn cell_key(data: &ColumnData, row: usize) -> String {
    match data {
        ColumnData::Quantitative(v) => format!("{:?}", v[row].to_bits()),
        ColumnData::Nominal { codes, categories } => categories[codes[row] as usize].clone(),
    }
}

fn take_rows(c: &Column, rows: &[usize]) -> Column {
    let data = match &c.data {
        ColumnData::Quantitative(v) => ColumnData::Quantitative(rows.iter().map(|&r| v[r]).collect()),
        ColumnData::Nominal { codes, categories } => ColumnData::Nominal {
            codes: rows.iter().map(|&r| codes[r]).collect(),
            categories: categories.clone(),
        },
    };
    Column {
        name: c.name.clone(),
        data,
    }
}

/// Joins all dimensions back into the fact table.
pub fn denormalize(star: &StarTables) -> Result<Table> {
    let mut columns: Vec<Column> = Vec::new();
    let mut fk_names = HashSet::new();
    for (d, dim) in star.spec.dimensions.iter().zip(&star.dimensions) {
        fk_names.insert(d.key.as_str());
        let dim_keys = quantitative(dim.column(&d.key)?)?;
        let mut position = HashMap::new();
        for (i, k) in dim_keys.iter().enumerate() {
            position.insert(*k as i64, i);
        }
        let fact_keys = quantitative(star.fact.column(&d.key)?)?;
        let rows = fact_keys
            .iter()
            .map(|k| {
                position.get(&(*k as i64)).copied().ok_or_else(|| {
                    Error::spec(format!("dangling key {k} into dimension `{}`", d.name))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        for c in &d.columns {
            columns.push(take_rows(dim.column(c)?, &rows));
        }
    }
    columns.extend(
        star.fact
            .columns()
            .iter()
            .filter(|c| !fk_names.contains(c.name.as_str()))
            .cloned(),
    );
    let order: HashMap<&str, usize> = star
        .column_order
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    columns.sort_by_key(|c| order.get(c.name.as_str()).copied().unwrap_or(usize::MAX));
    Table::new(columns)
}

fn quantitative(c: &Column) -> Result<&[f64]> {
    match &c.data {
        ColumnData::Quantitative(v) => Ok(v),
        ColumnData::Nominal { .. } => Err(Error::spec(format!("key column `{}` is not numeric", c.name))),
    }
}

#[derive(Serialize, Deserialize)]
struct StarManifest {
    #[serde(flatten)]
    spec: StarSchemaSpec,
    column_order: Vec<String>,
    nominal: Vec<String>,
}

const MANIFEST: &str = "star.json";

impl StarTables {
    /// Writes `<fact>.csv`, one CSV per dimension and a `star.json` manifest.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
        self.fact.write_csv(dir.join(format!("{}.csv", self.spec.fact)))?;
        for (d, t) in self.spec.dimensions.iter().zip(&self.dimensions) {
            t.write_csv(dir.join(format!("{}.csv", d.name)))?;
        }
        let nominal = self
            .fact
            .columns()
            .iter()
            .chain(self.dimensions.iter().flat_map(|t| t.columns()))
            .filter(|c| matches!(c.data, ColumnData::Nominal { .. }))
            .map(|c| c.name.clone())
            .collect();
        let manifest = StarManifest {
            spec: self.spec.clone(),
            column_order: self.column_order.clone(),
            nominal,
        };
        let path = dir.join(MANIFEST);
        fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::file(path, e))
    }

    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| Error::file(&path, e))?;
        let m: StarManifest = serde_json::from_str(&text)?;
        let nominal: Vec<&str> = m.nominal.iter().map(String::as_str).collect();
        let fact = Table::read_csv_as(dir.join(format!("{}.csv", m.spec.fact)), &nominal)?;
        let dimensions = m
            .spec
            .dimensions
            .iter()
            .map(|d| Table::read_csv_as(dir.join(format!("{}.csv", d.name)), &nominal))
            .collect::<Result<_>>()?;
        Ok(StarTables {
            spec: m.spec,
            fact,
            dimensions,
            column_order: m.column_order,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        Table::new(vec![
            Column::nominal("carrier", ["AA", "UA", "AA", "DL", "UA", "AA"]),
            Column::nominal("origin", ["JFK", "SFO", "JFK", "ATL", "JFK", "LAX"]),
            Column::nominal("origin_state", ["NY", "CA", "NY", "GA", "NY", "CA"]),
            Column::quantitative("delay", vec![1.0, -2.0, 3.5, 0.0, 12.0, 1.0]),
            Column::nominal("kind", ["x"; 6]),
        ])
        .unwrap()
    }

    fn spec() -> StarSchemaSpec {
        StarSchemaSpec {
            fact: "flights".into(),
            dimensions: vec![
                DimensionSpec {
                    name: "carriers".into(),
                    key: "carrier_id".into(),
                    columns: vec!["carrier".into()],
                },
                DimensionSpec {
                    name: "airports".into(),
                    key: "origin_id".into(),
                    columns: vec!["origin".into(), "origin_state".into()],
                },
            ],
        }
    }

    fn sorted_rows(t: &Table) -> Vec<Vec<String>> {
        let mut rows: Vec<Vec<String>> = (0..t.rows())
            .map(|r| t.row(r).iter().map(|v| v.to_string()).collect())
            .collect();
        rows.sort();
        rows
    }

    #[test]
    fn round_trip_reproduces_rows() {
        let t = sample();
        let star = normalize(&t, &spec()).unwrap();
        assert_eq!(star.dimensions[0].rows(), 3);
        assert_eq!(star.dimensions[1].rows(), 4);
        assert_eq!(star.fact.columns().len(), 4);
        let back = denormalize(&star).unwrap();
        assert_eq!(back, t);
        assert_eq!(sorted_rows(&back), sorted_rows(&t));
    }

    #[test]
    fn empty_dimension_list_is_identity() {
        let t = sample();
        let star = normalize(&t, &StarSchemaSpec { fact: "f".into(), dimensions: vec![] }).unwrap();
        assert_eq!(star.fact, t);
    }

    #[test]
    fn constant_dimension_has_one_row() {
        let s = StarSchemaSpec {
            fact: "f".into(),
            dimensions: vec![DimensionSpec {
                name: "kinds".into(),
                key: "kind_id".into(),
                columns: vec!["kind".into()],
            }],
        };
        assert_eq!(normalize(&sample(), &s).unwrap().dimensions[0].rows(), 1);
    }

    #[test]
    fn overlapping_dimensions_are_rejected() {
        let mut s = spec();
        s.dimensions[1].columns.push("carrier".into());
        assert!(normalize(&sample(), &s).is_err());
        let mut s = spec();
        s.dimensions[0].columns = vec!["nope".into()];
        assert!(matches!(normalize(&sample(), &s), Err(Error::UnknownColumn(_))));
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let t = sample();
        normalize(&t, &spec()).unwrap().write_dir(dir.path()).unwrap();
        let star = StarTables::read_dir(dir.path()).unwrap();
        assert_eq!(sorted_rows(&denormalize(&star).unwrap()), sorted_rows(&t));
    }
}
