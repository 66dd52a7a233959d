//! Column-major in-memory tables and their CSV representation.

use std::collections::HashMap;
use std::io;
use std::path::Path;

use crate::schema::{ColumnSchema, Schema};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Quantitative(Vec<f64>),
    /// Dictionary-encoded categories; `codes[i]` indexes `categories`.
    Nominal {
        codes: Vec<u32>,
        categories: Vec<String>,
    },
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Quantitative(v) => v.len(),
            ColumnData::Nominal { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Builds a nominal column from labels, assigning codes by first appearance.
    pub fn from_labels<S: AsRef<str>>(labels: impl IntoIterator<Item = S>) -> Self {
        let mut dict: HashMap<String, u32> = HashMap::new();
        let mut categories = Vec::new();
        let mut codes = Vec::new();
        for l in labels {
            let l = l.as_ref();
            let code = match dict.get(l) {
                Some(&c) => c,
                None => {
                    let c = categories.len() as u32;
                    dict.insert(l.to_string(), c);
                    categories.push(l.to_string());
                    c
                }
            };
            codes.push(code);
        }
        ColumnData::Nominal { codes, categories }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn quantitative(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            data: ColumnData::Quantitative(values),
        }
    }

    pub fn nominal<S: AsRef<str>>(
        name: impl Into<String>,
        labels: impl IntoIterator<Item = S>,
    ) -> Self {
        Column {
            name: name.into(),
            data: ColumnData::from_labels(labels),
        }
    }

    pub fn value(&self, row: usize) -> Value {
        match &self.data {
            ColumnData::Quantitative(v) => Value::Number(v[row]),
            ColumnData::Nominal { codes, categories } => {
                Value::Text(categories[codes[row] as usize].clone())
            }
        }
    }

    /// Schema entry with the domain observed in the data. NaN cells are ignored.
    pub fn schema(&self) -> ColumnSchema {
        match &self.data {
            ColumnData::Quantitative(v) => {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for &x in v.iter().filter(|x| !x.is_nan()) {
                    lo = lo.min(x);
                    hi = hi.max(x);
                }
                if lo > hi {
                    lo = 0.0;
                    hi = 0.0;
                }
                ColumnSchema::quantitative(&self.name, lo, hi)
            }
            ColumnData::Nominal { categories, .. } => {
                ColumnSchema::nominal(&self.name, categories.iter().cloned())
            }
        }
    }
}

/// An owned cell value, used where rows are handled generically.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Text(String),
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Number(x) if x.is_nan() => Ok(()),
            Value::Number(x) => write!(f, "{x}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    columns: Vec<Column>,
    rows: usize,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.data.len());
        let mut seen = std::collections::HashSet::new();
        for c in &columns {
            if c.data.len() != rows {
                return Err(Error::spec(format!(
                    "column `{}` has {} rows, expected {rows}",
                    c.name,
                    c.data.len()
                )));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::spec(format!("duplicate column `{}`", c.name)));
            }
        }
        Ok(Table { columns, rows })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn into_columns(self) -> Vec<Column> {
        self.columns
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        Ok(&self.columns[self.column_index(name)?])
    }

    pub fn row(&self, i: usize) -> Vec<Value> {
        self.columns.iter().map(|c| c.value(i)).collect()
    }

    pub fn schema(&self, table: impl Into<String>) -> Schema {
        Schema {
            table: table.into(),
            rows: self.rows as u64,
            columns: self.columns.iter().map(Column::schema).collect(),
        }
    }

    /// Reads a CSV with a header row. A column is quantitative when every
    /// non-empty cell parses as a number; empty quantitative cells become NaN.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv_as(path, &[])
    }

    /// Like [`Table::read_csv`], forcing the listed columns to be nominal.
    pub fn read_csv_as(path: impl AsRef<Path>, nominal: &[&str]) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
        Self::from_csv_reader(io::BufReader::new(file), nominal)
    }

    pub fn from_csv_reader<R: io::Read>(reader: R, nominal: &[&str]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut builders: Vec<ColumnBuilder> = headers
            .iter()
            .map(|h| {
                if nominal.contains(&h.as_str()) {
                    ColumnBuilder::nominal()
                } else {
                    ColumnBuilder::Numbers(Vec::new())
                }
            })
            .collect();
        let mut record = csv::StringRecord::new();
        while rdr.read_record(&mut record)? {
            if record.len() != headers.len() {
                return Err(Error::spec(format!(
                    "CSV record has {} fields, header has {}",
                    record.len(),
                    headers.len()
                )));
            }
            for (b, field) in builders.iter_mut().zip(record.iter()) {
                b.push(field);
            }
        }
        let columns = headers
            .into_iter()
            .zip(builders)
            .map(|(name, b)| Column {
                name,
                data: b.finish(),
            })
            .collect();
        Table::new(columns)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
        self.write_csv_to(io::BufWriter::new(file))
    }

    pub fn write_csv_to<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        let mut buf: Vec<String> = vec![String::new(); self.columns.len()];
        for i in 0..self.rows {
            for (slot, c) in buf.iter_mut().zip(&self.columns) {
                slot.clear();
                match &c.data {
                    ColumnData::Quantitative(v) => {
                        if !v[i].is_nan() {
                            use std::fmt::Write;
                            let _ = write!(slot, "{}", v[i]);
                        }
                    }
                    ColumnData::Nominal { codes, categories } => {
                        slot.push_str(&categories[codes[i] as usize])
                    }
                }
            }
            w.write_record(&buf)?;
        }
        w.flush()?;
        Ok(())
    }
}

enum ColumnBuilder {
    Numbers(Vec<f64>),
    Labels {
        codes: Vec<u32>,
        categories: Vec<String>,
        dict: HashMap<String, u32>,
    },
}

impl ColumnBuilder {
    fn nominal() -> Self {
        ColumnBuilder::Labels {
            codes: Vec::new(),
            categories: Vec::new(),
            dict: HashMap::new(),
        }
    }

    fn push(&mut self, field: &str) {
        if let ColumnBuilder::Numbers(values) = self {
            let trimmed = field.trim();
            if trimmed.is_empty() {
                values.push(f64::NAN);
                return;
            }
            if let Ok(x) = trimmed.parse::<f64>() {
                values.push(x);
                return;
            }
            // first non-numeric cell: re-encode what we have as labels
            let mut labels = Self::nominal();
            for x in std::mem::take(values) {
                let text = if x.is_nan() { String::new() } else { x.to_string() };
                labels.push(&text);
            }
            *self = labels;
        }
        if let ColumnBuilder::Labels {
            codes,
            categories,
            dict,
        } = self
        {
            let code = match dict.get(field) {
                Some(&c) => c,
                None => {
                    let c = categories.len() as u32;
                    dict.insert(field.to_string(), c);
                    categories.push(field.to_string());
                    c
                }
            };
            codes.push(code);
        }
    }

    fn finish(self) -> ColumnData {
        match self {
            ColumnBuilder::Numbers(v) => ColumnData::Quantitative(v),
            ColumnBuilder::Labels {
                codes, categories, ..
            } => ColumnData::Nominal { codes, categories },
        }
    }
}
