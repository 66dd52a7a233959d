use std::io;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use super::cholesky::{cholesky_regularized, Matrix};
use crate::table::{Column, ColumnData, Table};
use crate::{Error, Result};

pub const MIN_SAMPLE_ROWS: usize = 100;
pub const DEFAULT_MAX_SAMPLE: usize = 100_000;

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Inverse of a column's empirical distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    /// Sorted sample values; lookups interpolate between order statistics.
    Quantitative { sorted: Vec<f64> },
    /// Categories ordered by descending frequency with their cumulative
    /// frequencies (last entry is 1).
    Nominal {
        categories: Vec<String>,
        cumulative: Vec<f64>,
    },
}

impl Marginal {
    pub fn invert(&self, u: f64) -> MarginalValue {
        match self {
            Marginal::Quantitative { sorted } => {
                let n = sorted.len();
                let p = u.clamp(0.0, 1.0) * (n - 1) as f64;
                let i = (p.floor() as usize).min(n - 1);
                let frac = p - i as f64;
                let v = if i + 1 < n {
                    sorted[i] + frac * (sorted[i + 1] - sorted[i])
                } else {
                    sorted[i]
                };
                MarginalValue::Number(v)
            }
            Marginal::Nominal { cumulative, .. } => {
                let code = cumulative.partition_point(|&c| c < u).min(cumulative.len() - 1);
                MarginalValue::Category(code as u32)
            }
        }
    }

    fn is_constant(&self) -> bool {
        match self {
            Marginal::Quantitative { sorted } => sorted.first() == sorted.last(),
            Marginal::Nominal { categories, .. } => categories.len() < 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginalValue {
    Number(f64),
    /// Index into the marginal's frequency-ordered categories.
    Category(u32),
}

#[derive(Debug, Clone)]
pub struct ColumnModel {
    pub name: String,
    pub marginal: Marginal,
}

#[derive(Debug, Clone)]
pub struct CopulaModel {
    pub columns: Vec<ColumnModel>,
    /// Indices into `columns` that take part in the correlation structure,
    /// in the order of `correlation`'s rows.
    pub correlated: Vec<usize>,
    pub correlation: Matrix,
    pub factor: Matrix,
    /// Diagonal jitter that was needed to factorize `correlation`.
    pub jitter: f64,
    /// Zero-variance columns, synthesized independently.
    pub dropped: Vec<String>,
    pub sample_rows: usize,
}

/// Average 1-based ranks, ties share the mean of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

fn normal_scores(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    average_ranks(values)
        .into_iter()
        .map(|r| normal_quantile((r - 0.5) / n))
        .collect()
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

fn is_null(c: &Column, row: usize) -> bool {
    match &c.data {
        ColumnData::Quantitative(v) => v[row].is_nan(),
        ColumnData::Nominal { codes, categories } => categories[codes[row] as usize].is_empty(),
    }
}

/// Fits a Gaussian copula to `seed`. At most `sample_size` rows are drawn
/// (without replacement when the seed is large enough, with replacement
/// otherwise) after rows containing nulls are discarded.
pub fn fit(seed: &Table, sample_size: usize, rng_seed: u64) -> Result<CopulaModel> {
    if seed.columns().len() < 2 {
        return Err(Error::Generation("seed needs at least 2 columns".into()));
    }
    if sample_size < MIN_SAMPLE_ROWS {
        return Err(Error::Generation(format!(
            "sample size {sample_size} is below the minimum of {MIN_SAMPLE_ROWS}"
        )));
    }
    let complete: Vec<usize> = (0..seed.rows())
        .filter(|&r| !seed.columns().iter().any(|c| is_null(c, r)))
        .collect();
    if complete.is_empty() {
        return Err(Error::Generation("seed has no complete rows".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let rows: Vec<usize> = if complete.len() >= sample_size {
        let mut picked = index::sample(&mut rng, complete.len(), sample_size).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| complete[i]).collect()
    } else {
        (0..sample_size)
            .map(|_| complete[rng.random_range(0..complete.len())])
            .collect()
    };

    let mut columns = Vec::new();
    let mut encoded: Vec<Vec<f64>> = Vec::new();
    for c in seed.columns() {
        let (marginal, values) = match &c.data {
            ColumnData::Quantitative(v) => {
                let values: Vec<f64> = rows.iter().map(|&r| v[r]).collect();
                let mut sorted = values.clone();
                sorted.sort_by(f64::total_cmp);
                (Marginal::Quantitative { sorted }, values)
            }
            ColumnData::Nominal { codes, categories } => {
                let mut freq = vec![0usize; categories.len()];
                for &r in &rows {
                    freq[codes[r] as usize] += 1;
                }
                let mut present: Vec<usize> = (0..categories.len()).filter(|&i| freq[i] > 0).collect();
                present.sort_by(|&a, &b| freq[b].cmp(&freq[a]).then(categories[a].cmp(&categories[b])));
                let mut ordinal = vec![0u32; categories.len()];
                for (rank, &code) in present.iter().enumerate() {
                    ordinal[code] = rank as u32;
                }
                let total = rows.len() as f64;
                let mut acc = 0usize;
                let cumulative = present
                    .iter()
                    .map(|&code| {
                        acc += freq[code];
                        acc as f64 / total
                    })
                    .collect();
                let values = rows.iter().map(|&r| f64::from(ordinal[codes[r] as usize])).collect();
                (
                    Marginal::Nominal {
                        categories: present.iter().map(|&i| categories[i].clone()).collect(),
                        cumulative,
                    },
                    values,
                )
            }
        };
        columns.push(ColumnModel {
            name: c.name.clone(),
            marginal,
        });
        encoded.push(values);
    }

    let (correlated, dropped): (Vec<usize>, Vec<usize>) =
        (0..columns.len()).partition(|&i| !columns[i].marginal.is_constant());
    let scores: Vec<Vec<f64>> = correlated.iter().map(|&i| normal_scores(&encoded[i])).collect();
    let d = correlated.len();
    let mut correlation = Matrix::identity(d);
    for i in 0..d {
        for j in 0..i {
            let r = pearson(&scores[i], &scores[j]);
            correlation[(i, j)] = r;
            correlation[(j, i)] = r;
        }
    }
    let (factor, jitter) = cholesky_regularized(&correlation)?;
    Ok(CopulaModel {
        dropped: dropped.iter().map(|&i| columns[i].name.clone()).collect(),
        columns,
        correlated,
        correlation,
        factor,
        jitter,
        sample_rows: rows.len(),
    })
}

/// Default fit sample size for a seed with `rows` rows.
pub fn default_sample_size(rows: usize) -> usize {
    rows.min(DEFAULT_MAX_SAMPLE)
}

const CHUNK_ROWS: usize = 65_536;

/// Deterministic row generator. Each row consumes one standard normal per
/// correlated column followed by one uniform per dropped column.
pub struct Synthesizer<'a> {
    model: &'a CopulaModel,
    rng: ChaCha8Rng,
    remaining: usize,
    z: Vec<f64>,
    x: Vec<f64>,
    independent: Vec<usize>,
}

impl<'a> Synthesizer<'a> {
    pub fn new(model: &'a CopulaModel, n: usize, rng_seed: u64) -> Self {
        let d = model.correlated.len();
        let independent = (0..model.columns.len())
            .filter(|i| !model.correlated.contains(i))
            .collect();
        Synthesizer {
            model,
            rng: ChaCha8Rng::seed_from_u64(rng_seed),
            remaining: n,
            z: vec![0.0; d],
            x: vec![0.0; d],
            independent,
        }
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    /// Fills `out` (one slot per model column) with the next row, or returns
    /// false when all rows have been emitted.
    pub fn next_row(&mut self, out: &mut [MarginalValue]) -> bool {
        if self.remaining == 0 {
            return false;
        }
        self.remaining -= 1;
        for z in &mut self.z {
            *z = self.rng.sample(StandardNormal);
        }
        self.model.factor.mul_lower(&self.z, &mut self.x);
        for (k, &col) in self.model.correlated.iter().enumerate() {
            out[col] = self.model.columns[col].marginal.invert(normal_cdf(self.x[k]));
        }
        for &col in &self.independent {
            let u: f64 = self.rng.random();
            out[col] = self.model.columns[col].marginal.invert(u);
        }
        true
    }

    /// Materializes up to `max_rows` further rows as a table.
    pub fn next_table(&mut self, max_rows: usize) -> Table {
        let take = max_rows.min(self.remaining);
        let cols = &self.model.columns;
        let mut numbers: Vec<Vec<f64>> = vec![Vec::new(); cols.len()];
        let mut codes: Vec<Vec<u32>> = vec![Vec::new(); cols.len()];
        for (i, c) in cols.iter().enumerate() {
            match c.marginal {
                Marginal::Quantitative { .. } => numbers[i].reserve(take),
                Marginal::Nominal { .. } => codes[i].reserve(take),
            }
        }
        let mut row = vec![MarginalValue::Number(0.0); cols.len()];
        for _ in 0..take {
            self.next_row(&mut row);
            for (i, v) in row.iter().enumerate() {
                match *v {
                    MarginalValue::Number(x) => numbers[i].push(x),
                    MarginalValue::Category(c) => codes[i].push(c),
                }
            }
        }
        let columns = cols
            .iter()
            .enumerate()
            .map(|(i, c)| Column {
                name: c.name.clone(),
                data: match &c.marginal {
                    Marginal::Quantitative { .. } => {
                        ColumnData::Quantitative(std::mem::take(&mut numbers[i]))
                    }
                    Marginal::Nominal { categories, .. } => ColumnData::Nominal {
                        codes: std::mem::take(&mut codes[i]),
                        categories: categories.clone(),
                    },
                },
            })
            .collect();
        Table::new(columns).expect("columns have equal length")
    }
}

impl CopulaModel {
    pub fn synthesize(&self, n: usize, rng_seed: u64) -> Table {
        Synthesizer::new(self, n, rng_seed).next_table(n)
    }

    /// Streams `n` synthesized rows as CSV without materializing them all.
    pub fn write_csv<W: io::Write>(&self, n: usize, rng_seed: u64, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        let mut synth = Synthesizer::new(self, n, rng_seed);
        let mut row = vec![MarginalValue::Number(0.0); self.columns.len()];
        let mut buf: Vec<String> = vec![String::new(); self.columns.len()];
        while synth.next_row(&mut row) {
            for (i, v) in row.iter().enumerate() {
                buf[i] = match (*v, &self.columns[i].marginal) {
                    (MarginalValue::Number(x), _) => x.to_string(),
                    (MarginalValue::Category(c), Marginal::Nominal { categories, .. }) => {
                        categories[c as usize].clone()
                    }
                    (MarginalValue::Category(_), _) => unreachable!(),
                };
            }
            w.write_record(&buf)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Chunked synthesis for callers that want bounded memory.
    pub fn synthesize_chunks(
        &self,
        n: usize,
        rng_seed: u64,
    ) -> impl Iterator<Item = Table> + '_ {
        let mut synth = Synthesizer::new(self, n, rng_seed);
        std::iter::from_fn(move || (synth.remaining() > 0).then(|| synth.next_table(CHUNK_ROWS)))
    }
}
