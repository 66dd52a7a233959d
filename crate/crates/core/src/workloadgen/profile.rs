use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Condition, FilterPredicate};
use crate::schema::{ColumnDomain, Schema};
use crate::table::{ColumnData, Table};
use crate::{Error, Result};

/// Number of evenly spaced quantiles kept per quantitative column.
pub const QUANTILE_POINTS: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnStats {
    /// Values at probabilities `i / (len - 1)`.
    Quantitative { quantiles: Vec<f64> },
    Nominal { frequencies: BTreeMap<String, f64> },
}

impl ColumnStats {
    /// Linear interpolation between the stored quantiles.
    pub fn quantile(&self, p: f64) -> Option<f64> {
        let ColumnStats::Quantitative { quantiles } = self else {
            return None;
        };
        let n = quantiles.len();
        if n == 0 {
            return None;
        }
        let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (pos.floor() as usize).min(n - 1);
        let frac = pos - i as f64;
        Some(if i + 1 < n {
            quantiles[i] + frac * (quantiles[i + 1] - quantiles[i])
        } else {
            quantiles[i]
        })
    }

    /// Stats implied by the schema alone: uniform over the domain.
    pub fn uniform(domain: &ColumnDomain) -> Self {
        match domain {
            ColumnDomain::Quantitative { min, max } => ColumnStats::Quantitative {
                quantiles: vec![*min, *max],
            },
            ColumnDomain::Nominal { categories } => ColumnStats::Nominal {
                frequencies: categories
                    .iter()
                    .map(|c| (c.clone(), 1.0 / categories.len() as f64))
                    .collect(),
            },
        }
    }
}

/// Schema plus value statistics; the input the workload generator samples
/// predicates from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataProfile {
    pub schema: Schema,
    #[serde(default)]
    pub stats: BTreeMap<String, ColumnStats>,
}

impl DataProfile {
    pub fn from_table(table: &Table, name: impl Into<String>) -> Self {
        let mut schema = table.schema(name);
        schema.rows = table.rows() as u64;
        let stats = table
            .columns()
            .iter()
            .map(|c| {
                let s = match &c.data {
                    ColumnData::Quantitative(v) => {
                        let mut sorted: Vec<f64> = v.iter().copied().filter(|x| !x.is_nan()).collect();
                        sorted.sort_by(f64::total_cmp);
                        let quantiles = if sorted.is_empty() {
                            vec![0.0, 0.0]
                        } else {
                            (0..QUANTILE_POINTS)
                                .map(|i| {
                                    let pos = i as f64 / (QUANTILE_POINTS - 1) as f64
                                        * (sorted.len() - 1) as f64;
                                    let lo = pos.floor() as usize;
                                    let hi = (lo + 1).min(sorted.len() - 1);
                                    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
                                })
                                .collect()
                        };
                        ColumnStats::Quantitative { quantiles }
                    }
                    ColumnData::Nominal { codes, categories } => {
                        let mut counts = vec![0usize; categories.len()];
                        for &code in codes {
                            counts[code as usize] += 1;
                        }
                        let total = codes.len().max(1) as f64;
                        ColumnStats::Nominal {
                            frequencies: categories
                                .iter()
                                .zip(counts)
                                .map(|(c, n)| (c.clone(), n as f64 / total))
                                .collect(),
                        }
                    }
                };
                (c.name.clone(), s)
            })
            .collect();
        DataProfile { schema, stats }
    }

    pub fn from_schema(schema: Schema) -> Self {
        DataProfile {
            schema,
            stats: BTreeMap::new(),
        }
    }

    pub fn stats(&self, column: &str) -> Result<ColumnStats> {
        if let Some(s) = self.stats.get(column) {
            return Ok(s.clone());
        }
        Ok(ColumnStats::uniform(&self.schema.column(column)?.domain))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let profile: DataProfile = serde_json::from_str(&text)?;
        profile.schema.validate()?;
        Ok(profile)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::file(path, e))
    }
}

/// Width of sampled quantitative ranges as a fraction of the column domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthRange {
    pub min: f64,
    pub max: f64,
}

impl Default for WidthRange {
    fn default() -> Self {
        WidthRange { min: 0.05, max: 0.5 }
    }
}

/// Range predicate starting at the `start`-quantile and spanning `fraction`
/// of the domain.
pub fn quantile_range(column: &str, stats: &ColumnStats, start: f64, fraction: f64) -> FilterPredicate {
    let lo = stats.quantile(start).unwrap_or(0.0);
    let (min, max) = (stats.quantile(0.0).unwrap_or(0.0), stats.quantile(1.0).unwrap_or(0.0));
    FilterPredicate::single(column, Condition::InRange(lo, lo + fraction * (max - min)))
}

/// Frequency-weighted category pick; `u` in `[0, 1)`.
pub fn weighted_category(frequencies: &BTreeMap<String, f64>, u: f64) -> Option<&str> {
    let total: f64 = frequencies.values().sum();
    let mut acc = 0.0;
    let mut last = None;
    for (c, f) in frequencies {
        if *f <= 0.0 {
            continue;
        }
        acc += f / total;
        last = Some(c.as_str());
        if u < acc {
            return last;
        }
    }
    last
}

/// Samples a single-column predicate: an equality on a frequency-weighted
/// category or a range over a sampled quantile interval.
pub fn sample_filter<R: Rng + ?Sized>(
    column: &str,
    stats: &ColumnStats,
    width: WidthRange,
    rng: &mut R,
) -> FilterPredicate {
    match stats {
        ColumnStats::Nominal { frequencies } => {
            let u: f64 = rng.random();
            let c = weighted_category(frequencies, u).unwrap_or_default();
            FilterPredicate::single(column, Condition::Eq(c.to_string()))
        }
        ColumnStats::Quantitative { .. } => {
            let start: f64 = rng.random();
            let fraction = rng.random_range(width.min..=width.max);
            quantile_range(column, stats, start, fraction)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Column;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn range_from_fixed_draws() {
        let s = ColumnStats::uniform(&ColumnDomain::Quantitative { min: 0.0, max: 100.0 });
        let p = quantile_range("x", &s, 0.2, 0.10);
        assert_eq!(p.atoms[0].condition, Condition::InRange(20.0, 30.0));
    }

    #[test]
    fn single_category_is_always_picked() {
        let s = ColumnStats::uniform(&ColumnDomain::Nominal {
            categories: vec!["only".into()],
        });
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let p = sample_filter("c", &s, WidthRange::default(), &mut rng);
            assert_eq!(p.atoms[0].condition, Condition::Eq("only".into()));
        }
    }

    #[test]
    fn same_seed_same_predicates() {
        let t = Table::new(vec![
            Column::quantitative("x", (0..500).map(f64::from).collect()),
            Column::nominal("c", (0..500).map(|i| if i % 4 == 0 { "a" } else { "b" })),
        ])
        .unwrap();
        let p = DataProfile::from_table(&t, "t");
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20)
                .map(|i| {
                    let col = if i % 2 == 0 { "x" } else { "c" };
                    sample_filter(col, &p.stats(col).unwrap(), WidthRange::default(), &mut rng)
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }

    #[test]
    fn weighted_category_follows_frequencies() {
        let f: BTreeMap<String, f64> = [("a".into(), 0.25), ("b".into(), 0.75)].into();
        assert_eq!(weighted_category(&f, 0.1), Some("a"));
        assert_eq!(weighted_category(&f, 0.3), Some("b"));
        assert_eq!(weighted_category(&f, 0.9999), Some("b"));
    }

    #[test]
    fn profile_quantiles_and_json() {
        let t = Table::new(vec![
            Column::quantitative("x", (0..=100).map(f64::from).collect()),
            Column::nominal("c", ["a", "b"].repeat(50).into_iter().chain(["a"])),
        ])
        .unwrap();
        let p = DataProfile::from_table(&t, "t");
        assert_eq!(p.schema.rows, 101);
        assert_eq!(p.stats["x"].quantile(0.37), Some(37.0));
        let back: DataProfile = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
