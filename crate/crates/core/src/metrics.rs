//! Result-quality metrics comparing a delivered result `F` with ground truth `A`.
//!
//! Error metrics (MRE, SMAPE, out-of-margin, bias) are scoped to the bins
//! present in both tables. Bins delivered but absent from the truth are
//! counted separately as spurious. All standard deviations are population
//! standard deviations.

use serde::{Deserialize, Serialize};

use crate::model::ResultTable;

/// Population mean and standard deviation; `None` for an empty slice.
pub fn mean_stdev(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

fn shared<'a>(
    f: &'a ResultTable,
    a: &'a ResultTable,
) -> impl Iterator<Item = (&'a crate::model::BinValue, f64)> + 'a {
    f.bins
        .iter()
        .filter_map(|(k, fv)| a.bins.get(k).map(|av| (fv, av.estimate)))
}

/// `|keys(A) \ keys(F)| / |keys(A)|`. With an empty truth the ratio is 0 when
/// nothing was delivered either, and undefined otherwise.
pub fn missing_bins(f: &ResultTable, a: &ResultTable) -> Option<f64> {
    if a.is_empty() {
        return f.is_empty().then_some(0.0);
    }
    let missing = a.bins.keys().filter(|k| !f.bins.contains_key(*k)).count();
    Some(missing as f64 / a.len() as f64)
}

/// Delivered bins that do not exist in the ground truth.
pub fn spurious_bins(f: &ResultTable, a: &ResultTable) -> usize {
    f.bins.keys().filter(|k| !a.bins.contains_key(*k)).count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeError {
    /// `None` when no shared bin has a non-zero truth.
    pub mean: Option<f64>,
    pub stdev: Option<f64>,
    /// Shared bins skipped because their true value is zero.
    pub excluded_zero_truth: usize,
}

pub fn mean_relative_error(f: &ResultTable, a: &ResultTable) -> RelativeError {
    let mut errors = Vec::new();
    let mut excluded = 0;
    for (fv, av) in shared(f, a) {
        if av == 0.0 {
            excluded += 1;
        } else {
            errors.push((fv.estimate - av).abs() / av.abs());
        }
    }
    let ms = mean_stdev(&errors);
    RelativeError {
        mean: ms.map(|m| m.0),
        stdev: ms.map(|m| m.1),
        excluded_zero_truth: excluded,
    }
}

/// Symmetric mean absolute percentage error in `[0, 1]`; a bin with
/// `F = A = 0` contributes 0. `None` without shared bins.
pub fn smape(f: &ResultTable, a: &ResultTable) -> Option<f64> {
    let terms: Vec<f64> = shared(f, a)
        .map(|(fv, av)| {
            let denom = fv.estimate.abs() + av.abs();
            if denom == 0.0 {
                0.0
            } else {
                (fv.estimate - av).abs() / denom
            }
        })
        .collect();
    mean_stdev(&terms).map(|m| m.0)
}

/// `1 - cos(F, A)` over the union of keys with missing bins set to zero.
/// Both vectors zero gives 0; exactly one zero vector gives 1.
pub fn cosine_distance(f: &ResultTable, a: &ResultTable) -> f64 {
    let mut dot = 0.0;
    let mut ff = 0.0;
    let mut aa = 0.0;
    for (k, fv) in &f.bins {
        let av = a.estimate(k).unwrap_or(0.0);
        dot += fv.estimate * av;
        ff += fv.estimate * fv.estimate;
    }
    for av in a.bins.values() {
        aa += av.estimate * av.estimate;
    }
    match (ff == 0.0, aa == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        _ => (1.0 - dot / (ff.sqrt() * aa.sqrt())).clamp(0.0, 2.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginStats {
    pub mean: f64,
    pub stdev: f64,
    /// Bins with a margin that could not be turned into a relative margin
    /// (zero estimate or unbounded margin).
    pub excluded: usize,
}

/// Mean and standard deviation of `margin / |estimate|` over delivered bins.
/// `None` if the result carries no usable margins.
pub fn margin_stats(f: &ResultTable) -> Option<MarginStats> {
    let mut rel = Vec::new();
    let mut excluded = 0;
    for b in f.bins.values() {
        let Some(m) = b.margin else { continue };
        if b.estimate == 0.0 || !m.is_finite() {
            excluded += 1;
        } else {
            rel.push(m / b.estimate.abs());
        }
    }
    mean_stdev(&rel).map(|(mean, stdev)| MarginStats {
        mean,
        stdev,
        excluded,
    })
}

/// Shared bins whose error exceeds the returned margin.
pub fn out_of_margin(f: &ResultTable, a: &ResultTable) -> usize {
    shared(f, a)
        .filter(|(fv, av)| fv.margin.is_some_and(|m| (fv.estimate - av).abs() > m))
        .count()
}

/// `sum(F) / sum(A)` over shared bins; `None` when the denominator is zero.
pub fn bias(f: &ResultTable, a: &ResultTable) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (fv, av) in shared(f, a) {
        num += fv.estimate;
        den += av;
    }
    (den != 0.0).then(|| num / den)
}

/// Every metric for one executed query.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricSet {
    pub tr_violated: bool,
    pub bins_delivered: usize,
    pub bins_in_gt: usize,
    pub spurious_bins: usize,
    pub missing_bins: Option<f64>,
    pub mre: Option<f64>,
    pub mre_stdev: Option<f64>,
    pub mre_excluded: usize,
    pub smape: Option<f64>,
    pub cosine_distance: f64,
    pub margin_mean: Option<f64>,
    pub margin_stdev: Option<f64>,
    pub out_of_margin: usize,
    pub bias: Option<f64>,
}

impl MetricSet {
    /// Scores `delivered` against `truth`. A query with no fetchable result is
    /// scored as an empty delivery.
    pub fn evaluate(delivered: Option<&ResultTable>, truth: &ResultTable, tr_violated: bool) -> Self {
        let empty = ResultTable::default();
        let f = delivered.unwrap_or(&empty);
        let mre = mean_relative_error(f, truth);
        let margins = margin_stats(f);
        MetricSet {
            tr_violated,
            bins_delivered: f.len(),
            bins_in_gt: truth.len(),
            spurious_bins: spurious_bins(f, truth),
            missing_bins: missing_bins(f, truth),
            mre: mre.mean,
            mre_stdev: mre.stdev,
            mre_excluded: mre.excluded_zero_truth,
            smape: smape(f, truth),
            cosine_distance: cosine_distance(f, truth),
            margin_mean: margins.map(|m| m.mean),
            margin_stdev: margins.map(|m| m.stdev),
            out_of_margin: out_of_margin(f, truth),
            bias: bias(f, truth),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BinComponent, BinKey, BinValue};

    fn key(i: i64) -> BinKey {
        BinKey(vec![BinComponent::Index(i)])
    }

    fn table(bins: &[(i64, f64, Option<f64>)]) -> ResultTable {
        ResultTable::new(
            bins.iter()
                .map(|&(k, e, m)| (key(k), BinValue { estimate: e, margin: m }))
                .collect(),
            1.0,
        )
    }

    fn plain(bins: &[(i64, f64)]) -> ResultTable {
        table(&bins.iter().map(|&(k, e)| (k, e, None)).collect::<Vec<_>>())
    }

    #[test]
    fn missing_bins_ratios() {
        let a = plain(&(0..56).map(|i| (i, 1.0)).collect::<Vec<_>>());
        let f = plain(&(0..38).map(|i| (i, 1.0)).collect::<Vec<_>>());
        assert!((missing_bins(&f, &a).unwrap() - 0.32).abs() < 0.005);
        let a = plain(&(0..159).map(|i| (i, 1.0)).collect::<Vec<_>>());
        let f = plain(&(0..82).map(|i| (i, 1.0)).collect::<Vec<_>>());
        assert!((missing_bins(&f, &a).unwrap() - 0.48).abs() < 0.005);
        assert_eq!(missing_bins(&a, &a), Some(0.0));
        // spurious keys do not reduce the ratio
        let f = plain(&[(0, 1.0), (1000, 1.0)]);
        let a = plain(&[(0, 1.0), (1, 1.0)]);
        assert_eq!(missing_bins(&f, &a), Some(0.5));
        assert_eq!(spurious_bins(&f, &a), 1);
        let empty = ResultTable::default();
        assert_eq!(missing_bins(&empty, &empty), Some(0.0));
        assert_eq!(missing_bins(&a, &empty), None);
    }

    #[test]
    fn relative_error_cases() {
        let a = plain(&[(0, 2.0), (1, 0.0)]);
        assert_eq!(
            mean_relative_error(&a, &a),
            RelativeError { mean: Some(0.0), stdev: Some(0.0), excluded_zero_truth: 1 }
        );
        let f = plain(&[(0, 3.0)]);
        assert_eq!(mean_relative_error(&f, &a).mean, Some(0.5));
        assert_eq!(mean_relative_error(&plain(&[(1, 3.0)]), &a).mean, None);
    }

    #[test]
    fn smape_cases() {
        let a = plain(&[(0, 3.0)]);
        assert_eq!(smape(&a, &a), Some(0.0));
        assert_eq!(smape(&plain(&[(0, 1.0)]), &a), Some(0.5));
        assert_eq!(smape(&plain(&[(0, 5.0)]), &plain(&[(0, 0.0)])), Some(1.0));
        assert_eq!(smape(&plain(&[(0, 0.0)]), &plain(&[(0, 0.0)])), Some(0.0));
    }

    #[test]
    fn cosine_cases() {
        let a = plain(&[(0, 1.0), (1, 2.0), (2, 3.0)]);
        assert!(cosine_distance(&a, &a).abs() < 1e-15);
        let f = plain(&[(0, 2.0), (1, 4.0), (2, 6.0)]);
        assert!(cosine_distance(&f, &a).abs() < 1e-15, "scale invariant");
        assert_eq!(cosine_distance(&plain(&[(9, 1.0)]), &a), 1.0);
        let empty = ResultTable::default();
        assert_eq!(cosine_distance(&empty, &empty), 0.0);
        assert_eq!(cosine_distance(&empty, &a), 1.0);
    }

    #[test]
    fn margin_and_bias_cases() {
        let f = table(&[(0, 10.0, Some(0.0)), (1, 4.0, Some(0.0))]);
        let m = margin_stats(&f).unwrap();
        assert_eq!((m.mean, m.stdev), (0.0, 0.0));
        let f = table(&[(0, 10.0, Some(1.0))]);
        let m = margin_stats(&f).unwrap();
        assert!((m.mean - 0.1).abs() < 1e-15 && m.stdev == 0.0);
        assert_eq!(margin_stats(&plain(&[(0, 1.0)])), None);
        let unbounded = table(&[(0, 10.0, Some(f64::INFINITY)), (1, 0.0, Some(1.0))]);
        assert_eq!(margin_stats(&unbounded), None);

        assert_eq!(out_of_margin(&table(&[(0, 10.0, Some(1.0))]), &plain(&[(0, 12.0)])), 1);
        assert_eq!(out_of_margin(&table(&[(0, 12.0, Some(0.0))]), &plain(&[(0, 12.0)])), 0);

        let a = plain(&[(0, 10.0), (1, 20.0)]);
        assert_eq!(bias(&a, &a), Some(1.0));
        let f = plain(&[(0, 11.0), (1, 22.0)]);
        assert!((bias(&f, &a).unwrap() - 1.1).abs() < 1e-12);
        assert_eq!(bias(&plain(&[(0, 1.0)]), &plain(&[(0, 0.0)])), None);
    }

    #[test]
    fn evaluate_no_result() {
        let a = plain(&[(0, 1.0), (1, 2.0)]);
        let m = MetricSet::evaluate(None, &a, true);
        assert!(m.tr_violated);
        assert_eq!(m.missing_bins, Some(1.0));
        assert_eq!(m.cosine_distance, 1.0);
        assert_eq!(m.mre, None);
        assert_eq!(m.bins_in_gt, 2);
    }

    use proptest::prelude::*;

    fn arb_table() -> impl Strategy<Value = ResultTable> {
        proptest::collection::btree_map(
            0i64..30,
            (0.0f64..100.0, proptest::option::of(0.0f64..10.0)),
            0..30,
        )
        .prop_map(|m| {
            ResultTable::new(
                m.into_iter()
                    .map(|(k, (e, mg))| (key(k), BinValue { estimate: e, margin: mg }))
                    .collect(),
                1.0,
            )
        })
    }

    proptest! {
        #[test]
        fn bounded_metrics_stay_in_unit_interval(f in arb_table(), a in arb_table()) {
            if let Some(m) = missing_bins(&f, &a) { prop_assert!((0.0..=1.0).contains(&m)); }
            if let Some(s) = smape(&f, &a) { prop_assert!((0.0..=1.0).contains(&s)); }
            let c = cosine_distance(&f, &a);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&c));
        }

        #[test]
        fn exact_delivery_has_zero_error(a in arb_table()) {
            let m = MetricSet::evaluate(Some(&a), &a, false);
            prop_assert_eq!(m.missing_bins, Some(0.0));
            prop_assert_eq!(m.spurious_bins, 0);
            if let Some(mre) = m.mre { prop_assert_eq!(mre, 0.0); }
        }
    }
}
