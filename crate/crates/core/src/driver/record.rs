use serde::{Deserialize, Serialize};

use super::BenchmarkSettings;
use crate::metrics::MetricSet;
use crate::model::VizSpec;
use crate::schema::Schema;

/// One executed query. The first 23 fields are the detailed-report columns
/// in order; the rest only appear in the JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub id: usize,
    pub interaction: usize,
    pub viz_name: String,
    pub driver: String,
    pub data_size: String,
    /// Milliseconds.
    pub think_time: u64,
    /// Milliseconds.
    pub time_req: u64,
    pub workflow: String,
    /// Unix epoch milliseconds.
    pub start_time: u64,
    pub end_time: u64,
    pub tr_violated: bool,
    pub bin_dims: usize,
    pub binning_type: String,
    pub agg_type: String,
    pub bins_ofm: usize,
    pub bins_delivered: usize,
    pub bins_in_gt: usize,
    pub rel_error_avg: Option<f64>,
    pub rel_error_stdev: Option<f64>,
    pub missing_bins: Option<f64>,
    pub cosine_distance: Option<f64>,
    pub margin_avg: Option<f64>,
    pub margin_stdev: Option<f64>,

    #[serde(default)]
    pub spurious_bins: usize,
    #[serde(default)]
    pub excluded_zero_truth: usize,
    #[serde(default)]
    pub smape: Option<f64>,
    #[serde(default)]
    pub bias: Option<f64>,
    #[serde(default)]
    pub progress: Option<f64>,
    #[serde(default)]
    pub error: Option<String>,
}

/// `500m`, `5k`, `1b` for round sizes, the plain number otherwise.
pub fn size_label(rows: u64) -> String {
    for (unit, suffix) in [(1_000_000_000, "b"), (1_000_000, "m"), (1_000, "k")] {
        if rows >= unit && rows % unit == 0 {
            return format!("{}{suffix}", rows / unit);
        }
    }
    rows.to_string()
}

impl QueryRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        workflow: &str,
        interaction: usize,
        viz: &VizSpec,
        schema: &Schema,
        driver: &str,
        settings: &BenchmarkSettings,
        start_time: u64,
        end_time: u64,
        m: &MetricSet,
        progress: Option<f64>,
        error: Option<String>,
    ) -> Self {
        QueryRecord {
            id: 0,
            interaction,
            viz_name: viz.name.clone(),
            driver: driver.to_string(),
            data_size: size_label(settings.data_size),
            think_time: settings.think_time.as_millis() as u64,
            time_req: settings.time_requirement.as_millis() as u64,
            workflow: workflow.to_string(),
            start_time,
            end_time: end_time.max(start_time),
            tr_violated: m.tr_violated,
            bin_dims: viz.bin_dims(),
            binning_type: viz.binning_type(schema),
            agg_type: viz.agg.function.as_str().to_string(),
            bins_ofm: m.out_of_margin,
            bins_delivered: m.bins_delivered,
            bins_in_gt: m.bins_in_gt,
            rel_error_avg: m.mre,
            rel_error_stdev: m.mre_stdev,
            missing_bins: m.missing_bins,
            cosine_distance: Some(m.cosine_distance),
            margin_avg: m.margin_mean,
            margin_stdev: m.margin_stdev,
            spurious_bins: m.spurious_bins,
            excluded_zero_truth: m.mre_excluded,
            smape: m.smape,
            bias: m.bias,
            progress,
            error,
        }
    }

    pub fn duration_ms(&self) -> u64 {
        self.end_time - self.start_time
    }
}
