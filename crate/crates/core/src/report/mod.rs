//! Detailed per-query table and aggregated summary with MRE CDFs.

mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use svg::render_svg;

use crate::driver::QueryRecord;
use crate::model::WorkflowType;
use crate::{Error, Result};

/// Column names of the detailed report, in order.
pub const COLUMNS: [&str; 23] = [
    "id",
    "interaction",
    "viz_name",
    "driver",
    "data_size",
    "think_time",
    "time_req",
    "workflow",
    "start_time",
    "end_time",
    "tr_violated",
    "bin_dims",
    "binning_type",
    "agg_type",
    "bins_ofm",
    "bins_delivered",
    "bins_in_gt",
    "rel_error_avg",
    "rel_error_stdev",
    "missing_bins",
    "cosine_distance",
    "margin_avg",
    "margin_stdev",
];

/// Error levels at which the truncated CDF is evaluated.
pub const CDF_LEVELS: usize = 200;

fn real(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_default()
}

fn row(r: &QueryRecord) -> [String; 23] {
    [
        r.id.to_string(),
        r.interaction.to_string(),
        r.viz_name.clone(),
        r.driver.clone(),
        r.data_size.clone(),
        r.think_time.to_string(),
        r.time_req.to_string(),
        r.workflow.clone(),
        r.start_time.to_string(),
        r.end_time.to_string(),
        if r.tr_violated { "TRUE" } else { "FALSE" }.to_string(),
        r.bin_dims.to_string(),
        r.binning_type.clone(),
        r.agg_type.clone(),
        r.bins_ofm.to_string(),
        r.bins_delivered.to_string(),
        r.bins_in_gt.to_string(),
        real(r.rel_error_avg),
        real(r.rel_error_stdev),
        real(r.missing_bins),
        real(r.cosine_distance),
        real(r.margin_avg),
        real(r.margin_stdev),
    ]
}

/// Writes the detailed report. Reals are rounded to two decimals and
/// undefined values are left empty.
pub fn write_detailed<W: io::Write>(records: &[QueryRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COLUMNS)?;
    for r in records {
        w.write_record(row(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn detailed_csv(records: &[QueryRecord]) -> String {
    let mut buf = Vec::new();
    write_detailed(records, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("utf-8")
}

/// Parses a detailed report. Fields that only exist in the JSON form are
/// left at their defaults.
pub fn read_detailed<R: io::Read>(reader: R) -> Result<Vec<QueryRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(COLUMNS) {
        return Err(Error::spec(format!(
            "unexpected detailed report header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |col: &str| Error::spec(format!("record {line}: bad value in `{col}`"));
        let int = |i: usize| -> Result<u64> { rec[i].parse().map_err(|_| bad(COLUMNS[i])) };
        let opt = |i: usize| -> Result<Option<f64>> {
            match &rec[i] {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(COLUMNS[i])),
            }
        };
        out.push(QueryRecord {
            id: int(0)? as usize,
            interaction: int(1)? as usize,
            viz_name: rec[2].to_string(),
            driver: rec[3].to_string(),
            data_size: rec[4].to_string(),
            think_time: int(5)?,
            time_req: int(6)?,
            workflow: rec[7].to_string(),
            start_time: int(8)?,
            end_time: int(9)?,
            tr_violated: match &rec[10] {
                "TRUE" | "true" => true,
                "FALSE" | "false" => false,
                _ => return Err(bad(COLUMNS[10])),
            },
            bin_dims: int(11)? as usize,
            binning_type: rec[12].to_string(),
            agg_type: rec[13].to_string(),
            bins_ofm: int(14)? as usize,
            bins_delivered: int(15)? as usize,
            bins_in_gt: int(16)? as usize,
            rel_error_avg: opt(17)?,
            rel_error_stdev: opt(18)?,
            missing_bins: opt(19)?,
            cosine_distance: opt(20)?,
            margin_avg: opt(21)?,
            margin_stdev: opt(22)?,
            spurious_bins: 0,
            excluded_zero_truth: 0,
            smape: None,
            bias: None,
            progress: None,
            error: None,
        });
    }
    Ok(out)
}

pub fn read_detailed_file(path: impl AsRef<Path>) -> Result<Vec<QueryRecord>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::file(path, e))?;
    read_detailed(file)
}

/// Data preparation time of one adapter on one dataset size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepTime {
    pub driver: String,
    pub data_size: String,
    pub seconds: f64,
}

/// Sidecar written next to a records CSV: full-precision records plus the
/// preparation times of the run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunArtifacts {
    pub prep_times: Vec<PrepTime>,
    pub records: Vec<QueryRecord>,
}

impl RunArtifacts {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::file(path, e))
    }
}

/// One (adapter, data size, TR, workflow type) group of the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub driver: String,
    pub data_size: String,
    /// Milliseconds.
    pub time_req: u64,
    pub workflow_type: String,
    pub queries: usize,
    pub tr_violation_rate: f64,
    pub mean_missing_bins: Option<f64>,
    /// Queries on time with a defined MRE; the CDF's population.
    pub mre_samples: usize,
    /// `(error level, fraction of MREs <= level)` on [0, 1].
    pub mre_cdf: Vec<(f64, f64)>,
    pub area_above_curve: Option<f64>,
    pub prep_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub cells: Vec<SummaryCell>,
    pub prep_times: Vec<PrepTime>,
}

/// Empirical CDF of `errors` at [`CDF_LEVELS`] evenly spaced levels on
/// [0, 1]. Errors above 1 count in the denominator only.
pub fn mre_cdf(errors: &[f64]) -> Vec<(f64, f64)> {
    if errors.is_empty() {
        return Vec::new();
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    (0..CDF_LEVELS)
        .map(|i| {
            let level = i as f64 / (CDF_LEVELS - 1) as f64;
            let below = sorted.partition_point(|&e| e <= level);
            (level, below as f64 / n)
        })
        .collect()
}

/// `1 - integral of the CDF over [0, 1]`, trapezoidal.
pub fn area_above_curve(cdf: &[(f64, f64)]) -> Option<f64> {
    if cdf.len() < 2 {
        return None;
    }
    let integral: f64 = cdf
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum();
    Some((1.0 - integral).clamp(0.0, 1.0))
}

pub fn workflow_type_label(workflow: &str) -> String {
    WorkflowType::from_workflow_name(workflow)
        .map(|t| t.as_str().to_string())
        .unwrap_or_else(|| "other".into())
}

/// Groups records by adapter, data size, TR and workflow type. TR-violating
/// queries count towards the violation rate and missing bins but are left
/// out of the MRE distribution.
pub fn summarize(records: &[QueryRecord], prep_times: &[PrepTime]) -> Summary {
    let mut groups: BTreeMap<(String, String, u64, String), Vec<&QueryRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.driver.clone(), r.data_size.clone(), r.time_req, workflow_type_label(&r.workflow)))
            .or_default()
            .push(r);
    }
    let cells = groups
        .into_iter()
        .map(|((driver, data_size, time_req, workflow_type), rs)| {
            let violated = rs.iter().filter(|r| r.tr_violated).count();
            let missing: Vec<f64> = rs.iter().filter_map(|r| r.missing_bins).collect();
            let mres: Vec<f64> = rs
                .iter()
                .filter(|r| !r.tr_violated)
                .filter_map(|r| r.rel_error_avg)
                .collect();
            let cdf = mre_cdf(&mres);
            let prep_time = prep_times
                .iter()
                .find(|p| p.driver == driver && p.data_size == data_size)
                .map(|p| p.seconds);
            SummaryCell {
                queries: rs.len(),
                tr_violation_rate: violated as f64 / rs.len() as f64,
                mean_missing_bins: (!missing.is_empty())
                    .then(|| missing.iter().sum::<f64>() / missing.len() as f64),
                mre_samples: mres.len(),
                area_above_curve: area_above_curve(&cdf),
                mre_cdf: cdf,
                prep_time,
                driver,
                data_size,
                time_req,
                workflow_type,
            }
        })
        .collect();
    Summary {
        cells,
        prep_times: prep_times.to_vec(),
    }
}

/// Writes `detailed.csv`, `detailed.json`, `summary.json` and `summary.svg`
/// into `dir`.
pub fn write_report(dir: impl AsRef<Path>, records: &[QueryRecord], prep_times: &[PrepTime]) -> Result<Summary> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    let path = dir.join("detailed.csv");
    write_detailed(records, fs::File::create(&path).map_err(|e| Error::file(&path, e))?)?;
    RunArtifacts {
        prep_times: prep_times.to_vec(),
        records: records.to_vec(),
    }
    .write(dir.join("detailed.json"))?;
    let summary = summarize(records, prep_times);
    let path = dir.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(&summary)?).map_err(|e| Error::file(&path, e))?;
    let path = dir.join("summary.svg");
    fs::write(&path, render_svg(&summary)).map_err(|e| Error::file(&path, e))?;
    Ok(summary)
}
