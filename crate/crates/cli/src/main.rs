use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use explorebench::adapters::{self, Adapter, DatasetSource};
use explorebench::datagen::{self, seed, StarSchemaSpec};
use explorebench::driver::{run_suite, size_label, BenchmarkSettings, GroundTruth, DEFAULT_TIME_REQUIREMENTS};
use explorebench::report::{self, PrepTime, RunArtifacts};
use explorebench::workloadgen::{self, validate, DataProfile, Length};
use explorebench::{Schema, Table, Workflow, WorkflowType};

#[derive(Parser)]
#[command(name = "explorebench", version, about = "Benchmark harness for interactive data exploration backends")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the synthetic flights seed table.
    Seed {
        #[arg(long, default_value_t = seed::DEFAULT_SEED_ROWS)]
        rows: usize,
        #[arg(long, default_value_t = 0)]
        rng: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scale a seed CSV to `rows` rows with a Gaussian copula.
    Datagen {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long)]
        rows: usize,
        /// Output CSV, or the output directory when `--schema` is given.
        #[arg(long)]
        out: PathBuf,
        /// Star schema spec; the result is split into fact and dimension CSVs.
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        rng: u64,
        #[arg(long)]
        sample_size: Option<usize>,
    },
    /// Write the schema and value statistics of a dataset as JSON.
    Profile {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate workflow JSON files.
    Workloadgen {
        /// Profile written by `profile`, or a bare schema JSON.
        #[arg(long)]
        schema: PathBuf,
        /// Workflow type, a comma separated list, or `all`.
        #[arg(long = "type", default_value = "all")]
        workflow_type: String,
        /// Interactions per workflow. Without it, workflows run until the
        /// chain stops (at most 100 interactions).
        #[arg(long)]
        count: Option<usize>,
        /// Workflows per type.
        #[arg(long, default_value_t = 3)]
        workflows: usize,
        #[arg(long, default_value_t = 0)]
        rng: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay workflows against an adapter and record every query.
    Run {
        /// exact, progressive or subprocess:<cmd>
        #[arg(long)]
        adapter: String,
        /// CSV file or star schema directory.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        workflows: PathBuf,
        /// Time requirements in seconds, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_TIME_REQUIREMENTS)]
        tr: Vec<f64>,
        /// Think time in seconds.
        #[arg(long, default_value_t = 1.0)]
        think: f64,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        /// Seed for adapters that sample.
        #[arg(long, default_value_t = 0)]
        rng: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize one or more records CSVs.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        records: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Seed { rows, rng, out } => {
            seed::flights(rows, rng).write_csv(&out)?;
            eprintln!("wrote {rows} rows to {}", out.display());
        }
        Command::Datagen {
            seed,
            rows,
            out,
            schema,
            rng,
            sample_size,
        } => datagen_cmd(&seed, rows, &out, schema.as_deref(), rng, sample_size)?,
        Command::Profile { dataset, out } => {
            let source = DatasetSource::open(&dataset);
            let table = source.load()?;
            DataProfile::from_table(&table, source.name()).write(&out)?;
        }
        Command::Workloadgen {
            schema,
            workflow_type,
            count,
            workflows,
            rng,
            out,
        } => workloadgen_cmd(&schema, &workflow_type, count, workflows, rng, &out)?,
        Command::Run {
            adapter,
            dataset,
            workflows,
            tr,
            think,
            confidence,
            rng,
            out,
        } => run_cmd(&adapter, &dataset, &workflows, &tr, think, confidence, rng, &out)?,
        Command::Report { records, out } => report_cmd(&records, &out)?,
    }
    Ok(())
}

fn datagen_cmd(
    seed: &Path,
    rows: usize,
    out: &Path,
    star: Option<&Path>,
    rng: u64,
    sample_size: Option<usize>,
) -> Result<()> {
    let table = Table::read_csv(seed).with_context(|| format!("reading seed {}", seed.display()))?;
    let sample = sample_size.unwrap_or_else(|| datagen::default_sample_size(table.rows()));
    let model = datagen::fit(&table, sample, rng)?;
    match star {
        None => {
            let file = fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
            model.write_csv(rows, rng, BufWriter::new(file))?;
        }
        Some(spec) => {
            let spec = StarSchemaSpec::read(spec)?;
            let synthetic = model.synthesize(rows, rng);
            datagen::normalize(&synthetic, &spec)?.write_dir(out)?;
        }
    }
    if model.jitter > 0.0 {
        eprintln!("correlation matrix regularized with jitter {:e}", model.jitter);
    }
    Ok(())
}

fn read_profile(path: &Path) -> Result<DataProfile> {
    if let Ok(p) = DataProfile::read(path) {
        return Ok(p);
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let schema: Schema = serde_json::from_str(&text).with_context(|| format!("{} is neither a profile nor a schema", path.display()))?;
    schema.validate()?;
    Ok(DataProfile::from_schema(schema))
}

fn workloadgen_cmd(
    schema: &Path,
    workflow_type: &str,
    count: Option<usize>,
    per_type: usize,
    rng: u64,
    out: &Path,
) -> Result<()> {
    let profile = read_profile(schema)?;
    let types: Vec<WorkflowType> = if workflow_type == "all" {
        WorkflowType::ALL.to_vec()
    } else {
        workflow_type
            .split(',')
            .map(|t| t.trim().parse())
            .collect::<explorebench::Result<_>>()?
    };
    let length = match count {
        Some(n) => Length::Count(n),
        None => Length::StopDriven { max: 100 },
    };
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for w in workloadgen::generate_suite(&profile, &types, per_type, length, rng)? {
        let problems = validate(&w, &profile.schema);
        if !problems.is_empty() {
            bail!("generated workflow {} is invalid: {}", w.name, problems[0]);
        }
        w.write(out.join(format!("{}.json", w.name)))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_cmd(
    adapter_name: &str,
    dataset: &Path,
    workflows: &Path,
    trs: &[f64],
    think: f64,
    confidence: f64,
    rng: u64,
    out: &Path,
) -> Result<()> {
    if trs.iter().any(|t| !(*t > 0.0)) {
        bail!("time requirements must be positive");
    }
    if !(think >= 0.0) {
        bail!("think time must be non-negative");
    }
    let source = DatasetSource::open(dataset);
    let table = source.load()?;
    let mut schema = table.schema(source.name());
    schema.rows = table.rows() as u64;
    let workflows = Workflow::read_dir(workflows)?;
    if workflows.is_empty() {
        bail!("no workflow files found");
    }
    for w in &workflows {
        if let Some(v) = validate(w, &schema).first() {
            bail!("workflow {} does not fit the dataset: {v}", w.name);
        }
    }

    let mut adapter = adapters::from_name(adapter_name, rng)?;
    let prep = adapter.setup(&source, &schema)?;
    let adapter: Arc<dyn Adapter> = Arc::from(adapter);
    let truth = GroundTruth::new(table.clone(), schema.clone());
    let mut settings = BenchmarkSettings::new(Duration::from_secs_f64(trs[0]), source.name(), schema.rows);
    settings.think_time = Duration::from_secs_f64(think);
    settings.confidence = confidence;
    settings.use_joins = matches!(source, DatasetSource::Star(_));
    settings.validate()?;
    let trs: Vec<Duration> = trs.iter().map(|t| Duration::from_secs_f64(*t)).collect();

    let started = Instant::now();
    let suite = run_suite(&trs, &settings, &workflows, &adapter, &truth, &schema);
    for f in &suite.failures {
        eprintln!(
            "workflow {} at TR {:?} aborted: {}",
            f.workflow, f.time_requirement, f.message
        );
    }
    let file = fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    report::write_detailed(&suite.records, BufWriter::new(file))?;
    RunArtifacts {
        prep_times: vec![PrepTime {
            driver: adapter.name().to_string(),
            data_size: size_label(schema.rows),
            seconds: prep.as_secs_f64(),
        }],
        records: suite.records.clone(),
    }
    .write(out.with_extension("json"))?;
    eprintln!(
        "{} queries in {:.1} s, {} violations",
        suite.records.len(),
        started.elapsed().as_secs_f64(),
        suite.records.iter().filter(|r| r.tr_violated).count()
    );
    Ok(())
}

fn report_cmd(paths: &[PathBuf], out: &Path) -> Result<()> {
    let mut records = Vec::new();
    let mut prep = Vec::new();
    for p in paths {
        records.extend(report::read_detailed_file(p).with_context(|| format!("reading {}", p.display()))?);
        let sidecar = p.with_extension("json");
        if sidecar.is_file() {
            prep.extend(RunArtifacts::read(&sidecar)?.prep_times);
        }
    }
    let summary = report::write_report(out, &records, &prep)?;
    eprintln!("{} cells written to {}", summary.cells.len(), out.display());
    Ok(())
}
