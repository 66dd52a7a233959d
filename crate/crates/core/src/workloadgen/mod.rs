//! Workflow generation from per-type Markov chains over interaction kinds.

pub mod chain;
pub mod profile;
mod validate;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use chain::{sample_restricted, Kind, TransitionTable};
pub use profile::{quantile_range, sample_filter, ColumnStats, DataProfile, WidthRange};
pub use validate::{validate, Violation};

use crate::model::{
    AggregateFn, AggregateSpec, BinningSpec, Condition, FilterPredicate, Interaction, VizGraph,
    VizSpec, Workflow, WorkflowType,
};
use crate::schema::ColumnDomain;
use crate::{Error, Result};

pub const DEFAULT_INTERACTIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Length {
    /// Exactly this many interactions; stop is never sampled and the
    /// type's linking plan is completed within the budget.
    Count(usize),
    /// Run the chain until it reaches stop, capped at `max` interactions.
    StopDriven { max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub name: String,
    pub workflow_type: WorkflowType,
    pub length: Length,
    pub rng_seed: u64,
    /// Inclusive range the linking fan-out `N` is drawn from.
    pub fan_out: (usize, usize),
    pub aggregates: Vec<AggregateFn>,
    pub width: WidthRange,
    /// Inclusive episode length range for mixed workflows.
    pub episode: (usize, usize),
    /// Overrides the default chain for the workflow type.
    pub table: Option<TransitionTable>,
}

impl GenerationConfig {
    pub fn new(name: impl Into<String>, workflow_type: WorkflowType, rng_seed: u64) -> Self {
        GenerationConfig {
            name: name.into(),
            workflow_type,
            length: Length::Count(DEFAULT_INTERACTIONS),
            rng_seed,
            fan_out: (2, 4),
            aggregates: vec![AggregateFn::Count, AggregateFn::Avg],
            width: WidthRange::default(),
            episode: (4, 8),
            table: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Generation(m.to_string()));
        match self.length {
            Length::Count(0) | Length::StopDriven { max: 0 } => return bad("interaction count must be >= 1"),
            _ => {}
        }
        if self.fan_out.0 < 2 || self.fan_out.0 > self.fan_out.1 {
            return bad("fan-out range must satisfy 2 <= min <= max");
        }
        if self.episode.0 < 1 || self.episode.0 > self.episode.1 {
            return bad("episode range must satisfy 1 <= min <= max");
        }
        if self.aggregates.is_empty() {
            return bad("at least one aggregate function is required");
        }
        if let Some(t) = &self.table {
            t.validate()?;
        }
        Ok(())
    }
}

/// Interactions needed to complete a linking plan from scratch.
fn plan_cost(ty: WorkflowType, n: usize) -> usize {
    match ty {
        WorkflowType::Sequential | WorkflowType::NToOne => 1 + 2 * n,
        WorkflowType::OneToN => 2 + 2 * n,
        _ => 0,
    }
}

struct Generator<'a> {
    profile: &'a DataProfile,
    config: &'a GenerationConfig,
    table: TransitionTable,
    rng: ChaCha8Rng,
    graph: VizGraph,
    interactions: Vec<Interaction>,
    next_id: usize,
    /// Chain tail (sequential) or hub (1:N, N:1) of the current pattern.
    anchor: Option<String>,
    /// Viz created by the previous interaction, still unlinked.
    fresh: Option<String>,
    pattern: WorkflowType,
    episode_left: usize,
    plan_n: usize,
    plan_done: bool,
}

impl<'a> Generator<'a> {
    fn emit(&mut self, i: Interaction) -> Result<()> {
        let dirty = self.graph.apply(&i)?;
        self.fresh = match &i {
            Interaction::Create { viz } => Some(viz.name.clone()),
            _ => None,
        };
        self.interactions.push(i);
        if !self.plan_done {
            self.plan_done = match self.pattern {
                WorkflowType::Sequential => self.chain_links() >= self.plan_n,
                WorkflowType::OneToN => {
                    dirty.len() >= self.plan_n && self.anchor_degree() >= self.plan_n
                }
                WorkflowType::NToOne => self.anchor_degree() >= self.plan_n,
                _ => true,
            };
        }
        Ok(())
    }

    fn anchor_degree(&self) -> usize {
        let Some(a) = &self.anchor else { return 0 };
        match self.pattern {
            WorkflowType::NToOne => self.graph.parents(a).count(),
            _ => self.graph.children(a).count(),
        }
    }

    fn chain_links(&self) -> usize {
        self.anchor
            .as_ref()
            .and_then(|a| self.graph.ancestors(a).ok())
            .map_or(0, |s| s.len())
    }

    fn deficit(&self) -> usize {
        if self.plan_done {
            return 0;
        }
        let start = usize::from(self.anchor.is_none());
        let have = match self.pattern {
            WorkflowType::Sequential => self.chain_links(),
            _ => self.anchor_degree(),
        };
        let extra = usize::from(self.pattern == WorkflowType::OneToN);
        start + 2 * self.plan_n.saturating_sub(have) + extra
    }

    fn can_link(&self) -> bool {
        self.pattern != WorkflowType::Independent
            && matches!((&self.fresh, &self.anchor), (Some(f), Some(a)) if f != a)
    }

    fn feasible(&self, k: Kind, allow_stop: bool) -> bool {
        match k {
            Kind::Create => true,
            Kind::Filter | Kind::Select | Kind::Discard => !self.graph.is_empty(),
            Kind::Link => self.can_link(),
            Kind::Stop => allow_stop,
        }
    }

    fn forced(&self) -> Kind {
        if self.anchor.is_none() {
            return Kind::Create;
        }
        let have = match self.pattern {
            WorkflowType::Sequential => self.chain_links(),
            _ => self.anchor_degree(),
        };
        if have < self.plan_n {
            if self.can_link() {
                Kind::Link
            } else {
                Kind::Create
            }
        } else {
            Kind::Filter
        }
    }

    fn step(&mut self, kind: Kind, forced: bool) -> Result<()> {
        match kind {
            Kind::Create => {
                let viz = self.sample_viz()?;
                let name = viz.name.clone();
                self.emit(Interaction::Create { viz })?;
                if self.anchor.is_none() && self.pattern != WorkflowType::Independent {
                    self.anchor = Some(name);
                }
            }
            Kind::Link => {
                let new = self.fresh.clone().expect("link follows create");
                let anchor = self.anchor.clone().expect("link needs an anchor");
                let (source, target) = match self.pattern {
                    WorkflowType::NToOne => (new.clone(), anchor),
                    _ => (anchor, new.clone()),
                };
                if self.pattern == WorkflowType::Sequential {
                    self.anchor = Some(new);
                }
                self.emit(Interaction::Link { source, target })?;
            }
            Kind::Filter | Kind::Select => {
                let viz = if forced {
                    self.anchor.clone().expect("forced filter targets the anchor")
                } else {
                    self.pick_target()
                };
                if kind == Kind::Filter {
                    let filter = self.sample_predicate()?;
                    self.emit(Interaction::Filter { viz, filter })?;
                } else {
                    let selection = self.sample_selection(&viz)?;
                    self.emit(Interaction::Select { viz, selection })?;
                }
            }
            Kind::Discard => {
                let viz = self.pick_discard();
                let parent = self.graph.parents(&viz).next().map(str::to_string);
                let was_anchor = self.anchor.as_deref() == Some(viz.as_str());
                self.emit(Interaction::Discard { viz })?;
                if was_anchor {
                    // without a chain parent no links are left, so any viz can take over
                    self.anchor = match (self.pattern, parent) {
                        (WorkflowType::Sequential, Some(p)) => Some(p),
                        _ => self.graph.vizs().last().map(|v| v.to_string()),
                    };
                }
            }
            Kind::Stop => unreachable!("stop is not emitted"),
        }
        Ok(())
    }

    fn pick_target(&mut self) -> String {
        if self.pattern == WorkflowType::OneToN && self.rng.random_bool(0.5) {
            if let Some(a) = &self.anchor {
                return a.clone();
            }
        }
        let vizs = self.graph.vizs();
        vizs.choose(&mut self.rng).expect("non-empty").to_string()
    }

    /// Leaves only, so a discard never splits a linked structure. The N:1
    /// hub is kept while anything else can go.
    fn pick_discard(&mut self) -> String {
        let leaves: Vec<String> = self
            .graph
            .vizs()
            .into_iter()
            .filter(|v| self.graph.children(v).next().is_none())
            .map(str::to_string)
            .collect();
        let keep_hub: Vec<String> = leaves
            .iter()
            .filter(|v| {
                !(self.pattern == WorkflowType::NToOne && self.anchor.as_deref() == Some(v.as_str()))
            })
            .cloned()
            .collect();
        let pool = if keep_hub.is_empty() { leaves } else { keep_hub };
        pool.choose(&mut self.rng).expect("a DAG has a leaf").clone()
    }

    fn sample_viz(&mut self) -> Result<VizSpec> {
        let schema = &self.profile.schema;
        let dims = if schema.columns.len() >= 2 && self.rng.random_bool(0.3) { 2 } else { 1 };
        let cols: Vec<_> = schema.columns.choose_multiple(&mut self.rng, dims).cloned().collect();
        let mut binning = Vec::new();
        for c in &cols {
            binning.push(match &c.domain {
                ColumnDomain::Nominal { .. } => BinningSpec::nominal(&c.name),
                ColumnDomain::Quantitative { min, max } => {
                    let ks: &[u32] = if dims == 1 { &[5, 10, 20, 25] } else { &[5, 10] };
                    let k = *ks.choose(&mut self.rng).expect("non-empty");
                    let span = max - min;
                    if span > 0.0 && self.rng.random_bool(0.3) {
                        BinningSpec::fixed_width(&c.name, nice_width(span / f64::from(k)), 0.0)
                    } else {
                        BinningSpec::fixed_count(&c.name, if span > 0.0 { k } else { 1 })
                    }
                }
            });
        }
        let quantitative: Vec<&str> = schema
            .columns
            .iter()
            .filter(|c| c.is_quantitative())
            .map(|c| c.name.as_str())
            .collect();
        let f = *self.config.aggregates.choose(&mut self.rng).expect("validated");
        let agg = match (f, quantitative.choose(&mut self.rng)) {
            (AggregateFn::Count, _) | (_, None) => AggregateSpec::count(),
            (f, Some(c)) => AggregateSpec::over(f, *c),
        };
        let name = format!("viz_{}", self.next_id);
        self.next_id += 1;
        Ok(VizSpec::new(name, binning, agg))
    }

    fn sample_predicate(&mut self) -> Result<FilterPredicate> {
        let col = self
            .profile
            .schema
            .columns
            .choose(&mut self.rng)
            .expect("schema has columns")
            .name
            .clone();
        let stats = self.profile.stats(&col)?;
        Ok(sample_filter(&col, &stats, self.config.width, &mut self.rng))
    }

    /// A brush over the viz's first dimension, snapped to bin edges.
    fn sample_selection(&mut self, viz: &str) -> Result<FilterPredicate> {
        let spec = self.graph.viz(viz)?.binning[0].clone();
        let column = self.profile.schema.column(&spec.column)?.clone();
        let stats = self.profile.stats(&spec.column)?;
        let raw = sample_filter(&spec.column, &stats, self.config.width, &mut self.rng);
        let Some(q) = spec.quantizer(&column) else {
            return Ok(raw);
        };
        let Condition::InRange(lo, hi) = raw.atoms[0].condition else {
            return Ok(raw);
        };
        let (from, _, _) = q.bounds(q.index(lo));
        let (_, to, closed) = q.bounds(q.index(hi));
        Ok(if closed {
            FilterPredicate::new(vec![
                crate::model::Atom::new(&spec.column, Condition::Ge(from)),
                crate::model::Atom::new(&spec.column, Condition::Le(to)),
            ])
        } else {
            FilterPredicate::single(&spec.column, Condition::InRange(from, to))
        })
    }

    fn start_episode(&mut self) {
        let (lo, hi) = self.config.episode;
        self.pattern = *[
            WorkflowType::Independent,
            WorkflowType::Sequential,
            WorkflowType::OneToN,
            WorkflowType::NToOne,
        ]
        .choose(&mut self.rng)
        .expect("non-empty");
        self.episode_left = self.rng.random_range(lo..=hi);
        self.anchor = None;
    }

    fn run(mut self) -> Result<Workflow> {
        let (count, allow_stop, cap) = match self.config.length {
            Length::Count(n) => (Some(n), false, n),
            Length::StopDriven { max } => (None, true, max),
        };
        let mixed = self.config.workflow_type == WorkflowType::Mixed;
        let mut prev: Option<Kind> = None;
        while self.interactions.len() < cap {
            if mixed {
                if self.episode_left == 0 {
                    self.start_episode();
                }
                self.episode_left -= 1;
            }
            let remaining = count.map(|n| n - self.interactions.len());
            // one free step raises the deficit by at most 2 (discarding a linked leaf)
            let forced = !mixed && !self.plan_done && remaining.is_some_and(|r| r <= self.deficit() + 2);
            let kind = if forced {
                self.forced()
            } else {
                let row = match prev {
                    None => self.table.initial,
                    Some(k) => *self.table.row(k),
                };
                let allowed: Vec<bool> =
                    Kind::ALL.iter().map(|&k| self.feasible(k, allow_stop)).collect();
                sample_restricted(&row, |k| allowed[k.index()], &mut self.rng)
                    .unwrap_or(Kind::Create)
            };
            if kind == Kind::Stop {
                break;
            }
            self.step(kind, forced)?;
            prev = Some(kind);
        }
        Ok(Workflow {
            name: self.config.name.clone(),
            workflow_type: self.config.workflow_type,
            interactions: self.interactions,
        })
    }
}

/// Rounds to 1, 2 or 5 times a power of ten.
fn nice_width(x: f64) -> f64 {
    let p = 10f64.powf(x.log10().floor());
    let m = x / p;
    let step = if m < 1.5 {
        1.0
    } else if m < 3.5 {
        2.0
    } else if m < 7.5 {
        5.0
    } else {
        10.0
    };
    step * p
}

pub fn generate(config: &GenerationConfig, profile: &DataProfile) -> Result<Workflow> {
    config.validate()?;
    profile.schema.validate()?;
    if profile.schema.columns.len() < 2 {
        return Err(Error::Generation("schema needs at least 2 columns".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let plan_n = rng.random_range(config.fan_out.0..=config.fan_out.1);
    if let Length::Count(n) = config.length {
        let need = plan_cost(config.workflow_type, plan_n);
        if need > n {
            return Err(Error::Generation(format!(
                "{} workflow with fan-out {plan_n} needs {need} interactions, budget is {n}",
                config.workflow_type
            )));
        }
    }
    let table = config
        .table
        .clone()
        .unwrap_or_else(|| TransitionTable::default_for(config.workflow_type));
    Generator {
        profile,
        config,
        table,
        rng,
        graph: VizGraph::new(),
        interactions: Vec::new(),
        next_id: 0,
        anchor: None,
        fresh: None,
        pattern: config.workflow_type,
        episode_left: 0,
        plan_n,
        plan_done: matches!(config.workflow_type, WorkflowType::Independent | WorkflowType::Mixed),
    }
    .run()
}

/// Seed for the `index`-th workflow of a type, derived from a suite seed.
pub fn derive_seed(seed: u64, ty: WorkflowType, index: usize) -> u64 {
    let tag = WorkflowType::ALL.iter().position(|t| *t == ty).unwrap_or(0) as u64;
    splitmix64(splitmix64(seed) ^ (tag << 48) ^ index as u64)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `per_type` workflows for each requested type, named `<type>_<i>`.
pub fn generate_suite(
    profile: &DataProfile,
    types: &[WorkflowType],
    per_type: usize,
    length: Length,
    seed: u64,
) -> Result<Vec<Workflow>> {
    let mut out = Vec::new();
    for &ty in types {
        for i in 0..per_type {
            let mut cfg = GenerationConfig::new(format!("{}_{i}", ty.slug()), ty, derive_seed(seed, ty, i));
            cfg.length = length;
            out.push(generate(&cfg, profile)?);
        }
    }
    Ok(out)
}
