use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{FilterPredicate, Interaction, VizSpec};
use crate::{Error, Result};

#[derive(Debug, Clone)]
struct Node {
    spec: VizSpec,
    created: u64,
}

/// Live visualizations and the directed links between them.
///
/// A link `source -> target` makes the target's query inherit the source's
/// own filter and selection (and, transitively, those of the source's
/// ancestors). The graph is kept acyclic.
#[derive(Debug, Clone)]
pub struct VizGraph {
    nodes: BTreeMap<String, Node>,
    edges: BTreeSet<(String, String)>,
    retired: HashSet<String>,
    next_order: u64,
    /// Whether a selection re-renders the source viz (its highlight layer).
    pub rerender_selection_source: bool,
}

impl Default for VizGraph {
    fn default() -> Self {
        VizGraph {
            nodes: BTreeMap::new(),
            edges: BTreeSet::new(),
            retired: HashSet::new(),
            next_order: 0,
            rerender_selection_source: true,
        }
    }
}

impl VizGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, viz: &str) -> bool {
        self.nodes.contains_key(viz)
    }

    pub fn viz(&self, name: &str) -> Result<&VizSpec> {
        self.node(name).map(|n| &n.spec)
    }

    /// Live viz names in creation order.
    pub fn vizs(&self) -> Vec<&str> {
        let mut v: Vec<_> = self.nodes.iter().collect();
        v.sort_by_key(|(_, n)| n.created);
        v.into_iter().map(|(k, _)| k.as_str()).collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.iter().map(|(s, t)| (s.as_str(), t.as_str()))
    }

    fn node(&self, name: &str) -> Result<&Node> {
        self.nodes
            .get(name)
            .ok_or_else(|| Error::UnknownViz(name.to_string()))
    }

    fn node_mut(&mut self, name: &str) -> Result<&mut Node> {
        self.nodes
            .get_mut(name)
            .ok_or_else(|| Error::UnknownViz(name.to_string()))
    }

    pub fn children(&self, viz: &str) -> impl Iterator<Item = &str> {
        let viz = viz.to_string();
        self.edges
            .iter()
            .filter(move |(s, _)| *s == viz)
            .map(|(_, t)| t.as_str())
    }

    pub fn parents(&self, viz: &str) -> impl Iterator<Item = &str> {
        let viz = viz.to_string();
        self.edges
            .iter()
            .filter(move |(_, t)| *t == viz)
            .map(|(s, _)| s.as_str())
    }

    fn walk<'a, F, I>(&'a self, start: &str, next: F) -> BTreeSet<String>
    where
        F: Fn(&'a Self, String) -> I,
        I: Iterator<Item = &'a str>,
    {
        let mut seen = BTreeSet::new();
        let mut stack = vec![start.to_string()];
        while let Some(v) = stack.pop() {
            for n in next(self, v) {
                if seen.insert(n.to_string()) {
                    stack.push(n.to_string());
                }
            }
        }
        seen
    }

    /// Every viz reachable from `viz` by following links backwards.
    pub fn ancestors(&self, viz: &str) -> Result<BTreeSet<String>> {
        self.node(viz)?;
        Ok(self.walk(viz, |g, v| g.parents(&v).collect::<Vec<_>>().into_iter()))
    }

    /// Every viz reachable from `viz` by following links forwards.
    pub fn descendants(&self, viz: &str) -> Result<BTreeSet<String>> {
        self.node(viz)?;
        Ok(self.walk(viz, |g, v| g.children(&v).collect::<Vec<_>>().into_iter()))
    }

    fn by_creation(&self, names: impl IntoIterator<Item = String>) -> Vec<String> {
        let mut v: Vec<String> = names.into_iter().collect();
        v.sort_by_key(|n| self.nodes[n].created);
        v
    }

    /// The predicate the viz's query must apply: its own filter plus the
    /// filter and selection of every upstream viz, AND-ed. Atoms are grouped
    /// by viz creation order and sorted by column name within a viz.
    pub fn effective_filter(&self, viz: &str) -> Result<FilterPredicate> {
        let mut contributors = self.ancestors(viz)?;
        contributors.insert(viz.to_string());
        let mut out = FilterPredicate::default();
        for name in self.by_creation(contributors) {
            let spec = &self.nodes[&name].spec;
            let mut atoms = spec.filter.atoms.clone();
            if name != viz {
                atoms.extend(spec.selection.atoms.iter().cloned());
            }
            atoms.sort_by(|a, b| a.column.cmp(&b.column));
            out.atoms.extend(atoms);
        }
        Ok(out)
    }

    /// Vizs whose query changes if `interaction` is applied, without mutating.
    pub fn dirty_set(&self, interaction: &Interaction) -> Result<Vec<String>> {
        self.clone().apply(interaction)
    }

    /// Applies the interaction and returns the vizs that must re-query, in
    /// creation order.
    pub fn apply(&mut self, interaction: &Interaction) -> Result<Vec<String>> {
        match interaction {
            Interaction::Create { viz } => {
                if self.nodes.contains_key(&viz.name) || self.retired.contains(&viz.name) {
                    return Err(Error::DuplicateViz(viz.name.clone()));
                }
                self.nodes.insert(
                    viz.name.clone(),
                    Node {
                        spec: viz.clone(),
                        created: self.next_order,
                    },
                );
                self.next_order += 1;
                Ok(vec![viz.name.clone()])
            }
            Interaction::Filter { viz, filter } => {
                self.node_mut(viz)?.spec.filter = filter.clone();
                let mut dirty = self.descendants(viz)?;
                dirty.insert(viz.clone());
                Ok(self.by_creation(dirty))
            }
            Interaction::Select { viz, selection } => {
                self.node_mut(viz)?.spec.selection = selection.clone();
                let mut dirty = self.descendants(viz)?;
                if self.rerender_selection_source {
                    dirty.insert(viz.clone());
                }
                Ok(self.by_creation(dirty))
            }
            Interaction::Link { source, target } => {
                self.link(source, target)?;
                let mut dirty = self.descendants(target)?;
                dirty.insert(target.clone());
                Ok(self.by_creation(dirty))
            }
            Interaction::Discard { viz } => {
                self.discard(viz)?;
                Ok(Vec::new())
            }
        }
    }

    pub fn link(&mut self, source: &str, target: &str) -> Result<()> {
        self.node(source)?;
        self.node(target)?;
        if source == target || self.descendants(target)?.contains(source) {
            return Err(Error::Cycle {
                source_viz: source.to_string(),
                target: target.to_string(),
            });
        }
        self.edges.insert((source.to_string(), target.to_string()));
        Ok(())
    }

    pub fn discard(&mut self, viz: &str) -> Result<()> {
        self.nodes
            .remove(viz)
            .ok_or_else(|| Error::UnknownViz(viz.to_string()))?;
        self.edges.retain(|(s, t)| s != viz && t != viz);
        self.retired.insert(viz.to_string());
        Ok(())
    }
}
