use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::model::{Interaction, VizGraph, Workflow, WorkflowType};
use crate::schema::Schema;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Interaction index, when the problem is local to one interaction.
    pub index: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "interaction {i}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn topology(ty: WorkflowType, g: &VizGraph) -> Option<String> {
    let edges: Vec<(&str, &str)> = g.edges().collect();
    match ty {
        WorkflowType::Independent if !edges.is_empty() => {
            Some("independent workflows must not link visualizations".into())
        }
        WorkflowType::Sequential => {
            let nodes: BTreeSet<&str> = edges.iter().flat_map(|(s, t)| [*s, *t]).collect();
            let path = nodes
                .iter()
                .all(|n| g.children(n).count() <= 1 && g.parents(n).count() <= 1);
            (!edges.is_empty() && !(path && edges.len() + 1 == nodes.len()))
                .then(|| "sequential links must form a single path".into())
        }
        WorkflowType::OneToN => {
            let sources: BTreeSet<&str> = edges.iter().map(|e| e.0).collect();
            (sources.len() > 1).then(|| "1:N links must share one source".into())
        }
        WorkflowType::NToOne => {
            let targets: BTreeSet<&str> = edges.iter().map(|e| e.1).collect();
            (targets.len() > 1).then(|| "N:1 links must share one target".into())
        }
        _ => None,
    }
}

/// Replays the workflow on a fresh graph and reports everything that would
/// fail: unknown or discarded vizs, cycles, schema mismatches and links that
/// break the workflow type's topology. Empty means the workflow is valid.
pub fn validate(workflow: &Workflow, schema: &Schema) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut g = VizGraph::new();
    for (index, interaction) in workflow.interactions.iter().enumerate() {
        let mut push = |message: String| {
            out.push(Violation {
                index: Some(index),
                message,
            })
        };
        let schema_check = match interaction {
            Interaction::Create { viz } => viz.validate(schema),
            Interaction::Filter { filter, .. } => filter.validate(schema),
            Interaction::Select { selection, .. } => selection.validate(schema),
            _ => Ok(()),
        };
        if let Err(e) = schema_check {
            push(e.to_string());
            continue;
        }
        if let Err(e) = g.apply(interaction) {
            push(e.to_string());
            continue;
        }
        if let Some(m) = topology(workflow.workflow_type, &g) {
            push(m);
        }
    }
    out
}
