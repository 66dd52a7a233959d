use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FilterPredicate, VizSpec};
use crate::{Error, Result};

/// One user action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Interaction {
    Create {
        viz: VizSpec,
    },
    Filter {
        viz: String,
        filter: FilterPredicate,
    },
    Select {
        viz: String,
        selection: FilterPredicate,
    },
    Link {
        source: String,
        target: String,
    },
    Discard {
        viz: String,
    },
}

impl Interaction {
    pub fn kind(&self) -> &'static str {
        match self {
            Interaction::Create { .. } => "create",
            Interaction::Filter { .. } => "filter",
            Interaction::Select { .. } => "select",
            Interaction::Link { .. } => "link",
            Interaction::Discard { .. } => "discard",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorkflowType {
    Independent,
    Sequential,
    OneToN,
    NToOne,
    Mixed,
}

impl WorkflowType {
    pub const ALL: [WorkflowType; 5] = [
        WorkflowType::Independent,
        WorkflowType::Sequential,
        WorkflowType::OneToN,
        WorkflowType::NToOne,
        WorkflowType::Mixed,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            WorkflowType::Independent => "independent",
            WorkflowType::Sequential => "sequential",
            WorkflowType::OneToN => "one-to-n",
            WorkflowType::NToOne => "n-to-one",
            WorkflowType::Mixed => "mixed",
        }
    }

    /// Prefix used in generated workflow names, e.g. `one_to_n_3`.
    pub fn slug(&self) -> String {
        self.as_str().replace('-', "_")
    }

    /// Recovers the type from a generated workflow name such as `mixed_2`.
    pub fn from_workflow_name(name: &str) -> Option<Self> {
        let stem = name.trim_end_matches(|c: char| c.is_ascii_digit());
        let stem = stem.strip_suffix('_').unwrap_or(stem);
        Self::ALL.into_iter().find(|t| t.slug() == stem)
    }
}

impl std::str::FromStr for WorkflowType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s || t.slug() == s)
            .ok_or_else(|| Error::spec(format!("unknown workflow type `{s}`")))
    }
}

impl std::fmt::Display for WorkflowType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workflow {
    pub name: String,
    #[serde(rename = "type")]
    pub workflow_type: WorkflowType,
    pub interactions: Vec<Interaction>,
}

impl Workflow {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::file(path, e))
    }

    /// Reads every `*.json` workflow in a directory, sorted by file name.
    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Vec<Self>> {
        let dir = dir.as_ref();
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::file(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        paths.iter().map(Self::read).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AggregateFn, AggregateSpec, BinningSpec};

    #[test]
    fn json_format() {
        let text = r#"{
          "name": "one_to_n_0",
          "type": "one-to-n",
          "interactions": [
            {"kind": "create", "viz": {"name": "viz_0", "binning": [{"column": "carrier"}], "agg": {"fn": "count"}}},
            {"kind": "create", "viz": {"name": "viz_1",
               "binning": [{"column": "dep_delay", "method": "fixed-width", "w": 10, "reference": 0}],
               "agg": {"fn": "avg", "column": "arr_delay"},
               "filter": [{"column": "distance", "op": "<", "value": 500}]}},
            {"kind": "link", "source": "viz_0", "target": "viz_1"},
            {"kind": "select", "viz": "viz_0", "selection": [{"column": "carrier", "op": "=", "value": "AA"}]},
            {"kind": "filter", "viz": "viz_1", "filter": []},
            {"kind": "discard", "viz": "viz_1"}
          ]
        }"#;
        let w: Workflow = serde_json::from_str(text).unwrap();
        assert_eq!(w.workflow_type, WorkflowType::OneToN);
        assert_eq!(w.interactions.len(), 6);
        match &w.interactions[1] {
            Interaction::Create { viz } => {
                assert_eq!(viz.binning[0], BinningSpec::fixed_width("dep_delay", 10.0, 0.0));
                assert_eq!(viz.agg, AggregateSpec::over(AggregateFn::Avg, "arr_delay"));
                assert_eq!(viz.filter.atoms.len(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
        let again: Workflow = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        assert_eq!(again, w);
    }

    #[test]
    fn names_and_slugs() {
        assert_eq!(WorkflowType::from_workflow_name("mixed_2"), Some(WorkflowType::Mixed));
        assert_eq!(
            WorkflowType::from_workflow_name("one_to_n_13"),
            Some(WorkflowType::OneToN)
        );
        assert_eq!(WorkflowType::from_workflow_name("custom"), None);
        assert_eq!("n-to-one".parse::<WorkflowType>().unwrap(), WorkflowType::NToOne);
    }
}
