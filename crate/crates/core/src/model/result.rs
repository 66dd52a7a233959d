use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::BinKey;

/// Per-bin value: the (possibly approximate) estimate and an optional margin
/// of error. An infinite margin means the engine cannot bound the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinValue {
    pub estimate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

impl BinValue {
    pub fn exact(estimate: f64) -> Self {
        BinValue {
            estimate,
            margin: None,
        }
    }

    pub fn with_margin(estimate: f64, margin: f64) -> Self {
        BinValue {
            estimate,
            margin: Some(margin),
        }
    }
}

/// Result of one aggregate query.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultTable {
    pub bins: BTreeMap<BinKey, BinValue>,
    /// Fraction of the input consumed, in `[0, 1]`.
    pub progress: f64,
    /// Unix epoch milliseconds.
    pub produced_at: u64,
}

impl ResultTable {
    pub fn new(bins: BTreeMap<BinKey, BinValue>, progress: f64) -> Self {
        ResultTable {
            bins,
            progress: progress.clamp(0.0, 1.0),
            produced_at: epoch_ms(SystemTime::now()),
        }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn has_margins(&self) -> bool {
        self.bins.values().any(|b| b.margin.is_some())
    }

    pub fn estimate(&self, key: &BinKey) -> Option<f64> {
        self.bins.get(key).map(|b| b.estimate)
    }
}

pub fn epoch_ms(t: SystemTime) -> u64 {
    t.duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}
