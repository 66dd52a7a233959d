use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::WorkflowType;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Create,
    Filter,
    Select,
    Link,
    Discard,
    Stop,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::Create,
        Kind::Filter,
        Kind::Select,
        Kind::Link,
        Kind::Discard,
        Kind::Stop,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Create => "create",
            Kind::Filter => "filter",
            Kind::Select => "select",
            Kind::Link => "link",
            Kind::Discard => "discard",
            Kind::Stop => "stop",
        }
    }
}

pub type Row = [f64; 6];

/// Markov chain over interaction kinds. Rows and the initial distribution are
/// indexed by [`Kind::index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionTable {
    pub initial: Row,
    pub rows: [Row; 6],
}

const STOP: Row = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0];

impl TransitionTable {
    /// Shipped defaults. These are artifact choices: the original
    /// probabilities were never published.
    pub fn default_for(ty: WorkflowType) -> Self {
        let initial = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        match ty {
            WorkflowType::Independent => {
                let active = [0.30, 0.55, 0.0, 0.0, 0.10, 0.05];
                TransitionTable {
                    initial,
                    rows: [
                        active,
                        active,
                        active,
                        active,
                        [0.95, 0.0, 0.0, 0.0, 0.0, 0.05],
                        STOP,
                    ],
                }
            }
            WorkflowType::Sequential | WorkflowType::OneToN | WorkflowType::NToOne => {
                let after_query = [0.35, 0.28, 0.27, 0.0, 0.09, 0.01];
                TransitionTable {
                    initial,
                    rows: [
                        [0.12, 0.17, 0.10, 0.60, 0.0, 0.01],
                        after_query,
                        after_query,
                        [0.33, 0.34, 0.32, 0.0, 0.0, 0.01],
                        [0.99, 0.0, 0.0, 0.0, 0.0, 0.01],
                        STOP,
                    ],
                }
            }
            WorkflowType::Mixed => {
                let after_query = [0.33, 0.32, 0.18, 0.0, 0.12, 0.05];
                TransitionTable {
                    initial,
                    rows: [
                        [0.15, 0.30, 0.10, 0.40, 0.0, 0.05],
                        after_query,
                        after_query,
                        [0.35, 0.35, 0.25, 0.0, 0.0, 0.05],
                        [0.95, 0.0, 0.0, 0.0, 0.0, 0.05],
                        STOP,
                    ],
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |row: &Row, what: &str| {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::spec(format!("{what} must be a probability vector")));
            }
            Ok(())
        };
        check(&self.initial, "initial distribution")?;
        for k in Kind::ALL {
            check(&self.rows[k.index()], &format!("row `{}`", k.as_str()))?;
        }
        if self.rows[Kind::Stop.index()] != STOP {
            return Err(Error::spec("stop must be absorbing"));
        }
        if self.initial[Kind::Stop.index()] > 0.0 {
            return Err(Error::spec("a workflow cannot start with stop"));
        }
        Ok(())
    }

    pub fn row(&self, from: Kind) -> &Row {
        &self.rows[from.index()]
    }

    /// Stationary distribution of the chain in which stop restarts from the
    /// initial distribution, renormalized over emitted (non-stop) kinds.
    pub fn emitted_stationary(&self) -> [f64; 5] {
        let mut p = self.rows;
        p[Kind::Stop.index()] = self.initial;
        let mut pi = [1.0 / 6.0; 6];
        for _ in 0..100_000 {
            let mut next = [0.0; 6];
            for i in 0..6 {
                for j in 0..6 {
                    next[j] += pi[i] * p[i][j];
                }
            }
            let delta: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = next;
            if delta < 1e-15 {
                break;
            }
        }
        let emitted = 1.0 - pi[Kind::Stop.index()];
        std::array::from_fn(|i| pi[i] / emitted)
    }
}

/// Draws from `row` restricted to the kinds `allowed` accepts, renormalized.
/// `None` when no allowed kind has positive mass.
pub fn sample_restricted<R: Rng + ?Sized>(
    row: &Row,
    allowed: impl Fn(Kind) -> bool,
    rng: &mut R,
) -> Option<Kind> {
    let mass: f64 = Kind::ALL
        .iter()
        .filter(|k| allowed(**k))
        .map(|k| row[k.index()])
        .sum();
    if mass <= 0.0 {
        return None;
    }
    let u = rng.random::<f64>() * mass;
    let mut acc = 0.0;
    let mut last = None;
    for k in Kind::ALL {
        let p = row[k.index()];
        if !allowed(k) || p <= 0.0 {
            continue;
        }
        acc += p;
        last = Some(k);
        if u < acc {
            return last;
        }
    }
    last
}
