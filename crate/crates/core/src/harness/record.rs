use std::fmt;

use serde::{Deserialize, Serialize};

use crate::benchmarks::ProblemKind;
use crate::error::PceError;
use crate::harness::config::MethodSpec;

/// Outcome of one solve, written `ok` or `failed: <reason>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RecordStatus {
    Ok,
    Failed(String),
}

impl RecordStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RecordStatus::Ok)
    }
}

impl fmt::Display for RecordStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordStatus::Ok => f.write_str("ok"),
            RecordStatus::Failed(why) => write!(f, "failed: {why}"),
        }
    }
}

impl TryFrom<String> for RecordStatus {
    type Error = PceError;

    fn try_from(s: String) -> Result<Self, PceError> {
        if s == "ok" {
            Ok(RecordStatus::Ok)
        } else if let Some(why) = s.strip_prefix("failed: ") {
            Ok(RecordStatus::Failed(why.to_string()))
        } else {
            Err(PceError::InvalidArgument(format!("unknown status `{s}`")))
        }
    }
}

impl From<RecordStatus> for String {
    fn from(s: RecordStatus) -> Self {
        s.to_string()
    }
}

/// One (replicate, M, method) result.
///
/// The first twelve fields are the canonical CSV columns; the rest trail
/// them. `iterations` counts solver iterations summed over the trajectory
/// up to this method's rotation count. `wall_ms` is the time of the whole
/// trajectory, which methods sharing a solver share.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub problem: ProblemKind,
    pub d: usize,
    #[serde(rename = "P")]
    pub order: u32,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub ratio: f64,
    pub method: MethodSpec,
    pub replicate: usize,
    pub seed: u64,
    pub rel_l2_error: Option<f64>,
    pub iterations: usize,
    pub status: RecordStatus,
    pub config_hash: String,
    /// Rotations actually applied (fewer than requested after early stopping).
    pub rotations: usize,
    pub error_level: usize,
    /// Per-iteration `ε` and stopping metric.
    pub history: String,
    pub wall_ms: f64,
}

impl ResultRecord {
    /// Equality of everything except the wall-clock time, with floats
    /// compared bitwise.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let bits = |e: Option<f64>| e.map(f64::to_bits);
        self.problem == other.problem
            && self.d == other.d
            && self.order == other.order
            && self.n == other.n
            && self.m == other.m
            && self.ratio.to_bits() == other.ratio.to_bits()
            && self.method == other.method
            && self.replicate == other.replicate
            && self.seed == other.seed
            && bits(self.rel_l2_error) == bits(other.rel_l2_error)
            && self.iterations == other.iterations
            && self.status == other.status
            && self.config_hash == other.config_hash
            && self.rotations == other.rotations
            && self.error_level == other.error_level
            && self.history == other.history
    }
}
