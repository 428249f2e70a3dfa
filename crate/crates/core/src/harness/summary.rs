use serde::{Deserialize, Serialize};

use crate::benchmarks::ProblemKind;
use crate::error::{PceError, Result};
use crate::harness::config::MethodSpec;
use crate::harness::record::ResultRecord;

/// Mean and spread of the relative error over replicates for one
/// (method, M) pair. Failed records are counted but not averaged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub problem: ProblemKind,
    pub method: MethodSpec,
    #[serde(rename = "M")]
    pub m: usize,
    pub ratio: f64,
    pub mean_error: Option<f64>,
    /// Sample standard deviation; 0 for a single replicate.
    pub std_error: Option<f64>,
    pub replicates: usize,
    pub failures: usize,
}

/// Groups records by (method, M) in order of first appearance of the
/// method, then ascending M.
pub fn summarize(records: &[ResultRecord]) -> Result<Vec<SummaryRow>> {
    let first = records.first().ok_or(PceError::Empty("records"))?;
    if let Some(other) = records.iter().find(|r| r.config_hash != first.config_hash) {
        return Err(PceError::InvalidArgument(format!(
            "records from different configs ({} and {})",
            first.config_hash, other.config_hash
        )));
    }
    let mut keys: Vec<(MethodSpec, usize)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.method, r.m)) {
            keys.push((r.method, r.m));
        }
    }
    let mut methods: Vec<MethodSpec> = Vec::new();
    for (m, _) in &keys {
        if !methods.contains(m) {
            methods.push(*m);
        }
    }
    keys.sort_by_key(|(method, m)| (methods.iter().position(|x| x == method), *m));

    Ok(keys
        .into_iter()
        .map(|(method, m)| {
            let group: Vec<&ResultRecord> = records
                .iter()
                .filter(|r| r.method == method && r.m == m)
                .collect();
            let errors: Vec<f64> = group.iter().filter_map(|r| r.rel_l2_error).collect();
            let (mean, std) = mean_std(&errors);
            SummaryRow {
                problem: first.problem,
                method,
                m,
                ratio: group[0].ratio,
                mean_error: mean,
                std_error: std,
                replicates: group.len(),
                failures: group.len() - errors.len(),
            }
        })
        .collect())
}

fn mean_std(x: &[f64]) -> (Option<f64>, Option<f64>) {
    if x.is_empty() {
        return (None, None);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (Some(mean), Some(0.0));
    }
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}
