use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::benchmarks::ProblemKind;
use crate::error::{PceError, Result};
use crate::hermite::basis_size;
use crate::solvers::SolverKind;

/// Largest accepted sample count.
pub const MAX_SAMPLES: usize = 100_000;

/// Environment variable overriding the worker-pool size.
pub const WORKERS_ENV: &str = "SPARSE_PCE_WORKERS";

/// A recovery method: a solver, optionally wrapped in `rotations` iterations
/// of the rotation loop.
///
/// Written as a tag: `standard-l1`, `reweighted-l1`, `omp`, or
/// `rotated-<solver>-L<n>` such as `rotated-l1-L9`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MethodSpec {
    pub solver: SolverKind,
    pub rotations: usize,
}

impl MethodSpec {
    pub fn new(solver: SolverKind, rotations: usize) -> Self {
        Self { solver, rotations }
    }

    pub fn is_rotated(self) -> bool {
        self.rotations > 0
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.solver, self.rotations) {
            (SolverKind::L1, 0) => f.write_str("standard-l1"),
            (s, 0) => f.write_str(s.tag()),
            (s, n) => write!(f, "rotated-{}-L{n}", s.tag()),
        }
    }
}

impl FromStr for MethodSpec {
    type Err = PceError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || PceError::InvalidArgument(format!("unknown method `{s}`"));
        let solver = |tag: &str| match tag {
            "l1" => Ok(SolverKind::L1),
            "reweighted-l1" => Ok(SolverKind::ReweightedL1),
            "omp" => Ok(SolverKind::Omp),
            _ => Err(bad()),
        };
        if let Some(rest) = s.strip_prefix("rotated-") {
            let (tag, n) = rest.rsplit_once("-L").ok_or_else(bad)?;
            let n: usize = n.parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            return Ok(MethodSpec::new(solver(tag)?, n));
        }
        match s {
            "standard-l1" => Ok(MethodSpec::new(SolverKind::L1, 0)),
            "reweighted-l1" | "omp" => Ok(MethodSpec::new(solver(s)?, 0)),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for MethodSpec {
    type Error = PceError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MethodSpec> for String {
    fn from(m: MethodSpec) -> Self {
        m.to_string()
    }
}

/// How the solver tolerance `ε` is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EpsilonSpec {
    /// Cross-validate `f · ‖u‖₂` over the fractions, refined at every rotation.
    CrossValidated { fractions: Vec<f64> },
    /// Fixed `ε = fraction · ‖u‖₂`.
    Relative { fraction: f64 },
}

impl Default for EpsilonSpec {
    fn default() -> Self {
        EpsilonSpec::CrossValidated {
            fractions: vec![1e-4, 1e-3, 1e-2, 1e-1],
        }
    }
}

fn default_replicates() -> usize {
    20
}

fn default_theta() -> Option<f64> {
    Some(0.15)
}

fn default_rounds() -> usize {
    3
}

fn default_delta() -> f64 {
    1e-4
}

/// A replicate ensemble over sample sizes and methods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    /// Input dimension; the problem's default when absent.
    #[serde(default)]
    pub dim: Option<usize>,
    /// Polynomial order; the problem's default when absent.
    #[serde(default)]
    pub order: Option<u32>,
    /// Sample counts `M`.
    #[serde(default)]
    pub sample_counts: Vec<usize>,
    /// Sample ratios `M/N`, rounded to the nearest count.
    #[serde(default)]
    pub ratios: Vec<f64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    pub methods: Vec<MethodSpec>,
    /// Stopping threshold as a multiple of `d`; `null` disables early stopping.
    #[serde(default = "default_theta")]
    pub theta_factor: Option<f64>,
    #[serde(default = "default_rounds")]
    pub reweight_rounds: usize,
    /// Re-weighting `δ` relative to the largest coefficient.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub epsilon: EpsilonSpec,
    #[serde(default)]
    pub seed: u64,
    /// Sparse-grid level of the error metric; the problem's default when absent.
    #[serde(default)]
    pub error_level: Option<usize>,
}

impl ExperimentConfig {
    /// A config with defaults for everything but the problem, sample counts
    /// and methods.
    pub fn new(problem: ProblemKind, sample_counts: Vec<usize>, methods: Vec<MethodSpec>) -> Self {
        Self {
            problem,
            dim: None,
            order: None,
            sample_counts,
            ratios: Vec::new(),
            replicates: default_replicates(),
            methods,
            theta_factor: default_theta(),
            reweight_rounds: default_rounds(),
            delta: default_delta(),
            epsilon: EpsilonSpec::default(),
            seed: 0,
            error_level: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| PceError::Format {
            path: "<config>".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| PceError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            PceError::Format { message, .. } => PceError::Format {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim.unwrap_or_else(|| self.problem.default_dim())
    }

    pub fn order(&self) -> u32 {
        self.order.unwrap_or_else(|| self.problem.default_order())
    }

    pub fn error_level(&self) -> usize {
        self.error_level
            .unwrap_or_else(|| self.problem.error_level())
    }

    /// Basis size `N`.
    pub fn basis_size(&self) -> Result<usize> {
        basis_size(self.dim(), self.order()).ok_or(PceError::BasisOverflow {
            dim: self.dim(),
            order: self.order(),
        })
    }

    /// Explicit counts followed by counts from ratios, deduplicated in order.
    pub fn resolved_counts(&self) -> Result<Vec<usize>> {
        let n = self.basis_size()?;
        let mut out: Vec<usize> = Vec::new();
        let from_ratios = self.ratios.iter().map(|r| (r * n as f64).round() as usize);
        for m in self.sample_counts.iter().copied().chain(from_ratios) {
            if !out.contains(&m) {
                out.push(m);
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(PceError::InvalidArgument(msg));
        if self.dim() == 0 {
            return invalid("dim must be positive".into());
        }
        self.basis_size()?;
        if self.replicates == 0 {
            return invalid("replicates must be positive".into());
        }
        if self.methods.is_empty() {
            return invalid("at least one method is required".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return invalid(format!("method {m} listed twice"));
            }
        }
        if self.ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return invalid("ratios must be positive".into());
        }
        let counts = self.resolved_counts()?;
        if counts.is_empty() {
            return invalid("no sample counts or ratios given".into());
        }
        if let Some(&m) = counts.iter().find(|&&m| !(2..=MAX_SAMPLES).contains(&m)) {
            return invalid(format!("sample count {m} outside 2..={MAX_SAMPLES}"));
        }
        if let Some(t) = self.theta_factor {
            if !(t.is_finite() && t >= 0.0) {
                return invalid("theta_factor must be non-negative".into());
            }
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return invalid("delta must be positive".into());
        }
        match &self.epsilon {
            EpsilonSpec::CrossValidated { fractions } => {
                if fractions.is_empty() || fractions.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
                    return invalid("epsilon fractions must be non-empty and non-negative".into());
                }
            }
            EpsilonSpec::Relative { fraction } => {
                if !(fraction.is_finite() && *fraction >= 0.0) {
                    return invalid("epsilon fraction must be non-negative".into());
                }
            }
        }
        if self.error_level() == 0 || 2 * self.order() as usize > 2 * self.error_level() - 1 {
            return invalid(format!(
                "error level {} is not exact for products of order-{} polynomials",
                self.error_level(),
                self.order()
            ));
        }
        if self.problem == ProblemKind::Highdim && self.dim() != crate::benchmarks::HIGHDIM_DIM {
            return Err(PceError::DimensionMismatch {
                expected: crate::benchmarks::HIGHDIM_DIM,
                got: self.dim(),
            });
        }
        Ok(())
    }

    /// Short stable digest of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
