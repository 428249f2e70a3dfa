use std::sync::Arc;
use std::time::Instant;

use ndarray::{Array1, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::benchmarks::{Problem, ProblemKind};
use crate::error::{PceError, Result};
use crate::harness::config::{EpsilonSpec, ExperimentConfig, MethodSpec, WORKERS_ENV};
use crate::harness::record::{RecordStatus, ResultRecord};
use crate::hermite::{build_index_set, MultiIndexSet, SampleSet};
use crate::quadrature::{smolyak_grid, ReferenceProjection, SparseGridRule};
use crate::rotation::{
    build_stiffness_tensor, iterate_rotations, pullback_rule, pullback_with_rule, EpsilonPolicy,
    RotationConfig, RotationHistory, StiffnessTensor,
};
use crate::solvers::{DeltaRule, Solver, SolverKind};

/// Independent random streams within one (replicate, M) cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Samples,
    Problem,
    Solver(SolverKind),
}

impl Stage {
    fn id(self) -> u64 {
        match self {
            Stage::Samples => 1,
            Stage::Problem => 2,
            Stage::Solver(SolverKind::L1) => 3,
            Stage::Solver(SolverKind::ReweightedL1) => 4,
            Stage::Solver(SolverKind::Omp) => 5,
        }
    }
}

fn digest(words: &[u64]) -> u64 {
    let mut h = Sha256::new();
    for w in words {
        h.update(w.to_le_bytes());
    }
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("8 bytes"))
}

/// Seed of the (replicate, M) cell; the `seed` column of a record.
pub fn child_seed(master: u64, replicate: usize, m: usize) -> u64 {
    digest(&[master, replicate as u64, m as u64])
}

pub fn stage_seed(child: u64, stage: Stage) -> u64 {
    digest(&[child, stage.id()])
}

/// Worker pool sized by the environment override, else rayon's default.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(WORKERS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            PceError::InvalidArgument(format!(
                "{WORKERS_ENV} must be a non-negative integer, got `{v}`"
            ))
        })?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| PceError::InvalidArgument(format!("worker pool: {e}")))
}

/// Exact and recovered coefficients of one expansion term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub method: MethodSpec,
    pub replicate: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub index: usize,
    pub multi_index: String,
    pub exact: f64,
    pub recovered: f64,
}

enum Reference<'a> {
    Projection(&'a ReferenceProjection<f64>),
    Exact(Array1<f64>),
}

impl Reference<'_> {
    fn coefficients(&self) -> ArrayView1<'_, f64> {
        match self {
            Reference::Projection(p) => p.projection(),
            Reference::Exact(c) => c.view(),
        }
    }

    fn relative_error(&self, c: ArrayView1<f64>) -> f64 {
        match self {
            Reference::Projection(p) => p.relative_error(c),
            Reference::Exact(truth) => {
                let diff = truth - &c;
                (diff.dot(&diff) / truth.dot(truth)).sqrt()
            }
        }
    }
}

struct Cell<'a> {
    replicate: usize,
    m: usize,
    seed: u64,
    samples: SampleSet<f64>,
    outputs: Array1<f64>,
    reference: Reference<'a>,
}

struct Outcome {
    record: ResultRecord,
    coefficients: Option<Array1<f64>>,
}

/// A validated configuration with everything shared across replicates
/// precomputed: basis, error reference, stiffness tensor and pull-back rule.
pub struct Experiment {
    config: ExperimentConfig,
    hash: String,
    basis: Arc<MultiIndexSet>,
    counts: Vec<usize>,
    problem: Option<Problem<f64>>,
    reference: Option<ReferenceProjection<f64>>,
    stiffness: StiffnessTensor<f64>,
    pullback: Option<SparseGridRule<f64>>,
    pool: rayon::ThreadPool,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let pool = worker_pool()?;
        let basis = Arc::new(build_index_set(config.dim(), config.order())?);
        let counts = config.resolved_counts()?;
        let (problem, reference) = if config.problem.is_random() {
            (None, None)
        } else {
            // Deterministic problems never touch the generator.
            let problem =
                Problem::build(config.problem, &basis, &mut ChaCha8Rng::seed_from_u64(0))?;
            let rule = smolyak_grid::<f64>(config.dim(), config.error_level())?;
            let values = pool.install(|| {
                let nodes = rule.nodes();
                (0..rule.len())
                    .into_par_iter()
                    .map(|k| problem.eval(nodes.row(k)))
                    .collect::<Result<Vec<f64>>>()
            })?;
            if let Some(k) = values.iter().position(|v| !v.is_finite()) {
                return Err(PceError::NonFinite { node: k });
            }
            let reference = ReferenceProjection::new(&values, &basis, &rule)?;
            (Some(problem), Some(reference))
        };
        let stiffness = build_stiffness_tensor(&basis)?;
        let pullback = if config.methods.iter().any(|m| m.is_rotated()) {
            Some(pullback_rule(&basis)?)
        } else {
            None
        };
        Ok(Self {
            hash: config.hash(),
            config,
            basis,
            counts,
            problem,
            reference,
            stiffness,
            pullback,
            pool,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn basis(&self) -> &Arc<MultiIndexSet> {
        &self.basis
    }

    pub fn sample_counts(&self) -> &[usize] {
        &self.counts
    }

    /// Every record, ordered by (replicate, M, method).
    pub fn run(&self) -> Vec<ResultRecord> {
        let cells: Vec<(usize, usize)> = (0..self.config.replicates)
            .flat_map(|r| self.counts.iter().map(move |&m| (r, m)))
            .collect();
        let mut records: Vec<ResultRecord> = self.pool.install(|| {
            cells
                .par_iter()
                .flat_map_iter(|&(r, m)| self.run_cell(r, m, &self.config.methods))
                .map(|o| o.record)
                .collect()
        });
        let method_rank = |m: &MethodSpec| self.config.methods.iter().position(|x| x == m);
        records.sort_by_key(|rec| (rec.replicate, rec.m, method_rank(&rec.method)));
        records
    }

    /// Regenerates a record from its seed, checking it belongs to this
    /// experiment.
    pub fn rerun(&self, record: &ResultRecord) -> Result<ResultRecord> {
        if record.config_hash != self.hash {
            return Err(PceError::InvalidArgument(format!(
                "record belongs to config {}, not {}",
                record.config_hash, self.hash
            )));
        }
        if record.seed != child_seed(self.config.seed, record.replicate, record.m) {
            return Err(PceError::InvalidArgument(
                "record seed does not match its replicate and sample count".into(),
            ));
        }
        let mut out = self.run_cell(record.replicate, record.m, &[record.method]);
        Ok(out.remove(0).record)
    }

    /// Exact against recovered (pulled-back) coefficients for every method
    /// in one cell.
    pub fn coefficient_comparison(
        &self,
        replicate: usize,
        m: usize,
    ) -> Result<Vec<CoefficientRow>> {
        let cell = self.cell(replicate, m)?;
        let exact = cell.reference.coefficients().to_owned();
        let outcomes = self
            .pool
            .install(|| self.solve_cell(&cell, &self.config.methods));
        let mut rows = Vec::new();
        for o in outcomes {
            let Some(c) = o.coefficients else {
                return Err(PceError::InvalidArgument(format!(
                    "{} failed: {}",
                    o.record.method, o.record.status
                )));
            };
            for (k, alpha) in self.basis.indices().iter().enumerate() {
                rows.push(CoefficientRow {
                    method: o.record.method,
                    replicate,
                    m,
                    index: k,
                    multi_index: alpha.to_string(),
                    exact: exact[k],
                    recovered: c[k],
                });
            }
        }
        Ok(rows)
    }

    fn run_cell(&self, replicate: usize, m: usize, methods: &[MethodSpec]) -> Vec<Outcome> {
        match self.cell(replicate, m) {
            Ok(cell) => self.solve_cell(&cell, methods),
            Err(e) => methods
                .iter()
                .map(|&method| Outcome {
                    record: self.record(
                        replicate,
                        m,
                        method,
                        0,
                        None,
                        0,
                        RecordStatus::Failed(e.to_string()),
                        String::new(),
                        0.0,
                    ),
                    coefficients: None,
                })
                .collect(),
        }
    }

    fn cell(&self, replicate: usize, m: usize) -> Result<Cell<'_>> {
        let seed = child_seed(self.config.seed, replicate, m);
        let samples =
            SampleSet::<f64>::gaussian(m, self.config.dim(), stage_seed(seed, Stage::Samples))?;
        let owned;
        let (problem, reference) = match (&self.problem, &self.reference) {
            (Some(p), Some(r)) => (p, Reference::Projection(r)),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(seed, Stage::Problem));
                owned = Problem::build(self.config.problem, &self.basis, &mut rng)?;
                let exact = owned
                    .exact_coefficients()
                    .ok_or(PceError::Empty("exact coefficients"))?
                    .to_owned();
                (&owned, Reference::Exact(exact))
            }
        };
        let outputs = samples
            .points()
            .outer_iter()
            .map(|x| problem.eval(x))
            .collect::<Result<Array1<f64>>>()?;
        Ok(Cell {
            replicate,
            m,
            seed,
            samples,
            outputs,
            reference,
        })
    }

    /// Methods sharing a solver share one rotation trajectory and read
    /// their result off its history.
    fn solve_cell(&self, cell: &Cell<'_>, methods: &[MethodSpec]) -> Vec<Outcome> {
        let mut solvers: Vec<SolverKind> = Vec::new();
        for m in methods {
            if !solvers.contains(&m.solver) {
                solvers.push(m.solver);
            }
        }
        let mut out: Vec<Outcome> = Vec::with_capacity(methods.len());
        for kind in solvers {
            let group: Vec<MethodSpec> = methods
                .iter()
                .copied()
                .filter(|m| m.solver == kind)
                .collect();
            out.extend(self.solve_group(cell, kind, &group));
        }
        let rank = |m: &MethodSpec| methods.iter().position(|x| x == m);
        out.sort_by_key(|o| rank(&o.record.method));
        out
    }

    fn rotation_config(
        &self,
        kind: SolverKind,
        iterations: usize,
        outputs: ArrayView1<f64>,
    ) -> RotationConfig<f64> {
        let d = self.config.dim();
        let mut solver = Solver::new(kind);
        solver.reweight_rounds = self.config.reweight_rounds;
        solver.delta = DeltaRule::RelativeToMax(self.config.delta);
        let mut rc = RotationConfig::new(solver, d);
        rc.iterations = iterations;
        rc.threshold = self.config.theta_factor.map(|t| t * d as f64);
        rc.epsilon = match &self.config.epsilon {
            EpsilonSpec::CrossValidated { fractions } => {
                EpsilonPolicy::CrossValidated(fractions.clone())
            }
            EpsilonSpec::Relative { fraction } => {
                EpsilonPolicy::Fixed(fraction * outputs.dot(&outputs).sqrt())
            }
        };
        rc
    }

    fn solve_group(&self, cell: &Cell<'_>, kind: SolverKind, group: &[MethodSpec]) -> Vec<Outcome> {
        let iterations = group.iter().map(|m| m.rotations).max().unwrap_or(0);
        let rc = self.rotation_config(kind, iterations, cell.outputs.view());
        let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(cell.seed, Stage::Solver(kind)));
        let start = Instant::now();
        let result = iterate_rotations(
            &cell.samples,
            cell.outputs.view(),
            &self.basis,
            &self.stiffness,
            &rc,
            &mut rng,
        );
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let (history, failure) = match result {
            Ok(out) => (out.history, None),
            Err(f) => {
                let msg = f.to_string();
                (f.history, Some(msg))
            }
        };
        group
            .iter()
            .map(|&method| {
                let available = !history.records.is_empty()
                    && (failure.is_none() || method.rotations <= history.rotations());
                let applied = method.rotations.min(history.rotations());
                let iterations: usize = history
                    .records
                    .iter()
                    .take(applied + 1)
                    .map(|r| r.solver_iterations)
                    .sum();
                let evaluated = if available {
                    self.evaluate(&history, applied, &cell.reference)
                } else {
                    Err(PceError::InvalidArgument(
                        failure.clone().unwrap_or_default(),
                    ))
                };
                let (error, coefficients, status) = match evaluated {
                    Ok((e, c)) => (Some(e), Some(c), RecordStatus::Ok),
                    Err(e) => (None, None, RecordStatus::Failed(flatten(&e.to_string()))),
                };
                let rotations = if available {
                    applied
                } else {
                    history.rotations()
                };
                Outcome {
                    record: self.record(
                        cell.replicate,
                        cell.m,
                        method,
                        iterations,
                        error,
                        rotations,
                        status,
                        summarize_history(&history, rotations),
                        wall_ms,
                    ),
                    coefficients,
                }
            })
            .collect()
    }

    fn evaluate(
        &self,
        history: &RotationHistory<f64>,
        l: usize,
        reference: &Reference<'_>,
    ) -> Result<(f64, Array1<f64>)> {
        let model = history.model_after(&self.basis, l)?;
        let c = match (&self.pullback, model.is_rotated()) {
            (Some(rule), true) => pullback_with_rule(&model, rule)?,
            _ => model.coefficients().to_owned(),
        };
        let e = reference.relative_error(c.view());
        if !e.is_finite() {
            return Err(PceError::InvalidArgument("non-finite error".into()));
        }
        Ok((e, c))
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &self,
        replicate: usize,
        m: usize,
        method: MethodSpec,
        iterations: usize,
        error: Option<f64>,
        rotations: usize,
        status: RecordStatus,
        history: String,
        wall_ms: f64,
    ) -> ResultRecord {
        let n = self.basis.len();
        ResultRecord {
            problem: self.config.problem,
            d: self.config.dim(),
            order: self.config.order(),
            n,
            m,
            ratio: m as f64 / n as f64,
            method,
            replicate,
            seed: child_seed(self.config.seed, replicate, m),
            rel_l2_error: error,
            iterations,
            status,
            config_hash: self.hash.clone(),
            rotations,
            error_level: self.config.error_level(),
            history,
            wall_ms,
        }
    }
}

fn flatten(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

fn summarize_history(history: &RotationHistory<f64>, upto: usize) -> String {
    history
        .records
        .iter()
        .take(upto + 1)
        .map(|r| {
            let mut s = format!("l={} eps={:.3e}", r.iteration, r.epsilon);
            if let Some(metric) = r.stopping_metric {
                s.push_str(&format!(" S={metric:.3}"));
            }
            if r.degenerate {
                s.push_str(" degenerate");
            }
            s
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Runs every (replicate, M, method) of a configuration.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    Ok(Experiment::new(config.clone())?.run())
}

/// Name, defaults and description of every problem, for listings.
pub fn problem_listing() -> Vec<(ProblemKind, usize, u32, usize, &'static str)> {
    ProblemKind::ALL
        .iter()
        .map(|&k| {
            (
                k,
                k.default_dim(),
                k.default_order(),
                k.error_level(),
                k.description(),
            )
        })
        .collect()
}
