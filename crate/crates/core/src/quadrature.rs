//! Gauss-Hermite and Gauss-Legendre rules, Smolyak sparse grids over the
//! standard normal measure, expectations and the relative L2 error.

use std::collections::HashMap;

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{PceError, Result};
use crate::hermite::{for_each_graded_index, hermite_values, MultiIndexSet};
use crate::linalg::symmetric_eigen;
use crate::model::PceModel;
use crate::scalar::{pairwise_sum, Real};

/// Upper bound on the number of tensor-grid points visited while building
/// a sparse grid.
pub const MAX_SPARSE_GRID_POINTS: usize = 20_000_000;

/// A one-dimensional quadrature rule.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule1D<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule1D<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        let terms: Vec<T> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .collect();
        pairwise_sum(&terms)
    }
}

/// Symmetrises nodes and weights of a rule whose exact form is symmetric
/// about zero.
fn symmetrize<T: Real>(rule: &mut QuadratureRule1D<T>) {
    let n = rule.len();
    let half = T::lit(0.5);
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = (rule.nodes[j] - rule.nodes[i]) * half;
        let w = (rule.weights[i] + rule.weights[j]) * half;
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        rule.weights[i] = w;
        rule.weights[j] = w;
    }
    if n % 2 == 1 {
        rule.nodes[n / 2] = T::zero();
    }
}

/// `n`-point Gauss-Hermite rule for the standard normal density, from the
/// eigen-decomposition of the Jacobi matrix (off-diagonal `√k`).
pub fn gauss_hermite_rule<T: Real>(n: usize) -> Result<QuadratureRule1D<T>> {
    if n == 0 {
        return Err(PceError::InvalidArgument(
            "rule needs at least one point".into(),
        ));
    }
    let mut jacobi = Array2::<T>::zeros((n, n));
    for k in 1..n {
        let b = T::of_usize(k).sqrt();
        jacobi[[k - 1, k]] = b;
        jacobi[[k, k - 1]] = b;
    }
    let (values, _) = symmetric_eigen(&jacobi)?;
    let mut nodes = values.to_vec();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Newton polish on ψ_n, then Christoffel weights 1 / Σ_k ψ_k(x)², which
    // keep full relative accuracy in the tails.
    let mut table = vec![T::zero(); n + 1];
    let sqrt_n = T::of_usize(n).sqrt();
    for x in nodes.iter_mut() {
        for _ in 0..2 {
            hermite_values(*x, &mut table);
            let derivative = sqrt_n * table[n - 1];
            if derivative != T::zero() {
                *x -= table[n] / derivative;
            }
        }
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            hermite_values(x, &mut table);
            T::one() / table[..n].iter().map(|v| *v * *v).sum::<T>()
        })
        .collect();
    let mut rule = QuadratureRule1D { nodes, weights };
    let total: T = rule.weights.iter().copied().sum();
    rule.weights.iter_mut().for_each(|w| *w /= total);
    symmetrize(&mut rule);
    Ok(rule)
}

/// `n`-point Gauss-Legendre rule on `[-1, 1]` (weights sum to 2), nodes by
/// Newton iteration on `P_n`.
pub fn gauss_legendre_rule<T: Real>(n: usize) -> Result<QuadratureRule1D<T>> {
    if n == 0 {
        return Err(PceError::InvalidArgument(
            "rule needs at least one point".into(),
        ));
    }
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = n as f64;
    for i in 0..n {
        // Tricomi initial guess, descending order.
        let mut x = T::lit((std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos());
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d.is_finite() { d } else { dp };
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
    }
    let mut rule = QuadratureRule1D { nodes, weights };
    symmetrize(&mut rule);
    Ok(rule)
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::of_usize(k);
        let p2 = ((kf + kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::of_usize(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Composite Gauss-Legendre integral of `f` over `[a, b]` with `panels`
/// equal sub-intervals.
pub fn composite_integral<T: Real>(
    rule: &QuadratureRule1D<T>,
    a: T,
    b: T,
    panels: usize,
    f: impl Fn(T) -> T,
) -> T {
    let h = (b - a) / T::of_usize(panels);
    let half = h * T::lit(0.5);
    let mut terms = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let mid = a + h * (T::of_usize(p) + T::lit(0.5));
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            terms.push(w * half * f(mid + half * x));
        }
    }
    pairwise_sum(&terms)
}

/// Smolyak sparse grid for `N(0, I_d)`.
#[derive(Clone, Debug)]
pub struct SparseGridRule<T> {
    dim: usize,
    level: usize,
    nodes: Array2<T>,
    weights: Array1<T>,
}

impl<T: Real> SparseGridRule<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn nodes(&self) -> ndarray::ArrayView2<'_, T> {
        self.nodes.view()
    }

    pub fn weights(&self) -> ArrayView1<'_, T> {
        self.weights.view()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Polynomial degree integrated exactly, `2p − 1`.
    pub fn exactness(&self) -> usize {
        2 * self.level - 1
    }

    /// `Σ_k w_k v_k` for precomputed node values, with compensated
    /// summation since the signed weights cancel heavily.
    pub fn weighted_sum(&self, values: &[T]) -> T {
        let mut acc = Compensated::new(T::zero());
        for (&v, &w) in values.iter().zip(self.weights.iter()) {
            acc.add(v * w);
        }
        acc.value()
    }
}

/// Signed difference rule `Δ_i = U_i − U_{i−1}` (with `U_0 = 0`), nodes
/// merged where the two rules share them.
fn difference_rule<T: Real>(rules: &[QuadratureRule1D<T>], i: usize) -> QuadratureRule1D<T> {
    let mut nodes = rules[i - 1].nodes.clone();
    let mut weights = rules[i - 1].weights.clone();
    if i >= 2 {
        for (&x, &w) in rules[i - 2].nodes.iter().zip(&rules[i - 2].weights) {
            match nodes.iter().position(|&y| y == x) {
                Some(k) => weights[k] -= w,
                None => {
                    nodes.push(x);
                    weights.push(-w);
                }
            }
        }
    }
    QuadratureRule1D { nodes, weights }
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy)]
struct Compensated<T> {
    sum: T,
    carry: T,
    magnitude: T,
}

impl<T: Real> Compensated<T> {
    fn new(x: T) -> Self {
        Self {
            sum: x,
            carry: T::zero(),
            magnitude: x.abs(),
        }
    }

    fn add(&mut self, x: T) {
        self.magnitude += x.abs();
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> T {
        self.sum + self.carry
    }
}

/// Smolyak sparse grid built from non-nested Gauss-Hermite rules, level `i`
/// using the `i`-point rule, exact for total degree `2p − 1`.
///
/// Assembled as `Σ_{|ℓ| − d ≤ p − 1} Δ_{ℓ₁} ⊗ … ⊗ Δ_{ℓ_d}`, which is the
/// same rule as the binomial combination formula but accumulates far less
/// cancellation error in the merged weights.
pub fn smolyak_grid<T: Real>(dim: usize, level: usize) -> Result<SparseGridRule<T>> {
    if dim == 0 || level == 0 {
        return Err(PceError::InvalidArgument(
            "sparse grid needs dim ≥ 1 and level ≥ 1".into(),
        ));
    }
    let rules: Vec<QuadratureRule1D<T>> =
        (1..=level).map(gauss_hermite_rule).collect::<Result<_>>()?;
    let deltas: Vec<QuadratureRule1D<T>> =
        (1..=level).map(|i| difference_rule(&rules, i)).collect();

    let mut excess_vectors: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut visited = 0usize;
    for_each_graded_index(dim, (level - 1) as u32, |e| {
        let active: Vec<(usize, usize)> = e
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0)
            .map(|(i, &x)| (i, x as usize))
            .collect();
        let count: usize = active.iter().map(|&(_, x)| deltas[x].len()).product();
        visited = visited.saturating_add(count);
        excess_vectors.push(active);
    });
    if visited > MAX_SPARSE_GRID_POINTS {
        return Err(PceError::InvalidArgument(format!(
            "sparse grid (d = {dim}, level = {level}) exceeds {MAX_SPARSE_GRID_POINTS} points"
        )));
    }

    let quantum = 1e-12;
    let mut index: HashMap<Vec<(u32, i64)>, usize> = HashMap::new();
    let mut node_list: Vec<Vec<(u32, T)>> = Vec::new();
    let mut weight_list: Vec<Compensated<T>> = Vec::new();

    for active in &excess_vectors {
        let sizes: Vec<usize> = active.iter().map(|&(_, x)| deltas[x].len()).collect();
        let mut counter = vec![0usize; active.len()];
        loop {
            // Weight product carried as an unevaluated sum `hi + lo`.
            let mut hi = T::one();
            let mut lo = T::zero();
            let mut coords = Vec::with_capacity(active.len());
            let mut key = Vec::with_capacity(active.len());
            for (slot, &(dimension, x)) in active.iter().enumerate() {
                let rule = &deltas[x];
                let node = rule.nodes[counter[slot]];
                let factor = rule.weights[counter[slot]];
                let p = hi * factor;
                lo = lo * factor + hi.mul_add(factor, -p);
                hi = p;
                let q = (node.as_f64() / quantum).round() as i64;
                if q != 0 {
                    coords.push((dimension as u32, node));
                    key.push((dimension as u32, q));
                }
            }
            match index.get(&key) {
                Some(&k) => {
                    weight_list[k].add(hi);
                    weight_list[k].add(lo);
                }
                None => {
                    index.insert(key, node_list.len());
                    node_list.push(coords);
                    let mut acc = Compensated::new(hi);
                    acc.add(lo);
                    weight_list.push(acc);
                }
            }
            // Odometer over the active dimensions.
            let mut slot = 0;
            while slot < counter.len() {
                counter[slot] += 1;
                if counter[slot] < sizes[slot] {
                    break;
                }
                counter[slot] = 0;
                slot += 1;
            }
            if slot == counter.len() {
                break;
            }
        }
    }

    // Nodes whose merged weight cancels to rounding level carry no mass.
    let noise = T::epsilon() * T::lit(16.0);
    let keep: Vec<usize> = (0..node_list.len())
        .filter(|&k| weight_list[k].value().abs() > noise * weight_list[k].magnitude)
        .collect();
    let mut nodes = Array2::zeros((keep.len(), dim));
    for (row, &k) in keep.iter().enumerate() {
        for &(i, x) in &node_list[k] {
            nodes[[row, i as usize]] = x;
        }
    }
    let mut rule = SparseGridRule {
        dim,
        level,
        nodes,
        weights: keep.iter().map(|&k| weight_list[k].value()).collect(),
    };
    // Merged weights can reach O(10⁴) at high level, so storing them rounds
    // away a few ulps of total mass; return it to the heaviest node.
    let ones = vec![T::one(); rule.len()];
    let residual = T::one() - rule.weighted_sum(&ones);
    if let Some(k) = (0..rule.len()).max_by(|&a, &b| {
        rule.weights[a]
            .abs()
            .partial_cmp(&rule.weights[b].abs())
            .unwrap()
    }) {
        rule.weights[k] += residual;
    }
    Ok(rule)
}

/// `E[f] ≈ Σ_k w_k f(x_k)`.
pub fn expectation<T: Real>(f: impl Fn(ArrayView1<T>) -> T, rule: &SparseGridRule<T>) -> Result<T> {
    let values = evaluate_on_grid(f, rule)?;
    Ok(rule.weighted_sum(&values))
}

/// Evaluates `f` at every node, rejecting non-finite values.
pub fn evaluate_on_grid<T: Real>(
    f: impl Fn(ArrayView1<T>) -> T,
    rule: &SparseGridRule<T>,
) -> Result<Vec<T>> {
    rule.nodes
        .outer_iter()
        .enumerate()
        .map(|(k, x)| {
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(PceError::NonFinite { node: k })
            }
        })
        .collect()
}

/// `√E[(u − u_g)²] / √E[u²]` with both expectations from `rule`.
pub fn relative_l2_error<T: Real>(
    exact: impl Fn(ArrayView1<T>) -> T,
    model: &PceModel<T>,
    rule: &SparseGridRule<T>,
) -> Result<T> {
    if rule.dim() != model.dim() {
        return Err(PceError::DimensionMismatch {
            expected: model.dim(),
            got: rule.dim(),
        });
    }
    let u = evaluate_on_grid(exact, rule)?;
    let ug = model.eval_many(rule.nodes())?;
    let diff: Vec<T> = u
        .iter()
        .zip(ug.iter())
        .map(|(a, b)| (*a - *b) * (*a - *b))
        .collect();
    let sq: Vec<T> = u.iter().map(|a| *a * *a).collect();
    let den = rule.weighted_sum(&sq);
    if den <= T::epsilon() * T::epsilon() {
        return Err(PceError::ZeroReference);
    }
    let num = rule.weighted_sum(&diff).max(T::zero());
    Ok((num / den).sqrt())
}

/// Projections `b_n = E[f ψ_n]` of node values onto an orthonormal basis.
pub fn project_onto_basis<T: Real>(
    values: &[T],
    basis: &MultiIndexSet,
    rule: &SparseGridRule<T>,
) -> Result<Array1<T>> {
    if values.len() != rule.len() {
        return Err(PceError::DimensionMismatch {
            expected: rule.len(),
            got: values.len(),
        });
    }
    if basis.dim() != rule.dim() {
        return Err(PceError::DimensionMismatch {
            expected: basis.dim(),
            got: rule.dim(),
        });
    }
    let mut acc = Array1::<T>::zeros(basis.len());
    let mut row = Array1::<T>::zeros(basis.len());
    for ((x, &v), &w) in rule.nodes.outer_iter().zip(values).zip(rule.weights.iter()) {
        basis.evaluate_into(x, row.view_mut())?;
        acc.scaled_add(v * w, &row);
    }
    Ok(acc)
}

/// Reference quantity summarised by its projection onto a basis, for fast
/// repeated error evaluation of many expansions in that basis.
///
/// For a rule exact on products of basis functions,
/// `E[(u − u_g)²] = (E[u²] − ‖b‖²) + ‖b − c‖²` with `b_n = E[u ψ_n]`.
#[derive(Clone, Debug)]
pub struct ReferenceProjection<T> {
    projection: Array1<T>,
    mean_square: T,
}

impl<T: Real> ReferenceProjection<T> {
    pub fn new(values: &[T], basis: &MultiIndexSet, rule: &SparseGridRule<T>) -> Result<Self> {
        if 2 * basis.order() as usize > rule.exactness() {
            return Err(PceError::InvalidArgument(format!(
                "rule of exactness {} cannot resolve products of order-{} polynomials",
                rule.exactness(),
                basis.order()
            )));
        }
        let sq: Vec<T> = values.iter().map(|v| *v * *v).collect();
        let mean_square = rule.weighted_sum(&sq);
        if mean_square <= T::epsilon() * T::epsilon() {
            return Err(PceError::ZeroReference);
        }
        Ok(Self {
            projection: project_onto_basis(values, basis, rule)?,
            mean_square,
        })
    }

    pub fn projection(&self) -> ArrayView1<'_, T> {
        self.projection.view()
    }

    pub fn mean_square(&self) -> T {
        self.mean_square
    }

    /// Relative L2 error of an unrotated expansion with coefficients `c`.
    pub fn relative_error(&self, c: ArrayView1<T>) -> T {
        let truncation = (self.mean_square - self.projection.dot(&self.projection)).max(T::zero());
        let diff = &self.projection - &c;
        ((truncation + diff.dot(&diff)) / self.mean_square).sqrt()
    }
}
