//! Orthonormal (probabilists') Hermite polynomials, total-degree multi-index
//! sets, measurement matrices and the mutual-coherence diagnostic.
//!
//! Basis functions are ordered by total degree and, within one degree,
//! lexicographically descending, so for `d = 2, P = 1` the order is
//! `(0,0), (1,0), (0,1)`.

use std::collections::HashMap;
use std::sync::Arc;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{PceError, Result};
use crate::scalar::Real;

/// Value of the orthonormal Hermite polynomial `ψ_n(x)`, evaluated by the
/// three-term recurrence `ψ_{n+1} = (x ψ_n − √n ψ_{n−1}) / √(n+1)`.
pub fn hermite_eval<T: Real>(n: u32, x: T) -> T {
    if n == 0 {
        return T::one();
    }
    let mut prev = T::one();
    let mut cur = x;
    for k in 1..n {
        let kf = T::of_usize(k as usize);
        let next = (x * cur - kf.sqrt() * prev) / (kf + T::one()).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// `ψ_n'(x) = √n ψ_{n−1}(x)`, zero for `n = 0`.
pub fn hermite_derivative_eval<T: Real>(n: u32, x: T) -> T {
    if n == 0 {
        T::zero()
    } else {
        T::of_usize(n as usize).sqrt() * hermite_eval(n - 1, x)
    }
}

/// Fills `out[k] = ψ_k(x)` for `k = 0..out.len()`.
pub fn hermite_values<T: Real>(x: T, out: &mut [T]) {
    if out.is_empty() {
        return;
    }
    out[0] = T::one();
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = T::of_usize(k);
        out[k + 1] = (x * out[k] - kf.sqrt() * out[k - 1]) / (kf + T::one()).sqrt();
    }
}

/// A multi-index `α = (α₁, …, α_d)`, stored sparsely as the non-zero
/// `(dimension, degree)` pairs in increasing dimension order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    dim: usize,
    terms: Vec<(u32, u32)>,
}

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn from_dense(entries: &[u32]) -> Self {
        let terms = entries
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(i, &a)| (i as u32, a))
            .collect();
        Self {
            dim: entries.len(),
            terms,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Non-zero `(dimension, degree)` pairs.
    pub fn terms(&self) -> &[(u32, u32)] {
        &self.terms
    }

    pub fn get(&self, i: usize) -> u32 {
        self.terms
            .iter()
            .find(|(d, _)| *d as usize == i)
            .map_or(0, |(_, a)| *a)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(_, a)| a).sum()
    }

    pub fn to_dense(&self) -> Vec<u32> {
        let mut v = vec![0; self.dim];
        for &(i, a) in &self.terms {
            v[i as usize] = a;
        }
        v
    }

    /// Copy with the degree in dimension `i` shifted by `delta`; `None` if the
    /// result would be negative.
    pub fn shifted(&self, i: usize, delta: i32) -> Option<Self> {
        let mut dense = self.to_dense();
        let v = dense[i] as i64 + delta as i64;
        if v < 0 {
            return None;
        }
        dense[i] = v as u32;
        Some(Self::from_dense(&dense))
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.to_dense().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// `C(P + d, d)`, or `None` on overflow.
pub fn basis_size(dim: usize, order: u32) -> Option<usize> {
    let mut acc: u128 = 1;
    for i in 1..=order as u128 {
        acc = acc.checked_mul(dim as u128 + i)? / i;
    }
    usize::try_from(acc).ok()
}

/// Visits every multi-index of total degree `≤ order` in basis order
/// without materialising the set.
pub fn for_each_graded_index(dim: usize, order: u32, mut visit: impl FnMut(&[u32])) {
    let mut alpha = vec![0u32; dim];
    for degree in 0..=order {
        alpha.iter_mut().for_each(|a| *a = 0);
        alpha[0] = degree;
        loop {
            visit(&alpha);
            // Next composition in descending lexicographic order.
            let Some(j) = (0..dim.saturating_sub(1)).rev().find(|&j| alpha[j] > 0) else {
                break;
            };
            let tail: u32 = alpha[j + 1..].iter().sum();
            alpha[j] -= 1;
            alpha[j + 1..].iter_mut().for_each(|a| *a = 0);
            alpha[j + 1] = tail + 1;
        }
    }
}

/// Ordered set of all multi-indices with total degree at most `order`.
#[derive(Clone, Debug)]
pub struct MultiIndexSet {
    dim: usize,
    order: u32,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
}

/// Builds the total-degree set for dimension `dim` and order `order`.
pub fn build_index_set(dim: usize, order: u32) -> Result<MultiIndexSet> {
    if dim == 0 {
        return Err(PceError::InvalidArgument("dimension must be ≥ 1".into()));
    }
    let n = basis_size(dim, order).ok_or(PceError::BasisOverflow { dim, order })?;
    let mut indices = Vec::new();
    indices
        .try_reserve_exact(n)
        .map_err(|_| PceError::BasisOverflow { dim, order })?;
    for_each_graded_index(dim, order, |a| indices.push(MultiIndex::from_dense(a)));
    debug_assert_eq!(indices.len(), n);
    let lookup = indices
        .iter()
        .enumerate()
        .map(|(k, a)| (a.clone(), k))
        .collect();
    Ok(MultiIndexSet {
        dim,
        order,
        indices,
        lookup,
    })
}

impl MultiIndexSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, k: usize) -> &MultiIndex {
        &self.indices[k]
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// Univariate table `ψ_n(x_i)` for `n ≤ order`, laid out row-major by
    /// dimension.
    fn univariate_table<T: Real>(&self, point: ArrayView1<T>, table: &mut [T]) {
        let stride = self.order as usize + 1;
        for (i, &x) in point.iter().enumerate() {
            hermite_values(x, &mut table[i * stride..(i + 1) * stride]);
        }
    }

    /// Evaluates every basis function at `point` into `out`.
    pub fn evaluate_into<T: Real>(
        &self,
        point: ArrayView1<T>,
        mut out: ArrayViewMut1<T>,
    ) -> Result<()> {
        self.check_point(point.len())?;
        let stride = self.order as usize + 1;
        let mut table = vec![T::zero(); self.dim * stride];
        self.univariate_table(point, &mut table);
        for (slot, alpha) in out.iter_mut().zip(&self.indices) {
            *slot = alpha.terms.iter().fold(T::one(), |p, &(i, a)| {
                p * table[i as usize * stride + a as usize]
            });
        }
        Ok(())
    }

    pub fn evaluate<T: Real>(&self, point: ArrayView1<T>) -> Result<Array1<T>> {
        let mut out = Array1::zeros(self.len());
        self.evaluate_into(point, out.view_mut())?;
        Ok(out)
    }

    /// `Σ_n c_n ψ_n(point)`.
    pub fn expand<T: Real>(&self, coefficients: ArrayView1<T>, point: ArrayView1<T>) -> Result<T> {
        if coefficients.len() != self.len() {
            return Err(PceError::DimensionMismatch {
                expected: self.len(),
                got: coefficients.len(),
            });
        }
        Ok(self.evaluate(point)?.dot(&coefficients))
    }

    fn check_point(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(PceError::DimensionMismatch {
                expected: self.dim,
                got,
            });
        }
        Ok(())
    }
}

/// Tensor-product basis function `ψ_α(ξ) = Π ψ_{α_i}(ξ_i)`.
pub fn basis_eval<T: Real>(index: &MultiIndex, point: ArrayView1<T>) -> Result<T> {
    if index.dim() != point.len() {
        return Err(PceError::DimensionMismatch {
            expected: index.dim(),
            got: point.len(),
        });
    }
    Ok(index.terms().iter().fold(T::one(), |p, &(i, a)| {
        p * hermite_eval(a, point[i as usize])
    }))
}

/// Gradient `∇ψ_α(ξ)`.
pub fn basis_gradient<T: Real>(index: &MultiIndex, point: ArrayView1<T>) -> Result<Array1<T>> {
    if index.dim() != point.len() {
        return Err(PceError::DimensionMismatch {
            expected: index.dim(),
            got: point.len(),
        });
    }
    let mut grad = Array1::zeros(point.len());
    for &(i, a) in index.terms() {
        let mut g = hermite_derivative_eval(a, point[i as usize]);
        for &(m, b) in index.terms() {
            if m != i {
                g *= hermite_eval(b, point[m as usize]);
            }
        }
        grad[i as usize] = g;
    }
    Ok(grad)
}

/// Input samples, one row per draw of `ξ ~ N(0, I)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet<T> {
    points: Array2<T>,
    seed: u64,
}

impl<T: Real> SampleSet<T> {
    pub fn new(points: Array2<T>, seed: u64) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(PceError::InvalidArgument(
                "sample set needs at least one row and one column".into(),
            ));
        }
        if let Some(k) = points.iter().position(|x| !x.is_finite()) {
            return Err(PceError::InvalidArgument(format!(
                "non-finite sample entry at row {}",
                k / points.ncols()
            )));
        }
        Ok(Self { points, seed })
    }

    /// `m` i.i.d. standard-normal draws in `dim` dimensions.
    pub fn gaussian(m: usize, dim: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = Array2::from_shape_simple_fn((m, dim), || {
            let z: f64 = StandardNormal.sample(&mut rng);
            T::lit(z)
        });
        Self::new(points, seed)
    }

    pub fn points(&self) -> ArrayView2<'_, T> {
        self.points.view()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn row(&self, q: usize) -> ArrayView1<'_, T> {
        self.points.row(q)
    }

    /// Subset of rows, keeping the seed provenance.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        Self::new(self.points.select(Axis(0), rows), self.seed)
    }
}

/// `Ψ_{qj} = ψ_j(ξ^q)` together with the basis and samples it was built from.
#[derive(Clone, Debug)]
pub struct MeasurementMatrix<T> {
    values: Array2<T>,
    basis: Arc<MultiIndexSet>,
    samples: SampleSet<T>,
}

impl<T: Real> MeasurementMatrix<T> {
    pub fn values(&self) -> ArrayView2<'_, T> {
        self.values.view()
    }

    pub fn basis(&self) -> &Arc<MultiIndexSet> {
        &self.basis
    }

    pub fn samples(&self) -> &SampleSet<T> {
        &self.samples
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }
}

/// Evaluates every basis function at every sample.
pub fn assemble_measurement<T: Real>(
    samples: &SampleSet<T>,
    basis: &Arc<MultiIndexSet>,
) -> Result<MeasurementMatrix<T>> {
    if samples.dim() != basis.dim() {
        return Err(PceError::DimensionMismatch {
            expected: basis.dim(),
            got: samples.dim(),
        });
    }
    let mut values = Array2::zeros((samples.len(), basis.len()));
    for (q, row) in values.outer_iter_mut().enumerate() {
        basis.evaluate_into(samples.row(q), row)?;
    }
    Ok(MeasurementMatrix {
        values,
        basis: Arc::clone(basis),
        samples: samples.clone(),
    })
}

/// Largest normalised inner product between two distinct columns.
pub fn mutual_coherence<T: Real>(matrix: ArrayView2<T>) -> Result<T> {
    let n = matrix.ncols();
    if n < 2 {
        return Err(PceError::InvalidArgument(
            "mutual coherence needs at least two columns".into(),
        ));
    }
    let mut normalized = matrix.to_owned();
    for (j, mut col) in normalized.axis_iter_mut(Axis(1)).enumerate() {
        let norm = col.dot(&col).sqrt();
        if norm == T::zero() {
            return Err(PceError::ZeroColumn(j));
        }
        col.mapv_inplace(|x| x / norm);
    }
    const BLOCK: usize = 256;
    let mut mu = T::zero();
    let mut start = 0;
    while start < n {
        let end = (start + BLOCK).min(n);
        let block = normalized.slice(s![.., start..end]);
        let gram = block.t().dot(&normalized);
        for ((bj, k), g) in gram.indexed_iter() {
            if start + bj != k {
                mu = mu.max(g.abs());
            }
        }
        start = end;
    }
    Ok(mu.min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn closed_form(n: u32, x: f64) -> f64 {
        match n {
            0 => 1.0,
            1 => x,
            2 => (x * x - 1.0) / 2f64.sqrt(),
            3 => (x.powi(3) - 3.0 * x) / 6f64.sqrt(),
            4 => (x.powi(4) - 6.0 * x * x + 3.0) / 24f64.sqrt(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite_eval(0, 3.7), 1.0);
        assert!(hermite_eval(2, 1.0f64).abs() < 1e-15);
        assert!((hermite_eval(3, 2.0f64) - 2.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!((hermite_eval(3, 2.0f64) - 0.8165).abs() < 1e-4);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(hermite_derivative_eval(0, 5.0), 0.0);
        assert_eq!(hermite_derivative_eval(1, 0.3), 1.0);
        assert!((hermite_derivative_eval(2, 1.5f64) - 2f64.sqrt() * 1.5).abs() < 1e-15);
        assert!((hermite_derivative_eval(2, 1.5f64) - 2.1213).abs() < 1e-4);
    }

    #[test]
    fn recurrence_matches_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let z: f64 = StandardNormal.sample(&mut rng);
            let x = 3.0 * z;
            for n in 0..=4 {
                let scale = 1.0 + x.abs().powi(n as i32);
                assert!((hermite_eval(n, x) - closed_form(n, x)).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn table_matches_scalar_eval() {
        let mut table = [0.0f64; 7];
        hermite_values(1.3, &mut table);
        for (n, v) in table.iter().enumerate() {
            assert!((v - hermite_eval(n as u32, 1.3)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let h = 1e-5;
        for n in 0..6 {
            for &x in &[-2.3f64, -0.4, 0.0, 0.9, 3.1] {
                let fd = (hermite_eval(n, x + h) - hermite_eval(n, x - h)) / (2.0 * h);
                let scale = 1.0 + x.abs().powi(n as i32);
                assert!((fd - hermite_derivative_eval(n, x)).abs() < 1e-6 * scale);
            }
        }
    }

    #[test]
    fn index_set_sizes() {
        assert_eq!(build_index_set(12, 3).unwrap().len(), 455);
        assert_eq!(build_index_set(100, 2).unwrap().len(), 5151);
        let one = build_index_set(1, 0).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.get(0).to_dense(), vec![0]);
    }

    #[test]
    fn graded_descending_lex_order() {
        let set = build_index_set(3, 2).unwrap();
        let dense: Vec<Vec<u32>> = set.indices().iter().map(|a| a.to_dense()).collect();
        assert_eq!(
            dense,
            vec![
                vec![0, 0, 0],
                vec![1, 0, 0],
                vec![0, 1, 0],
                vec![0, 0, 1],
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 2, 0],
                vec![0, 1, 1],
                vec![0, 0, 2],
            ]
        );
        for (k, a) in set.indices().iter().enumerate() {
            assert_eq!(set.position(a), Some(k));
        }
    }

    #[test]
    fn overflow_is_reported() {
        assert!(basis_size(usize::MAX / 2, 4).is_none());
        assert!(matches!(
            build_index_set(usize::MAX / 2, 4),
            Err(PceError::BasisOverflow { .. })
        ));
    }

    #[test]
    fn basis_eval_examples() {
        let p = array![0.3f64, -1.2, 2.0];
        assert_eq!(basis_eval(&MultiIndex::zero(3), p.view()).unwrap(), 1.0);
        let v = basis_eval(&MultiIndex::from_dense(&[1, 1]), array![2.0f64, 3.0].view()).unwrap();
        assert!((v - 6.0).abs() < 1e-15);
        let v = basis_eval(&MultiIndex::from_dense(&[2, 1]), array![1.0f64, 2.0].view()).unwrap();
        assert!(v.abs() < 1e-15);
        assert!(matches!(
            basis_eval(&MultiIndex::zero(2), p.view()),
            Err(PceError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn assemble_small_examples() {
        let basis = Arc::new(build_index_set(2, 1).unwrap());
        let samples = SampleSet::new(array![[0.0f64, 0.0]], 0).unwrap();
        let m = assemble_measurement(&samples, &basis).unwrap();
        assert_eq!(m.values().row(0).to_vec(), vec![1.0, 0.0, 0.0]);

        let basis = Arc::new(build_index_set(12, 3).unwrap());
        let samples = SampleSet::<f64>::gaussian(3, 12, 11).unwrap();
        let a = assemble_measurement(&samples, &basis).unwrap();
        assert_eq!(a.values().dim(), (3, 455));
        assert!(a.values().column(0).iter().all(|&x| x == 1.0));
        let b = assemble_measurement(&samples, &basis).unwrap();
        assert_eq!(a.values(), b.values());
        let q = 1;
        let j = 200;
        let direct = basis_eval(basis.get(j), samples.row(q)).unwrap();
        assert!((a.values()[[q, j]] - direct).abs() < 1e-12 * (1.0 + direct.abs()));

        let wrong = SampleSet::<f64>::gaussian(3, 4, 1).unwrap();
        assert!(assemble_measurement(&wrong, &basis).is_err());
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let alpha = MultiIndex::from_dense(&[2, 0, 3]);
        let p = array![0.4f64, -0.7, 1.1];
        let g = basis_gradient(&alpha, p.view()).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let mut a = p.clone();
            let mut b = p.clone();
            a[i] += h;
            b[i] -= h;
            let fd = (basis_eval(&alpha, a.view()).unwrap()
                - basis_eval(&alpha, b.view()).unwrap())
                / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn coherence_examples() {
        let eye: Array2<f64> = Array2::eye(3);
        assert_eq!(mutual_coherence(eye.view()).unwrap(), 0.0);
        let row = array![[2.0f64, -5.0, 0.5]];
        assert!((mutual_coherence(row.view()).unwrap() - 1.0).abs() < 1e-15);
        let zero_col = array![[1.0f64, 0.0], [2.0, 0.0]];
        assert!(matches!(
            mutual_coherence(zero_col.view()),
            Err(PceError::ZeroColumn(1))
        ));
    }

    #[test]
    fn coherence_decreases_with_more_samples() {
        let basis = Arc::new(build_index_set(12, 3).unwrap());
        let mean_mu = |m: usize| -> f64 {
            (0..3)
                .map(|s| {
                    let samples = SampleSet::<f64>::gaussian(m, 12, 100 + s).unwrap();
                    let psi = assemble_measurement(&samples, &basis).unwrap();
                    mutual_coherence(psi.values()).unwrap()
                })
                .sum::<f64>()
                / 3.0
        };
        let small = mean_mu(455);
        let large = mean_mu(4000);
        assert!(small > 0.0 && small < 1.0);
        assert!(large < small, "{large} !< {small}");
    }
}
