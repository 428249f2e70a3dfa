//! Basis pursuit denoising via spectral projected gradient on the Pareto
//! curve, with an optional active-set refinement to an exact KKT point.

use ndarray::{Array1, ArrayView1, ArrayView2};

use super::{check_shapes, SolverReport, WeightMatrix};
use crate::error::{PceError, Result};
use crate::linalg::IncrementalQr;
use crate::scalar::{norm2, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct BpdnOptions<T> {
    /// Relative optimality tolerance of the LASSO subproblems and the
    /// Pareto root. The returned residual is at most `ε · (1 + tolerance)`.
    pub tolerance: T,
    /// Residuals below `floor · ‖u‖₂` count as exact fits.
    pub floor: T,
    pub max_iterations: usize,
    /// Try to turn the final iterate into an exact KKT point.
    pub polish: bool,
}

impl<T: Real> Default for BpdnOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::tol_floor(1e-6),
            floor: T::tol_floor(1e-9),
            max_iterations: 10_000,
            polish: true,
        }
    }
}

/// `min ‖c‖₁` subject to `‖Ψ c − u‖₂ ≤ ε`.
pub fn bpdn_solve<T: Real>(
    matrix: ArrayView2<T>,
    u: ArrayView1<T>,
    epsilon: T,
    options: &BpdnOptions<T>,
) -> Result<(Array1<T>, SolverReport<T>)> {
    let w = WeightMatrix::identity(matrix.ncols());
    weighted_bpdn_solve(matrix, u, epsilon, &w, options)
}

/// `min ‖W c‖₁` subject to `‖Ψ c − u‖₂ ≤ ε`, for diagonal positive `W`.
pub fn weighted_bpdn_solve<T: Real>(
    matrix: ArrayView2<T>,
    u: ArrayView1<T>,
    epsilon: T,
    weights: &WeightMatrix<T>,
    options: &BpdnOptions<T>,
) -> Result<(Array1<T>, SolverReport<T>)> {
    check_shapes(matrix, u, epsilon)?;
    if weights.len() != matrix.ncols() {
        return Err(PceError::DimensionMismatch {
            expected: matrix.ncols(),
            got: weights.len(),
        });
    }
    let n = matrix.ncols();
    let scale = norm2(u);
    if scale <= epsilon || scale == T::zero() {
        let c = Array1::zeros(n);
        let report = SolverReport::describe(matrix, u, &c, 0);
        return Ok((c, report));
    }
    // Work with ‖b‖ = 1 so that absolute and relative tolerances agree.
    let b = u.mapv(|x| x / scale);
    let sigma = epsilon / scale;
    let w = weights.diagonal();

    let allowed = epsilon * (T::one() + options.tolerance) + options.floor * scale;
    let mut start: Option<Array1<T>> = None;
    let mut used = 0;
    let mut last = None;
    // The first pass uses root tolerances relative to ‖u‖. When ε is tiny
    // that can leave the residual well above ε; a second pass from the same
    // point measures the root error relative to ε instead.
    for strict in [false, true] {
        let budget = options.max_iterations.saturating_sub(used);
        let outcome = spg(
            matrix,
            b.view(),
            sigma,
            w,
            options,
            start.as_ref(),
            strict,
            budget,
        );
        let (x, iterations, converged) = match outcome {
            Ok((x, it)) => (x, it, true),
            Err((x, it)) => (x, it, false),
        };
        used += iterations;
        let polished = if options.polish {
            polish(matrix, b.view(), sigma, w, &x, options).or_else(|| {
                // The iterate's support can be too far off for the active
                // set to repair; the homotopy path finds it from scratch.
                let path = homotopy(matrix, b.view(), sigma, w, HOMOTOPY_STEPS * matrix.nrows())?;
                polish(matrix, b.view(), sigma, w, &path, options)
            })
        } else {
            None
        };
        let was_polished = polished.is_some();
        let candidate = match polished {
            Some(p) => p,
            None => restore_feasibility(matrix, b.view(), sigma, x.clone()),
        };
        let c = candidate.mapv(|v| v * scale);
        let mut report = SolverReport::describe(matrix, u, &c, used);
        report.polished = was_polished;
        if (converged || was_polished) && report.residual_norm <= allowed {
            return Ok((c, report));
        }
        last = Some((c, report));
        start = Some(x);
        if used >= options.max_iterations {
            break;
        }
    }
    let (c, report) = last.expect("at least one pass");
    Err(PceError::NotConverged {
        iterations: report.iterations,
        residual: report.residual_norm.as_f64(),
        target: epsilon.as_f64(),
        best: c.iter().map(|v| v.as_f64()).collect(),
    })
}

/// The Pareto root test accepts `‖r‖` slightly above `σ`. Pulls the
/// residual back onto the `σ`-ball by moving along the least-squares
/// correction on the current support.
fn restore_feasibility<T: Real>(
    a: ArrayView2<T>,
    b: ArrayView1<T>,
    sigma: T,
    x: Array1<T>,
) -> Array1<T> {
    let r = &b - &a.dot(&x);
    let r2 = r.dot(&r);
    if r2.sqrt() <= sigma {
        return x;
    }
    let m = a.nrows();
    let mut qr = IncrementalQr::new(m);
    let mut cols = Vec::new();
    for (j, v) in x.iter().enumerate() {
        if *v != T::zero() && qr.len() < m && qr.push(a.column(j)) {
            cols.push(j);
        }
    }
    let qtr = qr.qt(r.view());
    let p2: T = qtr.iter().map(|v| *v * *v).sum();
    // ‖r − t·P r‖² = ‖r‖² − (2t − t²)‖P r‖²
    if p2 <= T::zero() || r2 - p2 > sigma * sigma {
        return x;
    }
    let need = (r2 - sigma * sigma) / p2;
    let t = T::one() - (T::one() - need).max(T::zero()).sqrt();
    let delta = qr.solve_r(&qtr);
    let mut out = x;
    for (&j, d) in cols.iter().zip(delta) {
        out[j] += t * d;
    }
    out
}

/// Euclidean projection onto `{x : Σ w_i |x_i| ≤ τ}`.
pub fn project_weighted_l1<T: Real>(y: ArrayView1<T>, w: ArrayView1<T>, tau: T) -> Array1<T> {
    let total: T = y.iter().zip(w).map(|(a, b)| a.abs() * *b).sum();
    if total <= tau {
        return y.to_owned();
    }
    if tau <= T::zero() {
        return Array1::zeros(y.len());
    }
    let mut order: Vec<usize> = (0..y.len()).filter(|&i| y[i] != T::zero()).collect();
    order.sort_by(|&i, &j| {
        let ri = y[i].abs() / w[i];
        let rj = y[j].abs() / w[j];
        rj.partial_cmp(&ri).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut sy = T::zero();
    let mut sw = T::zero();
    let mut lambda = T::zero();
    for (k, &i) in order.iter().enumerate() {
        sy += w[i] * y[i].abs();
        sw += w[i] * w[i];
        let candidate = (sy - tau) / sw;
        let next = order
            .get(k + 1)
            .map(|&j| y[j].abs() / w[j])
            .unwrap_or(T::zero());
        if candidate >= next {
            lambda = candidate;
            break;
        }
    }
    let lambda = lambda.max(T::zero());
    Array1::from_iter(y.iter().zip(w).map(|(&v, &wi)| {
        let mag = (v.abs() - lambda * wi).max(T::zero());
        if v < T::zero() {
            -mag
        } else {
            mag
        }
    }))
}

fn dual_norm<T: Real>(g: &Array1<T>, w: ArrayView1<T>) -> T {
    g.iter()
        .zip(w)
        .fold(T::zero(), |m, (a, b)| m.max(a.abs() / *b))
}

struct Trial<T> {
    x: Array1<T>,
    r: Array1<T>,
    f: T,
}

fn trial<T: Real>(a: ArrayView2<T>, b: ArrayView1<T>, x: Array1<T>) -> Trial<T> {
    let r = &b - &a.dot(&x);
    let f = r.dot(&r) * T::lit(0.5);
    Trial { x, r, f }
}

const STEP_MIN: f64 = 1e-16;
const STEP_MAX: f64 = 1e5;
const ARMIJO: f64 = 1e-4;
const MEMORY: usize = 3;
const DECREASE_TOL: f64 = 1e-4;
const LINE_SEARCH_STEPS: usize = 40;
const POLISH_ROUNDS: usize = 100;
const HOMOTOPY_STEPS: usize = 10;

/// Root-finding on `φ(τ) = min{‖Ax − b‖ : ‖Wx‖₁ ≤ τ}` with inexact
/// spectral projected gradient solves of each LASSO subproblem. Returns the
/// final iterate and the iteration count. A stalled line search returns
/// the smallest-norm feasible iterate seen, if any; otherwise, and when the
/// budget runs out, `Err` carries the last iterate.
///
/// `strict` measures the root error relative to `σ` rather than `‖b‖`.
#[allow(clippy::too_many_arguments)]
fn spg<T: Real>(
    a: ArrayView2<T>,
    b: ArrayView1<T>,
    sigma: T,
    w: ArrayView1<T>,
    options: &BpdnOptions<T>,
    start: Option<&Array1<T>>,
    strict: bool,
    max_iterations: usize,
) -> std::result::Result<(Array1<T>, usize), (Array1<T>, usize)> {
    let n = a.ncols();
    let one = T::one();
    let half = T::lit(0.5);
    let opt_tol = options.tolerance;
    let step_min = T::lit(STEP_MIN);
    let step_max = T::lit(STEP_MAX);
    let gamma = T::lit(ARMIJO);

    let x0 = start.cloned().unwrap_or_else(|| Array1::zeros(n));
    let mut tau: T = x0.iter().zip(w).map(|(x, wi)| x.abs() * *wi).sum();
    let mut cur = trial(a, b, x0);
    let mut g = -a.t().dot(&cur.r);
    let mut fvals = [cur.f; MEMORY];
    let mut f_old = cur.f;
    let mut update_tau = false;
    let mut stalled = false;
    // Smallest-norm feasible iterate, the answer if rounding stops progress.
    let mut best: Option<(T, Array1<T>)> = None;

    let dx = &project_weighted_l1((&cur.x - &g).view(), w, tau) - &cur.x;
    let dx_norm = dx.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let mut step = if dx_norm < one / step_max {
        step_max
    } else {
        (one / dx_norm).max(step_min).min(step_max)
    };

    let mut iter = 0;
    loop {
        let g_norm = dual_norm(&g, w);
        let r_norm = cur.r.dot(&cur.r).sqrt();
        let gap = cur.r.dot(&(&cur.r - &b)) + tau * g_norm;
        let r_gap = gap.abs() / cur.f.max(one);
        let a_err1 = r_norm - sigma;
        let a_err2 = cur.f - sigma * sigma * half;
        let r_err1 = if strict {
            a_err1.abs() / sigma.max(options.floor)
        } else {
            a_err1.abs() / r_norm.max(one)
        };
        let r_err2 = a_err2.abs() / cur.f.max(one);

        if r_norm <= sigma {
            let norm: T = cur.x.iter().zip(w).map(|(x, wi)| x.abs() * *wi).sum();
            if best.as_ref().is_none_or(|(b, _)| norm < *b) {
                best = Some((norm, cur.x.clone()));
            }
        }
        let mut overshoot = false;
        if r_gap <= opt_tol.max(r_err2) || r_err1 <= opt_tol {
            let exact_fit = r_norm <= options.floor && sigma <= options.floor;
            let root = r_err1 <= opt_tol;
            let least_squares = g_norm <= T::tol_floor(1e-12) * r_norm;
            if exact_fit || root {
                return Ok((cur.x, iter));
            } else if r_norm < sigma {
                // Solved for a τ past the root: feasible but not minimal.
                overshoot = true;
            } else if least_squares {
                // σ is below the least-squares residual: infeasible.
                return Err((cur.x, iter));
            }
        }
        if iter >= max_iterations {
            return Err((cur.x, iter));
        }

        let change = (cur.f - f_old).abs();
        let rel1 = change <= T::lit(DECREASE_TOL) * cur.f;
        let rel2 = change <= T::lit(0.1) * cur.f * a_err1.abs();
        update_tau = stalled
            || overshoot
            || ((rel1 && r_norm > sigma + sigma) || (rel2 && r_norm <= sigma + sigma))
                && !update_tau;
        if update_tau && g_norm > T::zero() {
            let tau_old = tau;
            tau = (tau + r_norm * a_err1 / g_norm).max(T::zero());
            if tau < tau_old {
                let x = project_weighted_l1(cur.x.view(), w, tau);
                cur = trial(a, b, x);
                g = -a.t().dot(&cur.r);
                fvals = [T::neg_infinity(); MEMORY];
                fvals[iter % MEMORY] = cur.f;
            }
        }

        iter += 1;
        let fmax = fvals.iter().copied().fold(T::neg_infinity(), T::max);
        let x_old = cur.x.clone();
        let g_old = g.clone();
        f_old = cur.f;

        let next = curvy_search(a, b, &cur.x, &g, step, fmax, tau, w, gamma)
            .or_else(|| linear_search(a, b, &cur.x, &g, step, fmax, tau, w, gamma))
            .or_else(|| linear_search(a, b, &cur.x, &g, one, fmax, tau, w, gamma));
        let Some(next) = next else {
            // No sufficient decrease: the subproblem is solved to rounding
            // level, so move τ instead.
            if stalled {
                return match best {
                    Some((_, x)) => Ok((x, iter)),
                    None => Err((cur.x, iter)),
                };
            }
            stalled = true;
            continue;
        };
        stalled = false;
        cur = next;
        g = -a.t().dot(&cur.r);

        let s = &cur.x - &x_old;
        let y = &g - &g_old;
        let sts = s.dot(&s);
        let sty = s.dot(&y);
        step = if sty <= T::zero() {
            step_max
        } else {
            (sts / sty).max(step_min).min(step_max)
        };
        fvals[iter % MEMORY] = cur.f;
    }
}

#[allow(clippy::too_many_arguments)]
fn curvy_search<T: Real>(
    a: ArrayView2<T>,
    b: ArrayView1<T>,
    x: &Array1<T>,
    g: &Array1<T>,
    step: T,
    fmax: T,
    tau: T,
    w: ArrayView1<T>,
    gamma: T,
) -> Option<Trial<T>> {
    let mut alpha = step;
    for _ in 0..LINE_SEARCH_STEPS {
        let y = x - &g.mapv(|v| v * alpha);
        let t = trial(a, b, project_weighted_l1(y.view(), w, tau));
        let gts = g.dot(&(&t.x - x));
        if t.f <= fmax + gamma * gts {
            return Some(t);
        }
        alpha *= T::lit(0.5);
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn linear_search<T: Real>(
    a: ArrayView2<T>,
    b: ArrayView1<T>,
    x: &Array1<T>,
    g: &Array1<T>,
    step: T,
    fmax: T,
    tau: T,
    w: ArrayView1<T>,
    gamma: T,
) -> Option<Trial<T>> {
    let y = x - &g.mapv(|v| v * step);
    let dx = &project_weighted_l1(y.view(), w, tau) - x;
    let gtd = g.dot(&dx);
    if gtd >= T::zero() {
        return None;
    }
    let mut alpha = T::one();
    for _ in 0..LINE_SEARCH_STEPS {
        let t = trial(a, b, x + &dx.mapv(|v| v * alpha));
        if t.f <= fmax + gamma * alpha * gtd {
            return Some(t);
        }
        alpha *= T::lit(0.5);
    }
    None
}

/// Active-set refinement. Starting from the support and signs of `x0`,
/// solves the KKT system
///
/// ```text
/// Ψ_Sᵀ r = λ W_S s,   r = b − Ψ_S c_S,   ‖r‖₂ = σ,
/// ```
///
/// then checks sign consistency and `|ψ_jᵀ r| ≤ λ w_j` off the support,
/// adding the worst violator or dropping sign flips until the conditions
/// hold. Returns `None` if no certified point is reached.
fn polish<T: Real>(
    a: ArrayView2<T>,
    b: ArrayView1<T>,
    sigma: T,
    w: ArrayView1<T>,
    x0: &Array1<T>,
    options: &BpdnOptions<T>,
) -> Option<Array1<T>> {
    let (m, n) = a.dim();
    let max = x0.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let cut = max * T::tol_floor(1e-10);
    let mut support: Vec<(usize, T)> = x0
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > cut)
        .map(|(i, v)| (i, v.signum()))
        .collect();
    if support.len() > m {
        // An inexact iterate can carry many tiny entries; keep the largest.
        support.sort_by(|p, q| {
            x0[q.0]
                .abs()
                .partial_cmp(&x0[p.0].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        support.truncate(m);
    }
    let dual_tol = T::tol_floor(1e-9);
    // Same allowance as the final residual check, in units of ‖b‖ = 1.
    let fit = sigma * (T::one() + options.tolerance) + options.floor;
    let mut in_support = vec![false; n];
    let mut qr = IncrementalQr::new(m);
    let mut rebuild = true;

    for _ in 0..POLISH_ROUNDS {
        if rebuild {
            qr = IncrementalQr::new(m);
            in_support.iter_mut().for_each(|f| *f = false);
            for &(j, _) in &support {
                if !qr.push(a.column(j)) {
                    return None;
                }
                in_support[j] = true;
            }
            rebuild = false;
        }
        let qtb = qr.qt(b);
        let r0 = &b - &qr.q_times(&qtb);
        let r0_norm = r0.dot(&r0).sqrt();

        if r0_norm > fit {
            // Residual cannot reach σ on this support: grow it.
            let corr = a.t().dot(&r0);
            let pick = best_outside(&corr, w, &in_support)?;
            if !qr.push(a.column(pick)) {
                return None;
            }
            support.push((pick, corr[pick].signum()));
            in_support[pick] = true;
            continue;
        }
        if support.is_empty() {
            return Some(Array1::zeros(n));
        }

        let ws: Vec<T> = support.iter().map(|&(j, s)| w[j] * s).collect();
        let z = qr.solve_rt(&ws);
        let v = qr.q_times(&z);
        let v_norm = v.dot(&v).sqrt();
        let lambda = if v_norm > T::zero() {
            (sigma * sigma - r0_norm * r0_norm).max(T::zero()).sqrt() / v_norm
        } else {
            T::zero()
        };
        let c_ls = qr.solve_r(&qtb);
        let t = qr.solve_r(&z);
        let c_s: Vec<T> = c_ls
            .iter()
            .zip(&t)
            .map(|(&c, &tk)| c - lambda * tk)
            .collect();

        let before = support.len();
        let mut k = 0;
        support.retain(|&(_, s)| {
            let keep = c_s[k] * s > T::zero();
            k += 1;
            keep
        });
        if support.len() != before {
            rebuild = true;
            continue;
        }

        let y = if lambda > T::zero() {
            (&r0 + &v.mapv(|e| e * lambda)).mapv(|e| e / lambda)
        } else {
            v
        };
        let corr = a.t().dot(&y);
        let mut worst = None;
        let mut worst_val = T::one() + dual_tol;
        for j in (0..n).filter(|&j| !in_support[j]) {
            let val = corr[j].abs() / w[j];
            if val > worst_val {
                worst_val = val;
                worst = Some(j);
            }
        }
        if let Some(j) = worst {
            if support.len() >= m || !qr.push(a.column(j)) {
                return None;
            }
            support.push((j, corr[j].signum()));
            in_support[j] = true;
            continue;
        }

        let mut x = Array1::zeros(n);
        for (&(j, _), c) in support.iter().zip(c_s) {
            x[j] = c;
        }
        return Some(x);
    }
    None
}

enum Breakpoint {
    Sigma,
    Enter(usize),
    Leave(usize),
}

/// Follows the path of `min ½‖b − Ac‖² + λ‖Wc‖₁` down from the smallest `λ`
/// with a zero solution until the residual reaches `σ`. Returns `None` if
/// that takes more than `max_steps` breakpoints or the path ends first.
fn homotopy<T: Real>(
    a: ArrayView2<T>,
    b: ArrayView1<T>,
    sigma: T,
    w: ArrayView1<T>,
    max_steps: usize,
) -> Option<Array1<T>> {
    let (m, n) = a.dim();
    let mut c = Array1::zeros(n);
    if norm2(b) <= sigma {
        return Some(c);
    }
    let mut in_support = vec![false; n];
    let first = best_outside(&a.t().dot(&b), w, &in_support)?;
    let mut lambda = a.column(first).dot(&b).abs() / w[first];
    let mut support: Vec<(usize, T)> = vec![(first, a.column(first).dot(&b).signum())];
    in_support[first] = true;
    let mut qr = IncrementalQr::new(m);
    let mut rebuild = true;
    let tiny = T::tol_floor(1e-12);
    let slack = T::one() + T::tol_floor(1e-9);

    for _ in 0..max_steps {
        if rebuild {
            qr = IncrementalQr::new(m);
            for &(j, _) in &support {
                if !qr.push(a.column(j)) {
                    return None;
                }
            }
            rebuild = false;
        }
        // Path point for this support: c_S = c_LS − λ d with
        // d = (A_SᵀA_S)⁻¹ W_S s; c_S moves by γ d as λ drops by γ.
        let ws: Vec<T> = support.iter().map(|&(j, s)| w[j] * s).collect();
        let d = qr.solve_r(&qr.solve_rt(&ws));
        let c_ls = qr.solve_r(&qr.qt(b));
        c.fill(T::zero());
        for ((&(j, _), &cl), &dk) in support.iter().zip(&c_ls).zip(&d) {
            c[j] = cl - lambda * dk;
        }
        let r = &b - &a.dot(&c);
        let corr = a.t().dot(&r);

        // Breakpoints lost to rounding: a sign flip on the support or a
        // violated bound off it.
        let scale = c_ls.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if let Some(k) = support
            .iter()
            .position(|&(j, s)| c[j] * s < -(slack - T::one()) * scale)
        {
            let (j, _) = support.remove(k);
            in_support[j] = false;
            rebuild = true;
            continue;
        }
        let over = (0..n)
            .filter(|&j| !in_support[j] && corr[j].abs() > slack * lambda * w[j])
            .max_by(|&p, &q| {
                (corr[p].abs() / w[p])
                    .partial_cmp(&(corr[q].abs() / w[q]))
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        if let Some(j) = over {
            if support.len() >= m || !qr.push(a.column(j)) {
                return None;
            }
            support.push((j, corr[j].signum()));
            in_support[j] = true;
            continue;
        }

        let mut q = Array1::zeros(m);
        for (&(j, _), &dk) in support.iter().zip(&d) {
            q.scaled_add(dk, &a.column(j));
        }
        let v = a.t().dot(&q);

        let mut gamma = lambda;
        let mut event = None;
        // ‖r − γ q‖ = σ
        let (qq, rq, rr) = (q.dot(&q), r.dot(&q), r.dot(&r));
        let disc = rq * rq - qq * (rr - sigma * sigma);
        if qq > T::zero() && disc >= T::zero() {
            let g = (rq - disc.sqrt()) / qq;
            if g >= T::zero() && g <= gamma {
                gamma = g;
                event = Some(Breakpoint::Sigma);
            }
        }
        for (k, (&(j, _), &dk)) in support.iter().zip(&d).enumerate() {
            let g = -c[j] / dk;
            if dk != T::zero() && g > tiny * lambda && g < gamma {
                gamma = g;
                event = Some(Breakpoint::Leave(k));
            }
        }
        for j in (0..n).filter(|&j| !in_support[j]) {
            for g in [
                (lambda * w[j] - corr[j]) / (w[j] - v[j]),
                (lambda * w[j] + corr[j]) / (w[j] + v[j]),
            ] {
                if g > tiny * lambda && g < gamma {
                    gamma = g;
                    event = Some(Breakpoint::Enter(j));
                }
            }
        }

        lambda -= gamma;
        match event? {
            Breakpoint::Sigma => {
                for ((&(j, _), &cl), &dk) in support.iter().zip(&c_ls).zip(&d) {
                    c[j] = cl - lambda * dk;
                }
                return Some(c);
            }
            Breakpoint::Leave(k) => {
                let (j, _) = support.remove(k);
                in_support[j] = false;
                rebuild = true;
            }
            Breakpoint::Enter(j) => {
                if support.len() >= m || !qr.push(a.column(j)) {
                    return None;
                }
                let sign = (corr[j] - gamma * v[j]).signum();
                support.push((j, sign));
                in_support[j] = true;
            }
        }
    }
    None
}

fn best_outside<T: Real>(corr: &Array1<T>, w: ArrayView1<T>, in_support: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for j in (0..corr.len()).filter(|&j| !in_support[j]) {
        let val = corr[j].abs() / w[j];
        if val > T::zero() && best.is_none_or(|(_, b)| val > b) {
            best = Some((j, val));
        }
    }
    best.map(|p| p.0)
}
