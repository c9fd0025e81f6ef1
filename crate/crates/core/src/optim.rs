//! Derivative-free minimization.
//!
//! The main path is a trust-region method on a fully quadratic interpolation
//! model, in the style of Powell's UOBYQA: `(n+1)(n+2)/2` interpolation
//! points, Lagrange functions kept as the inverse of the interpolation
//! matrix, one point swapped per iteration, geometry-improving steps when
//! the set degenerates, and a resolution radius `rho` that shrinks from
//! `initial_radius` to `tolerance`.
//!
//! When the budget cannot pay for two full interpolation sets the minimizer
//! falls back to forward-difference linear models plus a coordinate poll.
//! [`OptResult::method`] records which path ran.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("initial point has {found} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("tolerance {tolerance} must be positive and no larger than the initial radius {initial_radius}")]
    InvalidRadii { tolerance: f64, initial_radius: f64 },
    #[error("objective is not finite at the initial point")]
    NonFiniteInitial,
}

/// Problem description minus the objective itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub dimension: usize,
    /// Maximum number of objective evaluations.
    pub budget: usize,
    pub initial_radius: f64,
    /// Final trust-region radius; reaching it counts as convergence.
    pub tolerance: f64,
    pub seed: u64,
}

impl ObjectiveSpec {
    pub const DEFAULT_INITIAL_RADIUS: f64 = 0.5;
    pub const DEFAULT_TOLERANCE: f64 = 1e-4;

    pub fn new(dimension: usize, budget: usize) -> Self {
        Self {
            dimension,
            budget,
            initial_radius: Self::DEFAULT_INITIAL_RADIUS,
            tolerance: Self::DEFAULT_TOLERANCE,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_radii(mut self, initial_radius: f64, tolerance: f64) -> Self {
        self.initial_radius = initial_radius;
        self.tolerance = tolerance;
        self
    }

    /// Size of a fully quadratic interpolation set in this dimension.
    pub fn interpolation_points(&self) -> usize {
        (self.dimension + 1) * (self.dimension + 2) / 2
    }

    fn validate(&self, initial: &[f64]) -> Result<(), OptimError> {
        if self.dimension == 0 {
            return Err(OptimError::ZeroDimension);
        }
        if initial.len() != self.dimension {
            return Err(OptimError::DimensionMismatch {
                expected: self.dimension,
                found: initial.len(),
            });
        }
        if !(self.tolerance > 0.0 && self.tolerance <= self.initial_radius) {
            return Err(OptimError::InvalidRadii {
                tolerance: self.tolerance,
                initial_radius: self.initial_radius,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    QuadraticTrustRegion,
    PatternSearch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The resolution radius reached the tolerance.
    Converged,
    BudgetExhausted,
    /// A non-finite objective value stopped the search.
    NonFinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_point: Vec<f64>,
    /// `NaN` only when the budget allowed no evaluation at all.
    pub best_value: f64,
    pub evaluations_used: usize,
    pub converged: bool,
    pub method: Method,
    pub termination: Termination,
    /// Objective value of every evaluation, in call order.
    pub values: Vec<f64>,
}

impl OptResult {
    /// Running minimum of [`values`](Self::values).
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.values
            .iter()
            .map(|&v| {
                if v < best {
                    best = v;
                }
                best
            })
            .collect()
    }

    /// CSV of `evaluation,value,best` rows.
    pub fn write_trace_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "evaluation,value,best")?;
        for (i, (v, b)) in self.values.iter().zip(self.best_so_far()).enumerate() {
            writeln!(out, "{},{v},{b}", i + 1)?;
        }
        out.flush()
    }
}

/// Minimizes `objective` from `initial`.
///
/// The objective may be called concurrently for speculative batches, so it
/// must be `Sync`; results are always consumed in a fixed order, which keeps
/// the search deterministic.
pub fn minimize<F>(spec: &ObjectiveSpec, objective: F, initial: &[f64]) -> Result<OptResult, OptimError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    spec.validate(initial)?;
    let mut tracker = Tracker::new(&objective, spec.budget, initial);
    let method = if 2 * spec.interpolation_points() <= spec.budget {
        Method::QuadraticTrustRegion
    } else {
        Method::PatternSearch
    };
    let termination = match method {
        Method::QuadraticTrustRegion => QuadraticSearch::run(spec, &mut tracker, initial)?,
        Method::PatternSearch => pattern_search(spec, &mut tracker, initial)?,
    };
    Ok(tracker.finish(method, termination))
}

struct Tracker<'f, F> {
    objective: &'f F,
    budget: usize,
    values: Vec<f64>,
    best_point: Vec<f64>,
    best_value: f64,
    non_finite: bool,
}

impl<'f, F: Fn(&[f64]) -> f64 + Sync> Tracker<'f, F> {
    fn new(objective: &'f F, budget: usize, initial: &[f64]) -> Self {
        Self {
            objective,
            budget,
            values: Vec::new(),
            best_point: initial.to_vec(),
            best_value: f64::NAN,
            non_finite: false,
        }
    }

    fn stopped(&self) -> bool {
        self.non_finite || self.values.len() >= self.budget
    }

    /// Evaluates as many leading points as the budget allows. Stops early
    /// (returning a shorter vector) after a non-finite value.
    fn eval_batch(&mut self, points: &[DVector<f64>]) -> Vec<f64> {
        if self.non_finite {
            return Vec::new();
        }
        let take = points.len().min(self.budget - self.values.len());
        let f = self.objective;
        let raw: Vec<f64> = if take > 1 {
            points[..take]
                .par_iter()
                .map(|p| f(p.as_slice()))
                .collect()
        } else {
            points[..take].iter().map(|p| f(p.as_slice())).collect()
        };
        let mut out = Vec::with_capacity(take);
        for (p, v) in points.iter().zip(raw) {
            // every call counts against the budget, even past a failure
            self.values.push(v);
            if self.non_finite {
                continue;
            }
            if !v.is_finite() {
                self.non_finite = true;
                continue;
            }
            if !(v >= self.best_value) {
                self.best_value = v;
                self.best_point = p.as_slice().to_vec();
            }
            out.push(v);
        }
        out
    }

    fn eval(&mut self, point: &DVector<f64>) -> Option<f64> {
        self.eval_batch(std::slice::from_ref(point)).pop()
    }

    fn finish(self, method: Method, termination: Termination) -> OptResult {
        let termination = if self.non_finite {
            Termination::NonFinite
        } else {
            termination
        };
        OptResult {
            best_point: self.best_point,
            best_value: self.best_value,
            evaluations_used: self.values.len(),
            converged: termination == Termination::Converged,
            method,
            termination,
            values: self.values,
        }
    }
}

fn exhausted<F: Fn(&[f64]) -> f64 + Sync>(t: &Tracker<'_, F>) -> Result<Termination, OptimError> {
    if t.values.first().is_some_and(|v| !v.is_finite()) {
        return Err(OptimError::NonFiniteInitial);
    }
    Ok(if t.non_finite {
        Termination::NonFinite
    } else {
        Termination::BudgetExhausted
    })
}

/// Minimizes `gᵀs + ½ sᵀHs` over `‖s‖ ≤ radius` via the eigen-decomposition
/// of `H`, including the hard case.
pub(crate) fn trust_region_step(g: &DVector<f64>, h: &DMatrix<f64>, radius: f64) -> DVector<f64> {
    let n = g.len();
    let eig = SymmetricEigen::new(h.clone());
    let q = &eig.eigenvectors;
    let lam = &eig.eigenvalues;
    let gt = q.transpose() * g;
    let lmin = lam.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = lam.iter().map(|l| l.abs()).fold(0.0, f64::max).max(1e-300);

    let norm_at = |mu: f64| -> f64 {
        (0..n)
            .map(|i| {
                let d = lam[i] + mu;
                if d > 0.0 {
                    (gt[i] / d).powi(2)
                } else if gt[i] == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .sum::<f64>()
            .sqrt()
    };
    let step_at = |mu: f64| -> DVector<f64> {
        let coords = DVector::from_fn(n, |i, _| {
            let d = lam[i] + mu;
            if d > 0.0 {
                -gt[i] / d
            } else {
                0.0
            }
        });
        q * coords
    };

    if lmin > 0.0 && norm_at(0.0) <= radius {
        return step_at(0.0);
    }
    let mu_lo = (-lmin).max(0.0);
    // components along (near-)minimal eigenvectors with negligible gradient
    let degenerate = |i: usize| lam[i] + mu_lo <= 1e-12 * scale;
    let hard = (0..n).filter(|&i| degenerate(i)).all(|i| gt[i].abs() <= 1e-14 * scale.max(g.norm()))
        && {
            let partial: f64 = (0..n)
                .filter(|&i| !degenerate(i))
                .map(|i| (gt[i] / (lam[i] + mu_lo)).powi(2))
                .sum::<f64>()
                .sqrt();
            partial < radius
        };
    if hard {
        let mut coords = DVector::from_fn(n, |i, _| {
            if degenerate(i) {
                0.0
            } else {
                -gt[i] / (lam[i] + mu_lo)
            }
        });
        let rest = radius * radius - coords.norm_squared();
        let k = (0..n).find(|&i| degenerate(i)).unwrap_or(0);
        coords[k] += rest.max(0.0).sqrt();
        return q * coords;
    }

    let mut lo = mu_lo;
    let mut hi = mu_lo + g.norm() / radius + scale;
    while norm_at(hi) > radius {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm_at(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1e-300) {
            break;
        }
    }
    step_at(hi)
}

/// Monomial basis `1, u_i, u_i²/2, u_i u_j (i<j)`.
fn monomials(u: &DVector<f64>, m: usize) -> DVector<f64> {
    let n = u.len();
    let mut phi = DVector::zeros(m);
    phi[0] = 1.0;
    let mut k = 1;
    for i in 0..n {
        phi[k] = u[i];
        k += 1;
    }
    for i in 0..n {
        for j in i..n {
            phi[k] = if i == j { 0.5 * u[i] * u[i] } else { u[i] * u[j] };
            k += 1;
        }
    }
    phi
}

/// Gradient and Hessian (in `u`) of the quadratic with coefficients `c`.
fn unpack(c: &DVector<f64>, n: usize) -> (DVector<f64>, DMatrix<f64>) {
    let g = DVector::from_fn(n, |i, _| c[1 + i]);
    let mut h = DMatrix::zeros(n, n);
    let mut k = 1 + n;
    for i in 0..n {
        for j in i..n {
            h[(i, j)] = c[k];
            h[(j, i)] = c[k];
            k += 1;
        }
    }
    (g, h)
}

struct QuadraticSearch {
    n: usize,
    m: usize,
    points: Vec<DVector<f64>>,
    values: Vec<f64>,
    base: DVector<f64>,
    scale: f64,
    /// Inverse of the interpolation matrix; column `k` holds the
    /// coefficients of the `k`-th Lagrange function.
    inverse: DMatrix<f64>,
    updates: usize,
    best: usize,
}

enum Rebuild {
    Ok,
    Singular,
}

impl QuadraticSearch {
    fn run<F: Fn(&[f64]) -> f64 + Sync>(
        spec: &ObjectiveSpec,
        tracker: &mut Tracker<'_, F>,
        initial: &[f64],
    ) -> Result<Termination, OptimError> {
        let rho_end = spec.tolerance;
        let mut rho = spec.initial_radius;
        let mut delta = rho;
        let x0 = DVector::from_column_slice(initial);
        let Some(mut search) = Self::initialize(tracker, &x0, rho) else {
            return exhausted(tracker);
        };

        loop {
            if tracker.stopped() {
                return exhausted(tracker);
            }
            let fbest = search.values[search.best];
            if search.values.iter().all(|&v| v == fbest) {
                // identical values at every interpolation point: the model is flat
                return Ok(Termination::Converged);
            }
            let xbest = search.points[search.best].clone();
            let (g, h) = search.model_at(&xbest);
            let step = trust_region_step(&g, &h, delta);
            let snorm = step.norm();
            let predicted = -(g.dot(&step) + 0.5 * step.dot(&(&h * &step)));

            if snorm < 0.5 * rho || !(predicted > 0.0) {
                let (far, dist) = search.farthest_from(&xbest);
                if dist > 2.0 * rho {
                    if !search.improve_geometry(tracker, far, rho) {
                        return exhausted(tracker);
                    }
                    continue;
                }
                if rho <= rho_end {
                    return Ok(Termination::Converged);
                }
                let next = if rho > 250.0 * rho_end {
                    0.1 * rho
                } else if rho > 16.0 * rho_end {
                    (rho * rho_end).sqrt()
                } else {
                    rho_end
                };
                delta = (0.5 * rho).max(next);
                rho = next;
                if let Rebuild::Singular = search.rebuild() {
                    match Self::initialize(tracker, &xbest, rho) {
                        Some(s) => search = s,
                        None => return exhausted(tracker),
                    }
                }
                continue;
            }

            let xnew = &xbest + &step;
            let Some(fnew) = tracker.eval(&xnew) else {
                return exhausted(tracker);
            };
            let fbest = search.values[search.best];
            let ratio = (fbest - fnew) / predicted;
            delta = if ratio <= 0.1 {
                0.5 * snorm
            } else if ratio <= 0.7 {
                (0.5 * delta).max(snorm)
            } else {
                (0.5 * delta).max(2.0 * snorm)
            };
            if delta <= 1.5 * rho {
                delta = rho;
            }

            let center = if fnew < fbest { &xnew } else { &xbest };
            let lagrange = search.lagrange_values(&xnew);
            let pick = (0..search.m)
                .filter(|&k| fnew < fbest || k != search.best)
                .map(|k| {
                    let d = (&search.points[k] - center).norm() / delta;
                    (k, lagrange[k].abs() * d.powi(2).max(1.0))
                })
                .max_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((k, _)) = pick.filter(|&(k, _)| lagrange[k].abs() > 1e-8) {
                if let Rebuild::Singular = search.replace(k, xnew, fnew, &lagrange) {
                    match Self::initialize(tracker, &search.points[search.best].clone(), rho) {
                        Some(s) => search = s,
                        None => return exhausted(tracker),
                    }
                    continue;
                }
            }

            if ratio < 0.1 {
                let xbest = search.points[search.best].clone();
                let (far, dist) = search.farthest_from(&xbest);
                if dist > 2.0 * delta && !search.improve_geometry(tracker, far, delta.max(rho)) {
                    return exhausted(tracker);
                }
            }
        }
    }

    /// Powell's starting stencil: `x0`, `x0 ± rho e_i`, then
    /// `x0 + rho (σ_i e_i + σ_j e_j)` with signs pointing downhill.
    fn initialize<F: Fn(&[f64]) -> f64 + Sync>(
        tracker: &mut Tracker<'_, F>,
        x0: &DVector<f64>,
        rho: f64,
    ) -> Option<Self> {
        let n = x0.len();
        let m = (n + 1) * (n + 2) / 2;
        let mut points = vec![x0.clone()];
        for i in 0..n {
            let mut p = x0.clone();
            p[i] += rho;
            points.push(p);
        }
        for i in 0..n {
            let mut p = x0.clone();
            p[i] -= rho;
            points.push(p);
        }
        let mut values = tracker.eval_batch(&points);
        if values.len() < points.len() {
            return None;
        }
        let sign: Vec<f64> = (0..n)
            .map(|i| if values[1 + n + i] < values[1 + i] { -1.0 } else { 1.0 })
            .collect();
        let mut pairs = Vec::with_capacity(m - points.len());
        for i in 0..n {
            for j in i + 1..n {
                let mut p = x0.clone();
                p[i] += sign[i] * rho;
                p[j] += sign[j] * rho;
                pairs.push(p);
            }
        }
        let pair_values = tracker.eval_batch(&pairs);
        if pair_values.len() < pairs.len() {
            return None;
        }
        points.extend(pairs);
        values.extend(pair_values);
        let best = argmin(&values);
        let mut search = Self {
            n,
            m,
            base: points[best].clone(),
            scale: rho,
            points,
            values,
            inverse: DMatrix::zeros(m, m),
            updates: 0,
            best,
        };
        match search.rebuild() {
            Rebuild::Ok => Some(search),
            Rebuild::Singular => None,
        }
    }

    fn to_local(&self, x: &DVector<f64>) -> DVector<f64> {
        (x - &self.base) / self.scale
    }

    /// Recenters on the best point, rescales to the set's radius and
    /// inverts the interpolation matrix from scratch.
    fn rebuild(&mut self) -> Rebuild {
        self.base = self.points[self.best].clone();
        self.scale = self
            .points
            .iter()
            .map(|p| (p - &self.base).norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let rows: Vec<_> = self
            .points
            .iter()
            .map(|p| monomials(&self.to_local(p), self.m).transpose())
            .collect();
        let matrix = DMatrix::from_rows(&rows);
        self.updates = 0;
        match matrix.try_inverse() {
            Some(inv) if inv.iter().all(|v| v.is_finite()) => {
                self.inverse = inv;
                Rebuild::Ok
            }
            _ => Rebuild::Singular,
        }
    }

    fn lagrange_values(&self, x: &DVector<f64>) -> DVector<f64> {
        self.inverse.tr_mul(&monomials(&self.to_local(x), self.m))
    }

    /// Converts a quadratic in local coordinates to gradient and Hessian in
    /// the original coordinates at `x`.
    fn derivatives_at(&self, coeffs: &DVector<f64>, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let (g, h) = unpack(coeffs, self.n);
        let u = self.to_local(x);
        let grad = (g + &h * u) / self.scale;
        let hess = h / (self.scale * self.scale);
        (grad, hess)
    }

    fn model_at(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let fbest = self.values[self.best];
        let shifted = DVector::from_iterator(self.m, self.values.iter().map(|v| v - fbest));
        let coeffs = &self.inverse * shifted;
        self.derivatives_at(&coeffs, x)
    }

    fn farthest_from(&self, x: &DVector<f64>) -> (usize, f64) {
        self.points
            .iter()
            .enumerate()
            .map(|(k, p)| (k, (p - x).norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, 0.0))
    }

    /// Swaps point `k` for `x` with a Sherman-Morrison update of the inverse.
    fn replace(&mut self, k: usize, x: DVector<f64>, fx: f64, lagrange: &DVector<f64>) -> Rebuild {
        let pivot = lagrange[k];
        let column = self.inverse.column(k).clone_owned();
        let mut row = lagrange.clone();
        row[k] -= 1.0;
        self.inverse -= (column / pivot) * row.transpose();
        self.points[k] = x;
        self.values[k] = fx;
        self.best = argmin(&self.values);
        self.updates += 1;
        if self.updates >= self.m {
            return self.rebuild();
        }
        Rebuild::Ok
    }

    /// Replaces point `k` by the point within `radius` of the best point
    /// where the `k`-th Lagrange function is largest in magnitude.
    fn improve_geometry<F: Fn(&[f64]) -> f64 + Sync>(
        &mut self,
        tracker: &mut Tracker<'_, F>,
        k: usize,
        radius: f64,
    ) -> bool {
        let xbest = self.points[self.best].clone();
        let coeffs = self.inverse.column(k).clone_owned();
        let (g, h) = self.derivatives_at(&coeffs, &xbest);
        let base_value = self.lagrange_values(&xbest)[k];
        let value = |s: &DVector<f64>| base_value + g.dot(s) + 0.5 * s.dot(&(&h * s));
        let down = trust_region_step(&g, &h, radius);
        let up = trust_region_step(&(-&g), &(-&h), radius);
        let mut step = if value(&down).abs() >= value(&up).abs() { down } else { up };
        if step.norm() < 0.5 * radius {
            // Lagrange function nearly flat: any coordinate move will do
            step = DVector::zeros(self.n);
            step[k % self.n] = radius;
        }
        let x = &xbest + step;
        let Some(fx) = tracker.eval(&x) else {
            return false;
        };
        let lagrange = self.lagrange_values(&x);
        if lagrange[k].abs() > 1e-12 {
            if let Rebuild::Singular = self.replace(k, x, fx, &lagrange) {
                return false;
            }
        }
        true
    }
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i)
}

/// Linear model from forward differences, a step along its descent
/// direction, then a seeded coordinate poll; halves the step on failure.
fn pattern_search<F: Fn(&[f64]) -> f64 + Sync>(
    spec: &ObjectiveSpec,
    tracker: &mut Tracker<'_, F>,
    initial: &[f64],
) -> Result<Termination, OptimError> {
    let n = spec.dimension;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut delta = spec.initial_radius;
    let mut x = DVector::from_column_slice(initial);
    let Some(mut fx) = tracker.eval(&x) else {
        return exhausted(tracker);
    };
    let mut order: Vec<usize> = (0..n).collect();

    loop {
        if delta < spec.tolerance {
            return Ok(Termination::Converged);
        }
        let forward: Vec<_> = (0..n)
            .map(|i| {
                let mut p = x.clone();
                p[i] += delta;
                p
            })
            .collect();
        let fvals = tracker.eval_batch(&forward);
        if fvals.len() < n {
            return exhausted(tracker);
        }
        let grad = DVector::from_fn(n, |i, _| (fvals[i] - fx) / delta);
        let mut candidates: Vec<(DVector<f64>, f64)> =
            forward.into_iter().zip(fvals).collect();
        let gnorm = grad.norm();
        if gnorm > 0.0 {
            let p = &x - &grad * (delta / gnorm);
            match tracker.eval(&p) {
                Some(v) => candidates.push((p, v)),
                None => return exhausted(tracker),
            }
        }
        let (bx, bv) = candidates
            .into_iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one candidate");
        if bv < fx {
            x = bx;
            fx = bv;
            delta *= 2.0;
            continue;
        }

        order.shuffle(&mut rng);
        let backward: Vec<_> = order
            .iter()
            .map(|&i| {
                let mut p = x.clone();
                p[i] -= delta;
                p
            })
            .collect();
        let bvals = tracker.eval_batch(&backward);
        if bvals.len() < n {
            return exhausted(tracker);
        }
        let k = argmin(&bvals);
        if bvals[k] < fx {
            x = backward[k].clone();
            fx = bvals[k];
        } else {
            delta *= 0.5;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn sphere_from_ones() {
        let spec = ObjectiveSpec::new(3, 300);
        let r = minimize(&spec, sphere, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(r.method, Method::QuadraticTrustRegion);
        assert!(r.best_value <= 1e-6, "{}", r.best_value);
        assert!(r.evaluations_used <= 300);
    }

    #[test]
    fn zero_budget_performs_no_evaluations() {
        let calls = AtomicUsize::new(0);
        let f = |x: &[f64]| {
            calls.fetch_add(1, Ordering::SeqCst);
            sphere(x)
        };
        let r = minimize(&ObjectiveSpec::new(2, 0), f, &[0.3, 0.4]).unwrap();
        assert_eq!(calls.load(Ordering::SeqCst), 0);
        assert_eq!(r.best_point, vec![0.3, 0.4]);
        assert!(r.best_value.is_nan());
        assert!(!r.converged);
        assert_eq!(r.termination, Termination::BudgetExhausted);
    }

    #[test]
    fn constant_objective_converges() {
        for budget in [20, 1000] {
            let r = minimize(&ObjectiveSpec::new(3, budget), |_: &[f64]| 4.25, &[1.0, 2.0, 3.0]).unwrap();
            assert_eq!(r.best_value, 4.25);
            assert!(r.converged, "budget {budget}: {:?}", r.termination);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(
            minimize(&ObjectiveSpec::new(0, 10), sphere, &[]).unwrap_err(),
            OptimError::ZeroDimension
        );
        assert_eq!(
            minimize(&ObjectiveSpec::new(2, 10), sphere, &[1.0]).unwrap_err(),
            OptimError::DimensionMismatch { expected: 2, found: 1 }
        );
        let bad = ObjectiveSpec::new(1, 10).with_radii(0.5, 0.0);
        assert!(matches!(minimize(&bad, sphere, &[1.0]), Err(OptimError::InvalidRadii { .. })));
    }

    #[test]
    fn non_finite_aborts_with_best_finite() {
        let f = |x: &[f64]| if x[0] > 1.2 { f64::NAN } else { (x[0] - 3.0).powi(2) + x[1] * x[1] };
        for budget in [10, 400] {
            let r = minimize(&ObjectiveSpec::new(2, budget), f, &[1.0, 0.0]).unwrap();
            assert_eq!(r.termination, Termination::NonFinite);
            assert!(r.best_value.is_finite());
            assert_eq!(f(&r.best_point), r.best_value);
        }
        assert_eq!(
            minimize(&ObjectiveSpec::new(1, 50), |_: &[f64]| f64::INFINITY, &[0.0]).unwrap_err(),
            OptimError::NonFiniteInitial
        );
    }

    #[test]
    fn pattern_search_used_when_budget_is_small() {
        let spec = ObjectiveSpec::new(6, 40);
        let start = [1.0; 6];
        let r = minimize(&spec, sphere, &start).unwrap();
        assert_eq!(r.method, Method::PatternSearch);
        assert!(r.best_value < sphere(&start));
        assert!(r.evaluations_used <= 40);
    }

    #[test]
    fn method_switches_at_two_interpolation_sets() {
        // n = 2 needs 6 interpolation points
        let spec = ObjectiveSpec::new(2, 12);
        assert_eq!(minimize(&spec, sphere, &[0.5, -0.5]).unwrap().method, Method::QuadraticTrustRegion);
        let spec = ObjectiveSpec::new(2, 11);
        assert_eq!(minimize(&spec, sphere, &[0.5, -0.5]).unwrap().method, Method::PatternSearch);
    }

    #[test]
    fn trust_region_step_cases() {
        // interior Newton step
        let g = DVector::from_vec(vec![1.0, -2.0]);
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 4.0]));
        let s = trust_region_step(&g, &h, 10.0);
        assert!((s - DVector::from_vec(vec![-0.5, 0.5])).norm() < 1e-12);
        // boundary step
        let s = trust_region_step(&g, &h, 0.1);
        assert!((s.norm() - 0.1).abs() < 1e-9);
        assert!(g.dot(&s) < 0.0);
        // negative curvature with zero gradient: hard case goes to boundary
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        let s = trust_region_step(&DVector::zeros(2), &h, 0.3);
        assert!((s.norm() - 0.3).abs() < 1e-12);
        assert!(s[1].abs() > 0.29);
    }

    /// Exact-gradient steepest check: the step must not be beaten by a
    /// dense sampling of the ball.
    #[test]
    fn trust_region_step_is_near_optimal() {
        let g = DVector::from_vec(vec![0.3, -0.7]);
        let h = DMatrix::from_row_slice(2, 2, &[-1.0, 0.4, 0.4, 2.0]);
        let r = 0.8;
        let q = |s: &DVector<f64>| g.dot(s) + 0.5 * s.dot(&(&h * s));
        let best = q(&trust_region_step(&g, &h, r));
        for a in 0..720 {
            for rad in 1..=20 {
                let t = a as f64 * std::f64::consts::PI / 360.0;
                let s = DVector::from_vec(vec![t.cos(), t.sin()]) * (r * rad as f64 / 20.0);
                assert!(best <= q(&s) + 1e-9);
            }
        }
    }

    fn spd_quadratic(n: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let h = &a * a.transpose() + DMatrix::identity(n, n) * 0.5;
        let xstar = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        let fmin = rng.random_range(-5.0..5.0);
        (h, xstar, fmin)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn quadratics_are_minimized_exactly(n in 1usize..=5, seed in any::<u64>()) {
            let (h, xstar, fmin) = spd_quadratic(n, seed);
            let f = |x: &[f64]| {
                let d = DVector::from_column_slice(x) - &xstar;
                fmin + 0.5 * d.dot(&(&h * &d))
            };
            let m = (n + 1) * (n + 2) / 2;
            let spec = ObjectiveSpec::new(n, 50 * m);
            let r = minimize(&spec, f, &vec![0.0; n]).unwrap();
            prop_assert!((r.best_value - fmin).abs() <= 1e-8, "n={} got {} want {}", n, r.best_value, fmin);
        }

        #[test]
        fn budget_monotonicity_and_determinism(n in 1usize..=6, budget in 0usize..200, seed in any::<u64>()) {
            let calls = AtomicUsize::new(0);
            let f = |x: &[f64]| {
                calls.fetch_add(1, Ordering::SeqCst);
                x.iter().enumerate().map(|(i, v)| (v - i as f64).powi(2) + (3.0 * v).sin()).sum::<f64>()
            };
            let spec = ObjectiveSpec::new(n, budget).with_seed(seed);
            let start = vec![0.5; n];
            let r = minimize(&spec, f, &start).unwrap();
            prop_assert_eq!(calls.load(Ordering::SeqCst), r.evaluations_used);
            prop_assert!(r.evaluations_used <= budget);
            let trace = r.best_so_far();
            prop_assert!(trace.windows(2).all(|w| w[1] <= w[0]));
            if budget > 0 {
                prop_assert_eq!(*trace.last().unwrap(), r.best_value);
                prop_assert_eq!(f(&r.best_point), r.best_value);
            }
            let again = minimize(&spec, f, &start).unwrap();
            prop_assert_eq!(format!("{:?}", again), format!("{:?}", r));
        }
    }
}
