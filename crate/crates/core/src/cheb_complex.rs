//! Weighted Chebyshev polynomials on discretized planar sets.
//!
//! Lawson's iteratively reweighted least squares runs in an Arnoldi basis
//! orthonormal on the grid, which keeps degrees up to ~50 well conditioned.
//! The Lawson iterate is then polished by Newton's method on the KKT system
//! of min t s.t. |w(z_j) p(z_j)|² ≤ t over a small active set, with the
//! active points allowed to move continuously along the curve.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::poly::{balance, eigenvalues_c, unit_monomial_to_x, C64};
use crate::potential::{arc_density, potential_for, szego_value, PotentialData, DEFAULT_EQ_NODES};
use crate::sets::{discretize, BoundaryGrid, DiscretizationConfig, Projector, Segment, SetDescriptor};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAXITER: usize = 500;

/// Lawson hands over to the KKT polish once its relative duality gap is this small.
const LAWSON_HANDOVER: f64 = 1e-4;
const LAWSON_FIRST_PASS: usize = 100;
/// Lawson iterations between polish attempts once the first handover fails.
const LAWSON_CHUNK: usize = 400;

#[derive(Clone, Copy)]
pub enum Weight<'a> {
    Unit,
    /// One nonnegative value per grid point; disables off-grid refinement.
    Values(&'a [f64]),
    Function(&'a (dyn Fn(C64) -> f64 + Sync)),
}

impl Weight<'_> {
    fn at(&self, i: usize, z: C64) -> f64 {
        match self {
            Weight::Unit => 1.0,
            Weight::Values(v) => v[i],
            Weight::Function(f) => f(z),
        }
    }

    fn off_grid(&self, z: C64) -> Option<f64> {
        match self {
            Weight::Unit => Some(1.0),
            Weight::Values(_) => None,
            Weight::Function(f) => Some(f(z)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexOptions {
    pub tol: f64,
    pub maxiter: usize,
    /// Move extremal points off the grid along the underlying curve.
    pub refine: bool,
}

impl Default for ComplexOptions {
    fn default() -> Self {
        ComplexOptions {
            tol: DEFAULT_TOL,
            maxiter: DEFAULT_MAXITER,
            refine: true,
        }
    }
}

/// Orthonormal polynomial basis q_0..q_n from Arnoldi on the normalized grid.
#[derive(Debug, Clone)]
struct Basis {
    center: C64,
    scale: f64,
    /// (n+1) × n Hessenberg matrix of the recurrence.
    h: DMatrix<C64>,
    /// Leading coefficient of the monic degree-n polynomial relative to q_n.
    gamma: C64,
    n: usize,
}

impl Basis {
    fn build(points: &[C64], n: usize) -> Result<(Basis, DMatrix<C64>)> {
        let m = points.len();
        let center = points.iter().sum::<C64>() / m as f64;
        let scale = points.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
        if !(scale > 0.0) {
            return Err(Error::RankDeficiency);
        }
        let zs: Vec<C64> = points.iter().map(|z| (z - center) / scale).collect();
        let mut q = DMatrix::<C64>::zeros(m, n + 1);
        let mut h = DMatrix::<C64>::zeros(n + 1, n);
        for i in 0..m {
            q[(i, 0)] = C64::new(1.0, 0.0);
        }
        let inner = |a: &[C64], b: &[C64]| -> C64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>() / m as f64 };
        for k in 0..n {
            let mut v: Vec<C64> = (0..m).map(|i| zs[i] * q[(i, k)]).collect();
            for _pass in 0..2 {
                for j in 0..=k {
                    let qj: Vec<C64> = q.column(j).iter().cloned().collect();
                    let c = inner(&qj, &v);
                    h[(j, k)] += c;
                    for i in 0..m {
                        v[i] -= c * qj[i];
                    }
                }
            }
            let nv = inner(&v, &v).re.sqrt();
            if !(nv > 1e-13) {
                return Err(Error::RankDeficiency);
            }
            h[(k + 1, k)] = C64::new(nv, 0.0);
            for i in 0..m {
                q[(i, k + 1)] = v[i] / nv;
            }
        }
        let gamma = (0..n).fold(C64::new(1.0, 0.0), |acc, k| acc * h[(k + 1, k)]);
        Ok((
            Basis {
                center,
                scale,
                h,
                gamma,
                n,
            },
            q,
        ))
    }

    fn unit(&self, z: C64) -> C64 {
        (z - self.center) / self.scale
    }

    /// q_0..q_n at z.
    fn eval(&self, z: C64) -> Vec<C64> {
        let t = self.unit(z);
        let mut q = Vec::with_capacity(self.n + 1);
        q.push(C64::new(1.0, 0.0));
        for k in 0..self.n {
            let mut v = t * q[k];
            for j in 0..=k {
                v -= self.h[(j, k)] * q[j];
            }
            q.push(v / self.h[(k + 1, k)]);
        }
        q
    }

    /// Values and t-derivatives of q_0..q_n.
    fn eval_with_derivative(&self, z: C64) -> (Vec<C64>, Vec<C64>) {
        let t = self.unit(z);
        let mut q = vec![C64::new(1.0, 0.0)];
        let mut d = vec![C64::new(0.0, 0.0)];
        for k in 0..self.n {
            let mut v = t * q[k];
            let mut dv = q[k] + t * d[k];
            for j in 0..=k {
                v -= self.h[(j, k)] * q[j];
                dv -= self.h[(j, k)] * d[j];
            }
            q.push(v / self.h[(k + 1, k)]);
            d.push(dv / self.h[(k + 1, k)]);
        }
        (q, d)
    }

    /// Monic polynomial γ q_n - Σ a_k q_k in the unit variable.
    fn poly_unit(&self, a: &[C64], q: &[C64]) -> C64 {
        let mut v = self.gamma * q[self.n];
        for k in 0..self.n {
            v -= a[k] * q[k];
        }
        v
    }
}

/// Weighted Chebyshev polynomial on a grid.
#[derive(Debug, Clone)]
pub struct ComplexChebSolution {
    pub degree: usize,
    /// Monic monomial coefficients, lowest degree first.
    pub coeffs: Vec<C64>,
    /// max |w T| over the grid and the refined extremal points.
    pub norm: f64,
    pub active: Vec<C64>,
    pub iterations: usize,
    /// Relative gap between `norm` and the certified lower bound.
    pub duality_gap: f64,
    /// Increase of the norm when the grid density is doubled.
    pub refinement_delta: f64,
    pub widom_factor: Option<f64>,
    basis: Basis,
    a: Vec<C64>,
}

/// JSON form of a complex solution; complex numbers as [re, im].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexRecord {
    pub degree: usize,
    pub coeffs: Vec<[f64; 2]>,
    pub norm: f64,
    pub active: Vec<[f64; 2]>,
    pub iterations: usize,
    pub duality_gap: f64,
    pub refinement_delta: f64,
    pub widom_factor: Option<f64>,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

impl ComplexChebSolution {
    /// T(z) evaluated through the stable recurrence.
    pub fn eval(&self, z: C64) -> C64 {
        let q = self.basis.eval(z);
        self.basis.poly_unit(&self.a, &q) * self.basis.scale.powi(self.degree as i32)
    }

    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let (q, d) = self.basis.eval_with_derivative(z);
        let s = self.basis.scale;
        let f = s.powi(self.degree as i32);
        (self.basis.poly_unit(&self.a, &q) * f, self.basis.poly_unit(&self.a, &d) * (f / s))
    }

    /// Zeros from the Hessenberg matrix of the recurrence, Newton-polished.
    pub fn zeros(&self) -> Result<Vec<C64>> {
        let n = self.degree;
        let b = &self.basis;
        // z q(z)ᵀ = q(z)ᵀ (H_n + (h_{n,n-1}/γ) a e_nᵀ) at every zero of the monic polynomial
        let mut m = b.h.rows(0, n).into_owned();
        let f = b.h[(n, n - 1)] / b.gamma;
        for k in 0..n {
            m[(k, n - 1)] += f * self.a[k];
        }
        let mut mt = m.transpose();
        balance(&mut mt);
        let ev = eigenvalues_c(mt).ok_or(Error::RankDeficiency)?;
        Ok(ev
            .into_iter()
            .map(|t| {
                let mut z = b.center + t * b.scale;
                let mut best = (self.eval(z).norm(), z);
                for _ in 0..6 {
                    let (p, dp) = self.eval_with_derivative(z);
                    if dp.norm() == 0.0 {
                        break;
                    }
                    z -= p / dp;
                    let v = self.eval(z).norm();
                    if v < best.0 {
                        best = (v, z);
                    }
                }
                best.1
            })
            .collect())
    }

    /// Center and radius of the disk the basis is normalized to.
    pub fn frame(&self) -> (C64, f64) {
        (self.basis.center, self.basis.scale)
    }

    pub fn record(&self) -> ComplexRecord {
        ComplexRecord {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|&z| pair(z)).collect(),
            norm: self.norm,
            active: self.active.iter().map(|&z| pair(z)).collect(),
            iterations: self.iterations,
            duality_gap: self.duality_gap,
            refinement_delta: self.refinement_delta,
            widom_factor: self.widom_factor,
        }
    }
}

/// A point where |w p| is locally maximal, with its local curve chart.
#[derive(Debug, Clone)]
struct ActivePoint {
    z: C64,
    w: f64,
    anchor: usize,
    u: f64,
    lambda: f64,
    /// Previous chart location and its relocation step, for secant acceleration.
    last: Option<(f64, f64)>,
}

struct Problem<'a> {
    grid: &'a BoundaryGrid,
    keep: Vec<usize>,
    weights: Vec<f64>,
    weight: Weight<'a>,
    projector: Option<Projector>,
    /// Neighbours along the ordered segments, per grid index.
    prev: Vec<Option<usize>>,
    next: Vec<Option<usize>>,
}

impl<'a> Problem<'a> {
    fn new(grid: &'a BoundaryGrid, weight: Weight<'a>, refine: bool) -> Result<Self> {
        let m = grid.len();
        if let Weight::Values(v) = weight {
            if v.len() != m {
                return Err(Error::InvalidInput(format!("{} weights for {m} grid points", v.len())));
            }
        }
        let mut weights = Vec::with_capacity(m);
        for (i, &z) in grid.points.iter().enumerate() {
            let w = weight.at(i, z);
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidInput(format!("weight {w} at {z}")));
            }
            weights.push(w);
        }
        let keep: Vec<usize> = (0..m).filter(|&i| weights[i] > 0.0).collect();
        let (mut prev, mut next) = (vec![None; m], vec![None; m]);
        for &Segment { start, len, closed } in &grid.segments {
            for k in 0..len {
                let i = start + k;
                if k > 0 {
                    prev[i] = Some(i - 1);
                } else if closed {
                    prev[i] = Some(start + len - 1);
                }
                if k + 1 < len {
                    next[i] = Some(i + 1);
                } else if closed {
                    next[i] = Some(start);
                }
            }
        }
        let projector = if refine && !matches!(weight, Weight::Values(_)) {
            Projector::for_source(&grid.source).ok().filter(|p| p.refinable())
        } else {
            None
        };
        Ok(Problem {
            grid,
            keep,
            weights,
            weight,
            projector,
            prev,
            next,
        })
    }

    /// Point on the curve at chart coordinate u ∈ [-1, 1] around grid index i.
    fn chart(&self, i: usize, u: f64) -> Option<C64> {
        let p = self.projector.as_ref()?;
        let z0 = self.grid.points[i];
        if u == 0.0 {
            return Some(z0);
        }
        let (zl, zr) = (self.prev[i].map(|j| self.grid.points[j]), self.next[i].map(|j| self.grid.points[j]));
        let z = match (zl, zr) {
            (Some(l), Some(r)) => l * (u * (u - 1.0) / 2.0) + z0 * (1.0 - u * u) + r * (u * (u + 1.0) / 2.0),
            (None, Some(r)) if u > 0.0 => z0 + (r - z0) * u,
            (Some(l), None) if u < 0.0 => z0 + (z0 - l) * u,
            _ => return None,
        };
        Some(p.project(z))
    }

    fn chart_range(&self, i: usize) -> (f64, f64) {
        if self.projector.is_none() {
            return (0.0, 0.0);
        }
        let lo = if self.prev[i].is_some() { -1.0 } else { 0.0 };
        let hi = if self.next[i].is_some() { 1.0 } else { 0.0 };
        (lo, hi)
    }

    /// Refined maximum of |w p| in the chart around grid index i: (value, u, z).
    fn refined_max<R: Fn(&[C64], C64, f64) -> C64>(&self, i: usize, coef: &[C64], eval_r: &R) -> Option<(f64, f64, C64)> {
        let (lo, hi) = self.chart_range(i);
        if hi <= lo {
            return None;
        }
        let f = |u: f64| -> f64 {
            match self.chart(i, u) {
                Some(z) => self.weight.off_grid(z).map_or(0.0, |wz| eval_r(coef, z, wz).norm()),
                None => 0.0,
            }
        };
        let u = golden_max(&f, lo, hi, 0.0);
        let z = self.chart(i, u)?;
        Some((f(u), u, z))
    }

    /// Grid indices that are local maxima of `vals` along their segments.
    fn local_maxima(&self, vals: &[f64]) -> Vec<usize> {
        let m = self.grid.len();
        if self.grid.segments.is_empty() {
            return (0..m).filter(|&i| self.weights[i] > 0.0).collect();
        }
        (0..m)
            .filter(|&i| {
                self.weights[i] > 0.0
                    && self.prev[i].is_none_or(|j| vals[i] >= vals[j])
                    && self.next[i].is_none_or(|j| vals[i] >= vals[j])
            })
            .collect()
    }
}

/// Weighted Chebyshev polynomial of degree n on a grid.
pub fn chebyshev_complex(grid: &BoundaryGrid, n: usize, weight: Weight, opts: &ComplexOptions) -> Result<ComplexChebSolution> {
    if n == 0 {
        return Err(Error::InvalidInput("degree must be at least 1".into()));
    }
    if grid.len() < 4 * (n + 1) {
        return Err(Error::RankDeficiency);
    }
    let prob = Problem::new(grid, weight, opts.refine)?;
    let m = prob.keep.len();
    if m < n + 1 {
        return Err(Error::RankDeficiency);
    }
    let pts: Vec<C64> = prob.keep.iter().map(|&i| grid.points[i]).collect();
    let (basis, q) = Basis::build(&pts, n)?;
    let w: Vec<f64> = prob.keep.iter().map(|&i| prob.weights[i]).collect();
    let mut a_mat = DMatrix::<C64>::zeros(m, n);
    let mut b = DVector::<C64>::zeros(m);
    for i in 0..m {
        for k in 0..n {
            a_mat[(i, k)] = q[(i, k)] * w[i];
        }
        b[i] = q[(i, n)] * basis.gamma * w[i];
    }

    let eval_r = |a: &[C64], z: C64, wz: f64| -> C64 {
        let qz = basis.eval(z);
        basis.poly_unit(a, &qz) * wz
    };
    let grid_vals = |a: &[C64]| -> Vec<f64> {
        let mut v = vec![0.0; grid.len()];
        let av = DVector::from_column_slice(a);
        let r = &b - &a_mat * av;
        for (k, &i) in prob.keep.iter().enumerate() {
            v[i] = r[k].norm();
        }
        v
    };

    let mut lawson = Lawson::new(m, n);
    let first_pass = opts.maxiter.min(LAWSON_FIRST_PASS);
    let mut coef = Vec::new();
    let mut duality_gap = f64::INFINITY;
    let mut lower = 0.0;
    let mut extra: Vec<C64> = Vec::new();
    // a failed polish resumes Lawson with the full budget and the final target
    // later stages resume Lawson in chunks, retrying the polish after each
    let mut stages = vec![(first_pass, opts.tol.max(LAWSON_HANDOVER))];
    let mut until = first_pass;
    while until < opts.maxiter {
        until = (until + LAWSON_CHUNK).min(opts.maxiter);
        stages.push((until, opts.tol));
    }
    for (pass, (budget, target)) in stages.into_iter().enumerate() {
        if pass == 1 {
            // restart from uniform mass with the plain exponent
            lawson.lambda = vec![1.0 / m as f64; m];
            lawson.accelerate = false;
        }
        lawson.run(&a_mat, &b, budget, target)?;
        coef = lawson.best_coef.clone();
        duality_gap = lawson.gap;
        lower = lawson.lower;
        extra.clear();
        if duality_gap <= opts.tol {
            break;
        }
        let active = initial_active(&prob, &grid_vals(&coef), &lawson.lambda, n);
        if let Some((a2, t, act)) = kkt_polish(&prob, &basis, coef.clone(), active, opts.tol, &eval_r, &grid_vals) {
            let vals = grid_vals(&a2);
            let mut mx = vals.iter().cloned().fold(0.0, f64::max);
            for p in &act {
                mx = mx.max(eval_r(&a2, p.z, p.w).norm());
            }
            // √t is only the level of a possibly unconverged system; the
            // weighted least-squares minimum is a bound for any λ ≥ 0
            let lb = weighted_ls_lower(&basis, &act).min(t.sqrt());
            let g2 = ((mx - lb) / mx).max(0.0);
            if g2 < duality_gap {
                coef = a2;
                duality_gap = g2;
                lower = lb;
                extra = act.iter().map(|p| p.z).collect();
            }
        }
        if duality_gap <= opts.tol {
            break;
        }
    }
    let iterations = lawson.iterations;
    if duality_gap > opts.tol.max(1e-6) {
        return Err(Error::NonConvergence {
            iterations,
            residual: duality_gap,
        });
    }

    // report
    let vals = grid_vals(&coef);
    let mut mx = vals.iter().cloned().fold(0.0, f64::max);
    for &z in &extra {
        if let Some(wz) = weight.off_grid(z) {
            mx = mx.max(eval_r(&coef, z, wz).norm());
        }
    }
    for i in prob.local_maxima(&vals) {
        if let Some((v, _, z)) = prob.refined_max(i, &coef, &eval_r) {
            if v > mx {
                mx = v;
                extra.push(z);
            }
        }
    }
    if mx > 0.0 {
        duality_gap = duality_gap.max((mx - lower) / mx);
    }
    let scale_n = basis.scale.powi(n as i32);
    let norm = mx * scale_n;
    let mut active: Vec<C64> = extra.clone();
    for &i in &prob.keep {
        if vals[i] >= (1.0 - 10.0 * opts.tol) * mx && !active.iter().any(|z| (z - grid.points[i]).norm() < 1e-14) {
            active.push(grid.points[i]);
        }
    }
    // doubled grid: midpoints of consecutive samples projected onto the curve
    let mut doubled = mx;
    if let Some(_p) = &prob.projector {
        for &i in &prob.keep {
            if prob.next[i].is_some() {
                if let Some(z) = prob.chart(i, 0.5) {
                    if let Some(wz) = weight.off_grid(z) {
                        doubled = doubled.max(eval_r(&coef, z, wz).norm());
                    }
                }
            }
        }
    } else if !grid.segments.is_empty() {
        for &i in &prob.keep {
            if let Some(j) = prob.next[i] {
                if prob.weights[j] > 0.0 {
                    let z = 0.5 * (grid.points[i] + grid.points[j]);
                    if let Some(wz) = weight.off_grid(z) {
                        doubled = doubled.max(eval_r(&coef, z, wz).norm());
                    }
                }
            }
        }
    }
    let coeffs = monomial_coeffs(&basis, &coef);
    let pd = potential_for(&grid.source).ok();
    let widom_factor = match (&weight, pd) {
        (Weight::Unit, Some(pd)) => Some((norm.ln() - n as f64 * pd.capacity.ln()).exp()),
        _ => None,
    };
    Ok(ComplexChebSolution {
        degree: n,
        coeffs,
        norm,
        active,
        iterations,
        duality_gap,
        refinement_delta: (doubled - mx) * scale_n,
        widom_factor,
        basis,
        a: coef,
    })
}

fn monomial_coeffs(basis: &Basis, a: &[C64]) -> Vec<C64> {
    let n = basis.n;
    let zero = C64::new(0.0, 0.0);
    // monomial expansions of q_k in the unit variable
    let mut qs: Vec<Vec<C64>> = vec![vec![C64::new(1.0, 0.0)]];
    for k in 0..n {
        let mut v = vec![zero; k + 2];
        for (j, &c) in qs[k].iter().enumerate() {
            v[j + 1] += c;
        }
        for j in 0..=k {
            for (i, &c) in qs[j].iter().enumerate() {
                v[i] -= basis.h[(j, k)] * c;
            }
        }
        let hk = basis.h[(k + 1, k)];
        qs.push(v.into_iter().map(|c| c / hk).collect());
    }
    let mut p = vec![zero; n + 1];
    for (i, &c) in qs[n].iter().enumerate() {
        p[i] += basis.gamma * c;
    }
    for k in 0..n {
        for (i, &c) in qs[k].iter().enumerate() {
            p[i] -= a[k] * c;
        }
    }
    p[n] = C64::new(1.0, 0.0);
    let s = C64::new(basis.scale, 0.0);
    let sn = basis.scale.powi(n as i32);
    let mut out: Vec<C64> = unit_monomial_to_x(&p, basis.center, s).into_iter().map(|c| c * sn).collect();
    out[n] = C64::new(1.0, 0.0);
    out
}

/// Lawson's iteration: λ ← λ·(|r|/max|r|)^β, with β doubling every 50 steps.
struct Lawson {
    lambda: Vec<f64>,
    best_coef: Vec<C64>,
    best_max: f64,
    lower: f64,
    gap: f64,
    iterations: usize,
    /// Exponents above one speed up Lawson but can starve points of mass for good.
    accelerate: bool,
}

impl Lawson {
    fn new(m: usize, n: usize) -> Self {
        Lawson {
            lambda: vec![1.0 / m as f64; m],
            best_coef: vec![C64::new(0.0, 0.0); n],
            best_max: f64::INFINITY,
            lower: 0.0,
            gap: f64::INFINITY,
            iterations: 0,
            accelerate: true,
        }
    }

    fn run(&mut self, a_mat: &DMatrix<C64>, b: &DVector<C64>, until: usize, target: f64) -> Result<()> {
        let (m, n) = a_mat.shape();
        while self.iterations < until {
            let it = self.iterations;
            self.iterations += 1;
            let sl: Vec<f64> = self.lambda.iter().map(|l| l.sqrt()).collect();
            let bw = DMatrix::from_fn(m, n, |i, k| a_mat[(i, k)] * sl[i]);
            let rhs_w = DVector::from_fn(m, |i, _| b[i] * sl[i]);
            let g = bw.adjoint() * &bw;
            let rhs = bw.adjoint() * rhs_w;
            let sol = match g.clone().cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => g.lu().solve(&rhs).ok_or(Error::RankDeficiency)?,
            };
            let r = b - a_mat * &sol;
            let mags: Vec<f64> = r.iter().map(|v| v.norm()).collect();
            let mx = mags.iter().cloned().fold(0.0, f64::max);
            // min over monic p of Σλ|w p|² bounds the minimax value from below
            let lb = self.lambda.iter().zip(&mags).map(|(l, v)| l * v * v).sum::<f64>().sqrt();
            self.lower = self.lower.max(lb);
            if mx < self.best_max {
                self.best_max = mx;
                self.best_coef = sol.iter().cloned().collect();
            }
            self.gap = if self.best_max > 0.0 {
                (self.best_max - self.lower) / self.best_max
            } else {
                0.0
            };
            if self.gap <= target {
                break;
            }
            let beta = if self.accelerate { 2f64.powi(((it / 50) as i32).min(3)) } else { 1.0 };
            let mut s = 0.0;
            for (l, v) in self.lambda.iter_mut().zip(&mags) {
                *l *= (v / mx).powf(beta);
                s += *l;
            }
            for l in self.lambda.iter_mut() {
                *l /= s;
            }
        }
        Ok(())
    }
}

/// Local maxima of the residual ranked by the Lawson mass around them.
fn initial_active(prob: &Problem, vals: &[f64], lambda: &[f64], n: usize) -> Vec<ActivePoint> {
    let grid = prob.grid;
    let mut full_lambda = vec![0.0; grid.len()];
    for (k, &i) in prob.keep.iter().enumerate() {
        full_lambda[i] = lambda[k];
    }
    let mut cand: Vec<(f64, usize)> = prob
        .local_maxima(vals)
        .into_iter()
        .map(|i| {
            let mut s = full_lambda[i];
            let (mut l, mut r) = (prob.prev[i], prob.next[i]);
            for _ in 0..2 {
                if let Some(j) = l {
                    s += full_lambda[j];
                    l = prob.prev[j];
                }
                if let Some(j) = r {
                    s += full_lambda[j];
                    r = prob.next[j];
                }
            }
            (s, i)
        })
        .collect();
    cand.sort_by(|x, y| y.0.total_cmp(&x.0));
    cand.truncate(2 * n + 1);
    let total: f64 = cand.iter().map(|c| c.0).sum();
    cand.iter()
        .map(|&(l, i)| ActivePoint {
            z: grid.points[i],
            w: prob.weights[i],
            anchor: i,
            u: 0.0,
            lambda: if total > 0.0 { l / total } else { 0.0 },
            last: None,
        })
        .collect()
}

/// Newton on the KKT system with continuous relocation of the active points.
#[allow(clippy::too_many_arguments)]
fn kkt_polish<R, G>(
    prob: &Problem,
    basis: &Basis,
    mut coef: Vec<C64>,
    mut active: Vec<ActivePoint>,
    tol: f64,
    eval_r: &R,
    grid_vals: &G,
) -> Option<(Vec<C64>, f64, Vec<ActivePoint>)>
where
    R: Fn(&[C64], C64, f64) -> C64,
    G: Fn(&[C64]) -> Vec<f64>,
{
    let e0 = grid_vals(&coef).iter().cloned().fold(0.0, f64::max);
    if !(e0 > 0.0) {
        return None;
    }
    let mut t = 1.0;
    let mut last_t = 0.0;
    let mut added = false;
    for _round in 0..40 {
        // relocate each active point to the local maximum of |w p| in its chart
        if prob.projector.is_some() {
            for p in active.iter_mut() {
                let (lo, hi) = prob.chart_range(p.anchor);
                if hi > lo {
                    let f = |u: f64| -> f64 {
                        match prob.chart(p.anchor, u) {
                            Some(z) => prob.weight.off_grid(z).map_or(0.0, |wz| eval_r(&coef, z, wz).norm()),
                            None => 0.0,
                        }
                    };
                    let target = golden_max(&f, lo, hi, p.u);
                    let d = target - p.u;
                    // the relocation map tends to overshoot; a secant step on u - g(u) damps it
                    let mut u = target;
                    if let Some((u0, d0)) = p.last {
                        let den = d - d0;
                        if den.abs() > 1e-14 && (p.u - u0).abs() > 1e-14 {
                            let us = p.u - d * (p.u - u0) / den;
                            if us >= lo && us <= hi && f(us) >= f(p.u) {
                                u = us;
                            }
                        }
                    }
                    p.last = Some((p.u, d));
                    if let Some(z) = prob.chart(p.anchor, u) {
                        p.u = u;
                        p.z = z;
                        p.w = prob.weight.off_grid(z).unwrap_or(p.w);
                    }
                }
            }
        }
        let (c2, t2, lam, fnorm) = kkt_newton(basis, &active, &coef, e0)?;
        // an extremal set of a degree-n problem has at least n+1 points
        let can_drop = active.len() > basis.n + 1;
        let neg = lam.iter().cloned().enumerate().min_by(|x, y| x.1.total_cmp(&y.1)).filter(|p| p.1 < -1e-12);
        if fnorm > 1e-10 && can_drop && neg.is_none() {
            // no common level exists: a point far below it is not active
            let mods: Vec<f64> = active.iter().map(|p| eval_r(&c2, p.z, p.w).norm()).collect();
            let top = mods.iter().cloned().fold(0.0, f64::max);
            let (idx, low) = mods.iter().cloned().enumerate().min_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
            if low < 0.99 * top {
                coef = c2;
                active.remove(idx);
                continue;
            }
        }
        coef = c2;
        t = t2;
        for (p, l) in active.iter_mut().zip(&lam) {
            p.lambda = *l;
        }
        // drop the most negative multiplier; a rejected newcomer instead
        // takes the place of the active point on the same peak
        let newcomer = std::mem::take(&mut added);
        if let Some((idx, _)) = neg {
            if can_drop {
                let swap = if newcomer && idx + 1 == active.len() {
                    nearest_active(prob, &active[..idx], active[idx].anchor, SWAP_REACH)
                } else {
                    None
                };
                active.remove(swap.unwrap_or(idx));
                continue;
            }
        }
        // add the worst violator among grid maxima not already active
        let vals = grid_vals(&coef);
        let level = t.sqrt();
        let maxima = prob.local_maxima(&vals);
        let mut worst: Option<(f64, usize)> = None;
        for i in maxima {
            if active.iter().any(|p| p.anchor == i || prob.prev[i] == Some(p.anchor) || prob.next[i] == Some(p.anchor)) {
                continue;
            }
            let v = prob.refined_max(i, &coef, eval_r).map_or(vals[i], |r| r.0.max(vals[i]));
            if v > level * (1.0 + 0.01 * tol) && worst.is_none_or(|(w, _)| v > w) {
                worst = Some((v, i));
            }
        }
        if let Some((_, i)) = worst {
            active.push(ActivePoint {
                z: prob.grid.points[i],
                w: prob.weights[i],
                anchor: i,
                u: 0.0,
                lambda: 0.0,
                last: None,
            });
            added = true;
            continue;
        }
        // converged when the relocated maxima agree with the level
        let mx = active
            .iter()
            .map(|p| {
                let v = eval_r(&coef, p.z, p.w).norm();
                prob.refined_max(p.anchor, &coef, eval_r).map_or(v, |r| r.0.max(v))
            })
            .fold(vals.iter().cloned().fold(0.0, f64::max), f64::max);
        if (mx - level) / mx <= tol * 0.01 || (t - last_t).abs() <= 1e-15 * t {
            break;
        }
        last_t = t;
    }
    Some((coef, t, active))
}

/// Grid steps searched on either side of a rejected newcomer.
const SWAP_REACH: usize = 16;

/// Index of the active point whose anchor is closest to grid index i along the curve.
fn nearest_active(prob: &Problem, active: &[ActivePoint], i: usize, reach: usize) -> Option<usize> {
    let (mut l, mut r) = (Some(i), Some(i));
    for _ in 0..=reach {
        for j in [l, r].into_iter().flatten() {
            if let Some(k) = active.iter().position(|p| p.anchor == j) {
                return Some(k);
            }
        }
        l = l.and_then(|j| prob.prev[j]);
        r = r.and_then(|j| prob.next[j]);
    }
    None
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, start: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (a + b);
    // compare against the bracket ends and the previous location
    [mid, lo, hi, start]
        .into_iter()
        .map(|u| (f(u), u))
        .max_by(|x, y| x.0.total_cmp(&y.0))
        .map(|p| p.1)
        .unwrap_or(mid)
}

/// min over the coefficients of (Σ λ_j |w_j p(z_j)|²)^{1/2}, a lower bound for the
/// grid-free minimax value whenever λ ≥ 0 sums to one.
fn weighted_ls_lower(basis: &Basis, active: &[ActivePoint]) -> f64 {
    let n = basis.n;
    let total: f64 = active.iter().map(|p| p.lambda.max(0.0)).sum();
    if !(total > 0.0) {
        return 0.0;
    }
    let k = active.len();
    let mut a = DMatrix::<C64>::zeros(k, n);
    let mut b = DVector::<C64>::zeros(k);
    for (j, p) in active.iter().enumerate() {
        let s = (p.lambda.max(0.0) / total).sqrt() * p.w;
        let q = basis.eval(p.z);
        for kk in 0..n {
            a[(j, kk)] = q[kk] * s;
        }
        b[j] = basis.gamma * q[n] * s;
    }
    if n == 0 {
        return b.norm();
    }
    // residual of the projection onto the column space; truncating small
    // singular values would overstate the bound
    let svd = a.svd(true, false);
    let Some(u) = svd.u else {
        return 0.0;
    };
    let mut r = b.clone();
    for (i, &sv) in svd.singular_values.iter().enumerate() {
        if sv > 0.0 {
            let col = u.column(i);
            let c = col.dotc(&b);
            r -= col * c;
        }
    }
    r.norm()
}

/// Newton iteration for stationarity of Σ λ_j |r_j|², |r_j|² = t, Σ λ_j = 1.
fn kkt_newton(basis: &Basis, active: &[ActivePoint], coef: &[C64], e0: f64) -> Option<(Vec<C64>, f64, Vec<f64>, f64)> {
    let n = basis.n;
    let k = active.len();
    let dim = 2 * n + 1 + k;
    // r_j = (b_j - M_j x)/e0 with x the real and imaginary parts of a
    let rows: Vec<(C64, Vec<C64>)> = active
        .iter()
        .map(|p| {
            let q = basis.eval(p.z);
            let bj = basis.gamma * q[n] * p.w / e0;
            let mut mj = vec![C64::new(0.0, 0.0); 2 * n];
            for kk in 0..n {
                mj[2 * kk] = q[kk] * p.w / e0;
                mj[2 * kk + 1] = C64::new(0.0, 1.0) * q[kk] * p.w / e0;
            }
            (bj, mj)
        })
        .collect();
    let mut x: Vec<f64> = coef.iter().flat_map(|c| [c.re, c.im]).collect();
    let residual = |x: &[f64]| -> Vec<C64> {
        rows.iter()
            .map(|(bj, mj)| {
                let mut r = *bj;
                for (p, v) in mj.iter().zip(x) {
                    r -= p * *v;
                }
                r
            })
            .collect()
    };
    let r0 = residual(&x);
    let mut t = r0.iter().map(|r| r.norm_sqr()).fold(0.0, f64::max);
    let mut lam: Vec<f64> = active.iter().map(|p| p.lambda.max(0.0)).collect();
    let s: f64 = lam.iter().sum();
    if s > 0.0 {
        lam.iter_mut().for_each(|l| *l /= s);
    } else {
        lam = vec![1.0 / k as f64; k];
    }
    let func = |x: &[f64], t: f64, lam: &[f64]| -> (DVector<f64>, Vec<C64>) {
        let r = residual(x);
        let mut f = DVector::<f64>::zeros(dim);
        for (j, (_, mj)) in rows.iter().enumerate() {
            for p in 0..2 * n {
                f[p] += lam[j] * (-2.0 * (r[j].conj() * mj[p]).re);
            }
            f[2 * n + j] = r[j].norm_sqr() - t;
        }
        f[dim - 1] = lam.iter().sum::<f64>() - 1.0;
        (f, r)
    };
    let (mut f, mut r) = func(&x, t, &lam);
    let mut fnorm = f.norm();
    for _ in 0..60 {
        if fnorm < 1e-15 {
            break;
        }
        // unknowns: x (2n), λ (k), t; equations: stationarity, feasibility, Σλ = 1
        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        for (j, (_, mj)) in rows.iter().enumerate() {
            for p in 0..2 * n {
                let gp = -2.0 * (r[j].conj() * mj[p]).re;
                for q in 0..2 * n {
                    jac[(p, q)] += lam[j] * 2.0 * (mj[p].conj() * mj[q]).re;
                }
                jac[(p, 2 * n + j)] = gp;
                jac[(2 * n + j, p)] = gp;
            }
            jac[(2 * n + j, dim - 1)] = -1.0;
            jac[(dim - 1, 2 * n + j)] = 1.0;
        }
        let tcol = dim - 1;
        let svd = jac.svd(true, true);
        let step = svd.solve(&(-&f), 1e-13).ok()?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let xn: Vec<f64> = x.iter().enumerate().map(|(i, v)| v + alpha * step[i]).collect();
            let ln: Vec<f64> = lam.iter().enumerate().map(|(j, v)| v + alpha * step[2 * n + j]).collect();
            let tn = t + alpha * step[tcol];
            let (fn_, rn) = func(&xn, tn, &ln);
            let nn = fn_.norm();
            if nn < fnorm || nn < 1e-15 {
                x = xn;
                lam = ln;
                t = tn;
                f = fn_;
                r = rn;
                accepted = fnorm - nn > 1e-3 * fnorm;
                fnorm = nn;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if !(t > 0.0) || !t.is_finite() {
        return None;
    }
    let c: Vec<C64> = (0..n).map(|kk| C64::new(x[2 * kk], x[2 * kk + 1])).collect();
    Some((c, t * e0 * e0, lam, fnorm))
}

/// Outcome of the weighted lower-bound check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    /// ‖w T_{n,w}‖ - S(w)·cap^n.
    pub margin: f64,
    pub equality: bool,
    /// max G over the zeros, when equality is detected and G is available.
    pub max_green_at_zeros: Option<f64>,
}

pub fn weighted_lower_bound_check(sol: &ComplexChebSolution, s: f64, cap: f64, tol: f64, pd: Option<&PotentialData>) -> Result<LowerBoundReport> {
    let margin = sol.norm - s * cap.powi(sol.degree as i32);
    let equality = margin.abs() <= tol;
    let max_green_at_zeros = match (equality, pd) {
        (true, Some(pd)) => Some(sol.zeros()?.iter().map(|&z| pd.green(z)).fold(0.0, f64::max)),
        _ => None,
    };
    Ok(LowerBoundReport {
        margin,
        equality,
        max_green_at_zeros,
    })
}

/// Grid size used for circular-arc sweeps at degree n.
pub fn arc_grid_points(n: usize) -> usize {
    (24 * (n + 1)).max(256)
}

/// Widom factors W_1..W_{n_max} of the circular arc {|θ| ≤ α}.
pub fn arc_widom_sweep(alpha: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < PI) {
        return Err(Error::InvalidInput(format!("arc half-angle {alpha} outside (0, π)")));
    }
    let desc = SetDescriptor::CircularArc { half_angle: alpha };
    let cap = (alpha / 2.0).sin();
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let grid = discretize(&desc, &DiscretizationConfig::with_points(arc_grid_points(n)))?;
            let sol = chebyshev_complex(&grid, n, Weight::Unit, &ComplexOptions::default())?;
            Ok((sol.norm.ln() - n as f64 * cap.ln()).exp())
        })
        .collect()
}

/// 2π·S(w_𝔢)·cap(𝔢) for a circular arc, with w_𝔢 the equilibrium density in arc length.
pub fn arc_conjecture_probe(desc: &SetDescriptor) -> Result<ArcProbe> {
    let alpha = match desc {
        SetDescriptor::CircularArc { half_angle } => *half_angle,
        other => return Err(Error::UnsupportedFamily(other.family().into())),
    };
    let pd = potential_for(desc)?;
    let s = szego_value(|z| arc_density(alpha, z.arg()), &pd, DEFAULT_EQ_NODES)?;
    let value = 2.0 * PI * s * pd.capacity;
    Ok(ArcProbe {
        value,
        circular_limit: 1.0 + (alpha / 2.0).cos(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcProbe {
    pub value: f64,
    pub circular_limit: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::Coef;

    fn unit_circle(m: usize) -> BoundaryGrid {
        discretize(
            &SetDescriptor::Disk {
                center: [0.0, 0.0],
                radius: 1.0,
            },
            &DiscretizationConfig::with_points(m),
        )
        .unwrap()
    }

    #[test]
    fn circle_gives_monomials() {
        let g = unit_circle(512);
        let sol = chebyshev_complex(&g, 5, Weight::Unit, &ComplexOptions::default()).unwrap();
        assert!((sol.norm - 1.0).abs() < 1e-10);
        for c in &sol.coeffs[..5] {
            assert!(c.norm() < 1e-10);
        }
        assert!(sol.active.len() >= 6);
    }

    #[test]
    fn lemniscate_square() {
        let desc = SetDescriptor::Lemniscate {
            coeffs: vec![Coef::Real(-1.0), Coef::Real(0.0), Coef::Real(1.0)],
            level: 1.0,
        };
        let g = discretize(&desc, &DiscretizationConfig::with_points(512)).unwrap();
        let sol = chebyshev_complex(&g, 4, Weight::Unit, &ComplexOptions::default()).unwrap();
        assert!((sol.norm - 1.0).abs() < 1e-6, "{}", sol.norm);
        let want = [1.0, 0.0, -2.0, 0.0, 1.0];
        for (c, w) in sol.coeffs.iter().zip(want) {
            assert!((c - w).norm() < 1e-5, "{:?}", sol.coeffs);
        }
    }

    #[test]
    fn interval_grid_matches_chebyshev() {
        let g = discretize(&SetDescriptor::interval_union(&[(-1.0, 1.0)]), &DiscretizationConfig::with_points(400)).unwrap();
        let sol = chebyshev_complex(&g, 3, Weight::Unit, &ComplexOptions::default()).unwrap();
        let want = [0.0, -0.75, 0.0, 1.0];
        for (c, w) in sol.coeffs.iter().zip(want) {
            assert!((c - w).norm() < 1e-8, "{:?}", sol.coeffs);
        }
        assert!((sol.norm - 0.25).abs() < 1e-10, "{} {} {}", sol.norm, sol.duality_gap, sol.iterations);
    }

    #[test]
    fn zeros_of_interval_solution() {
        let g = discretize(&SetDescriptor::interval_union(&[(-1.0, 1.0)]), &DiscretizationConfig::with_points(400)).unwrap();
        let sol = chebyshev_complex(&g, 4, Weight::Unit, &ComplexOptions::default()).unwrap();
        let mut z: Vec<f64> = sol.zeros().unwrap().iter().map(|z| z.re).collect();
        z.sort_by(f64::total_cmp);
        for (k, x) in z.iter().enumerate() {
            let want = -((2 * k + 1) as f64 * PI / 8.0).cos();
            assert!((x - want).abs() < 1e-6);
        }
    }

    #[test]
    fn arc_probe_matches_circular_limit() {
        let p = arc_conjecture_probe(&SetDescriptor::CircularArc { half_angle: PI / 2.0 }).unwrap();
        assert!(p.value > 1.0 && p.value <= 2.0);
        assert!((p.value - p.circular_limit).abs() < 1e-3, "{p:?}");
    }
}
