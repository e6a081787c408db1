//! Chebyshev polynomials of finite unions of real intervals (multi-interval
//! Remez exchange), period-n sets and the key formula.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::poly::{horner, horner_c, roots_monomial, unit_monomial_to_x, Barycentric, Window, C64};
use crate::numerics::quad::adaptive;
use crate::potential::{solve_finite_gap, FiniteGap, PotentialData, DEFAULT_QUAD_PTS};
use crate::sets::{validate, SetDescriptor};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAXITER: usize = 100;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChebyshevSolution {
    pub degree: usize,
    /// Monic coefficients in x, lowest degree first.
    pub coeffs: Vec<f64>,
    pub norm: f64,
    pub alternation: Vec<f64>,
    pub widom_factor: Option<f64>,
    pub residual: f64,
    #[serde(skip)]
    pub signs: Vec<i8>,
    #[serde(skip)]
    pub iterations: usize,
    #[serde(skip)]
    pub bands: Vec<(f64, f64)>,
    /// T_n / half^n in the hull's unit variable, interpolating ±level on the final reference.
    #[serde(skip, default = "empty_bary")]
    pub bary: Barycentric,
    #[serde(skip, default = "unit_window")]
    pub window: Window,
}

fn empty_bary() -> Barycentric {
    Barycentric::new(vec![], vec![])
}

fn unit_window() -> Window {
    Window::new(-1.0, 1.0)
}

impl ChebyshevSolution {
    fn scale(&self) -> f64 {
        self.window.half.powi(self.degree as i32)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.bary.nodes.is_empty() {
            return horner(&self.coeffs, x);
        }
        self.scale() * self.bary.eval(self.window.to_unit(x))
    }

    pub fn eval_c(&self, z: C64) -> C64 {
        if self.bary.nodes.is_empty() {
            return horner_c(&c_coeffs(&self.coeffs), z);
        }
        self.bary.eval_c(self.window.to_unit_c(z)) * self.scale()
    }

    pub fn widom(&self) -> Result<f64> {
        self.widom_factor.ok_or(Error::CapacityMissing)
    }

    pub fn hull(&self) -> (f64, f64) {
        (self.bands[0].0, self.bands[self.bands.len() - 1].1)
    }

    /// sup |T_n| over `per_band` equispaced points on every band plus endpoints.
    pub fn grid_norm(&self, per_band: usize) -> f64 {
        grid_norm_of(|x| self.eval(x), &self.bands, per_band)
    }
}

fn c_coeffs(c: &[f64]) -> Vec<C64> {
    c.iter().map(|&v| C64::new(v, 0.0)).collect()
}

pub fn grid_norm_of<F: Fn(f64) -> f64>(f: F, bands: &[(f64, f64)], per_band: usize) -> f64 {
    let mut m = 0.0f64;
    for &(a, b) in bands {
        for k in 0..=per_band {
            let x = a + (b - a) * k as f64 / per_band as f64;
            m = m.max(f(x).abs());
        }
    }
    m
}

/// Remez solver for a fixed union of intervals; reusable across degrees.
#[derive(Debug, Clone)]
pub struct RealSolver {
    bands: Vec<(f64, f64)>,
    window: Window,
    unit: Vec<(f64, f64)>,
    pd: Option<PotentialData>,
    measures: Vec<f64>,
}

impl RealSolver {
    pub fn new(desc: &SetDescriptor) -> Result<Self> {
        let desc = validate(desc)?;
        let bands = desc
            .intervals()
            .ok_or_else(|| Error::UnsupportedFamily(desc.family().into()))?;
        let window = Window::new(bands[0].0, bands[bands.len() - 1].1);
        let unit: Vec<(f64, f64)> = bands
            .iter()
            .map(|&(a, b)| (window.to_unit(a), window.to_unit(b)))
            .collect();
        let pd = solve_finite_gap(&bands, DEFAULT_QUAD_PTS)
            .ok()
            .map(PotentialData::from_finite_gap);
        let measures = match &pd {
            Some(p) => p.harmonic_measures()?,
            None => {
                let total: f64 = unit.iter().map(|(a, b)| b - a).sum();
                unit.iter().map(|(a, b)| (b - a) / total).collect()
            }
        };
        Ok(RealSolver {
            bands,
            window,
            unit,
            pd,
            measures,
        })
    }

    pub fn from_intervals(intervals: &[(f64, f64)]) -> Result<Self> {
        Self::new(&SetDescriptor::interval_union(intervals))
    }

    pub fn bands(&self) -> &[(f64, f64)] {
        &self.bands
    }

    pub fn potential(&self) -> Option<&PotentialData> {
        self.pd.as_ref()
    }

    pub fn solve(&self, n: usize, tol: f64) -> Result<ChebyshevSolution> {
        self.solve_with(n, tol, DEFAULT_MAXITER)
    }

    pub fn solve_with(&self, n: usize, tol: f64, maxiter: usize) -> Result<ChebyshevSolution> {
        if n == 0 {
            return Err(Error::InvalidInput("degree must be at least 1".into()));
        }
        if !(1e-13..=1e-6).contains(&tol) {
            return Err(Error::InvalidInput(format!("tolerance {tol} outside [1e-13, 1e-6]")));
        }
        let reference = self.initial_reference(n);
        match self.remez(n, tol, maxiter, reference.clone()) {
            Err(Error::ReferenceCollapse) => {
                // restart once from a slightly perturbed reference
                let h = 1e-3 / (n as f64 + 1.0);
                let perturbed: Vec<f64> = reference
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| self.clamp_to_bands(x + if i % 2 == 0 { h } else { -h }))
                    .collect();
                self.remez(n, tol, maxiter, perturbed)
            }
            other => other,
        }
    }

    fn clamp_to_bands(&self, x: f64) -> f64 {
        let mut best = (f64::INFINITY, x);
        for &(a, b) in &self.unit {
            let y = x.clamp(a, b);
            if (y - x).abs() < best.0 {
                best = ((y - x).abs(), y);
            }
        }
        best.1
    }

    /// Harmonic-measure-proportional allocation with the hull endpoints forced in.
    fn initial_reference(&self, n: usize) -> Vec<f64> {
        let l = self.unit.len();
        let total = n + 1;
        let raw: Vec<f64> = self.measures.iter().map(|m| m * total as f64).collect();
        let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
        let mut order: Vec<usize> = (0..l).collect();
        order.sort_by(|&i, &j| (raw[j] - raw[j].floor()).total_cmp(&(raw[i] - raw[i].floor())));
        let mut assigned: usize = counts.iter().sum();
        for &i in order.iter().cycle() {
            if assigned >= total {
                break;
            }
            counts[i] += 1;
            assigned += 1;
        }
        for end in [0, l - 1] {
            if counts[end] == 0 {
                let donor = (0..l).filter(|&i| counts[i] > 1).max_by_key(|&i| counts[i]);
                if let Some(d) = donor {
                    counts[d] -= 1;
                    counts[end] += 1;
                }
            }
        }
        let mut pts = Vec::with_capacity(total);
        for (j, &(a, b)) in self.unit.iter().enumerate() {
            let k = counts[j];
            if k == 0 {
                continue;
            }
            if k == 1 {
                pts.push(if j == 0 {
                    a
                } else if j == l - 1 {
                    b
                } else {
                    0.5 * (a + b)
                });
                continue;
            }
            let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
            for i in 0..k {
                pts.push(m - r * (PI * i as f64 / (k - 1) as f64).cos());
            }
        }
        pts
    }

    /// The monic interpolant with p(x_i) = (-1)^{n-i} E on the reference.
    fn levelled(&self, n: usize, reference: &[f64]) -> Result<(Barycentric, f64)> {
        let sigma = |i: usize| if (n - i) % 2 == 0 { 1.0 } else { -1.0 };
        let w = Barycentric::weights_for(reference);
        // w_i σ_i share one sign, so this sum has no cancellation
        let level = 1.0 / w.iter().enumerate().map(|(i, w)| w * sigma(i)).sum::<f64>();
        if !level.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::ReferenceCollapse);
        }
        let values = (0..=n).map(|i| sigma(i) * level).collect();
        Ok((
            Barycentric {
                nodes: reference.to_vec(),
                weights: w,
                values,
            },
            level,
        ))
    }

    /// Band endpoints plus all interior critical points of p, with values.
    fn extrema(&self, p: &Barycentric) -> Vec<(f64, f64)> {
        let n = p.degree();
        let d = |t: f64| p.derivative(t);
        let samples = 10 * n + 20;
        let mut out = Vec::new();
        for &(a, b) in &self.unit {
            out.push((a, p.eval(a)));
            let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
            let xs: Vec<f64> = (0..=samples)
                .map(|i| m - r * (PI * i as f64 / samples as f64).cos())
                .collect();
            let mut prev = (xs[0], d(xs[0]));
            for &x in &xs[1..] {
                let dv = d(x);
                if x < b && dv == 0.0 {
                    out.push((x, p.eval(x)));
                } else if (prev.1 < 0.0 && dv > 0.0) || (prev.1 > 0.0 && dv < 0.0) {
                    let c = bisect(d, prev.0, x);
                    if c > a && c < b {
                        out.push((c, p.eval(c)));
                    }
                }
                prev = (x, dv);
            }
            out.push((b, p.eval(b)));
        }
        out.sort_by(|u, v| u.0.total_cmp(&v.0));
        out.dedup_by(|u, v| u.0 == v.0);
        out
    }

    fn remez(&self, n: usize, tol: f64, maxiter: usize, mut reference: Vec<f64>) -> Result<ChebyshevSolution> {
        let mut last_gap = f64::INFINITY;
        for iter in 1..=maxiter {
            check_reference(&reference)?;
            let (p, level) = self.levelled(n, &reference)?;
            let mut cands = self.extrema(&p);
            let norm = cands.iter().map(|c| c.1.abs()).fold(0.0, f64::max);
            let gap = (norm - level.abs()) / norm;
            if gap <= tol {
                return Ok(self.finish(n, p, &cands, norm, iter));
            }
            last_gap = gap;
            for &x in &reference {
                cands.push((x, p.eval(x)));
            }
            cands.sort_by(|u, v| u.0.total_cmp(&v.0));
            reference = exchange(&cands, n + 1).ok_or(Error::ReferenceCollapse)?;
        }
        Err(Error::NonConvergence {
            iterations: maxiter,
            residual: last_gap,
        })
    }

    fn finish(&self, n: usize, p: Barycentric, cands: &[(f64, f64)], norm_t: f64, iterations: usize) -> ChebyshevSolution {
        let mut alt = exchange(cands, n + 1).unwrap_or_default();
        let first = *cands.first().unwrap();
        let last = *cands.last().unwrap();
        // the hull endpoints always carry the extremal value
        if let Some(a0) = alt.first_mut() {
            if *a0 != first.0 && first.1.abs() >= (1.0 - 1e-9) * p.eval(*a0).abs() && first.1 * p.eval(*a0) > 0.0 {
                *a0 = first.0;
            }
        }
        if let Some(an) = alt.last_mut() {
            if *an != last.0 && last.1.abs() >= (1.0 - 1e-9) * p.eval(*an).abs() && last.1 * p.eval(*an) > 0.0 {
                *an = last.0;
            }
        }
        let vals: Vec<f64> = alt.iter().map(|&x| p.eval(x)).collect();
        let vmax = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let vmin = vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        let h = self.window.half;
        let scale = h.powi(n as i32);
        let mono_t = p.to_cheb().to_monomial();
        let coeffs: Vec<f64> = unit_monomial_to_x(&mono_t, self.window.center, h)
            .into_iter()
            .map(|c| c * scale)
            .collect();
        let norm = norm_t * scale;
        let widom_factor = self
            .pd
            .as_ref()
            .map(|pd| (norm.ln() - n as f64 * pd.capacity.ln()).exp());
        ChebyshevSolution {
            degree: n,
            coeffs,
            norm,
            alternation: alt.iter().map(|&t| self.window.from_unit(t)).collect(),
            widom_factor,
            residual: (vmax - vmin) / vmax,
            signs: vals.iter().map(|v| if *v > 0.0 { 1 } else { -1 }).collect(),
            iterations,
            bands: self.bands.clone(),
            bary: p,
            window: self.window,
        }
    }
}

fn check_reference(reference: &[f64]) -> Result<()> {
    for w in reference.windows(2) {
        if !(w[1] - w[0] > 1e-14) {
            return Err(Error::ReferenceCollapse);
        }
    }
    Ok(())
}

/// Multi-point exchange: merge same-sign runs keeping the larger |p|, then
/// trim to `size` points by dropping the smaller end.
fn exchange(cands: &[(f64, f64)], size: usize) -> Option<Vec<f64>> {
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for &(x, v) in cands {
        if v == 0.0 {
            continue;
        }
        match merged.last_mut() {
            Some(last) if (last.1 > 0.0) == (v > 0.0) => {
                if v.abs() > last.1.abs() {
                    *last = (x, v);
                }
            }
            _ => merged.push((x, v)),
        }
    }
    if merged.len() < size {
        return None;
    }
    let (mut lo, mut hi) = (0, merged.len());
    while hi - lo > size {
        if merged[lo].1.abs() < merged[hi - 1].1.abs() {
            lo += 1;
        } else {
            hi -= 1;
        }
    }
    Some(merged[lo..hi].iter().map(|c| c.0).collect())
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let fa0 = f(a);
    let mut neg_a = fa0 < 0.0;
    if fa0 == 0.0 {
        return a;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == neg_a {
            a = m;
            neg_a = fm < 0.0;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Chebyshev polynomial of degree n on an interval union with default options.
pub fn chebyshev_real(desc: &SetDescriptor, n: usize, tol: f64) -> Result<ChebyshevSolution> {
    RealSolver::new(desc)?.solve(n, tol)
}

pub fn widom_factor(sol: &ChebyshevSolution, pd: &PotentialData) -> Result<f64> {
    if let Some(fg) = pd.finite_gap() {
        let same = fg.bands().len() == sol.bands.len()
            && fg
                .bands()
                .iter()
                .zip(&sol.bands)
                .all(|(u, v)| (u.0 - v.0).abs() <= 1e-12 * (1.0 + u.0.abs()) && (u.1 - v.1).abs() <= 1e-12 * (1.0 + u.1.abs()));
        if !same {
            return Err(Error::InvalidInput("potential data belongs to a different set".into()));
        }
    }
    if !(pd.capacity > 0.0) {
        return Err(Error::CapacityMissing);
    }
    Ok((sol.norm.ln() - sol.degree as f64 * pd.capacity.ln()).exp())
}

/// The period-n set 𝔢_n = T_n^{-1}([-‖T_n‖, ‖T_n‖]) with Δ_n = 2T_n/‖T_n‖.
#[derive(Debug, Clone)]
pub struct PeriodSetData {
    pub n: usize,
    pub bands: Vec<(f64, f64)>,
    /// touching[j]: band j and band j+1 share an endpoint.
    pub touching: Vec<bool>,
    /// Δ_n in x, lowest degree first.
    pub delta_coeffs: Vec<f64>,
    pub capacity: f64,
    window: Window,
    /// T_n / half^n in the unit variable and its norm E there, so Δ_n = 2p/E.
    p: Barycentric,
    e: f64,
    potential: Option<FiniteGap>,
}

impl PeriodSetData {
    pub fn delta(&self, z: C64) -> C64 {
        self.p.eval_c(self.window.to_unit_c(z)) * (2.0 / self.e)
    }

    /// Root u of u + 1/u = Δ with |u| ≥ 1, i.e. B_n^{-n}.
    fn big_root(&self, z: C64) -> C64 {
        let h = self.delta(z) * 0.5;
        let s = (h * h - 1.0).sqrt();
        let (u1, u2) = (h + s, h - s);
        if u1.norm() >= u2.norm() {
            u1
        } else {
            u2
        }
    }

    /// G_n(z) = (1/n) log|Δ/2 + √((Δ/2)² - 1)|.
    pub fn green(&self, z: C64) -> f64 {
        (self.big_root(z).norm().ln() / self.n as f64).max(0.0)
    }

    /// dρ_n/dx = |Δ'(x)| / (nπ √(4 - Δ(x)²)) on the bands.
    pub fn density(&self, x: f64) -> f64 {
        if !self.bands.iter().any(|&(a, b)| x >= a && x <= b) {
            return 0.0;
        }
        let t = self.window.to_unit(x);
        let d = 2.0 * self.p.eval(t) / self.e;
        let dd = 2.0 * self.p.derivative(t) / (self.e * self.window.half);
        let q = (2.0 - d) * (2.0 + d);
        if q <= 0.0 {
            return f64::INFINITY;
        }
        dd.abs() / (self.n as f64 * PI * q.sqrt())
    }

    /// ρ_n mass of each band.
    pub fn band_masses(&self) -> Vec<f64> {
        let n = self.n as f64;
        let s = 2.0 / self.e;
        self.bands
            .iter()
            .map(|&(a, b)| {
                let (ta, tb) = (self.window.to_unit(a), self.window.to_unit(b));
                let (m, r) = (0.5 * (ta + tb), 0.5 * (tb - ta));
                adaptive(
                    |th| {
                        let t = m + r * th.cos();
                        let v = s * self.p.eval(t);
                        let q = ((2.0 - v) * (2.0 + v)).max(0.0);
                        if q == 0.0 {
                            return 0.0;
                        }
                        s * self.p.derivative(t).abs() * r * th.sin() / (n * PI * q.sqrt())
                    },
                    0.0,
                    PI,
                    1e-14,
                    1e-13,
                )
            })
            .collect()
    }

    /// 𝔢_n as a set: touching bands merged.
    pub fn merged_bands(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = vec![self.bands[0]];
        for (j, &b) in self.bands.iter().enumerate().skip(1) {
            if self.touching[j - 1] {
                out.last_mut().unwrap().1 = b.1;
            } else {
                out.push(b);
            }
        }
        out
    }

    /// Independent finite-gap potential of 𝔢_n, when the solver succeeded.
    pub fn potential(&self) -> Option<&FiniteGap> {
        self.potential.as_ref()
    }
}

/// Zeros of p in the unit variable: one between each pair of adjacent nodes,
/// where the interpolated values alternate in sign.
fn unit_zeros(p: &Barycentric) -> Vec<f64> {
    p.nodes.windows(2).map(|w| bisect(|t| p.eval(t), w[0], w[1])).collect()
}

pub fn build_period_set(sol: &ChebyshevSolution) -> Result<PeriodSetData> {
    let n = sol.degree;
    let window = sol.window;
    let p = &sol.bary;
    if p.degree() != n {
        return Err(Error::BandExtractionFailure("no interpolant for the solution".into()));
    }
    let e = sol.norm / window.half.powi(n as i32);
    // one critical point between each pair of adjacent zeros
    let crit: Vec<f64> = unit_zeros(p).windows(2).map(|w| bisect(|t| p.derivative(t), w[0], w[1])).collect();
    let mut touching = Vec::with_capacity(n.saturating_sub(1));
    for &c in &crit {
        let v = p.eval(c).abs();
        if v < e * (1.0 - 1e-6) {
            return Err(Error::BandExtractionFailure(format!("critical value {v} below the norm {e}")));
        }
        touching.push(v <= e * (1.0 + 1e-9));
    }
    // outer pieces extend far enough that |p| > E at their far ends
    let mut far = 2.0;
    while p.eval(-far).abs() <= e || p.eval(far).abs() <= e {
        far *= 2.0;
    }
    let mut cuts = vec![-far];
    cuts.extend(&crit);
    cuts.push(far);
    let mut bands = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = (cuts[i], cuts[i + 1]);
        let (ylo, yhi) = (p.eval(lo), p.eval(hi));
        let left = if i > 0 && touching[i - 1] {
            lo
        } else {
            let target = ylo.signum() * e;
            bisect(|x| p.eval(x) - target, lo, hi)
        };
        let right = if i + 1 < n && touching[i] {
            hi
        } else {
            let target = yhi.signum() * e;
            bisect(|x| p.eval(x) - target, lo, hi)
        };
        if !(right > left) {
            return Err(Error::BandExtractionFailure(format!("empty band {i}")));
        }
        bands.push((window.from_unit(left), window.from_unit(right)));
    }
    let delta_coeffs: Vec<f64> = sol.coeffs.iter().map(|c| 2.0 * c / sol.norm).collect();
    let mut ps = PeriodSetData {
        n,
        bands,
        touching,
        delta_coeffs,
        capacity: (sol.norm / 2.0).powf(1.0 / n as f64),
        window,
        p: p.clone(),
        e,
        potential: None,
    };
    ps.potential = solve_finite_gap(&ps.merged_bands(), DEFAULT_QUAD_PTS).ok();
    Ok(ps)
}

/// Residuals of the key formula at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyFormulaResidual {
    /// |2T_n(z)/‖T_n‖ - (B^n + B^{-n})| with B = e^{-Φ_n}, Φ_n the complex Green function of 𝔢_n.
    pub identity: f64,
    /// ||B_n(z)| - e^{-G_n(z)}|, |B_n| from Δ_n and G_n from the finite-gap solver on 𝔢_n.
    pub modulus: f64,
}

pub fn key_formula_check(ps: &PeriodSetData, sol: &ChebyshevSolution, z: C64) -> Result<KeyFormulaResidual> {
    let h = ps.delta(z) * 0.5;
    if (h * h - 1.0).norm() < 1e-10 * (1.0 + h.norm_sqr()) {
        return Err(Error::BranchAmbiguity);
    }
    let fg = ps
        .potential()
        .ok_or_else(|| Error::BandExtractionFailure("no potential for the period set".into()))?;
    let n = ps.n as f64;
    // Φ is computed in the upper half-plane; T has real coefficients
    let phi = if z.im < 0.0 {
        fg.complex_green(z.conj()).conj()
    } else {
        fg.complex_green(z)
    } * n;
    let lhs = sol.eval_c(z) * (2.0 / sol.norm);
    let identity = (lhs - (phi.exp() + (-phi).exp())).norm();
    let b_abs = ps.big_root(z).norm().powf(-1.0 / n);
    Ok(KeyFormulaResidual {
        identity,
        modulus: (b_abs - (-fg.green(z)).exp()).abs(),
    })
}

/// `count` points on the curve {G_n = log(4)/n}, where |B_n^{-n}| = 4.
pub fn key_formula_points(ps: &PeriodSetData, count: usize) -> Result<Vec<C64>> {
    let fg = ps
        .potential()
        .ok_or_else(|| Error::BandExtractionFailure("no potential for the period set".into()))?;
    let curves = fg.level_curves(4f64.ln() / ps.n as f64, 4 * count)?;
    let all: Vec<C64> = curves.into_iter().flat_map(|c| c.points).collect();
    // skip the real-axis crossings, where the branch test is tightest
    let off_axis: Vec<C64> = all.into_iter().filter(|z| z.im.abs() > 1e-3).collect();
    if off_axis.len() < count {
        return Err(Error::BranchTrackingFailure("too few level-curve points".into()));
    }
    Ok((0..count).map(|k| off_axis[k * off_axis.len() / count]).collect())
}

/// Real roots of T_n in x, one between each pair of adjacent reference points.
pub fn real_zeros(sol: &ChebyshevSolution) -> Result<Vec<C64>> {
    if sol.bary.degree() != sol.degree {
        return roots_monomial(&c_coeffs(&sol.coeffs)).ok_or(Error::RankDeficiency);
    }
    Ok(unit_zeros(&sol.bary)
        .into_iter()
        .map(|t| C64::new(sol.window.from_unit(t), 0.0))
        .collect())
}

pub fn eval_monomial(sol: &ChebyshevSolution, x: f64) -> f64 {
    horner(&sol.coeffs, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s5() -> f64 {
        5f64.sqrt()
    }

    #[test]
    fn interval_degree_four() {
        let sol = chebyshev_real(&SetDescriptor::interval_union(&[(-1.0, 1.0)]), 4, 1e-12).unwrap();
        let want = [0.125, 0.0, -1.0, 0.0, 1.0];
        for (c, w) in sol.coeffs.iter().zip(want) {
            assert!((c - w).abs() < 1e-13);
        }
        assert!((sol.norm - 0.125).abs() < 1e-14);
        assert!((sol.widom_factor.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(sol.alternation.len(), 5);
        assert_eq!(sol.alternation[0], -1.0);
        assert_eq!(sol.alternation[4], 1.0);
    }

    #[test]
    fn degree_one_is_the_midpoint_shift() {
        let sol = chebyshev_real(&SetDescriptor::interval_union(&[(2.0, 5.0)]), 1, 1e-12).unwrap();
        assert!((sol.coeffs[0] + 3.5).abs() < 1e-13);
        assert!((sol.norm - 1.5).abs() < 1e-13);
        let sol = chebyshev_real(&SetDescriptor::interval_union(&[(-2.0, -1.0), (0.5, 3.0)]), 1, 1e-12).unwrap();
        assert!((sol.coeffs[0] + 0.5).abs() < 1e-13);
        assert!((sol.norm - 2.5).abs() < 1e-13);
    }

    #[test]
    fn quadratic_preimage() {
        let sol = chebyshev_real(&SetDescriptor::interval_union(&[(-s5(), -1.0), (1.0, s5())]), 2, 1e-12).unwrap();
        assert!((sol.coeffs[0] + 3.0).abs() < 1e-12 && sol.coeffs[1].abs() < 1e-12);
        assert!((sol.norm - 2.0).abs() < 1e-12);
        assert!((sol.widom_factor.unwrap() - 2.0).abs() < 1e-10);
        let ps = build_period_set(&sol).unwrap();
        assert!((ps.bands[0].0 + s5()).abs() < 1e-12 && (ps.bands[0].1 + 1.0).abs() < 1e-12);
        assert!((ps.bands[1].0 - 1.0).abs() < 1e-12 && (ps.bands[1].1 - s5()).abs() < 1e-12);
        assert!((ps.capacity - 1.0).abs() < 1e-12);
        let r = key_formula_check(&ps, &sol, C64::new(0.0, 2.0)).unwrap();
        assert!(r.identity < 1e-8 && r.modulus < 1e-8, "{r:?}");
    }

    #[test]
    fn degenerate_period_three_set() {
        let s3 = 3f64.sqrt();
        let sol = chebyshev_real(&SetDescriptor::interval_union(&[(-s3, 0.0), (s3, 2.0)]), 3, 1e-12).unwrap();
        let pd = potential_for_bands(&[(-s3, 0.0), (s3, 2.0)]);
        let w = widom_factor(&sol, &pd).unwrap();
        assert!((w - 2.0).abs() < 1e-8, "{w}");
        let ps = build_period_set(&sol).unwrap();
        assert_eq!(ps.touching.iter().filter(|t| **t).count(), 1);
        assert_eq!(ps.merged_bands().len(), 2);
    }

    fn potential_for_bands(b: &[(f64, f64)]) -> PotentialData {
        PotentialData::from_finite_gap(solve_finite_gap(b, DEFAULT_QUAD_PTS).unwrap())
    }

    #[test]
    fn period_set_band_masses() {
        let sol = chebyshev_real(&SetDescriptor::interval_union(&[(-1.0, -0.3), (0.2, 1.0)]), 5, 1e-12).unwrap();
        let ps = build_period_set(&sol).unwrap();
        assert_eq!(ps.bands.len(), 5);
        for m in ps.band_masses() {
            assert!((m - 0.2).abs() < 1e-8, "{m}");
        }
        let fg = ps.potential().unwrap();
        assert!((fg.capacity() - ps.capacity).abs() < 1e-7);
    }

    #[test]
    fn interval_key_formula_matches_joukowski() {
        let sol = chebyshev_real(&SetDescriptor::interval_union(&[(-1.0, 1.0)]), 3, 1e-12).unwrap();
        let ps = build_period_set(&sol).unwrap();
        assert_eq!(ps.bands.len(), 3);
        assert_eq!(ps.merged_bands(), vec![(-1.0, 1.0)]);
        let z = C64::new(2.0, 0.0);
        let r = key_formula_check(&ps, &sol, z).unwrap();
        assert!(r.identity < 1e-10 && r.modulus < 1e-10, "{r:?}");
        let b = 1.0 / (z + (z * z - 1.0).sqrt());
        assert!((ps.green(z) + b.norm().ln()).abs() < 1e-12);
    }

    #[test]
    fn scaling_covariance() {
        let base = [(-1.0, -0.2), (0.4, 1.0)];
        let (s, t) = (3.0, 0.7);
        let moved: Vec<(f64, f64)> = base.iter().map(|&(a, b)| (s * a + t, s * b + t)).collect();
        for n in [3, 6] {
            let u = chebyshev_real(&SetDescriptor::interval_union(&base), n, 1e-12).unwrap();
            let v = chebyshev_real(&SetDescriptor::interval_union(&moved), n, 1e-12).unwrap();
            assert!((v.norm / (s.powi(n as i32) * u.norm) - 1.0).abs() < 1e-9);
            assert!((v.widom_factor.unwrap() - u.widom_factor.unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_degree_is_rejected() {
        let r = chebyshev_real(&SetDescriptor::interval_union(&[(-1.0, 1.0)]), 0, 1e-10);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }
}
