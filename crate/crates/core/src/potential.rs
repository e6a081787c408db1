//! Logarithmic potential theory for the supported set families: capacity,
//! Green's function, equilibrium measure, gap critical points,
//! Parreau–Widom sums, band harmonic measures and the Szegő functional.
//!
//! Finite unions of intervals are handled with the equilibrium density
//! |Q(x)| / (π √|R(x)|), where R(x) = Π (x - a_j)(x - b_j) and the monic
//! gap polynomial Q of degree l - 1 is fixed by requiring ∫ Q/√|R| = 0 over
//! every gap. All finite-gap computations run on the window of the convex
//! hull mapped to [-1, 1].

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::poly::{horner, horner_c, unit_monomial_to_x, Window, C64};
use crate::numerics::quad::{adaptive, adaptive_c, chebyshev_angles, gauss_legendre};
use crate::sets::{validate, Coef, SetDescriptor};

/// Gauss–Chebyshev nodes per band or gap for the finite-gap solver.
pub const DEFAULT_QUAD_PTS: usize = 256;

/// Nodes used for equilibrium averages such as the Szegő functional.
pub const DEFAULT_EQ_NODES: usize = 1 << 20;

const PATH_ABS_TOL: f64 = 1e-15;
const PATH_REL_TOL: f64 = 1e-14;

/// Potential data of a finite union of real intervals.
#[derive(Debug, Clone)]
pub struct FiniteGap {
    bands: Vec<(f64, f64)>,
    window: Window,
    /// Band endpoints a_1, b_1, ..., a_l, b_l in unit coordinates.
    ends: Vec<f64>,
    /// Monic gap polynomial in the unit variable, lowest degree first.
    q: Vec<f64>,
    log_cap_unit: f64,
    /// Im Φ₊ at each endpoint, where Φ₊ = ∫ Q/√R continued through the upper half plane.
    phi_ends: Vec<f64>,
    critical: Vec<f64>,
    critical_values: Vec<f64>,
    measures: Vec<f64>,
}

fn principal_sqrt(z: C64) -> C64 {
    z.sqrt()
}

impl FiniteGap {
    fn l(&self) -> usize {
        self.bands.len()
    }

    /// √R(t) with the branch ~ t^l at infinity and cuts on the bands.
    fn sqrt_r(&self, t: C64) -> C64 {
        self.ends
            .iter()
            .fold(C64::new(1.0, 0.0), |acc, &e| acc * principal_sqrt(t - e))
    }

    /// Q/√R at t = ends[idx] + d, with the factor for ends[idx] formed from d directly.
    fn integrand_from(&self, idx: usize, d: C64) -> C64 {
        let base = self.ends[idx];
        let t = d + base;
        let mut prod = C64::new(1.0, 0.0);
        for (i, &e) in self.ends.iter().enumerate() {
            let factor = if i == idx { d } else { d + (base - e) };
            prod *= principal_sqrt(factor);
        }
        let q = horner_c(&self.q.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>(), t);
        q / prod
    }

    /// |√R| with the two endpoints `skip` removed, at a real point.
    fn abs_sqrt_r_other(&self, x: f64, skip: (usize, usize)) -> f64 {
        self.ends
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip.0 && *i != skip.1)
            .map(|(_, &e)| (x - e).abs().sqrt())
            .product()
    }

    fn abs_sqrt_r_without(&self, x: f64, skip: &[usize]) -> f64 {
        self.ends
            .iter()
            .enumerate()
            .filter(|(i, _)| !skip.contains(i))
            .map(|(_, &e)| (x - e).abs().sqrt())
            .product()
    }

    /// The piece between ends[i] and ends[i + 1], with its outside neighbours.
    fn piece(&self, i: usize, nodes: usize) -> (Vec<usize>, Vec<(f64, f64)>) {
        let e = &self.ends;
        let left = (i > 0).then(|| i - 1);
        let right = (i + 2 < e.len()).then_some(i + 2);
        let rule = piece_rule(
            e[i],
            e[i + 1],
            left.map(|k| e[i] - e[k]),
            right.map(|k| e[k] - e[i + 1]),
            nodes,
        );
        let skip = [Some(i), Some(i + 1), left, right].into_iter().flatten().collect();
        (skip, rule)
    }

    fn sqrt_r_other_without(&self, x: f64, skip: &[usize]) -> C64 {
        self.ends
            .iter()
            .enumerate()
            .filter(|(i, _)| !skip.contains(i))
            .fold(C64::new(1.0, 0.0), |acc, (_, &e)| acc * principal_sqrt(C64::new(x - e, 0.0)))
    }

    /// Φ₊(t) for Im t ≥ 0 in unit coordinates.
    fn phi_plus(&self, t: C64) -> C64 {
        let (idx, _) = self
            .ends
            .iter()
            .enumerate()
            .map(|(i, &e)| (i, (t - e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one band");
        let delta = t - self.ends[idx];
        if delta.norm() == 0.0 {
            return C64::new(0.0, self.phi_ends[idx]);
        }
        let integral = adaptive_c(
            |s| self.integrand_from(idx, delta * (s * s)) * delta * (2.0 * s),
            0.0,
            1.0,
            PATH_ABS_TOL,
            PATH_REL_TOL,
        );
        C64::new(0.0, self.phi_ends[idx]) + integral
    }

    fn green_unit(&self, t: C64) -> f64 {
        let t = if t.im < 0.0 { t.conj() } else { t };
        if t.im == 0.0 && self.on_bands(t.re) {
            return 0.0;
        }
        self.phi_plus(t).re.max(0.0)
    }

    fn on_bands(&self, x: f64) -> bool {
        self.ends.chunks(2).any(|b| x >= b[0] && x <= b[1])
    }

    pub fn bands(&self) -> &[(f64, f64)] {
        &self.bands
    }

    pub fn capacity(&self) -> f64 {
        self.window.half * self.log_cap_unit.exp()
    }

    pub fn green(&self, z: C64) -> f64 {
        self.green_unit(self.window.to_unit_c(z))
    }

    /// Complex potential Φ₊ (real part G) for Im z ≥ 0.
    pub fn complex_green(&self, z: C64) -> C64 {
        self.phi_plus(self.window.to_unit_c(z))
    }

    /// G'(z)-type derivative dΦ₊/dz = Q/√R in original coordinates.
    pub fn complex_green_derivative(&self, z: C64) -> C64 {
        let t = self.window.to_unit_c(z);
        let q = horner_c(&self.q.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>(), t);
        q / self.sqrt_r(t) / self.window.half
    }

    /// Monic gap polynomial Q in the original variable, lowest degree first.
    pub fn q_coeffs(&self) -> Vec<f64> {
        let g = self.q.len() - 1;
        let scale = self.window.half.powi(g as i32);
        unit_monomial_to_x(&self.q, self.window.center, self.window.half)
            .into_iter()
            .map(|c| c * scale)
            .collect()
    }

    pub fn critical_points(&self) -> Vec<f64> {
        self.critical.iter().map(|&t| self.window.from_unit(t)).collect()
    }

    pub fn critical_values(&self) -> &[f64] {
        &self.critical_values
    }

    pub fn pw_sum(&self) -> f64 {
        self.critical_values.iter().sum()
    }

    pub fn harmonic_measures(&self) -> &[f64] {
        &self.measures
    }

    /// Equilibrium density dρ/dx at a real point (0 off the bands).
    pub fn density(&self, x: f64) -> f64 {
        let t = self.window.to_unit(x);
        if !self.on_bands(t) {
            return 0.0;
        }
        let r: f64 = self.ends.iter().map(|&e| (t - e).abs().sqrt()).product();
        horner(&self.q, t).abs() / (PI * r) / self.window.half
    }

    /// ρ((-∞, x]).
    pub fn cdf(&self, x: f64) -> f64 {
        let t = self.window.to_unit(x);
        let mut acc = 0.0;
        for (j, b) in self.ends.chunks(2).enumerate() {
            if t >= b[1] {
                acc += self.measures[j];
            } else if t > b[0] {
                let (m, r) = (0.5 * (b[0] + b[1]), 0.5 * (b[1] - b[0]));
                let th = ((t - m) / r).clamp(-1.0, 1.0).acos();
                let skip = (2 * j, 2 * j + 1);
                acc += adaptive(
                    |u| {
                        let y = m + r * u.cos();
                        horner(&self.q, y).abs() / self.abs_sqrt_r_other(y, skip)
                    },
                    th,
                    PI,
                    1e-14,
                    1e-13,
                ) / PI;
            }
        }
        acc
    }

    /// Nodes and weights of an equilibrium quadrature with `per_band` nodes per band.
    pub fn equilibrium_quadrature(&self, per_band: usize) -> (Vec<C64>, Vec<f64>) {
        let th = chebyshev_angles(per_band);
        let mut nodes = Vec::with_capacity(per_band * self.l());
        let mut weights = Vec::with_capacity(per_band * self.l());
        for (j, b) in self.ends.chunks(2).enumerate() {
            let (m, r) = (0.5 * (b[0] + b[1]), 0.5 * (b[1] - b[0]));
            let skip = (2 * j, 2 * j + 1);
            for &t in &th {
                let y = m + r * t.cos();
                nodes.push(C64::new(self.window.from_unit(y), 0.0));
                weights.push(horner(&self.q, y).abs() / (self.abs_sqrt_r_other(y, skip) * per_band as f64));
            }
        }
        (nodes, weights)
    }

    /// Boundary curves of {G ≤ level}, each traced with `points` samples.
    pub fn level_curves(&self, level: f64, points: usize) -> Result<Vec<LevelCurve>> {
        if !(level > 0.0) {
            return Err(Error::DegenerateComponent(format!("Green level {level}")));
        }
        let half_steps = points.div_ceil(2).max(2);
        let l = self.l();
        // real crossings, grouped into components as (left, right, left_end_idx, right_end_idx)
        let mut groups: Vec<(f64, f64, usize, usize)> = Vec::new();
        let left_outer = self.real_crossing_outside(level, false);
        let mut current_left = (left_outer, 0usize);
        for j in 0..l - 1 {
            if self.critical_values[j] > level {
                let (b, a) = (self.ends[2 * j + 1], self.ends[2 * j + 2]);
                let c = self.critical[j];
                let x1 = self.real_crossing_in(level, b, c);
                let x2 = self.real_crossing_in(level, c, a);
                groups.push((current_left.0, x1, current_left.1, 2 * j + 1));
                current_left = (x2, 2 * j + 2);
            }
        }
        let right_outer = self.real_crossing_outside(level, true);
        groups.push((current_left.0, right_outer, current_left.1, 2 * l - 1));

        let mut curves = Vec::with_capacity(groups.len());
        for (xl, xr, il, ir) in groups {
            let psi_r = self.phi_ends[ir];
            let psi_l = self.phi_ends[il];
            let dpsi = (psi_l - psi_r) / half_steps as f64;
            let mut upper = vec![C64::new(xr, 0.0)];
            let mut z = C64::new(xr, 0.0);
            for k in 1..half_steps {
                let target = C64::new(level, psi_r + dpsi * k as f64);
                z = self.solve_phi(target, z)?;
                upper.push(z);
            }
            upper.push(C64::new(xl, 0.0));
            let mut pts_unit = upper.clone();
            for k in (1..half_steps).rev() {
                pts_unit.push(upper[k].conj());
            }
            let eq_w = dpsi.abs() / (2.0 * PI);
            let mut pts = Vec::with_capacity(pts_unit.len());
            let mut arc = Vec::with_capacity(pts_unit.len());
            for t in pts_unit {
                let z = C64::new(self.window.from_unit(t.re), t.im * self.window.half);
                let d = self.complex_green_derivative(z).norm();
                pts.push(z);
                arc.push(if d > 0.0 { dpsi.abs() / d } else { 0.0 });
            }
            let n = pts.len();
            curves.push(LevelCurve {
                points: pts,
                arc_weights: arc,
                eq_weights: vec![eq_w; n],
            });
        }
        Ok(curves)
    }

    /// Newton iteration for Φ₊(z) = target in unit coordinates.
    fn solve_phi(&self, target: C64, start: C64) -> Result<C64> {
        let mut z = start;
        for _ in 0..60 {
            let val = self.phi_plus(z);
            let q = horner_c(&self.q.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>(), z);
            let deriv = q / self.sqrt_r(z);
            let step = (val - target) / deriv;
            let mut next = z - step;
            if next.im < 0.0 {
                next.im = 0.5 * z.im;
            }
            z = next;
            if step.norm() < 1e-15 * (1.0 + z.norm()) {
                return Ok(z);
            }
        }
        let resid = (self.phi_plus(z) - target).norm();
        if resid < 1e-12 {
            Ok(z)
        } else {
            Err(Error::BranchTrackingFailure(format!("level-curve point near {z}")))
        }
    }

    fn real_crossing_in(&self, level: f64, lo: f64, hi: f64) -> f64 {
        let g = |x: f64| self.green_unit(C64::new(x, 0.0)) - level;
        let (mut a, mut b) = (lo, hi);
        let (mut fa, _) = (g(a), g(b));
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = g(m);
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    fn real_crossing_outside(&self, level: f64, right: bool) -> f64 {
        let e = if right { *self.ends.last().unwrap() } else { self.ends[0] };
        let dir = if right { 1.0 } else { -1.0 };
        let mut step = 1.0;
        while self.green_unit(C64::new(e + dir * step, 0.0)) < level {
            step *= 2.0;
        }
        let (lo, hi) = if right { (e, e + step) } else { (e - step, e) };
        self.real_crossing_in(level, lo, hi)
    }

    pub fn window(&self) -> Window {
        self.window
    }
}

/// One boundary curve of a Green's-function level set.
#[derive(Debug, Clone)]
pub struct LevelCurve {
    pub points: Vec<C64>,
    pub arc_weights: Vec<f64>,
    /// Equilibrium mass carried by each point.
    pub eq_weights: Vec<f64>,
}

/// Largest node count tried when band masses fail to resolve.
const MAX_QUAD_PTS: usize = 1 << 15;

/// Solves the finite-gap equilibrium problem for a union of intervals.
/// Narrow gaps put singularities close to the bands, so the node count is
/// doubled until the band masses add up to one.
pub fn solve_finite_gap(intervals: &[(f64, f64)], quad_pts: usize) -> Result<FiniteGap> {
    let mut pts = quad_pts.max(16);
    loop {
        match solve_finite_gap_once(intervals, pts) {
            Err(Error::QuadratureUnderflow) if pts < MAX_QUAD_PTS => pts *= 2,
            r => return r,
        }
    }
}

fn solve_finite_gap_once(intervals: &[(f64, f64)], quad_pts: usize) -> Result<FiniteGap> {
    let desc = validate(&SetDescriptor::interval_union(intervals))?;
    let bands = desc.intervals().expect("interval union");
    let quad_pts = quad_pts.max(16);
    let l = bands.len();
    let window = Window::new(bands[0].0, bands[l - 1].1);
    let ends: Vec<f64> = bands
        .iter()
        .flat_map(|&(a, b)| [window.to_unit(a), window.to_unit(b)])
        .collect();
    let g = l - 1;

    let mut fg = FiniteGap {
        bands: bands.clone(),
        window,
        ends,
        q: vec![1.0],
        log_cap_unit: 0.0,
        phi_ends: vec![0.0; 2 * l],
        critical: vec![],
        critical_values: vec![],
        measures: vec![],
    };

    if g > 0 {
        // moment matrix of the gap conditions: M[j][k] = ∫_{gap j} t^k / √|R|
        let mut m = DMatrix::<f64>::zeros(g, g + 1);
        for j in 0..g {
            let (skip, rule) = fg.piece(2 * j + 1, quad_pts);
            for (x, w) in rule {
                let w = w / fg.abs_sqrt_r_without(x, &skip);
                let mut p = 1.0;
                for k in 0..=g {
                    m[(j, k)] += w * p;
                    p *= x;
                }
            }
        }
        // normalize rows so that near-touching gaps do not dominate the pivoting
        for j in 0..g {
            let s = (0..=g).map(|k| m[(j, k)].abs()).fold(0.0, f64::max);
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::SingularSystem);
            }
            for k in 0..=g {
                m[(j, k)] /= s;
            }
        }
        let a = m.columns(0, g).into_owned();
        let rhs = -DVector::from_iterator(g, (0..g).map(|j| m[(j, g)]));
        let svd = a.clone().svd(false, false);
        let sv = &svd.singular_values;
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(smin > 1e-13 * smax) {
            return Err(Error::SingularSystem);
        }
        let sol = a.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
        fg.q = sol.iter().cloned().chain(std::iter::once(1.0)).collect();
    }

    // band masses
    let mut measures = Vec::with_capacity(l);
    for j in 0..l {
        let (skip, rule) = fg.piece(2 * j, quad_pts);
        let s: f64 = rule
            .iter()
            .map(|&(x, w)| w * horner(&fg.q, x).abs() / fg.abs_sqrt_r_without(x, &skip))
            .sum::<f64>()
            / PI;
        measures.push(s);
    }
    let total: f64 = measures.iter().sum();
    if !total.is_finite() || (total - 1.0).abs() > 1e-10 || measures.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::QuadratureUnderflow);
    }
    fg.measures = measures;

    // Im Φ₊ at the endpoints: 0 at b_l, increasing by the band integrals leftwards
    let mut psi = 0.0;
    fg.phi_ends[2 * l - 1] = 0.0;
    for j in (0..l).rev() {
        let (skip, rule) = fg.piece(2 * j, quad_pts);
        // ∫_{b}^{a} Q/√R(x + i0) dx = i ∫_a^b Q/(√((x-a)(b-x)) √R_other) dx; a right
        // neighbour contributes the factor i to √R_other, a left one a positive root
        let phase = if j + 1 < l { C64::new(0.0, 1.0) } else { C64::new(1.0, 0.0) };
        let band_integral: C64 = rule
            .iter()
            .map(|&(x, w)| {
                let rest = fg.sqrt_r_other_without(x, &skip);
                C64::new(0.0, w * horner(&fg.q, x)) / (rest * phase)
            })
            .sum::<C64>();
        fg.phi_ends[2 * j + 1] = psi;
        psi += band_integral.im;
        fg.phi_ends[2 * j] = psi;
    }

    // -log cap = lim (G(x) - log x) = ∫_{b_l}^∞ (Q/√R - 1/(t - b_l + 1)) dt
    let last = 2 * l - 1;
    let tail = adaptive(
        |s| {
            if s >= 1.0 {
                return 0.0;
            }
            let u = (s / (1.0 - s)).powi(2);
            let du = 2.0 * s / (1.0 - s).powi(3);
            let f = fg.integrand_from(last, C64::new(u, 0.0)).re;
            (f - 1.0 / (u + 1.0)) * du
        },
        0.0,
        1.0,
        1e-15,
        1e-14,
    );
    fg.log_cap_unit = -tail;

    // critical points: maximize the concave G on each gap, then pin the root of Q
    for j in 0..g {
        let (b, a) = (fg.ends[2 * j + 1], fg.ends[2 * j + 2]);
        let xg = golden_section_max(|x| fg.green_unit(C64::new(x, 0.0)), b, a, 60);
        let c = gap_root(&fg.q, b, a).unwrap_or(xg);
        fg.critical.push(c);
        fg.critical_values.push(fg.green_unit(C64::new(c, 0.0)));
    }
    Ok(fg)
}

/// Nodes and weights for ∫_p^q f(x) dx / √((x-p)(q-x) P(x)), where P holds the
/// factors (x - p + dl) and (q - x + dr) of the nearest outside endpoints, if any.
/// Each half is mapped so that its two nearby square-root singularities cancel
/// against dx: x = p + dl sinh²u with a neighbour, x = p + h sin²v without.
fn piece_rule(p: f64, q: f64, dl: Option<f64>, dr: Option<f64>, nodes: usize) -> Vec<(f64, f64)> {
    let h = 0.5 * (q - p);
    let per_panel = (nodes / 16).max(16);
    let (gx, gw) = gauss_legendre(per_panel);
    let mut out = Vec::new();
    for (side, near, far) in [(1.0, dl, dr), (-1.0, dr, dl)] {
        let base = if side > 0.0 { p } else { q };
        let len = match near {
            Some(d) => (h / d).sqrt().asinh(),
            None => 0.5 * PI,
        };
        let panels = (len / 0.5).ceil().max(1.0) as usize;
        let step = len / panels as f64;
        for k in 0..panels {
            for (&t, &w) in gx.iter().zip(&gw) {
                let s = step * (k as f64 + 0.5 * (t + 1.0));
                let (off, jac) = match near {
                    Some(d) => (d * s.sinh().powi(2), 2.0),
                    None => (h * s.sin().powi(2), 2.0 * h.sqrt() * s.cos()),
                };
                let x = base + side * off;
                // distance to the opposite end of the piece, and its neighbour
                let other = 2.0 * h - off;
                let pf = far.map_or(1.0, |d| other + d);
                out.push((x, 0.5 * step * w * jac / (other * pf).sqrt()));
            }
        }
    }
    out
}

fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, iters: usize) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
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
    0.5 * (a + b)
}

fn gap_root(q: &[f64], lo: f64, hi: f64) -> Option<f64> {
    let (mut a, mut b) = (lo, hi);
    let fa = horner(q, a);
    let fb = horner(q, b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if (fa < 0.0) == (fb < 0.0) {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = horner(q, m);
        if fm == 0.0 {
            return Some(m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Potential data for any supported family.
#[derive(Debug, Clone)]
pub enum Potential {
    FiniteGap(FiniteGap),
    Disk { center: C64, radius: f64 },
    CircularArc { half_angle: f64 },
    Lemniscate { coeffs: Vec<C64>, level: f64 },
    GreenLevelSet { base: FiniteGap, level: f64 },
}

#[derive(Debug, Clone)]
pub struct PotentialData {
    pub capacity: f64,
    pub kind: Potential,
}

/// Serializable summary of [`PotentialData`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSummary {
    pub capacity: f64,
    #[serde(rename = "Q_coeffs")]
    pub q_coeffs: Vec<f64>,
    pub bands: Vec<[f64; 2]>,
    pub critical_points: Vec<f64>,
    pub pw_sum: f64,
    pub harmonic_measures: Vec<f64>,
}

impl PotentialData {
    pub fn from_finite_gap(fg: FiniteGap) -> Self {
        PotentialData {
            capacity: fg.capacity(),
            kind: Potential::FiniteGap(fg),
        }
    }

    pub fn finite_gap(&self) -> Option<&FiniteGap> {
        match &self.kind {
            Potential::FiniteGap(fg) => Some(fg),
            _ => None,
        }
    }

    /// Green's function with pole at infinity.
    pub fn green(&self, z: C64) -> f64 {
        match &self.kind {
            Potential::FiniteGap(fg) => fg.green(z),
            Potential::Disk { center, radius } => ((z - center).norm() / radius).ln().max(0.0),
            Potential::CircularArc { half_angle } => arc_green(*half_angle, z),
            Potential::Lemniscate { coeffs, level } => {
                let k = (coeffs.len() - 1) as f64;
                ((horner_c(coeffs, z).norm() / level).ln() / k).max(0.0)
            }
            Potential::GreenLevelSet { base, level } => (base.green(z) - level).max(0.0),
        }
    }

    /// Gap critical points (real families) or exterior critical points of G.
    pub fn critical_points(&self) -> Vec<C64> {
        match &self.kind {
            Potential::FiniteGap(fg) => fg.critical_points().into_iter().map(|x| C64::new(x, 0.0)).collect(),
            Potential::GreenLevelSet { base, level } => base
                .critical_points()
                .into_iter()
                .zip(base.critical_values())
                .filter(|(_, &v)| v > *level)
                .map(|(x, _)| C64::new(x, 0.0))
                .collect(),
            Potential::Lemniscate { coeffs, level } => lemniscate_critical_points(coeffs, *level),
            _ => vec![],
        }
    }

    /// Σ G(c_j) over critical points of G off the set.
    pub fn pw_sum(&self) -> f64 {
        match &self.kind {
            Potential::FiniteGap(fg) => fg.pw_sum(),
            _ => self.critical_points().iter().map(|&c| self.green(c)).sum(),
        }
    }

    pub fn harmonic_measures(&self) -> Result<Vec<f64>> {
        match &self.kind {
            Potential::FiniteGap(fg) => Ok(fg.harmonic_measures().to_vec()),
            _ => Err(Error::UnsupportedFamily("harmonic measures need an interval union".into())),
        }
    }

    /// Nodes and weights (summing to 1) of an equilibrium-measure quadrature.
    pub fn equilibrium_quadrature(&self, nodes: usize) -> Result<(Vec<C64>, Vec<f64>)> {
        let nodes = nodes.max(16);
        Ok(match &self.kind {
            Potential::FiniteGap(fg) => fg.equilibrium_quadrature(nodes.div_ceil(fg.l())),
            Potential::Disk { center, radius } => {
                let pts = (0..nodes)
                    .map(|k| center + C64::from_polar(*radius, 2.0 * PI * (k as f64 + 0.5) / nodes as f64))
                    .collect();
                (pts, vec![1.0 / nodes as f64; nodes])
            }
            Potential::CircularArc { half_angle } => {
                let s = (half_angle / 2.0).sin();
                let pts = chebyshev_angles(nodes)
                    .into_iter()
                    .map(|t| C64::from_polar(1.0, 2.0 * (t.cos() * s).asin()))
                    .collect();
                (pts, vec![1.0 / nodes as f64; nodes])
            }
            Potential::Lemniscate { coeffs, level } => {
                let k = coeffs.len() - 1;
                let steps = nodes.div_ceil(k);
                let mut pts = Vec::with_capacity(steps * k);
                for i in 0..steps {
                    let mut shifted = coeffs.clone();
                    shifted[0] -= C64::from_polar(*level, 2.0 * PI * (i as f64 + 0.5) / steps as f64);
                    let roots = crate::numerics::poly::roots_monomial(&shifted)
                        .ok_or(Error::QuadratureUnderflow)?;
                    pts.extend(roots);
                }
                let n = pts.len();
                (pts, vec![1.0 / n as f64; n])
            }
            Potential::GreenLevelSet { base, level } => {
                let curves = base.level_curves(*level, nodes)?;
                let mut pts = Vec::new();
                let mut w = Vec::new();
                for c in curves {
                    pts.extend(c.points);
                    w.extend(c.eq_weights);
                }
                (pts, w)
            }
        })
    }

    pub fn summary(&self) -> PotentialSummary {
        match &self.kind {
            Potential::FiniteGap(fg) => PotentialSummary {
                capacity: self.capacity,
                q_coeffs: fg.q_coeffs(),
                bands: fg.bands().iter().map(|&(a, b)| [a, b]).collect(),
                critical_points: fg.critical_points(),
                pw_sum: fg.pw_sum(),
                harmonic_measures: fg.harmonic_measures().to_vec(),
            },
            _ => PotentialSummary {
                capacity: self.capacity,
                q_coeffs: vec![],
                bands: vec![],
                critical_points: self.critical_points().iter().map(|c| c.re).collect(),
                pw_sum: self.pw_sum(),
                harmonic_measures: vec![],
            },
        }
    }
}

fn lemniscate_critical_points(coeffs: &[C64], level: f64) -> Vec<C64> {
    let k = coeffs.len() - 1;
    if k < 2 {
        return vec![];
    }
    let d: Vec<C64> = (1..=k).map(|j| coeffs[j] * j as f64).collect();
    let roots = crate::numerics::poly::roots_monomial(&d).unwrap_or_default();
    let mut out: Vec<C64> = Vec::new();
    for r in roots {
        if horner_c(coeffs, r).norm() > level * (1.0 + 1e-12) && out.iter().all(|o| (o - r).norm() > 1e-8) {
            out.push(r);
        }
    }
    out
}

/// Green's function of the arc {e^{iθ} : |θ| ≤ α} with pole at infinity.
///
/// w = i(1 - z)/(1 + z) sends the arc to [-tan(α/2), tan(α/2)] and infinity
/// to -i; the Joukowski inverse then opens the slit onto the unit circle.
pub fn arc_green(alpha: f64, z: C64) -> f64 {
    let t = (alpha / 2.0).tan();
    let joukowski = |w: C64| (w + (w - t).sqrt() * (w + t).sqrt()) / t;
    let zp = joukowski(C64::new(0.0, -1.0));
    if (z + 1.0).norm() == 0.0 {
        return zp.norm().ln();
    }
    if !z.is_finite() {
        return f64::INFINITY;
    }
    let w = C64::new(0.0, 1.0) * (1.0 - z) / (1.0 + z);
    let zeta = joukowski(w);
    let v = ((zp.conj() * zeta - 1.0) / (zeta - zp)).norm().ln();
    v.max(0.0)
}

/// Equilibrium density of the circular arc with respect to arc length.
pub fn arc_density(alpha: f64, theta: f64) -> f64 {
    let s = (alpha / 2.0).sin();
    let d = s * s - (theta / 2.0).sin().powi(2);
    if d <= 0.0 {
        return f64::INFINITY;
    }
    (theta / 2.0).cos() / (2.0 * PI * d.sqrt())
}

/// Builds the potential data of a validated descriptor.
pub fn potential_for(desc: &SetDescriptor) -> Result<PotentialData> {
    let desc = validate(desc)?;
    match &desc {
        SetDescriptor::IntervalUnion { .. } => {
            let iv = desc.intervals().unwrap();
            Ok(PotentialData::from_finite_gap(solve_finite_gap(&iv, DEFAULT_QUAD_PTS)?))
        }
        SetDescriptor::Disk { center, radius } => Ok(PotentialData {
            capacity: *radius,
            kind: Potential::Disk {
                center: C64::new(center[0], center[1]),
                radius: *radius,
            },
        }),
        SetDescriptor::CircularArc { half_angle } => Ok(PotentialData {
            capacity: (half_angle / 2.0).sin(),
            kind: Potential::CircularArc {
                half_angle: *half_angle,
            },
        }),
        SetDescriptor::Lemniscate { coeffs, level } => {
            let cs: Vec<C64> = coeffs.iter().map(Coef::value).collect();
            let k = cs.len() - 1;
            let lead = cs[k].norm();
            Ok(PotentialData {
                capacity: (level / lead).powf(1.0 / k as f64),
                kind: Potential::Lemniscate {
                    coeffs: cs,
                    level: *level,
                },
            })
        }
        SetDescriptor::GreenLevelSet { base, level } => {
            let iv: Vec<(f64, f64)> = base.iter().map(|v| (v[0], v[1])).collect();
            let fg = solve_finite_gap(&iv, DEFAULT_QUAD_PTS)?;
            Ok(PotentialData {
                capacity: fg.capacity() * level.exp(),
                kind: Potential::GreenLevelSet {
                    base: fg,
                    level: *level,
                },
            })
        }
        other => Err(Error::UnsupportedFamily(other.family().into())),
    }
}

pub fn capacity(desc: &SetDescriptor) -> Result<f64> {
    potential_for(desc).map(|p| p.capacity)
}

/// S(w) = exp ∫ log w dρ_𝔢, with `nodes` equilibrium quadrature nodes.
///
/// Nodes where w vanishes are dropped; if they carry more than 10⁻³ of the
/// equilibrium mass the Szegő condition is reported as failing.
pub fn szego_value<W: Fn(C64) -> f64>(w: W, pd: &PotentialData, nodes: usize) -> Result<f64> {
    let (pts, weights) = pd.equilibrium_quadrature(nodes)?;
    let mut acc = 0.0;
    let mut dropped = 0.0;
    for (z, q) in pts.iter().zip(&weights) {
        let v = w(*z);
        if v < 0.0 || !v.is_finite() {
            return Err(Error::InvalidInput(format!("weight value {v} at {z}")));
        }
        if v == 0.0 {
            dropped += q;
        } else {
            acc += q * v.ln();
        }
    }
    if dropped > 1e-3 {
        return Err(Error::WeightVanishesEverywhere);
    }
    let s = acc.exp();
    if s == 0.0 {
        return Err(Error::WeightVanishesEverywhere);
    }
    Ok(s)
}
