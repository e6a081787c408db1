//! Compact-set descriptions, validation, boundary discretization and convex hulls.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::poly::{horner_c, newton_polish, roots_monomial, C64};

/// A polynomial coefficient in the set-description file: a bare number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coef {
    Real(f64),
    Complex([f64; 2]),
}

impl Coef {
    pub fn value(&self) -> C64 {
        match *self {
            Coef::Real(x) => C64::new(x, 0.0),
            Coef::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// A compact set given by structured geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum SetDescriptor {
    /// Finite union of closed real intervals.
    IntervalUnion { intervals: Vec<[f64; 2]> },
    Disk { center: [f64; 2], radius: f64 },
    /// The arc {e^{iθ} : |θ| ≤ half_angle} of the unit circle.
    CircularArc { half_angle: f64 },
    /// The solid lemniscate {z : |P(z)| ≤ level}, coefficients lowest degree first.
    Lemniscate { coeffs: Vec<Coef>, level: f64 },
    /// {z : G_base(z) ≤ level} for a finite union of intervals `base`.
    GreenLevelSet { base: Vec<[f64; 2]>, level: f64 },
    /// A closed polygon, vertices in order, closing edge implied.
    JordanPolyline { vertices: Vec<[f64; 2]> },
    PointGrid { points: Vec<[f64; 2]> },
}

impl SetDescriptor {
    pub fn interval_union(intervals: &[(f64, f64)]) -> Self {
        SetDescriptor::IntervalUnion {
            intervals: intervals.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            SetDescriptor::IntervalUnion { .. } => "IntervalUnion",
            SetDescriptor::Disk { .. } => "Disk",
            SetDescriptor::CircularArc { .. } => "CircularArc",
            SetDescriptor::Lemniscate { .. } => "Lemniscate",
            SetDescriptor::GreenLevelSet { .. } => "GreenLevelSet",
            SetDescriptor::JordanPolyline { .. } => "JordanPolyline",
            SetDescriptor::PointGrid { .. } => "PointGrid",
        }
    }

    /// True when the set lies on the real line.
    pub fn is_real(&self) -> bool {
        matches!(self, SetDescriptor::IntervalUnion { .. })
    }

    pub fn intervals(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            SetDescriptor::IntervalUnion { intervals } => {
                Some(intervals.iter().map(|v| (v[0], v[1])).collect())
            }
            _ => None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serializes")
    }

    /// Distance-like residual of `z` from the (outer) boundary of the set.
    pub fn boundary_residual(&self, z: C64) -> f64 {
        match self {
            SetDescriptor::IntervalUnion { intervals } => {
                let d = intervals
                    .iter()
                    .map(|v| {
                        if z.re < v[0] {
                            v[0] - z.re
                        } else if z.re > v[1] {
                            z.re - v[1]
                        } else {
                            0.0
                        }
                    })
                    .fold(f64::INFINITY, f64::min);
                d + z.im.abs()
            }
            SetDescriptor::Disk { center, radius } => {
                ((z - C64::new(center[0], center[1])).norm() - radius).abs()
            }
            SetDescriptor::CircularArc { half_angle } => {
                (z.norm() - 1.0).abs() + (z.arg().abs() - half_angle).max(0.0)
            }
            SetDescriptor::Lemniscate { coeffs, level } => {
                let c: Vec<C64> = coeffs.iter().map(Coef::value).collect();
                (horner_c(&c, z).norm() - level).abs()
            }
            SetDescriptor::GreenLevelSet { base, level } => {
                let iv: Vec<(f64, f64)> = base.iter().map(|v| (v[0], v[1])).collect();
                match crate::potential::solve_finite_gap(&iv, crate::potential::DEFAULT_QUAD_PTS) {
                    Ok(pd) => (pd.green(z) - level).abs(),
                    Err(_) => f64::INFINITY,
                }
            }
            SetDescriptor::JordanPolyline { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let a = c(vertices[i]);
                        let b = c(vertices[(i + 1) % n]);
                        segment_distance(z, a, b)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
            SetDescriptor::PointGrid { points } => points
                .iter()
                .map(|p| (z - c(*p)).norm())
                .fold(f64::INFINITY, f64::min),
        }
    }
}

fn c(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

fn segment_distance(z: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

/// Checks invariants and returns the canonical form of a descriptor.
pub fn validate(desc: &SetDescriptor) -> Result<SetDescriptor> {
    match desc {
        SetDescriptor::IntervalUnion { intervals } => Ok(SetDescriptor::IntervalUnion {
            intervals: canonical_intervals(intervals)?,
        }),
        SetDescriptor::Disk { center, radius } => {
            if !(radius.is_finite() && *radius > 0.0) || !center.iter().all(|v| v.is_finite()) {
                return Err(Error::DegenerateComponent(format!("disk radius {radius}")));
            }
            Ok(desc.clone())
        }
        SetDescriptor::CircularArc { half_angle } => {
            if !(*half_angle > 0.0 && *half_angle < PI) {
                return Err(Error::DegenerateComponent(format!(
                    "arc half-angle {half_angle} outside (0, π)"
                )));
            }
            Ok(desc.clone())
        }
        SetDescriptor::Lemniscate { coeffs, level } => {
            let mut coeffs = coeffs.clone();
            while coeffs.last().map(|c| c.value().norm() == 0.0).unwrap_or(false) {
                coeffs.pop();
            }
            if coeffs.len() < 2 {
                return Err(Error::DegenerateComponent(
                    "lemniscate polynomial must have degree ≥ 1".into(),
                ));
            }
            if !coeffs.iter().all(|c| c.value().is_finite()) {
                return Err(Error::InvalidInput("non-finite coefficient".into()));
            }
            if !(level.is_finite() && *level > 0.0) {
                return Err(Error::DegenerateComponent(format!("lemniscate level {level}")));
            }
            Ok(SetDescriptor::Lemniscate {
                coeffs,
                level: *level,
            })
        }
        SetDescriptor::GreenLevelSet { base, level } => {
            if !(level.is_finite() && *level > 0.0) {
                return Err(Error::DegenerateComponent(format!("Green level {level}")));
            }
            Ok(SetDescriptor::GreenLevelSet {
                base: canonical_intervals(base)?,
                level: *level,
            })
        }
        SetDescriptor::JordanPolyline { vertices } => {
            let mut v = vertices.clone();
            if v.len() > 1 && v.first() == v.last() {
                v.pop();
            }
            if v.len() < 3 || !v.iter().flatten().all(|x| x.is_finite()) {
                return Err(Error::NonSimplePolyline);
            }
            if !polyline_is_simple(&v) {
                return Err(Error::NonSimplePolyline);
            }
            Ok(SetDescriptor::JordanPolyline { vertices: v })
        }
        SetDescriptor::PointGrid { points } => {
            if points.is_empty() || !points.iter().flatten().all(|x| x.is_finite()) {
                return Err(Error::InvalidInput("point grid must be nonempty and finite".into()));
            }
            Ok(desc.clone())
        }
    }
}

fn canonical_intervals(raw: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    if raw.is_empty() {
        return Err(Error::DegenerateComponent("empty interval list".into()));
    }
    let mut v = raw.to_vec();
    for iv in &v {
        if !(iv[0].is_finite() && iv[1].is_finite()) {
            return Err(Error::InvalidInput("non-finite interval endpoint".into()));
        }
        if iv[0] >= iv[1] {
            return Err(Error::DegenerateComponent(format!(
                "interval [{}, {}] has nonpositive length",
                iv[0], iv[1]
            )));
        }
    }
    v.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(v.len());
    for iv in v {
        match out.last_mut() {
            Some(last) if iv[0] == last[1] => last[1] = iv[1],
            Some(last) if iv[0] < last[1] => {
                return Err(Error::OverlappingIntervals(last[0], last[1], iv[0], iv[1]))
            }
            _ => out.push(iv),
        }
    }
    Ok(out)
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_intersect(p1: C64, p2: C64, q1: C64, q2: C64) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: C64, b: C64, p: C64| {
        cross(b - a, p - a) == 0.0
            && p.re >= a.re.min(b.re)
            && p.re <= a.re.max(b.re)
            && p.im >= a.im.min(b.im)
            && p.im <= a.im.max(b.im)
    };
    on(q1, q2, p1) || on(q1, q2, p2) || on(p1, p2, q1) || on(p1, p2, q2)
}

fn polyline_is_simple(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    let pts: Vec<C64> = v.iter().map(|p| c(*p)).collect();
    for i in 0..n {
        for j in 0..i {
            if pts[i] == pts[j] {
                return false;
            }
        }
    }
    for i in 0..n {
        let (a1, a2) = (pts[i], pts[(i + 1) % n]);
        for j in (i + 1)..n {
            let (b1, b2) = (pts[j], pts[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // shared vertex only; reject folding back along the same line
                let shared = if j == i + 1 { a2 } else { a1 };
                let u = if j == i + 1 { a1 - shared } else { a2 - shared };
                let w = if j == i + 1 { b2 - shared } else { b1 - shared };
                if cross(u, w) == 0.0 && (u * w.conj()).re > 0.0 {
                    return false;
                }
                continue;
            }
            if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationConfig {
    pub points_per_component: usize,
    /// Exponent p ≥ 1 of the endpoint clustering map t ↦ sign(t)(1 - (1 - |t|)^p).
    pub clustering: f64,
    pub seed: u64,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        DiscretizationConfig {
            points_per_component: 512,
            clustering: 2.0,
            seed: 0,
        }
    }
}

impl DiscretizationConfig {
    pub fn with_points(points: usize) -> Self {
        DiscretizationConfig {
            points_per_component: points,
            ..Default::default()
        }
    }
}

pub const MIN_POINTS_PER_COMPONENT: usize = 16;

/// A contiguous, ordered run of grid points along one boundary curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub len: usize,
    /// Closed curves wrap around; open arcs have two endpoints.
    pub closed: bool,
}

/// Discretized domain of a sup-norm problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGrid {
    pub points: Vec<C64>,
    pub component: Vec<usize>,
    /// Arc-length quadrature weights, when the grid samples curves.
    pub weights: Option<Vec<f64>>,
    /// Ordered runs; empty for unordered point clouds.
    pub segments: Vec<Segment>,
    pub source: SetDescriptor,
}

impl BoundaryGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Builds an unordered grid from raw points (PointGrid provenance).
    pub fn from_points(points: Vec<C64>) -> Self {
        let n = points.len();
        BoundaryGrid {
            source: SetDescriptor::PointGrid {
                points: points.iter().map(|z| [z.re, z.im]).collect(),
            },
            points,
            component: vec![0; n],
            weights: None,
            segments: vec![],
        }
    }

    pub fn rotated(&self, phase: C64) -> BoundaryGrid {
        let mut g = self.clone();
        for z in g.points.iter_mut() {
            *z *= phase;
        }
        g.source = SetDescriptor::PointGrid {
            points: g.points.iter().map(|z| [z.re, z.im]).collect(),
        };
        g
    }

    pub fn max_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|&z| self.source.boundary_residual(z))
            .fold(0.0, f64::max)
    }
}

pub fn cluster(t: f64, p: f64) -> f64 {
    if p == 1.0 {
        return t;
    }
    t.signum() * (1.0 - (1.0 - t.abs()).powf(p))
}

fn clustered_nodes(m: usize, p: f64) -> Vec<f64> {
    (0..m)
        .map(|k| {
            let t = -1.0 + 2.0 * k as f64 / (m - 1) as f64;
            cluster(t, p)
        })
        .collect()
}

fn trapezoid_weights(s: &[f64]) -> Vec<f64> {
    let m = s.len();
    (0..m)
        .map(|k| {
            let lo = if k == 0 { s[0] } else { 0.5 * (s[k - 1] + s[k]) };
            let hi = if k + 1 == m { s[m - 1] } else { 0.5 * (s[k] + s[k + 1]) };
            hi - lo
        })
        .collect()
}

/// Samples the set (or its outer boundary) for a sup-norm solve.
pub fn discretize(desc: &SetDescriptor, cfg: &DiscretizationConfig) -> Result<BoundaryGrid> {
    let m = cfg.points_per_component;
    if m < MIN_POINTS_PER_COMPONENT {
        return Err(Error::ConfigTooCoarse {
            required: MIN_POINTS_PER_COMPONENT,
            got: m,
        });
    }
    if !(cfg.clustering >= 1.0) {
        return Err(Error::InvalidInput("clustering exponent must be ≥ 1".into()));
    }
    let desc = validate(desc)?;
    let mut points = Vec::new();
    let mut component = Vec::new();
    let mut weights = Vec::new();
    let mut segments = Vec::new();
    match &desc {
        SetDescriptor::IntervalUnion { intervals } => {
            for (j, iv) in intervals.iter().enumerate() {
                let (mid, half) = (0.5 * (iv[0] + iv[1]), 0.5 * (iv[1] - iv[0]));
                let mut xs: Vec<f64> = clustered_nodes(m, cfg.clustering)
                    .into_iter()
                    .map(|t| mid + half * t)
                    .collect();
                xs[0] = iv[0];
                xs[m - 1] = iv[1];
                segments.push(Segment {
                    start: points.len(),
                    len: m,
                    closed: false,
                });
                weights.extend(trapezoid_weights(&xs));
                points.extend(xs.iter().map(|&x| C64::new(x, 0.0)));
                component.extend(std::iter::repeat_n(j, m));
            }
        }
        SetDescriptor::Disk { center, radius } => {
            let c0 = c(*center);
            for k in 0..m {
                let th = 2.0 * PI * k as f64 / m as f64;
                points.push(c0 + C64::from_polar(*radius, th));
            }
            weights = vec![2.0 * PI * radius / m as f64; m];
            component = vec![0; m];
            segments.push(Segment {
                start: 0,
                len: m,
                closed: true,
            });
        }
        SetDescriptor::CircularArc { half_angle } => {
            let th: Vec<f64> = clustered_nodes(m, cfg.clustering)
                .into_iter()
                .map(|t| half_angle * t)
                .collect();
            weights = trapezoid_weights(&th);
            points = th.iter().map(|&t| C64::from_polar(1.0, t)).collect();
            component = vec![0; m];
            segments.push(Segment {
                start: 0,
                len: m,
                closed: false,
            });
        }
        SetDescriptor::Lemniscate { coeffs, level } => {
            let cs: Vec<C64> = coeffs.iter().map(Coef::value).collect();
            let lc = lemniscate_curves(&cs, *level, m)?;
            for (j, curve) in lc.into_iter().enumerate() {
                segments.push(Segment {
                    start: points.len(),
                    len: curve.len(),
                    closed: true,
                });
                component.extend(std::iter::repeat_n(j, curve.len()));
                for (z, w) in curve {
                    points.push(z);
                    weights.push(w);
                }
            }
        }
        SetDescriptor::GreenLevelSet { base, level } => {
            let iv: Vec<(f64, f64)> = base.iter().map(|v| (v[0], v[1])).collect();
            let pd = crate::potential::solve_finite_gap(&iv, crate::potential::DEFAULT_QUAD_PTS)?;
            let curves = pd.level_curves(*level, m)?;
            for (j, curve) in curves.into_iter().enumerate() {
                segments.push(Segment {
                    start: points.len(),
                    len: curve.points.len(),
                    closed: true,
                });
                component.extend(std::iter::repeat_n(j, curve.points.len()));
                points.extend(curve.points);
                weights.extend(curve.arc_weights);
            }
        }
        SetDescriptor::JordanPolyline { vertices } => {
            let vs: Vec<C64> = vertices.iter().map(|p| c(*p)).collect();
            let nv = vs.len();
            let perimeter: f64 = (0..nv).map(|i| (vs[(i + 1) % nv] - vs[i]).norm()).sum();
            for i in 0..nv {
                let (a, b) = (vs[i], vs[(i + 1) % nv]);
                let len = (b - a).norm();
                let k = ((m as f64 * len / perimeter).round() as usize).max(2);
                for j in 0..k {
                    let t = j as f64 / k as f64;
                    points.push(a + (b - a) * t);
                }
            }
            let np = points.len();
            weights = (0..np)
                .map(|i| {
                    let prev = points[(i + np - 1) % np];
                    let next = points[(i + 1) % np];
                    0.5 * ((points[i] - prev).norm() + (next - points[i]).norm())
                })
                .collect();
            component = vec![0; np];
            segments.push(Segment {
                start: 0,
                len: np,
                closed: true,
            });
        }
        SetDescriptor::PointGrid { points: ps } => {
            let mut g = BoundaryGrid::from_points(ps.iter().map(|p| c(*p)).collect());
            g.source = desc.clone();
            return Ok(g);
        }
    }
    Ok(BoundaryGrid {
        points,
        component,
        weights: Some(weights),
        segments,
        source: desc,
    })
}

/// Boundary curves of {|P| ≤ level}: points solve P(z) = level·e^{iφ} on a
/// uniform φ grid, joined into closed curves by continuity. Each entry pairs
/// a point with its arc-length weight.
fn lemniscate_curves(coeffs: &[C64], level: f64, m: usize) -> Result<Vec<Vec<(C64, f64)>>> {
    let k = coeffs.len() - 1;
    let steps = m.div_ceil(k).max(MIN_POINTS_PER_COMPONENT);
    let dphi = 2.0 * PI / steps as f64;
    let deriv: Vec<C64> = (1..=k).map(|j| coeffs[j] * j as f64).collect();
    let solve = |phi: f64| -> Result<Vec<C64>> {
        let mut shifted = coeffs.to_vec();
        shifted[0] -= C64::from_polar(level, phi);
        let mut r = roots_monomial(&shifted).ok_or(Error::DegenerateComponent(
            "lemniscate root solve failed".into(),
        ))?;
        for z in r.iter_mut() {
            *z = newton_polish(&shifted, *z);
        }
        Ok(r)
    };
    // sheets[s][i]: the root continued from sheet s at step i
    let mut sheets: Vec<Vec<C64>> = solve(0.5 * dphi)?.into_iter().map(|z| vec![z]).collect();
    for i in 1..steps {
        let roots = solve((i as f64 + 0.5) * dphi)?;
        let prev: Vec<C64> = sheets.iter().map(|s| *s.last().unwrap()).collect();
        let assign = match_nearest(&prev, &roots);
        for (s, &r) in assign.iter().enumerate() {
            sheets[s].push(roots[r]);
        }
    }
    // wrap-around: the successor of sheet s is the sheet whose first point is nearest
    let firsts: Vec<C64> = sheets.iter().map(|s| s[0]).collect();
    let lasts: Vec<C64> = sheets.iter().map(|s| *s.last().unwrap()).collect();
    let next = match_nearest(&lasts, &firsts);
    let mut seen = vec![false; k];
    let mut curves = Vec::new();
    for start in 0..k {
        if seen[start] {
            continue;
        }
        let mut curve = Vec::new();
        let mut s = start;
        while !seen[s] {
            seen[s] = true;
            for &z in &sheets[s] {
                let dp = horner_c(&deriv, z);
                let w = if dp.norm() > 0.0 { level * dphi / dp.norm() } else { 0.0 };
                curve.push((z, w));
            }
            s = next[s];
        }
        curves.push(curve);
    }
    Ok(curves)
}

/// Greedy nearest matching: out[i] = index into `to` assigned to `from[i]`.
fn match_nearest(from: &[C64], to: &[C64]) -> Vec<usize> {
    let n = from.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, a) in from.iter().enumerate() {
        for (j, b) in to.iter().enumerate() {
            pairs.push(((a - b).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out = vec![usize::MAX; n];
    let mut used = vec![false; to.len()];
    for (_, i, j) in pairs {
        if out[i] == usize::MAX && !used[j] {
            out[i] = j;
            used[j] = true;
        }
    }
    out
}

/// Convex hull of a set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Hull {
    Interval(f64, f64),
    /// {|z| ≤ 1, Re z ≥ cos α}: the region between a circular arc and its chord.
    ArcSegment { cos_half_angle: f64 },
    /// Convex polygon, counter-clockwise.
    Polygon(Vec<C64>),
}

impl Hull {
    /// Membership in the hull dilated by `tol`.
    pub fn contains(&self, z: C64, tol: f64) -> bool {
        match self {
            Hull::Interval(a, b) => z.im.abs() <= tol && z.re >= a - tol && z.re <= b + tol,
            Hull::ArcSegment { cos_half_angle } => {
                z.norm() <= 1.0 + tol && z.re >= cos_half_angle - tol
            }
            Hull::Polygon(v) => {
                let n = v.len();
                if n == 1 {
                    return (z - v[0]).norm() <= tol;
                }
                if n == 2 {
                    return segment_distance(z, v[0], v[1]) <= tol;
                }
                (0..n).all(|i| {
                    let a = v[i];
                    let b = v[(i + 1) % n];
                    let e = b - a;
                    cross(e, z - a) / e.norm() >= -tol
                })
            }
        }
    }

    /// Distance from z to the hull (0 inside).
    pub fn distance(&self, z: C64) -> f64 {
        if self.contains(z, 0.0) {
            return 0.0;
        }
        match self {
            Hull::Interval(a, b) => segment_distance(z, C64::new(*a, 0.0), C64::new(*b, 0.0)),
            Hull::ArcSegment { cos_half_angle } => {
                let ca = *cos_half_angle;
                let sa = (1.0 - ca * ca).sqrt();
                let chord = segment_distance(z, C64::new(ca, -sa), C64::new(ca, sa));
                let alpha = sa.atan2(ca);
                let th = z.arg().clamp(-alpha, alpha);
                let arc = (z - C64::from_polar(1.0, th)).norm();
                chord.min(arc)
            }
            Hull::Polygon(v) => {
                let n = v.len();
                (0..n)
                    .map(|i| segment_distance(z, v[i], v[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// Andrew's monotone chain; returns counter-clockwise hull vertices.
pub fn hull_of_points(points: &[C64]) -> Vec<C64> {
    let mut p: Vec<C64> = points.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut lower: Vec<C64> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 1] - lower[lower.len() - 2], q - lower[lower.len() - 2]) <= 0.0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<C64> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 1] - upper[upper.len() - 2], q - upper[upper.len() - 2]) <= 0.0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

const HULL_POINTS: usize = 4096;

pub fn convex_hull(desc: &SetDescriptor) -> Result<Hull> {
    let desc = validate(desc)?;
    match &desc {
        SetDescriptor::IntervalUnion { intervals } => {
            Ok(Hull::Interval(intervals[0][0], intervals[intervals.len() - 1][1]))
        }
        SetDescriptor::CircularArc { half_angle } => Ok(Hull::ArcSegment {
            cos_half_angle: half_angle.cos(),
        }),
        SetDescriptor::Disk { center, radius } => {
            // circumscribed regular polygon: contains the disk, Hausdorff gap r(sec(π/N) - 1)
            let r = radius / (PI / HULL_POINTS as f64).cos();
            Ok(Hull::Polygon(
                (0..HULL_POINTS)
                    .map(|k| c(*center) + C64::from_polar(r, 2.0 * PI * k as f64 / HULL_POINTS as f64))
                    .collect(),
            ))
        }
        SetDescriptor::JordanPolyline { vertices } => {
            Ok(Hull::Polygon(hull_of_points(&vertices.iter().map(|p| c(*p)).collect::<Vec<_>>())))
        }
        SetDescriptor::PointGrid { points } => {
            Ok(Hull::Polygon(hull_of_points(&points.iter().map(|p| c(*p)).collect::<Vec<_>>())))
        }
        SetDescriptor::Lemniscate { .. } | SetDescriptor::GreenLevelSet { .. } => {
            let g = discretize(&desc, &DiscretizationConfig::with_points(HULL_POINTS))?;
            Ok(Hull::Polygon(hull_of_points(&g.points)))
        }
    }
}

/// Maps points near a grid back onto the underlying curve, so that grids
/// can be refined between samples.
#[derive(Debug, Clone)]
pub enum Projector {
    /// Straight pieces (intervals, polygon edges): interpolants already lie on the set.
    Straight,
    Circle { center: C64, radius: f64 },
    Arc { half_angle: f64 },
    Lemniscate { coeffs: Vec<C64>, level: f64 },
    GreenLevel { base: crate::potential::FiniteGap, level: f64 },
    /// Unordered point clouds admit no refinement.
    Fixed,
}

impl Projector {
    pub fn for_source(desc: &SetDescriptor) -> Result<Self> {
        Ok(match desc {
            SetDescriptor::IntervalUnion { .. } | SetDescriptor::JordanPolyline { .. } => Projector::Straight,
            SetDescriptor::Disk { center, radius } => Projector::Circle {
                center: c(*center),
                radius: *radius,
            },
            SetDescriptor::CircularArc { half_angle } => Projector::Arc {
                half_angle: *half_angle,
            },
            SetDescriptor::Lemniscate { coeffs, level } => Projector::Lemniscate {
                coeffs: coeffs.iter().map(Coef::value).collect(),
                level: *level,
            },
            SetDescriptor::GreenLevelSet { base, level } => {
                let iv: Vec<(f64, f64)> = base.iter().map(|v| (v[0], v[1])).collect();
                Projector::GreenLevel {
                    base: crate::potential::solve_finite_gap(&iv, crate::potential::DEFAULT_QUAD_PTS)?,
                    level: *level,
                }
            }
            SetDescriptor::PointGrid { .. } => Projector::Fixed,
        })
    }

    pub fn refinable(&self) -> bool {
        !matches!(self, Projector::Fixed)
    }

    pub fn project(&self, z: C64) -> C64 {
        match self {
            Projector::Straight | Projector::Fixed => z,
            Projector::Circle { center, radius } => {
                let d = z - center;
                if d.norm() == 0.0 {
                    return z;
                }
                center + d * (radius / d.norm())
            }
            Projector::Arc { half_angle } => C64::from_polar(1.0, z.arg().clamp(-half_angle, *half_angle)),
            Projector::Lemniscate { coeffs, level } => {
                let deriv: Vec<C64> = (1..coeffs.len()).map(|j| coeffs[j] * j as f64).collect();
                let mut w = z;
                for _ in 0..20 {
                    let p = horner_c(coeffs, w);
                    if p.norm() == 0.0 {
                        break;
                    }
                    let target = p * (level / p.norm());
                    let dp = horner_c(&deriv, w);
                    if dp.norm() == 0.0 {
                        break;
                    }
                    let step = (p - target) / dp;
                    w -= step;
                    if step.norm() < 1e-16 * (1.0 + w.norm()) {
                        break;
                    }
                }
                w
            }
            Projector::GreenLevel { base, level } => {
                let mut w = z;
                for _ in 0..20 {
                    let g = base.green(w) - level;
                    let d = base.complex_green_derivative(w);
                    if d.norm() == 0.0 {
                        break;
                    }
                    let step = g / d;
                    w -= step;
                    if step.norm() < 1e-15 * (1.0 + w.norm()) {
                        break;
                    }
                }
                w
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_interval_is_unchanged() {
        let d = SetDescriptor::interval_union(&[(-1.0, 1.0)]);
        assert_eq!(validate(&d).unwrap(), d);
    }

    #[test]
    fn touching_intervals_merge() {
        let d = SetDescriptor::interval_union(&[(0.0, 2.0), (-1.0, 0.0)]);
        assert_eq!(
            validate(&d).unwrap(),
            SetDescriptor::interval_union(&[(-1.0, 2.0)])
        );
    }

    #[test]
    fn overlapping_and_degenerate_intervals_are_rejected() {
        let d = SetDescriptor::interval_union(&[(0.0, 2.0), (1.0, 3.0)]);
        assert!(matches!(validate(&d), Err(Error::OverlappingIntervals(..))));
        let d = SetDescriptor::interval_union(&[(1.0, 1.0)]);
        assert!(matches!(validate(&d), Err(Error::DegenerateComponent(_))));
    }

    #[test]
    fn arc_at_pi_is_degenerate() {
        let d = SetDescriptor::CircularArc { half_angle: PI };
        assert!(matches!(validate(&d), Err(Error::DegenerateComponent(_))));
        let d = SetDescriptor::CircularArc { half_angle: 0.0 };
        assert!(validate(&d).is_err());
    }

    #[test]
    fn lemniscate_needs_positive_degree_and_level() {
        let d = SetDescriptor::Lemniscate {
            coeffs: vec![Coef::Real(1.0), Coef::Real(0.0)],
            level: 1.0,
        };
        assert!(validate(&d).is_err());
        let d = SetDescriptor::Lemniscate {
            coeffs: vec![Coef::Real(-1.0), Coef::Real(0.0), Coef::Real(1.0)],
            level: 0.0,
        };
        assert!(validate(&d).is_err());
    }

    #[test]
    fn self_intersecting_polyline_is_rejected() {
        let bowtie = SetDescriptor::JordanPolyline {
            vertices: vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]],
        };
        assert_eq!(validate(&bowtie), Err(Error::NonSimplePolyline));
        let square = SetDescriptor::JordanPolyline {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        };
        assert!(validate(&square).is_ok());
    }

    #[test]
    fn disk_grid_is_equispaced_on_circle() {
        let d = SetDescriptor::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        };
        let g = discretize(&d, &DiscretizationConfig::with_points(256)).unwrap();
        assert_eq!(g.len(), 256);
        for (k, z) in g.points.iter().enumerate() {
            assert!((z.norm() - 1.0).abs() < 1e-15);
            let want = C64::from_polar(1.0, 2.0 * PI * k as f64 / 256.0);
            assert!((z - want).norm() < 1e-15);
        }
    }

    #[test]
    fn arc_grid_clusters_at_endpoints() {
        let alpha = PI / 2.0;
        let d = SetDescriptor::CircularArc { half_angle: alpha };
        let g = discretize(
            &d,
            &DiscretizationConfig {
                points_per_component: 128,
                clustering: 2.0,
                seed: 0,
            },
        )
        .unwrap();
        let th: Vec<f64> = g.points.iter().map(|z| z.arg()).collect();
        assert!(th.iter().all(|t| t.abs() <= alpha + 1e-15));
        let gaps: Vec<f64> = th.windows(2).map(|w| w[1] - w[0]).collect();
        let interior = gaps[gaps.len() / 2];
        assert!(gaps[0] < interior && gaps[gaps.len() - 1] < interior);
        assert!(g.max_residual() < 1e-12);
    }

    #[test]
    fn lemniscate_grid_lies_on_level_curve() {
        let d = SetDescriptor::Lemniscate {
            coeffs: vec![Coef::Real(-1.0), Coef::Real(0.0), Coef::Real(1.0)],
            level: 1.0,
        };
        let g = discretize(&d, &DiscretizationConfig::with_points(200)).unwrap();
        assert_eq!(g.len(), 200);
        for z in &g.points {
            assert!(((z * z - 1.0).norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn coarse_config_is_rejected() {
        let d = SetDescriptor::interval_union(&[(-1.0, 1.0)]);
        let r = discretize(&d, &DiscretizationConfig::with_points(8));
        assert!(matches!(r, Err(Error::ConfigTooCoarse { .. })));
    }

    #[test]
    fn interval_hull_and_grid() {
        let d = SetDescriptor::interval_union(&[(-1.0, -0.5), (0.5, 1.0)]);
        assert_eq!(convex_hull(&d).unwrap(), Hull::Interval(-1.0, 1.0));
        let g = discretize(&d, &DiscretizationConfig::with_points(64)).unwrap();
        assert_eq!(g.len(), 128);
        assert_eq!(g.component[70], 1);
        assert!(g.max_residual() == 0.0);
    }

    #[test]
    fn disk_hull_is_tight_and_contains_grid() {
        let d = SetDescriptor::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        };
        let h = convex_hull(&d).unwrap();
        let Hull::Polygon(v) = &h else { panic!() };
        let outer = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let inner = (0..v.len())
            .map(|i| segment_distance(C64::new(0.0, 0.0), v[i], v[(i + 1) % v.len()]))
            .fold(f64::INFINITY, f64::min);
        assert!(outer - 1.0 < 1e-6 && inner >= 1.0 - 1e-12);
        let g = discretize(&d, &DiscretizationConfig::with_points(1000)).unwrap();
        assert!(g.points.iter().all(|&z| h.contains(z, 0.0)));
    }

    #[test]
    fn arc_hull_contains_samples_and_excludes_outside() {
        let d = SetDescriptor::CircularArc { half_angle: PI / 2.0 };
        let h = convex_hull(&d).unwrap();
        let g = discretize(&d, &DiscretizationConfig::with_points(777)).unwrap();
        assert!(g.points.iter().all(|&z| h.contains(z, 1e-12)));
        assert!(!h.contains(C64::new(-0.1, 0.0), 1e-12));
        assert!(h.contains(C64::new(0.5, 0.3), 0.0));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let texts = [
            r#"{"type":"IntervalUnion","intervals":[[-2.23606797749979,-1.0],[1.0,2.23606797749979]]}"#,
            r#"{"type":"Lemniscate","coeffs":[-1.0,0.0,1.0],"level":1.0}"#,
            r#"{"type":"Lemniscate","coeffs":[[0.5,-0.25],1.0],"level":2.0}"#,
            r#"{"type":"CircularArc","half_angle":1.5707963267948966}"#,
        ];
        for t in texts {
            let d = SetDescriptor::from_json(t).unwrap();
            let v = validate(&d).unwrap();
            assert_eq!(v.to_json(), t);
        }
    }
}
