//! Zeros of Chebyshev polynomials and their distribution.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cheb_complex::{arc_grid_points, chebyshev_complex, ComplexChebSolution, ComplexOptions, Weight};
use crate::cheb_real::{real_zeros, ChebyshevSolution, RealSolver, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::numerics::poly::{horner_c, C64};
use crate::potential::{potential_for, PotentialData};
use crate::sets::{convex_hull, discretize, hull_of_points, validate, DiscretizationConfig, SetDescriptor};

/// A solution from either solver.
#[derive(Debug, Clone, Copy)]
pub enum AnySolution<'a> {
    Real(&'a ChebyshevSolution),
    Complex(&'a ComplexChebSolution),
}

impl AnySolution<'_> {
    pub fn degree(&self) -> usize {
        match self {
            AnySolution::Real(s) => s.degree,
            AnySolution::Complex(s) => s.degree,
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            AnySolution::Real(s) => s.norm,
            AnySolution::Complex(s) => s.norm,
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        match self {
            AnySolution::Real(s) => s.eval_c(z),
            AnySolution::Complex(s) => s.eval(z),
        }
    }

    /// Monic coefficients, lowest degree first.
    pub fn coeffs(&self) -> Vec<C64> {
        match self {
            AnySolution::Real(s) => s.coeffs.iter().map(|&c| C64::new(c, 0.0)).collect(),
            AnySolution::Complex(s) => s.coeffs.clone(),
        }
    }

    fn frame(&self) -> (C64, f64) {
        match self {
            AnySolution::Real(s) => (C64::new(s.window.center, 0.0), s.window.half),
            AnySolution::Complex(s) => s.frame(),
        }
    }
}

/// Normalized zero-counting measure: n zeros, each of mass 1/n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroMeasure {
    pub degree: usize,
    pub zeros: Vec<C64>,
    /// Monic coefficients of the polynomial the zeros belong to.
    pub coeffs: Vec<C64>,
}

impl ZeroMeasure {
    pub fn mass(&self) -> f64 {
        self.zeros.len() as f64 / self.degree as f64
    }

    /// Logarithmic potential (1/n) Σ log|z - w_j|.
    pub fn log_potential(&self, z: C64) -> f64 {
        self.zeros.iter().map(|w| (z - w).norm().ln()).sum::<f64>() / self.degree as f64
    }

    /// |Σ w_j + c_{n-1}| relative to max(1, Σ|w_j|).
    pub fn vieta_residual(&self) -> f64 {
        let n = self.degree;
        let s: C64 = self.zeros.iter().sum();
        let scale = self.zeros.iter().map(|w| w.norm()).sum::<f64>().max(1.0);
        (s + self.coeffs[n - 1]).norm() / scale
    }

    pub fn max_imag(&self) -> f64 {
        self.zeros.iter().map(|w| w.im.abs()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im\n");
        for w in &self.zeros {
            let _ = writeln!(out, "{:.17e},{:.17e}", w.re, w.im);
        }
        out
    }
}

/// Zeros of a converged solution with residual |T(w)| ≤ 1e-8·‖T‖·max(1, |w-c|/r)^n.
pub fn zeros_of(sol: AnySolution) -> Result<ZeroMeasure> {
    let n = sol.degree();
    let mut zeros = match sol {
        AnySolution::Real(s) => real_zeros(s)?,
        AnySolution::Complex(s) => merge_multiple(s.zeros()?, |z| s.eval(z), s.norm),
    };
    if let AnySolution::Real(_) = sol {
        // conjugate pairs only arise from rounding; T has n real zeros
        for z in zeros.iter_mut() {
            if z.im.abs() <= 1e-9 {
                z.im = 0.0;
            }
        }
    }
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let (c, r) = sol.frame();
    let norm = sol.norm();
    let mut worst = 0.0f64;
    for &w in &zeros {
        let local = ((w - c).norm() / r).max(1.0).powi(n as i32);
        worst = worst.max(sol.eval(w).norm() / (norm * local));
    }
    if zeros.len() != n || !(worst <= 1e-8) {
        return Err(Error::RootResidualTooLarge {
            residual: worst,
            roots: zeros.iter().map(|z| [z.re, z.im]).collect(),
        });
    }
    Ok(ZeroMeasure {
        degree: n,
        zeros,
        coeffs: sol.coeffs(),
    })
}

/// Collapses clusters that are a perturbed multiple zero.
///
/// A k-fold zero perturbed by ε splits into a ring of radius ε^{1/k} whose
/// centroid stays accurate; clusters are merged while T at the centroid stays
/// at rounding level.
fn merge_multiple<F: Fn(C64) -> C64>(zeros: Vec<C64>, eval: F, norm: f64) -> Vec<C64> {
    let noise = 1e-12 * norm;
    // (centroid, multiplicity, radius)
    let mut clusters: Vec<(C64, usize, f64)> = zeros.into_iter().map(|z| (z, 1, 0.0)).collect();
    loop {
        let mut best: Option<(f64, usize, usize, C64, f64)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let (zi, ki, ri) = clusters[i];
                let (zj, kj, rj) = clusters[j];
                let d = (zi - zj).norm();
                if best.is_some_and(|b| b.0 <= d) {
                    continue;
                }
                let c = (zi * ki as f64 + zj * kj as f64) / (ki + kj) as f64;
                let rad = ((zi - c).norm() + ri).max((zj - c).norm() + rj);
                // a centroid that lands on some other zero is a coincidence, not a multiple zero
                let crowded = clusters
                    .iter()
                    .enumerate()
                    .any(|(l, o)| l != i && l != j && (o.0 - c).norm() <= rad);
                if !crowded && eval(c).norm() <= noise {
                    best = Some((d, i, j, c, rad));
                }
            }
        }
        let Some((_, i, j, c, rad)) = best else { break };
        let k = clusters[i].1 + clusters[j].1;
        clusters[i] = (c, k, rad);
        clusters.swap_remove(j);
    }
    clusters.into_iter().flat_map(|(z, k, _)| std::iter::repeat_n(z, k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullGapReport {
    /// Largest distance from a zero to the convex hull.
    pub hull_distance: f64,
    pub inside_hull: bool,
    /// Zeros strictly inside each gap, for interval unions.
    pub gap_counts: Vec<usize>,
    pub max_imag: f64,
    pub pass: bool,
}

/// Every zero lies in the convex hull (1e-9 dilation); on interval unions each gap holds at most one.
pub fn hull_and_gap_check(zm: &ZeroMeasure, desc: &SetDescriptor) -> Result<HullGapReport> {
    let desc = validate(desc)?;
    let hull = convex_hull(&desc)?;
    let inside_hull = zm.zeros.iter().all(|&w| hull.contains(w, 1e-9));
    let hull_distance = zm.zeros.iter().map(|&w| hull.distance(w)).fold(0.0, f64::max);
    let mut gap_counts = Vec::new();
    if let Some(iv) = desc.intervals() {
        for k in 1..iv.len() {
            let (lo, hi) = (iv[k - 1].1, iv[k].0);
            gap_counts.push(zm.zeros.iter().filter(|w| w.re > lo && w.re < hi).count());
        }
    }
    let max_imag = zm.max_imag();
    let pass = inside_hull && gap_counts.iter().all(|&c| c <= 1) && (!desc.is_real() || max_imag <= 1e-9);
    Ok(HullGapReport {
        hull_distance,
        inside_hull,
        gap_counts,
        max_imag,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalayageReport {
    pub max_discrepancy: f64,
    pub per_point: Vec<f64>,
    /// Largest difference between the zero-sum and (1/n) log|T| evaluations.
    pub two_way_gap: f64,
}

/// max over test points of |(1/n) Σ log|z - w_j| - (G(z) + log cap)|.
pub fn balayage_check(zm: &ZeroMeasure, pd: &PotentialData, test_pts: &[C64]) -> Result<BalayageReport> {
    let hull = hull_of_points(&zm.zeros);
    for &z in test_pts {
        let d = if hull.len() == 1 {
            (z - hull[0]).norm()
        } else {
            crate::sets::Hull::Polygon(hull.clone()).distance(z)
        };
        if d < 0.5 {
            return Err(Error::TestPointInsideHull(format!("{z}")));
        }
    }
    let n = zm.degree as f64;
    let log_cap = pd.capacity.ln();
    let mut per_point = Vec::with_capacity(test_pts.len());
    let mut two_way_gap = 0.0f64;
    for &z in test_pts {
        let by_zeros = zm.log_potential(z);
        let by_poly = horner_c(&zm.coeffs, z).norm().ln() / n;
        two_way_gap = two_way_gap.max((by_zeros - by_poly).abs());
        per_point.push((by_zeros - pd.green(z) - log_cap).abs());
    }
    Ok(BalayageReport {
        max_discrepancy: per_point.iter().cloned().fold(0.0, f64::max),
        per_point,
        two_way_gap,
    })
}

/// Balayage check with the hull of the set itself guarding the test points.
pub fn balayage_check_for(zm: &ZeroMeasure, desc: &SetDescriptor, pd: &PotentialData, test_pts: &[C64]) -> Result<BalayageReport> {
    let hull = convex_hull(desc)?;
    if let Some(z) = test_pts.iter().find(|&&z| hull.distance(z) < 0.5) {
        return Err(Error::TestPointInsideHull(format!("{z}")));
    }
    balayage_check(zm, pd, test_pts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyClass {
    EmptyInterior,
    AnalyticJordan,
    ConvexPolygon,
    NonConvexPolygon,
}

pub fn classify(desc: &SetDescriptor) -> Result<FamilyClass> {
    Ok(match validate(desc)? {
        SetDescriptor::IntervalUnion { .. } | SetDescriptor::CircularArc { .. } => FamilyClass::EmptyInterior,
        SetDescriptor::Disk { .. } | SetDescriptor::Lemniscate { .. } | SetDescriptor::GreenLevelSet { .. } => {
            FamilyClass::AnalyticJordan
        }
        SetDescriptor::JordanPolyline { vertices } => {
            let v: Vec<C64> = vertices.iter().map(|p| C64::new(p[0], p[1])).collect();
            if hull_of_points(&v).len() == v.len() {
                FamilyClass::ConvexPolygon
            } else {
                FamilyClass::NonConvexPolygon
            }
        }
        other => return Err(Error::UnsupportedFamily(other.family().into())),
    })
}

pub const POLYGON_MAX_DEGREE: usize = 25;
const HIST_BINS: usize = 16;
const CDF_BINS: usize = 200;
const EXTERNAL_POINTS: usize = 32;
const EQ_NODES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    /// counts[row][col], rows along the imaginary axis.
    pub counts: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceStats {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentEntry {
    pub n: usize,
    pub zeros: Vec<[f64; 2]>,
    pub histogram: Histogram,
    pub boundary_distance: DistanceStats,
    /// max |(1/n) Σ log|z - w_j| - G(z) - log cap| over external test points.
    pub potential_discrepancy: Option<f64>,
    /// Quadratic binned distance to the equilibrium measure.
    pub binned_distance: Option<f64>,
    /// Mean distance of the zeros to the centroid-to-vertex skeleton (polygons).
    pub skeleton_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub family: String,
    pub class: FamilyClass,
    pub entries: Vec<ExperimentEntry>,
    /// Degrees dropped by the polygon cap.
    pub skipped: Vec<usize>,
    pub findings: Vec<Finding>,
}

/// Zero measure of the degree-n Chebyshev polynomial of a set, with the solver it came from.
pub fn chebyshev_zeros(desc: &SetDescriptor, n: usize, grid_points: Option<usize>) -> Result<ZeroMeasure> {
    let desc = validate(desc)?;
    if desc.is_real() {
        let sol = RealSolver::new(&desc)?.solve(n, DEFAULT_TOL)?;
        zeros_of(AnySolution::Real(&sol))
    } else {
        let pts = grid_points.unwrap_or_else(|| arc_grid_points(n).max(512));
        let grid = discretize(&desc, &DiscretizationConfig::with_points(pts))?;
        let sol = chebyshev_complex(&grid, n, Weight::Unit, &ComplexOptions::default())?;
        zeros_of(AnySolution::Complex(&sol))
    }
}

/// Zero-distribution experiments over a list of degrees.
pub fn convergence_experiments(desc: &SetDescriptor, n_list: &[usize]) -> Result<ExperimentReport> {
    let desc = validate(desc)?;
    let class = classify(&desc)?;
    let polygon = matches!(class, FamilyClass::ConvexPolygon | FamilyClass::NonConvexPolygon);
    let (degrees, skipped): (Vec<usize>, Vec<usize>) =
        n_list.iter().partition(|&&n| !polygon || n <= POLYGON_MAX_DEGREE);
    let boundary = discretize(&desc, &DiscretizationConfig::with_points(2048))?.points;
    let pd = potential_for(&desc).ok();
    let center: C64 = boundary.iter().sum::<C64>() / boundary.len() as f64;
    let radius = boundary.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
    let external: Vec<C64> = (0..EXTERNAL_POINTS)
        .map(|k| center + C64::from_polar(radius + 1.0, 2.0 * PI * (k as f64 + 0.25) / EXTERNAL_POINTS as f64))
        .collect();
    let eq = match &pd {
        Some(pd) => Some(pd.equilibrium_quadrature(EQ_NODES)?),
        None => None,
    };
    let skeleton: Vec<C64> = match &desc {
        SetDescriptor::JordanPolyline { vertices } => vertices.iter().map(|p| C64::new(p[0], p[1])).collect(),
        _ => vec![],
    };
    let (lo, hi) = bounding_box(&boundary);

    let entries: Vec<ExperimentEntry> = degrees
        .par_iter()
        .map(|&n| -> Result<ExperimentEntry> {
            let zm = chebyshev_zeros(&desc, n, None)?;
            let dists: Vec<f64> = zm
                .zeros
                .iter()
                .map(|w| boundary.iter().map(|b| (w - b).norm()).fold(f64::INFINITY, f64::min))
                .collect();
            let potential_discrepancy = match &pd {
                Some(pd) => Some(balayage_check(&zm, pd, &external)?.max_discrepancy),
                None => None,
            };
            let binned_distance = eq.as_ref().map(|(pts, w)| match class {
                FamilyClass::EmptyInterior => cdf_distance(&desc, &zm.zeros, pts, w),
                _ => histogram_distance(&zm.zeros, pts, w, lo, hi),
            });
            let skeleton_distance = (!skeleton.is_empty()).then(|| {
                let c: C64 = skeleton.iter().sum::<C64>() / skeleton.len() as f64;
                zm.zeros
                    .iter()
                    .map(|&w| skeleton.iter().map(|&v| segment_distance(w, c, v)).fold(f64::INFINITY, f64::min))
                    .sum::<f64>()
                    / n as f64
            });
            Ok(ExperimentEntry {
                n,
                zeros: zm.zeros.iter().map(|z| [z.re, z.im]).collect(),
                histogram: histogram(&zm.zeros, lo, hi),
                boundary_distance: DistanceStats {
                    min: dists.iter().cloned().fold(f64::INFINITY, f64::min),
                    mean: dists.iter().sum::<f64>() / n as f64,
                    max: dists.iter().cloned().fold(0.0, f64::max),
                },
                potential_discrepancy,
                binned_distance,
                skeleton_distance,
            })
        })
        .collect::<Result<_>>()?;

    let mut findings = Vec::new();
    match class {
        FamilyClass::EmptyInterior if entries.len() >= 2 => {
            let (first, last) = (&entries[0], &entries[entries.len() - 1]);
            for (name, a, b) in [
                ("potential_discrepancy_decreases", first.potential_discrepancy, last.potential_discrepancy),
                ("binned_distance_decreases", first.binned_distance, last.binned_distance),
            ] {
                if let (Some(a), Some(b)) = (a, b) {
                    findings.push(Finding {
                        name: name.into(),
                        pass: b <= a,
                        detail: format!("n={}: {a:.3e}, n={}: {b:.3e}", first.n, last.n),
                    });
                }
            }
        }
        FamilyClass::AnalyticJordan => {
            let diam = 2.0 * radius;
            let closest = entries.iter().map(|e| e.boundary_distance.min).fold(f64::INFINITY, f64::min);
            findings.push(Finding {
                name: "zero_free_boundary_annulus".into(),
                pass: closest >= 0.05 * diam,
                detail: format!("closest zero at {closest:.3e} from the boundary, diameter {diam:.3e}"),
            });
        }
        _ => {}
    }
    Ok(ExperimentReport {
        family: desc.family().into(),
        class,
        entries,
        skipped,
        findings,
    })
}

fn bounding_box(points: &[C64]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for z in points {
        lo[0] = lo[0].min(z.re);
        lo[1] = lo[1].min(z.im);
        hi[0] = hi[0].max(z.re);
        hi[1] = hi[1].max(z.im);
    }
    // flat sets still get a box of positive height
    let pad = 0.05 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
    ([lo[0] - pad, lo[1] - pad], [hi[0] + pad, hi[1] + pad])
}

fn bin_of(z: C64, lo: [f64; 2], hi: [f64; 2]) -> Option<(usize, usize)> {
    let fx = (z.re - lo[0]) / (hi[0] - lo[0]);
    let fy = (z.im - lo[1]) / (hi[1] - lo[1]);
    if !(0.0..=1.0).contains(&fx) || !(0.0..=1.0).contains(&fy) {
        return None;
    }
    let b = |f: f64| ((f * HIST_BINS as f64) as usize).min(HIST_BINS - 1);
    Some((b(fy), b(fx)))
}

fn histogram(zeros: &[C64], lo: [f64; 2], hi: [f64; 2]) -> Histogram {
    let mut counts = vec![vec![0u32; HIST_BINS]; HIST_BINS];
    for &z in zeros {
        if let Some((r, c)) = bin_of(z, lo, hi) {
            counts[r][c] += 1;
        }
    }
    Histogram { lo, hi, counts }
}

/// L2 distance between binned zero mass and binned equilibrium mass.
fn histogram_distance(zeros: &[C64], pts: &[C64], w: &[f64], lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let mut diff = vec![0.0; HIST_BINS * HIST_BINS];
    let n = zeros.len() as f64;
    for &z in zeros {
        if let Some((r, c)) = bin_of(z, lo, hi) {
            diff[r * HIST_BINS + c] += 1.0 / n;
        }
    }
    for (&z, &q) in pts.iter().zip(w) {
        if let Some((r, c)) = bin_of(z, lo, hi) {
            diff[r * HIST_BINS + c] -= q;
        }
    }
    diff.iter().map(|d| d * d).sum::<f64>().sqrt()
}

/// (∫ (F_n - F)² ds)^{1/2} along the set, F the distribution function in the natural parameter.
fn cdf_distance(desc: &SetDescriptor, zeros: &[C64], pts: &[C64], w: &[f64]) -> f64 {
    let param = |z: C64| match desc {
        SetDescriptor::CircularArc { .. } => z.arg(),
        _ => z.re,
    };
    let mut eq: Vec<(f64, f64)> = pts.iter().zip(w).map(|(&z, &q)| (param(z), q)).collect();
    eq.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut zs: Vec<f64> = zeros.iter().map(|&z| param(z)).collect();
    zs.sort_by(f64::total_cmp);
    let (a, b) = (eq[0].0, eq[eq.len() - 1].0);
    let h = (b - a) / CDF_BINS as f64;
    let n = zs.len() as f64;
    let (mut ie, mut iz, mut fe, mut acc) = (0, 0, 0.0, 0.0);
    for k in 0..CDF_BINS {
        let x = a + (k as f64 + 0.5) * h;
        while ie < eq.len() && eq[ie].0 <= x {
            fe += eq[ie].1;
            ie += 1;
        }
        while iz < zs.len() && zs[iz] <= x {
            iz += 1;
        }
        acc += (iz as f64 / n - fe).powi(2) * h;
    }
    acc.sqrt()
}

fn segment_distance(z: C64, a: C64, b: C64) -> f64 {
    let e = b - a;
    let l2 = e.norm_sqr();
    if l2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * e.conj()).re / l2).clamp(0.0, 1.0);
    (z - (a + e * t)).norm()
}

/// Scatter plot of zeros over the boundary samples.
pub fn svg_scatter(boundary: &[C64], zeros: &[C64], title: &str) -> String {
    let all: Vec<C64> = boundary.iter().chain(zeros).cloned().collect();
    let (lo, hi) = bounding_box(&all);
    let size = 480.0;
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let map = |z: C64| (20.0 + (z.re - lo[0]) / span * size, 20.0 + (hi[1] - z.im) / span * size);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{w}" viewBox="0 0 {w} {w}">"#,
        w = size + 40.0
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    for &b in boundary {
        let (x, y) = map(b);
        let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="0.8" fill="#888"/>"##);
    }
    for &z in zeros {
        let (x, y) = map(z);
        let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="#c22"/>"##);
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
