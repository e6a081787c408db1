//! Verification campaigns: bounds, root asymptotics and zero checks over set
//! families and degree ranges, with CSV and JSON reports.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cheb_complex::{arc_grid_points, chebyshev_complex, ComplexOptions, Weight};
use crate::cheb_real::{build_period_set, key_formula_check, key_formula_points, RealSolver};
use crate::error::{Error, Result};
use crate::numerics::poly::C64;
use crate::potential::{potential_for, PotentialData};
use crate::sets::{discretize, validate, DiscretizationConfig, SetDescriptor};
use crate::zeros::{balayage_check_for, hull_and_gap_check, zeros_of, AnySolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSet {
    pub id: String,
    pub set: SetDescriptor,
}

/// Seeded unions of 2–3 intervals with gaps of at least `min_gap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomFamily {
    pub count: usize,
    pub seed: u64,
    pub min_intervals: usize,
    pub max_intervals: usize,
    pub min_gap: f64,
}

impl Default for RandomFamily {
    fn default() -> Self {
        RandomFamily {
            count: 100,
            seed: 1,
            min_intervals: 2,
            max_intervals: 3,
            min_gap: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeRange {
    pub min: usize,
    pub max: usize,
}

impl DegreeRange {
    /// Parses "a..b" (inclusive) or a single degree.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("degree range {s:?}"));
        let (a, b) = match s.split_once("..") {
            Some((a, b)) => (a.trim(), b.trim().trim_start_matches('=')),
            None => (s.trim(), s.trim()),
        };
        Ok(DegreeRange {
            min: a.parse().map_err(|_| bad())?,
            max: b.parse().map_err(|_| bad())?,
        })
    }

    pub fn degrees(&self) -> Vec<usize> {
        (self.min..=self.max).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Slack on lower bounds (Szegő, Schiefermayr).
    pub lower_bound: f64,
    /// Slack on the Totik–Widom and level-set upper bounds.
    pub upper_bound: f64,
    pub norm_identity: f64,
    pub key_formula: f64,
    pub lemniscate: f64,
    pub level_set_identity: f64,
    /// min W_n over the window may exceed 2 by this much.
    pub liminf_slack: f64,
    pub liminf_window: usize,
    /// Largest allowed |‖T_n‖^{1/n} - cap| at the top degree.
    pub root_deviation: f64,
    pub monotone_slack: f64,
    pub vieta: f64,
    pub remez: f64,
    pub complex: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            lower_bound: 1e-8,
            upper_bound: 1e-6,
            norm_identity: 1e-6,
            key_formula: 1e-8,
            lemniscate: 1e-5,
            level_set_identity: 1e-5,
            liminf_slack: 0.05,
            liminf_window: 40,
            root_deviation: 0.02,
            monotone_slack: 1e-7,
            vieta: 1e-9,
            remez: 1e-10,
            complex: 1e-8,
        }
    }
}

impl Tolerances {
    fn all(&self) -> [f64; 12] {
        [
            self.lower_bound,
            self.upper_bound,
            self.norm_identity,
            self.key_formula,
            self.lemniscate,
            self.level_set_identity,
            self.liminf_slack,
            self.root_deviation,
            self.monotone_slack,
            self.vieta,
            self.remez,
            self.complex,
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignConfig {
    pub sets: Vec<NamedSet>,
    pub family: Option<RandomFamily>,
    pub degrees: DegreeRange,
    /// Degrees used by the root-asymptotics suite.
    pub asymptotic_degrees: Vec<usize>,
    pub tolerances: Tolerances,
    /// Minimum boundary grid size for the complex solver.
    pub grid_points: usize,
    pub output: OutputPaths,
    pub workers: Option<usize>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            sets: vec![],
            family: None,
            degrees: DegreeRange { min: 1, max: 10 },
            asymptotic_degrees: vec![8, 16, 32],
            tolerances: Tolerances::default(),
            grid_points: 512,
            output: OutputPaths::default(),
            workers: None,
        }
    }
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("campaign config: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidInput(format!("campaign config: {e}")))
    }

    /// Reads a `.toml` or JSON config.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "toml") {
            Self::from_toml(&text)
        } else {
            Self::from_json(&text)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degrees.min == 0 || self.degrees.min > self.degrees.max {
            return Err(Error::InvalidInput(format!(
                "degree range {}..{} must be nonempty and start at 1 or more",
                self.degrees.min, self.degrees.max
            )));
        }
        if self.tolerances.all().iter().any(|t| !(*t > 0.0)) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if self.asymptotic_degrees.contains(&0) {
            return Err(Error::InvalidInput("asymptotic degrees must be at least 1".into()));
        }
        if self.sets.is_empty() && self.family.as_ref().is_none_or(|f| f.count == 0) {
            return Err(Error::InvalidInput("campaign has no sets".into()));
        }
        if let Some(f) = &self.family {
            if f.min_intervals < 1 || f.min_intervals > f.max_intervals || !(f.min_gap > 0.0) {
                return Err(Error::InvalidInput("random family parameters".into()));
            }
        }
        for s in &self.sets {
            validate(&s.set)?;
        }
        Ok(())
    }

    /// Explicit sets followed by the generated family.
    pub fn all_sets(&self) -> Vec<NamedSet> {
        let mut out = self.sets.clone();
        if let Some(f) = &self.family {
            out.extend(random_family(f));
        }
        out
    }

    /// Worker count: config value, overridden by WIDOMLAB_WORKERS, defaulting to the core count.
    pub fn resolved_workers(&self) -> usize {
        std::env::var("WIDOMLAB_WORKERS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&w| w > 0)
            .or(self.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

pub fn random_family(f: &RandomFamily) -> Vec<NamedSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(f.seed);
    (0..f.count)
        .map(|k| {
            let l = rng.random_range(f.min_intervals..=f.max_intervals);
            let widths: Vec<f64> = (0..l).map(|_| rng.random_range(0.2..1.0)).collect();
            let gaps: Vec<f64> = (1..l).map(|_| rng.random_range(f.min_gap..0.6)).collect();
            let total: f64 = widths.iter().sum::<f64>() + gaps.iter().sum::<f64>();
            let mut x = -total / 2.0;
            let mut iv = Vec::with_capacity(l);
            for j in 0..l {
                iv.push((x, x + widths[j]));
                x += widths[j];
                if j + 1 < l {
                    x += gaps[j];
                }
            }
            NamedSet {
                id: format!("random-{:03}", k),
                set: SetDescriptor::interval_union(&iv),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    /// Passes when measured ≤ bound.
    AtMost,
    /// Passes when measured ≥ bound.
    AtLeast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Ok,
    Unsupported,
    NonConvergence,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub set_id: String,
    pub n: usize,
    pub check: String,
    pub inputs_digest: String,
    #[serde(with = "nullable")]
    pub measured: f64,
    #[serde(with = "nullable")]
    pub bound: f64,
    pub sense: Sense,
    #[serde(with = "nullable")]
    pub margin: f64,
    pub pass: bool,
    pub status: Status,
    pub norm: Option<f64>,
    pub capacity: Option<f64>,
    pub widom_factor: Option<f64>,
    /// Degree window of trend checks.
    pub window: Option<[usize; 2]>,
    pub detail: String,
    /// Wall time in milliseconds; kept out of reports so they stay reproducible.
    #[serde(skip)]
    pub runtime_ms: f64,
}

/// JSON has no NaN; failed checks store null.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

impl CheckResult {
    pub fn recompute_margin(&self) -> f64 {
        match self.sense {
            Sense::AtMost => self.bound - self.measured,
            Sense::AtLeast => self.measured - self.bound,
        }
    }
}

/// Per-(set, n) data every check of that job shares.
#[derive(Debug, Clone, Default)]
struct JobInfo {
    norm: Option<f64>,
    capacity: Option<f64>,
    widom: Option<f64>,
}

struct Builder<'a> {
    set: &'a NamedSet,
    n: usize,
    info: JobInfo,
    tol: &'a Tolerances,
    start: Instant,
}

impl Builder<'_> {
    fn check(&self, check: &str, measured: f64, bound: f64, sense: Sense, detail: String) -> CheckResult {
        let mut r = CheckResult {
            set_id: self.set.id.clone(),
            n: self.n,
            check: check.into(),
            inputs_digest: digest(&self.set.set, self.n, check, self.tol),
            measured,
            bound,
            sense,
            margin: 0.0,
            pass: false,
            status: Status::Ok,
            norm: self.info.norm,
            capacity: self.info.capacity,
            widom_factor: self.info.widom,
            window: None,
            detail,
            runtime_ms: self.start.elapsed().as_secs_f64() * 1e3,
        };
        r.margin = r.recompute_margin();
        r.pass = r.margin >= 0.0 && measured.is_finite();
        r
    }

    fn failure(&self, check: &str, err: &Error) -> CheckResult {
        let status = match err {
            Error::UnsupportedFamily(_) => Status::Unsupported,
            Error::NonConvergence { .. } => Status::NonConvergence,
            _ => Status::Error,
        };
        let mut r = self.check(check, f64::NAN, f64::NAN, Sense::AtMost, err.to_string());
        r.status = status;
        r.margin = f64::NAN;
        r.pass = false;
        r
    }
}

/// FNV-1a of the canonical JSON of the inputs.
fn digest(set: &SetDescriptor, n: usize, check: &str, tol: &Tolerances) -> String {
    let text = serde_json::json!({ "set": set, "n": n, "check": check, "tol": tol }).to_string();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    Bounds,
    Asymptotics,
    Zeros,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounds" => Ok(Suite::Bounds),
            "asymptotics" => Ok(Suite::Asymptotics),
            "zeros" => Ok(Suite::Zeros),
            "all" => Ok(Suite::All),
            _ => Err(Error::InvalidInput(format!("unknown suite {s:?}"))),
        }
    }
}

/// The outcome of one campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub suite: Suite,
    pub sets: usize,
    pub solver_calls: usize,
    pub results: Vec<CheckResult>,
}

impl CampaignReport {
    pub fn failed(&self) -> usize {
        self.results.iter().filter(|r| !r.pass).count()
    }

    pub fn nonconverged(&self) -> bool {
        self.results.iter().any(|r| r.status == Status::NonConvergence)
    }

    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn to_csv(&self) -> String {
        to_csv(&self.results)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Writes the CSV and JSON files named in the config.
    pub fn write(&self, out: &OutputPaths) -> std::io::Result<()> {
        if let Some(p) = &out.csv {
            std::fs::write(p, self.to_csv())?;
        }
        if let Some(p) = &out.json {
            std::fs::write(p, self.to_json())?;
        }
        Ok(())
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub const CSV_HEADER: &str = "set_id,n,norm,capacity,widom_factor,check,margin,pass";

pub fn to_csv(results: &[CheckResult]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in results {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{:e},{}",
            r.set_id,
            r.n,
            fmt_opt(r.norm),
            fmt_opt(r.capacity),
            fmt_opt(r.widom_factor),
            r.check,
            r.margin,
            r.pass
        );
    }
    s
}

/// Runs a suite on a worker pool of the resolved size.
pub fn run_campaign(cfg: &CampaignConfig, suite: Suite) -> Result<CampaignReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.resolved_workers())
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    pool.install(|| {
        let mut results = Vec::new();
        let mut calls = 0;
        if matches!(suite, Suite::Bounds | Suite::All) {
            let (r, c) = bound_suite(cfg);
            results.extend(r);
            calls += c;
        }
        if matches!(suite, Suite::Asymptotics | Suite::All) {
            let (r, c) = asymptotics_suite(cfg);
            results.extend(r);
            calls += c;
        }
        if matches!(suite, Suite::Zeros | Suite::All) {
            let (r, c) = zeros_suite(cfg);
            results.extend(r);
            calls += c;
        }
        Ok(CampaignReport {
            suite,
            sets: cfg.all_sets().len(),
            solver_calls: calls,
            results,
        })
    })
}

pub fn run_bound_suite(cfg: &CampaignConfig) -> Result<Vec<CheckResult>> {
    run_campaign(cfg, Suite::Bounds).map(|r| r.results)
}

pub fn run_root_asymptotics(cfg: &CampaignConfig) -> Result<Vec<CheckResult>> {
    run_campaign(cfg, Suite::Asymptotics).map(|r| r.results)
}

/// A solved (set, n) job.
enum Solved {
    Real(crate::cheb_real::ChebyshevSolution),
    Complex(crate::cheb_complex::ComplexChebSolution),
}

impl Solved {
    fn any(&self) -> AnySolution<'_> {
        match self {
            Solved::Real(s) => AnySolution::Real(s),
            Solved::Complex(s) => AnySolution::Complex(s),
        }
    }
}

/// The one solver call of a job.
fn solve(set: &SetDescriptor, n: usize, cfg: &CampaignConfig) -> Result<Solved> {
    if set.is_real() {
        Ok(Solved::Real(RealSolver::new(set)?.solve(n, cfg.tolerances.remez)?))
    } else {
        let pts = cfg.grid_points.max(arc_grid_points(n));
        let grid = discretize(set, &DiscretizationConfig::with_points(pts))?;
        let opts = ComplexOptions {
            tol: cfg.tolerances.complex,
            ..ComplexOptions::default()
        };
        Ok(Solved::Complex(chebyshev_complex(&grid, n, Weight::Unit, &opts)?))
    }
}

struct JobOutput {
    set: usize,
    n: usize,
    info: JobInfo,
    results: Vec<CheckResult>,
    /// Extra per-job values the set-level checks need.
    extra: Vec<f64>,
}

/// Fans (set, n) jobs out over the current pool; output order follows input order.
fn run_jobs<F>(sets: &[NamedSet], degrees: &[usize], cfg: &CampaignConfig, job: F) -> Vec<JobOutput>
where
    F: Fn(&NamedSet, usize, Option<&PotentialData>, Builder) -> (Vec<CheckResult>, Vec<f64>) + Sync,
{
    let pds: Vec<Option<PotentialData>> = sets.par_iter().map(|s| potential_for(&s.set).ok()).collect();
    let jobs: Vec<(usize, usize)> = (0..sets.len()).flat_map(|s| degrees.iter().map(move |&n| (s, n))).collect();
    jobs.par_iter()
        .map(|&(si, n)| {
            let set = &sets[si];
            let pd = pds[si].as_ref();
            let b = Builder {
                set,
                n,
                info: JobInfo {
                    capacity: pd.map(|p| p.capacity),
                    ..JobInfo::default()
                },
                tol: &cfg.tolerances,
                start: Instant::now(),
            };
            let info = b.info.clone();
            let (results, extra) = job(set, n, pd, b);
            let info = results.first().map_or(info, |r| JobInfo {
                norm: r.norm,
                capacity: r.capacity,
                widom: r.widom_factor,
            });
            JobOutput {
                set: si,
                n,
                info,
                results,
                extra,
            }
        })
        .collect()
}

fn widom_of(norm: f64, cap: Option<f64>, n: usize) -> Option<f64> {
    cap.filter(|c| *c > 0.0).map(|c| (norm.ln() - n as f64 * c.ln()).exp())
}

/// Points on a circle `gap` outside the enclosing disk about the boundary centroid.
fn external_points(set: &SetDescriptor, count: usize, phase: f64, gap: f64) -> Result<Vec<C64>> {
    let g = discretize(set, &DiscretizationConfig::with_points(1024))?;
    let c: C64 = g.points.iter().sum::<C64>() / g.len() as f64;
    let r = g.points.iter().map(|z| (z - c).norm()).fold(0.0, f64::max);
    Ok((0..count)
        .map(|k| c + C64::from_polar(r + gap, 2.0 * PI * (k as f64 + phase) / count as f64))
        .collect())
}

fn bound_suite(cfg: &CampaignConfig) -> (Vec<CheckResult>, usize) {
    let sets = cfg.all_sets();
    let degrees = cfg.degrees.degrees();
    let tol = &cfg.tolerances;
    let outputs = run_jobs(&sets, &degrees, cfg, |set, n, pd, mut b| {
        let solved = match solve(&set.set, n, cfg) {
            Ok(s) => s,
            Err(e) => return (vec![b.failure("solve", &e)], vec![]),
        };
        let norm = solved.any().norm();
        b.info.norm = Some(norm);
        b.info.widom = widom_of(norm, b.info.capacity, n);
        let mut out = Vec::new();
        let Some(pd) = pd else {
            let e = Error::UnsupportedFamily(format!("{} has no potential data", set.set.family()));
            return (vec![b.failure("bounds", &e)], vec![]);
        };
        let w = b.info.widom.unwrap_or(f64::NAN);
        match &solved {
            Solved::Real(sol) => {
                out.push(b.check("schiefermayr_lower", w, 2.0 - tol.lower_bound, Sense::AtLeast, "W_n >= 2".into()));
                let tw = 2.0 * pd.pw_sum().exp();
                out.push(b.check(
                    "totik_widom_upper",
                    w,
                    tw + tol.upper_bound,
                    Sense::AtMost,
                    format!("2 exp(PW) = {tw:.12}"),
                ));
                match build_period_set(sol) {
                    Ok(ps) => {
                        match ps.potential() {
                            Some(fg) => {
                                let rel = (norm - 2.0 * fg.capacity().powi(n as i32)).abs() / norm;
                                out.push(b.check(
                                    "norm_identity",
                                    rel,
                                    tol.norm_identity,
                                    Sense::AtMost,
                                    format!("cap(e_n) = {:.15}", fg.capacity()),
                                ));
                            }
                            None => out.push(b.failure("norm_identity", &Error::SingularSystem)),
                        }
                        let mut worst = (0.0f64, 0.0f64);
                        // |B^{-n}| grows like e^{nG}; on {|B^{-n}| = 4} an absolute tolerance is meaningful
                        let (pts, mut err) = match key_formula_points(&ps, 20) {
                            Ok(p) => (p, None),
                            Err(e) => (vec![], Some(e)),
                        };
                        for z in pts {
                            match key_formula_check(&ps, sol, z) {
                                Ok(k) => worst = (worst.0.max(k.identity), worst.1.max(k.modulus)),
                                Err(e) => err = Some(e),
                            }
                        }
                        match err {
                            Some(e) => out.push(b.failure("key_formula", &e)),
                            None => {
                                out.push(b.check("key_formula_identity", worst.0, tol.key_formula, Sense::AtMost, "20 points on |B^-n| = 4".into()));
                                out.push(b.check("key_formula_modulus", worst.1, tol.key_formula, Sense::AtMost, "20 points on |B^-n| = 4".into()));
                            }
                        }
                    }
                    Err(e) => out.push(b.failure("period_set", &e)),
                }
            }
            Solved::Complex(_) => {
                out.push(b.check("szego_lower", w, 1.0 - tol.lower_bound, Sense::AtLeast, "W_n >= 1".into()));
                if let SetDescriptor::GreenLevelSet { base, level } = &set.set {
                    let base_pw = pd.pw_sum_of_base();
                    let bound = (1.0 + (-(n as f64) * level).exp()) * base_pw.exp() * pd.capacity.powi(n as i32);
                    out.push(b.check(
                        "level_set_upper",
                        norm,
                        bound * (1.0 + tol.upper_bound),
                        Sense::AtMost,
                        format!("(1+e^(-n a)) exp(PW(e0)) cap^n = {bound:e}"),
                    ));
                    let iv: Vec<(f64, f64)> = base.iter().map(|v| (v[0], v[1])).collect();
                    match level_set_reference(&iv, n, *level, tol.remez) {
                        Ok(Some((period, reference))) => {
                            let rel = (norm - reference).abs() / reference;
                            out.push(b.check(
                                "level_set_identity",
                                rel,
                                tol.level_set_identity,
                                Sense::AtMost,
                                format!("e0 is period-{period}; cosh(n a) ||T(e0)|| = {reference:e}"),
                            ));
                        }
                        Ok(None) => {}
                        Err(e) => out.push(b.failure("level_set_identity", &e)),
                    }
                }
            }
        }
        (out, vec![])
    });

    let mut results = Vec::new();
    for (si, set) in sets.iter().enumerate() {
        let mine: Vec<&JobOutput> = outputs.iter().filter(|o| o.set == si).collect();
        for o in &mine {
            results.extend(o.results.iter().cloned());
        }
        results.extend(set_level_bounds(set, &mine, cfg));
    }
    (results, sets.len() * degrees.len())
}

impl PotentialData {
    /// PW sum of the base set of a Green level set (0 for other families).
    fn pw_sum_of_base(&self) -> f64 {
        match &self.kind {
            crate::potential::Potential::GreenLevelSet { base, .. } => base.pw_sum(),
            _ => 0.0,
        }
    }
}

/// cosh(nα)·‖T_n(𝔢₀)‖ when some divisor d of n makes 𝔢₀ a period-d set.
fn level_set_reference(base: &[(f64, f64)], n: usize, level: f64, tol: f64) -> Result<Option<(usize, f64)>> {
    let solver = RealSolver::from_intervals(base)?;
    for d in (1..=n).filter(|d| n % d == 0) {
        let sol = solver.solve(d, tol)?;
        let ps = build_period_set(&sol)?;
        let merged = ps.merged_bands();
        let same = merged.len() == base.len()
            && merged.iter().zip(base).all(|(a, b)| (a.0 - b.0).abs() < 1e-8 && (a.1 - b.1).abs() < 1e-8);
        if same {
            let full = if d == n { sol } else { solver.solve(n, tol)? };
            return Ok(Some((d, (n as f64 * level).cosh() * full.norm)));
        }
    }
    Ok(None)
}

fn set_result(set: &NamedSet, n: usize, check: &str, measured: f64, bound: f64, sense: Sense, window: [usize; 2], tol: &Tolerances, detail: String) -> CheckResult {
    let b = Builder {
        set,
        n,
        info: JobInfo::default(),
        tol,
        start: Instant::now(),
    };
    let mut r = b.check(check, measured, bound, sense, detail);
    r.window = Some(window);
    r.runtime_ms = 0.0;
    r
}

/// Checks that need the whole degree window of one set.
fn set_level_bounds(set: &NamedSet, jobs: &[&JobOutput], cfg: &CampaignConfig) -> Vec<CheckResult> {
    let tol = &cfg.tolerances;
    let mut out = Vec::new();
    let widoms: Vec<(usize, f64)> = jobs.iter().filter_map(|o| o.info.widom.map(|w| (o.n, w))).collect();
    if widoms.is_empty() {
        return out;
    }
    let window = [widoms[0].0, widoms[widoms.len() - 1].0];
    match &set.set {
        SetDescriptor::IntervalUnion { .. } => {
            // a shorter campaign says nothing about the liminf
            let inside: Vec<f64> = widoms.iter().filter(|(n, _)| *n <= tol.liminf_window).map(|p| p.1).collect();
            if window[1] >= tol.liminf_window && !inside.is_empty() {
                let m = inside.iter().cloned().fold(f64::INFINITY, f64::min);
                out.push(set_result(
                    set,
                    window[1].min(tol.liminf_window),
                    "liminf_window",
                    m,
                    2.0 + tol.liminf_slack,
                    Sense::AtMost,
                    [window[0], window[1].min(tol.liminf_window)],
                    tol,
                    "min W_n over the window".into(),
                ));
            }
        }
        SetDescriptor::Lemniscate { coeffs, .. } => {
            let k = coeffs.len() - 1;
            // W_0 = 1; W_1..W_{k-1} must come from this campaign
            let mut lower = vec![1.0];
            for j in 1..k {
                if let Some(&(_, w)) = widoms.iter().find(|(n, _)| *n == j) {
                    lower.push(w);
                }
            }
            for &(n, w) in &widoms {
                let mut r = if lower.len() == k {
                    let kmax = lower.iter().cloned().fold(0.0, f64::max);
                    set_result(
                        set,
                        n,
                        "lemniscate_upper",
                        w,
                        kmax * (1.0 + tol.lemniscate),
                        Sense::AtMost,
                        window,
                        tol,
                        format!("max W_j (j < {k}) = {kmax:.12}"),
                    )
                } else {
                    let e = Error::UnsupportedFamily(format!("degrees 1..{} missing from the window", k - 1));
                    Builder {
                        set,
                        n,
                        info: JobInfo::default(),
                        tol,
                        start: Instant::now(),
                    }
                    .failure("lemniscate_upper", &e)
                };
                r.runtime_ms = 0.0;
                out.push(r);
            }
        }
        SetDescriptor::CircularArc { half_angle } => {
            let drop = widoms.windows(2).map(|p| p[0].1 - p[1].1).fold(f64::NEG_INFINITY, f64::max);
            if widoms.len() >= 2 {
                out.push(set_result(
                    set,
                    window[1],
                    "arc_monotone",
                    drop,
                    tol.monotone_slack,
                    Sense::AtMost,
                    window,
                    tol,
                    "largest decrease W_n - W_{n+1}".into(),
                ));
            }
            let limit = 1.0 + (half_angle / 2.0).cos();
            let top = widoms[widoms.len() - 1].1;
            out.push(set_result(
                set,
                window[1],
                "arc_below_limit",
                top,
                limit + tol.monotone_slack,
                Sense::AtMost,
                window,
                tol,
                format!("1 + cos(a/2) = {limit:.12}"),
            ));
        }
        _ => {}
    }
    out
}

fn asymptotics_suite(cfg: &CampaignConfig) -> (Vec<CheckResult>, usize) {
    let sets = cfg.all_sets();
    let mut degrees = cfg.asymptotic_degrees.clone();
    degrees.sort_unstable();
    degrees.dedup();
    let tol = &cfg.tolerances;
    let outputs = run_jobs(&sets, &degrees, cfg, |set, n, pd, mut b| {
        let solved = match solve(&set.set, n, cfg) {
            Ok(s) => s,
            Err(e) => return (vec![b.failure("solve", &e)], vec![]),
        };
        let sol = solved.any();
        let norm = sol.norm();
        b.info.norm = Some(norm);
        b.info.widom = widom_of(norm, b.info.capacity, n);
        let Some(pd) = pd else {
            let e = Error::UnsupportedFamily(format!("{} has no capacity", set.set.family()));
            return (vec![b.failure("root_asymptotics", &e)], vec![]);
        };
        let nf = n as f64;
        let dev = (norm.powf(1.0 / nf) - pd.capacity).abs();
        let pts = external_points(&set.set, 10, 0.1, 1.0).unwrap_or_default();
        let pointwise = pts
            .iter()
            .map(|&z| (sol.eval(z).norm().powf(1.0 / nf) - pd.capacity * pd.green(z).exp()).abs())
            .fold(0.0, f64::max);
        let r = b.check("norm_root_deviation", dev, f64::INFINITY, Sense::AtMost, "|‖T_n‖^(1/n) - cap|".into());
        (vec![r], vec![dev, pointwise])
    });

    let mut results = Vec::new();
    for (si, set) in sets.iter().enumerate() {
        let mine: Vec<&JobOutput> = outputs.iter().filter(|o| o.set == si).collect();
        for o in &mine {
            results.extend(o.results.iter().cloned());
        }
        let ok: Vec<&&JobOutput> = mine.iter().filter(|o| o.extra.len() == 2).collect();
        if ok.len() < 2 {
            continue;
        }
        let window = [ok[0].n, ok[ok.len() - 1].n];
        let top = ok[ok.len() - 1].extra[0];
        results.push(set_result(
            set,
            window[1],
            "norm_root_top",
            top,
            tol.root_deviation,
            Sense::AtMost,
            window,
            tol,
            "deviation at the top degree".into(),
        ));
        for (idx, name) in [(0, "norm_root_trend"), (1, "pointwise_root_trend")] {
            // largest increase between consecutive degrees; relative slack absorbs rounding
            let rise = ok
                .windows(2)
                .map(|p| p[1].extra[idx] - p[0].extra[idx] * (1.0 + 1e-9))
                .fold(f64::NEG_INFINITY, f64::max);
            results.push(set_result(set, window[1], name, rise, 1e-14, Sense::AtMost, window, tol, "deviation decreasing in n".into()));
        }
    }
    (results, sets.len() * degrees.len())
}

fn zeros_suite(cfg: &CampaignConfig) -> (Vec<CheckResult>, usize) {
    let sets = cfg.all_sets();
    let degrees = cfg.degrees.degrees();
    let tol = &cfg.tolerances;
    let outputs = run_jobs(&sets, &degrees, cfg, |set, n, pd, mut b| {
        let solved = match solve(&set.set, n, cfg) {
            Ok(s) => s,
            Err(e) => return (vec![b.failure("solve", &e)], vec![]),
        };
        let sol = solved.any();
        b.info.norm = Some(sol.norm());
        b.info.widom = widom_of(sol.norm(), b.info.capacity, n);
        let zm = match zeros_of(sol) {
            Ok(z) => z,
            Err(e) => return (vec![b.failure("zeros", &e)], vec![]),
        };
        let mut out = Vec::new();
        out.push(b.check("vieta", zm.vieta_residual(), tol.vieta, Sense::AtMost, "sum of zeros vs -c_{n-1}".into()));
        match hull_and_gap_check(&zm, &set.set) {
            Ok(h) => {
                let most = h.gap_counts.iter().copied().max().unwrap_or(0) as f64;
                out.push(b.check("hull_distance", h.hull_distance, 1e-9, Sense::AtMost, "zeros in the convex hull".into()));
                if set.set.is_real() {
                    out.push(b.check("zeros_per_gap", most, 1.0, Sense::AtMost, format!("{:?}", h.gap_counts)));
                }
            }
            Err(e) => out.push(b.failure("hull_distance", &e)),
        }
        let mut extra = vec![];
        if let Some(pd) = pd {
            let pts = external_points(&set.set, 10, 0.2, 1.0).unwrap_or_default();
            match balayage_check_for(&zm, &set.set, pd, &pts) {
                Ok(r) => {
                    out.push(b.check("balayage_two_ways", r.two_way_gap, 1e-12, Sense::AtMost, "zero sum vs (1/n) log|T_n|".into()));
                    extra.push(r.max_discrepancy);
                }
                Err(e) => out.push(b.failure("balayage", &e)),
            }
        }
        (out, extra)
    });
    let mut results = Vec::new();
    for (si, set) in sets.iter().enumerate() {
        let mine: Vec<&JobOutput> = outputs.iter().filter(|o| o.set == si).collect();
        for o in &mine {
            results.extend(o.results.iter().cloned());
        }
        let ok: Vec<&&JobOutput> = mine.iter().filter(|o| o.extra.len() == 1).collect();
        if ok.len() >= 2 && matches!(set.set, SetDescriptor::IntervalUnion { .. } | SetDescriptor::CircularArc { .. }) {
            let (first, last) = (ok[0], ok[ok.len() - 1]);
            results.push(set_result(
                set,
                last.n,
                "balayage_trend",
                last.extra[0],
                first.extra[0],
                Sense::AtMost,
                [first.n, last.n],
                tol,
                "discrepancy at the top degree vs the lowest".into(),
            ));
        }
    }
    (results, sets.len() * degrees.len())
}

/// Fixed-width summary table of one or more JSON reports.
pub fn summary_table(reports: &[CampaignReport]) -> String {
    let mut rows: Vec<(String, usize, usize, usize)> = Vec::new();
    for rep in reports {
        for r in &rep.results {
            let pos = match rows.iter().position(|x| x.0 == r.check) {
                Some(p) => p,
                None => {
                    rows.push((r.check.clone(), 0, 0, 0));
                    rows.len() - 1
                }
            };
            let row = &mut rows[pos];
            if r.pass {
                row.1 += 1;
            } else if r.status == Status::Ok {
                row.2 += 1;
            } else {
                row.3 += 1;
            }
        }
    }
    let mut s = format!("{:<24} {:>8} {:>8} {:>8}\n", "check", "pass", "fail", "skipped");
    for (c, p, f, k) in rows {
        let _ = writeln!(s, "{c:<24} {p:>8} {f:>8} {k:>8}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval_cfg(max: usize) -> CampaignConfig {
        CampaignConfig {
            sets: vec![NamedSet {
                id: "interval".into(),
                set: SetDescriptor::interval_union(&[(-1.0, 1.0)]),
            }],
            degrees: DegreeRange { min: 1, max },
            workers: Some(2),
            ..CampaignConfig::default()
        }
    }

    #[test]
    fn interval_passes_bounds() {
        let rep = run_campaign(&interval_cfg(40), Suite::Bounds).unwrap();
        assert_eq!(rep.solver_calls, 40);
        for r in &rep.results {
            assert!(r.pass, "{r:?}");
            assert_eq!(r.margin, r.recompute_margin());
            if let Some(w) = r.widom_factor {
                assert!((w - 2.0).abs() < 1e-9);
            }
        }
        assert!(rep.results.iter().any(|r| r.check == "liminf_window"));
    }

    #[test]
    fn random_family_respects_gaps() {
        let f = RandomFamily {
            count: 50,
            seed: 7,
            ..RandomFamily::default()
        };
        let a = random_family(&f);
        assert_eq!(a, random_family(&f));
        for s in &a {
            let iv = s.set.intervals().unwrap();
            assert!((2..=3).contains(&iv.len()));
            for w in iv.windows(2) {
                assert!(w[1].0 - w[0].1 >= 0.05);
            }
        }
    }

    #[test]
    fn reports_do_not_depend_on_workers() {
        let mut cfg = interval_cfg(4);
        cfg.family = Some(RandomFamily {
            count: 3,
            seed: 11,
            ..RandomFamily::default()
        });
        cfg.workers = Some(1);
        let a = run_campaign(&cfg, Suite::All).unwrap();
        cfg.workers = Some(3);
        let b = run_campaign(&cfg, Suite::All).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.to_csv().starts_with(CSV_HEADER));
    }

    #[test]
    fn config_validation() {
        let mut cfg = interval_cfg(3);
        cfg.degrees = DegreeRange { min: 4, max: 3 };
        assert!(cfg.validate().is_err());
        let mut cfg = interval_cfg(3);
        cfg.tolerances.vieta = 0.0;
        assert!(cfg.validate().is_err());
        let toml_text = r#"
            degrees = { min = 1, max = 5 }
            [[sets]]
            id = "i"
            set = { type = "IntervalUnion", intervals = [[-1.0, 1.0]] }
        "#;
        let c = CampaignConfig::from_toml(toml_text).unwrap();
        assert_eq!(c.degrees.max, 5);
        c.validate().unwrap();
        assert_eq!(DegreeRange::parse("1..40").unwrap(), DegreeRange { min: 1, max: 40 });
    }

    #[test]
    fn level_set_identity_on_interval_base() {
        let cfg = CampaignConfig {
            sets: vec![NamedSet {
                id: "level".into(),
                set: SetDescriptor::GreenLevelSet {
                    base: vec![[-1.0, 1.0]],
                    level: 0.5,
                },
            }],
            degrees: DegreeRange { min: 1, max: 3 },
            grid_points: 1024,
            ..CampaignConfig::default()
        };
        let rep = run_campaign(&cfg, Suite::Bounds).unwrap();
        let ids: Vec<&CheckResult> = rep.results.iter().filter(|r| r.check == "level_set_identity").collect();
        assert_eq!(ids.len(), 3);
        assert!(rep.all_pass(), "{:#?}", rep.results);
    }
}
