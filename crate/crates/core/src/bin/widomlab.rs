use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use widomlab::cheb_complex::{arc_grid_points, chebyshev_complex, ComplexOptions, Weight};
use widomlab::cheb_real::RealSolver;
use widomlab::potential::potential_for;
use widomlab::sets::{discretize, validate, DiscretizationConfig, SetDescriptor};
use widomlab::verify::{random_family, run_campaign, summary_table, CampaignConfig, CampaignReport, DegreeRange, NamedSet, RandomFamily, Suite};
use widomlab::zeros::{svg_scatter, zeros_of, AnySolution};
use widomlab::Error;

#[derive(Parser)]
#[command(name = "widomlab", version, about = "Chebyshev polynomials and Widom factors of planar sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Solver tolerance (Remez: relative levelled error; complex: duality gap).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Boundary grid size for the complex solver.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Worker threads (WIDOMLAB_WORKERS takes precedence).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for generated set families.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for one degree and print the solution as JSON.
    Compute {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        degree: usize,
    },
    /// CSV of n, norm and Widom factor over a degree range.
    Sweep {
        #[arg(long)]
        set: PathBuf,
        /// Inclusive range such as 1..40.
        #[arg(long)]
        degrees: String,
    },
    /// Run a verification campaign; exit 0 iff every check passes.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Set description to include.
        #[arg(long)]
        set: Vec<PathBuf>,
        /// Campaign config (JSON or TOML).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        degrees: Option<String>,
        /// Add this many seeded random 2-3 interval sets.
        #[arg(long)]
        random: Option<usize>,
    },
    /// Zeros of the degree-n Chebyshev polynomial as CSV.
    Zeros {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        degree: usize,
        /// Also write an SVG scatter plot here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Summary table of JSON campaign reports.
    Report { files: Vec<PathBuf> },
}

/// Exit codes: 1 failed check, 2 bad input, 3 solver non-convergence.
fn code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NonConvergence { .. } | Error::ReferenceCollapse) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code_for(&e))
        }
    }
}

fn read_set(path: &Path) -> anyhow::Result<SetDescriptor> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(validate(&SetDescriptor::from_json(&text)?)?)
}

fn emit(out: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn install_pool(workers: Option<usize>) {
    let n = std::env::var("WIDOMLAB_WORKERS").ok().and_then(|v| v.parse().ok()).or(workers);
    if let Some(n) = n.filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Norm, Widom factor and full JSON record of one solve.
fn solve_one(set: &SetDescriptor, n: usize, cli: &Cli) -> Result<(f64, Option<f64>, serde_json::Value), Error> {
    if n == 0 {
        return Err(Error::InvalidInput("degree must be at least 1".into()));
    }
    if set.is_real() {
        let sol = RealSolver::new(set)?.solve(n, cli.tol.unwrap_or(widomlab::cheb_real::DEFAULT_TOL))?;
        let v = serde_json::to_value(&sol).expect("solution serializes");
        Ok((sol.norm, sol.widom_factor, v))
    } else {
        let grid = discretize(set, &DiscretizationConfig::with_points(cli.grid.unwrap_or(arc_grid_points(n).max(512))))?;
        let opts = ComplexOptions {
            tol: cli.tol.unwrap_or(widomlab::cheb_complex::DEFAULT_TOL),
            ..ComplexOptions::default()
        };
        let sol = chebyshev_complex(&grid, n, Weight::Unit, &opts)?;
        let w = sol
            .widom_factor
            .or_else(|| potential_for(set).ok().map(|p| (sol.norm.ln() - n as f64 * p.capacity.ln()).exp()));
        let mut v = serde_json::to_value(sol.record()).expect("record serializes");
        v["widom_factor"] = json!(w);
        Ok((sol.norm, w, v))
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    install_pool(cli.workers);
    match &cli.command {
        Command::Compute { set, degree } => {
            let desc = read_set(set)?;
            let (_, _, mut v) = solve_one(&desc, *degree, cli)?;
            if let Ok(pd) = potential_for(&desc) {
                v["potential"] = serde_json::to_value(pd.summary())?;
            }
            emit(cli.out.as_ref(), &format!("{}\n", serde_json::to_string_pretty(&v)?))?;
            Ok(0)
        }
        Command::Sweep { set, degrees } => {
            let desc = read_set(set)?;
            let range = DegreeRange::parse(degrees)?;
            if range.min == 0 || range.min > range.max {
                return Err(Error::InvalidInput(format!("degree range {degrees}")).into());
            }
            let rows: Vec<(usize, f64, Option<f64>)> = range
                .degrees()
                .par_iter()
                .map(|&n| solve_one(&desc, n, cli).map(|(norm, w, _)| (n, norm, w)))
                .collect::<Result<_, _>>()?;
            let mut s = String::from("n,norm,widom_factor\n");
            for (n, norm, w) in rows {
                s.push_str(&format!("{n},{norm:e},{}\n", w.map(|w| format!("{w:.15}")).unwrap_or_default()));
            }
            emit(cli.out.as_ref(), &s)?;
            Ok(0)
        }
        Command::Verify {
            suite,
            set,
            config,
            degrees,
            random,
        } => {
            let suite: Suite = suite.parse()?;
            let mut cfg = match config {
                Some(p) => CampaignConfig::load(p)?,
                None => CampaignConfig::default(),
            };
            for p in set {
                let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "set".into());
                cfg.sets.push(NamedSet { id, set: read_set(p)? });
            }
            if let Some(d) = degrees {
                cfg.degrees = DegreeRange::parse(d)?;
            }
            if let Some(count) = random {
                let fam = RandomFamily {
                    count: *count,
                    seed: cli.seed.unwrap_or(1),
                    ..RandomFamily::default()
                };
                // generated sets become explicit so the report records them
                cfg.sets.extend(random_family(&fam));
            } else if let (Some(seed), Some(f)) = (cli.seed, cfg.family.as_mut()) {
                f.seed = seed;
            }
            if let Some(t) = cli.tol {
                cfg.tolerances.remez = t;
            }
            if let Some(g) = cli.grid {
                cfg.grid_points = g;
            }
            if cli.workers.is_some() {
                cfg.workers = cli.workers;
            }
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir)?;
                cfg.output.csv = Some(dir.join("report.csv"));
                cfg.output.json = Some(dir.join("report.json"));
            }
            let report = run_campaign(&cfg, suite)?;
            report.write(&cfg.output)?;
            if cfg.output.csv.is_none() {
                print!("{}", report.to_csv());
            }
            eprint!("{}", summary_table(std::slice::from_ref(&report)));
            eprintln!("{} checks, {} failed, {} solver calls", report.results.len(), report.failed(), report.solver_calls);
            Ok(if report.nonconverged() {
                3
            } else if report.all_pass() {
                0
            } else {
                1
            })
        }
        Command::Zeros { set, degree, svg } => {
            let desc = read_set(set)?;
            if *degree == 0 {
                return Err(Error::InvalidInput("degree must be at least 1".into()).into());
            }
            let zm = if desc.is_real() {
                let sol = RealSolver::new(&desc)?.solve(*degree, cli.tol.unwrap_or(widomlab::cheb_real::DEFAULT_TOL))?;
                zeros_of(AnySolution::Real(&sol))?
            } else {
                let pts = cli.grid.unwrap_or(arc_grid_points(*degree).max(512));
                let grid = discretize(&desc, &DiscretizationConfig::with_points(pts))?;
                let opts = ComplexOptions {
                    tol: cli.tol.unwrap_or(widomlab::cheb_complex::DEFAULT_TOL),
                    ..ComplexOptions::default()
                };
                let sol = chebyshev_complex(&grid, *degree, Weight::Unit, &opts)?;
                zeros_of(AnySolution::Complex(&sol))?
            };
            emit(cli.out.as_ref(), &zm.to_csv())?;
            if let Some(p) = svg {
                let boundary = discretize(&desc, &DiscretizationConfig::with_points(1024))?.points;
                let title = format!("{} zeros, n = {}", desc.family(), degree);
                std::fs::write(p, svg_scatter(&boundary, &zm.zeros, &title)).with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(0)
        }
        Command::Report { files } => {
            if files.is_empty() {
                return Err(Error::InvalidInput("no report files given".into()).into());
            }
            let mut reports: Vec<CampaignReport> = Vec::new();
            for f in files {
                let text = std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
                reports.push(serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", f.display())))?);
            }
            let table = summary_table(&reports);
            emit(cli.out.as_ref(), &table)?;
            Ok(if reports.iter().all(|r| r.all_pass()) { 0 } else { 1 })
        }
    }
}
