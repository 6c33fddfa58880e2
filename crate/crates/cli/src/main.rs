use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rsf_core::fields::Interpolation;
use rsf_core::fields::{gradient_tensor, io as field_io, VectorField};
use rsf_core::render::{default_levels, horizontal_slice, write_ppm};
use rsf_core::rsf::{
    canonical_antisymmetric, check_rsf, decomposition_plan, sym_antisym_split, zero_pattern,
    DecompPlan,
};
use rsf_core::solver::{simulate_to_dir, SolverConfig};
use rsf_core::verify::{
    convergence_study, identity_suite, study_histories, IdentityOptions, StudyOptions,
    VelocityHistory, VerificationReport,
};
use rsf_core::{Error, Result};

/// Real-Schur-flow vorticity decomposition: plans, simulation and
/// frozen-in verification.
#[derive(Parser)]
#[command(name = "rsf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the pairing of velocity components into frozen-in components.
    Plan {
        #[arg(long)]
        d: usize,
        /// 1-based axis permutation to pair instead of 1..d, e.g. 3,1,2.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
        #[arg(long)]
        json: bool,
    },
    /// Largest violation of the RSF zero pattern in a snapshot.
    CheckRsf {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Run the barotropic solver and write snapshots and diagnostics.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pull back vorticity components along the flow and check convergence.
    VerifyFrozen(VerifyFrozen),
    /// Exterior-calculus identities on analytic fields.
    VerifyIdentities {
        #[arg(long, value_delimiter = ',', default_values_t = [3usize, 4, 5, 6, 7, 8])]
        d: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Include the extension-hypothesis violation; the suite must fail.
        #[arg(long)]
        inject_violation: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Rotation rates and planes of an antisymmetric matrix, given directly
    /// or as the vorticity tensor of a snapshot at one node.
    Canonical {
        /// Row-major entries of a square matrix.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            conflicts_with = "snapshot"
        )]
        matrix: Option<Vec<f64>>,
        #[arg(long, requires = "node")]
        snapshot: Option<PathBuf>,
        /// 0-based grid index, one entry per axis.
        #[arg(long, value_delimiter = ',')]
        node: Option<Vec<usize>>,
        #[arg(long)]
        json: bool,
    },
    /// Banded PPM image of one horizontal slice of a snapshot.
    SliceImage {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, value_enum)]
        component: Component,
        #[arg(long)]
        axis3: usize,
        #[arg(long)]
        out: PathBuf,
        /// Band thresholds; defaults to ±0.2 and ±0.6 of the largest value.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        levels: Option<Vec<f64>>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Component {
    U1,
    U2,
    U3,
    Rho,
}

#[derive(Args)]
struct VerifyFrozen {
    /// A run directory, or with --resolutions a directory holding `n<N>`
    /// run directories.
    #[arg(long, required_unless_present = "scenario")]
    snapshots: Option<PathBuf>,
    /// Solver config rerun in memory at every resolution instead of reading
    /// snapshots; the config's dims are replaced by N³.
    #[arg(long, conflicts_with = "snapshots")]
    scenario: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    resolutions: Option<Vec<usize>>,
    /// JSON report; a CSV with the same stem is written next to it.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 3.0)]
    min_order: f64,
    #[arg(long, default_value_t = 0.5)]
    order_tolerance: f64,
    #[arg(long, default_value_t = 1e-4)]
    max_abs_error: f64,
    #[arg(long, default_value_t = 1e3)]
    min_control_ratio: f64,
    #[arg(long, default_value_t = 1e-12)]
    linearity_tol: f64,
    #[arg(long, default_value_t = 32)]
    particles: usize,
    #[arg(long, default_value_t = 4)]
    substep_divisor: usize,
    /// Skip the wrong-velocity control run.
    #[arg(long)]
    no_control: bool,
    /// First-order nearest-node interpolation, a degraded control.
    #[arg(long)]
    nearest: bool,
}

/// Pass/fail of the thresholds a command checks.
enum Verdict {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn verdict(pass: bool) -> Verdict {
    if pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn dispatch(command: Command) -> Result<Verdict> {
    match command {
        Command::Plan { d, order, json } => plan(d, order, json),
        Command::CheckRsf { snapshot, tol } => {
            let (field, _) = field_io::read(&snapshot)?;
            let u = velocity_of(field)?;
            let violation = check_rsf(&u, &zero_pattern(u.grid().dim()))?;
            println!("max |pattern entry| = {violation:.3e} (tol {tol:e})");
            Ok(verdict(violation <= tol))
        }
        Command::Simulate { config, out } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::io(&config, e))?;
            let config = SolverConfig::parse(&text)?;
            let summary = simulate_to_dir(&config, &out)?;
            let last = summary.diagnostics.last().expect("initial diagnostics");
            println!(
                "{} steps of dt = {:.4e}, {} snapshots in {}; mass {:.12e}, energy {:.6e}",
                summary.steps,
                summary.dt,
                summary.snapshots,
                out.display(),
                last.mass,
                last.energy
            );
            Ok(Verdict::Pass)
        }
        Command::VerifyFrozen(args) => verify_frozen(args),
        Command::VerifyIdentities {
            d,
            seeds,
            tol,
            inject_violation,
            report,
        } => {
            let r = identity_suite(&IdentityOptions {
                dims: d,
                seeds,
                tol,
                inject_violation,
            })?;
            for (name, worst) in &r.worst {
                let mark = if *worst <= tol { "ok" } else { "FAIL" };
                println!("{name:<22} {worst:.3e}  {mark}");
            }
            if let Some(path) = report {
                let text = serde_json::to_string_pretty(&r)?;
                std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            }
            Ok(verdict(r.passed))
        }
        Command::Canonical {
            matrix,
            snapshot,
            node,
            json,
        } => canonical(matrix, snapshot, node, json),
        Command::SliceImage {
            snapshot,
            component,
            axis3,
            out,
            levels,
        } => {
            let (field, _) = field_io::read(&snapshot)?;
            let index = component as usize;
            if field.ncomp() <= index || field.grid().dim() != 3 {
                return Err(Error::Format(format!(
                    "{} is not a 3D snapshot",
                    snapshot.display()
                )));
            }
            let f = field.component(index);
            let levels = levels.unwrap_or_else(|| default_levels(f));
            write_ppm(&out, &horizontal_slice(f, axis3)?, &levels)?;
            Ok(Verdict::Pass)
        }
    }
}

fn plan(d: usize, order: Option<Vec<usize>>, json: bool) -> Result<Verdict> {
    let plan: DecompPlan = match order {
        Some(order) if order.len() != d => {
            return Err(Error::InvalidTuple(format!(
                "--order has {} axes for d = {d}",
                order.len()
            )))
        }
        Some(order) => DecompPlan::with_order(&order)?,
        None => decomposition_plan(d)?,
    };
    if json {
        println!("{}", serde_json::to_string(&plan)?);
    } else {
        println!("{plan}");
    }
    Ok(Verdict::Pass)
}

/// The first `d` components of a snapshot on a `d`-dimensional grid.
fn velocity_of(field: VectorField) -> Result<VectorField> {
    let d = field.grid().dim();
    if field.ncomp() < d {
        return Err(Error::Format(format!(
            "{} components on a {d}D grid",
            field.ncomp()
        )));
    }
    let mut comps = field.into_components();
    comps.truncate(d);
    VectorField::new(comps)
}

fn canonical(
    matrix: Option<Vec<f64>>,
    snapshot: Option<PathBuf>,
    node: Option<Vec<usize>>,
    json: bool,
) -> Result<Verdict> {
    let (a, d) = match (matrix, snapshot) {
        (Some(m), _) => {
            let d = (m.len() as f64).sqrt().round() as usize;
            if d * d != m.len() {
                return Err(Error::NotSquare {
                    rows: m.len(),
                    cols: 1,
                });
            }
            (m, d)
        }
        (None, Some(path)) => {
            let u = velocity_of(field_io::read(&path)?.0)?;
            let grid = u.grid().clone();
            let node = node.unwrap_or_default();
            if node.len() != grid.dim() || node.iter().zip(grid.dims()).any(|(i, n)| i >= n) {
                return Err(Error::InvalidGrid(format!(
                    "node {node:?} outside grid {:?}",
                    grid.dims()
                )));
            }
            let (_, antisym) = sym_antisym_split(&gradient_tensor(&u)?)?;
            (antisym.matrix_at(grid.flat_index(&node)), grid.dim())
        }
        (None, None) => {
            return Err(Error::Config(
                "give --matrix or --snapshot with --node".into(),
            ))
        }
    };
    let c = canonical_antisymmetric(&a, d)?;
    if json {
        println!("{}", serde_json::to_string(&c)?);
    } else {
        let rates: Vec<String> = c.rates.iter().map(|r| format!("{r:.6e}")).collect();
        println!("rates: {}", rates.join(" "));
        let fmt = |v: Vec<f64>| {
            v.iter()
                .map(|x| format!("{x:+.6}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        for (i, &(a, b)) in c.planes.iter().enumerate() {
            println!(
                "plane {}: [{}] ^ [{}]",
                i + 1,
                fmt(c.column(a)),
                fmt(c.column(b))
            );
        }
    }
    Ok(Verdict::Pass)
}

fn study_options(args: &VerifyFrozen) -> StudyOptions {
    StudyOptions {
        substep_divisor: args.substep_divisor,
        particles: args.particles,
        scheme: if args.nearest {
            Interpolation::Nearest
        } else {
            Interpolation::Lagrange4
        },
        negative_offset: if args.no_control {
            None
        } else {
            StudyOptions::default().negative_offset
        },
        min_order: args.min_order,
        order_tolerance: args.order_tolerance,
        max_abs_error: args.max_abs_error,
        min_control_ratio: args.min_control_ratio,
        linearity_tol: args.linearity_tol,
    }
}

fn verify_frozen(args: VerifyFrozen) -> Result<Verdict> {
    let options = study_options(&args);
    let report = match (&args.snapshots, &args.scenario) {
        (_, Some(config)) => {
            let text = std::fs::read_to_string(config).map_err(|e| Error::io(config, e))?;
            let config = SolverConfig::parse(&text)?;
            let resolutions = args
                .resolutions
                .clone()
                .unwrap_or_else(|| vec![32, 64, 128]);
            convergence_study(&config, &resolutions, &options)?
        }
        (Some(dir), None) => match &args.resolutions {
            Some(resolutions) => study_histories(
                "snapshots",
                resolutions,
                |n| VelocityHistory::from_dir(&dir.join(format!("n{n}"))),
                &options,
            )?,
            None => {
                let history = VelocityHistory::from_dir(dir)?;
                let n = history.grid().dims()[0];
                study_histories("snapshots", &[n], |_| Ok(history.clone()), &options)?
            }
        },
        (None, None) => unreachable!("clap requires one source"),
    };
    print_report(&report);
    if let Some(path) = &args.report {
        report.write_json(path)?;
        report.write_csv(&csv_path(path))?;
    }
    Ok(verdict(report.passed))
}

fn csv_path(report: &Path) -> PathBuf {
    report.with_extension("csv")
}

fn print_report(report: &VerificationReport) {
    println!("{} ({})", report.scenario, report.plan);
    for c in &report.components {
        for (r, e) in report.resolutions.iter().zip(&c.pullback) {
            println!(
                "  component {} N={:<4} L2 rel {:.3e}  Linf rel {:.3e}",
                c.component, r.n, e.l2_rel, e.linf_rel
            );
        }
        if let Some(order) = c.order_l2.and_then(|f| f.order()) {
            println!("  component {} observed order {order:.2}", c.component);
        }
    }
    for c in &report.criteria {
        let mark = if c.passed { "ok" } else { "FAIL" };
        println!(
            "{:<26} {:>12.4e} (threshold {:e})  {mark}",
            c.name, c.value, c.threshold
        );
    }
}
