use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use formation_core::equilibria::grid_seeds;
use formation_core::export::{fmt_sig, write_basin, write_trajectory};
use formation_core::scenario::{IntegratorOverrides, MethodName};
use formation_core::*;

/// Signed-area formation control: analysis, simulation and basin sampling.
///
/// Exit status: 0 on success, 1 when a formation is invalid or a run does not
/// reach its target, 2 on usage, parse or I/O errors.
#[derive(Parser)]
#[command(name = "formation", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file's formation specification.
    Validate { scenario: PathBuf },
    /// Gain thresholds and equilibria of one follower with two pinned leaders.
    Analyze(AnalyzeArgs),
    /// Integrate a scenario file and report convergence.
    Simulate(SimulateArgs),
    /// Sample the follower's basins of attraction on a grid.
    Basin(BasinArgs),
}

#[derive(Args)]
struct Canonical {
    /// Horizontal offset of the target `[a, b]`.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    a: f64,
    /// Height of the target above the leaders.
    #[arg(long)]
    b: f64,
    /// Half the distance between the leaders, which sit at `[-c, 0]` and `[c, 0]`.
    #[arg(long)]
    c: f64,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    canonical: Canonical,
    /// Area gain.
    #[arg(long = "K")]
    gain: Option<f64>,
    /// Newton seeds per axis for the numeric search (a != 0).
    #[arg(long, default_value_t = 41)]
    seeds: usize,
}

#[derive(Args)]
struct IntegratorFlags {
    /// Integration method.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// RK4 step.
    #[arg(long)]
    step: Option<f64>,
    /// RK45 absolute tolerance.
    #[arg(long)]
    abs_tol: Option<f64>,
    /// RK45 relative tolerance.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Integration time limit.
    #[arg(long)]
    t_max: Option<f64>,
    /// Stop once the stacked velocity norm falls below this.
    #[arg(long)]
    gradient_stop: Option<f64>,
    /// Keep every n-th step in the trajectory.
    #[arg(long)]
    sample_stride: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Rk4,
    Rk45,
}

impl IntegratorFlags {
    fn overrides(&self) -> IntegratorOverrides {
        IntegratorOverrides {
            method: self.method.map(|m| match m {
                MethodArg::Rk4 => MethodName::Rk4,
                MethodArg::Rk45 => MethodName::Rk45,
            }),
            step: self.step,
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            t_max: self.t_max,
            gradient_stop: self.gradient_stop,
            sample_stride: self.sample_stride,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    scenario: PathBuf,
    /// Trajectory CSV destination.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Residual tolerance for the target-set check.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[command(flatten)]
    integrator: IntegratorFlags,
}

#[derive(Args)]
struct BasinArgs {
    #[command(flatten)]
    canonical: Canonical,
    /// Area gain.
    #[arg(long = "K")]
    gain: f64,
    /// Sampling rectangle.
    #[arg(long, num_args = 4, value_names = ["XMIN", "XMAX", "YMIN", "YMAX"], allow_negative_numbers = true, default_values_t = [-10.0, 10.0, -10.0, 10.0])]
    grid: Vec<f64>,
    /// Nodes per axis.
    #[arg(long, default_value_t = 21)]
    res: usize,
    /// Basin CSV destination.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    integrator: IntegratorFlags,
}

enum Failure {
    /// Exit 1.
    Negative,
    /// Exit 2.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { scenario } => validate(&scenario),
        Command::Analyze(args) => analyze(&args),
        Command::Simulate(args) => simulate(&args),
        Command::Basin(args) => basin(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> Result<ScenarioFile, Failure> {
    ScenarioFile::load(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn validate(path: &Path) -> Outcome {
    let file = load(path)?;
    let report = validate_spec(&file.formation_spec());
    print!("{report}");
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure::Negative)
    }
}

fn params(c: &Canonical, gain: f64) -> Result<CanonicalTriangleParams, Failure> {
    CanonicalTriangleParams::new(c.a, c.b, c.c, gain).map_err(Failure::from)
}

fn analyze(args: &AnalyzeArgs) -> Outcome {
    let Canonical { a, b, c } = args.canonical;
    // Validates b and c even when no gain is given.
    params(&args.canonical, args.gain.unwrap_or(1.0))?;
    if a == 0.0 {
        if let Some(k) = args.gain {
            print!("{}", case_table(&params(&args.canonical, k)?)?);
            return Ok(());
        }
        println!("K_* = {}", fmt_sig(k_star(b, c)));
        match k_zero(b, c) {
            Some(k0) => println!("K_0 = {}", fmt_sig(k0)),
            None => println!("K_0 = absent (b^2/c^2 < 2)"),
        }
    }

    println!("large-K equilibria (y = b):");
    for r in enumerate_general_large_k(a, b, c)? {
        println!(
            "  {:<7} [{}, {}]  H11 {}  {}",
            r.label.to_string(),
            fmt_sig(r.position.x),
            fmt_sig(r.position.y),
            fmt_sig(r.eigenvalues[0]),
            r.stability
        );
    }
    let ratio = a * a / (c * c);
    let verdict = if (ratio - 8.0).abs() <= 1e-12 * 8.0 {
        "= 8: boundary, the extra equilibrium is a Degenerate double root"
    } else if ratio > 8.0 {
        "> 8: incorrect stable equilibrium exists at large K"
    } else {
        "< 8: unique stable equilibrium at large K"
    };
    println!("a^2/c^2 = {} {verdict}", fmt_sig(ratio));

    if let Some(k) = args.gain {
        let p = params(&args.canonical, k)?;
        if args.seeds == 0 {
            return Err(Failure::Usage("--seeds must be at least 1".into()));
        }
        let l = 2.0 * p.length_scale();
        let found = refine_numeric(&p, &grid_seeds((-l, l), (-l, l), args.seeds));
        println!(
            "equilibria at K = {} (Newton, {} seeds): {}",
            fmt_sig(k),
            args.seeds * args.seeds,
            found.roots.len()
        );
        for r in &found.roots {
            println!(
                "  [{}, {}]  eigenvalues ({}, {})  {}",
                fmt_sig(r.position.x),
                fmt_sig(r.position.y),
                fmt_sig(r.eigenvalues[0]),
                fmt_sig(r.eigenvalues[1]),
                r.stability
            );
        }
        if !found.failures.is_empty() {
            println!("  ({} seeds did not converge)", found.failures.len());
        }
    }
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Outcome {
    let file = load(&args.scenario)?;
    let spec = file.formation_spec();
    let report = validate_spec(&spec);
    if !report.is_valid() {
        return Err(Failure::Usage(format!(
            "{}: {report}",
            args.scenario.display()
        )));
    }
    let state0 = file.initial_state().ok_or_else(|| {
        Failure::Usage(format!("{}: no initial positions", args.scenario.display()))
    })?;
    let root = file
        .root_edge()
        .ok_or_else(|| Failure::Usage("scenario has no edges".into()))?;
    let assignment = extract_layers(&spec, root)?;
    let cfg = args
        .integrator
        .overrides()
        .apply(file.integrator_config()?)?;
    if !(args.tol > 0.0) {
        return Err(Failure::Usage("--tol must be positive".into()));
    }

    let traj = integrate_hierarchy(&spec, &assignment, &state0, &cfg)?;
    if let Some(path) = &args.output {
        let mut out = create(path)?;
        write_trajectory(&traj, &mut out)?;
        out.flush()?;
    }
    let layers = assignment.layers();
    let layer_text: Vec<String> = layers
        .iter()
        .map(|(l, agents)| format!("{l}: {agents:?}"))
        .collect();
    println!("layers: {}", layer_text.join(", "));
    println!(
        "stopped: {} at t = {} after {} samples",
        traj.terminal_reason,
        fmt_sig(traj.final_time()),
        traj.times.len()
    );
    let report = convergence_report(&traj, &spec, &assignment, args.tol)?;
    print!("{report}");
    if report.converged() {
        Ok(())
    } else {
        Err(Failure::Negative)
    }
}

fn basin(args: &BasinArgs) -> Outcome {
    let p = params(&args.canonical, args.gain)?;
    let [x0, x1, y0, y1] = <[f64; 4]>::try_from(args.grid.as_slice())
        .map_err(|_| Failure::Usage("--grid takes four values".into()))?;
    if !(x0 <= x1 && y0 <= y1) || args.grid.iter().any(|v| !v.is_finite()) {
        return Err(Failure::Usage(
            "--grid needs XMIN <= XMAX and YMIN <= YMAX".into(),
        ));
    }
    if args.res == 0 {
        return Err(Failure::Usage("--res must be at least 1".into()));
    }
    let cfg = args
        .integrator
        .overrides()
        .apply(IntegratorConfig::default())?;

    let equilibria = if p.a == 0.0 {
        enumerate_isosceles(&p)?
    } else {
        let l = 2.0 * p.length_scale();
        let (sx, sy) = ((x0.min(-l), x1.max(l)), (y0.min(-l), y1.max(l)));
        refine_numeric(&p, &grid_seeds(sx, sy, 41)).roots
    };
    let grid = GridSpec {
        x_range: (x0, x1),
        y_range: (y0, y1),
        resolution: args.res,
    };
    let map = basin_sample(&p, &grid, &cfg, &equilibria)?;
    if let Some(path) = &args.output {
        let mut out = create(path)?;
        write_basin(&map, &mut out)?;
        out.flush()?;
    }

    println!("nodes: {}", map.nodes.len());
    for (label, count) in map.counts() {
        let detail = match label {
            BasinLabel::Equilibrium(i) => {
                let r = &map.equilibria[i];
                format!(
                    " [{}, {}] {}",
                    fmt_sig(r.position.x),
                    fmt_sig(r.position.y),
                    r.stability
                )
            }
            _ => String::new(),
        };
        println!("{}{detail}: {count}", map.label_name(label));
    }
    Ok(())
}
