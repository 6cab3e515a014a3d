use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use secstab_core::equilibrium::SolverSettings;
use secstab_core::sweep::{
    evaluate_cell, run_sweep, with_pool, write_resonance_csv, Axis, Cell, CellStatus, GridSpec,
};
use secstab_core::validate::{run_validation, Fault, ValidationOptions};

mod config;

use config::{Config, ConfigError, Ratio};

/// Parameter tolerance of traced resonance points.
const RESONANCE_PARAM_TOL: f64 = 1e-4;

#[derive(Parser, Debug)]
#[command(
    name = "secstab",
    version,
    about = "Stability of aligned secular equilibria in the (a, e_J) plane"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Equilibrium, spatial verdict and frequencies at one (a, e_J).
    Point {
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        ej: Option<f64>,
        /// Print the JSON record instead of the table.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep a rectangular (a, e_J) grid and write sweep.csv and sweep.json.
    Sweep {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Run the oracle checks at random non-crossing configurations.
    Validate {
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Corrupt an intermediate result to exercise the failure path.
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep a grid and trace the curve where omega_z / omega_plane = k.
    Resonance {
        #[command(flatten)]
        grid: GridArgs,
        /// Target ratio, e.g. 2 or 1/2.
        #[arg(long)]
        k: Option<Ratio>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Flat key = value file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mu: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Largest node count per axis and period.
    #[arg(long)]
    max_nodes: Option<usize>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// MIN:MAX:N
    #[arg(long)]
    a_range: Option<Axis>,
    /// MIN:MAX:N
    #[arg(long)]
    ej_range: Option<Axis>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FaultArg {
    AbarSign,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }

    fn numerical(message: impl ToString) -> Self {
        Self {
            code: 3,
            message: message.to_string(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::input(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::numerical(format!("i/o error: {e}"))
    }
}

struct Resolved {
    cfg: Config,
    settings: SolverSettings,
    mu: f64,
    jobs: usize,
    out: Option<PathBuf>,
}

fn resolve(common: &Common) -> Result<Resolved, Failure> {
    let cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let mut settings = SolverSettings::default();
    settings.quad.tol = cfg.resolve(common.tol, "tol", settings.quad.tol)?;
    settings.quad.max_n = cfg.resolve(common.max_nodes, "max-nodes", settings.quad.max_n)?;
    settings.validate().map_err(Failure::input)?;
    let mu = cfg.resolve(common.mu, "mu", 0.0)?;
    let default_jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let jobs = cfg.resolve(common.jobs, "jobs", default_jobs)?;
    if jobs == 0 {
        return Err(Failure::input("--jobs must be at least 1"));
    }
    let out = match common.out.clone() {
        Some(p) => Some(p),
        None => cfg.get::<PathBuf>("out")?,
    };
    Ok(Resolved {
        cfg,
        settings,
        mu,
        jobs,
        out,
    })
}

fn grid_spec(r: &Resolved, grid: &GridArgs) -> Result<GridSpec, Failure> {
    let a = r.cfg.resolve_required(grid.a_range, "a-range")?;
    let e_j = r.cfg.resolve_required(grid.ej_range, "ej-range")?;
    let spec = GridSpec { a, e_j, mu: r.mu };
    spec.validate().map_err(Failure::input)?;
    Ok(spec)
}

fn out_dir(r: &Resolved) -> Result<PathBuf, Failure> {
    let dir = r.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(Failure::numerical)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn cmd_point(a: Option<f64>, ej: Option<f64>, json: bool, common: &Common) -> Result<(), Failure> {
    let r = resolve(common)?;
    let a = r.cfg.resolve_required(a, "a")?;
    let e_j = r.cfg.resolve_required(ej, "ej")?;
    secstab_core::kepler::OrbitConfig::new(a, e_j, r.mu).map_err(Failure::input)?;
    let cell =
        with_pool(r.jobs, || evaluate_cell(a, e_j, r.mu, &r.settings)).map_err(Failure::input)?;
    let record = serde_json::json!({ "mu": r.mu, "settings": r.settings, "cell": cell });
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&record).map_err(Failure::numerical)?
        );
    } else {
        print!("{}", point_table(&cell, r.mu));
    }
    if r.out.is_some() {
        write_json(&out_dir(&r)?.join("point.json"), &record)?;
    }
    match cell.status {
        CellStatus::Found | CellStatus::MultipleRoots | CellStatus::Unstable => Ok(()),
        CellStatus::OrbitCrossing => Err(Failure {
            code: 4,
            message: format!(
                "orbits cross: {}",
                cell.detail
                    .as_deref()
                    .unwrap_or("every aligned configuration intersects the planet's orbit")
            ),
        }),
        status => Err(Failure::numerical(format!(
            "no certified equilibrium: {}{}",
            status.as_str(),
            cell.detail.map(|d| format!(" ({d})")).unwrap_or_default()
        ))),
    }
}

fn point_table(cell: &Cell, mu: f64) -> String {
    let mut s = String::new();
    let mut row = |k: &str, v: String| s.push_str(&format!("{k:<16} {v}\n"));
    row("a", format!("{}", cell.a));
    row("e_J", format!("{}", cell.e_j));
    row("mu", format!("{mu}"));
    row("status", cell.status.as_str().to_string());
    if !cell.roots.is_empty() {
        row(
            "roots",
            cell.roots
                .iter()
                .map(|e| format!("{e:.12}"))
                .collect::<Vec<_>>()
                .join(" "),
        );
    }
    if let Some(r) = &cell.record {
        row("e_star", format!("{:.15}", r.e_star));
        row("Rbar", format!("{:.15e}  (err {:.1e})", r.rbar, r.err.r));
        row("Abar", format!("{:.15e}  (err {:.1e})", r.abar, r.err.a));
        row("Bbar", format!("{:.3e}  (err {:.1e})", r.bbar, r.err.b));
        row("Cbar", format!("{:.15e}  (err {:.1e})", r.cbar, r.err.c));
        row(
            "hessian",
            format!(
                "pp {:.12e}  qq {:.12e}  pq {:.3e}",
                r.hessian.pp, r.hessian.qq, r.hessian.pq
            ),
        );
        row("planar", format!("{:?}", r.planar));
        row("spatial", format!("{:?}", r.spatial_verdict));
        if let Some(f) = r.frequencies {
            row("omega_plane/mu", format!("{:.15e}", f.omega_plane));
            row("omega_z/mu", format!("{:.15e}", f.omega_z));
            row("ratio", format!("{:.15}", f.ratio));
        }
    }
    if let Some(d) = &cell.detail {
        row("detail", d.clone());
    }
    s
}

fn cmd_sweep(grid: &GridArgs, common: &Common) -> Result<(), Failure> {
    let r = resolve(common)?;
    let spec = grid_spec(&r, grid)?;
    let dir = out_dir(&r)?;
    let sweep = run_sweep(&spec, &r.settings, r.jobs).map_err(Failure::input)?;
    let mut w = BufWriter::new(fs::File::create(dir.join("sweep.csv"))?);
    sweep.write_csv(&mut w)?;
    w.flush()?;
    write_json(&dir.join("sweep.json"), &sweep.metadata_json())?;
    let counts = sweep.metadata_json()["status_counts"].to_string();
    println!(
        "{} cells in {:.1} s: {counts}",
        sweep.cells.len(),
        sweep.metadata.wall_time_s
    );
    println!("wrote {}", dir.join("sweep.csv").display());
    Ok(())
}

fn cmd_validate(
    points: Option<usize>,
    seed: Option<u64>,
    fault: Option<FaultArg>,
    common: &Common,
) -> Result<(), Failure> {
    let r = resolve(common)?;
    let points = r.cfg.resolve(points, "points", 20)?;
    if points == 0 {
        return Err(Failure::input(
            "--points must be at least 1; an empty validation proves nothing",
        ));
    }
    let opts = ValidationOptions {
        points,
        seed: r.cfg.resolve(seed, "seed", 1)?,
        settings: r.settings,
        fault: fault.map(|FaultArg::AbarSign| Fault::FlipAbar),
    };
    let report = with_pool(r.jobs, || run_validation(&opts))
        .map_err(Failure::input)?
        .map_err(Failure::input)?;
    print!("{}", report.to_text());
    if r.out.is_some() {
        let value = serde_json::to_value(&report).map_err(Failure::numerical)?;
        write_json(&out_dir(&r)?.join("validation.json"), &value)?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure {
            code: 1,
            message: format!("failing checks: {}", report.failing_checks().join(", ")),
        })
    }
}

fn cmd_resonance(grid: &GridArgs, k: Option<Ratio>, common: &Common) -> Result<(), Failure> {
    let r = resolve(common)?;
    let spec = grid_spec(&r, grid)?;
    let k = r.cfg.resolve(k, "k", Ratio(2.0))?.0;
    let dir = out_dir(&r)?;
    let sweep = run_sweep(&spec, &r.settings, r.jobs).map_err(Failure::input)?;
    let points =
        with_pool(r.jobs, || sweep.resonance(k, RESONANCE_PARAM_TOL)).map_err(Failure::input)?;
    let mut w = BufWriter::new(fs::File::create(dir.join("resonance.csv"))?);
    write_resonance_csv(&points, &mut w)?;
    w.flush()?;
    let meta = serde_json::json!({
        "k": k,
        "param_tol": RESONANCE_PARAM_TOL,
        "points": points.len(),
        "sweep": sweep.metadata_json(),
    });
    write_json(&dir.join("resonance.json"), &meta)?;
    println!("{} resonance points for k = {k}", points.len());
    println!("wrote {}", dir.join("resonance.csv").display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Point {
            a,
            ej,
            json,
            common,
        } => cmd_point(*a, *ej, *json, common),
        Command::Sweep { grid, common } => cmd_sweep(grid, common),
        Command::Validate {
            points,
            seed,
            inject_fault,
            common,
        } => cmd_validate(*points, *seed, *inject_fault, common),
        Command::Resonance { grid, k, common } => cmd_resonance(grid, *k, common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
