//! Batch front end for the Steklov workbench: spectra, verification
//! batteries, catenoid family sweeps, and orbit nodal counts, with mesh
//! export on the side. Reports go to stdout or `--out`; exit codes are
//! 0 success, 1 configuration, 2 geometry/mesh, 3 solver, and 4 for a
//! verification run whose checks did not all pass.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use steklov::driver::{run_spectrum, run_sweep, run_verify, RunConfig, SweepConfig};
use steklov::io::{fundamental_domain_sidecar, write_obj, write_off};
use steklov::mesh::{fundamental_domain, GroupAction, TriangleMesh};
use steklov::nodal::{orbit_nodal_count, EndingEdge, OrbitPattern};
use steklov::{Error, Result, DEFAULT_NODAL_TAU, DEFAULT_TOL_EIGEN, DEFAULT_TOL_PARITY};

#[derive(Parser)]
#[command(
    name = "steklov",
    version,
    about = "Steklov spectra on free boundary minimal surfaces in the unit ball"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Steklov spectrum of a catalog surface and report
    /// eigenvalues, clusters, and free-boundary residuals.
    Spectrum(SpectrumArgs),
    /// Run the verification battery; exits 0 only if every check passes.
    Verify(VerifyArgs),
    /// Sweep the inscribed catenoid family in the half-height rho.
    Sweep(SweepArgs),
    /// Nodal domain count of the reflected orbit of a fundamental-domain
    /// nodal line, by the arc it ends on.
    OrbitCount(OrbitCountArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshFormat {
    Off,
    Obj,
}

/// Surface/solver options shared by `spectrum` and `verify`.
#[derive(Args)]
struct SolveArgs {
    /// Catalog surface: critical-catenoid, catenoid:RHO, unit-disk,
    /// flat-annulus:INNER.
    #[arg(long, default_value = "critical-catenoid")]
    surface: String,
    /// Parameter grid, radial x angular, e.g. 40x160.
    #[arg(long, value_parser = parse_resolution, default_value = "20x80")]
    res: (usize, usize),
    /// Number of eigenvalues (rounded up to whole multiplets).
    #[arg(long, default_value_t = 8)]
    modes: usize,
    /// Relative gap merging eigenvalues into one cluster.
    #[arg(long, default_value_t = DEFAULT_TOL_EIGEN)]
    tol_eigen: f64,
    /// Relative impurity below which a mode counts as parity-pure.
    #[arg(long, default_value_t = DEFAULT_TOL_PARITY)]
    tol_parity: f64,
    /// Cutoff for nodal sign classification, relative to the max |u|.
    #[arg(long, default_value_t = DEFAULT_NODAL_TAU)]
    nodal_tau: f64,
}

impl SolveArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            surface: self.surface.clone(),
            resolution: self.res,
            num_modes: self.modes,
            tol_eigen: self.tol_eigen,
            tol_parity: self.tol_parity,
            nodal_tau: self.nodal_tau,
        }
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write the mesh, its fundamental domain, and the arc-label
    /// sidecar in the given mesh format.
    #[arg(long, value_enum)]
    export_mesh: Option<MeshFormat>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format; default is a plain-text check list.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 0.6)]
    rho_min: f64,
    #[arg(long, default_value_t = 1.8)]
    rho_max: f64,
    #[arg(long, default_value_t = 13)]
    steps: usize,
    /// Parameter grid for every family member.
    #[arg(long, value_parser = parse_resolution, default_value = "12x48")]
    res: (usize, usize),
    #[arg(long, default_value_t = 5)]
    modes: usize,
    #[arg(long, default_value_t = DEFAULT_TOL_EIGEN)]
    tol_eigen: f64,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct OrbitCountArgs {
    /// Arc the nodal line ends on: gamma, e1, e2, or e3.
    edge: String,
}

fn parse_resolution(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("expected WxH with positive integers, got {s:?}"))
    };
    Ok((parse(w)?, parse(h)?))
}

/// Write a report to `--out` or stdout, always newline-terminated.
fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    let terminated = if text.ends_with('\n') {
        text.to_string()
    } else {
        format!("{text}\n")
    };
    match out {
        Some(path) => std::fs::write(path, terminated)?,
        None => std::io::stdout().write_all(terminated.as_bytes())?,
    }
    Ok(())
}

/// File stem for mesh export: the report stem if `--out` was given, the
/// mesh name (with path-unfriendly colons dashed) otherwise.
fn export_stem(out: &Option<PathBuf>, mesh_name: &str) -> String {
    match out {
        Some(path) => path.with_extension("").to_string_lossy().into_owned(),
        None => mesh_name.replace(':', "-"),
    }
}

fn export_mesh(
    mesh: &TriangleMesh,
    action: &GroupAction,
    format: MeshFormat,
    stem: &str,
) -> Result<()> {
    let (ext, write): (&str, fn(&TriangleMesh) -> String) = match format {
        MeshFormat::Off => ("off", write_off),
        MeshFormat::Obj => ("obj", write_obj),
    };
    let fd = fundamental_domain(mesh, action)?;
    std::fs::write(format!("{stem}.{ext}"), write(mesh))?;
    std::fs::write(format!("{stem}.fd.{ext}"), write(&fd.submesh))?;
    std::fs::write(format!("{stem}.fd.json"), fundamental_domain_sidecar(&fd))?;
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Spectrum(args) => {
            let run = run_spectrum(&args.solve.config())?;
            let text = match args.format {
                Format::Json => run.report.to_json(),
                Format::Csv => run.report.to_csv(),
            };
            emit(&args.out, &text)?;
            if let Some(format) = args.export_mesh {
                let stem = export_stem(&args.out, &run.mesh.name);
                export_mesh(&run.mesh, &run.action, format, &stem)?;
            }
            Ok(0)
        }
        Command::Verify(args) => {
            let report = run_verify(&args.solve.config())?;
            let text = match args.format {
                None => report.to_text(),
                Some(Format::Json) => report.to_json(),
                Some(Format::Csv) => {
                    return Err(Error::Config(
                        "verify reports have no CSV form; use --format json or omit it".into(),
                    ))
                }
            };
            emit(&args.out, &text)?;
            Ok(if report.passed() { 0 } else { 4 })
        }
        Command::Sweep(args) => {
            let table = run_sweep(&SweepConfig {
                rho_min: args.rho_min,
                rho_max: args.rho_max,
                steps: args.steps,
                resolution: args.res,
                num_modes: args.modes,
                tol_eigen: args.tol_eigen,
            })?;
            let text = match args.format {
                Format::Json => table.to_json(),
                Format::Csv => table.to_csv(),
            };
            emit(&args.out, &text)
                .map(|_| 0)
        }
        Command::OrbitCount(args) => {
            let edge = EndingEdge::parse(&args.edge)?;
            let count = orbit_nodal_count(&OrbitPattern::new(edge))?;
            println!("{count}");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Keep clap's rendering but remap its usage-error exit status
            // (2) onto the configuration class (1); 2 is reserved for
            // geometry failures.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.category())
        }
    }
}
