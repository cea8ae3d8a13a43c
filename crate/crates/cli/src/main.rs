//! Command-line harness: single runs, continuation and refinement studies,
//! sharp-versus-diffuse comparison, and the invariant check.
//!
//! Exit codes: 0 success, 1 invariant violation or runtime failure, 2 bad
//! configuration.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use configforce::diagnostics::{viscosity_check, ViscositySamplerConfig};
use configforce::evolution::{run, NullSink, RunConfig};
use configforce::study::{grid_study, kappa_study, sharp_compare};
use configforce::Grid1D;

use config::Resolved;
use output::{write_text, DirSink, Summary};

#[derive(Parser)]
#[command(name = "configforce", version, about = "1D simulator for martensitic phase transitions driven by configurational forces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the coupled solver once and write states + diagnostics
    Run(Common),
    /// Continuation study over a decreasing regularization sequence
    KappaStudy(Common),
    /// Grid-refinement self-convergence study
    GridStudy(Common),
    /// Sharp-interface reference versus diffuse runs across nu values
    SharpCompare(Common),
    /// Run the invariant suite on a configuration
    Check(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (flat `key = value` text); built-in defaults if absent
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the sampler seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the regularization width
    #[arg(long)]
    kappa: Option<f64>,
    /// Override the grid node count
    #[arg(long)]
    grid: Option<usize>,
}

enum Failure {
    BadConfig(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::BadConfig(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl From<configforce::Error> for Failure {
    fn from(e: configforce::Error) -> Self {
        match e {
            configforce::Error::InvalidParameter(_) => Failure::BadConfig(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(format!("i/o: {e}"))
    }
}

fn load(common: &Common) -> Result<Resolved, Failure> {
    let (text, origin) = match &common.config {
        None => (String::new(), "<built-in defaults>".to_string()),
        Some(path) => (
            std::fs::read_to_string(path).map_err(|e| {
                Failure::BadConfig(format!("{}: {e}", path.display()))
            })?,
            path.display().to_string(),
        ),
    };
    let mut resolved = config::parse(&text)
        .map_err(|e| Failure::BadConfig(format!("{origin}: {e}")))?;
    if let Some(seed) = common.seed {
        resolved.seed = seed;
    }
    if let Some(kappa) = common.kappa {
        resolved.params = resolved
            .params
            .with_kappa(kappa)
            .map_err(|e| Failure::BadConfig(format!("{origin}: {e}")))?;
    }
    if let Some(n) = common.grid {
        resolved.grid = Grid1D::new(resolved.grid.a(), resolved.grid.d(), n)
            .map_err(|e| Failure::BadConfig(format!("{origin}: {e}")))?;
    }
    Ok(resolved)
}

fn cmd_run(common: &Common) -> Result<(), Failure> {
    let resolved = load(common)?;
    let dir = &common.out;
    write_text(dir, "config.txt", &resolved.echo())?;

    let body = resolved.body_force();
    let s0 = resolved.initial(&resolved.grid);
    let mut sink = DirSink::new(dir, &resolved.grid)?;
    let out = run(
        &s0,
        &body,
        &resolved.params,
        &resolved.grid,
        &resolved.run,
        &mut sink,
    )?;
    if let Some(e) = sink.error {
        return Err(e.into());
    }

    write_text(dir, "diagnostics.csv", &out.report.to_csv())?;
    let summary = Summary::from_report(&out.report, body.is_zero());
    write_text(dir, "summary.txt", &summary.render())?;
    print!("{}", summary.render());
    if summary.passed() {
        Ok(())
    } else {
        Err(Failure::Runtime("monitor violation (see summary.txt)".into()))
    }
}

fn cmd_kappa_study(common: &Common) -> Result<(), Failure> {
    let resolved = load(common)?;
    let dir = &common.out;
    write_text(dir, "config.txt", &resolved.echo())?;

    let body = resolved.body_force();
    let s0 = resolved.initial(&resolved.grid);
    let kappas = resolved.kappas();
    let table = kappa_study(
        &s0,
        &body,
        &resolved.params,
        &resolved.grid,
        &resolved.run,
        &kappas,
        resolved.seed,
    )?;
    for (kappa, report) in kappas.iter().zip(&table.reports) {
        let member = dir.join(format!("kappa_{kappa}"));
        write_text(&member, "diagnostics.csv", &report.to_csv())?;
        write_text(&member, "config.txt", &format!("kappa = {kappa}\n"))?;
    }
    write_text(dir, "kappa_table.csv", &table.to_csv())?;
    println!("{}", table.to_csv());
    Ok(())
}

fn cmd_grid_study(common: &Common) -> Result<(), Failure> {
    let resolved = load(common)?;
    let dir = &common.out;
    write_text(dir, "config.txt", &resolved.echo())?;

    let body = resolved.body_force();
    let profile = |grid: &Grid1D| resolved.initial(grid);
    let table = grid_study(
        &profile,
        &body,
        &resolved.params,
        &resolved.grid,
        &resolved.run,
        resolved.grid_levels,
    )?;
    write_text(dir, "orders.csv", &table.to_csv())?;
    println!("{}", table.to_csv());
    Ok(())
}

fn cmd_sharp_compare(common: &Common) -> Result<(), Failure> {
    let resolved = load(common)?;
    let dir = &common.out;
    write_text(dir, "config.txt", &resolved.echo())?;

    let body = resolved.body_force();
    let table = sharp_compare(
        resolved.sharp_z0,
        resolved.orientation,
        &resolved.nus,
        1.0,
        &body,
        &resolved.params,
        &resolved.grid,
        &resolved.run,
    )?;
    write_text(dir, "sharp_trajectory.csv", &table.sharp.to_csv())?;
    for member in &table.members {
        let mut csv = String::from("t,position_error\n");
        for (t, e) in &member.errors {
            csv.push_str(&format!("{t:.16e},{e:.16e}\n"));
        }
        write_text(&dir.join(format!("nu_{}", member.nu)), "errors.csv", &csv)?;
    }
    write_text(dir, "compare.csv", &table.to_csv())?;
    println!("{}", table.to_csv());
    Ok(())
}

/// Invariant suite on a configuration: a full run with its monitors, the
/// projection orthogonality residual, and a viscosity sample on the run
/// itself.
fn cmd_check(common: &Common) -> Result<(), Failure> {
    let resolved = load(common)?;
    let body = resolved.body_force();
    let s0 = resolved.initial(&resolved.grid);

    // projection invariants for the configured material
    let proj = configforce::tensor::build_projection(
        &resolved.params.elasticity,
        &resolved.params.misfit,
    )?;
    let residual = resolved.params.misfit.sub(proj.eps_star());
    let mut ortho = 0.0f64;
    for v in [
        nalgebra::Vector3::new(1.0, 0.0, 0.0),
        nalgebra::Vector3::new(0.0, 1.0, 0.0),
        nalgebra::Vector3::new(0.0, 0.0, 1.0),
    ] {
        let e = configforce::tensor::strain_of_gradient(&v);
        ortho = ortho.max(
            resolved
                .params
                .elasticity
                .apply(&residual)
                .dot(&e)
                .abs(),
        );
    }

    let dense = RunConfig {
        output_stride: 1,
        ..resolved.run.clone()
    };
    let out = run(
        &s0,
        &body,
        &resolved.params,
        &resolved.grid,
        &dense,
        &mut NullSink,
    )?;
    let mut summary = Summary::from_report(&out.report, body.is_zero());
    summary.lines.push((
        format!("projection residual D-orthogonal: {ortho:.3e} (bound 1e-12)"),
        ortho <= 1e-12,
    ));

    let viscosity = viscosity_check(
        &out.trajectory,
        &resolved.params,
        &resolved.grid,
        &ViscositySamplerConfig {
            seed: resolved.seed,
            ..ViscositySamplerConfig::default()
        },
    );
    summary.lines.push((
        format!(
            "viscosity inequalities: worst violation {:.3e} (tolerance {:.3e}, {} touchings)",
            viscosity.max_violation, viscosity.tolerance, viscosity.touchings
        ),
        viscosity.max_violation <= viscosity.tolerance,
    ));

    print!("{}", summary.render());
    write_text(&common.out, "check.txt", &summary.render())?;
    if summary.passed() {
        Ok(())
    } else {
        Err(Failure::Runtime("invariant violation (see check.txt)".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(c) => cmd_run(c),
        Command::KappaStudy(c) => cmd_kappa_study(c),
        Command::GridStudy(c) => cmd_grid_study(c),
        Command::SharpCompare(c) => cmd_sharp_compare(c),
        Command::Check(c) => cmd_check(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let message = match &failure {
                Failure::BadConfig(m) => format!("configuration error: {m}"),
                Failure::Runtime(m) => format!("error: {m}"),
            };
            eprintln!("{message}");
            ExitCode::from(failure.code())
        }
    }
}
