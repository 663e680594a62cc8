//! Command-line experiment runner for the mixed (p, E, H) Maxwell solver.
//!
//! Subcommands:
//! - `run`: one simulation; writes `energy.csv`, `errors.json`, `meta.json`,
//!   and optionally a legacy ASCII VTK snapshot of the final state.
//! - `converge`: a mesh-resolution or time-step sweep; writes
//!   `converge.csv` and prints the least-squares convergence order.
//! - `selftest`: fast named invariant checks of the element machinery.
//!
//! Exit codes: 0 on success, 2 on configuration or input errors (including
//! usage errors), 3 on solver failures, 1 on selftest failures. Output files
//! are deterministic for identical configurations except for the timestamp
//! field in `meta.json`.

use clap::{Args, Parser, Subcommand};
use maxfeec::{
    estimate_order, generate_unit_cube, generate_unit_square, get_problem, read_mesh,
    run_simulation, EnergyTrace, Error, ErrorReport, Mesh, ProblemSpec, Scheme, SchemeConfig,
};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::Instant;

mod selftest;
mod vtk;

#[derive(Parser)]
#[command(name = "maxfeec", version, about = "Mixed (p, E, H) Maxwell solver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its energy trace and error report.
    Run(RunArgs),
    /// Sweep mesh resolution or time step and report the convergence order.
    Converge(ConvergeArgs),
    /// Run fast named invariant checks (quadrature, elements, mesh, steppers).
    Selftest,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MeshSource {
    /// Subdivisions per axis of the generated unit square or cube.
    #[arg(long)]
    n: Option<usize>,
    /// Path to a mesh text file (see the mesh file format in the README).
    #[arg(long)]
    mesh_file: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Problem id: example1 .. example6.
    #[arg(long)]
    problem: String,
    /// Integrator: cn, leapfrog, or backward-euler.
    #[arg(long)]
    scheme: String,
    /// Polynomial order of the form spaces (1 or 2).
    #[arg(long, default_value_t = 1)]
    order: usize,
    #[command(flatten)]
    mesh: MeshSource,
    /// Time step.
    #[arg(long)]
    dt: f64,
    /// Start time override (defaults to the problem's own).
    #[arg(long)]
    tmin: Option<f64>,
    /// Final time override (defaults to the problem's own).
    #[arg(long)]
    tmax: Option<f64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write fields.vtk (legacy ASCII, per-cell samples of the final state).
    #[arg(long)]
    vtk: bool,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Problem id: example1 .. example6.
    #[arg(long)]
    problem: String,
    /// Integrator: cn, leapfrog, or backward-euler.
    #[arg(long)]
    scheme: String,
    /// Polynomial order of the form spaces (1 or 2).
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// Mesh subdivisions to sweep (errors reported against cell diameter h).
    #[arg(long, value_delimiter = ',', conflicts_with = "sweep_dt")]
    sweep_n: Option<Vec<usize>>,
    /// Time steps to sweep on a fixed mesh.
    #[arg(long, value_delimiter = ',', requires = "n")]
    sweep_dt: Option<Vec<f64>>,
    /// Mesh subdivisions for a time-step sweep.
    #[arg(long)]
    n: Option<usize>,
    /// Time step for a mesh sweep.
    #[arg(long)]
    dt: Option<f64>,
    /// Start time override (defaults to the problem's own).
    #[arg(long)]
    tmin: Option<f64>,
    /// Final time override (defaults to the problem's own).
    #[arg(long)]
    tmax: Option<f64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Converge(args) => cmd_converge(&args),
        Command::Selftest => selftest::run(),
    };
    std::process::exit(code);
}

/// Maps library errors to the documented exit codes.
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Solver(_) => 3,
        _ => 2,
    }
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    exit_code(e)
}

fn build_mesh(source: &MeshSource, prob: &ProblemSpec) -> Result<Mesh, Error> {
    match (&source.n, &source.mesh_file) {
        (Some(n), None) => {
            if *n == 0 {
                return Err(Error::Config("mesh subdivisions must be positive".into()));
            }
            Ok(if prob.dim == 2 { generate_unit_square(*n) } else { generate_unit_cube(*n) })
        }
        (None, Some(path)) => read_mesh(path),
        _ => unreachable!("clap enforces exactly one mesh source"),
    }
}

fn parse_config(
    problem: &str,
    scheme: &str,
    order: usize,
    dt: f64,
    tmin: Option<f64>,
    tmax: Option<f64>,
) -> Result<(ProblemSpec, SchemeConfig), Error> {
    let prob = get_problem(problem)?;
    let scheme: Scheme = scheme.parse()?;
    let cfg = SchemeConfig::new(
        scheme,
        order,
        dt,
        tmin.unwrap_or(prob.t_min),
        tmax.unwrap_or(prob.t_max),
    )?;
    Ok((prob, cfg))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents).map_err(Error::MeshIo)
}

fn cmd_run(args: &RunArgs) -> i32 {
    let (prob, cfg) =
        match parse_config(&args.problem, &args.scheme, args.order, args.dt, args.tmin, args.tmax)
        {
            Ok(v) => v,
            Err(e) => return fail(&e),
        };
    let mesh = match build_mesh(&args.mesh, &prob) {
        Ok(m) => m,
        Err(e) => return fail(&e),
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        return fail(&Error::MeshIo(e));
    }

    let started = Instant::now();
    let (trace, state, report) = match run_simulation(&cfg, &prob, &mesh) {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let seconds = started.elapsed().as_secs_f64();

    let meta = run_metadata(&prob, &cfg, &mesh, &args.mesh, &trace, &report, seconds);
    let result = write_file(&args.out.join("energy.csv"), &trace.to_csv())
        .and_then(|_| write_file(&args.out.join("errors.json"), &report.to_json()))
        .and_then(|_| write_file(&args.out.join("meta.json"), &meta));
    if let Err(e) = result {
        return fail(&e);
    }
    if args.vtk {
        let text = vtk::final_state(&mesh, cfg.r, &prob, &state);
        if let Err(e) = write_file(&args.out.join("fields.vtk"), &text) {
            return fail(&e);
        }
    }
    println!(
        "{} {} r={} on {} cells: {} steps, energy {:.9} -> {:.9}, total error {:.3e} [{seconds:.2}s]",
        prob.id,
        cfg.scheme,
        cfg.r,
        mesh.num_cells(),
        trace.rows.len() - 1,
        trace.rows[0].energy,
        trace.rows.last().unwrap().energy,
        report.total,
    );
    0
}

/// Serializes the run description; `timestamp_unix_s` is the only field
/// allowed to differ between identical runs.
fn run_metadata(
    prob: &ProblemSpec,
    cfg: &SchemeConfig,
    mesh: &Mesh,
    source: &MeshSource,
    trace: &EnergyTrace,
    report: &ErrorReport,
    seconds: f64,
) -> String {
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = json!({
        "problem": prob.id,
        "scheme": cfg.scheme.name(),
        "order": cfg.r,
        "dt": cfg.dt,
        "t_min": cfg.t_min,
        "t_max": cfg.t_max,
        "steps": trace.rows.len() - 1,
        "mesh": {
            "source": source.n.map_or_else(
                || source.mesh_file.as_ref().unwrap().display().to_string(),
                |n| format!("generated n={n}"),
            ),
            "dim": mesh.dim(),
            "vertices": mesh.num_vertices(),
            "cells": mesh.num_cells(),
            "max_diameter": mesh.max_diameter(),
            "euler_characteristic": mesh.euler_characteristic(),
        },
        "energy": {
            "initial": trace.rows[0].energy,
            "final": trace.rows.last().unwrap().energy,
            "max_drift": trace.max_drift(),
        },
        "errors": {
            "e_p": report.e_p,
            "e_E": report.e_e,
            "e_H": report.e_h,
            "total": report.total,
        },
        "timings": { "solve_seconds": seconds },
        "timestamp_unix_s": timestamp,
    });
    serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n"
}

fn cmd_converge(args: &ConvergeArgs) -> i32 {
    enum Sweep {
        MeshN(Vec<usize>),
        TimeStep(usize, Vec<f64>),
    }
    let sweep = match (&args.sweep_n, &args.sweep_dt) {
        (Some(ns), None) => {
            if args.dt.is_none() {
                return fail(&Error::Config("--sweep-n requires --dt".into()));
            }
            Sweep::MeshN(ns.clone())
        }
        (None, Some(dts)) => Sweep::TimeStep(args.n.unwrap(), dts.clone()),
        _ => {
            return fail(&Error::Config(
                "pass exactly one of --sweep-n or --sweep-dt".into(),
            ))
        }
    };
    let points = match &sweep {
        Sweep::MeshN(ns) => ns.len(),
        Sweep::TimeStep(_, dts) => dts.len(),
    };
    if points < 2 {
        return fail(&Error::Config("a sweep needs at least two points".into()));
    }

    // Validate problem, scheme, and times once up front.
    let probe_dt = match &sweep {
        Sweep::MeshN(_) => args.dt.unwrap(),
        Sweep::TimeStep(_, dts) => dts[0],
    };
    if let Err(e) =
        parse_config(&args.problem, &args.scheme, args.order, probe_dt, args.tmin, args.tmax)
    {
        return fail(&e);
    }

    // Sweep points are independent simulations; run them on up to
    // MAXFEEC_THREADS worker threads (default: available parallelism).
    let cap = std::env::var("MAXFEEC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|v| v.get()).unwrap_or(1)
        });
    let run_point = |point_n: usize, point_dt: f64| -> Result<(f64, ErrorReport), Error> {
        let prob = get_problem(&args.problem)?;
        let scheme: Scheme = args.scheme.parse()?;
        let cfg = SchemeConfig::new(
            scheme,
            args.order,
            point_dt,
            args.tmin.unwrap_or(prob.t_min),
            args.tmax.unwrap_or(prob.t_max),
        )?;
        let mesh =
            if prob.dim == 2 { generate_unit_square(point_n) } else { generate_unit_cube(point_n) };
        let (_, _, report) = run_simulation(&cfg, &prob, &mesh)?;
        let param = match &sweep {
            Sweep::MeshN(_) => report.h,
            Sweep::TimeStep(..) => point_dt,
        };
        Ok((param, report))
    };
    let jobs: Vec<(usize, f64)> = match &sweep {
        Sweep::MeshN(ns) => ns.iter().map(|&n| (n, args.dt.unwrap())).collect(),
        Sweep::TimeStep(n, dts) => dts.iter().map(|&dt| (*n, dt)).collect(),
    };
    let mut results: Vec<(f64, ErrorReport)> = Vec::with_capacity(jobs.len());
    for chunk in jobs.chunks(cap) {
        let batch: Vec<_> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&(n, dt)| scope.spawn(move || run_point(n, dt)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for item in batch {
            match item {
                Ok(v) => results.push(v),
                Err(e) => return fail(&e),
            }
        }
    }

    let mut csv = String::from("param,e_p,e_E,e_H,total\n");
    for (param, rep) in &results {
        csv.push_str(&format!("{},{},{},{},{}\n", param, rep.e_p, rep.e_e, rep.e_h, rep.total));
    }
    if let Err(e) = std::fs::create_dir_all(&args.out)
        .map_err(Error::MeshIo)
        .and_then(|_| write_file(&args.out.join("converge.csv"), &csv))
    {
        return fail(&e);
    }
    let params: Vec<f64> = results.iter().map(|(p, _)| *p).collect();
    let errors: Vec<f64> = results.iter().map(|(_, r)| r.total).collect();
    match estimate_order(&params, &errors) {
        Ok(order) => {
            println!("least-squares order: {order:.3}");
            0
        }
        Err(e) => fail(&e),
    }
}
