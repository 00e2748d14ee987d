//! Command-line runner: fuzzification, single runs, frontier sweeps,
//! metrics and reports.

pub mod bundle;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use foragefront::bfa::{run_bfa, BfaConfig, Sphere};
use foragefront::climate::{annual_extrema, Factor};
use foragefront::fuzzy::{FootprintOfUncertainty, DEFAULT_FOU_GRID};
use foragefront::irrigation::feasible;
use foragefront::pareto::{
    build_frontier_cells, derive_seed, frontier_to_csv, nondominated_filter, weight_grid,
    ParetoError, SweepSettings,
};
use foragefront::{IrrigationProblem, SolutionPoint, WeightVector};

use crate::bundle::{
    compute_metrics, load_bundle, load_frontier_csv, manifest_json, metrics_json, render_report,
    sibling_manifest, BundleManifest, FRONTIER_CSV, MANIFEST_JSON, METRICS_JSON,
    NONDOMINATED_CSV, SUMMARY_TXT, TRACE_DIR,
};
use crate::config::{load, Overrides, Resolved};
use crate::error::{write_file, CliError, CliResult};

/// Best fitness the sphere self-test must reach.
pub const SPHERE_THRESHOLD: f64 = -1e-2;

#[derive(Debug, Parser)]
#[command(name = "foragefront", version, about = "Fuzzy-noise BFA frontier sweeps for solar irrigation design")]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true, value_name = "path")]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true, value_name = "u64")]
    pub seed: Option<u64>,
    /// Objective weights for `optimize`.
    #[arg(long, global = true, value_name = "a,b,c")]
    pub weights: Option<String>,
    /// Worker threads for `frontier`.
    #[arg(long, global = true, value_name = "n")]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "dir")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the type-2 models and write them as JSON.
    Fuzzify,
    /// One solver run at the given weights.
    Optimize {
        /// Run the 4-d sphere self-test instead of the design problem.
        #[arg(long)]
        sphere: bool,
    },
    /// Full weight sweep; writes a report bundle.
    Frontier,
    /// Recompute metrics from a frontier CSV.
    Metrics {
        #[arg(value_name = "frontier.csv")]
        frontier_csv: PathBuf,
    },
    /// Summarise one or more bundles.
    Report {
        #[arg(value_name = "bundle-dir", required = true)]
        bundles: Vec<PathBuf>,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Normal output goes to `stdout`, error lines to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            let err = CliError::validation("Usage", first.trim_start_matches("error: "));
            let _ = writeln!(stderr, "{err}");
            return err.exit_code();
        }
    };
    match dispatch(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let overrides = Overrides {
        seed: cli.seed,
        workers: cli.workers,
        out: cli.out.clone(),
    };
    let text = match &cli.command {
        Command::Fuzzify => cmd_fuzzify(&load(cli.config.as_deref(), &overrides)?)?,
        Command::Optimize { sphere: true } => {
            cmd_sphere(&load(cli.config.as_deref(), &overrides)?, cli.seed)?
        }
        Command::Optimize { sphere: false } => {
            let weights = parse_weights(cli.weights.as_deref())?;
            cmd_optimize(&load(cli.config.as_deref(), &overrides)?, weights)?
        }
        Command::Frontier => cmd_frontier(&load(cli.config.as_deref(), &overrides)?)?,
        Command::Metrics { frontier_csv } => cmd_metrics(frontier_csv, cli.out.as_deref())?,
        Command::Report { bundles } => cmd_report(bundles, cli.out.as_deref())?,
    };
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::runtime("Stdout", e))
}

pub fn parse_weights(text: Option<&str>) -> CliResult<WeightVector> {
    let text = text.ok_or_else(|| CliError::validation("MissingWeights", "--weights a,b,c is required"))?;
    text.parse::<WeightVector>()
        .map_err(|e| CliError::validation("InvalidWeights", e))
}

pub fn cmd_fuzzify(r: &Resolved) -> CliResult<String> {
    let mut out = String::new();
    let _ = writeln!(out, "climate: {}", r.climate_source);
    for (factor, model) in [
        (Factor::Temperature, &r.models.temperature),
        (Factor::Insolation, &r.models.insolation),
    ] {
        let ext = annual_extrema(&r.climate, factor);
        let fou = FootprintOfUncertainty::sample(model, DEFAULT_FOU_GRID);
        let name = factor.name();
        write_file(&r.out_dir.join(format!("{name}_model.json")), &(model.to_json() + "\n"))?;
        let mut csv = String::from("x,lower,upper\n");
        for k in 0..fou.grid.len() {
            let _ = writeln!(csv, "{},{},{}", fou.grid[k], fou.lower[k], fou.upper[k]);
        }
        write_file(&r.out_dir.join(format!("{name}_fou.csv")), &csv)?;
        let _ = writeln!(
            out,
            "{name}: annual ({}, {}) {}; FOU mean width {:.6} over {} points",
            ext.lo,
            ext.hi,
            factor.unit(),
            fou.mean_width(),
            fou.grid.len()
        );
    }
    let _ = writeln!(out, "models written to {}", r.out_dir.display());
    Ok(out)
}

fn solver_error(e: impl std::fmt::Display) -> CliError {
    CliError::runtime("Solver", e)
}

pub fn cmd_optimize(r: &Resolved, weights: WeightVector) -> CliResult<String> {
    let problem = IrrigationProblem::new(r.spec.clone(), weights)
        .map_err(|e| CliError::validation("InfeasibleSpec", e))?;
    let seed = derive_seed(r.config.master_seed, &weights, 0);
    let cfg = BfaConfig {
        seed,
        ..r.bfa.clone()
    };
    let outcome = run_bfa(&problem, &cfg).map_err(solver_error)?;
    let (d, z) = IrrigationProblem::split(&outcome.best_position);
    if !feasible(&d, &z, &r.spec) {
        return Err(CliError::runtime("Infeasible", "best point violates the bounds"));
    }
    let point = SolutionPoint::new(weights, d, z, &r.spec, seed).map_err(solver_error)?;
    let csv = frontier_to_csv(std::slice::from_ref(&point));
    write_file(&r.out_dir.join("solution.csv"), &csv)?;
    write_file(&r.out_dir.join("trace.csv"), &outcome.trace.to_csv())?;
    let mut out = csv;
    let _ = writeln!(
        out,
        "evaluations {}; trace and solution written to {}",
        outcome.trace.evaluations,
        r.out_dir.display()
    );
    Ok(out)
}

pub fn cmd_sphere(r: &Resolved, seed: Option<u64>) -> CliResult<String> {
    let f = Sphere::new(4, 5.0);
    let cfg = BfaConfig {
        seed: seed.unwrap_or(r.config.master_seed),
        ..r.bfa.clone()
    };
    let start = Instant::now();
    let outcome = run_bfa(&f, &cfg).map_err(solver_error)?;
    write_file(&r.out_dir.join("sphere_trace.csv"), &outcome.trace.to_csv())?;
    let ok = outcome.best_fitness >= SPHERE_THRESHOLD;
    let line = format!(
        "sphere seed={} best_fitness={} threshold={} evaluations={} status={} runtime_s={:.2}\n",
        cfg.seed,
        outcome.best_fitness,
        SPHERE_THRESHOLD,
        outcome.trace.evaluations,
        if ok { "pass" } else { "fail" },
        start.elapsed().as_secs_f64()
    );
    if ok {
        Ok(line)
    } else {
        Err(CliError::runtime("SelfTestFailed", line.trim_end()))
    }
}

fn trace_name(w: &WeightVector, replicate: usize) -> String {
    let a = w.as_array();
    format!("w{}_{}_{}_r{replicate}.csv", a[0], a[1], a[2])
}

pub fn cmd_frontier(r: &Resolved) -> CliResult<String> {
    let c = &r.config;
    let grid = weight_grid::<f64>(c.weight_step, c.weight_minimum)
        .map_err(|e| CliError::validation("EmptyGrid", e))?;
    let settings = SweepSettings {
        runs_per_weight: c.runs_per_weight,
        master_seed: c.master_seed,
        workers: c.workers,
    };
    let start = Instant::now();
    let cells = build_frontier_cells(&r.spec, &r.bfa, &grid, &settings).map_err(|e| match e {
        ParetoError::Cell { .. } | ParetoError::Infeasible { .. } => {
            CliError::runtime("CellFailed", e)
        }
        other => CliError::runtime("Sweep", other),
    })?;
    let elapsed = start.elapsed();

    let points: Vec<SolutionPoint> = cells.iter().map(|c| c.point.clone()).collect();
    let dir = &r.out_dir;
    let mut trace_files = Vec::new();
    for (w, cell) in grid.iter().zip(&cells) {
        for (k, (_, trace)) in cell.traces.iter().enumerate() {
            let name = format!("{TRACE_DIR}/{}", trace_name(w, k));
            write_file(&dir.join(&name), &trace.to_csv())?;
            trace_files.push(name);
        }
    }
    let manifest = BundleManifest {
        label: r
            .grade_context
            .as_ref()
            .map_or_else(|| "crisp".to_string(), |g| g.label.clone()),
        master_seed: c.master_seed,
        runs_per_weight: c.runs_per_weight,
        weight_step: c.weight_step,
        weight_minimum: c.weight_minimum,
        n_weights: grid.len(),
        sigma_norm: c.sigma_norm,
        grade_context: r.grade_context.clone(),
        climate_source: r.climate_source.clone(),
        problem: r.spec.clone(),
        bfa: r.bfa.clone(),
        trace_files,
    };
    write_file(&dir.join(FRONTIER_CSV), &frontier_to_csv(&points))?;
    write_file(&dir.join(NONDOMINATED_CSV), &frontier_to_csv(&nondominated_filter(&points)))?;
    write_file(&dir.join(MANIFEST_JSON), &manifest_json(&manifest))?;
    let metrics = compute_metrics(&points, Some(&manifest))?;
    write_file(&dir.join(METRICS_JSON), &metrics_json(&metrics))?;
    let bundle = load_bundle(dir)?;
    let summary = render_report(std::slice::from_ref(&bundle))?;
    write_file(&dir.join(SUMMARY_TXT), &summary)?;

    let mut out = summary;
    let _ = writeln!(
        out,
        "\nbundle written to {}; {} runs in {:.1} s",
        dir.display(),
        points.len() as u64 * u64::from(c.runs_per_weight),
        elapsed.as_secs_f64()
    );
    Ok(out)
}

pub fn cmd_metrics(csv: &Path, out: Option<&Path>) -> CliResult<String> {
    let points = load_frontier_csv(csv)?;
    let manifest = sibling_manifest(csv)?;
    let metrics = compute_metrics(&points, manifest.as_ref())?;
    let text = metrics_json(&metrics);
    if let Some(dir) = out {
        write_file(&dir.join(METRICS_JSON), &text)?;
    }
    Ok(text)
}

pub fn cmd_report(dirs: &[PathBuf], out: Option<&Path>) -> CliResult<String> {
    let bundles = dirs
        .iter()
        .map(|d| load_bundle(d))
        .collect::<CliResult<Vec<_>>>()?;
    let text = render_report(&bundles)?;
    if let Some(dir) = out {
        write_file(&dir.join("report.txt"), &text)?;
    }
    Ok(text)
}
