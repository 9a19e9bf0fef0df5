//! `g2flow` command line: identity verification, trajectories, phase
//! portraits, basin rasters and critical-point reports.
//!
//! Exit status is 0 on success, 1 when verification fails and 2 for any
//! configuration or output problem.

pub mod config;
pub mod portrait;
pub mod table;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use g2flow::dynamics::{
    basin_map, find_critical_points, integrate, separatrix, separatrix_options, BasinMap,
    CriticalSearch, Direction, Grid, Region,
};
use g2flow::flows::{Family, PhaseState};
use g2flow::verify::{run_identity_suite, Fault, VerificationReport, VerifyOptions, DEFAULT_SEED};
use g2flow::Sign;
use serde::Serialize;

use config::{config_error, resolve_kind, Failure, Initial, RunConfig, DEFAULT_REGION};

pub const TOOL: &str = "g2flow";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "g2flow", version, about = "Reduced G2 geometric flows on 3-Sasakian 7-manifolds")]
pub struct Cli {
    /// Seed for the random verification points; recorded in every output.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the identity suite and write a JSON report.
    Verify(VerifyArgs),
    /// Integrate one rescaled trajectory and write it as CSV.
    Simulate(SimulateArgs),
    /// Draw an SVG phase portrait.
    Portrait(PortraitArgs),
    /// Integrate a raster of initial points and tabulate their fates.
    Basins(BasinsArgs),
    /// Locate and classify the critical points in a region.
    Critical(CriticalArgs),
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    /// coflow, flow or ricci.
    #[arg(long)]
    pub family: Family,
    /// Branch sign, +1 or -1; required for coflow and flow.
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<Sign>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Shift one closed-form coefficient to exercise the failure path.
    #[arg(long, hide = true)]
    pub fault: Option<Fault>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub flow: FlowArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub y0: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub c2: f64,
    /// Rescaled-time horizon.
    #[arg(long, default_value_t = 200.0, allow_hyphen_values = true)]
    pub smax: f64,
    #[arg(long, default_value = "1e-9", allow_hyphen_values = true)]
    pub rtol: f64,
    #[arg(long, default_value = "1e-12", allow_hyphen_values = true)]
    pub atol: f64,
    /// Integrate the negated field.
    #[arg(long)]
    pub backward: bool,
    /// Keep integrating after reaching a critical point.
    #[arg(long)]
    pub no_stop: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PortraitArgs {
    #[command(flatten)]
    pub flow: FlowArgs,
    /// u0,u1,v0,v1 (default 0,2.2,0,2.2).
    #[arg(long)]
    pub region: Option<Region>,
    /// Direction-field arrows per axis.
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    /// Rescaled-time span of the sample flow lines.
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub smax: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BasinsArgs {
    #[command(flatten)]
    pub flow: FlowArgs,
    /// u0,u1,v0,v1 (default 0,2.2,0,2.2).
    #[arg(long)]
    pub region: Option<Region>,
    /// Raster cells per axis; each cell is integrated from its centre.
    #[arg(long)]
    pub grid: usize,
    #[arg(long, default_value_t = 200.0, allow_hyphen_values = true)]
    pub smax: f64,
    /// Raster CSV (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    #[command(flatten)]
    pub flow: FlowArgs,
    /// u0,u1,v0,v1 (default 0,2.2,0,2.2).
    #[arg(long)]
    pub region: Option<Region>,
    /// Also shoot the separatrices of each interior saddle.
    #[arg(long)]
    pub separatrices: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Structured result document with the configuration it came from.
#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub result: T,
}

impl<'a, T: Serialize> Report<'a, T> {
    pub fn new(config: &'a RunConfig, result: T) -> Self {
        Report {
            tool: TOOL,
            version: VERSION,
            config,
            result,
        }
    }

    pub fn to_json(&self) -> Result<String, Failure> {
        let mut s = serde_json::to_string_pretty(self).map_err(config_error)?;
        s.push('\n');
        Ok(s)
    }
}

fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Config(format!("cannot write to stdout: {e}"))),
    }
}

/// Parse `argv` and run; returns the exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(stderr, "{}", e.render());
            return if code == 0 { 0 } else { 2 };
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "{f}");
            f.exit_code()
        }
    }
}

pub fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Verify(a) => cmd_verify(cli.seed, a, stdout, stderr),
        Command::Simulate(a) => cmd_simulate(cli.seed, a, stdout, stderr),
        Command::Portrait(a) => cmd_portrait(cli.seed, a, stdout),
        Command::Basins(a) => cmd_basins(cli.seed, a, stdout, stderr),
        Command::Critical(a) => cmd_critical(cli.seed, a, stdout),
    }
}

pub fn verification(cfg: &RunConfig) -> VerificationReport {
    run_identity_suite(&VerifyOptions {
        seed: cfg.seed,
        fault: cfg.fault,
        ..Default::default()
    })
}

fn cmd_verify(seed: u64, a: VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let mut cfg = RunConfig::new("verify", seed);
    cfg.fault = a.fault;
    let report = verification(&cfg);
    emit(a.out.as_deref(), &Report::new(&cfg, &report).to_json()?, stdout)?;
    let total = report.checks.len();
    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    let _ = writeln!(
        stderr,
        "verify: {}/{total} identities hold, max residual {}",
        total - failed.len(),
        table::num(report.max_float_residual())
    );
    for c in report.failures() {
        let _ = writeln!(stderr, "FAILED {}: {} (max residual {})", c.name, c.statement, table::num(c.max_residual));
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verification(failed.join(", ")))
    }
}

pub fn simulate_config(seed: u64, a: &SimulateArgs) -> Result<RunConfig, Failure> {
    let kind = resolve_kind(a.flow.family, a.flow.epsilon)?;
    let mut cfg = RunConfig::new("simulate", seed).with_kind(kind);
    cfg.initial = Some(Initial {
        u: a.x0,
        v: a.y0,
        c2: a.c2,
    });
    cfg.s_max = Some(a.smax);
    cfg.rtol = Some(a.rtol);
    cfg.atol = Some(a.atol);
    cfg.direction = Some(if a.backward { Direction::Backward } else { Direction::Forward });
    cfg.stop_on_convergence = Some(!a.no_stop);
    cfg.out = a.out.clone();
    Ok(cfg)
}

fn cmd_simulate(seed: u64, a: SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let cfg = simulate_config(seed, &a)?;
    let opts = cfg.integrate_options()?;
    let init = cfg.initial.expect("set above");
    let tr = integrate(cfg.kind(), PhaseState::new(init.u, init.v, init.c2), &opts).map_err(config_error)?;
    emit(cfg.out.as_deref(), &table::write_trajectory(&cfg, &tr), stdout)?;
    let _ = writeln!(
        stderr,
        "simulate: {} after s = {} ({} steps)",
        tr.terminal,
        tr.last().s,
        tr.accepted_steps
    );
    Ok(())
}

fn cmd_portrait(seed: u64, a: PortraitArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let kind = resolve_kind(a.flow.family, a.flow.epsilon)?;
    let region = a.region.unwrap_or(DEFAULT_REGION);
    let mut cfg = RunConfig::new("portrait", seed).with_kind(kind);
    cfg.region = Some(region);
    cfg.grid = Some(a.grid);
    let svg = portrait::render(
        kind,
        region,
        &portrait::PortraitOptions {
            grid: a.grid,
            s_max: a.smax,
            ..Default::default()
        },
    )?;
    emit(a.out.as_deref(), &svg, stdout)
}

/// Node grid through the centres of an `n × n` raster over `region`.
pub fn raster_grid(region: Region, n: usize) -> Result<Grid, Failure> {
    if n < 2 {
        return Err(Failure::Config(format!("--grid must be at least 2, got {n}")));
    }
    let du = (region.u1 - region.u0) / n as f64;
    let dv = (region.v1 - region.v0) / n as f64;
    let centres = Region::new(
        region.u0 + 0.5 * du,
        region.u1 - 0.5 * du,
        region.v0 + 0.5 * dv,
        region.v1 - 0.5 * dv,
    )
    .map_err(config_error)?;
    Grid::square(centres, n).map_err(config_error)
}

#[derive(Debug, Serialize)]
pub struct BasinSummary {
    pub cells: usize,
    pub nu: usize,
    pub nv: usize,
    pub counts: BTreeMap<String, usize>,
    pub fractions: BTreeMap<String, f64>,
    pub errors: Vec<CellError>,
}

#[derive(Debug, Serialize)]
pub struct CellError {
    pub i: usize,
    pub j: usize,
    pub message: String,
}

pub fn summarize(map: &BasinMap) -> BasinSummary {
    let counts = map.counts();
    let total = map.cells.len();
    BasinSummary {
        cells: total,
        nu: map.grid.nu,
        nv: map.grid.nv,
        fractions: counts.iter().map(|(k, n)| (k.clone(), *n as f64 / total as f64)).collect(),
        counts,
        errors: map
            .cells
            .iter()
            .filter_map(|c| {
                c.outcome.as_ref().err().map(|m| CellError {
                    i: c.i,
                    j: c.j,
                    message: m.clone(),
                })
            })
            .collect(),
    }
}

fn cmd_basins(seed: u64, a: BasinsArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let kind = resolve_kind(a.flow.family, a.flow.epsilon)?;
    let region = a.region.unwrap_or(DEFAULT_REGION);
    let mut cfg = RunConfig::new("basins", seed).with_kind(kind);
    cfg.region = Some(region);
    cfg.grid = Some(a.grid);
    cfg.s_max = Some(a.smax);
    let opts = cfg.integrate_options()?;
    let grid = raster_grid(region, a.grid)?;
    let map = basin_map(kind, grid, &opts);
    emit(a.out.as_deref(), &table::write_basins(&cfg, &map), stdout)?;
    let summary = summarize(&map);
    if let Some(p) = &a.summary {
        let json = Report::new(&cfg, &summary).to_json()?;
        emit(Some(p), &json, stdout)?;
    }
    let parts: Vec<String> = summary.counts.iter().map(|(k, n)| format!("{k}: {n}")).collect();
    let _ = writeln!(stderr, "basins: {} cells; {}", summary.cells, parts.join(", "));
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct CriticalResult<'a> {
    pub search: &'a CriticalSearch,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub separatrices: Vec<SeparatrixSummary>,
}

/// Endpoints of the four branches through a saddle.
#[derive(Debug, Serialize)]
pub struct SeparatrixSummary {
    pub saddle: [f64; 2],
    pub stable_eigenvector: [f64; 2],
    pub unstable_eigenvector: [f64; 2],
    pub branches: Vec<BranchSummary>,
}

#[derive(Debug, Serialize)]
pub struct BranchSummary {
    pub manifold: &'static str,
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub terminal: String,
}

fn cmd_critical(seed: u64, a: CriticalArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let kind = resolve_kind(a.flow.family, a.flow.epsilon)?;
    let region = a.region.unwrap_or(DEFAULT_REGION);
    let mut cfg = RunConfig::new("critical", seed).with_kind(kind);
    cfg.region = Some(region);
    let search = find_critical_points(kind, region).map_err(config_error)?;
    let mut separatrices = Vec::new();
    if a.separatrices {
        for saddle in search
            .interior()
            .filter(|r| r.classification == g2flow::dynamics::Classification::Saddle)
        {
            let sep = separatrix(kind, saddle, &separatrix_options()).map_err(config_error)?;
            let branch = |manifold, tr: &g2flow::dynamics::Trajectory| BranchSummary {
                manifold,
                start: tr.first().point(),
                end: tr.last().point(),
                terminal: tr.terminal.to_string(),
            };
            let branches = sep
                .stable
                .iter()
                .map(|t| branch("stable", t))
                .chain(sep.unstable.iter().map(|t| branch("unstable", t)))
                .collect();
            separatrices.push(SeparatrixSummary {
                saddle: sep.saddle,
                stable_eigenvector: sep.stable_eigenvector,
                unstable_eigenvector: sep.unstable_eigenvector,
                branches,
            });
        }
    }
    let json = Report::new(
        &cfg,
        CriticalResult {
            search: &search,
            separatrices,
        },
    )
    .to_json()?;
    emit(a.out.as_deref(), &json, stdout)
}
