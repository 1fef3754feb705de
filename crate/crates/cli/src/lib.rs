//! Command-line front end: flags and recipe files become [`SweepSpec`]s and friends,
//! results go out as CSV or JSON.

pub mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dicke_qgt::sweep::{
    convergence_scan, csv_field, fmt_float, gamma_comparison, peak_locate_rows, ratio_scan, run_sweep, to_json_string, write_csv, ConvergenceReport,
    RatioRow, RatioScan,
};
use dicke_qgt::{BasePoint, Convention, Grid, Method, ModelKind, Param, Sector, Spacing, SweepParam, SweepRow, SweepSpec, TruncationSpec};

pub use config::Config;

/// Exit status for a run whose output contains flagged rows.
pub const EXIT_FLAGGED: u8 = 2;
/// Exit status for an invalid spec or unreadable input.
pub const EXIT_INVALID: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "dicke-qgt", version, about = "Ground-state quantum geometry of the anisotropic Dicke model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One row of geometry per grid point.
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        /// Also report the parabolic peak of I_omega_omega on stderr.
        #[arg(long)]
        peak: bool,
    },
    /// I_omega_omega across gamma at fixed g.
    GammaCompare {
        #[command(flatten)]
        spec: SpecArgs,
        /// Fixed coupling `g`.
        #[arg(long)]
        g: Option<f64>,
        /// Comma-separated gamma values.
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
    },
    /// I_lab / I_eff over (j, gamma, eta) triples.
    RatioScan {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_delimiter = ',')]
        js: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        etas: Option<Vec<f64>>,
        #[arg(long)]
        g: Option<f64>,
        /// Model providing I_eff (default auto_co).
        #[arg(long)]
        reference: Option<String>,
        #[arg(long)]
        reference_nmax: Option<usize>,
    },
    /// Relative change of I_omega_omega between successive cutoffs.
    Converge {
        #[command(flatten)]
        spec: SpecArgs,
        /// Comma-separated cutoffs, ascending.
        #[arg(long, value_delimiter = ',')]
        cutoffs: Option<Vec<usize>>,
    },
}

/// Flags shared by every subcommand; each one overrides the recipe file.
#[derive(Debug, Clone, Default, Args)]
pub struct SpecArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// full, cs_np, cs_sp, co_np, co_sp, auto_cs or auto_co.
    #[arg(long)]
    pub model: Option<String>,
    /// sum, solve, fd or analytic.
    #[arg(long)]
    pub method: Option<String>,
    /// Swept coordinate: g, gamma, eta, theta or omega.
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// linear or log.
    #[arg(long)]
    pub spacing: Option<String>,
    /// Explicit comma-separated grid, instead of from/to/points.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub values: Option<Vec<f64>>,
    #[arg(long = "base-g")]
    pub base_g: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub j: Option<f64>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Cutoff of the second mode in two-mode models (default: same as --nmax).
    #[arg(long)]
    pub nb: Option<usize>,
    /// positive, negative or full.
    #[arg(long)]
    pub sector: Option<String>,
    /// Comma-separated ordered tensor subset; must contain omega and theta.
    #[arg(long, value_delimiter = ',')]
    pub tensor: Option<Vec<String>>,
    /// fixed_couplings or fixed_g.
    #[arg(long)]
    pub convention: Option<String>,
    /// Half-width of the skipped window around g = 1.
    #[arg(long)]
    pub exclusion: Option<f64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Where and how results are written.
#[derive(Debug, Clone)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl Output {
    fn resolve(args: &SpecArgs, cfg: &Config) -> Result<Output> {
        let path = args.out.clone().or_else(|| cfg.output.path.clone());
        let format = match args.format.as_deref().or(cfg.output.format.as_deref()) {
            Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => bail!("unknown output format `{other}` (use csv or json)"),
            None if path.as_ref().and_then(|p| p.extension()).is_some_and(|e| e == "json") => Format::Json,
            None => Format::Csv,
        };
        Ok(Output { path, format })
    }

    fn write(&self, body: &[u8]) -> Result<()> {
        match &self.path {
            Some(p) => {
                let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
                w.write_all(body)?;
                w.flush()?;
            }
            None => std::io::stdout().lock().write_all(body)?,
        }
        Ok(())
    }
}

fn parse<T: FromStr<Err = dicke_qgt::Error>>(s: &str) -> Result<T> {
    s.parse::<T>().map_err(|e| anyhow!(e))
}

fn load_config(args: &SpecArgs) -> Result<Config> {
    args.config.as_deref().map(Config::load).transpose().map(Option::unwrap_or_default)
}

/// Merges flags over the recipe file; flags win.
pub fn build_spec(args: &SpecArgs, cfg: &Config) -> Result<SweepSpec> {
    let model: ModelKind = parse(args.model.as_deref().or(cfg.sweep.model.as_deref()).unwrap_or("full"))?;
    let method = match args.method.as_deref().or(cfg.sweep.method.as_deref()) {
        Some(m) => parse(m)?,
        None if model.is_one_mode() => Method::Analytic,
        None => Method::LinearSolve,
    };
    let param: SweepParam = parse(args.param.as_deref().or(cfg.sweep.param.as_deref()).unwrap_or("g"))?;
    let values = args.values.clone().or_else(|| cfg.grid.values.clone());
    let grid = match values {
        Some(v) => Grid::Values(v),
        None => {
            let start = args.from.or(cfg.grid.from).ok_or_else(|| anyhow!("missing grid start (--from or [grid] from)"))?;
            let stop = args.to.or(cfg.grid.to).ok_or_else(|| anyhow!("missing grid stop (--to or [grid] to)"))?;
            let count = args.points.or(cfg.grid.points).ok_or_else(|| anyhow!("missing grid size (--points or [grid] points)"))?;
            let spacing: Spacing = parse(args.spacing.as_deref().or(cfg.grid.spacing.as_deref()).unwrap_or("linear"))?;
            Grid::Range { start, stop, count, spacing }
        }
    };
    let d = BasePoint::default();
    let b = &cfg.base;
    let base = BasePoint {
        g: args.base_g.or(b.g).unwrap_or(d.g),
        gamma: args.gamma.or(b.gamma).unwrap_or(d.gamma),
        eta: args.eta.or(b.eta).unwrap_or(d.eta),
        omega: args.omega.or(b.omega).unwrap_or(d.omega),
        theta: args.theta.or(b.theta).unwrap_or(d.theta),
        j: args.j.or(b.j).unwrap_or(d.j),
    };
    let mut spec = SweepSpec::new(model, method, param, grid, base);
    spec.truncation = TruncationSpec {
        n_max: args.nmax.or(cfg.truncation.n_max),
        n_b: args.nb.or(cfg.truncation.n_b),
        sector: match args.sector.as_deref().or(cfg.truncation.sector.as_deref()) {
            Some(s) => parse::<Sector>(s)?,
            None => Sector::Positive,
        },
    };
    if let Some(t) = args.tensor.as_ref().or(cfg.sweep.tensor.as_ref()) {
        spec.tensor = t.iter().map(|s| parse::<Param>(s)).collect::<Result<_>>()?;
    }
    if let Some(c) = args.convention.as_deref().or(cfg.sweep.convention.as_deref()) {
        spec.convention = parse::<Convention>(c)?;
    }
    if let Some(e) = args.exclusion.or(cfg.sweep.exclusion) {
        spec.exclusion = e;
    }
    spec.workers = args.workers.or(cfg.sweep.workers).unwrap_or(1);
    spec.validate().map_err(|e| anyhow!(e))?;
    Ok(spec)
}

/// Rows as bytes in the requested format.
pub fn render_rows(rows: &[SweepRow], format: Format) -> Vec<u8> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(rows, &mut buf).expect("writing to memory");
            buf
        }
        Format::Json => {
            let mut s = to_json_string(rows);
            s.push('\n');
            s.into_bytes()
        }
    }
}

pub const RATIO_COLUMNS: [&str; 9] = ["j", "gamma", "eta", "g", "I_lab", "I_eff", "ratio", "converged", "note"];

pub fn render_ratios(rows: &[RatioRow], format: Format) -> Vec<u8> {
    match format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(rows).expect("rows serialize")).into_bytes(),
        Format::Csv => {
            let mut s = format!("{}\n", RATIO_COLUMNS.join(","));
            for r in rows {
                let fields = [
                    fmt_float(r.j),
                    fmt_float(r.gamma),
                    fmt_float(r.eta),
                    fmt_float(r.g),
                    fmt_float(r.i_lab),
                    fmt_float(r.i_eff),
                    fmt_float(r.ratio),
                    r.converged.to_string(),
                    csv_field(&r.note),
                ];
                s.push_str(&fields.join(","));
                s.push('\n');
            }
            s.into_bytes()
        }
    }
}

pub fn render_convergence(report: &ConvergenceReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(report).expect("report serializes")).into_bytes(),
        Format::Csv => {
            let mut header = vec!["index".to_string(), "g".to_string()];
            header.extend(report.cutoffs.iter().map(|n| format!("I_omega_omega@{n}")));
            header.extend(report.cutoffs.windows(2).map(|w| format!("rel_change@{}", w[1])));
            header.extend(["converged".to_string(), "required_n_max".to_string()]);
            let mut s = format!("{}\n", header.join(","));
            for p in &report.points {
                let mut fields = vec![p.index.to_string(), fmt_float(p.g)];
                fields.extend(p.qfi.iter().copied().map(fmt_float));
                fields.extend(p.relative_changes.iter().copied().map(fmt_float));
                fields.push(p.converged.to_string());
                fields.push(p.required_n_max.map(|n| n.to_string()).unwrap_or_default());
                s.push_str(&fields.join(","));
                s.push('\n');
            }
            s.into_bytes()
        }
    }
}

fn flagged_status(flagged: usize, total: usize) -> u8 {
    if flagged > 0 {
        eprintln!("{flagged} of {total} rows flagged");
        EXIT_FLAGGED
    } else {
        0
    }
}

fn sweep_like_grid(args: &SpecArgs, param: &str, values: Vec<f64>) -> SpecArgs {
    SpecArgs { param: Some(param.into()), values: Some(values), ..args.clone() }
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Sweep { spec: args, peak } => {
            let cfg = load_config(&args)?;
            let spec = build_spec(&args, &cfg)?;
            let out = Output::resolve(&args, &cfg)?;
            let rows = run_sweep(&spec).map_err(|e| anyhow!(e))?;
            out.write(&render_rows(&rows, out.format))?;
            if peak {
                match peak_locate_rows(&rows) {
                    Ok(g) => eprintln!("g_star = {}", fmt_float(g)),
                    Err(e) => eprintln!("no interior peak: {e}"),
                }
            }
            Ok(flagged_status(rows.iter().filter(|r| r.is_flagged()).count(), rows.len()))
        }
        Command::GammaCompare { spec: args, g, gammas } => {
            let cfg = load_config(&args)?;
            let g = g.or(cfg.gamma_compare.g).ok_or_else(|| anyhow!("missing --g"))?;
            let gammas = gammas.or_else(|| cfg.gamma_compare.gammas.clone()).unwrap_or_else(|| vec![1.0 / 3.0, 0.5, 1.0, 2.0, 3.0]);
            let spec = build_spec(&sweep_like_grid(&args, "gamma", gammas.clone()), &cfg)?;
            let out = Output::resolve(&args, &cfg)?;
            let table = gamma_comparison(&spec, g, &gammas).map_err(|e| anyhow!(e))?;
            out.write(&render_rows(&table.rows, out.format))?;
            eprintln!("strictly increasing in gamma: {}", table.strictly_increasing());
            if let Some(d) = table.reciprocal_defect() {
                eprintln!("max |I(gamma) - I(1/gamma)|: {}", fmt_float(d));
            }
            Ok(flagged_status(table.rows.iter().filter(|r| r.is_flagged()).count(), table.rows.len()))
        }
        Command::RatioScan { spec: args, js, gammas, etas, g, reference, reference_nmax } => {
            let cfg = load_config(&args)?;
            let r = &cfg.ratio_scan;
            let list = |flag: Option<Vec<f64>>, file: &Option<Vec<f64>>, name: &str| flag.or_else(|| file.clone()).ok_or_else(|| anyhow!("missing --{name}"));
            let mut scan = RatioScan::new(
                list(js, &r.js, "js")?,
                list(gammas, &r.gammas, "gammas")?,
                list(etas, &r.etas, "etas")?,
                g.or(r.g).unwrap_or(0.99),
            );
            if let Some(n) = args.nmax.or(cfg.truncation.n_max) {
                scan.lab_truncation = TruncationSpec::with_n_max(n);
            }
            if let Some(m) = args.method.as_deref().or(r.lab_method.as_deref()) {
                scan.lab_method = parse(m)?;
            }
            if let Some(m) = reference.as_deref().or(r.reference.as_deref()) {
                scan.reference = parse(m)?;
            }
            if let Some(n) = reference_nmax.or(r.reference_n_max) {
                scan.reference_truncation = TruncationSpec::with_n_max(n);
            }
            if let Some(c) = args.convention.as_deref().or(cfg.sweep.convention.as_deref()) {
                scan.convention = parse(c)?;
            }
            if let Some(w) = args.omega.or(cfg.base.omega) {
                scan.omega = w;
            }
            scan.workers = args.workers.or(cfg.sweep.workers).unwrap_or(1);
            let out = Output::resolve(&args, &cfg)?;
            let rows = ratio_scan(&scan).map_err(|e| anyhow!(e))?;
            out.write(&render_ratios(&rows, out.format))?;
            Ok(flagged_status(rows.iter().filter(|r| !r.converged).count(), rows.len()))
        }
        Command::Converge { spec: args, cutoffs } => {
            let cfg = load_config(&args)?;
            let cutoffs = cutoffs.or_else(|| cfg.converge.cutoffs.clone()).ok_or_else(|| anyhow!("missing --cutoffs"))?;
            let spec = build_spec(&args, &cfg)?;
            let out = Output::resolve(&args, &cfg)?;
            let report = convergence_scan(&spec, &cutoffs).map_err(|e| anyhow!(e))?;
            out.write(&render_convergence(&report, out.format))?;
            Ok(flagged_status(report.points.iter().filter(|p| !p.converged).count(), report.points.len()))
        }
    }
}
