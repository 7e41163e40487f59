//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or numeric failure, 2 usage, 3 failed
//! verification.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytics::{kp_mean_sq_position, kp_tangent_correlation};
use crate::chain::{sample_frc, FrcConfig};
use crate::error::{invalid, Error, Result};
use crate::estimators::ensemble::path_rng;
use crate::estimators::report::{read_reports_csv, write_reports_csv, ComparisonReport, ReportRow};
use crate::estimators::suites::{
    convergence_table, default_grid_points, hard_rod_diagnostics, kp_oracle_suite,
    random_coil_diagnostics, with_rerun, RunOptions,
};
use crate::estimators::DEFAULT_THRESHOLD;
use crate::format::fmt_f64;
use crate::kp::{simulate_kp, KpConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

pub const WORKERS_ENV: &str = "WORMCHAIN_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "wormchain", version, about = "Freely rotating chain and Kratky-Porod polymer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample one freely rotating chain and write its beads as CSV.
    SimulateFrc(SimulateFrcArgs),
    /// Integrate one Kratky-Porod path and write tangents and positions as CSV.
    SimulateKp(SimulateKpArgs),
    /// Run Monte Carlo verification suites against closed forms.
    Verify(VerifyArgs),
    /// Convert a report or path CSV into long-format plot data.
    Plotdata(PlotdataArgs),
}

#[derive(Debug, Args)]
struct SimulateFrcArgs {
    #[arg(long)]
    n_bonds: usize,
    #[arg(long, requires = "bond_angle", conflicts_with_all = ["contour_length", "kappa"])]
    bond_length: Option<f64>,
    /// Bond angle in radians.
    #[arg(long, requires = "bond_length")]
    bond_angle: Option<f64>,
    #[arg(long, requires = "kappa")]
    contour_length: Option<f64>,
    #[arg(long, requires = "contour_length")]
    kappa: Option<f64>,
    #[arg(long)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the torsion angle of each bead.
    #[arg(long)]
    with_phi: bool,
}

#[derive(Debug, Args)]
struct SimulateKpArgs {
    #[arg(long)]
    contour_length: f64,
    #[arg(long)]
    ell_p: f64,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Correlation,
    Msd,
    Converge,
    HardRod,
    RandomCoil,
    All,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Correlation,
        Suite::Msd,
        Suite::Converge,
        Suite::HardRod,
        Suite::RandomCoil,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Correlation => "correlation",
            Suite::Msd => "msd",
            Suite::Converge => "converge",
            Suite::HardRod => "hard-rod",
            Suite::RandomCoil => "random-coil",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Option<Suite>,
    #[arg(long)]
    n_paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    contour_length: Option<f64>,
    #[arg(long)]
    ell_p: Option<f64>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Chain sizes for the convergence table, comma separated.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Arclengths for the limit diagnostics, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid_points: Option<Vec<f64>>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// `key = value` file, or a summary.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct PlotdataArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary JSON supplying `ell_p` for oracle curves.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    ell_p: Option<f64>,
    /// Number of points on each oracle curve.
    #[arg(long, default_value_t = 101)]
    oracle_points: usize,
}

/// Settings of a verification run. Every field is optional so that a
/// config file and command-line flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contour_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| invalid(format!("bad value for {key}: {value:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| parse_value(key, v))
        .collect()
}

impl VerifySettings {
    /// Sets one field from its textual form; `_` and `-` are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        match key.as_str() {
            "suite" => {
                self.suite = Some(
                    Suite::from_str(value.trim(), true)
                        .map_err(|_| invalid(format!("unknown suite {value:?}")))?,
                )
            }
            "n-paths" => self.n_paths = Some(parse_value(&key, value)?),
            "seed" => self.seed = Some(parse_value(&key, value)?),
            "contour-length" => self.contour_length = Some(parse_value(&key, value)?),
            "ell-p" => self.ell_p = Some(parse_value(&key, value)?),
            "n-steps" => self.n_steps = Some(parse_value(&key, value)?),
            "kappa" => self.kappa = Some(parse_value(&key, value)?),
            "n-list" => self.n_list = Some(parse_list(&key, value)?),
            "grid-points" => self.grid_points = Some(parse_list(&key, value)?),
            "threshold" => self.threshold = Some(parse_value(&key, value)?),
            "workers" => self.workers = Some(parse_value(&key, value)?),
            _ => return Err(invalid(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Reads `key = value` lines (`#` starts a comment), or the `config`
    /// object of a JSON run summary.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = VerifySettings::default();
        if text.trim_start().starts_with('{') {
            let doc: serde_json::Value = serde_json::from_str(text)?;
            let config = doc
                .get("config")
                .and_then(|c| c.as_object())
                .ok_or_else(|| invalid("summary has no config object"))?;
            for (key, value) in config {
                out.set(key, &json_to_text(value))?;
            }
            return Ok(out);
        }
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("config line {}: expected key = value", lineno + 1)))?;
            out.set(key, value)?;
        }
        Ok(out)
    }

    /// Fields of `other` that are set replace those of `self`.
    pub fn overlay(self, other: VerifySettings) -> VerifySettings {
        VerifySettings {
            suite: other.suite.or(self.suite),
            n_paths: other.n_paths.or(self.n_paths),
            seed: other.seed.or(self.seed),
            contour_length: other.contour_length.or(self.contour_length),
            ell_p: other.ell_p.or(self.ell_p),
            n_steps: other.n_steps.or(self.n_steps),
            kappa: other.kappa.or(self.kappa),
            n_list: other.n_list.or(self.n_list),
            grid_points: other.grid_points.or(self.grid_points),
            threshold: other.threshold.or(self.threshold),
            workers: other.workers.or(self.workers),
        }
    }
}

fn json_to_text(value: &serde_json::Value) -> String {
    match value {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Array(items) => items.iter().map(json_to_text).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

impl From<&VerifyArgs> for VerifySettings {
    fn from(a: &VerifyArgs) -> Self {
        VerifySettings {
            suite: a.suite,
            n_paths: a.n_paths,
            seed: a.seed,
            contour_length: a.contour_length,
            ell_p: a.ell_p,
            n_steps: a.n_steps,
            kappa: a.kappa,
            n_list: a.n_list.clone(),
            grid_points: a.grid_points.clone(),
            threshold: a.threshold,
            workers: a.workers,
        }
    }
}

/// Fully resolved parameters of one suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteParams {
    pub suite: Suite,
    pub contour_length: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<Vec<f64>>,
    pub n_paths: usize,
}

impl SuiteParams {
    /// Defaults of `suite` with any settings applied on top.
    pub fn resolve(suite: Suite, s: &VerifySettings) -> SuiteParams {
        let length = s.contour_length.unwrap_or(1.0);
        let base = SuiteParams {
            suite,
            contour_length: length,
            ell_p: None,
            n_steps: None,
            kappa: None,
            n_list: None,
            grid_points: None,
            n_paths: 10_000,
        };
        let p = match suite {
            Suite::Correlation | Suite::Msd => SuiteParams {
                ell_p: Some(s.ell_p.unwrap_or(1.0)),
                n_steps: s.n_steps,
                ..base
            },
            Suite::Converge => SuiteParams {
                kappa: Some(s.kappa.unwrap_or(std::f64::consts::SQRT_2)),
                n_list: Some(s.n_list.clone().unwrap_or_else(|| vec![100, 1_000, 10_000])),
                ..base
            },
            Suite::HardRod => SuiteParams {
                ell_p: Some(s.ell_p.unwrap_or(1e4)),
                n_steps: s.n_steps,
                grid_points: Some(s.grid_points.clone().unwrap_or_else(|| default_grid_points(length))),
                ..base
            },
            Suite::RandomCoil => SuiteParams {
                ell_p: Some(s.ell_p.unwrap_or(1e-3)),
                n_steps: s.n_steps,
                grid_points: Some(s.grid_points.clone().unwrap_or_else(|| default_grid_points(length))),
                n_paths: 1_000,
                ..base
            },
            Suite::All => base,
        };
        SuiteParams {
            n_paths: s.n_paths.unwrap_or(p.n_paths),
            ..p
        }
    }

    fn run(&self, opts: &RunOptions) -> Result<Vec<ComparisonReport>> {
        let ell_p = || self.ell_p.ok_or_else(|| invalid("missing ell_p"));
        let grid = || self.grid_points.clone().unwrap_or_default();
        match self.suite {
            Suite::Correlation | Suite::Msd => {
                let cfg = KpConfig::new(self.contour_length, ell_p()?, self.n_steps)?;
                let (corr, msd) = kp_oracle_suite(&cfg, opts)?;
                Ok(if self.suite == Suite::Correlation { corr } else { msd })
            }
            Suite::Converge => convergence_table(
                self.contour_length,
                self.kappa.ok_or_else(|| invalid("missing kappa"))?,
                self.n_list.as_deref().unwrap_or_default(),
                opts,
            ),
            Suite::HardRod => hard_rod_diagnostics(ell_p()?, self.contour_length, self.n_steps, &grid(), opts),
            Suite::RandomCoil => {
                random_coil_diagnostics(ell_p()?, self.contour_length, self.n_steps, &grid(), opts)
            }
            Suite::All => Err(invalid("`all` is not a single suite")),
        }
    }
}

#[derive(Debug, Serialize)]
struct SuiteRecord {
    #[serde(flatten)]
    params: SuiteParams,
    seed_used: u64,
    attempts: u32,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    config: &'a VerifySettings,
    seed: u64,
    n_paths: Option<usize>,
    suites: Vec<SuiteRecord>,
    reports: Vec<ComparisonReport>,
    wall_time_s: f64,
}

fn usage(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn exit_code(err: &Error) -> i32 {
    eprintln!("error: {err}");
    match err {
        Error::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_IO,
    }
}

/// Parses `args` (program name first) and runs the selected subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::SimulateFrc(a) => cmd_simulate_frc(&a),
        Command::SimulateKp(a) => cmd_simulate_kp(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Plotdata(a) => cmd_plotdata(&a),
    };
    outcome.unwrap_or_else(|e| exit_code(&e))
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_simulate_frc(a: &SimulateFrcArgs) -> Result<i32> {
    let cfg = match (a.bond_length, a.bond_angle, a.contour_length, a.kappa) {
        (Some(len), Some(angle), None, None) => FrcConfig::raw(a.n_bonds, len, angle)?,
        (None, None, Some(l), Some(k)) => FrcConfig::scaled(a.n_bonds, l, k)?,
        _ => {
            return Ok(usage(
                "give either --bond-length and --bond-angle, or --contour-length and --kappa",
            ))
        }
    };
    let chain = sample_frc(&cfg, &mut path_rng(a.seed, 0))?;
    let mut out = open_out(a.out.as_deref())?;
    chain.write_csv(&mut out, a.with_phi)?;
    out.flush()?;
    Ok(EXIT_OK)
}

fn cmd_simulate_kp(a: &SimulateKpArgs) -> Result<i32> {
    let cfg = KpConfig::new(a.contour_length, a.ell_p, a.n_steps)?;
    let path = simulate_kp(&cfg, &mut path_rng(a.seed, 0))?;
    let mut out = open_out(a.out.as_deref())?;
    path.write_csv(&mut out)?;
    out.flush()?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let start = Instant::now();
    let file = match &a.config {
        Some(path) => VerifySettings::parse(&fs::read_to_string(path)?)?,
        None => VerifySettings::default(),
    };
    let mut settings = file.overlay(VerifySettings::from(a));
    let Some(suite) = settings.suite else {
        return Ok(usage("--suite is required (flag or config file)"));
    };
    let seed = *settings.seed.get_or_insert(0);
    let threshold = settings.threshold.unwrap_or(DEFAULT_THRESHOLD);
    if threshold.is_nan() || threshold <= 0.0 {
        return Ok(usage("--threshold must be positive"));
    }
    let suites: Vec<Suite> = if suite == Suite::All {
        Suite::ALL.to_vec()
    } else {
        vec![suite]
    };

    let mut records = Vec::new();
    let mut reports = Vec::new();
    for s in suites {
        let params = SuiteParams::resolve(s, &settings);
        log::info!("running suite {} with {} paths", s.name(), params.n_paths);
        let outcome = with_rerun(seed, |seed| {
            params.run(&RunOptions {
                n_paths: params.n_paths,
                seed,
                threshold,
                workers: settings.workers,
            })
        })?;
        if outcome.attempts > 1 {
            log::warn!("suite {} failed with seed {seed}; reran with {}", s.name(), outcome.seed_used);
        }
        records.push(SuiteRecord {
            params,
            seed_used: outcome.seed_used,
            attempts: outcome.attempts,
            passed: outcome.passed(),
        });
        reports.extend(outcome.reports);
    }

    fs::create_dir_all(&a.out_dir)?;
    let mut csv_out = BufWriter::new(File::create(a.out_dir.join("report.csv"))?);
    write_reports_csv(&mut csv_out, &reports)?;
    csv_out.flush()?;

    let passed = records.iter().all(|r| r.passed);
    let n_paths = match records.as_slice() {
        [one] => Some(one.params.n_paths),
        _ => settings.n_paths,
    };
    let summary = RunSummary {
        config: &settings,
        seed,
        n_paths,
        suites: records,
        reports,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let mut json = BufWriter::new(File::create(a.out_dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut json, &summary)?;
    json.write_all(b"\n")?;
    json.flush()?;

    for r in summary.reports.iter().filter(|r| !r.pass) {
        eprintln!("FAIL {} s={:?} t={:?} estimate={} oracle={} z={}", r.observable, r.s, r.t, r.estimate, r.oracle, r.z);
    }
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY })
}

/// One row of long-format plot data.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl PlotPoint {
    fn exact(series: impl Into<String>, x: f64, y: f64) -> Self {
        PlotPoint {
            series: series.into(),
            x,
            y,
            y_lo: y,
            y_hi: y,
        }
    }

    /// `y ∓ 2·stderr` band.
    fn band(series: impl Into<String>, x: f64, y: f64, stderr: f64) -> Self {
        PlotPoint {
            series: series.into(),
            x,
            y,
            y_lo: y - 2.0 * stderr,
            y_hi: y + 2.0 * stderr,
        }
    }
}

/// Splits `name[N=100]` into `("name", Some(100))`.
fn split_tag(observable: &str) -> (&str, Option<f64>) {
    if let Some((base, rest)) = observable.split_once("[N=") {
        if let Some(n) = rest.strip_suffix(']').and_then(|n| n.parse().ok()) {
            return (base, Some(n));
        }
    }
    (observable, None)
}

/// Persistence length implied by an exponential correlation oracle row.
fn infer_ell_p(rows: &[ReportRow]) -> Option<f64> {
    rows.iter()
        .filter(|r| r.observable == "tangent_correlation")
        .find_map(|r| {
            let lag = (r.t? - r.s?).abs();
            (lag > 0.0 && r.oracle > 0.0 && r.oracle < 1.0).then(|| -2.0 * lag / r.oracle.ln())
        })
}

fn oracle_grid(max: f64, points: usize) -> Vec<f64> {
    let m = points.max(2);
    (0..m).map(|k| max * k as f64 / (m - 1) as f64).collect()
}

/// Plot data for a report: measured points with `±2·stderr` bands, oracle
/// curves for the correlation and mean-square-position rows, and
/// N-indexed rows of the convergence table.
pub fn report_plot_points(rows: &[ReportRow], ell_p: Option<f64>, oracle_points: usize) -> Vec<PlotPoint> {
    let mut out = Vec::new();
    let mut corr_max = 0.0f64;
    let mut msd_max = 0.0f64;
    for r in rows {
        match (r.observable.as_str(), split_tag(&r.observable)) {
            ("tangent_correlation", _) => {
                let lag = (r.t.unwrap_or(0.0) - r.s.unwrap_or(0.0)).abs();
                corr_max = corr_max.max(lag);
                out.push(PlotPoint::band("correlation", lag, r.estimate, r.stderr));
            }
            ("mean_sq_position", _) => {
                let t = r.t.unwrap_or(0.0);
                msd_max = msd_max.max(t);
                out.push(PlotPoint::band("msd", t, r.estimate, r.stderr));
            }
            (_, (base, Some(n))) => {
                if base.starts_with("gap_") {
                    out.push(PlotPoint::exact(base, n, r.estimate));
                } else if base.starts_with("frc_") {
                    out.push(PlotPoint::band(base, n, r.estimate, r.stderr));
                    out.push(PlotPoint::exact(format!("{base}_oracle"), n, r.oracle));
                }
            }
            (name, (_, None)) => {
                let x = r.t.unwrap_or(0.0);
                out.push(PlotPoint::band(name, x, r.estimate, r.stderr));
                out.push(PlotPoint::exact(format!("{name}_oracle"), x, r.oracle));
            }
        }
    }
    let ell_p = ell_p.or_else(|| infer_ell_p(rows));
    if let Some(ell_p) = ell_p {
        if corr_max > 0.0 {
            for x in oracle_grid(corr_max, oracle_points) {
                out.push(PlotPoint::exact("correlation_oracle", x, kp_tangent_correlation(ell_p, 0.0, x)));
            }
        }
        if msd_max > 0.0 {
            for x in oracle_grid(msd_max, oracle_points) {
                out.push(PlotPoint::exact("msd_oracle", x, kp_mean_sq_position(ell_p, x)));
            }
        }
    }
    out
}

fn write_plot_points<W: Write>(out: W, points: &[PlotPoint]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["series", "x", "y", "y_lo", "y_hi"])?;
    for p in points {
        w.write_record([
            p.series.clone(),
            fmt_f64(p.x),
            fmt_f64(p.y),
            fmt_f64(p.y_lo),
            fmt_f64(p.y_hi),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Each column after the first becomes a series over the first column.
fn path_plot_points(text: &str) -> Result<Vec<PlotPoint>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let x: f64 = parse_value(&header[0], &rec[0])?;
        for (name, field) in header.iter().zip(rec.iter()).skip(1) {
            out.push(PlotPoint::exact(name, x, parse_value(name, field)?));
        }
    }
    Ok(out)
}

fn summary_ell_p(path: &Path) -> Result<Option<f64>> {
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let from_config = doc.pointer("/config/ell_p").and_then(|v| v.as_f64());
    let from_suite = doc
        .get("suites")
        .and_then(|s| s.as_array())
        .and_then(|s| s.iter().find_map(|r| r.get("ell_p").and_then(|v| v.as_f64())));
    Ok(from_config.or(from_suite))
}

fn cmd_plotdata(a: &PlotdataArgs) -> Result<i32> {
    let text = fs::read_to_string(&a.input)?;
    let first = text.lines().next().unwrap_or("");
    let points = if first.starts_with("observable,") {
        let rows = read_reports_csv(text.as_bytes())?;
        let ell_p = match (a.ell_p, &a.summary) {
            (Some(x), _) => Some(x),
            (None, Some(path)) => summary_ell_p(path)?,
            (None, None) => None,
        };
        report_plot_points(&rows, ell_p, a.oracle_points)
    } else if first.is_empty() {
        Vec::new()
    } else {
        path_plot_points(&text)?
    };
    let mut out = open_out(a.out.as_deref())?;
    write_plot_points(&mut out, &points)?;
    out.flush()?;
    Ok(EXIT_OK)
}
