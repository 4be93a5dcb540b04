//! Command-line front end: simulate | filter | estimate | moments | density.

use crate::error::Error;
use crate::moments::{abs_y_moments, mm_estimate, sample_abs_moments, MmOptions, MomentSpec};
use crate::numerics::Tolerances;
use crate::ratpdf::{convolve, make_cauchy, make_scaled_t_odd, scale_rv, RationalPdf, RationalPdfJson};
use crate::sbt::truncate_to_tolerance;
use crate::sim::{simulate, SimConfig};
use crate::svfilter::{default_v_coeffs, Filter, FilterOptions, ScaledTConfig, SvModel};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub const RANK_TOL_ENV: &str = "RATVOL_RANK_TOL";

#[derive(Debug, Parser)]
#[command(name = "ratvol", version, about = "Rational densities and stochastic volatility filtering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a path and write CSV (t, x, y).
    Simulate(SimulateArgs),
    /// Run the filter on an observed series.
    Filter(FilterArgs),
    /// Method-of-moments estimate of (a, Ψ, σ).
    Estimate(EstimateArgs),
    /// Theoretical moments of |Y|.
    Moments(MomentsArgs),
    /// Build, evaluate, convolve or reduce a density stored as JSON.
    Density(DensityArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 2.0)]
    pub psi: f64,
    #[arg(long, default_value_t = 1.5)]
    pub sigma: f64,
    /// Degree of V(x) = (1 + x/(2d))^d + 0.1.
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long, default_value_t = 9)]
    pub n_w: u32,
    #[arg(long, default_value_t = 3)]
    pub n_u: u32,
    #[arg(long, default_value_t = 9)]
    pub n_x: u32,
}

impl ModelArgs {
    fn config(&self) -> ScaledTConfig {
        ScaledTConfig {
            a: self.a,
            psi: self.psi,
            sigma: self.sigma,
            d: self.d,
            n_w: self.n_w,
            n_u: self.n_u,
            n_x: self.n_x,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Series length.
    #[arg(short = 'T', long = "length", default_value_t = 100)]
    pub length: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    /// CSV with a `y` column, or an `s` column together with --prices.
    #[arg(long)]
    pub input: PathBuf,
    /// Read prices from column `s` and use log returns log(s_{t+1}/s_t).
    #[arg(long)]
    pub prices: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct FilterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Relative pdf error tolerance of the order reduction.
    #[arg(long, default_value_t = 0.02)]
    pub tau: f64,
    /// Keep full-order densities.
    #[arg(long)]
    pub no_reduction: bool,
    /// Per-step CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write predictive densities on a grid to this CSV (x, then one column per step).
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub grid_min: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub grid_max: f64,
    #[arg(long, default_value_t = 201)]
    pub grid_points: usize,
    /// Print one JSON line per truncation to stderr.
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 10)]
    pub lags: usize,
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long, default_value_t = 9)]
    pub n_w: u32,
    #[arg(long, default_value_t = 3)]
    pub n_u: u32,
    /// Starting values of a for the multi-start search.
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.85], allow_negative_numbers = true)]
    pub a_starts: Vec<f64>,
    /// Starting values of σ for the multi-start search.
    #[arg(long, value_delimiter = ',', default_values_t = [0.4, 1.2])]
    pub sigma_starts: Vec<f64>,
    /// JSON output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fitted vs sample autocorrelations of |y| (lag, sample, fitted).
    #[arg(long)]
    pub acf_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsArgs {
    #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub psi: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long, default_value_t = 9)]
    pub n_w: u32,
    #[arg(long, default_value_t = 3)]
    pub n_u: u32,
    #[arg(long, default_value_t = 10)]
    pub lags: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    #[command(subcommand)]
    pub action: DensityAction,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum DensityAction {
    /// Unit-variance Student t with odd degrees of freedom.
    T {
        #[arg(long)]
        df: u32,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cauchy density.
    Cauchy {
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        location: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the pdf at points or on a grid; CSV (x, pdf).
    Eval {
        #[arg(long)]
        pdf: PathBuf,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x: Vec<f64>,
        #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
        grid_min: f64,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        grid_max: f64,
        #[arg(long, default_value_t = 201)]
        grid_points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Density of the sum of two independent variables.
    Convolve {
        #[arg(long)]
        pdf: PathBuf,
        #[arg(long)]
        other: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Balanced truncation to a relative pdf error tolerance.
    Reduce {
        #[arg(long)]
        pdf: PathBuf,
        #[arg(long, default_value_t = 0.02)]
        tau: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Record written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub version: String,
    pub tolerances: Tolerances,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(s) => write!(f, "error: {s}"),
            CliError::Numeric(s) => write!(f, "numerical failure: {s}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let inner = match &e {
            Error::Step { source, .. } => source.as_ref(),
            other => other,
        };
        if inner.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Tolerances with the rank tolerance optionally taken from the environment.
pub fn tolerances() -> CliResult<Tolerances> {
    let mut tol = Tolerances::default();
    if let Ok(s) = std::env::var(RANK_TOL_ENV) {
        tol.rank = s
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| *v > 0.0 && *v < 1.0)
            .ok_or_else(|| CliError::Config(format!("{RANK_TOL_ENV}={s} is not a number in (0, 1)")))?;
    }
    Ok(tol)
}

/// Pretty JSON with sorted keys.
pub fn to_sorted_json<T: Serialize>(v: &T) -> String {
    // serde_json's default map is ordered by key
    let value = serde_json::to_value(v).expect("serializable");
    let mut s = serde_json::to_string_pretty(&value).expect("serializable");
    s.push('\n');
    s
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Config(e.to_string())),
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_manifest(
    subcommand: &str,
    config: &impl Serialize,
    seed: Option<u64>,
    inputs: &[&Path],
    outputs: &[&Path],
    tol: Tolerances,
) -> CliResult<()> {
    let Some(first) = outputs.first() else {
        return Ok(());
    };
    let m = RunManifest {
        subcommand: subcommand.into(),
        config: serde_json::to_value(config).expect("serializable"),
        seed,
        inputs: inputs.iter().map(|p| p.to_path_buf()).collect(),
        outputs: outputs.iter().map(|p| p.to_path_buf()).collect(),
        version: env!("CARGO_PKG_VERSION").into(),
        tolerances: tol,
    };
    let p = manifest_path(first);
    fs::write(&p, to_sorted_json(&m)).map_err(|e| io_err(&p, e))
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Config(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::Config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Reads the observation column of a CSV file.
pub fn read_series(args: &InputArgs) -> CliResult<Vec<f64>> {
    let path = &args.input;
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let col = if args.prices { "s" } else { "y" };
    let headers = rdr.headers().map_err(|e| io_err(path, e))?.clone();
    let idx = headers
        .iter()
        .position(|h| h.trim() == col)
        .ok_or_else(|| io_err(path, format!("no column `{col}`")))?;
    let mut vals = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let field = rec.get(idx).unwrap_or("").trim();
        let v: f64 = field
            .parse()
            .map_err(|_| io_err(path, format!("row {}: `{field}` is not a number", i + 1)))?;
        if !v.is_finite() {
            return Err(io_err(path, format!("row {}: non-finite value", i + 1)));
        }
        vals.push(v);
    }
    if args.prices {
        if vals.iter().any(|&s| !(s > 0.0)) {
            return Err(io_err(path, "prices must be positive"));
        }
        vals = vals.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    }
    if vals.is_empty() {
        return Err(io_err(path, "no observations"));
    }
    Ok(vals)
}

fn grid(min: f64, max: f64, points: usize) -> CliResult<Vec<f64>> {
    if points < 2 || !(max > min) {
        return Err(CliError::Config("grid needs max > min and at least 2 points".into()));
    }
    Ok((0..points)
        .map(|i| min + (max - min) * i as f64 / (points - 1) as f64)
        .collect())
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let cfg = SimConfig {
        a: args.model.a,
        psi: args.model.psi,
        sigma: args.model.sigma,
        d: args.model.d,
        n_w: args.model.n_w,
        n_u: args.model.n_u,
        n_x: args.model.n_x,
        t: args.length,
        seed: args.seed,
    };
    let path = simulate(&cfg)?;
    let rows = path
        .xs
        .iter()
        .zip(&path.ys)
        .enumerate()
        .map(|(i, (x, y))| vec![(i + 1).to_string(), x.to_string(), y.to_string()]);
    emit(args.out.as_deref(), &csv_string(&["t", "x", "y"], rows)?)?;
    let outs: Vec<&Path> = args.out.iter().map(|p| p.as_path()).collect();
    write_manifest("simulate", &cfg, Some(cfg.seed), &[], &outs, tolerances()?)
}

pub fn cmd_filter(args: &FilterArgs) -> CliResult<()> {
    let tol = tolerances()?;
    let ys = read_series(&args.input)?;
    let model = SvModel::scaled_t(&args.model.config())?;
    let grid_x = match &args.grid_out {
        Some(_) => Some(grid(args.grid_min, args.grid_max, args.grid_points)?),
        None => None,
    };
    let opts = FilterOptions {
        tau: if args.no_reduction { None } else { Some(args.tau) },
        tol,
        grid: grid_x.clone(),
        ..Default::default()
    };
    let filter = Filter::new(model, opts)?;
    let mut state = filter.init();
    let mut records = Vec::with_capacity(ys.len());
    for &y in &ys {
        let (next, rec) = filter.step(&state, y)?;
        if args.verbose {
            let line = json!({
                "t": rec.t,
                "n": rec.n_full,
                "m": rec.m_reduced,
                "c": rec.k_next / 2,
                "sigma_tail": rec.sigma.get(rec.m_reduced..).unwrap_or(&[]),
                "achieved_bound": rec.bound,
            });
            eprintln!("{line}");
        }
        records.push(rec);
        state = next;
    }
    let header = [
        "t", "y", "c_t", "loglik", "mean_x", "mean_v", "forecast_abs_y", "n_full", "m_reduced", "bound",
    ];
    let rows = records.iter().map(|r| {
        vec![
            r.t.to_string(),
            r.y.to_string(),
            r.c_t.to_string(),
            r.loglik.to_string(),
            fmt_opt(r.mean_x),
            fmt_opt(r.mean_v),
            fmt_opt(r.forecast_abs_y),
            r.n_full.to_string(),
            r.m_reduced.to_string(),
            r.bound.to_string(),
        ]
    });
    emit(args.out.as_deref(), &csv_string(&header, rows)?)?;
    if let (Some(path), Some(xs)) = (&args.grid_out, &grid_x) {
        let mut header = vec!["x".to_string()];
        header.extend(records.iter().map(|r| format!("t{}", r.t)));
        let href: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        let rows = xs.iter().enumerate().map(|(i, x)| {
            let mut row = vec![x.to_string()];
            row.extend(
                records
                    .iter()
                    .map(|r| r.pdf_grid.as_ref().map(|g| g[i].to_string()).unwrap_or_default()),
            );
            row
        });
        emit(Some(path), &csv_string(&href, rows)?)?;
    }
    let mut outs: Vec<&Path> = args.out.iter().map(|p| p.as_path()).collect();
    outs.extend(args.grid_out.iter().map(|p| p.as_path()));
    write_manifest("filter", args, None, &[&args.input.input], &outs, tol)
}

pub fn cmd_estimate(args: &EstimateArgs) -> CliResult<()> {
    let ys = read_series(&args.input)?;
    let base = MomentSpec::scaled_t(0.5, 1.0, 1.0, default_v_coeffs(args.d), args.n_w, args.n_u)?;
    let opts = MmOptions {
        a_starts: args.a_starts.clone(),
        sigma_starts: args.sigma_starts.clone(),
        ..Default::default()
    };
    let est = mm_estimate(&ys, args.lags, &base, &opts)?;
    emit(args.out.as_deref(), &to_sorted_json(&est))?;
    if let Some(path) = &args.acf_out {
        let sample = sample_abs_moments(&ys, args.lags);
        let fitted = abs_y_moments(&base.with_params(est.a_hat, est.psi_hat, est.sigma_hat), args.lags)?;
        let rows = (1..=args.lags).map(|k| vec![k.to_string(), sample.corr(k).to_string(), fitted.corr(k).to_string()]);
        emit(Some(path), &csv_string(&["lag", "sample", "fitted"], rows)?)?;
    }
    let mut outs: Vec<&Path> = args.out.iter().map(|p| p.as_path()).collect();
    outs.extend(args.acf_out.iter().map(|p| p.as_path()));
    write_manifest("estimate", args, None, &[&args.input.input], &outs, tolerances()?)
}

#[derive(Debug, Serialize)]
pub struct MomentsReport {
    pub a: f64,
    pub psi: f64,
    pub sigma: f64,
    pub mean_abs_y: f64,
    pub var_abs_y: f64,
    pub acov_abs_y: Vec<f64>,
    pub corr_abs_y: Vec<f64>,
}

pub fn moments_report(args: &MomentsArgs) -> crate::Result<MomentsReport> {
    let spec = MomentSpec::scaled_t(args.a, args.psi, args.sigma, default_v_coeffs(args.d), args.n_w, args.n_u)?;
    let m = abs_y_moments(&spec, args.lags)?;
    Ok(MomentsReport {
        a: args.a,
        psi: args.psi,
        sigma: args.sigma,
        mean_abs_y: m.mean,
        var_abs_y: m.var,
        corr_abs_y: (1..=args.lags).map(|k| m.corr(k)).collect(),
        acov_abs_y: m.acov,
    })
}

pub fn cmd_moments(args: &MomentsArgs) -> CliResult<()> {
    let report = moments_report(args)?;
    emit(args.out.as_deref(), &to_sorted_json(&report))?;
    let outs: Vec<&Path> = args.out.iter().map(|p| p.as_path()).collect();
    write_manifest("moments", args, None, &[], &outs, tolerances()?)
}

fn read_pdf(path: &Path) -> CliResult<RationalPdf> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let j: RationalPdfJson = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
    Ok(RationalPdf::from_json(&j)?)
}

fn write_pdf(out: Option<&Path>, pdf: &RationalPdf) -> CliResult<()> {
    emit(out, &to_sorted_json(&pdf.to_json()))
}

pub fn cmd_density(args: &DensityArgs) -> CliResult<()> {
    let tol = tolerances()?;
    let (inputs, out): (Vec<&Path>, Option<&Path>) = match &args.action {
        DensityAction::T { df, scale, out } => {
            let t = make_scaled_t_odd(*df)?;
            let z = scale_rv(t.summand(), *scale)?;
            write_pdf(out.as_deref(), &RationalPdf::with_codegree(z, t.codegree())?)?;
            (vec![], out.as_deref())
        }
        DensityAction::Cauchy { scale, location, out } => {
            write_pdf(out.as_deref(), &make_cauchy(*scale, *location)?)?;
            (vec![], out.as_deref())
        }
        DensityAction::Eval {
            pdf,
            x,
            grid_min,
            grid_max,
            grid_points,
            out,
        } => {
            let p = read_pdf(pdf)?;
            let xs = if x.is_empty() {
                grid(*grid_min, *grid_max, *grid_points)?
            } else {
                x.clone()
            };
            let ps = p.pdf_many(&xs, &tol)?;
            let rows: Vec<_> = xs.iter().zip(ps).map(|(x, v)| vec![x.to_string(), v.to_string()]).collect();
            emit(out.as_deref(), &csv_string(&["x", "pdf"], rows)?)?;
            (vec![pdf.as_path()], out.as_deref())
        }
        DensityAction::Convolve { pdf, other, out } => {
            let p = read_pdf(pdf)?;
            let q = read_pdf(other)?;
            let z = convolve(p.normalized().summand(), q.normalized().summand())?;
            let r = z.realization().minimal_reduce(tol.minimal)?;
            let z = crate::ratpdf::SpectralSummand::from_realization(r)?;
            let k = p.codegree().min(q.codegree());
            write_pdf(out.as_deref(), &RationalPdf::with_codegree(z, k)?.normalized())?;
            (vec![pdf.as_path(), other.as_path()], out.as_deref())
        }
        DensityAction::Reduce { pdf, tau, out } => {
            let p = read_pdf(pdf)?;
            let tr = truncate_to_tolerance(p.normalized().summand(), *tau, &tol)?;
            eprintln!("{}", serde_json::to_string(&tr.record()).expect("serializable"));
            let r = RationalPdf::with_codegree(tr.summand, p.codegree())?;
            write_pdf(out.as_deref(), &r.normalized())?;
            (vec![pdf.as_path()], out.as_deref())
        }
    };
    let outs: Vec<&Path> = out.into_iter().collect();
    write_manifest("density", args, None, &inputs, &outs, tol)
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Filter(a) => cmd_filter(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Moments(a) => cmd_moments(a),
        Command::Density(a) => cmd_density(a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
