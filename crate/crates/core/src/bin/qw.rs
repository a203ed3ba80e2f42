use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use qw_core::certify::{classify, default_grid, CertificateDocument, SeesawConfig};
use qw_core::io::{certificate_from_json, certificate_to_json, write_witness, MatrixFormat};
use qw_core::lp::{c_gamma_min_analytic, c_gamma_min_lp, r_from_c};
use qw_core::states::{ppt_threshold_analytic, ppt_threshold_numeric};
use qw_core::witness::ChoiParams;
use qw_core::{ChoiType, Error};

const EXIT_USAGE: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;
const EXIT_CAP: u8 = 4;

#[derive(Parser)]
#[command(name = "qw", version, about = "Bell-diagonal Choi witnesses: build, classify, thresholds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TypeArg {
    First,
    Second,
}

impl From<TypeArg> for ChoiType {
    fn from(t: TypeArg) -> Self {
        match t {
            TypeArg::First => ChoiType::First,
            TypeArg::Second => ChoiType::Second,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    TextMatrix,
}

impl From<FormatArg> for MatrixFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => MatrixFormat::Json,
            FormatArg::Csv => MatrixFormat::Csv,
            FormatArg::TextMatrix => MatrixFormat::TextMatrix,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RcMethod {
    Analytic,
    Lp,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ThresholdMethod {
    Analytic,
    Numeric,
    Both,
}

#[derive(Args, Clone)]
struct SeesawArgs {
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 200)]
    iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    conv_tol: f64,
    /// Divisions per axis of the PPT probe grid (default depends on d).
    #[arg(long)]
    grid: Option<usize>,
}

impl SeesawArgs {
    fn config(&self) -> Result<SeesawConfig, Error> {
        SeesawConfig::new(self.restarts, self.iters, self.conv_tol, self.seed)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a witness matrix.
    Build {
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Vec<f64>,
        #[arg(long = "type", value_enum, default_value = "first")]
        kind: TypeArg,
        /// Omit the 1/(d(Σa-1)) prefactor.
        #[arg(long)]
        unnormalized: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a witness and print its certificate, or re-check one.
    Classify {
        #[arg(long, required_unless_present = "verify")]
        d: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required_unless_present = "verify")]
        a: Vec<f64>,
        #[arg(long = "type", value_enum, default_value = "first")]
        kind: TypeArg,
        #[command(flatten)]
        seesaw: SeesawArgs,
        /// Verify a certificate file instead of classifying.
        #[arg(long, conflicts_with_all = ["d", "a"])]
        verify: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimal aggregated overlap and the critical mixing parameter.
    Rc {
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Vec<f64>,
        #[arg(long = "type", value_enum, default_value = "first")]
        kind: TypeArg,
        #[arg(long, value_enum, default_value = "both")]
        method: RcMethod,
    },
    /// Largest p keeping the probe family PPT.
    PptThreshold {
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        mu: Vec<f64>,
        #[arg(long = "type", value_enum, default_value = "first")]
        kind: TypeArg,
        #[arg(long, value_enum, default_value = "both")]
        method: ThresholdMethod,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Classify every point of a coefficient grid and write CSV.
    ///
    /// Axes are given as `--a0 lo:hi:step` (or a single value) for each
    /// coefficient.
    Scan {
        #[arg(long)]
        d: usize,
        #[arg(long = "type", value_enum, default_value = "first")]
        kind: TypeArg,
        /// `K=spec` for coefficient K; written as `--aK spec` on the command line.
        #[arg(long = "axis", hide = true)]
        axes: Vec<String>,
        #[command(flatten)]
        seesaw: SeesawArgs,
        /// Largest number of grid points accepted.
        #[arg(long, default_value_t = 20_000)]
        max_points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DegenerateParameters(_) => EXIT_DEGENERATE,
            Error::InvalidParameters(_) | Error::UnsupportedDimension(_) | Error::Normalization(_) => EXIT_USAGE,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<qw_core::io::IoError> for Failure {
    fn from(e: qw_core::io::IoError) -> Self {
        match e {
            qw_core::io::IoError::Model(inner) => inner.into(),
            other => Self {
                code: 1,
                message: other.to_string(),
            },
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self {
            code: 1,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn params(d: usize, a: Vec<f64>, kind: TypeArg, normalized: bool) -> Result<ChoiParams, Failure> {
    if a.len() != d {
        return Err(Failure::usage(format!("--a needs {d} comma-separated values, got {}", a.len())));
    }
    Ok(ChoiParams::new(d, a, kind.into(), normalized)?)
}

fn sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(io::BufWriter::new(fs::File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_build(
    d: usize,
    a: Vec<f64>,
    kind: TypeArg,
    unnormalized: bool,
    format: FormatArg,
    out: Option<PathBuf>,
) -> CmdResult {
    let p = params(d, a, kind, !unnormalized)?;
    let mut w = sink(&out)?;
    write_witness(&p, format.into(), &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_classify(
    d: Option<usize>,
    a: Vec<f64>,
    kind: TypeArg,
    seesaw: SeesawArgs,
    verify: Option<PathBuf>,
    out: Option<PathBuf>,
) -> CmdResult {
    if let Some(path) = verify {
        let doc = certificate_from_json(&fs::read_to_string(&path)?)?;
        return match doc.verify() {
            Ok(()) => {
                println!("verified: {}", doc.certificate.verdict());
                Ok(())
            }
            Err(e) => Err(Failure {
                code: 1,
                message: format!("verification failed: {e}"),
            }),
        };
    }
    let d = d.ok_or_else(|| Failure::usage("--d is required"))?;
    let p = params(d, a, kind, false)?;
    let grid = seesaw.grid.unwrap_or_else(|| default_grid(d));
    let cert = classify(&p, &seesaw.config()?, grid)?;
    let mut w = sink(&out)?;
    writeln!(w, "{}", certificate_to_json(&CertificateDocument::new(&p, cert))?)?;
    w.flush()?;
    Ok(())
}

fn cmd_rc(d: usize, a: Vec<f64>, kind: TypeArg, method: RcMethod) -> CmdResult {
    let p = params(d, a, kind, false)?;
    let mut report = Vec::new();
    let analytic = match method {
        RcMethod::Analytic | RcMethod::Both => {
            let c = c_gamma_min_analytic(&p)?;
            let r = r_from_c(d, c)?;
            report.push(format!("c_gamma_min_analytic: {c}"));
            report.push(format!("r_c_analytic: {r}"));
            Some(r)
        }
        RcMethod::Lp => None,
    };
    let lp = match method {
        RcMethod::Lp | RcMethod::Both => {
            let (c, argmin) = c_gamma_min_lp(&p)?;
            let r = r_from_c(d, c)?;
            let arg: Vec<String> = argmin.p.iter().map(|x| x.to_string()).collect();
            report.push(format!("c_gamma_min_lp: {c}"));
            report.push(format!("argmin_lp: {}", arg.join(",")));
            report.push(format!("r_c_lp: {r}"));
            Some(r)
        }
        RcMethod::Analytic => None,
    };
    if let (Some(x), Some(y)) = (analytic, lp) {
        report.push(format!("discrepancy: {}", (x - y).abs()));
    }
    if let Ok(r) = p.witness_r() {
        let r_c = lp.or(analytic).expect("one method ran");
        report.push(format!("witness_r: {r}"));
        report.push(format!("witness_r_ge_r_c: {}", r >= r_c - 1e-12));
    }
    println!("{}", report.join("\n"));
    Ok(())
}

fn cmd_ppt_threshold(d: usize, mu: Vec<f64>, kind: TypeArg, method: ThresholdMethod, tol: f64) -> CmdResult {
    if d < 2 || mu.len() != d - 1 {
        return Err(Failure::usage(format!(
            "--mu needs {} comma-separated weights",
            d.saturating_sub(1)
        )));
    }
    let total: f64 = mu.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Failure::usage(format!("--mu must sum to 1 within 1e-9, got {total}")));
    }
    let mu: Vec<f64> = mu.iter().map(|m| m / total).collect();
    if method != ThresholdMethod::Numeric {
        match ppt_threshold_analytic(d, &mu, kind.into()) {
            Ok(t) => println!("analytic: {t}"),
            Err(e @ Error::AnalyticUnavailable(_)) => println!("analytic: unavailable ({e})"),
            Err(e) => return Err(e.into()),
        }
    }
    if method != ThresholdMethod::Analytic {
        let est = ppt_threshold_numeric(d, &mu, kind.into(), tol)?;
        println!("numeric: {}", est.p);
        if !est.bracketed {
            println!("note: PPT on all of [0, 1]");
        }
    }
    Ok(())
}

/// `lo:hi:step` or a single value; the last point is kept when it lands on
/// `hi` within rounding.
fn parse_axis(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::usage(format!("bad axis spec {spec:?}, expected lo:hi:step or a value"));
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [lo, hi, step] => {
            let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
            if !(step > 0.0) || hi < lo {
                return Err(bad());
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| lo + i as f64 * step).collect())
        }
        _ => Err(bad()),
    }
}

fn cmd_scan(
    d: usize,
    kind: TypeArg,
    axes: Vec<String>,
    seesaw: SeesawArgs,
    max_points: usize,
    out: Option<PathBuf>,
) -> CmdResult {
    let mut values: Vec<Option<Vec<f64>>> = vec![None; d];
    for axis in &axes {
        let (k, spec) = axis
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("bad axis {axis:?}")))?;
        let k: usize = k.parse().map_err(|_| Failure::usage(format!("bad axis index {k:?}")))?;
        if k >= d {
            return Err(Failure::usage(format!("--a{k} out of range for d={d}")));
        }
        values[k] = Some(parse_axis(spec)?);
    }
    let values: Vec<Vec<f64>> = values
        .into_iter()
        .enumerate()
        .map(|(k, v)| v.ok_or_else(|| Failure::usage(format!("missing --a{k}"))))
        .collect::<Result<_, _>>()?;
    let total = values.iter().try_fold(1usize, |acc, v| acc.checked_mul(v.len()));
    let total = match total {
        Some(n) if n <= max_points => n,
        _ => {
            return Err(Failure {
                code: EXIT_CAP,
                message: format!("grid exceeds --max-points {max_points}"),
            })
        }
    };

    let points: Vec<Vec<f64>> = (0..total)
        .map(|mut idx| {
            let mut a = vec![0.0; d];
            for k in (0..d).rev() {
                a[k] = values[k][idx % values[k].len()];
                idx /= values[k].len();
            }
            a
        })
        .collect();
    let cfg = seesaw.config()?;
    let grid = seesaw.grid.unwrap_or_else(|| default_grid(d));
    let rows: Vec<Vec<String>> = points
        .into_par_iter()
        .map(|a| -> Result<Vec<String>, Failure> {
            let p = params(d, a.clone(), kind, false)?;
            let cert = classify(&p, &cfg, grid)?;
            let mut row: Vec<String> = a.iter().map(|x| x.to_string()).collect();
            row.push(cert.verdict().to_string());
            row.push(cert.margin()?.to_string());
            row.push(cert.summary());
            Ok(row)
        })
        .collect::<Result<_, _>>()?;

    let mut w = csv::Writer::from_writer(sink(&out)?);
    let mut header: Vec<String> = (0..d).map(|k| format!("a{k}")).collect();
    header.extend(["verdict", "margin", "payload"].map(String::from));
    w.write_record(&header).map_err(io::Error::from)?;
    for row in rows {
        w.write_record(&row).map_err(io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

/// Rewrites `--aK spec` / `--aK=spec` into `--axis K=spec`.
fn rewrite_axis_flags(args: impl Iterator<Item = String>) -> Vec<String> {
    let mut out = Vec::new();
    let mut args = args.peekable();
    while let Some(arg) = args.next() {
        let tail = arg.strip_prefix("--a").filter(|t| t.chars().next().is_some_and(|c| c.is_ascii_digit()));
        match tail {
            Some(t) => {
                let (k, inline) = match t.split_once('=') {
                    Some((k, v)) => (k.to_string(), Some(v.to_string())),
                    None => (t.to_string(), None),
                };
                if !k.chars().all(|c| c.is_ascii_digit()) {
                    out.push(arg);
                    continue;
                }
                let spec = inline.or_else(|| args.next()).unwrap_or_default();
                out.push("--axis".into());
                out.push(format!("{k}={spec}"));
            }
            None => out.push(arg),
        }
    }
    out
}

fn init_threads() {
    if let Some(n) = std::env::var("QW_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // Fails only if a pool was already built.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Build {
            d,
            a,
            kind,
            unnormalized,
            format,
            out,
        } => cmd_build(d, a, kind, unnormalized, format, out),
        Command::Classify {
            d,
            a,
            kind,
            seesaw,
            verify,
            out,
        } => cmd_classify(d, a, kind, seesaw, verify, out),
        Command::Rc { d, a, kind, method } => cmd_rc(d, a, kind, method),
        Command::PptThreshold {
            d,
            mu,
            kind,
            method,
            tol,
        } => cmd_ppt_threshold(d, mu, kind, method, tol),
        Command::Scan {
            d,
            kind,
            axes,
            seesaw,
            max_points,
            out,
        } => cmd_scan(d, kind, axes, seesaw, max_points, out),
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse_from(rewrite_axis_flags(std::env::args()));
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qw: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
