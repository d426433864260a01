//! Command-line front end.
//!
//! ```text
//! maxblow space   --gen dyadic:10 --check --window 0.002:0.5:8
//! maxblow norm    --file s.txt --exponent const:2 --function f.csv
//! maxblow maximal --gen dyadic:8 --function f.csv --fast --out mf.csv
//! maxblow sweep   --gen dyadic:14 --exponent const:1 --k 1,2,4,8
//! ```
//!
//! Exit status: 0 on success, 1 on usage, parse or pipeline errors, 2 on
//! axiom or certificate failures (and when a sweep cannot verify growth).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::counterexample::{sweep, WitnessMode};
use crate::maximal::{maximal_function, maximal_function_interval};
use crate::numeric::fmt_num;
use crate::space::{
    doubling_certificate, gen_dyadic_interval, gen_grid_torus, gen_power_weight, load_space, verify_quasi_metric,
    RadiusWindow, SpaceDescriptor, SpaceError,
};
use crate::varlp::{luxemburg_norm, read_exponent_csv, read_function_csv, ExponentFunction, DEFAULT_TOL};

#[derive(Parser, Debug)]
#[command(name = "maxblow", version, about = "Maximal-operator blow-up on finite spaces of homogeneous type")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build or load a space and report its quasi-metric and doubling constants.
    Space {
        #[command(flatten)]
        source: SpaceSource,
        /// Verify the quasi-metric axioms and measure doubling constants.
        #[arg(long)]
        check: bool,
        /// `r_min:r_max` (dyadic grid) or `r_min:r_max:steps` (geometric grid).
        #[arg(long)]
        window: Option<String>,
    },
    /// Luxemburg norm of a function.
    Norm {
        #[command(flatten)]
        source: SpaceSource,
        /// Exponent: CSV file, `const:<v>` or `twopiece:<v1>,<v2>,<split>`.
        #[arg(long)]
        exponent: String,
        /// `point,value` CSV.
        #[arg(long)]
        function: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Exact maximal function as CSV.
    Maximal {
        #[command(flatten)]
        source: SpaceSource,
        #[arg(long)]
        function: PathBuf,
        /// Use the interval fast path (one-dimensional spaces only).
        #[arg(long)]
        fast: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Blow-up reports for a list of k.
    Sweep {
        #[command(flatten)]
        source: SpaceSource,
        #[arg(long)]
        exponent: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        k: Vec<u32>,
        /// Halving-closed window; defaults to a dyadic window from the
        /// resolution up to 1/2.
        #[arg(long)]
        window: Option<String>,
        #[arg(long, default_value = "density")]
        mode: WitnessMode,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct SpaceSource {
    /// `dyadic:<L>`, `power:<L>:<alpha>` or `torus:<dim>:<side>`.
    #[arg(long)]
    gen: Option<String>,
    /// Space file.
    #[arg(long)]
    file: Option<PathBuf>,
}

/// An error with its exit status.
#[derive(Debug)]
struct Failure {
    code: i32,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: 1, msg: msg.into() }
    }
}

impl From<SpaceError> for Failure {
    fn from(e: SpaceError) -> Self {
        Self { code: if e.is_axiom_violation() { 2 } else { 1 }, msg: e.to_string() }
    }
}

macro_rules! pipeline_error {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Self::usage(e.to_string())
            }
        }
    )*};
}

pipeline_error!(
    crate::varlp::VarLpError,
    crate::maximal::MaximalError,
    crate::counterexample::CounterexampleError,
    std::io::Error
);

type CmdResult = Result<i32, Failure>;

fn parse_num<T: std::str::FromStr>(tok: &str, what: &str) -> Result<T, Failure> {
    tok.trim().parse().map_err(|_| Failure::usage(format!("bad {what} `{tok}`")))
}

fn load(source: &SpaceSource) -> Result<SpaceDescriptor, Failure> {
    if let Some(path) = &source.file {
        return Ok(load_space(path)?);
    }
    let spec = source.gen.as_deref().unwrap_or_default();
    let parts: Vec<&str> = spec.split(':').collect();
    let space = match parts.as_slice() {
        ["dyadic", l] => gen_dyadic_interval(parse_num(l, "depth")?)?,
        ["power", l, a] => gen_power_weight(parse_num(l, "depth")?, parse_num(a, "alpha")?)?,
        ["torus", d, s] => gen_grid_torus(parse_num(d, "dimension")?, parse_num(s, "side")?)?,
        _ => return Err(Failure::usage(format!("unknown generator `{spec}`"))),
    };
    Ok(space)
}

fn parse_window(text: &str) -> Result<RadiusWindow, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let window = match parts.as_slice() {
        [lo, hi] => RadiusWindow::dyadic(parse_num(lo, "r_min")?, parse_num(hi, "r_max")?)?,
        [lo, hi, steps] => {
            RadiusWindow::geometric(parse_num(lo, "r_min")?, parse_num(hi, "r_max")?, parse_num(steps, "steps")?)?
        }
        _ => return Err(Failure::usage(format!("window `{text}` is not r_min:r_max[:steps]"))),
    };
    Ok(window)
}

/// Smallest nonzero distance.
fn resolution(space: &SpaceDescriptor) -> f64 {
    if let Some(order) = space.interval_order() {
        return order.coords.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    }
    let n = space.n();
    (0..n)
        .flat_map(|x| (0..n).filter(move |&y| y != x).map(move |y| (x, y)))
        .map(|(x, y)| space.dist(x, y))
        .fold(f64::INFINITY, f64::min)
}

/// Dyadic window from the first power of two at least four times the
/// resolution up to 1/2.
fn default_window(space: &SpaceDescriptor) -> Result<RadiusWindow, Failure> {
    let res = resolution(space);
    if !res.is_finite() {
        return Err(Failure::usage("a single-point space needs an explicit --window"));
    }
    let mut r_min = 0.5;
    while r_min * 0.5 >= 4.0 * res {
        r_min *= 0.5;
    }
    Ok(RadiusWindow::dyadic(r_min, 0.5)?)
}

fn exponent(spec: &str, space: &SpaceDescriptor) -> Result<ExponentFunction, Failure> {
    let n = space.n();
    if let Some(v) = spec.strip_prefix("const:") {
        let v: f64 = if v == "inf" { f64::INFINITY } else { parse_num(v, "exponent")? };
        return Ok(ExponentFunction::constant(n, v)?);
    }
    if let Some(rest) = spec.strip_prefix("twopiece:") {
        let parts: Vec<&str> = rest.split(',').collect();
        let [v1, v2, split] = parts.as_slice() else {
            return Err(Failure::usage(format!("`{spec}` is not twopiece:<v1>,<v2>,<split>")));
        };
        let (v1, v2, split): (f64, f64, f64) =
            (parse_num(v1, "exponent")?, parse_num(v2, "exponent")?, parse_num(split, "split")?);
        let labels = space.labels().ok_or_else(|| Failure::usage("twopiece needs point coordinates"))?;
        let values = (0..n).map(|x| if labels.point(x)[0] < split { v1 } else { v2 }).collect();
        return Ok(ExponentFunction::new(values)?);
    }
    Ok(read_exponent_csv(spec, n)?)
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn cmd_space(source: &SpaceSource, check: bool, window: Option<&str>, stdout: &mut dyn Write) -> CmdResult {
    let space = load(source)?;
    let window = window.map(parse_window).transpose()?;
    writeln!(stdout, "n={}", space.n())?;
    writeln!(stdout, "total_measure={}", fmt_num(space.total_measure()))?;
    let mut code = 0;
    if check {
        let q = verify_quasi_metric(&space)?;
        writeln!(stdout, "c0={}", fmt_num(q.c0))?;
        writeln!(stdout, "c1={}", fmt_num(q.c1))?;
        writeln!(stdout, "symmetric={}", q.symmetric)?;
    }
    if let Some(window) = window {
        let cert = doubling_certificate(&space, &window)?;
        writeln!(stdout, "window.r_min={}", fmt_num(window.r_min()))?;
        writeln!(stdout, "window.r_max={}", fmt_num(window.r_max()))?;
        writeln!(stdout, "window.steps={}", window.grid().len())?;
        writeln!(stdout, "a_const={}", fmt_num(cert.a_const))?;
        writeln!(stdout, "a_witness.point={}", cert.a_witness.0)?;
        writeln!(stdout, "a_witness.radius={}", fmt_num(cert.a_witness.1))?;
        writeln!(stdout, "delta_const={}", fmt_num(cert.delta_const))?;
        writeln!(stdout, "delta_witness.point={}", cert.delta_witness.0)?;
        writeln!(stdout, "delta_witness.radius={}", fmt_num(cert.delta_witness.1))?;
        writeln!(stdout, "reverse_doubling={}", cert.reverse_doubling)?;
        if check && !cert.reverse_doubling {
            code = 2;
        }
    }
    Ok(code)
}

fn cmd_norm(source: &SpaceSource, exp: &str, function: &Path, tol: f64, stdout: &mut dyn Write) -> CmdResult {
    let space = load(source)?;
    let p = exponent(exp, &space)?;
    let f = read_function_csv(function, space.n())?;
    let result = luxemburg_norm(&space, &p, &f, tol)?;
    writeln!(stdout, "{}", result.record())?;
    Ok(0)
}

fn cmd_maximal(
    source: &SpaceSource,
    function: &Path,
    fast: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> CmdResult {
    let space = load(source)?;
    let f = read_function_csv(function, space.n())?;
    let result = if fast { maximal_function_interval(&space, &f)? } else { maximal_function(&space, &f)? };
    emit(&result.to_csv(&f), out, stdout)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    source: &SpaceSource,
    exp: &str,
    k: &[u32],
    window: Option<&str>,
    mode: WitnessMode,
    tol: f64,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CmdResult {
    let space = load(source)?;
    let p = exponent(exp, &space)?;
    let window = match window {
        Some(w) => parse_window(w)?,
        None => default_window(&space)?,
    };
    let cert = doubling_certificate(&space, &window)?;
    let result = sweep(&space, &p, k, &cert, &window, tol, mode)?;
    emit(&result.to_csv(), out, stdout)?;
    let summary = format!("growth_verified={}", result.growth_verified);
    if out.is_some() {
        writeln!(stdout, "{summary}")?;
    } else {
        writeln!(stderr, "{summary}")?;
    }
    Ok(if result.growth_verified { 0 } else { 2 })
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    match &cli.command {
        Command::Space { source, check, window } => cmd_space(source, *check, window.as_deref(), stdout),
        Command::Norm { source, exponent, function, tol } => cmd_norm(source, exponent, function, *tol, stdout),
        Command::Maximal { source, function, fast, out } => cmd_maximal(source, function, *fast, out.as_deref(), stdout),
        Command::Sweep { source, exponent, k, window, mode, tol, out } => {
            cmd_sweep(source, exponent, k, window.as_deref(), *mode, *tol, out.as_deref(), stdout, stderr)
        }
    }
}

fn thread_count() -> Result<usize, Failure> {
    match std::env::var("MAXBLOW_THREADS") {
        Ok(v) => parse_num(&v, "MAXBLOW_THREADS"),
        Err(_) => Ok(0),
    }
}

/// Runs the command line `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let outcome = thread_count().and_then(|threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Failure::usage(e.to_string()))?;
        pool.install(|| dispatch(&cli, stdout, stderr))
    });
    match outcome {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.msg);
            f.code
        }
    }
}
