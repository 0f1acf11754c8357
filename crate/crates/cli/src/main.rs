//! `moduli`: sample random lattices, evaluate the exact distributions of
//! their distances to the square and rectangular tori, and run the
//! verification campaign.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use moduli_core::closed_forms::{density_table, moments_within, write_table_csv, Distribution};
use moduli_core::fuchsian::describe_group;
use moduli_core::sampler::{sample, write_csv, write_json, SamplerConfig, SamplingMethod};
use moduli_core::special::quadrature::DEFAULT_BUDGET;
use moduli_core::verify::{run_verification_with, VerifyOptions, MIN_SAMPLES};
use moduli_core::Error;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "moduli", version, about = "Statistics of random lattices and punctured tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw uniform samples from the fundamental domain.
    Sample(SampleArgs),
    /// Evaluate a density or distribution function.
    Eval(EvalArgs),
    /// Mean and variance of a distribution by quadrature.
    Moments(MomentsArgs),
    /// Run the verification campaign; exit status 1 if any check fails.
    Verify(VerifyArgs),
    /// Describe the rectangular punctured-torus group with parameter r.
    Group(GroupArgs),
    /// Tabulate pdf and cdf of a distribution on a grid.
    Table(TableArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    InverseTransform,
    Rejection,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum What {
    Pdf,
    Cdf,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "inverse-transform")]
    method: Method,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("at").required(true).args(["r", "grid"])))]
struct EvalArgs {
    #[arg(long, value_parser = parse_distribution)]
    dist: Distribution,
    #[arg(long, value_enum, default_value = "pdf")]
    what: What,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<f64>,
    /// `A:B:N`, N+1 equally spaced points from A to B inclusive.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<Grid>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MomentsArgs {
    #[arg(long, value_parser = parse_distribution)]
    dist: Distribution,
    #[arg(long, default_value_t = 1e-10, value_parser = parse_positive)]
    tol: f64,
    /// Cap on integrand evaluations per moment.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Shift the target of the named check, to exercise the failure path.
    #[arg(long, hide = true)]
    inject_fault: Vec<String>,
}

#[derive(Args, Debug)]
struct GroupArgs {
    #[arg(long, allow_hyphen_values = true)]
    r: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long, value_parser = parse_distribution)]
    dist: Distribution,
    /// `A:B:N`, N+1 equally spaced points from A to B inclusive.
    #[arg(long, allow_hyphen_values = true)]
    grid: Grid,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Grid {
    start: f64,
    end: f64,
    steps: usize,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected A:B:N, got {s:?}"));
        };
        let start: f64 = a.parse().map_err(|e| format!("grid start {a:?}: {e}"))?;
        let end: f64 = b.parse().map_err(|e| format!("grid end {b:?}: {e}"))?;
        let steps: usize = n.parse().map_err(|e| format!("grid count {n:?}: {e}"))?;
        if !(start.is_finite() && end.is_finite()) || end < start {
            return Err(format!("grid bounds must be finite with A <= B, got {s:?}"));
        }
        if steps == 0 {
            return Err("grid count N must be at least 1".into());
        }
        Ok(Grid { start, end, steps })
    }
}

impl Grid {
    /// Clamps the grid to `[lo, hi]`, warning on standard error if it moved.
    fn clamped(self, lo: f64, hi: f64, name: &str) -> Grid {
        let (start, end) = (self.start.clamp(lo, hi), self.end.clamp(lo, hi));
        if start != self.start || end != self.end {
            eprintln!(
                "warning: grid {}:{} clamped to the support of {name}: {}:{}",
                self.start, self.end, start, end
            );
        }
        Grid { start, end, ..self }
    }

    fn points(self) -> Vec<f64> {
        let h = (self.end - self.start) / self.steps as f64;
        (0..=self.steps)
            .map(|k| if k == self.steps { self.end } else { self.start + h * k as f64 })
            .collect()
    }
}

fn parse_distribution(s: &str) -> Result<Distribution, String> {
    s.parse::<Distribution>().map_err(|_| {
        let names: Vec<&str> = Distribution::ALL.iter().map(|d| d.name()).collect();
        format!("unknown distribution {s:?}; expected one of {}", names.join(", "))
    })
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

/// Twelve significant digits, fixed notation for moderate magnitudes.
fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..12).contains(&mag) {
        let s = format!("{:.*}", (11 - mag).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Budget(String),
    Checks(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => Failure::Io(m),
            Error::BudgetExhausted { .. } => Failure::Budget(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn run_sample(a: SampleArgs) -> Result<(), Failure> {
    let method = match a.method {
        Method::InverseTransform => SamplingMethod::InverseTransform,
        Method::Rejection => SamplingMethod::Rejection,
    };
    let count = usize::try_from(a.n).map_err(|_| Failure::Usage(format!("--n {} is too large", a.n)))?;
    let batch = sample(&SamplerConfig::new(a.seed, count, method)?);
    let mut out = output(&a.out)?;
    match a.format {
        Format::Csv => write_csv(&batch, &mut out)?,
        Format::Json => write_json(&batch, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn run_eval(a: EvalArgs) -> Result<(), Failure> {
    let density = a.dist.density();
    let value = |x: f64| match a.what {
        What::Pdf => density.pdf(x),
        What::Cdf => density.cdf(x),
    };
    let mut out = output(&a.out)?;
    if let Some(r) = a.r {
        if !r.is_finite() {
            return Err(Failure::Usage(format!("--r must be finite, got {r}")));
        }
        writeln!(out, "{}", sig12(value(r)))?;
    } else if let Some(grid) = a.grid {
        let (lo, hi) = density.support();
        writeln!(out, "r,value")?;
        for x in grid.clamped(lo, hi, a.dist.name()).points() {
            writeln!(out, "{},{}", sig12(x), sig12(value(x)))?;
        }
    }
    out.flush()?;
    Ok(())
}

fn run_moments(a: MomentsArgs) -> Result<(), Failure> {
    let m = moments_within(&a.dist.density(), a.tol, a.budget)?;
    let mut out = io::stdout().lock();
    writeln!(out, "mean {}", sig12(m.mean))?;
    writeln!(out, "variance {}", sig12(m.variance))?;
    writeln!(out, "error_estimate {:.3e}", m.error_estimate)?;
    Ok(())
}

fn run_verify(a: VerifyArgs) -> Result<(), Failure> {
    if a.n < MIN_SAMPLES {
        return Err(Failure::Usage(format!("--n must be at least {MIN_SAMPLES}")));
    }
    let opts = VerifyOptions { corrupt: a.inject_fault };
    let report = run_verification_with(a.seed, a.n, &opts)?;
    if let Some(path) = &a.report {
        let mut out = output(&Some(path.clone()))?;
        serde_json::to_writer_pretty(&mut out, &report).map_err(|e| Failure::Io(e.to_string()))?;
        writeln!(out)?;
        out.flush()?;
    }
    print!("{}", report.to_table());
    if report.all_passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(Failure::Checks(format!("failed checks: {}", names.join(", "))))
    }
}

fn run_group(a: GroupArgs) -> Result<(), Failure> {
    if !(a.r > 0.0 && a.r.is_finite()) {
        return Err(Failure::Usage(format!("--r must be positive, got {}", a.r)));
    }
    let d = describe_group(a.r)?;
    let mut out = output(&a.out)?;
    serde_json::to_writer_pretty(&mut out, &d).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn run_table(a: TableArgs) -> Result<(), Failure> {
    let (lo, hi) = a.dist.density().support();
    let xs = a.grid.clamped(lo, hi, a.dist.name()).points();
    let mut out = output(&a.out)?;
    write_table_csv(&density_table(a.dist, &xs), &mut out)?;
    out.flush()?;
    Ok(())
}

fn configure_threads() {
    if let Ok(v) = std::env::var("MODULI_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring MODULI_THREADS={v:?}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Sample(a) => run_sample(a),
        Command::Eval(a) => run_eval(a),
        Command::Moments(a) => run_moments(a),
        Command::Verify(a) => run_verify(a),
        Command::Group(a) => run_group(a),
        Command::Table(a) => run_table(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::Io(m) => (EXIT_IO, m),
                Failure::Budget(m) => (EXIT_BUDGET, m),
                Failure::Checks(m) => (EXIT_CHECK_FAILED, m),
            };
            eprintln!("moduli: {msg}");
            ExitCode::from(code)
        }
    }
}
