use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ecyl::commands::{self, MathieuFunction, Suite, SweepVariable};
use ecyl::config::{Channel, Format, RunConfig, Unit};
use ecyl::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "ecyl", version, about = "Casimir energy of an elliptic cylinder or strip opposite a plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energy at one geometry, as JSON.
    Energy(RunArgs),
    /// Energies over a grid of angles or separations, as CSV or JSON.
    Sweep(SweepArgs),
    /// Evaluate angular or modified radial Mathieu functions.
    Mathieu(MathieuArgs),
    /// Run validation suites and print a JSON report.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Interfocal half-width.
    #[arg(long)]
    d: Option<f64>,
    /// Surface coordinate of the ellipse (0 for the strip).
    #[arg(long)]
    mu0: Option<f64>,
    /// Zero-thickness strip (mu0 = 0).
    #[arg(long, conflicts_with_all = ["mu0", "ecc"])]
    strip: bool,
    /// Semi-major axis; use with --ecc instead of --d/--mu0.
    #[arg(long, requires = "ecc", conflicts_with_all = ["d", "mu0"])]
    a: Option<f64>,
    /// Eccentricity; use with --a.
    #[arg(long, requires = "a")]
    ecc: Option<f64>,
    /// Distance from the cylinder axis to the plane.
    #[arg(long = "H")]
    h: Option<f64>,
    /// Angle of the major axis to the plane, in degrees.
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long, value_enum)]
    channel: Option<Channel>,
    /// Largest truncation order; caps the ladder.
    #[arg(long)]
    mmax: Option<u32>,
    /// Truncation ladder, comma separated.
    #[arg(long, value_delimiter = ',')]
    ladder: Option<Vec<u32>>,
    /// Length that makes energies dimensionless.
    #[arg(long, value_enum)]
    unit: Option<Unit>,
    #[arg(long)]
    p_rel_tol: Option<f64>,
    #[arg(long)]
    u_tol: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum)]
    variable: SweepVariable,
    #[arg(long, requires_all = ["to", "step"], conflicts_with = "values")]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Explicit grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
}

#[derive(Args)]
struct MathieuArgs {
    #[arg(long = "fn", value_enum)]
    function: MathieuFunction,
    #[arg(long)]
    m: u32,
    /// Angular parameter; negative for the modified radial functions.
    #[arg(long, allow_hyphen_values = true)]
    q: f64,
    /// Arguments (angle or radial coordinate), comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    at: Vec<f64>,
    /// Include the Fourier coefficient table.
    #[arg(long)]
    dump: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(d) = self.d {
            cfg.d = d;
        }
        if let Some(mu0) = self.mu0 {
            cfg.mu0 = mu0;
        }
        if self.strip {
            cfg.mu0 = 0.0;
        }
        if let (Some(a), Some(e)) = (self.a, self.ecc) {
            if !(e > 0.0 && e <= 1.0) {
                return Err(CliError::Input(format!("eccentricity must lie in (0, 1], got {e}")));
            }
            cfg.d = a * e;
            cfg.mu0 = (1.0 / e).acosh();
        }
        if let Some(h) = self.h {
            cfg.h = h;
        }
        if let Some(phi) = self.phi {
            cfg.phi_deg = phi;
        }
        if let Some(c) = self.channel {
            cfg.channel = c;
        }
        if let Some(l) = self.ladder {
            cfg.ladder = l;
        }
        cfg.ladder.sort_unstable();
        cfg.ladder.dedup();
        if let Some(m) = self.mmax {
            cfg.cap_ladder(m);
        }
        if let Some(u) = self.unit {
            cfg.unit = u;
        }
        if let Some(t) = self.p_rel_tol {
            cfg.quadrature.p_rel_tol = t;
        }
        if let Some(t) = self.u_tol {
            cfg.quadrature.u_tol = t;
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        cfg.threads = self.threads.or(cfg.threads);
        cfg.output = self.output.or(cfg.output);
        Ok(cfg)
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn json<T: serde::Serialize>(v: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Energy(args) => {
            let cfg = args.resolve()?;
            let report = commands::energy(&cfg)?;
            emit(&json(&report)?, cfg.output.as_ref())
        }
        Command::Sweep(args) => {
            let cfg = args.run.resolve()?;
            let values = match (args.values, args.from, args.to, args.step) {
                (Some(v), ..) => v,
                (None, Some(from), Some(to), Some(step)) => commands::grid(from, to, step)?,
                _ => return Err(CliError::Input("give --values or --from/--to/--step".into())),
            };
            let rows = commands::sweep(&cfg, args.variable, &values)?;
            for r in &rows {
                if let Some(e) = &r.error {
                    eprintln!("warning: point {} failed: {e}", r.variable);
                }
            }
            emit(&commands::render_sweep(&cfg, args.variable, &rows)?, cfg.output.as_ref())?;
            if rows.iter().all(|r| r.error.is_some()) {
                return Err(CliError::Numerical("every sweep point failed".into()));
            }
            Ok(())
        }
        Command::Mathieu(args) => {
            let report = commands::mathieu(args.function, args.m, args.q, &args.at, args.dump)?;
            emit(&json(&report)?, args.output.as_ref())
        }
        Command::Validate(args) => {
            let report = commands::validate(args.suite, args.threads)?;
            emit(&json(&report)?, args.output.as_ref())?;
            if !report.passed {
                let failed = report.checks.iter().filter(|c| !c.passed).count();
                return Err(CliError::Validation(format!("{failed} of {} checks failed", report.checks.len())));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
