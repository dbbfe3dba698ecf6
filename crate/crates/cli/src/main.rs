mod commands;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use expfunc_core::Error;
use serde_json::{json, Value};

use output::{RunManifest, Sink};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[source] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(Error::Parse(_)) => 64,
            CliError::Core(e) if e.is_numerical() || matches!(e, Error::Horizon(_)) => 3,
            CliError::Core(_) => 2,
            CliError::Io(_) => 74,
        }
    }
}

/// Bernstein-gamma functions and exponential functionals of killed Lévy processes.
#[derive(Parser, Debug)]
#[command(name = "expfunc", version)]
pub struct Cli {
    /// Target relative accuracy passed to the numerical routines.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for simulation.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// `json` or `csv` on stdout, or a file path (`.csv` selects CSV); a directory for reproduce-appendix.
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Family {
    /// Catalog id; see `expfunc catalog`.
    #[arg(long)]
    pub family: String,
    /// Parameters as a JSON object.
    #[arg(long, default_value = "{}")]
    pub params: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Law {
    Cramer,
    Saddle,
    Convolution,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SimMethod {
    Path,
    Factorized,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate W_phi(z) for a catalog Bernstein function.
    Wgamma {
        #[command(flatten)]
        family: Family,
        /// Complex point, e.g. 5+0i or 1.5-2i.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// auto, closed, product, stirling or generic.
        #[arg(long, default_value = "auto")]
        route: String,
    },
    /// Strip parameters, N_Psi, support and factors of a Lévy model.
    Model {
        #[command(flatten)]
        family: Family,
        /// Comma-separated subset of strips,npsi,support,factors,kill,mean.
        #[arg(long, default_value = "strips,npsi,support,factors,kill,mean")]
        info: String,
    },
    /// Evaluate the Mellin transform of I_Psi.
    Mellin {
        #[command(flatten)]
        family: Family,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// Continue meromorphically outside the strip.
        #[arg(long)]
        meromorphic: bool,
        /// Report this many poles with residues.
        #[arg(long)]
        poles: Option<usize>,
        /// Report |M(a+ib)| decay on a log grid lo:hi:n of b, at a = --decay-line.
        #[arg(long)]
        decay_grid: Option<String>,
        #[arg(long, default_value_t = 0.5)]
        decay_line: f64,
    },
    /// Positive and negative integer moments with finiteness status.
    Moments {
        #[command(flatten)]
        family: Family,
        #[arg(long, default_value_t = 10)]
        max_n: usize,
    },
    /// Density (or its derivative) by Mellin inversion.
    Density {
        #[command(flatten)]
        family: Family,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = 0)]
        deriv: usize,
    },
    /// Distribution function by Mellin inversion.
    Cdf {
        #[command(flatten)]
        family: Family,
        #[command(flatten)]
        grid: Grid,
        /// Report P(I > x) instead.
        #[arg(long)]
        survival: bool,
    },
    /// Large-x asymptotic laws.
    Tail {
        #[command(flatten)]
        family: Family,
        #[arg(long)]
        x: f64,
        #[arg(long, value_enum)]
        law: Law,
        /// Density derivative order; the survival function when omitted.
        #[arg(long)]
        deriv: Option<usize>,
        /// Also invert at x and report the ratio.
        #[arg(long)]
        compare: bool,
    },
    /// Small-x behaviour and the small-x series.
    Smallx {
        #[command(flatten)]
        family: Family,
        /// Evaluate the series partial sum at this x.
        #[arg(long)]
        series_x: Option<f64>,
        #[arg(long, default_value_t = 8)]
        terms: usize,
    },
    /// Monte-Carlo samples of I_Psi.
    Simulate {
        #[command(flatten)]
        family: Family,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1e3)]
        t_max: f64,
        #[arg(long)]
        no_richardson: bool,
        #[arg(long, value_enum, default_value = "path")]
        method: SimMethod,
        /// Kolmogorov-Smirnov distance to the inverted CDF.
        #[arg(long)]
        reference: bool,
    },
    /// List catalog families with their parameter schemas.
    Catalog,
    /// Regenerate the strip-parameter table for sampled parameters.
    ReproduceAppendix,
}

#[derive(Args, Debug, Clone)]
pub struct Grid {
    /// Single abscissa.
    #[arg(long, conflicts_with = "x_grid")]
    pub x: Option<f64>,
    /// Linear grid lo:hi:n.
    #[arg(long)]
    pub x_grid: Option<String>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("EXPFUNC_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("EXPFUNC_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn manifest(cli: &Cli, start: Instant) -> Result<RunManifest, CliError> {
    let (family, params) = match cli.command.family() {
        Some(f) => (Some(f.family.clone()), commands::parse_params(&f.params)?),
        None => (None, json!({})),
    };
    Ok(RunManifest {
        subcommand: cli.command.name().into(),
        family,
        params,
        policy: cli.command.policy(cli.tol),
        seed: matches!(cli.command, Command::Simulate { .. }).then_some(cli.seed),
        version: env!("CARGO_PKG_VERSION").into(),
        threads: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Wgamma { .. } => "wgamma",
            Command::Model { .. } => "model",
            Command::Mellin { .. } => "mellin",
            Command::Moments { .. } => "moments",
            Command::Density { .. } => "density",
            Command::Cdf { .. } => "cdf",
            Command::Tail { .. } => "tail",
            Command::Smallx { .. } => "smallx",
            Command::Simulate { .. } => "simulate",
            Command::Catalog => "catalog",
            Command::ReproduceAppendix => "reproduce-appendix",
        }
    }

    fn family(&self) -> Option<&Family> {
        match self {
            Command::Wgamma { family, .. }
            | Command::Model { family, .. }
            | Command::Mellin { family, .. }
            | Command::Moments { family, .. }
            | Command::Density { family, .. }
            | Command::Cdf { family, .. }
            | Command::Tail { family, .. }
            | Command::Smallx { family, .. }
            | Command::Simulate { family, .. } => Some(family),
            Command::Catalog | Command::ReproduceAppendix => None,
        }
    }

    /// Settings that determine the output, recorded in the manifest.
    fn policy(&self, tol: Option<f64>) -> Value {
        let mut p = json!({ "tol": tol.map(output::num) });
        let extra = match self {
            Command::Wgamma { z, route, .. } => json!({"z": z, "route": route}),
            Command::Model { info, .. } => json!({"info": info}),
            Command::Mellin { z, meromorphic, poles, decay_grid, decay_line, .. } => json!({
                "z": z, "meromorphic": meromorphic, "poles": poles,
                "decay_grid": decay_grid, "decay_line": decay_line,
            }),
            Command::Moments { max_n, .. } => json!({"max_n": max_n}),
            Command::Density { grid, deriv, .. } => json!({"x": grid.x, "x_grid": grid.x_grid, "deriv": deriv}),
            Command::Cdf { grid, survival, .. } => json!({"x": grid.x, "x_grid": grid.x_grid, "survival": survival}),
            Command::Tail { x, law, deriv, compare, .. } => {
                json!({"x": x, "law": format!("{law:?}").to_lowercase(), "deriv": deriv, "compare": compare})
            }
            Command::Smallx { series_x, terms, .. } => json!({"series_x": series_x, "terms": terms}),
            Command::Simulate { n, dt, t_max, no_richardson, method, reference, .. } => json!({
                "n": n, "dt": dt, "t_max": t_max, "richardson": !no_richardson,
                "method": format!("{method:?}").to_lowercase(), "reference": reference,
            }),
            Command::Catalog | Command::ReproduceAppendix => json!({}),
        };
        if let (Value::Object(p), Value::Object(e)) = (&mut p, extra) {
            p.extend(e);
        }
        p
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    init_threads()?;
    let start = Instant::now();
    if let Command::ReproduceAppendix = cli.command {
        let dir = cli.out.clone().unwrap_or_else(|| "tables".into());
        let (report, table) = commands::reproduce_appendix()?;
        let m = manifest(cli, start)?;
        let dir = std::path::Path::new(&dir);
        output::write_file(&dir.join("strip_table.csv"), &output::table_csv(&table, &m))?;
        output::write_file(&dir.join("strip_table.json"), &output::report_json(&report, &m))?;
        let summary = output::Report::json(json!({
            "files": [dir.join("strip_table.csv").display().to_string(), dir.join("strip_table.json").display().to_string()],
            "rows": table.rows.len(),
        }));
        return Sink::parse(None).emit(&output::report_json(&summary, &m));
    }
    let sink = Sink::parse(cli.out.as_deref());
    let report = commands::dispatch(cli)?;
    let m = manifest(cli, start)?;
    let text = sink.render(&report, &m)?;
    sink.emit(&text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("expfunc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
