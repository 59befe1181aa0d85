//! Command-line front end for `ergolab-core`.
//!
//! Exit codes: 0 on success, 1 on a domain error (the message carries the
//! core error name), 2 on a usage error (the message names the flag).

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod output;
pub mod scenarios;
pub mod spec;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(ergolab_core::Error),
    /// The command ran but reported failures (e.g. a scenario failed).
    Failed(String),
}

impl From<ergolab_core::Error> for CliError {
    fn from(e: ergolab_core::Error) -> Self {
        CliError::Domain(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Domain(e) => write!(f, "error[{}]: {e}", e.name()),
            CliError::Failed(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Failed(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ergolab", version, about = "Weighted ergodic averages, empirical decompositions and tameness checks")]
#[command(args_override_self = true)]
pub struct Cli {
    /// JSON file whose keys mirror the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide tameness of an affine torus map from its integer matrix.
    Tame(TameArgs),
    /// Solve the l1-flatness program for one observable and shift set.
    Flatness(FlatnessArgs),
    /// Weighted averages along one orbit, with a convergence verdict.
    Average(AverageArgs),
    /// Cluster limit measures over a grid of initial points.
    Decompose(DecomposeArgs),
    /// Check row sums and the variation condition of a summation method.
    ValidateMethod(ValidateArgs),
    /// Run the built-in scenario suite.
    Scenarios(ScenarioArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Arith {
    /// Exact when the starting points are exact.
    Auto,
    Exact,
    Float,
}

#[derive(Debug, Args)]
pub struct TameArgs {
    /// Matrix file `{"rows": [[...]]}` or inline JSON rows.
    #[arg(long)]
    pub matrix: String,
    /// Translation part `b`, comma-separated; recorded but not used.
    #[arg(long)]
    pub shift: Option<String>,
    /// Permit dimensions above 8, where L(d) grows quickly.
    #[arg(long)]
    pub allow_large_d: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// System spec, e.g. `rotation:alpha=golden` or `torus:A=[[2]],b=0`.
    #[arg(long)]
    pub system: String,
    /// Use floating-point phase points even where exact ones are the default.
    #[arg(long)]
    pub float_points: bool,
    /// Extra piecewise-linear observables (JSON).
    #[arg(long, value_name = "FILE")]
    pub observables: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FlatnessArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    #[arg(long)]
    pub observable: String,
    /// `0,1,2`, `0..6` or `0..=5`.
    #[arg(long)]
    pub shifts: String,
    /// Lattice resolution `G`, `list:<p>;<p>`, `file=<path>` or `cylinder`.
    #[arg(long)]
    pub grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AverageArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    #[arg(long, default_value = "cesaro")]
    pub method: String,
    /// Coordinates or a symbolic word; defaults to the point in a shift spec.
    #[arg(long)]
    pub point: Option<String>,
    #[arg(long)]
    pub n: usize,
    /// `geometric:<r>` or `list:a,b,...`.
    #[arg(long)]
    pub checkpoints: Option<String>,
    /// Restrict output to one dictionary observable.
    #[arg(long)]
    pub observable: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    #[arg(long, default_value_t = 0.4)]
    pub sep: f64,
    #[arg(long, value_enum, default_value_t = Arith::Auto)]
    pub arith: Arith,
    /// Atoms listed per limit measure.
    #[arg(long, default_value_t = 32)]
    pub max_atoms: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    #[arg(long, default_value = "cesaro")]
    pub method: String,
    /// Lattice resolution `G`, `list:<p>;<p>` or `file=<path>`.
    #[arg(long)]
    pub grid: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    #[arg(long, default_value_t = 0.4)]
    pub sep: f64,
    /// Pairing gap needed to call two representatives separated.
    #[arg(long, default_value_t = 1e-6)]
    pub separation_tol: f64,
    #[arg(long)]
    pub checkpoints: Option<String>,
    #[arg(long, value_enum, default_value_t = Arith::Auto)]
    pub arith: Arith,
    #[arg(long, default_value_t = 8)]
    pub max_atoms: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub method: String,
    #[arg(long)]
    pub max_n: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub threshold: f64,
    /// `auto` is exact up to `--max-n 1000` and float beyond.
    #[arg(long, value_enum, default_value_t = Arith::Auto)]
    pub arith: Arith,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Run every scenario.
    #[arg(long, conflicts_with = "only")]
    pub all: bool,
    /// Comma-separated scenario ids.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Print the scenario ids and exit.
    #[arg(long)]
    pub list: bool,
    /// Seed for randomized property checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON summary path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV summary path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Report wall time per scenario on stderr.
    #[arg(long)]
    pub timings: bool,
}

/// Removes `--config <file>` from `argv` and splices the file's keys in as
/// flags right after the subcommand, so explicit flags still win.
pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut iter = argv.into_iter();
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy().into_owned();
        if text == "--config" {
            let path = iter.next().ok_or_else(|| CliError::Usage("--config: missing file".into()))?;
            config = Some(PathBuf::from(path));
        } else if let Some(path) = text.strip_prefix("--config=") {
            config = Some(PathBuf::from(path));
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else { return Ok(rest) };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("--config: {}: {e}", path.display())))?;
    let doc: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("--config: {}: {e}", path.display())))?;
    let map = doc.as_object().ok_or_else(|| CliError::Usage("--config: expected a JSON object".into()))?;
    let mut flags: Vec<OsString> = Vec::new();
    let mut command = None;
    for (key, value) in map {
        if key == "command" {
            command = value.as_str().map(str::to_string);
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            serde_json::Value::Bool(true) => flags.push(flag.into()),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::String(s) => {
                flags.push(flag.into());
                flags.push(s.into());
            }
            serde_json::Value::Number(n) => {
                flags.push(flag.into());
                flags.push(n.to_string().into());
            }
            serde_json::Value::Array(items) => {
                let joined: Vec<String> = items.iter().map(|v| v.as_str().map_or_else(|| v.to_string(), str::to_string)).collect();
                flags.push(flag.into());
                flags.push(joined.join(",").into());
            }
            serde_json::Value::Object(_) => return Err(CliError::Usage(format!("--config: key {key:?} has an object value"))),
        }
    }
    let sub_pos = rest.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|p| p + 1);
    let at = match (sub_pos, command) {
        (Some(p), _) => p + 1,
        (None, Some(c)) => {
            rest.insert(1.min(rest.len()), c.into());
            2.min(rest.len())
        }
        (None, None) => return Err(CliError::Usage("--config: no subcommand given".into())),
    };
    rest.splice(at..at, flags);
    Ok(rest)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("ERGOLAB_THREADS") else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("ERGOLAB_THREADS: expected a nonnegative integer, got {value:?}")))?;
    // 0 keeps rayon's default; a pool built earlier in this process is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let result = expand_config(argv).and_then(|argv| match Cli::try_parse_from(argv) {
        Ok(cli) => {
            configure_threads()?;
            commands::dispatch(cli.command)
        }
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { Err(CliError::Usage("missing subcommand".into())) } else { Ok(()) };
            }
            let _ = e.print();
            Err(CliError::Usage(String::new()))
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            if !matches!(&e, CliError::Usage(m) if m.is_empty()) {
                eprintln!("{e}");
            }
            e.exit_code()
        }
    }
}
