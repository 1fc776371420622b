//! `qftconv` command line: every module as a seeded, reproducible experiment
//! with a JSON, CSV or text report.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::rng::{DEFAULT_SEED, SEED_ENV};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Seed of every random stream; defaults to $QFTCONV_SEED, then a fixed value.
    #[arg(long, global = true, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Overrides the tolerance of every numeric check of the command.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "qftconv", version, about = "Convolution constructions of perturbative QFT as reproducible experiments")]
#[command(after_help = "Exit codes: 0 all checks passed, 1 invariant failure, 2 usage error.")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Coassociativity, multiplicativity, antipode and grading on all forests.
    HopfCheck(commands::HopfCheckArgs),
    /// BPHZ renormalization of a tree or forest under the tree-factorial rules.
    Renormalize(commands::RenormalizeArgs),
    /// Renormalized partition function summed over forests.
    Zren(commands::ZrenArgs),
    /// Free action, Gaussian convolution and sampled moments on a momentum grid.
    GaussianCheck(commands::GaussianCheckArgs),
    /// Partition function of the two-field toy with a Sigma(A) coupling.
    GaugeDemo(commands::GaugeDemoArgs),
    /// Wilson effective action and the source identity.
    Wilson(commands::WilsonArgs),
    /// Legendre transform of the cumulant generator of a one-dimensional measure.
    Legendre(commands::LegendreArgs),
    /// Empirical law of the N-sample mean against the Legendre rate.
    MeanLaw(commands::MeanLawArgs),
    /// Interacting laws on the natural numbers.
    #[command(subcommand)]
    Sequences(commands::SequencesCommand),
    /// Discretized hierarchy of state spaces.
    #[command(subcommand)]
    Hierarchy(commands::HierarchyCommand),
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::HopfCheck(_) => "hopf-check".into(),
            Command::Renormalize(_) => "renormalize".into(),
            Command::Zren(_) => "zren".into(),
            Command::GaussianCheck(_) => "gaussian-check".into(),
            Command::GaugeDemo(_) => "gauge-demo".into(),
            Command::Wilson(_) => "wilson".into(),
            Command::Legendre(_) => "legendre".into(),
            Command::MeanLaw(_) => "mean-law".into(),
            Command::Sequences(s) => format!("sequences {}", s.name()),
            Command::Hierarchy(h) => format!("hierarchy {}", h.name()),
        }
    }
}

/// Result of one run: exit code and what goes to stdout and stderr.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(msg: impl Into<String>) -> Self {
        Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: msg.into() }
    }
}

#[derive(Debug)]
pub(crate) struct UsageError(pub String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

#[derive(Clone, Debug, Serialize)]
pub(crate) struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Value,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// What a command produces before rendering.
#[derive(Debug, Default)]
pub(crate) struct Report {
    pub results: Map<String, Value>,
    pub checks: Vec<Check>,
    pub table: Option<Table>,
    pub summary: Vec<String>,
}

impl Report {
    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(value).expect("serializable result"));
    }

    /// Check passing when `value <= tol`.
    pub fn bound(&mut self, name: &str, value: f64, tol: f64) {
        self.checks.push(Check { name: name.into(), passed: value <= tol, value: json!(value), tolerance: Some(tol) });
    }

    pub fn holds(&mut self, name: &str, passed: bool) {
        self.checks.push(Check { name: name.into(), passed, value: json!(passed), tolerance: None });
    }

    fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// Context handed to commands: resolved seed and tolerance override.
pub(crate) struct Ctx {
    pub seed: u64,
    pub tolerance: Option<f64>,
}

impl Ctx {
    pub fn tol(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion
                | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let code = if e.kind() == clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { EXIT_USAGE } else { EXIT_OK };
                    Outcome { code, stdout: text, stderr: String::new() }
                }
                _ => Outcome::usage(text),
            };
        }
    };
    run_cli(&cli)
}

pub fn run_cli(cli: &Cli) -> Outcome {
    if let Some(t) = cli.global.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Outcome::usage(format!("error: --tolerance must be positive and finite, got {t}\n"));
        }
    }
    let ctx = Ctx { seed: cli.global.seed, tolerance: cli.global.tolerance };
    let report = match commands::dispatch(&cli.command, &ctx) {
        Ok(r) => r,
        Err(UsageError(msg)) => return Outcome::usage(format!("error: {msg}\n")),
    };
    let command = cli.command.name();
    let config = resolved_config(cli);
    let body = match cli.global.format {
        Format::Json => render_json(&command, config, &report, &timestamp()),
        Format::Csv => render_csv(&report),
        Format::Text => render_text(&command, &report),
    };
    let failed = report.failed();
    let (code, stderr) = if failed.is_empty() {
        (EXIT_OK, String::new())
    } else {
        (EXIT_INVARIANT, format!("invariant failed: {}\n", failed.join(", ")))
    };
    Outcome { code, stdout: body, stderr }
}

fn resolved_config(cli: &Cli) -> Value {
    let mut config = Map::new();
    config.insert("command".into(), json!(cli.command.name()));
    config.insert("parameters".into(), serde_json::to_value(&cli.command).expect("serializable args"));
    config.insert("seed".into(), json!(cli.global.seed));
    config.insert("format".into(), serde_json::to_value(cli.global.format).expect("format"));
    config.insert("tolerance".into(), json!(cli.global.tolerance));
    Value::Object(config)
}

fn timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("{secs}")
}

/// Canonical JSON: `serde_json` maps keep keys sorted.
pub(crate) fn render_json(command: &str, config: Value, report: &Report, timestamp: &str) -> String {
    let failed = report.failed();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "results": Value::Object(report.results.clone()),
        "checks": report.checks,
        "status": if failed.is_empty() { "ok" } else { "invariant_failure" },
        "failed_checks": failed,
        "timestamp": timestamp,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json");
    s.push('\n');
    s
}

fn render_csv(report: &Report) -> String {
    let table = report.table.clone().unwrap_or_else(|| {
        let mut t = Table::new(&["check", "passed", "value", "tolerance"]);
        for c in &report.checks {
            t.push(vec![
                c.name.clone(),
                c.passed.to_string(),
                c.value.to_string(),
                c.tolerance.map(|t| t.to_string()).unwrap_or_default(),
            ]);
        }
        t
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header).expect("in-memory csv");
    for row in &table.rows {
        w.write_record(row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

fn render_text(command: &str, report: &Report) -> String {
    let failed = report.failed();
    let mut out = format!("qftconv {command}: {}\n", if failed.is_empty() { "ok" } else { "INVARIANT FAILURE" });
    for line in &report.summary {
        out.push_str(line);
        out.push('\n');
    }
    for c in &report.checks {
        let tol = c.tolerance.map(|t| format!(" (tolerance {t:e})")).unwrap_or_default();
        out.push_str(&format!("  {:<32} {} {}{}\n", c.name, if c.passed { "OK" } else { "FAILED" }, c.value, tol));
    }
    out
}
