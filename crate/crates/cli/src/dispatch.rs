//! Command-line parsing and exit-status mapping.
//!
//! Precedence, lowest to highest: built-in defaults, the `--config` file,
//! `--set key=value` pairs in order, then the dedicated flags.

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::{Manifest, RunConfig, UsageError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "htsbayes",
    version,
    about = "Bayesian analysis of replicated two-channel RNAi screens"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plate CSV to a cleaned, normalized screen dataset.
    Preprocess(Common),
    /// Run the sampler on a screen dataset and summarize the draws.
    Fit(Common),
    /// Hit lists, volcano data and ranked tables from fitted summaries.
    Report(Common),
    /// Generate a synthetic screen together with its ground truth.
    Simulate(Common),
    /// ROC and FDR curves for scores against a ground truth.
    Evaluate(Common),
    /// Compare the t, Gaussian and Z-score methods on simulated screens.
    Shootout(Common),
    /// Fit under two prior configurations and correlate the results.
    Sensitivity(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Preprocess(c) => ("preprocess", c),
            Command::Fit(c) => ("fit", c),
            Command::Report(c) => ("report", c),
            Command::Simulate(c) => ("simulate", c),
            Command::Evaluate(c) => ("evaluate", c),
            Command::Shootout(c) => ("shootout", c),
            Command::Sensitivity(c) => ("sensitivity", c),
        }
    }
}

#[derive(Debug, Args)]
struct Common {
    /// key=value configuration file; a manifest from an earlier run also works.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    screen: Option<String>,
    #[arg(long)]
    summary: Option<String>,
    #[arg(long)]
    truth: Option<String>,
    #[arg(long)]
    scores: Option<String>,
    #[arg(long)]
    prior_b: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    prior: Option<String>,
    #[arg(long)]
    chains: Option<String>,
    #[arg(long)]
    iterations: Option<String>,
    #[arg(long)]
    burn_in: Option<String>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    units: Option<String>,
    #[arg(long)]
    active: Option<String>,
    #[arg(long)]
    replicates: Option<String>,
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    fix_rate: Option<String>,
    #[arg(long)]
    fix_size: Option<String>,
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long)]
    thresholds: Option<String>,
}

impl Common {
    fn flags(&self) -> [(&'static str, &Option<String>); 21] {
        [
            ("input", &self.input),
            ("screen", &self.screen),
            ("summary", &self.summary),
            ("truth", &self.truth),
            ("scores", &self.scores),
            ("prior_b", &self.prior_b),
            ("out", &self.out),
            ("seed", &self.seed),
            ("prior", &self.prior),
            ("chains", &self.chains),
            ("iterations", &self.iterations),
            ("burn_in", &self.burn_in),
            ("scenario", &self.scenario),
            ("units", &self.units),
            ("active", &self.active),
            ("replicates", &self.replicates),
            ("methods", &self.methods),
            ("fix_rate", &self.fix_rate),
            ("fix_size", &self.fix_size),
            ("kappa", &self.kappa),
            ("thresholds", &self.thresholds),
        ]
    }

    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        for pair in &self.set {
            cfg.set_pair(pair)?;
        }
        for (key, value) in self.flags() {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

fn run(command: &Command) -> Result<Manifest> {
    let (name, common) = command.parts();
    let cfg = common.resolve()?;
    match name {
        "preprocess" => commands::preprocess(&cfg),
        "fit" => commands::fit(&cfg),
        "report" => commands::report(&cfg),
        "simulate" => commands::simulate(&cfg),
        "evaluate" => commands::evaluate(&cfg),
        "shootout" => commands::shootout(&cfg),
        "sensitivity" => commands::sensitivity(&cfg),
        _ => unreachable!("subcommand {name} has no handler"),
    }
}

/// Parse `args` (including the program name), run the subcommand and return
/// the process exit status. Diagnostics go to stderr.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli.command) {
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<UsageError>()) {
                EXIT_USAGE
            } else {
                EXIT_RUNTIME
            }
        }
    }
}
