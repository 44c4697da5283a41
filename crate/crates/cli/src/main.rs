//! `znd`: command-line front end for the ZND stability toolkit.

mod commands;
mod config;
mod output;

use clap::{Parser, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use config::RunConfig;
use output::{to_stable_json, Artifacts, RunManifest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<znd_core::Error> for CliError {
    fn from(e: znd_core::Error) -> Self {
        match e {
            znd_core::Error::Domain(_) | znd_core::Error::Config(_) | znd_core::Error::DegenerateProfile { .. } => {
                CliError::Validation(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) | CliError::Io(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Profile,
    Evans1d,
    Roots,
    Verdict,
    Boundary,
    Evans2d,
    Hifreq,
    Oscint,
    Riccati,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Evans1d => "evans1d",
            Command::Roots => "roots",
            Command::Verdict => "verdict",
            Command::Boundary => "boundary",
            Command::Evans2d => "evans2d",
            Command::Hifreq => "hifreq",
            Command::Oscint => "oscint",
            Command::Riccati => "riccati",
        }
    }
}

/// ZND detonation stability: profiles, Evans-Lopatinski determinants, root
/// counts, neutral curves and high-frequency diagnostics.
#[derive(Debug, Parser)]
#[command(name = "znd", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "ZND_THREADS", default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    verbose: bool,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let cfg = RunConfig::parse(&text)?;
    if cli.threads > 0 {
        // Fails only if a pool was already installed, which never happens here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    if cli.verbose {
        eprintln!("znd {}: {} threads", cli.command.name(), rayon::current_num_threads());
    }
    let mut out = Artifacts::new(&cli.out)?;
    let outcome = match cli.command {
        Command::Profile => commands::profile(&cfg, &mut out),
        Command::Evans1d => commands::evans1d(&cfg, &mut out),
        Command::Roots => commands::roots(&cfg, &mut out),
        Command::Verdict => commands::verdict(&cfg, &mut out),
        Command::Boundary => commands::boundary(&cfg, &mut out),
        Command::Evans2d => commands::evans2d(&cfg, &mut out),
        Command::Hifreq => commands::hifreq(&cfg, &mut out),
        Command::Oscint => commands::oscint(&cfg, &mut out),
        Command::Riccati => commands::riccati(&cfg, &mut out),
    }?;
    if cli.verbose {
        for w in &outcome.warnings {
            eprintln!("warning: {w}");
        }
    }
    let manifest = RunManifest {
        tool: "znd".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: cli.command.name().into(),
        status: if outcome.warnings.is_empty() { "ok" } else { "warning" }.into(),
        wall_time_s: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        config: serde_json::to_value(&cfg).map_err(|e| CliError::Io(e.to_string()))?,
        counts: outcome.counts,
        warnings: outcome.warnings,
        result: outcome.result,
        outputs: out.files.clone(),
    };
    let text = to_stable_json(&manifest)? + "\n";
    let path = out.dir().join("manifest.json");
    std::fs::write(&path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::json!({
                "status": "error",
                "kind": e.kind(),
                "message": e.to_string(),
                "subcommand": cli.command.name(),
            });
            let text = serde_json::to_string_pretty(&report).unwrap_or_default();
            println!("{text}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
