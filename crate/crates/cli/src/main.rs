//! `hichom <command> --config <path> [--out <dir>] [--threads <k>]`

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hichom_core::{run, Command, Error, RunConfig};
use serde_json::json;

/// Exit status when the self-test finds a failing criterion.
const SELFTEST_FAILURE: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CommandArg {
    Cell,
    Tensors,
    Macro,
    Dns,
    Converge,
    Selftest,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Cell => Command::Cell,
            CommandArg::Tensors => Command::Tensors,
            CommandArg::Macro => Command::Macro,
            CommandArg::Dns => Command::Dns,
            CommandArg::Converge => Command::Converge,
            CommandArg::Selftest => Command::Selftest,
        }
    }
}

/// Homogenization toolkit for high-contrast dielectric elastomer composites.
#[derive(Debug, Parser)]
#[command(name = "hichom", version)]
struct Cli {
    /// What to compute.
    #[arg(value_enum)]
    command: CommandArg,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `outputDir` of the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "HICHOM_THREADS")]
    threads: Option<usize>,
}

/// Reads the configuration; a file without `command` takes the one given
/// on the command line, and a file naming a different command is rejected.
fn load(cli: &Cli) -> Result<RunConfig, Error> {
    let requested = Command::from(cli.command);
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", cli.config.display())))?;
    let echo: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut doc = echo.clone();
    if let Some(map) = doc.as_object_mut() {
        map.entry("command").or_insert_with(|| json!(requested.name()));
    }
    let mut cfg = RunConfig::from_value(doc)?;
    if cfg.command != requested {
        return Err(Error::validation(
            "command",
            format!("configuration says `{}` but `{}` was requested", cfg.command.name(), requested.name()),
        ));
    }
    cfg.echo = echo;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn fail(e: &Error) -> ExitCode {
    let mut body = json!({"kind": e.kind(), "message": e.to_string(), "exitCode": e.exit_code()});
    if let Error::Validation { key, .. } = e {
        body["key"] = json!(key);
    }
    eprintln!("{}", json!({ "error": body }));
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    if let Some(k) = cli.threads {
        if k == 0 {
            return fail(&Error::validation("threads", "must be positive"));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            return fail(&Error::validation("threads", e.to_string()));
        }
    }
    let cfg = match load(&cli) {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e),
    };
    match run(&cfg) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for path in &outcome.artifacts {
                println!("wrote {}", path.display());
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(SELFTEST_FAILURE)
            }
        }
        Err(e) => fail(&e),
    }
}
