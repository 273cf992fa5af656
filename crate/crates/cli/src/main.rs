use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use asef_cli::{demo, CliError, Outcome};
use chrono::{DateTime, Utc};
use clap::{Parser, Subcommand};

const AFTER_HELP: &str = "\
Exit status:
  0  success
  1  findings: validation problems or report differences
  2  usage error
  3  malformed input file
  4  configuration error
  5  analysis tool failure
  6  I/O error

Environment:
  ASEF_LOG     log filter (error, warn, info, debug, trace); default warn
  ASEF_<KEY>   overrides a key of the serve/watch configuration file";

#[derive(Parser)]
#[command(name = "asef", version, about = "Exchange, convert and compare static analysis results", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an ASEF configuration or report
    Validate { file: PathBuf },
    /// Run minicheck on an analysis task and write the ASEF report
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Local configuration part merged over the global part
        #[arg(long)]
        local: Option<PathBuf>,
        #[arg(long)]
        task: String,
        #[arg(long)]
        out: PathBuf,
        /// Directory of the source files [default: directory of --config]
        #[arg(long)]
        root: Option<PathBuf>,
        /// Local prefix the sources are known under [default: absolute --root]
        #[arg(long)]
        mount: Option<String>,
        #[arg(long, value_parser = timestamp)]
        created_at: Option<DateTime<Utc>>,
    },
    /// Convert a native tool report to ASEF
    Convert {
        #[arg(long)]
        tool: String,
        #[arg(long)]
        native: PathBuf,
        /// Category mapping table [default: the shipped table]
        #[arg(long)]
        map: Option<PathBuf>,
        /// `local-prefix uri-prefix` lines, or an ASEF configuration
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "default")]
        task: String,
        /// Directory relative file names of the native report are under
        #[arg(long)]
        source_root: Option<PathBuf>,
        #[arg(long, value_parser = timestamp)]
        created_at: Option<DateTime<Utc>>,
    },
    /// Compare two ASEF reports by common category and location
    Diff {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run the resource service and the analysis orchestrator
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        bind: Option<String>,
    },
    /// Poll the code repositories and run analyses without serving
    Watch {
        #[arg(long)]
        config: PathBuf,
        /// Seconds between polls
        #[arg(long, default_value_t = 10)]
        poll: u64,
        /// Stop after one round
        #[arg(long)]
        once: bool,
    },
    /// Create a demo workspace with the lamp example
    InitDemo {
        dir: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

fn timestamp(s: &str) -> Result<DateTime<Utc>, String> {
    asef_cli::parse_timestamp(s).map_err(|e| e.to_string())
}

fn run(cmd: Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Validate { file } => asef_cli::validate(&file),
        Command::Analyze {
            config,
            local,
            task,
            out,
            root,
            mount,
            created_at,
        } => asef_cli::analyze(&asef_cli::AnalyzeArgs {
            config,
            local,
            task,
            out,
            root,
            mount,
            created_at,
        }),
        Command::Convert {
            tool,
            native,
            map,
            rules,
            out,
            task,
            source_root,
            created_at,
        } => asef_cli::convert(&asef_cli::ConvertArgs {
            tool,
            native,
            map,
            rules,
            out,
            task,
            source_root,
            created_at,
        }),
        Command::Diff { a, b, json } => asef_cli::diff(&a, &b, json),
        Command::Serve { config, bind } => {
            let settings = asef_cli::load_settings(&config)?;
            asef_cli::serve(&settings, bind.as_deref()).map(|_| Outcome {
                stdout: String::new(),
                code: 0,
            })
        }
        Command::Watch { config, poll, once } => {
            let settings = asef_cli::load_settings(&config)?;
            asef_cli::watch(&settings, poll, once, &mut std::io::stdout()).map(|_| Outcome {
                stdout: String::new(),
                code: 0,
            })
        }
        Command::InitDemo { dir, port } => demo::init_demo(&dir, port).map(|d| Outcome {
            stdout: d.instructions(),
            code: 0,
        }),
    }
}

fn main() -> ExitCode {
    let filter = tracing_subscriber::EnvFilter::try_from_env("ASEF_LOG")
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn"));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(o) => {
            let _ = std::io::stdout().write_all(o.stdout.as_bytes());
            ExitCode::from(o.code as u8)
        }
        Err(e) => {
            eprintln!("asef: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
