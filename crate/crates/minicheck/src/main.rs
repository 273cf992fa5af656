use std::path::PathBuf;
use std::process::ExitCode;

use asef_core::{Endianness, HardwareTarget};
use clap::Parser;
use minicheck::{check_files, emit_native_report, Options, DEFAULT_BUDGET};

/// Interval analysis of MiniC sources; writes a native report.
#[derive(Parser)]
#[command(name = "minicheck", version)]
struct Args {
    /// Source files.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Report file (stdout if absent).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Names files relative to this directory in the report.
    #[arg(long)]
    root: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    int_bits: u32,
    #[arg(long, default_value_t = 16)]
    short_bits: u32,
    #[arg(long, default_value_t = 32)]
    pointer_bits: u32,
    /// Include proven-safe findings.
    #[arg(long)]
    emit_safe: bool,
    /// Steps per witness run.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    witness_budget: usize,
    #[arg(long)]
    no_witness: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if !matches!(args.int_bits, 16 | 32 | 64) {
        eprintln!("minicheck: unsupported int width {}", args.int_bits);
        return ExitCode::from(2);
    }
    let opts = Options {
        hw: HardwareTarget {
            id: "cli".into(),
            pointer_size_bits: args.pointer_bits,
            endianness: Endianness::Little,
            int_size_bits: args.int_bits,
            short_size_bits: args.short_bits,
        },
        emit_safe: args.emit_safe,
        witness_budget: (!args.no_witness).then_some(args.witness_budget),
    };
    let files: Vec<(PathBuf, String)> = args
        .files
        .iter()
        .map(|p| {
            let shown = args
                .root
                .as_ref()
                .and_then(|r| p.strip_prefix(r).ok())
                .unwrap_or(p);
            (p.clone(), shown.to_string_lossy().replace('\\', "/"))
        })
        .collect();
    let findings = match check_files(&files, &opts) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("minicheck: {e}");
            return ExitCode::from(1);
        }
    };
    let text = emit_native_report(&findings);
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("minicheck: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
