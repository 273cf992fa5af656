//! minicheck: an interval-domain analyzer for MiniC, a small C-like language
//! with signed 8/16/32-bit integers, `if`, `while`, `assert` and calls to
//! external functions returning unknown values.

pub mod analysis;
pub mod ast;
pub mod exec;
pub mod finding;
pub mod interval;
pub mod parser;
pub mod report;
pub mod resolve;
pub mod witness;

use std::path::Path;

use asef_core::HardwareTarget;
use thiserror::Error;

pub use analysis::{analyze, analyze_function, eval_expr, AbstractState, VarState};
pub use ast::{IntType, Program};
pub use finding::{Finding, Kind, Verdict, TOOL_ID};
pub use interval::Interval;
pub use parser::{parse_program, SyntaxError};
pub use report::{emit_native_report, parse_native_report, NativeFinding, ReportError, TracePoint};
pub use witness::{find_witness, Witness, DEFAULT_BUDGET};

#[derive(Debug, Clone)]
pub struct Options {
    pub hw: HardwareTarget,
    /// Keep proven-safe findings in the output.
    pub emit_safe: bool,
    /// Steps per concrete run of the witness search; `None` disables the search.
    pub witness_budget: Option<usize>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            hw: HardwareTarget::ilp32("default"),
            emit_safe: false,
            witness_budget: Some(DEFAULT_BUDGET),
        }
    }
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("{file}:{}:{}: {}", .error.line, .error.column, .error.message)]
    Syntax { file: String, error: SyntaxError },
    #[error("{file}: {error}")]
    Io { file: String, error: std::io::Error },
}

/// Parses and analyzes one source text. Non-safe findings are handed to the
/// witness search; a finding with a witness becomes proven-unsafe and
/// carries the witness values and the trace of external inputs leading to it.
pub fn check_source(file: &str, text: &str, opts: &Options) -> Result<Vec<NativeFinding>, CheckError> {
    let program = parse_program(text).map_err(|error| CheckError::Syntax {
        file: file.to_string(),
        error,
    })?;
    let mut out = Vec::new();
    for f in &program.functions {
        let fa = analyze_function(f, &opts.hw);
        for finding in fa.findings {
            if finding.verdict == Verdict::ProvenSafe && !opts.emit_safe {
                continue;
            }
            let mut verdict = finding.verdict;
            let mut witness = None;
            let mut trace = Vec::new();
            let searchable = matches!(verdict, Verdict::Undecided | Verdict::ProvenUnsafe);
            if let (true, Some(budget)) = (searchable, opts.witness_budget) {
                if let Ok(Some(w)) = find_witness(f, &fa.resolution, &finding, opts.hw.int_size_bits, budget) {
                    verdict = Verdict::ProvenUnsafe;
                    trace = w
                        .sites
                        .iter()
                        .chain(std::iter::once(&finding.pos))
                        .map(|p| TracePoint {
                            file: file.to_string(),
                            line: p.line,
                            column: p.column,
                        })
                        .collect();
                    witness = Some(w.values);
                }
            }
            out.push(NativeFinding {
                category: finding.kind.qualified(),
                file: file.to_string(),
                line: finding.pos.line,
                column: finding.pos.column,
                verdict,
                message: finding.message.clone(),
                witness,
                trace,
            });
        }
    }
    sort_findings(&mut out);
    Ok(out)
}

/// Reads and checks each file; `display` names files in the report
/// (typically the path relative to a source root).
pub fn check_files<P: AsRef<Path>>(files: &[(P, String)], opts: &Options) -> Result<Vec<NativeFinding>, CheckError> {
    let mut out = Vec::new();
    for (path, display) in files {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|error| CheckError::Io {
            file: display.clone(),
            error,
        })?;
        out.extend(check_source(display, &text, opts)?);
    }
    sort_findings(&mut out);
    Ok(out)
}

pub fn sort_findings(findings: &mut [NativeFinding]) {
    findings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}
