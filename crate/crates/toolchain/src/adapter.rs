//! Running analyzers and converting their native reports to ASEF.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use asef_core::taxonomy::split_native;
use asef_core::{
    AsefCheck, AsefLocation, AsefReport, CheckStatus, ConfigPart, HardwareTarget, LocationTarget, MappingSet,
    UriSubstitutionRule,
};
use chrono::{DateTime, Utc};
use minicheck::{parse_native_report, NativeFinding, Verdict};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ToolKind {
    BuiltinMinicheck,
    CannedStub,
}

/// An analyzer known to the toolchain.
///
/// A builtin tool with an empty `invocation` runs minicheck in process;
/// otherwise `invocation` is a program and argument template with the
/// placeholders `{workspace}`, `{out}`, `{int_bits}`, `{short_bits}`,
/// `{pointer_bits}` and `{files}` (which expands to one argument per file).
/// A canned stub returns the file at `report_path` verbatim; `{workspace}`
/// may appear in that path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolDescriptor {
    pub tool_id: String,
    pub kind: ToolKind,
    #[serde(default)]
    pub invocation: Vec<String>,
    #[serde(default)]
    pub report_path: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    DEFAULT_TIMEOUT.as_secs()
}

impl ToolDescriptor {
    pub fn builtin(tool_id: impl Into<String>) -> Self {
        ToolDescriptor {
            tool_id: tool_id.into(),
            kind: ToolKind::BuiltinMinicheck,
            invocation: Vec::new(),
            report_path: None,
            timeout_secs: default_timeout_secs(),
        }
    }

    pub fn command(tool_id: impl Into<String>, invocation: Vec<String>) -> Self {
        ToolDescriptor {
            invocation,
            ..Self::builtin(tool_id)
        }
    }

    pub fn canned(tool_id: impl Into<String>, report_path: impl Into<String>) -> Self {
        ToolDescriptor {
            tool_id: tool_id.into(),
            kind: ToolKind::CannedStub,
            invocation: Vec::new(),
            report_path: Some(report_path.into()),
            timeout_secs: default_timeout_secs(),
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdapterError {
    #[error("tool crashed: {0}")]
    ToolCrash(String),
    #[error("tool timed out after {0:?}")]
    Timeout(Duration),
    #[error("task `{0}`: {1}")]
    Config(String, String),
    #[error("malformed native report: {0}")]
    NativeReport(String),
    #[error("no ASEF category for {}", .0.iter().map(|(t, n)| format!("{t}:{n}")).collect::<Vec<_>>().join(", "))]
    UnknownNative(Vec<(String, String)>),
}

/// Source files of `task` in `cfg`, resolved against `workspace`.
pub fn task_files(cfg: &ConfigPart, task_id: &str, workspace: &Path) -> Result<Vec<(PathBuf, String)>, AdapterError> {
    let task = cfg
        .task(task_id)
        .ok_or_else(|| AdapterError::Config(task_id.into(), "unknown analysis task".into()))?;
    let module = cfg
        .source_module(&task.source_module_ref)
        .ok_or_else(|| AdapterError::Config(task_id.into(), format!("unknown source module `{}`", task.source_module_ref)))?;
    Ok(module
        .files
        .iter()
        .map(|f| {
            let p = Path::new(&f.reference);
            let full = if p.is_absolute() { p.to_path_buf() } else { workspace.join(p) };
            let shown = full
                .strip_prefix(workspace)
                .map(|r| r.to_string_lossy().replace('\\', "/"))
                .unwrap_or_else(|_| f.reference.clone());
            (full, shown)
        })
        .collect())
}

pub fn task_hardware(cfg: &ConfigPart, task_id: &str) -> Result<HardwareTarget, AdapterError> {
    let task = cfg
        .task(task_id)
        .ok_or_else(|| AdapterError::Config(task_id.into(), "unknown analysis task".into()))?;
    cfg.hardware_target(&task.hardware_target_ref)
        .cloned()
        .ok_or_else(|| AdapterError::Config(task_id.into(), format!("unknown hardware target `{}`", task.hardware_target_ref)))
}

/// Runs `tool` on `task` and returns its native report text. Returning is
/// the completion acknowledgment.
pub fn run_tool(tool: &ToolDescriptor, cfg: &ConfigPart, task_id: &str, workspace: &Path) -> Result<String, AdapterError> {
    match tool.kind {
        ToolKind::CannedStub => {
            let raw = tool
                .report_path
                .as_deref()
                .ok_or_else(|| AdapterError::ToolCrash(format!("{}: no canned report configured", tool.tool_id)))?;
            let path = raw.replace("{workspace}", &workspace.to_string_lossy());
            std::fs::read_to_string(&path).map_err(|e| AdapterError::ToolCrash(format!("{path}: {e}")))
        }
        ToolKind::BuiltinMinicheck => {
            let files = task_files(cfg, task_id, workspace)?;
            if let Some((missing, _)) = files.iter().find(|(p, _)| !p.is_file()) {
                return Err(AdapterError::ToolCrash(format!("missing source file {}", missing.display())));
            }
            let hw = task_hardware(cfg, task_id)?;
            if tool.invocation.is_empty() {
                run_in_process(files, hw, tool.timeout())
            } else {
                run_command(tool, &files, &hw, workspace)
            }
        }
    }
}

fn run_in_process(files: Vec<(PathBuf, String)>, hw: HardwareTarget, timeout: Duration) -> Result<String, AdapterError> {
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let opts = minicheck::Options {
            hw,
            ..minicheck::Options::default()
        };
        let _ = tx.send(minicheck::check_files(&files, &opts).map(|f| minicheck::emit_native_report(&f)));
    });
    match rx.recv_timeout(timeout) {
        Ok(Ok(text)) => Ok(text),
        Ok(Err(e)) => Err(AdapterError::ToolCrash(e.to_string())),
        Err(mpsc::RecvTimeoutError::Timeout) => Err(AdapterError::Timeout(timeout)),
        Err(mpsc::RecvTimeoutError::Disconnected) => Err(AdapterError::ToolCrash("analyzer thread panicked".into())),
    }
}

fn run_command(tool: &ToolDescriptor, files: &[(PathBuf, String)], hw: &HardwareTarget, workspace: &Path) -> Result<String, AdapterError> {
    let out = workspace.join(format!(".{}.native", tool.tool_id));
    let ws = workspace.to_string_lossy().into_owned();
    let out_s = out.to_string_lossy().into_owned();
    let mut args: Vec<String> = Vec::new();
    for a in &tool.invocation {
        if a == "{files}" {
            args.extend(files.iter().map(|(p, _)| p.to_string_lossy().into_owned()));
        } else {
            args.push(
                a.replace("{workspace}", &ws)
                    .replace("{out}", &out_s)
                    .replace("{int_bits}", &hw.int_size_bits.to_string())
                    .replace("{short_bits}", &hw.short_size_bits.to_string())
                    .replace("{pointer_bits}", &hw.pointer_size_bits.to_string()),
            );
        }
    }
    let (program, rest) = args.split_first().ok_or_else(|| AdapterError::ToolCrash("empty invocation".into()))?;
    let mut child = Command::new(program)
        .args(rest)
        .current_dir(workspace)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| AdapterError::ToolCrash(format!("{program}: {e}")))?;
    let deadline = Instant::now() + tool.timeout();
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(AdapterError::Timeout(tool.timeout()));
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(20)),
            Err(e) => return Err(AdapterError::ToolCrash(e.to_string())),
        }
    };
    if !status.success() {
        let mut err = String::new();
        if let Some(mut s) = child.stderr.take() {
            let _ = s.read_to_string(&mut err);
        }
        return Err(AdapterError::ToolCrash(format!("{program} exited with {status}: {}", err.trim())));
    }
    let text = std::fs::read_to_string(&out).map_err(|e| AdapterError::ToolCrash(format!("report {}: {e}", out.display())))?;
    let _ = std::fs::remove_file(&out);
    Ok(text)
}

/// Everything needed to turn a native report into an ASEF report.
#[derive(Debug, Clone)]
pub struct ConversionContext {
    pub mappings: MappingSet,
    pub rules: Vec<UriSubstitutionRule>,
    pub task_ref: String,
    /// Relative file names in the native report are resolved against this directory.
    pub source_root: Option<PathBuf>,
    pub created_at: DateTime<Utc>,
}

impl ConversionContext {
    pub fn new(mappings: MappingSet, task_ref: impl Into<String>) -> Self {
        ConversionContext {
            mappings,
            rules: Vec::new(),
            task_ref: task_ref.into(),
            source_root: None,
            created_at: Utc::now(),
        }
    }
}

pub fn status_of(verdict: Verdict) -> CheckStatus {
    match verdict {
        Verdict::ProvenSafe => CheckStatus::Safe,
        Verdict::ProvenUnsafe => CheckStatus::Unsafe,
        Verdict::Undecided => CheckStatus::Undecided,
        Verdict::Warning => CheckStatus::Warning,
        Verdict::SyntacticViolation => CheckStatus::SyntacticViolation,
    }
}

/// `{a = 1} {b = 2}`.
pub fn render_witness(values: &[(String, i64)]) -> String {
    values.iter().map(|(n, v)| format!("{{{n} = {v}}}")).collect::<Vec<_>>().join(" ")
}

fn file_ref(file: &str, root: Option<&Path>) -> String {
    match root {
        Some(root) if !file.contains("://") && Path::new(file).is_relative() => {
            root.join(file).to_string_lossy().replace('\\', "/")
        }
        _ => file.to_string(),
    }
}

/// Converts native report text. Location and check ids are assigned in
/// report order (`L1`, `L2`, ... and `C1`, `C2`, ...). The witness is
/// appended to the message.
pub fn to_asef(native: &str, ctx: &ConversionContext, tool_id: &str) -> Result<AsefReport, AdapterError> {
    let findings = parse_native_report(native).map_err(|e| AdapterError::NativeReport(e.to_string()))?;
    convert_findings(&findings, ctx, tool_id)
}

pub fn convert_findings(findings: &[NativeFinding], ctx: &ConversionContext, tool_id: &str) -> Result<AsefReport, AdapterError> {
    let mut unknown: Vec<(String, String)> = Vec::new();
    let mut categories = Vec::with_capacity(findings.len());
    for f in findings {
        let (tool, name) = split_native(&f.category).unwrap_or(("", f.category.as_str()));
        match ctx.mappings.map_native(tool, name) {
            Ok(c) => categories.push(c),
            Err(_) => {
                let key = (tool.to_string(), name.to_string());
                if !unknown.contains(&key) {
                    unknown.push(key);
                }
            }
        }
    }
    if !unknown.is_empty() {
        return Err(AdapterError::UnknownNative(unknown));
    }
    let root = ctx.source_root.as_deref();
    let mut report = AsefReport {
        tool_id: tool_id.to_string(),
        task_ref: ctx.task_ref.clone(),
        created_at: ctx.created_at,
        locations: Vec::new(),
        checks: Vec::new(),
    };
    let mut loc_ids: HashMap<(String, u32, u32), String> = HashMap::new();
    let mut location = |report: &mut AsefReport, file: &str, line: u32, column: u32| -> String {
        let key = (file_ref(file, root), line, column);
        if let Some(id) = loc_ids.get(&key) {
            return id.clone();
        }
        let id = format!("L{}", report.locations.len() + 1);
        report.locations.push(AsefLocation::in_file(&id, key.0.clone(), line, column));
        loc_ids.insert(key, id.clone());
        id
    };
    for (i, (f, category)) in findings.iter().zip(categories).enumerate() {
        let location_ref = location(&mut report, &f.file, f.line, f.column);
        let trace = f.trace.iter().map(|t| location(&mut report, &t.file, t.line, t.column)).collect();
        let message = match &f.witness {
            Some(w) if !w.is_empty() => format!("{}: {}", f.message, render_witness(w)),
            _ => f.message.clone(),
        };
        report.checks.push(AsefCheck {
            id: format!("C{}", i + 1),
            category,
            status: status_of(f.verdict),
            location_ref,
            message,
            trace,
        });
    }
    let report = substitute_uris(&report, &ctx.rules).0;
    Ok(report)
}

fn rule_matches(reference: &str, prefix: &str) -> bool {
    reference == prefix
        || (reference.starts_with(prefix) && (prefix.ends_with('/') || reference[prefix.len()..].starts_with('/')))
}

fn longest<'r>(reference: &str, rules: &'r [UriSubstitutionRule], key: impl Fn(&'r UriSubstitutionRule) -> &'r str) -> Option<&'r UriSubstitutionRule> {
    rules
        .iter()
        .filter(|r| rule_matches(reference, key(r)))
        .max_by_key(|r| key(r).len())
}

/// Rewrites local file references to URIs, longest matching prefix first.
/// Returns the rewritten report and the local references no rule matched.
pub fn substitute_uris(report: &AsefReport, rules: &[UriSubstitutionRule]) -> (AsefReport, Vec<String>) {
    let mut out = report.clone();
    let mut unmatched: BTreeMap<String, ()> = BTreeMap::new();
    for loc in &mut out.locations {
        if let LocationTarget::File(reference) = &loc.target {
            match substitute_one(reference, rules) {
                Some(uri) => loc.target = LocationTarget::File(uri),
                None if !reference.contains("://") => {
                    unmatched.insert(reference.clone(), ());
                }
                None => {}
            }
        }
    }
    (out, unmatched.into_keys().collect())
}

pub fn substitute_one(reference: &str, rules: &[UriSubstitutionRule]) -> Option<String> {
    longest(reference, rules, |r| r.local_prefix.as_str()).map(|r| format!("{}{}", r.uri_prefix, &reference[r.local_prefix.len()..]))
}

/// The inverse rewrite: a URI back to a local path.
pub fn localize(reference: &str, rules: &[UriSubstitutionRule]) -> Option<String> {
    longest(reference, rules, |r| r.uri_prefix.as_str()).map(|r| format!("{}{}", r.local_prefix, &reference[r.uri_prefix.len()..]))
}
