//! The operations behind the `asef` command. Each returns the text for
//! standard output and the exit status, so the binary stays a thin shell.

pub mod conf;
pub mod demo;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use asef_core::{
    compare_reports, parse_config, parse_config_part, parse_report, serialize_report, AsefError, AsefReport,
    DiffResult, MappingSet, UriSubstitutionRule,
};
use asef_service::{router, AppState, ServiceConfig};
use asef_toolchain::adapter::{run_tool, substitute_uris, to_asef, AdapterError, ConversionContext, ToolDescriptor};
use asef_toolchain::orchestrator::{Orchestrator, PipelineRun};
use asef_toolchain::resources::Store;
use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::conf::{Conf, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;
pub const EXIT_TOOL: i32 = 5;
pub const EXIT_IO: i32 = 6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Tool(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Tool(_) => EXIT_TOOL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

/// Standard output and exit status of a command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, code: EXIT_OK }
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn input_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn root_element(xml: &str) -> Option<&str> {
    let mut rest = xml.trim_start_matches('\u{feff}');
    loop {
        rest = rest.trim_start().strip_prefix('<')?;
        let close = if rest.starts_with('?') {
            "?>"
        } else if rest.starts_with("!--") {
            "-->"
        } else if rest.starts_with('!') {
            ">"
        } else {
            let end = rest.find(|c: char| c.is_whitespace() || c == '>' || c == '/')?;
            return Some(&rest[..end]).filter(|n| !n.is_empty());
        };
        rest = &rest[rest.find(close)? + close.len()..];
    }
}

/// Checks an ASEF configuration or report. Schema and reference problems
/// are listed one per line with exit status 1; malformed XML is an input
/// error.
pub fn validate(path: &Path) -> Result<Outcome, CliError> {
    let text = read_file(path)?;
    let problems: Vec<String> = match root_element(&text) {
        Some("AsefReport") => match parse_report(&text) {
            Ok(r) => r.violations().iter().map(ToString::to_string).collect(),
            Err(e @ AsefError::Syntax { .. }) => return Err(input_error(path, e)),
            Err(e) => vec![e.to_string()],
        },
        Some("AsefConfiguration") => match parse_config(&text) {
            Ok(c) => c.effective().err().map(|e| e.to_string()).into_iter().collect(),
            Err(e @ AsefError::Syntax { .. }) => return Err(input_error(path, e)),
            Err(e) => vec![e.to_string()],
        },
        Some(other) => vec![format!("unexpected root element `{other}`")],
        None => return Err(input_error(path, "no root element")),
    };
    let mut stdout = String::new();
    for p in &problems {
        let _ = writeln!(stdout, "{p}");
    }
    Ok(Outcome {
        stdout,
        code: if problems.is_empty() { EXIT_OK } else { EXIT_FINDINGS },
    })
}

pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, CliError> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| CliError::Usage(format!("bad timestamp `{s}`: {e}")))
}

fn adapter_error(e: AdapterError) -> CliError {
    match e {
        AdapterError::Config(..) => CliError::Config(e.to_string()),
        AdapterError::NativeReport(_) | AdapterError::UnknownNative(_) => CliError::Input(e.to_string()),
        AdapterError::ToolCrash(_) | AdapterError::Timeout(_) => CliError::Tool(e.to_string()),
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeArgs {
    pub config: PathBuf,
    pub local: Option<PathBuf>,
    pub task: String,
    pub out: PathBuf,
    /// Directory the configuration's relative source paths live in; the
    /// configuration file's directory when absent.
    pub root: Option<PathBuf>,
    /// Local prefix the root is known under for URI substitution; the
    /// root's absolute path when absent.
    pub mount: Option<String>,
    pub created_at: Option<DateTime<Utc>>,
}

/// Runs minicheck on a task of the merged configuration and writes the
/// ASEF report. Local references no rule matched are listed on stdout.
pub fn analyze(args: &AnalyzeArgs) -> Result<Outcome, CliError> {
    let mut cfg = parse_config(&read_file(&args.config)?).map_err(|e| input_error(&args.config, e))?;
    if let Some(local) = &args.local {
        cfg.local_part = Some(parse_config_part(&read_file(local)?).map_err(|e| input_error(local, e))?);
    }
    let effective = cfg.effective().map_err(|e| CliError::Config(e.to_string()))?;
    let root = match &args.root {
        Some(r) => r.clone(),
        None => args.config.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let root = std::path::absolute(&root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
    let native = run_tool(&ToolDescriptor::builtin("minicheck"), &effective, &args.task, &root).map_err(adapter_error)?;
    let mut ctx = ConversionContext::new(MappingSet::default_set(), &args.task);
    ctx.source_root = Some(args.mount.as_ref().map(PathBuf::from).unwrap_or(root));
    if let Some(t) = args.created_at {
        ctx.created_at = t;
    }
    let report = to_asef(&native, &ctx, "minicheck").map_err(adapter_error)?;
    let (report, unmatched) = substitute_uris(&report, &effective.uri_substitution_rules);
    write_file(&args.out, &serialize_report(&report))?;
    Ok(Outcome::ok(unmatched_lines(&unmatched)))
}

fn unmatched_lines(unmatched: &[String]) -> String {
    unmatched.iter().map(|u| format!("no substitution rule for {u}\n")).collect()
}

/// Rules from a text file of `local-prefix uri-prefix` lines, or from the
/// rules of an ASEF configuration.
pub fn load_rules(path: &Path) -> Result<Vec<UriSubstitutionRule>, CliError> {
    let text = read_file(path)?;
    if root_element(&text) == Some("AsefConfiguration") {
        let cfg = parse_config(&text).map_err(|e| input_error(path, e))?;
        return Ok(cfg.effective().map_err(|e| CliError::Config(e.to_string()))?.uri_substitution_rules);
    }
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(local), Some(uri), None) => {
                let rule = UriSubstitutionRule::new(local, uri);
                rule.check().map_err(|e| input_error(path, format!("line {}: {e}", i + 1)))?;
                rules.push(rule);
            }
            _ => return Err(input_error(path, format!("line {}: expected `local-prefix uri-prefix`", i + 1))),
        }
    }
    Ok(rules)
}

#[derive(Debug, Clone)]
pub struct ConvertArgs {
    pub tool: String,
    pub native: PathBuf,
    pub map: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub out: PathBuf,
    pub task: String,
    pub source_root: Option<PathBuf>,
    pub created_at: Option<DateTime<Utc>>,
}

/// Converts a native report to ASEF and applies the URI substitution rules.
pub fn convert(args: &ConvertArgs) -> Result<Outcome, CliError> {
    let native = read_file(&args.native)?;
    let mappings = match &args.map {
        Some(p) => MappingSet::parse(&read_file(p)?).map_err(|e| input_error(p, e))?,
        None => MappingSet::default_set(),
    };
    let rules = match &args.rules {
        Some(p) => load_rules(p)?,
        None => Vec::new(),
    };
    let mut ctx = ConversionContext::new(mappings, &args.task);
    ctx.source_root = args.source_root.clone();
    if let Some(t) = args.created_at {
        ctx.created_at = t;
    }
    let report = to_asef(&native, &ctx, &args.tool).map_err(adapter_error)?;
    let (report, unmatched) = substitute_uris(&report, &rules);
    write_file(&args.out, &serialize_report(&report))?;
    Ok(Outcome::ok(unmatched_lines(&unmatched)))
}

pub fn load_report(path: &Path) -> Result<AsefReport, CliError> {
    parse_report(&read_file(path)?).map_err(|e| input_error(path, e))
}

fn describe(report: &AsefReport, c: &asef_core::AsefCheck) -> String {
    let at = match report.resolve_location(&c.location_ref) {
        Ok(r) => format!("{}:{}", r.file_ref, r.line),
        Err(_) => c.location_ref.clone(),
    };
    format!("{} {} {} {}", c.id, at, c.category, c.status)
}

/// Human-readable form of a comparison.
pub fn render_diff(d: &DiffResult, a: &AsefReport, b: &AsefReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "A: {} ({} checks)", a.tool_id, a.checks.len());
    let _ = writeln!(out, "B: {} ({} checks)", b.tool_id, b.checks.len());
    let _ = writeln!(out, "matched: {}", d.matched.len());
    for m in &d.matched {
        let _ = writeln!(out, "  {}  <->  {}  common {}", describe(a, &m.a), describe(b, &m.b), m.common_category);
    }
    let _ = writeln!(out, "only in A: {}", d.only_in_a.len());
    for c in &d.only_in_a {
        let _ = writeln!(out, "  {}", describe(a, c));
    }
    let _ = writeln!(out, "only in B: {}", d.only_in_b.len());
    for c in &d.only_in_b {
        let _ = writeln!(out, "  {}", describe(b, c));
    }
    let _ = writeln!(out, "status conflicts: {}", d.status_conflicts.len());
    for (x, y) in &d.status_conflicts {
        let _ = writeln!(out, "  {} {}  <->  {} {}", x.id, x.status, y.id, y.status);
    }
    out
}

/// Compares two reports; exit status 1 when anything is unmatched or
/// conflicting.
pub fn diff(a: &Path, b: &Path, json: bool) -> Result<Outcome, CliError> {
    let (ra, rb) = (load_report(a)?, load_report(b)?);
    let d = compare_reports(&ra, &rb);
    let stdout = if json {
        format!("{:#}\n", asef_service::diff_json(&d))
    } else {
        render_diff(&d, &ra, &rb)
    };
    Ok(Outcome {
        stdout,
        code: if d.is_clean() { EXIT_OK } else { EXIT_FINDINGS },
    })
}

pub fn load_settings(path: &Path) -> Result<Settings, CliError> {
    Conf::load(path)
        .map_err(CliError::Config)?
        .with_env(|k| std::env::var(k).ok())
        .settings()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Opens the store and starts the orchestrator, ingesting whatever the
/// analysis repository holds beyond the store.
pub fn start_orchestrator(settings: &Settings) -> Result<Arc<Orchestrator>, CliError> {
    let store = Store::open(&settings.store_dir, &settings.store_base()).map_err(|e| CliError::Io(e.to_string()))?;
    let orch = Orchestrator::start(settings.orchestrator_config(), Arc::new(RwLock::new(store)));
    let summary = orch.recover().map_err(|e| CliError::Tool(e.to_string()))?;
    if !summary.ingested.is_empty() || !summary.errors.is_empty() {
        tracing::info!(ingested = summary.ingested.len(), errors = summary.errors.len(), "recovered analysis repository");
    }
    Ok(orch)
}

fn spawn_poller(orch: &Arc<Orchestrator>, interval: u64) {
    if interval == 0 {
        return;
    }
    let weak = Arc::downgrade(orch);
    std::thread::spawn(move || loop {
        let Some(orch) = weak.upgrade() else { return };
        orch.poll_and_dispatch();
        drop(orch);
        std::thread::sleep(Duration::from_secs(interval));
    });
}

/// Runs the HTTP service and the orchestrator until the process ends.
pub fn serve(settings: &Settings, bind: Option<&str>) -> Result<(), CliError> {
    let orch = start_orchestrator(settings)?;
    spawn_poller(&orch, settings.poll_interval);
    let state = AppState {
        store: Arc::clone(orch.store()),
        repos: orch.repos(),
        orchestrator: Some(Arc::clone(&orch)),
    };
    let app = router(
        state,
        &ServiceConfig {
            base_path: settings.base_path.clone(),
            cors: settings.cors,
        },
    );
    let addr = bind.unwrap_or(&settings.bind).to_string();
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError::Io(format!("{addr}: {e}")))?;
        tracing::info!(%addr, base = %settings.store_base(), "listening");
        asef_service::serve(listener, app).await.map_err(|e| CliError::Io(e.to_string()))
    })
}

pub fn describe_run(r: &PipelineRun) -> String {
    let commit: String = r.event.commit.chars().take(12).collect();
    let mut s = format!("run {} {}@{} {} {}: {:?}", r.run_id, r.event.repo_id, commit, r.case_ref, r.tool_id, r.state)
        .to_lowercase();
    if let Some(res) = &r.result_ref {
        let _ = write!(s, " {res}");
    }
    if let Some(e) = &r.error {
        let _ = write!(s, " ({:?}: {})", e.kind, e.message);
    }
    s
}

/// Polls the code repositories every `poll` seconds and runs the analyses,
/// printing each finished run. With `once`, stops after the first round.
pub fn watch(settings: &Settings, poll: u64, once: bool, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let orch = start_orchestrator(settings)?;
    let mut reported = 0;
    loop {
        orch.poll_and_dispatch();
        orch.wait_idle(Duration::from_secs(3600));
        let runs = orch.runs();
        for r in &runs[reported..] {
            writeln!(out, "{}", describe_run(r)).map_err(|e| CliError::Io(e.to_string()))?;
        }
        reported = runs.len();
        if once {
            return Ok(());
        }
        std::thread::sleep(Duration::from_secs(poll.max(1)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_elements() {
        assert_eq!(root_element("<?xml version=\"1.0\"?>\n<!-- c --><AsefReport a=\"1\">"), Some("AsefReport"));
        assert_eq!(root_element("<AsefConfiguration>"), Some("AsefConfiguration"));
        assert_eq!(root_element("plain"), None);
        assert_eq!(root_element("int x = a < b;"), None);
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            CliError::Usage(String::new()).exit_code(),
            CliError::Input(String::new()).exit_code(),
            CliError::Config(String::new()).exit_code(),
            CliError::Tool(String::new()).exit_code(),
            CliError::Io(String::new()).exit_code(),
        ];
        assert_eq!(codes, [2, 3, 4, 5, 6]);
    }
}
