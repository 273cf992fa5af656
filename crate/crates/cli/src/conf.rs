//! The flat `key = value` configuration file of `serve` and `watch`.
//!
//! ```text
//! # asef.conf
//! store_dir = state/store
//! state_dir = state
//! base_url = http://localhost:8080
//! bind = 127.0.0.1:8080
//! analysis.path = analysis
//! code.lamp.path = code.git
//! tool.minicheck.kind = builtin-minicheck
//! tool.astree-stub.kind = canned-stub
//! tool.astree-stub.report = stubs/astree-stub.native
//! ```
//!
//! Relative paths are resolved against the directory of the file. Every
//! key can be overridden by an environment variable `ASEF_<KEY>`, the key
//! upper-cased with `.` and `-` replaced by `_` (`ASEF_BIND`,
//! `ASEF_CODE_LAMP_PATH`).

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use asef_core::MappingSet;
use asef_toolchain::adapter::{ToolDescriptor, ToolKind, DEFAULT_TIMEOUT};
use asef_toolchain::orchestrator::{OrchestratorConfig, RepoBinding, RepoKind};

/// Keys outside the `code.*` and `tool.*` families.
pub const TOP_LEVEL_KEYS: [&str; 12] = [
    "store_dir",
    "state_dir",
    "base_url",
    "base_path",
    "bind",
    "cors",
    "workers",
    "poll_interval",
    "crash_after_publish",
    "mappings",
    "analysis.repo_id",
    "analysis.path",
];

const CODE_FIELDS: [&str; 4] = ["path", "uri_base", "branch", "remote"];
const TOOL_FIELDS: [&str; 4] = ["kind", "invocation", "report", "timeout"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conf {
    entries: BTreeMap<String, String>,
    dir: PathBuf,
}

pub fn env_name(key: &str) -> String {
    format!("ASEF_{}", key.to_uppercase().replace(['.', '-'], "_"))
}

fn known(key: &str) -> bool {
    if TOP_LEVEL_KEYS.contains(&key) {
        return true;
    }
    let parts: Vec<&str> = key.split('.').collect();
    match parts.as_slice() {
        ["code", id, field] => !id.is_empty() && CODE_FIELDS.contains(field),
        ["tool", id, field] => !id.is_empty() && TOOL_FIELDS.contains(field),
        _ => false,
    }
}

impl Conf {
    pub fn parse(text: &str, dir: impl Into<PathBuf>) -> Result<Conf, String> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            if !known(k) {
                return Err(format!("line {}: unknown key `{k}`", i + 1));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(format!("line {}: duplicate key `{k}`", i + 1));
            }
        }
        Ok(Conf { entries, dir: dir.into() })
    }

    pub fn load(path: &Path) -> Result<Conf, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let dir = match path.parent().filter(|d| !d.as_os_str().is_empty()) {
            Some(d) => std::path::absolute(d),
            None => std::env::current_dir(),
        }
        .map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text, dir).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Applies `ASEF_*` overrides for the top-level keys and every key
    /// present in the file.
    pub fn with_env(mut self, var: impl Fn(&str) -> Option<String>) -> Conf {
        let keys: Vec<String> = TOP_LEVEL_KEYS
            .iter()
            .map(|k| k.to_string())
            .chain(self.entries.keys().cloned())
            .collect();
        for k in keys {
            if let Some(v) = var(&env_name(&k)) {
                self.entries.insert(k, v);
            }
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(|v| self.dir.join(v))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, String> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| format!("`{key}`: cannot parse `{v}`")),
        }
    }

    fn ids(&self, family: &str) -> Vec<String> {
        let ids: BTreeSet<String> = self
            .entries
            .keys()
            .filter_map(|k| k.strip_prefix(family)?.strip_prefix('.')?.split('.').next().map(str::to_string))
            .collect();
        ids.into_iter().collect()
    }

    pub fn settings(&self) -> Result<Settings, String> {
        let base_url = self.get("base_url").unwrap_or("http://localhost:8080").trim_end_matches('/').to_string();
        let base_path = match self.get("base_path") {
            None => String::new(),
            Some(p) => format!("/{}", p.trim_matches('/')),
        };
        let public = format!("{base_url}{base_path}");
        let state_dir = self.path("state_dir").unwrap_or_else(|| self.dir.join("state"));
        let code_repos = self
            .ids("code")
            .into_iter()
            .map(|id| {
                let key = |f: &str| format!("code.{id}.{f}");
                Ok(RepoBinding {
                    local_path: self.path(&key("path")).ok_or_else(|| format!("`{}` is required", key("path")))?,
                    remote_url: self.get(&key("remote")).map(str::to_string),
                    uri_base: self
                        .get(&key("uri_base"))
                        .map(str::to_string)
                        .unwrap_or_else(|| format!("{public}/code/{id}")),
                    branch: self.get(&key("branch")).map(str::to_string),
                    kind: RepoKind::Code,
                    repo_id: id,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let tools = self
            .ids("tool")
            .into_iter()
            .map(|id| {
                let key = |f: &str| format!("tool.{id}.{f}");
                let kind = match self.get(&key("kind")).unwrap_or("builtin-minicheck") {
                    "builtin-minicheck" => ToolKind::BuiltinMinicheck,
                    "canned-stub" => ToolKind::CannedStub,
                    other => return Err(format!("`{}`: unknown tool kind `{other}`", key("kind"))),
                };
                let report_path = self.path(&key("report")).map(|p| p.to_string_lossy().into_owned());
                if kind == ToolKind::CannedStub && report_path.is_none() {
                    return Err(format!("`{}` is required for a canned stub", key("report")));
                }
                Ok(ToolDescriptor {
                    invocation: self
                        .get(&key("invocation"))
                        .map(|s| s.split_whitespace().map(str::to_string).collect())
                        .unwrap_or_default(),
                    report_path,
                    timeout_secs: self.parsed(&key("timeout"), DEFAULT_TIMEOUT.as_secs())?,
                    kind,
                    tool_id: id,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let mappings = match self.path("mappings") {
            None => MappingSet::default_set(),
            Some(p) => {
                let text = std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
                MappingSet::parse(&text).map_err(|e| format!("{}: {e}", p.display()))?
            }
        };
        Ok(Settings {
            store_dir: self.path("store_dir").unwrap_or_else(|| state_dir.join("store")),
            bind: self.get("bind").unwrap_or("127.0.0.1:8080").to_string(),
            cors: self.parsed("cors", true)?,
            workers: self.parsed("workers", 2usize)?,
            poll_interval: self.parsed("poll_interval", 0u64)?,
            crash_after_publish: self.parsed("crash_after_publish", false)?,
            analysis_repo: RepoBinding {
                repo_id: self.get("analysis.repo_id").unwrap_or("analysis").to_string(),
                kind: RepoKind::Analysis,
                local_path: self.path("analysis.path").ok_or("`analysis.path` is required")?,
                remote_url: None,
                uri_base: String::new(),
                branch: None,
            },
            state_dir,
            base_url,
            base_path,
            code_repos,
            tools,
            mappings,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub store_dir: PathBuf,
    pub state_dir: PathBuf,
    pub base_url: String,
    /// Empty or `/segment...`.
    pub base_path: String,
    pub bind: String,
    pub cors: bool,
    pub workers: usize,
    /// Seconds between polls of the code repositories; 0 disables polling.
    pub poll_interval: u64,
    pub crash_after_publish: bool,
    pub mappings: MappingSet,
    pub code_repos: Vec<RepoBinding>,
    pub analysis_repo: RepoBinding,
    pub tools: Vec<ToolDescriptor>,
}

impl Settings {
    /// Prefix of every resource URI.
    pub fn store_base(&self) -> String {
        format!("{}{}", self.base_url, self.base_path)
    }

    pub fn orchestrator_config(&self) -> OrchestratorConfig {
        OrchestratorConfig {
            state_dir: self.state_dir.clone(),
            code_repos: self.code_repos.clone(),
            analysis_repo: self.analysis_repo.clone(),
            tools: self.tools.clone(),
            mappings: self.mappings.clone(),
            workers: self.workers,
            crash_after_publish: self.crash_after_publish,
        }
    }
}
