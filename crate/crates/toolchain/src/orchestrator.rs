//! The analysis client: turns code-repository pushes into analysis runs,
//! publishes reports to the analysis repository and ingests them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Condvar, Mutex, RwLock};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use asef_core::{parse_report, serialize_report, MappingSet, SourceFile, UriSubstitutionRule};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use tracing::{info, warn};

use crate::adapter::{localize, run_tool, to_asef, AdapterError, ConversionContext, ToolDescriptor};
use crate::git;
use crate::resources::{links_match, CodeRepos, Store, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepoKind {
    Code,
    Analysis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RepoBinding {
    pub repo_id: String,
    pub kind: RepoKind,
    pub local_path: PathBuf,
    #[serde(default)]
    pub remote_url: Option<String>,
    /// URI prefix of the repository's files (code repositories).
    #[serde(default)]
    pub uri_base: String,
    /// Branch followed by polling; `HEAD` when absent.
    #[serde(default)]
    pub branch: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PushEvent {
    pub repo_id: String,
    pub commit: String,
    pub changed_paths: Vec<String>,
    pub received_at: DateTime<Utc>,
}

impl PushEvent {
    pub fn new(repo_id: impl Into<String>, commit: impl Into<String>, changed_paths: Vec<String>) -> Self {
        PushEvent {
            repo_id: repo_id.into(),
            commit: commit.into(),
            changed_paths,
            received_at: Utc::now(),
        }
    }

    /// Reads a webhook body: either `{repoId, commit, changedPaths}` or a
    /// git-hosting push payload (`repository`/`project` name, `after` or
    /// `checkout_sha`, and the `added`/`modified`/`removed` lists of its
    /// `commits`).
    pub fn from_payload(v: &Value) -> Result<PushEvent, String> {
        let str_at = |v: &Value, ptr: &str| v.pointer(ptr).and_then(Value::as_str).map(str::to_string);
        let repo_id = str_at(v, "/repoId")
            .or_else(|| str_at(v, "/project/name"))
            .or_else(|| str_at(v, "/repository/name"))
            .ok_or("missing repoId")?;
        let commit = str_at(v, "/commit")
            .or_else(|| str_at(v, "/checkout_sha"))
            .or_else(|| str_at(v, "/after"))
            .ok_or("missing commit")?;
        if commit.is_empty() || !commit.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(format!("commit `{commit}` is not a hexadecimal hash"));
        }
        let mut paths: Vec<String> = Vec::new();
        if let Some(list) = v.get("changedPaths") {
            let list = list.as_array().ok_or("changedPaths must be a list")?;
            for p in list {
                paths.push(p.as_str().ok_or("changedPaths must hold strings")?.to_string());
            }
        } else if let Some(commits) = v.get("commits").and_then(Value::as_array) {
            for c in commits {
                for key in ["added", "modified", "removed"] {
                    for p in c.get(key).and_then(Value::as_array).into_iter().flatten() {
                        if let Some(p) = p.as_str() {
                            if !paths.iter().any(|x| x == p) {
                                paths.push(p.to_string());
                            }
                        }
                    }
                }
            }
        }
        if paths.is_empty() {
            return Err("no changed paths".into());
        }
        Ok(PushEvent::new(repo_id, commit, paths))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunState {
    Queued,
    Fetching,
    Analyzing,
    Substituting,
    Publishing,
    Ingesting,
    Done,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunErrorKind {
    CheckoutError,
    ToolCrash,
    Timeout,
    ConversionError,
    PublishError,
    IngestError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunError {
    pub kind: RunErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PipelineRun {
    pub run_id: u64,
    pub event: PushEvent,
    pub case_ref: String,
    pub tool_id: String,
    pub state: RunState,
    /// Every state the run has been in, in order.
    pub history: Vec<RunState>,
    pub result_ref: Option<String>,
    pub error: Option<RunError>,
}

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("unknown repository `{0}`")]
    UnknownRepo(String),
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Git(#[from] git::GitError),
    #[error("state file {path}: {message}")]
    State { path: String, message: String },
}

#[derive(Debug, Clone)]
pub struct OrchestratorConfig {
    pub state_dir: PathBuf,
    pub code_repos: Vec<RepoBinding>,
    pub analysis_repo: RepoBinding,
    pub tools: Vec<ToolDescriptor>,
    pub mappings: MappingSet,
    pub workers: usize,
    /// Abort the process right after a report is committed to the analysis
    /// repository, before it is ingested.
    pub crash_after_publish: bool,
}

/// Code repositories read through git.
pub struct GitRepos {
    repos: Vec<RepoBinding>,
}

impl GitRepos {
    pub fn new(repos: Vec<RepoBinding>) -> Self {
        GitRepos { repos }
    }

    fn binding(&self, repo: &str) -> Result<&RepoBinding, String> {
        self.repos
            .iter()
            .find(|r| r.repo_id == repo)
            .ok_or_else(|| format!("unknown repository `{repo}`"))
    }
}

impl CodeRepos for GitRepos {
    fn locate(&self, uri: &str) -> Option<(String, String)> {
        self.repos
            .iter()
            .filter(|r| !r.uri_base.is_empty())
            .filter_map(|r| {
                let base = r.uri_base.trim_end_matches('/');
                let rest = uri.strip_prefix(base)?.strip_prefix('/')?;
                Some((base.len(), r.repo_id.clone(), rest.to_string()))
            })
            .max_by_key(|(len, _, _)| *len)
            .map(|(_, repo, path)| (repo, path))
    }

    fn read(&self, repo: &str, path: &str, commit: &str) -> Result<Vec<u8>, String> {
        let b = self.binding(repo)?;
        git::show(&b.local_path, commit, path).map_err(|e| e.to_string())
    }

    fn list(&self, repo: &str, commit: &str) -> Result<Vec<String>, String> {
        let b = self.binding(repo)?;
        git::ls_tree(&b.local_path, commit).map_err(|e| e.to_string())
    }
}

/// Outcome of ingesting the reports of one analysis-repository commit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestSummary {
    pub ingested: Vec<String>,
    pub unchanged: Vec<String>,
    pub errors: Vec<(String, String)>,
}

#[derive(Default)]
struct Sched {
    runs: Vec<PipelineRun>,
    queues: BTreeMap<String, VecDeque<u64>>,
    busy: BTreeSet<String>,
    shutdown: bool,
}

struct Inner {
    cfg: OrchestratorConfig,
    store: Arc<RwLock<Store>>,
    repos: Arc<GitRepos>,
    sched: Mutex<Sched>,
    wake: Condvar,
    publish: Mutex<()>,
    poll: Mutex<()>,
}

pub struct Orchestrator {
    inner: Arc<Inner>,
    workers: Mutex<Vec<JoinHandle<()>>>,
}

/// `reports/{caseId}/{commit}/{toolId}.asef.xml`.
pub fn report_path(case_id: &str, commit: &str, tool_id: &str) -> String {
    format!("reports/{case_id}/{commit}/{tool_id}.asef.xml")
}

fn parse_report_path(path: &str) -> Option<(String, String, String)> {
    let rest = path.strip_prefix("reports/")?;
    let mut parts = rest.split('/');
    let (case, commit, file) = (parts.next()?, parts.next()?, parts.next()?);
    if parts.next().is_some() {
        return None;
    }
    let tool = file.strip_suffix(".asef.xml")?;
    Some((case.to_string(), commit.to_string(), tool.to_string()))
}

fn case_id_of(uri: &str) -> &str {
    uri.rsplit('/').next().unwrap_or(uri)
}

impl Orchestrator {
    /// Opens the orchestrator over an existing store and starts its workers.
    pub fn start(cfg: OrchestratorConfig, store: Arc<RwLock<Store>>) -> Arc<Orchestrator> {
        let repos = Arc::new(GitRepos::new(cfg.code_repos.clone()));
        let workers = cfg.workers.max(1);
        let inner = Arc::new(Inner {
            cfg,
            store,
            repos,
            sched: Mutex::new(Sched::default()),
            wake: Condvar::new(),
            publish: Mutex::new(()),
            poll: Mutex::new(()),
        });
        let handles = (0..workers)
            .map(|_| {
                let inner = Arc::clone(&inner);
                std::thread::spawn(move || worker(&inner))
            })
            .collect();
        Arc::new(Orchestrator {
            inner,
            workers: Mutex::new(handles),
        })
    }

    pub fn store(&self) -> &Arc<RwLock<Store>> {
        &self.inner.store
    }

    pub fn repos(&self) -> Arc<GitRepos> {
        Arc::clone(&self.inner.repos)
    }

    pub fn config(&self) -> &OrchestratorConfig {
        &self.inner.cfg
    }

    /// Queues one run per affected case. Events from the analysis
    /// repository are ingested instead.
    pub fn handle_push(&self, event: PushEvent) -> Result<Vec<PipelineRun>, OrchestratorError> {
        if event.repo_id == self.inner.cfg.analysis_repo.repo_id {
            let summary = self.handle_analysis_repo_push(&event)?;
            info!(?summary, "analysis repository push");
            return Ok(Vec::new());
        }
        if !self.inner.cfg.code_repos.iter().any(|r| r.repo_id == event.repo_id) {
            return Err(OrchestratorError::UnknownRepo(event.repo_id));
        }
        if event.changed_paths.is_empty() {
            return Err(OrchestratorError::InvalidEvent("no changed paths".into()));
        }
        let store = self.inner.store.read().expect("store lock");
        let affected: Vec<(String, String)> = store
            .list_cases()
            .into_iter()
            .filter(|c| c.repo_id == event.repo_id && event.changed_paths.iter().any(|p| links_match(&c.file_links, p)))
            .filter(|c| store.result_for(&c.uri, &event.commit, &c.tool_id).is_none())
            .map(|c| (c.uri.clone(), c.tool_id.clone()))
            .collect();
        drop(store);
        let mut sched = self.inner.sched.lock().expect("scheduler lock");
        let mut queued = Vec::new();
        for (case_ref, tool_id) in affected {
            let duplicate = sched.runs.iter().any(|r| {
                r.case_ref == case_ref && r.event.commit == event.commit && r.tool_id == tool_id && r.state != RunState::Failed
            });
            if duplicate {
                continue;
            }
            let run = PipelineRun {
                run_id: sched.runs.len() as u64 + 1,
                event: event.clone(),
                case_ref: case_ref.clone(),
                tool_id,
                state: RunState::Queued,
                history: vec![RunState::Queued],
                result_ref: None,
                error: None,
            };
            sched.queues.entry(case_ref).or_default().push_back(run.run_id);
            sched.runs.push(run.clone());
            queued.push(run);
        }
        drop(sched);
        self.inner.wake.notify_all();
        Ok(queued)
    }

    /// Ingests every report file changed by an analysis-repository commit.
    /// Reports already ingested are left alone.
    pub fn handle_analysis_repo_push(&self, event: &PushEvent) -> Result<IngestSummary, OrchestratorError> {
        if event.repo_id != self.inner.cfg.analysis_repo.repo_id {
            return Err(OrchestratorError::UnknownRepo(event.repo_id.clone()));
        }
        Ok(self.inner.ingest_paths(&event.commit, &event.changed_paths))
    }

    /// Ingests reports present in the analysis repository but missing from
    /// the store, e.g. after a crash between publishing and ingesting.
    pub fn recover(&self) -> Result<IngestSummary, OrchestratorError> {
        let repo = &self.inner.cfg.analysis_repo.local_path;
        let Some(head) = git::resolve(repo, "HEAD")? else {
            return Ok(IngestSummary::default());
        };
        let paths: Vec<String> = git::ls_tree(repo, &head)?
            .into_iter()
            .filter(|p| parse_report_path(p).is_some())
            .collect();
        Ok(self.inner.ingest_paths(&head, &paths))
    }

    pub fn runs(&self) -> Vec<PipelineRun> {
        self.inner.sched.lock().expect("scheduler lock").runs.clone()
    }

    pub fn run(&self, id: u64) -> Option<PipelineRun> {
        self.inner
            .sched
            .lock()
            .expect("scheduler lock")
            .runs
            .iter()
            .find(|r| r.run_id == id)
            .cloned()
    }

    /// Blocks until no run is queued or active, or `timeout` passes.
    pub fn wait_idle(&self, timeout: Duration) -> bool {
        let deadline = Instant::now() + timeout;
        let mut sched = self.inner.sched.lock().expect("scheduler lock");
        loop {
            if sched.busy.is_empty() && sched.queues.values().all(VecDeque::is_empty) {
                return true;
            }
            let now = Instant::now();
            if now >= deadline {
                return false;
            }
            sched = self.inner.wake.wait_timeout(sched, deadline - now).expect("scheduler lock").0;
        }
    }

    /// New commits on the code repositories since the last poll. The last
    /// seen commit per repository is kept in `poll-state.json`.
    pub fn poll_once(&self) -> Vec<PushEvent> {
        let _guard = self.inner.poll.lock().expect("poll lock");
        let path = self.inner.cfg.state_dir.join("poll-state.json");
        let mut seen: BTreeMap<String, String> = std::fs::read(&path)
            .ok()
            .and_then(|b| serde_json::from_slice(&b).ok())
            .unwrap_or_default();
        let mut events = Vec::new();
        for repo in &self.inner.cfg.code_repos {
            let rev = repo.branch.as_deref().unwrap_or("HEAD");
            let head = match git::resolve(&repo.local_path, rev) {
                Ok(Some(h)) => h,
                Ok(None) => continue,
                Err(e) => {
                    warn!(repo = %repo.repo_id, error = %e, "repository unavailable");
                    continue;
                }
            };
            let last = seen.get(&repo.repo_id).cloned();
            if last.as_deref() == Some(head.as_str()) {
                continue;
            }
            let commits = match git::rev_list(&repo.local_path, last.as_deref(), &head) {
                Ok(c) => c,
                Err(e) => {
                    warn!(repo = %repo.repo_id, error = %e, "repository unavailable");
                    continue;
                }
            };
            for c in commits {
                match git::changed_paths(&repo.local_path, &c) {
                    Ok(paths) if !paths.is_empty() => events.push(PushEvent::new(&repo.repo_id, c, paths)),
                    Ok(_) => {}
                    Err(e) => warn!(repo = %repo.repo_id, error = %e, "cannot diff commit"),
                }
            }
            seen.insert(repo.repo_id.clone(), head);
        }
        if let Err(e) = std::fs::create_dir_all(&self.inner.cfg.state_dir)
            .and_then(|_| std::fs::write(&path, serde_json::to_vec_pretty(&seen).expect("state serializes")))
        {
            warn!(error = %e, "cannot persist poll state");
        }
        events
    }

    /// Polls and queues the resulting runs.
    pub fn poll_and_dispatch(&self) -> Vec<PipelineRun> {
        let mut runs = Vec::new();
        for e in self.poll_once() {
            match self.handle_push(e) {
                Ok(r) => runs.extend(r),
                Err(e) => warn!(error = %e, "push event rejected"),
            }
        }
        runs
    }

    /// Stops the workers after the runs in progress.
    pub fn shutdown(&self) {
        self.inner.sched.lock().expect("scheduler lock").shutdown = true;
        self.inner.wake.notify_all();
        for h in self.workers.lock().expect("worker list").drain(..) {
            let _ = h.join();
        }
    }
}

impl Drop for Orchestrator {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn worker(inner: &Inner) {
    loop {
        let (run_id, case_ref) = {
            let mut sched = inner.sched.lock().expect("scheduler lock");
            loop {
                if sched.shutdown {
                    return;
                }
                let next = sched
                    .queues
                    .iter()
                    .filter(|(case, q)| !q.is_empty() && !sched.busy.contains(*case))
                    .min_by_key(|(_, q)| q[0])
                    .map(|(case, _)| case.clone());
                if let Some(case) = next {
                    let id = sched.queues.get_mut(&case).and_then(VecDeque::pop_front).expect("non-empty queue");
                    sched.busy.insert(case.clone());
                    break (id, case);
                }
                sched = inner.wake.wait(sched).expect("scheduler lock");
            }
        };
        inner.execute(run_id);
        inner.sched.lock().expect("scheduler lock").busy.remove(&case_ref);
        inner.wake.notify_all();
    }
}

impl Inner {
    fn set_state(&self, run_id: u64, state: RunState) -> PipelineRun {
        let mut sched = self.sched.lock().expect("scheduler lock");
        let run = sched.runs.iter_mut().find(|r| r.run_id == run_id).expect("known run");
        run.state = state;
        run.history.push(state);
        run.clone()
    }

    fn fail(&self, run_id: u64, kind: RunErrorKind, message: String) {
        warn!(run_id, ?kind, %message, "run failed");
        let mut sched = self.sched.lock().expect("scheduler lock");
        let run = sched.runs.iter_mut().find(|r| r.run_id == run_id).expect("known run");
        run.state = RunState::Failed;
        run.history.push(RunState::Failed);
        run.error = Some(RunError { kind, message });
    }

    fn execute(&self, run_id: u64) {
        let workspace = self.cfg.state_dir.join("work").join(format!("run-{run_id}"));
        let outcome = self.pipeline(run_id, &workspace);
        let _ = std::fs::remove_dir_all(&workspace);
        match outcome {
            Ok(result) => {
                let mut sched = self.sched.lock().expect("scheduler lock");
                let run = sched.runs.iter_mut().find(|r| r.run_id == run_id).expect("known run");
                run.state = RunState::Done;
                run.history.push(RunState::Done);
                run.result_ref = Some(result);
            }
            Err((kind, message)) => self.fail(run_id, kind, message),
        }
    }

    fn pipeline(&self, run_id: u64, workspace: &Path) -> Result<String, (RunErrorKind, String)> {
        use RunErrorKind::*;
        let run = self.set_state(run_id, RunState::Fetching);
        let commit = run.event.commit.clone();
        let repo = self
            .cfg
            .code_repos
            .iter()
            .find(|r| r.repo_id == run.event.repo_id)
            .ok_or((CheckoutError, format!("unknown repository `{}`", run.event.repo_id)))?;
        let _ = std::fs::remove_dir_all(workspace);
        std::fs::create_dir_all(workspace.parent().expect("workspace parent")).map_err(|e| (CheckoutError, e.to_string()))?;
        git::checkout(&repo.local_path, &commit, workspace).map_err(|e| (CheckoutError, e.to_string()))?;

        self.set_state(run_id, RunState::Analyzing);
        let (case, config) = {
            let store = self.store.read().expect("store lock");
            let case = store.case(&run.case_ref).map_err(|e| (ConversionError, e.to_string()))?.clone();
            let config = store.case_config(&case).map_err(|e| (ConversionError, e.to_string()))?;
            (case, config)
        };
        let tool = self
            .cfg
            .tools
            .iter()
            .find(|t| t.tool_id == case.tool_id)
            .ok_or((ToolCrash, format!("unknown tool `{}`", case.tool_id)))?;
        let mut effective = config.effective().map_err(|e| (ConversionError, e.to_string()))?;
        let ws = workspace.to_string_lossy().replace('\\', "/");
        let mut rules = effective.uri_substitution_rules.clone();
        rules.push(UriSubstitutionRule::new(&ws, repo.uri_base.trim_end_matches('/')));
        for m in &mut effective.source_modules {
            for f in &mut m.files {
                if let Some(local) = localize(&f.reference, &rules) {
                    *f = SourceFile::new(local);
                }
            }
        }
        let native = run_tool(tool, &effective, &case.task_ref, workspace).map_err(|e| match e {
            AdapterError::Timeout(_) => (Timeout, e.to_string()),
            e => (ToolCrash, e.to_string()),
        })?;

        self.set_state(run_id, RunState::Substituting);
        let ctx = ConversionContext {
            mappings: self.cfg.mappings.clone(),
            rules,
            task_ref: case.task_ref.clone(),
            source_root: Some(workspace.to_path_buf()),
            created_at: Utc::now(),
        };
        let report = to_asef(&native, &ctx, &tool.tool_id).map_err(|e| (ConversionError, e.to_string()))?;

        self.set_state(run_id, RunState::Publishing);
        let rel = report_path(case_id_of(&case.uri), &commit, &tool.tool_id);
        let analysis_commit = {
            let _guard = self.publish.lock().expect("publish lock");
            let dir = &self.cfg.analysis_repo.local_path;
            let file = dir.join(&rel);
            std::fs::create_dir_all(file.parent().expect("report dir")).map_err(|e| (PublishError, e.to_string()))?;
            std::fs::write(&file, serialize_report(&report)).map_err(|e| (PublishError, e.to_string()))?;
            git::commit_paths(dir, &[&rel], &format!("Add {rel}")).map_err(|e| (PublishError, e.to_string()))?
        };
        if self.cfg.crash_after_publish {
            warn!(run_id, "aborting after publish");
            std::process::abort();
        }

        self.set_state(run_id, RunState::Ingesting);
        let summary = self.ingest_paths(&analysis_commit, &[rel.clone()]);
        if let Some((_, msg)) = summary.errors.first() {
            return Err((IngestError, msg.clone()));
        }
        let store = self.store.read().expect("store lock");
        store
            .result_for(&case.uri, &commit, &tool.tool_id)
            .map(|r| r.uri.clone())
            .ok_or((IngestError, format!("no result for {rel}")))
    }

    fn ingest_paths(&self, analysis_commit: &str, paths: &[String]) -> IngestSummary {
        let mut summary = IngestSummary::default();
        let repo = &self.cfg.analysis_repo.local_path;
        for path in paths {
            let Some((case_id, commit, _tool)) = parse_report_path(path) else {
                continue;
            };
            let outcome = (|| -> Result<(String, bool), String> {
                let bytes = git::show(repo, analysis_commit, path).map_err(|e| e.to_string())?;
                let text = String::from_utf8(bytes).map_err(|e| e.to_string())?;
                let report = parse_report(&text).map_err(|e| e.to_string())?;
                let mut store = self.store.write().expect("store lock");
                let case_uri = format!("{}/cases/{case_id}", store.base());
                let done = store
                    .ingest_report(&report, &case_uri, &commit, self.repos.as_ref())
                    .map_err(|e| e.to_string())?;
                Ok((done.result.uri, done.created))
            })();
            match outcome {
                Ok((uri, true)) => summary.ingested.push(uri),
                Ok((uri, false)) => summary.unchanged.push(uri),
                Err(e) => {
                    warn!(%path, error = %e, "report not ingested");
                    summary.errors.push((path.clone(), e));
                }
            }
        }
        summary
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn minimal_payload() {
        let e = PushEvent::from_payload(&json!({"repoId": "lamp", "commit": "abc123", "changedPaths": ["src/lamp.mc"]})).unwrap();
        assert_eq!((e.repo_id.as_str(), e.commit.as_str()), ("lamp", "abc123"));
        assert_eq!(e.changed_paths, vec!["src/lamp.mc"]);
    }

    #[test]
    fn hosting_payload() {
        let body = json!({
            "object_kind": "push",
            "checkout_sha": "deadbeef",
            "project": {"name": "lamp"},
            "commits": [
                {"added": ["a.mc"], "modified": ["src/lamp.mc"], "removed": []},
                {"added": [], "modified": ["src/lamp.mc"], "removed": ["old.mc"]}
            ]
        });
        let e = PushEvent::from_payload(&body).unwrap();
        assert_eq!(e.repo_id, "lamp");
        assert_eq!(e.commit, "deadbeef");
        assert_eq!(e.changed_paths, vec!["a.mc", "src/lamp.mc", "old.mc"]);
    }

    #[test]
    fn malformed_payloads() {
        assert!(PushEvent::from_payload(&json!({"repoId": "lamp", "changedPaths": ["a"]})).is_err());
        assert!(PushEvent::from_payload(&json!({"repoId": "lamp", "commit": "xyz", "changedPaths": ["a"]})).is_err());
        assert!(PushEvent::from_payload(&json!({"repoId": "lamp", "commit": "ab", "changedPaths": []})).is_err());
        assert!(PushEvent::from_payload(&json!({"commit": "ab", "changedPaths": ["a"]})).is_err());
    }

    #[test]
    fn report_paths() {
        let p = report_path("3", "abc", "minicheck");
        assert_eq!(p, "reports/3/abc/minicheck.asef.xml");
        assert_eq!(parse_report_path(&p), Some(("3".into(), "abc".into(), "minicheck".into())));
        assert_eq!(parse_report_path("reports/3/abc/x/minicheck.asef.xml"), None);
        assert_eq!(parse_report_path("README.md"), None);
    }
}
