//! Linked resources for cases, results, checks, locations and files, kept
//! in an append-only document store on disk.
//!
//! Layout under the store root:
//!
//! ```text
//! index.json                 committed id counters and lookup keys
//! resources/<kind>/<id>.json one JSON document per resource
//! documents/<id>.xml         stored ASEF configurations and reports
//! ```
//!
//! A write stores all new documents first and then replaces `index.json`;
//! documents beyond the committed counters are ignored on open.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use asef_core::{
    serialize_config, serialize_report, AsefConfiguration, AsefReport, CategoryId, CheckStatus, LocationTarget,
};
use chrono::{DateTime, Utc};
use globset::{Glob, GlobBuilder, GlobMatcher};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("unknown resource {0}")]
    UnknownResource(String),
    #[error("cannot resolve file {0}")]
    UnresolvableFile(String),
    #[error("store i/o on {path}: {message}")]
    Io { path: String, message: String },
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> StoreError {
    StoreError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    Green,
    Amber,
    Red,
}

impl Flag {
    pub fn of_status(s: CheckStatus) -> Flag {
        match s {
            CheckStatus::Unsafe | CheckStatus::SyntacticViolation => Flag::Red,
            CheckStatus::Undecided | CheckStatus::Warning => Flag::Amber,
            CheckStatus::Safe => Flag::Green,
        }
    }

    /// The worst of all statuses; green for none.
    pub fn of_statuses(statuses: impl IntoIterator<Item = CheckStatus>) -> Flag {
        statuses.into_iter().map(Flag::of_status).max().unwrap_or(Flag::Green)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CaseResource {
    pub uri: String,
    pub title: String,
    pub tool_id: String,
    pub repo_id: String,
    pub task_ref: String,
    pub config_ref: String,
    pub file_links: Vec<String>,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultResource {
    pub uri: String,
    pub case_ref: String,
    pub commit: String,
    pub tool_id: String,
    pub created_at: DateTime<Utc>,
    pub check_refs: Vec<String>,
    pub report_ref: String,
    /// Files of the case at `commit` plus every file a location points at.
    pub file_refs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckResource {
    pub uri: String,
    pub result_ref: String,
    pub category: CategoryId,
    pub status: CheckStatus,
    pub location_ref: String,
    pub message: String,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LocationResource {
    pub uri: String,
    pub line: u32,
    pub column: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub file_ref: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub location_ref: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FileResource {
    pub uri: String,
    pub repo_id: String,
    pub path: String,
    pub commit: String,
    /// `sha256:<hex>` of the file bytes.
    pub content_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DocumentResource {
    pub uri: String,
    pub media_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Resource {
    AnalysisCase(CaseResource),
    AnalysisResult(ResultResource),
    Check(CheckResource),
    Location(LocationResource),
    File(FileResource),
    Document(DocumentResource),
}

/// Read access to the code repositories reports point into.
pub trait CodeRepos: Send + Sync {
    /// Repository and repo-relative path named by a file URI.
    fn locate(&self, uri: &str) -> Option<(String, String)>;
    fn read(&self, repo: &str, path: &str, commit: &str) -> Result<Vec<u8>, String>;
    /// All file paths of `repo` at `commit`.
    fn list(&self, repo: &str, commit: &str) -> Result<Vec<String>, String>;
}

/// Path patterns with `*` (within one path segment) and `**` (any depth).
pub fn link_matcher(pattern: &str) -> Result<GlobMatcher, String> {
    GlobBuilder::new(pattern)
        .literal_separator(true)
        .build()
        .map(|g: Glob| g.compile_matcher())
        .map_err(|e| format!("bad file link `{pattern}`: {e}"))
}

pub fn links_match(links: &[String], path: &str) -> bool {
    links
        .iter()
        .any(|l| l == path || link_matcher(l).is_ok_and(|m| m.is_match(path)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Kind {
    Case,
    Result,
    Check,
    Location,
    File,
    Document,
}

impl Kind {
    const ALL: [Kind; 6] = [Kind::Case, Kind::Result, Kind::Check, Kind::Location, Kind::File, Kind::Document];

    fn segment(self) -> &'static str {
        match self {
            Kind::Case => "cases",
            Kind::Result => "results",
            Kind::Check => "checks",
            Kind::Location => "locations",
            Kind::File => "files",
            Kind::Document => "documents",
        }
    }

    fn from_segment(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.segment() == s)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct Index {
    base: String,
    next: BTreeMap<String, u64>,
    /// `case-id|commit|tool` to result id.
    results_by_key: BTreeMap<String, u64>,
    /// `repo|path|commit` to file id.
    files_by_key: BTreeMap<String, u64>,
}

/// The outcome of [`Store::ingest_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ingested {
    pub result: ResultResource,
    /// False when the (case, commit, tool) result already existed.
    pub created: bool,
}

pub struct Store {
    root: PathBuf,
    index: Index,
    cases: BTreeMap<u64, CaseResource>,
    results: BTreeMap<u64, ResultResource>,
    checks: BTreeMap<u64, CheckResource>,
    locations: BTreeMap<u64, LocationResource>,
    files: BTreeMap<u64, FileResource>,
    documents: BTreeMap<u64, DocumentResource>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().expect("store paths have a parent");
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let tmp = path.with_extension("tmp");
    let mut f = std::fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
    f.sync_all().map_err(|e| io_err(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn load_all<T: DeserializeOwned>(dir: &Path, count: u64) -> Result<BTreeMap<u64, T>, StoreError> {
    let mut out = BTreeMap::new();
    for id in 1..=count {
        let p = dir.join(format!("{id}.json"));
        let bytes = std::fs::read(&p).map_err(|e| io_err(&p, e))?;
        out.insert(id, serde_json::from_slice(&bytes).map_err(|e| io_err(&p, e))?);
    }
    Ok(out)
}

pub fn content_hash(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

/// Writes staged during one operation, committed together.
#[derive(Default)]
struct Batch {
    docs: Vec<(PathBuf, Vec<u8>)>,
}

impl Store {
    /// Opens (or creates) the store at `root`. URIs are minted under `base`
    /// when the store is new; an existing store keeps its base.
    pub fn open(root: impl Into<PathBuf>, base: &str) -> Result<Store, StoreError> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| io_err(&root, e))?;
        let index_path = root.join("index.json");
        let index: Index = match std::fs::read(&index_path) {
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| io_err(&index_path, e))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Index {
                base: base.trim_end_matches('/').to_string(),
                ..Index::default()
            },
            Err(e) => return Err(io_err(&index_path, e)),
        };
        let count = |k: Kind| index.next.get(k.segment()).copied().unwrap_or(0);
        let dir = |k: Kind| root.join("resources").join(k.segment());
        Ok(Store {
            cases: load_all(&dir(Kind::Case), count(Kind::Case))?,
            results: load_all(&dir(Kind::Result), count(Kind::Result))?,
            checks: load_all(&dir(Kind::Check), count(Kind::Check))?,
            locations: load_all(&dir(Kind::Location), count(Kind::Location))?,
            files: load_all(&dir(Kind::File), count(Kind::File))?,
            documents: load_all(&dir(Kind::Document), count(Kind::Document))?,
            index,
            root,
        })
    }

    pub fn base(&self) -> &str {
        &self.index.base
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn uri(&self, kind: Kind, id: u64) -> String {
        format!("{}/{}/{id}", self.index.base, kind.segment())
    }

    /// `(kind, id)` of a URI minted by this store.
    fn parse_uri(&self, uri: &str) -> Option<(Kind, u64)> {
        let rest = uri.strip_prefix(&self.index.base)?.strip_prefix('/')?;
        let (seg, id) = rest.split_once('/')?;
        Some((Kind::from_segment(seg)?, id.parse().ok()?))
    }

    fn id_of(&self, uri: &str, kind: Kind) -> Result<u64, StoreError> {
        match self.parse_uri(uri) {
            Some((k, id)) if k == kind => Ok(id),
            _ => Err(StoreError::UnknownResource(uri.to_string())),
        }
    }

    fn alloc(next: &mut BTreeMap<String, u64>, kind: Kind) -> u64 {
        let n = next.entry(kind.segment().to_string()).or_insert(0);
        *n += 1;
        *n
    }

    fn stage<T: Serialize>(&self, batch: &mut Batch, kind: Kind, id: u64, value: &T) {
        let path = self.root.join("resources").join(kind.segment()).join(format!("{id}.json"));
        batch
            .docs
            .push((path, serde_json::to_vec_pretty(value).expect("resources serialize")));
    }

    fn commit(&self, batch: Batch, index: &Index) -> Result<(), StoreError> {
        for (path, bytes) in &batch.docs {
            write_atomic(path, bytes)?;
        }
        write_atomic(
            &self.root.join("index.json"),
            &serde_json::to_vec_pretty(index).expect("index serializes"),
        )
    }

    fn document_path(&self, id: u64) -> PathBuf {
        self.root.join("documents").join(format!("{id}.xml"))
    }

    fn stage_document(&self, batch: &mut Batch, next: &mut BTreeMap<String, u64>, xml: String) -> DocumentResource {
        let id = Self::alloc(next, Kind::Document);
        let doc = DocumentResource {
            uri: self.uri(Kind::Document, id),
            media_type: "application/xml".into(),
        };
        batch.docs.push((self.document_path(id), xml.into_bytes()));
        self.stage(batch, Kind::Document, id, &doc);
        doc
    }

    pub fn create_case(
        &mut self,
        title: &str,
        tool_id: &str,
        repo_id: &str,
        task_ref: Option<&str>,
        config: &AsefConfiguration,
        file_links: &[String],
    ) -> Result<CaseResource, StoreError> {
        if file_links.is_empty() {
            return Err(StoreError::Validation("an analysis case needs at least one file link".into()));
        }
        for l in file_links {
            link_matcher(l).map_err(StoreError::Validation)?;
        }
        if title.trim().is_empty() || tool_id.trim().is_empty() || repo_id.trim().is_empty() {
            return Err(StoreError::Validation("title, toolId and repoId must be non-empty".into()));
        }
        let effective = config.effective().map_err(|e| StoreError::Validation(e.to_string()))?;
        let task_ref = match task_ref {
            Some(t) if effective.task(t).is_some() => t.to_string(),
            Some(t) => return Err(StoreError::Validation(format!("unknown analysis task `{t}`"))),
            None => match effective.analysis_tasks.as_slice() {
                [only] => only.id.clone(),
                _ => return Err(StoreError::Validation("configuration must name exactly one task or the task must be given".into())),
            },
        };
        let mut batch = Batch::default();
        let mut index = self.index.clone();
        let doc = self.stage_document(&mut batch, &mut index.next, serialize_config(config));
        let id = Self::alloc(&mut index.next, Kind::Case);
        let case = CaseResource {
            uri: self.uri(Kind::Case, id),
            title: title.to_string(),
            tool_id: tool_id.to_string(),
            repo_id: repo_id.to_string(),
            task_ref,
            config_ref: doc.uri.clone(),
            file_links: file_links.to_vec(),
            created_at: Utc::now(),
        };
        self.stage(&mut batch, Kind::Case, id, &case);
        self.commit(batch, &index)?;
        self.index = index;
        self.documents.insert(self.id_of(&doc.uri, Kind::Document)?, doc);
        self.cases.insert(id, case.clone());
        Ok(case)
    }

    /// Stored XML of a document resource.
    pub fn document_text(&self, uri: &str) -> Result<String, StoreError> {
        let id = self.id_of(uri, Kind::Document)?;
        if !self.documents.contains_key(&id) {
            return Err(StoreError::UnknownResource(uri.to_string()));
        }
        let p = self.document_path(id);
        std::fs::read_to_string(&p).map_err(|e| io_err(&p, e))
    }

    pub fn case_config(&self, case: &CaseResource) -> Result<AsefConfiguration, StoreError> {
        let text = self.document_text(&case.config_ref)?;
        asef_core::parse_config(&text).map_err(|e| StoreError::Validation(e.to_string()))
    }

    pub fn result_for(&self, case_uri: &str, commit: &str, tool_id: &str) -> Option<&ResultResource> {
        let case_id = self.id_of(case_uri, Kind::Case).ok()?;
        let id = self.index.results_by_key.get(&format!("{case_id}|{commit}|{tool_id}"))?;
        self.results.get(id)
    }

    /// Turns a report on `case` at `commit` into linked resources. Ingesting
    /// the same (case, commit, tool) again returns the existing result.
    pub fn ingest_report(
        &mut self,
        report: &AsefReport,
        case_uri: &str,
        commit: &str,
        repos: &dyn CodeRepos,
    ) -> Result<Ingested, StoreError> {
        let case_id = self.id_of(case_uri, Kind::Case)?;
        let case = self
            .cases
            .get(&case_id)
            .cloned()
            .ok_or_else(|| StoreError::UnknownResource(case_uri.to_string()))?;
        let key = format!("{case_id}|{commit}|{}", report.tool_id);
        if let Some(existing) = self.index.results_by_key.get(&key) {
            return Ok(Ingested {
                result: self.results[existing].clone(),
                created: false,
            });
        }
        if let Some(v) = report.violations().first() {
            return Err(StoreError::Validation(v.to_string()));
        }

        let mut batch = Batch::default();
        let mut index = self.index.clone();
        let mut new_files: Vec<(u64, FileResource)> = Vec::new();
        let mut file_uri = |this: &Store, index: &mut Index, batch: &mut Batch, repo: &str, path: &str| -> Result<String, StoreError> {
            let fkey = format!("{repo}|{path}|{commit}");
            if let Some(id) = index.files_by_key.get(&fkey) {
                return Ok(this.uri(Kind::File, *id));
            }
            let bytes = repos
                .read(repo, path, commit)
                .map_err(|e| StoreError::UnresolvableFile(format!("{repo}:{path}@{commit}: {e}")))?;
            let id = Self::alloc(&mut index.next, Kind::File);
            let f = FileResource {
                uri: this.uri(Kind::File, id),
                repo_id: repo.to_string(),
                path: path.to_string(),
                commit: commit.to_string(),
                content_hash: content_hash(&bytes),
            };
            this.stage(batch, Kind::File, id, &f);
            index.files_by_key.insert(fkey, id);
            new_files.push((id, f.clone()));
            Ok(f.uri)
        };

        let mut file_refs = BTreeSet::new();
        let listed = repos
            .list(&case.repo_id, commit)
            .map_err(|e| StoreError::UnresolvableFile(format!("{}@{commit}: {e}", case.repo_id)))?;
        for path in listed.iter().filter(|p| links_match(&case.file_links, p)) {
            file_refs.insert(file_uri(self, &mut index, &mut batch, &case.repo_id, path)?);
        }

        let mut loc_uris: BTreeMap<&str, String> = BTreeMap::new();
        let mut loc_ids = Vec::new();
        for l in &report.locations {
            let id = Self::alloc(&mut index.next, Kind::Location);
            loc_uris.insert(l.id.as_str(), self.uri(Kind::Location, id));
            loc_ids.push(id);
        }
        let mut new_locations = Vec::new();
        for (l, id) in report.locations.iter().zip(loc_ids) {
            let (file_ref, location_ref) = match &l.target {
                LocationTarget::File(uri) => {
                    let (repo, path) = repos
                        .locate(uri)
                        .ok_or_else(|| StoreError::UnresolvableFile(uri.clone()))?;
                    let f = file_uri(self, &mut index, &mut batch, &repo, &path)?;
                    file_refs.insert(f.clone());
                    (Some(f), None)
                }
                LocationTarget::Location(target) => (None, Some(loc_uris[target.as_str()].clone())),
            };
            let loc = LocationResource {
                uri: loc_uris[l.id.as_str()].clone(),
                line: l.line,
                column: l.column,
                file_ref,
                location_ref,
            };
            self.stage(&mut batch, Kind::Location, id, &loc);
            new_locations.push((id, loc));
        }

        let doc = self.stage_document(&mut batch, &mut index.next, serialize_report(report));
        let result_id = Self::alloc(&mut index.next, Kind::Result);
        let result_uri = self.uri(Kind::Result, result_id);
        let mut new_checks = Vec::new();
        for c in &report.checks {
            let id = Self::alloc(&mut index.next, Kind::Check);
            let check = CheckResource {
                uri: self.uri(Kind::Check, id),
                result_ref: result_uri.clone(),
                category: c.category.clone(),
                status: c.status,
                location_ref: loc_uris[c.location_ref.as_str()].clone(),
                message: c.message.clone(),
                trace: c.trace.iter().map(|t| loc_uris[t.as_str()].clone()).collect(),
            };
            self.stage(&mut batch, Kind::Check, id, &check);
            new_checks.push((id, check));
        }
        let result = ResultResource {
            uri: result_uri,
            case_ref: case.uri.clone(),
            commit: commit.to_string(),
            tool_id: report.tool_id.clone(),
            created_at: Utc::now(),
            check_refs: new_checks.iter().map(|(_, c)| c.uri.clone()).collect(),
            report_ref: doc.uri.clone(),
            file_refs: file_refs.into_iter().collect(),
        };
        self.stage(&mut batch, Kind::Result, result_id, &result);
        index.results_by_key.insert(key, result_id);

        self.commit(batch, &index)?;
        self.index = index;
        self.files.extend(new_files);
        self.locations.extend(new_locations);
        self.checks.extend(new_checks);
        self.documents.insert(self.id_of(&doc.uri, Kind::Document)?, doc);
        self.results.insert(result_id, result.clone());
        Ok(Ingested { result, created: true })
    }

    pub fn get_resource(&self, uri: &str) -> Result<Resource, StoreError> {
        let unknown = || StoreError::UnknownResource(uri.to_string());
        let (kind, id) = self.parse_uri(uri).ok_or_else(unknown)?;
        Ok(match kind {
            Kind::Case => Resource::AnalysisCase(self.cases.get(&id).ok_or_else(unknown)?.clone()),
            Kind::Result => Resource::AnalysisResult(self.results.get(&id).ok_or_else(unknown)?.clone()),
            Kind::Check => Resource::Check(self.checks.get(&id).ok_or_else(unknown)?.clone()),
            Kind::Location => Resource::Location(self.locations.get(&id).ok_or_else(unknown)?.clone()),
            Kind::File => Resource::File(self.files.get(&id).ok_or_else(unknown)?.clone()),
            Kind::Document => Resource::Document(self.documents.get(&id).ok_or_else(unknown)?.clone()),
        })
    }

    pub fn case(&self, uri: &str) -> Result<&CaseResource, StoreError> {
        let id = self.id_of(uri, Kind::Case)?;
        self.cases.get(&id).ok_or_else(|| StoreError::UnknownResource(uri.into()))
    }

    pub fn result(&self, uri: &str) -> Result<&ResultResource, StoreError> {
        let id = self.id_of(uri, Kind::Result)?;
        self.results.get(&id).ok_or_else(|| StoreError::UnknownResource(uri.into()))
    }

    pub fn check(&self, uri: &str) -> Result<&CheckResource, StoreError> {
        let id = self.id_of(uri, Kind::Check)?;
        self.checks.get(&id).ok_or_else(|| StoreError::UnknownResource(uri.into()))
    }

    pub fn location(&self, uri: &str) -> Result<&LocationResource, StoreError> {
        let id = self.id_of(uri, Kind::Location)?;
        self.locations.get(&id).ok_or_else(|| StoreError::UnknownResource(uri.into()))
    }

    pub fn file(&self, uri: &str) -> Result<&FileResource, StoreError> {
        let id = self.id_of(uri, Kind::File)?;
        self.files.get(&id).ok_or_else(|| StoreError::UnknownResource(uri.into()))
    }

    /// Cases in creation order.
    pub fn list_cases(&self) -> Vec<&CaseResource> {
        self.cases.values().collect()
    }

    /// Newest first by creation time, then by id.
    pub fn results_for_case(&self, case_uri: &str) -> Result<Vec<&ResultResource>, StoreError> {
        let case = self.case(case_uri)?;
        let mut v: Vec<(u64, &ResultResource)> = self
            .results
            .iter()
            .filter(|(_, r)| r.case_ref == case.uri)
            .map(|(id, r)| (*id, r))
            .collect();
        v.sort_by(|(ia, a), (ib, b)| b.created_at.cmp(&a.created_at).then(ia.cmp(ib)));
        Ok(v.into_iter().map(|(_, r)| r).collect())
    }

    pub fn checks_for_result(&self, result_uri: &str) -> Result<Vec<&CheckResource>, StoreError> {
        let r = self.result(result_uri)?;
        r.check_refs.iter().map(|c| self.check(c)).collect()
    }

    /// Follows a location chain to its file-linked terminal.
    pub fn terminal_location(&self, uri: &str) -> Result<&LocationResource, StoreError> {
        let mut loc = self.location(uri)?;
        let mut hops = 0;
        while let Some(next) = &loc.location_ref {
            hops += 1;
            if hops > self.locations.len() {
                return Err(StoreError::Validation(format!("location cycle through {uri}")));
            }
            loc = self.location(next)?;
        }
        Ok(loc)
    }

    fn checks_on_file<'s>(&'s self, result_uri: &str, file_uri: &str) -> Result<Vec<(u32, &'s CheckResource)>, StoreError> {
        self.file(file_uri)?;
        let mut out = Vec::new();
        for c in self.checks_for_result(result_uri)? {
            let t = self.terminal_location(&c.location_ref)?;
            if t.file_ref.as_deref() == Some(file_uri) {
                out.push((t.line, c));
            }
        }
        Ok(out)
    }

    /// Red for any Unsafe or SyntacticViolation check on the file, amber for
    /// any Undecided or Warning, green otherwise.
    pub fn file_flag(&self, result_uri: &str, file_uri: &str) -> Result<Flag, StoreError> {
        Ok(Flag::of_statuses(self.checks_on_file(result_uri, file_uri)?.into_iter().map(|(_, c)| c.status)))
    }

    /// Worst file flag of a result.
    pub fn result_flag(&self, result_uri: &str) -> Result<Flag, StoreError> {
        Ok(Flag::of_statuses(self.checks_for_result(result_uri)?.into_iter().map(|c| c.status)))
    }

    /// Checks grouped by the line of their terminal location, each group in
    /// check creation order.
    pub fn line_flags(&self, result_uri: &str, file_uri: &str) -> Result<BTreeMap<u32, Vec<CheckResource>>, StoreError> {
        let mut out: BTreeMap<u32, Vec<CheckResource>> = BTreeMap::new();
        for (line, c) in self.checks_on_file(result_uri, file_uri)? {
            out.entry(line).or_default().push(c.clone());
        }
        Ok(out)
    }

    pub fn all_check_uris(&self) -> Vec<String> {
        self.checks.values().map(|c| c.uri.clone()).collect()
    }

    pub fn result_count(&self) -> usize {
        self.results.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_decision_table() {
        use CheckStatus::*;
        assert_eq!(Flag::of_statuses([]), Flag::Green);
        assert_eq!(Flag::of_statuses([Safe]), Flag::Green);
        assert_eq!(Flag::of_statuses([Undecided]), Flag::Amber);
        assert_eq!(Flag::of_statuses([Warning, Safe]), Flag::Amber);
        assert_eq!(Flag::of_statuses([Undecided, Unsafe]), Flag::Red);
        assert_eq!(Flag::of_statuses([SyntacticViolation]), Flag::Red);
    }

    #[test]
    fn link_patterns() {
        let links = vec!["src/*.mc".to_string(), "lib/**".to_string(), "main.mc".to_string()];
        assert!(links_match(&links, "src/lamp.mc"));
        assert!(!links_match(&links, "src/sub/lamp.mc"));
        assert!(links_match(&links, "lib/a/b.mc"));
        assert!(links_match(&links, "main.mc"));
        assert!(!links_match(&links, "README.md"));
    }
}
