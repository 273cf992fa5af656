#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use asef_core::{parse_config, AsefConfiguration, MappingSet};
use asef_toolchain::adapter::ToolDescriptor;
use asef_toolchain::git;
use asef_toolchain::orchestrator::{Orchestrator, OrchestratorConfig, RepoBinding, RepoKind};
use asef_toolchain::resources::{CodeRepos, Store};
use tempfile::TempDir;

pub const CODE_BASE: &str = "http://localhost:8080/code/lamp";
pub const STORE_BASE: &str = "http://localhost:8080";

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/lamp")
}

pub fn lamp_config() -> AsefConfiguration {
    parse_config(&std::fs::read_to_string(fixtures().join("asef.global.xml")).unwrap()).unwrap()
}

pub fn buggy_source() -> String {
    std::fs::read_to_string(fixtures().join("src/lamp.mc")).unwrap()
}

pub fn fixed_source() -> String {
    std::fs::read_to_string(fixtures().join("fixed/src/lamp.mc")).unwrap()
}

/// Files of one repository, by commit.
#[derive(Default)]
pub struct MemRepos {
    pub repo: String,
    pub base: String,
    pub commits: BTreeMap<String, BTreeMap<String, Vec<u8>>>,
}

impl MemRepos {
    pub fn lamp() -> Self {
        let mut m = MemRepos {
            repo: "lamp".into(),
            base: CODE_BASE.into(),
            ..Default::default()
        };
        m.add("c1", "src/lamp.mc", buggy_source().as_bytes());
        m.add("c1", "README.md", b"lamp\n");
        m.add("c2", "src/lamp.mc", fixed_source().as_bytes());
        m.add("c2", "README.md", b"lamp\n");
        m
    }

    pub fn add(&mut self, commit: &str, path: &str, bytes: &[u8]) {
        self.commits
            .entry(commit.into())
            .or_default()
            .insert(path.into(), bytes.to_vec());
    }
}

impl CodeRepos for MemRepos {
    fn locate(&self, uri: &str) -> Option<(String, String)> {
        let rest = uri.strip_prefix(&self.base)?.strip_prefix('/')?;
        Some((self.repo.clone(), rest.to_string()))
    }

    fn read(&self, repo: &str, path: &str, commit: &str) -> Result<Vec<u8>, String> {
        if repo != self.repo {
            return Err(format!("unknown repository {repo}"));
        }
        self.commits
            .get(commit)
            .and_then(|c| c.get(path))
            .cloned()
            .ok_or_else(|| format!("{path} not in {commit}"))
    }

    fn list(&self, repo: &str, commit: &str) -> Result<Vec<String>, String> {
        if repo != self.repo {
            return Err(format!("unknown repository {repo}"));
        }
        Ok(self
            .commits
            .get(commit)
            .map(|c| c.keys().cloned().collect())
            .unwrap_or_default())
    }
}

/// A code repository with the buggy and the fixed lamp, an analysis
/// repository and an empty store with one case per tool.
pub struct World {
    pub dir: TempDir,
    pub code: PathBuf,
    pub analysis: PathBuf,
    pub buggy: String,
    pub fixed: String,
    pub store: Arc<RwLock<Store>>,
}

impl World {
    pub fn new() -> World {
        let dir = tempfile::tempdir().unwrap();
        let code = dir.path().join("code");
        git::init(&code, false).unwrap();
        std::fs::write(code.join("README.md"), "lamp\n").unwrap();
        git::commit_paths(&code, &["README.md"], "Initial commit").unwrap();
        std::fs::create_dir_all(code.join("src")).unwrap();
        std::fs::write(code.join("src/lamp.mc"), buggy_source()).unwrap();
        let buggy = git::commit_paths(&code, &["src/lamp.mc"], "Add lamp").unwrap();
        std::fs::write(code.join("src/lamp.mc"), fixed_source()).unwrap();
        let fixed = git::commit_paths(&code, &["src/lamp.mc"], "Fix timer arithmetic").unwrap();
        let analysis = dir.path().join("analysis");
        git::init(&analysis, false).unwrap();
        std::fs::write(analysis.join("README.md"), "analysis results\n").unwrap();
        git::commit_paths(&analysis, &["README.md"], "Initial commit").unwrap();
        let store = Store::open(dir.path().join("store"), STORE_BASE).unwrap();
        World {
            code,
            analysis,
            buggy,
            fixed,
            store: Arc::new(RwLock::new(store)),
            dir,
        }
    }

    pub fn add_case(&self, title: &str, tool: &str, links: &[&str]) -> String {
        let links: Vec<String> = links.iter().map(|s| s.to_string()).collect();
        self.store
            .write()
            .unwrap()
            .create_case(title, tool, "lamp", None, &lamp_config(), &links)
            .unwrap()
            .uri
    }

    pub fn config(&self, crash_after_publish: bool) -> OrchestratorConfig {
        OrchestratorConfig {
            state_dir: self.dir.path().join("state"),
            code_repos: vec![RepoBinding {
                repo_id: "lamp".into(),
                kind: RepoKind::Code,
                local_path: self.code.clone(),
                remote_url: None,
                uri_base: CODE_BASE.into(),
                branch: Some("main".into()),
            }],
            analysis_repo: RepoBinding {
                repo_id: "analysis".into(),
                kind: RepoKind::Analysis,
                local_path: self.analysis.clone(),
                remote_url: None,
                uri_base: String::new(),
                branch: Some("main".into()),
            },
            tools: vec![
                ToolDescriptor::builtin("minicheck"),
                ToolDescriptor::canned("astree-stub", fixtures().join("stubs/astree-stub.native").to_string_lossy()),
                ToolDescriptor::canned("qpr-stub", fixtures().join("stubs/qpr-stub.native").to_string_lossy()),
            ],
            mappings: MappingSet::default_set(),
            workers: 2,
            crash_after_publish,
        }
    }

    pub fn start(&self) -> Arc<Orchestrator> {
        Orchestrator::start(self.config(false), Arc::clone(&self.store))
    }
}
