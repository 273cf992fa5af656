//! Thin wrappers over the git command line.

use std::path::Path;
use std::process::Command;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("git {args} in {dir}: {message}")]
pub struct GitError {
    pub dir: String,
    pub args: String,
    pub message: String,
}

fn raw(dir: &Path, args: &[&str]) -> Result<Vec<u8>, GitError> {
    let err = |message: String| GitError {
        dir: dir.display().to_string(),
        args: args.join(" "),
        message,
    };
    let out = Command::new("git")
        .arg("-C")
        .arg(dir)
        .args(["-c", "user.name=asef", "-c", "user.email=asef@localhost", "-c", "commit.gpgsign=false"])
        .args(args)
        .env("GIT_TERMINAL_PROMPT", "0")
        .output()
        .map_err(|e| err(e.to_string()))?;
    if !out.status.success() {
        return Err(err(String::from_utf8_lossy(&out.stderr).trim().to_string()));
    }
    Ok(out.stdout)
}

/// Runs `git -C dir args...` and returns trimmed stdout.
pub fn git(dir: &Path, args: &[&str]) -> Result<String, GitError> {
    raw(dir, args).map(|o| String::from_utf8_lossy(&o).trim().to_string())
}

fn lines(s: String) -> Vec<String> {
    s.lines().filter(|l| !l.is_empty()).map(str::to_string).collect()
}

/// The commit `rev` points at, or `None` when it does not exist (e.g. an
/// empty repository).
pub fn resolve(repo: &Path, rev: &str) -> Result<Option<String>, GitError> {
    if !repo.exists() {
        return Err(GitError {
            dir: repo.display().to_string(),
            args: format!("rev-parse {rev}"),
            message: "repository does not exist".into(),
        });
    }
    match git(repo, &["rev-parse", "--verify", "--quiet", &format!("{rev}^{{commit}}")]) {
        Ok(h) => Ok(Some(h)),
        Err(e) if e.message.is_empty() => Ok(None),
        Err(e) => Err(e),
    }
}

/// Commits reachable from `to` but not from `from`, oldest first.
pub fn rev_list(repo: &Path, from: Option<&str>, to: &str) -> Result<Vec<String>, GitError> {
    let range = match from {
        Some(f) => format!("{f}..{to}"),
        None => to.to_string(),
    };
    git(repo, &["rev-list", "--reverse", &range]).map(lines)
}

/// Paths touched by `commit` relative to its first parent.
pub fn changed_paths(repo: &Path, commit: &str) -> Result<Vec<String>, GitError> {
    git(repo, &["diff-tree", "--no-commit-id", "--name-only", "-r", "--root", "-m", "--first-parent", commit]).map(lines)
}

pub fn show(repo: &Path, commit: &str, path: &str) -> Result<Vec<u8>, GitError> {
    raw(repo, &["show", &format!("{commit}:{path}")])
}

pub fn ls_tree(repo: &Path, commit: &str) -> Result<Vec<String>, GitError> {
    git(repo, &["ls-tree", "-r", "--name-only", commit]).map(lines)
}

/// Materializes `commit` of `repo` into the fresh directory `dest`.
pub fn checkout(repo: &Path, commit: &str, dest: &Path) -> Result<(), GitError> {
    let parent = dest.parent().unwrap_or(Path::new("."));
    let dest_s = dest.to_string_lossy();
    let repo_s = repo.to_string_lossy();
    git(parent, &["clone", "--quiet", "--no-checkout", &repo_s, &dest_s])?;
    git(dest, &["checkout", "--quiet", "--detach", commit])?;
    Ok(())
}

pub fn init(dir: &Path, bare: bool) -> Result<(), GitError> {
    std::fs::create_dir_all(dir).map_err(|e| GitError {
        dir: dir.display().to_string(),
        args: "init".into(),
        message: e.to_string(),
    })?;
    if bare {
        git(dir, &["init", "--quiet", "--bare", "--initial-branch=main"])?;
    } else {
        git(dir, &["init", "--quiet", "--initial-branch=main"])?;
    }
    Ok(())
}

/// Stages `paths` and commits them; returns the new commit.
pub fn commit_paths(dir: &Path, paths: &[&str], message: &str) -> Result<String, GitError> {
    let mut args = vec!["add", "--"];
    args.extend_from_slice(paths);
    git(dir, &args)?;
    git(dir, &["commit", "--quiet", "--allow-empty", "-m", message])?;
    git(dir, &["rev-parse", "HEAD"])
}
