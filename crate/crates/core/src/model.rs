//! In-memory form of the two ASEF documents: the analysis configuration
//! (global part plus optional host-local overlay) and the analysis report.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::category::CategoryId;
use crate::error::AsefError;

/// Ids are XML-attribute friendly tokens: `[A-Za-z_][A-Za-z0-9_.-]*`.
pub fn is_valid_id(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endianness {
    Little,
    Big,
}

impl Endianness {
    pub fn as_str(self) -> &'static str {
        match self {
            Endianness::Little => "little",
            Endianness::Big => "big",
        }
    }
}

impl FromStr for Endianness {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "little" => Ok(Endianness::Little),
            "big" => Ok(Endianness::Big),
            other => Err(format!("endianness must be `little` or `big`, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HardwareTarget {
    pub id: String,
    pub pointer_size_bits: u32,
    pub endianness: Endianness,
    pub int_size_bits: u32,
    pub short_size_bits: u32,
}

impl HardwareTarget {
    pub const SIZES: [u32; 4] = [8, 16, 32, 64];

    /// A typical 32-bit little-endian target.
    pub fn ilp32(id: impl Into<String>) -> Self {
        HardwareTarget {
            id: id.into(),
            pointer_size_bits: 32,
            endianness: Endianness::Little,
            int_size_bits: 32,
            short_size_bits: 16,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        for (name, v) in [
            ("pointerSizeBits", self.pointer_size_bits),
            ("intSizeBits", self.int_size_bits),
            ("shortSizeBits", self.short_size_bits),
        ] {
            if !Self::SIZES.contains(&v) {
                return Err(format!("{name} must be one of 8, 16, 32, 64 (got {v})"));
            }
        }
        if !(self.short_size_bits <= self.int_size_bits && self.int_size_bits <= self.pointer_size_bits) {
            return Err("sizes must satisfy shortSizeBits <= intSizeBits <= pointerSizeBits".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LanguageStandard {
    C90,
    C99,
    C11,
}

impl LanguageStandard {
    pub fn as_str(self) -> &'static str {
        match self {
            LanguageStandard::C90 => "C90",
            LanguageStandard::C99 => "C99",
            LanguageStandard::C11 => "C11",
        }
    }
}

impl FromStr for LanguageStandard {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "C90" => Ok(LanguageStandard::C90),
            "C99" => Ok(LanguageStandard::C99),
            "C11" => Ok(LanguageStandard::C11),
            other => Err(format!("unknown language standard `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KeyValue {
    pub key: String,
    pub value: String,
}

impl KeyValue {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Self {
        KeyValue {
            key: key.into(),
            value: value.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LanguageTarget {
    pub id: String,
    pub standard: LanguageStandard,
    pub extensions: Vec<KeyValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CheckTarget {
    pub id: String,
    pub categories: Vec<CategoryId>,
}

/// Carried opaquely; only the id is interpreted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExecutionModelTarget {
    pub id: String,
    pub attributes: Vec<KeyValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceFile {
    /// Filesystem path or absolute URI.
    pub reference: String,
}

impl SourceFile {
    pub fn new(reference: impl Into<String>) -> Self {
        SourceFile {
            reference: reference.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceModule {
    pub id: String,
    pub files: Vec<SourceFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnalysisTask {
    pub id: String,
    pub source_module_ref: String,
    pub hardware_target_ref: String,
    pub language_target_ref: String,
    pub check_target_ref: String,
    pub execution_model_target_ref: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UriSubstitutionRule {
    pub local_prefix: String,
    pub uri_prefix: String,
}

/// Strips trailing path separators, keeping a lone `/`.
pub fn normalize_local_prefix(prefix: &str) -> String {
    let trimmed = prefix.trim_end_matches(['/', '\\']);
    if trimmed.is_empty() && !prefix.is_empty() {
        prefix[..1].to_string()
    } else {
        trimmed.to_string()
    }
}

impl UriSubstitutionRule {
    pub fn new(local_prefix: impl AsRef<str>, uri_prefix: impl Into<String>) -> Self {
        UriSubstitutionRule {
            local_prefix: normalize_local_prefix(local_prefix.as_ref()),
            uri_prefix: uri_prefix.into(),
        }
    }

    pub fn check(&self) -> Result<(), String> {
        if self.local_prefix.is_empty() || self.uri_prefix.is_empty() {
            return Err("localPrefix and uriPrefix must be non-empty".into());
        }
        if normalize_local_prefix(&self.local_prefix) != self.local_prefix {
            return Err(format!("localPrefix `{}` has a trailing separator", self.local_prefix));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfigPart {
    pub hardware_targets: Vec<HardwareTarget>,
    pub language_targets: Vec<LanguageTarget>,
    pub check_targets: Vec<CheckTarget>,
    pub execution_model_targets: Vec<ExecutionModelTarget>,
    pub source_modules: Vec<SourceModule>,
    pub analysis_tasks: Vec<AnalysisTask>,
    pub uri_substitution_rules: Vec<UriSubstitutionRule>,
}

impl ConfigPart {
    pub fn is_empty(&self) -> bool {
        self.hardware_targets.is_empty()
            && self.language_targets.is_empty()
            && self.check_targets.is_empty()
            && self.execution_model_targets.is_empty()
            && self.source_modules.is_empty()
            && self.analysis_tasks.is_empty()
            && self.uri_substitution_rules.is_empty()
    }

    pub fn hardware_target(&self, id: &str) -> Option<&HardwareTarget> {
        self.hardware_targets.iter().find(|t| t.id == id)
    }

    pub fn language_target(&self, id: &str) -> Option<&LanguageTarget> {
        self.language_targets.iter().find(|t| t.id == id)
    }

    pub fn check_target(&self, id: &str) -> Option<&CheckTarget> {
        self.check_targets.iter().find(|t| t.id == id)
    }

    pub fn execution_model_target(&self, id: &str) -> Option<&ExecutionModelTarget> {
        self.execution_model_targets.iter().find(|t| t.id == id)
    }

    pub fn source_module(&self, id: &str) -> Option<&SourceModule> {
        self.source_modules.iter().find(|m| m.id == id)
    }

    pub fn task(&self, id: &str) -> Option<&AnalysisTask> {
        self.analysis_tasks.iter().find(|t| t.id == id)
    }

    /// Checks that every task reference names a declared target.
    pub fn check_references(&self) -> Result<(), AsefError> {
        for task in &self.analysis_tasks {
            let missing = |kind: &str, id: &str| {
                AsefError::reference(id, format!("task `{}` references undeclared {kind} `{id}`", task.id))
            };
            if self.source_module(&task.source_module_ref).is_none() {
                return Err(missing("SourceModule", &task.source_module_ref));
            }
            if self.hardware_target(&task.hardware_target_ref).is_none() {
                return Err(missing("HardwareTarget", &task.hardware_target_ref));
            }
            if self.language_target(&task.language_target_ref).is_none() {
                return Err(missing("LanguageTarget", &task.language_target_ref));
            }
            if self.check_target(&task.check_target_ref).is_none() {
                return Err(missing("CheckTarget", &task.check_target_ref));
            }
            if let Some(em) = &task.execution_model_target_ref {
                if self.execution_model_target(em).is_none() {
                    return Err(missing("ExecutionModelTarget", em));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AsefConfiguration {
    pub global_part: ConfigPart,
    pub local_part: Option<ConfigPart>,
}

impl AsefConfiguration {
    pub fn new(global_part: ConfigPart) -> Self {
        AsefConfiguration {
            global_part,
            local_part: None,
        }
    }

    /// The effective part: global merged with the local overlay (if any).
    pub fn effective(&self) -> Result<ConfigPart, AsefError> {
        match &self.local_part {
            Some(local) => merge_local(self, local),
            None => {
                self.global_part.check_references()?;
                Ok(self.global_part.clone())
            }
        }
    }
}

fn overlay_by_key<T: Clone, K: Eq>(global: &[T], local: &[T], key: impl Fn(&T) -> K) -> Vec<T> {
    let mut merged: Vec<T> = global
        .iter()
        .map(|g| local.iter().find(|l| key(l) == key(g)).unwrap_or(g).clone())
        .collect();
    for l in local {
        if !global.iter().any(|g| key(g) == key(l)) {
            merged.push(l.clone());
        }
    }
    merged
}

/// Overlays `local` onto the global part: same-id entries are replaced in
/// place, entries present on one side only are kept (global order first).
/// URI substitution rules are keyed by their local prefix.
pub fn merge_local(global: &AsefConfiguration, local: &ConfigPart) -> Result<ConfigPart, AsefError> {
    let g = &global.global_part;
    let merged = ConfigPart {
        hardware_targets: overlay_by_key(&g.hardware_targets, &local.hardware_targets, |t| t.id.clone()),
        language_targets: overlay_by_key(&g.language_targets, &local.language_targets, |t| t.id.clone()),
        check_targets: overlay_by_key(&g.check_targets, &local.check_targets, |t| t.id.clone()),
        execution_model_targets: overlay_by_key(
            &g.execution_model_targets,
            &local.execution_model_targets,
            |t| t.id.clone(),
        ),
        source_modules: overlay_by_key(&g.source_modules, &local.source_modules, |m| m.id.clone()),
        analysis_tasks: overlay_by_key(&g.analysis_tasks, &local.analysis_tasks, |t| t.id.clone()),
        uri_substitution_rules: overlay_by_key(
            &g.uri_substitution_rules,
            &local.uri_substitution_rules,
            |r| r.local_prefix.clone(),
        ),
    };
    merged.check_references()?;
    Ok(merged)
}

/// The five check statuses. No other value is representable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CheckStatus {
    Safe,
    Unsafe,
    Undecided,
    Warning,
    SyntacticViolation,
}

impl CheckStatus {
    pub const ALL: [CheckStatus; 5] = [
        CheckStatus::Safe,
        CheckStatus::Unsafe,
        CheckStatus::Undecided,
        CheckStatus::Warning,
        CheckStatus::SyntacticViolation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Safe => "Safe",
            CheckStatus::Unsafe => "Unsafe",
            CheckStatus::Undecided => "Undecided",
            CheckStatus::Warning => "Warning",
            CheckStatus::SyntacticViolation => "SyntacticViolation",
        }
    }
}

impl FromStr for CheckStatus {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        CheckStatus::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown check status `{s}`"))
    }
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A location points either at a file or, for macro expansions, at
/// another location.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocationTarget {
    File(String),
    Location(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AsefLocation {
    pub id: String,
    pub target: LocationTarget,
    /// 1-based.
    pub line: u32,
    /// 0-based.
    pub column: u32,
}

impl AsefLocation {
    pub fn in_file(id: impl Into<String>, file: impl Into<String>, line: u32, column: u32) -> Self {
        AsefLocation {
            id: id.into(),
            target: LocationTarget::File(file.into()),
            line,
            column,
        }
    }

    pub fn via(id: impl Into<String>, location: impl Into<String>, line: u32, column: u32) -> Self {
        AsefLocation {
            id: id.into(),
            target: LocationTarget::Location(location.into()),
            line,
            column,
        }
    }

    pub fn file_ref(&self) -> Option<&str> {
        match &self.target {
            LocationTarget::File(f) => Some(f),
            LocationTarget::Location(_) => None,
        }
    }

    pub fn location_ref(&self) -> Option<&str> {
        match &self.target {
            LocationTarget::Location(l) => Some(l),
            LocationTarget::File(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AsefCheck {
    pub id: String,
    pub category: CategoryId,
    pub status: CheckStatus,
    pub location_ref: String,
    pub message: String,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AsefReport {
    pub tool_id: String,
    pub task_ref: String,
    pub created_at: DateTime<Utc>,
    pub locations: Vec<AsefLocation>,
    pub checks: Vec<AsefCheck>,
}

/// Terminal coordinates of a (possibly macro-chained) location.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResolvedLocation {
    pub file_ref: String,
    pub line: u32,
    pub column: u32,
}

/// Everything that can be wrong with a report, alone or against a
/// configuration. Violations are data; see [`validate_report`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Violation {
    DuplicateLocationId(String),
    DuplicateCheckId(String),
    InvalidId(String),
    InvalidLine { location: String },
    DanglingLocationRef { owner: String, target: String },
    LocationCycle(Vec<String>),
    UnknownTask(String),
    InvalidConfiguration(String),
    CategoryOutOfScope { check: String, category: CategoryId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateLocationId(id) => write!(f, "duplicate location id `{id}`"),
            Violation::DuplicateCheckId(id) => write!(f, "duplicate check id `{id}`"),
            Violation::InvalidId(id) => write!(f, "invalid id `{id}`"),
            Violation::InvalidLine { location } => write!(f, "location `{location}` has line 0 (lines are 1-based)"),
            Violation::DanglingLocationRef { owner, target } => {
                write!(f, "`{owner}` references unknown location `{target}`")
            }
            Violation::LocationCycle(ids) => write!(f, "location reference cycle {}", ids.join(" -> ")),
            Violation::UnknownTask(t) => write!(f, "report task `{t}` is not declared in the configuration"),
            Violation::InvalidConfiguration(msg) => write!(f, "configuration invalid: {msg}"),
            Violation::CategoryOutOfScope { check, category } => {
                write!(f, "check `{check}` has category `{category}` outside the task's check target")
            }
        }
    }
}

impl AsefReport {
    pub fn location(&self, id: &str) -> Option<&AsefLocation> {
        self.locations.iter().find(|l| l.id == id)
    }

    pub fn check(&self, id: &str) -> Option<&AsefCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// Follows the macro chain from `id` to the file-bearing location.
    pub fn resolve_location(&self, id: &str) -> Result<ResolvedLocation, AsefError> {
        let by_id: HashMap<&str, &AsefLocation> = self.locations.iter().map(|l| (l.id.as_str(), l)).collect();
        let mut current = *by_id.get(id).ok_or_else(|| AsefError::UnknownId(id.to_string()))?;
        let mut seen = vec![current.id.clone()];
        loop {
            match &current.target {
                LocationTarget::File(f) => {
                    return Ok(ResolvedLocation {
                        file_ref: f.clone(),
                        line: current.line,
                        column: current.column,
                    })
                }
                LocationTarget::Location(next) => {
                    current = by_id.get(next.as_str()).ok_or_else(|| AsefError::UnknownId(next.clone()))?;
                    if seen.contains(&current.id) {
                        let start = seen.iter().position(|s| *s == current.id).unwrap_or(0);
                        return Err(AsefError::Cycle {
                            ids: canonical_cycle(&seen[start..]),
                        });
                    }
                    seen.push(current.id.clone());
                }
            }
        }
    }

    /// Length of the macro chain starting at `id` (1 for a file-bearing location).
    pub fn chain_length(&self, id: &str) -> Result<usize, AsefError> {
        let mut n = 1;
        let mut current = self.location(id).ok_or_else(|| AsefError::UnknownId(id.to_string()))?;
        while let LocationTarget::Location(next) = &current.target {
            current = self.location(next).ok_or_else(|| AsefError::UnknownId(next.clone()))?;
            n += 1;
            if n > self.locations.len() {
                return Err(self.resolve_location(id).unwrap_err());
            }
        }
        Ok(n)
    }

    /// Structural invariants of a report on its own.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut loc_ids = HashSet::new();
        for loc in &self.locations {
            if !is_valid_id(&loc.id) {
                out.push(Violation::InvalidId(loc.id.clone()));
            }
            if !loc_ids.insert(loc.id.as_str()) {
                out.push(Violation::DuplicateLocationId(loc.id.clone()));
            }
            if loc.line == 0 {
                out.push(Violation::InvalidLine {
                    location: loc.id.clone(),
                });
            }
        }
        for loc in &self.locations {
            if let LocationTarget::Location(target) = &loc.target {
                if !loc_ids.contains(target.as_str()) {
                    out.push(Violation::DanglingLocationRef {
                        owner: loc.id.clone(),
                        target: target.clone(),
                    });
                }
            }
        }
        let mut check_ids = HashSet::new();
        for check in &self.checks {
            if !is_valid_id(&check.id) {
                out.push(Violation::InvalidId(check.id.clone()));
            }
            if !check_ids.insert(check.id.as_str()) {
                out.push(Violation::DuplicateCheckId(check.id.clone()));
            }
            for target in std::iter::once(&check.location_ref).chain(&check.trace) {
                if !loc_ids.contains(target.as_str()) {
                    out.push(Violation::DanglingLocationRef {
                        owner: check.id.clone(),
                        target: target.clone(),
                    });
                }
            }
        }
        out.extend(self.cycles().into_iter().map(Violation::LocationCycle));
        out
    }

    /// Every distinct location cycle, each rotated to start at its smallest id.
    pub fn cycles(&self) -> Vec<Vec<String>> {
        let next: HashMap<&str, &str> = self
            .locations
            .iter()
            .filter_map(|l| l.location_ref().map(|t| (l.id.as_str(), t)))
            .collect();
        let mut found = BTreeSet::new();
        let mut done: HashSet<&str> = HashSet::new();
        for start in self.locations.iter().map(|l| l.id.as_str()) {
            let mut path: Vec<&str> = Vec::new();
            let mut cur = start;
            loop {
                if done.contains(cur) {
                    break;
                }
                if let Some(pos) = path.iter().position(|p| *p == cur) {
                    let cyc: Vec<String> = path[pos..].iter().map(|s| s.to_string()).collect();
                    found.insert(canonical_cycle(&cyc));
                    break;
                }
                path.push(cur);
                match next.get(cur) {
                    Some(n) => cur = n,
                    None => break,
                }
            }
            done.extend(path);
        }
        found.into_iter().collect()
    }
}

fn canonical_cycle(ids: &[String]) -> Vec<String> {
    let min = ids
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    ids[min..].iter().chain(&ids[..min]).cloned().collect()
}

/// Checks a report against its own invariants and against the
/// configuration it claims to be produced for. Empty means valid.
pub fn validate_report(report: &AsefReport, cfg: &AsefConfiguration) -> Vec<Violation> {
    let mut out = report.violations();
    let part = match cfg.effective() {
        Ok(p) => p,
        Err(e) => {
            out.push(Violation::InvalidConfiguration(e.to_string()));
            return out;
        }
    };
    let Some(task) = part.task(&report.task_ref) else {
        out.push(Violation::UnknownTask(report.task_ref.clone()));
        return out;
    };
    let scope: &[CategoryId] = part
        .check_target(&task.check_target_ref)
        .map(|t| t.categories.as_slice())
        .unwrap_or(&[]);
    for check in &report.checks {
        if !scope.iter().any(|c| c.is_ancestor_of(&check.category)) {
            out.push(Violation::CategoryOutOfScope {
                check: check.id.clone(),
                category: check.category.clone(),
            });
        }
    }
    out
}
