//! Native-category mapping tables and cross-tool report comparison.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::category::{deepest_common, CategoryId};
use crate::error::TaxonomyError;
use crate::model::{AsefCheck, AsefReport, ResolvedLocation};

/// The mapping table shipped with the toolchain.
pub const DEFAULT_TABLE: &str = include_str!("../data/native-categories.tsv");

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NativeCategoryMapping {
    pub tool_id: String,
    pub native_name: String,
    pub asef_category: CategoryId,
}

/// Splits `"AS:Overflow in arithmetic"` into `("AS", "Overflow in arithmetic")`.
/// Whitespace around either part is dropped (`"PS: SHF"` is `("PS", "SHF")`).
pub fn split_native(qualified: &str) -> Option<(&str, &str)> {
    let (tool, name) = qualified.split_once(':')?;
    let (tool, name) = (tool.trim(), name.trim());
    if tool.is_empty() || name.is_empty() {
        None
    } else {
        Some((tool, name))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingSet {
    entries: Vec<NativeCategoryMapping>,
}

impl MappingSet {
    pub fn from_entries(entries: Vec<NativeCategoryMapping>) -> Result<Self, TaxonomyError> {
        let mut set = MappingSet::default();
        for (i, e) in entries.into_iter().enumerate() {
            set.insert(e).map_err(|message| TaxonomyError::Table { line: i + 1, message })?;
        }
        Ok(set)
    }

    fn insert(&mut self, e: NativeCategoryMapping) -> Result<(), String> {
        if self
            .entries
            .iter()
            .any(|x| x.tool_id == e.tool_id && x.native_name == e.native_name)
        {
            return Err(format!("duplicate mapping for {}:{}", e.tool_id, e.native_name));
        }
        self.entries.push(e);
        Ok(())
    }

    /// Parses the tab-separated table format (`#` starts a comment line).
    pub fn parse(text: &str) -> Result<Self, TaxonomyError> {
        let mut set = MappingSet::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').map(str::trim).collect();
            let [tool, name, category] = fields[..] else {
                return Err(TaxonomyError::Table {
                    line,
                    message: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            };
            if tool.is_empty() || name.is_empty() {
                return Err(TaxonomyError::Table {
                    line,
                    message: "empty tool or native name".into(),
                });
            }
            let asef_category = category.parse().map_err(|e: crate::error::InvalidCategory| TaxonomyError::Table {
                line,
                message: e.to_string(),
            })?;
            set.insert(NativeCategoryMapping {
                tool_id: tool.to_string(),
                native_name: name.to_string(),
                asef_category,
            })
            .map_err(|message| TaxonomyError::Table { line, message })?;
        }
        Ok(set)
    }

    pub fn default_set() -> Self {
        Self::parse(DEFAULT_TABLE).expect("shipped mapping table parses")
    }

    pub fn entries(&self) -> &[NativeCategoryMapping] {
        &self.entries
    }

    pub fn map_native(&self, tool_id: &str, native_name: &str) -> Result<CategoryId, TaxonomyError> {
        self.entries
            .iter()
            .find(|e| e.tool_id == tool_id && e.native_name == native_name)
            .map(|e| e.asef_category.clone())
            .ok_or_else(|| TaxonomyError::UnknownNative {
                tool: tool_id.to_string(),
                name: native_name.to_string(),
            })
    }

    /// Native names of `tool_id` mapped to `category` or any descendant, in table order.
    pub fn natives_for(&self, category: &CategoryId, tool_id: &str) -> Vec<String> {
        self.entries
            .iter()
            .filter(|e| e.tool_id == tool_id && category.is_ancestor_of(&e.asef_category))
            .map(|e| e.native_name.clone())
            .collect()
    }

    pub fn tools(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.entries
            .iter()
            .filter(|e| seen.insert(e.tool_id.as_str()))
            .map(|e| e.tool_id.clone())
            .collect()
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("# toolId\tnativeName\tasefCategory\n");
        for e in &self.entries {
            out.push_str(&format!("{}\t{}\t{}\n", e.tool_id, e.native_name, e.asef_category));
        }
        out
    }
}

pub fn map_native(tool_id: &str, native_name: &str, mappings: &MappingSet) -> Result<CategoryId, TaxonomyError> {
    mappings.map_native(tool_id, native_name)
}

pub fn natives_for(category: &CategoryId, tool_id: &str, mappings: &MappingSet) -> Vec<String> {
    mappings.natives_for(category, tool_id)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub a: AsefCheck,
    pub b: AsefCheck,
    pub common_category: CategoryId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffResult {
    pub matched: Vec<MatchedPair>,
    pub only_in_a: Vec<AsefCheck>,
    pub only_in_b: Vec<AsefCheck>,
    pub status_conflicts: Vec<(AsefCheck, AsefCheck)>,
}

impl DiffResult {
    pub fn is_clean(&self) -> bool {
        self.only_in_a.is_empty() && self.only_in_b.is_empty() && self.status_conflicts.is_empty()
    }

    /// The same diff seen from the other side.
    pub fn swapped(&self) -> DiffResult {
        let mut matched: Vec<MatchedPair> = self
            .matched
            .iter()
            .map(|m| MatchedPair {
                a: m.b.clone(),
                b: m.a.clone(),
                common_category: m.common_category.clone(),
            })
            .collect();
        matched.sort_by(|x, y| x.a.id.cmp(&y.a.id));
        let status_conflicts = conflicts(&matched);
        DiffResult {
            matched,
            only_in_a: self.only_in_b.clone(),
            only_in_b: self.only_in_a.clone(),
            status_conflicts,
        }
    }
}

fn conflicts(matched: &[MatchedPair]) -> Vec<(AsefCheck, AsefCheck)> {
    matched
        .iter()
        .filter(|m| m.a.status != m.b.status)
        .map(|m| (m.a.clone(), m.b.clone()))
        .collect()
}

struct Keyed<'a> {
    check: &'a AsefCheck,
    at: Option<ResolvedLocation>,
}

fn keyed(report: &AsefReport) -> Vec<Keyed<'_>> {
    let mut v: Vec<Keyed<'_>> = report
        .checks
        .iter()
        .map(|c| Keyed {
            check: c,
            at: report.resolve_location(&c.location_ref).ok(),
        })
        .collect();
    v.sort_by(|x, y| x.check.id.cmp(&y.check.id));
    v
}

fn fingerprint(keys: &[Keyed<'_>]) -> Vec<(String, u32, String, &'static str, String)> {
    let mut fp: Vec<_> = keys
        .iter()
        .map(|k| {
            let (file, line) = k.at.as_ref().map(|r| (r.file_ref.clone(), r.line)).unwrap_or_default();
            (file, line, k.check.category.to_string(), k.check.status.as_str(), k.check.id.clone())
        })
        .collect();
    fp.sort();
    fp
}

fn greedy(a: &[Keyed<'_>], b: &[Keyed<'_>]) -> DiffResult {
    let mut used = vec![false; b.len()];
    let mut result = DiffResult::default();
    for ka in a {
        let hit = ka.at.as_ref().and_then(|at_a| {
            b.iter().enumerate().find(|(j, kb)| {
                !used[*j]
                    && kb.at.as_ref().is_some_and(|at_b| at_b.file_ref == at_a.file_ref && at_b.line == at_a.line)
                    && ka.check.category.is_related(&kb.check.category)
            })
        });
        match hit {
            Some((j, kb)) => {
                used[j] = true;
                result.matched.push(MatchedPair {
                    a: ka.check.clone(),
                    b: kb.check.clone(),
                    common_category: deepest_common(&ka.check.category, &kb.check.category)
                        .expect("related categories share a root"),
                });
            }
            None => result.only_in_a.push(ka.check.clone()),
        }
    }
    result.only_in_b = b
        .iter()
        .zip(&used)
        .filter(|(_, u)| !**u)
        .map(|(k, _)| k.check.clone())
        .collect();
    result.status_conflicts = conflicts(&result.matched);
    result
}

/// Matches checks of two reports: same resolved file and line (columns are
/// ignored) and categories on one ancestor chain. Matching is greedy in
/// ascending check-id order; the side that drives the greedy pass is chosen
/// from the reports' content, so swapping the arguments swaps the result.
pub fn compare_reports(a: &AsefReport, b: &AsefReport) -> DiffResult {
    let (ka, kb) = (keyed(a), keyed(b));
    if fingerprint(&ka) <= fingerprint(&kb) {
        greedy(&ka, &kb)
    } else {
        greedy(&kb, &ka).swapped()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(s: &str) -> CategoryId {
        s.parse().unwrap()
    }

    #[test]
    fn table_examples() {
        let m = MappingSet::default_set();
        assert_eq!(m.map_native("PS", "OVFL").unwrap(), cat("numeric.overflow"));
        assert_eq!(m.map_native("QPR", "shift.by.negative").unwrap(), cat("numeric.shift.rhs.negative"));
        assert_eq!(
            m.map_native("AS", "Dereference of null or invalid pointer").unwrap(),
            cat("mem.ptr.deref.invalid")
        );
        assert_eq!(
            m.map_native("AS", "Mystery"),
            Err(TaxonomyError::UnknownNative {
                tool: "AS".into(),
                name: "Mystery".into()
            })
        );
    }

    #[test]
    fn reverse_lookup_includes_descendants() {
        let m = MappingSet::default_set();
        assert_eq!(
            m.natives_for(&cat("numeric.overflow"), "AS"),
            vec!["Overflow in arithmetic", "Initializer range"]
        );
        assert_eq!(
            m.natives_for(&cat("numeric.shift"), "QPR"),
            vec!["shift.by.amount", "shift.by.negative"]
        );
        assert!(m.natives_for(&cat("mem.uninit"), "PS").is_empty());
    }

    #[test]
    fn split_handles_spacing() {
        assert_eq!(split_native("PS: SHF"), Some(("PS", "SHF")));
        assert_eq!(split_native("AS:Overflow in arithmetic"), Some(("AS", "Overflow in arithmetic")));
        assert_eq!(split_native("nocolon"), None);
        assert_eq!(split_native("X:"), None);
    }

    #[test]
    fn table_errors_name_the_line() {
        let err = MappingSet::parse("# c\nPS\tOVFL\n").unwrap_err();
        assert!(matches!(err, TaxonomyError::Table { line: 2, .. }));
        let err = MappingSet::parse("PS\tOVFL\tnumeric.overflow\nPS\tOVFL\tmem\n").unwrap_err();
        assert!(matches!(err, TaxonomyError::Table { line: 2, .. }));
        let err = MappingSet::parse("PS\tOVFL\tNumeric\n").unwrap_err();
        assert!(matches!(err, TaxonomyError::Table { line: 1, .. }));
    }

    #[test]
    fn table_round_trips() {
        let m = MappingSet::default_set();
        assert_eq!(MappingSet::parse(&m.to_table()).unwrap(), m);
    }
}
