//! Generators and reference data shared by the format and taxonomy tests.

#![allow(dead_code)]

use asef_core::model::*;
use asef_core::CategoryId;
use chrono::{TimeZone, Utc};
use proptest::prelude::*;

/// The native-to-ASEF rows of the published mapping table.
pub const CATEGORY_TABLE: [(&str, &str, &str); 15] = [
    ("PS", "OVFL", "numeric.overflow"),
    ("AS", "Overflow in arithmetic", "numeric.overflow"),
    ("AS", "Initializer range", "numeric.overflow"),
    ("QPR", "arithmetic.overflow", "numeric.overflow.int"),
    ("QPR", "shift.overflow", "numeric.overflow.int"),
    ("PS", "SHF", "numeric.shift"),
    ("AS", "Wrong range of second shift argument", "numeric.shift.rhs"),
    ("QPR", "shift.by.amount", "numeric.shift.rhs.amount"),
    ("QPR", "shift.by.negative", "numeric.shift.rhs.negative"),
    ("PS", "COR", "mem"),
    ("PS", "IDP", "mem.ptr.deref"),
    ("QPR", "pointer.dereference", "mem.ptr.deref"),
    ("AS", "Dereference of mis-aligned pointer", "mem.ptr.deref.misaligned"),
    ("AS", "Dereference of null or invalid pointer", "mem.ptr.deref.invalid"),
    ("AS", "Incorrect field dereference", "mem.ptr.deref.field"),
];

pub fn ident() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_.-]{0,8}"
}

pub fn category() -> impl Strategy<Value = CategoryId> {
    prop::collection::vec("[a-z][a-z0-9_]{0,5}", 1..4).prop_map(|s| CategoryId::from_segments(s).unwrap())
}

pub fn free_text() -> impl Strategy<Value = String> {
    "[ -~\n\té<>&\"']{0,24}"
}

pub fn hardware(id: String) -> impl Strategy<Value = HardwareTarget> {
    (0usize..4, 0usize..4, 0usize..4, any::<bool>()).prop_map(move |(a, b, c, big)| {
        let mut sizes = [[8u32, 16, 32, 64][a], [8, 16, 32, 64][b], [8, 16, 32, 64][c]];
        sizes.sort();
        HardwareTarget {
            id: id.clone(),
            pointer_size_bits: sizes[2],
            endianness: if big { Endianness::Big } else { Endianness::Little },
            int_size_bits: sizes[1],
            short_size_bits: sizes[0],
        }
    })
}

pub fn unique(ids: Vec<String>) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    ids.into_iter().filter(|i| seen.insert(i.clone())).collect()
}

pub fn part() -> impl Strategy<Value = ConfigPart> {
    (
        prop::collection::vec(ident(), 1..4),
        prop::collection::vec((free_text(), free_text()), 0..3),
        prop::collection::vec(category(), 1..4),
        prop::collection::vec("[a-z/._]{1,12}", 1..4),
        any::<bool>(),
        prop::collection::vec(("/[a-z]{1,6}(/[a-z]{1,6})?", "http://[a-z]{1,6}\\.local/[a-z]{0,5}"), 0..3),
        0usize..3,
    )
        .prop_flat_map(|(ids, kvs, cats, files, with_em, rules, std_idx)| {
            let ids = unique(ids);
            let hws: Vec<_> = ids.iter().map(|id| hardware(id.clone())).collect();
            (hws, Just((ids, kvs, cats, files, with_em, rules, std_idx)))
        })
        .prop_map(|(hws, (ids, kvs, cats, files, with_em, rules, std_idx))| {
            let kv: Vec<KeyValue> = kvs.into_iter().map(|(k, v)| KeyValue::new(k, v)).collect();
            let first = ids[0].clone();
            let mut rule_list: Vec<UriSubstitutionRule> = Vec::new();
            for (l, u) in rules {
                let r = UriSubstitutionRule::new(&l, u);
                if !rule_list.iter().any(|x| x.local_prefix == r.local_prefix) {
                    rule_list.push(r);
                }
            }
            ConfigPart {
                hardware_targets: hws,
                language_targets: vec![LanguageTarget {
                    id: "lt".into(),
                    standard: [LanguageStandard::C90, LanguageStandard::C99, LanguageStandard::C11][std_idx],
                    extensions: kv.clone(),
                }],
                check_targets: vec![CheckTarget {
                    id: "ct".into(),
                    categories: cats,
                }],
                execution_model_targets: if with_em {
                    vec![ExecutionModelTarget {
                        id: "em".into(),
                        attributes: kv,
                    }]
                } else {
                    vec![]
                },
                source_modules: vec![SourceModule {
                    id: "m1".into(),
                    files: files.into_iter().map(SourceFile::new).collect(),
                }],
                analysis_tasks: vec![AnalysisTask {
                    id: "t1".into(),
                    source_module_ref: "m1".into(),
                    hardware_target_ref: first,
                    language_target_ref: "lt".into(),
                    check_target_ref: "ct".into(),
                    execution_model_target_ref: with_em.then(|| "em".to_string()),
                }],
                uri_substitution_rules: rule_list,
            }
        })
}

pub fn config() -> impl Strategy<Value = AsefConfiguration> {
    (part(), prop::option::of(part())).prop_map(|(g, l)| AsefConfiguration {
        global_part: g,
        local_part: l,
    })
}

pub fn status() -> impl Strategy<Value = CheckStatus> {
    prop::sample::select(CheckStatus::ALL.to_vec())
}

pub fn report() -> impl Strategy<Value = AsefReport> {
    (
        prop::collection::vec((any::<bool>(), "[a-z/]{1,10}\\.mc", 1u32..500, 0u32..80, any::<prop::sample::Index>()), 1..8),
        prop::collection::vec((category(), status(), any::<prop::sample::Index>(), free_text(), prop::collection::vec(any::<prop::sample::Index>(), 0..3)), 0..8),
        0i64..4_000_000_000,
        0u32..1000,
    )
        .prop_map(|(locs, checks, secs, millis)| {
            let mut locations = Vec::new();
            for (i, (macro_ref, file, line, col, target)) in locs.into_iter().enumerate() {
                let id = format!("L{i}");
                if macro_ref && i > 0 {
                    locations.push(AsefLocation::via(id, format!("L{}", target.index(i)), line, col));
                } else {
                    locations.push(AsefLocation::in_file(id, file, line, col));
                }
            }
            let n = locations.len();
            let checks = checks
                .into_iter()
                .enumerate()
                .map(|(i, (category, status, loc, message, trace))| AsefCheck {
                    id: format!("C{i}"),
                    category,
                    status,
                    location_ref: format!("L{}", loc.index(n)),
                    message,
                    trace: trace.iter().map(|t| format!("L{}", t.index(n))).collect(),
                })
                .collect();
            AsefReport {
                tool_id: "MC".into(),
                task_ref: "t1".into(),
                created_at: Utc.timestamp_opt(secs, millis * 1_000_000).unwrap(),
                locations,
                checks,
            }
        })
}
