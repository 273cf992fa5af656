//! XML reading and writing for ASEF documents.
//!
//! Reading goes through a small element tree so schema errors can name the
//! offending element path. Writing is hand-rolled with a fixed attribute
//! order, so the output for a given model is byte-stable.

use std::fmt::Write as _;

use chrono::{DateTime, SecondsFormat, Utc};
use quick_xml::events::Event;
use quick_xml::Reader;

use crate::category::CategoryId;
use crate::error::AsefError;
use crate::model::*;

/// The single namespace ASEF documents may declare.
pub const NAMESPACE: &str = "urn:asef:1.0";

#[derive(Debug, Clone)]
struct Element {
    name: String,
    attrs: Vec<(String, String)>,
    children: Vec<Element>,
    text: String,
    path: String,
}

impl Element {
    fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    fn required(&self, name: &str) -> Result<&str, AsefError> {
        self.attr(name)
            .ok_or_else(|| AsefError::schema(&self.path, format!("missing required attribute `{name}`")))
    }

    fn id(&self) -> Result<String, AsefError> {
        let id = self.required("id")?;
        if !is_valid_id(id) {
            return Err(AsefError::schema(&self.path, format!("invalid id `{id}`")));
        }
        Ok(id.to_string())
    }

    fn reference(&self, name: &str) -> Result<String, AsefError> {
        let r = self.required(name)?;
        if !is_valid_id(r) {
            return Err(AsefError::schema(&self.path, format!("invalid reference `{r}` in `{name}`")));
        }
        Ok(r.to_string())
    }

    /// Rejects attributes outside `allowed` (the root may also carry `xmlns`).
    fn only_attrs(&self, allowed: &[&str]) -> Result<(), AsefError> {
        for (k, v) in &self.attrs {
            if k == "xmlns" {
                if v != NAMESPACE {
                    return Err(AsefError::schema(&self.path, format!("unsupported namespace `{v}`")));
                }
                continue;
            }
            if !allowed.contains(&k.as_str()) {
                return Err(AsefError::schema(&self.path, format!("unknown attribute `{k}`")));
            }
        }
        Ok(())
    }

    fn no_text(&self) -> Result<(), AsefError> {
        if self.text.trim().is_empty() {
            Ok(())
        } else {
            Err(AsefError::schema(&self.path, "unexpected text content"))
        }
    }

    fn leaf(&self, allowed: &[&str]) -> Result<(), AsefError> {
        self.only_attrs(allowed)?;
        self.no_text()?;
        if let Some(c) = self.children.first() {
            return Err(AsefError::schema(&c.path, format!("unknown element `{}`", c.name)));
        }
        Ok(())
    }

    fn parsed<T: std::str::FromStr>(&self, name: &str) -> Result<T, AsefError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.required(name)?;
        raw.parse::<T>()
            .map_err(|e| AsefError::schema(&self.path, format!("attribute `{name}`: {e}")))
    }

    fn unknown(&self) -> AsefError {
        AsefError::schema(&self.path, format!("unknown element `{}`", self.name))
    }
}

fn syntax(position: u64, message: impl Into<String>) -> AsefError {
    AsefError::Syntax {
        position,
        message: message.into(),
    }
}

fn parse_tree(xml: &str) -> Result<Element, AsefError> {
    let mut reader = Reader::from_str(xml);
    reader.config_mut().trim_text(false);
    reader.config_mut().check_end_names = true;

    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;
    // sibling counters per stack depth, to build `Name[n]` paths
    let mut counters: Vec<std::collections::HashMap<String, usize>> = vec![Default::default()];

    loop {
        let pos = reader.buffer_position() as u64;
        let event = reader.read_event().map_err(|e| syntax(pos, e.to_string()))?;
        match event {
            Event::Decl(decl) => {
                if let Some(enc) = decl.encoding() {
                    let enc = enc.map_err(|e| syntax(pos, e.to_string()))?;
                    if !enc.eq_ignore_ascii_case(b"utf-8") {
                        return Err(syntax(pos, "only UTF-8 encoding is supported"));
                    }
                }
            }
            Event::Start(ref start) | Event::Empty(ref start) => {
                let is_empty = matches!(event, Event::Empty(_));
                let name = std::str::from_utf8(start.name().as_ref())
                    .map_err(|e| syntax(pos, e.to_string()))?
                    .to_string();
                if name.contains(':') {
                    return Err(syntax(pos, format!("namespace prefixes are not supported (`{name}`)")));
                }
                if root.is_some() && stack.is_empty() {
                    return Err(syntax(pos, "more than one root element"));
                }
                let counter = counters.last_mut().expect("counter stack");
                let n = counter.entry(name.clone()).or_insert(0);
                *n += 1;
                let parent_path = stack.last().map(|p| p.path.clone()).unwrap_or_default();
                let path = if *n > 1 || stack.is_empty() {
                    if stack.is_empty() {
                        format!("/{name}")
                    } else {
                        format!("{parent_path}/{name}[{n}]")
                    }
                } else {
                    format!("{parent_path}/{name}")
                };
                let mut attrs = Vec::new();
                for attr in start.attributes() {
                    let attr = attr.map_err(|e| syntax(pos, e.to_string()))?;
                    let key = std::str::from_utf8(attr.key.as_ref())
                        .map_err(|e| syntax(pos, e.to_string()))?
                        .to_string();
                    let value = attr.unescape_value().map_err(|e| syntax(pos, e.to_string()))?.into_owned();
                    attrs.push((key, value));
                }
                let element = Element {
                    name,
                    attrs,
                    children: Vec::new(),
                    text: String::new(),
                    path,
                };
                stack.push(element);
                counters.push(Default::default());
                if is_empty {
                    close(&mut stack, &mut counters, &mut root);
                }
            }
            Event::End(_) => close(&mut stack, &mut counters, &mut root),
            Event::Text(text) => {
                let t = text.unescape().map_err(|e| syntax(pos, e.to_string()))?;
                match stack.last_mut() {
                    Some(el) => el.text.push_str(&t),
                    None if t.trim().is_empty() => {}
                    None => return Err(syntax(pos, "text outside the root element")),
                }
            }
            Event::CData(data) => {
                let t = std::str::from_utf8(&data).map_err(|e| syntax(pos, e.to_string()))?;
                match stack.last_mut() {
                    Some(el) => el.text.push_str(t),
                    None => return Err(syntax(pos, "CDATA outside the root element")),
                }
            }
            Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::Eof => break,
        }
    }
    if !stack.is_empty() {
        return Err(syntax(xml.len() as u64, "unexpected end of document"));
    }
    root.ok_or_else(|| syntax(0, "document has no root element"))
}

fn close(
    stack: &mut Vec<Element>,
    counters: &mut Vec<std::collections::HashMap<String, usize>>,
    root: &mut Option<Element>,
) {
    counters.pop();
    if let Some(done) = stack.pop() {
        match stack.last_mut() {
            Some(parent) => parent.children.push(done),
            None => *root = Some(done),
        }
    }
}

// ---------------------------------------------------------------------------
// configuration

fn parse_key_values(el: &Element, child_name: &str) -> Result<Vec<KeyValue>, AsefError> {
    el.children
        .iter()
        .map(|c| {
            if c.name != child_name {
                return Err(c.unknown());
            }
            c.leaf(&["key", "value"])?;
            Ok(KeyValue::new(c.required("key")?, c.required("value")?))
        })
        .collect()
}

fn parse_part(el: &Element) -> Result<ConfigPart, AsefError> {
    el.only_attrs(&[])?;
    el.no_text()?;
    let mut part = ConfigPart::default();
    for c in &el.children {
        match c.name.as_str() {
            "HardwareTarget" => {
                c.leaf(&["id", "pointerSizeBits", "endianness", "intSizeBits", "shortSizeBits"])?;
                let hw = HardwareTarget {
                    id: c.id()?,
                    pointer_size_bits: c.parsed("pointerSizeBits")?,
                    endianness: c.parsed("endianness")?,
                    int_size_bits: c.parsed("intSizeBits")?,
                    short_size_bits: c.parsed("shortSizeBits")?,
                };
                hw.check().map_err(|m| AsefError::schema(&c.path, m))?;
                part.hardware_targets.push(hw);
            }
            "LanguageTarget" => {
                c.only_attrs(&["id", "standard"])?;
                c.no_text()?;
                part.language_targets.push(LanguageTarget {
                    id: c.id()?,
                    standard: c.parsed("standard")?,
                    extensions: parse_key_values(c, "Extension")?,
                });
            }
            "CheckTarget" => {
                c.only_attrs(&["id"])?;
                c.no_text()?;
                let mut categories = Vec::new();
                for cc in &c.children {
                    if cc.name != "CorrectnessCheckCategory" {
                        return Err(cc.unknown());
                    }
                    cc.leaf(&["name"])?;
                    categories.push(cc.parsed::<CategoryId>("name")?);
                }
                if categories.is_empty() {
                    return Err(AsefError::schema(&c.path, "CheckTarget needs at least one CorrectnessCheckCategory"));
                }
                part.check_targets.push(CheckTarget { id: c.id()?, categories });
            }
            "ExecutionModelTarget" => {
                c.only_attrs(&["id"])?;
                c.no_text()?;
                part.execution_model_targets.push(ExecutionModelTarget {
                    id: c.id()?,
                    attributes: parse_key_values(c, "Attribute")?,
                });
            }
            "SourceModule" => {
                c.only_attrs(&["id"])?;
                c.no_text()?;
                let mut files = Vec::new();
                for f in &c.children {
                    if f.name != "SourceFile" {
                        return Err(f.unknown());
                    }
                    f.leaf(&["ref"])?;
                    let r = f.required("ref")?;
                    if r.is_empty() {
                        return Err(AsefError::schema(&f.path, "empty `ref`"));
                    }
                    files.push(SourceFile::new(r));
                }
                if files.is_empty() {
                    return Err(AsefError::schema(&c.path, "SourceModule needs at least one SourceFile"));
                }
                part.source_modules.push(SourceModule { id: c.id()?, files });
            }
            "AnalysisTask" => {
                c.leaf(&[
                    "id",
                    "sourceModuleRef",
                    "hardwareTargetRef",
                    "languageTargetRef",
                    "checkTargetRef",
                    "executionModelTargetRef",
                ])?;
                part.analysis_tasks.push(AnalysisTask {
                    id: c.id()?,
                    source_module_ref: c.reference("sourceModuleRef")?,
                    hardware_target_ref: c.reference("hardwareTargetRef")?,
                    language_target_ref: c.reference("languageTargetRef")?,
                    check_target_ref: c.reference("checkTargetRef")?,
                    execution_model_target_ref: match c.attr("executionModelTargetRef") {
                        Some(_) => Some(c.reference("executionModelTargetRef")?),
                        None => None,
                    },
                });
            }
            "URISubstitutionRule" => {
                c.leaf(&["localPrefix", "uriPrefix"])?;
                let rule = UriSubstitutionRule {
                    local_prefix: c.required("localPrefix")?.to_string(),
                    uri_prefix: c.required("uriPrefix")?.to_string(),
                };
                rule.check().map_err(|m| AsefError::schema(&c.path, m))?;
                part.uri_substitution_rules.push(rule);
            }
            _ => return Err(c.unknown()),
        }
    }
    check_unique_ids(el, &part)?;
    Ok(part)
}

fn check_unique_ids(el: &Element, part: &ConfigPart) -> Result<(), AsefError> {
    fn dup<'a>(ids: impl Iterator<Item = &'a str>) -> Option<&'a str> {
        let mut seen = std::collections::HashSet::new();
        ids.into_iter().find(|id| !seen.insert(*id))
    }
    let lists: [(&str, Option<&str>); 7] = [
        ("HardwareTarget", dup(part.hardware_targets.iter().map(|t| t.id.as_str()))),
        ("LanguageTarget", dup(part.language_targets.iter().map(|t| t.id.as_str()))),
        ("CheckTarget", dup(part.check_targets.iter().map(|t| t.id.as_str()))),
        (
            "ExecutionModelTarget",
            dup(part.execution_model_targets.iter().map(|t| t.id.as_str())),
        ),
        ("SourceModule", dup(part.source_modules.iter().map(|t| t.id.as_str()))),
        ("AnalysisTask", dup(part.analysis_tasks.iter().map(|t| t.id.as_str()))),
        (
            "URISubstitutionRule",
            dup(part.uri_substitution_rules.iter().map(|r| r.local_prefix.as_str())),
        ),
    ];
    for (kind, d) in lists {
        if let Some(id) = d {
            return Err(AsefError::schema(&el.path, format!("duplicate {kind} `{id}`")));
        }
    }
    Ok(())
}

/// Reads a configuration document and checks that every task reference
/// resolves in the effective (global + local) part.
pub fn parse_config(xml: &str) -> Result<AsefConfiguration, AsefError> {
    let root = parse_tree(xml)?;
    if root.name != "AsefConfiguration" {
        return Err(AsefError::schema(&root.path, format!("expected root `AsefConfiguration`, found `{}`", root.name)));
    }
    root.only_attrs(&[])?;
    root.no_text()?;
    let mut cfg = AsefConfiguration::default();
    let mut seen_global = false;
    for c in &root.children {
        match c.name.as_str() {
            "GlobalPart" if !seen_global => {
                seen_global = true;
                cfg.global_part = parse_part(c)?;
            }
            "LocalPart" if cfg.local_part.is_none() => cfg.local_part = Some(parse_part(c)?),
            "GlobalPart" | "LocalPart" => {
                return Err(AsefError::schema(&c.path, format!("`{}` may appear only once", c.name)))
            }
            _ => return Err(c.unknown()),
        }
    }
    cfg.effective()?;
    Ok(cfg)
}

/// Reads a bare configuration part (an `asef.local.xml` overlay has a
/// `LocalPart` root; a `GlobalPart` root is accepted too).
pub fn parse_config_part(xml: &str) -> Result<ConfigPart, AsefError> {
    let root = parse_tree(xml)?;
    match root.name.as_str() {
        "LocalPart" | "GlobalPart" => parse_part(&root),
        "AsefConfiguration" => {
            let cfg = parse_config(xml)?;
            Ok(cfg.local_part.unwrap_or(cfg.global_part))
        }
        other => Err(AsefError::schema(&root.path, format!("expected a configuration part, found `{other}`"))),
    }
}

// ---------------------------------------------------------------------------
// report

/// Reads a report and enforces its invariants: unique ids, resolvable
/// location references, and acyclic macro chains.
pub fn parse_report(xml: &str) -> Result<AsefReport, AsefError> {
    let root = parse_tree(xml)?;
    if root.name != "AsefReport" {
        return Err(AsefError::schema(&root.path, format!("expected root `AsefReport`, found `{}`", root.name)));
    }
    root.only_attrs(&["toolId", "taskRef", "createdAt"])?;
    root.no_text()?;
    let created_raw = root.required("createdAt")?;
    let created_at = DateTime::parse_from_rfc3339(created_raw)
        .map_err(|e| AsefError::schema(&root.path, format!("createdAt `{created_raw}`: {e}")))?
        .with_timezone(&Utc);
    let mut report = AsefReport {
        tool_id: root.required("toolId")?.to_string(),
        task_ref: root.reference("taskRef")?,
        created_at,
        locations: Vec::new(),
        checks: Vec::new(),
    };
    for c in &root.children {
        match c.name.as_str() {
            "Location" => {
                c.leaf(&["id", "fileRef", "locationRef", "line", "column"])?;
                let target = match (c.attr("fileRef"), c.attr("locationRef")) {
                    (Some(f), None) if !f.is_empty() => LocationTarget::File(f.to_string()),
                    (None, Some(_)) => LocationTarget::Location(c.reference("locationRef")?),
                    _ => {
                        return Err(AsefError::schema(
                            &c.path,
                            "exactly one of `fileRef` and `locationRef` is required",
                        ))
                    }
                };
                let line: u32 = c.parsed("line")?;
                if line == 0 {
                    return Err(AsefError::schema(&c.path, "line numbers are 1-based"));
                }
                report.locations.push(AsefLocation {
                    id: c.id()?,
                    target,
                    line,
                    column: c.parsed("column")?,
                });
            }
            "Check" => {
                c.only_attrs(&["id", "category", "status", "locationRef"])?;
                c.no_text()?;
                let mut message = None;
                let mut trace = Vec::new();
                for cc in &c.children {
                    match cc.name.as_str() {
                        "Message" if message.is_none() => {
                            cc.only_attrs(&[])?;
                            if let Some(g) = cc.children.first() {
                                return Err(g.unknown());
                            }
                            message = Some(cc.text.clone());
                        }
                        "TraceStep" => {
                            cc.leaf(&["locationRef"])?;
                            trace.push(cc.reference("locationRef")?);
                        }
                        _ => return Err(cc.unknown()),
                    }
                }
                report.checks.push(AsefCheck {
                    id: c.id()?,
                    category: c.parsed("category")?,
                    status: c.parsed("status")?,
                    location_ref: c.reference("locationRef")?,
                    message: message.unwrap_or_default(),
                    trace,
                });
            }
            _ => return Err(c.unknown()),
        }
    }
    if let Some(v) = report.violations().into_iter().next() {
        return Err(match v {
            Violation::LocationCycle(ids) => AsefError::Cycle { ids },
            Violation::DanglingLocationRef { owner, target } => {
                AsefError::reference(target, format!("referenced from `{owner}`"))
            }
            other => AsefError::schema(&root.path, other.to_string()),
        });
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// writing

fn escape_attr(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
    out
}

struct Writer {
    out: String,
}

impl Writer {
    fn new() -> Self {
        Writer {
            out: String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"),
        }
    }

    fn open_tag(&mut self, depth: usize, name: &str, attrs: &[(&str, &str)]) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
        self.out.push('<');
        self.out.push_str(name);
        for (k, v) in attrs {
            let _ = write!(self.out, " {k}=\"{}\"", escape_attr(v));
        }
    }

    fn empty(&mut self, depth: usize, name: &str, attrs: &[(&str, &str)]) {
        self.open_tag(depth, name, attrs);
        self.out.push_str("/>\n");
    }

    fn start(&mut self, depth: usize, name: &str, attrs: &[(&str, &str)]) {
        self.open_tag(depth, name, attrs);
        self.out.push_str(">\n");
    }

    fn end(&mut self, depth: usize, name: &str) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
        let _ = writeln!(self.out, "</{name}>");
    }

    fn text_element(&mut self, depth: usize, name: &str, text: &str) {
        self.open_tag(depth, name, &[]);
        let _ = writeln!(self.out, ">{}</{name}>", escape_text(text));
    }

    /// `<name ...>children</name>` or `<name .../>` when there are no children.
    fn container<T>(&mut self, depth: usize, name: &str, attrs: &[(&str, &str)], items: &[T], mut each: impl FnMut(&mut Self, &T)) {
        if items.is_empty() {
            self.empty(depth, name, attrs);
        } else {
            self.start(depth, name, attrs);
            for it in items {
                each(self, it);
            }
            self.end(depth, name);
        }
    }
}

fn write_part(w: &mut Writer, depth: usize, name: &str, part: &ConfigPart) {
    w.start(depth, name, &[]);
    let d = depth + 1;
    for hw in &part.hardware_targets {
        let (p, i, s) = (
            hw.pointer_size_bits.to_string(),
            hw.int_size_bits.to_string(),
            hw.short_size_bits.to_string(),
        );
        w.empty(
            d,
            "HardwareTarget",
            &[
                ("id", &hw.id),
                ("pointerSizeBits", &p),
                ("endianness", hw.endianness.as_str()),
                ("intSizeBits", &i),
                ("shortSizeBits", &s),
            ],
        );
    }
    for lt in &part.language_targets {
        w.container(d, "LanguageTarget", &[("id", &lt.id), ("standard", lt.standard.as_str())], &lt.extensions, |w, kv| {
            w.empty(d + 1, "Extension", &[("key", &kv.key), ("value", &kv.value)])
        });
    }
    for ct in &part.check_targets {
        w.container(d, "CheckTarget", &[("id", &ct.id)], &ct.categories, |w, c| {
            w.empty(d + 1, "CorrectnessCheckCategory", &[("name", &c.to_string())])
        });
    }
    for em in &part.execution_model_targets {
        w.container(d, "ExecutionModelTarget", &[("id", &em.id)], &em.attributes, |w, kv| {
            w.empty(d + 1, "Attribute", &[("key", &kv.key), ("value", &kv.value)])
        });
    }
    for sm in &part.source_modules {
        w.container(d, "SourceModule", &[("id", &sm.id)], &sm.files, |w, f| {
            w.empty(d + 1, "SourceFile", &[("ref", &f.reference)])
        });
    }
    for t in &part.analysis_tasks {
        let mut attrs = vec![
            ("id", t.id.as_str()),
            ("sourceModuleRef", t.source_module_ref.as_str()),
            ("hardwareTargetRef", t.hardware_target_ref.as_str()),
            ("languageTargetRef", t.language_target_ref.as_str()),
            ("checkTargetRef", t.check_target_ref.as_str()),
        ];
        if let Some(em) = &t.execution_model_target_ref {
            attrs.push(("executionModelTargetRef", em));
        }
        w.empty(d, "AnalysisTask", &attrs);
    }
    for r in &part.uri_substitution_rules {
        w.empty(
            d,
            "URISubstitutionRule",
            &[("localPrefix", &r.local_prefix), ("uriPrefix", &r.uri_prefix)],
        );
    }
    w.end(depth, name);
}

/// Writes a configuration. An empty global part is omitted, so the empty
/// configuration is a childless root element.
pub fn serialize_config(cfg: &AsefConfiguration) -> String {
    let mut w = Writer::new();
    let root_attrs = [("xmlns", NAMESPACE)];
    if cfg.global_part.is_empty() && cfg.local_part.is_none() {
        w.empty(0, "AsefConfiguration", &root_attrs);
        return w.out;
    }
    w.start(0, "AsefConfiguration", &root_attrs);
    if !cfg.global_part.is_empty() {
        write_part(&mut w, 1, "GlobalPart", &cfg.global_part);
    }
    if let Some(local) = &cfg.local_part {
        write_part(&mut w, 1, "LocalPart", local);
    }
    w.end(0, "AsefConfiguration");
    w.out
}

/// Writes a standalone overlay document (`asef.local.xml`).
pub fn serialize_config_part(part: &ConfigPart) -> String {
    let mut w = Writer::new();
    write_part(&mut w, 0, "LocalPart", part);
    w.out
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

pub fn serialize_report(report: &AsefReport) -> String {
    let mut w = Writer::new();
    let created = format_timestamp(&report.created_at);
    let attrs = [
        ("xmlns", NAMESPACE),
        ("toolId", report.tool_id.as_str()),
        ("taskRef", report.task_ref.as_str()),
        ("createdAt", created.as_str()),
    ];
    if report.locations.is_empty() && report.checks.is_empty() {
        w.empty(0, "AsefReport", &attrs);
        return w.out;
    }
    w.start(0, "AsefReport", &attrs);
    for loc in &report.locations {
        let (line, column) = (loc.line.to_string(), loc.column.to_string());
        let target = match &loc.target {
            LocationTarget::File(f) => ("fileRef", f.as_str()),
            LocationTarget::Location(l) => ("locationRef", l.as_str()),
        };
        w.empty(1, "Location", &[("id", &loc.id), target, ("line", &line), ("column", &column)]);
    }
    for check in &report.checks {
        let category = check.category.to_string();
        let attrs = [
            ("id", check.id.as_str()),
            ("category", category.as_str()),
            ("status", check.status.as_str()),
            ("locationRef", check.location_ref.as_str()),
        ];
        if check.message.is_empty() && check.trace.is_empty() {
            w.empty(1, "Check", &attrs);
            continue;
        }
        w.start(1, "Check", &attrs);
        if !check.message.is_empty() {
            w.text_element(2, "Message", &check.message);
        }
        for step in &check.trace {
            w.empty(2, "TraceStep", &[("locationRef", step)]);
        }
        w.end(1, "Check");
    }
    w.end(0, "AsefReport");
    w.out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let xml = r#"<AsefConfiguration><GlobalPart>
            <SourceModule id="m1"><SourceFile ref="src/lamp.mc"/></SourceModule>
        </GlobalPart></AsefConfiguration>"#;
        let cfg = parse_config(xml).unwrap();
        assert_eq!(cfg.global_part.source_modules.len(), 1);
        assert_eq!(cfg.global_part.source_modules[0].files, vec![SourceFile::new("src/lamp.mc")]);
        assert!(cfg.local_part.is_none());
    }

    #[test]
    fn empty_config_is_childless_root() {
        let xml = serialize_config(&AsefConfiguration::default());
        assert_eq!(
            xml,
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<AsefConfiguration xmlns=\"urn:asef:1.0\"/>\n"
        );
        assert_eq!(parse_config(&xml).unwrap(), AsefConfiguration::default());
    }

    #[test]
    fn schema_errors_carry_paths() {
        let xml = r#"<AsefConfiguration><GlobalPart>
            <SourceModule id="m1"><SourceFile ref="a"/></SourceModule>
            <SourceModule id="m2"><SourceFile/></SourceModule>
        </GlobalPart></AsefConfiguration>"#;
        match parse_config(xml) {
            Err(AsefError::Schema { path, message }) => {
                assert_eq!(path, "/AsefConfiguration/GlobalPart/SourceModule[2]/SourceFile");
                assert!(message.contains("ref"), "{message}");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
        let unknown = r#"<AsefConfiguration><GlobalPart><Bogus/></GlobalPart></AsefConfiguration>"#;
        assert!(matches!(parse_config(unknown), Err(AsefError::Schema { path, .. }) if path.ends_with("/Bogus")));
    }

    #[test]
    fn malformed_xml_is_a_syntax_error() {
        for bad in ["<AsefConfiguration>", "<a></b>", "", "<a/><b/>", "<a>&bogus;</a>"] {
            assert!(matches!(parse_config(bad), Err(AsefError::Syntax { .. })), "{bad:?}");
        }
    }

    #[test]
    fn report_text_survives_whitespace_and_escapes() {
        let xml = r#"<?xml version="1.0" encoding="UTF-8"?>
<AsefReport toolId="mc" taskRef="t1" createdAt="2024-05-01T10:00:00Z">
  <Location id="L1" fileRef="src/a&amp;b.mc" line="3" column="0"/>
  <Check id="C1" category="numeric.overflow" status="Unsafe" locationRef="L1">
    <Message>  x &lt; 0
 here </Message>
  </Check>
</AsefReport>"#;
        let r = parse_report(xml).unwrap();
        assert_eq!(r.checks[0].message, "  x < 0\n here ");
        assert_eq!(r.locations[0].file_ref(), Some("src/a&b.mc"));
        assert_eq!(parse_report(&serialize_report(&r)).unwrap(), r);
    }
}
