//! Line-oriented native report format.
//!
//! ```text
//! # minicheck native report 1
//! # category<TAB>file<TAB>line<TAB>column<TAB>verdict<TAB>message<TAB>witness<TAB>trace
//! MC:assert<TAB>src/lamp.mc<TAB>18<TAB>8<TAB>proven-unsafe<TAB>assertion ... may fail<TAB>startTime=32767,currentTime=-32768<TAB>8:4:src/lamp.mc;14:8:src/lamp.mc
//! ```
//!
//! Fields escape `\`, tab, newline and carriage return as `\\`, `\t`, `\n`,
//! `\r`; trace file names additionally escape `;` as `\;`. A witness of `-`
//! means none, `{}` an empty assignment; a trace of `-` is empty.

use std::fmt::Write as _;

use thiserror::Error;

use crate::finding::Verdict;

pub const HEADER: &str = "# minicheck native report 1\n# category\tfile\tline\tcolumn\tverdict\tmessage\twitness\ttrace\n";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TracePoint {
    pub file: String,
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NativeFinding {
    /// Tool-qualified category, e.g. `MC:assert` or `AS:Overflow in arithmetic`.
    pub category: String,
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub verdict: Verdict,
    pub message: String,
    pub witness: Option<Vec<(String, i64)>>,
    pub trace: Vec<TracePoint>,
}

impl NativeFinding {
    pub fn sort_key(&self) -> (&str, u32, u32, &str) {
        (&self.file, self.line, self.column, &self.category)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("native report line {line}: {message}")]
pub struct ReportError {
    pub line: usize,
    pub message: String,
}

fn escape(s: &str, out: &mut String, semicolon: bool) {
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            ';' if semicolon => out.push_str("\\;"),
            c => out.push(c),
        }
    }
}

fn unescape(s: &str) -> Result<String, String> {
    let mut out = String::new();
    let mut it = s.chars();
    while let Some(c) = it.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match it.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(';') => out.push(';'),
            other => return Err(format!("bad escape `\\{}`", other.map(String::from).unwrap_or_default())),
        }
    }
    Ok(out)
}

/// Splits on `sep` where it is not preceded by an escaping backslash.
fn split_unescaped(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut start, mut escaped) = (0, false);
    for (i, c) in s.char_indices() {
        if escaped {
            escaped = false;
        } else if c == '\\' {
            escaped = true;
        } else if c == sep {
            parts.push(&s[start..i]);
            start = i + c.len_utf8();
        }
    }
    parts.push(&s[start..]);
    parts
}

pub fn emit_native_report(findings: &[NativeFinding]) -> String {
    let mut out = String::from(HEADER);
    for f in findings {
        escape(&f.category, &mut out, false);
        out.push('\t');
        escape(&f.file, &mut out, false);
        let _ = write!(out, "\t{}\t{}\t{}\t", f.line, f.column, f.verdict);
        escape(&f.message, &mut out, false);
        out.push('\t');
        match &f.witness {
            None => out.push('-'),
            Some(w) if w.is_empty() => out.push_str("{}"),
            Some(w) => {
                let parts: Vec<String> = w.iter().map(|(n, v)| format!("{n}={v}")).collect();
                out.push_str(&parts.join(","));
            }
        }
        out.push('\t');
        if f.trace.is_empty() {
            out.push('-');
        }
        for (i, t) in f.trace.iter().enumerate() {
            if i > 0 {
                out.push(';');
            }
            let _ = write!(out, "{}:{}:", t.line, t.column);
            escape(&t.file, &mut out, true);
        }
        out.push('\n');
    }
    out
}

fn parse_witness(s: &str) -> Result<Option<Vec<(String, i64)>>, String> {
    match s {
        "-" => Ok(None),
        "{}" => Ok(Some(Vec::new())),
        _ => s
            .split(',')
            .map(|kv| {
                let (k, v) = kv.split_once('=').ok_or_else(|| format!("bad witness entry `{kv}`"))?;
                let v = v.parse::<i64>().map_err(|_| format!("bad witness value `{v}`"))?;
                Ok((k.to_string(), v))
            })
            .collect::<Result<Vec<_>, String>>()
            .map(Some),
    }
}

fn parse_trace(s: &str) -> Result<Vec<TracePoint>, String> {
    if s == "-" {
        return Ok(Vec::new());
    }
    split_unescaped(s, ';')
        .into_iter()
        .map(|entry| {
            let mut it = entry.splitn(3, ':');
            let (Some(line), Some(col), Some(file)) = (it.next(), it.next(), it.next()) else {
                return Err(format!("bad trace entry `{entry}`"));
            };
            Ok(TracePoint {
                line: line.parse().map_err(|_| format!("bad trace line `{line}`"))?,
                column: col.parse().map_err(|_| format!("bad trace column `{col}`"))?,
                file: unescape(file)?,
            })
        })
        .collect()
}

pub fn parse_native_report(text: &str) -> Result<Vec<NativeFinding>, ReportError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ReportError { line, message };
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 8 {
            return Err(err(format!("expected 8 tab-separated fields, found {}", fields.len())));
        }
        let num = |s: &str, what: &str| s.parse::<u32>().map_err(|_| err(format!("bad {what} `{s}`")));
        out.push(NativeFinding {
            category: unescape(fields[0]).map_err(err)?,
            file: unescape(fields[1]).map_err(err)?,
            line: num(fields[2], "line")?,
            column: num(fields[3], "column")?,
            verdict: fields[4].parse().map_err(err)?,
            message: unescape(fields[5]).map_err(err)?,
            witness: parse_witness(fields[6]).map_err(err)?,
            trace: parse_trace(fields[7]).map_err(err)?,
        });
    }
    Ok(out)
}
