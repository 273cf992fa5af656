use std::fmt;
use std::str::FromStr;

use crate::ast::Pos;

/// The analyzer's native check kinds (`MC:<name>` in reports).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    SignedOverflow,
    ConvOverflow,
    DivZero,
    ShiftAmount,
    ShiftNegative,
    UninitRead,
    Assert,
}

pub const TOOL_ID: &str = "MC";

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::SignedOverflow,
        Kind::ConvOverflow,
        Kind::DivZero,
        Kind::ShiftAmount,
        Kind::ShiftNegative,
        Kind::UninitRead,
        Kind::Assert,
    ];

    pub fn native_name(self) -> &'static str {
        match self {
            Kind::SignedOverflow => "signed-overflow",
            Kind::ConvOverflow => "conv-overflow",
            Kind::DivZero => "div-zero",
            Kind::ShiftAmount => "shift-amount",
            Kind::ShiftNegative => "shift-negative",
            Kind::UninitRead => "uninit-read",
            Kind::Assert => "assert",
        }
    }

    /// `MC:<name>`.
    pub fn qualified(self) -> String {
        format!("{TOOL_ID}:{}", self.native_name())
    }

    pub fn from_qualified(s: &str) -> Option<Kind> {
        let name = s.strip_prefix("MC:")?;
        Kind::ALL.into_iter().find(|k| k.native_name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    ProvenSafe,
    ProvenUnsafe,
    Undecided,
    Warning,
    SyntacticViolation,
}

impl Verdict {
    pub const ALL: [Verdict; 5] = [
        Verdict::ProvenSafe,
        Verdict::ProvenUnsafe,
        Verdict::Undecided,
        Verdict::Warning,
        Verdict::SyntacticViolation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ProvenSafe => "proven-safe",
            Verdict::ProvenUnsafe => "proven-unsafe",
            Verdict::Undecided => "undecided",
            Verdict::Warning => "warning",
            Verdict::SyntacticViolation => "syntactic-violation",
        }
    }

    /// Verdict for a site visited in several contexts.
    pub fn join(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (a, b) if a == b => a,
            (SyntacticViolation, _) | (_, SyntacticViolation) => SyntacticViolation,
            _ => Undecided,
        }
    }

    /// Classifies a value set against a bad set: `safe` when they are
    /// disjoint, `unsafe` when the values lie entirely inside it.
    pub fn classify(disjoint: bool, inside: bool) -> Verdict {
        if disjoint {
            Verdict::ProvenSafe
        } else if inside {
            Verdict::ProvenUnsafe
        } else {
            Verdict::Undecided
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Verdict::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown verdict `{s}`"))
    }
}

/// One check site in one function, before witness search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub function: String,
    pub kind: Kind,
    pub pos: Pos,
    pub verdict: Verdict,
    pub message: String,
}
