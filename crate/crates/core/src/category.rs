//! Dotted, hierarchical check-category identifiers such as
//! `numeric.shift.rhs.negative`. A prefix of segments is a generalization
//! of the longer identifier.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::InvalidCategory;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CategoryId {
    segments: Vec<String>,
}

fn valid_segment(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl CategoryId {
    pub fn from_segments<I, S>(segments: I) -> Result<Self, InvalidCategory>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let segments: Vec<String> = segments.into_iter().map(Into::into).collect();
        if segments.is_empty() {
            return Err(InvalidCategory(String::new()));
        }
        if let Some(bad) = segments.iter().find(|s| !valid_segment(s)) {
            return Err(InvalidCategory(bad.clone()));
        }
        Ok(CategoryId { segments })
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    pub fn depth(&self) -> usize {
        self.segments.len()
    }

    /// True iff `self` is a prefix (proper or equal) of `other`.
    pub fn is_ancestor_of(&self, other: &CategoryId) -> bool {
        self.segments.len() <= other.segments.len()
            && self.segments.iter().zip(&other.segments).all(|(a, b)| a == b)
    }

    /// Either one is an ancestor of the other.
    pub fn is_related(&self, other: &CategoryId) -> bool {
        self.is_ancestor_of(other) || other.is_ancestor_of(self)
    }

    pub fn parent(&self) -> Option<CategoryId> {
        if self.segments.len() < 2 {
            return None;
        }
        Some(CategoryId {
            segments: self.segments[..self.segments.len() - 1].to_vec(),
        })
    }
}

/// `a` is a prefix of `b` (reflexive).
pub fn is_ancestor(a: &CategoryId, b: &CategoryId) -> bool {
    a.is_ancestor_of(b)
}

/// Longest common segment prefix, or `None` when the roots differ.
pub fn deepest_common(a: &CategoryId, b: &CategoryId) -> Option<CategoryId> {
    let common: Vec<String> = a
        .segments
        .iter()
        .zip(&b.segments)
        .take_while(|(x, y)| x == y)
        .map(|(x, _)| x.clone())
        .collect();
    if common.is_empty() {
        None
    } else {
        Some(CategoryId { segments: common })
    }
}

impl FromStr for CategoryId {
    type Err = InvalidCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(InvalidCategory(s.to_string()));
        }
        CategoryId::from_segments(s.split('.')).map_err(|_| InvalidCategory(s.to_string()))
    }
}

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.segments.join("."))
    }
}

impl Serialize for CategoryId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CategoryId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(s: &str) -> CategoryId {
        s.parse().unwrap()
    }

    #[test]
    fn parses_and_renders() {
        assert_eq!(cat("numeric.shift.rhs.negative").to_string(), "numeric.shift.rhs.negative");
        assert_eq!(cat("mem").depth(), 1);
    }

    #[test]
    fn rejects_bad_segments() {
        for bad in ["", "Numeric", "numeric..shift", "numeric.", ".mem", "mem.ptr deref", "1mem", "mem-ptr"] {
            assert!(bad.parse::<CategoryId>().is_err(), "{bad:?} accepted");
        }
        assert!(cat("mem.ptr_2").segments().len() == 2);
    }

    #[test]
    fn ancestor_examples() {
        assert!(is_ancestor(&cat("numeric.shift"), &cat("numeric.shift.rhs.amount")));
        assert!(is_ancestor(&cat("numeric.shift"), &cat("numeric.shift")));
        assert!(!is_ancestor(&cat("numeric.overflow"), &cat("mem.ptr.deref")));
        assert!(!is_ancestor(&cat("numeric.shift.rhs"), &cat("numeric.shift")));
        // segment-wise, not string-wise
        assert!(!is_ancestor(&cat("mem.ptr"), &cat("mem.ptrx")));
    }

    #[test]
    fn deepest_common_examples() {
        assert_eq!(
            deepest_common(&cat("numeric.shift.rhs.amount"), &cat("numeric.shift.rhs.negative")),
            Some(cat("numeric.shift.rhs"))
        );
        assert_eq!(deepest_common(&cat("mem"), &cat("numeric.overflow")), None);
        assert_eq!(
            deepest_common(&cat("mem.ptr.deref"), &cat("mem.ptr.deref.invalid")),
            Some(cat("mem.ptr.deref"))
        );
    }

    #[test]
    fn parent_walks_up() {
        assert_eq!(cat("numeric.overflow.int").parent(), Some(cat("numeric.overflow")));
        assert_eq!(cat("numeric").parent(), None);
    }
}
