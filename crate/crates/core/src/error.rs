use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid check category `{0}`")]
pub struct InvalidCategory(pub String);

/// Errors raised while reading or checking ASEF documents.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsefError {
    #[error("malformed XML at byte {position}: {message}")]
    Syntax { position: u64, message: String },

    /// `path` is the slash-separated element path, e.g. `/AsefConfiguration/GlobalPart/SourceModule[2]`.
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("unresolved reference `{id}`: {message}")]
    Reference { id: String, message: String },

    #[error("location reference cycle through {}", .ids.join(" -> "))]
    Cycle { ids: Vec<String> },

    #[error("unknown id `{0}`")]
    UnknownId(String),
}

impl AsefError {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        AsefError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn reference(id: impl Into<String>, message: impl Into<String>) -> Self {
        AsefError::Reference {
            id: id.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonomyError {
    #[error("no ASEF category mapped for {tool}:{name}")]
    UnknownNative { tool: String, name: String },

    #[error("mapping table line {line}: {message}")]
    Table { line: usize, message: String },
}
