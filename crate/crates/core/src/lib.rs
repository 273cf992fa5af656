//! The ASEF exchange format: configuration and report documents, their XML
//! encoding, and the hierarchical check-category taxonomy used to compare
//! results of different analysis tools.

pub mod category;
pub mod error;
pub mod model;
pub mod taxonomy;
pub mod xml;

pub use category::{deepest_common, is_ancestor, CategoryId};
pub use error::{AsefError, InvalidCategory, TaxonomyError};
pub use model::{
    merge_local, validate_report, AnalysisTask, AsefCheck, AsefConfiguration, AsefLocation, AsefReport,
    CheckStatus, CheckTarget, ConfigPart, Endianness, ExecutionModelTarget, HardwareTarget, KeyValue,
    LanguageStandard, LanguageTarget, LocationTarget, ResolvedLocation, SourceFile, SourceModule,
    UriSubstitutionRule, Violation,
};
pub use taxonomy::{compare_reports, map_native, natives_for, DiffResult, MappingSet, MatchedPair, NativeCategoryMapping};
pub use xml::{parse_config, parse_config_part, parse_report, serialize_config, serialize_config_part, serialize_report};

/// Follows a location's macro chain to its file-bearing terminal.
pub fn resolve_location(report: &AsefReport, id: &str) -> Result<ResolvedLocation, AsefError> {
    report.resolve_location(id)
}
