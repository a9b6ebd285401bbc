//! Information warehouse core: an archive of granular information elements
//! with their categorical context (task-type schemas) and episodic context
//! (demand-satisfaction and referential-support links), plus ranked
//! retrieval that boosts results matching the caller's work context.
//!
//! Scoring is generic over the floating-point type; the aliases at the crate
//! root fix it to `f64`, which is what the archive tooling uses.

pub mod archive;
pub mod canonical;
pub mod clock;
pub mod report;
pub mod retrieval;
pub mod scenario;
pub mod schema;

pub use archive::{Archive, ArchiveError, ArchiveOptions, ArchiveState};
pub use clock::Timestamp;
pub use report::{Finding, Severity, ValidationReport};
pub use schema::{parse_schema, serialize_schema, validate_schema, SchemaRef, TaskTypeSchema};

/// Default scalar used for retrieval scores.
pub type Score = f64;
/// Postings index with `f64` statistics.
pub type Index = retrieval::PostingsIndex<Score>;
/// Ranked search hit with an `f64` score.
pub type Hit = retrieval::Hit<Score>;
/// Scoring constants in `f64`.
pub type ScoringParams = retrieval::ScoringParams<Score>;
