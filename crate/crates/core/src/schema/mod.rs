//! Task-type schemas: the categorical context shared by every instance of a
//! task type.
//!
//! A schema is loaded once per `(id, version)` and never mutated afterwards;
//! evolving a task type means loading a new version.

mod context;
mod model;
mod parse;
mod validate;

use thiserror::Error;

pub use context::{
    categorical_context, expected_contents, ActivityAssociations, CategoricalContext,
    ContextActivity,
};
pub use model::{
    ActivityCategory, AssocEdge, ConceptRelation, ContentCategory, FlowEdge, FlowKind, LinkKind,
    RelatedConcept, Role, SchemaRef, SemanticConcept, SemanticLink, TaskTypeSchema, TemplateEdge,
};
pub use parse::{parse_schema, serialize_schema};
pub use validate::validate_schema;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema version must be positive, got {0}")]
    InvalidVersion(u32),
    #[error("duplicate id '{0}'")]
    DuplicateId(String),
    #[error("dangling reference in {edge}: {message}")]
    DanglingReference { edge: String, message: String },
    #[error("unknown activity category '{0}'")]
    UnknownActivity(String),
}
