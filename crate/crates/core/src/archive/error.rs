use std::io;

use thiserror::Error;

use crate::report::ValidationReport;
use crate::schema::{LinkKind, SchemaRef};

/// Broad class of a rejected operation; the service maps each class to one
/// HTTP status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// A resource named by the request path does not exist.
    NotFound,
    /// The operation conflicts with current lifecycle or edge state.
    Conflict,
    /// The request content is invalid.
    Invalid,
    /// Storage failure or unreadable journal.
    Storage,
}

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("unknown schema {0}")]
    UnknownSchema(SchemaRef),
    #[error("schema {0} is already loaded with different content")]
    DuplicateSchema(SchemaRef),
    #[error("schema has {} validation error(s)", .0.errors.len())]
    InvalidSchema(ValidationReport),
    #[error("unknown task instance '{0}'")]
    UnknownInstance(String),
    #[error("unknown activity instance '{0}'")]
    UnknownActivity(String),
    #[error("unknown information element '{0}'")]
    UnknownElement(String),
    #[error("referenced element '{0}' does not exist")]
    UnknownTarget(String),
    #[error("category '{category}' is not defined in schema {schema}")]
    UnknownCategory { schema: SchemaRef, category: String },
    #[error("task instance '{0}' is closed")]
    InstanceClosed(String),
    #[error("task instance '{instance}' already has active activity '{active}'")]
    ActivityAlreadyActive { instance: String, active: String },
    #[error("task instance '{instance}' still has active activity '{active}'")]
    ActivityStillActive { instance: String, active: String },
    #[error("activity instance '{0}' is not active")]
    ActivityNotActive(String),
    #[error("activity instance '{activity}' does not belong to task instance '{instance}'")]
    ActivityInstanceMismatch { instance: String, activity: String },
    #[error("activity category '{activity}' does not produce '{category}'; set override to record anyway")]
    ProducesMismatch { activity: String, category: String },
    #[error("element body is empty")]
    EmptyBody,
    #[error("an element cannot link to itself")]
    SelfLoop,
    #[error("{kind} edge {from} -> {to} already exists")]
    DuplicateEdge {
        from: String,
        to: String,
        kind: LinkKind,
    },
    #[error("DS edge {from} -> {to} crosses task instances")]
    DsCrossInstance { from: String, to: String },
    #[error("DS edge {from} -> {to} would close a cycle")]
    DsCycle { from: String, to: String },
    #[error("element '{0}' is already retracted")]
    AlreadyRetracted(String),
    #[error("journal corrupt at seq {seq}: {reason}")]
    CorruptJournal { seq: u64, reason: String },
    #[error("journal gap: seq {missing} is missing")]
    JournalGap { missing: u64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ArchiveError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ArchiveError::UnknownSchema(_) => "unknown_schema",
            ArchiveError::DuplicateSchema(_) => "duplicate_schema",
            ArchiveError::InvalidSchema(_) => "invalid_schema",
            ArchiveError::UnknownInstance(_) => "unknown_instance",
            ArchiveError::UnknownActivity(_) => "unknown_activity",
            ArchiveError::UnknownElement(_) => "unknown_element",
            ArchiveError::UnknownTarget(_) => "unknown_target",
            ArchiveError::UnknownCategory { .. } => "unknown_category",
            ArchiveError::InstanceClosed(_) => "instance_closed",
            ArchiveError::ActivityAlreadyActive { .. } => "activity_already_active",
            ArchiveError::ActivityStillActive { .. } => "activity_still_active",
            ArchiveError::ActivityNotActive(_) => "activity_not_active",
            ArchiveError::ActivityInstanceMismatch { .. } => "activity_instance_mismatch",
            ArchiveError::ProducesMismatch { .. } => "produces_mismatch",
            ArchiveError::EmptyBody => "empty_body",
            ArchiveError::SelfLoop => "self_loop",
            ArchiveError::DuplicateEdge { .. } => "duplicate_edge",
            ArchiveError::DsCrossInstance { .. } => "ds_cross_instance",
            ArchiveError::DsCycle { .. } => "ds_cycle",
            ArchiveError::AlreadyRetracted(_) => "already_retracted",
            ArchiveError::CorruptJournal { .. } => "corrupt_journal",
            ArchiveError::JournalGap { .. } => "journal_gap",
            ArchiveError::Io(_) => "io",
        }
    }

    pub fn class(&self) -> ErrorClass {
        use ArchiveError::*;
        match self {
            UnknownInstance(_) | UnknownActivity(_) | UnknownElement(_) => ErrorClass::NotFound,
            DuplicateSchema(_)
            | InstanceClosed(_)
            | ActivityAlreadyActive { .. }
            | ActivityStillActive { .. }
            | ActivityNotActive(_)
            | DuplicateEdge { .. }
            | AlreadyRetracted(_) => ErrorClass::Conflict,
            UnknownSchema(_)
            | InvalidSchema(_)
            | UnknownTarget(_)
            | UnknownCategory { .. }
            | ActivityInstanceMismatch { .. }
            | ProducesMismatch { .. }
            | EmptyBody
            | SelfLoop
            | DsCrossInstance { .. }
            | DsCycle { .. } => ErrorClass::Invalid,
            CorruptJournal { .. } | JournalGap { .. } | Io(_) => ErrorClass::Storage,
        }
    }
}
