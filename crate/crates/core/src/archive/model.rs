use serde::{Deserialize, Serialize};

use crate::clock::Timestamp;
use crate::schema::{LinkKind, SchemaRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceStatus {
    Open,
    Closed,
}

/// One performance of a task type, pinned to a schema version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub id: String,
    pub schema: SchemaRef,
    pub title: String,
    pub actor: String,
    pub status: InstanceStatus,
    pub started_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_at: Option<Timestamp>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivityStatus {
    Active,
    Ended,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityInstance {
    pub id: String,
    pub instance: String,
    pub category: String,
    pub status: ActivityStatus,
    pub started_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ended_at: Option<Timestamp>,
}

/// A granular content item. Immutable once recorded, apart from the
/// `retracted` mark.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InformationElement {
    pub id: String,
    pub instance: String,
    pub activity: String,
    pub category: String,
    pub author: String,
    pub created_at: Timestamp,
    pub body: String,
    #[serde(default)]
    pub attachments: Vec<String>,
    /// Set when the category is not one the activity produces and the
    /// capture was forced through.
    #[serde(default)]
    pub override_warning: bool,
    #[serde(default)]
    pub retracted: bool,
}

/// Directed DS or RS link between two elements.
///
/// DS points from the satisfying element to the element whose demand it
/// satisfies; RS points from the referring element to the one it refers to.
/// Ordering is by `(from, to, kind)` first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EpisodicEdge {
    pub from: String,
    pub to: String,
    pub kind: LinkKind,
    pub created_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl EpisodicEdge {
    pub fn key(&self) -> EdgeKey {
        EdgeKey {
            from: self.from.clone(),
            to: self.to.clone(),
            kind: self.kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey {
    pub from: String,
    pub to: String,
    pub kind: LinkKind,
}

/// Parameters of a capture.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementDraft {
    pub instance: String,
    pub activity: String,
    pub category: String,
    pub author: String,
    pub body: String,
    #[serde(default)]
    pub attachments: Vec<String>,
    #[serde(default)]
    pub ds_targets: Vec<String>,
    #[serde(default)]
    pub rs_targets: Vec<String>,
    /// Accept a category the activity does not produce.
    #[serde(default, rename = "override")]
    pub force: bool,
}

/// A stored element together with the edges created with it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordedElement {
    pub element: InformationElement,
    pub edges: Vec<EpisodicEdge>,
}
