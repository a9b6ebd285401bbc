use std::fmt;

use serde::{Deserialize, Serialize};

/// `(schema id, version)` pin carried by every task instance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaRef {
    pub id: String,
    pub version: u32,
}

impl SchemaRef {
    pub fn new(id: impl Into<String>, version: u32) -> Self {
        Self {
            id: id.into(),
            version,
        }
    }
}

impl fmt::Display for SchemaRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.id, self.version)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivityCategory {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContentCategory {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConceptRelation {
    Broader,
    Narrower,
    Related,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelatedConcept {
    pub concept: String,
    pub relation: ConceptRelation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemanticConcept {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub definition: String,
    #[serde(default)]
    pub related: Vec<RelatedConcept>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowKind {
    Precedes,
    IteratesTo,
    DecomposesInto,
}

impl FlowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FlowKind::Precedes => "precedes",
            FlowKind::IteratesTo => "iterates-to",
            FlowKind::DecomposesInto => "decomposes-into",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowEdge {
    pub from: String,
    pub to: String,
    pub kind: FlowKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Produces,
    Consumes,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssocEdge {
    pub activity: String,
    pub content: String,
    pub role: Role,
}

/// Demand-satisfaction or referential-support relation. Used both for
/// category-level templates and instance-level episodic edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LinkKind {
    #[serde(rename = "DS")]
    Ds,
    #[serde(rename = "RS")]
    Rs,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::Ds => "DS",
            LinkKind::Rs => "RS",
        }
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateEdge {
    pub from: String,
    pub to: String,
    pub kind: LinkKind,
}

/// Ties an activity or content category to a semantic concept.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemanticLink {
    pub category: String,
    pub concept: String,
}

/// Instance-independent description of a task type: its activity-flow graph,
/// content categories, activity/content associations, DS/RS templates and
/// domain concepts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskTypeSchema {
    pub id: String,
    pub name: String,
    pub version: u32,
    pub activities: Vec<ActivityCategory>,
    pub contents: Vec<ContentCategory>,
    pub concepts: Vec<SemanticConcept>,
    pub flow_edges: Vec<FlowEdge>,
    pub assoc_edges: Vec<AssocEdge>,
    pub template_edges: Vec<TemplateEdge>,
    pub semantic_links: Vec<SemanticLink>,
}

impl TaskTypeSchema {
    pub fn empty(id: impl Into<String>, name: impl Into<String>, version: u32) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            version,
            activities: Vec::new(),
            contents: Vec::new(),
            concepts: Vec::new(),
            flow_edges: Vec::new(),
            assoc_edges: Vec::new(),
            template_edges: Vec::new(),
            semantic_links: Vec::new(),
        }
    }

    pub fn schema_ref(&self) -> SchemaRef {
        SchemaRef::new(self.id.clone(), self.version)
    }

    pub fn activity(&self, id: &str) -> Option<&ActivityCategory> {
        self.activities.iter().find(|a| a.id == id)
    }

    pub fn content(&self, id: &str) -> Option<&ContentCategory> {
        self.contents.iter().find(|c| c.id == id)
    }

    pub fn concept(&self, id: &str) -> Option<&SemanticConcept> {
        self.concepts.iter().find(|c| c.id == id)
    }

    pub fn has_activity(&self, id: &str) -> bool {
        self.activity(id).is_some()
    }

    pub fn has_content(&self, id: &str) -> bool {
        self.content(id).is_some()
    }

    /// Resolves an activity by id, falling back to its display name.
    pub fn resolve_activity(&self, key: &str) -> Option<&ActivityCategory> {
        self.activity(key)
            .or_else(|| self.activities.iter().find(|a| a.name == key))
    }

    pub fn produces(&self, activity: &str, content: &str) -> bool {
        self.assoc_edges
            .iter()
            .any(|e| e.activity == activity && e.content == content && e.role == Role::Produces)
    }

    /// Content categories associated with `activity` in either role.
    pub fn associated_contents(&self, activity: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .assoc_edges
            .iter()
            .filter(|e| e.activity == activity)
            .map(|e| e.content.as_str())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Concept ids linked to a category (activity or content).
    pub fn linked_concepts(&self, category: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .semantic_links
            .iter()
            .filter(|l| l.category == category)
            .map(|l| l.concept.as_str())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Sorts every node set by id and every edge list by its fields.
    pub fn canonicalize(&mut self) {
        self.activities.sort_by(|a, b| a.id.cmp(&b.id));
        self.contents.sort_by(|a, b| a.id.cmp(&b.id));
        self.concepts.sort_by(|a, b| a.id.cmp(&b.id));
        for c in &mut self.concepts {
            c.related.sort();
        }
        self.flow_edges.sort();
        self.assoc_edges.sort();
        self.template_edges.sort();
        self.semantic_links.sort();
    }
}
