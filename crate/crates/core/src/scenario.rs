//! Scenario scripts: lifecycle, capture and link commands written with
//! symbolic ids, replayed against an archive.
//!
//! ```json
//! {
//!   "schemas": ["patient-care.schema.json"],
//!   "steps": [
//!     {"op": "begin_instance", "as": "pa", "schema": {"id": "patient-care", "version": 1},
//!      "title": "Patient A", "actor": "dr-rao"},
//!     {"op": "begin_activity", "as": "admit", "instance": "pa", "category": "admit"},
//!     {"op": "record_element", "as": "case", "instance": "pa", "activity": "admit",
//!      "category": "case", "body": "..."}
//!   ]
//! }
//! ```
//!
//! Schema paths are relative to the script file. A symbol must be bound by
//! an `as` before any step refers to it.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archive::{Archive, ArchiveError, ElementDraft};
use crate::schema::{parse_schema, LinkKind, SchemaError, SchemaRef, TaskTypeSchema};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemaSource {
    Path(String),
    Inline(Box<TaskTypeSchema>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    BeginInstance {
        #[serde(rename = "as")]
        bind: String,
        schema: SchemaRef,
        title: String,
        actor: String,
    },
    BeginActivity {
        #[serde(rename = "as")]
        bind: String,
        instance: String,
        category: String,
    },
    EndActivity {
        activity: String,
    },
    CloseInstance {
        instance: String,
    },
    RecordElement {
        #[serde(rename = "as")]
        bind: String,
        instance: String,
        activity: String,
        category: String,
        body: String,
        /// Defaults to the instance's actor.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        author: Option<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        attachments: Vec<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        ds: Vec<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        rs: Vec<String>,
        #[serde(default, rename = "override")]
        force: bool,
    },
    LinkElements {
        from: String,
        to: String,
        kind: LinkKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    },
    Retract {
        element: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    },
}

impl Step {
    pub fn op(&self) -> &'static str {
        match self {
            Step::BeginInstance { .. } => "begin_instance",
            Step::BeginActivity { .. } => "begin_activity",
            Step::EndActivity { .. } => "end_activity",
            Step::CloseInstance { .. } => "close_instance",
            Step::RecordElement { .. } => "record_element",
            Step::LinkElements { .. } => "link_elements",
            Step::Retract { .. } => "retract",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioScript {
    #[serde(default)]
    pub schemas: Vec<SchemaSource>,
    pub steps: Vec<Step>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed scenario script: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("schema {path}: {source}")]
    Schema { path: String, source: SchemaError },
    #[error("step {step}: symbol '{symbol}' is used before it is defined")]
    UndefinedSymbol { step: usize, symbol: String },
    #[error("step {step}: symbol '{symbol}' is already bound")]
    DuplicateSymbol { step: usize, symbol: String },
    #[error("step {step} ({op}): {source}")]
    Step {
        step: usize,
        op: &'static str,
        source: ArchiveError,
    },
}

/// Symbol-to-id bindings produced by a replay, in symbol order.
pub type Bindings = BTreeMap<String, String>;

impl ScenarioScript {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a script; relative schema paths resolve against its directory.
    pub fn load(path: &Path) -> Result<(Self, PathBuf), ScenarioError> {
        let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_owned(),
            source,
        })?;
        let base = path.parent().map(Path::to_owned).unwrap_or_default();
        Ok((Self::parse(&text)?, base))
    }

    pub fn load_schemas(&self, base: &Path) -> Result<Vec<TaskTypeSchema>, ScenarioError> {
        self.schemas
            .iter()
            .map(|src| match src {
                SchemaSource::Inline(s) => Ok((**s).clone()),
                SchemaSource::Path(p) => {
                    let path = base.join(p);
                    let text = fs::read_to_string(&path).map_err(|source| ScenarioError::Io {
                        path: path.clone(),
                        source,
                    })?;
                    parse_schema(&text).map_err(|source| ScenarioError::Schema {
                        path: p.clone(),
                        source,
                    })
                }
            })
            .collect()
    }

    /// Registers the script's schemas, then runs every step. Stops at the
    /// first failing step.
    pub fn replay(&self, archive: &mut Archive, base: &Path) -> Result<Bindings, ScenarioError> {
        for (i, schema) in self.load_schemas(base)?.into_iter().enumerate() {
            archive
                .register_schema(schema)
                .map_err(|source| ScenarioError::Step {
                    step: i,
                    op: "register_schema",
                    source,
                })?;
        }
        let mut bindings = Bindings::new();
        for (i, step) in self.steps.iter().enumerate() {
            self.run_step(archive, &mut bindings, i, step)?;
        }
        Ok(bindings)
    }

    fn run_step(
        &self,
        archive: &mut Archive,
        bindings: &mut Bindings,
        i: usize,
        step: &Step,
    ) -> Result<(), ScenarioError> {
        let lookup = |b: &Bindings, s: &str| {
            b.get(s).cloned().ok_or_else(|| ScenarioError::UndefinedSymbol {
                step: i,
                symbol: s.to_owned(),
            })
        };
        let fail = |source| ScenarioError::Step {
            step: i,
            op: step.op(),
            source,
        };
        let bind = |b: &mut Bindings, symbol: &str, id: String| {
            if b.contains_key(symbol) {
                return Err(ScenarioError::DuplicateSymbol {
                    step: i,
                    symbol: symbol.to_owned(),
                });
            }
            b.insert(symbol.to_owned(), id);
            Ok(())
        };
        let check_unbound = |b: &Bindings, symbol: &str| {
            if b.contains_key(symbol) {
                Err(ScenarioError::DuplicateSymbol {
                    step: i,
                    symbol: symbol.to_owned(),
                })
            } else {
                Ok(())
            }
        };

        match step {
            Step::BeginInstance {
                bind: sym,
                schema,
                title,
                actor,
            } => {
                check_unbound(bindings, sym)?;
                let ti = archive.begin_instance(schema, title, actor).map_err(fail)?;
                bind(bindings, sym, ti.id)?;
            }
            Step::BeginActivity {
                bind: sym,
                instance,
                category,
            } => {
                check_unbound(bindings, sym)?;
                let instance = lookup(bindings, instance)?;
                let a = archive.begin_activity(&instance, category).map_err(fail)?;
                bind(bindings, sym, a.id)?;
            }
            Step::EndActivity { activity } => {
                let activity = lookup(bindings, activity)?;
                archive.end_activity(&activity).map_err(fail)?;
            }
            Step::CloseInstance { instance } => {
                let instance = lookup(bindings, instance)?;
                archive.close_instance(&instance).map_err(fail)?;
            }
            Step::RecordElement {
                bind: sym,
                instance,
                activity,
                category,
                body,
                author,
                attachments,
                ds,
                rs,
                force,
            } => {
                check_unbound(bindings, sym)?;
                let instance = lookup(bindings, instance)?;
                let activity = lookup(bindings, activity)?;
                let ds_targets = ds
                    .iter()
                    .map(|s| lookup(bindings, s))
                    .collect::<Result<_, _>>()?;
                let rs_targets = rs
                    .iter()
                    .map(|s| lookup(bindings, s))
                    .collect::<Result<_, _>>()?;
                let author = match author {
                    Some(a) => a.clone(),
                    None => archive
                        .instance(&instance)
                        .map(|t| t.actor.clone())
                        .unwrap_or_default(),
                };
                let recorded = archive
                    .record_element(ElementDraft {
                        instance,
                        activity,
                        category: category.clone(),
                        author,
                        body: body.clone(),
                        attachments: attachments.clone(),
                        ds_targets,
                        rs_targets,
                        force: *force,
                    })
                    .map_err(fail)?;
                bind(bindings, sym, recorded.element.id)?;
            }
            Step::LinkElements {
                from,
                to,
                kind,
                note,
            } => {
                let from = lookup(bindings, from)?;
                let to = lookup(bindings, to)?;
                archive
                    .link_elements(&from, &to, *kind, note.clone())
                    .map_err(fail)?;
            }
            Step::Retract { element, note } => {
                let element = lookup(bindings, element)?;
                archive
                    .retract_element(&element, note.clone())
                    .map_err(fail)?;
            }
        }
        Ok(())
    }
}
