use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::error::ArchiveError;
use super::journal::{Event, JournalRecord};
use super::model::{
    ActivityInstance, ActivityStatus, EdgeKey, ElementDraft, EpisodicEdge, InformationElement,
    InstanceStatus, TaskInstance,
};
use crate::canonical;
use crate::clock::Timestamp;
use crate::report::{Finding, Severity};
use crate::schema::{LinkKind, SchemaRef, TaskTypeSchema};

/// Full archive contents as one sorted document. Two archives are equivalent
/// iff their exports are byte-equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchiveExport {
    pub seq: u64,
    pub schemas: Vec<TaskTypeSchema>,
    pub instances: Vec<TaskInstance>,
    pub activities: Vec<ActivityInstance>,
    pub elements: Vec<InformationElement>,
    pub edges: Vec<EpisodicEdge>,
}

/// Materialized archive state at one journal seq.
///
/// Built only by applying journal records, so it always equals a replay of
/// the journal. Replay does not re-validate: records that reference missing
/// entities are kept as anomalies and surface in the integrity check.
#[derive(Debug, Clone, Default)]
pub struct ArchiveState {
    pub(super) seq: u64,
    pub(super) schemas: BTreeMap<SchemaRef, Arc<TaskTypeSchema>>,
    pub(super) instances: BTreeMap<String, TaskInstance>,
    pub(super) activities: BTreeMap<String, ActivityInstance>,
    pub(super) elements: BTreeMap<String, InformationElement>,
    pub(super) edges: BTreeMap<EdgeKey, EpisodicEdge>,
    pub(super) outgoing: BTreeMap<String, BTreeSet<EdgeKey>>,
    pub(super) incoming: BTreeMap<String, BTreeSet<EdgeKey>>,
    pub(super) by_instance: BTreeMap<String, BTreeSet<String>>,
    pub(super) active: BTreeMap<String, String>,
    pub(super) anomalies: Vec<Finding>,
    pub(super) last_ts: Option<Timestamp>,
}

impl ArchiveState {
    pub fn seq(&self) -> u64 {
        self.seq
    }

    /// Timestamp of the latest applied record.
    pub fn last_ts(&self) -> Option<Timestamp> {
        self.last_ts
    }

    pub fn schema(&self, r: &SchemaRef) -> Option<&Arc<TaskTypeSchema>> {
        self.schemas.get(r)
    }

    pub fn schemas(&self) -> impl Iterator<Item = &Arc<TaskTypeSchema>> {
        self.schemas.values()
    }

    pub fn instance(&self, id: &str) -> Option<&TaskInstance> {
        self.instances.get(id)
    }

    pub fn instances(&self) -> impl Iterator<Item = &TaskInstance> {
        self.instances.values()
    }

    pub fn activity(&self, id: &str) -> Option<&ActivityInstance> {
        self.activities.get(id)
    }

    pub fn activities(&self) -> impl Iterator<Item = &ActivityInstance> {
        self.activities.values()
    }

    pub fn element(&self, id: &str) -> Option<&InformationElement> {
        self.elements.get(id)
    }

    pub fn elements(&self) -> impl Iterator<Item = &InformationElement> {
        self.elements.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &EpisodicEdge> {
        self.edges.values()
    }

    /// Element ids of one task instance, ascending.
    pub fn instance_elements(&self, instance: &str) -> impl Iterator<Item = &str> {
        self.by_instance
            .get(instance)
            .into_iter()
            .flatten()
            .map(String::as_str)
    }

    pub fn outgoing(&self, ie: &str) -> impl Iterator<Item = &EpisodicEdge> {
        self.outgoing
            .get(ie)
            .into_iter()
            .flatten()
            .filter_map(|k| self.edges.get(k))
    }

    pub fn incoming(&self, ie: &str) -> impl Iterator<Item = &EpisodicEdge> {
        self.incoming
            .get(ie)
            .into_iter()
            .flatten()
            .filter_map(|k| self.edges.get(k))
    }

    /// Currently active activity of a task instance.
    pub fn active_activity(&self, instance: &str) -> Option<&ActivityInstance> {
        self.active
            .get(instance)
            .and_then(|id| self.activities.get(id))
    }

    /// Schema pinned by the instance owning `ie`.
    pub fn element_schema(&self, ie: &InformationElement) -> Option<&Arc<TaskTypeSchema>> {
        self.instances
            .get(&ie.instance)
            .and_then(|ti| self.schemas.get(&ti.schema))
    }

    /// Activity category under which `ie` was recorded.
    pub fn element_activity_category(&self, ie: &InformationElement) -> Option<&str> {
        self.activities
            .get(&ie.activity)
            .map(|a| a.category.as_str())
    }

    pub(super) fn anomaly(&mut self, code: &str, subject: &str, message: String) {
        self.anomalies.push(Finding {
            severity: Severity::Error,
            code: code.to_owned(),
            subject: subject.to_owned(),
            message,
        });
    }

    /// Applies one record. Total: never fails, whatever the record says.
    pub(super) fn apply(&mut self, record: &JournalRecord) {
        let ts = record.ts;
        self.seq = record.seq;
        self.last_ts = Some(self.last_ts.map_or(ts, |last| last.max(ts)));
        match &record.event {
            Event::RegisterSchema(schema) => {
                let key = schema.schema_ref();
                if self.schemas.contains_key(&key) {
                    self.anomaly("replay_duplicate_schema", &key.to_string(), format!("seq {} re-registers a loaded schema", record.seq));
                }
                self.schemas.insert(key, Arc::new(schema.clone()));
            }
            Event::BeginInstance {
                id,
                schema,
                title,
                actor,
            } => {
                if self.instances.contains_key(id) {
                    self.anomaly("replay_duplicate_id", id, format!("seq {} reuses an instance id", record.seq));
                }
                self.instances.insert(
                    id.clone(),
                    TaskInstance {
                        id: id.clone(),
                        schema: schema.clone(),
                        title: title.clone(),
                        actor: actor.clone(),
                        status: InstanceStatus::Open,
                        started_at: ts,
                        closed_at: None,
                    },
                );
            }
            Event::BeginActivity {
                id,
                instance,
                category,
            } => {
                if self.activities.contains_key(id) {
                    self.anomaly("replay_duplicate_id", id, format!("seq {} reuses an activity id", record.seq));
                }
                self.activities.insert(
                    id.clone(),
                    ActivityInstance {
                        id: id.clone(),
                        instance: instance.clone(),
                        category: category.clone(),
                        status: ActivityStatus::Active,
                        started_at: ts,
                        ended_at: None,
                    },
                );
                if let Some(prev) = self.active.insert(instance.clone(), id.clone()) {
                    self.anomaly(
                        "replay_concurrent_activity",
                        instance,
                        format!("seq {} begins '{id}' while '{prev}' is active", record.seq),
                    );
                }
            }
            Event::EndActivity { id } => match self.activities.get_mut(id) {
                Some(a) => {
                    a.status = ActivityStatus::Ended;
                    a.ended_at = Some(ts);
                    if self.active.get(&a.instance) == Some(id) {
                        self.active.remove(&a.instance);
                    }
                }
                None => self.anomaly("replay_unknown_reference", id, format!("seq {} ends an unknown activity", record.seq)),
            },
            Event::CloseInstance { id } => match self.instances.get_mut(id) {
                Some(ti) => {
                    ti.status = InstanceStatus::Closed;
                    ti.closed_at = Some(ts);
                }
                None => self.anomaly("replay_unknown_reference", id, format!("seq {} closes an unknown instance", record.seq)),
            },
            Event::RecordElement {
                id,
                instance,
                activity,
                category,
                author,
                body,
                attachments,
                ds_targets,
                rs_targets,
                override_warning,
            } => {
                if self.elements.contains_key(id) {
                    self.anomaly("replay_duplicate_id", id, format!("seq {} reuses an element id", record.seq));
                }
                self.elements.insert(
                    id.clone(),
                    InformationElement {
                        id: id.clone(),
                        instance: instance.clone(),
                        activity: activity.clone(),
                        category: category.clone(),
                        author: author.clone(),
                        created_at: ts,
                        body: body.clone(),
                        attachments: attachments.clone(),
                        override_warning: *override_warning,
                        retracted: false,
                    },
                );
                self.by_instance
                    .entry(instance.clone())
                    .or_default()
                    .insert(id.clone());
                let targets = ds_targets
                    .iter()
                    .map(|t| (t, LinkKind::Ds))
                    .chain(rs_targets.iter().map(|t| (t, LinkKind::Rs)));
                for (to, kind) in targets {
                    self.insert_edge(
                        EpisodicEdge {
                            from: id.clone(),
                            to: to.clone(),
                            kind,
                            created_at: ts,
                            note: None,
                        },
                        record.seq,
                    );
                }
            }
            Event::LinkElements {
                from,
                to,
                kind,
                note,
            } => self.insert_edge(
                EpisodicEdge {
                    from: from.clone(),
                    to: to.clone(),
                    kind: *kind,
                    created_at: ts,
                    note: note.clone(),
                },
                record.seq,
            ),
            Event::Retract { id, .. } => match self.elements.get_mut(id) {
                Some(ie) => ie.retracted = true,
                None => self.anomaly("replay_unknown_reference", id, format!("seq {} retracts an unknown element", record.seq)),
            },
        }
    }

    fn insert_edge(&mut self, edge: EpisodicEdge, seq: u64) {
        let key = edge.key();
        if self.edges.contains_key(&key) {
            self.anomaly(
                "replay_duplicate_edge",
                &format!("{} -{}-> {}", key.from, key.kind, key.to),
                format!("seq {seq} repeats an existing edge"),
            );
            return;
        }
        self.outgoing
            .entry(key.from.clone())
            .or_default()
            .insert(key.clone());
        self.incoming
            .entry(key.to.clone())
            .or_default()
            .insert(key.clone());
        self.edges.insert(key, edge);
    }

    /// True when `start` reaches `goal` along DS edges.
    pub(super) fn ds_reaches(&self, start: &str, goal: &str) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            if n == goal {
                return true;
            }
            if !seen.insert(n) {
                continue;
            }
            for e in self.outgoing(n).filter(|e| e.kind == LinkKind::Ds) {
                stack.push(e.to.as_str());
            }
        }
        false
    }

    // ---- write-path checks: each returns the error the operation must fail with.

    pub(super) fn check_schema_registration(
        &self,
        schema: &TaskTypeSchema,
    ) -> Result<bool, ArchiveError> {
        let report = crate::schema::validate_schema(schema);
        if !report.is_valid() {
            return Err(ArchiveError::InvalidSchema(report));
        }
        match self.schemas.get(&schema.schema_ref()) {
            None => Ok(true),
            Some(existing) => {
                let mut a = (**existing).clone();
                let mut b = schema.clone();
                a.canonicalize();
                b.canonicalize();
                if a == b {
                    Ok(false)
                } else {
                    Err(ArchiveError::DuplicateSchema(schema.schema_ref()))
                }
            }
        }
    }

    pub(super) fn check_begin_instance(&self, schema: &SchemaRef) -> Result<(), ArchiveError> {
        if self.schemas.contains_key(schema) {
            Ok(())
        } else {
            Err(ArchiveError::UnknownSchema(schema.clone()))
        }
    }

    fn open_instance(&self, id: &str) -> Result<&TaskInstance, ArchiveError> {
        let ti = self
            .instances
            .get(id)
            .ok_or_else(|| ArchiveError::UnknownInstance(id.to_owned()))?;
        if ti.status == InstanceStatus::Closed {
            return Err(ArchiveError::InstanceClosed(id.to_owned()));
        }
        Ok(ti)
    }

    fn pinned_schema(&self, ti: &TaskInstance) -> Result<&TaskTypeSchema, ArchiveError> {
        self.schemas
            .get(&ti.schema)
            .map(|s| s.as_ref())
            .ok_or_else(|| ArchiveError::UnknownSchema(ti.schema.clone()))
    }

    pub(super) fn check_begin_activity(
        &self,
        instance: &str,
        category: &str,
    ) -> Result<(), ArchiveError> {
        let ti = self.open_instance(instance)?;
        let schema = self.pinned_schema(ti)?;
        if !schema.has_activity(category) {
            return Err(ArchiveError::UnknownCategory {
                schema: ti.schema.clone(),
                category: category.to_owned(),
            });
        }
        if let Some(active) = self.active.get(instance) {
            return Err(ArchiveError::ActivityAlreadyActive {
                instance: instance.to_owned(),
                active: active.clone(),
            });
        }
        Ok(())
    }

    pub(super) fn check_end_activity(&self, id: &str) -> Result<(), ArchiveError> {
        let a = self
            .activities
            .get(id)
            .ok_or_else(|| ArchiveError::UnknownActivity(id.to_owned()))?;
        if a.status != ActivityStatus::Active {
            return Err(ArchiveError::ActivityNotActive(id.to_owned()));
        }
        Ok(())
    }

    pub(super) fn check_close_instance(&self, id: &str) -> Result<(), ArchiveError> {
        self.open_instance(id)?;
        if let Some(active) = self.active.get(id) {
            return Err(ArchiveError::ActivityStillActive {
                instance: id.to_owned(),
                active: active.clone(),
            });
        }
        Ok(())
    }

    /// Validates a capture; on success returns whether the override mark
    /// must be set.
    pub(super) fn check_record(&self, draft: &ElementDraft) -> Result<bool, ArchiveError> {
        let ti = self.open_instance(&draft.instance)?;
        let activity = self
            .activities
            .get(&draft.activity)
            .ok_or_else(|| ArchiveError::UnknownActivity(draft.activity.clone()))?;
        if activity.instance != draft.instance {
            return Err(ArchiveError::ActivityInstanceMismatch {
                instance: draft.instance.clone(),
                activity: draft.activity.clone(),
            });
        }
        if activity.status != ActivityStatus::Active {
            return Err(ArchiveError::ActivityNotActive(draft.activity.clone()));
        }
        let schema = self.pinned_schema(ti)?;
        if !schema.has_content(&draft.category) {
            return Err(ArchiveError::UnknownCategory {
                schema: ti.schema.clone(),
                category: draft.category.clone(),
            });
        }
        if draft.body.trim().is_empty() {
            return Err(ArchiveError::EmptyBody);
        }
        let produced = schema.produces(&activity.category, &draft.category);
        if !produced && !draft.force {
            return Err(ArchiveError::ProducesMismatch {
                activity: activity.category.clone(),
                category: draft.category.clone(),
            });
        }

        // The new element has no incoming edges yet, so its DS edges cannot
        // close a cycle.
        for (targets, kind) in [(&draft.ds_targets, LinkKind::Ds), (&draft.rs_targets, LinkKind::Rs)] {
            let mut seen = BTreeSet::new();
            for t in targets {
                let target = self
                    .elements
                    .get(t)
                    .ok_or_else(|| ArchiveError::UnknownTarget(t.clone()))?;
                if kind == LinkKind::Ds && target.instance != draft.instance {
                    return Err(ArchiveError::DsCrossInstance {
                        from: "(new element)".to_owned(),
                        to: t.clone(),
                    });
                }
                if !seen.insert(t) {
                    return Err(ArchiveError::DuplicateEdge {
                        from: "(new element)".to_owned(),
                        to: t.clone(),
                        kind,
                    });
                }
            }
        }
        Ok(!produced)
    }

    pub(super) fn check_link(&self, from: &str, to: &str, kind: LinkKind) -> Result<(), ArchiveError> {
        let source = self
            .elements
            .get(from)
            .ok_or_else(|| ArchiveError::UnknownElement(from.to_owned()))?;
        let target = self
            .elements
            .get(to)
            .ok_or_else(|| ArchiveError::UnknownTarget(to.to_owned()))?;
        if from == to {
            return Err(ArchiveError::SelfLoop);
        }
        let key = EdgeKey {
            from: from.to_owned(),
            to: to.to_owned(),
            kind,
        };
        if self.edges.contains_key(&key) {
            return Err(ArchiveError::DuplicateEdge {
                from: from.to_owned(),
                to: to.to_owned(),
                kind,
            });
        }
        if kind == LinkKind::Ds {
            if source.instance != target.instance {
                return Err(ArchiveError::DsCrossInstance {
                    from: from.to_owned(),
                    to: to.to_owned(),
                });
            }
            if self.ds_reaches(to, from) {
                return Err(ArchiveError::DsCycle {
                    from: from.to_owned(),
                    to: to.to_owned(),
                });
            }
        }
        Ok(())
    }

    pub(super) fn check_retract(&self, id: &str) -> Result<(), ArchiveError> {
        let ie = self
            .elements
            .get(id)
            .ok_or_else(|| ArchiveError::UnknownElement(id.to_owned()))?;
        if ie.retracted {
            return Err(ArchiveError::AlreadyRetracted(id.to_owned()));
        }
        Ok(())
    }

    // ---- export

    pub fn export(&self) -> ArchiveExport {
        let mut schemas: Vec<TaskTypeSchema> = self
            .schemas
            .values()
            .map(|s| {
                let mut s = (**s).clone();
                s.canonicalize();
                s
            })
            .collect();
        schemas.sort_by_key(|s| s.schema_ref());
        ArchiveExport {
            seq: self.seq,
            schemas,
            instances: self.instances.values().cloned().collect(),
            activities: self.activities.values().cloned().collect(),
            elements: self.elements.values().cloned().collect(),
            edges: self.edges.values().cloned().collect(),
        }
    }

    /// Canonical export text: sorted keys, entities sorted by id, edges by
    /// `(from, to, kind)`.
    pub fn canonical_export(&self) -> String {
        canonical::to_pretty(&self.export())
    }

    /// Rebuilds a state from an export (used to load snapshots).
    pub fn from_export(export: ArchiveExport, last_ts: Option<Timestamp>) -> Self {
        let mut state = ArchiveState {
            seq: export.seq,
            last_ts,
            ..Default::default()
        };
        for s in export.schemas {
            state.schemas.insert(s.schema_ref(), Arc::new(s));
        }
        for ti in export.instances {
            state.instances.insert(ti.id.clone(), ti);
        }
        for a in export.activities {
            if a.status == ActivityStatus::Active {
                state.active.insert(a.instance.clone(), a.id.clone());
            }
            state.activities.insert(a.id.clone(), a);
        }
        for ie in export.elements {
            state
                .by_instance
                .entry(ie.instance.clone())
                .or_default()
                .insert(ie.id.clone());
            state.elements.insert(ie.id.clone(), ie);
        }
        for e in export.edges {
            state.insert_edge(e, export.seq);
        }
        state
    }
}
