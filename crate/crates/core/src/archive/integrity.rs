use std::collections::{BTreeMap, BTreeSet};

use super::model::{ActivityStatus, InstanceStatus};
use super::state::ArchiveState;
use crate::report::ValidationReport;
use crate::schema::{validate_schema, LinkKind};

impl ArchiveState {
    /// Audits every archive invariant over the whole store. An empty error
    /// list means the store is consistent.
    pub fn integrity_check(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        report.errors.extend(self.anomalies.iter().cloned());

        for (key, schema) in &self.schemas {
            let r = validate_schema(schema);
            for f in r.errors {
                report.error("invalid_schema", key.to_string(), format!("{}: {}", f.subject, f.message));
            }
            if &schema.schema_ref() != key {
                report.error("schema_key_mismatch", key.to_string(), "schema stored under a different (id, version)");
            }
        }

        for ti in self.instances.values() {
            if !self.schemas.contains_key(&ti.schema) {
                report.error("unresolved_schema", &ti.id, format!("pins unknown schema {}", ti.schema));
            }
            match (ti.status, ti.closed_at) {
                (InstanceStatus::Open, Some(_)) => {
                    report.error("bad_lifecycle", &ti.id, "open instance has closed_at")
                }
                (InstanceStatus::Closed, None) => {
                    report.error("bad_lifecycle", &ti.id, "closed instance lacks closed_at")
                }
                (_, Some(closed)) if closed < ti.started_at => {
                    report.error("bad_timestamps", &ti.id, "closed_at precedes started_at")
                }
                _ => {}
            }
        }

        let mut active_per_instance: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for a in self.activities.values() {
            let Some(ti) = self.instances.get(&a.instance) else {
                report.error("dangling_activity", &a.id, format!("belongs to unknown instance '{}'", a.instance));
                continue;
            };
            if let Some(schema) = self.schemas.get(&ti.schema) {
                if !schema.has_activity(&a.category) {
                    report.error("unknown_category", &a.id, format!("activity category '{}' not in {}", a.category, ti.schema));
                }
            }
            match (a.status, a.ended_at) {
                (ActivityStatus::Active, Some(_)) => {
                    report.error("bad_lifecycle", &a.id, "active activity has ended_at")
                }
                (ActivityStatus::Ended, None) => {
                    report.error("bad_lifecycle", &a.id, "ended activity lacks ended_at")
                }
                (_, Some(ended)) if ended < a.started_at => {
                    report.error("bad_timestamps", &a.id, "ended_at precedes started_at")
                }
                _ => {}
            }
            if a.status == ActivityStatus::Active {
                active_per_instance.entry(&a.instance).or_default().push(&a.id);
                if ti.status == InstanceStatus::Closed {
                    report.error("bad_lifecycle", &a.id, "activity still active in a closed instance");
                }
            }
        }
        for (instance, active) in active_per_instance {
            if active.len() > 1 {
                report.error(
                    "concurrent_activities",
                    instance,
                    format!("{} active activities: {}", active.len(), active.join(", ")),
                );
            }
        }

        for ie in self.elements.values() {
            let Some(ti) = self.instances.get(&ie.instance) else {
                report.error("dangling_element", &ie.id, format!("belongs to unknown instance '{}'", ie.instance));
                continue;
            };
            let activity = self.activities.get(&ie.activity);
            match activity {
                None => report.error("dangling_element", &ie.id, format!("recorded under unknown activity '{}'", ie.activity)),
                Some(a) if a.instance != ie.instance => {
                    report.error("activity_instance_mismatch", &ie.id, "activity belongs to another instance")
                }
                _ => {}
            }
            if ie.body.trim().is_empty() {
                report.error("empty_body", &ie.id, "element body is empty");
            }
            if let Some(schema) = self.schemas.get(&ti.schema) {
                if !schema.has_content(&ie.category) {
                    report.error("unknown_category", &ie.id, format!("content category '{}' not in {}", ie.category, ti.schema));
                } else if let Some(a) = activity {
                    if !schema.produces(&a.category, &ie.category) && !ie.override_warning {
                        report.error(
                            "produces_mismatch",
                            &ie.id,
                            format!("'{}' does not produce '{}' and no override mark is set", a.category, ie.category),
                        );
                    }
                }
            }
        }

        for e in self.edges.values() {
            let label = format!("{} -{}-> {}", e.from, e.kind, e.to);
            let from = self.elements.get(&e.from);
            let to = self.elements.get(&e.to);
            if from.is_none() || to.is_none() {
                report.error("dangling_edge", &label, "edge endpoint does not exist");
            }
            if e.from == e.to {
                report.error("self_loop", &label, "edge links an element to itself");
            }
            if let (LinkKind::Ds, Some(f), Some(t)) = (e.kind, from, to) {
                if f.instance != t.instance {
                    report.error("ds_cross_instance", &label, "DS edge crosses task instances");
                }
            }
        }

        if let Some(cycle) = self.ds_cycle_members() {
            report.error("ds_cycle", cycle.join(","), "DS subgraph is not acyclic");
        }

        report.normalize();
        report
    }

    /// Elements left after topologically sorting the DS subgraph, or `None`
    /// when the sort succeeds.
    fn ds_cycle_members(&self) -> Option<Vec<&str>> {
        let mut indegree: BTreeMap<&str, usize> = BTreeMap::new();
        for e in self.edges.values().filter(|e| e.kind == LinkKind::Ds) {
            indegree.entry(e.from.as_str()).or_insert(0);
            *indegree.entry(e.to.as_str()).or_insert(0) += 1;
        }
        let mut ready: Vec<&str> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(n, _)| *n)
            .collect();
        let mut done: BTreeSet<&str> = BTreeSet::new();
        while let Some(n) = ready.pop() {
            done.insert(n);
            for e in self.outgoing(n).filter(|e| e.kind == LinkKind::Ds) {
                let d = indegree.get_mut(e.to.as_str()).expect("counted above");
                *d -= 1;
                if *d == 0 {
                    ready.push(e.to.as_str());
                }
            }
        }
        let left: Vec<&str> = indegree
            .keys()
            .filter(|n| !done.contains(*n))
            .copied()
            .collect();
        (!left.is_empty()).then_some(left)
    }
}
