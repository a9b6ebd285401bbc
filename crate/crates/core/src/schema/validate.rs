use std::collections::{BTreeMap, BTreeSet};

use super::model::{FlowKind, Role, TaskTypeSchema};
use crate::report::ValidationReport;

/// Checks every structural invariant of a schema.
///
/// Errors: non-positive version, duplicate ids, dangling references,
/// self-loops on `precedes`/`decomposes-into`, cycles in either of those
/// subgraphs, duplicate associations, concept self-relations.
/// Warnings: content categories no activity produces, duplicate flow or
/// template edges.
pub fn validate_schema(schema: &TaskTypeSchema) -> ValidationReport {
    let mut report = ValidationReport::new();

    if schema.version == 0 {
        report.error(
            "invalid_version",
            &schema.id,
            "schema version must be a positive integer",
        );
    }

    let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
    let nodes = schema
        .activities
        .iter()
        .map(|a| ("activity", a.id.as_str()))
        .chain(schema.contents.iter().map(|c| ("content", c.id.as_str())))
        .chain(schema.concepts.iter().map(|c| ("concept", c.id.as_str())));
    for (kind, id) in nodes {
        if let Some(prev) = seen.insert(id, kind) {
            report.error(
                "duplicate_id",
                id,
                format!("id used by both a {prev} and a {kind}"),
            );
        }
    }

    let activities: BTreeSet<&str> = schema.activities.iter().map(|a| a.id.as_str()).collect();
    let contents: BTreeSet<&str> = schema.contents.iter().map(|c| c.id.as_str()).collect();
    let concepts: BTreeSet<&str> = schema.concepts.iter().map(|c| c.id.as_str()).collect();

    let dangling = |report: &mut ValidationReport, edge: String, id: &str, set: &BTreeSet<&str>, what: &str| {
        if !set.contains(id) {
            report.error(
                "dangling_reference",
                edge,
                format!("references unknown {what} '{id}'"),
            );
        }
    };

    let mut flow_seen = BTreeSet::new();
    for e in &schema.flow_edges {
        let label = format!("flow {} -{}-> {}", e.from, e.kind.as_str(), e.to);
        dangling(&mut report, label.clone(), &e.from, &activities, "activity");
        dangling(&mut report, label.clone(), &e.to, &activities, "activity");
        if e.from == e.to && e.kind != FlowKind::IteratesTo {
            report.error("self_loop", &label, format!("{} edge from an activity to itself", e.kind.as_str()));
        }
        if !flow_seen.insert(e) {
            report.warning("duplicate_edge", label, "flow edge listed more than once");
        }
    }

    let mut assoc_seen = BTreeSet::new();
    for e in &schema.assoc_edges {
        let role = match e.role {
            Role::Produces => "produces",
            Role::Consumes => "consumes",
        };
        let label = format!("assoc {} {role} {}", e.activity, e.content);
        dangling(&mut report, label.clone(), &e.activity, &activities, "activity");
        dangling(&mut report, label.clone(), &e.content, &contents, "content category");
        if !assoc_seen.insert(e) {
            report.error("duplicate_association", label, "association triple listed more than once");
        }
    }

    let mut template_seen = BTreeSet::new();
    for e in &schema.template_edges {
        let label = format!("template {} -{}-> {}", e.from, e.kind, e.to);
        dangling(&mut report, label.clone(), &e.from, &contents, "content category");
        dangling(&mut report, label.clone(), &e.to, &contents, "content category");
        if !template_seen.insert(e) {
            report.warning("duplicate_edge", label, "template edge listed more than once");
        }
    }

    let categories: BTreeSet<&str> = activities.union(&contents).copied().collect();
    for l in &schema.semantic_links {
        let label = format!("semantic {} ~ {}", l.category, l.concept);
        dangling(&mut report, label.clone(), &l.category, &categories, "category");
        dangling(&mut report, label, &l.concept, &concepts, "concept");
    }

    for c in &schema.concepts {
        for r in &c.related {
            let label = format!("concept {} ~ {}", c.id, r.concept);
            if r.concept == c.id {
                report.error("concept_self_relation", label, "concept related to itself");
            } else {
                dangling(&mut report, label, &r.concept, &concepts, "concept");
            }
        }
    }

    for (kind, code) in [
        (FlowKind::DecomposesInto, "decomposition_cycle"),
        (FlowKind::Precedes, "precedence_cycle"),
    ] {
        let edges: Vec<(&str, &str)> = schema
            .flow_edges
            .iter()
            .filter(|e| e.kind == kind && e.from != e.to)
            .map(|e| (e.from.as_str(), e.to.as_str()))
            .collect();
        let cyclic = cyclic_nodes(&edges);
        if !cyclic.is_empty() {
            let members: Vec<&str> = cyclic.into_iter().collect();
            report.error(
                code,
                members.join(","),
                format!("{} edges form a cycle", kind.as_str()),
            );
        }
    }

    for c in &schema.contents {
        let produced = schema
            .assoc_edges
            .iter()
            .any(|e| e.content == c.id && e.role == Role::Produces);
        if !produced {
            report.warning(
                "unproduced_content",
                &c.id,
                "no activity produces this content category",
            );
        }
    }

    report.normalize();
    report
}

/// Nodes left over after Kahn's algorithm (those on or downstream of a
/// cycle); empty iff the graph is acyclic.
fn cyclic_nodes<'a>(edges: &[(&'a str, &'a str)]) -> BTreeSet<&'a str> {
    let mut indegree: BTreeMap<&str, usize> = BTreeMap::new();
    let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for &(from, to) in edges {
        indegree.entry(from).or_insert(0);
        *indegree.entry(to).or_insert(0) += 1;
        out.entry(from).or_default().push(to);
    }
    let mut ready: Vec<&str> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| *n)
        .collect();
    while let Some(n) = ready.pop() {
        indegree.remove(n);
        for &m in out.get(n).map(Vec::as_slice).unwrap_or_default() {
            if let Some(d) = indegree.get_mut(m) {
                *d -= 1;
                if *d == 0 {
                    ready.push(m);
                }
            }
        }
    }
    indegree.into_keys().collect()
}
