use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::model::{FlowEdge, Role, SchemaRef, TaskTypeSchema, TemplateEdge};
use super::SchemaError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextActivity {
    pub id: String,
    pub hops: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityAssociations {
    pub activity: String,
    pub produces: Vec<String>,
    pub consumes: Vec<String>,
}

/// Neighborhood of an activity category in the activity-flow graph, with the
/// content categories, templates and concepts attached to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalContext {
    pub schema: SchemaRef,
    pub activity: String,
    pub radius: u32,
    /// Activities reaching `activity` against flow-edge direction, nearest first.
    pub before: Vec<ContextActivity>,
    /// Activities reachable along flow-edge direction, nearest first.
    pub after: Vec<ContextActivity>,
    /// Flow edges with both endpoints in the neighborhood.
    pub flow_edges: Vec<FlowEdge>,
    /// One entry per neighborhood activity, sorted by activity id.
    pub associations: Vec<ActivityAssociations>,
    /// Templates touching any associated content category.
    pub template_edges: Vec<TemplateEdge>,
    /// Concepts linked to any neighborhood activity or associated content category.
    pub concepts: Vec<String>,
}

impl CategoricalContext {
    /// The neighborhood node set: the center plus everything before and after.
    pub fn activities(&self) -> BTreeSet<&str> {
        std::iter::once(self.activity.as_str())
            .chain(self.before.iter().map(|a| a.id.as_str()))
            .chain(self.after.iter().map(|a| a.id.as_str()))
            .collect()
    }

    pub fn associations_of(&self, activity: &str) -> Option<&ActivityAssociations> {
        self.associations.iter().find(|a| a.activity == activity)
    }
}

/// Activities within `radius` flow-edge hops of `activity` in each
/// direction. All three flow kinds are traversed.
pub fn categorical_context(
    schema: &TaskTypeSchema,
    activity: &str,
    radius: u32,
) -> Result<CategoricalContext, SchemaError> {
    if !schema.has_activity(activity) {
        return Err(SchemaError::UnknownActivity(activity.to_owned()));
    }

    let forward = bfs(schema, activity, radius, |e| (&e.from, &e.to));
    let backward = bfs(schema, activity, radius, |e| (&e.to, &e.from));

    let to_list = |hops: BTreeMap<&str, u32>| {
        let mut v: Vec<ContextActivity> = hops
            .into_iter()
            .filter(|(id, _)| *id != activity)
            .map(|(id, hops)| ContextActivity {
                id: id.to_owned(),
                hops,
            })
            .collect();
        v.sort_by(|a, b| a.hops.cmp(&b.hops).then_with(|| a.id.cmp(&b.id)));
        v
    };
    let before = to_list(backward);
    let after = to_list(forward);

    let nodes: BTreeSet<&str> = std::iter::once(activity)
        .chain(before.iter().map(|a| a.id.as_str()))
        .chain(after.iter().map(|a| a.id.as_str()))
        .collect();

    let mut flow_edges: Vec<FlowEdge> = schema
        .flow_edges
        .iter()
        .filter(|e| nodes.contains(e.from.as_str()) && nodes.contains(e.to.as_str()))
        .cloned()
        .collect();
    flow_edges.sort();
    flow_edges.dedup();

    let mut associations = Vec::with_capacity(nodes.len());
    let mut contents: BTreeSet<String> = BTreeSet::new();
    for &a in &nodes {
        let mut entry = ActivityAssociations {
            activity: a.to_owned(),
            produces: Vec::new(),
            consumes: Vec::new(),
        };
        for (content, role) in expected_contents(schema, a)? {
            contents.insert(content.clone());
            match role {
                Role::Produces => entry.produces.push(content),
                Role::Consumes => entry.consumes.push(content),
            }
        }
        associations.push(entry);
    }

    let mut template_edges: Vec<TemplateEdge> = schema
        .template_edges
        .iter()
        .filter(|e| contents.contains(&e.from) || contents.contains(&e.to))
        .cloned()
        .collect();
    template_edges.sort();
    template_edges.dedup();

    let concepts: BTreeSet<String> = nodes
        .iter()
        .copied()
        .chain(contents.iter().map(String::as_str))
        .flat_map(|c| schema.linked_concepts(c))
        .map(str::to_owned)
        .collect();

    Ok(CategoricalContext {
        schema: schema.schema_ref(),
        activity: activity.to_owned(),
        radius,
        before,
        after,
        flow_edges,
        associations,
        template_edges,
        concepts: concepts.into_iter().collect(),
    })
}

fn bfs<'a>(
    schema: &'a TaskTypeSchema,
    start: &'a str,
    radius: u32,
    orient: impl Fn(&'a FlowEdge) -> (&'a String, &'a String),
) -> BTreeMap<&'a str, u32> {
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in &schema.flow_edges {
        let (from, to) = orient(e);
        adjacency.entry(from).or_default().push(to);
    }
    let mut hops = BTreeMap::from([(start, 0u32)]);
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        let h = hops[node];
        if h == radius {
            continue;
        }
        for &next in adjacency.get(node).map(Vec::as_slice).unwrap_or_default() {
            if !hops.contains_key(next) {
                hops.insert(next, h + 1);
                queue.push_back(next);
            }
        }
    }
    hops
}

/// Association entries for one activity, ordered by content category id then
/// role.
pub fn expected_contents(
    schema: &TaskTypeSchema,
    activity: &str,
) -> Result<Vec<(String, Role)>, SchemaError> {
    if !schema.has_activity(activity) {
        return Err(SchemaError::UnknownActivity(activity.to_owned()));
    }
    let mut out: Vec<(String, Role)> = schema
        .assoc_edges
        .iter()
        .filter(|e| e.activity == activity)
        .map(|e| (e.content.clone(), e.role))
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}
