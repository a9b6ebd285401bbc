use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::error::ArchiveError;
use super::model::EpisodicEdge;
use super::state::ArchiveState;
use crate::schema::{LinkKind, SchemaRef};

/// How a context node was reached from its BFS parent.
///
/// `DsOut`: the parent satisfies a demand of this node.
/// `DsIn`: this node satisfies a demand of the parent.
/// `RsOut`: the parent refers to this node.
/// `RsIn`: this node refers to the parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Via {
    DsOut,
    DsIn,
    RsOut,
    RsIn,
}

impl Via {
    fn of(kind: LinkKind, outgoing: bool) -> Self {
        match (kind, outgoing) {
            (LinkKind::Ds, true) => Via::DsOut,
            (LinkKind::Ds, false) => Via::DsIn,
            (LinkKind::Rs, true) => Via::RsOut,
            (LinkKind::Rs, false) => Via::RsIn,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextNode {
    pub ie: String,
    pub hops: u32,
    /// Relations to BFS parents (nodes one hop closer to the root). Empty for
    /// the root and in instance graphs.
    pub via: Vec<Via>,
    /// Content category; absent when the element is missing from the store.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activity_category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    /// Belongs to a different task instance than the root (or the graph's
    /// instance).
    pub external: bool,
    #[serde(default)]
    pub retracted: bool,
}

/// A set of elements and the DS/RS edges among them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSubgraph {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    /// Sorted by `(hops, ie)`.
    pub nodes: Vec<ContextNode>,
    /// Sorted by `(from, to, kind)`.
    pub edges: Vec<EpisodicEdge>,
}

impl ContextSubgraph {
    pub fn node(&self, ie: &str) -> Option<&ContextNode> {
        self.nodes.iter().find(|n| n.ie == ie)
    }

    pub fn node_ids(&self) -> BTreeSet<&str> {
        self.nodes.iter().map(|n| n.ie.as_str()).collect()
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = &ContextNode> {
        self.nodes.iter().filter(|n| !n.external)
    }

    /// Edges whose endpoints are both internal.
    pub fn internal_edges(&self) -> impl Iterator<Item = &EpisodicEdge> {
        let external: BTreeSet<&str> = self
            .nodes
            .iter()
            .filter(|n| n.external)
            .map(|n| n.ie.as_str())
            .collect();
        self.edges
            .iter()
            .filter(move |e| !external.contains(e.from.as_str()) && !external.contains(e.to.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub schema: SchemaRef,
    pub activity_category: String,
    pub content_category: String,
    pub count: usize,
    /// Element ids, ascending.
    pub evidence: Vec<String>,
}

/// Per-category authorship counts for one actor, ordered by
/// `(schema, activity category, content category)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub actor: String,
    pub entries: Vec<ProfileEntry>,
}

impl ProfileReport {
    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.count).sum()
    }
}

impl ArchiveState {
    fn context_node(&self, ie: &str, hops: u32, via: Vec<Via>, home: Option<&str>) -> ContextNode {
        let el = self.element(ie);
        let instance = el.map(|e| e.instance.clone());
        ContextNode {
            ie: ie.to_owned(),
            hops,
            via,
            category: el.map(|e| e.category.clone()),
            activity: el.map(|e| e.activity.clone()),
            activity_category: el
                .and_then(|e| self.element_activity_category(e))
                .map(str::to_owned),
            external: match (home, instance.as_deref()) {
                (Some(h), Some(i)) => h != i,
                (Some(_), None) => true,
                (None, _) => false,
            },
            instance,
            retracted: el.is_some_and(|e| e.retracted),
        }
    }

    /// Elements within `depth` DS/RS hops of `ie`, edges followed in both
    /// directions, with the edges among them.
    pub fn episodic_context(&self, ie: &str, depth: u32) -> Result<ContextSubgraph, ArchiveError> {
        let root = self
            .element(ie)
            .ok_or_else(|| ArchiveError::UnknownElement(ie.to_owned()))?;

        let mut hops: BTreeMap<&str, u32> = BTreeMap::from([(ie, 0)]);
        let mut via: BTreeMap<&str, BTreeSet<Via>> = BTreeMap::new();
        let mut queue = VecDeque::from([ie]);
        while let Some(node) = queue.pop_front() {
            let h = hops[node];
            if h >= depth {
                continue;
            }
            let neighbors = self
                .outgoing(node)
                .map(|e| (e.to.as_str(), Via::of(e.kind, true)))
                .chain(self.incoming(node).map(|e| (e.from.as_str(), Via::of(e.kind, false))));
            for (next, how) in neighbors {
                match hops.get(next) {
                    None => {
                        hops.insert(next, h + 1);
                        via.entry(next).or_default().insert(how);
                        queue.push_back(next);
                    }
                    Some(&nh) if nh == h + 1 => {
                        via.entry(next).or_default().insert(how);
                    }
                    Some(_) => {}
                }
            }
        }

        let mut nodes: Vec<ContextNode> = hops
            .iter()
            .map(|(&id, &h)| {
                let v = via.remove(id).map(|s| s.into_iter().collect()).unwrap_or_default();
                self.context_node(id, h, v, Some(&root.instance))
            })
            .collect();
        nodes.sort_by(|a, b| a.hops.cmp(&b.hops).then_with(|| a.ie.cmp(&b.ie)));

        let edges = self.edges_among(hops.keys().copied());
        Ok(ContextSubgraph {
            root: Some(ie.to_owned()),
            instance: Some(root.instance.clone()),
            nodes,
            edges,
        })
    }

    fn edges_among<'a>(&self, ids: impl Iterator<Item = &'a str>) -> Vec<EpisodicEdge> {
        let set: BTreeSet<&str> = ids.collect();
        // self.edges is keyed by (from, to, kind), so this comes out sorted.
        set.iter()
            .flat_map(|id| self.outgoing(id))
            .filter(|e| set.contains(e.to.as_str()))
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Every element of a task instance plus every edge touching one of them.
    /// Endpoints in other instances are included and marked external.
    pub fn instance_graph(&self, instance: &str) -> Result<ContextSubgraph, ArchiveError> {
        if self.instance(instance).is_none() {
            return Err(ArchiveError::UnknownInstance(instance.to_owned()));
        }
        let own: BTreeSet<&str> = self.instance_elements(instance).collect();
        let mut edges: BTreeSet<EpisodicEdge> = BTreeSet::new();
        let mut all = own.clone();
        for &ie in &own {
            for e in self.outgoing(ie).chain(self.incoming(ie)) {
                all.insert(e.from.as_str());
                all.insert(e.to.as_str());
                edges.insert(e.clone());
            }
        }
        let nodes = all
            .into_iter()
            .map(|id| self.context_node(id, 0, Vec::new(), Some(instance)))
            .collect();
        Ok(ContextSubgraph {
            root: None,
            instance: Some(instance.to_owned()),
            nodes,
            edges: edges.into_iter().collect(),
        })
    }

    /// Evidence-backed authorship profile of an actor. Unknown actors get an
    /// empty report.
    pub fn expertise_profile(&self, actor: &str) -> ProfileReport {
        let mut groups: BTreeMap<(SchemaRef, String, String), Vec<String>> = BTreeMap::new();
        for ie in self.elements().filter(|e| e.author == actor) {
            let schema = self
                .instance(&ie.instance)
                .map(|t| t.schema.clone())
                .unwrap_or_else(|| SchemaRef::new("", 0));
            let activity = self
                .element_activity_category(ie)
                .unwrap_or_default()
                .to_owned();
            groups
                .entry((schema, activity, ie.category.clone()))
                .or_default()
                .push(ie.id.clone());
        }
        ProfileReport {
            actor: actor.to_owned(),
            entries: groups
                .into_iter()
                .map(|((schema, activity_category, content_category), evidence)| ProfileEntry {
                    schema,
                    activity_category,
                    content_category,
                    count: evidence.len(),
                    evidence,
                })
                .collect(),
        }
    }

    /// Distinct element authors, ascending.
    pub fn authors(&self) -> BTreeSet<&str> {
        self.elements().map(|e| e.author.as_str()).collect()
    }
}
