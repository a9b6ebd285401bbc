//! Fixture loading and independent oracles shared by the integration tests.
//! The oracles deliberately avoid the crate's own traversal and scoring code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use iw_core::archive::ArchiveState;
use iw_core::scenario::{Bindings, ScenarioScript};
use iw_core::schema::{parse_schema, FlowEdge, TaskTypeSchema};
use iw_core::{Archive, ArchiveOptions};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn patient_care() -> TaskTypeSchema {
    let text = std::fs::read_to_string(fixtures().join("patient-care.schema.json")).unwrap();
    parse_schema(&text).unwrap()
}

/// Replays a fixture script into a fresh seeded in-memory archive.
pub fn replay(script: &str, seed: u64) -> (Archive, Bindings) {
    let mut archive = Archive::in_memory(ArchiveOptions::seeded(seed));
    let bindings = replay_into(&mut archive, script);
    (archive, bindings)
}

pub fn replay_into(archive: &mut Archive, script: &str) -> Bindings {
    let (script, base) = ScenarioScript::load(&fixtures().join(script)).unwrap();
    script.replay(archive, &base).unwrap()
}

/// Bidirectional BFS over the raw edge list. Returns, per reached element,
/// its hop count and the set of labels (`ds-out`, `rs-in`, ...) relating it
/// to neighbors exactly one hop closer to the start.
pub fn episodic_oracle(
    state: &ArchiveState,
    start: &str,
    depth: u32,
) -> BTreeMap<String, (u32, BTreeSet<String>)> {
    let edges: Vec<(String, String, String)> = state
        .edges()
        .map(|e| (e.from.clone(), e.to.clone(), format!("{:?}", e.kind).to_lowercase()))
        .collect();
    let mut dist: BTreeMap<String, u32> = BTreeMap::new();
    dist.insert(start.to_owned(), 0);
    for level in 1..=depth {
        let frontier: Vec<String> = dist
            .iter()
            .filter(|(_, &d)| d == level - 1)
            .map(|(n, _)| n.clone())
            .collect();
        for f in frontier {
            for (a, b, _) in &edges {
                for other in [(a == &f).then_some(b), (b == &f).then_some(a)].into_iter().flatten() {
                    dist.entry(other.clone()).or_insert(level);
                }
            }
        }
    }
    dist.iter()
        .map(|(n, &d)| {
            let mut labels = BTreeSet::new();
            if d > 0 {
                for (a, b, kind) in &edges {
                    if b == n && dist.get(a) == Some(&(d - 1)) {
                        labels.insert(format!("{kind}-out"));
                    }
                    if a == n && dist.get(b) == Some(&(d - 1)) {
                        labels.insert(format!("{kind}-in"));
                    }
                }
            }
            (n.clone(), (d, labels))
        })
        .collect()
}

/// Flow-graph neighborhood by repeated relaxation: returns (before, after)
/// maps of activity id to hop count, excluding the center.
pub fn flow_oracle(
    schema: &TaskTypeSchema,
    center: &str,
    radius: u32,
) -> (BTreeMap<String, u32>, BTreeMap<String, u32>) {
    let walk = |step: &dyn Fn(&FlowEdge) -> (&str, &str)| {
        let mut reached: BTreeMap<String, u32> = BTreeMap::new();
        let mut seen: BTreeSet<String> = BTreeSet::from([center.to_owned()]);
        for r in 1..=radius {
            let current = seen.clone();
            for e in &schema.flow_edges {
                let (src, dst) = step(e);
                if current.contains(src) && !seen.contains(dst) {
                    seen.insert(dst.to_owned());
                    reached.insert(dst.to_owned(), r);
                }
            }
        }
        reached
    };
    let after = walk(&|e| (e.from.as_str(), e.to.as_str()));
    let before = walk(&|e| (e.to.as_str(), e.from.as_str()));
    (before, after)
}

/// Reference tokenizer: lowercase, split on anything that is not a letter or
/// digit, keep tokens of two or more characters.
pub fn ref_tokens(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in lower.chars() {
        if ch.is_alphanumeric() {
            cur.push(ch);
        } else {
            if cur.chars().count() >= 2 {
                out.push(cur.clone());
            }
            cur.clear();
        }
    }
    if cur.chars().count() >= 2 {
        out.push(cur);
    }
    out
}

/// Brute-force BM25 (k1 = 1.2, b = 0.75) over raw `(id, body)` documents.
/// Each distinct query term contributes once; returns only documents that
/// contain at least one query term.
pub fn bm25_oracle(docs: &[(String, String)], query: &str) -> BTreeMap<String, f64> {
    let (k1, b) = (1.2_f64, 0.75_f64);
    let toks: Vec<(String, Vec<String>)> = docs.iter().map(|(id, body)| (id.clone(), ref_tokens(body))).collect();
    let n = toks.len() as f64;
    let avg = if toks.is_empty() {
        0.0
    } else {
        toks.iter().map(|(_, t)| t.len()).sum::<usize>() as f64 / n
    };
    let terms: BTreeSet<String> = ref_tokens(query).into_iter().collect();
    let mut scores = BTreeMap::new();
    for (id, t) in &toks {
        let mut total = 0.0;
        let mut matched = false;
        for q in &terms {
            let tf = t.iter().filter(|w| *w == q).count() as f64;
            if tf == 0.0 {
                continue;
            }
            matched = true;
            let df = toks.iter().filter(|(_, d)| d.contains(q)).count() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            let norm = t.len() as f64 / avg;
            total += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm));
        }
        if matched {
            scores.insert(id.clone(), total);
        }
    }
    scores
}

/// Oracle ranking: score descending, id ascending.
pub fn oracle_ranking(scores: &BTreeMap<String, f64>) -> Vec<(String, f64)> {
    let mut v: Vec<(String, f64)> = scores.iter().map(|(k, v)| (k.clone(), *v)).collect();
    v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    v
}
