use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::scalar::Scalar;
use super::tokenize::Tokenizer;
use crate::archive::ArchiveState;
use crate::canonical;
use crate::schema::SchemaRef;

/// What the index knows about a document besides its terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocMeta {
    pub schema: SchemaRef,
    pub category: String,
}

/// Inverted index over element bodies at one journal seq.
///
/// Invariants: `df[t] == postings[t].len()`, `n == doc_len.len()`,
/// `avg_len` is the mean of `doc_len`. Postings lists are sorted by element
/// id. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "F: Scalar"))]
pub struct PostingsIndex<F: Scalar> {
    pub n: usize,
    pub doc_len: BTreeMap<String, u32>,
    pub avg_len: F,
    pub postings: BTreeMap<String, Vec<(String, u32)>>,
    pub df: BTreeMap<String, u32>,
    pub docs: BTreeMap<String, DocMeta>,
    pub tokenizer: Tokenizer,
    pub built_at_seq: u64,
}

impl<F: Scalar> PostingsIndex<F> {
    /// Indexes `(id, meta, body)` triples.
    pub fn from_documents<'a>(
        docs: impl IntoIterator<Item = (&'a str, DocMeta, &'a str)>,
        tokenizer: Tokenizer,
        built_at_seq: u64,
    ) -> Self {
        let mut doc_len = BTreeMap::new();
        let mut metas = BTreeMap::new();
        let mut postings: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
        for (id, meta, body) in docs {
            let tokens = tokenizer.tokens(body);
            doc_len.insert(id.to_owned(), tokens.len() as u32);
            metas.insert(id.to_owned(), meta);
            for t in tokens {
                *postings
                    .entry(t)
                    .or_default()
                    .entry(id.to_owned())
                    .or_insert(0) += 1;
            }
        }
        let n = doc_len.len();
        let total: u64 = doc_len.values().map(|&l| u64::from(l)).sum();
        let avg_len = if n == 0 {
            F::zero()
        } else {
            F::lit(total as f64) / F::count(n)
        };
        let postings: BTreeMap<String, Vec<(String, u32)>> = postings
            .into_iter()
            .map(|(t, docs)| (t, docs.into_iter().collect()))
            .collect();
        let df = postings
            .iter()
            .map(|(t, p)| (t.clone(), p.len() as u32))
            .collect();
        Self {
            n,
            doc_len,
            avg_len,
            postings,
            df,
            docs: metas,
            tokenizer,
            built_at_seq,
        }
    }

    /// Canonical serialization: sorted keys, sorted maps, indented, trailing
    /// newline. Two builds over the same journal seq serialize byte-equal.
    pub fn to_canonical_json(&self) -> String {
        canonical::to_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn df(&self, term: &str) -> u32 {
        self.df.get(term).copied().unwrap_or(0)
    }
}

/// Indexes every non-retracted element of the archive at its current seq.
pub fn build_index<F: Scalar>(state: &ArchiveState, tokenizer: Tokenizer) -> PostingsIndex<F> {
    let docs = state.elements().filter(|e| !e.retracted).map(|e| {
        let schema = state
            .instance(&e.instance)
            .map(|t| t.schema.clone())
            .unwrap_or_else(|| SchemaRef::new("", 0));
        (
            e.id.as_str(),
            DocMeta {
                schema,
                category: e.category.clone(),
            },
            e.body.as_str(),
        )
    });
    PostingsIndex::from_documents(docs, tokenizer, state.seq())
}
