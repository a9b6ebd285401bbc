use std::collections::BTreeSet;

use super::scalar::Scalar;
use super::search::{Hit, HitLinks};
use super::tokenize::Tokenizer;
use super::RetrievalError;
use crate::archive::ArchiveState;

/// Maximum snippet length in characters.
pub const SNIPPET_CHARS: usize = 160;

/// Context shown before the first matching term when the body has to be
/// cut.
const LEAD_CHARS: usize = 40;

/// Fills in each hit's snippet and navigation links: depth-1 episodic
/// neighbors, content category, and the concepts linked to that category.
pub fn annotate_hits<F: Scalar>(
    state: &ArchiveState,
    hits: Vec<Hit<F>>,
    terms: &BTreeSet<String>,
    tokenizer: &Tokenizer,
) -> Result<Vec<Hit<F>>, RetrievalError> {
    hits.into_iter()
        .map(|mut hit| {
            let ie = state
                .element(&hit.ie)
                .ok_or_else(|| RetrievalError::DanglingHit(hit.ie.clone()))?;
            let context = state
                .episodic_context(&hit.ie, 1)
                .map_err(|_| RetrievalError::DanglingHit(hit.ie.clone()))?;
            let concepts = state
                .element_schema(ie)
                .map(|s| {
                    s.linked_concepts(&ie.category)
                        .into_iter()
                        .map(str::to_owned)
                        .collect()
                })
                .unwrap_or_default();
            hit.snippet = snippet(&ie.body, terms, tokenizer);
            hit.links = Some(HitLinks {
                category: ie.category.clone(),
                neighbors: context.nodes.into_iter().filter(|n| n.hops == 1).collect(),
                concepts,
            });
            Ok(hit)
        })
        .collect()
}

/// Up to [`SNIPPET_CHARS`] characters of `body` containing its first
/// occurrence of any term. Bodies that fit are returned whole.
pub fn snippet(body: &str, terms: &BTreeSet<String>, tokenizer: &Tokenizer) -> String {
    let chars: Vec<char> = body.chars().collect();
    if chars.len() <= SNIPPET_CHARS {
        return body.to_owned();
    }
    let hit = tokenizer
        .spans(body)
        .into_iter()
        .find(|(_, _, t)| terms.contains(t));
    let start = match hit {
        Some((_, end, _)) if end <= SNIPPET_CHARS => 0,
        Some((start, _, _)) => start
            .saturating_sub(LEAD_CHARS)
            .min(chars.len() - SNIPPET_CHARS),
        None => 0,
    };
    chars[start..start + SNIPPET_CHARS].iter().collect()
}
