//! Ranked retrieval over element bodies.
//!
//! BM25 (`k1 = 1.2`, `b = 0.75`, `idf = ln(1 + (N - df + 0.5) / (df + 0.5))`)
//! over a batch-built inverted index, with an optional multiplicative boost
//! for elements whose content category belongs to the caller's current
//! activity, and optional expansion of the query with concept labels.
//!
//! Everything is generic over the score type ([`Scalar`]); see the crate
//! root for the `f64` aliases.

mod annotate;
mod index;
mod scalar;
mod search;
mod tokenize;

use thiserror::Error;

pub use annotate::{annotate_hits, snippet, SNIPPET_CHARS};
pub use index::{build_index, DocMeta, PostingsIndex};
pub use scalar::Scalar;
pub use search::{
    contextual_search, expansion_terms, query_terms, search, Hit, HitLinks, ScoringParams,
    WorkContext,
};
pub use tokenize::{tokenize, Tokenizer};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RetrievalError {
    #[error("unresolvable work context: {0}")]
    UnresolvableContext(String),
    #[error("hit references missing element '{0}'")]
    DanglingHit(String),
}

impl RetrievalError {
    pub fn code(&self) -> &'static str {
        match self {
            RetrievalError::UnresolvableContext(_) => "unresolvable_context",
            RetrievalError::DanglingHit(_) => "dangling_hit",
        }
    }
}
