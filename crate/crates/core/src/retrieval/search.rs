use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::index::PostingsIndex;
use super::scalar::Scalar;
use super::tokenize::Tokenizer;
use super::RetrievalError;
use crate::archive::{ArchiveState, ContextNode};
use crate::schema::{SchemaRef, TaskTypeSchema};

/// Scoring constants. Defaults: BM25 `k1 = 1.2`, `b = 0.75`, context boost
/// `0.5`, semantic expansion weight `0.3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringParams<F> {
    pub k1: F,
    pub b: F,
    /// Multiplicative boost `w`: matched hits score `base * (1 + w)`.
    pub boost: F,
    pub expansion_weight: F,
}

impl<F: Scalar> Default for ScoringParams<F> {
    fn default() -> Self {
        Self {
            k1: F::lit(1.2),
            b: F::lit(0.75),
            boost: F::lit(0.5),
            expansion_weight: F::lit(0.3),
        }
    }
}

impl<F: Scalar> ScoringParams<F> {
    pub fn with_boost(mut self, boost: F) -> Self {
        self.boost = boost;
        self
    }
}

/// The caller's current work: which instance, and which activity category
/// is active in it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkContext {
    pub instance: String,
    pub activity_category: String,
    pub schema: SchemaRef,
}

impl WorkContext {
    /// Checks the context against an archive and returns the pinned schema.
    pub fn resolve<'a>(&self, state: &'a ArchiveState) -> Result<&'a TaskTypeSchema, RetrievalError> {
        let unresolvable = |why: &str| RetrievalError::UnresolvableContext(why.to_owned());
        let ti = state
            .instance(&self.instance)
            .ok_or_else(|| unresolvable("unknown task instance"))?;
        if ti.schema != self.schema {
            return Err(unresolvable("instance pins a different schema"));
        }
        let schema = state
            .schema(&self.schema)
            .ok_or_else(|| unresolvable("unknown schema"))?;
        if !schema.has_activity(&self.activity_category) {
            return Err(unresolvable("activity category not in schema"));
        }
        Ok(schema)
    }
}

/// Links returned with a hit for navigation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitLinks {
    pub category: String,
    /// Depth-1 episodic neighbors.
    pub neighbors: Vec<ContextNode>,
    /// Concepts linked to the hit's content category.
    pub concepts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit<F> {
    pub ie: String,
    pub score: F,
    pub base_score: F,
    pub boosted: bool,
    #[serde(default)]
    pub snippet: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub links: Option<HitLinks>,
}

/// BM25 weight of one term in one document.
fn term_score<F: Scalar>(index: &PostingsIndex<F>, params: &ScoringParams<F>, df: u32, tf: u32, doc_len: u32) -> F {
    let one = F::one();
    let half = F::lit(0.5);
    let n = F::count(index.n);
    let df = F::lit(f64::from(df));
    let idf = (one + (n - df + half) / (df + half)).ln();
    let tf = F::lit(f64::from(tf));
    let norm = if index.avg_len > F::zero() {
        F::lit(f64::from(doc_len)) / index.avg_len
    } else {
        F::zero()
    };
    idf * tf * (params.k1 + one) / (tf + params.k1 * (one - params.b + params.b * norm))
}

/// Weighted BM25 sums per document over the given terms.
fn accumulate<'a, F: Scalar>(
    index: &'a PostingsIndex<F>,
    params: &ScoringParams<F>,
    terms: &BTreeSet<String>,
    weight: F,
    scores: &mut BTreeMap<&'a str, F>,
) {
    for t in terms {
        let (Some(postings), Some(&df)) = (index.postings.get(t), index.df.get(t)) else {
            continue;
        };
        for (doc, tf) in postings {
            let len = index.doc_len.get(doc).copied().unwrap_or(0);
            let s = weight * term_score(index, params, df, *tf, len);
            let slot = scores.entry(doc.as_str()).or_insert_with(F::zero);
            *slot = *slot + s;
        }
    }
}

fn rank<F: Scalar>(mut hits: Vec<Hit<F>>, k: usize) -> Vec<Hit<F>> {
    hits.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.ie.cmp(&b.ie))
    });
    hits.truncate(k);
    hits
}

/// Distinct query terms under the index's tokenizer.
pub fn query_terms<F: Scalar>(index: &PostingsIndex<F>, query: &str) -> BTreeSet<String> {
    index.tokenizer.tokens(query).into_iter().collect()
}

/// Top-`k` elements by BM25. Query terms are a set: repeating a word does not
/// change the score. Ties go to the smaller element id.
pub fn search<F: Scalar>(
    index: &PostingsIndex<F>,
    query: &str,
    k: usize,
    params: &ScoringParams<F>,
) -> Vec<Hit<F>> {
    let terms = query_terms(index, query);
    let mut scores = BTreeMap::new();
    accumulate(index, params, &terms, F::one(), &mut scores);
    let hits = scores
        .into_iter()
        .map(|(ie, score)| Hit {
            ie: ie.to_owned(),
            score,
            base_score: score,
            boosted: false,
            snippet: String::new(),
            links: None,
        })
        .collect();
    rank(hits, k)
}

/// Terms added to a query in semantic mode: tokenized labels of concepts
/// linked to the content categories the context activity produces or
/// consumes, plus labels of their related concepts, minus the query's own
/// terms.
pub fn expansion_terms(
    schema: &TaskTypeSchema,
    ctx: &WorkContext,
    tokenizer: &Tokenizer,
    query: &BTreeSet<String>,
) -> BTreeSet<String> {
    let mut labels = Vec::new();
    for category in schema.associated_contents(&ctx.activity_category) {
        for concept in schema.linked_concepts(category) {
            let Some(c) = schema.concept(concept) else {
                continue;
            };
            labels.push(c.label.as_str());
            labels.extend(
                c.related
                    .iter()
                    .filter_map(|r| schema.concept(&r.concept))
                    .map(|r| r.label.as_str()),
            );
        }
    }
    labels
        .into_iter()
        .flat_map(|l| tokenizer.tokens(l))
        .filter(|t| !query.contains(t))
        .collect()
}

/// BM25 search with the work context folded in.
///
/// Elements whose content category is associated with
/// `ctx.activity_category` (and whose instance pins `ctx.schema`) score
/// `base * (1 + params.boost)`. With `semantic`, [`expansion_terms`] are
/// added to the query at `params.expansion_weight`.
pub fn contextual_search<F: Scalar>(
    index: &PostingsIndex<F>,
    schema: &TaskTypeSchema,
    query: &str,
    ctx: &WorkContext,
    k: usize,
    semantic: bool,
    params: &ScoringParams<F>,
) -> Result<Vec<Hit<F>>, RetrievalError> {
    if schema.schema_ref() != ctx.schema {
        return Err(RetrievalError::UnresolvableContext(format!(
            "context names schema {} but {} was supplied",
            ctx.schema,
            schema.schema_ref()
        )));
    }
    if !schema.has_activity(&ctx.activity_category) {
        return Err(RetrievalError::UnresolvableContext(format!(
            "activity category '{}' not in schema {}",
            ctx.activity_category, ctx.schema
        )));
    }

    let terms = query_terms(index, query);
    let mut scores = BTreeMap::new();
    accumulate(index, params, &terms, F::one(), &mut scores);
    if semantic {
        let extra = expansion_terms(schema, ctx, &index.tokenizer, &terms);
        accumulate(index, params, &extra, params.expansion_weight, &mut scores);
    }

    let associated: BTreeSet<&str> = schema
        .associated_contents(&ctx.activity_category)
        .into_iter()
        .collect();
    let factor = F::one() + params.boost;
    let hits = scores
        .into_iter()
        .map(|(ie, base)| {
            let matched = index
                .docs
                .get(ie)
                .is_some_and(|m| m.schema == ctx.schema && associated.contains(m.category.as_str()));
            let boosted = matched && params.boost > F::zero();
            Hit {
                ie: ie.to_owned(),
                score: if boosted { base * factor } else { base },
                base_score: base,
                boosted,
                snippet: String::new(),
                links: None,
            }
        })
        .collect();
    Ok(rank(hits, k))
}
