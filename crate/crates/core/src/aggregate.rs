//! Fusion of window salience with BM25 and per-query ranking.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::embedding::{profile_from_ids, EmbeddingTable, SimilarityProfile};
use crate::error::{Error, Result};
use crate::index::{Bm25Params, InvertedIndex};
use crate::salience::{document_salience, query_term_weights, QueryTermWeights, SalienceParams, WindowScore};
use crate::text::{Corpus, Query, RunEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Plain BM25 ranking.
    #[serde(rename = "bm25", alias = "bm25-only")]
    Bm25,
    /// `max S + beta * BM25`.
    #[serde(rename = "cssm-lf")]
    CssmLf,
    /// `ln(co + C) * max S + beta * BM25`.
    #[serde(rename = "cssm-cw")]
    CssmCw,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Bm25 => "bm25",
            Mode::CssmLf => "cssm-lf",
            Mode::CssmCw => "cssm-cw",
        }
    }

    pub fn uses_salience(self) -> bool {
        !matches!(self, Mode::Bm25)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bm25" | "bm25-only" => Ok(Mode::Bm25),
            "cssm-lf" => Ok(Mode::CssmLf),
            "cssm-cw" => Ok(Mode::CssmCw),
            _ => Err(Error::InvalidParameter(format!(
                "unknown mode `{s}` (expected bm25, cssm-lf or cssm-cw)"
            ))),
        }
    }
}

/// How many BM25 candidates are rescored: all documents, or the top N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RerankDepth {
    Full,
    Top(usize),
}

impl fmt::Display for RerankDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RerankDepth::Full => f.write_str("full"),
            RerankDepth::Top(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for RerankDepth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "full" {
            return Ok(RerankDepth::Full);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(RerankDepth::Top(n)),
            _ => Err(Error::InvalidParameter(format!(
                "rerank depth must be a positive integer or `full`, got `{s}`"
            ))),
        }
    }
}

impl Serialize for RerankDepth {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RerankDepth::Full => s.serialize_str("full"),
            RerankDepth::Top(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for RerankDepth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        let raw = Raw::deserialize(d)?;
        let text = match raw {
            Raw::Int(n) => n.to_string(),
            Raw::Str(s) => s,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AggregationParams {
    pub beta: f64,
    /// Offset inside `ln(co + C)`; must be positive.
    pub c: f64,
    pub mode: Mode,
    pub rerank_depth: RerankDepth,
    pub bm25: Bm25Params,
}

impl Default for AggregationParams {
    fn default() -> Self {
        AggregationParams {
            beta: 0.2,
            c: std::f64::consts::E,
            mode: Mode::CssmLf,
            rerank_depth: RerankDepth::Top(1000),
            bm25: Bm25Params::default(),
        }
    }
}

impl AggregationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidParameter(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidParameter(format!("C must be > 0, got {}", self.c)));
        }
        self.bm25.validate()
    }
}

/// `max_salience + beta * bm25`.
pub fn fuse_linear(max_salience: f64, bm25: f64, params: &AggregationParams) -> f64 {
    max_salience + params.beta * bm25
}

/// `ln(co + C) * max_salience + beta * bm25`.
pub fn fuse_co_weighted(max_salience: f64, bm25: f64, co: usize, params: &AggregationParams) -> f64 {
    (co as f64 + params.c).ln() * max_salience + params.beta * bm25
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDocument {
    pub doc_id: String,
    pub score: f64,
    /// Best window; absent in BM25-only mode.
    pub best_window: Option<WindowScore>,
    pub bm25: f64,
    pub co: usize,
}

#[derive(Debug, Clone)]
struct Candidate {
    doc_id: String,
    bm25: f64,
    co: usize,
    profile: Option<SimilarityProfile>,
}

/// Everything about a query that does not depend on `alpha`, `beta`, `C` or
/// the window width: candidate pool, BM25, co-occurrence, similarity
/// profiles and term weights. Scoring under many parameter settings reuses
/// one context.
#[derive(Debug, Clone)]
pub struct QueryContext {
    query: Query,
    weights: QueryTermWeights,
    candidates: Vec<Candidate>,
    warning: Option<String>,
}

impl QueryContext {
    pub fn prepare(
        query: &Query,
        corpus: &Corpus,
        index: &InvertedIndex,
        table: &EmbeddingTable,
        params: &AggregationParams,
    ) -> Result<Self> {
        params.validate()?;
        let weights = query_term_weights(query, table);
        let any_vocab = query.terms.iter().any(|t| table.contains(t));
        let any_indexed = query.terms.iter().any(|t| index.contains_term(t));
        if !any_vocab && !any_indexed {
            return Ok(QueryContext {
                query: query.clone(),
                weights,
                candidates: Vec::new(),
                warning: Some(format!(
                    "query {}: no term is in the embedding vocabulary or the index; nothing ranked",
                    query.query_id
                )),
            });
        }

        let bm25 = index.bm25_all(query, &params.bm25);
        let mut pool: Vec<u32> = (0..index.doc_count() as u32).collect();
        if let RerankDepth::Top(n) = params.rerank_depth {
            // Internal ids ascend with doc_id, so this is score desc, doc_id asc.
            pool.sort_by(|&a, &b| bm25[b as usize].total_cmp(&bm25[a as usize]).then(a.cmp(&b)));
            pool.truncate(n);
        }

        let query_ids = table.resolve(&query.terms);
        let with_profiles = params.mode.uses_salience();
        let candidates = pool
            .par_iter()
            .map(|&doc| {
                let doc_id = index.doc_id(doc);
                let profile = if with_profiles {
                    let tokens = &corpus
                        .get(doc_id)
                        .ok_or_else(|| Error::UnknownDocument(doc_id.to_owned()))?
                        .tokens;
                    Some(profile_from_ids(&query_ids, &table.resolve(tokens), table))
                } else {
                    None
                };
                Ok(Candidate {
                    doc_id: doc_id.to_owned(),
                    bm25: bm25[doc as usize],
                    co: index.co_occurrence_internal(query, doc),
                    profile,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(QueryContext {
            query: query.clone(),
            weights,
            candidates,
            warning: None,
        })
    }

    pub fn query(&self) -> &Query {
        &self.query
    }

    pub fn weights(&self) -> &QueryTermWeights {
        &self.weights
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    /// Scores every candidate and returns them best first (score descending,
    /// doc_id ascending).
    pub fn score(&self, salience: &SalienceParams, params: &AggregationParams) -> Result<Vec<ScoredDocument>> {
        salience.validate()?;
        params.validate()?;
        let mode = params.mode;
        let mut scored = self
            .candidates
            .par_iter()
            .map(|c| {
                let best_window = match (&c.profile, mode.uses_salience()) {
                    (Some(p), true) => Some(document_salience(p, &self.weights, salience).best),
                    (None, true) => {
                        return Err(Error::InvalidParameter(format!(
                            "context was prepared without similarity profiles; cannot score in {mode} mode"
                        )))
                    }
                    (_, false) => None,
                };
                let max_salience = best_window.map_or(0.0, |w| w.salience);
                let score = match mode {
                    Mode::Bm25 => c.bm25,
                    Mode::CssmLf => fuse_linear(max_salience, c.bm25, params),
                    Mode::CssmCw => fuse_co_weighted(max_salience, c.bm25, c.co, params),
                };
                Ok(ScoredDocument {
                    doc_id: c.doc_id.clone(),
                    score,
                    best_window,
                    bm25: c.bm25,
                    co: c.co,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        scored.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.doc_id.cmp(&b.doc_id)));
        Ok(scored)
    }
}

/// Converts sorted scored documents into run entries with ranks 1..n.
pub fn to_run_entries(query_id: &str, scored: &[ScoredDocument], tag: &str) -> Vec<RunEntry> {
    scored
        .iter()
        .enumerate()
        .map(|(i, d)| RunEntry {
            query_id: query_id.to_owned(),
            doc_id: d.doc_id.clone(),
            rank: i + 1,
            score: d.score,
            tag: tag.to_owned(),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RankedQuery {
    pub entries: Vec<RunEntry>,
    pub scored: Vec<ScoredDocument>,
    pub warning: Option<String>,
}

/// Ranks the candidate pool of one query.
pub fn rank_query(
    query: &Query,
    corpus: &Corpus,
    index: &InvertedIndex,
    table: &EmbeddingTable,
    salience: &SalienceParams,
    params: &AggregationParams,
    tag: &str,
) -> Result<RankedQuery> {
    let ctx = QueryContext::prepare(query, corpus, index, table, params)?;
    let scored = ctx.score(salience, params)?;
    Ok(RankedQuery {
        entries: to_run_entries(&query.query_id, &scored, tag),
        scored,
        warning: ctx.warning,
    })
}
