//! Relevance ranking by contextual salience.
//!
//! A fixed-width window slides over each document; inside every window the
//! top-K embedding similarities of each query term are combined into a
//! salience score, terms are weighted by a softmax over their embedding
//! magnitudes, and the best window's salience is fused with BM25. The crate
//! also carries the I/O for corpora, queries, qrels and TREC runs, and a
//! trec_eval-compatible evaluator.

pub mod aggregate;
pub mod config;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod index;
pub mod salience;
pub mod text;

pub use aggregate::{
    fuse_co_weighted, fuse_linear, rank_query, to_run_entries, AggregationParams, Mode, QueryContext, RankedQuery,
    RerankDepth, ScoredDocument,
};
pub use config::RunConfig;
pub use embedding::{cosine, load_vectors, similarity_profile, EmbeddingTable, SimilarityProfile};
pub use error::{Error, Result};
pub use eval::{evaluate, Metric, MetricReport, MetricValues};
pub use index::{build_index, load_documents, load_index, save_documents, save_index, Bm25Params, InvertedIndex};
pub use salience::{
    default_top_k, document_salience, explain_profile, query_term_weights, term_window_salience, top_n_max,
    Explanation, QueryTermWeights, SalienceParams, SalienceResult, WindowScore,
};
pub use text::{
    load_corpus, load_queries, read_qrels, read_run, tokenize, write_run, Corpus, Document, QrelEntry, Query, RunEntry,
};
