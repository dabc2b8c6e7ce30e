//! Sliding-window contextual salience.
//!
//! For each query term `i` and window start `p`, the window salience is
//!
//! ```text
//! S_i(p) = top_1 + alpha * (top_1 + ... + top_K) / K
//! ```
//!
//! where `top_n` are the K largest similarities of term `i` inside the window
//! (zero-padded when the window holds fewer than K positions). Terms are
//! combined with softmax weights over squared embedding norms and the
//! document keeps the window with the largest weighted sum.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::embedding::{similarity_profile, EmbeddingTable, SimilarityProfile};
use crate::error::{Error, Result};
use crate::text::{Document, Query};

/// K derived from the window width: `max(1, floor(ln L) + 1)`.
pub fn default_top_k(window: usize) -> usize {
    ((window.max(1) as f64).ln().floor() as usize + 1).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SalienceParams {
    /// Window width L in tokens.
    pub window: usize,
    /// Weight of the top-K mean relative to the window maximum.
    pub alpha: f64,
    /// Overrides the K derived from `window`.
    pub top_k: Option<usize>,
    /// Distance between consecutive window starts.
    pub stride: usize,
}

impl Default for SalienceParams {
    fn default() -> Self {
        SalienceParams {
            window: 30,
            alpha: 0.1,
            top_k: None,
            stride: 1,
        }
    }
}

impl SalienceParams {
    pub fn k(&self) -> usize {
        self.top_k.unwrap_or_else(|| default_top_k(self.window))
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::InvalidParameter("window width must be >= 1".into()));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if self.top_k == Some(0) {
            return Err(Error::InvalidParameter("top_k must be >= 1".into()));
        }
        if self.stride < 1 {
            return Err(Error::InvalidParameter("stride must be >= 1".into()));
        }
        Ok(())
    }
}

/// The `n` largest values in descending order, zero-padded to length `n`.
pub fn top_n_max(values: &[f64], n: usize) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    sorted.resize(n, 0.0);
    Ok(sorted)
}

/// Combines descending top values (already padded or not) into `S_i`.
#[inline]
fn combine<I: Iterator<Item = f64>>(descending: I, k: usize, alpha: f64) -> f64 {
    let mut top1 = None;
    let mut sum = 0.0;
    for v in descending.chain(std::iter::repeat(0.0)).take(k) {
        top1.get_or_insert(v);
        sum += v;
    }
    top1.unwrap_or(0.0) + alpha * (sum / k as f64)
}

/// Salience of one query term over one window's similarities.
pub fn term_window_salience(row: &[f64], params: &SalienceParams) -> f64 {
    let k = params.k();
    // k >= 1, so top_n_max cannot fail.
    let top = top_n_max(row, k).unwrap_or_default();
    combine(top.into_iter(), k, params.alpha)
}

/// Softmax weights of the query terms, one per term, summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryTermWeights(Vec<f64>);

impl QueryTermWeights {
    /// Softmax over `scores` with max subtraction.
    pub fn softmax(scores: &[f64]) -> Self {
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        QueryTermWeights(exps.into_iter().map(|e| e / total).collect())
    }

    /// Uniform weights; used when every term has the same magnitude.
    pub fn uniform(n: usize) -> Self {
        QueryTermWeights(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `g_i = exp(‖w_i‖²) / Σ_m exp(‖w_m‖²)`; OOV terms count as `‖w‖² = 0`.
pub fn query_term_weights(query: &Query, table: &EmbeddingTable) -> QueryTermWeights {
    let sq: Vec<f64> = query.terms.iter().map(|t| table.squared_norm(t)).collect();
    QueryTermWeights::softmax(&sq)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowScore {
    pub start: usize,
    pub salience: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SalienceResult {
    pub best: WindowScore,
    pub windows: Vec<WindowScore>,
}

/// Window start positions: `0, stride, 2*stride, ...` up to
/// `max(0, doc_len - L)`. The last start is always included so the tail of
/// the document is covered.
pub fn window_starts(doc_len: usize, params: &SalienceParams) -> Vec<usize> {
    let last = doc_len.saturating_sub(params.window);
    let mut starts: Vec<usize> = (0..=last).step_by(params.stride.max(1)).collect();
    if starts.last() != Some(&last) {
        starts.push(last);
    }
    starts
}

/// Multiset of the values currently inside the window, kept sorted ascending.
/// Insertion and removal are a binary search plus a shift, which beats tree
/// structures at the window widths used in practice.
struct SortedWindow {
    values: Vec<f64>,
}

impl SortedWindow {
    fn with_capacity(n: usize) -> Self {
        SortedWindow {
            values: Vec::with_capacity(n),
        }
    }

    fn insert(&mut self, v: f64) {
        let at = self.values.partition_point(|x| x.total_cmp(&v).is_lt());
        self.values.insert(at, v);
    }

    fn remove(&mut self, v: f64) {
        let at = self.values.partition_point(|x| x.total_cmp(&v).is_lt());
        debug_assert!(self.values[at].total_cmp(&v).is_eq());
        self.values.remove(at);
    }

    fn salience(&self, k: usize, alpha: f64) -> f64 {
        combine(self.values.iter().rev().copied(), k, alpha)
    }
}

/// `S_i(p)` for one query term at each start in `starts` (ascending).
pub(crate) fn term_saliences(row: &[f64], starts: &[usize], params: &SalienceParams) -> Vec<f64> {
    let (k, width) = (params.k(), params.window);
    let mut window = SortedWindow::with_capacity(width + params.stride);
    let (mut lo, mut hi) = (0, 0);
    starts
        .iter()
        .map(|&p| {
            let end = (p + width).min(row.len());
            while hi < end {
                window.insert(row[hi]);
                hi += 1;
            }
            while lo < p {
                window.remove(row[lo]);
                lo += 1;
            }
            window.salience(k, params.alpha)
        })
        .collect()
}

/// Scores every window and returns the best one (ties go to the smallest
/// start) together with all window scores.
pub fn document_salience(
    profile: &SimilarityProfile,
    weights: &QueryTermWeights,
    params: &SalienceParams,
) -> SalienceResult {
    assert_eq!(profile.query_len(), weights.len(), "one weight per query term required");
    let starts = window_starts(profile.doc_len(), params);
    let per_term: Vec<Vec<f64>> = profile
        .rows()
        .iter()
        .map(|row| term_saliences(row, &starts, params))
        .collect();

    let mut windows = Vec::with_capacity(starts.len());
    let mut best = WindowScore {
        start: 0,
        salience: f64::NEG_INFINITY,
    };
    for (w, &start) in starts.iter().enumerate() {
        let mut salience = 0.0;
        for (g, term) in weights.as_slice().iter().zip(&per_term) {
            salience += g * term[w];
        }
        let score = WindowScore { start, salience };
        if salience > best.salience {
            best = score;
        }
        windows.push(score);
    }
    SalienceResult { best, windows }
}

/// One document position in an explanation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplainRecord {
    pub position: usize,
    pub term: String,
    pub similarities: Vec<f64>,
    pub in_best_window: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub query_terms: Vec<String>,
    pub weights: QueryTermWeights,
    pub best: WindowScore,
    pub window: usize,
    pub records: Vec<ExplainRecord>,
}

impl Explanation {
    /// TSV with header `pos term s_q1 .. s_qn in_best_window`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("pos\tterm");
        for i in 1..=self.query_terms.len() {
            let _ = write!(out, "\ts_q{i}");
        }
        out.push_str("\tin_best_window\n");
        for r in &self.records {
            let _ = write!(out, "{}\t{}", r.position, r.term);
            for s in &r.similarities {
                let _ = write!(out, "\t{s:.6}");
            }
            let _ = writeln!(out, "\t{}", u8::from(r.in_best_window));
        }
        out
    }
}

/// Per-position similarity profile of `doc` with the maximal window marked.
pub fn explain_profile(query: &Query, doc: &Document, table: &EmbeddingTable, params: &SalienceParams) -> Explanation {
    let profile = similarity_profile(query, doc, table);
    let weights = query_term_weights(query, table);
    let best = document_salience(&profile, &weights, params).best;
    let best_end = best.start + params.window;
    let records = doc
        .tokens
        .iter()
        .enumerate()
        .map(|(j, term)| ExplainRecord {
            position: j,
            term: term.clone(),
            similarities: (0..profile.query_len()).map(|i| profile.get(i, j)).collect(),
            in_best_window: (best.start..best_end).contains(&j),
        })
        .collect();
    Explanation {
        query_terms: query.terms.clone(),
        weights,
        best,
        window: params.window,
        records,
    }
}
