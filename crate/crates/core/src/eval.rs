//! trec_eval-compatible MAP, R-precision, P@k and NDCG@k.
//!
//! Conventions: unjudged documents are non-relevant, a grade > 0 is relevant,
//! NDCG uses the grade as gain with a `1/log2(rank + 1)` discount, and
//! queries without relevant documents are left out of the means.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};

use crate::text::{QrelEntry, RunEntry};

/// Judgments for one query: doc_id → grade.
pub type Judgments = HashMap<String, u32>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Map,
    RPrec,
    P5,
    P20,
    Ndcg5,
    Ndcg20,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Map,
        Metric::RPrec,
        Metric::P5,
        Metric::P20,
        Metric::Ndcg5,
        Metric::Ndcg20,
    ];

    /// trec_eval's name for the measure.
    pub fn name(self) -> &'static str {
        match self {
            Metric::Map => "map",
            Metric::RPrec => "Rprec",
            Metric::P5 => "P_5",
            Metric::P20 => "P_20",
            Metric::Ndcg5 => "ndcg_cut_5",
            Metric::Ndcg20 => "ndcg_cut_20",
        }
    }

    pub fn compute(self, ranked: &[&str], judged: &Judgments) -> f64 {
        match self {
            Metric::Map => average_precision(ranked, judged),
            Metric::RPrec => r_precision(ranked, judged),
            Metric::P5 => precision_at_k(ranked, judged, 5),
            Metric::P20 => precision_at_k(ranked, judged, 20),
            Metric::Ndcg5 => ndcg_at_k(ranked, judged, 5),
            Metric::Ndcg20 => ndcg_at_k(ranked, judged, 20),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn is_relevant(judged: &Judgments, doc: &str) -> bool {
    judged.get(doc).is_some_and(|&g| g > 0)
}

pub fn relevant_count(judged: &Judgments) -> usize {
    judged.values().filter(|&&g| g > 0).count()
}

/// Sum of precision at each relevant retrieved rank, divided by the total
/// number of relevant documents. 0.0 when nothing is relevant.
pub fn average_precision(ranked: &[&str], judged: &Judgments) -> f64 {
    let r = relevant_count(judged);
    if r == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, doc) in ranked.iter().enumerate() {
        if is_relevant(judged, doc) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / r as f64
}

/// Relevant documents in the top `k`, divided by `k` (missing slots count
/// as non-relevant).
pub fn precision_at_k(ranked: &[&str], judged: &Judgments, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let hits = ranked.iter().take(k).filter(|d| is_relevant(judged, d)).count();
    hits as f64 / k as f64
}

pub fn r_precision(ranked: &[&str], judged: &Judgments) -> f64 {
    precision_at_k(ranked, judged, relevant_count(judged))
}

pub fn ndcg_at_k(ranked: &[&str], judged: &Judgments, k: usize) -> f64 {
    let discount = |rank: usize| 1.0 / ((rank + 1) as f64).log2();
    let dcg: f64 = ranked
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, d)| judged.get(*d).copied().unwrap_or(0) as f64 * discount(i + 1))
        .sum();
    let mut grades: Vec<u32> = judged.values().copied().filter(|&g| g > 0).collect();
    grades.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = grades
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &g)| g as f64 * discount(i + 1))
        .sum();
    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricValues([f64; 6]);

impl MetricValues {
    pub fn get(&self, metric: Metric) -> f64 {
        self.0[metric as usize]
    }

    fn set(&mut self, metric: Metric, value: f64) {
        self.0[metric as usize] = value;
    }

    pub fn compute(ranked: &[&str], judged: &Judgments) -> Self {
        let mut v = MetricValues::default();
        for m in Metric::ALL {
            v.set(m, m.compute(ranked, judged));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricReport {
    /// Queries with at least one relevant document, keyed by query id.
    pub per_query: BTreeMap<String, MetricValues>,
    pub mean: MetricValues,
}

impl MetricReport {
    pub fn num_queries(&self) -> usize {
        self.per_query.len()
    }

    /// `metric<TAB>qid<TAB>value` rows, queries in id order, then `all` rows.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (qid, values) in &self.per_query {
            for m in Metric::ALL {
                let _ = writeln!(out, "{}\t{}\t{:.6}", m.name(), qid, values.get(m));
            }
        }
        let _ = writeln!(out, "num_q\tall\t{}", self.num_queries());
        for m in Metric::ALL {
            let _ = writeln!(out, "{}\tall\t{:.6}", m.name(), self.mean.get(m));
        }
        out
    }
}

pub fn group_qrels(qrels: &[QrelEntry]) -> HashMap<String, Judgments> {
    let mut grouped: HashMap<String, Judgments> = HashMap::new();
    for q in qrels {
        grouped
            .entry(q.query_id.clone())
            .or_default()
            .insert(q.doc_id.clone(), q.relevance);
    }
    grouped
}

/// Groups a run by query, ordering each query's documents by rank
/// (input order among equal ranks) and dropping repeated documents.
pub fn group_run(run: &[RunEntry]) -> HashMap<&str, Vec<&str>> {
    let mut grouped: HashMap<&str, Vec<&RunEntry>> = HashMap::new();
    for e in run {
        grouped.entry(e.query_id.as_str()).or_default().push(e);
    }
    grouped
        .into_iter()
        .map(|(qid, mut entries)| {
            entries.sort_by_key(|e| e.rank);
            let mut seen = HashSet::new();
            let docs = entries
                .into_iter()
                .map(|e| e.doc_id.as_str())
                .filter(|d| seen.insert(*d))
                .collect();
            (qid, docs)
        })
        .collect()
}

/// Per-query metrics and their means over judged queries with relevant
/// documents. Such queries missing from the run score 0; run queries
/// without judgments are ignored.
pub fn evaluate(run: &[RunEntry], qrels: &[QrelEntry]) -> MetricReport {
    let judged = group_qrels(qrels);
    let ranked = group_run(run);
    let mut report = MetricReport::default();
    for (qid, j) in &judged {
        if relevant_count(j) == 0 {
            continue;
        }
        let docs = ranked.get(qid.as_str()).map_or(&[][..], Vec::as_slice);
        report.per_query.insert(qid.clone(), MetricValues::compute(docs, j));
    }
    let n = report.per_query.len();
    if n > 0 {
        for m in Metric::ALL {
            let total: f64 = report.per_query.values().map(|v| v.get(m)).sum();
            report.mean.set(m, total / n as f64);
        }
    }
    report
}
