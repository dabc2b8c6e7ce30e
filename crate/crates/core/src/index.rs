//! Inverted index with Okapi BM25 scoring and query-term co-occurrence.
//!
//! Documents get dense internal ids in ascending `doc_id` order, so postings
//! sorted by internal id are also sorted by `doc_id`.
//!
//! On-disk layout of an index directory:
//!
//! ```text
//! stats.txt      cssm-index<TAB>1
//!                doc_count<TAB>N
//!                total_length<TAB>T
//!                doc<TAB>docid<TAB>length      (N lines, ascending docid)
//! postings.txt   term docid:tf docid:tf ...    (ascending term)
//! documents.txt  docid<TAB>token token ...     (tokenized text, for windows)
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::{Corpus, Document, Query};

const FORMAT_TAG: &str = "cssm-index";
const FORMAT_VERSION: &str = "1";

pub const STATS_FILE: &str = "stats.txt";
pub const POSTINGS_FILE: &str = "postings.txt";
pub const DOCUMENTS_FILE: &str = "documents.txt";

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1.is_finite() && self.k1 >= 0.0) {
            return Err(Error::InvalidParameter(format!("k1 must be >= 0, got {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidParameter(format!("b must lie in [0, 1], got {}", self.b)));
        }
        Ok(())
    }
}

/// Non-negative Okapi idf: `ln(1 + (N - df + 0.5) / (df + 0.5))`.
pub fn idf(doc_count: usize, df: usize) -> f64 {
    let n = doc_count as f64;
    let df = df as f64;
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    doc_ids: Vec<String>,
    doc_lengths: Vec<u32>,
    postings: HashMap<String, Vec<Posting>>,
    total_length: u64,
}

impl InvertedIndex {
    pub fn build(corpus: &Corpus) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut docs: Vec<&Document> = corpus.iter().collect();
        docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));

        let mut postings: HashMap<String, Vec<Posting>> = HashMap::new();
        let mut doc_lengths = Vec::with_capacity(docs.len());
        let mut total_length = 0u64;
        let mut counts: HashMap<&str, u32> = HashMap::new();
        for (i, doc) in docs.iter().enumerate() {
            counts.clear();
            for t in &doc.tokens {
                *counts.entry(t.as_str()).or_insert(0) += 1;
            }
            for (term, &tf) in &counts {
                postings
                    .entry((*term).to_owned())
                    .or_default()
                    .push(Posting { doc: i as u32, tf });
            }
            doc_lengths.push(doc.len() as u32);
            total_length += doc.len() as u64;
        }
        Ok(InvertedIndex {
            doc_ids: docs.iter().map(|d| d.doc_id.clone()).collect(),
            doc_lengths,
            postings,
            total_length,
        })
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.postings.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.total_length as f64 / self.doc_ids.len() as f64
    }

    /// Document ids in internal (ascending) order.
    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_id(&self, doc: u32) -> &str {
        &self.doc_ids[doc as usize]
    }

    pub fn internal_id(&self, doc_id: &str) -> Option<u32> {
        self.doc_ids
            .binary_search_by(|d| d.as_str().cmp(doc_id))
            .ok()
            .map(|i| i as u32)
    }

    pub fn doc_length(&self, doc: u32) -> u32 {
        self.doc_lengths[doc as usize]
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn contains_term(&self, term: &str) -> bool {
        self.postings.contains_key(term)
    }

    pub fn df(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub fn tf(&self, term: &str, doc: u32) -> u32 {
        let list = self.postings(term);
        list.binary_search_by_key(&doc, |p| p.doc).map_or(0, |i| list[i].tf)
    }

    pub fn idf(&self, term: &str) -> f64 {
        idf(self.doc_count(), self.df(term))
    }

    fn require(&self, doc_id: &str) -> Result<u32> {
        self.internal_id(doc_id)
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_owned()))
    }

    fn term_weight(&self, tf: u32, doc: u32, idf: f64, params: &Bm25Params) -> f64 {
        let tf = tf as f64;
        let len = self.doc_lengths[doc as usize] as f64;
        let avg = self.avg_doc_length();
        // An all-empty corpus has avg 0; length normalization is moot there.
        let norm = if avg > 0.0 { len / avg } else { 1.0 };
        idf * tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * norm))
    }

    /// Okapi BM25 of one document. Repeated query terms contribute once per
    /// occurrence.
    pub fn bm25_score(&self, query: &Query, doc_id: &str, params: &Bm25Params) -> Result<f64> {
        let doc = self.require(doc_id)?;
        let mut score = 0.0;
        for term in &query.terms {
            let tf = self.tf(term, doc);
            if tf > 0 {
                score += self.term_weight(tf, doc, self.idf(term), params);
            }
        }
        Ok(score)
    }

    /// BM25 of every document, indexed by internal id. Accumulates in query
    /// term order, so each entry equals [`Self::bm25_score`] exactly.
    pub fn bm25_all(&self, query: &Query, params: &Bm25Params) -> Vec<f64> {
        let mut scores = vec![0.0; self.doc_count()];
        for term in &query.terms {
            let list = self.postings(term);
            if list.is_empty() {
                continue;
            }
            let idf = idf(self.doc_count(), list.len());
            for p in list {
                scores[p.doc as usize] += self.term_weight(p.tf, p.doc, idf, params);
            }
        }
        scores
    }

    /// Number of distinct query terms occurring at least once in the document.
    pub fn co_occurrence(&self, query: &Query, doc_id: &str) -> Result<usize> {
        let doc = self.require(doc_id)?;
        Ok(self.co_occurrence_internal(query, doc))
    }

    pub(crate) fn co_occurrence_internal(&self, query: &Query, doc: u32) -> usize {
        let distinct: HashSet<&str> = query.terms.iter().map(String::as_str).collect();
        distinct.into_iter().filter(|t| self.tf(t, doc) > 0).count()
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

        let path = dir.join(STATS_FILE);
        let mut stats = String::new();
        stats.push_str(&format!("{FORMAT_TAG}\t{FORMAT_VERSION}\n"));
        stats.push_str(&format!("doc_count\t{}\n", self.doc_count()));
        stats.push_str(&format!("total_length\t{}\n", self.total_length));
        for (id, len) in self.doc_ids.iter().zip(&self.doc_lengths) {
            stats.push_str(&format!("doc\t{id}\t{len}\n"));
        }
        fs::write(&path, stats).map_err(|e| Error::io(&path, e))?;

        let path = dir.join(POSTINGS_FILE);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        let sorted: BTreeMap<&String, &Vec<Posting>> = self.postings.iter().collect();
        let mut line = String::new();
        for (term, list) in sorted {
            line.clear();
            line.push_str(term);
            for p in list {
                line.push_str(&format!(" {}:{}", self.doc_ids[p.doc as usize], p.tf));
            }
            line.push('\n');
            w.write_all(line.as_bytes()).map_err(|e| Error::io(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join(STATS_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut lines = text.lines();
        match lines.next().map(|l| l.split('\t').collect::<Vec<_>>()) {
            Some(h) if h.len() == 2 && h[0] == FORMAT_TAG => {
                if h[1] != FORMAT_VERSION {
                    return Err(Error::IndexFormat(format!(
                        "unsupported index version {} (expected {FORMAT_VERSION})",
                        h[1]
                    )));
                }
            }
            _ => {
                return Err(Error::IndexFormat(format!(
                    "{} does not start with a `{FORMAT_TAG}` header",
                    path.display()
                )))
            }
        }
        let doc_count: usize = header_value(&path, 2, lines.next(), "doc_count")?;
        let total_length: u64 = header_value(&path, 3, lines.next(), "total_length")?;

        let mut doc_ids = Vec::with_capacity(doc_count);
        let mut doc_lengths = Vec::with_capacity(doc_count);
        for (i, line) in lines.enumerate() {
            let line_no = i + 4;
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 || cols[0] != "doc" {
                return Err(Error::parse(&path, line_no, "expected `doc<TAB>id<TAB>length`"));
            }
            let len: u32 = cols[2]
                .parse()
                .map_err(|_| Error::parse(&path, line_no, "bad document length"))?;
            if doc_ids.last().is_some_and(|prev: &String| prev.as_str() >= cols[1]) {
                return Err(Error::parse(&path, line_no, "document ids not strictly ascending"));
            }
            doc_ids.push(cols[1].to_owned());
            doc_lengths.push(len);
        }
        if doc_ids.len() != doc_count || doc_count == 0 {
            return Err(Error::IndexFormat(format!(
                "doc_count {doc_count} but {} document records",
                doc_ids.len()
            )));
        }
        if doc_lengths.iter().map(|&l| l as u64).sum::<u64>() != total_length {
            return Err(Error::IndexFormat(
                "total_length disagrees with document lengths".into(),
            ));
        }

        let mut index = InvertedIndex {
            doc_ids,
            doc_lengths,
            postings: HashMap::new(),
            total_length,
        };
        let mut tf_sums = vec![0u64; doc_count];
        let path = dir.join(POSTINGS_FILE);
        let reader = BufReader::new(File::open(&path).map_err(|e| Error::io(&path, e))?);
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io(&path, e))?;
            let mut fields = line.split(' ');
            let term = fields
                .next()
                .filter(|t| !t.is_empty())
                .ok_or_else(|| Error::parse(&path, line_no, "empty postings line"))?;
            let mut list = Vec::new();
            for field in fields {
                let (id, tf) = field
                    .rsplit_once(':')
                    .ok_or_else(|| Error::parse(&path, line_no, "expected `docid:tf`"))?;
                let doc = index
                    .internal_id(id)
                    .ok_or_else(|| Error::parse(&path, line_no, format!("unknown doc `{id}`")))?;
                let tf: u32 = tf
                    .parse()
                    .ok()
                    .filter(|&tf| tf > 0)
                    .ok_or_else(|| Error::parse(&path, line_no, "term frequency must be >= 1"))?;
                if list.last().is_some_and(|p: &Posting| p.doc >= doc) {
                    return Err(Error::parse(&path, line_no, "postings not ascending by doc id"));
                }
                tf_sums[doc as usize] += tf as u64;
                list.push(Posting { doc, tf });
            }
            if list.is_empty() || index.postings.insert(term.to_owned(), list).is_some() {
                return Err(Error::parse(&path, line_no, format!("bad postings for `{term}`")));
            }
        }
        if tf_sums
            .iter()
            .zip(&index.doc_lengths)
            .any(|(&sum, &len)| sum > len as u64)
        {
            return Err(Error::IndexFormat("term frequencies exceed document length".into()));
        }
        Ok(index)
    }
}

fn header_value<T: std::str::FromStr>(path: &Path, line_no: usize, line: Option<&str>, key: &str) -> Result<T> {
    line.and_then(|l| l.split_once('\t'))
        .filter(|(k, _)| *k == key)
        .and_then(|(_, v)| v.parse().ok())
        .ok_or_else(|| Error::parse(path, line_no, format!("expected `{key}<TAB>value`")))
}

pub fn build_index(corpus: &Corpus) -> Result<InvertedIndex> {
    InvertedIndex::build(corpus)
}

pub fn save_index(index: &InvertedIndex, dir: impl AsRef<Path>) -> Result<()> {
    index.save(dir)
}

pub fn load_index(dir: impl AsRef<Path>) -> Result<InvertedIndex> {
    InvertedIndex::load(dir)
}

/// Writes tokenized documents next to the index, ascending by doc id.
pub fn save_documents(corpus: &Corpus, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(DOCUMENTS_FILE);
    let mut docs: Vec<&Document> = corpus.iter().collect();
    docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    for doc in docs {
        writeln!(w, "{}\t{}", doc.doc_id, doc.tokens.join(" ")).map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

pub fn load_documents(dir: impl AsRef<Path>) -> Result<Corpus> {
    let path = dir.as_ref().join(DOCUMENTS_FILE);
    let reader = BufReader::new(File::open(&path).map_err(|e| Error::io(&path, e))?);
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&path, e))?;
        let (id, tokens) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(&path, i + 1, "expected `docid<TAB>tokens`"))?;
        docs.push(Document {
            doc_id: id.to_owned(),
            tokens: tokens.split(' ').filter(|t| !t.is_empty()).map(str::to_owned).collect(),
        });
    }
    Corpus::new(docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(docs: &[(&str, &str)]) -> Corpus {
        Corpus::new(docs.iter().map(|(id, t)| Document::new(*id, t)).collect()).unwrap()
    }

    fn toy() -> Corpus {
        corpus(&[
            ("d3", "robot robot arm joint"),
            ("d1", "robot robot industrial technology"),
            ("d2", "ocean fish coral reef"),
        ])
    }

    #[test]
    fn postings_match_brute_force_scan() {
        let c = toy();
        let idx = build_index(&c).unwrap();
        assert_eq!(idx.doc_ids(), ["d1", "d2", "d3"]);
        let robot = idx.postings("robot");
        assert_eq!(robot.len(), 2);
        for doc in c.iter() {
            let count = doc.tokens.iter().filter(|t| *t == "robot").count() as u32;
            let internal = idx.internal_id(&doc.doc_id).unwrap();
            assert_eq!(idx.tf("robot", internal), count);
        }
        assert!(robot.windows(2).all(|w| w[0].doc < w[1].doc));
        assert_eq!(idx.avg_doc_length(), 4.0);
    }

    #[test]
    fn empty_corpus_and_empty_document() {
        assert!(matches!(build_index(&Corpus::default()), Err(Error::EmptyCorpus)));
        let idx = build_index(&corpus(&[("e", "")])).unwrap();
        assert_eq!(idx.doc_length(0), 0);
        assert_eq!(idx.vocabulary_size(), 0);
        let q = Query::parse("q", "anything").unwrap();
        assert_eq!(idx.bm25_score(&q, "e", &Bm25Params::default()).unwrap(), 0.0);
    }

    #[test]
    fn bm25_hand_computation() {
        // N=3, df=2, tf=2, len=4, avglen=4
        let idx = build_index(&toy()).unwrap();
        let q = Query::parse("q", "robot").unwrap();
        let got = idx.bm25_score(&q, "d1", &Bm25Params::default()).unwrap();
        let expected = (1.0f64 + 1.5 / 2.5).ln() * (2.0 * 2.2) / (2.0 + 1.2);
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.6463).abs() < 1e-4);
    }

    #[test]
    fn bm25_absent_terms_and_unknown_doc() {
        let idx = build_index(&toy()).unwrap();
        let p = Bm25Params::default();
        let q = Query::parse("q", "zebra").unwrap();
        assert_eq!(idx.bm25_score(&q, "d1", &p).unwrap(), 0.0);
        let q = Query::parse("q", "robot coral").unwrap();
        assert_eq!(
            idx.bm25_score(&q, "d2", &p).unwrap(),
            idx.bm25_score(&Query::parse("q", "coral").unwrap(), "d2", &p).unwrap()
        );
        assert!(matches!(idx.bm25_score(&q, "nope", &p), Err(Error::UnknownDocument(_))));
    }

    #[test]
    fn bm25_all_equals_per_document() {
        let idx = build_index(&toy()).unwrap();
        let p = Bm25Params { k1: 0.9, b: 0.4 };
        let q = Query::parse("q", "robot technology coral robot").unwrap();
        let all = idx.bm25_all(&q, &p);
        for (i, id) in idx.doc_ids().iter().enumerate() {
            assert_eq!(all[i], idx.bm25_score(&q, id, &p).unwrap());
        }
    }

    #[test]
    fn co_occurrence_counts_distinct_terms() {
        let idx = build_index(&toy()).unwrap();
        let q = Query::parse("q", "robot technology").unwrap();
        assert_eq!(idx.co_occurrence(&q, "d1").unwrap(), 2);
        assert_eq!(idx.co_occurrence(&q, "d2").unwrap(), 0);
        let q = Query::parse("q", "robot robot technology").unwrap();
        assert_eq!(idx.co_occurrence(&q, "d3").unwrap(), 1);
        assert!(idx.co_occurrence(&q, "dx").is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = toy();
        let idx = build_index(&c).unwrap();
        save_index(&idx, dir.path()).unwrap();
        save_documents(&c, dir.path()).unwrap();
        let loaded = load_index(dir.path()).unwrap();
        assert_eq!(loaded, idx);
        let docs = load_documents(dir.path()).unwrap();
        assert_eq!(docs.get("d3").unwrap(), c.get("d3").unwrap());
    }

    #[test]
    fn load_rejects_wrong_version_and_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let idx = build_index(&toy()).unwrap();
        save_index(&idx, dir.path()).unwrap();
        let stats = dir.path().join(STATS_FILE);
        let text = fs::read_to_string(&stats).unwrap();
        fs::write(&stats, text.replacen("cssm-index\t1", "cssm-index\t9", 1)).unwrap();
        assert!(matches!(load_index(dir.path()), Err(Error::IndexFormat(_))));
        fs::write(&stats, "hello\n").unwrap();
        assert!(matches!(load_index(dir.path()), Err(Error::IndexFormat(_))));

        save_index(&idx, dir.path()).unwrap();
        fs::write(dir.path().join(POSTINGS_FILE), "robot d1:0\n").unwrap();
        assert!(load_index(dir.path()).is_err());
        fs::write(dir.path().join(POSTINGS_FILE), "robot d9:1\n").unwrap();
        assert!(load_index(dir.path()).is_err());
        fs::write(dir.path().join(POSTINGS_FILE), "robot d1:9\n").unwrap();
        assert!(matches!(load_index(dir.path()), Err(Error::IndexFormat(_))));
    }

    #[test]
    fn params_validation() {
        assert!(Bm25Params::default().validate().is_ok());
        assert!(Bm25Params { k1: -1.0, b: 0.5 }.validate().is_err());
        assert!(Bm25Params { k1: 1.0, b: 1.5 }.validate().is_err());
    }
}
