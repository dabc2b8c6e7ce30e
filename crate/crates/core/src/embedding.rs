//! Pre-trained word vectors and term-to-term cosine similarity.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::{Document, Query};

/// Vocabulary of dense vectors sharing one dimension.
///
/// Vectors are stored unit-normalized so that cosine similarity is a plain
/// dot product; the original squared norms are kept for query term weights.
/// A zero vector stays zero and therefore has similarity 0.0 with everything.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    ids: HashMap<String, usize>,
    unit: Vec<f64>,
    sq_norms: Vec<f64>,
}

impl EmbeddingTable {
    /// Builds a table from `(word, vector)` pairs.
    pub fn from_entries<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut builder = Builder::default();
        for (i, (word, vector)) in entries.into_iter().enumerate() {
            builder
                .push(word.into(), &vector)
                .map_err(|m| Error::InvalidParameter(format!("entry {}: {m}", i + 1)))?;
        }
        builder.finish()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.sq_norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sq_norms.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.ids.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.ids.contains_key(word)
    }

    pub fn unit_vector(&self, id: usize) -> &[f64] {
        &self.unit[id * self.dim..(id + 1) * self.dim]
    }

    /// `‖w‖²` of the vector as loaded; 0.0 for out-of-vocabulary words.
    pub fn squared_norm(&self, word: &str) -> f64 {
        self.id(word).map_or(0.0, |id| self.sq_norms[id])
    }

    /// Cosine similarity between two vocabulary words; 0.0 if either is OOV.
    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        match (self.id(a), self.id(b)) {
            (Some(a), Some(b)) => self.unit_similarity(a, b),
            _ => 0.0,
        }
    }

    fn unit_similarity(&self, a: usize, b: usize) -> f64 {
        let d: f64 = self
            .unit_vector(a)
            .iter()
            .zip(self.unit_vector(b))
            .map(|(x, y)| x * y)
            .sum();
        d.clamp(-1.0, 1.0)
    }

    /// Maps each token to its vocabulary id.
    pub fn resolve<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<Option<usize>> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }
}

#[derive(Default)]
struct Builder {
    dim: Option<usize>,
    ids: HashMap<String, usize>,
    unit: Vec<f64>,
    sq_norms: Vec<f64>,
}

impl Builder {
    fn push(&mut self, word: String, vector: &[f64]) -> std::result::Result<(), String> {
        let dim = *self.dim.get_or_insert(vector.len());
        if dim == 0 {
            return Err("vector has no components".to_owned());
        }
        if vector.len() != dim {
            return Err(format!("dimension mismatch: expected {dim}, found {}", vector.len()));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(format!("non-finite component in vector for `{word}`"));
        }
        if self.ids.contains_key(&word) {
            return Err(format!("duplicate word `{word}`"));
        }
        let sq: f64 = vector.iter().map(|x| x * x).sum();
        let norm = sq.sqrt();
        if norm > 0.0 {
            self.unit.extend(vector.iter().map(|x| x / norm));
        } else {
            self.unit.extend(std::iter::repeat_n(0.0, dim));
        }
        self.ids.insert(word, self.sq_norms.len());
        self.sq_norms.push(sq);
        Ok(())
    }

    fn finish(self) -> Result<EmbeddingTable> {
        let dim = self
            .dim
            .ok_or_else(|| Error::InvalidParameter("embedding table has no entries".to_owned()))?;
        Ok(EmbeddingTable {
            dim,
            ids: self.ids,
            unit: self.unit,
            sq_norms: self.sq_norms,
        })
    }
}

/// Loads GloVe text vectors: `word f1 f2 ... fd` per line, no header.
///
/// The dimension is taken from the first line. A word2vec-style
/// `count dim` header line is rejected.
pub fn load_vectors(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let mut builder = Builder::default();
    let mut values = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().unwrap_or_default();
        values.clear();
        for f in fields {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("`{f}` is not a number")))?;
            values.push(v);
        }
        if builder.dim.is_none() && is_word2vec_header(word, &values) {
            return Err(Error::parse(
                path,
                line_no,
                "looks like a word2vec `count dim` header; expected GloVe text format without header",
            ));
        }
        builder
            .push(word.to_owned(), &values)
            .map_err(|m| Error::parse(path, line_no, m))?;
    }
    builder.finish().map_err(|_| Error::parse(path, 1, "no vectors found"))
}

fn is_word2vec_header(first: &str, rest: &[f64]) -> bool {
    rest.len() == 1 && first.parse::<u64>().is_ok() && rest[0].fract() == 0.0 && rest[0] >= 1.0
}

/// Cosine similarity of two raw vectors, clamped to [-1, 1].
///
/// A zero-norm input yields 0.0.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len(), "cosine of vectors with different dimensions");
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb).sqrt()).clamp(-1.0, 1.0)
}

/// Cosine similarity of every query term against every document position.
///
/// Row `i` holds `s_ij` for query term `i` over document positions `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityProfile {
    rows: Vec<Vec<f64>>,
    doc_len: usize,
}

impl SimilarityProfile {
    /// Wraps precomputed rows. All rows must have the same length and at
    /// least one row must be present.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let doc_len = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidParameter("profile has no query rows".to_owned()))?;
        if rows.iter().any(|r| r.len() != doc_len) {
            return Err(Error::InvalidParameter("profile rows differ in length".to_owned()));
        }
        Ok(SimilarityProfile { rows, doc_len })
    }

    pub fn query_len(&self) -> usize {
        self.rows.len()
    }

    pub fn doc_len(&self) -> usize {
        self.doc_len
    }

    pub fn row(&self, term: usize) -> &[f64] {
        &self.rows[term]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, term: usize, position: usize) -> f64 {
        self.rows[term][position]
    }
}

/// Builds the query-by-position similarity matrix. OOV terms on either side
/// contribute 0.0; OOV document tokens keep their positions.
pub fn similarity_profile(query: &Query, doc: &Document, table: &EmbeddingTable) -> SimilarityProfile {
    let doc_ids = table.resolve(&doc.tokens);
    profile_from_ids(&table.resolve(&query.terms), &doc_ids, table)
}

pub(crate) fn profile_from_ids(
    query_ids: &[Option<usize>],
    doc_ids: &[Option<usize>],
    table: &EmbeddingTable,
) -> SimilarityProfile {
    let rows = query_ids
        .iter()
        .map(|q| match q {
            None => vec![0.0; doc_ids.len()],
            Some(q) => doc_ids
                .iter()
                .map(|d| d.map_or(0.0, |d| table.unit_similarity(*q, d)))
                .collect(),
        })
        .collect();
    SimilarityProfile {
        rows,
        doc_len: doc_ids.len(),
    }
}
