//! Corpus, query, qrels and run-file I/O.
//!
//! Formats:
//! - corpus: one JSON object per line, `{"id": "...", "text": "..."}`
//! - queries: `query_id<TAB>query text`
//! - qrels: `qid iter docid rel` (whitespace separated, `iter` ignored)
//! - runs: `qid Q0 docid rank score tag`, score with six decimals

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Lowercases `text` and splits it on every non-alphanumeric character.
///
/// No stemming and no stopword removal: pre-trained word vectors are keyed
/// by surface forms.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, text: &str) -> Self {
        Document {
            doc_id: doc_id.into(),
            tokens: tokenize(text),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub query_id: String,
    /// Never empty. Repeated terms are kept.
    pub terms: Vec<String>,
}

impl Query {
    /// Tokenizes `text`; fails if nothing survives tokenization.
    pub fn parse(query_id: impl Into<String>, text: &str) -> Result<Self> {
        let query_id = query_id.into();
        let terms = tokenize(text);
        if terms.is_empty() {
            return Err(Error::EmptyQuery(query_id));
        }
        Ok(Query { query_id, terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrelEntry {
    pub query_id: String,
    pub doc_id: String,
    pub relevance: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub query_id: String,
    pub doc_id: String,
    pub rank: usize,
    pub score: f64,
    pub tag: String,
}

/// An ordered collection of documents with unique ids.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    docs: Vec<Document>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(docs: Vec<Document>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(docs.len());
        for (i, doc) in docs.iter().enumerate() {
            validate_id(&doc.doc_id).map_err(Error::InvalidParameter)?;
            if by_id.insert(doc.doc_id.clone(), i).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate document id `{}`",
                    doc.doc_id
                )));
            }
        }
        Ok(Corpus { docs, by_id })
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.by_id.get(doc_id).map(|&i| &self.docs[i])
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.docs.iter()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Document;
    type IntoIter = std::slice::Iter<'a, Document>;

    fn into_iter(self) -> Self::IntoIter {
        self.docs.iter()
    }
}

// Ids end up as whitespace-delimited columns in run and qrels files.
fn validate_id(id: &str) -> std::result::Result<(), String> {
    if id.is_empty() {
        return Err("empty id".to_owned());
    }
    if id.chars().any(char::is_whitespace) {
        return Err(format!("id `{id}` contains whitespace"));
    }
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

/// Iterates `(1-based line number, line)` and skips blank lines.
fn numbered_lines<'a, R: BufRead + 'a>(
    path: &'a Path,
    reader: R,
) -> impl Iterator<Item = Result<(usize, String)>> + 'a {
    reader.lines().enumerate().filter_map(move |(i, line)| match line {
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(Ok((i + 1, l))),
        Err(e) => Some(Err(Error::io(path, e))),
    })
}

#[derive(Deserialize)]
struct CorpusRecord {
    id: String,
    text: String,
}

/// Reads a JSONL corpus. Documents keep their input order.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for item in numbered_lines(path, open(path)?) {
        let (line_no, line) = item?;
        let record: CorpusRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(path, line_no, format!("invalid corpus record: {e}")))?;
        validate_id(&record.id).map_err(|m| Error::parse(path, line_no, m))?;
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateId {
                path: path.to_owned(),
                line: line_no,
                id: record.id,
            });
        }
        docs.push(Document::new(record.id, &record.text));
    }
    Corpus::new(docs)
}

/// Reads `query_id<TAB>text` lines.
pub fn load_queries(path: impl AsRef<Path>) -> Result<Vec<Query>> {
    let path = path.as_ref();
    let mut queries = Vec::new();
    let mut seen = HashSet::new();
    for item in numbered_lines(path, open(path)?) {
        let (line_no, line) = item?;
        let (qid, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, line_no, "expected `query_id<TAB>text`"))?;
        let qid = qid.trim();
        validate_id(qid).map_err(|m| Error::parse(path, line_no, m))?;
        if !seen.insert(qid.to_owned()) {
            return Err(Error::DuplicateId {
                path: path.to_owned(),
                line: line_no,
                id: qid.to_owned(),
            });
        }
        queries.push(Query::parse(qid, text)?);
    }
    Ok(queries)
}

/// Reads TREC qrels. Negative grades are clamped to 0, as trec_eval treats them.
pub fn read_qrels(path: impl AsRef<Path>) -> Result<Vec<QrelEntry>> {
    let path = path.as_ref();
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for item in numbered_lines(path, open(path)?) {
        let (line_no, line) = item?;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 4 columns `qid iter docid rel`, found {}", cols.len()),
            ));
        }
        let rel: i64 = cols[3]
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("relevance `{}` is not an integer", cols[3])))?;
        if !seen.insert((cols[0].to_owned(), cols[2].to_owned())) {
            return Err(Error::DuplicateId {
                path: path.to_owned(),
                line: line_no,
                id: format!("{} {}", cols[0], cols[2]),
            });
        }
        entries.push(QrelEntry {
            query_id: cols[0].to_owned(),
            doc_id: cols[2].to_owned(),
            relevance: rel.clamp(0, u32::MAX as i64) as u32,
        });
    }
    Ok(entries)
}

/// Reads a six-column TREC run file.
pub fn read_run(path: impl AsRef<Path>) -> Result<Vec<RunEntry>> {
    let path = path.as_ref();
    let mut entries = Vec::new();
    for item in numbered_lines(path, open(path)?) {
        let (line_no, line) = item?;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 6 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 6 columns `qid Q0 docid rank score tag`, found {}", cols.len()),
            ));
        }
        let rank = cols[3]
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("bad rank `{}`", cols[3])))?;
        let score: f64 = cols[4]
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("bad score `{}`", cols[4])))?;
        if !score.is_finite() {
            return Err(Error::parse(path, line_no, "score is not finite"));
        }
        entries.push(RunEntry {
            query_id: cols[0].to_owned(),
            doc_id: cols[2].to_owned(),
            rank,
            score,
            tag: cols[5].to_owned(),
        });
    }
    Ok(entries)
}

pub fn format_run_line(entry: &RunEntry, out: &mut String) {
    // Writing into a String cannot fail.
    let _ = writeln!(
        out,
        "{} Q0 {} {} {:.6} {}",
        entry.query_id, entry.doc_id, entry.rank, entry.score, entry.tag
    );
}

/// Renders a run exactly as [`write_run`] writes it.
pub fn format_run(entries: &[RunEntry]) -> String {
    let mut out = String::with_capacity(entries.len() * 48);
    for entry in entries {
        format_run_line(entry, &mut out);
    }
    out
}

pub fn write_run(entries: &[RunEntry], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(format_run(entries).as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Checks per-query rank contiguity, score order and doc_id tie order.
pub fn check_run_invariants(entries: &[RunEntry]) -> std::result::Result<(), String> {
    let mut last: HashMap<&str, &RunEntry> = HashMap::new();
    for e in entries {
        match last.get(e.query_id.as_str()) {
            None if e.rank != 1 => {
                return Err(format!("query {}: first rank is {}", e.query_id, e.rank));
            }
            Some(prev) if e.rank != prev.rank + 1 => {
                return Err(format!("query {}: rank {} follows {}", e.query_id, e.rank, prev.rank));
            }
            Some(prev) if e.score > prev.score => {
                return Err(format!("query {}: score increases at rank {}", e.query_id, e.rank));
            }
            Some(prev) if e.score == prev.score && e.doc_id <= prev.doc_id => {
                return Err(format!(
                    "query {}: tie not in doc_id order at rank {}",
                    e.query_id, e.rank
                ));
            }
            _ => {}
        }
        last.insert(&e.query_id, e);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Robot technology!"), vec!["robot", "technology"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("state-of-the-art AI"), vec!["state", "of", "the", "art", "ai"]);
        assert_eq!(tokenize("  a1b2 -- C3 "), vec!["a1b2", "c3"]);
    }

    #[test]
    fn corpus_two_lines() {
        let f = write_tmp("{\"id\":\"d1\",\"text\":\"Hello world\"}\n{\"id\":\"d2\",\"text\":\"\"}\n");
        let corpus = load_corpus(f.path()).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.get("d1").unwrap().tokens, vec!["hello", "world"]);
        assert!(corpus.get("d2").unwrap().is_empty());
    }

    #[test]
    fn corpus_missing_text_names_line() {
        let f = write_tmp("{\"id\":\"d1\",\"text\":\"a\"}\n{\"id\":\"d2\"}\n");
        match load_corpus(f.path()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn corpus_duplicate_id() {
        let f = write_tmp("{\"id\":\"d1\",\"text\":\"a\"}\n{\"id\":\"d1\",\"text\":\"b\"}\n");
        assert!(matches!(
            load_corpus(f.path()).unwrap_err(),
            Error::DuplicateId { line: 2, .. }
        ));
    }

    #[test]
    fn corpus_rejects_whitespace_id() {
        let f = write_tmp("{\"id\":\"d 1\",\"text\":\"a\"}\n");
        assert!(matches!(
            load_corpus(f.path()).unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
    }

    #[test]
    fn queries_parse_and_errors() {
        let f = write_tmp("q1\tRobot Technology\nq2\trobot robot\n");
        let qs = load_queries(f.path()).unwrap();
        assert_eq!(qs[0].terms, vec!["robot", "technology"]);
        assert_eq!(qs[1].terms, vec!["robot", "robot"]);

        let f = write_tmp("q1 no tab here\n");
        assert!(matches!(
            load_queries(f.path()).unwrap_err(),
            Error::Parse { line: 1, .. }
        ));

        let f = write_tmp("q1\tok\nq7\t!!! ---\n");
        match load_queries(f.path()).unwrap_err() {
            Error::EmptyQuery(id) => assert_eq!(id, "q7"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn qrels_parse_and_errors() {
        let f = write_tmp("1 0 d1 1\n1 0 d2 0\n2 0 d1 2\n2 0 d9 -1\n");
        let q = read_qrels(f.path()).unwrap();
        assert_eq!(q.len(), 4);
        assert_eq!(q[2].relevance, 2);
        assert_eq!(q[3].relevance, 0);

        let f = write_tmp("1 0 d1 1\n1 0 d2 yes\n");
        assert!(matches!(
            read_qrels(f.path()).unwrap_err(),
            Error::Parse { line: 2, .. }
        ));

        let f = write_tmp("1 0 d1 1\n1 0 d1 0\n");
        assert!(matches!(read_qrels(f.path()).unwrap_err(), Error::DuplicateId { .. }));
    }

    #[test]
    fn run_format_is_exact() {
        let entries = vec![
            RunEntry {
                query_id: "q1".into(),
                doc_id: "d3".into(),
                rank: 1,
                score: 1.0 / 3.0,
                tag: "t".into(),
            },
            RunEntry {
                query_id: "q1".into(),
                doc_id: "d1".into(),
                rank: 2,
                score: 0.0,
                tag: "t".into(),
            },
        ];
        assert_eq!(format_run(&entries), "q1 Q0 d3 1 0.333333 t\nq1 Q0 d1 2 0.000000 t\n");
        assert!(check_run_invariants(&entries).is_ok());
    }

    #[test]
    fn run_write_read_write_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.run");
        let b = dir.path().join("b.run");
        let entries = vec![RunEntry {
            query_id: "301".into(),
            doc_id: "FBIS3-1".into(),
            rank: 1,
            score: 12.3456789,
            tag: "cssm".into(),
        }];
        write_run(&entries, &a).unwrap();
        write_run(&read_run(&a).unwrap(), &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn write_run_unwritable_path() {
        let err = write_run(&[], "/nonexistent-dir/x/run.txt").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn invariant_checker_catches_bad_runs() {
        let e = |d: &str, r: usize, s: f64| RunEntry {
            query_id: "q".into(),
            doc_id: d.into(),
            rank: r,
            score: s,
            tag: "t".into(),
        };
        assert!(check_run_invariants(&[e("a", 2, 1.0)]).is_err());
        assert!(check_run_invariants(&[e("a", 1, 1.0), e("b", 3, 0.5)]).is_err());
        assert!(check_run_invariants(&[e("a", 1, 1.0), e("b", 2, 2.0)]).is_err());
        assert!(check_run_invariants(&[e("b", 1, 1.0), e("a", 2, 1.0)]).is_err());
        assert!(check_run_invariants(&[e("a", 1, 1.0), e("b", 2, 1.0)]).is_ok());
    }
}
