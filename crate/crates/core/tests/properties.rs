use std::collections::HashSet;

use cssm_core::index::idf;
use cssm_core::salience::window_starts;
use cssm_core::*;
use proptest::prelude::*;

/// Recomputes every window from scratch.
fn naive_best(profile: &[Vec<f64>], g: &[f64], window: usize, k: usize, alpha: f64) -> (usize, f64) {
    let len = profile[0].len();
    let last = len.saturating_sub(window);
    let mut best = (0, f64::NEG_INFINITY);
    for p in 0..=last {
        let end = (p + window).min(len);
        let mut joint = 0.0;
        for (row, gi) in profile.iter().zip(g) {
            let mut vals: Vec<f64> = row[p..end].to_vec();
            vals.sort_by(|a, b| b.total_cmp(a));
            vals.resize(k, 0.0);
            let sum: f64 = vals.iter().fold(0.0, |acc, v| acc + v);
            joint += gi * (vals[0] + alpha * (sum / k as f64));
        }
        if joint > best.1 {
            best = (p, joint);
        }
    }
    best
}

fn profile_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=4, 0usize..=200)
        .prop_flat_map(|(ql, len)| prop::collection::vec(prop::collection::vec(-1.0f64..=1.0, len), ql))
}

proptest! {
    #[test]
    fn tokenize_is_idempotent(text in "\\PC{0,80}") {
        let once = tokenize(&text);
        prop_assert_eq!(tokenize(&once.join(" ")), once);
    }

    #[test]
    fn cosine_symmetry_scale_and_identity(
        a in prop::collection::vec(-5.0f64..5.0, 8),
        b in prop::collection::vec(-5.0f64..5.0, 8),
        c in 0.01f64..100.0,
    ) {
        let ab = cosine(&a, &b);
        prop_assert_eq!(ab, cosine(&b, &a));
        prop_assert!((-1.0..=1.0).contains(&ab));
        let scaled: Vec<f64> = a.iter().map(|x| x * c).collect();
        prop_assert!((cosine(&scaled, &b) - ab).abs() < 1e-12);
        if a.iter().any(|&x| x != 0.0) {
            prop_assert_eq!(cosine(&a, &a), 1.0);
        }
    }

    #[test]
    fn salience_matches_naive_oracle(
        rows in profile_strategy(),
        window in prop::sample::select(vec![1usize, 2, 5, 10, 30]),
        alpha in prop::sample::select(vec![0.0, 0.1, 0.4]),
        raw_g in prop::collection::vec(0.0f64..5.0, 4),
    ) {
        let g = QueryTermWeights::softmax(&raw_g[..rows.len()]);
        let params = SalienceParams { window, alpha, ..Default::default() };
        let profile = SimilarityProfile::from_rows(rows.clone()).unwrap();
        let got = document_salience(&profile, &g, &params);
        let (start, score) = naive_best(&rows, g.as_slice(), window, params.k(), alpha);
        prop_assert_eq!(got.best.start, start);
        prop_assert_eq!(got.best.salience, score);
        prop_assert_eq!(got.windows.len(), window_starts(profile.doc_len(), &params).len());
    }

    #[test]
    fn raising_a_similarity_never_lowers_best(
        rows in profile_strategy(),
        pick in (any::<prop::sample::Index>(), any::<prop::sample::Index>()),
        bump in 0.0f64..1.0,
    ) {
        prop_assume!(!rows[0].is_empty());
        let params = SalienceParams { window: 5, ..Default::default() };
        let g = QueryTermWeights::uniform(rows.len());
        let before = document_salience(&SimilarityProfile::from_rows(rows.clone()).unwrap(), &g, &params).best;
        let mut raised = rows.clone();
        let i = pick.0.index(raised.len());
        let j = pick.1.index(raised[i].len());
        raised[i][j] = (raised[i][j] + bump).min(1.0);
        let after = document_salience(&SimilarityProfile::from_rows(raised).unwrap(), &g, &params).best;
        prop_assert!(after.salience >= before.salience);
    }

    #[test]
    fn softmax_sums_to_one(scores in prop::collection::vec(0.0f64..700.0, 1..8)) {
        let g = QueryTermWeights::softmax(&scores);
        let total: f64 = g.as_slice().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(g.as_slice().iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn idf_positive(n in 1usize..100_000, frac in 0.0f64..=1.0) {
        let df = ((n as f64) * frac).round() as usize;
        prop_assert!(idf(n, df.min(n)) > 0.0);
    }

    #[test]
    fn fusion_strictly_increasing(
        s in 0.0f64..2.0, b in 0.0f64..20.0, ds in 0.001f64..1.0, db in 0.001f64..1.0,
        beta in 0.01f64..1.0, co in 0usize..6,
    ) {
        let p = AggregationParams { beta, ..Default::default() };
        prop_assert!(fuse_linear(s + ds, b, &p) > fuse_linear(s, b, &p));
        prop_assert!(fuse_linear(s, b + db, &p) > fuse_linear(s, b, &p));
        prop_assert!(fuse_co_weighted(s + ds, b, co, &p) > fuse_co_weighted(s, b, co, &p));
        prop_assert!(fuse_co_weighted(s, b + db, co, &p) > fuse_co_weighted(s, b, co, &p));
        prop_assert!(fuse_co_weighted(s, b, co, &p) >= fuse_linear(s, b, &p));
    }
}

const WORDS: [&str; 8] = ["robot", "arm", "fish", "coral", "music", "the", "of", "industrial"];

fn corpus_strategy() -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::vec(0usize..WORDS.len(), 0..30), 1..12)
}

fn make_corpus(docs: &[Vec<usize>]) -> Corpus {
    Corpus::new(
        docs.iter()
            .enumerate()
            .map(|(i, words)| {
                let text: Vec<&str> = words.iter().map(|&w| WORDS[w]).collect();
                Document::new(format!("doc{i:02}"), &text.join(" "))
            })
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_statistics_and_cooccurrence(docs in corpus_strategy(), q in prop::collection::vec(0usize..WORDS.len(), 1..5)) {
        let corpus = make_corpus(&docs);
        let index = build_index(&corpus).unwrap();
        let query = Query::parse("q", &q.iter().map(|&w| WORDS[w]).collect::<Vec<_>>().join(" ")).unwrap();
        prop_assert_eq!(index.doc_count(), docs.len());
        let mean = docs.iter().map(Vec::len).sum::<usize>() as f64 / docs.len() as f64;
        prop_assert!((index.avg_doc_length() - mean).abs() < 1e-12);
        let distinct: HashSet<&String> = query.terms.iter().collect();
        for doc in corpus.iter() {
            let id = index.internal_id(&doc.doc_id).unwrap();
            let tf_total: u32 = WORDS.iter().map(|w| index.tf(w, id)).sum();
            prop_assert!(tf_total as usize <= doc.len());
            let brute = distinct.iter().filter(|t| doc.tokens.contains(t)).count();
            let co = index.co_occurrence(&query, &doc.doc_id).unwrap();
            prop_assert_eq!(co, brute);
            prop_assert!(co <= query.len());
        }
        for w in WORDS {
            prop_assert!(index.idf(w) > 0.0);
        }
    }

    #[test]
    fn saved_index_scores_identically(docs in corpus_strategy(), q in prop::collection::vec(0usize..WORDS.len(), 1..5)) {
        let corpus = make_corpus(&docs);
        let index = build_index(&corpus).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_index(&index, dir.path()).unwrap();
        let loaded = load_index(dir.path()).unwrap();
        let query = Query::parse("q", &q.iter().map(|&w| WORDS[w]).collect::<Vec<_>>().join(" ")).unwrap();
        let p = Bm25Params::default();
        for doc in corpus.iter() {
            let a = index.bm25_score(&query, &doc.doc_id, &p).unwrap();
            let b = loaded.bm25_score(&query, &doc.doc_id, &p).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn bm25_monotone_in_tf() {
    let p = Bm25Params::default();
    let q = Query::parse("q", "robot").unwrap();
    let mut last = -1.0;
    for tf in 0..12 {
        // Constant length 12 and identical companions keep statistics fixed.
        let mut words = vec!["robot"; tf];
        words.resize(12, "pad");
        let corpus = Corpus::new(vec![
            Document::new("a", &words.join(" ")),
            Document::new("b", "robot pad pad pad pad pad pad pad pad pad pad pad"),
            Document::new("c", "pad pad pad pad pad pad pad pad pad pad pad pad"),
        ])
        .unwrap();
        let index = build_index(&corpus).unwrap();
        let s = index.bm25_score(&q, "a", &p).unwrap();
        assert!(s >= last, "tf {tf}: {s} < {last}");
        last = s;
    }
}

#[test]
fn large_synthetic_corpus_loads_in_order() {
    use std::io::Write;
    let mut f = tempfile::NamedTempFile::new().unwrap();
    for i in 0..10_000 {
        writeln!(f, "{{\"id\":\"d{i}\",\"text\":\"token{} shared words\"}}", i % 97).unwrap();
    }
    f.flush().unwrap();
    let lines = std::fs::read_to_string(f.path()).unwrap().lines().count();
    let corpus = load_corpus(f.path()).unwrap();
    assert_eq!(corpus.len(), lines);
    for (i, d) in corpus.iter().enumerate() {
        assert_eq!(d.doc_id, format!("d{i}"));
    }
}

#[test]
fn query_scaling_keeps_weight_order_and_best_window() {
    let base = [("q1", vec![0.3, 0.1, 0.2]), ("q2", vec![0.1, 0.9, 0.4])];
    let docs = [
        ("a", vec![0.2, 0.1, 0.0]),
        ("b", vec![0.0, 1.0, 0.3]),
        ("c", vec![0.3, 0.1, 0.2]),
    ];
    let doc = Document::new("d", "a b c a c b b a c c a");
    let params = SalienceParams {
        window: 3,
        ..Default::default()
    };
    let mut reference = None;
    for scale in [1.0, 0.5, 3.0, 10.0] {
        let entries = base
            .iter()
            .map(|(w, v)| (w.to_string(), v.iter().map(|x| x * scale).collect::<Vec<f64>>()))
            .chain(docs.iter().map(|(w, v)| (w.to_string(), v.clone())));
        let table = EmbeddingTable::from_entries(entries).unwrap();
        let two = Query::parse("q", "q1 q2").unwrap();
        let g = query_term_weights(&two, &table);
        assert!(g.as_slice()[0] < g.as_slice()[1]);
        let one = Query::parse("q", "q2").unwrap();
        let profile = similarity_profile(&one, &doc, &table);
        let best = document_salience(&profile, &query_term_weights(&one, &table), &params).best;
        match reference {
            None => reference = Some(best.start),
            Some(start) => assert_eq!(start, best.start),
        }
    }
}

#[test]
fn profile_entries_are_bounded() {
    let table = EmbeddingTable::from_entries((0..20).map(|i| {
        let v: Vec<f64> = (0..6).map(|k| ((i * 7 + k * 13) % 11) as f64 - 5.0).collect();
        (format!("w{i}"), v)
    }))
    .unwrap();
    let q = Query::parse("q", "w1 w5 w19 unknown").unwrap();
    let text: Vec<String> = (0..40).map(|i| format!("w{}", i % 23)).collect();
    let d = Document::new("d", &text.join(" "));
    let p = similarity_profile(&q, &d, &table);
    assert!(p.rows().iter().flatten().all(|s| (-1.0..=1.0).contains(s)));
    assert!(p.row(3).iter().all(|&s| s == 0.0));
}
