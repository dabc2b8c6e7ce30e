//! Synthetic inputs for the benchmarks.

use cssm_core::{Corpus, Document, EmbeddingTable, QueryTermWeights, SimilarityProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random similarities in `[-1, 1)` for `query_len` terms over `doc_len` positions.
pub fn random_profile(seed: u64, query_len: usize, doc_len: usize) -> (SimilarityProfile, QueryTermWeights) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..query_len)
        .map(|_| (0..doc_len).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let norms: Vec<f64> = (0..query_len).map(|_| rng.gen_range(0.0..30.0)).collect();
    (
        SimilarityProfile::from_rows(rows).expect("rows have equal length"),
        QueryTermWeights::softmax(&norms),
    )
}

/// Best-window salience by rescoring every window from scratch.
pub fn naive_best_salience(
    profile: &SimilarityProfile,
    weights: &QueryTermWeights,
    window: usize,
    k: usize,
    alpha: f64,
) -> f64 {
    let len = profile.doc_len();
    let mut best = f64::NEG_INFINITY;
    for start in 0..=len.saturating_sub(window) {
        let end = (start + window).min(len);
        let mut total = 0.0;
        for (g, row) in weights.as_slice().iter().zip(profile.rows()) {
            let mut vals = row[start..end].to_vec();
            vals.sort_unstable_by(|a, b| b.total_cmp(a));
            vals.resize(k, 0.0);
            total += g * (vals[0] + alpha * vals.iter().sum::<f64>() / k as f64);
        }
        best = best.max(total);
    }
    best
}

/// A corpus of `docs` documents over a Zipf-ish vocabulary of `vocab` words,
/// with a random `dim`-dimensional vector for every word.
pub fn random_collection(seed: u64, docs: usize, vocab: usize, dim: usize) -> (Corpus, EmbeddingTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let word = |rng: &mut ChaCha8Rng| {
        let u: f64 = rng.gen_range(0.0..1.0);
        format!("w{}", ((vocab as f64).powf(u) as usize).min(vocab) - 1)
    };
    let documents = (0..docs)
        .map(|d| {
            let len = rng.gen_range(50..400);
            let text: Vec<String> = (0..len).map(|_| word(&mut rng)).collect();
            Document::new(format!("doc{d:06}"), &text.join(" "))
        })
        .collect();
    let table = EmbeddingTable::from_entries((0..vocab).map(|w| {
        (
            format!("w{w}"),
            (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>(),
        )
    }))
    .expect("valid vectors");
    (Corpus::new(documents).expect("unique ids"), table)
}
