use cssm_core::eval::{group_qrels, Judgments};
use cssm_core::*;
use proptest::prelude::*;

fn case() -> impl Strategy<Value = (Vec<usize>, Vec<u32>)> {
    // 40 candidate docs; a ranking is a prefix of a permutation.
    (
        Just((0..40).collect::<Vec<usize>>()).prop_shuffle(),
        0usize..=40,
        prop::collection::vec(prop::sample::select(vec![0u32, 0, 0, 0, 1, 2]), 40),
    )
        .prop_map(|(perm, n, grades)| (perm[..n].to_vec(), grades))
}

fn build(ranking: &[usize], grades: &[u32]) -> (Vec<RunEntry>, Vec<QrelEntry>) {
    let run = ranking
        .iter()
        .enumerate()
        .map(|(i, d)| RunEntry {
            query_id: "q".into(),
            doc_id: format!("d{d:02}"),
            rank: i + 1,
            score: (100 - i) as f64,
            tag: "t".into(),
        })
        .collect();
    let qrels = grades
        .iter()
        .enumerate()
        .map(|(d, &g)| QrelEntry {
            query_id: "q".into(),
            doc_id: format!("d{d:02}"),
            relevance: g,
        })
        .collect();
    (run, qrels)
}

proptest! {
    #[test]
    fn metrics_lie_in_unit_interval((ranking, grades) in case()) {
        let (run, qrels) = build(&ranking, &grades);
        let report = evaluate(&run, &qrels);
        for v in report.per_query.values().chain(std::iter::once(&report.mean)) {
            for m in Metric::ALL {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&v.get(m)), "{m} = {}", v.get(m));
            }
        }
    }

    #[test]
    fn permuting_the_tail_changes_nothing((ranking, grades) in case(), seed in any::<u64>()) {
        let (run, qrels) = build(&ranking, &grades);
        let judged: &Judgments = &group_qrels(&qrels)["q"];
        let r = judged.values().filter(|&&g| g > 0).count();
        let last_rel = ranking
            .iter()
            .rposition(|d| grades[*d] > 0)
            .map_or(0, |p| p + 1);
        let cut = 20.max(r).max(last_rel).min(ranking.len());
        prop_assume!(cut + 1 < ranking.len());
        let mut permuted = ranking.clone();
        let tail = &mut permuted[cut..];
        // deterministic shuffle from the seed
        let mut s = seed;
        for i in (1..tail.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            tail.swap(i, (s >> 33) as usize % (i + 1));
        }
        let (run2, _) = build(&permuted, &grades);
        prop_assert_eq!(evaluate(&run, &qrels), evaluate(&run2, &qrels));
    }

    #[test]
    fn binary_ideal_ranking_has_unit_ndcg(rel in prop::collection::vec(any::<bool>(), 20), k in 1usize..25) {
        prop_assume!(rel.iter().any(|&b| b));
        let grades: Vec<u32> = rel.iter().map(|&b| u32::from(b)).collect();
        let mut ranking: Vec<usize> = (0..20).collect();
        ranking.sort_by_key(|&d| std::cmp::Reverse(grades[d]));
        let (run, qrels) = build(&ranking, &grades);
        let judged = &group_qrels(&qrels)["q"];
        let docs: Vec<&str> = run.iter().map(|e| e.doc_id.as_str()).collect();
        prop_assert!((eval::ndcg_at_k(&docs, judged, k) - 1.0).abs() < 1e-12);
        let r = grades.iter().filter(|&&g| g > 0).count();
        prop_assert_eq!(eval::precision_at_k(&docs, judged, k.min(r)), 1.0);
    }
}
