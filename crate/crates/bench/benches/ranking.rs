use criterion::{criterion_group, criterion_main, Criterion};
use cssm_bench::random_collection;
use cssm_core::{build_index, rank_query, AggregationParams, Mode, Query, RerankDepth, SalienceParams};
use std::hint::black_box;

fn rank(c: &mut Criterion) {
    let (corpus, table) = random_collection(11, 2000, 5000, 50);
    let index = build_index(&corpus).expect("index");
    let query = Query::parse("q", "w3 w40 w700").expect("query");
    let salience = SalienceParams::default();
    let mut group = c.benchmark_group("rank_query_2000_docs");
    group.sample_size(20);
    for (name, mode, depth) in [
        ("bm25", Mode::Bm25, RerankDepth::Full),
        ("cssm-lf_top100", Mode::CssmLf, RerankDepth::Top(100)),
        ("cssm-lf_full", Mode::CssmLf, RerankDepth::Full),
    ] {
        let params = AggregationParams {
            mode,
            rerank_depth: depth,
            ..Default::default()
        };
        group.bench_function(name, |b| {
            b.iter(|| {
                rank_query(black_box(&query), &corpus, &index, &table, &salience, &params, "bench").expect("rank")
            })
        });
    }
    group.finish();
}

fn index(c: &mut Criterion) {
    let (corpus, _) = random_collection(12, 2000, 5000, 8);
    c.bench_function("build_index_2000_docs", |b| {
        b.iter(|| build_index(black_box(&corpus)).expect("index"))
    });
}

criterion_group!(benches, rank, index);
criterion_main!(benches);
