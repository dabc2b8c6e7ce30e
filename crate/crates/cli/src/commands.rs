use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use cssm_core::{
    build_index, evaluate, explain_profile, load_corpus, load_documents, load_index, load_queries, load_vectors,
    rank_query, read_qrels, read_run, save_documents, save_index, write_run, Query, RunConfig,
};

use crate::args::{require, BuildIndexArgs, Cli, Command, EvalArgs, ExplainArgs, RankArgs, SweepArgs};
use crate::{sweep, Failure, UsageError};

pub fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| UsageError(e.to_string()))?,
        None => RunConfig::default(),
    };
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    match cli.command {
        Command::BuildIndex(args) => build_index_cmd(args, cfg),
        Command::Rank(args) => rank_cmd(args, cfg),
        Command::Eval(args) => eval_cmd(args, cfg),
        Command::Explain(args) => explain_cmd(args, cfg),
        Command::Sweep(args) => sweep_cmd(args, cfg),
    }
}

fn validated(cfg: RunConfig) -> Result<RunConfig, UsageError> {
    cfg.validate().map_err(|e| UsageError(e.to_string()))?;
    Ok(cfg)
}

fn init_threads(cfg: &RunConfig) -> anyhow::Result<()> {
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    Ok(())
}

fn write_output(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .context("writing to stdout"),
    }
}

fn build_index_cmd(args: BuildIndexArgs, cfg: RunConfig) -> Result<(), Failure> {
    let corpus_path = require(&args.corpus, &cfg.corpus, "corpus")?;
    let out = require(&args.out, &cfg.index, "out")?;
    let cfg = validated(cfg)?;
    init_threads(&cfg)?;

    let corpus = load_corpus(&corpus_path)?;
    let index = build_index(&corpus)?;
    save_index(&index, &out)?;
    save_documents(&corpus, &out)?;
    println!("documents\t{}", index.doc_count());
    println!("vocabulary\t{}", index.vocabulary_size());
    println!("avg_doc_length\t{:.4}", index.avg_doc_length());
    Ok(())
}

fn rank_cmd(args: RankArgs, mut cfg: RunConfig) -> Result<(), Failure> {
    args.model.apply(&mut cfg);
    if let Some(tag) = args.tag {
        cfg.tag = tag;
    }
    let index_dir = require(&args.index, &cfg.index, "index")?;
    let embeddings = require(&args.embeddings, &cfg.embeddings, "embeddings")?;
    let queries_path = require(&args.queries, &cfg.queries, "queries")?;
    let out = require(&args.out, &cfg.out, "out")?;
    let cfg = validated(cfg)?;
    init_threads(&cfg)?;

    let index = load_index(&index_dir)?;
    let docs = load_documents(&index_dir)?;
    let table = load_vectors(&embeddings)?;
    let queries = load_queries(&queries_path)?;

    let mut run = Vec::new();
    for query in &queries {
        let ranked = rank_query(query, &docs, &index, &table, &cfg.salience, &cfg.aggregation, &cfg.tag)?;
        if let Some(w) = &ranked.warning {
            eprintln!("warning: {w}");
        }
        let top = ranked.scored.first();
        println!(
            "{}\tcandidates={}\ttop={}\tbest_window={}",
            query.query_id,
            ranked.scored.len(),
            top.map_or("-", |d| d.doc_id.as_str()),
            top.and_then(|d| d.best_window)
                .map_or_else(|| "-".to_owned(), |w| w.start.to_string()),
        );
        run.extend(ranked.entries);
    }
    write_run(&run, &out)?;
    Ok(())
}

fn eval_cmd(args: EvalArgs, cfg: RunConfig) -> Result<(), Failure> {
    let qrels_path = require(&args.qrels, &cfg.qrels, "qrels")?;
    let run = read_run(&args.run)?;
    let qrels = read_qrels(&qrels_path)?;
    let text = evaluate(&run, &qrels).to_text();
    write_output(None, &text)?;
    if let Some(out) = &args.out {
        write_output(Some(out), &text)?;
    }
    Ok(())
}

fn explain_cmd(args: ExplainArgs, mut cfg: RunConfig) -> Result<(), Failure> {
    args.model.apply(&mut cfg);
    let index_dir = require(&args.index, &cfg.index, "index")?;
    let embeddings = require(&args.embeddings, &cfg.embeddings, "embeddings")?;
    let query = Query::parse("explain", &args.query_text).map_err(|e| UsageError(e.to_string()))?;
    let cfg = validated(cfg)?;

    let docs = load_documents(&index_dir)?;
    let doc = docs
        .get(&args.doc_id)
        .ok_or_else(|| anyhow::anyhow!("document `{}` is not in {}", args.doc_id, index_dir.display()))?;
    let table = load_vectors(&embeddings)?;
    let explanation = explain_profile(&query, doc, &table, &cfg.salience);

    for (i, (term, g)) in explanation
        .query_terms
        .iter()
        .zip(explanation.weights.as_slice())
        .enumerate()
    {
        eprintln!("s_q{}\t{term}\tweight={g:.6}", i + 1);
    }
    eprintln!(
        "best_window\tstart={}\twidth={}\tsalience={:.6}",
        explanation.best.start, explanation.window, explanation.best.salience
    );
    write_output(args.out.as_deref(), &explanation.to_tsv())?;
    Ok(())
}

fn sweep_cmd(args: SweepArgs, mut cfg: RunConfig) -> Result<(), Failure> {
    args.model.apply(&mut cfg);
    let values = sweep::parse_values(&args.values, args.param)?;
    let index_dir = require(&args.index, &cfg.index, "index")?;
    let embeddings = require(&args.embeddings, &cfg.embeddings, "embeddings")?;
    let queries_path = require(&args.queries, &cfg.queries, "queries")?;
    let qrels_path = require(&args.qrels, &cfg.qrels, "qrels")?;
    let cfg = validated(cfg)?;
    for &v in &values {
        validated(sweep::apply(&cfg, args.param, v))?;
    }
    init_threads(&cfg)?;

    let index = load_index(&index_dir)?;
    let corpus = load_documents(&index_dir)?;
    let table = load_vectors(&embeddings)?;
    let queries = load_queries(&queries_path)?;
    let qrels = read_qrels(&qrels_path)?;
    let inputs = sweep::SweepInputs {
        corpus: &corpus,
        index: &index,
        table: &table,
        queries: &queries,
        qrels: &qrels,
    };
    let rows = sweep::run_sweep(&inputs, &cfg, args.param, &values)?;
    write_output(args.out.as_deref(), &sweep::format_table(args.param, &rows))?;
    Ok(())
}
