#!/usr/bin/env python3
"""Straightforward reference ranker and evaluator for the mini collection.

Shares no code with the Rust implementation: tokens are counted directly,
cosines come from the raw vectors, and every window is scored from scratch.
Writes golden runs and metric reports into ../golden/.

    python3 reference.py            # regenerate goldens
"""
import json
import math
import os
from collections import Counter

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..")
GOLDEN = os.path.join(DATA, "golden")

K1, B = 1.2, 0.75
WINDOW, ALPHA, BETA, C = 30, 0.1, 0.2, math.e
MODES = ["bm25", "cssm-lf", "cssm-cw"]


def tokenize(text):
    out, cur = [], []
    for ch in text.lower():
        if ch.isalnum():
            cur.append(ch)
        elif cur:
            out.append("".join(cur))
            cur = []
    if cur:
        out.append("".join(cur))
    return out


def load():
    docs = {}
    with open(os.path.join(DATA, "corpus.jsonl")) as f:
        for line in f:
            if line.strip():
                rec = json.loads(line)
                docs[rec["id"]] = tokenize(rec["text"])
    queries = []
    with open(os.path.join(DATA, "queries.tsv")) as f:
        for line in f:
            qid, text = line.rstrip("\n").split("\t", 1)
            queries.append((qid, tokenize(text)))
    vectors = {}
    with open(os.path.join(DATA, "embeddings.txt")) as f:
        for line in f:
            parts = line.split()
            vectors[parts[0]] = [float(x) for x in parts[1:]]
    qrels = {}
    with open(os.path.join(DATA, "qrels.txt")) as f:
        for line in f:
            qid, _, doc, rel = line.split()
            qrels.setdefault(qid, {})[doc] = max(0, int(rel))
    return docs, queries, vectors, qrels


def cosine(a, b):
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0 or nb == 0:
        return 0.0
    return max(-1.0, min(1.0, dot / (na * nb)))


def bm25(query, tokens, docs, avg):
    n = len(docs)
    tf = Counter(tokens)
    score = 0.0
    for t in query:
        if tf[t] == 0:
            continue
        df = sum(1 for d in docs.values() if t in d)
        idf = math.log(1 + (n - df + 0.5) / (df + 0.5))
        score += idf * tf[t] * (K1 + 1) / (tf[t] + K1 * (1 - B + B * len(tokens) / avg))
    return score


def best_window(query, tokens, vectors):
    k = max(1, int(math.floor(math.log(WINDOW))) + 1)
    sq = [sum(x * x for x in vectors[t]) if t in vectors else 0.0 for t in query]
    top = max(sq)
    exps = [math.exp(s - top) for s in sq]
    weights = [e / sum(exps) for e in exps]
    sims = [
        [cosine(vectors[q], vectors[t]) if q in vectors and t in vectors else 0.0 for t in tokens]
        for q in query
    ]
    best = None
    for start in range(0, max(0, len(tokens) - WINDOW) + 1):
        total = 0.0
        for g, row in zip(weights, sims):
            vals = sorted(row[start:start + WINDOW], reverse=True)
            vals = (vals + [0.0] * k)[:k]
            total += g * (vals[0] + ALPHA * sum(vals) / k)
        if best is None or total > best:
            best = total
    return best


def rank(mode, docs, queries, vectors):
    avg = sum(len(d) for d in docs.values()) / len(docs)
    lines = []
    for qid, query in queries:
        scored = []
        for doc_id, tokens in docs.items():
            b = bm25(query, tokens, docs, avg)
            if mode == "bm25":
                score = b
            else:
                s = best_window(query, tokens, vectors)
                if mode == "cssm-lf":
                    score = s + BETA * b
                else:
                    co = len(set(query) & set(tokens))
                    score = math.log(co + C) * s + BETA * b
            scored.append((score, doc_id))
        scored.sort(key=lambda x: (-x[0], x[1]))
        for r, (score, doc_id) in enumerate(scored, start=1):
            lines.append("%s Q0 %s %d %.6f %s\n" % (qid, doc_id, r, score, mode))
    return "".join(lines)


def evaluate(run_text, qrels):
    ranked = {}
    for line in run_text.splitlines():
        qid, _, doc, r, _, _ = line.split()
        ranked.setdefault(qid, []).append((int(r), doc))
    per_query = {}
    for qid, judged in sorted(qrels.items()):
        rel = {d for d, g in judged.items() if g > 0}
        if not rel:
            continue
        docs = [d for _, d in sorted(ranked.get(qid, []))]

        def prec(k):
            return sum(1 for d in docs[:k] if d in rel) / k

        hits, ap = 0, 0.0
        for i, d in enumerate(docs):
            if d in rel:
                hits += 1
                ap += hits / (i + 1)
        ap /= len(rel)

        def ndcg(k):
            dcg = sum(judged.get(d, 0) / math.log2(i + 2) for i, d in enumerate(docs[:k]))
            ideal = sorted((g for g in judged.values() if g > 0), reverse=True)[:k]
            idcg = sum(g / math.log2(i + 2) for i, g in enumerate(ideal))
            return dcg / idcg

        per_query[qid] = [ap, prec(len(rel)), prec(5), prec(20), ndcg(5), ndcg(20)]
    names = ["map", "Rprec", "P_5", "P_20", "ndcg_cut_5", "ndcg_cut_20"]
    out = []
    for qid, vals in per_query.items():
        out += ["%s\t%s\t%.6f\n" % (n, qid, v) for n, v in zip(names, vals)]
    out.append("num_q\tall\t%d\n" % len(per_query))
    for i, n in enumerate(names):
        out.append("%s\tall\t%.6f\n" % (n, sum(v[i] for v in per_query.values()) / len(per_query)))
    return "".join(out)


def main():
    docs, queries, vectors, qrels = load()
    os.makedirs(GOLDEN, exist_ok=True)
    for mode in MODES:
        run = rank(mode, docs, queries, vectors)
        with open(os.path.join(GOLDEN, mode + ".run"), "w") as f:
            f.write(run)
        with open(os.path.join(GOLDEN, mode + ".eval"), "w") as f:
            f.write(evaluate(run, qrels))


if __name__ == "__main__":
    main()
