#!/usr/bin/env python3
"""Generates the synthetic mini collection in the parent directory.

Relevant documents hold the query terms inside a short span; distractors repeat the exact query terms but spread them far
apart, so they win on term frequency while losing on proximity.
Deterministic: re-running reproduces the committed files byte for byte.
"""
import json
import os
import random

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..")

TOPICS = [
    # (query id, query text, related words found near the terms in relevant documents)
    ("q1", "robot automation", []),
    ("q2", "ocean fish", []),
    ("q3", "guitar melody", []),
    ("q4", "engine fuel", []),
    ("q5", "volcano technology", ["lava"]),
]
QUERIES = [(qid, text) for qid, text, _ in TOPICS]


def embeddings():
    """One shared axis per topic plus a private axis per word, so words in a
    topic have cosine around 0.4 and words across topics are orthogonal.
    `technology` gets no vector, exercising out-of-vocabulary query terms."""
    words = [w for _, text, rel in TOPICS for w in text.split() + rel if w != "technology"]
    dim = len(TOPICS) + len(words)
    rows = []
    for t, (_, text, rel) in enumerate(TOPICS):
        for w in text.split() + rel:
            if w == "technology":
                continue
            vec = [0.0] * dim
            vec[t] = round(0.8 + 0.1 * (len(w) % 4), 2)
            vec[len(TOPICS) + words.index(w)] = round(1.1 + 0.05 * (len(w) % 5), 2)
            rows.append((w, vec))
    return rows


FILLER = """
report said year people government market city company group state
week time number today official policy plan public local area service
program system team member house history season street office family
building council project board result budget center price season water
field energy study paper letter morning evening road bridge station
garden table window village river school county court library museum
""".split()


def filler(rng, n):
    return [rng.choice(FILLER) for _ in range(n)]


def clustered(rng, terms, related, length):
    span = list(terms) + list(related) + filler(rng, 2)
    rng.shuffle(span)
    body = filler(rng, length - len(span))
    at = rng.randrange(0, len(body) + 1)
    return body[:at] + span + body[at:]


def scattered(rng, terms, copies=2, gap=34):
    """Each query term `copies` times, consecutive occurrences `gap` apart."""
    occurrences = [t for t in terms for _ in range(copies)]
    rng.shuffle(occurrences)
    body = filler(rng, gap * len(occurrences) + rng.randrange(0, 8))
    offset = rng.randrange(0, 4)
    for i, t in enumerate(occurrences):
        body[offset + i * gap] = t
    return body


def main():
    rng = random.Random(20240607)
    docs = []  # (tokens, qid or None, grade)
    for qid, text, related in TOPICS:
        terms = text.split()
        for _ in range(3):
            docs.append((clustered(rng, terms, related, rng.randrange(80, 111)), qid, 2))
        docs.append((clustered(rng, terms[:1], related, rng.randrange(80, 111)), qid, 1))
        for _ in range(3):
            docs.append((scattered(rng, terms), qid, 0))
    vocab = [w for w, _ in embeddings()]
    while len(docs) < 50:
        body = filler(rng, rng.randrange(40, 80))
        if rng.random() < 0.5:
            body[rng.randrange(len(body))] = rng.choice(vocab)
        docs.append((body, None, None))

    order = list(range(len(docs)))
    rng.shuffle(order)
    ids = {}
    with open(os.path.join(OUT, "corpus.jsonl"), "w") as f:
        for n, i in enumerate(order, start=1):
            ids[i] = "MINI-%03d" % n
        for i in sorted(range(len(docs)), key=lambda i: ids[i]):
            words = docs[i][0]
            text = " ".join(w.capitalize() if k % 11 == 0 else w for k, w in enumerate(words)) + "."
            f.write(json.dumps({"id": ids[i], "text": text}) + "\n")

    with open(os.path.join(OUT, "queries.tsv"), "w") as f:
        for qid, text in QUERIES:
            f.write("%s\t%s\n" % (qid, text))

    with open(os.path.join(OUT, "qrels.txt"), "w") as f:
        for qid, _ in QUERIES:
            judged = sorted((ids[i], g) for i, (_, q, g) in enumerate(docs) if q == qid)
            for doc_id, grade in judged:
                f.write("%s 0 %s %d\n" % (qid, doc_id, grade))

    with open(os.path.join(OUT, "embeddings.txt"), "w") as f:
        for word, vec in embeddings():
            f.write(word + " " + " ".join(repr(float(x)) for x in vec) + "\n")


if __name__ == "__main__":
    main()
