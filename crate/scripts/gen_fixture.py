#!/usr/bin/env python3
"""Generate the seeded 200-record test corpus.

Usage: python3 scripts/gen_fixture.py [OUT]

The output is line-delimited JSON in the ingest format. It contains near-duplicate
titles, front matter, non-English records, spelling variants of keywords and a
sprinkling of gold labels, so every pipeline stage has something to do.
"""

import json
import random
import sys

SEED = 20221231
N_LINES = 200
DEFAULT_OUT = "crates/core/tests/fixtures/corpus200.jsonl"

# field id -> (title phrases, abstract phrases, year weights over 2010..2022)
TOPICS = {
    "machine-translation": (
        ["Neural Machine Translation", "Machine Translation"],
        ["machine translation", "translation"],
        "flat",
    ),
    "language-models": (
        ["Pretrained Language Models", "Language Modeling"],
        ["language model", "language models"],
        "rising",
    ),
    "summarization": (
        ["Abstractive Summarization", "Summarisation"],
        ["summarization", "summary", "summarisation"],
        "rising",
    ),
    "syntactic-parsing": (
        ["Dependency Parsing", "Constituency Parsing"],
        ["dependency parsing", "parser", "treebank"],
        "falling",
    ),
    "tagging": (
        ["Part-of-Speech Tagging", "Sequence Labeling"],
        ["sequence labeling", "tagger"],
        "falling",
    ),
    "sentiment-analysis": (
        ["Sentiment Analysis", "Opinion Mining"],
        ["sentiment analysis", "polarity"],
        "flat",
    ),
    "question-answering": (
        ["Open-Domain Question Answering", "Question Answering"],
        ["question answering", "answer selection"],
        "rising",
    ),
    "ethical-nlp": (
        ["Gender Bias", "Fairness"],
        ["bias", "fairness"],
        "rising",
    ),
    "low-resource-nlp": (
        ["Low-Resource Settings", "Few-Shot Learning"],
        ["low-resource", "few-shot"],
        "rising",
    ),
    "topic-modeling": (
        ["Topic Models", "Latent Dirichlet Allocation"],
        ["topic model", "topic models"],
        "falling",
    ),
    "named-entity-recognition": (
        ["Named Entity Recognition"],
        ["named entity recognition", "named entities"],
        "flat",
    ),
    "speech-recognition": (
        ["Speech Recognition", "Automatic Speech Recognition"],
        ["speech recognition", "asr"],
        "flat",
    ),
}

YEARS = list(range(2010, 2023))
SHAPES = {
    "flat": [1.0] * len(YEARS),
    "rising": [0.3 + 0.25 * i for i in range(len(YEARS))],
    "falling": [3.3 - 0.25 * i for i in range(len(YEARS))],
}

TITLE_FRAMES = [
    "{a} for {b}",
    "Improving {a} with {b}",
    "A Study of {a}",
    "{a}: Revisiting {b}",
    "Towards Better {a}",
    "On the Limits of {a}",
]
FILLER = [
    "We propose a simple method and evaluate it on standard benchmarks.",
    "Experiments show consistent gains over strong baselines.",
    "Our analysis reveals several open problems.",
    "We release our code and data.",
    "The approach is evaluated on three datasets.",
    "Results are competitive with prior work.",
]
ACCENTS = {"e": "é", "a": "à", "o": "ö", "u": "ü"}
VENUES = ["ACL", "EMNLP", "NAACL", "COLING", "EACL", "TACL"]


def pick_year(rng, shape):
    return rng.choices(YEARS, weights=SHAPES[shape])[0]


def make_abstract(rng, fields):
    parts = []
    for f in fields:
        mentions = rng.choice([0, 1, 1, 2, 2, 3])
        for _ in range(mentions):
            parts.append(f"This work addresses {rng.choice(TOPICS[f][1])}.")
    parts.extend(rng.sample(FILLER, 2))
    rng.shuffle(parts)
    return " ".join(parts)


def base_record(rng, n):
    fields = rng.sample(sorted(TOPICS), rng.choice([1, 1, 2]))
    primary = fields[0]
    a = rng.choice(TOPICS[primary][0])
    b = rng.choice(TOPICS[fields[-1]][0]) if len(fields) > 1 else rng.choice(["Transfer", "Data", "Evaluation"])
    title = rng.choice(TITLE_FRAMES).format(a=a, b=b)
    rec = {
        "id": f"p{n:03d}",
        "title": title,
        "abstract": make_abstract(rng, fields),
        "year": pick_year(rng, TOPICS[primary][2]),
        "venue": rng.choice(VENUES),
    }
    roll = rng.random()
    if roll < 0.8:
        rec["language"] = "en"
    elif roll < 0.9:
        rec["language"] = rng.choice(["de", "fr", "es"])
    if rng.random() < 0.2:
        rec["labels"] = [primary]
    return rec


def perturb_title(rng, title):
    kind = rng.choice(["case", "punct", "accent"])
    if kind == "case":
        return title.upper()
    if kind == "punct":
        return title.replace(" ", "  ").replace(":", " -") + "."
    out = []
    for c in title:
        out.append(ACCENTS[c] if c in ACCENTS and rng.random() < 0.5 else c)
    return "".join(out)


def generate():
    rng = random.Random(SEED)
    lines = [
        {"id": "front-001", "title": "Preface", "abstract": "", "year": 2019, "venue": "ACL", "language": "en"},
        {"id": "front-002", "title": "Message from the Program Chairs", "abstract": "", "year": 2021, "venue": "EMNLP"},
    ]
    seen_titles = set()
    n = 0
    while len(lines) < N_LINES - 14:
        rec = base_record(rng, n)
        n += 1
        if rec["title"].lower() in seen_titles:
            continue
        seen_titles.add(rec["title"].lower())
        lines.append(rec)
    originals = [r for r in lines if r["id"].startswith("p")]
    for i, orig in enumerate(rng.sample(originals, 14)):
        dup = dict(orig)
        dup["id"] = f"d{i:03d}"
        dup["title"] = perturb_title(rng, orig["title"])
        dup["year"] = orig["year"] + rng.choice([0, 0, 1])
        dup["year"] = min(dup["year"], 2022)
        if rng.random() < 0.5:
            dup["abstract"] = ""
        if rng.random() < 0.5:
            dup["labels"] = [rng.choice(sorted(TOPICS))]
        lines.append(dup)
    rng.shuffle(lines)
    return lines


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else DEFAULT_OUT
    with open(out, "w", encoding="utf-8", newline="\n") as f:
        for rec in generate():
            f.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
