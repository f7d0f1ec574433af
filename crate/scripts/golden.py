#!/usr/bin/env python3
"""Straightforward reference implementation used to produce golden files.

Usage: python3 scripts/golden.py [FIXTURE_DIR]

Reads corpus200.jsonl and the default taxonomy, then writes:

- golden_stats.json   ingest statistics (parse, deduplicate, summarise)
- golden_labels.jsonl labels of every parsed record after weak labeling with
                      the default matcher settings, no ancestor propagation
- golden_series.csv   non-zero (field, year) counts after deduplication,
                      labeling with propagation and research filtering

Written independently of the Rust code: plain loops, no shared logic.
"""

import csv
import json
import os
import re
import sys
import unicodedata

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
TAXONOMY = os.path.join(ROOT, "crates", "core", "data", "nlp_taxonomy.txt")
DEFAULT_DIR = os.path.join(ROOT, "crates", "core", "tests", "fixtures")

THRESHOLD = 2
MAX_DISTANCE = 1
MIN_FUZZY_LEN = 4
OBSERVATION = (1952, 2022)
NON_RESEARCH = [
    r"^preface\b",
    r"^foreword\b",
    r"^front ?matter\b",
    r"^table of contents$",
    r"^contents$",
    r"^author index$",
    r"^index$",
    r"^proceedings of\b",
    r"^message from\b",
    r"^(organizing|program) committee$",
    r"^introduction to the special issue\b",
]


def load_taxonomy(path):
    nodes, current = [], None
    with open(path, encoding="utf-8") as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line == "[field]":
                current = {}
                nodes.append(current)
                continue
            key, _, value = line.partition("=")
            current[key.strip()] = value.strip()
    out = {}
    for n in nodes:
        split = lambda v: [x.strip() for x in v.split(",") if x.strip()]
        out[n["id"]] = {
            "parents": split(n.get("parents", "")),
            "keywords": sorted(set(split(n.get("keywords", "")))),
        }
    return out


def ancestors(tax, fid):
    seen, stack = set(), list(tax[fid]["parents"])
    while stack:
        p = stack.pop()
        if p not in seen:
            seen.add(p)
            stack.extend(tax[p]["parents"])
    return seen


def leaves(tax):
    has_child = {p for n in tax.values() for p in n["parents"]}
    return {f for f in tax if f not in has_child}


def tokenize(text):
    tokens, cur = [], ""
    for c in text:
        if c.isalnum():
            cur += c.lower()
        elif cur:
            tokens.append(cur)
            cur = ""
    if cur:
        tokens.append(cur)
    return tokens


def levenshtein(a, b):
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def span_distance(text_tokens, kw_tokens):
    worst = 0
    for kw, tok in zip(kw_tokens, text_tokens):
        cap = 0 if len(kw) < MIN_FUZZY_LEN else MAX_DISTANCE
        d = levenshtein(kw, tok)
        if d > cap:
            return None
        worst = max(worst, d)
    return worst


def field_hits(tokens, keywords):
    """All keyword spans, then a left-to-right pick of non-overlapping ones."""
    cands = []
    for kw in keywords:
        kt = tokenize(kw)
        if not kt:
            continue
        for start in range(len(tokens) - len(kt) + 1):
            d = span_distance(tokens[start:start + len(kt)], kt)
            if d is not None:
                cands.append((start, -len(kt), d, kw))
    cands.sort()
    picked, free = [], 0
    for start, neg_len, d, kw in cands:
        if start >= free:
            picked.append(d)
            free = start - neg_len
    return picked


def heuristic_labels(rec, tax):
    title, abstract = tokenize(rec["title"]), tokenize(rec.get("abstract", ""))
    out = {}
    for fid in sorted(tax):
        kws = tax[fid]["keywords"]
        dists = field_hits(title, kws) + field_hits(abstract, kws)
        if len(dists) >= THRESHOLD:
            out[fid] = "keyword-match" if max(dists) == 0 else "fuzzy-match"
    return out


def parse(path):
    records = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                r = json.loads(line)
                r["gold"] = sorted(set(r.get("labels", [])))
                records.append(r)
    return records


def norm_title(t):
    t = "".join(c for c in unicodedata.normalize("NFKD", t) if not unicodedata.combining(c))
    t = "".join(c if c.isalnum() else " " for c in t.lower())
    return " ".join(t.split())


def dedup(records):
    groups = {}
    for r in records:
        groups.setdefault(norm_title(r["title"]), []).append(r)
    merged = []
    for key, members in groups.items():
        members = sorted(members, key=lambda r: (r["year"], r["id"], r["title"], r.get("abstract", "")))
        base = dict(members[0])
        base["gold"] = sorted(set(g for m in members for g in m["gold"]))
        base["abstract"] = next((m.get("abstract", "") for m in members if m.get("abstract")), "")
        base["language"] = next((m["language"] for m in members if m.get("language")), None)
        merged.append((base["year"], key, base))
    merged.sort(key=lambda x: (x[0], x[1]))
    return [m[2] for m in merged]


def all_labels(rec, tax, propagate):
    labels = {g: "gold" for g in rec["gold"]}
    for f, p in heuristic_labels(rec, tax).items():
        labels.setdefault(f, p)
    if propagate:
        for f in list(labels):
            for a in ancestors(tax, f):
                labels.setdefault(a, "ancestor-propagation")
    return labels


def is_research(rec, labels, leaf_set):
    title = norm_title(rec["title"])
    if any(re.search(p, title) for p in NON_RESEARCH):
        return False
    lang = rec.get("language")
    if lang is not None:
        l = lang.strip().lower()
        if not (l in ("en", "eng", "english") or l.startswith("en-") or l.startswith("en_")):
            return False
    return not leaf_set <= set(labels)


def stats(records):
    per_class = {}
    for r in records:
        for g in r["gold"]:
            per_class[g] = per_class.get(g, 0) + 1
    n = len(records)
    total = sum(len(r["gold"]) for r in records)
    ordered = sorted(per_class.items())
    max_c = min(ordered, key=lambda kv: (-kv[1], kv[0])) if ordered else None
    min_c = min(ordered, key=lambda kv: (kv[1], kv[0])) if ordered else None
    return {
        "n_records": n,
        "mean_labels_per_record": total / n if n else None,
        "per_class_counts": dict(ordered),
        "min_class": {"field": min_c[0], "count": min_c[1]} if min_c else None,
        "max_class": {"field": max_c[0], "count": max_c[1]} if max_c else None,
        "mean_class": sum(per_class.values()) / len(per_class) if per_class else None,
    }


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else DEFAULT_DIR
    tax = load_taxonomy(TAXONOMY)
    raw = parse(os.path.join(out_dir, "corpus200.jsonl"))
    deduped = dedup(raw)

    with open(os.path.join(out_dir, "golden_stats.json"), "w", encoding="utf-8") as f:
        json.dump({"input_records": len(raw), "stats": stats(deduped)}, f, indent=2, sort_keys=True)
        f.write("\n")

    with open(os.path.join(out_dir, "golden_labels.jsonl"), "w", encoding="utf-8") as f:
        for r in raw:
            f.write(json.dumps({"id": r["id"], "labels": all_labels(r, tax, False)}, sort_keys=True) + "\n")

    leaf_set = leaves(tax)
    counts = {}
    for r in deduped:
        labels = all_labels(r, tax, True)
        if not is_research(r, labels, leaf_set):
            continue
        if not OBSERVATION[0] <= r["year"] <= OBSERVATION[1]:
            continue
        for fid in labels:
            counts[(fid, r["year"])] = counts.get((fid, r["year"]), 0) + 1
    with open(os.path.join(out_dir, "golden_series.csv"), "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["field_id", "year", "count"])
        for (fid, year), c in sorted(counts.items()):
            w.writerow([fid, year, c])


if __name__ == "__main__":
    main()
