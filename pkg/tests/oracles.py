"""Independent oracles used by the test suite.

Nothing in here imports the fhirmap package: each oracle is a separate,
deliberately plain implementation that the library is checked against.
"""
from __future__ import annotations

import hashlib
import json
import random
import string
from pathlib import Path

GOLDEN_PATH = Path(__file__).parent / "data" / "chunker_golden.json"


# --- reference text splitter (straight-line work-list implementation) ---

def reference_split_spans(text, chunk_size, chunk_overlap, separators=("\n\n", "\n", " ", "")):
    """Chunk spans computed with an explicit work list and a flat merge loop."""
    if text == "":
        return []

    # phase 1: atomic piece spans, each at most chunk_size long
    pieces = []
    work = [(0, len(text), 0)]
    while work:
        lo, hi, level = work.pop()
        if hi - lo <= chunk_size:
            pieces.append((lo, hi))
            continue
        sep = separators[level] if level < len(separators) else ""
        if sep == "":
            for pos in range(lo, hi):
                pieces.append((pos, pos + 1))
            continue
        cut_list = []
        at = lo
        while True:
            found = text.find(sep, at, hi)
            if found < 0:
                break
            boundary = found + len(sep)
            if boundary < hi:
                cut_list.append(boundary)
            at = boundary
        if not cut_list:
            work.append((lo, hi, level + 1))
            continue
        prev = lo
        for boundary in cut_list + [hi]:
            if boundary - prev <= chunk_size:
                pieces.append((prev, boundary))
            else:
                work.append((prev, boundary, level + 1))
            prev = boundary
    pieces.sort()

    # phase 2: greedy merge with overlap carried back from each emitted chunk
    spans = []
    cursor = 0
    begin = 0
    total = len(pieces)
    while cursor < total:
        last = cursor
        while last < total and pieces[last][1] - begin <= chunk_size:
            last += 1
        spans.append((begin, pieces[last - 1][1]))
        cursor = last
        if cursor == total:
            break
        next_len = pieces[cursor][1] - pieces[cursor][0]
        back = chunk_overlap if chunk_overlap <= chunk_size - next_len else chunk_size - next_len
        begin = pieces[cursor][0] - back
    return spans


# --- synthetic corpus for the chunker golden file ---

def synthetic_chunker_corpus(count=100, max_length=10000, seed=20240917):
    """Deterministic mixed-texture documents with lengths spread over [0, max_length]."""
    rng = random.Random(seed)
    words = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
             "iota", "kappa", "value", "region", "signal", "cortex", "volume"]
    docs = [""]
    while len(docs) < count:
        target = rng.randint(1, max_length)
        parts = []
        length = 0
        while length < target:
            style = rng.random()
            if style < 0.55:
                sentence = " ".join(rng.choice(words) for _ in range(rng.randint(3, 30)))
                tail = rng.choice([" ", "\n", "\n\n"])
                parts.append(sentence + tail)
            elif style < 0.8:
                line = "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(40, 120)))
                parts.append(line + "\n")
            else:
                run = "".join(rng.choice("xyz0123456789") for _ in range(rng.randint(100, 3000)))
                parts.append(run)
            length = sum(len(p) for p in parts)
        docs.append("".join(parts)[:target])
    return docs


def fixed_lines_document(lines=45, width=100):
    """A block of uniform lines: each line is width chars then a newline."""
    return "".join(("L%03d:" % i).ljust(width, ".") + "\n" for i in range(lines))


def write_chunker_golden(path=GOLDEN_PATH, chunk_size=2000, chunk_overlap=200):
    docs = synthetic_chunker_corpus()
    entries = []
    for number, doc in enumerate(docs):
        spans = reference_split_spans(doc, chunk_size, chunk_overlap)
        entries.append(
            {
                "doc": number,
                "length": len(doc),
                "sha256": hashlib.sha256(doc.encode("utf-8")).hexdigest(),
                "spans": [list(span) for span in spans],
            }
        )
    fixed = fixed_lines_document()
    payload = {
        "chunk_size": chunk_size,
        "chunk_overlap": chunk_overlap,
        "documents": entries,
        "fixed_case": {
            "length": len(fixed),
            "sha256": hashlib.sha256(fixed.encode("utf-8")).hexdigest(),
            "spans": [list(span) for span in reference_split_spans(fixed, chunk_size, chunk_overlap)],
        },
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
    return payload


# --- brute-force scorer over raw path strings ---

def brute_force_scores(rows):
    """(score, resource match score) from (pred text or None, gt text) rows, naive loops."""
    n = len(rows)
    exact = 0
    partial = 0
    credit = 0.0
    for pred, gt in rows:
        gt_blocks = gt.split(".")
        if pred is None or pred == "":
            continue
        pred_blocks = pred.split(".")
        if pred_blocks == gt_blocks:
            exact += 1
        elif pred_blocks[0] == gt_blocks[0]:
            partial += 1
            shared = 0
            union = []
            for block in pred_blocks + gt_blocks:
                if block not in union:
                    union.append(block)
            for block in union:
                if block in pred_blocks and block in gt_blocks:
                    shared += 1
            credit += shared / len(union)
    return (exact + credit) / n * 100.0, (exact + partial) / n * 100.0


def random_path(rng, resources, elements, max_blocks=5):
    blocks = [rng.choice(resources)]
    for _ in range(rng.randint(0, max_blocks - 1)):
        blocks.append(rng.choice(elements))
    return ".".join(blocks)


def random_pair_sets(count=1000, seed=4242, resources=20, elements=50):
    """Random (pred, gt) row sets over a fixed resource/element alphabet."""
    rng = random.Random(seed)
    resource_names = [f"Res{i}" for i in range(resources)]
    element_names = [f"el{i}" for i in range(elements)]
    sets = []
    for _ in range(count):
        rows = []
        for _ in range(rng.randint(1, 30)):
            gt = random_path(rng, resource_names, element_names)
            roll = rng.random()
            if roll < 0.15:
                pred = None
            elif roll < 0.35:
                pred = gt
            elif roll < 0.7:
                # same resource, perturbed tail
                pred = random_path(rng, [gt.split(".")[0]], element_names)
            else:
                pred = random_path(rng, resource_names, element_names)
            rows.append((pred, gt))
        sets.append(rows)
    return sets


# --- brute-force nearest neighbours (pure python) ---

def brute_force_knn(stored, query, k):
    """Ranked indices by dot product, ties resolved toward earlier insertion."""
    sims = []
    for row in stored:
        acc = 0.0
        for a, b in zip(row, query):
            acc += a * b
        sims.append(acc)
    order = sorted(range(len(sims)), key=lambda i: (-sims[i], i))
    return order[:k]


if __name__ == "__main__":
    result = write_chunker_golden()
    print(f"wrote {GOLDEN_PATH} with {len(result['documents'])} documents")
