"""Independent reference implementations used as test oracles.

Everything here is written from the operation definitions alone, in plain
Python, without touching the package's internals — keep it that way so the
checks stay meaningful.
"""

from __future__ import annotations

import math
import re
import string
from collections import Counter


# -- element-loop averaging (weight fusion oracle) ------------------------


def loop_average(
    maps: list[dict[str, list[float]]], weights: list[float] | None = None
) -> dict[str, list[float]]:
    """Naive double-loop weighted mean over flat per-name value lists."""
    k = len(maps)
    if weights is None:
        weights = [1.0 / k] * k
    out: dict[str, list[float]] = {}
    for name in maps[0]:
        length = len(maps[0][name])
        values = []
        for i in range(length):
            acc = 0.0
            for w, m in zip(weights, maps):
                acc += w * m[name][i]
            values.append(acc)
        out[name] = values
    return out


# -- SQuAD-convention token F1 (reference implementation) -----------------

_ARTICLE_RE = re.compile(r"\b(a|an|the)\b")


def reference_normalize(text: str) -> str:
    text = text.lower()
    text = "".join(ch for ch in text if ch not in string.punctuation)
    text = _ARTICLE_RE.sub(" ", text)
    return " ".join(text.split())


def reference_token_f1(prediction: str, golds: list[str]) -> float:
    best = 0.0
    pred = reference_normalize(prediction).split()
    for gold_text in golds:
        gold = reference_normalize(gold_text).split()
        if not pred and not gold:
            score = 100.0
        elif not pred or not gold:
            score = 0.0
        else:
            overlap = sum((Counter(pred) & Counter(gold)).values())
            if overlap == 0:
                score = 0.0
            else:
                p = overlap / len(pred)
                r = overlap / len(gold)
                score = 100.0 * 2 * p * r / (p + r)
        best = max(best, score)
    return best


# -- brute-force TF-IDF nearest centroid (router oracle) ------------------


def _grams(text: str) -> Counter[str]:
    t = text.lower()
    counts: Counter[str] = Counter()
    for n in (3, 4, 5):
        for i in range(len(t) - n + 1):
            counts[t[i : i + n]] += 1
    return counts


def brute_force_centroid_scores(
    corpora: dict[str, list[str]], question: str
) -> list[tuple[str, float]]:
    """Recompute TF-IDF centroids from the raw corpora and score the
    question by cosine against each; returns (tag, score) best-first with
    ties broken by corpora key order.

    Works directly on n-gram strings (no integer vocabulary) so it shares
    no code path with the trained model.
    """
    all_questions = [q for qs in corpora.values() for q in qs]
    n_total = len(all_questions)
    df: Counter[str] = Counter()
    for q in all_questions:
        df.update(_grams(q).keys())
    idf = {g: math.log((1 + n_total) / (1 + d)) + 1.0 for g, d in df.items()}

    def embed(text: str) -> dict[str, float]:
        vec = {g: c * idf[g] for g, c in _grams(text).items() if g in idf}
        norm = math.sqrt(sum(v * v for v in vec.values()))
        return {g: v / norm for g, v in vec.items()} if norm else {}

    centroids: dict[str, dict[str, float]] = {}
    for tag, questions in corpora.items():
        acc: dict[str, float] = {}
        count = 0
        for q in questions:
            vec = embed(q)
            if not vec:
                continue
            count += 1
            for g, v in vec.items():
                acc[g] = acc.get(g, 0.0) + v
        mean = {g: v / count for g, v in acc.items()} if count else {}
        norm = math.sqrt(sum(v * v for v in mean.values()))
        centroids[tag] = {g: v / norm for g, v in mean.items()} if norm else {}

    qvec = embed(question)
    order = {tag: i for i, tag in enumerate(corpora)}
    scores = [
        (tag, sum(v * centroids[tag].get(g, 0.0) for g, v in qvec.items()))
        for tag in corpora
    ]
    scores.sort(key=lambda ts: (-ts[1], order[ts[0]]))
    return scores


def brute_force_top_dataset(corpora: dict[str, list[str]], question: str) -> str:
    return brute_force_centroid_scores(corpora, question)[0][0]


# -- brute-force confidence-weighted voting (aggregation oracle) ----------


def brute_force_weighted_vote(
    answers: list[tuple[str, str, float]], normalize
) -> tuple[str, dict[str, float]]:
    """answers = [(skill_id, answer_text, confidence), ...] of OK answers in
    input order; returns (winning skill_id, vote table)."""
    table: dict[str, float] = {}
    for _sid, text, conf in answers:
        key = normalize(text)
        table[key] = table.get(key, 0.0) + conf
    best_key = None
    for key in table:
        if best_key is None or table[key] > table[best_key]:
            best_key = key
        elif table[key] == table[best_key]:
            # earlier first-contribution position wins
            def first_pos(k: str) -> int:
                return next(i for i, (_s, t, _c) in enumerate(answers) if normalize(t) == k)

            if first_pos(key) < first_pos(best_key):
                best_key = key
    assert best_key is not None
    members = [
        (conf, -i, sid)
        for i, (sid, text, conf) in enumerate(answers)
        if normalize(text) == best_key
    ]
    members.sort(reverse=True)
    return members[0][2], table
