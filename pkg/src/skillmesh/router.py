"""Question routing: classify which dataset a question resembles, then
select the skills trained on that dataset.

The classifier is a character n-gram (3-5) TF-IDF nearest-centroid model:
light, deterministic, and trainable from a handful of question corpora.
It sits behind plain functions so a heavier learned classifier can replace
it without touching the routing contract.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence, TYPE_CHECKING

from .core import SkillDescriptor, SkillMeshError

if TYPE_CHECKING:
    from .registry import Registry

NGRAM_MIN = 3
NGRAM_MAX = 5


class RouterError(SkillMeshError):
    pass


class EmptyCorpus(RouterError):
    def __init__(self, dataset_tag: str, detail: str = "corpus has no questions"):
        super().__init__(f"dataset {dataset_tag!r}: {detail}")
        self.dataset_tag = dataset_tag


class EmptyQuestion(RouterError):
    def __init__(self) -> None:
        super().__init__("question is empty")


class NoEligibleSkill(RouterError):
    def __init__(self) -> None:
        super().__init__("no dataset in the ranking has any registered skill")


@dataclass(frozen=True)
class RouterModel:
    """Trained classifier state: vocabulary, idf weights, and one unit-norm
    centroid per dataset (sparse, index -> value)."""

    model_id: str
    datasets: tuple[str, ...]
    vocabulary: dict[str, int]
    idf: tuple[float, ...]
    centroids: dict[str, dict[int, float]]
    ngram_range: tuple[int, int] = (NGRAM_MIN, NGRAM_MAX)

    def to_dict(self) -> dict[str, Any]:
        return {
            "model_id": self.model_id,
            "datasets": list(self.datasets),
            "ngram_range": list(self.ngram_range),
            "vocabulary": dict(self.vocabulary),
            "idf": list(self.idf),
            "centroids": {
                tag: {str(i): v for i, v in vec.items()} for tag, vec in self.centroids.items()
            },
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RouterModel":
        return cls(
            model_id=str(data["model_id"]),
            datasets=tuple(data["datasets"]),
            vocabulary={str(k): int(v) for k, v in data["vocabulary"].items()},
            idf=tuple(float(x) for x in data["idf"]),
            centroids={
                tag: {int(i): float(v) for i, v in vec.items()}
                for tag, vec in data["centroids"].items()
            },
            ngram_range=tuple(data.get("ngram_range", (NGRAM_MIN, NGRAM_MAX))),  # type: ignore[arg-type]
        )


@dataclass(frozen=True)
class RouteDecision:
    predicted_dataset: str
    score: float
    ranked: tuple[tuple[str, float], ...]
    selected_skills: tuple[SkillDescriptor, ...]
    fallback_used: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "predicted_dataset": self.predicted_dataset,
            "score": self.score,
            "ranked": [[tag, score] for tag, score in self.ranked],
            "selected_skills": [d.to_dict() for d in self.selected_skills],
            "fallback_used": self.fallback_used,
        }


def char_ngrams(text: str, lo: int = NGRAM_MIN, hi: int = NGRAM_MAX) -> Counter[str]:
    """Counts of character n-grams, n in [lo, hi], over the lowercased text.

    Punctuation and whitespace stay in: they carry question-style signal.
    """
    t = text.lower()
    counts: Counter[str] = Counter()
    for n in range(lo, hi + 1):
        for i in range(len(t) - n + 1):
            counts[t[i : i + n]] += 1
    return counts


def _embed(question: str, vocabulary: Mapping[str, int], idf: Sequence[float]) -> dict[int, float]:
    """Sparse TF-IDF vector, L2-normalized; all-out-of-vocabulary questions
    embed to the zero vector."""
    vec: dict[int, float] = {}
    for gram, count in char_ngrams(question).items():
        idx = vocabulary.get(gram)
        if idx is not None:
            vec[idx] = count * idf[idx]
    norm = math.sqrt(sum(v * v for v in vec.values()))
    if norm == 0.0:
        return {}
    return {i: v / norm for i, v in vec.items()}


def train_router(
    corpora: Mapping[str, Sequence[str]], model_id: str = "router"
) -> RouterModel:
    """Fit the nearest-centroid model.

    idf(t) = ln((1 + N) / (1 + df(t))) + 1 over all N questions; each
    dataset's centroid is the L2-normalized mean of its questions'
    L2-normalized TF-IDF vectors.
    """
    if not corpora:
        raise ValueError("need at least one dataset corpus")
    for tag, questions in corpora.items():
        if not questions:
            raise EmptyCorpus(tag)

    datasets = tuple(corpora.keys())
    df: Counter[str] = Counter()
    total_questions = 0
    per_question_grams: dict[str, list[Counter[str]]] = {}
    for tag, questions in corpora.items():
        grams_list = [char_ngrams(q) for q in questions]
        per_question_grams[tag] = grams_list
        total_questions += len(grams_list)
        for grams in grams_list:
            df.update(grams.keys())

    vocabulary = {gram: idx for idx, gram in enumerate(sorted(df))}
    idf = tuple(
        math.log((1 + total_questions) / (1 + df[gram])) + 1.0 for gram in sorted(df)
    )

    centroids: dict[str, dict[int, float]] = {}
    for tag in datasets:
        acc: dict[int, float] = {}
        for grams in per_question_grams[tag]:
            vec: dict[int, float] = {}
            for gram, count in grams.items():
                idx = vocabulary[gram]
                vec[idx] = count * idf[idx]
            norm = math.sqrt(sum(v * v for v in vec.values()))
            if norm == 0.0:
                continue
            for i, v in vec.items():
                acc[i] = acc.get(i, 0.0) + v / norm
        # Mean then renormalize; the question count divides out of cosine,
        # so normalize the sum directly.
        cnorm = math.sqrt(sum(v * v for v in acc.values()))
        if cnorm == 0.0:
            raise EmptyCorpus(tag, "corpus has no usable character n-grams")
        centroids[tag] = {i: v / cnorm for i, v in acc.items()}

    return RouterModel(
        model_id=model_id,
        datasets=datasets,
        vocabulary=vocabulary,
        idf=idf,
        centroids=centroids,
    )


def classify(model: RouterModel, question: str) -> list[tuple[str, float]]:
    """Cosine similarity to every dataset centroid, best first.

    Ties break by the dataset order fixed at training time, so rankings are
    identical across runs and platforms.
    """
    if not question.strip():
        raise EmptyQuestion()
    qvec = _embed(question, model.vocabulary, model.idf)
    order = {tag: i for i, tag in enumerate(model.datasets)}
    scores = []
    for tag in model.datasets:
        centroid = model.centroids[tag]
        # Both vectors are unit norm (or zero), so the dot product is cosine.
        if len(qvec) <= len(centroid):
            dot = sum(v * centroid.get(i, 0.0) for i, v in qvec.items())
        else:
            dot = sum(v * qvec.get(i, 0.0) for i, v in centroid.items())
        scores.append((tag, dot))
    scores.sort(key=lambda ts: (-ts[1], order[ts[0]]))
    return scores


def route(
    model: RouterModel,
    question: str,
    registry: "Registry",
    score_threshold: float = 0.05,
) -> RouteDecision:
    """Map a question to the skills trained on its predicted dataset.

    When the top score falls below ``score_threshold`` or the predicted
    dataset has no registered skills, walk down the ranking to the first
    dataset that has any, flagging the decision as a fallback.
    """
    ranked = classify(model, question)
    predicted_dataset, top_score = ranked[0]

    direct = registry.skills_for_dataset(predicted_dataset)
    if top_score >= score_threshold and direct:
        return RouteDecision(
            predicted_dataset=predicted_dataset,
            score=top_score,
            ranked=tuple(ranked),
            selected_skills=tuple(direct),
            fallback_used=False,
        )
    for tag, _score in ranked:
        skills = registry.skills_for_dataset(tag)
        if skills:
            return RouteDecision(
                predicted_dataset=predicted_dataset,
                score=top_score,
                ranked=tuple(ranked),
                selected_skills=tuple(skills),
                fallback_used=True,
            )
    raise NoEligibleSkill()


def save_model(model: RouterModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> RouterModel:
    return RouterModel.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_corpora_dir(path: str | Path) -> dict[str, list[str]]:
    """Read a training directory: one ``<dataset_tag>.txt`` per dataset,
    one question per line, UTF-8; blank lines ignored."""
    root = Path(path)
    corpora: dict[str, list[str]] = {}
    for file in sorted(root.glob("*.txt")):
        lines = [ln.strip() for ln in file.read_text(encoding="utf-8").splitlines()]
        corpora[file.stem] = [ln for ln in lines if ln]
    if not corpora:
        raise ValueError(f"no <dataset_tag>.txt files under {root}")
    return corpora
