"""Shared domain types, answer normalization, and request validation.

Every type here is an immutable value object with a canonical snake_case
JSON encoding (``to_dict`` / ``from_dict``).  Those encodings are the
gateway's wire format, the registry's file schema, and what the UI consumes,
so field names must never drift.
"""

from __future__ import annotations

import re
import unicodedata
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Mapping, Optional, Sequence
from urllib.parse import urlparse


class SkillMeshError(Exception):
    """Base class for every error raised by this package."""


class QAFormat(Enum):
    EXTRACTIVE = "extractive"
    MULTIPLE_CHOICE = "multiple_choice"
    ABSTRACTIVE = "abstractive"
    BOOLEAN = "boolean"

    @classmethod
    def parse(cls, value: str) -> "QAFormat":
        for fmt in cls:
            if fmt.value == value:
                return fmt
        raise ValueError(f"unknown qa format: {value!r}")


class AnswerStatus(Enum):
    OK = "ok"
    TIMEOUT = "timeout"
    ERROR = "error"


class Strategy(Enum):
    SELECTION = "selection"
    EARLY_FUSION = "early_fusion"
    LATE_FUSION = "late_fusion"

    @classmethod
    def parse(cls, value: str) -> "Strategy":
        for s in cls:
            if s.value == value:
                return s
        raise ValueError(f"unknown strategy: {value!r}")


_ARTICLES = frozenset({"a", "an", "the"})
# Memoized per-character punctuation test; normalize_answer is on the hot
# path of vote grouping and F1 scoring.
_PUNCT_CACHE: dict[str, bool] = {}


def _is_punct(ch: str) -> bool:
    hit = _PUNCT_CACHE.get(ch)
    if hit is None:
        hit = unicodedata.category(ch).startswith("P")
        _PUNCT_CACHE[ch] = hit
    return hit


def normalize_answer(text: str) -> str:
    """Canonical answer form: lowercase, no punctuation, no English
    articles, single-spaced.

    Punctuation means the Unicode ``P*`` categories and is deleted (not
    replaced by a space), so hyphenated tokens collapse.  Idempotent.
    """
    lowered = text.lower()
    stripped = "".join(ch for ch in lowered if not _is_punct(ch))
    tokens = [t for t in stripped.split() if t not in _ARTICLES]
    return " ".join(tokens)


def utc_now_iso() -> str:
    """ISO-8601 UTC timestamp; fixed width so string order == time order."""
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def new_request_id() -> str:
    return uuid.uuid4().hex


@dataclass(frozen=True)
class QARequest:
    question: str
    context: Optional[str] = None
    choices: Optional[tuple[str, ...]] = None
    request_id: str = field(default_factory=new_request_id)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"question": self.question, "request_id": self.request_id}
        if self.context is not None:
            out["context"] = self.context
        if self.choices is not None:
            out["choices"] = list(self.choices)
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "QARequest":
        choices = data.get("choices")
        return cls(
            question=str(data["question"]),
            context=data.get("context"),
            choices=tuple(str(c) for c in choices) if choices is not None else None,
            request_id=str(data.get("request_id") or new_request_id()),
        )


def validate_request(req: QARequest, fmt: QAFormat) -> list[str]:
    """All violated request invariants for ``fmt``; empty list means valid.

    Violations are data, not exceptions: callers decide whether to reject.
    Pure — identical inputs yield identical lists.
    """
    violations: list[str] = []
    if not req.question.strip():
        violations.append("empty question")
    if fmt is QAFormat.EXTRACTIVE and (req.context is None or not req.context.strip()):
        violations.append("missing context")
    if fmt is QAFormat.MULTIPLE_CHOICE:
        if req.choices is None:
            violations.append("missing choices")
        else:
            if any(not c.strip() for c in req.choices):
                violations.append("empty choice")
            if len(set(req.choices)) < 2:
                violations.append("fewer than 2 choices")
    return violations


@dataclass(frozen=True)
class AgentAnswer:
    """One agent's reply to one request, including how the call went.

    status=OK implies a nonempty answer and a confidence in [0, 1];
    failed calls carry empty text and confidence 0.
    """

    skill_id: str
    answer_text: str
    confidence: float
    latency_ms: float
    status: AnswerStatus
    error_message: Optional[str] = None

    @classmethod
    def ok(cls, skill_id: str, answer_text: str, confidence: float, latency_ms: float) -> "AgentAnswer":
        return cls(skill_id, answer_text, confidence, latency_ms, AnswerStatus.OK)

    @classmethod
    def timeout(cls, skill_id: str, latency_ms: float) -> "AgentAnswer":
        return cls(skill_id, "", 0.0, latency_ms, AnswerStatus.TIMEOUT)

    @classmethod
    def failed(cls, skill_id: str, latency_ms: float, message: str) -> "AgentAnswer":
        return cls(skill_id, "", 0.0, latency_ms, AnswerStatus.ERROR, error_message=message)

    def violations(self) -> list[str]:
        out = []
        if self.status is AnswerStatus.OK:
            if not self.answer_text:
                out.append("ok answer with empty text")
            if not 0.0 <= self.confidence <= 1.0:
                out.append("confidence outside [0, 1]")
        else:
            if self.answer_text:
                out.append("failed answer with nonempty text")
            if self.confidence != 0.0:
                out.append("failed answer with nonzero confidence")
        if self.latency_ms < 0:
            out.append("negative latency")
        return out

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "skill_id": self.skill_id,
            "answer_text": self.answer_text,
            "confidence": self.confidence,
            "latency_ms": self.latency_ms,
            "status": self.status.value,
        }
        if self.error_message is not None:
            out["error_message"] = self.error_message
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "AgentAnswer":
        return cls(
            skill_id=str(data["skill_id"]),
            answer_text=str(data.get("answer_text", "")),
            confidence=float(data.get("confidence", 0.0)),
            latency_ms=float(data.get("latency_ms", 0.0)),
            status=AnswerStatus(data["status"]),
            error_message=data.get("error_message"),
        )


_SKILL_ID_RE = re.compile(r"^[a-z0-9-]{1,64}$")


@dataclass(frozen=True)
class SkillDescriptor:
    """Identity card of one agent: where it lives, what format it speaks,
    and which dataset tags it was trained on."""

    skill_id: str
    endpoint: str
    format: QAFormat
    trained_on: frozenset[str]
    display_name: str = ""
    registered_at: str = ""

    def violations(self) -> list[str]:
        out = []
        if not _SKILL_ID_RE.match(self.skill_id):
            out.append("skill_id must be 1-64 lowercase alphanumerics or hyphens")
        parsed = urlparse(self.endpoint)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            out.append("endpoint is not a valid http(s) URL")
        if not self.trained_on or any(not t.strip() for t in self.trained_on):
            out.append("trained_on must be a nonempty set of dataset tags")
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "skill_id": self.skill_id,
            "endpoint": self.endpoint,
            "format": self.format.value,
            "trained_on": sorted(self.trained_on),
            "display_name": self.display_name,
            "registered_at": self.registered_at,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SkillDescriptor":
        return cls(
            skill_id=str(data["skill_id"]),
            endpoint=str(data["endpoint"]),
            format=QAFormat.parse(str(data["format"])),
            trained_on=frozenset(str(t) for t in data["trained_on"]),
            display_name=str(data.get("display_name", "")),
            registered_at=str(data.get("registered_at", "")),
        )


# Defaults applied to strategy params when a composition omits them.
DEFAULT_SCORE_THRESHOLD = 0.05
DEFAULT_TIMEOUT_MS = 10_000
DEFAULT_MAX_CONCURRENCY = 8
DEFAULT_AGGREGATOR = "max_confidence"


@dataclass(frozen=True)
class MetaSkillConfig:
    """A composition recipe: which member skills, combined how.

    ``params`` is strategy-specific:
      selection     — router_model_id, score_threshold
      early_fusion  — fused_tensor_path, weights?
      late_fusion   — aggregator, timeout_ms, max_concurrency
    """

    meta_id: str
    strategy: Strategy
    member_skill_ids: tuple[str, ...]
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        merged = dict(self.params)
        if self.strategy is Strategy.SELECTION:
            merged.setdefault("score_threshold", DEFAULT_SCORE_THRESHOLD)
        elif self.strategy is Strategy.LATE_FUSION:
            merged.setdefault("aggregator", DEFAULT_AGGREGATOR)
            merged.setdefault("timeout_ms", DEFAULT_TIMEOUT_MS)
            merged.setdefault("max_concurrency", DEFAULT_MAX_CONCURRENCY)
        object.__setattr__(self, "params", merged)

    def violations(self) -> list[str]:
        out = []
        if not self.meta_id.strip():
            out.append("empty meta_id")
        if not self.member_skill_ids:
            out.append("member_skill_ids is empty")
        if len(set(self.member_skill_ids)) != len(self.member_skill_ids):
            out.append("duplicate member_skill_ids")
        p = self.params
        if self.strategy is Strategy.SELECTION:
            if not str(p.get("router_model_id", "")).strip():
                out.append("selection requires router_model_id")
        elif self.strategy is Strategy.EARLY_FUSION:
            if not str(p.get("fused_tensor_path", "")).strip():
                out.append("early_fusion requires fused_tensor_path")
            weights = p.get("weights")
            if weights is not None:
                if len(weights) != len(self.member_skill_ids):
                    out.append("weights length differs from member_skill_ids")
                elif any(w <= 0 for w in weights):
                    out.append("weights must all be positive")
                elif abs(sum(weights) - 1.0) > 1e-9:
                    out.append("weights must sum to 1")
        elif self.strategy is Strategy.LATE_FUSION:
            if not isinstance(p.get("timeout_ms"), int) or p["timeout_ms"] <= 0:
                out.append("late_fusion timeout_ms must be a positive integer")
            if not isinstance(p.get("max_concurrency"), int) or p["max_concurrency"] < 1:
                out.append("late_fusion max_concurrency must be >= 1")
            if not str(p.get("aggregator", "")).strip():
                out.append("late_fusion requires an aggregator name")
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "meta_id": self.meta_id,
            "strategy": self.strategy.value,
            "member_skill_ids": list(self.member_skill_ids),
            "params": dict(self.params),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "MetaSkillConfig":
        return cls(
            meta_id=str(data["meta_id"]),
            strategy=Strategy.parse(str(data["strategy"])),
            member_skill_ids=tuple(str(s) for s in data["member_skill_ids"]),
            params=dict(data.get("params", {})),
        )


def answers_from_dicts(items: Sequence[Mapping[str, Any]]) -> tuple[AgentAnswer, ...]:
    return tuple(AgentAnswer.from_dict(d) for d in items)
