"""Late fusion: fan a request out to member agents in parallel, collect
their answers and confidences, and select a final answer.

The aggregators are pluggable heuristics behind a name lookup; both are
pure functions, so a fan-out's result can be re-aggregated freely.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, TYPE_CHECKING

import httpx

from .core import (
    AgentAnswer,
    AnswerStatus,
    MetaSkillConfig,
    QARequest,
    SkillDescriptor,
    SkillMeshError,
    Strategy,
    normalize_answer,
)

if TYPE_CHECKING:
    from .registry import Registry


class LateFusionError(SkillMeshError):
    pass


class NoSuccessfulAnswers(LateFusionError):
    def __init__(self) -> None:
        super().__init__("every member agent failed or timed out")


class UnknownAggregator(LateFusionError):
    def __init__(self, name: str):
        super().__init__(f"unknown aggregator: {name!r} (known: {', '.join(AGGREGATORS)})")
        self.name = name


@dataclass(frozen=True)
class FanOutPolicy:
    """How hard to push the parallel fan-out."""

    timeout_ms: int = 10_000
    max_concurrency: int = 8
    retry_count: int = 0

    def __post_init__(self) -> None:
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")
        if self.retry_count < 0:
            raise ValueError("retry_count must be >= 0")


@dataclass(frozen=True)
class FusionResult:
    final_answer: str
    winning_skill_id: str
    strategy: str
    member_answers: tuple[AgentAnswer, ...]
    vote_table: Optional[dict[str, float]]
    wall_time_ms: float

    def to_dict(self) -> dict:
        out = {
            "final_answer": self.final_answer,
            "winning_skill_id": self.winning_skill_id,
            "strategy": self.strategy,
            "member_answers": [a.to_dict() for a in self.member_answers],
            "wall_time_ms": self.wall_time_ms,
        }
        if self.vote_table is not None:
            out["vote_table"] = dict(self.vote_table)
        return out


def _query_agent(
    client: httpx.Client, skill: SkillDescriptor, req: QARequest, policy: FanOutPolicy
) -> AgentAnswer:
    url = skill.endpoint.rstrip("/") + "/query"
    start = time.perf_counter()
    last_failure: Optional[AgentAnswer] = None
    for _attempt in range(policy.retry_count + 1):
        try:
            resp = client.post(url, json=req.to_dict(), timeout=policy.timeout_ms / 1000.0)
        except httpx.TimeoutException:
            last_failure = AgentAnswer.timeout(skill.skill_id, _elapsed_ms(start))
            continue
        except httpx.HTTPError as exc:
            last_failure = AgentAnswer.failed(
                skill.skill_id, _elapsed_ms(start), f"transport error: {exc}"
            )
            continue
        latency = _elapsed_ms(start)
        if resp.status_code != 200:
            last_failure = AgentAnswer.failed(skill.skill_id, latency, f"HTTP {resp.status_code}")
            continue
        try:
            body = resp.json()
            answer_text = str(body["answer_text"])
            confidence = float(body["confidence"])
        except (ValueError, KeyError, TypeError):
            last_failure = AgentAnswer.failed(skill.skill_id, latency, "malformed response body")
            continue
        if not answer_text or not 0.0 <= confidence <= 1.0:
            last_failure = AgentAnswer.failed(
                skill.skill_id, latency, "response violates answer contract"
            )
            continue
        return AgentAnswer.ok(skill.skill_id, answer_text, confidence, latency)
    assert last_failure is not None
    return last_failure


def _elapsed_ms(start: float) -> float:
    return (time.perf_counter() - start) * 1000.0


def fan_out(
    req: QARequest,
    skills: Sequence[SkillDescriptor],
    policy: FanOutPolicy,
    client: httpx.Client,
) -> list[AgentAnswer]:
    """Query every skill concurrently; exactly one answer per skill, in the
    skills' input order no matter how calls complete or fail.

    At most ``policy.max_concurrency`` requests are in flight at once.
    Failures never raise here — they come back as Timeout/Error answers.
    """
    if not skills:
        raise ValueError("fan_out needs at least one skill")
    with ThreadPoolExecutor(max_workers=policy.max_concurrency) as pool:
        futures = [pool.submit(_query_agent, client, skill, req, policy) for skill in skills]
        return [f.result() for f in futures]


def aggregate_max_confidence(answers: Sequence[AgentAnswer]) -> FusionResult:
    """Pick the successful answer with the highest confidence; ties go to
    the earliest input position."""
    ok = [(i, a) for i, a in enumerate(answers) if a.status is AnswerStatus.OK]
    if not ok:
        raise NoSuccessfulAnswers()
    _, winner = max(ok, key=lambda ia: (ia[1].confidence, -ia[0]))
    return FusionResult(
        final_answer=winner.answer_text,
        winning_skill_id=winner.skill_id,
        strategy="max_confidence",
        member_answers=tuple(answers),
        vote_table=None,
        wall_time_ms=0.0,
    )


def aggregate_weighted_vote(answers: Sequence[AgentAnswer]) -> FusionResult:
    """Group successful answers by normalized text, sum confidences per
    group, and return the raw text of the winning group's most confident
    member.

    Group ties break by the earliest contributing input position; within
    the winning group, confidence ties break the same way.
    """
    ok = [(i, a) for i, a in enumerate(answers) if a.status is AnswerStatus.OK]
    if not ok:
        raise NoSuccessfulAnswers()

    votes: dict[str, float] = {}
    first_pos: dict[str, int] = {}
    best: dict[str, tuple[float, int, AgentAnswer]] = {}
    for i, a in ok:
        key = normalize_answer(a.answer_text)
        votes[key] = votes.get(key, 0.0) + a.confidence
        if key not in first_pos:
            first_pos[key] = i
        incumbent = best.get(key)
        if incumbent is None or (a.confidence, -i) > (incumbent[0], -incumbent[1]):
            best[key] = (a.confidence, i, a)
    winning_key = max(votes, key=lambda k: (votes[k], -first_pos[k]))
    winner = best[winning_key][2]
    return FusionResult(
        final_answer=winner.answer_text,
        winning_skill_id=winner.skill_id,
        strategy="weighted_vote",
        member_answers=tuple(answers),
        vote_table=votes,
        wall_time_ms=0.0,
    )


Aggregator = Callable[[Sequence[AgentAnswer]], FusionResult]

AGGREGATORS: dict[str, Aggregator] = {
    "max_confidence": aggregate_max_confidence,
    "weighted_vote": aggregate_weighted_vote,
}


def resolve_aggregator(name: str) -> Aggregator:
    try:
        return AGGREGATORS[name]
    except KeyError:
        raise UnknownAggregator(name) from None


def policy_from_params(params: dict) -> FanOutPolicy:
    return FanOutPolicy(
        timeout_ms=int(params.get("timeout_ms", 10_000)),
        max_concurrency=int(params.get("max_concurrency", 8)),
        retry_count=int(params.get("retry_count", 0)),
    )


def run_late_fusion(
    cfg: MetaSkillConfig,
    req: QARequest,
    registry: "Registry",
    client: httpx.Client,
) -> FusionResult:
    """Fan out to the configured members, then apply the configured
    aggregator; wall_time_ms covers the whole round."""
    from .registry import UnknownMember

    if cfg.strategy is not Strategy.LATE_FUSION:
        raise ValueError(f"meta-skill {cfg.meta_id!r} is not a late-fusion composition")
    skills = []
    for sid in cfg.member_skill_ids:
        desc = registry.get_skill(sid)
        if desc is None:
            raise UnknownMember(sid)
        skills.append(desc)
    aggregator = resolve_aggregator(str(cfg.params["aggregator"]))
    policy = policy_from_params(cfg.params)

    start = time.perf_counter()
    answers = fan_out(req, skills, policy, client)
    result = aggregator(answers)
    return replace(result, wall_time_ms=_elapsed_ms(start))
