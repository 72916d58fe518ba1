"""Latency/quality bench harness: seeded workloads replayed against
composed systems through the gateway, reporting per-system mean ± std
latency and token F1.

Within one system's run requests go out strictly one at a time, so the
numbers reflect what a single user would see; the system under test still
exercises its own internal parallelism.  The ± is computed across seed-level
means, and shuffling is seeded, so F1 aggregates are reproducible while
latencies vary with the machine.
"""

from __future__ import annotations

import csv
import json
import platform
import random
import statistics
import sys
import time
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import httpx

from .core import QAFormat, QARequest, SkillDescriptor, SkillMeshError, normalize_answer
from .latefusion import FanOutPolicy, fan_out


class BenchError(SkillMeshError):
    pass


class InvalidSuite(BenchError):
    def __init__(self, detail: str):
        super().__init__(f"invalid bench suite: {detail}")


class SystemUnavailable(BenchError):
    def __init__(self, system_id: str):
        super().__init__(f"system not registered on the gateway: {system_id}")
        self.system_id = system_id


def token_f1(prediction: str, golds: Sequence[str]) -> float:
    """SQuAD-style token F1 in [0, 100]: max over golds of the harmonic
    mean of token precision/recall on normalized text.

    Both sides normalizing to empty counts as a perfect 100; exactly one
    empty side scores 0.
    """
    if not golds:
        raise ValueError("golds must be nonempty")
    pred_tokens = normalize_answer(prediction).split()
    best = 0.0
    for gold in golds:
        gold_tokens = normalize_answer(gold).split()
        if not pred_tokens and not gold_tokens:
            score = 100.0
        elif not pred_tokens or not gold_tokens:
            score = 0.0
        else:
            common = Counter(pred_tokens) & Counter(gold_tokens)
            num_same = sum(common.values())
            if num_same == 0:
                score = 0.0
            else:
                precision = num_same / len(pred_tokens)
                recall = num_same / len(gold_tokens)
                score = 100.0 * 2 * precision * recall / (precision + recall)
        best = max(best, score)
    return best


@dataclass(frozen=True)
class WorkloadItem:
    request: QARequest
    gold_answers: tuple[str, ...]
    dataset_tag: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "request": self.request.to_dict(),
            "gold_answers": list(self.gold_answers),
            "dataset_tag": self.dataset_tag,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "WorkloadItem":
        return cls(
            request=QARequest.from_dict(data["request"]),
            gold_answers=tuple(str(g) for g in data["gold_answers"]),
            dataset_tag=str(data["dataset_tag"]),
        )


@dataclass(frozen=True)
class BenchSuite:
    systems: tuple[str, ...]
    workload: tuple[WorkloadItem, ...]
    seeds: tuple[int, ...]
    questions_per_dataset: int = 20
    warmup_requests: int = 5

    def validate(self) -> None:
        if not self.systems:
            raise InvalidSuite("no systems")
        if not self.workload:
            raise InvalidSuite("empty workload")
        if not self.seeds:
            raise InvalidSuite("no seeds")
        if len(set(self.seeds)) != len(self.seeds):
            raise InvalidSuite("seeds must be distinct")
        if any(not item.gold_answers for item in self.workload):
            raise InvalidSuite("every workload item needs at least one gold answer")
        if self.warmup_requests < 0:
            raise InvalidSuite("warmup_requests must be nonnegative")

    def to_dict(self) -> dict[str, Any]:
        return {
            "systems": list(self.systems),
            "workload": [item.to_dict() for item in self.workload],
            "seeds": list(self.seeds),
            "questions_per_dataset": self.questions_per_dataset,
            "warmup_requests": self.warmup_requests,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "BenchSuite":
        return cls(
            systems=tuple(str(s) for s in data["systems"]),
            workload=tuple(WorkloadItem.from_dict(w) for w in data["workload"]),
            seeds=tuple(int(s) for s in data["seeds"]),
            questions_per_dataset=int(data.get("questions_per_dataset", 20)),
            warmup_requests=int(data.get("warmup_requests", 5)),
        )

    @classmethod
    def load(cls, path: str | Path) -> "BenchSuite":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class SeedStats:
    seed: int
    latency_mean_ms: float
    f1: float

    def to_dict(self) -> dict[str, Any]:
        return {"seed": self.seed, "latency_mean_ms": self.latency_mean_ms, "f1": self.f1}


@dataclass(frozen=True)
class SystemReport:
    mean_latency_ms: float
    std_latency_ms: float
    f1_mean: float
    per_seed: tuple[SeedStats, ...]
    failures: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "mean_latency_ms": self.mean_latency_ms,
            "std_latency_ms": self.std_latency_ms,
            "f1_mean": self.f1_mean,
            "per_seed": [s.to_dict() for s in self.per_seed],
            "failures": self.failures,
        }


@dataclass(frozen=True)
class BenchReport:
    systems: dict[str, SystemReport]
    environment: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "systems": {sid: rep.to_dict() for sid, rep in self.systems.items()},
            "environment": self.environment,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "BenchReport":
        systems = {}
        for sid, rep in data["systems"].items():
            systems[sid] = SystemReport(
                mean_latency_ms=float(rep["mean_latency_ms"]),
                std_latency_ms=float(rep["std_latency_ms"]),
                f1_mean=float(rep["f1_mean"]),
                per_seed=tuple(
                    SeedStats(int(s["seed"]), float(s["latency_mean_ms"]), float(s["f1"]))
                    for s in rep["per_seed"]
                ),
                failures=int(rep.get("failures", 0)),
            )
        return cls(systems=systems, environment=str(data.get("environment", "")))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def _environment_note() -> str:
    return (
        f"python {sys.version.split()[0]} on {platform.platform()}; "
        "sequential driver, one request in flight per system"
    )


def _issue(
    client: httpx.Client, base_url: str, system: str, item: WorkloadItem, request_id: str
) -> tuple[float, float, bool]:
    """One measured request; returns (latency_ms, f1, failed)."""
    req = replace(item.request, request_id=request_id)
    start = time.perf_counter()
    try:
        resp = client.post(f"{base_url}/query/{system}", json=req.to_dict(), timeout=60.0)
        latency_ms = (time.perf_counter() - start) * 1000.0
        if resp.status_code != 200:
            return latency_ms, 0.0, True
        final_answer = str(resp.json().get("final_answer", ""))
    except httpx.HTTPError:
        return (time.perf_counter() - start) * 1000.0, 0.0, True
    return latency_ms, token_f1(final_answer, item.gold_answers), False


def run_bench(
    suite: BenchSuite, gateway_url: str, client: Optional[httpx.Client] = None
) -> BenchReport:
    """Replay the workload per (system, seed) and aggregate.

    Per seed the workload order is a seeded shuffle; warmup requests go out
    first and are discarded.  Request failures score F1 = 0 and are counted
    in the report's ``failures``.
    """
    suite.validate()
    base_url = gateway_url.rstrip("/")
    own_client = client is None
    cli = client or httpx.Client()
    try:
        registered = _registered_ids(cli, base_url)
        for system in suite.systems:
            if system not in registered:
                raise SystemUnavailable(system)

        reports: dict[str, SystemReport] = {}
        for system in suite.systems:
            per_seed: list[SeedStats] = []
            failures = 0
            for seed in suite.seeds:
                order = list(suite.workload)
                random.Random(seed).shuffle(order)
                for w in range(min(suite.warmup_requests, len(order))):
                    _issue(cli, base_url, system, order[w], f"warmup-{system}-{seed}-{w}")
                latencies: list[float] = []
                f1s: list[float] = []
                for i, item in enumerate(order):
                    latency_ms, f1, failed = _issue(
                        cli, base_url, system, item, f"{system}-s{seed}-{i}"
                    )
                    latencies.append(latency_ms)
                    f1s.append(f1)
                    failures += int(failed)
                per_seed.append(
                    SeedStats(
                        seed=seed,
                        latency_mean_ms=statistics.fmean(latencies),
                        f1=statistics.fmean(f1s),
                    )
                )
            seed_latencies = [s.latency_mean_ms for s in per_seed]
            reports[system] = SystemReport(
                mean_latency_ms=statistics.fmean(seed_latencies),
                std_latency_ms=statistics.pstdev(seed_latencies),
                f1_mean=statistics.fmean(s.f1 for s in per_seed),
                per_seed=tuple(per_seed),
                failures=failures,
            )
        return BenchReport(systems=reports, environment=_environment_note())
    finally:
        if own_client:
            cli.close()


def _registered_ids(client: httpx.Client, base_url: str) -> set[str]:
    try:
        skills = client.get(f"{base_url}/skills", timeout=10.0).json()["skills"]
        metas = client.get(f"{base_url}/meta-skills", timeout=10.0).json()["meta_skills"]
    except (httpx.HTTPError, KeyError, ValueError) as exc:
        raise BenchError(f"gateway unavailable at {base_url}: {exc}") from exc
    return {s["skill_id"] for s in skills} | {m["meta_id"] for m in metas}


def write_csv(report: BenchReport, path: str | Path) -> None:
    """Per-seed rows: system, seed, mean_latency_ms, f1."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["system", "seed", "mean_latency_ms", "f1"])
        for system, rep in report.systems.items():
            for s in rep.per_seed:
                writer.writerow([system, s.seed, f"{s.latency_mean_ms:.3f}", f"{s.f1:.3f}"])


def format_report(report: BenchReport) -> str:
    """Human-readable table, one row per system."""
    lines = [f"{'system':<28} {'latency [ms]':>20} {'F1':>8}  seeds"]
    for system, rep in report.systems.items():
        lines.append(
            f"{system:<28} {rep.mean_latency_ms:>12.1f} ± {rep.std_latency_ms:<6.1f}"
            f"{rep.f1_mean:>8.2f}  {len(rep.per_seed)}"
        )
    lines.append(report.environment)
    return "\n".join(lines)


def compare_fanout_modes(
    k_agents: int, delay_ms: int, policy: Optional[FanOutPolicy] = None
) -> dict[str, float]:
    """Run one fan-out over k equal-delay local agents with full
    concurrency and again with concurrency 1; report both wall times.

    The ratio is the desk-scale stand-in for how much parallel fan-out
    buys over sequential member calls.
    """
    from .mockagent import MockAgentConfig, serve

    if k_agents < 2:
        raise ValueError("k_agents must be >= 2")
    if policy is None:
        policy = FanOutPolicy(timeout_ms=max(2 * k_agents * delay_ms, 1000) + 1000)

    handles = [
        serve(MockAgentConfig(agent_id=f"fanout-probe-{i}", delay_ms=delay_ms, seed=i))
        for i in range(k_agents)
    ]
    try:
        skills = [
            SkillDescriptor(
                skill_id=f"fanout-probe-{i}",
                endpoint=h.base_url,
                format=QAFormat.ABSTRACTIVE,
                trained_on=frozenset({"probe"}),
            )
            for i, h in enumerate(handles)
        ]
        req = QARequest(question="fan-out timing probe")
        with httpx.Client() as client:
            parallel_policy = replace(policy, max_concurrency=k_agents)
            start = time.perf_counter()
            fan_out(req, skills, parallel_policy, client)
            parallel_ms = (time.perf_counter() - start) * 1000.0

            sequential_policy = replace(policy, max_concurrency=1)
            start = time.perf_counter()
            fan_out(req, skills, sequential_policy, client)
            sequential_ms = (time.perf_counter() - start) * 1000.0
    finally:
        for h in handles:
            h.close()
    return {
        "parallel_ms": parallel_ms,
        "sequential_ms": sequential_ms,
        "ratio": sequential_ms / parallel_ms,
    }
