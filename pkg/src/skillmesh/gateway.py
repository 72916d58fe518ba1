"""HTTP gateway tying the platform together: skill and meta-skill CRUD, a
unified query endpoint dispatching to the three composition strategies, a
fusion endpoint, router training, and static hosting for the UI bundle.

Every response body is the canonical JSON encoding of the domain types, so
the API is the package's wire format.  Error mapping:

    404  unknown query target / unknown skill
    409  duplicate id, skill still referenced by a meta-skill
    422  invalid request or config (violations listed in the body)
    502  no member produced a successful answer / routing found no skill
    504  every member timed out
"""

from __future__ import annotations

import json
import os
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import httpx
from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import fusion as fusion_mod
from . import registry as registry_mod
from . import router as router_mod
from .core import (
    AgentAnswer,
    AnswerStatus,
    MetaSkillConfig,
    QAFormat,
    QARequest,
    SkillDescriptor,
    Strategy,
    validate_request,
)
from .latefusion import (
    FanOutPolicy,
    FusionResult,
    NoSuccessfulAnswers,
    UnknownAggregator,
    fan_out,
    policy_from_params,
    resolve_aggregator,
)
from .registry import Registry

ENV_PREFIX = "SKILLMESH_"


@dataclass(frozen=True)
class GatewayConfig:
    """Service configuration; precedence is env > config file > defaults.

    Environment keys are the upper-cased field names with the SKILLMESH_
    prefix, e.g. SKILLMESH_REGISTRY_PATH.
    """

    listen_host: str = "127.0.0.1"
    listen_port: int = 8470
    registry_path: str = "registry.json"
    tensor_dir: str = "tensors"
    router_model_dir: str = "router-models"
    ui_dir: Optional[str] = None
    default_timeout_ms: int = 10_000
    default_max_concurrency: int = 8

    @classmethod
    def load(cls, path: str | Path | None = None, env: Optional[dict[str, str]] = None) -> "GatewayConfig":
        values: dict[str, Any] = {}
        if path is not None:
            values.update(json.loads(Path(path).read_text(encoding="utf-8")))
        env = dict(os.environ) if env is None else env
        for name, kind in (
            ("listen_host", str),
            ("listen_port", int),
            ("registry_path", str),
            ("tensor_dir", str),
            ("router_model_dir", str),
            ("ui_dir", str),
            ("default_timeout_ms", int),
            ("default_max_concurrency", int),
        ):
            raw = env.get(ENV_PREFIX + name.upper())
            if raw is not None:
                values[name] = kind(raw)
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in values.items() if k in known})

    def default_policy(self) -> FanOutPolicy:
        return FanOutPolicy(
            timeout_ms=self.default_timeout_ms, max_concurrency=self.default_max_concurrency
        )


@dataclass(frozen=True)
class QueryResponse:
    """What a query returns: the final answer plus the full per-agent
    breakdown and stage timings that make the collaboration inspectable."""

    request_id: str
    final_answer: str
    strategy: str
    member_answers: tuple[AgentAnswer, ...]
    timings: dict[str, float]
    route: Optional[router_mod.RouteDecision] = None
    vote_table: Optional[dict[str, float]] = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "request_id": self.request_id,
            "final_answer": self.final_answer,
            "strategy": self.strategy,
            "member_answers": [a.to_dict() for a in self.member_answers],
            "timings": dict(self.timings),
        }
        if self.route is not None:
            out["route"] = self.route.to_dict()
        if self.vote_table is not None:
            out["vote_table"] = dict(self.vote_table)
        return out


class _ApiError(Exception):
    def __init__(self, status_code: int, error: str, **extra: Any):
        super().__init__(error)
        self.status_code = status_code
        self.body = {"error": error, **extra}


def _no_answers_error(answers: list[AgentAnswer], **extra: Any) -> _ApiError:
    if answers and all(a.status is AnswerStatus.TIMEOUT for a in answers):
        return _ApiError(
            504,
            "all_members_timed_out",
            member_answers=[a.to_dict() for a in answers],
            **extra,
        )
    return _ApiError(
        502,
        "no_successful_answers",
        member_answers=[a.to_dict() for a in answers],
        **extra,
    )


class GatewayState:
    """Everything the endpoints share: the registry, one outbound client,
    and a small mtime-validated router-model cache."""

    def __init__(self, config: GatewayConfig, registry: Optional[Registry] = None):
        self.config = config
        self.registry = registry or Registry(config.registry_path)
        self.client = httpx.Client()
        self._router_cache: dict[str, tuple[float, router_mod.RouterModel]] = {}

    def close(self) -> None:
        self.client.close()

    def router_model_path(self, model_id: str) -> Path:
        return Path(self.config.router_model_dir) / f"{model_id}.json"

    def load_router_model(self, model_id: str) -> router_mod.RouterModel:
        path = self.router_model_path(model_id)
        if not path.exists():
            raise _ApiError(502, "router_model_missing", model_id=model_id)
        mtime = path.stat().st_mtime
        cached = self._router_cache.get(model_id)
        if cached is not None and cached[0] == mtime:
            return cached[1]
        model = router_mod.load_model(path)
        self._router_cache[model_id] = (mtime, model)
        return model


def create_app(config: GatewayConfig, registry: Optional[Registry] = None) -> FastAPI:
    state = GatewayState(config, registry)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        state.close()

    app = FastAPI(
        title="skillmesh gateway",
        description="Multi-agent QA gateway: selection routing, fused-adapter skills, parallel late fusion.",
        lifespan=lifespan,
    )
    app.state.skillmesh = state

    @app.exception_handler(_ApiError)
    async def _api_error_handler(_request: Request, exc: _ApiError) -> JSONResponse:
        return JSONResponse(status_code=exc.status_code, content=exc.body)

    # -- registry endpoints ---------------------------------------------

    @app.get("/health")
    def health(deep: bool = False, timeout_ms: int = 2000) -> dict[str, Any]:
        snap = state.registry.snapshot()
        out: dict[str, Any] = {
            "status": "ok",
            "registry_version": snap.version,
            "skills": len(snap.skills),
            "meta_skills": len(snap.meta_skills),
        }
        if deep:
            checks = state.registry.health_check_all(timeout_ms, client=state.client)
            out["agents"] = [h.to_dict() for h in checks]
        return out

    @app.post("/skills", status_code=201)
    def create_skill(payload: dict = Body(...)) -> dict[str, Any]:
        desc = _parse(SkillDescriptor.from_dict, payload, "skill descriptor")
        try:
            version = state.registry.register_skill(desc)
        except registry_mod.InvalidDescriptor as exc:
            raise _ApiError(422, "invalid_descriptor", violations=exc.violations)
        except registry_mod.DuplicateId as exc:
            raise _ApiError(409, "duplicate_id", entity_id=exc.entity_id)
        registered = state.registry.get_skill(desc.skill_id)
        assert registered is not None
        return {"version": version, "skill": registered.to_dict()}

    @app.get("/skills")
    def list_skills() -> dict[str, Any]:
        return {
            "skills": [d.to_dict() for d in state.registry.list_skills()],
            "version": state.registry.version,
        }

    @app.delete("/skills/{skill_id}")
    def delete_skill(skill_id: str) -> dict[str, Any]:
        try:
            version = state.registry.remove_skill(skill_id)
        except registry_mod.NotFound:
            raise _ApiError(404, "not_found", entity_id=skill_id)
        except registry_mod.InUse as exc:
            raise _ApiError(409, "in_use", skill_id=skill_id, meta_ids=exc.meta_ids)
        return {"version": version}

    @app.post("/meta-skills", status_code=201)
    def create_meta_skill(payload: dict = Body(...)) -> dict[str, Any]:
        cfg = _parse(MetaSkillConfig.from_dict, payload, "meta-skill config")
        try:
            version = state.registry.register_meta_skill(cfg)
        except registry_mod.InvalidConfig as exc:
            raise _ApiError(422, "invalid_config", violations=exc.violations)
        except registry_mod.UnknownMember as exc:
            raise _ApiError(422, "unknown_member", skill_id=exc.skill_id)
        except registry_mod.DuplicateId as exc:
            raise _ApiError(409, "duplicate_id", entity_id=exc.entity_id)
        return {"version": version, "meta_skill": cfg.to_dict()}

    @app.get("/meta-skills")
    def list_meta_skills() -> dict[str, Any]:
        return {
            "meta_skills": [c.to_dict() for c in state.registry.list_meta_skills()],
            "version": state.registry.version,
        }

    @app.delete("/meta-skills/{meta_id}")
    def delete_meta_skill(meta_id: str) -> dict[str, Any]:
        try:
            version = state.registry.remove_meta_skill(meta_id)
        except registry_mod.NotFound:
            raise _ApiError(404, "not_found", entity_id=meta_id)
        return {"version": version}

    # -- fusion and router training --------------------------------------

    @app.post("/fuse", status_code=201)
    def fuse(payload: dict = Body(...)) -> dict[str, Any]:
        try:
            spec = fusion_mod.FusionSpec(
                inputs=tuple(str(s) for s in payload["inputs"]),
                weights=tuple(float(w) for w in payload["weights"])
                if payload.get("weights") is not None
                else None,
                output_id=str(payload["output_id"]),
            )
            endpoint = str(payload["endpoint"])
        except (KeyError, TypeError, ValueError) as exc:
            raise _ApiError(422, "invalid_request", detail=f"bad fusion request: {exc}")
        fmt = QAFormat.parse(payload["format"]) if "format" in payload else None
        try:
            descriptor = fusion_mod.fuse_and_register(
                spec,
                state.registry,
                tensor_dir=state.config.tensor_dir,
                endpoint=endpoint,
                fmt=fmt,
                display_name=payload.get("display_name"),
            )
        except registry_mod.UnknownMember as exc:
            raise _ApiError(422, "unknown_member", skill_id=exc.skill_id)
        except registry_mod.DuplicateId as exc:
            raise _ApiError(409, "duplicate_id", entity_id=exc.entity_id)
        except registry_mod.InvalidDescriptor as exc:
            raise _ApiError(422, "invalid_descriptor", violations=exc.violations)
        except (fusion_mod.FusionError, ValueError) as exc:
            raise _ApiError(422, "fusion_failed", detail=str(exc))
        return {"version": state.registry.version, "skill": descriptor.to_dict()}

    @app.post("/router/train", status_code=201)
    def train_router_endpoint(payload: dict = Body(...)) -> dict[str, Any]:
        model_id = str(payload.get("model_id", "router"))
        if "corpora" in payload:
            corpora = {str(tag): [str(q) for q in qs] for tag, qs in payload["corpora"].items()}
        elif "corpora_dir" in payload:
            try:
                corpora = router_mod.load_corpora_dir(payload["corpora_dir"])
            except (OSError, ValueError) as exc:
                raise _ApiError(422, "invalid_request", detail=str(exc))
        else:
            raise _ApiError(422, "invalid_request", detail="need corpora or corpora_dir")
        try:
            model = router_mod.train_router(corpora, model_id=model_id)
        except (router_mod.EmptyCorpus, ValueError) as exc:
            raise _ApiError(422, "invalid_corpora", detail=str(exc))
        path = state.router_model_path(model_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        router_mod.save_model(model, path)
        return {
            "model_id": model.model_id,
            "datasets": list(model.datasets),
            "vocabulary_size": len(model.vocabulary),
        }

    # -- query dispatch ---------------------------------------------------

    @app.post("/query/{target_id}")
    def query(target_id: str, payload: dict = Body(...)) -> dict[str, Any]:
        return _handle_query(state, target_id, payload).to_dict()

    if config.ui_dir and Path(config.ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def _parse(parser, payload: dict, what: str):
    try:
        return parser(payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise _ApiError(422, "invalid_request", detail=f"bad {what}: {exc}")


def _validate_for_format(req: QARequest, fmt: QAFormat) -> None:
    violations = validate_request(req, fmt)
    if violations:
        raise _ApiError(422, "invalid_request", violations=violations)


def _handle_query(state: GatewayState, target_id: str, payload: dict) -> QueryResponse:
    start = time.perf_counter()
    req = _parse(QARequest.from_dict, payload, "query request")
    registry = state.registry

    meta = registry.get_meta_skill(target_id)
    if meta is None:
        skill = registry.get_skill(target_id)
        if skill is None:
            raise _ApiError(404, "unknown_target", target_id=target_id)
        return _query_single(state, req, skill, "single", start)

    members = [registry.get_skill(sid) for sid in meta.member_skill_ids]
    present = [m for m in members if m is not None]
    if not present:
        raise _ApiError(502, "no_successful_answers", detail="meta-skill has no resolvable members")
    _validate_for_format(req, present[0].format)

    if meta.strategy is Strategy.SELECTION:
        return _query_selection(state, req, meta, start)
    if meta.strategy is Strategy.EARLY_FUSION:
        fused_id = Path(str(meta.params["fused_tensor_path"])).stem
        fused_skill = registry.get_skill(fused_id)
        if fused_skill is None:
            raise _ApiError(502, "fused_skill_missing", skill_id=fused_id)
        return _query_single(state, req, fused_skill, "early_fusion", start)
    return _query_late_fusion(state, req, meta, start)


def _query_single(
    state: GatewayState, req: QARequest, skill: SkillDescriptor, strategy: str, start: float
) -> QueryResponse:
    if strategy == "single":
        _validate_for_format(req, skill.format)
    t0 = time.perf_counter()
    answers = fan_out(req, [skill], state.config.default_policy(), state.client)
    fan_out_ms = (time.perf_counter() - t0) * 1000.0
    answer = answers[0]
    if answer.status is not AnswerStatus.OK:
        raise _no_answers_error(answers, request_id=req.request_id)
    return QueryResponse(
        request_id=req.request_id,
        final_answer=answer.answer_text,
        strategy=strategy,
        member_answers=tuple(answers),
        timings={
            "total_ms": (time.perf_counter() - start) * 1000.0,
            "fan_out_ms": fan_out_ms,
        },
    )


def _query_selection(
    state: GatewayState, req: QARequest, meta: MetaSkillConfig, start: float
) -> QueryResponse:
    model = state.load_router_model(str(meta.params["router_model_id"]))
    threshold = float(meta.params.get("score_threshold", 0.05))

    t0 = time.perf_counter()
    try:
        decision = router_mod.route(model, req.question, state.registry, score_threshold=threshold)
    except router_mod.EmptyQuestion:
        raise _ApiError(422, "invalid_request", violations=["empty question"])
    except router_mod.NoEligibleSkill:
        raise _ApiError(502, "no_eligible_skill", request_id=req.request_id)
    routing_ms = (time.perf_counter() - t0) * 1000.0

    t1 = time.perf_counter()
    answers = fan_out(req, list(decision.selected_skills), state.config.default_policy(), state.client)
    fan_out_ms = (time.perf_counter() - t1) * 1000.0

    t2 = time.perf_counter()
    try:
        result = resolve_aggregator("max_confidence")(answers)
    except NoSuccessfulAnswers:
        raise _no_answers_error(answers, request_id=req.request_id, route=decision.to_dict())
    aggregate_ms = (time.perf_counter() - t2) * 1000.0

    return QueryResponse(
        request_id=req.request_id,
        final_answer=result.final_answer,
        strategy="selection",
        member_answers=tuple(answers),
        route=decision,
        timings={
            "total_ms": (time.perf_counter() - start) * 1000.0,
            "routing_ms": routing_ms,
            "fan_out_ms": fan_out_ms,
            "aggregate_ms": aggregate_ms,
        },
    )


def _query_late_fusion(
    state: GatewayState, req: QARequest, meta: MetaSkillConfig, start: float
) -> QueryResponse:
    registry = state.registry
    skills = []
    for sid in meta.member_skill_ids:
        desc = registry.get_skill(sid)
        if desc is None:
            raise _ApiError(502, "no_successful_answers", detail=f"member vanished: {sid}")
        skills.append(desc)
    try:
        aggregator = resolve_aggregator(str(meta.params["aggregator"]))
    except UnknownAggregator as exc:
        raise _ApiError(422, "unknown_aggregator", detail=str(exc))
    policy = policy_from_params(meta.params)

    t0 = time.perf_counter()
    answers = fan_out(req, skills, policy, state.client)
    fan_out_ms = (time.perf_counter() - t0) * 1000.0

    t1 = time.perf_counter()
    try:
        result: FusionResult = aggregator(answers)
    except NoSuccessfulAnswers:
        raise _no_answers_error(answers, request_id=req.request_id)
    aggregate_ms = (time.perf_counter() - t1) * 1000.0

    return QueryResponse(
        request_id=req.request_id,
        final_answer=result.final_answer,
        strategy="late_fusion",
        member_answers=tuple(answers),
        vote_table=result.vote_table,
        timings={
            "total_ms": (time.perf_counter() - start) * 1000.0,
            "fan_out_ms": fan_out_ms,
            "aggregate_ms": aggregate_ms,
        },
    )


def run_gateway(config: GatewayConfig) -> None:
    """Blocking server entry point used by the CLI."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="warning")
