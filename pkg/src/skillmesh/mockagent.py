"""Configurable stand-in QA agent: a tiny threaded HTTP server speaking the
outbound agent protocol (POST /query, GET /health).

Used by the test suite and the bench harness wherever a real expert agent
would sit.  Delay, jitter, and failure injection are all driven from the
config so latency experiments stay reproducible.
"""

from __future__ import annotations

import errno
import json
import random
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Mapping

from .core import SkillMeshError, normalize_answer


class PortInUse(SkillMeshError):
    def __init__(self, port: int):
        super().__init__(f"port {port} is already bound")
        self.port = port


FAILURE_MODES = ("none", "always_timeout_like", "http_500", "malformed_body")


@dataclass(frozen=True)
class FailureMode:
    mode: str = "none"
    sleep_ms: int = 0

    def __post_init__(self) -> None:
        if self.mode not in FAILURE_MODES:
            raise ValueError(f"unknown failure mode: {self.mode!r}")

    @classmethod
    def parse(cls, value: Any) -> "FailureMode":
        if value is None:
            return cls()
        if isinstance(value, str):
            return cls(mode=value)
        return cls(mode=str(value.get("mode", "none")), sleep_ms=int(value.get("sleep_ms", 0)))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"mode": self.mode}
        if self.sleep_ms:
            out["sleep_ms"] = self.sleep_ms
        return out


@dataclass(frozen=True)
class MockAgentConfig:
    """Behavior table for one mock agent.

    answer_table keys are normalized question texts; lookups normalize the
    incoming question the same way, so casing and punctuation never matter.
    """

    agent_id: str
    port: int = 0
    answer_table: dict[str, tuple[str, float]] = field(default_factory=dict)
    default_answer: tuple[str, float] = ("i do not know", 0.1)
    delay_ms: int = 0
    failure_mode: FailureMode = field(default_factory=FailureMode)
    jitter_ms: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.failure_mode, FailureMode):
            object.__setattr__(self, "failure_mode", FailureMode.parse(self.failure_mode))
        normalized = {
            normalize_answer(q): (str(text), float(conf))
            for q, (text, conf) in self.answer_table.items()
        }
        object.__setattr__(self, "answer_table", normalized)
        for text, conf in list(self.answer_table.values()) + [self.default_answer]:
            if not 0.0 <= conf <= 1.0:
                raise ValueError(f"confidence {conf} for {text!r} outside [0, 1]")
        if self.delay_ms < 0 or self.jitter_ms < 0:
            raise ValueError("delay_ms and jitter_ms must be nonnegative")

    def to_dict(self) -> dict[str, Any]:
        return {
            "agent_id": self.agent_id,
            "port": self.port,
            "answer_table": {q: list(ans) for q, ans in self.answer_table.items()},
            "default_answer": list(self.default_answer),
            "delay_ms": self.delay_ms,
            "failure_mode": self.failure_mode.to_dict(),
            "jitter_ms": self.jitter_ms,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "MockAgentConfig":
        table = {
            q: (str(ans[0]), float(ans[1])) for q, ans in data.get("answer_table", {}).items()
        }
        default = data.get("default_answer", ["i do not know", 0.1])
        return cls(
            agent_id=str(data["agent_id"]),
            port=int(data.get("port", 0)),
            answer_table=table,
            default_answer=(str(default[0]), float(default[1])),
            delay_ms=int(data.get("delay_ms", 0)),
            failure_mode=FailureMode.parse(data.get("failure_mode")),
            jitter_ms=int(data.get("jitter_ms", 0)),
            seed=int(data.get("seed", 0)),
        )

    @classmethod
    def load(cls, path: str | Path) -> "MockAgentConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


class MockAgentHandle:
    """Running server handle; supports graceful shutdown and `with`."""

    def __init__(self, server: ThreadingHTTPServer, thread: threading.Thread, config: MockAgentConfig):
        self._server = server
        self._thread = thread
        self.config = config
        self.port = server.server_address[1]
        self.base_url = f"http://127.0.0.1:{self.port}"

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)

    def __enter__(self) -> "MockAgentHandle":
        return self

    def __exit__(self, *exc_info: Any) -> None:
        self.close()


def serve(cfg: MockAgentConfig) -> MockAgentHandle:
    """Start the agent on cfg.port (0 = pick a free port) and return its
    handle.  Requests are served on daemon threads, so concurrent fan-outs
    do not serialize behind each other."""
    rng = random.Random(cfg.seed)
    rng_lock = threading.Lock()

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"
        # Nagle + delayed ACK otherwise stalls every keep-alive response by
        # ~40ms, which would swamp the injected delays.
        disable_nagle_algorithm = True

        def log_message(self, *args: Any) -> None:
            pass

        def _sleep_configured(self) -> None:
            delay = cfg.delay_ms
            if cfg.jitter_ms:
                with rng_lock:
                    delay += rng.uniform(0, cfg.jitter_ms)
            if delay > 0:
                time.sleep(delay / 1000.0)

        def _send(self, status: int, body: bytes, content_type: str = "application/json") -> None:
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _apply_failure(self) -> bool:
            """Returns True when the failure mode already produced the
            response (or the caller should proceed to a normal one)."""
            mode = cfg.failure_mode
            if mode.mode == "always_timeout_like":
                time.sleep(mode.sleep_ms / 1000.0)
                return False
            if mode.mode == "http_500":
                self._send(500, json.dumps({"error": "injected failure"}).encode())
                return True
            if mode.mode == "malformed_body":
                self._send(200, b'{"answer_text": ')
                return True
            return False

        def do_GET(self) -> None:
            self._sleep_configured()
            if self._apply_failure():
                return
            if self.path == "/health":
                self._send(200, json.dumps({"status": "ok", "agent_id": cfg.agent_id}).encode())
            else:
                self._send(404, json.dumps({"error": "not found"}).encode())

        def do_POST(self) -> None:
            self._sleep_configured()
            if self._apply_failure():
                return
            if self.path != "/query":
                self._send(404, json.dumps({"error": "not found"}).encode())
                return
            length = int(self.headers.get("Content-Length", 0))
            raw = self.rfile.read(length)
            try:
                payload = json.loads(raw)
                question = str(payload["question"])
            except (ValueError, KeyError, TypeError):
                self._send(400, json.dumps({"error": "bad request body"}).encode())
                return
            text, confidence = cfg.answer_table.get(
                normalize_answer(question), cfg.default_answer
            )
            self._send(200, json.dumps({"answer_text": text, "confidence": confidence}).encode())

    try:
        server = ThreadingHTTPServer(("127.0.0.1", cfg.port), Handler)
    except OSError as exc:
        if exc.errno == errno.EADDRINUSE:
            raise PortInUse(cfg.port) from exc
        raise
    server.daemon_threads = True
    thread = threading.Thread(target=server.serve_forever, name=f"mock-agent-{cfg.agent_id}", daemon=True)
    thread.start()
    return MockAgentHandle(server, thread, cfg)
