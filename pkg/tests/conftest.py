from __future__ import annotations

import threading
import time

import httpx
import pytest
import uvicorn

from skillmesh.core import QAFormat, SkillDescriptor
from skillmesh.gateway import GatewayConfig, create_app
from skillmesh.mockagent import MockAgentConfig, serve
from skillmesh.registry import Registry

# Populated by test_acceptance.py; echoed after the run so each criterion
# gets its own visible pass/fail line.
ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, ok in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}")


@pytest.fixture
def client():
    with httpx.Client() as c:
        yield c


@pytest.fixture
def registry(tmp_path):
    return Registry(tmp_path / "registry.json")


@pytest.fixture
def agent_factory():
    """Spin up mock agents, tearing every one down at test end."""
    handles = []

    def make(**kwargs) -> object:
        handle = serve(MockAgentConfig(**kwargs))
        handles.append(handle)
        return handle

    yield make
    for handle in handles:
        handle.close()


def make_descriptor(
    skill_id: str,
    endpoint: str = "http://127.0.0.1:9/",
    tags: tuple[str, ...] = ("squad",),
    fmt: QAFormat = QAFormat.ABSTRACTIVE,
) -> SkillDescriptor:
    return SkillDescriptor(
        skill_id=skill_id,
        endpoint=endpoint,
        format=fmt,
        trained_on=frozenset(tags),
        display_name=skill_id,
    )


class GatewayServer:
    """Real uvicorn server on an ephemeral port, run on a daemon thread."""

    def __init__(self, config: GatewayConfig, registry: Registry | None = None):
        self.config = config
        app = create_app(config, registry)
        self._server = uvicorn.Server(
            uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
        )
        self._thread = threading.Thread(target=self._server.run, daemon=True)
        self._thread.start()
        deadline = time.monotonic() + 10
        while not self._server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("gateway server did not start")
            time.sleep(0.01)
        port = self._server.servers[0].sockets[0].getsockname()[1]
        self.base_url = f"http://127.0.0.1:{port}"

    def close(self) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)


@pytest.fixture
def gateway_factory(tmp_path):
    servers = []

    def make(config: GatewayConfig | None = None, registry: Registry | None = None) -> GatewayServer:
        if config is None:
            config = GatewayConfig(
                registry_path=str(tmp_path / "registry.json"),
                tensor_dir=str(tmp_path / "tensors"),
                router_model_dir=str(tmp_path / "router-models"),
            )
        server = GatewayServer(config, registry)
        servers.append(server)
        return server

    yield make
    for server in servers:
        server.close()
