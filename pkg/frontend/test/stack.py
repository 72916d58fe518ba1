"""Test stack for the UI e2e smoke: a real gateway plus three mock agents
(two healthy, one that always outlives the fan-out timeout).

Prints one JSON line with the gateway URL once everything is up, then waits
until killed. Requires the skillmesh package on PYTHONPATH (pip install -e
the repository root).
"""

import json
import signal
import socket
import sys
import tempfile
import threading
from pathlib import Path

import uvicorn

from skillmesh.core import QAFormat, SkillDescriptor
from skillmesh.gateway import GatewayConfig, create_app
from skillmesh.mockagent import MockAgentConfig, serve
from skillmesh.registry import Registry

ANSWERS = {"what is the capital of france?": ("Paris", 0.9)}


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def main() -> None:
    workdir = Path(tempfile.mkdtemp(prefix="skillmesh-ui-e2e-"))
    agents = [
        serve(MockAgentConfig(agent_id="paris-strong", answer_table=ANSWERS,
                              default_answer=("Paris", 0.9))),
        serve(MockAgentConfig(agent_id="paris-weak", answer_table=ANSWERS,
                              default_answer=("paris!", 0.6))),
        serve(MockAgentConfig(agent_id="sleeper", default_answer=("zzz", 0.99),
                              failure_mode={"mode": "always_timeout_like", "sleep_ms": 3000})),
    ]

    registry = Registry(workdir / "registry.json")
    for agent in agents:
        registry.register_skill(SkillDescriptor(
            skill_id=agent.config.agent_id,
            endpoint=agent.base_url,
            format=QAFormat.ABSTRACTIVE,
            trained_on=frozenset({"capitals"}),
            display_name=agent.config.agent_id,
        ))

    ui_dir = Path(__file__).resolve().parent.parent / "dist"
    config = GatewayConfig(
        registry_path=str(workdir / "registry.json"),
        tensor_dir=str(workdir / "tensors"),
        router_model_dir=str(workdir / "router-models"),
        ui_dir=str(ui_dir) if ui_dir.is_dir() else None,
    )
    port = free_port()
    server = uvicorn.Server(uvicorn.Config(
        create_app(config, registry), host="127.0.0.1", port=port, log_level="error",
    ))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        pass

    print(json.dumps({
        "gateway": f"http://127.0.0.1:{port}",
        "skills": [a.config.agent_id for a in agents],
    }), flush=True)

    stop = threading.Event()
    signal.signal(signal.SIGTERM, lambda *_: stop.set())
    signal.signal(signal.SIGINT, lambda *_: stop.set())
    stop.wait()
    server.should_exit = True
    for agent in agents:
        agent.close()
    sys.exit(0)


if __name__ == "__main__":
    main()
