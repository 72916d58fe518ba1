from __future__ import annotations

import json
import time

import httpx
import pytest

from skillmesh.mockagent import FailureMode, MockAgentConfig, PortInUse, serve


def post_query(base_url: str, question: str):
    return httpx.post(f"{base_url}/query", json={"question": question}, timeout=5.0)


class TestAnswering:
    def test_lookup_is_normalization_robust(self, agent_factory):
        handle = agent_factory(
            agent_id="a", answer_table={"capital of france": ("Paris", 0.9)}
        )
        resp = post_query(handle.base_url, "The Capital of France?!")
        assert resp.status_code == 200
        assert resp.json() == {"answer_text": "Paris", "confidence": 0.9}

    def test_unknown_question_gets_default(self, agent_factory):
        handle = agent_factory(agent_id="a", default_answer=("dunno", 0.2))
        body = post_query(handle.base_url, "mystery?").json()
        assert body == {"answer_text": "dunno", "confidence": 0.2}

    def test_table_keys_normalized_at_load(self):
        cfg = MockAgentConfig(agent_id="a", answer_table={"The Moon!": ("rock", 0.5)})
        assert "moon" in cfg.answer_table

    def test_bad_body_is_400(self, agent_factory):
        handle = agent_factory(agent_id="a")
        resp = httpx.post(f"{handle.base_url}/query", content=b"not json", timeout=5.0)
        assert resp.status_code == 400


class TestHealth:
    def test_health_endpoint(self, agent_factory):
        handle = agent_factory(agent_id="healthy-one")
        body = httpx.get(f"{handle.base_url}/health", timeout=5.0).json()
        assert body == {"status": "ok", "agent_id": "healthy-one"}


class TestFailureModes:
    def test_http_500_applies_to_every_request(self, agent_factory):
        handle = agent_factory(agent_id="a", failure_mode="http_500")
        assert post_query(handle.base_url, "q").status_code == 500
        assert httpx.get(f"{handle.base_url}/health", timeout=5.0).status_code == 500

    def test_malformed_body(self, agent_factory):
        handle = agent_factory(agent_id="a", failure_mode="malformed_body")
        resp = post_query(handle.base_url, "q")
        assert resp.status_code == 200
        with pytest.raises(json.JSONDecodeError):
            resp.json()

    def test_timeout_like_sleeps_before_answering(self, agent_factory):
        handle = agent_factory(
            agent_id="a", failure_mode={"mode": "always_timeout_like", "sleep_ms": 250}
        )
        start = time.perf_counter()
        resp = post_query(handle.base_url, "q")
        assert (time.perf_counter() - start) * 1000 >= 250
        assert resp.status_code == 200

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            FailureMode(mode="explode")


class TestTiming:
    def test_service_time_at_least_delay(self, agent_factory):
        handle = agent_factory(agent_id="a", delay_ms=120)
        start = time.perf_counter()
        post_query(handle.base_url, "q")
        assert (time.perf_counter() - start) * 1000 >= 120

    def test_jitter_sequence_deterministic_given_seed(self):
        def latencies(seed: int) -> list[str]:
            cfg = MockAgentConfig(agent_id="a", jitter_ms=60, seed=seed)
            observed = []
            with serve(cfg) as handle:
                for i in range(5):
                    start = time.perf_counter()
                    post_query(handle.base_url, f"q{i}")
                    ms = (time.perf_counter() - start) * 1000
                    observed.append("slow" if ms >= 30 else "fast")
            return observed

        assert latencies(7) == latencies(7)

    def test_concurrent_requests_do_not_serialize(self, agent_factory):
        from concurrent.futures import ThreadPoolExecutor

        handle = agent_factory(agent_id="a", delay_ms=200)
        start = time.perf_counter()
        with ThreadPoolExecutor(4) as pool:
            list(pool.map(lambda i: post_query(handle.base_url, f"q{i}"), range(4)))
        wall_ms = (time.perf_counter() - start) * 1000
        assert wall_ms < 700  # sequential would need >= 800


class TestLifecycle:
    def test_port_in_use(self, agent_factory):
        handle = agent_factory(agent_id="first")
        with pytest.raises(PortInUse):
            serve(MockAgentConfig(agent_id="second", port=handle.port))

    def test_graceful_shutdown_frees_port(self):
        handle = serve(MockAgentConfig(agent_id="a"))
        port = handle.port
        handle.close()
        reused = serve(MockAgentConfig(agent_id="b", port=port))
        reused.close()

    def test_config_json_round_trip(self, tmp_path):
        cfg = MockAgentConfig(
            agent_id="a",
            answer_table={"who": ("you", 0.4)},
            default_answer=("?", 0.1),
            delay_ms=5,
            failure_mode=FailureMode("none"),
            jitter_ms=3,
            seed=11,
        )
        path = tmp_path / "agent.json"
        path.write_text(json.dumps(cfg.to_dict()), encoding="utf-8")
        assert MockAgentConfig.load(path) == cfg

    def test_confidence_validated(self):
        with pytest.raises(ValueError):
            MockAgentConfig(agent_id="a", default_answer=("x", 1.5))
