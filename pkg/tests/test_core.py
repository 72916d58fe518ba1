from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from skillmesh.core import (
    AgentAnswer,
    AnswerStatus,
    MetaSkillConfig,
    QAFormat,
    QARequest,
    SkillDescriptor,
    Strategy,
    normalize_answer,
    validate_request,
)


class TestNormalizeAnswer:
    def test_drops_articles_and_punctuation(self):
        assert normalize_answer("The Eiffel Tower!") == "eiffel tower"

    def test_empty(self):
        assert normalize_answer("") == ""

    def test_collapses_whitespace(self):
        assert normalize_answer("  An   apple, a day ") == "apple day"

    def test_unicode_punctuation_removed(self):
        assert normalize_answer("«Paris» — ville lumière") == "paris ville lumière"

    @given(st.text(max_size=80))
    def test_idempotent(self, text):
        once = normalize_answer(text)
        assert normalize_answer(once) == once

    @given(st.text(max_size=80))
    def test_output_charset(self, text):
        out = normalize_answer(text)
        # "no uppercase" = lowercasing is exhausted; some exotic letters
        # (e.g. mathematical capitals) have no lowercase mapping at all.
        assert out == out.lower()
        assert out == out.strip()
        assert "  " not in out
        import unicodedata

        assert not any(unicodedata.category(c).startswith("P") for c in out)


class TestValidateRequest:
    def test_extractive_with_context_ok(self):
        req = QARequest(question="who?", context="Some passage.")
        assert validate_request(req, QAFormat.EXTRACTIVE) == []

    def test_empty_question(self):
        req = QARequest(question="")
        assert "empty question" in validate_request(req, QAFormat.ABSTRACTIVE)

    def test_single_choice_rejected(self):
        req = QARequest(question="pick one", choices=("x",))
        assert "fewer than 2 choices" in validate_request(req, QAFormat.MULTIPLE_CHOICE)

    def test_duplicate_choices_rejected(self):
        req = QARequest(question="pick one", choices=("x", "x"))
        assert "fewer than 2 choices" in validate_request(req, QAFormat.MULTIPLE_CHOICE)

    def test_missing_context_for_extractive(self):
        req = QARequest(question="who?")
        assert "missing context" in validate_request(req, QAFormat.EXTRACTIVE)

    def test_missing_choices(self):
        req = QARequest(question="pick")
        assert "missing choices" in validate_request(req, QAFormat.MULTIPLE_CHOICE)

    def test_pure(self):
        req = QARequest(question="", choices=("a",))
        first = validate_request(req, QAFormat.MULTIPLE_CHOICE)
        assert validate_request(req, QAFormat.MULTIPLE_CHOICE) == first


class TestQAFormat:
    def test_parse_known(self):
        assert QAFormat.parse("extractive") is QAFormat.EXTRACTIVE
        assert QAFormat.parse("multiple_choice") is QAFormat.MULTIPLE_CHOICE

    def test_parse_unknown_rejected(self):
        with pytest.raises(ValueError):
            QAFormat.parse("telepathic")


class TestJsonRoundTrips:
    def test_qarequest(self):
        req = QARequest(question="q?", context="ctx", choices=("a", "b"), request_id="r1")
        assert QARequest.from_dict(req.to_dict()) == req

    def test_qarequest_fills_request_id(self):
        req = QARequest.from_dict({"question": "q?"})
        assert req.request_id

    def test_agent_answer_ok(self):
        ans = AgentAnswer.ok("s1", "Paris", 0.9, 12.5)
        assert AgentAnswer.from_dict(ans.to_dict()) == ans
        assert ans.violations() == []

    def test_agent_answer_error_keeps_message(self):
        ans = AgentAnswer.failed("s1", 3.0, "boom")
        round_tripped = AgentAnswer.from_dict(ans.to_dict())
        assert round_tripped == ans
        assert round_tripped.status is AnswerStatus.ERROR
        assert round_tripped.error_message == "boom"

    def test_skill_descriptor(self):
        desc = SkillDescriptor(
            skill_id="span-bert-squad",
            endpoint="http://127.0.0.1:9000",
            format=QAFormat.EXTRACTIVE,
            trained_on=frozenset({"squad", "newsqa"}),
            display_name="SpanBERT",
            registered_at="2026-01-01T00:00:00.000000+00:00",
        )
        assert SkillDescriptor.from_dict(desc.to_dict()) == desc

    def test_meta_skill_config(self):
        cfg = MetaSkillConfig(
            meta_id="trio",
            strategy=Strategy.LATE_FUSION,
            member_skill_ids=("a", "b", "c"),
            params={"aggregator": "weighted_vote", "timeout_ms": 500, "max_concurrency": 3},
        )
        assert MetaSkillConfig.from_dict(cfg.to_dict()) == cfg


class TestAgentAnswerInvariants:
    def test_ok_requires_text_and_confidence(self):
        assert AgentAnswer("s", "", 0.5, 1.0, AnswerStatus.OK).violations()
        assert AgentAnswer("s", "x", 1.5, 1.0, AnswerStatus.OK).violations()

    def test_failure_requires_empty_text(self):
        assert AgentAnswer("s", "leak", 0.0, 1.0, AnswerStatus.TIMEOUT).violations()
        assert AgentAnswer.timeout("s", 1.0).violations() == []


class TestMetaSkillConfigInvariants:
    def test_duplicate_members_rejected(self):
        cfg = MetaSkillConfig("m", Strategy.LATE_FUSION, ("a", "a"))
        assert "duplicate member_skill_ids" in cfg.violations()

    def test_empty_members_rejected(self):
        cfg = MetaSkillConfig("m", Strategy.SELECTION, (), {"router_model_id": "r"})
        assert "member_skill_ids is empty" in cfg.violations()

    def test_late_fusion_defaults_applied(self):
        cfg = MetaSkillConfig("m", Strategy.LATE_FUSION, ("a",))
        assert cfg.params["aggregator"] == "max_confidence"
        assert cfg.params["timeout_ms"] > 0
        assert cfg.params["max_concurrency"] >= 1
        assert cfg.violations() == []

    def test_late_fusion_zero_timeout_rejected(self):
        cfg = MetaSkillConfig("m", Strategy.LATE_FUSION, ("a",), {"timeout_ms": 0})
        assert any("timeout_ms" in v for v in cfg.violations())

    def test_selection_needs_router_model(self):
        cfg = MetaSkillConfig("m", Strategy.SELECTION, ("a",))
        assert any("router_model_id" in v for v in cfg.violations())

    def test_early_fusion_weights_checked(self):
        base = dict(fused_tensor_path="fused.sqtm")
        ok = MetaSkillConfig("m", Strategy.EARLY_FUSION, ("a", "b"), {**base, "weights": [0.5, 0.5]})
        assert ok.violations() == []
        bad_len = MetaSkillConfig("m", Strategy.EARLY_FUSION, ("a", "b"), {**base, "weights": [1.0]})
        assert any("length" in v for v in bad_len.violations())
        bad_sum = MetaSkillConfig(
            "m", Strategy.EARLY_FUSION, ("a", "b"), {**base, "weights": [0.5, 0.6]}
        )
        assert any("sum" in v for v in bad_sum.violations())
        negative = MetaSkillConfig(
            "m", Strategy.EARLY_FUSION, ("a", "b"), {**base, "weights": [-0.5, 1.5]}
        )
        assert any("positive" in v for v in negative.violations())


class TestSkillDescriptorInvariants:
    def test_bad_skill_id(self):
        desc = SkillDescriptor("Bad Id!", "http://h/", QAFormat.BOOLEAN, frozenset({"d"}))
        assert any("skill_id" in v for v in desc.violations())

    def test_bad_endpoint(self):
        desc = SkillDescriptor("ok-id", "not a url", QAFormat.BOOLEAN, frozenset({"d"}))
        assert any("endpoint" in v for v in desc.violations())

    def test_empty_trained_on(self):
        desc = SkillDescriptor("ok-id", "http://h/", QAFormat.BOOLEAN, frozenset())
        assert any("trained_on" in v for v in desc.violations())
