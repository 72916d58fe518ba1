"""skillmesh: compose independent QA agents into multi-agent systems.

Three composition strategies — selection routing, early fusion of adapter
weights, and late fusion of parallel predictions — behind one gateway,
plus a seeded bench harness for latency/F1 comparisons.
"""

from .core import (
    AgentAnswer,
    AnswerStatus,
    MetaSkillConfig,
    QAFormat,
    QARequest,
    SkillDescriptor,
    SkillMeshError,
    Strategy,
    normalize_answer,
    validate_request,
)
from .registry import Registry, RegistrySnapshot

__all__ = [
    "AgentAnswer",
    "AnswerStatus",
    "MetaSkillConfig",
    "QAFormat",
    "QARequest",
    "Registry",
    "RegistrySnapshot",
    "SkillDescriptor",
    "SkillMeshError",
    "Strategy",
    "normalize_answer",
    "validate_request",
]

__version__ = "0.1.0"
