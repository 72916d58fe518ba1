"""Durable catalog of skills and meta-skills.

One JSON snapshot file, written atomically on every mutation (temp file +
rename), holds the whole registry: desk scale needs no database.  A single
lock serializes writers; readers grab the current immutable snapshot and
never block.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping, Optional

import httpx

from .core import (
    MetaSkillConfig,
    SkillDescriptor,
    SkillMeshError,
    utc_now_iso,
)


class RegistryError(SkillMeshError):
    pass


class DuplicateId(RegistryError):
    def __init__(self, entity_id: str):
        super().__init__(f"id already registered: {entity_id}")
        self.entity_id = entity_id


class InvalidDescriptor(RegistryError):
    def __init__(self, violations: list[str]):
        super().__init__("invalid skill descriptor: " + "; ".join(violations))
        self.violations = violations


class InvalidConfig(RegistryError):
    def __init__(self, violations: list[str]):
        super().__init__("invalid meta-skill config: " + "; ".join(violations))
        self.violations = violations


class UnknownMember(RegistryError):
    def __init__(self, skill_id: str):
        super().__init__(f"member skill not registered: {skill_id}")
        self.skill_id = skill_id


class NotFound(RegistryError):
    def __init__(self, entity_id: str):
        super().__init__(f"not registered: {entity_id}")
        self.entity_id = entity_id


class InUse(RegistryError):
    def __init__(self, skill_id: str, meta_ids: list[str]):
        super().__init__(f"skill {skill_id} is referenced by meta-skills: {', '.join(meta_ids)}")
        self.skill_id = skill_id
        self.meta_ids = meta_ids


@dataclass(frozen=True)
class HealthStatus:
    skill_id: str
    reachable: bool
    round_trip_ms: Optional[float]
    checked_at: str

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "skill_id": self.skill_id,
            "reachable": self.reachable,
            "checked_at": self.checked_at,
        }
        if self.round_trip_ms is not None:
            out["round_trip_ms"] = self.round_trip_ms
        return out


@dataclass(frozen=True)
class RegistrySnapshot:
    """Immutable view of the whole registry at one version."""

    skills: dict[str, SkillDescriptor]
    meta_skills: dict[str, MetaSkillConfig]
    version: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "skills": {sid: d.to_dict() for sid, d in self.skills.items()},
            "meta_skills": {mid: c.to_dict() for mid, c in self.meta_skills.items()},
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RegistrySnapshot":
        return cls(
            skills={sid: SkillDescriptor.from_dict(d) for sid, d in data.get("skills", {}).items()},
            meta_skills={
                mid: MetaSkillConfig.from_dict(c) for mid, c in data.get("meta_skills", {}).items()
            },
            version=int(data.get("version", 0)),
        )

    @classmethod
    def empty(cls) -> "RegistrySnapshot":
        return cls(skills={}, meta_skills={}, version=0)


def _registration_order(desc: SkillDescriptor) -> tuple[str, str]:
    # ISO timestamps compare chronologically; skill_id breaks exact ties.
    return (desc.registered_at, desc.skill_id)


class Registry:
    """Single-writer, many-reader store backed by one JSON file.

    Mutations build a fresh snapshot, persist it, then publish it; readers
    always see a complete, consistent state.
    """

    def __init__(self, path: str | Path | None = None):
        self._path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        if self._path is not None and self._path.exists():
            self._snapshot = RegistrySnapshot.from_dict(
                json.loads(self._path.read_text(encoding="utf-8"))
            )
        else:
            self._snapshot = RegistrySnapshot.empty()

    # -- reads ---------------------------------------------------------

    def snapshot(self) -> RegistrySnapshot:
        return self._snapshot

    @property
    def version(self) -> int:
        return self._snapshot.version

    def get_skill(self, skill_id: str) -> Optional[SkillDescriptor]:
        return self._snapshot.skills.get(skill_id)

    def get_meta_skill(self, meta_id: str) -> Optional[MetaSkillConfig]:
        return self._snapshot.meta_skills.get(meta_id)

    def list_skills(self) -> list[SkillDescriptor]:
        return sorted(self._snapshot.skills.values(), key=_registration_order)

    def list_meta_skills(self) -> list[MetaSkillConfig]:
        return sorted(self._snapshot.meta_skills.values(), key=lambda c: c.meta_id)

    def skills_for_dataset(self, dataset_tag: str) -> list[SkillDescriptor]:
        """All skills trained on ``dataset_tag``, registration order then id."""
        return [d for d in self.list_skills() if dataset_tag in d.trained_on]

    # -- mutations -----------------------------------------------------

    def register_skill(self, desc: SkillDescriptor) -> int:
        violations = desc.violations()
        if violations:
            raise InvalidDescriptor(violations)
        with self._lock:
            snap = self._snapshot
            if desc.skill_id in snap.skills:
                raise DuplicateId(desc.skill_id)
            stamped = replace(desc, registered_at=utc_now_iso())
            skills = dict(snap.skills)
            skills[stamped.skill_id] = stamped
            self._publish(RegistrySnapshot(skills, dict(snap.meta_skills), snap.version + 1))
            return self._snapshot.version

    def register_meta_skill(self, cfg: MetaSkillConfig) -> int:
        violations = cfg.violations()
        if violations:
            raise InvalidConfig(violations)
        with self._lock:
            snap = self._snapshot
            if cfg.meta_id in snap.meta_skills:
                raise DuplicateId(cfg.meta_id)
            for sid in cfg.member_skill_ids:
                if sid not in snap.skills:
                    raise UnknownMember(sid)
            meta_skills = dict(snap.meta_skills)
            meta_skills[cfg.meta_id] = cfg
            self._publish(RegistrySnapshot(dict(snap.skills), meta_skills, snap.version + 1))
            return self._snapshot.version

    def remove_skill(self, skill_id: str) -> int:
        with self._lock:
            snap = self._snapshot
            if skill_id not in snap.skills:
                raise NotFound(skill_id)
            holders = sorted(
                mid for mid, cfg in snap.meta_skills.items() if skill_id in cfg.member_skill_ids
            )
            if holders:
                raise InUse(skill_id, holders)
            skills = dict(snap.skills)
            del skills[skill_id]
            self._publish(RegistrySnapshot(skills, dict(snap.meta_skills), snap.version + 1))
            return self._snapshot.version

    def remove_meta_skill(self, meta_id: str) -> int:
        with self._lock:
            snap = self._snapshot
            if meta_id not in snap.meta_skills:
                raise NotFound(meta_id)
            meta_skills = dict(snap.meta_skills)
            del meta_skills[meta_id]
            self._publish(RegistrySnapshot(dict(snap.skills), meta_skills, snap.version + 1))
            return self._snapshot.version

    def _publish(self, snap: RegistrySnapshot) -> None:
        # Persist before the new snapshot becomes visible.
        if self._path is not None:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp_name = tempfile.mkstemp(
                dir=self._path.parent, prefix=self._path.name, suffix=".tmp"
            )
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    json.dump(snap.to_dict(), fh, indent=2)
                    fh.write("\n")
                os.replace(tmp_name, self._path)
            except BaseException:
                try:
                    os.unlink(tmp_name)
                except OSError:
                    pass
                raise
        self._snapshot = snap

    # -- health --------------------------------------------------------

    def health_check_all(
        self, timeout_ms: int, client: httpx.Client | None = None
    ) -> list[HealthStatus]:
        """Ping every registered skill's /health concurrently.

        Never raises per-skill: unreachable agents come back with
        reachable=False.
        """
        if timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")
        skills = self.list_skills()
        if not skills:
            return []
        own_client = client is None
        cli = client or httpx.Client()
        try:
            with ThreadPoolExecutor(max_workers=min(len(skills), 32)) as pool:
                return list(pool.map(lambda d: _check_one(cli, d, timeout_ms), skills))
        finally:
            if own_client:
                cli.close()


def _check_one(client: httpx.Client, desc: SkillDescriptor, timeout_ms: int) -> HealthStatus:
    import time

    url = desc.endpoint.rstrip("/") + "/health"
    start = time.perf_counter()
    try:
        resp = client.get(url, timeout=timeout_ms / 1000.0)
        rtt = (time.perf_counter() - start) * 1000.0
        return HealthStatus(desc.skill_id, resp.status_code == 200, rtt, utc_now_iso())
    except httpx.HTTPError:
        return HealthStatus(desc.skill_id, False, None, utc_now_iso())
