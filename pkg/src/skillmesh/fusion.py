"""Early fusion of adapter weights: element-wise (optionally weighted)
averaging of named float32 tensor collections, plus the on-disk format.

File layout (all integers little-endian):

    "SQTM"                      4-byte magic
    u8        format version, currently 1
    u32       header length in bytes
    bytes     header: UTF-8 JSON
              {"source_id": str,
               "tensors": [{"name", "shape", "offset", "length"}, ...]}
              offset/length are byte positions inside the payload
    bytes     payload: concatenated little-endian float32 values
    u32       CRC32 over header + payload

Averaging accumulates in float64 and stores float32, which removes
summation-order sensitivity at this scale.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence, TYPE_CHECKING

import numpy as np

from .core import QAFormat, SkillDescriptor, SkillMeshError

if TYPE_CHECKING:
    from .registry import Registry

MAGIC = b"SQTM"
FORMAT_VERSION = 1


class FusionError(SkillMeshError):
    pass


class NameSetMismatch(FusionError):
    def __init__(self, source_id: str, missing: list[str], extra: list[str]):
        super().__init__(
            f"tensor names of {source_id!r} differ: missing={missing} extra={extra}"
        )
        self.source_id = source_id
        self.missing = missing
        self.extra = extra


class ShapeMismatch(FusionError):
    def __init__(self, name: str, shapes: list[tuple[int, ...]]):
        super().__init__(f"tensor {name!r} has conflicting shapes: {shapes}")
        self.name = name
        self.shapes = shapes


class NonFiniteInput(FusionError):
    def __init__(self, name: str, index: int):
        super().__init__(f"tensor {name!r} has a non-finite value at flat index {index}")
        self.name = name
        self.index = index


class InvalidWeights(FusionError):
    pass


class TensorFileError(FusionError):
    pass


class BadMagic(TensorFileError):
    pass


class CorruptHeader(TensorFileError):
    pass


class TruncatedPayload(TensorFileError):
    pass


class ChecksumMismatch(TensorFileError):
    pass


class IoFailure(TensorFileError):
    pass


@dataclass(frozen=True)
class Tensor:
    """One named weight array: shape plus flat row-major float32 data."""

    shape: tuple[int, ...]
    data: np.ndarray

    def __post_init__(self) -> None:
        if any(d <= 0 for d in self.shape):
            raise ValueError(f"shape dimensions must be positive: {self.shape}")
        arr = np.ascontiguousarray(self.data, dtype=np.float32).reshape(-1)
        object.__setattr__(self, "data", arr)
        expected = int(np.prod(self.shape, dtype=np.int64))
        if arr.size != expected:
            raise ValueError(f"shape {self.shape} needs {expected} values, got {arr.size}")


@dataclass(frozen=True)
class TensorMap:
    entries: dict[str, Tensor]
    source_id: str = ""

    def names(self) -> set[str]:
        return set(self.entries)


@dataclass(frozen=True)
class FusionSpec:
    """What to average: at least two sources, optionally convex weights."""

    inputs: tuple[str, ...]
    weights: Optional[tuple[float, ...]] = None
    output_id: str = "fused"

    def __post_init__(self) -> None:
        if len(self.inputs) < 2:
            raise ValueError("fusion needs at least two inputs")


def _check_weights(spec: FusionSpec) -> tuple[float, ...]:
    k = len(spec.inputs)
    if spec.weights is None:
        return tuple(1.0 / k for _ in range(k))
    w = tuple(float(x) for x in spec.weights)
    if len(w) != k:
        raise InvalidWeights(f"got {len(w)} weights for {k} inputs")
    if any(x < 0 for x in w):
        raise InvalidWeights("weights must be nonnegative")
    if abs(sum(w) - 1.0) > 1e-9:
        raise InvalidWeights(f"weights sum to {sum(w)!r}, expected 1")
    if all(x == 0 for x in w):
        raise InvalidWeights("all weights are zero")
    return w


def average_adapters(spec: FusionSpec, maps: Sequence[TensorMap]) -> TensorMap:
    """Element-wise weighted mean across adapter maps.

    out[name][i] = sum_k w_k * maps[k][name][i], accumulated in float64,
    stored as float32.  All maps must carry the identical tensor-name set
    at identical shapes.
    """
    if len(maps) != len(spec.inputs):
        raise ValueError(f"spec lists {len(spec.inputs)} inputs but {len(maps)} maps given")
    weights = _check_weights(spec)

    reference = maps[0].names()
    for m in maps[1:]:
        names = m.names()
        if names != reference:
            raise NameSetMismatch(
                m.source_id or "<unnamed>",
                missing=sorted(reference - names),
                extra=sorted(names - reference),
            )
    for name in sorted(reference):
        shapes = [m.entries[name].shape for m in maps]
        if len(set(shapes)) != 1:
            raise ShapeMismatch(name, shapes)
        for m in maps:
            data = m.entries[name].data
            finite = np.isfinite(data)
            if not finite.all():
                raise NonFiniteInput(name, int(np.argmin(finite)))

    fused: dict[str, Tensor] = {}
    for name in maps[0].entries:
        acc = np.zeros(maps[0].entries[name].data.size, dtype=np.float64)
        for w, m in zip(weights, maps):
            acc += w * m.entries[name].data.astype(np.float64)
        fused[name] = Tensor(maps[0].entries[name].shape, acc.astype(np.float32))
    return TensorMap(entries=fused, source_id=spec.output_id)


# -- file format ---------------------------------------------------------


def save_tensor_map(tensor_map: TensorMap, path: str | Path) -> None:
    chunks: list[bytes] = []
    index: list[dict[str, Any]] = []
    offset = 0
    for name, tensor in tensor_map.entries.items():
        raw = tensor.data.astype("<f4", copy=False).tobytes()
        index.append(
            {"name": name, "shape": list(tensor.shape), "offset": offset, "length": len(raw)}
        )
        chunks.append(raw)
        offset += len(raw)
    payload = b"".join(chunks)
    header = json.dumps({"source_id": tensor_map.source_id, "tensors": index}).encode("utf-8")
    crc = zlib.crc32(header + payload) & 0xFFFFFFFF
    blob = (
        MAGIC
        + struct.pack("<B", FORMAT_VERSION)
        + struct.pack("<I", len(header))
        + header
        + payload
        + struct.pack("<I", crc)
    )
    try:
        Path(path).write_bytes(blob)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_tensor_map(path: str | Path) -> TensorMap:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    if len(blob) < 4 or blob[:4] != MAGIC:
        raise BadMagic(f"{path}: not a tensor-map file")
    if len(blob) < 9:
        raise CorruptHeader(f"{path}: missing version/header length")
    version = blob[4]
    if version != FORMAT_VERSION:
        raise CorruptHeader(f"{path}: unsupported format version {version}")
    (header_len,) = struct.unpack_from("<I", blob, 5)
    header_end = 9 + header_len
    if len(blob) < header_end:
        raise CorruptHeader(f"{path}: header length {header_len} exceeds file size")
    header_bytes = blob[9:header_end]
    try:
        header = json.loads(header_bytes.decode("utf-8"))
        source_id = str(header["source_id"])
        index = header["tensors"]
        entries_meta = [
            (str(e["name"]), tuple(int(d) for d in e["shape"]), int(e["offset"]), int(e["length"]))
            for e in index
        ]
    except (ValueError, KeyError, TypeError, UnicodeDecodeError) as exc:
        raise CorruptHeader(f"{path}: malformed header: {exc}") from exc

    payload_len = max((off + length for _, _, off, length in entries_meta), default=0)
    expected_total = header_end + payload_len + 4
    if len(blob) < expected_total:
        raise TruncatedPayload(
            f"{path}: file is {len(blob)} bytes, format needs {expected_total}"
        )
    if len(blob) > expected_total:
        raise CorruptHeader(f"{path}: {len(blob) - expected_total} trailing bytes")
    payload = blob[header_end : header_end + payload_len]
    (stored_crc,) = struct.unpack_from("<I", blob, header_end + payload_len)
    actual_crc = zlib.crc32(header_bytes + payload) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise ChecksumMismatch(f"{path}: crc {actual_crc:#010x} != stored {stored_crc:#010x}")

    entries: dict[str, Tensor] = {}
    for name, shape, off, length in entries_meta:
        if name in entries:
            raise CorruptHeader(f"{path}: duplicate tensor name {name!r}")
        expected = int(np.prod(shape, dtype=np.int64)) * 4
        if length != expected or off < 0 or off + length > payload_len:
            raise CorruptHeader(f"{path}: tensor {name!r} extent disagrees with shape {shape}")
        data = np.frombuffer(payload, dtype="<f4", count=length // 4, offset=off)
        finite = np.isfinite(data)
        if not finite.all():
            raise NonFiniteInput(name, int(np.argmin(finite)))
        entries[name] = Tensor(shape, data.copy())
    return TensorMap(entries=entries, source_id=source_id)


def tensor_maps_equal(a: TensorMap, b: TensorMap) -> bool:
    """Bit-exact comparison, used by round-trip checks."""
    if a.source_id != b.source_id or a.names() != b.names():
        return False
    for name, tensor in a.entries.items():
        other = b.entries[name]
        if tensor.shape != other.shape:
            return False
        if tensor.data.tobytes() != other.data.tobytes():
            return False
    return True


def fuse_and_register(
    spec: FusionSpec,
    registry: "Registry",
    *,
    tensor_dir: str | Path,
    endpoint: str,
    fmt: QAFormat | None = None,
    display_name: str | None = None,
) -> SkillDescriptor:
    """Average the adapters of already-registered skills and register the
    result as a new skill.

    ``spec.inputs`` are member skill ids whose weight files live at
    ``<tensor_dir>/<skill_id>.sqtm``; the fused artifact lands at
    ``<tensor_dir>/<spec.output_id>.sqtm`` and the new skill's trained_on
    is the union of the members'.
    """
    from .registry import UnknownMember

    tensor_dir = Path(tensor_dir)
    members: list[SkillDescriptor] = []
    for sid in spec.inputs:
        desc = registry.get_skill(sid)
        if desc is None:
            raise UnknownMember(sid)
        members.append(desc)

    maps = [load_tensor_map(tensor_dir / f"{sid}.sqtm") for sid in spec.inputs]
    fused = average_adapters(spec, maps)
    save_tensor_map(fused, tensor_dir / f"{spec.output_id}.sqtm")

    if fmt is None:
        formats = {m.format for m in members}
        if len(formats) != 1:
            raise ValueError("members have mixed formats; pass fmt explicitly")
        fmt = formats.pop()
    trained_on = frozenset().union(*(m.trained_on for m in members))
    descriptor = SkillDescriptor(
        skill_id=spec.output_id,
        endpoint=endpoint,
        format=fmt,
        trained_on=trained_on,
        display_name=display_name or f"fused({', '.join(spec.inputs)})",
    )
    registry.register_skill(descriptor)
    registered = registry.get_skill(spec.output_id)
    assert registered is not None
    return registered
