"""Token vocabulary and the document <-> token sequence compiler.

Vocabulary (227 IDs):

* 0-23    organ tokens, id = 6 * branching_order + organ_code
          (organ codes: 0 shoot, 1 internode, 2 petiole, 3/4/5 leaf)
* 24-222  quantized parameter values (199-value grid)
* 223-226 SOS, META, PAD, EOS

A full sequence is ``SOS META w h f META body EOS`` where the body lists each
organ token followed by its quantized parameters:

* shoot:     type_label, parent_node_index, base_pitch, base_yaw, base_roll
* internode: length, radius, pitch, phyllotactic_angle
* petiole:   length, radius, pitch, |curvature|, leaflet_scale
* leaf:      scale, pitch, yaw, roll

Petiole curvature is strictly negative in this crop, so its magnitude is
encoded and the sign restored on decode.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import DecodeError, ValidationError
from .model import (
    Internode,
    Leaf,
    OrganCounts,
    MAX_ORDER,
    Petiole,
    Phytomer,
    PlantDoc,
    Shoot,
    validate,
    walk,
)

SOS = 223
META = 224
PAD = 225
EOS = 226
VOCAB_SIZE = 227

ID_BASE = 24
ID_MAX = 222

ORGAN_SHOOT = 0
ORGAN_INTERNODE = 1
ORGAN_PETIOLE = 2

# parameter count per organ code
ARITY = {0: 5, 1: 4, 2: 5, 3: 4, 4: 4, 5: 4}

GRID_MIN = -40.0
GRID_MAX = 360.0

# decade ladders: 10 evenly spaced samples per range
_LADDER_RANGES = ((0.0001, 0.001), (0.001, 0.01), (0.01, 0.1), (0.1, 1.0))
_EXTRA_CONSTANTS = (3.0,)


@dataclass(frozen=True)
class QuantizationGrid:
    values: tuple[float, ...]
    id_base: int = ID_BASE

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PlantMetadata:
    width_m: float
    height_m: float
    vegetation_fraction: float

    def validate(self) -> None:
        vals = (self.width_m, self.height_m, self.vegetation_fraction)
        if not all(math.isfinite(v) and v >= 0 for v in vals):
            raise ValidationError("metadata values must be finite and >= 0")
        if self.vegetation_fraction > 1:
            raise ValidationError("vegetation fraction must be <= 1")


@lru_cache(maxsize=1)
def build_grid() -> QuantizationGrid:
    """The 199-value grid backing parameter token IDs 24-222.

    Union of the 2.5-degree angle grid over [-40, 360], four decade ladders
    of 10 evenly spaced samples each, and the constant 3.0.
    """
    values = {GRID_MIN + 2.5 * k for k in range(161)}
    for lo, hi in _LADDER_RANGES:
        ladder = [lo + (hi - lo) * k / 9 for k in range(10)]
        ladder[-1] = hi  # force exact endpoint so adjacent ladders dedup
        values.update(ladder)
    values.update(_EXTRA_CONSTANTS)
    ordered = tuple(sorted(values))
    assert len(ordered) == ID_MAX - ID_BASE + 1
    return QuantizationGrid(values=ordered)


def encode_value(v: float, grid: QuantizationGrid | None = None) -> int:
    """Token ID of the grid value nearest to v (clamped; ties go low)."""
    if math.isnan(v):
        raise ValueError("cannot encode NaN")
    grid = grid or build_grid()
    values = grid.values
    v = min(max(v, values[0]), values[-1])
    i = bisect_left(values, v)
    if i == 0:
        return grid.id_base
    if i == len(values):
        return grid.id_base + len(values) - 1
    lo, hi = values[i - 1], values[i]
    return grid.id_base + (i - 1 if v - lo <= hi - v else i)


def decode_token(token_id: int, grid: QuantizationGrid | None = None) -> float:
    """Grid value of a parameter token ID."""
    grid = grid or build_grid()
    if not grid.id_base <= token_id <= grid.id_base + len(grid.values) - 1:
        raise DecodeError(f"token id {token_id} outside parameter range")
    return grid.values[token_id - grid.id_base]


def local_half_step(grid: QuantizationGrid, v: float) -> float:
    """Worst-case quantization error for a value near v (after clamping)."""
    values = grid.values
    v = min(max(v, values[0]), values[-1])
    i = bisect_left(values, v)
    lo = values[max(i - 1, 0)]
    hi = values[min(i, len(values) - 1)]
    return max(hi - lo, 0.0) / 2.0


def organ_token_id(order: int, organ_code: int) -> int:
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"branching order {order} outside [0, {MAX_ORDER}]")
    if not 0 <= organ_code <= 5:
        raise ValueError(f"organ code {organ_code} outside [0, 5]")
    return 6 * order + organ_code


def grid_dump(grid: QuantizationGrid | None = None) -> str:
    """Debug/bindings dump: one ``id value`` pair per line, 17 significant digits."""
    grid = grid or build_grid()
    lines = [f"{grid.id_base + i} {v:.17g}" for i, v in enumerate(grid.values)]
    return "\n".join(lines) + "\n"


def _shoot_params(shoot: Shoot) -> tuple[float, ...]:
    return (
        float(shoot.type_label),
        float(shoot.parent_node_index),
        shoot.base_pitch,
        shoot.base_yaw,
        shoot.base_roll,
    )


def tokenize(doc: PlantDoc, meta: PlantMetadata) -> list[int]:
    """Compile a valid document plus metadata into token IDs."""
    validate(doc)
    meta.validate()
    grid = build_grid()
    enc = lambda v: encode_value(v, grid)  # noqa: E731
    ids = [SOS, META, enc(meta.width_m), enc(meta.height_m), enc(meta.vegetation_fraction), META]
    for kind, order, organ in walk(doc):
        if kind == "shoot":
            ids.append(organ_token_id(order, ORGAN_SHOOT))
            ids.extend(enc(p) for p in _shoot_params(organ))
        elif kind == "internode":
            ids.append(organ_token_id(order, ORGAN_INTERNODE))
            ids.extend(enc(p) for p in (organ.length, organ.radius, organ.pitch, organ.phyllotactic_angle))
        elif kind == "petiole":
            ids.append(organ_token_id(order, ORGAN_PETIOLE))
            ids.extend(
                enc(p)
                for p in (organ.length, organ.radius, organ.pitch, abs(organ.curvature), organ.leaflet_scale)
            )
        else:
            ids.append(organ_token_id(order, organ.position_label))
            ids.extend(enc(p) for p in (organ.scale, organ.pitch, organ.yaw, organ.roll))
    ids.append(EOS)
    return ids


class _ShootBuilder:
    __slots__ = ("order", "parent_node_index", "params", "phytomers", "children")

    def __init__(self, order: int, parent_node_index: int, params: list[float]):
        self.order = order
        self.parent_node_index = parent_node_index
        self.params = params
        self.phytomers: list[_PhytomerBuilder] = []
        self.children: list[tuple[int, "_ShootBuilder"]] = []


class _PhytomerBuilder:
    __slots__ = ("internode", "petioles")

    def __init__(self, internode: Internode):
        self.internode = internode
        self.petioles: list[list] = []  # each entry: [params, leaves]


def _expect_params(ids: Sequence[int], pos: int, arity: int, grid: QuantizationGrid) -> tuple[list[float], int]:
    params = []
    for k in range(arity):
        if pos + k >= len(ids):
            raise DecodeError("sequence ends inside a parameter group", len(ids) - 1)
        t = ids[pos + k]
        if not ID_BASE <= t <= ID_MAX:
            raise DecodeError(f"expected parameter token, got {t}", pos + k)
        params.append(grid.values[t - ID_BASE])
    return params, pos + arity


def detokenize(ids: Sequence[int], strict: bool = True) -> tuple[PlantDoc, PlantMetadata]:
    """Reconstruct (document, metadata) from a well-framed token sequence.

    A shoot token of order M+1 attaches to the phytomer of the most recent
    order-M internode; its encoded parent-node parameter is checked against
    that position (strict mode errors on mismatch, lenient mode lets the
    positional attachment win).

    The token vocabulary does not carry plant age or base position; the
    reconstructed document uses age 0 at the origin.
    """
    grid = build_grid()
    n = len(ids)
    for pos, t in enumerate(ids):
        if not 0 <= t < VOCAB_SIZE:
            raise DecodeError(f"unknown token id {t}", pos)
    if n < 8 or ids[0] != SOS or ids[1] != META:
        raise DecodeError("sequence must start with SOS META", 0)
    meta_params, pos = _expect_params(ids, 2, 3, grid)
    if pos >= n or ids[pos] != META:
        raise DecodeError("expected closing META after 3 metadata parameters", min(pos, n - 1))
    pos += 1
    meta = PlantMetadata(*meta_params)

    root: _ShootBuilder | None = None
    last_shoot: dict[int, _ShootBuilder] = {}
    last_phytomer: dict[int, tuple[_ShootBuilder, int, _PhytomerBuilder]] = {}
    last_petiole: dict[int, list] = {}

    while pos < n and ids[pos] != EOS:
        t = ids[pos]
        if t > 23:
            raise DecodeError(f"expected organ token, got {t}", pos)
        order, code = divmod(t, 6)
        at = pos
        params, pos = _expect_params(ids, pos + 1, ARITY[code], grid)
        if code == ORGAN_SHOOT:
            if order == 0:
                if root is not None:
                    raise DecodeError("second order-0 shoot token", at)
                parent_index = 0
            else:
                host = last_phytomer.get(order - 1)
                if host is None:
                    raise DecodeError(f"order-{order} shoot with no preceding order-{order - 1} internode", at)
                parent_index = host[1]
            sb = _ShootBuilder(order, parent_index, params)
            if encode_value(float(parent_index), grid) != ids[at + 2]:
                if strict:
                    raise DecodeError(
                        f"parent node parameter inconsistent with positional attachment {parent_index}", at + 2
                    )
            type_val = params[0]
            if type_val not in (1.0, 3.0):
                if strict:
                    raise DecodeError(f"shoot type parameter {type_val} is not 1 or 3", at + 1)
                sb.params[0] = 1.0 if abs(type_val - 1.0) <= abs(type_val - 3.0) else 3.0
            if order == 0:
                root = sb
            else:
                host_shoot, host_index, _ = last_phytomer[order - 1]
                host_shoot.children.append((host_index, sb))
            last_shoot[order] = sb
        elif code == ORGAN_INTERNODE:
            sb = last_shoot.get(order)
            if sb is None:
                raise DecodeError(f"order-{order} internode with no preceding order-{order} shoot", at)
            pb = _PhytomerBuilder(
                Internode(length=params[0], radius=params[1], pitch=params[2], phyllotactic_angle=params[3])
            )
            sb.phytomers.append(pb)
            last_phytomer[order] = (sb, len(sb.phytomers) - 1, pb)
        elif code == ORGAN_PETIOLE:
            host = last_phytomer.get(order)
            if host is None:
                raise DecodeError(f"order-{order} petiole with no preceding order-{order} internode", at)
            entry = [params, []]
            host[2].petioles.append(entry)
            last_petiole[order] = entry
        else:
            entry = last_petiole.get(order)
            if entry is None:
                raise DecodeError(f"order-{order} leaf with no preceding order-{order} petiole", at)
            entry[1].append(
                Leaf(scale=params[0], pitch=params[1], yaw=params[2], roll=params[3], position_label=code)
            )
    if pos >= n:
        raise DecodeError("missing EOS", n - 1)
    if pos != n - 1:
        raise DecodeError("tokens after EOS", pos + 1)
    if root is None:
        raise DecodeError("empty body", pos)

    next_id = 0

    def build(sb: _ShootBuilder) -> Shoot:
        nonlocal next_id
        shoot_id = next_id
        next_id += 1
        phytomers = []
        for pb in sb.phytomers:
            petioles = []
            for params, leaves in pb.petioles:
                petioles.append(
                    Petiole(
                        length=params[0],
                        radius=params[1],
                        pitch=params[2],
                        curvature=-params[3],
                        leaflet_scale=params[4],
                        leaves=tuple(leaves),
                    )
                )
            phytomers.append(Phytomer(internode=pb.internode, petioles=tuple(petioles)))
        children = tuple(build(child) for _, child in sb.children)
        return Shoot(
            shoot_id=shoot_id,
            parent_node_index=sb.parent_node_index,
            type_label=int(sb.params[0]),
            base_pitch=sb.params[2],
            base_yaw=sb.params[3],
            base_roll=sb.params[4],
            order=sb.order,
            phytomers=tuple(phytomers),
            children=children,
        )

    doc = PlantDoc(base_position=(0.0, 0.0, 0.0), plant_age=0, root_shoot=build(root))
    try:
        validate(doc)
    except ValidationError as exc:
        raise DecodeError(f"decoded document invalid: {exc}", n - 1) from exc
    return doc, meta


def count_organs(ids: Sequence[int]) -> OrganCounts:
    """Organ tallies read directly from a token sequence, without rebuilding
    the document: shoots are tokens with organ code 0, phytomers code 1,
    petioles code 2, leaves codes 3-5.
    """
    n = len(ids)
    if n < 8 or ids[0] != SOS or ids[1] != META or ids[5] != META or ids[-1] != EOS:
        raise DecodeError("sequence is not framed as SOS META p p p META ... EOS", 0)
    grid = build_grid()
    _expect_params(ids, 2, 3, grid)
    tallies = {code: [0] * (MAX_ORDER + 1) for code in range(4)}
    pos = 6
    while pos < n - 1:
        t = ids[pos]
        if t > 23:
            raise DecodeError(f"expected organ token, got {t}", pos)
        order, code = divmod(t, 6)
        tallies[min(code, 3)][order] += 1
        _, pos = _expect_params(ids, pos + 1, ARITY[code], grid)
    by = {code: tuple(tallies[code]) for code in range(4)}
    return OrganCounts(
        shoots=sum(by[0]),
        phytomers=sum(by[1]),
        petioles=sum(by[2]),
        leaves=sum(by[3]),
        shoots_by_order=by[0],
        phytomers_by_order=by[1],
        petioles_by_order=by[2],
        leaves_by_order=by[3],
    )


def sequence_length(doc: PlantDoc) -> int:
    """Expected token count: 6 framing/metadata tokens + body + EOS."""
    body = sum(1 + ARITY[{"shoot": 0, "internode": 1, "petiole": 2, "leaf": 3}[kind]] for kind, _, _ in walk(doc))
    return 6 + body + 1


def format_token_line(ids: Iterable[int]) -> str:
    return " ".join(str(i) for i in ids) + "\n"


def parse_token_line(line: str) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise DecodeError(f"non-integer token in line {line!r}", 0) from None


def read_token_file(path) -> list[list[int]]:
    """Token file format: one sequence per line, space-separated integers."""
    with open(path, "r", encoding="utf-8") as fh:
        return [parse_token_line(line) for line in fh if line.strip()]


def write_token_file(path, sequences: Iterable[Sequence[int]], append: bool = False) -> None:
    mode = "a" if append else "w"
    with open(path, mode, encoding="utf-8") as fh:
        for seq in sequences:
            fh.write(format_token_line(seq))
