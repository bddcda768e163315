"""Plant architecture domain model.

A plant document is a tree of shoots; each shoot carries an ordered list of
phytomers (internode + petioles + leaves) and may spawn child shoots from the
node where an internode and petiole meet.  All angles are degrees, all
lengths are meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

from .errors import ValidationError

MAX_ORDER = 3
MAX_AGE = 39

UNIFOLIATE = 1
TRIFOLIATE = 3

# leaf position labels: terminal / solo, lateral-left, lateral-right
LEAF_TERMINAL = 3
LEAF_LATERAL_LEFT = 4
LEAF_LATERAL_RIGHT = 5


@dataclass(frozen=True)
class Leaf:
    scale: float
    pitch: float
    yaw: float
    roll: float
    position_label: int = LEAF_TERMINAL


@dataclass(frozen=True)
class Petiole:
    length: float
    radius: float
    pitch: float
    curvature: float  # degrees of bend per meter, <= 0 for cowpea
    leaflet_scale: float
    leaves: tuple[Leaf, ...]


@dataclass(frozen=True)
class Internode:
    length: float
    radius: float
    pitch: float
    phyllotactic_angle: float


@dataclass(frozen=True)
class Phytomer:
    internode: Internode
    petioles: tuple[Petiole, ...]


@dataclass(frozen=True)
class Shoot:
    shoot_id: int
    parent_node_index: int
    type_label: int  # UNIFOLIATE or TRIFOLIATE
    base_pitch: float
    base_yaw: float
    base_roll: float
    order: int
    phytomers: tuple[Phytomer, ...]
    children: tuple["Shoot", ...] = field(default=())


@dataclass(frozen=True)
class PlantDoc:
    base_position: tuple[float, float, float]
    plant_age: int
    root_shoot: Shoot


@dataclass(frozen=True)
class OrganCounts:
    """Organ tallies, total and per branching order (index = order)."""

    shoots: int
    phytomers: int
    petioles: int
    leaves: int
    shoots_by_order: tuple[int, ...]
    phytomers_by_order: tuple[int, ...]
    petioles_by_order: tuple[int, ...]
    leaves_by_order: tuple[int, ...]


def _check(cond: bool, message: str, path: str) -> None:
    if not cond:
        raise ValidationError(message, path)


def _validate_shoot(shoot: Shoot, depth: int, path: str, seen_ids: set[int]) -> None:
    _check(shoot.order == depth, f"order {shoot.order} does not match nesting depth {depth}", path)
    _check(shoot.order <= MAX_ORDER, f"branching order {shoot.order} exceeds {MAX_ORDER}", path)
    _check(shoot.shoot_id not in seen_ids, f"duplicate shoot id {shoot.shoot_id}", path)
    seen_ids.add(shoot.shoot_id)
    _check(shoot.type_label in (UNIFOLIATE, TRIFOLIATE), f"bad type label {shoot.type_label}", path)
    _check(len(shoot.phytomers) >= 1, "shoot has no phytomers", path)
    for i, phy in enumerate(shoot.phytomers):
        ppath = f"{path}/phytomer[{i}]"
        inode = phy.internode
        _check(inode.length > 0, "internode length must be > 0", ppath)
        _check(inode.radius > 0, "internode radius must be > 0", ppath)
        _check(len(phy.petioles) >= 1, "phytomer has no petioles", ppath)
        for k, pet in enumerate(phy.petioles):
            qpath = f"{ppath}/petiole[{k}]"
            _check(pet.length > 0, "petiole length must be > 0", qpath)
            _check(pet.radius > 0, "petiole radius must be > 0", qpath)
            _check(pet.curvature <= 0, "petiole curvature must be <= 0", qpath)
            _check(len(pet.leaves) in (1, 3), f"petiole has {len(pet.leaves)} leaves, expected 1 or 3", qpath)
            for j, leaf in enumerate(pet.leaves):
                lpath = f"{qpath}/leaf[{j}]"
                _check(leaf.scale > 0, "leaf scale must be > 0", lpath)
                _check(
                    leaf.position_label in (LEAF_TERMINAL, LEAF_LATERAL_LEFT, LEAF_LATERAL_RIGHT),
                    f"bad leaf position label {leaf.position_label}",
                    lpath,
                )
    for child in shoot.children:
        cpath = f"{path}/shoot[{child.shoot_id}]"
        _check(
            0 <= child.parent_node_index < len(shoot.phytomers),
            f"parent node index {child.parent_node_index} out of range",
            cpath,
        )
        _validate_shoot(child, depth + 1, cpath, seen_ids)


def validate(doc: PlantDoc) -> None:
    """Raise ValidationError if the document violates any invariant."""
    _check(len(doc.base_position) == 3, "base position must be a 3-vector", "plant")
    _check(all(math.isfinite(v) for v in doc.base_position), "base position must be finite", "plant")
    _check(
        isinstance(doc.plant_age, int) and 0 <= doc.plant_age <= MAX_AGE,
        f"plant age {doc.plant_age} outside [0, {MAX_AGE}]",
        "plant",
    )
    _check(doc.root_shoot.order == 0, "root shoot must have order 0", "plant")
    _check(doc.root_shoot.parent_node_index == 0, "root shoot parent node must be 0", "plant")
    _validate_shoot(doc.root_shoot, 0, "plant/shoot[0]", set())


def children_by_node(shoot: Shoot) -> dict[int, list[Shoot]]:
    """Group child shoots by the phytomer index they attach to, preserving order."""
    grouped: dict[int, list[Shoot]] = {}
    for child in shoot.children:
        grouped.setdefault(child.parent_node_index, []).append(child)
    return grouped


def walk(doc: PlantDoc) -> Iterator[tuple[str, int, object]]:
    """Yield (kind, order, organ) in canonical document order.

    Order is phytomer-major depth-first: for each phytomer, the internode and
    first petiole (with its leaves) come first, then the full subtree of every
    child shoot attached at that node, then any remaining petioles.
    """

    def rec(shoot: Shoot) -> Iterator[tuple[str, int, object]]:
        yield ("shoot", shoot.order, shoot)
        grouped = children_by_node(shoot)
        for i, phy in enumerate(shoot.phytomers):
            yield ("internode", shoot.order, phy.internode)
            head, tail = phy.petioles[0], phy.petioles[1:]
            yield ("petiole", shoot.order, head)
            for leaf in head.leaves:
                yield ("leaf", shoot.order, leaf)
            for child in grouped.get(i, ()):
                yield from rec(child)
            for pet in tail:
                yield ("petiole", shoot.order, pet)
                for leaf in pet.leaves:
                    yield ("leaf", shoot.order, leaf)

    yield from rec(doc.root_shoot)


def count_organs_doc(doc: PlantDoc) -> OrganCounts:
    """Tally organs by traversal."""
    by_order = {kind: [0] * (MAX_ORDER + 1) for kind in ("shoot", "internode", "petiole", "leaf")}
    for kind, order, _ in walk(doc):
        by_order[kind][order] += 1
    return OrganCounts(
        shoots=sum(by_order["shoot"]),
        phytomers=sum(by_order["internode"]),
        petioles=sum(by_order["petiole"]),
        leaves=sum(by_order["leaf"]),
        shoots_by_order=tuple(by_order["shoot"]),
        phytomers_by_order=tuple(by_order["internode"]),
        petioles_by_order=tuple(by_order["petiole"]),
        leaves_by_order=tuple(by_order["leaf"]),
    )


def iter_shoots(doc: PlantDoc) -> Iterator[Shoot]:
    """Yield every shoot in canonical order."""
    for kind, _, organ in walk(doc):
        if kind == "shoot":
            yield organ  # type: ignore[misc]
