"""Turtle-style 3D reconstruction and trait derivation.

Conventions: world z is vertical; a frame is an origin plus a right/forward/up
rotation matrix (columns).  A shoot grows along its frame's up axis.  Organ
rotations compose as local-axis rotations (yaw about up, pitch about right,
roll about forward); petiole curvature is degrees of bend per meter applied
uniformly in the petiole's vertical plane, discretized into straight segments
with half-step rotations so the chord tilts by exactly half the total bend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .codec import PlantMetadata
from .model import (
    LEAF_LATERAL_LEFT,
    LEAF_LATERAL_RIGHT,
    Leaf,
    Petiole,
    PlantDoc,
    Shoot,
    children_by_node,
)

PETIOLE_SEGMENTS = 10
LATERAL_LEAFLET_POSITION = 0.85  # fraction of petiole length
LATERAL_LEAFLET_YAW_DEG = 60.0
DEFAULT_LEAF_AREA_UNIT_M2 = 0.01  # prototype leaf area per unit scale^2

HISTOGRAM_BINS = 10
HISTOGRAM_MAX_DEG = 90.0

_RENORM_EVERY = 16


def _rot_x(deg: float) -> np.ndarray:
    r = math.radians(deg)
    c, s = math.cos(r), math.sin(r)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _rot_y(deg: float) -> np.ndarray:
    r = math.radians(deg)
    c, s = math.cos(r), math.sin(r)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rot_z(deg: float) -> np.ndarray:
    r = math.radians(deg)
    c, s = math.cos(r), math.sin(r)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _axis_rotation(axis: np.ndarray, deg: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis."""
    r = math.radians(deg)
    c, s = math.cos(r), math.sin(r)
    x, y, z = axis
    cross = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return c * np.eye(3) + s * cross + (1.0 - c) * np.outer(axis, axis)


def _orthonormalize(rot: np.ndarray) -> np.ndarray:
    right = rot[:, 0] / np.linalg.norm(rot[:, 0])
    forward = rot[:, 1] - np.dot(rot[:, 1], right) * right
    forward /= np.linalg.norm(forward)
    up = np.cross(right, forward)
    return np.column_stack([right, forward, up])


@dataclass
class Frame:
    """Origin plus orthonormal right/forward/up axes (right x forward = up)."""

    origin: np.ndarray
    rot: np.ndarray
    steps: int = 0

    @staticmethod
    def world(origin=(0.0, 0.0, 0.0)) -> "Frame":
        return Frame(origin=np.asarray(origin, dtype=float), rot=np.eye(3))

    @property
    def right(self) -> np.ndarray:
        return self.rot[:, 0]

    @property
    def forward(self) -> np.ndarray:
        return self.rot[:, 1]

    @property
    def up(self) -> np.ndarray:
        return self.rot[:, 2]

    def _compose(self, rot: np.ndarray) -> "Frame":
        steps = self.steps + 1
        if steps % _RENORM_EVERY == 0:
            rot = _orthonormalize(rot)
        return Frame(origin=self.origin, rot=rot, steps=steps)

    def rotated_local(self, rmat: np.ndarray) -> "Frame":
        return self._compose(self.rot @ rmat)

    def rotated_world(self, rmat: np.ndarray) -> "Frame":
        return self._compose(rmat @ self.rot)

    def yaw(self, deg: float) -> "Frame":
        return self.rotated_local(_rot_z(deg))

    def pitch(self, deg: float) -> "Frame":
        return self.rotated_local(_rot_x(deg))

    def roll(self, deg: float) -> "Frame":
        return self.rotated_local(_rot_y(deg))

    def advanced(self, distance: float) -> "Frame":
        return Frame(origin=self.origin + distance * self.up, rot=self.rot, steps=self.steps)


@dataclass(frozen=True)
class Segment:
    start: np.ndarray
    end: np.ndarray
    radius: float
    kind: str  # "internode" | "petiole"
    shoot_id: int


@dataclass(frozen=True)
class LeafPlacement:
    frame: Frame
    scale: float
    multiplier: float  # leaflet size multiplier (1 for terminal/solo)
    normal: np.ndarray


@dataclass
class Skeleton3D:
    segments: list[Segment] = field(default_factory=list)
    leaf_frames: list[LeafPlacement] = field(default_factory=list)
    leaf_area_unit_m2: float = DEFAULT_LEAF_AREA_UNIT_M2


def _bend_axis(frame: Frame) -> np.ndarray:
    """Horizontal axis normal to the plane spanned by the growth direction
    and the vertical; falls back to the frame's right axis when vertical."""
    axis = np.cross(frame.up, np.array([0.0, 0.0, 1.0]))
    norm = np.linalg.norm(axis)
    if norm < 1e-12:
        return frame.right.copy()
    return axis / norm


def _walk_petiole(tip: Frame, length: float, total_bend_deg: float, n: int):
    """March n straight segments with half-step bends; yields (start, end, frame)."""
    frame = tip
    step = length / n
    for _ in range(n):
        half = _axis_rotation(_bend_axis(frame), total_bend_deg / n / 2.0)
        frame = frame.rotated_world(half)
        start = frame.origin
        frame = frame.advanced(step)
        half = _axis_rotation(_bend_axis(frame), total_bend_deg / n / 2.0)
        frame = frame.rotated_world(half)
        yield start, frame.origin, frame


def _petiole_point(tip: Frame, length: float, total_bend_deg: float, n: int, fraction: float) -> Frame:
    """Frame at an arc-length fraction along the discretized petiole."""
    target = fraction * length
    walked = 0.0
    step = length / n
    frame = tip
    for start, end, frame_after in _walk_petiole(tip, length, total_bend_deg, n):
        if walked + step >= target - 1e-12:
            direction = (end - start) / step
            return Frame(origin=start + direction * (target - walked), rot=frame_after.rot, steps=frame_after.steps)
        walked += step
        frame = frame_after
    return frame


def _leaf_frame(base: Frame, leaf: Leaf, extra_yaw: float = 0.0) -> Frame:
    return base.yaw(leaf.yaw + extra_yaw).pitch(leaf.pitch).roll(leaf.roll)


def reconstruct(doc: PlantDoc, leaf_area_unit_m2: float = DEFAULT_LEAF_AREA_UNIT_M2) -> Skeleton3D:
    """Build the 3D skeleton of a valid document."""
    sk = Skeleton3D(leaf_area_unit_m2=leaf_area_unit_m2)

    def place_leaf(frame: Frame, leaf: Leaf, multiplier: float, extra_yaw: float) -> None:
        lf = _leaf_frame(frame, leaf, extra_yaw)
        sk.leaf_frames.append(
            LeafPlacement(frame=lf, scale=leaf.scale, multiplier=multiplier, normal=lf.up.copy())
        )

    def do_petiole(pet: Petiole, attach: Frame, yaw_offset: float, shoot_id: int) -> None:
        frame = attach.yaw(yaw_offset).pitch(pet.pitch)
        total_bend = pet.curvature * pet.length
        tip = frame
        for start, end, tip in _walk_petiole(frame, pet.length, total_bend, PETIOLE_SEGMENTS):
            sk.segments.append(Segment(start=start.copy(), end=end.copy(), radius=pet.radius, kind="petiole", shoot_id=shoot_id))
        lateral_base = _petiole_point(frame, pet.length, total_bend, PETIOLE_SEGMENTS, LATERAL_LEAFLET_POSITION)
        for leaf in pet.leaves:
            if leaf.position_label == LEAF_LATERAL_LEFT:
                place_leaf(lateral_base, leaf, pet.leaflet_scale, LATERAL_LEAFLET_YAW_DEG)
            elif leaf.position_label == LEAF_LATERAL_RIGHT:
                place_leaf(lateral_base, leaf, pet.leaflet_scale, -LATERAL_LEAFLET_YAW_DEG)
            else:
                place_leaf(tip, leaf, 1.0, 0.0)

    def do_shoot(shoot: Shoot, attach: Frame) -> None:
        # yaw about the attachment axis, pitch away from it, then roll about
        # the shoot's own growth axis (a local-up rotation after the pitch)
        stem = attach.yaw(shoot.base_yaw).pitch(shoot.base_pitch).yaw(shoot.base_roll)
        grouped = children_by_node(shoot)
        node_frames: list[Frame] = []
        for i, phy in enumerate(shoot.phytomers):
            inode = phy.internode
            stem = stem.yaw(inode.phyllotactic_angle).pitch(inode.pitch)
            start = stem.origin
            stem = stem.advanced(inode.length)
            sk.segments.append(
                Segment(start=start.copy(), end=stem.origin.copy(), radius=inode.radius, kind="internode", shoot_id=shoot.shoot_id)
            )
            node_frames.append(stem)
            n_pet = len(phy.petioles)
            for k, pet in enumerate(phy.petioles):
                do_petiole(pet, stem, 360.0 * k / n_pet, shoot.shoot_id)
            for child in grouped.get(i, ()):
                do_shoot(child, node_frames[child.parent_node_index])

    do_shoot(doc.root_shoot, Frame.world(doc.base_position))
    return sk


def leaf_vertices(placement: LeafPlacement, leaf_area_unit_m2: float) -> np.ndarray:
    """4x3 vertex array of the planar prototype quad (unit area at scale 1)."""
    side = math.sqrt(leaf_area_unit_m2) * placement.scale * placement.multiplier
    o = placement.frame.origin
    f = placement.frame.forward
    r = placement.frame.right
    return np.array(
        [
            o - r * (side / 2.0),
            o + r * (side / 2.0),
            o + f * side + r * (side / 2.0),
            o + f * side - r * (side / 2.0),
        ]
    )


def _all_points(sk: Skeleton3D, include_radius: bool):
    """(vertical samples, horizontal xy samples) over segments and leaf quads."""
    zs: list[float] = []
    xy: list[np.ndarray] = []
    for seg in sk.segments:
        for p in (seg.start, seg.end):
            zs.append(float(p[2]))
            if include_radius:
                r = seg.radius
                xy.extend(
                    (
                        p[:2] + np.array([r, 0.0]),
                        p[:2] + np.array([-r, 0.0]),
                        p[:2] + np.array([0.0, r]),
                        p[:2] + np.array([0.0, -r]),
                    )
                )
            else:
                xy.append(p[:2])
    for placement in sk.leaf_frames:
        for v in leaf_vertices(placement, sk.leaf_area_unit_m2):
            zs.append(float(v[2]))
            xy.append(v[:2])
    return zs, xy


def plant_height(sk: Skeleton3D) -> float:
    """Highest point above the ground plane (z = 0)."""
    zs, _ = _all_points(sk, include_radius=False)
    if not zs:
        return 0.0
    return max(max(zs), 0.0)


def leaf_area(sk: Skeleton3D) -> float:
    """Total one-sided leaf area in m^2."""
    return sum(sk.leaf_area_unit_m2 * (p.scale * p.multiplier) ** 2 for p in sk.leaf_frames)


def leaf_inclinations(sk: Skeleton3D) -> list[float]:
    """Per-leaf inclination: angle between the leaf normal and the vertical,
    folded to [0, 90] degrees."""
    vertical = np.array([0.0, 0.0, 1.0])
    out = []
    for p in sk.leaf_frames:
        c = min(1.0, abs(float(np.dot(p.normal, vertical))))
        out.append(math.degrees(math.acos(c)))
    return out


def leaf_angle_histogram(sk: Skeleton3D) -> dict:
    """10 bins of 9 degrees over [0, 90]; frequencies normalized by leaf count."""
    counts = [0] * HISTOGRAM_BINS
    angles = leaf_inclinations(sk)
    width = HISTOGRAM_MAX_DEG / HISTOGRAM_BINS
    for a in angles:
        idx = min(int(a / width), HISTOGRAM_BINS - 1)
        counts[idx] += 1
    total = len(angles)
    return {
        "bin_edges_deg": [width * i for i in range(HISTOGRAM_BINS + 1)],
        "counts": counts,
        "frequencies": [c / total for c in counts] if total else None,
    }


def metadata_from_geometry(sk: Skeleton3D) -> PlantMetadata:
    """Geometric surrogate for image-derived metadata: horizontal extent,
    vertical extent, and top-view projected leaf cover over the bounding
    square (overlap-unaware, clipped to 1)."""
    zs, xy = _all_points(sk, include_radius=True)
    if not zs:
        return PlantMetadata(width_m=0.0, height_m=0.0, vegetation_fraction=0.0)
    pts = np.array(xy)
    x_extent = float(pts[:, 0].max() - pts[:, 0].min())
    y_extent = float(pts[:, 1].max() - pts[:, 1].min())
    width = max(x_extent, y_extent)
    height = max(zs) - min(zs)
    projected = sum(
        sk.leaf_area_unit_m2 * (p.scale * p.multiplier) ** 2 * abs(float(p.normal[2]))
        for p in sk.leaf_frames
    )
    fraction = min(1.0, projected / width**2) if width > 0 else 0.0
    return PlantMetadata(width_m=width, height_m=height, vegetation_fraction=fraction)


_CYLINDER_SIDES = 8


def export_mesh(sk: Skeleton3D) -> str:
    """Wavefront OBJ: 8-sided prisms for segments, quads for leaves."""
    lines = ["# phytoken skeleton mesh"]
    vcount = 0

    def emit_face(indices):
        lines.append("f " + " ".join(str(i) for i in indices))

    for seg in sk.segments:
        axis = seg.end - seg.start
        length = np.linalg.norm(axis)
        if length < 1e-15:
            continue
        axis = axis / length
        helper = np.array([0.0, 0.0, 1.0]) if abs(axis[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
        u = np.cross(axis, helper)
        u /= np.linalg.norm(u)
        v = np.cross(axis, u)
        ring = [
            u * math.cos(2 * math.pi * i / _CYLINDER_SIDES) + v * math.sin(2 * math.pi * i / _CYLINDER_SIDES)
            for i in range(_CYLINDER_SIDES)
        ]
        base = vcount
        for center in (seg.start, seg.end):
            for d in ring:
                p = center + seg.radius * d
                lines.append(f"v {p[0]:.9g} {p[1]:.9g} {p[2]:.9g}")
        vcount += 2 * _CYLINDER_SIDES
        n = _CYLINDER_SIDES
        for i in range(n):
            j = (i + 1) % n
            emit_face([base + 1 + i, base + 1 + j, base + n + 1 + j, base + n + 1 + i])
        emit_face([base + 1 + i for i in range(n)])
        emit_face([base + n + 1 + i for i in reversed(range(n))])

    for placement in sk.leaf_frames:
        base = vcount
        for p in leaf_vertices(placement, sk.leaf_area_unit_m2):
            lines.append(f"v {p[0]:.9g} {p[1]:.9g} {p[2]:.9g}")
        vcount += 4
        emit_face([base + 1, base + 2, base + 3, base + 4])

    lines.append("")
    return "\n".join(lines)


def trait_report(doc: PlantDoc, leaf_area_unit_m2: float = DEFAULT_LEAF_AREA_UNIT_M2) -> dict:
    """Simulation-based trait bundle for one document."""
    from .model import count_organs_doc

    sk = reconstruct(doc, leaf_area_unit_m2=leaf_area_unit_m2)
    counts = count_organs_doc(doc)
    return {
        "height_m": plant_height(sk),
        "leaf_count": len(sk.leaf_frames),
        "leaf_area_m2": leaf_area(sk),
        "leaf_angle_histogram": leaf_angle_histogram(sk),
        "shoot_count": counts.shoots,
        "phytomer_count": counts.phytomers,
    }
