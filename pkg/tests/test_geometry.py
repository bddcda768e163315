"""3-D reconstruction tests: frame algebra, invariants, curvature, traits."""

import dataclasses
import math

import numpy as np
import pytest

from phytoken import geometry
from phytoken.generator import generate_plant
from phytoken.geometry import (
    Frame,
    leaf_angle_histogram,
    leaf_area,
    leaf_inclinations,
    metadata_from_geometry,
    plant_height,
    reconstruct,
    trait_report,
)
from phytoken.model import count_organs_doc


def rotated_doc(doc, extra_yaw):
    root = doc.root_shoot
    return dataclasses.replace(
        doc, root_shoot=dataclasses.replace(root, base_yaw=(root.base_yaw + extra_yaw) % 360.0)
    )


def test_frame_is_orthonormal_after_many_compositions():
    f = Frame.world()
    for i in range(500):
        f = f.yaw(17.3).pitch(5.1).advanced(0.01)
    rot = f.rot
    assert np.allclose(rot @ rot.T, np.eye(3), atol=1e-9)
    assert abs(np.linalg.det(rot) - 1.0) < 1e-9


def test_height_invariant_under_base_yaw():
    doc = generate_plant(seed=6, age=28)
    h0 = plant_height(reconstruct(doc))
    for yaw in (45.0, 133.7, 271.0):
        h = plant_height(reconstruct(rotated_doc(doc, yaw)))
        assert abs(h - h0) < 1e-9


def test_inclinations_invariant_under_base_yaw():
    doc = generate_plant(seed=6, age=28)
    inc0 = sorted(leaf_inclinations(reconstruct(doc)))
    inc = sorted(leaf_inclinations(reconstruct(rotated_doc(doc, 90.0))))
    assert max(abs(a - b) for a, b in zip(inc0, inc)) < 1e-9


def test_leaf_count_parity():
    for seed in range(6):
        doc = generate_plant(seed=seed, age=31)
        sk = reconstruct(doc)
        assert len(sk.leaf_frames) == count_organs_doc(doc).leaves
        assert len(leaf_inclinations(sk)) == count_organs_doc(doc).leaves


def test_leaf_area_is_quadratic_in_scale():
    doc = generate_plant(seed=1, age=18)
    a1 = leaf_area(reconstruct(doc))

    def scale_leaves(shoot, factor):
        phytomers = []
        for phy in shoot.phytomers:
            petioles = []
            for pet in phy.petioles:
                leaves = tuple(dataclasses.replace(lf, scale=lf.scale * factor) for lf in pet.leaves)
                petioles.append(dataclasses.replace(pet, leaves=leaves))
            phytomers.append(dataclasses.replace(phy, petioles=tuple(petioles)))
        children = tuple(scale_leaves(c, factor) for c in shoot.children)
        return dataclasses.replace(shoot, phytomers=tuple(phytomers), children=children)

    doc2 = dataclasses.replace(doc, root_shoot=scale_leaves(doc.root_shoot, 2.0))
    a2 = leaf_area(reconstruct(doc2))
    assert abs(a2 - 4.0 * a1) < 1e-12 * max(a2, 1.0)


def test_petiole_chord_tilts_half_the_bend():
    """A petiole bent by a total angle 2*phi has a straight-line chord tilted
    by exactly phi from the unbent direction, for any segment count."""
    tip = Frame.world()
    length, bend = 0.07, -7.0  # degrees over the whole petiole
    for n in (10, 100):
        steps = list(geometry._walk_petiole(tip, length, bend, n))
        chord = steps[-1][1] - steps[0][0]
        chord = chord / np.linalg.norm(chord)
        tilt = math.degrees(math.acos(np.clip(chord @ np.array([0.0, 0.0, 1.0]), -1, 1)))
        assert abs(tilt - abs(bend) / 2) < 0.05


def test_segment_count_insensitivity():
    """Tip position with 10 arc segments is within 1% of 100 segments."""
    tip = Frame.world()
    f10 = list(geometry._walk_petiole(tip, 0.07, -12.0, 10))[-1][1]
    f100 = list(geometry._walk_petiole(tip, 0.07, -12.0, 100))[-1][1]
    assert np.linalg.norm(f10 - f100) < 0.01 * 0.07


def test_straight_petiole_is_straight():
    tip = Frame.world()
    end = list(geometry._walk_petiole(tip, 0.05, 0.0, 10))[-1][1]
    assert np.allclose(end, [0.0, 0.0, 0.05], atol=1e-12)


def test_metadata_ranges():
    for seed in range(5):
        doc = generate_plant(seed=seed, age=35)
        meta = metadata_from_geometry(reconstruct(doc))
        assert meta.width_m > 0.0
        assert meta.height_m > 0.0
        assert 0.0 <= meta.vegetation_fraction <= 1.0


def test_histogram_partitions_all_leaves():
    doc = generate_plant(seed=8, age=30)
    sk = reconstruct(doc)
    hist = leaf_angle_histogram(sk)
    assert len(hist["frequencies"]) == 10
    assert abs(sum(hist["frequencies"]) - 1.0) < 1e-12
    assert hist["counts"] and sum(hist["counts"]) == len(sk.leaf_frames)


def test_trait_report_contents():
    doc = generate_plant(seed=2, age=22)
    rep = trait_report(doc)
    c = count_organs_doc(doc)
    assert rep["leaf_count"] == c.leaves
    assert rep["shoot_count"] == c.shoots
    assert rep["phytomer_count"] == c.phytomers
    assert rep["height_m"] > 0.0
    assert rep["leaf_area_m2"] > 0.0


def test_export_mesh_is_wellformed_obj(tmp_path):
    doc = generate_plant(seed=0, age=12)
    obj = geometry.export_mesh(reconstruct(doc))
    verts = [l for l in obj.splitlines() if l.startswith("v ")]
    faces = [l for l in obj.splitlines() if l.startswith("f ")]
    assert verts and faces
    n = len(verts)
    for line in faces:
        idx = [int(tok.split("/")[0]) for tok in line.split()[1:]]
        assert all(1 <= i <= n for i in idx)
