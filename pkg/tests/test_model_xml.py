"""Document model validation and XML round-trip tests."""

import dataclasses

import pytest

from phytoken.errors import ValidationError, XMLParseError
from phytoken.generator import generate_plant
from phytoken.model import (
    Internode,
    Leaf,
    Petiole,
    Phytomer,
    PlantDoc,
    Shoot,
    count_organs_doc,
    validate,
    walk,
)
from phytoken.xmlio import parse_xml, serialize_xml


def tiny_doc() -> PlantDoc:
    leaf = Leaf(scale=0.02, pitch=5.0, yaw=0.0, roll=-15.0, position_label=3)
    pet = Petiole(length=0.0004, radius=0.0001, pitch=70.0, curvature=0.0, leaflet_scale=1.0, leaves=(leaf,))
    inode = Internode(length=0.002, radius=0.0015, pitch=0.0, phyllotactic_angle=180.0)
    phy = Phytomer(internode=inode, petioles=(pet, pet))
    root = Shoot(
        shoot_id=0, parent_node_index=0, type_label=1,
        base_pitch=5.0, base_yaw=90.0, base_roll=0.0,
        order=0, phytomers=(phy,), children=(),
    )
    return PlantDoc(base_position=(0.0, 0.0, 0.0), plant_age=0, root_shoot=root)


def test_validate_accepts_tiny_doc():
    validate(tiny_doc())


def test_validate_rejects_positive_curvature():
    doc = tiny_doc()
    pet = doc.root_shoot.phytomers[0].petioles[0]
    bad_pet = dataclasses.replace(pet, curvature=10.0)
    phy = dataclasses.replace(doc.root_shoot.phytomers[0], petioles=(bad_pet,))
    bad = dataclasses.replace(doc, root_shoot=dataclasses.replace(doc.root_shoot, phytomers=(phy,)))
    with pytest.raises(ValidationError):
        validate(bad)


def test_validate_rejects_bad_leaf_count():
    doc = tiny_doc()
    pet = doc.root_shoot.phytomers[0].petioles[0]
    bad_pet = dataclasses.replace(pet, leaves=pet.leaves * 2)
    phy = dataclasses.replace(doc.root_shoot.phytomers[0], petioles=(bad_pet,))
    bad = dataclasses.replace(doc, root_shoot=dataclasses.replace(doc.root_shoot, phytomers=(phy,)))
    with pytest.raises(ValidationError) as exc:
        validate(bad)
    assert "petiole" in str(exc.value)


def test_validate_rejects_age_out_of_range():
    with pytest.raises(ValidationError):
        validate(dataclasses.replace(tiny_doc(), plant_age=40))
    with pytest.raises(ValidationError):
        validate(dataclasses.replace(tiny_doc(), plant_age=-1))


def test_walk_order_is_depth_first_phytomer_major():
    doc = generate_plant(seed=3, age=20)
    kinds = [kind for kind, _, _ in walk(doc)]
    assert kinds[0] == "shoot"
    # every internode is preceded (eventually) by its shoot header
    assert kinds.count("shoot") == count_organs_doc(doc).shoots
    assert kinds.count("leaf") == count_organs_doc(doc).leaves


def test_xml_roundtrip_exact():
    for seed in range(4):
        doc = generate_plant(seed=seed, age=24)
        text = serialize_xml(doc)
        doc2 = parse_xml(text)
        assert doc2 == doc
        assert serialize_xml(doc2) == text


def test_xml_parse_error_reports_position():
    with pytest.raises(XMLParseError) as exc:
        parse_xml("<plant age='0' x='0' y='0' z='0'><shoot></plant>")
    assert exc.value.line >= 1


def test_xml_rejects_unknown_attribute():
    text = serialize_xml(tiny_doc()).replace('pitch="5.0"', 'pitch="5.0" bogus="1"', 1)
    with pytest.raises((XMLParseError, ValidationError)):
        parse_xml(text)


def test_xml_rejects_inconsistent_parent_node():
    doc = generate_plant(seed=5, age=20)
    text = serialize_xml(doc)
    assert 'parent_node="0"' in text
    bad = text.replace('parent_node="0"', 'parent_node="7"', 1)
    with pytest.raises((XMLParseError, ValidationError)):
        parse_xml(bad)


def test_organ_counts_per_order():
    doc = generate_plant(seed=9, age=39)
    c = count_organs_doc(doc)
    assert c.shoots == sum(c.shoots_by_order)
    assert c.phytomers == sum(c.phytomers_by_order)
    assert c.leaves == sum(c.leaves_by_order)
    assert c.shoots_by_order[0] == 1
