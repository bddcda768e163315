"""Seeded generator tests: determinism, growth rules, distribution fidelity,
config round-trip, and corpus output."""

import math

import pytest

from phytoken.errors import PhytokenError
from phytoken.generator import (
    Constant,
    CorpusSpec,
    GeneratorConfig,
    Normal,
    Uniform,
    default_table,
    dump_config,
    generate_corpus,
    generate_plant,
    load_config,
    parse_dist,
    read_manifest,
)
from phytoken.model import count_organs_doc, iter_shoots
from phytoken.xmlio import serialize_xml


def test_distribution_parsing_roundtrip():
    for d in (Constant(3.0), Uniform(145, 215), Normal(45.0, 20.0)):
        assert parse_dist(str(d)) == d
    with pytest.raises(PhytokenError):
        parse_dist("Triangular(1,2,3)")


def test_determinism_same_seed():
    a = generate_plant(seed=42, age=33)
    b = generate_plant(seed=42, age=33)
    assert a == b
    assert serialize_xml(a) == serialize_xml(b)


def test_different_seeds_differ():
    assert generate_plant(seed=1, age=20) != generate_plant(seed=2, age=20)


def test_age_zero_topology():
    doc = generate_plant(seed=0, age=0)
    c = count_organs_doc(doc)
    assert c.shoots == 1
    assert c.phytomers == 1
    assert c.leaves == 2  # two opposite single-leaf petioles
    assert doc.root_shoot.type_label == 1


def test_growth_is_monotone_in_age():
    for seed in (0, 4, 9):
        prev = -1
        for age in range(0, 40, 5):
            c = count_organs_doc(generate_plant(seed=seed, age=age))
            assert c.phytomers >= prev
            prev = c.phytomers


def test_main_shoot_emerges_after_one_interval():
    cfg = GeneratorConfig()
    # below one emergence interval: only the seed shoot exists
    doc = generate_plant(seed=0, age=0, cfg=cfg)
    assert count_organs_doc(doc).shoots == 1
    # at 5 days (two intervals past), the main trifoliate shoot exists
    doc = generate_plant(seed=0, age=5, cfg=cfg)
    shoots = list(iter_shoots(doc))
    assert len(shoots) >= 2
    main = shoots[1]
    assert main.type_label == 3
    assert main.order == 1
    assert main.parent_node_index == 0


def test_branching_order_capped():
    for seed in range(6):
        doc = generate_plant(seed=seed, age=39)
        assert max(s.order for s in iter_shoots(doc)) <= 3


def test_trifoliate_petioles_carry_three_leaves():
    doc = generate_plant(seed=7, age=30)
    for shoot in iter_shoots(doc):
        expected = 1 if shoot.type_label == 1 else 3
        for phy in shoot.phytomers:
            for pet in phy.petioles:
                assert len(pet.leaves) == expected


def test_internode_elongation_with_age():
    """Older internodes are longer; the oldest approach the target length."""
    cfg = GeneratorConfig()
    doc = generate_plant(seed=3, age=39, cfg=cfg)
    main = next(s for s in iter_shoots(doc) if s.order == 1)
    lengths = [p.internode.length for p in main.phytomers]
    # phytomers are ordered base (oldest) to tip (youngest)
    assert lengths == sorted(lengths, reverse=True)
    assert lengths[0] > 0.9 * cfg.internode_length_target_m
    assert lengths[-1] < lengths[0]


def test_sampled_parameters_within_support():
    table = default_table()
    for seed in range(10):
        doc = generate_plant(seed=seed, age=39)
        for shoot in iter_shoots(doc):
            ctx = "unifoliate" if shoot.type_label == 1 else "trifoliate"
            for phy in shoot.phytomers:
                lo, hi = table["internode_phyllotactic_angle"][ctx].support()
                assert lo - 1e-9 <= phy.internode.phyllotactic_angle <= hi + 1e-9
                for pet in phy.petioles:
                    lo, hi = table["petiole_pitch"][ctx].support()
                    assert lo - 1e-9 <= pet.pitch <= hi + 1e-9
                    assert pet.curvature <= 0.0


def test_uniform_sampling_moments():
    """Empirical mean/extremes of a U(145, 215) parameter across many seeds."""
    values = []
    for seed in range(400):
        doc = generate_plant(seed=seed, age=10)
        for shoot in iter_shoots(doc):
            values.extend(p.internode.phyllotactic_angle for p in shoot.phytomers)
    mean = sum(values) / len(values)
    assert abs(mean - 180.0) < 3.0
    assert min(values) >= 145.0 and max(values) <= 215.0
    assert max(values) - min(values) > 60.0


def test_config_roundtrip(tmp_path):
    cfg = GeneratorConfig()
    text = dump_config(cfg)
    path = tmp_path / "gen.ini"
    path.write_text(text, encoding="utf-8")
    cfg2 = load_config(path)
    assert cfg2 == cfg


def test_config_override(tmp_path):
    cfg = GeneratorConfig()
    text = dump_config(cfg).replace("Uniform(145, 215)", "Constant(180.0)")
    path = tmp_path / "gen.ini"
    path.write_text(text, encoding="utf-8")
    cfg2 = load_config(path)
    doc = generate_plant(seed=0, age=20, cfg=cfg2)
    for shoot in iter_shoots(doc):
        for phy in shoot.phytomers:
            assert phy.internode.phyllotactic_angle == 180.0


def test_generate_plant_rejects_bad_age():
    with pytest.raises((PhytokenError, ValueError)):
        generate_plant(seed=0, age=40)
    with pytest.raises((PhytokenError, ValueError)):
        generate_plant(seed=0, age=-1)


def test_corpus_generation(tmp_path):
    spec = CorpusSpec(seed_count=3, ages=(0, 10, 20), azimuths_deg=(0.0, 120.0, 240.0), out_dir=str(tmp_path))
    manifest = generate_corpus(spec)
    records = read_manifest(manifest.path)
    assert len(records) == 3 * 3 * 3
    xml_files = sorted(p.name for p in tmp_path.glob("*.xml"))
    assert len(xml_files) == 9
    for rec in records:
        assert (tmp_path / rec["xml_path"]).is_file()
        assert rec["width_m"] >= 0.0 and rec["height_m"] >= 0.0
        assert 0.0 <= rec["vegetation_fraction"] <= 1.0
        assert math.isfinite(rec["azimuth_deg"])


def test_corpus_parallel_matches_serial(tmp_path):
    spec_a = CorpusSpec(seed_count=4, ages=(5, 15, 25), out_dir=str(tmp_path / "a"))
    spec_b = CorpusSpec(seed_count=4, ages=(5, 15, 25), out_dir=str(tmp_path / "b"))
    generate_corpus(spec_a, workers=1)
    generate_corpus(spec_b, workers=4)
    for pa in sorted((tmp_path / "a").glob("*.xml")):
        pb = tmp_path / "b" / pa.name
        assert pa.read_bytes() == pb.read_bytes()
    assert (tmp_path / "a" / "manifest.jsonl").read_bytes() == (tmp_path / "b" / "manifest.jsonl").read_bytes()
