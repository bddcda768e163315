"""Deterministic procedural cowpea generator and corpus assembly.

Growth model: the root shoot carries the single unifoliate phytomer (two
opposite petioles, one leaf each).  A trifoliate main shoot emerges from that
node after one emergence interval and then adds a phytomer every interval.
Each trifoliate node can break a lateral bud (fixed per-node probability,
once the node is old enough) spawning a shoot one order deeper, up to order 3.
Every sampled parameter comes from its configured distribution; internode
length/radius start at their configured initial constants and elongate toward
adult targets along a normalized logistic in organ age.

Every organ draws from a stream keyed by (seed, organ kind, organ path), so a
plant at age t is a strict superset of the same plant at age t-1 and results
do not depend on generation order.
"""

from __future__ import annotations

import configparser
import io
import json
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import PhytokenError
from .model import (
    LEAF_LATERAL_LEFT,
    LEAF_LATERAL_RIGHT,
    LEAF_TERMINAL,
    MAX_AGE,
    TRIFOLIATE,
    UNIFOLIATE,
    Internode,
    Leaf,
    Petiole,
    Phytomer,
    PlantDoc,
    Shoot,
    validate,
)
from .rng import Stream

UNI = "unifoliate"
TRI = "trifoliate"

# stream kind tags (arbitrary distinct constants, frozen for reproducibility)
_KIND_SHOOT = 101
_KIND_INTERNODE = 102
_KIND_PETIOLE = 103
_KIND_LEAF = 104
_KIND_BUD = 105


@dataclass(frozen=True)
class Constant:
    value: float

    def sample(self, stream: Stream) -> float:
        return self.value

    def cdf(self, x: float) -> float:
        return 0.0 if x < self.value else 1.0

    def support(self) -> tuple[float, float]:
        return (self.value, self.value)

    def range_width(self) -> float:
        return 0.0

    def __str__(self) -> str:
        return f"Constant({_num(self.value)})"


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def sample(self, stream: Stream) -> float:
        return stream.uniform(self.low, self.high)

    def cdf(self, x: float) -> float:
        if x <= self.low:
            return 0.0
        if x >= self.high:
            return 1.0
        return (x - self.low) / (self.high - self.low)

    def support(self) -> tuple[float, float]:
        return (self.low, self.high)

    def range_width(self) -> float:
        return self.high - self.low

    def __str__(self) -> str:
        return f"Uniform({_num(self.low)}, {_num(self.high)})"


@dataclass(frozen=True)
class Normal:
    mean: float
    sd: float

    def sample(self, stream: Stream) -> float:
        return stream.normal(self.mean, self.sd)

    def cdf(self, x: float) -> float:
        return 0.5 * (1.0 + math.erf((x - self.mean) / (self.sd * math.sqrt(2.0))))

    def support(self) -> tuple[float, float]:
        return (self.mean - 3.0 * self.sd, self.mean + 3.0 * self.sd)

    def range_width(self) -> float:
        return 6.0 * self.sd

    def __str__(self) -> str:
        return f"Normal({_num(self.mean)}, {_num(self.sd)})"


Dist = Constant | Uniform | Normal

_DIST_RE = re.compile(r"^\s*(Constant|Uniform|Normal)\s*\(\s*([^,()]+?)\s*(?:,\s*([^,()]+?)\s*)?\)\s*$")


def _num(v: float) -> str:
    return repr(v) if v != int(v) else str(int(v))


def parse_dist(text: str) -> Dist:
    m = _DIST_RE.match(text)
    if not m:
        raise PhytokenError(f"cannot parse distribution spec {text!r}")
    name, a, b = m.group(1), m.group(2), m.group(3)
    if name == "Constant":
        if b is not None:
            raise PhytokenError(f"Constant takes one argument: {text!r}")
        return Constant(float(a))
    if b is None:
        raise PhytokenError(f"{name} takes two arguments: {text!r}")
    if name == "Uniform":
        lo, hi = float(a), float(b)
        if lo > hi:
            raise PhytokenError(f"Uniform bounds out of order: {text!r}")
        return Uniform(lo, hi)
    sd = float(b)
    if sd < 0:
        raise PhytokenError(f"Normal sd must be >= 0: {text!r}")
    return Normal(float(a), sd)


# Parameter table: name -> context -> distribution.  The root (unifoliate)
# shoot's rotation rows are the plant-level base rotation distributions.
def default_table() -> dict[str, dict[str, Dist]]:
    return {
        "shoot_type_label": {UNI: Constant(1), TRI: Constant(3)},
        "shoot_base_pitch": {UNI: Uniform(0, 10), TRI: Uniform(40, 60)},
        "shoot_base_yaw": {UNI: Uniform(0, 360), TRI: Uniform(-20, 20)},
        "shoot_base_roll": {UNI: Uniform(0, 360), TRI: Constant(90)},
        "internode_length": {UNI: Constant(0.002), TRI: Constant(0.002)},
        "internode_radius": {UNI: Constant(0.0015), TRI: Constant(0.0015)},
        "internode_pitch": {UNI: Constant(0), TRI: Constant(20)},
        "internode_phyllotactic_angle": {UNI: Uniform(145, 215), TRI: Uniform(145, 215)},
        "petiole_length": {UNI: Constant(0.0004), TRI: Uniform(0.06, 0.08)},
        "petiole_radius": {UNI: Constant(0.0001), TRI: Constant(0.0018)},
        "petiole_pitch": {UNI: Uniform(60, 80), TRI: Uniform(45, 60)},
        "petiole_curvature": {UNI: Constant(0), TRI: Uniform(-200, -50)},
        "leaflet_scale": {UNI: Constant(1), TRI: Constant(0.9)},
        "leaf_scale": {UNI: Constant(0.02), TRI: Uniform(0.09, 0.12)},
        "leaf_pitch": {UNI: Uniform(-10, 10), TRI: Normal(45, 20)},
        "leaf_yaw": {UNI: Constant(0), TRI: Constant(10)},
        "leaf_roll": {UNI: Constant(-15), TRI: Constant(-15)},
    }


@dataclass
class GeneratorConfig:
    table: dict[str, dict[str, Dist]] = field(default_factory=default_table)
    phytomer_emergence_interval_days: float = 2.5
    lateral_bud_break_probability: float = 0.25
    bud_break_min_node_age_days: float = 5.0
    max_order: int = 3
    internode_length_target_m: float = 0.04
    internode_radius_target_m: float = 0.004
    elongation_half_time_days: float = 6.0
    elongation_time_constant_days: float = 2.0

    def validate(self) -> None:
        if self.phytomer_emergence_interval_days <= 0:
            raise PhytokenError("phytomer emergence interval must be > 0")
        if not 0.0 <= self.lateral_bud_break_probability <= 1.0:
            raise PhytokenError("bud break probability must be in [0, 1]")
        if self.elongation_time_constant_days <= 0:
            raise PhytokenError("elongation time constant must be > 0")
        for name, contexts in self.table.items():
            for ctx, dist in contexts.items():
                if ctx not in (UNI, TRI):
                    raise PhytokenError(f"{name}: unknown context {ctx!r}")
                if isinstance(dist, Normal) and dist.sd < 0:
                    raise PhytokenError(f"{name}: negative sd")

    def dist(self, name: str, context: str) -> Dist:
        return self.table[name][context]


_GROWTH_KEYS = (
    "phytomer_emergence_interval_days",
    "lateral_bud_break_probability",
    "bud_break_min_node_age_days",
    "max_order",
    "internode_length_target_m",
    "internode_radius_target_m",
    "elongation_half_time_days",
    "elongation_time_constant_days",
)


def dump_config(cfg: GeneratorConfig) -> str:
    """INI text mirroring the parameter table, one section per parameter."""
    parser = configparser.ConfigParser()
    parser["growth"] = {key: repr(getattr(cfg, key)) for key in _GROWTH_KEYS}
    for name, contexts in cfg.table.items():
        parser[name] = {ctx: str(dist) for ctx, dist in contexts.items()}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def load_config(path_or_text: str | Path) -> GeneratorConfig:
    parser = configparser.ConfigParser()
    if isinstance(path_or_text, Path) or os.path.exists(str(path_or_text)):
        with open(path_or_text, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    else:
        parser.read_string(str(path_or_text))
    cfg = GeneratorConfig(table={})
    if parser.has_section("growth"):
        growth = parser["growth"]
        for key in _GROWTH_KEYS:
            if key in growth:
                value = float(growth[key]) if key != "max_order" else int(growth[key])
                setattr(cfg, key, value)
    for section in parser.sections():
        if section == "growth":
            continue
        cfg.table[section] = {
            ctx: parse_dist(raw) for ctx, raw in parser[section].items() if ctx in (UNI, TRI)
        }
    cfg.validate()
    return cfg


def _elongation(cfg: GeneratorConfig, organ_age: float) -> float:
    """Normalized logistic in [0, 1): 0 at organ age 0, saturating at 1."""

    def sigma(x: float) -> float:
        return 1.0 / (1.0 + math.exp(-x))

    h, tau = cfg.elongation_half_time_days, cfg.elongation_time_constant_days
    s0 = sigma(-h / tau)
    return (sigma((organ_age - h) / tau) - s0) / (1.0 - s0)


def _internode_dims(cfg: GeneratorConfig, context: str, organ_age: float, stream: Stream) -> tuple[float, float]:
    g = _elongation(cfg, organ_age)
    init_len = cfg.dist("internode_length", context).sample(stream)
    init_rad = cfg.dist("internode_radius", context).sample(stream)
    length = init_len + (cfg.internode_length_target_m - init_len) * g
    radius = init_rad + (cfg.internode_radius_target_m - init_rad) * g
    return length, radius


def _make_leaf(cfg: GeneratorConfig, seed: int, path: tuple[int, ...], context: str, label: int) -> Leaf:
    s = Stream(seed, _KIND_LEAF, *path, label)
    return Leaf(
        scale=cfg.dist("leaf_scale", context).sample(s),
        pitch=cfg.dist("leaf_pitch", context).sample(s),
        yaw=cfg.dist("leaf_yaw", context).sample(s),
        roll=cfg.dist("leaf_roll", context).sample(s),
        position_label=label,
    )


def _make_petiole(
    cfg: GeneratorConfig, seed: int, path: tuple[int, ...], context: str, leaf_labels: Sequence[int]
) -> Petiole:
    s = Stream(seed, _KIND_PETIOLE, *path)
    return Petiole(
        length=cfg.dist("petiole_length", context).sample(s),
        radius=cfg.dist("petiole_radius", context).sample(s),
        pitch=cfg.dist("petiole_pitch", context).sample(s),
        curvature=cfg.dist("petiole_curvature", context).sample(s),
        leaflet_scale=cfg.dist("leaflet_scale", context).sample(s),
        leaves=tuple(_make_leaf(cfg, seed, path, context, label) for label in leaf_labels),
    )


def _phytomer_count(age: float, birth: float, interval: float) -> int:
    if age < birth:
        return 0
    return 1 + int(math.floor((age - birth) / interval + 1e-9))


def _build_shoot(
    cfg: GeneratorConfig,
    seed: int,
    path: tuple[int, ...],
    order: int,
    parent_node_index: int,
    birth: float,
    age: float,
    id_counter: list[int],
) -> Shoot:
    context = UNI if order == 0 else TRI
    shoot_id = id_counter[0]
    id_counter[0] += 1
    s = Stream(seed, _KIND_SHOOT, *path)
    base_pitch = cfg.dist("shoot_base_pitch", context).sample(s)
    base_yaw = cfg.dist("shoot_base_yaw", context).sample(s)
    base_roll = cfg.dist("shoot_base_roll", context).sample(s)
    type_label = UNIFOLIATE if context == UNI else TRIFOLIATE
    interval = cfg.phytomer_emergence_interval_days

    if order == 0:
        n_phytomers = 1  # the root shoot carries only the unifoliate node
    else:
        n_phytomers = _phytomer_count(age, birth, interval)

    phytomers: list[Phytomer] = []
    children: list[Shoot] = []
    for i in range(n_phytomers):
        node_birth = birth + i * interval
        node_path = path + (i,)
        si = Stream(seed, _KIND_INTERNODE, *node_path)
        length, radius = _internode_dims(cfg, context, age - node_birth, si)
        internode = Internode(
            length=length,
            radius=radius,
            pitch=cfg.dist("internode_pitch", context).sample(si),
            phyllotactic_angle=cfg.dist("internode_phyllotactic_angle", context).sample(si),
        )
        if context == UNI:
            petioles = (
                _make_petiole(cfg, seed, node_path + (0,), context, (LEAF_TERMINAL,)),
                _make_petiole(cfg, seed, node_path + (1,), context, (LEAF_TERMINAL,)),
            )
        else:
            petioles = (
                _make_petiole(
                    cfg,
                    seed,
                    node_path + (0,),
                    context,
                    (LEAF_TERMINAL, LEAF_LATERAL_LEFT, LEAF_LATERAL_RIGHT),
                ),
            )
        phytomers.append(Phytomer(internode=internode, petioles=petioles))

        # lateral children of this node
        if order == 0:
            # the main trifoliate shoot always emerges from the unifoliate node
            main_birth = birth + interval
            if age >= main_birth:
                children.append(
                    _build_shoot(cfg, seed, node_path, order + 1, i, main_birth, age, id_counter)
                )
        elif order < cfg.max_order:
            bud = Stream(seed, _KIND_BUD, *node_path)
            if bud.random() < cfg.lateral_bud_break_probability:
                break_day = node_birth + cfg.bud_break_min_node_age_days
                if age >= break_day:
                    children.append(
                        _build_shoot(cfg, seed, node_path, order + 1, i, break_day, age, id_counter)
                    )

    return Shoot(
        shoot_id=shoot_id,
        parent_node_index=parent_node_index,
        type_label=type_label,
        base_pitch=base_pitch,
        base_yaw=base_yaw,
        base_roll=base_roll,
        order=order,
        phytomers=tuple(phytomers),
        children=tuple(children),
    )


def generate_plant(seed: int, age: int, cfg: GeneratorConfig | None = None) -> PlantDoc:
    """Deterministic plant for a (seed, age) pair; age in days, 0-39."""
    if not isinstance(age, int) or not 0 <= age <= MAX_AGE:
        raise ValueError(f"age {age!r} outside [0, {MAX_AGE}]")
    cfg = cfg or GeneratorConfig()
    cfg.validate()
    id_counter = [0]
    root = _build_shoot(cfg, seed, (), 0, 0, 0.0, float(age), id_counter)
    doc = PlantDoc(base_position=(0.0, 0.0, 0.0), plant_age=age, root_shoot=root)
    validate(doc)
    return doc


@dataclass(frozen=True)
class CorpusSpec:
    seed_count: int
    ages: tuple[int, ...] = tuple(range(MAX_AGE + 1))
    azimuths_deg: tuple[float, ...] = (0.0, 120.0, 240.0)
    out_dir: str = "corpus"

    def validate(self) -> None:
        if self.seed_count < 1:
            raise PhytokenError("seed count must be >= 1")
        if not self.ages or any(not 0 <= a <= MAX_AGE for a in self.ages):
            raise PhytokenError(f"ages must be a non-empty subset of [0, {MAX_AGE}]")


@dataclass(frozen=True)
class CorpusManifest:
    path: str
    records: tuple[dict, ...]


def _xml_name(seed: int, age: int) -> str:
    return f"plant_s{seed:05d}_a{age:02d}.xml"


def _corpus_sample(args: tuple[int, int, GeneratorConfig, str]) -> tuple[str, str, tuple[float, float, float]]:
    """Worker: build one (seed, age) sample; returns (name, xml, metadata triple)."""
    from .geometry import metadata_from_geometry, reconstruct
    from .xmlio import serialize_xml

    seed, age, cfg, _ = args
    doc = generate_plant(seed, age, cfg)
    meta = metadata_from_geometry(reconstruct(doc))
    return (_xml_name(seed, age), serialize_xml(doc), (meta.width_m, meta.height_m, meta.vegetation_fraction))


def generate_corpus(
    spec: CorpusSpec, cfg: GeneratorConfig | None = None, workers: int | None = None
) -> CorpusManifest:
    """Write one XML per (seed, age) plus a JSON-lines manifest with one
    record per (seed, age, azimuth) carrying the geometry-derived metadata.
    """
    spec.validate()
    cfg = cfg or GeneratorConfig()
    cfg.validate()
    out = Path(spec.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise PhytokenError(f"cannot create output directory {out}: {exc}") from exc

    tasks = [(seed, age, cfg, str(out)) for seed in range(spec.seed_count) for age in spec.ages]
    if workers is None:
        workers = _worker_count()
    if workers > 1 and len(tasks) > 8:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_corpus_sample, tasks, chunksize=max(1, len(tasks) // (workers * 4))))
    else:
        results = [_corpus_sample(t) for t in tasks]

    records: list[dict] = []
    for (seed, age, _, _), (name, xml_text, (width, height, fraction)) in zip(tasks, results):
        xml_path = out / name
        try:
            xml_path.write_text(xml_text, encoding="utf-8")
        except OSError as exc:
            raise PhytokenError(f"cannot write {xml_path}: {exc}") from exc
        for azimuth in spec.azimuths_deg:
            records.append(
                {
                    "seed": seed,
                    "age": age,
                    "azimuth_deg": azimuth,
                    "xml_path": name,
                    "width_m": width,
                    "height_m": height,
                    "vegetation_fraction": fraction,
                }
            )
    manifest_path = out / "manifest.jsonl"
    try:
        with open(manifest_path, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record) + "\n")
    except OSError as exc:
        raise PhytokenError(f"cannot write {manifest_path}: {exc}") from exc
    return CorpusManifest(path=str(manifest_path), records=tuple(records))


def _worker_count() -> int:
    env = os.environ.get("PHYTOKEN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def read_manifest(path: str | Path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
