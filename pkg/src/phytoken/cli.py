"""Command-line pipeline: corpus generation, tokenize/detokenize, traits,
sequence evaluation, and parameter distribution comparison.

Every command prints exactly one JSON report to stdout (or ``--out``); data
products (XML, token lines, OBJ meshes, corpora) go to the paths given by
their flags.  Exit codes: 0 success, 1 runtime/data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

from . import codec, generator, geometry, metrics, xmlio
from .errors import PhytokenError
from .model import MAX_AGE, PlantDoc, iter_shoots

THRESHOLD_DEFAULT = 0.05
HISTOGRAM_COMPARISON_BINS = 36


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _emit_report(args, command: str, inputs: list[Path], outputs: list[str], payload: dict, t0: float) -> None:
    report = {
        "command": command,
        "inputs": {str(p): _sha256(p) for p in inputs if p.is_file()},
        "outputs": outputs,
        "payload": payload,
        "wall_time_s": round(time.monotonic() - t0, 6),
    }
    text = json.dumps(report, indent=2) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _parse_ages(raw: str) -> tuple[int, ...]:
    if ".." in raw:
        lo, hi = raw.split("..", 1)
        ages = tuple(range(int(lo), int(hi) + 1))
    else:
        ages = tuple(int(part) for part in raw.split(","))
    if not ages or any(not 0 <= a <= MAX_AGE for a in ages):
        raise PhytokenError(f"ages {raw!r} outside [0, {MAX_AGE}]")
    return ages


def _load_config(path: str | None) -> generator.GeneratorConfig:
    if path is None:
        return generator.GeneratorConfig()
    return generator.load_config(Path(path))


def cmd_generate(args) -> int:
    t0 = time.monotonic()
    if args.seeds < 1:
        raise SystemExit(2)
    cfg = _load_config(args.config)
    spec = generator.CorpusSpec(
        seed_count=args.seeds,
        ages=_parse_ages(args.ages),
        azimuths_deg=tuple(float(a) for a in args.azimuths.split(",")),
        out_dir=args.dir,
    )
    manifest = generator.generate_corpus(spec, cfg)
    payload = {
        "manifest_path": manifest.path,
        "xml_files": spec.seed_count * len(spec.ages),
        "manifest_records": len(manifest.records),
    }
    inputs = [Path(args.config)] if args.config else []
    _emit_report(args, "generate", inputs, [manifest.path], payload, t0)
    print(manifest.path, file=sys.stderr)
    return 0


def _metadata_for(doc: PlantDoc, meta_flag: str | None) -> codec.PlantMetadata:
    if meta_flag is not None:
        parts = meta_flag.split(",")
        if len(parts) != 3:
            raise PhytokenError(f"--meta expects 'width,height,fraction', got {meta_flag!r}")
        return codec.PlantMetadata(float(parts[0]), float(parts[1]), float(parts[2]))
    return geometry.metadata_from_geometry(geometry.reconstruct(doc))


def cmd_tokenize(args) -> int:
    t0 = time.monotonic()
    xml_path = Path(args.xml)
    doc = xmlio.parse_xml(xml_path.read_text(encoding="utf-8"))
    meta = _metadata_for(doc, args.meta)
    ids = codec.tokenize(doc, meta)
    outputs = []
    if args.tokens_out:
        codec.write_token_file(args.tokens_out, [ids], append=True)
        outputs.append(args.tokens_out)
    payload = {
        "tokens": ids,
        "length": len(ids),
        "metadata": {
            "width_m": meta.width_m,
            "height_m": meta.height_m,
            "vegetation_fraction": meta.vegetation_fraction,
        },
    }
    _emit_report(args, "tokenize", [xml_path], outputs, payload, t0)
    return 0


def cmd_detokenize(args) -> int:
    t0 = time.monotonic()
    tokens_path = Path(args.tokens)
    sequences = codec.read_token_file(tokens_path)
    if not 0 <= args.line < len(sequences):
        raise PhytokenError(f"line {args.line} out of range; file has {len(sequences)} sequence(s)")
    doc, meta = codec.detokenize(sequences[args.line], strict=not args.lenient)
    xml_text = xmlio.serialize_xml(doc)
    outputs = []
    if args.xml_out:
        Path(args.xml_out).write_text(xml_text, encoding="utf-8")
        outputs.append(args.xml_out)
    payload = {
        "xml": xml_text if not args.xml_out else None,
        "metadata": {
            "width_m": meta.width_m,
            "height_m": meta.height_m,
            "vegetation_fraction": meta.vegetation_fraction,
        },
    }
    _emit_report(args, "detokenize", [tokens_path], outputs, payload, t0)
    return 0


def cmd_traits(args) -> int:
    t0 = time.monotonic()
    xml_path = Path(args.xml)
    doc = xmlio.parse_xml(xml_path.read_text(encoding="utf-8"))
    payload = geometry.trait_report(doc, leaf_area_unit_m2=args.leaf_area_unit)
    outputs = []
    if args.mesh:
        sk = geometry.reconstruct(doc, leaf_area_unit_m2=args.leaf_area_unit)
        Path(args.mesh).write_text(geometry.export_mesh(sk), encoding="utf-8")
        outputs.append(args.mesh)
    _emit_report(args, "traits", [xml_path], outputs, payload, t0)
    return 0


def _paired_token_files(gen_dir: str, truth_dir: str) -> list[tuple[str, Path, Path]]:
    gen = {p.name: p for p in sorted(Path(gen_dir).iterdir()) if p.is_file()}
    truth = {p.name: p for p in sorted(Path(truth_dir).iterdir()) if p.is_file()}
    orphans = sorted(set(gen) ^ set(truth))
    if orphans:
        raise PhytokenError(f"unmatched basenames between directories: {orphans}")
    if not gen:
        raise PhytokenError("no token files found")
    return [(name, gen[name], truth[name]) for name in sorted(gen)]


def _read_pairs(gen_dir: str, truth_dir: str) -> list[tuple[str, list[int], list[int]]]:
    pairs = []
    for name, gpath, tpath in _paired_token_files(gen_dir, truth_dir):
        gen_lines = codec.read_token_file(gpath)
        truth_lines = codec.read_token_file(tpath)
        if len(gen_lines) != len(truth_lines):
            raise PhytokenError(f"{name}: {len(gen_lines)} generated line(s) vs {len(truth_lines)} reference")
        for i, (g, t) in enumerate(zip(gen_lines, truth_lines)):
            pairs.append((f"{name}:{i}", g, t))
    return pairs


def cmd_eval(args) -> int:
    t0 = time.monotonic()
    named = _read_pairs(args.generated, args.truth)
    pairs = [(g, t) for _, g, t in named]
    bleu = metrics.bleu4(pairs)
    rouge = metrics.rouge_l(pairs, swapped_formula=args.swapped_rouge)

    scatter = []
    for name, g, t in named:
        cg = codec.count_organs(g)
        ct = codec.count_organs(t)
        scatter.append(
            {
                "name": name,
                "generated": {"shoots": cg.shoots, "phytomers": cg.phytomers, "leaves": cg.leaves},
                "truth": {"shoots": ct.shoots, "phytomers": ct.phytomers, "leaves": ct.leaves},
            }
        )

    equal = [(g, t) for g, t in pairs if len(g) == len(t)]
    teacher = None
    if equal:
        predicted = [tok for g, _ in equal for tok in g]
        true = [tok for _, t in equal for tok in t]
        teacher = metrics.teacher_forcing_scores(predicted, true)

    payload = {
        "pairs": len(pairs),
        "bleu4": bleu.score,
        "per_n_precisions": list(bleu.precisions),
        "brevity_penalty": bleu.brevity_penalty,
        "rouge_l": rouge,
        "organ_count_scatter": scatter,
        "teacher_forcing": teacher,
    }
    _emit_report(args, "eval", [], [], payload, t0)
    return 0


def _doc_values(doc: PlantDoc, name: str, context: str) -> list[float]:
    wanted_types = {"unifoliate": (1,), "trifoliate": (3,), "all": (1, 3)}[context]
    out: list[float] = []
    for shoot in iter_shoots(doc):
        if shoot.type_label not in wanted_types:
            continue
        if name == "shoot_base_pitch":
            out.append(shoot.base_pitch)
        elif name == "shoot_base_yaw":
            out.append(shoot.base_yaw)
        elif name == "shoot_base_roll":
            out.append(shoot.base_roll)
        elif name == "shoot_type_label":
            out.append(float(shoot.type_label))
        else:
            for phy in shoot.phytomers:
                inode = phy.internode
                if name == "internode_length":
                    out.append(inode.length)
                elif name == "internode_radius":
                    out.append(inode.radius)
                elif name == "internode_pitch":
                    out.append(inode.pitch)
                elif name == "internode_phyllotactic_angle":
                    out.append(inode.phyllotactic_angle)
                else:
                    for pet in phy.petioles:
                        if name == "petiole_length":
                            out.append(pet.length)
                        elif name == "petiole_radius":
                            out.append(pet.radius)
                        elif name == "petiole_pitch":
                            out.append(pet.pitch)
                        elif name == "petiole_curvature":
                            out.append(pet.curvature)
                        elif name == "leaflet_scale":
                            out.append(pet.leaflet_scale)
                        else:
                            for leaf in pet.leaves:
                                if name == "leaf_scale":
                                    out.append(leaf.scale)
                                elif name == "leaf_pitch":
                                    out.append(leaf.pitch)
                                elif name == "leaf_yaw":
                                    out.append(leaf.yaw)
                                elif name == "leaf_roll":
                                    out.append(leaf.roll)
    return out


def _extract_values(token_dir: str, name: str, context: str) -> list[float]:
    values: list[float] = []
    for path in sorted(Path(token_dir).iterdir()):
        if not path.is_file():
            continue
        for ids in codec.read_token_file(path):
            doc, _ = codec.detokenize(ids, strict=False)
            if name == "leaf_inclination":
                values.extend(geometry.leaf_inclinations(geometry.reconstruct(doc)))
            else:
                values.extend(_doc_values(doc, name, context))
    return values


def _range_width(cfg: generator.GeneratorConfig, name: str, context: str, samples: list[float]) -> float:
    if name == "leaf_inclination":
        return geometry.HISTOGRAM_MAX_DEG
    contexts = [context] if context != "all" else [generator.UNI, generator.TRI]
    supports = [cfg.table[name][c].support() for c in contexts if c in cfg.table[name]]
    lo = min(s[0] for s in supports)
    hi = max(s[1] for s in supports)
    if hi > lo:
        return hi - lo
    # degenerate (constant) reference distribution: fall back to observed support
    if samples:
        return max(samples) - min(samples)
    return 0.0


def _histogram(samples: list[float], lo: float, hi: float, bins: int) -> list[int]:
    counts = [0] * bins
    if hi <= lo:
        hi = lo + 1.0
    for v in samples:
        idx = min(max(int((v - lo) / (hi - lo) * bins), 0), bins - 1)
        counts[idx] += 1
    return counts


def cmd_distcmp(args) -> int:
    t0 = time.monotonic()
    cfg = _load_config(args.config)
    valid = sorted(cfg.table) + ["leaf_inclination"]
    if args.parameter not in valid:
        print(f"unknown parameter {args.parameter!r}; valid names: {', '.join(valid)}", file=sys.stderr)
        return 2
    gen_values = _extract_values(args.generated, args.parameter, args.context)
    truth_values = _extract_values(args.truth, args.parameter, args.context)
    if not gen_values or not truth_values:
        raise PhytokenError(f"no values for parameter {args.parameter!r} in one of the corpora")
    wd = metrics.wasserstein_1d(gen_values, truth_values)
    width = _range_width(cfg, args.parameter, args.context, gen_values + truth_values)
    norm = wd / width if width > 0 else (0.0 if wd == 0.0 else math.inf)
    lo = min(min(gen_values), min(truth_values))
    hi = max(max(gen_values), max(truth_values))
    payload = {
        "parameter": args.parameter,
        "context": args.context,
        "samples": {"generated": len(gen_values), "truth": len(truth_values)},
        "wd": wd,
        "normalized_wd": norm,
        "range_width": width,
        "threshold": args.threshold,
        "starred": norm < args.threshold,
        "histogram": {
            "lo": lo,
            "hi": hi,
            "bins": HISTOGRAM_COMPARISON_BINS,
            "generated": _histogram(gen_values, lo, hi, HISTOGRAM_COMPARISON_BINS),
            "truth": _histogram(truth_values, lo, hi, HISTOGRAM_COMPARISON_BINS),
        },
    }
    _emit_report(args, "distcmp", [], [], payload, t0)
    return 0


def cmd_grid(args) -> int:
    t0 = time.monotonic()
    dump = codec.grid_dump()
    digest = hashlib.sha256(dump.encode("utf-8")).hexdigest()
    outputs = []
    if args.grid_out:
        Path(args.grid_out).write_text(dump, encoding="utf-8")
        outputs.append(args.grid_out)
    payload = {
        "size": len(codec.build_grid().values),
        "digest": digest,
        "dump": None if args.grid_out else dump,
    }
    _emit_report(args, "grid", [], outputs, payload, t0)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phytoken", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a seeded plant corpus with a manifest")
    p.add_argument("--seeds", type=int, required=True, help="number of seeds (0..N-1)")
    p.add_argument("--ages", default=f"0..{MAX_AGE}", help="age range 'A..B' or comma list")
    p.add_argument("--azimuths", default="0,120,240", help="comma list of view azimuths (manifest metadata)")
    p.add_argument("--config", default=None, help="generator config INI")
    p.add_argument("--dir", required=True, help="output corpus directory")
    p.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("tokenize", help="compile an XML document into a token line")
    p.add_argument("xml")
    p.add_argument("-o", "--tokens-out", default=None, help="append the token line to this file")
    p.add_argument("--meta", default=None, help="override metadata as 'width,height,fraction'")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("detokenize", help="reconstruct XML from a token line")
    p.add_argument("tokens")
    p.add_argument("-o", "--xml-out", default=None)
    p.add_argument("--line", type=int, default=0, help="0-based line index in the token file")
    p.add_argument("--lenient", action="store_true", help="positional attachment wins over parent-node tokens")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_detokenize)

    p = sub.add_parser("traits", help="simulation-based trait report for one document")
    p.add_argument("xml")
    p.add_argument("--mesh", default=None, help="also write an OBJ mesh here")
    p.add_argument("--leaf-area-unit", type=float, default=geometry.DEFAULT_LEAF_AREA_UNIT_M2)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_traits)

    p = sub.add_parser("eval", help="BLEU-4 / ROUGE-L / organ counts over aligned token corpora")
    p.add_argument("--generated", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--swapped-rouge", action="store_true", help="ROUGE-L variant with swapped recall/precision denominators")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("distcmp", help="Wasserstein comparison of one parameter's distribution")
    p.add_argument("parameter")
    p.add_argument("--generated", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--threshold", type=float, default=THRESHOLD_DEFAULT)
    p.add_argument("--context", choices=["all", "unifoliate", "trifoliate"], default="all")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_distcmp)

    p = sub.add_parser("grid", help="dump the quantization grid (id value per line)")
    p.add_argument("-o", "--grid-out", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_grid)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except PhytokenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
