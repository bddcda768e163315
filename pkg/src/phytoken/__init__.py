"""Procedural plant-architecture toolkit: document model, XML round-trip,
token codec, seeded generator, 3-D reconstruction, and sequence metrics.
"""

from .codec import (
    EOS,
    META,
    PAD,
    SOS,
    VOCAB_SIZE,
    PlantMetadata,
    QuantizationGrid,
    build_grid,
    decode_token,
    detokenize,
    encode_value,
    grid_dump,
    tokenize,
)
from .errors import DecodeError, PhytokenError, ValidationError, XMLParseError
from .generator import (
    CorpusManifest,
    CorpusSpec,
    GeneratorConfig,
    default_table,
    generate_corpus,
    generate_plant,
    load_config,
)
from .geometry import (
    Skeleton3D,
    leaf_angle_histogram,
    metadata_from_geometry,
    reconstruct,
    trait_report,
)
from .metrics import bleu4, normalized_wd, rouge_l, teacher_forcing_scores, wasserstein_1d
from .model import Internode, Leaf, Petiole, Phytomer, PlantDoc, Shoot, count_organs_doc, validate
from .xmlio import parse_xml, serialize_xml

__version__ = "1.0.0"

__all__ = [
    "SOS", "META", "PAD", "EOS", "VOCAB_SIZE",
    "PlantMetadata", "QuantizationGrid", "build_grid", "encode_value", "decode_token",
    "grid_dump", "tokenize", "detokenize",
    "PhytokenError", "XMLParseError", "ValidationError", "DecodeError",
    "GeneratorConfig", "CorpusSpec", "CorpusManifest", "default_table",
    "generate_plant", "generate_corpus", "load_config",
    "Skeleton3D", "reconstruct", "metadata_from_geometry", "leaf_angle_histogram", "trait_report",
    "bleu4", "rouge_l", "teacher_forcing_scores", "wasserstein_1d", "normalized_wd",
    "PlantDoc", "Shoot", "Phytomer", "Internode", "Petiole", "Leaf",
    "count_organs_doc", "validate",
    "parse_xml", "serialize_xml",
]
