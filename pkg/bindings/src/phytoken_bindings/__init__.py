"""Binding layer for host applications that exchange plant documents as XML
strings and token ID lists.

The functions here wrap the phytoken codec behind a minimal, stable surface:
strings and plain containers in, strings and plain containers out.  No
phytoken types leak through, so callers can marshal everything across a
process or FFI boundary unchanged.
"""

from __future__ import annotations

from phytoken import codec, xmlio

__all__ = ["BoundCodec", "b_tokenize", "b_detokenize", "b_grid"]
__version__ = "1.0.0"


class BoundCodec:
    """Stateful wrapper holding one quantization grid for repeated calls."""

    def __init__(self) -> None:
        self._grid = codec.build_grid()

    def tokenize(self, xml_text: str, metadata: tuple[float, float, float]) -> list[int]:
        """Compile an XML document plus (width_m, height_m, vegetation_fraction)
        into a token ID list."""
        doc = xmlio.parse_xml(xml_text)
        width, height, fraction = metadata
        meta = codec.PlantMetadata(float(width), float(height), float(fraction))
        return codec.tokenize(doc, meta)

    def detokenize(self, ids: list[int], strict: bool = True) -> str:
        """Reconstruct the canonical XML serialization of a token sequence."""
        doc, _ = codec.detokenize(list(ids), strict=strict)
        return xmlio.serialize_xml(doc)

    def metadata(self, ids: list[int]) -> tuple[float, float, float]:
        """Decoded (width_m, height_m, vegetation_fraction) of a sequence."""
        _, meta = codec.detokenize(list(ids))
        return (meta.width_m, meta.height_m, meta.vegetation_fraction)

    def grid(self) -> dict[int, float]:
        """Parameter token ID -> grid value for the whole vocabulary."""
        base = self._grid.id_base
        return {base + i: v for i, v in enumerate(self._grid.values)}


_DEFAULT = BoundCodec()


def b_tokenize(xml_text: str, metadata: tuple[float, float, float]) -> list[int]:
    return _DEFAULT.tokenize(xml_text, metadata)


def b_detokenize(ids: list[int], strict: bool = True) -> str:
    return _DEFAULT.detokenize(ids, strict=strict)


def b_grid() -> dict[int, float]:
    return _DEFAULT.grid()
