"""Canonical XML serialization of plant documents.

Schema::

    <plant age=".." x=".." y=".." z="..">
      <shoot id=".." order=".." parent_node=".." type=".." pitch=".." yaw=".." roll="..">
        <phytomer>
          <internode length=".." radius=".." pitch=".." phyllotactic=".."/>
          <petiole length=".." radius=".." pitch=".." curvature=".." leaflet_scale="..">
            <leaf pos=".." scale=".." pitch=".." yaw=".." roll=".."/>
          </petiole>
          <shoot ...>...</shoot>     <!-- child shoots nest inside the node they attach to -->
          <petiole ...>...</petiole> <!-- additional petioles follow the child subtrees -->
        </phytomer>
      </shoot>
    </plant>

Float attributes are written with ``repr``, the shortest decimal string that
round-trips the exact double, so serialize -> parse -> serialize is
byte-identical.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

from .errors import ValidationError, XMLParseError
from .model import Internode, Leaf, Petiole, Phytomer, PlantDoc, Shoot, children_by_node, validate

_SHOOT_ATTRS = {"id", "order", "parent_node", "type", "pitch", "yaw", "roll"}
_INTERNODE_ATTRS = {"length", "radius", "pitch", "phyllotactic"}
_PETIOLE_ATTRS = {"length", "radius", "pitch", "curvature", "leaflet_scale"}
_LEAF_ATTRS = {"pos", "scale", "pitch", "yaw", "roll"}


def _fmt(v: float) -> str:
    return repr(float(v))


def serialize_xml(doc: PlantDoc) -> str:
    """Render a valid document as canonical XML text."""
    validate(doc)
    out: list[str] = []
    x, y, z = doc.base_position
    out.append(f'<plant age="{doc.plant_age}" x="{_fmt(x)}" y="{_fmt(y)}" z="{_fmt(z)}">')

    def emit_leaf(leaf: Leaf, indent: str) -> None:
        out.append(
            f'{indent}<leaf pos="{leaf.position_label}" scale="{_fmt(leaf.scale)}" '
            f'pitch="{_fmt(leaf.pitch)}" yaw="{_fmt(leaf.yaw)}" roll="{_fmt(leaf.roll)}"/>'
        )

    def emit_petiole(pet: Petiole, indent: str) -> None:
        out.append(
            f'{indent}<petiole length="{_fmt(pet.length)}" radius="{_fmt(pet.radius)}" '
            f'pitch="{_fmt(pet.pitch)}" curvature="{_fmt(pet.curvature)}" '
            f'leaflet_scale="{_fmt(pet.leaflet_scale)}">'
        )
        for leaf in pet.leaves:
            emit_leaf(leaf, indent + "  ")
        out.append(f"{indent}</petiole>")

    def emit_shoot(shoot: Shoot, indent: str) -> None:
        out.append(
            f'{indent}<shoot id="{shoot.shoot_id}" order="{shoot.order}" '
            f'parent_node="{shoot.parent_node_index}" type="{shoot.type_label}" '
            f'pitch="{_fmt(shoot.base_pitch)}" yaw="{_fmt(shoot.base_yaw)}" '
            f'roll="{_fmt(shoot.base_roll)}">'
        )
        grouped = children_by_node(shoot)
        for i, phy in enumerate(shoot.phytomers):
            inner = indent + "    "
            out.append(f"{indent}  <phytomer>")
            inode = phy.internode
            out.append(
                f'{inner}<internode length="{_fmt(inode.length)}" radius="{_fmt(inode.radius)}" '
                f'pitch="{_fmt(inode.pitch)}" phyllotactic="{_fmt(inode.phyllotactic_angle)}"/>'
            )
            emit_petiole(phy.petioles[0], inner)
            for child in grouped.get(i, ()):
                emit_shoot(child, inner)
            for pet in phy.petioles[1:]:
                emit_petiole(pet, inner)
            out.append(f"{indent}  </phytomer>")
        out.append(f"{indent}</shoot>")

    emit_shoot(doc.root_shoot, "  ")
    out.append("</plant>")
    out.append("")
    return "\n".join(out)


def _attrs(elem: ET.Element, wanted: set[str], path: str) -> dict[str, str]:
    got = set(elem.attrib)
    missing = wanted - got
    if missing:
        raise ValidationError(f"missing attribute(s) {sorted(missing)}", path)
    unknown = got - wanted
    if unknown:
        raise ValidationError(f"unknown attribute(s) {sorted(unknown)}", path)
    return elem.attrib


def _float(raw: str, name: str, path: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ValidationError(f"attribute {name}={raw!r} is not a decimal float", path) from None


def _int(raw: str, name: str, path: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"attribute {name}={raw!r} is not an integer", path) from None


def _parse_leaf(elem: ET.Element, path: str) -> Leaf:
    a = _attrs(elem, _LEAF_ATTRS, path)
    if len(elem) > 0:
        raise ValidationError("leaf must be empty", path)
    return Leaf(
        scale=_float(a["scale"], "scale", path),
        pitch=_float(a["pitch"], "pitch", path),
        yaw=_float(a["yaw"], "yaw", path),
        roll=_float(a["roll"], "roll", path),
        position_label=_int(a["pos"], "pos", path),
    )


def _parse_petiole(elem: ET.Element, path: str) -> Petiole:
    a = _attrs(elem, _PETIOLE_ATTRS, path)
    leaves = []
    for j, child in enumerate(elem):
        if child.tag != "leaf":
            raise ValidationError(f"unexpected element <{child.tag}> inside petiole", path)
        leaves.append(_parse_leaf(child, f"{path}/leaf[{j}]"))
    return Petiole(
        length=_float(a["length"], "length", path),
        radius=_float(a["radius"], "radius", path),
        pitch=_float(a["pitch"], "pitch", path),
        curvature=_float(a["curvature"], "curvature", path),
        leaflet_scale=_float(a["leaflet_scale"], "leaflet_scale", path),
        leaves=tuple(leaves),
    )


def _parse_shoot(elem: ET.Element, depth: int, path: str) -> Shoot:
    a = _attrs(elem, _SHOOT_ATTRS, path)
    order = _int(a["order"], "order", path)
    if order != depth:
        raise ValidationError(f"shoot order {order} does not match nesting depth {depth}", path)
    phytomers: list[Phytomer] = []
    children: list[Shoot] = []
    for i, phy_elem in enumerate(elem):
        ppath = f"{path}/phytomer[{i}]"
        if phy_elem.tag != "phytomer":
            raise ValidationError(f"unexpected element <{phy_elem.tag}> inside shoot", path)
        if phy_elem.attrib:
            raise ValidationError(f"unknown attribute(s) {sorted(phy_elem.attrib)}", ppath)
        internode: Internode | None = None
        petioles: list[Petiole] = []
        for child in phy_elem:
            if child.tag == "internode":
                if internode is not None:
                    raise ValidationError("multiple internodes in one phytomer", ppath)
                ia = _attrs(child, _INTERNODE_ATTRS, ppath + "/internode")
                internode = Internode(
                    length=_float(ia["length"], "length", ppath),
                    radius=_float(ia["radius"], "radius", ppath),
                    pitch=_float(ia["pitch"], "pitch", ppath),
                    phyllotactic_angle=_float(ia["phyllotactic"], "phyllotactic", ppath),
                )
            elif child.tag == "petiole":
                petioles.append(_parse_petiole(child, f"{ppath}/petiole[{len(petioles)}]"))
            elif child.tag == "shoot":
                sub_path = f"{ppath}/shoot[{len(children)}]"
                sub = _parse_shoot(child, depth + 1, sub_path)
                if sub.parent_node_index != i:
                    raise ValidationError(
                        f"shoot parent_node={sub.parent_node_index} but nested in phytomer {i}", sub_path
                    )
                children.append(sub)
            else:
                raise ValidationError(f"unexpected element <{child.tag}> inside phytomer", ppath)
        if internode is None:
            raise ValidationError("phytomer has no internode", ppath)
        phytomers.append(Phytomer(internode=internode, petioles=tuple(petioles)))
    return Shoot(
        shoot_id=_int(a["id"], "id", path),
        parent_node_index=_int(a["parent_node"], "parent_node", path),
        type_label=_int(a["type"], "type", path),
        base_pitch=_float(a["pitch"], "pitch", path),
        base_yaw=_float(a["yaw"], "yaw", path),
        base_roll=_float(a["roll"], "roll", path),
        order=order,
        phytomers=tuple(phytomers),
        children=tuple(children),
    )


def parse_xml(text: str) -> PlantDoc:
    """Parse canonical XML into a validated PlantDoc."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, column = exc.position
        raise XMLParseError(str(exc.msg if hasattr(exc, "msg") else exc), line, column) from exc
    if root.tag != "plant":
        raise ValidationError(f"root element is <{root.tag}>, expected <plant>", "plant")
    a = _attrs(root, {"age", "x", "y", "z"}, "plant")
    shoots = list(root)
    if len(shoots) != 1 or shoots[0].tag != "shoot":
        raise ValidationError("plant must contain exactly one root <shoot>", "plant")
    doc = PlantDoc(
        base_position=(
            _float(a["x"], "x", "plant"),
            _float(a["y"], "y", "plant"),
            _float(a["z"], "z", "plant"),
        ),
        plant_age=_int(a["age"], "age", "plant"),
        root_shoot=_parse_shoot(shoots[0], 0, "plant/shoot[0]"),
    )
    validate(doc)
    return doc
