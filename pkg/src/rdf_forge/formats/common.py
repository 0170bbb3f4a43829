"""Shared XML plumbing for the URDF and SDF emitters and parsers.

Emission is deterministic: shortest round-trip decimals, "-0" normalized
to "0", fixed element order, 2-space indent, LF line endings.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from xml.sax.saxutils import escape, quoteattr

from ..errors import FormatError
from ..spatial import Transform, rot_to_rpy, rpy_to_rot

RELATIVE = "relative"
MODEL_URI = "model_uri"


@dataclass(frozen=True)
class EmitOptions:
    """Output styling; float formatting and indentation are fixed on purpose."""

    mesh_path_style: str = RELATIVE
    stamp: str = ""  # optional provenance comment; empty keeps files reproducible

    def __post_init__(self):
        if self.mesh_path_style not in (RELATIVE, MODEL_URI):
            raise ValueError(f"unknown mesh path style '{self.mesh_path_style}'")


def fmt_float(x) -> str:
    """Shortest decimal that round-trips; integral values drop the '.0'."""
    x = float(x)
    if x == 0.0:
        return "0"
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def fmt_vec(v) -> str:
    return " ".join(fmt_float(x) for x in v)


def fmt_pose(t: Transform) -> str:
    """SDF pose string: x y z roll pitch yaw."""
    rpy = rot_to_rpy(t.rotation)
    return f"{fmt_vec(t.translation)} {fmt_vec(rpy)}"


def parse_floats(text, n, what) -> list:
    parts = (text or "").split()
    if len(parts) != n:
        raise FormatError(f"{what}: expected {n} numbers, got {len(parts)}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise FormatError(f"{what}: bad number in {text!r}") from None


def parse_pose(text, what) -> Transform:
    vals = parse_floats(text, 6, what)
    return Transform(rpy_to_rot(vals[3:]), vals[:3])


def serialize(root: ET.Element, stamp: str = "") -> str:
    """Pretty-print an element tree with a fixed, reproducible layout."""
    lines = ['<?xml version="1.0" encoding="utf-8"?>']
    if stamp:
        lines.append(f"<!-- {escape(stamp)} -->")

    def walk(elem, depth):
        pad = "  " * depth
        if elem.tag is ET.Comment:
            lines.append(f"{pad}<!--{elem.text}-->")
            return
        attrs = "".join(f" {k}={quoteattr(str(v))}" for k, v in elem.attrib.items())
        children = list(elem)
        text = elem.text if elem.text and elem.text.strip() else None
        if not children and text is None:
            lines.append(f"{pad}<{elem.tag}{attrs}/>")
        elif not children:
            lines.append(f"{pad}<{elem.tag}{attrs}>{escape(text)}</{elem.tag}>")
        else:
            lines.append(f"{pad}<{elem.tag}{attrs}>")
            for child in children:
                walk(child, depth + 1)
            lines.append(f"{pad}</{elem.tag}>")

    walk(root, 0)
    return "\n".join(lines) + "\n"


def parse_xml(text: str, error_cls=FormatError) -> ET.Element:
    try:
        return ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = exc.position
        raise error_cls(f"XML syntax error at line {line}, column {col}: {exc.msg}") from None


def sub(parent: ET.Element, tag: str, text=None, **attrs) -> ET.Element:
    e = ET.SubElement(parent, tag, {k: str(v) for k, v in attrs.items()})
    if text is not None:
        e.text = str(text)
    return e
