"""CAD-neutral assembly interchange document: parsing and physical resolution.

The document is JSON: components with world poses and physical sources,
joints with world-frame geometry, plus a grounded component.  All lengths
are normalized to meters on parse; angles are radians already.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import mesh as meshmod
from .errors import AssemblyError, AssemblySchemaError, MeshError
from .spatial import InertiaTensor, Transform, normalize_axis

UNIT_FACTORS = {"mm": 0.001, "cm": 0.01, "m": 1.0}
JOINT_KINDS = ("rigid", "revolute", "slider", "cylindrical", "ball", "planar")
_AXIS_KINDS = ("revolute", "slider", "cylindrical", "planar")


@dataclass(frozen=True)
class PhysExplicit:
    """Mass (kg), com (m, component frame), inertia about com (component axes)."""

    mass: float
    com: np.ndarray
    inertia_com: InertiaTensor

    def __post_init__(self):
        com = np.array(self.com, dtype=np.float64)
        com.setflags(write=False)
        object.__setattr__(self, "com", com)
        object.__setattr__(self, "mass", float(self.mass))


@dataclass(frozen=True)
class PhysDensity:
    """Uniform density (kg/m^3); mass properties come from the collision mesh."""

    density: float


@dataclass(frozen=True)
class JointLimits:
    lower: float
    upper: float
    effort: float = 0.0
    velocity: float = 0.0


@dataclass(frozen=True)
class ComponentRec:
    id: str
    name: str
    world_transform: Transform
    phys: object  # PhysExplicit | PhysDensity
    visual_mesh: Optional[str] = None
    collision_mesh: Optional[str] = None


@dataclass(frozen=True)
class JointRec:
    id: str
    name: str
    kind: str
    parent: str
    child: str
    origin_world: Transform
    axis_world: Optional[np.ndarray] = None
    limits: Optional[JointLimits] = None


@dataclass(frozen=True)
class AssemblyDoc:
    name: str
    length_unit: str
    grounded: str
    components: tuple
    joints: tuple
    mesh_scale: float  # file units -> meters, applied to referenced meshes
    base_dir: Optional[Path] = None

    def component(self, cid: str) -> ComponentRec:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(cid)


def _expect(cond, message, path):
    if not cond:
        raise AssemblySchemaError(message, path)


def _get(obj, key, path, required=True, default=None):
    if key not in obj:
        if required:
            raise AssemblySchemaError(f"missing required field '{key}'", path)
        return default
    return obj[key]


def _floats(value, n, path):
    _expect(isinstance(value, (list, tuple)), f"expected a list of {n} numbers", path)
    _expect(len(value) == n, f"expected {n} numbers, got {len(value)}", path)
    try:
        out = np.array([float(v) for v in value], dtype=np.float64)
    except (TypeError, ValueError):
        raise AssemblySchemaError("expected numeric entries", path) from None
    _expect(bool(np.all(np.isfinite(out))), "entries must be finite", path)
    return out


def _transform(obj, path, scale) -> Transform:
    _expect(isinstance(obj, dict), "expected an object with rotation/translation", path)
    rot = _floats(_get(obj, "rotation", path), 9, f"{path}.rotation").reshape(3, 3)
    trans = _floats(_get(obj, "translation", path), 3, f"{path}.translation") * scale
    try:
        return Transform(rot, trans)
    except ValueError as exc:
        raise AssemblySchemaError(str(exc), f"{path}.rotation") from None


def _phys(obj, path, scale):
    _expect(isinstance(obj, dict), "expected a phys object", path)
    if "density" in obj:
        density = float(_get(obj, "density", path))
        _expect(density > 0.0, "density must be positive", f"{path}.density")
        return PhysDensity(density=density)
    mass = float(_get(obj, "mass", path))
    _expect(mass > 0.0, "mass must be positive", f"{path}.mass")
    com = _floats(_get(obj, "com", path), 3, f"{path}.com") * scale
    i = _floats(_get(obj, "inertia", path), 6, f"{path}.inertia")
    inertia = InertiaTensor(ixx=i[0], iyy=i[1], izz=i[2], ixy=i[3], ixz=i[4], iyz=i[5])
    return PhysExplicit(mass=mass, com=com, inertia_com=inertia)


def _limits(obj, path, kind, scale):
    if obj is None:
        return None
    _expect(isinstance(obj, dict), "expected a limits object", path)
    lower = float(_get(obj, "lower", path))
    upper = float(_get(obj, "upper", path))
    if kind == "slider":
        lower *= scale
        upper *= scale
    _expect(lower <= upper, f"lower ({lower}) must not exceed upper ({upper})", path)
    return JointLimits(
        lower=lower,
        upper=upper,
        effort=float(obj.get("effort", 0.0)),
        velocity=float(obj.get("velocity", 0.0)),
    )


def parse_assembly(text: str, base_dir=None) -> AssemblyDoc:
    """Parse and validate an interchange document; lengths come out in meters."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AssemblySchemaError(f"not valid JSON: {exc}") from None
    _expect(isinstance(raw, dict), "document root must be an object", "$")

    name = _get(raw, "name", "$")
    _expect(isinstance(name, str) and name, "name must be a non-empty string", "$.name")
    unit = _get(raw, "length_unit", "$")
    _expect(unit in UNIT_FACTORS, f"length_unit must be one of {sorted(UNIT_FACTORS)}",
            "$.length_unit")
    scale = UNIT_FACTORS[unit]
    grounded = _get(raw, "grounded", "$")

    comp_list = _get(raw, "components", "$")
    _expect(isinstance(comp_list, list), "components must be a list", "$.components")
    joint_list = _get(raw, "joints", "$", required=False, default=[])
    _expect(isinstance(joint_list, list), "joints must be a list", "$.joints")

    components = []
    seen_ids = set()
    for i, cobj in enumerate(comp_list):
        path = f"$.components[{i}]"
        cid = _get(cobj, "id", path)
        _expect(isinstance(cid, str) and cid, "id must be a non-empty string", f"{path}.id")
        _expect(cid not in seen_ids, f"duplicate component id '{cid}'", f"{path}.id")
        seen_ids.add(cid)
        visual = cobj.get("visual_mesh")
        collision = cobj.get("collision_mesh", visual)
        components.append(
            ComponentRec(
                id=cid,
                name=str(cobj.get("name", cid)),
                world_transform=_transform(_get(cobj, "world_transform", path),
                                           f"{path}.world_transform", scale),
                phys=_phys(_get(cobj, "phys", path), f"{path}.phys", scale),
                visual_mesh=visual,
                collision_mesh=collision,
            )
        )
    _expect(grounded in seen_ids, f"grounded component '{grounded}' does not exist",
            "$.grounded")

    joints = []
    seen_joints = set()
    for i, jobj in enumerate(joint_list):
        path = f"$.joints[{i}]"
        jid = _get(jobj, "id", path)
        _expect(isinstance(jid, str) and jid, "id must be a non-empty string", f"{path}.id")
        _expect(jid not in seen_joints, f"duplicate joint id '{jid}'", f"{path}.id")
        seen_joints.add(jid)
        kind = _get(jobj, "kind", path)
        _expect(kind in JOINT_KINDS, f"unknown joint kind '{kind}'", f"{path}.kind")
        parent = _get(jobj, "parent", path)
        child = _get(jobj, "child", path)
        for role, cid in (("parent", parent), ("child", child)):
            _expect(cid in seen_ids, f"{role} references missing component '{cid}'",
                    f"{path}.{role}")
        _expect(parent != child, "parent and child must be distinct components",
                f"{path}.child")
        axis = None
        if "axis_world" in jobj:
            axis = _floats(jobj["axis_world"], 3, f"{path}.axis_world")
            try:
                axis = normalize_axis(axis)
            except ValueError as exc:
                raise AssemblySchemaError(str(exc), f"{path}.axis_world") from None
        if kind in _AXIS_KINDS:
            _expect(axis is not None, f"joint kind '{kind}' requires axis_world",
                    f"{path}.axis_world")
        joints.append(
            JointRec(
                id=jid,
                name=str(jobj.get("name", jid)),
                kind=kind,
                parent=parent,
                child=child,
                origin_world=_transform(_get(jobj, "origin_world", path),
                                        f"{path}.origin_world", scale),
                axis_world=axis,
                limits=_limits(jobj.get("limits"), f"{path}.limits", kind, scale),
            )
        )

    return AssemblyDoc(
        name=name,
        length_unit=unit,
        grounded=grounded,
        components=tuple(components),
        joints=tuple(joints),
        mesh_scale=scale,
        base_dir=Path(base_dir) if base_dir is not None else None,
    )


def load_assembly(path) -> AssemblyDoc:
    """Read an interchange document from disk; mesh paths resolve next to it."""
    path = Path(path)
    return parse_assembly(path.read_text(encoding="utf-8"), base_dir=path.parent)


def default_mesh_loader(doc: AssemblyDoc) -> Callable[[str], meshmod.TriMesh]:
    """Loader that reads STL files relative to the document location."""

    def load(ref: str) -> meshmod.TriMesh:
        p = Path(ref)
        if not p.is_absolute():
            if doc.base_dir is None:
                raise AssemblyError(
                    f"mesh reference '{ref}' is relative but the document has no base directory"
                )
            p = doc.base_dir / p
        if not p.exists():
            raise AssemblyError(f"mesh file not found: {p}")
        return meshmod.parse_stl(p.read_bytes())

    return load


def resolve_physical(doc: AssemblyDoc, mesh_loader=None) -> AssemblyDoc:
    """Turn every density source into explicit mass/com/inertia.

    Density sources integrate the collision mesh (scaled to meters) and
    require it to be watertight.  Explicit sources pass through unchanged,
    so resolving twice is a no-op.
    """
    if mesh_loader is None:
        mesh_loader = default_mesh_loader(doc)
    out = []
    for comp in doc.components:
        if isinstance(comp.phys, PhysExplicit):
            out.append(comp)
            continue
        ref = comp.collision_mesh
        if ref is None:
            raise AssemblyError(
                f"component '{comp.id}' uses a density source but has no mesh to integrate"
            )
        tri = mesh_loader(ref)
        if doc.mesh_scale != 1.0:
            tri = meshmod.scale_mesh(tri, doc.mesh_scale)
        try:
            props = meshmod.mass_properties(tri, comp.phys.density)
        except MeshError as exc:
            raise AssemblyError(
                f"component '{comp.id}': mesh '{ref}' unusable for mass properties: {exc}"
            ) from exc
        out.append(
            replace(comp, phys=PhysExplicit(mass=props.mass, com=props.com,
                                            inertia_com=props.inertia_com))
        )
    return replace(doc, components=tuple(out))
