"""URDF emission and parsing against the chained-framing robot model."""

from __future__ import annotations

import warnings
import xml.etree.ElementTree as ET

import numpy as np

from ..errors import UrdfError
from ..model import (
    CHAINED,
    Geometry,
    Inertial,
    JointDynamics,
    JointSpec,
    Limits,
    Link,
    RobotModel,
    WORLD,
    joint_structure,
)
from ..spatial import InertiaTensor, Transform, rot_to_rpy, rpy_to_rot
from .common import EmitOptions, fmt_float, fmt_vec, parse_floats, parse_xml, serialize, sub

# Joint kinds URDF can carry; ball is the notable omission.
_URDF_KINDS = ("fixed", "revolute", "continuous", "prismatic", "planar")

_KNOWN_LINK_CHILDREN = {"inertial", "visual", "collision"}
_KNOWN_JOINT_CHILDREN = {"origin", "parent", "child", "axis", "limit", "dynamics"}


def _origin_el(parent, t: Transform):
    rpy = rot_to_rpy(t.rotation)
    sub(parent, "origin", xyz=fmt_vec(t.translation), rpy=fmt_vec(rpy))


def _geometry_el(parent, tag, g: Geometry):
    wrap = sub(parent, tag)
    _origin_el(wrap, g.origin)
    geom = sub(wrap, "geometry")
    attrs = {"filename": g.mesh}
    if not np.array_equal(g.scale, np.ones(3)):
        attrs["scale"] = fmt_vec(g.scale)
    sub(geom, "mesh", **attrs)


def emit_urdf(m: RobotModel, opts: EmitOptions | None = None) -> str:
    """Serialize a chained tree model as URDF text.

    Links come out in model order, then joints; identical models produce
    byte-identical documents.
    """
    opts = opts or EmitOptions()
    if m.framing != CHAINED:
        raise UrdfError(f"URDF needs chained framing, got '{m.framing}'")
    _, loops, _ = joint_structure(m)
    if loops:
        raise UrdfError(
            "closed kinematic loop cannot be described in URDF; "
            "loop-closing joint(s): " + ", ".join(loops)
        )
    for j in m.joints:
        if j.kind not in _URDF_KINDS:
            raise UrdfError(f"joint '{j.name}' has kind '{j.kind}', which URDF cannot express")
        if j.parent == WORLD:
            raise UrdfError(f"joint '{j.name}' is anchored to the reserved world frame, "
                            "which URDF cannot express")
        if j.kind in ("revolute", "prismatic") and j.limits is None:
            raise UrdfError(f"{j.kind} joint '{j.name}' requires limits in URDF")

    root_pose = None
    for link in m.links:
        if link.pose_in_model is not None and not link.pose_in_model.is_identity():
            root_pose = link.name
    if root_pose is not None:
        warnings.warn(
            f"link '{root_pose}' carries a model pose that URDF cannot store; dropped",
            stacklevel=2,
        )

    robot = ET.Element("robot", {"name": m.name})
    for link in m.links:
        le = sub(robot, "link", name=link.name)
        ie = sub(le, "inertial")
        _origin_el(ie, link.inertial.origin)
        sub(ie, "mass", value=fmt_float(link.inertial.mass))
        i = link.inertial.inertia
        sub(ie, "inertia", ixx=fmt_float(i.ixx), ixy=fmt_float(i.ixy),
            ixz=fmt_float(i.ixz), iyy=fmt_float(i.iyy), iyz=fmt_float(i.iyz),
            izz=fmt_float(i.izz))
        for g in link.visuals:
            _geometry_el(le, "visual", g)
        for g in link.collisions:
            _geometry_el(le, "collision", g)

    for j in m.joints:
        je = sub(robot, "joint", name=j.name, type=j.kind)
        _origin_el(je, j.origin)
        sub(je, "parent", link=j.parent)
        sub(je, "child", link=j.child)
        if j.axis is not None:
            sub(je, "axis", xyz=fmt_vec(j.axis))
        if j.limits is not None:
            sub(je, "limit", lower=fmt_float(j.limits.lower),
                upper=fmt_float(j.limits.upper), effort=fmt_float(j.limits.effort),
                velocity=fmt_float(j.limits.velocity))
        if j.dynamics.damping or j.dynamics.friction:
            sub(je, "dynamics", damping=fmt_float(j.dynamics.damping),
                friction=fmt_float(j.dynamics.friction))

    return serialize(robot, stamp=opts.stamp)


def _attr_floats(el, attr, n, default, what):
    raw = el.get(attr)
    if raw is None:
        return list(default)
    return parse_floats(raw, n, f"{what}@{attr}")


def _parse_origin(el, what) -> Transform:
    origin = el.find("origin")
    if origin is None:
        return Transform.identity()
    xyz = _attr_floats(origin, "xyz", 3, (0.0, 0.0, 0.0), what)
    rpy = _attr_floats(origin, "rpy", 3, (0.0, 0.0, 0.0), what)
    return Transform(rpy_to_rot(rpy), xyz)


def _parse_geometry(el, what) -> Geometry | None:
    geom = el.find("geometry")
    if geom is None:
        raise UrdfError(f"{what}: missing <geometry>")
    mesh = geom.find("mesh")
    if mesh is None:
        kinds = [c.tag for c in geom]
        warnings.warn(f"{what}: unsupported geometry {kinds}; skipped", stacklevel=2)
        return None
    filename = mesh.get("filename")
    if not filename:
        raise UrdfError(f"{what}: <mesh> requires a filename attribute")
    scale = _attr_floats(mesh, "scale", 3, (1.0, 1.0, 1.0), what)
    return Geometry(mesh=filename, origin=_parse_origin(el, what), scale=scale)


def _warn_unknown(el, known, what):
    for child in el:
        if child.tag not in known:
            warnings.warn(f"{what}: ignoring unknown element <{child.tag}>", stacklevel=3)


def parse_urdf(text: str) -> RobotModel:
    """Parse URDF text into a chained-framing model, applying URDF defaults."""
    root = parse_xml(text, UrdfError)
    if root.tag != "robot":
        raise UrdfError(f"expected <robot> root element, got <{root.tag}>")
    name = root.get("name")
    if not name:
        raise UrdfError("<robot> requires a name attribute")

    links = []
    for le in root.findall("link"):
        lname = le.get("name")
        if not lname:
            raise UrdfError("<link> requires a name attribute")
        what = f"link '{lname}'"
        _warn_unknown(le, _KNOWN_LINK_CHILDREN, what)
        ie = le.find("inertial")
        if ie is None:
            inertial = Inertial()
        else:
            mass_el = ie.find("mass")
            mass = float(mass_el.get("value", "0")) if mass_el is not None else 0.0
            it = ie.find("inertia")
            if it is None:
                tensor = InertiaTensor.zero()
            else:
                tensor = InertiaTensor(
                    ixx=float(it.get("ixx", "0")), iyy=float(it.get("iyy", "0")),
                    izz=float(it.get("izz", "0")), ixy=float(it.get("ixy", "0")),
                    ixz=float(it.get("ixz", "0")), iyz=float(it.get("iyz", "0")),
                )
            inertial = Inertial(mass=mass, origin=_parse_origin(ie, what), inertia=tensor)
        visuals = [g for g in (_parse_geometry(v, what) for v in le.findall("visual")) if g]
        collisions = [g for g in (_parse_geometry(c, what) for c in le.findall("collision")) if g]
        links.append(Link(name=lname, inertial=inertial, visuals=visuals,
                          collisions=collisions))

    joints = []
    for je in root.findall("joint"):
        jname = je.get("name")
        kind = je.get("type")
        if not jname:
            raise UrdfError("<joint> requires a name attribute")
        what = f"joint '{jname}'"
        if kind not in _URDF_KINDS:
            raise UrdfError(f"{what}: unknown or unsupported type '{kind}'")
        _warn_unknown(je, _KNOWN_JOINT_CHILDREN, what)
        parent = je.find("parent")
        child = je.find("child")
        if parent is None or child is None or not parent.get("link") or not child.get("link"):
            raise UrdfError(f"{what}: requires <parent link> and <child link>")
        axis = None
        if kind != "fixed":
            axis_el = je.find("axis")
            axis = (_attr_floats(axis_el, "xyz", 3, (1.0, 0.0, 0.0), what)
                    if axis_el is not None else [1.0, 0.0, 0.0])
        limit_el = je.find("limit")
        limits = None
        if limit_el is not None:
            limits = Limits(
                lower=float(limit_el.get("lower", "0")),
                upper=float(limit_el.get("upper", "0")),
                effort=float(limit_el.get("effort", "0")),
                velocity=float(limit_el.get("velocity", "0")),
            )
        if kind in ("revolute", "prismatic") and limits is None:
            raise UrdfError(f"{what}: {kind} joints require <limit> in URDF")
        dyn_el = je.find("dynamics")
        dynamics = JointDynamics(
            damping=float(dyn_el.get("damping", "0")) if dyn_el is not None else 0.0,
            friction=float(dyn_el.get("friction", "0")) if dyn_el is not None else 0.0,
        )
        joints.append(JointSpec(
            name=jname, kind=kind, parent=parent.get("link"), child=child.get("link"),
            origin=_parse_origin(je, what), axis=axis, limits=limits, dynamics=dynamics,
        ))

    link_names = {l.name for l in links}
    for j in joints:
        for role, ref in (("parent", j.parent), ("child", j.child)):
            if ref not in link_names:
                raise UrdfError(f"joint '{j.name}' {role} references unknown link '{ref}'")
    try:
        return RobotModel(name=name, links=tuple(links), joints=tuple(joints),
                          framing=CHAINED)
    except ValueError as exc:
        raise UrdfError(str(exc)) from None
