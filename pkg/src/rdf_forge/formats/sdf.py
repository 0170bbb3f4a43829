"""SDFormat 1.7 emission and parsing against the model-frame robot model.

Joint poses are written relative to the child link (the 1.7 default) and
axis directions in the joint frame; closed loops are plain extra joints.
"""

from __future__ import annotations

import warnings
import xml.etree.ElementTree as ET

import numpy as np

from ..errors import SdfError
from ..model import (
    MODEL_FRAME,
    Geometry,
    Inertial,
    JointDynamics,
    JointSpec,
    Limits,
    Link,
    RobotModel,
    UNBOUNDED_LIMIT,
    WORLD,
)
from ..spatial import InertiaTensor, Transform
from .common import (
    EmitOptions,
    fmt_float,
    fmt_pose,
    fmt_vec,
    parse_floats,
    parse_pose,
    parse_xml,
    serialize,
    sub,
)

SDF_VERSION = "1.7"
_MIN_VERSION = 1.4

_KNOWN_LINK_CHILDREN = {"pose", "inertial", "visual", "collision"}
_KNOWN_JOINT_CHILDREN = {"pose", "parent", "child", "axis"}


def _geometry_el(parent, tag, g: Geometry, index: int, link_name: str):
    suffix = "" if index == 0 else f"_{index + 1}"
    wrap = sub(parent, tag, name=f"{link_name}_{tag}{suffix}")
    sub(wrap, "pose", fmt_pose(g.origin))
    geom = sub(wrap, "geometry")
    mesh = sub(geom, "mesh")
    sub(mesh, "uri", g.mesh)
    if not np.array_equal(g.scale, np.ones(3)):
        sub(mesh, "scale", fmt_vec(g.scale))


def emit_sdf(m: RobotModel, opts: EmitOptions | None = None) -> str:
    """Serialize a model-frame model as an SDF 1.7 document."""
    opts = opts or EmitOptions()
    if m.framing != MODEL_FRAME:
        raise SdfError(f"SDF emission needs model_frame framing, got '{m.framing}'")

    sdf = ET.Element("sdf", {"version": SDF_VERSION})
    model = sub(sdf, "model", name=m.name)
    for link in m.links:
        le = sub(model, "link", name=link.name)
        sub(le, "pose", fmt_pose(link.pose_in_model))
        ie = sub(le, "inertial")
        sub(ie, "pose", fmt_pose(link.inertial.origin))
        sub(ie, "mass", fmt_float(link.inertial.mass))
        it = sub(ie, "inertia")
        t = link.inertial.inertia
        for tag, v in (("ixx", t.ixx), ("ixy", t.ixy), ("ixz", t.ixz),
                       ("iyy", t.iyy), ("iyz", t.iyz), ("izz", t.izz)):
            sub(it, tag, fmt_float(v))
        for i, g in enumerate(link.visuals):
            _geometry_el(le, "visual", g, i, link.name)
        for i, g in enumerate(link.collisions):
            _geometry_el(le, "collision", g, i, link.name)

    for j in m.joints:
        je = sub(model, "joint", name=j.name, type=j.kind)
        sub(je, "pose", fmt_pose(j.origin))
        sub(je, "parent", j.parent)
        sub(je, "child", j.child)
        if j.axis is not None:
            ax = sub(je, "axis")
            sub(ax, "xyz", fmt_vec(j.axis))
            if j.limits is not None:
                lim = sub(ax, "limit")
                sub(lim, "lower", fmt_float(j.limits.lower))
                sub(lim, "upper", fmt_float(j.limits.upper))
                sub(lim, "effort", fmt_float(j.limits.effort))
                sub(lim, "velocity", fmt_float(j.limits.velocity))
            if j.dynamics.damping or j.dynamics.friction:
                dyn = sub(ax, "dynamics")
                sub(dyn, "damping", fmt_float(j.dynamics.damping))
                sub(dyn, "friction", fmt_float(j.dynamics.friction))

    return serialize(sdf, stamp=opts.stamp)


def _text_of(el, tag, default=None):
    child = el.find(tag)
    if child is None or child.text is None:
        return default
    return child.text.strip()


def _parse_pose_tag(el, what) -> Transform:
    text = _text_of(el, "pose")
    if text is None:
        return Transform.identity()
    return parse_pose(text, what)


def _parse_geometry(el, what) -> Geometry | None:
    geom = el.find("geometry")
    if geom is None:
        raise SdfError(f"{what}: missing <geometry>")
    mesh = geom.find("mesh")
    if mesh is None:
        kinds = [c.tag for c in geom]
        warnings.warn(f"{what}: unsupported geometry {kinds}; skipped", stacklevel=2)
        return None
    uri = _text_of(mesh, "uri")
    if not uri:
        raise SdfError(f"{what}: <mesh> requires a <uri>")
    scale_text = _text_of(mesh, "scale")
    scale = parse_floats(scale_text, 3, f"{what} scale") if scale_text else [1.0, 1.0, 1.0]
    return Geometry(mesh=uri, origin=_parse_pose_tag(el, what), scale=scale)


def parse_sdf(text: str) -> RobotModel:
    """Parse SDF (version >= 1.4, read with 1.7 pose semantics) into a model."""
    root = parse_xml(text, SdfError)
    if root.tag != "sdf":
        raise SdfError(f"expected <sdf> root element, got <{root.tag}>")
    version = root.get("version")
    if version is not None:
        try:
            if float(version) < _MIN_VERSION:
                raise SdfError(f"SDF version {version} predates {_MIN_VERSION}; not supported")
        except ValueError:
            raise SdfError(f"bad SDF version attribute {version!r}") from None
    model = root.find("model")
    if model is None:
        raise SdfError("expected a <model> element under <sdf>")
    name = model.get("name")
    if not name:
        raise SdfError("<model> requires a name attribute")

    links = []
    for le in model.findall("link"):
        lname = le.get("name")
        if not lname:
            raise SdfError("<link> requires a name attribute")
        what = f"link '{lname}'"
        for child in le:
            if child.tag not in _KNOWN_LINK_CHILDREN:
                warnings.warn(f"{what}: ignoring unknown element <{child.tag}>", stacklevel=2)
        ie = le.find("inertial")
        if ie is None:
            inertial = Inertial()
        else:
            mass = float(_text_of(ie, "mass", "0"))
            it = ie.find("inertia")
            if it is None:
                tensor = InertiaTensor.zero()
            else:
                tensor = InertiaTensor(
                    ixx=float(_text_of(it, "ixx", "0")),
                    iyy=float(_text_of(it, "iyy", "0")),
                    izz=float(_text_of(it, "izz", "0")),
                    ixy=float(_text_of(it, "ixy", "0")),
                    ixz=float(_text_of(it, "ixz", "0")),
                    iyz=float(_text_of(it, "iyz", "0")),
                )
            inertial = Inertial(mass=mass, origin=_parse_pose_tag(ie, what), inertia=tensor)
        visuals = [g for g in (_parse_geometry(v, what) for v in le.findall("visual")) if g]
        collisions = [g for g in (_parse_geometry(c, what) for c in le.findall("collision")) if g]
        links.append(Link(name=lname, inertial=inertial, visuals=visuals,
                          collisions=collisions, pose_in_model=_parse_pose_tag(le, what)))

    joints = []
    for je in model.findall("joint"):
        jname = je.get("name")
        kind = je.get("type")
        if not jname:
            raise SdfError("<joint> requires a name attribute")
        what = f"joint '{jname}'"
        parent = _text_of(je, "parent")
        child = _text_of(je, "child")
        if not parent or not child:
            raise SdfError(f"{what}: requires <parent> and <child>")
        axis = None
        limits = None
        dynamics = JointDynamics()
        axis_el = je.find("axis")
        if axis_el is not None:
            xyz = _text_of(axis_el, "xyz", "1 0 0")
            axis = parse_floats(xyz, 3, f"{what} axis xyz")
            lim = axis_el.find("limit")
            if lim is not None:
                limits = Limits(
                    lower=float(_text_of(lim, "lower", str(-UNBOUNDED_LIMIT))),
                    upper=float(_text_of(lim, "upper", str(UNBOUNDED_LIMIT))),
                    effort=float(_text_of(lim, "effort", "0")),
                    velocity=float(_text_of(lim, "velocity", "0")),
                )
            dyn = axis_el.find("dynamics")
            if dyn is not None:
                dynamics = JointDynamics(
                    damping=float(_text_of(dyn, "damping", "0")),
                    friction=float(_text_of(dyn, "friction", "0")),
                )
        if kind in ("revolute", "prismatic") and limits is None:
            # SDF treats a missing limit block as unbounded.
            limits = Limits(lower=-UNBOUNDED_LIMIT, upper=UNBOUNDED_LIMIT)
        try:
            joints.append(JointSpec(
                name=jname, kind=kind, parent=parent, child=child,
                origin=_parse_pose_tag(je, what), axis=axis, limits=limits,
                dynamics=dynamics,
            ))
        except ValueError as exc:
            raise SdfError(f"{what}: {exc}") from None

    link_names = {l.name for l in links}
    for j in joints:
        if j.parent != WORLD and j.parent not in link_names:
            raise SdfError(f"joint '{j.name}' parent references unknown link '{j.parent}'")
        if j.child not in link_names:
            raise SdfError(f"joint '{j.name}' child references unknown link '{j.child}'")
    try:
        return RobotModel(name=name, links=tuple(links), joints=tuple(joints),
                          framing=MODEL_FRAME)
    except ValueError as exc:
        raise SdfError(str(exc)) from None


def emit_model_config(name: str, author: str = "", description: str = "") -> str:
    """Companion model.config metadata required for model:// URI resolution."""
    if not name:
        raise SdfError("model.config requires a non-empty model name")
    root = ET.Element("model")
    sub(root, "name", name)
    sub(root, "version", "1.0")
    sub(root, "sdf", "model.sdf", version=SDF_VERSION)
    if author:
        ae = sub(root, "author")
        sub(ae, "name", author)
    if description:
        sub(root, "description", description)
    return serialize(root)
