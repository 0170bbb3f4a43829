"""Format-neutral in-memory robot description and its two pose framings.

``chained``: each joint origin is the child frame expressed in the parent
link frame, and the child link frame coincides with the joint frame (URDF
semantics).  ``model_frame``: each link carries a pose in the model frame
and each joint carries a pose relative to its child link (SDF 1.7 default
semantics).  Conversion between the two lives here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ClosedLoopError, ConvertError
from .kingraph import classify_edges
from .spatial import InertiaTensor, Transform, compose, relative

CHAINED = "chained"
MODEL_FRAME = "model_frame"

JOINT_KINDS = ("fixed", "revolute", "continuous", "prismatic", "planar", "ball")
_AXIS_KINDS = ("revolute", "continuous", "prismatic", "planar")

# SDF has no unlimited revolute/prismatic kind; this bound stands in for
# "no limit" and maps back to URDF continuous on the return trip.
UNBOUNDED_LIMIT = 1e16

WORLD = "world"  # reserved parent name accepted from SDF documents


@dataclass(frozen=True)
class Limits:
    lower: float
    upper: float
    effort: float = 0.0
    velocity: float = 0.0

    def __post_init__(self):
        for name in ("lower", "upper", "effort", "velocity"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.lower > self.upper:
            raise ValueError(f"limit lower ({self.lower}) exceeds upper ({self.upper})")


@dataclass(frozen=True)
class JointDynamics:
    damping: float = 0.0
    friction: float = 0.0


@dataclass(frozen=True, eq=False)
class Geometry:
    """Mesh reference with per-axis scale and a pose in the link frame."""

    mesh: str
    origin: Transform = field(default_factory=Transform.identity)
    scale: np.ndarray = None

    def __post_init__(self):
        s = np.ones(3) if self.scale is None else np.array(self.scale, dtype=np.float64)
        if s.shape == ():
            s = np.full(3, float(s))
        if s.shape != (3,):
            raise ValueError(f"scale must be scalar or 3-vector, got shape {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "scale", s)


@dataclass(frozen=True, eq=False)
class Inertial:
    mass: float = 0.0
    origin: Transform = field(default_factory=Transform.identity)
    inertia: Optional[InertiaTensor] = None

    def __post_init__(self):
        object.__setattr__(self, "mass", float(self.mass))
        if self.inertia is None:
            object.__setattr__(self, "inertia", InertiaTensor.zero())


@dataclass(frozen=True, eq=False)
class Link:
    name: str
    inertial: Inertial = field(default_factory=Inertial)
    visuals: tuple = ()
    collisions: tuple = ()
    pose_in_model: Optional[Transform] = None

    def __post_init__(self):
        object.__setattr__(self, "visuals", tuple(self.visuals))
        object.__setattr__(self, "collisions", tuple(self.collisions))


@dataclass(frozen=True, eq=False)
class JointSpec:
    name: str
    kind: str
    parent: str
    child: str
    origin: Transform = field(default_factory=Transform.identity)
    axis: Optional[np.ndarray] = None
    limits: Optional[Limits] = None
    dynamics: JointDynamics = field(default_factory=JointDynamics)

    def __post_init__(self):
        if self.kind not in JOINT_KINDS:
            raise ValueError(f"unknown joint kind '{self.kind}'")
        axis = self.axis
        if axis is not None:
            axis = np.array(axis, dtype=np.float64)
            if axis.shape != (3,):
                raise ValueError(f"axis must be a 3-vector, got shape {axis.shape}")
            n = float(np.linalg.norm(axis))
            if not math.isfinite(n) or n < 1e-12:
                raise ValueError(f"axis of joint '{self.name}' has no direction")
            axis.setflags(write=False)
            object.__setattr__(self, "axis", axis)
        if self.kind in _AXIS_KINDS and self.axis is None:
            raise ValueError(f"joint '{self.name}' of kind {self.kind} requires an axis")


@dataclass(frozen=True, eq=False)
class RobotModel:
    name: str
    links: tuple
    joints: tuple
    framing: str = CHAINED

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "joints", tuple(self.joints))
        if self.framing not in (CHAINED, MODEL_FRAME):
            raise ValueError(f"unknown framing '{self.framing}'")
        seen = set()
        for link in self.links:
            if link.name in seen:
                raise ValueError(f"duplicate link name '{link.name}'")
            seen.add(link.name)
        jseen = set()
        for j in self.joints:
            if j.name in jseen:
                raise ValueError(f"duplicate joint name '{j.name}'")
            jseen.add(j.name)
            for role, ref in (("parent", j.parent), ("child", j.child)):
                if ref not in seen and not (role == "parent" and ref == WORLD):
                    raise ValueError(
                        f"joint '{j.name}' {role} references unknown link '{ref}'"
                    )
        if self.framing == MODEL_FRAME:
            for link in self.links:
                if link.pose_in_model is None:
                    raise ValueError(
                        f"model_frame framing requires a pose on link '{link.name}'"
                    )

    def link(self, name: str) -> Link:
        for l in self.links:
            if l.name == name:
                return l
        raise KeyError(name)

    def joint(self, name: str) -> JointSpec:
        for j in self.joints:
            if j.name == name:
                return j
        raise KeyError(name)

    @property
    def total_mass(self) -> float:
        return sum(l.inertial.mass for l in self.links)


def root_link_name(m: RobotModel) -> str:
    """Link that is not the child of any joint; falls back to the first link."""
    children = {j.child for j in m.joints}
    for link in m.links:
        if link.name not in children:
            return link.name
    return m.links[0].name


def joint_structure(m: RobotModel):
    """Spanning/loop classification of the joint graph from the root link."""
    nodes = [l.name for l in m.links]
    if any(j.parent == WORLD for j in m.joints):
        nodes = [WORLD] + nodes
    edges = [(j.name, j.parent, j.child) for j in m.joints]
    root = root_link_name(m) if WORLD not in nodes else WORLD
    spanning, loops, unreachable = classify_edges(nodes, edges, root)
    return spanning, loops, unreachable


def joint_cycle_rank(m: RobotModel) -> int:
    _, loops, _ = joint_structure(m)
    return len(loops)


def require_tree(m: RobotModel):
    """Spanning edges in BFS order; raises ClosedLoopError when loops exist."""
    spanning, loops, unreachable = joint_structure(m)
    if loops:
        raise ClosedLoopError(loops)
    if unreachable:
        raise ConvertError(
            "joint graph is not connected; unreachable links: " + ", ".join(unreachable)
        )
    for _, _, _, rev in spanning:
        if rev:
            raise ConvertError(
                "joint graph contains a joint whose parent/child opposes the tree "
                "direction; re-root the model before converting framings"
            )
    return spanning


def to_model_frame(m: RobotModel) -> RobotModel:
    """Compose chained joint origins from the root into model-frame link poses.

    Joint poses become identity (relative to their child link); link-local
    geometry and inertial poses are untouched.
    """
    if m.framing != CHAINED:
        raise ConvertError(f"expected chained framing, got {m.framing}")
    spanning = require_tree(m)
    spanned_children = {child for _, _, child, _ in spanning}
    pose = {WORLD: Transform.identity()}
    for l in m.links:
        if l.name not in spanned_children:
            pose[l.name] = l.pose_in_model or Transform.identity()
    for jname, parent, child, _ in spanning:
        pose[child] = compose(pose[parent], m.joint(jname).origin)
    links = tuple(replace(l, pose_in_model=pose[l.name]) for l in m.links)
    joints = tuple(replace(j, origin=Transform.identity()) for j in m.joints)
    return RobotModel(name=m.name, links=links, joints=joints, framing=MODEL_FRAME)


def to_chained(m: RobotModel) -> RobotModel:
    """Rewrite model-frame poses as parent-relative joint origins.

    Exact inverse of to_model_frame on its image.  A joint pose that is not
    identity moves the child link frame onto the joint frame, so link-local
    content is re-expressed accordingly.  Closed loops cannot be chained.
    """
    if m.framing != MODEL_FRAME:
        raise ConvertError(f"expected model_frame framing, got {m.framing}")
    spanning = require_tree(m)
    spanned_children = {child for _, _, child, _ in spanning}

    # Chained frame of each link: the joint frame for spanned links, the
    # stored model pose for root links.
    frame = {WORLD: Transform.identity()}
    offset = {}  # old link frame -> chained frame, per link
    for l in m.links:
        if l.name not in spanned_children:
            frame[l.name] = l.pose_in_model
            offset[l.name] = Transform.identity()
    for jname, _, child, _ in spanning:
        j = m.joint(jname)
        frame[child] = compose(m.link(child).pose_in_model, j.origin)
        offset[child] = j.origin

    from .spatial import inverse as _inverse

    def shifted(link: Link) -> Link:
        off = offset[link.name]
        if off.is_identity(0.0):
            return link
        back = _inverse(off)
        return replace(
            link,
            inertial=replace(link.inertial, origin=compose(back, link.inertial.origin)),
            visuals=tuple(replace(g, origin=compose(back, g.origin)) for g in link.visuals),
            collisions=tuple(replace(g, origin=compose(back, g.origin))
                             for g in link.collisions),
        )

    links = []
    for link in m.links:
        new = shifted(link)
        pose = frame[link.name] if link.name not in spanned_children else None
        links.append(replace(new, pose_in_model=pose))
    joints = tuple(
        replace(j, origin=relative(frame[j.parent], frame[j.child]))
        for j in m.joints
    )
    return RobotModel(name=m.name, links=tuple(links), joints=joints, framing=CHAINED)
