"""Assembly-to-model conversion, URDF<->SDF re-framing, and output packaging.

Frame construction: the root link frame is the grounded component frame;
every other link frame sits at its joint's world origin with the child
component's world orientation, so mesh and inertial offsets stay
rotation-free whenever the CAD pose is.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from . import mesh as meshmod
from .assembly import AssemblyDoc, PhysExplicit, default_mesh_loader
from .errors import ClosedLoopError, ConvertError
from .formats import EmitOptions, MODEL_URI, RELATIVE, emit_model_config, emit_sdf, emit_urdf
from .kingraph import CLOSED_LOOP, KinGraph, NameMap
from .model import (
    CHAINED,
    Geometry,
    Inertial,
    JointDynamics,
    JointSpec,
    Limits,
    Link,
    MODEL_FRAME,
    RobotModel,
    UNBOUNDED_LIMIT,
    to_chained,
    to_model_frame,
)
from .spatial import (
    InertiaTensor,
    Transform,
    compose,
    inverse,
    relative,
    rotate_inertia,
)

FORMATS = ("urdf", "sdf")
SIMULATORS = ("none", "pybullet", "gazebo")

# (format, simulator) pairs this toolchain will package.
COMPATIBLE_PROFILES = frozenset(
    (fmt, sim) for fmt in FORMATS for sim in SIMULATORS
)

# Mass/inertia of the helper link inserted when a cylindrical joint is
# split into prismatic + revolute.
EPSILON_MASS = 1e-6
EPSILON_INERTIA = 1e-9


@dataclass(frozen=True)
class ConvertOptions:
    format: str = "urdf"
    simulator: str = "none"
    out_name: Optional[str] = None
    decompose_cylindrical: bool = True
    stamp: str = ""

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ConvertError(f"unknown format '{self.format}', expected one of {FORMATS}")
        if self.simulator not in SIMULATORS:
            raise ConvertError(
                f"unknown simulator profile '{self.simulator}', expected one of {SIMULATORS}"
            )
        if (self.format, self.simulator) not in COMPATIBLE_PROFILES:
            raise ConvertError(
                f"profile '{self.simulator}' does not support format '{self.format}'"
            )


def _fresh(base: str, used: set) -> str:
    name = base
    n = 1
    while name in used:
        n += 1
        name = f"{base}_{n}"
    used.add(name)
    return name


def _map_limits(rec_limits) -> Optional[Limits]:
    if rec_limits is None:
        return None
    return Limits(lower=rec_limits.lower, upper=rec_limits.upper,
                  effort=rec_limits.effort, velocity=rec_limits.velocity)


def assembly_to_model(doc: AssemblyDoc, graph: KinGraph, names: NameMap,
                      options: ConvertOptions) -> RobotModel:
    """Build the robot model from a resolved assembly and its spanning tree.

    Tree assemblies come out in chained framing; closed loops target SDF
    and come out in model_frame framing with the loop joints appended.
    """
    sdf_target = options.format == "sdf"
    if graph.loop_edges and not sdf_target:
        raise ClosedLoopError([names.joint(j) for j in graph.loop_edges])

    for comp in doc.components:
        if not isinstance(comp.phys, PhysExplicit):
            raise ConvertError(
                f"component '{comp.id}' has unresolved physical properties; "
                "run resolve_physical first"
            )

    joints_by_id = {j.id: j for j in doc.joints}
    used_names = set(names.components.values()) | set(names.joints.values())

    # Link frames in world coordinates.
    link_frame: Dict[str, Transform] = {}
    root_comp = doc.component(graph.root)
    link_frame[graph.root] = root_comp.world_transform
    for edge in graph.spanning_edges:
        joint = joints_by_id[edge.joint_id]
        child_comp = doc.component(edge.child)
        link_frame[edge.child] = Transform(
            child_comp.world_transform.rotation, joint.origin_world.translation
        )

    def build_link(cid: str) -> Link:
        comp = doc.component(cid)
        frame = link_frame[cid]
        offset = relative(frame, comp.world_transform)
        phys: PhysExplicit = comp.phys
        com_in_link = offset.apply(phys.com)
        inertia = rotate_inertia(phys.inertia_com, offset.rotation)
        geoms = {}
        for field_name, ref in (("visual", comp.visual_mesh), ("collision", comp.collision_mesh)):
            if ref is not None:
                geoms[field_name] = (Geometry(mesh=ref, origin=offset,
                                              scale=np.full(3, doc.mesh_scale)),)
            else:
                geoms[field_name] = ()
        return Link(
            name=names.component(cid),
            inertial=Inertial(mass=phys.mass, origin=Transform(np.eye(3), com_in_link),
                              inertia=inertia),
            visuals=geoms["visual"],
            collisions=geoms["collision"],
            pose_in_model=frame if cid == graph.root else None,
        )

    links = [build_link(graph.root)]
    order = [graph.root]
    for edge in graph.spanning_edges:
        links.append(build_link(edge.child))
        order.append(edge.child)

    def joint_axis_in_child(joint, child_cid, flip):
        if joint.axis_world is None:
            return None
        axis = -joint.axis_world if flip else joint.axis_world
        r_child = link_frame[child_cid].rotation
        return r_child.T @ axis

    def mapped_kind_and_limits(joint):
        limits = _map_limits(joint.limits)
        if joint.kind == "rigid":
            return "fixed", None
        if joint.kind == "revolute":
            if limits is None:
                if sdf_target:
                    return "revolute", Limits(-UNBOUNDED_LIMIT, UNBOUNDED_LIMIT)
                return "continuous", None
            return "revolute", limits
        if joint.kind == "slider":
            if limits is None:
                if sdf_target:
                    return "prismatic", Limits(-UNBOUNDED_LIMIT, UNBOUNDED_LIMIT)
                raise ConvertError(
                    f"slider joint '{joint.id}' has no limits; URDF prismatic "
                    "joints require them (SDF export works)"
                )
            return "prismatic", limits
        if joint.kind == "ball":
            if not sdf_target:
                raise ConvertError(
                    f"ball joint '{joint.id}' cannot be expressed in URDF; export SDF instead"
                )
            return "ball", None
        if joint.kind == "planar":
            return "planar", limits
        raise ConvertError(f"joint '{joint.id}' has unmapped kind '{joint.kind}'")

    model_joints = []
    extra_links = []
    for edge in graph.spanning_edges:
        joint = joints_by_id[edge.joint_id]
        jname = names.joint(edge.joint_id)
        parent_name = names.component(edge.parent)
        child_name = names.component(edge.child)
        origin = relative(link_frame[edge.parent], link_frame[edge.child])
        axis = joint_axis_in_child(joint, edge.child, edge.reversed)

        if joint.kind == "cylindrical":
            if not options.decompose_cylindrical:
                raise ConvertError(
                    f"cylindrical joint '{joint.id}' needs decomposition, "
                    "which is disabled"
                )
            carrier = _fresh(f"{jname}_carrier", used_names)
            extra_links.append(Link(
                name=carrier,
                inertial=Inertial(
                    mass=EPSILON_MASS,
                    inertia=InertiaTensor.diagonal(EPSILON_INERTIA, EPSILON_INERTIA,
                                                   EPSILON_INERTIA),
                ),
            ))
            slide_limits = _map_limits(joint.limits) if False else None
            model_joints.append(JointSpec(
                name=_fresh(f"{jname}_slide", used_names), kind="prismatic",
                parent=parent_name, child=carrier, origin=origin, axis=axis,
                limits=slide_limits or Limits(-UNBOUNDED_LIMIT, UNBOUNDED_LIMIT),
            ))
            turn_limits = _map_limits(joint.limits)
            if turn_limits is None:
                turn_kind, turn_limits = ("revolute", Limits(-UNBOUNDED_LIMIT, UNBOUNDED_LIMIT)) \
                    if sdf_target else ("continuous", None)
            else:
                turn_kind = "revolute"
            model_joints.append(JointSpec(
                name=_fresh(f"{jname}_turn", used_names), kind=turn_kind,
                parent=carrier, child=child_name, origin=Transform.identity(),
                axis=axis, limits=turn_limits,
            ))
            continue

        kind, limits = mapped_kind_and_limits(joint)
        model_joints.append(JointSpec(
            name=jname, kind=kind, parent=parent_name, child=child_name,
            origin=origin, axis=axis, limits=limits,
        ))

    model = RobotModel(
        name=doc.name,
        links=tuple(links + extra_links),
        joints=tuple(model_joints),
        framing=CHAINED,
    )

    if not graph.loop_edges:
        return model

    # Closed loop: re-frame the spanning tree, then append loop joints with
    # poses relative to their child link.
    mf = to_model_frame(model)
    loop_joints = []
    for jid in graph.loop_edges:
        joint = joints_by_id[jid]
        child_frame = link_frame[joint.child]
        joint_frame = Transform(child_frame.rotation, joint.origin_world.translation)
        kind, limits = mapped_kind_and_limits(joint)
        if joint.kind == "cylindrical":
            raise ConvertError(
                f"cylindrical joint '{joint.id}' closes a loop; decomposition "
                "inside a loop is not supported"
            )
        axis = None
        if joint.axis_world is not None:
            axis = joint_frame.rotation.T @ joint.axis_world
        loop_joints.append(JointSpec(
            name=names.joint(jid), kind=kind,
            parent=names.component(joint.parent), child=names.component(joint.child),
            origin=relative(child_frame, joint_frame), axis=axis, limits=limits,
        ))
    return RobotModel(name=mf.name, links=mf.links,
                      joints=tuple(mf.joints) + tuple(loop_joints),
                      framing=MODEL_FRAME)


def urdf_to_sdf(m: RobotModel) -> RobotModel:
    """Chained tree -> model_frame; continuous joints become bounded revolute."""
    mf = to_model_frame(m)
    joints = []
    for j in mf.joints:
        if j.kind == "continuous":
            j = replace(j, kind="revolute",
                        limits=Limits(-UNBOUNDED_LIMIT, UNBOUNDED_LIMIT,
                                      effort=j.limits.effort if j.limits else 0.0,
                                      velocity=j.limits.velocity if j.limits else 0.0))
        joints.append(j)
    return replace(mf, joints=tuple(joints))


def sdf_to_urdf(m: RobotModel) -> RobotModel:
    """Model_frame tree -> chained; unbounded revolute becomes continuous."""
    for j in m.joints:
        if j.kind == "ball":
            raise ConvertError(
                f"ball joint '{j.name}' cannot be expressed in URDF"
            )
    chained = to_chained(m)
    joints = []
    for j in chained.joints:
        if (j.kind == "revolute" and j.limits is not None
                and j.limits.lower == -UNBOUNDED_LIMIT
                and j.limits.upper == UNBOUNDED_LIMIT):
            dropped = None
            if j.limits.effort or j.limits.velocity:
                dropped = Limits(-UNBOUNDED_LIMIT, UNBOUNDED_LIMIT,
                                 j.limits.effort, j.limits.velocity)
            j = replace(j, kind="continuous", limits=None)
            if dropped is not None and (dropped.effort or dropped.velocity):
                pass  # effort/velocity have no home on a URDF continuous joint without <limit>
        joints.append(j)
    return replace(chained, joints=tuple(joints))


def _sanitize_filename(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)


def package_output(m: RobotModel, meshes: Dict[str, meshmod.TriMesh],
                   options: ConvertOptions, out_dir) -> Path:
    """Write ``<out>/<name>/`` with the description file and baked meshes.

    Mesh references become ``meshes/<link>.stl`` (relative profiles) or
    ``model://<name>/meshes/<link>.stl`` plus model.config (gazebo).  Mesh
    scale is baked into the written STL, so emitted geometry carries none.
    """
    name = options.out_name or m.name
    target = Path(out_dir) / name
    mesh_dir = target / "meshes"

    # Assign one output file per (link, role) with distinct sources.
    planned = {}  # output filename -> (source ref, scale tuple)
    rewritten_links = []
    for link in m.links:
        def rewrite(geoms, role):
            out = []
            for g in geoms:
                if g.mesh not in meshes:
                    raise ConvertError(f"no mesh data supplied for reference '{g.mesh}'")
                base = _sanitize_filename(link.name)
                fname = f"{base}.stl"
                key = (g.mesh, tuple(g.scale))
                if fname in planned and planned[fname] != key:
                    fname = f"{base}_{role}.stl"
                if fname in planned and planned[fname] != key:
                    raise ConvertError(
                        f"mesh filename collision after sanitization: '{fname}'"
                    )
                planned[fname] = key
                if options.simulator == "gazebo":
                    ref = f"model://{name}/meshes/{fname}"
                else:
                    ref = f"meshes/{fname}"
                out.append(replace(g, mesh=ref, scale=np.ones(3)))
            return tuple(out)

        rewritten_links.append(replace(
            link,
            visuals=rewrite(link.visuals, "visual"),
            collisions=rewrite(link.collisions, "collision"),
        ))

    packaged = replace(m, links=tuple(rewritten_links))
    style = MODEL_URI if options.simulator == "gazebo" else RELATIVE
    emit_opts = EmitOptions(mesh_path_style=style, stamp=options.stamp)

    target.mkdir(parents=True, exist_ok=True)
    if options.format == "urdf":
        doc_path = target / f"{name}.urdf"
        doc_path.write_text(emit_urdf(packaged, emit_opts), encoding="utf-8")
    else:
        doc_path = target / "model.sdf"
        doc_path.write_text(emit_sdf(packaged, emit_opts), encoding="utf-8")
        if options.simulator == "gazebo":
            (target / "model.config").write_text(
                emit_model_config(name, description=f"{name} exported by rdf-forge"),
                encoding="utf-8",
            )

    if planned:
        mesh_dir.mkdir(exist_ok=True)
        for fname, (source, scale) in sorted(planned.items()):
            tri = meshes[source]
            factor = float(scale[0])
            if not np.allclose(scale, scale[0]):
                raise ConvertError("non-uniform mesh scale cannot be baked into STL")
            if factor != 1.0:
                tri = meshmod.scale_mesh(tri, factor)
            (mesh_dir / fname).write_bytes(meshmod.write_stl(tri, "binary"))
    return target


def collect_meshes(doc: AssemblyDoc, loader=None) -> Dict[str, meshmod.TriMesh]:
    """Load every distinct mesh reference in the document."""
    if loader is None:
        loader = default_mesh_loader(doc)
    out: Dict[str, meshmod.TriMesh] = {}
    for comp in doc.components:
        for ref in (comp.visual_mesh, comp.collision_mesh):
            if ref is not None and ref not in out:
                out[ref] = loader(ref)
    return out
