"""Kinematic graph: spanning tree from the grounded component, loop detection,
name sanitization, and DOT rendering."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Dict, Optional

from .assembly import AssemblyDoc
from .errors import DisconnectedAssemblyError

TREE = "tree"
CLOSED_LOOP = "closed_loop"
DISCONNECTED = "disconnected"

_IDENT_OK = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class SpanningEdge:
    """Tree edge oriented parent -> child along the traversal.

    ``reversed`` marks joints whose stored parent/child opposes the
    traversal direction; the converter compensates there.
    """

    joint_id: str
    parent: str
    child: str
    reversed: bool


@dataclass(frozen=True)
class KinGraph:
    nodes: tuple
    edges: tuple  # (joint_id, stored_parent, stored_child)
    root: str
    classification: str
    spanning_edges: tuple  # SpanningEdge, BFS order
    loop_edges: tuple  # joint ids

    @property
    def cycle_rank(self) -> int:
        return len(self.loop_edges)


def classify_edges(nodes, edges, root):
    """BFS spanning tree over undirected edges, visiting edges in order.

    ``edges`` is a sequence of (edge_id, end_a, end_b).  Returns
    (spanning -> list of (edge_id, parent, child, reversed), loop edge ids,
    unreachable node ids).  Deterministic for a fixed input order.
    """
    incident: Dict[str, list] = {n: [] for n in nodes}
    for eid, a, b in edges:
        incident[a].append((eid, a, b))
        incident[b].append((eid, a, b))

    visited = {root}
    used = set()
    spanning = []
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for eid, a, b in incident[u]:
            if eid in used:
                continue
            v = b if a == u else a
            if v in visited:
                continue
            used.add(eid)
            visited.add(v)
            spanning.append((eid, u, v, a != u))
            queue.append(v)

    loops = [eid for eid, a, b in edges
             if eid not in used and a in visited and b in visited]
    unreachable = [n for n in nodes if n not in visited]
    return spanning, loops, unreachable


def build_graph(doc: AssemblyDoc) -> KinGraph:
    """Orient a spanning tree from the grounded component.

    Rigid joints stay as edges (they become fixed joints downstream).
    Raises DisconnectedAssemblyError when components are unreachable; the
    partial graph travels on the exception for rendering.
    """
    nodes = tuple(c.id for c in doc.components)
    edges = tuple((j.id, j.parent, j.child) for j in doc.joints)
    spanning, loops, unreachable = classify_edges(nodes, edges, doc.grounded)
    spanning_edges = tuple(SpanningEdge(*s) for s in spanning)
    if unreachable:
        partial = KinGraph(
            nodes=nodes, edges=edges, root=doc.grounded,
            classification=DISCONNECTED, spanning_edges=spanning_edges,
            loop_edges=tuple(loops),
        )
        raise DisconnectedAssemblyError(unreachable, graph=partial)
    return KinGraph(
        nodes=nodes, edges=edges, root=doc.grounded,
        classification=CLOSED_LOOP if loops else TREE,
        spanning_edges=spanning_edges, loop_edges=tuple(loops),
    )


def sanitize_name(name: str) -> str:
    """Force a display name into ``[A-Za-z_][A-Za-z0-9_]*``."""
    out = re.sub(r"[^A-Za-z0-9_]", "_", name)
    if not out:
        return "_"
    if out[0].isdigit():
        out = "_" + out
    return out


@dataclass(frozen=True)
class NameMap:
    """Unique sanitized names for components and joints (one shared namespace)."""

    components: dict
    joints: dict

    def component(self, cid: str) -> str:
        return self.components[cid]

    def joint(self, jid: str) -> str:
        return self.joints[jid]


def uniquify_names(doc: AssemblyDoc) -> NameMap:
    """Sanitize display names and deduplicate with _2, _3, ... in document order.

    Components are numbered before joints; running the result through again
    changes nothing.
    """
    used = set()

    def claim(display: str) -> str:
        base = sanitize_name(display)
        candidate = base
        n = 1
        while candidate in used:
            n += 1
            candidate = f"{base}_{n}"
        used.add(candidate)
        return candidate

    comps = {c.id: claim(c.name) for c in doc.components}
    joints = {j.id: claim(j.name) for j in doc.joints}
    return NameMap(components=comps, joints=joints)


def to_dot(graph: KinGraph, names: Optional[NameMap] = None) -> str:
    """DOT digraph of the kinematic structure; loop-closing edges are dashed."""

    def node_label(cid):
        return names.component(cid) if names else sanitize_name(cid)

    def joint_label(jid):
        return names.joint(jid) if names else sanitize_name(jid)

    lines = ["digraph kinematics {", "  rankdir=TB;"]
    for cid in graph.nodes:
        shape = "box" if cid == graph.root else "ellipse"
        lines.append(f'  "{node_label(cid)}" [shape={shape}];')
    spanned = {e.joint_id for e in graph.spanning_edges}
    loops = set(graph.loop_edges)
    for e in graph.spanning_edges:
        lines.append(
            f'  "{node_label(e.parent)}" -> "{node_label(e.child)}"'
            f' [label="{joint_label(e.joint_id)}"];'
        )
    for jid, a, b in graph.edges:
        if jid in spanned:
            continue
        style = ', style=dashed' if jid in loops else ""
        lines.append(
            f'  "{node_label(a)}" -> "{node_label(b)}"'
            f' [label="{joint_label(jid)}"{style}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
