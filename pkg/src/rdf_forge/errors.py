"""Exception hierarchy shared by all rdf-forge modules."""

from __future__ import annotations


class RdfForgeError(Exception):
    """Base class for every error raised by this package."""


class StlError(RdfForgeError):
    """Malformed or truncated STL input."""


class MeshError(RdfForgeError):
    """A mesh is unusable for the requested operation."""


class NotWatertightError(MeshError):
    """Mass properties were requested from a mesh with open or bad edges."""

    def __init__(self, open_edges, message=None):
        self.open_edges = list(open_edges)
        if message is None:
            shown = ", ".join(f"({a},{b})" for a, b in self.open_edges[:8])
            more = "" if len(self.open_edges) <= 8 else f" and {len(self.open_edges) - 8} more"
            message = (
                f"mesh is not watertight: {len(self.open_edges)} bad edge(s): {shown}{more}"
            )
        super().__init__(message)


class InvertedMeshError(MeshError):
    """Signed volume came out non-positive; triangles are inward-oriented."""


class AssemblyError(RdfForgeError):
    """Semantic problem in an assembly document."""


class AssemblySchemaError(AssemblyError):
    """Schema violation, reported with the JSON path of the offending field."""

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class DisconnectedAssemblyError(RdfForgeError):
    """Some components are not reachable from the grounded component.

    Carries the partial graph so callers can still render it.
    """

    def __init__(self, unreachable, graph=None):
        self.unreachable = list(unreachable)
        self.graph = graph
        super().__init__(
            "assembly is disconnected; unreachable from ground: "
            + ", ".join(self.unreachable)
        )


class ClosedLoopError(RdfForgeError):
    """A closed kinematic chain hit a representation that requires a tree."""

    def __init__(self, loop_joints, message=None):
        self.loop_joints = list(loop_joints)
        if message is None:
            message = (
                "closed-loop kinematic chain cannot be represented as a joint tree "
                "(URDF requires one); loop-closing joint(s): "
                + ", ".join(self.loop_joints)
            )
        super().__init__(message)


class ConvertError(RdfForgeError):
    """Conversion between representations failed."""


class FormatError(RdfForgeError):
    """Robot description text could not be parsed or emitted."""


class UrdfError(FormatError):
    pass


class SdfError(FormatError):
    pass
