"""Triangle-mesh STL I/O and mass properties from closed meshes.

Volume, center of mass, and inertia are integrated with the signed
origin-apex tetrahedron method, which is exact for watertight,
consistently outward-oriented triangle meshes.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import InvertedMeshError, MeshError, NotWatertightError, StlError
from .spatial import InertiaTensor, Transform

_BIN_HEADER = b"rdf-forge binary STL".ljust(80, b" ")
_BIN_RECORD = np.dtype(
    [("normal", "<f4", (3,)), ("verts", "<f4", (3, 3)), ("attr", "<u2")]
)


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Indexed triangle mesh: vertices in meters, CCW-outward triangles."""

    vertices: np.ndarray  # (n, 3) float64
    triangles: np.ndarray  # (m, 3) int64

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        t = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(t) and (t.min() < 0 or t.max() >= len(v)):
            raise MeshError("triangle index out of range")
        v = v.copy()
        t = t.copy()
        v.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)

    def corners(self) -> np.ndarray:
        """Triangle corner positions, shape (m, 3, 3)."""
        return self.vertices[self.triangles]


@dataclass(frozen=True, eq=False)
class MassProperties:
    """Integrated solid properties in the mesh frame."""

    volume: float  # m^3
    mass: float  # kg
    com: np.ndarray  # (3,) m
    inertia_com: InertiaTensor  # about com, axes parallel to mesh frame

    def __post_init__(self):
        com = np.array(self.com, dtype=np.float64)
        com.setflags(write=False)
        object.__setattr__(self, "com", com)


@dataclass(frozen=True)
class WatertightReport:
    watertight: bool
    open_edges: tuple  # undirected (min_index, max_index) pairs

    def __bool__(self):
        return self.watertight


def _mesh_from_soup(soup: np.ndarray) -> TriMesh:
    """Deduplicate exact-equal vertices and drop zero-area triangles."""
    soup = np.asarray(soup, dtype=np.float64).reshape(-1, 3, 3)
    index_of: dict = {}
    vertices: list = []
    flat = soup.reshape(-1, 3)
    idx = np.empty(len(flat), dtype=np.int64)
    for i, row in enumerate(flat):
        key = (row[0], row[1], row[2])
        j = index_of.get(key)
        if j is None:
            j = len(vertices)
            index_of[key] = j
            vertices.append(row)
        idx[i] = j
    tris = idx.reshape(-1, 3)
    keep = []
    for t in tris:
        a, b, c = t
        if a == b or b == c or a == c:
            continue
        va, vb, vc = vertices[a], vertices[b], vertices[c]
        if not np.any(np.cross(vb - va, vc - va)):
            continue
        keep.append(t)
    verts = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
    tris = np.asarray(keep, dtype=np.int64).reshape(-1, 3)
    return TriMesh(verts, tris)


def _is_ascii_stl(data: bytes) -> bool:
    head = data.lstrip()
    if not head.startswith(b"solid"):
        return False
    if len(head) > 5 and not head[5:6].isspace():
        return False
    return b"facet" in data


def _parse_ascii(data: bytes) -> np.ndarray:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise StlError(f"ASCII STL is not valid UTF-8: {exc}") from None
    lines = text.splitlines()
    pos = 0

    def next_tokens():
        nonlocal pos
        while pos < len(lines):
            pos += 1
            toks = lines[pos - 1].split()
            if toks:
                return pos, toks
        return pos, None

    def fail(lineno, message):
        raise StlError(f"line {lineno}: {message}")

    lineno, toks = next_tokens()
    if toks is None or toks[0] != "solid":
        fail(lineno, "expected 'solid' header")

    soup = []
    while True:
        lineno, toks = next_tokens()
        if toks is None:
            fail(lineno, "unexpected end of file, missing 'endsolid'")
        if toks[0] == "endsolid":
            break
        if toks[0] != "facet" or len(toks) < 2 or toks[1] != "normal" or len(toks) != 5:
            fail(lineno, f"expected 'facet normal nx ny nz', got {' '.join(toks)!r}")
        lineno, toks = next_tokens()
        if toks != ["outer", "loop"]:
            fail(lineno, "expected 'outer loop'")
        tri = []
        for _ in range(3):
            lineno, toks = next_tokens()
            if toks is None or toks[0] != "vertex" or len(toks) != 4:
                fail(lineno, "expected 'vertex x y z'")
            try:
                tri.append([float(toks[1]), float(toks[2]), float(toks[3])])
            except ValueError:
                fail(lineno, f"bad vertex number in {' '.join(toks)!r}")
        lineno, toks = next_tokens()
        if toks != ["endloop"]:
            fail(lineno, "expected 'endloop'")
        lineno, toks = next_tokens()
        if toks != ["endfacet"]:
            fail(lineno, "expected 'endfacet'")
        soup.append(tri)
    return np.asarray(soup, dtype=np.float64).reshape(-1, 3, 3)


def _parse_binary(data: bytes) -> np.ndarray:
    if len(data) < 84:
        raise StlError(f"binary STL truncated: {len(data)} bytes, need at least 84")
    count = int(np.frombuffer(data, dtype="<u4", count=1, offset=80)[0])
    body = len(data) - 84
    need = 50 * count
    if body < need:
        raise StlError(
            f"binary STL truncated: header declares {count} triangles "
            f"({need} bytes) but body has {body} bytes"
        )
    if body > need:
        raise StlError(
            f"binary STL triangle count mismatch: header declares {count} "
            f"triangles but body has {body} bytes ({body - need} extra)"
        )
    rec = np.frombuffer(data, dtype=_BIN_RECORD, count=count, offset=84)
    return rec["verts"].astype(np.float64)


def parse_stl(data: bytes) -> TriMesh:
    """Read an ASCII or binary STL (autodetected) into a deduplicated mesh."""
    if not isinstance(data, (bytes, bytearray)):
        raise TypeError("parse_stl expects bytes")
    data = bytes(data)
    soup = _parse_ascii(data) if _is_ascii_stl(data) else _parse_binary(data)
    return _mesh_from_soup(soup)


def _face_normals(corners: np.ndarray) -> np.ndarray:
    n = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    norms = np.linalg.norm(n, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    return n / safe[:, None]


def write_stl(mesh: TriMesh, mode: str = "binary", name: str = "mesh") -> bytes:
    """Serialize a mesh to STL bytes; binary round-trips float32 bit-exactly."""
    corners = mesh.corners()
    if mode == "binary":
        rec = np.zeros(len(corners), dtype=_BIN_RECORD)
        rec["normal"] = _face_normals(corners).astype("<f4")
        rec["verts"] = corners.astype("<f4")
        head = _BIN_HEADER + np.uint32(len(corners)).tobytes()
        return head + rec.tobytes()
    if mode == "ascii":
        normals = _face_normals(corners)
        out = [f"solid {name}"]
        for tri, n in zip(corners, normals):
            nx, ny, nz = (repr(float(v)) for v in n)
            out.append(f"  facet normal {nx} {ny} {nz}")
            out.append("    outer loop")
            for v in tri:
                x, y, z = (repr(float(c)) for c in v)
                out.append(f"      vertex {x} {y} {z}")
            out.append("    endloop")
            out.append("  endfacet")
        out.append(f"endsolid {name}")
        return ("\n".join(out) + "\n").encode("utf-8")
    raise ValueError(f"unknown STL mode {mode!r}, expected 'binary' or 'ascii'")


def is_watertight(mesh: TriMesh) -> WatertightReport:
    """Every undirected edge must be used exactly once in each direction."""
    directed: Counter = Counter()
    for a, b, c in mesh.triangles:
        directed[(int(a), int(b))] += 1
        directed[(int(b), int(c))] += 1
        directed[(int(c), int(a))] += 1
    bad = set()
    for (a, b), n in directed.items():
        if n != 1 or directed.get((b, a), 0) != 1:
            bad.add((min(a, b), max(a, b)))
    open_edges = tuple(sorted(bad))
    return WatertightReport(watertight=not open_edges, open_edges=open_edges)


def mass_properties(mesh: TriMesh, density: float) -> MassProperties:
    """Integrate volume, center of mass, and inertia of a closed solid.

    Rejects non-watertight meshes and inward orientation instead of
    guessing; callers that only need display geometry never call this.
    """
    density = float(density)
    if density <= 0.0:
        raise ValueError(f"density must be positive, got {density}")
    report = is_watertight(mesh)
    if not report.watertight:
        raise NotWatertightError(report.open_edges)
    if mesh.triangle_count == 0:
        raise MeshError("mesh has no triangles; cannot integrate a solid")

    corners = mesh.corners()
    a, b, c = corners[:, 0], corners[:, 1], corners[:, 2]
    det = np.einsum("ij,ij->i", a, np.cross(b, c))

    volume = float(det.sum() / 6.0)
    if volume <= 0.0:
        raise InvertedMeshError(
            f"signed volume is {volume:.6e}; triangles face inward "
            "(fix the orientation, it is not flipped silently)"
        )

    s = a + b + c
    com = (det[:, None] * s).sum(axis=0) / 24.0 / volume

    # Second moment: integral of x x^T over each origin-apex tetrahedron is
    # det/120 * (a a^T + b b^T + c c^T + s s^T).
    cov = (
        np.einsum("i,ij,ik->jk", det, a, a)
        + np.einsum("i,ij,ik->jk", det, b, b)
        + np.einsum("i,ij,ik->jk", det, c, c)
        + np.einsum("i,ij,ik->jk", det, s, s)
    ) / 120.0
    inertia_origin = density * (np.trace(cov) * np.eye(3) - cov)

    mass = density * volume
    shift = mass * (float(com @ com) * np.eye(3) - np.outer(com, com))
    inertia_com = InertiaTensor.from_matrix(inertia_origin - shift, symmetry_tol=np.inf)
    return MassProperties(volume=volume, mass=mass, com=com, inertia_com=inertia_com)


def scale_mesh(mesh: TriMesh, factor: float) -> TriMesh:
    """Scale every vertex uniformly; volume scales with factor cubed."""
    factor = float(factor)
    if factor <= 0.0:
        raise ValueError(f"scale factor must be positive, got {factor}")
    return TriMesh(mesh.vertices * factor, mesh.triangles)


def transform_mesh(mesh: TriMesh, t: Transform) -> TriMesh:
    """Apply a rigid motion to every vertex."""
    return TriMesh(t.apply(mesh.vertices), mesh.triangles)
