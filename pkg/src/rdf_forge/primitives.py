"""Watertight primitive meshes: boxes, cylinders, icospheres.

Used by the bundled model library and as geometry sources in tests; every
generator is deterministic and produces CCW-outward triangles.
"""

from __future__ import annotations

import math

import numpy as np

from .mesh import TriMesh

# Unit cube corner indices per face, CCW seen from outside.
_BOX_FACES = [
    (0, 2, 1), (0, 3, 2),  # -z
    (4, 5, 6), (4, 6, 7),  # +z
    (0, 1, 5), (0, 5, 4),  # -y
    (3, 6, 2), (3, 7, 6),  # +y
    (0, 4, 7), (0, 7, 3),  # -x
    (1, 2, 6), (1, 6, 5),  # +x
]


def box_mesh(extents, origin=(0.0, 0.0, 0.0)) -> TriMesh:
    """Axis-aligned box with ``origin`` at its minimum corner."""
    sx, sy, sz = (float(v) for v in extents)
    ox, oy, oz = (float(v) for v in origin)
    if min(sx, sy, sz) <= 0.0:
        raise ValueError("box extents must be positive")
    corners = np.array(
        [
            [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
            [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
        ],
        dtype=np.float64,
    )
    verts = corners * np.array([sx, sy, sz]) + np.array([ox, oy, oz])
    return TriMesh(verts, np.array(_BOX_FACES, dtype=np.int64))


def centered_box_mesh(extents) -> TriMesh:
    """Axis-aligned box centered at the origin."""
    sx, sy, sz = (float(v) for v in extents)
    return box_mesh((sx, sy, sz), origin=(-sx / 2.0, -sy / 2.0, -sz / 2.0))


def cylinder_mesh(radius: float, height: float, segments: int = 64,
                  origin=(0.0, 0.0, 0.0)) -> TriMesh:
    """Closed cylinder along +z, base center at ``origin``."""
    radius, height = float(radius), float(height)
    if radius <= 0.0 or height <= 0.0:
        raise ValueError("cylinder radius and height must be positive")
    if segments < 3:
        raise ValueError("cylinder needs at least 3 segments")
    ox, oy, oz = (float(v) for v in origin)
    angles = 2.0 * math.pi * np.arange(segments) / segments
    ring = np.stack([radius * np.cos(angles), radius * np.sin(angles)], axis=1)
    bottom = np.column_stack([ring[:, 0] + ox, ring[:, 1] + oy, np.full(segments, oz)])
    top = bottom + np.array([0.0, 0.0, height])
    verts = np.vstack([bottom, top, [[ox, oy, oz]], [[ox, oy, oz + height]]])
    cb, ct = 2 * segments, 2 * segments + 1

    tris = []
    for i in range(segments):
        j = (i + 1) % segments
        # side quad, outward
        tris.append((i, j, segments + j))
        tris.append((i, segments + j, segments + i))
        # caps
        tris.append((cb, j, i))
        tris.append((ct, segments + i, segments + j))
    return TriMesh(verts, np.array(tris, dtype=np.int64))


_PHI = (1.0 + math.sqrt(5.0)) / 2.0
_ICO_VERTS = [
    (-1, _PHI, 0), (1, _PHI, 0), (-1, -_PHI, 0), (1, -_PHI, 0),
    (0, -1, _PHI), (0, 1, _PHI), (0, -1, -_PHI), (0, 1, -_PHI),
    (_PHI, 0, -1), (_PHI, 0, 1), (-_PHI, 0, -1), (-_PHI, 0, 1),
]
_ICO_FACES = [
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
]


def icosphere_mesh(radius: float, subdivisions: int = 2,
                   center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Geodesic sphere from a subdivided icosahedron, vertices on the sphere."""
    radius = float(radius)
    if radius <= 0.0:
        raise ValueError("sphere radius must be positive")
    if subdivisions < 0:
        raise ValueError("subdivisions must be non-negative")
    verts = [np.array(v, dtype=np.float64) / np.linalg.norm(v) for v in _ICO_VERTS]
    faces = list(_ICO_FACES)
    for _ in range(subdivisions):
        midpoint_cache: dict = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            k = midpoint_cache.get(key)
            if k is None:
                m = verts[i] + verts[j]
                m /= np.linalg.norm(m)
                k = len(verts)
                verts.append(m)
                midpoint_cache[key] = k
            return k

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    pts = np.asarray(verts) * radius + np.asarray(center, dtype=np.float64)
    return TriMesh(pts, np.array(faces, dtype=np.int64))
