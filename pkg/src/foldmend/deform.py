"""Offsetting: move every vertex along its normal by a signed distance.

This is the degradation operator used to manufacture foldings. No attempt
is made to avoid self-intersections; producing them is the point.
"""

from __future__ import annotations

import numpy as np

from .mesh import Mesh, face_normals


class ZeroNormalError(ValueError):
    def __init__(self, vertex: int):
        self.vertex = vertex
        super().__init__(f"vertex {vertex} has a vanishing accumulated normal")


def corner_angles(mesh: Mesh) -> np.ndarray:
    """(m, 3) interior angle of each face at each of its corners."""
    t = mesh.triangles()
    angles = np.empty((mesh.n_faces, 3))
    for k in range(3):
        a = t[:, (k + 1) % 3] - t[:, k]
        b = t[:, (k + 2) % 3] - t[:, k]
        cos = np.einsum("ij,ij->i", a, b)
        sin = np.linalg.norm(np.cross(a, b), axis=1)
        angles[:, k] = np.arctan2(sin, cos)
    return angles


def vertex_normals(mesh: Mesh) -> np.ndarray:
    """Angle-weighted average of incident unit face normals, normalized.

    Vertices referenced by no face get a zero row. Raises
    :class:`ZeroNormalError` when incident normals cancel exactly.
    """
    n_face = face_normals(mesh, normalized=True)
    weights = corner_angles(mesh)
    acc = np.zeros((mesh.n_vertices, 3))
    for k in range(3):
        np.add.at(acc, mesh.faces[:, k], weights[:, k, None] * n_face)
    length = np.linalg.norm(acc, axis=1)
    used = np.zeros(mesh.n_vertices, dtype=bool)
    used[mesh.faces.reshape(-1)] = True
    scale = np.abs(acc).max(axis=1)
    bad = used & ((length == 0) | (length <= 1e-14 * np.maximum(scale, 1e-300)))
    if bad.any():
        raise ZeroNormalError(int(np.flatnonzero(bad)[0]))
    out = np.zeros_like(acc)
    out[used] = acc[used] / length[used, None]
    return out


def displacement_field(mesh: Mesh, delta: float) -> np.ndarray:
    return float(delta) * vertex_normals(mesh)


def offset_mesh(mesh: Mesh, delta: float) -> Mesh:
    """Return a copy of ``mesh`` with vertex i moved by ``delta * n(i)``.

    Positive ``delta`` moves outward (along the winding normal), negative
    inward. Connectivity is unchanged.
    """
    if delta == 0:
        return Mesh(mesh.vertices, mesh.faces)
    return Mesh(mesh.vertices + displacement_field(mesh, delta), mesh.faces)
