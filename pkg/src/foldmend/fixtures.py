"""Synthetic meshes used by the tests, the acceptance suite and the benchmark.

The folding fixtures are manufactured the same way foldings arise in
practice: a closed surface with a thin part is offset inward by more than
its local half-thickness, so the thin part turns inside out and crosses
the rest of the surface.
"""

from __future__ import annotations

import numpy as np

from .deform import offset_mesh
from .mesh import Mesh


def flat_grid(nx: int = 10, ny: int = 10, size: float = 1.0) -> Mesh:
    """(nx x ny) quads in the z=0 plane, two triangles each, normals +z."""
    xs = np.linspace(0.0, size * nx / max(nx, ny), nx + 1)
    ys = np.linspace(0.0, size * ny / max(nx, ny), ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    verts = np.stack([X.ravel(), Y.ravel(), np.zeros(X.size)], axis=1)
    idx = np.arange((nx + 1) * (ny + 1)).reshape(nx + 1, ny + 1)
    a = idx[:-1, :-1].ravel()
    b = idx[1:, :-1].ravel()
    c = idx[1:, 1:].ravel()
    d = idx[:-1, 1:].ravel()
    faces = np.stack([np.stack([a, b, c], 1), np.stack([a, c, d], 1)], axis=1).reshape(-1, 3)
    return Mesh(verts, faces)


def tetrahedron(scale: float = 1.0, offset=(0.0, 0.0, 0.0)) -> Mesh:
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=np.float64)
    f = np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
    return Mesh(v * scale + np.asarray(offset), f)


def _rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def merge(*meshes: Mesh) -> Mesh:
    """Concatenate meshes into one (vertices are not shared)."""
    verts, faces, base = [], [], 0
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.faces + base)
        base += m.n_vertices
    return Mesh(np.concatenate(verts), np.concatenate(faces))


def interpenetrating_tetrahedra() -> Mesh:
    """Two regular tetrahedra in one file, the second turned and shifted so they overlap."""
    a = tetrahedron()
    b = tetrahedron()
    rot = _rot_z(np.pi / 4) @ np.array([[1.0, 0, 0], [0, np.cos(0.3), -np.sin(0.3)], [0, np.sin(0.3), np.cos(0.3)]])
    b = Mesh(b.vertices @ rot.T + np.array([0.35, 0.2, 0.1]), b.faces)
    return merge(a, b)


def icosphere(subdiv: int = 2, radius: float = 1.0, center=(0.0, 0.0, 0.0), reverse: bool = False) -> Mesh:
    """Subdivided icosahedron projected to a sphere; outward winding unless ``reverse``."""
    t = (1.0 + 5 ** 0.5) / 2.0
    v = [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0], [0, -1, t], [0, 1, t],
         [0, -1, -t], [0, 1, -t], [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]]
    f = [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11], [1, 5, 9], [5, 11, 4],
         [11, 10, 2], [10, 7, 6], [7, 1, 8], [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8],
         [3, 8, 9], [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]]
    verts = [np.array(p, dtype=np.float64) / np.linalg.norm(p) for p in v]
    faces = f
    for _ in range(subdiv):
        cache: dict[tuple[int, int], int] = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                p = verts[i] + verts[j]
                verts.append(p / np.linalg.norm(p))
                cache[key] = len(verts) - 1
            return cache[key]

        nxt = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            nxt += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = nxt
    faces = np.array(faces, dtype=np.int64)
    if reverse:
        faces = faces[:, ::-1]
    return Mesh(np.array(verts) * radius + np.asarray(center, dtype=np.float64), faces)


def reversed_inner_sphere(subdiv: int = 2) -> Mesh:
    """Outer unit sphere plus a smaller concentric sphere with inward normals."""
    return merge(icosphere(subdiv, 1.0), icosphere(subdiv, 0.5, reverse=True))


def bumpy_sphere(subdiv: int = 3, amplitude: float = 0.25, lobes: int = 3) -> Mesh:
    """Icosphere with radial lobes; inward offsets fold the narrow lobe tips."""
    s = icosphere(subdiv)
    p = s.vertices
    theta = np.arctan2(p[:, 1], p[:, 0])
    r = 1.0 + amplitude * np.cos(lobes * theta) * (1.0 - p[:, 2] ** 2)
    return Mesh(p * r[:, None], s.faces)


def random_soup(n: int, seed: int = 0, size: float = 0.25) -> Mesh:
    """``n`` independent random triangles in the unit cube (no shared vertices)."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.0, 1.0, size=(n, 1, 3))
    tris = centers + rng.uniform(-size, size, size=(n, 3, 3))
    return Mesh(tris.reshape(-1, 3), np.arange(3 * n).reshape(n, 3))


def overhang(n_floor: int = 8) -> Mesh:
    """Open C-shaped sheet: a floor, a wall at its far end and a one-quad ceiling.

    Normals face into the C. Only the two ceiling triangles and the two
    floor triangles under them see the opposite sheet, so 4 of the
    4 * (n_floor + 2) / 2 faces cast odd rays (exactly 0.2 for n_floor=8).
    """
    profile = [(float(x), 0.0) for x in range(n_floor + 1)]
    profile += [(float(n_floor), 1.0), (float(n_floor - 1), 1.0)]
    verts = []
    for x, z in profile:
        verts.append((x, 0.0, z))
        verts.append((x, 1.0, z))
    faces = []
    for k in range(len(profile) - 1):
        a0, a1, b0, b1 = 2 * k, 2 * k + 1, 2 * k + 2, 2 * k + 3
        # consistent diagonal a0-b1 along the whole profile
        faces += [(a0, b0, b1), (a0, b1, a1)]
    return Mesh(np.array(verts), np.array(faces))


def torus(n_major: int = 50, n_minor: int = 20, R: float = 1.0, width: float = 0.3, height=0.3) -> Mesh:
    """Torus with an elliptical tube of radial half-width ``width``.

    ``height`` is the vertical half-height, either a scalar or one value per
    ring station (``n_major`` values).
    """
    phi = np.arange(n_major) * 2 * np.pi / n_major
    psi = np.arange(n_minor) * 2 * np.pi / n_minor
    P, S = np.meshgrid(phi, psi, indexing="ij")
    h = np.broadcast_to(np.asarray(height, dtype=np.float64), (n_major,))[:, None]
    x = (R + width * np.cos(S)) * np.cos(P)
    y = (R + width * np.cos(S)) * np.sin(P)
    z = h * np.sin(S)
    verts = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)
    i = np.arange(n_major)[:, None]
    j = np.arange(n_minor)[None, :]
    a = (i * n_minor + j).ravel()
    b = (((i + 1) % n_major) * n_minor + j).ravel()
    c = (((i + 1) % n_major) * n_minor + (j + 1) % n_minor).ravel()
    d = (i * n_minor + (j + 1) % n_minor).ravel()
    faces = np.stack([np.stack([a, b, c], 1), np.stack([a, c, d], 1)], axis=1).reshape(-1, 3)
    return Mesh(verts, faces)


def thin_torus(n_major: int = 50, n_minor: int = 20, delta: float = -0.08) -> Mesh:
    """Flattened torus whose far quarter is much thinner, offset inward.

    The offset exceeds the thin section's half-height but not the thick
    section's, so the thin quarter turns over (top and bottom swap) and the
    stations joining it to the thick part cross each other.
    """
    phi = np.arange(n_major) * 2 * np.pi / n_major
    height = np.where(np.abs(phi - np.pi) < np.pi / 4, 0.04, 0.2)
    return offset_mesh(torus(n_major, n_minor, width=0.3, height=height), delta)


def strip_plate(n: int = 3, length: float = 2.0, width: float = 0.6, thin: float = 0.04, thick: float = 0.3) -> Mesh:
    """Closed flattened sphere whose thickness tapers from ``thick`` to ``thin`` along x."""
    s = icosphere(n)
    p = s.vertices
    t = thin + (thick - thin) * (1.0 - p[:, 0]) / 2.0
    return Mesh(np.stack([length * p[:, 0], width * p[:, 1], t * p[:, 2]], axis=1), s.faces)


def folded_strip(n: int = 3, delta: float = -0.1) -> Mesh:
    """``strip_plate`` offset inward so its thin end inverts."""
    return offset_mesh(strip_plate(n), delta)


def folding_fixtures() -> dict[str, Mesh]:
    return {
        "folded_strip": folded_strip(),
        "reversed_inner_sphere": reversed_inner_sphere(),
        "thin_torus": thin_torus(),
    }
