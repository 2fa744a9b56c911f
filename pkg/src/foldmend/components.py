"""Edge-connected components and their folded/unfolded labels.

A component is labeled by casting a ray from every face centroid along the
face normal and counting how often it crosses the same component. Outward
facing surfaces give even counts; folded (inward facing) ones odd counts.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .intersection import BARY_EPS, DET_EPS
from .mesh import FaceAdjacency, Mesh

UNFOLDED = "unfolded"
FOLDED = "folded"


class NoUnfoldedSurfaceError(RuntimeError):
    pass


@dataclass(frozen=True)
class LabelingConfig:
    fold_threshold: float = 0.20
    small_component: float = 0.01

    def __post_init__(self):
        if not 0.0 < self.fold_threshold < 1.0:
            raise ValueError("fold threshold must lie in (0, 1)")
        if not 0.0 <= self.small_component < 1.0:
            raise ValueError("small-component fraction must lie in [0, 1)")


@dataclass(frozen=True)
class Component:
    id: int
    faces: np.ndarray
    odd_fraction: float | None = None
    label: str | None = None

    @property
    def size(self) -> int:
        return len(self.faces)


def partition(mesh: Mesh, adj: FaceAdjacency | None = None) -> list[Component]:
    """Maximal edge-connected face groups, largest first.

    Uses an explicit queue; deep recursion is not an option on large meshes.
    Ties in size are broken by the smallest member face index.
    """
    if adj is None:
        adj = mesh.adjacency()
    m = mesh.n_faces
    seen = np.zeros(m, dtype=bool)
    groups = []
    for seed in range(m):
        if seen[seed]:
            continue
        seen[seed] = True
        queue = deque([seed])
        members = []
        while queue:
            f = queue.popleft()
            members.append(f)
            for g in adj[f]:
                if not seen[g]:
                    seen[g] = True
                    queue.append(int(g))
        groups.append(np.sort(np.array(members, dtype=np.int64)))
    groups.sort(key=lambda g: (-len(g), int(g[0])))
    return [Component(i, g) for i, g in enumerate(groups)]


@njit(cache=True)
def _parity_kernel(origins, dirs, v0, e1, e2, scale, corners, rays, ray_eps, point_eps, det_eps, bary_eps):
    k = v0.shape[0]
    out = np.zeros(rays.shape[0], np.int64)
    ts = np.empty(k)
    for r in range(rays.shape[0]):
        i = rays[r]
        ox, oy, oz = origins[i, 0], origins[i, 1], origins[i, 2]
        dx, dy, dz = dirs[i, 0], dirs[i, 1], dirs[i, 2]
        a0, a1, a2 = corners[i, 0], corners[i, 1], corners[i, 2]
        m = 0
        for j in range(k):
            # same 3x3 solve as the line/triangle test
            px = dy * e2[j, 2] - dz * e2[j, 1]
            py = dz * e2[j, 0] - dx * e2[j, 2]
            pz = dx * e2[j, 1] - dy * e2[j, 0]
            det = e1[j, 0] * px + e1[j, 1] * py + e1[j, 2] * pz
            if abs(det) <= det_eps * scale[j]:
                continue
            inv = 1.0 / det
            tx = ox - v0[j, 0]
            ty = oy - v0[j, 1]
            tz = oz - v0[j, 2]
            u1 = (tx * px + ty * py + tz * pz) * inv
            if u1 < -bary_eps or u1 > 1.0 + bary_eps:
                continue
            qx = ty * e1[j, 2] - tz * e1[j, 1]
            qy = tz * e1[j, 0] - tx * e1[j, 2]
            qz = tx * e1[j, 1] - ty * e1[j, 0]
            u2 = (dx * qx + dy * qy + dz * qz) * inv
            if u2 < -bary_eps or u1 + u2 > 1.0 + bary_eps:
                continue
            t = (e2[j, 0] * qx + e2[j, 1] * qy + e2[j, 2] * qz) * inv
            if t <= ray_eps:
                continue
            b0, b1, b2 = corners[j, 0], corners[j, 1], corners[j, 2]
            if (
                b0 == a0 or b0 == a1 or b0 == a2
                or b1 == a0 or b1 == a1 or b1 == a2
                or b2 == a0 or b2 == a1 or b2 == a2
            ):
                continue
            ts[m] = t
            m += 1
        if m:
            s = np.sort(ts[:m])
            c = 1
            for q in range(1, m):
                if s[q] - s[q - 1] > point_eps:
                    c += 1
            out[r] = c
    return out


def parity_counts(mesh: Mesh, faces, rays=None) -> np.ndarray:
    """Crossing counts of centroid/normal rays of ``faces`` against ``faces``.

    ``rays`` optionally selects positions within ``faces`` to cast from;
    the result has one entry per cast ray.

    A ray ignores its own face and every face sharing a vertex with it,
    hits closer than the ray tolerance, and counts coincident hits (e.g. on a
    shared edge) once.
    """
    faces = np.asarray(faces, dtype=np.int64)
    k = len(faces)
    rays = np.arange(k) if rays is None else np.asarray(rays, dtype=np.int64)
    if k < 2:
        return np.zeros(len(rays), dtype=np.int64)
    tol = mesh.tolerances()
    tri = mesh.triangles()[faces]
    v0 = np.ascontiguousarray(tri[:, 0])
    e1 = tri[:, 1] - v0
    e2 = tri[:, 2] - v0
    scale = np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
    origins = tri.mean(axis=1)
    dirs = np.cross(e1, e2)
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    corners = np.ascontiguousarray(mesh.faces[faces])
    return _parity_kernel(origins, dirs, v0, e1, e2, scale, corners, rays, tol.ray, tol.point, DET_EPS, BARY_EPS)


def ray_parity(mesh: Mesh, component: Component, f: int) -> int:
    """Crossing count of the ray from face ``f`` against its component."""
    faces = np.asarray(component.faces)
    pos = np.flatnonzero(faces == f)
    if len(pos) == 0:
        raise ValueError(f"face {f} is not in component {component.id}")
    return int(parity_counts(mesh, faces, rays=pos)[0])


def label_components(mesh: Mesh, comps: list[Component], cfg: LabelingConfig = LabelingConfig()) -> list[Component]:
    """Label each component; folded iff its odd-ray fraction exceeds the threshold."""
    out = []
    for c in comps:
        counts = parity_counts(mesh, c.faces)
        odd = int(np.count_nonzero(counts % 2))
        frac = odd / c.size if c.size else 0.0
        out.append(replace(c, odd_fraction=frac, label=FOLDED if frac > cfg.fold_threshold else UNFOLDED))
    return out


def remove_insignificant(comps: list[Component], small_component: float = 0.01):
    """Split ``comps`` (largest first) into (kept, dropped) by cumulative size.

    Sizes are summed from the largest component; once the running total
    reaches (1 - small_component) of all faces, every later component is
    dropped.
    """
    total = sum(c.size for c in comps)
    target = (1.0 - small_component) * total
    kept, dropped = [], []
    acc = 0
    for c in comps:
        if acc >= target - 1e-9 * max(total, 1):
            dropped.append(c)
        else:
            kept.append(c)
            acc += c.size
    return kept, dropped


def remove_folded(mesh: Mesh, comps: list[Component], kept: list[Component]):
    """Keep only faces of components that are both kept and unfolded.

    Returns the reduced mesh (all vertices retained) and the array mapping
    new face indices to indices in ``mesh``.
    """
    kept_ids = {c.id for c in kept}
    survivors = [c for c in comps if c.id in kept_ids and c.label == UNFOLDED]
    if not survivors:
        raise NoUnfoldedSurfaceError("no unfolded surface remains")
    faces = np.sort(np.concatenate([c.faces for c in survivors]))
    return Mesh(mesh.vertices, mesh.faces[faces]), faces
