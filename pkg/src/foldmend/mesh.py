"""Indexed triangle mesh and the connectivity derived from it."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Relative thresholds, scaled by the bounding-box diagonal D of a mesh.
AREA_EPS = 1e-12  # degenerate if area < AREA_EPS * D**2
BOX_EPS = 1e-9
POINT_EPS = 1e-9
RAY_EPS = 1e-6


class DegenerateFaceError(ValueError):
    """Raised when a geometric quantity is requested for a zero-area face."""


@dataclass(frozen=True, eq=False)
class Mesh:
    """Vertex positions plus counter-clockwise face index triples.

    Both arrays are copied and frozen on construction; derived structures
    (adjacency, boxes, tolerances) can therefore be cached safely.
    """

    vertices: np.ndarray
    faces: np.ndarray
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64).reshape(-1, 3)
        f = np.array(self.faces, dtype=np.int64).reshape(-1, 3)
        if len(f):
            if f.min() < 0 or f.max() >= len(v):
                raise ValueError("face index out of range")
            if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
                raise ValueError("face with repeated vertex index")
        v.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def triangles(self) -> np.ndarray:
        """(m, 3, 3) array of face corner coordinates."""
        if "tri" not in self._cache:
            t = self.vertices[self.faces]
            t.setflags(write=False)
            self._cache["tri"] = t
        return self._cache["tri"]

    def diagonal(self) -> float:
        return bbox_diagonal(self)

    def tolerances(self) -> "Tolerances":
        if "tol" not in self._cache:
            self._cache["tol"] = Tolerances.for_scale(self.diagonal())
        return self._cache["tol"]

    def adjacency(self) -> "FaceAdjacency":
        if "adj" not in self._cache:
            self._cache["adj"] = build_adjacency(self)
        return self._cache["adj"]

    def __eq__(self, other):
        if not isinstance(other, Mesh):
            return NotImplemented
        return (
            self.vertices.shape == other.vertices.shape
            and self.faces.shape == other.faces.shape
            and np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.faces, other.faces)
        )


@dataclass(frozen=True)
class Tolerances:
    diagonal: float
    box: float
    plane: float
    point: float
    ray: float
    area: float

    @classmethod
    def for_scale(cls, diagonal: float) -> "Tolerances":
        d = diagonal if diagonal > 0 else 1.0
        return cls(
            diagonal=d,
            box=BOX_EPS * d,
            plane=POINT_EPS * d,
            point=POINT_EPS * d,
            ray=RAY_EPS * d,
            area=AREA_EPS * d * d,
        )


@dataclass(frozen=True)
class IngestStats:
    merged_vertices: int = 0
    degenerate_faces: int = 0


def bbox_diagonal(mesh: Mesh) -> float:
    if mesh.n_vertices == 0:
        return 0.0
    v = mesh.vertices
    return float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))


def normalize_mesh(vertices, faces) -> tuple[Mesh, IngestStats]:
    """Merge exact duplicate vertices and drop degenerate faces.

    Vertex order is preserved (first occurrence wins), so a mesh without
    duplicates keeps its indexing. Unreferenced vertices are kept.
    """
    v = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
    f = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite vertex coordinate")
    if len(f) and (f.min() < 0 or f.max() >= len(v)):
        raise ValueError("face index out of range")

    merged = 0
    if len(v):
        _, first, inverse = np.unique(v, axis=0, return_index=True, return_inverse=True)
        inverse = inverse.reshape(-1)
        keep = np.sort(first)
        merged = len(v) - len(keep)
        if merged:
            # rank of each unique row's first occurrence = its new index
            remap_unique = np.argsort(np.argsort(first))
            old_to_new = remap_unique[inverse]
            v = v[keep]
            f = old_to_new[f]

    n_before = len(f)
    if n_before:
        distinct = (f[:, 0] != f[:, 1]) & (f[:, 1] != f[:, 2]) & (f[:, 0] != f[:, 2])
        f = f[distinct]
        if len(f):
            tol = Tolerances.for_scale(_diag(v))
            areas = _areas(v[f])
            f = f[areas >= tol.area]
    return Mesh(v, f), IngestStats(merged, n_before - len(f))


def _diag(v: np.ndarray) -> float:
    if len(v) == 0:
        return 0.0
    return float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))


def _areas(tri: np.ndarray) -> np.ndarray:
    n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    return 0.5 * np.linalg.norm(n, axis=1)


def face_normals(mesh: Mesh, normalized: bool = False) -> np.ndarray:
    """Per-face (V1 - V0) x (V2 - V0); optionally scaled to unit length.

    Degenerate faces yield a zero row in the normalized variant.
    """
    t = mesh.triangles()
    n = np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0])
    if not normalized:
        return n
    length = np.linalg.norm(n, axis=1)
    out = np.zeros_like(n)
    ok = length > 0
    out[ok] = n[ok] / length[ok, None]
    return out


def face_normal(mesh: Mesh, f: int, normalized: bool = False) -> np.ndarray:
    v0, v1, v2 = mesh.vertices[mesh.faces[f]]
    n = np.cross(v1 - v0, v2 - v0)
    length = float(np.linalg.norm(n))
    if 0.5 * length < mesh.tolerances().area:
        raise DegenerateFaceError(f"face {f} is degenerate")
    return n / length if normalized else n


def face_areas(mesh: Mesh) -> np.ndarray:
    return _areas(mesh.triangles())


def face_centroids(mesh: Mesh) -> np.ndarray:
    return mesh.triangles().mean(axis=1)


def face_centroid(mesh: Mesh, f: int) -> np.ndarray:
    return mesh.vertices[mesh.faces[f]].mean(axis=0)


def face_boxes(mesh: Mesh, inflate: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-face axis-aligned boxes, inflated by the box tolerance."""
    if inflate is None:
        inflate = mesh.tolerances().box
    t = mesh.triangles()
    return t.min(axis=1) - inflate, t.max(axis=1) + inflate


class FaceAdjacency:
    """Edge adjacency in compressed-row form.

    ``adj[i]`` is an ascending array of the faces sharing an edge (two vertex
    indices) with face ``i``. Non-manifold edges list every incident face.
    """

    def __init__(self, indptr: np.ndarray, indices: np.ndarray):
        self.indptr = indptr
        self.indices = indices

    def __len__(self) -> int:
        return len(self.indptr) - 1

    def __getitem__(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def as_lists(self) -> list[list[int]]:
        return [self[i].tolist() for i in range(len(self))]


def _sorted_edges(faces: np.ndarray) -> np.ndarray:
    """(3m, 2) array of undirected edges; row 3*f + k is edge (f[k], f[k+1])."""
    e = np.stack([faces, np.roll(faces, -1, axis=1)], axis=2).reshape(-1, 2)
    return np.sort(e, axis=1)


def build_adjacency(mesh: Mesh) -> FaceAdjacency:
    m = mesh.n_faces
    if m == 0:
        return FaceAdjacency(np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int64))
    edges = _sorted_edges(mesh.faces)
    owner = np.repeat(np.arange(m), 3)
    order = np.lexsort((owner, edges[:, 1], edges[:, 0]))
    e = edges[order]
    o = owner[order]
    new_group = np.ones(len(e), dtype=bool)
    new_group[1:] = np.any(e[1:] != e[:-1], axis=1)
    starts = np.flatnonzero(new_group)
    sizes = np.diff(np.append(starts, len(e)))

    src, dst = [], []
    for size in np.unique(sizes):
        if size < 2:
            continue
        groups = o[starts[sizes == size, None] + np.arange(size)]
        for a in range(size):
            for b in range(size):
                if a != b:
                    src.append(groups[:, a])
                    dst.append(groups[:, b])
    if src:
        pairs = np.unique(np.stack([np.concatenate(src), np.concatenate(dst)], axis=1), axis=0)
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    else:
        pairs = np.zeros((0, 2), dtype=np.int64)
    counts = np.bincount(pairs[:, 0], minlength=m)
    indptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return FaceAdjacency(indptr, pairs[:, 1].astype(np.int64))


def free_edges(mesh: Mesh, subset=None) -> list[tuple[int, tuple[int, int]]]:
    """Edges of ``subset`` faces not shared with another face of ``subset``.

    Edges are reported in the winding direction of their face, ordered by
    face index then corner.
    """
    if subset is None:
        sub = np.arange(mesh.n_faces)
    else:
        sub = np.array(sorted(set(int(s) for s in subset)), dtype=np.int64)
    if len(sub) == 0:
        return []
    faces = mesh.faces[sub]
    edges = _sorted_edges(faces)
    _, inverse, counts = np.unique(edges, axis=0, return_inverse=True, return_counts=True)
    free = counts[inverse.reshape(-1)] == 1
    out = []
    for row in np.flatnonzero(free):
        fi, k = divmod(int(row), 3)
        a, b = faces[fi, k], faces[fi, (k + 1) % 3]
        out.append((int(sub[fi]), (int(a), int(b))))
    return out


def shared_vertex_counts(faces: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Number of vertex indices shared by face pairs ``(a[k], b[k])``."""
    fa = faces[a]
    fb = faces[b]
    return (fa[:, :, None] == fb[:, None, :]).any(axis=2).sum(axis=1)
