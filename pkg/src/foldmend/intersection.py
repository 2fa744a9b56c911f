"""Self-intersection detection and removal of intersecting/protruding faces.

Candidate pairs come from an axis-aligned box test (all pairs, or an axis
sweep for large inputs). Each surviving pair is resolved by testing the
edges of either triangle as segments against the other triangle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import FaceAdjacency, Mesh, Tolerances, face_boxes, shared_vertex_counts

BARY_EPS = 1e-9
DET_EPS = 1e-12

MODES = ("line", "ray", "segment")


@dataclass(frozen=True)
class FaceBox:
    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def of(cls, tri, inflate: float = 0.0) -> "FaceBox":
        tri = np.asarray(tri, dtype=np.float64)
        return cls(tri.min(axis=0) - inflate, tri.max(axis=0) + inflate)


@dataclass(frozen=True)
class LineHit:
    t: float
    u1: float
    u2: float
    point: np.ndarray


@dataclass(frozen=True)
class IntersectionRecord:
    """One intersecting pair seen from ``intersected``.

    ``edges`` gives, per endpoint, the index k of the intersected triangle's
    edge (corner k -> corner k+1) it lies on, or -1 if interior.
    """

    intersected: int
    intersector: int
    segment: tuple
    edges: tuple[int, int] = (-1, -1)


@dataclass
class PruneOutcome:
    intersecting: frozenset
    protruding: frozenset
    mesh: Mesh
    kept: np.ndarray  # new face index -> original face index
    records: list = field(default_factory=list)


def aabb_overlap(a: FaceBox, b: FaceBox) -> bool:
    return bool(
        a.lo[0] <= b.hi[0] and b.lo[0] <= a.hi[0]
        and a.lo[1] <= b.hi[1] and b.lo[1] <= a.hi[1]
        and a.lo[2] <= b.hi[2] and b.lo[2] <= a.hi[2]
    )


def plane_side_filter(ref_tri, test_tri) -> bool:
    """Plane rejection step of the classic triangle-triangle test.

    Returns False (rejected) iff every vertex of ``test_tri`` has a nonzero
    signed distance to the plane of ``ref_tri`` and all share one sign.
    """
    r = np.asarray(ref_tri, dtype=np.float64)
    t = np.asarray(test_tri, dtype=np.float64)
    n = np.cross(r[1] - r[0], r[2] - r[0])
    d = -n @ r[0]
    dist = t @ n + d
    return not (np.all(dist != 0) and (np.all(dist > 0) or np.all(dist < 0)))


def plane_side_filter_batch(ref: np.ndarray, test: np.ndarray) -> np.ndarray:
    n = np.cross(ref[:, 1] - ref[:, 0], ref[:, 2] - ref[:, 0])
    d = -np.einsum("ij,ij->i", n, ref[:, 0])
    dist = np.einsum("kvj,kj->kv", test, n) + d[:, None]
    rejected = np.all(dist > 0, axis=1) | np.all(dist < 0, axis=1)
    return ~rejected


# -- line / triangle ----------------------------------------------------------


def _solve(p1, d, v0, e1, e2):
    """Vectorized solve of p1 + t d = v0 + u1 e1 + u2 e2.

    Returns (t, u1, u2, regular) where ``regular`` is False for lines
    parallel to the triangle plane (relative determinant below DET_EPS).
    """
    pvec = np.cross(d, e2)
    det = np.einsum("...j,...j->...", e1, pvec)
    scale = np.linalg.norm(d, axis=-1) * np.linalg.norm(e1, axis=-1) * np.linalg.norm(e2, axis=-1)
    regular = np.abs(det) > DET_EPS * scale
    inv = np.divide(1.0, det, out=np.zeros_like(det), where=regular)
    tvec = p1 - v0
    u1 = np.einsum("...j,...j->...", tvec, pvec) * inv
    qvec = np.cross(tvec, e1)
    u2 = np.einsum("...j,...j->...", d, qvec) * inv
    t = np.einsum("...j,...j->...", e2, qvec) * inv
    return t, u1, u2, regular


def _inside(u1, u2, eps=BARY_EPS):
    return (u1 >= -eps) & (u2 >= -eps) & (u1 + u2 <= 1.0 + eps)


def line_triangle_intersect(p1, p2, tri, mode: str = "segment", t_min: float = 0.0) -> LineHit | None:
    """Intersect the line through ``p1``, ``p2`` with triangle ``tri``.

    ``mode`` restricts the line parameter: ``segment`` 0 <= t <= 1,
    ``ray`` t > t_min, ``line`` unrestricted. Lines parallel to the plane
    never hit, including lines lying in it.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    v = np.asarray(tri, dtype=np.float64)
    t, u1, u2, regular = _solve(p1, p2 - p1, v[0], v[1] - v[0], v[2] - v[0])
    if not regular or not _inside(u1, u2):
        return None
    t = float(t)
    if mode == "segment" and not (-BARY_EPS <= t <= 1.0 + BARY_EPS):
        return None
    if mode == "ray" and not t > t_min:
        return None
    return LineHit(t, float(u1), float(u2), p1 + t * (p2 - p1))


# -- triangle / triangle ----------------------------------------------------------


def _unit(n):
    length = np.linalg.norm(n, axis=-1, keepdims=True)
    return np.divide(n, length, out=np.zeros_like(n), where=length > 0)


_PAIRS6 = [(i, j) for i in range(6) for j in range(i + 1, 6)]


def narrow_phase(ta: np.ndarray, tb: np.ndarray, tol: Tolerances):
    """Batch triangle-triangle intersection segments.

    ``ta`` and ``tb`` are (k, 3, 3). Returns (hit, p, q) with ``hit`` a
    boolean (k,) mask and p, q the segment endpoints (rows valid where hit).

    A pair only intersects if each triangle has vertices strictly on both
    sides of the other's plane (beyond the plane tolerance); coplanar and
    touching configurations are contacts, not intersections. The segment is
    spanned by the two farthest distinct edge/triangle hit points.
    """
    k = len(ta)
    hit = np.zeros(k, dtype=bool)
    p = np.zeros((k, 3))
    q = np.zeros((k, 3))
    if k == 0:
        return hit, p, q
    na = _unit(np.cross(ta[:, 1] - ta[:, 0], ta[:, 2] - ta[:, 0]))
    nb = _unit(np.cross(tb[:, 1] - tb[:, 0], tb[:, 2] - tb[:, 0]))
    db = np.einsum("kvj,kj->kv", tb - ta[:, :1], na)  # b's corners vs a's plane
    da = np.einsum("kvj,kj->kv", ta - tb[:, :1], nb)
    eps = tol.plane
    straddle = (
        (db.max(axis=1) > eps) & (db.min(axis=1) < -eps)
        & (da.max(axis=1) > eps) & (da.min(axis=1) < -eps)
    )
    idx = np.flatnonzero(straddle)
    if len(idx) == 0:
        return hit, p, q
    A = ta[idx]
    B = tb[idx]
    pts = np.zeros((len(idx), 6, 3))
    valid = np.zeros((len(idx), 6), dtype=bool)
    for side, (src, dst) in enumerate(((B, A), (A, B))):
        v0 = dst[:, 0]
        e1 = dst[:, 1] - v0
        e2 = dst[:, 2] - v0
        for e in range(3):
            s0 = src[:, e]
            d = src[:, (e + 1) % 3] - s0
            t, u1, u2, regular = _solve(s0, d, v0, e1, e2)
            ok = regular & _inside(u1, u2) & (t >= -BARY_EPS) & (t <= 1.0 + BARY_EPS)
            col = 3 * side + e
            valid[:, col] = ok
            pts[:, col] = s0 + t[:, None] * d
    best = np.full(len(idx), -1.0)
    bi = np.zeros(len(idx), dtype=np.int64)
    bj = np.zeros(len(idx), dtype=np.int64)
    for i, j in _PAIRS6:
        dist = np.linalg.norm(pts[:, i] - pts[:, j], axis=1)
        dist = np.where(valid[:, i] & valid[:, j], dist, -1.0)
        better = dist > best
        best = np.where(better, dist, best)
        bi = np.where(better, i, bi)
        bj = np.where(better, j, bj)
    found = best > tol.point
    rows = np.arange(len(idx))
    P = pts[rows, bi]
    Q = pts[rows, bj]
    # canonical endpoint order: lexicographic on coordinates
    swap = _lex_greater(P, Q)
    P2 = np.where(swap[:, None], Q, P)
    Q2 = np.where(swap[:, None], P, Q)
    hit[idx] = found
    p[idx] = P2
    q[idx] = Q2
    return hit, p, q


def _lex_greater(a, b):
    gt = np.zeros(len(a), dtype=bool)
    decided = np.zeros(len(a), dtype=bool)
    for c in range(3):
        gt |= ~decided & (a[:, c] > b[:, c])
        decided |= a[:, c] != b[:, c]
    return gt


def tri_tri_intersect(ta, tb, shared_vertices: int = 0, tol: Tolerances | None = None):
    """Intersection segment of two triangles, or None.

    Triangles sharing a vertex are neighbors and never reported.
    """
    if shared_vertices >= 1:
        return None
    ta = np.asarray(ta, dtype=np.float64).reshape(1, 3, 3)
    tb = np.asarray(tb, dtype=np.float64).reshape(1, 3, 3)
    if tol is None:
        both = np.concatenate([ta[0], tb[0]])
        tol = Tolerances.for_scale(float(np.linalg.norm(both.max(axis=0) - both.min(axis=0))))
    hit, p, q = narrow_phase(ta, tb, tol)
    if not hit[0]:
        return None
    return p[0].copy(), q[0].copy()


def barycentric(tri, points) -> np.ndarray:
    """Barycentric coordinates of ``points`` (projected) w.r.t. ``tri``."""
    tri = np.asarray(tri, dtype=np.float64)
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    e1 = tri[1] - tri[0]
    e2 = tri[2] - tri[0]
    w = pts - tri[0]
    d00, d01, d11 = e1 @ e1, e1 @ e2, e2 @ e2
    d20 = w @ e1
    d21 = w @ e2
    denom = d00 * d11 - d01 * d01
    b1 = (d11 * d20 - d01 * d21) / denom
    b2 = (d00 * d21 - d01 * d20) / denom
    return np.stack([1.0 - b1 - b2, b1, b2], axis=1)


def _edge_of(tri, point) -> int:
    b = barycentric(tri, point)[0]
    for k in range(3):
        if abs(b[(k + 2) % 3]) <= BARY_EPS:
            return k
    return -1


# -- broad phase ----------------------------------------------------------------


def _all_pairs_boxes(lo, hi, block_elems: int = 4_000_000):
    m = len(lo)
    out = []
    if m < 2:
        return np.zeros((0, 2), dtype=np.int64)
    rows = max(1, block_elems // m)
    for s in range(0, m, rows):
        e = min(m, s + rows)
        ov = np.ones((e - s, m), dtype=bool)
        for ax in range(3):
            ov &= lo[s:e, ax, None] <= hi[None, :, ax]
            ov &= lo[None, :, ax] <= hi[s:e, ax, None]
        ov &= np.arange(m)[None, :] > np.arange(s, e)[:, None]
        i, j = np.nonzero(ov)
        out.append(np.stack([i + s, j], axis=1))
    return np.concatenate(out)


def _sweep_pairs(lo, hi, chunk: int = 2_000_000):
    m = len(lo)
    if m < 2:
        return np.zeros((0, 2), dtype=np.int64)
    axis = int(np.argmax(hi.max(axis=0) - lo.min(axis=0)))
    order = np.argsort(lo[:, axis], kind="stable")
    smin = lo[order, axis]
    end = np.searchsorted(smin, hi[order, axis], side="right")
    count = np.maximum(end - np.arange(m) - 1, 0)
    out = []
    start = 0
    while start < m:
        # grow the block of sweep positions until it holds ~chunk pairs
        csum = np.cumsum(count[start:])
        stop = start + max(1, int(np.searchsorted(csum, chunk, side="right")))
        stop = min(stop, m)
        c = count[start:stop]
        total = int(c.sum())
        if total:
            a = np.repeat(np.arange(start, stop), c)
            offs = np.arange(total) - np.repeat(np.cumsum(c) - c, c)
            b = a + 1 + offs
            fa, fb = order[a], order[b]
            ok = np.ones(total, dtype=bool)
            for ax in range(3):
                ok &= (lo[fa, ax] <= hi[fb, ax]) & (lo[fb, ax] <= hi[fa, ax])
            fa, fb = fa[ok], fb[ok]
            out.append(np.stack([np.minimum(fa, fb), np.maximum(fa, fb)], axis=1))
        start = stop
    if not out:
        return np.zeros((0, 2), dtype=np.int64)
    pairs = np.concatenate(out)
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def candidate_pairs(mesh: Mesh, broad_phase: str = "aabb") -> np.ndarray:
    """Canonical (i < j) face pairs that survive the broad phase and share no vertex.

    ``broad_phase`` is ``aabb`` (all-pairs box test), ``sweep`` (sorted
    sweep along the longest axis, same result) or ``none`` (every pair).
    """
    m = mesh.n_faces
    if broad_phase == "none":
        i, j = np.triu_indices(m, k=1)
        pairs = np.stack([i, j], axis=1).astype(np.int64)
    else:
        lo, hi = face_boxes(mesh)
        if broad_phase == "aabb":
            pairs = _all_pairs_boxes(lo, hi)
        elif broad_phase == "sweep":
            pairs = _sweep_pairs(lo, hi)
        else:
            raise ValueError(f"unknown broad phase {broad_phase!r}")
    if len(pairs):
        pairs = pairs[shared_vertex_counts(mesh.faces, pairs[:, 0], pairs[:, 1]) == 0]
    return pairs


def intersect_pairs(mesh: Mesh, pairs: np.ndarray, chunk: int = 200_000):
    """Run the narrow phase over ``pairs``; return (hit pairs, p, q)."""
    tri = mesh.triangles()
    tol = mesh.tolerances()
    hits, ps, qs = [], [], []
    for s in range(0, len(pairs), chunk):
        blk = pairs[s : s + chunk]
        hit, p, q = narrow_phase(tri[blk[:, 0]], tri[blk[:, 1]], tol)
        hits.append(blk[hit])
        ps.append(p[hit])
        qs.append(q[hit])
    if not hits:
        return np.zeros((0, 2), dtype=np.int64), np.zeros((0, 3)), np.zeros((0, 3))
    return np.concatenate(hits), np.concatenate(ps), np.concatenate(qs)


def build_records(mesh: Mesh, pairs: np.ndarray, p: np.ndarray, q: np.ndarray) -> list[IntersectionRecord]:
    tri = mesh.triangles()
    records = []
    for (i, j), a, b in zip(pairs.tolist(), p, q):
        seg = (a.copy(), b.copy())
        records.append(IntersectionRecord(i, j, seg, (_edge_of(tri[i], a), _edge_of(tri[i], b))))
        records.append(IntersectionRecord(j, i, seg, (_edge_of(tri[j], a), _edge_of(tri[j], b))))
    records.sort(key=lambda r: (r.intersected, r.intersector))
    return records


def detect_intersections(mesh: Mesh, broad_phase: str = "aabb"):
    """Find the intersecting face set I and one record per (intersected, intersector).

    Each intersecting pair yields two records, one stored under each face.
    """
    pairs = candidate_pairs(mesh, broad_phase)
    hit_pairs, p, q = intersect_pairs(mesh, pairs)
    records = build_records(mesh, hit_pairs, p, q)
    return frozenset(int(x) for x in np.unique(hit_pairs)), records


# -- removal ----------------------------------------------------------------


def protruding_faces(mesh: Mesh, intersecting, adj: FaceAdjacency | None = None) -> frozenset:
    """Faces outside I with more than one neighbor, at least half of them in I."""
    if adj is None:
        adj = mesh.adjacency()
    in_i = np.zeros(mesh.n_faces, dtype=bool)
    in_i[list(intersecting)] = True
    degree = adj.degree()
    owner = np.repeat(np.arange(mesh.n_faces), degree)
    n_int = np.bincount(owner, weights=in_i[adj.indices], minlength=mesh.n_faces).astype(np.int64)
    mask = ~in_i & (degree > 1) & (n_int >= 1) & (degree - n_int < 2)
    return frozenset(int(f) for f in np.flatnonzero(mask))


def remove_faces(mesh: Mesh, drop) -> tuple[Mesh, np.ndarray]:
    """Drop faces, keeping relative order and all vertices.

    Returns the reduced mesh and ``kept``, mapping each new face index to
    its original index.
    """
    mask = np.ones(mesh.n_faces, dtype=bool)
    if drop:
        mask[np.fromiter((int(f) for f in drop), dtype=np.int64)] = False
    kept = np.flatnonzero(mask)
    return Mesh(mesh.vertices, mesh.faces[kept]), kept


def prune(mesh: Mesh, intersecting, records) -> PruneOutcome:
    protruding = protruding_faces(mesh, intersecting)
    reduced, kept = remove_faces(mesh, set(intersecting) | set(protruding))
    return PruneOutcome(frozenset(intersecting), protruding, reduced, kept, list(records))
