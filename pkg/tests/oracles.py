"""Slow, independent reference implementations used to check the library.

None of these share code with the package beyond the Mesh container: the
triangle pair test uses interval overlap on the planes' common line, the
line test clips with area-ratio barycentrics, and ray parity is a plain
double loop.
"""

from __future__ import annotations

import math

import numpy as np


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _norm(a):
    return math.sqrt(_dot(a, a))


def _unit(a):
    n = _norm(a)
    return (a[0] / n, a[1] / n, a[2] / n)


def diagonal(vertices) -> float:
    v = np.asarray(vertices)
    return float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))


def _crossings(tri, d):
    """Points where the sign of ``d`` changes along the triangle's edges."""
    pts = []
    for k in range(3):
        a, b = tri[k], tri[(k + 1) % 3]
        da, db = d[k], d[(k + 1) % 3]
        if da == 0:
            pts.append(tuple(a))
        if (da < 0 < db) or (db < 0 < da):
            t = da / (da - db)
            pts.append(tuple(a[i] + t * (b[i] - a[i]) for i in range(3)))
    return pts


def tri_pair_segment(A, B, eps_plane: float, eps_point: float):
    """Intersection segment of triangles A and B by interval overlap, or None.

    Both triangles must have corners strictly on both sides of the other's
    plane (beyond ``eps_plane``); the overlap of the two clipped intervals
    on the planes' common line must be longer than ``eps_point``.
    """
    A = [tuple(map(float, p)) for p in A]
    B = [tuple(map(float, p)) for p in B]
    na = _unit(_cross(_sub(A[1], A[0]), _sub(A[2], A[0])))
    nb = _unit(_cross(_sub(B[1], B[0]), _sub(B[2], B[0])))
    db = [_dot(_sub(p, A[0]), na) for p in B]
    da = [_dot(_sub(p, B[0]), nb) for p in A]
    if not (max(db) > eps_plane and min(db) < -eps_plane and max(da) > eps_plane and min(da) < -eps_plane):
        return None
    direction = _cross(na, nb)
    if _norm(direction) == 0:
        return None
    direction = _unit(direction)
    ia = _crossings(A, da)
    ib = _crossings(B, db)
    if len(ia) < 2 or len(ib) < 2:
        return None
    pa = sorted(ia, key=lambda p: _dot(p, direction))
    pb = sorted(ib, key=lambda p: _dot(p, direction))
    a0, a1 = pa[0], pa[-1]
    b0, b1 = pb[0], pb[-1]
    lo = a0 if _dot(a0, direction) >= _dot(b0, direction) else b0
    hi = a1 if _dot(a1, direction) <= _dot(b1, direction) else b1
    if _dot(hi, direction) - _dot(lo, direction) <= eps_point:
        return None
    return np.array(lo), np.array(hi)


def _signed(a, b):
    """Distances of b's corners to a's plane, per pair."""
    n = np.cross(a[:, 1] - a[:, 0], a[:, 2] - a[:, 0])
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    return np.einsum("kvj,kj->kv", b - a[:, None, 0], n), n


def _interval(tri, d, direction):
    """Extent along ``direction`` of the points where ``d`` changes sign on tri's boundary."""
    lo = np.full(len(tri), np.inf)
    hi = np.full(len(tri), -np.inf)
    count = np.zeros(len(tri), dtype=np.int64)
    for k in range(3):
        a, b = tri[:, k], tri[:, (k + 1) % 3]
        da, db = d[:, k], d[:, (k + 1) % 3]
        on = da == 0
        pa = np.einsum("kj,kj->k", a, direction)
        lo = np.where(on, np.minimum(lo, pa), lo)
        hi = np.where(on, np.maximum(hi, pa), hi)
        count += on
        cross = ((da < 0) & (db > 0)) | ((db < 0) & (da > 0))
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(cross, da / (da - db), 0.0)
        pc = np.einsum("kj,kj->k", a + t[:, None] * (b - a), direction)
        lo = np.where(cross, np.minimum(lo, pc), lo)
        hi = np.where(cross, np.maximum(hi, pc), hi)
        count += cross
    return lo, hi, count


def overlapping_pairs(tri, i, j, eps):
    """Mask of pairs whose clipped intervals on the common line overlap by more than eps."""
    A, B = tri[i], tri[j]
    db, na = _signed(A, B)
    da, nb = _signed(B, A)
    ok = (db.max(axis=1) > eps) & (db.min(axis=1) < -eps) & (da.max(axis=1) > eps) & (da.min(axis=1) < -eps)
    direction = np.cross(na, nb)
    length = np.linalg.norm(direction, axis=1)
    ok &= length > 0
    direction = direction / np.where(length > 0, length, 1.0)[:, None]
    alo, ahi, ac = _interval(A, da, direction)
    blo, bhi, bc = _interval(B, db, direction)
    ok &= (ac >= 2) & (bc >= 2)
    return ok & (np.minimum(ahi, bhi) - np.maximum(alo, blo) > eps)


def brute_force_intersections(mesh, chunk: int = 400_000):
    """All (i < j) vertex-disjoint intersecting pairs with their segments; no broad phase.

    Every pair is tested in bulk; segments are then computed pair by pair.
    """
    D = diagonal(mesh.vertices)
    eps = 1e-9 * D
    tri = mesh.vertices[mesh.faces]
    F = mesh.faces
    m = len(tri)
    out = {}
    rows = max(1, chunk // max(m, 1))
    for s in range(0, m, rows):
        i, j = np.nonzero(np.arange(m)[None, :] > np.arange(s, min(m, s + rows))[:, None])
        i = i + s
        disjoint = ~(F[i][:, :, None] == F[j][:, None, :]).any(axis=(1, 2))
        i, j = i[disjoint], j[disjoint]
        hit = overlapping_pairs(tri, i, j, eps)
        for a, b in zip(i[hit].tolist(), j[hit].tolist()):
            seg = tri_pair_segment(tri[a], tri[b], eps, eps)
            if seg is not None:
                out[(a, b)] = seg
    return out


def area_barycentric(tri, p):
    """Barycentric coordinates of point ``p`` from signed sub-triangle areas."""
    a, b, c = (tuple(map(float, q)) for q in tri)
    p = tuple(map(float, p))
    n = _cross(_sub(b, a), _sub(c, a))
    nn = _dot(n, n)
    wa = _dot(_cross(_sub(b, p), _sub(c, p)), n) / nn
    wb = _dot(_cross(_sub(c, p), _sub(a, p)), n) / nn
    wc = _dot(_cross(_sub(a, p), _sub(b, p)), n) / nn
    return wa, wb, wc


def clip_line(p1, p2, tri):
    """(t, barycentrics) of the line p1 + t (p2 - p1) meeting the triangle's plane, or None if parallel."""
    a, b, c = (tuple(map(float, q)) for q in tri)
    n = _cross(_sub(b, a), _sub(c, a))
    d = _sub(tuple(map(float, p2)), tuple(map(float, p1)))
    denom = _dot(n, d)
    if denom == 0:
        return None
    t = _dot(n, _sub(a, tuple(map(float, p1)))) / denom
    point = tuple(p1[i] + t * d[i] for i in range(3))
    return t, area_barycentric(tri, point)


def ray_count(mesh, faces, f, eps_ray: float, eps_point: float) -> int:
    """Crossings of the centroid/normal ray of face ``f`` with ``faces``, slow version."""
    tri = mesh.vertices[mesh.faces]
    origin = tri[f].mean(axis=0)
    n = np.cross(tri[f][1] - tri[f][0], tri[f][2] - tri[f][0])
    n = n / np.linalg.norm(n)
    own = set(mesh.faces[f].tolist())
    ts = []
    for g in faces:
        if g == f or own & set(mesh.faces[g].tolist()):
            continue
        hit = clip_line(origin, origin + n, tri[g])
        if hit is None:
            continue
        t, w = hit
        if t > eps_ray and min(w) >= -1e-9:
            ts.append(t)
    ts.sort()
    count = 0
    last = None
    for t in ts:
        if last is None or t - last > eps_point:
            count += 1
        last = t
    return count


def free_edge_count(faces) -> int:
    """Undirected edges used by exactly one face."""
    seen: dict[tuple[int, int], int] = {}
    for f in faces:
        for k in range(3):
            a, b = f[k], f[(k + 1) % 3]
            key = (min(a, b), max(a, b))
            seen[key] = seen.get(key, 0) + 1
    return sum(1 for v in seen.values() if v == 1)
