"""Gap reconstruction along intersection lines, and vertex-fan gap filling.

Every removed intersecting face is cut along the planes of its intersectors
(iteratively, so later cuts re-split earlier sub-triangles). The pieces on
the side of each line that borders the retained surface are put back; the
wedge-shaped holes that remain where several lines meet are then closed one
triangle at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .intersection import BARY_EPS, IntersectionRecord, narrow_phase
from .mesh import Mesh, Tolerances


@dataclass(frozen=True)
class Split:
    """A triangle cut by one line.

    ``single`` is the triangle alone on one side; ``others`` holds the one
    or two triangles on the other side (one when the line runs through a
    corner, in which case ``vertex_incident`` is set).
    """

    single: np.ndarray
    others: tuple
    single_side: int  # sign of single's side w.r.t. the cut plane
    vertex_incident: bool = False

    @property
    def triangles(self) -> list[np.ndarray]:
        return [self.single, *self.others]


@dataclass
class SplitGroup:
    intersector: int
    plane: tuple  # (point, unit normal)
    split: Split | None


@dataclass
class FaceSplit:
    face: int
    groups: list = field(default_factory=list)
    pieces: list = field(default_factory=list)  # list of (3, 3) arrays
    generations: list = field(default_factory=list)


@dataclass
class SplitSet:
    faces: dict = field(default_factory=dict)  # face index -> FaceSplit
    discarded_slivers: int = 0
    vertex_incident: int = 0

    def __len__(self):
        return len(self.faces)


@dataclass(frozen=True)
class ReconFace:
    tri: np.ndarray
    source: int
    generation: int


@dataclass
class ReconstructionSet:
    faces: list = field(default_factory=list)

    def __len__(self):
        return len(self.faces)

    @property
    def triangles(self) -> list[np.ndarray]:
        return [f.tri for f in self.faces]


def _tri_area(t) -> float:
    return 0.5 * float(np.linalg.norm(np.cross(t[1] - t[0], t[2] - t[0])))


def _edge_point(a, b, da, db):
    # canonical direction so shared edges yield bit-identical points
    if tuple(a) > tuple(b):
        a, b, da, db = b, a, db, da
    return a + (da / (da - db)) * (b - a)


def split_by_plane(tri, point, normal, eps: float) -> Split | None:
    """Cut ``tri`` by the plane through ``point`` with unit ``normal``.

    Returns None when the plane does not separate the triangle (all corners
    on one closed side, including a cut along an edge or through a single
    corner).
    """
    tri = np.asarray(tri, dtype=np.float64)
    d = (tri - point) @ normal
    s = np.where(d > eps, 1, np.where(d < -eps, -1, 0))
    if not (s > 0).any() or not (s < 0).any():
        return None
    zero = np.flatnonzero(s == 0)
    if len(zero) == 1:
        k = int(zero[0])
        a, b = (k + 1) % 3, (k + 2) % 3
        p = _edge_point(tri[a], tri[b], d[a], d[b])
        first = np.array([tri[k], tri[a], p])
        second = np.array([tri[k], p, tri[b]])
        return Split(first, (second,), int(s[a]), vertex_incident=True)
    # exactly one corner is alone on its side
    k = next(i for i in range(3) if s[i] != s[(i + 1) % 3] and s[i] != s[(i + 2) % 3])
    a, b = (k + 1) % 3, (k + 2) % 3
    p = _edge_point(tri[k], tri[a], d[k], d[a])
    q = _edge_point(tri[b], tri[k], d[b], d[k])
    single = np.array([tri[k], p, q])
    # quad p, tri[a], tri[b], q split along its shorter diagonal
    if np.linalg.norm(tri[b] - p) <= np.linalg.norm(tri[a] - q):
        others = (np.array([p, tri[a], tri[b]]), np.array([p, tri[b], q]))
    else:
        others = (np.array([p, tri[a], q]), np.array([q, tri[a], tri[b]]))
    return Split(single, others, int(s[k]))


def split_triangle(tri, segment, tol: Tolerances | None = None) -> Split | None:
    """Split ``tri`` along the line through ``segment`` (extended to its boundary).

    Returns None (no split) for a degenerate segment or one running along
    an edge.
    """
    tri = np.asarray(tri, dtype=np.float64)
    a, b = (np.asarray(x, dtype=np.float64) for x in segment)
    if tol is None:
        tol = Tolerances.for_scale(float(np.linalg.norm(tri.max(axis=0) - tri.min(axis=0))))
    direction = b - a
    if np.linalg.norm(direction) <= tol.point:
        return None
    n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
    cut = np.cross(n, direction)
    length = np.linalg.norm(cut)
    if length == 0:
        return None
    return split_by_plane(tri, a, cut / length, tol.plane)


def _plane_of(tri):
    n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
    return tri[0], n / np.linalg.norm(n)


def split_all(mesh: Mesh, intersecting, records: list[IntersectionRecord]) -> SplitSet:
    """Iteratively split every intersected face along each intersector's line."""
    tol = mesh.tolerances()
    tri = mesh.triangles()
    by_face: dict[int, list[int]] = {}
    for r in records:
        by_face.setdefault(r.intersected, []).append(r.intersector)
    out = SplitSet()
    for f in sorted(intersecting):
        fs = FaceSplit(int(f))
        base = [tri[f].copy()]
        gens = [0]
        for j in sorted(set(by_face.get(f, []))):
            point, normal = _plane_of(tri[j])
            first = split_by_plane(tri[f], point, normal, tol.plane)
            fs.groups.append(SplitGroup(j, (point, normal), first))
            if first is not None and first.vertex_incident:
                out.vertex_incident += 1
            nxt, ngen = [], []
            for piece, g in zip(base, gens):
                s = split_by_plane(piece, point, normal, tol.plane)
                if s is None:
                    nxt.append(piece)
                    ngen.append(g)
                    continue
                for sub in s.triangles:
                    if _tri_area(sub) < tol.area:
                        out.discarded_slivers += 1
                        continue
                    nxt.append(sub)
                    ngen.append(g + 1)
            base, gens = nxt, ngen
        fs.pieces = base
        fs.generations = gens
        out.faces[int(f)] = fs
    return out


# -- reconstruction --------------------------------------------------------------


def _edge_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


class _Coverage:
    """Which stretches of original edges are bordered by retained surface."""

    def __init__(self, mesh: Mesh, kept_faces, tol: Tolerances):
        self.mesh = mesh
        self.tol = tol
        self.edge_faces: dict[tuple[int, int], list[int]] = {}
        for f, face in enumerate(mesh.faces.tolist()):
            for k in range(3):
                self.edge_faces.setdefault(_edge_key(face[k], face[(k + 1) % 3]), []).append(f)
        self.kept = set(int(f) for f in kept_faces)
        self.intervals: dict[tuple[int, int], list[tuple[int, float, float]]] = {}

    def add_piece(self, face: int, piece) -> None:
        for key, lo, hi in self.piece_edges(face, piece):
            self.intervals.setdefault(key, []).append((face, lo, hi))

    def piece_edges(self, face: int, piece):
        """(edge key, s0, s1) for piece edges lying on edges of ``face``."""
        corners = self.mesh.faces[face]
        tri = self.mesh.vertices[corners]
        out = []
        for k in range(3):
            a, b = int(corners[k]), int(corners[(k + 1) % 3])
            key = _edge_key(a, b)
            pa = self.mesh.vertices[key[0]]
            axis = self.mesh.vertices[key[1]] - pa
            length2 = float(axis @ axis)
            opposite = tri[(k + 2) % 3]
            n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
            # distance of a point from edge k within the face plane, normalized
            h = np.cross(n, axis)
            h_scale = float((opposite - pa) @ h)
            for i in range(3):
                x, y = piece[i], piece[(i + 1) % 3]
                if abs(float((x - pa) @ h) / h_scale) > BARY_EPS or abs(float((y - pa) @ h) / h_scale) > BARY_EPS:
                    continue
                s0 = float((x - pa) @ axis) / length2
                s1 = float((y - pa) @ axis) / length2
                lo, hi = min(s0, s1), max(s0, s1)
                if (hi - lo) * math.sqrt(length2) > self.tol.point:
                    out.append((key, lo, hi))
        return out

    def adjacent(self, face: int, piece) -> bool:
        for key, lo, hi in self.piece_edges(face, piece):
            length = math.sqrt(float(np.sum((self.mesh.vertices[key[1]] - self.mesh.vertices[key[0]]) ** 2)))
            if any(g != face and g in self.kept for g in self.edge_faces.get(key, ())):
                return True
            for g, a, b in self.intervals.get(key, ()):
                if g != face and (min(hi, b) - max(lo, a)) * length > self.tol.point:
                    return True
        return False


def _side(piece, plane) -> int:
    point, normal = plane
    return 1 if float((piece.mean(axis=0) - point) @ normal) > 0 else -1


def _decide(fs: FaceSplit, cov: _Coverage):
    """Kept side per intersector line, or None where no side borders the surface."""
    sides = []
    for g in fs.groups:
        s = g.split
        if s is None:
            sides.append(None)
        elif cov.adjacent(fs.face, s.single):
            sides.append(s.single_side)
        elif any(cov.adjacent(fs.face, o) for o in s.others):
            sides.append(-s.single_side)
        else:
            sides.append(None)
    return sides


def _retain(fs: FaceSplit, sides) -> list[int]:
    idx = list(range(len(fs.pieces)))
    for g, side in zip(fs.groups, sides):
        if side is not None:
            idx = [i for i in idx if _side(fs.pieces[i], g.plane) == side]
    for g, side in zip(fs.groups, sides):
        if side is not None or g.split is None:
            continue
        # undecided line: keep whichever side holds more of the candidate area
        area = {1: 0.0, -1: 0.0}
        for i in idx:
            area[_side(fs.pieces[i], g.plane)] += _tri_area(fs.pieces[i])
        if area[1] > 0 and area[-1] > 0:
            keep = 1 if area[1] > area[-1] else -1 if area[-1] > area[1] else g.split.single_side
            idx = [i for i in idx if _side(fs.pieces[i], g.plane) == keep]
    return idx


def reconstruct_gaps(mesh: Mesh, splits: SplitSet, kept_faces) -> ReconstructionSet:
    """Select the split pieces that rebuild the surface along intersection lines.

    ``kept_faces`` are indices into ``mesh`` (the original, unpruned mesh) of
    faces belonging to retained unfolded components. For each line the
    single-side triangle wins if it borders the retained surface, otherwise
    both triangles of the other side are taken if either does. Pieces
    further from the surface are kept when they lie on the retained side of
    every line; faces reached only through already retained pieces are
    resolved in later passes.
    """
    tol = mesh.tolerances()
    cov = _Coverage(mesh, kept_faces, tol)
    chosen: dict[int, list[int]] = {}
    pending = sorted(splits.faces)
    progress = True
    while pending and progress:
        progress = False
        still = []
        for f in pending:
            fs = splits.faces[f]
            sides = _decide(fs, cov)
            if all(s is None for s in sides):
                still.append(f)
                continue
            chosen[f] = _retain(fs, sides)
            for i in chosen[f]:
                cov.add_piece(f, fs.pieces[i])
            progress = True
        pending = still
    out = ReconstructionSet()
    for f in sorted(chosen):
        fs = splits.faces[f]
        for i in chosen[f]:
            out.faces.append(ReconFace(fs.pieces[i], f, fs.generations[i]))
    return out


# -- assembly and filling ----------------------------------------------------------


class Assembly:
    """Face soup with vertices welded on an epsilon grid.

    Vertices of the base mesh keep their relative order (unreferenced ones
    are dropped); later points snap to any existing vertex within the point
    tolerance.
    """

    def __init__(self, base: Mesh, tol: Tolerances):
        self.tol = tol
        self.h = tol.point
        used = np.zeros(base.n_vertices, dtype=bool)
        used[base.faces.reshape(-1)] = True
        old = np.flatnonzero(used)
        remap = np.full(base.n_vertices, -1, dtype=np.int64)
        remap[old] = np.arange(len(old))
        self.vertices: list[np.ndarray] = list(base.vertices[old])
        self.faces: list[tuple[int, int, int]] = [tuple(r) for r in remap[base.faces].tolist()]
        self.grid: dict[tuple[int, int, int], list[int]] = {}
        for i, p in enumerate(self.vertices):
            self.grid.setdefault(self._cell(p), []).append(i)

    def _cell(self, p):
        return (math.floor(p[0] / self.h), math.floor(p[1] / self.h), math.floor(p[2] / self.h))

    def vertex(self, p) -> int:
        c = self._cell(p)
        best = None
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dz in (-1, 0, 1):
                    for i in self.grid.get((c[0] + dx, c[1] + dy, c[2] + dz), ()):
                        if np.linalg.norm(self.vertices[i] - p) <= self.h and (best is None or i < best):
                            best = i
        if best is not None:
            return best
        self.vertices.append(np.asarray(p, dtype=np.float64).copy())
        idx = len(self.vertices) - 1
        self.grid.setdefault(c, []).append(idx)
        return idx

    def add_triangle(self, tri) -> int | None:
        ids = tuple(self.vertex(p) for p in tri)
        if len(set(ids)) < 3:
            return None
        self.faces.append(ids)
        return len(self.faces) - 1

    def mesh(self) -> Mesh:
        v = np.array(self.vertices, dtype=np.float64).reshape(-1, 3)
        return Mesh(v, np.array(self.faces, dtype=np.int64).reshape(-1, 3))


def _inside_cone(v, x, y, w, n) -> bool:
    a = np.cross(x - v, w - v) @ n
    b = np.cross(w - v, y - v) @ n
    return a > 0 and b > 0


class _Filler:
    def __init__(self, asm: Assembly, ir_faces):
        self.asm = asm
        self.ir = set(ir_faces)
        self.edge_faces: dict[tuple[int, int], list[int]] = {}
        self.vert_faces: dict[int, list[int]] = {}
        self.face_set = set()
        for f, face in enumerate(asm.faces):
            self._index(f, face)
        self.rejected = set()

    def _index(self, f, face):
        for k in range(3):
            self.edge_faces.setdefault(_edge_key(face[k], face[(k + 1) % 3]), []).append(f)
            self.vert_faces.setdefault(face[k], []).append(f)
        self.face_set.add(frozenset(face))

    def free_at(self, f, v):
        """Free edges of face f incident to vertex v as (other vertex, directed_out)."""
        face = self.asm.faces[f]
        k = face.index(v)
        out = []
        nxt, prv = face[(k + 1) % 3], face[(k + 2) % 3]
        if len(self.edge_faces[_edge_key(v, nxt)]) == 1:
            out.append((nxt, True))
        if len(self.edge_faces[_edge_key(v, prv)]) == 1:
            out.append((prv, False))
        return out

    def candidates(self):
        pairs = []
        for v, fs in self.vert_faces.items():
            ir = sorted(f for f in fs if f in self.ir and self.free_at(f, v))
            for i, a in enumerate(ir):
                sa = set(self.asm.faces[a])
                for b in ir[i + 1 :]:
                    if len(sa & set(self.asm.faces[b])) == 1:
                        pairs.append((a, b, v))
        pairs.sort()
        return pairs

    def _normal(self, f):
        p = [self.asm.vertices[i] for i in self.asm.faces[f]]
        return np.cross(p[1] - p[0], p[2] - p[0])

    def ear(self, a, b, v):
        """Best valid new face closing the wedge between a and b at v."""
        P = self.asm.vertices
        best = None
        for x, a_out in self.free_at(a, v):
            for y, _ in self.free_at(b, v):
                key = (v, x, y) if a_out else (v, y, x)
                if x == y or key in self.rejected:
                    continue
                face = (x, v, y) if a_out else (v, x, y)
                if not self.valid(face, v, x, y, a, b):
                    self.rejected.add(key)
                    continue
                ang = _angle(P[x] - P[v], P[y] - P[v])
                if best is None or ang < best[0]:
                    best = (ang, face)
        return None if best is None else best[1]

    def valid(self, face, v, x, y, a, b) -> bool:
        P = self.asm.vertices
        tol = self.asm.tol
        if frozenset(face) in self.face_set:
            return False
        if len(self.edge_faces.get(_edge_key(x, y), ())) >= 2:
            return False
        tri = np.array([P[i] for i in face])
        n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
        if 0.5 * np.linalg.norm(n) < tol.area or min(np.linalg.norm(P[x] - P[v]), np.linalg.norm(P[y] - P[v]), np.linalg.norm(P[x] - P[y])) <= tol.point:
            return False
        if n @ self._normal(a) <= 0 or n @ self._normal(b) <= 0:
            return False
        # orientation-free wedge normal for the emptiness test
        wn = np.cross(P[x] - P[v], P[y] - P[v])
        mid = tri.mean(axis=0)
        for g in self.vert_faces.get(v, ()):
            others = [w for w in self.asm.faces[g] if w != v]
            for w in others:
                if w not in (x, y) and _inside_cone(P[v], P[x], P[y], P[w], wn):
                    return False
            gn = np.cross(P[others[0]] - P[v], P[others[1]] - P[v])
            if g not in (a, b) and _inside_cone(P[v], P[others[0]], P[others[1]], mid, gn):
                return False
        return not self._intersects(tri, set(face))

    def _intersects(self, tri, ids) -> bool:
        lo = tri.min(axis=0) - self.asm.tol.box
        hi = tri.max(axis=0) + self.asm.tol.box
        P = np.array(self.asm.vertices)
        F = np.array(self.asm.faces)
        T = P[F]
        near = np.all((T.min(axis=1) <= hi) & (T.max(axis=1) >= lo), axis=1)
        near &= ~np.isin(F, list(ids)).any(axis=1)
        idx = np.flatnonzero(near)
        if len(idx) == 0:
            return False
        hit, _, _ = narrow_phase(np.repeat(tri[None], len(idx), axis=0), T[idx], self.asm.tol)
        return bool(hit.any())

    def add(self, face):
        self.asm.faces.append(tuple(face))
        f = len(self.asm.faces) - 1
        self._index(f, face)
        self.ir.add(f)
        return f


def _angle(u, w) -> float:
    return math.atan2(float(np.linalg.norm(np.cross(u, w))), float(u @ w))


def fill_in_assembly(asm: Assembly, ir_faces, max_faces: int | None = None) -> list[int]:
    """Close wedge gaps between reconstruction faces; returns new face ids."""
    filler = _Filler(asm, ir_faces)
    limit = max_faces if max_faces is not None else 4 * len(filler.ir) + 16
    added = []
    while len(added) < limit:
        new = None
        for a, b, v in filler.candidates():
            face = filler.ear(a, b, v)
            if face is not None:
                new = face
                break
        if new is None:
            break
        added.append(filler.add(new))
    return added


def crossing_pairs(asm: Assembly, subset) -> list[tuple[int, int]]:
    """Intersecting (subset face, other face) pairs that share no vertex.

    Faces split from two parents that shared a vertex may lose that vertex
    and end up crossing, which detection never saw. Only pairs with at
    least one member in ``subset`` are examined; the first entry of every
    returned pair is in ``subset``.
    """
    subset = np.asarray(sorted(subset), dtype=np.int64)
    out: list[tuple[int, int]] = []
    if len(subset) == 0:
        return out
    P = np.array(asm.vertices)
    F = np.array(asm.faces, dtype=np.int64)
    T = P[F]
    lo = T.min(axis=1) - asm.tol.box
    hi = T.max(axis=1) + asm.tol.box
    in_sub = np.zeros(len(F), dtype=bool)
    in_sub[subset] = True
    rows = max(1, 2_000_000 // len(F))
    for s in range(0, len(subset), rows):
        a = subset[s : s + rows]
        ov = np.ones((len(a), len(F)), dtype=bool)
        for ax in range(3):
            ov &= (lo[a, ax, None] <= hi[None, :, ax]) & (lo[None, :, ax] <= hi[a, ax, None])
        # each subset/subset pair once
        ov &= ~(in_sub[None, :] & (np.arange(len(F))[None, :] <= a[:, None]))
        i, j = np.nonzero(ov)
        i = a[i]
        share = (F[i][:, :, None] == F[j][:, None, :]).any(axis=(1, 2))
        i, j = i[~share], j[~share]
        hit, _, _ = narrow_phase(T[i], T[j], asm.tol)
        out.extend(zip(i[hit].tolist(), j[hit].tolist()))
    return out


def _greedy_cover(pairs, candidates: set) -> set:
    """Faces from ``candidates`` whose removal clears every pair, worst first."""
    pairs = list(pairs)
    chosen = set()
    while pairs:
        count: dict[int, int] = {}
        for x, y in pairs:
            for f in (x, y):
                if f in candidates:
                    count[f] = count.get(f, 0) + 1
        worst = max(count, key=lambda f: (count[f], f))
        chosen.add(worst)
        pairs = [p for p in pairs if worst not in p]
    return chosen


def assemble_pieces(kept: Mesh, recon, tol: Tolerances):
    """Weld kept faces and reconstruction pieces; drop collapsed and crossing pieces.

    Returns (assembly, reconstruction face ids, collapsed count, crossing count).
    """
    tris = _triangles(recon)
    drop: set[int] = set()
    while True:
        asm = Assembly(kept, tol)
        ir, origin = [], {}
        collapsed = 0
        for k, tri in enumerate(tris):
            if k in drop:
                continue
            f = asm.add_triangle(tri)
            if f is None:
                collapsed += 1
            else:
                ir.append(f)
                origin[f] = k
        pairs = crossing_pairs(asm, ir)
        if not pairs:
            return asm, ir, collapsed, len(drop)
        drop |= {origin[f] for f in _greedy_cover(pairs, set(ir))}


def _triangles(items):
    if isinstance(items, ReconstructionSet):
        return items.triangles
    return [np.asarray(t, dtype=np.float64) for t in items]


def fill_gaps(recon, kept: Mesh, tol: Tolerances | None = None) -> list[np.ndarray]:
    """New triangles closing wedge gaps among the reconstruction faces.

    Two reconstruction faces meeting at a single vertex, each with a free
    edge there, are bridged by the triangle on that vertex and the far ends
    of the two free edges. Repeats until nothing more can be added.
    """
    tol = tol or kept.tolerances()
    asm, ir, _, _ = assemble_pieces(kept, recon, tol)
    new = fill_in_assembly(asm, ir)
    return [np.array([asm.vertices[i] for i in asm.faces[f]]) for f in new]


def assemble_output(kept: Mesh, recon, filled, tol: Tolerances | None = None) -> Mesh:
    """Kept faces, then reconstruction faces, then filled faces, with welded vertices."""
    tol = tol or kept.tolerances()
    asm, _, _, _ = assemble_pieces(kept, recon, tol)
    for tri in _triangles(filled):
        asm.add_triangle(tri)
    return asm.mesh()
