import numpy as np
import pytest
from hypothesis import given, strategies as st

from foldmend import fixtures as fx
from foldmend.mesh import (
    DegenerateFaceError,
    Mesh,
    build_adjacency,
    face_boxes,
    face_centroid,
    face_normal,
    face_normals,
    free_edges,
    normalize_mesh,
)


def tri_mesh(*tris):
    v = np.array([p for t in tris for p in t], dtype=float)
    return Mesh(v, np.arange(len(v)).reshape(-1, 3))


def test_mesh_rejects_bad_indices():
    with pytest.raises(ValueError):
        Mesh(np.zeros((3, 3)), [[0, 1, 3]])
    with pytest.raises(ValueError):
        Mesh(np.zeros((3, 3)), [[0, 1, 1]])


def test_mesh_arrays_are_frozen():
    m = fx.tetrahedron()
    with pytest.raises(ValueError):
        m.vertices[0, 0] = 5.0


def test_two_triangles_sharing_edge_are_adjacent():
    m = Mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], [[0, 1, 2], [1, 3, 2]])
    adj = build_adjacency(m)
    assert adj[0].tolist() == [1] and adj[1].tolist() == [0]


def test_vertex_sharing_is_not_adjacency():
    m = Mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]], [[0, 1, 2], [0, 3, 4]])
    adj = build_adjacency(m)
    assert adj[0].size == 0 and adj[1].size == 0


def test_tetrahedron_faces_have_three_neighbors():
    adj = build_adjacency(fx.tetrahedron())
    assert adj.degree().tolist() == [3, 3, 3, 3]
    assert adj.as_lists() == [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]]


def test_empty_mesh_adjacency():
    m = Mesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=int))
    assert len(build_adjacency(m)) == 0


def test_non_manifold_edge_lists_all_faces():
    m = Mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]], [[0, 1, 2], [1, 0, 3], [0, 1, 4]])
    assert build_adjacency(m).as_lists() == [[1, 2], [0, 2], [0, 1]]


def test_face_normal_examples():
    m = tri_mesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)], [(0, 0, 0), (0, 1, 0), (1, 0, 0)], [(0, 0, 0), (2, 0, 0), (0, 2, 0)])
    assert np.allclose(face_normal(m, 0, normalized=True), [0, 0, 1])
    assert np.allclose(face_normal(m, 1, normalized=True), [0, 0, -1])
    assert np.array_equal(face_normal(m, 2), [0, 0, 4])


def test_face_normal_degenerate_raises():
    m = Mesh([[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 5, 0]], [[0, 1, 2], [0, 1, 3]])
    with pytest.raises(DegenerateFaceError):
        face_normal(m, 0)


def test_centroid_examples():
    m = tri_mesh([(0, 0, 0), (3, 0, 0), (0, 3, 0)])
    assert np.allclose(face_centroid(m, 0), [1, 1, 0])
    s = np.sqrt(3) / 2
    m = tri_mesh([(1, 0, 0), (-0.5, s, 0), (-0.5, -s, 0)])
    assert np.allclose(face_centroid(m, 0), 0.0)


def test_free_edges_examples():
    single = tri_mesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)])
    assert len(free_edges(single)) == 3
    pair = Mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], [[0, 1, 2], [1, 3, 2]])
    assert len(free_edges(pair)) == 4
    assert free_edges(fx.tetrahedron()) == []
    assert free_edges(fx.icosphere(1)) == []
    # a subset only counts sharing within the subset
    assert len(free_edges(pair, {0})) == 3


def test_free_edges_follow_winding():
    m = tri_mesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)])
    assert [e for _, e in free_edges(m)] == [(0, 1), (1, 2), (2, 0)]


def test_boxes_are_inflated():
    m = tri_mesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)])
    lo, hi = face_boxes(m)
    eps = m.tolerances().box
    assert np.allclose(lo[0], [-eps, -eps, -eps]) and np.allclose(hi[0], [1 + eps, 1 + eps, eps])


def test_normalize_merges_duplicates_and_drops_degenerates():
    v = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 0, 0], [2, 0, 0]]
    f = [[0, 1, 2], [0, 3, 2], [0, 1, 4]]
    m, stats = normalize_mesh(v, f)
    assert stats.merged_vertices == 1
    # face 1 becomes a duplicate of face 0 (kept), face 2 is collinear
    assert stats.degenerate_faces == 1
    assert m.faces.tolist() == [[0, 1, 2], [0, 1, 2]]
    assert m.n_vertices == 4


def test_normalize_keeps_order_without_duplicates():
    src = fx.icosphere(1)
    m, stats = normalize_mesh(src.vertices, src.faces)
    assert m == src and stats.merged_vertices == 0 and stats.degenerate_faces == 0


@given(st.integers(1, 40), st.integers(0, 10_000))
def test_adjacency_symmetric_on_soups(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.integers(0, 6, size=(12, 3)).astype(float) + rng.normal(0, 0.1, size=(12, 3))
    faces = []
    for _ in range(n):
        faces.append(rng.choice(12, 3, replace=False))
    m = Mesh(v, faces)
    adj = build_adjacency(m)
    for i in range(m.n_faces):
        for j in adj[i]:
            assert i in adj[int(j)]
            assert len(set(m.faces[i]) & set(m.faces[int(j)])) >= 2
        assert list(adj[i]) == sorted(adj[i])


@given(st.integers(0, 10_000))
def test_unit_normals_have_unit_length(seed):
    m = fx.random_soup(30, seed)
    n = face_normals(m, normalized=True)
    assert np.allclose(np.linalg.norm(n, axis=1), 1.0, atol=1e-12)


@given(st.permutations(list(range(20))))
def test_adjacency_invariant_under_face_permutation(perm):
    base = fx.icosphere(0)
    perm = np.array(perm)
    shuffled = Mesh(base.vertices, base.faces[perm])
    a = build_adjacency(base)
    b = build_adjacency(shuffled)
    # face perm[k] of base is face k of shuffled
    inv = np.argsort(perm)
    for k in range(20):
        assert sorted(perm[b[k]].tolist()) == a[int(perm[k])].tolist()
        assert sorted(inv[a[int(perm[k])]].tolist()) == b[k].tolist()
