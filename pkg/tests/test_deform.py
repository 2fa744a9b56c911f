import numpy as np
import pytest
from hypothesis import given, strategies as st

from foldmend import fixtures as fx
from foldmend.deform import ZeroNormalError, displacement_field, offset_mesh, vertex_normals
from foldmend.intersection import detect_intersections
from foldmend.mesh import Mesh


def test_flat_grid_translates_uniformly():
    g = fx.flat_grid(6, 4)
    out = offset_mesh(g, 0.5)
    assert np.allclose(out.vertices - g.vertices, [0, 0, 0.5])
    assert np.array_equal(out.faces, g.faces)


def test_zero_delta_is_identity():
    m = fx.bumpy_sphere(2)
    assert offset_mesh(m, 0.0) == m


def test_icosphere_radii_after_offset():
    out = offset_mesh(fx.icosphere(3), 0.1)
    r = np.linalg.norm(out.vertices, axis=1)
    assert r.min() >= 1.099 and r.max() <= 1.101


def test_vertex_normals_unit_and_radial():
    s = fx.icosphere(2)
    n = vertex_normals(s)
    assert np.allclose(np.linalg.norm(n, axis=1), 1.0)
    assert np.min(np.sum(n * s.vertices, axis=1)) > 0.99


def test_displacement_scales_linearly():
    s = fx.bumpy_sphere(2)
    assert np.allclose(displacement_field(s, 0.3), 3 * displacement_field(s, 0.1))


def test_zero_normal_names_vertex():
    # two opposite copies of one triangle cancel at every corner
    m = Mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2], [0, 2, 1]])
    with pytest.raises(ZeroNormalError) as info:
        offset_mesh(m, 0.1)
    assert info.value.vertex == 0


def test_large_inward_offset_creates_folds():
    plate = fx.strip_plate()
    assert not detect_intersections(plate)[0]
    assert detect_intersections(offset_mesh(plate, -0.1))[0]


@given(st.floats(-0.2, 0.2), st.integers(0, 3))
def test_offset_keeps_connectivity(delta, subdiv):
    s = fx.icosphere(subdiv)
    out = offset_mesh(s, delta)
    assert np.array_equal(out.faces, s.faces)
    assert np.allclose(np.linalg.norm(out.vertices - s.vertices, axis=1), abs(delta))
