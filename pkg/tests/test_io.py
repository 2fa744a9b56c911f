import numpy as np
import pytest
from hypothesis import given, strategies as st

from foldmend import fixtures as fx
from foldmend.io import ROLE_COLORS, MeshParseError, ingest_stats, parse_mesh, read_mesh, write_mesh, write_mesh_file
from foldmend.mesh import Mesh

TRI = Mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])


def test_obj_example():
    m = parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n", "obj")
    assert m == TRI


def test_off_example():
    m = parse_mesh("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n", "off")
    assert m == TRI


def test_obj_quad_is_fanned():
    m = parse_mesh("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n", "obj")
    assert m.faces.tolist() == [[0, 1, 2], [0, 2, 3]]


def test_obj_slash_and_negative_indices():
    m = parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf -3/1/1 -2//1 -1\n", "obj")
    assert m == TRI


def test_ply_ascii():
    text = (
        "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\n"
        "element face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n"
    )
    assert parse_mesh(text, "ply") == TRI


@pytest.mark.parametrize(
    "text, fmt, line",
    [
        ("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n", "obj", 4),
        ("v 0 0 0\nv 1 zero 0\n", "obj", 2),
        ("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2\n", "obj", 4),
        ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 9\n", "off", 6),
    ],
)
def test_parse_errors_carry_line_numbers(text, fmt, line):
    with pytest.raises(MeshParseError) as info:
        parse_mesh(text, fmt)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_empty_face_list_is_an_error():
    with pytest.raises(MeshParseError):
        parse_mesh("v 0 0 0\nv 1 0 0\n", "obj")


def test_duplicates_and_degenerates_are_tallied():
    text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\nf 1 2 5\n"
    m = parse_mesh(text, "obj")
    stats = ingest_stats(m)
    assert (stats.merged_vertices, stats.degenerate_faces) == (1, 1)
    assert m.n_faces == 1


@pytest.mark.parametrize("fmt", ["obj", "off", "ply"])
def test_single_triangle_round_trip(fmt):
    assert parse_mesh(write_mesh(TRI, fmt), fmt) == TRI


@pytest.mark.parametrize("fmt", ["obj", "off", "ply"])
def test_random_2000_face_round_trip(fmt):
    m = fx.random_soup(2000, seed=5)
    back = parse_mesh(write_mesh(m, fmt), fmt)
    assert np.array_equal(back.faces, m.faces)
    assert np.max(np.abs(back.vertices - m.vertices)) <= 1e-9


def test_ply_coloring_row():
    text = write_mesh(TRI, "ply", {0: "intersecting"}).decode()
    assert text.strip().splitlines()[-1] == "3 0 1 2 %d %d %d" % ROLE_COLORS["intersecting"]
    assert ROLE_COLORS["intersecting"] == (0, 200, 0)


def test_coloring_unknown_face_raises():
    with pytest.raises(ValueError):
        write_mesh(TRI, "ply", {3: "intersecting"})
    with pytest.raises(ValueError):
        write_mesh(TRI, "ply", {0: "sparkly"})


def test_colored_obj_writes_material_library(tmp_path):
    path = tmp_path / "m.obj"
    write_mesh_file(TRI, path, {0: "filled"})
    assert "usemtl filled" in path.read_text()
    assert "newmtl filled" in (tmp_path / "diagnostics.mtl").read_text()
    assert read_mesh(path) == TRI


def test_unknown_extension(tmp_path):
    with pytest.raises(ValueError):
        write_mesh_file(TRI, tmp_path / "m.stl")


coords = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@given(st.lists(st.tuples(coords, coords, coords), min_size=3, max_size=3, unique=True), st.sampled_from(["obj", "off", "ply"]))
def test_round_trip_preserves_arbitrary_coordinates(pts, fmt):
    v = np.array(pts)
    if np.linalg.norm(np.cross(v[1] - v[0], v[2] - v[0])) <= 1e-6 * max(1.0, np.abs(v).max()) ** 2:
        return
    m = Mesh(v, [[0, 1, 2]])
    back = parse_mesh(write_mesh(m, fmt), fmt)
    # %.17g is exact for doubles
    assert np.array_equal(back.vertices, m.vertices) and np.array_equal(back.faces, m.faces)
