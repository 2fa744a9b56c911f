import numpy as np
import pytest

from foldmend import fixtures as fx
from foldmend.components import LabelingConfig, NoUnfoldedSurfaceError
from foldmend.mesh import Mesh
from foldmend.pipeline import STAGE_FILES, bench_broadphase, resolve_broad_phase, run_pipeline


@pytest.fixture(scope="module")
def folded_runs():
    return {name: run_pipeline(m) for name, m in fx.folding_fixtures().items()}


def test_planar_grid_is_identity():
    g = fx.flat_grid(10, 10)
    out, report = run_pipeline(g)
    assert out == g
    counts = report.to_dict()["counts"]
    assert all(counts[k] == 0 for k in ("intersecting", "protruding", "folded", "small", "reconstructed", "filled"))
    assert report.notes == ["no foldings detected"]
    assert set(report.ms) == {"detect", "prune", "partition", "label", "remove", "reconstruct", "fill", "assemble"}


def test_reversed_inner_sphere_leaves_outer_sphere(folded_runs):
    out, report = folded_runs["reversed_inner_sphere"]
    outer = fx.icosphere(2)
    assert out == outer
    assert report.intersecting == 0 and report.folded_faces == 320 and report.folded_components == 1


@pytest.mark.parametrize("name", ["folded_strip", "reversed_inner_sphere", "thin_torus"])
def test_identity_on_folding_fixtures(folded_runs, name):
    out, report = folded_runs[name]
    assert report.identity_holds()
    assert out.n_faces == report.output_faces


def test_folded_strip_counts(folded_runs):
    _, report = folded_runs["folded_strip"]
    assert report.intersecting > 0 and report.folded_faces > 0 and report.reconstructed > 0


def test_pipeline_is_deterministic():
    m = fx.folded_strip()
    a, ra = run_pipeline(m)
    b, rb = run_pipeline(m)
    assert a == b
    da, db = ra.to_dict(), rb.to_dict()
    da.pop("ms"), db.pop("ms")
    assert da == db


def test_stage_meshes_are_recorded():
    stages = {}
    out, _ = run_pipeline(fx.folded_strip(), stages=stages)
    assert tuple(stages) == STAGE_FILES
    assert stages[STAGE_FILES[-1]].mesh == out
    assert set(stages[STAGE_FILES[0]].coloring.values()) <= {"intersecting", "protruding"}


def test_all_folded_raises():
    with pytest.raises(NoUnfoldedSurfaceError):
        run_pipeline(fx.icosphere(1, reverse=True))


def test_small_component_counts_do_not_double_count():
    m = fx.merge(fx.icosphere(2), fx.icosphere(0, radius=0.2, center=(3, 0, 0), reverse=True), fx.tetrahedron(0.1, (-3, 0, 0)))
    out, report = run_pipeline(m, LabelingConfig(small_component=0.1))
    assert report.folded_faces == 20 and report.small_faces == 4
    assert out.n_faces == 320 and report.identity_holds()


def test_auto_broad_phase():
    assert resolve_broad_phase(fx.flat_grid(2, 2), "auto") == "aabb"
    assert resolve_broad_phase(fx.flat_grid(110, 100), "auto") == "sweep"
    assert resolve_broad_phase(fx.flat_grid(2, 2), "sweep") == "sweep"


def test_bench_on_small_meshes():
    r = bench_broadphase(fx.interpenetrating_tetrahedra())
    assert r.identical and r.aabb_intersecting == 8
    assert r.pairs == 8 * 7 // 2 - 12  # same-tetrahedron pairs all share a vertex
    empty = bench_broadphase(Mesh(np.eye(3), [[0, 1, 2]]))
    assert empty.pairs == 0 and empty.ratio == 0.0
