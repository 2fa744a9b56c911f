"""End-to-end repair: detect, prune, partition, label, remove, reconstruct, fill."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .components import FOLDED, LabelingConfig, label_components, partition, remove_folded, remove_insignificant
from .intersection import candidate_pairs, detect_intersections, intersect_pairs, plane_side_filter_batch, prune
from .io import ingest_stats
from .mesh import Mesh, shared_vertex_counts
from .repair import assemble_pieces, fill_in_assembly, reconstruct_gaps, split_all

SCHEMA = 1
STAGES = ("detect", "prune", "partition", "label", "remove", "reconstruct", "fill", "assemble")
STAGE_FILES = ("01_intersections", "02_pruned", "03_components", "04_unfolded", "05_repaired")
SWEEP_ABOVE = 20_000  # faces; "auto" switches from all-pairs boxes to the axis sweep


@dataclass
class RepairReport:
    input_vertices: int = 0
    input_faces: int = 0
    intersecting: int = 0
    protruding: int = 0
    components: int = 0
    folded_components: int = 0
    folded_faces: int = 0
    small_components: int = 0
    small_faces: int = 0
    reconstructed: int = 0
    filled: int = 0
    output_vertices: int = 0
    output_faces: int = 0
    ms: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    warnings: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def expected_output_faces(self) -> int:
        return (
            self.input_faces - self.intersecting - self.protruding - self.folded_faces - self.small_faces
            + self.reconstructed + self.filled
        )

    def identity_holds(self) -> bool:
        return self.output_faces == self.expected_output_faces()

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "input": {"vertices": self.input_vertices, "faces": self.input_faces},
            "counts": {
                "input": self.input_faces,
                "intersecting": self.intersecting,
                "protruding": self.protruding,
                "components": self.components,
                "folded": self.folded_faces,
                "small": self.small_faces,
                "reconstructed": self.reconstructed,
                "filled": self.filled,
                "output": self.output_faces,
                "folded_components": self.folded_components,
                "small_components": self.small_components,
            },
            "output": {"vertices": self.output_vertices, "faces": self.output_faces},
            "ms": {k: round(v, 3) for k, v in self.ms.items()},
            "thresholds": dict(self.thresholds),
            "warnings": dict(self.warnings),
            "notes": list(self.notes),
        }


@dataclass
class StageMesh:
    mesh: Mesh
    coloring: dict


def resolve_broad_phase(mesh: Mesh, broad_phase: str) -> str:
    if broad_phase == "auto":
        return "sweep" if mesh.n_faces > SWEEP_ABOVE else "aabb"
    return broad_phase


class _Clock:
    def __init__(self, report: RepairReport):
        self.report = report
        self.t = time.perf_counter()

    def lap(self, stage: str):
        now = time.perf_counter()
        self.report.ms[stage] = (now - self.t) * 1000.0
        self.t = now


def run_pipeline(
    mesh: Mesh,
    cfg: LabelingConfig = LabelingConfig(),
    broad_phase: str = "auto",
    stages: dict | None = None,
) -> tuple[Mesh, RepairReport]:
    """Repair foldings in ``mesh``.

    Every stage runs even when an earlier one finds nothing; with no
    intersections the output still loses any folded components (e.g. an
    inverted inner shell). Pass a dict as ``stages`` to receive one
    :class:`StageMesh` per entry of ``STAGE_FILES``.

    Raises NoUnfoldedSurfaceError when every component is folded or dropped.
    """
    bp = resolve_broad_phase(mesh, broad_phase)
    stats = ingest_stats(mesh)
    report = RepairReport(input_vertices=mesh.n_vertices, input_faces=mesh.n_faces)
    report.thresholds = {"fold_threshold": cfg.fold_threshold, "small_component": cfg.small_component, "broad_phase": bp}
    report.warnings = {"degenerate_faces": stats.degenerate_faces, "merged_vertices": stats.merged_vertices}
    clock = _Clock(report)

    intersecting, records = detect_intersections(mesh, bp)
    report.intersecting = len(intersecting)
    if not intersecting:
        report.notes.append("no foldings detected")
    clock.lap("detect")

    pruned = prune(mesh, intersecting, records)
    report.protruding = len(pruned.protruding)
    clock.lap("prune")

    comps = partition(pruned.mesh)
    report.components = len(comps)
    clock.lap("partition")

    comps = label_components(pruned.mesh, comps, cfg)
    clock.lap("label")

    kept_comps, dropped = remove_insignificant(comps, cfg.small_component)
    dropped_ids = {c.id for c in dropped}
    folded = [c for c in comps if c.label == FOLDED]
    small = [c for c in comps if c.id in dropped_ids and c.label != FOLDED]
    report.folded_components = len(folded)
    report.folded_faces = sum(c.size for c in folded)
    report.small_components = len(small)
    report.small_faces = sum(c.size for c in small)
    if stages is not None:
        stages[STAGE_FILES[0]] = StageMesh(
            mesh, {**{f: "protruding" for f in pruned.protruding}, **{f: "intersecting" for f in intersecting}}
        )
        stages[STAGE_FILES[1]] = StageMesh(pruned.mesh, {})
        stages[STAGE_FILES[2]] = StageMesh(pruned.mesh, {int(f): "inward" for c in folded for f in c.faces})
    kept_mesh, kept_local = remove_folded(pruned.mesh, comps, kept_comps)
    kept_orig = pruned.kept[kept_local]
    if stages is not None:
        stages[STAGE_FILES[3]] = StageMesh(kept_mesh, {})
    clock.lap("remove")

    splits = split_all(mesh, intersecting, records)
    recon = reconstruct_gaps(mesh, splits, kept_orig)
    report.warnings["vertex_incident_splits"] = splits.vertex_incident
    report.warnings["discarded_slivers"] = splits.discarded_slivers
    clock.lap("reconstruct")

    asm, ir, collapsed, crossing = assemble_pieces(kept_mesh, recon, mesh.tolerances())
    report.warnings["collapsed_pieces"] = collapsed
    report.warnings["crossing_pieces"] = crossing
    report.reconstructed = len(ir)
    filled = fill_in_assembly(asm, ir)
    report.filled = len(filled)
    clock.lap("fill")

    out = asm.mesh()
    report.output_vertices = out.n_vertices
    report.output_faces = out.n_faces
    if stages is not None:
        roles = {f: "reconstructed" for f in ir}
        roles.update({f: "filled" for f in filled})
        stages[STAGE_FILES[4]] = StageMesh(out, roles)
    clock.lap("assemble")
    return out, report


# -- broad-phase benchmark --------------------------------------------------------


@dataclass
class BenchRecord:
    faces: int
    pairs: int  # canonical pairs sharing no vertex
    aabb_candidates: int
    plane_candidates: int
    aabb_intersecting: int
    plane_intersecting: int
    identical: bool
    aabb_ms: float
    plane_ms: float

    @property
    def ratio(self) -> float:
        return self.aabb_candidates / self.plane_candidates if self.plane_candidates else 0.0

    def as_row(self) -> dict:
        return {
            "faces": self.faces,
            "pairs": self.pairs,
            "aabb_candidates": self.aabb_candidates,
            "plane_candidates": self.plane_candidates,
            "candidate_ratio": round(self.ratio, 6),
            "aabb_intersecting": self.aabb_intersecting,
            "plane_intersecting": self.plane_intersecting,
            "identical": self.identical,
            "aabb_ms": round(self.aabb_ms, 3),
            "plane_ms": round(self.plane_ms, 3),
        }


def _plane_candidates(mesh: Mesh, block: int = 2_000_000) -> tuple[np.ndarray, int]:
    m = mesh.n_faces
    tri = mesh.triangles()
    kept, total = [], 0
    rows = max(1, block // max(m, 1))
    for s in range(0, m, rows):
        i, j = np.nonzero(np.arange(m)[None, :] > np.arange(s, min(m, s + rows))[:, None])
        i = i + s
        ok = shared_vertex_counts(mesh.faces, i, j) == 0
        i, j = i[ok], j[ok]
        total += len(i)
        # a pair survives only if neither triangle rejects the other
        ok = plane_side_filter_batch(tri[i], tri[j]) & plane_side_filter_batch(tri[j], tri[i])
        kept.append(np.stack([i[ok], j[ok]], axis=1))
    pairs = np.concatenate(kept) if kept else np.zeros((0, 2), dtype=np.int64)
    return pairs, total


def bench_broadphase(mesh: Mesh) -> BenchRecord:
    """Compare box-overlap against plane-side rejection as the pair prefilter.

    Both run over the same canonical enumeration of vertex-disjoint pairs,
    and each candidate list is handed to the same narrow phase.
    """
    if mesh.n_faces < 2:
        return BenchRecord(mesh.n_faces, 0, 0, 0, 0, 0, True, 0.0, 0.0)
    t0 = time.perf_counter()
    box = candidate_pairs(mesh, "aabb")
    hit_a, _, _ = intersect_pairs(mesh, box)
    t1 = time.perf_counter()
    plane, total = _plane_candidates(mesh)
    hit_p, _, _ = intersect_pairs(mesh, plane)
    t2 = time.perf_counter()
    ia = set(np.unique(hit_a).tolist())
    ip = set(np.unique(hit_p).tolist())
    return BenchRecord(
        faces=mesh.n_faces,
        pairs=total,
        aabb_candidates=len(box),
        plane_candidates=len(plane),
        aabb_intersecting=len(ia),
        plane_intersecting=len(ip),
        identical=ia == ip,
        aabb_ms=(t1 - t0) * 1000.0,
        plane_ms=(t2 - t1) * 1000.0,
    )
