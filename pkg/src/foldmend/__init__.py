"""Detect and repair foldings (self-intersecting, inward-facing regions) in triangle meshes."""

from .components import (
    FOLDED,
    UNFOLDED,
    Component,
    LabelingConfig,
    NoUnfoldedSurfaceError,
    label_components,
    partition,
    ray_parity,
    remove_folded,
    remove_insignificant,
)
from .deform import ZeroNormalError, displacement_field, offset_mesh, vertex_normals
from .intersection import (
    FaceBox,
    IntersectionRecord,
    LineHit,
    PruneOutcome,
    aabb_overlap,
    detect_intersections,
    line_triangle_intersect,
    plane_side_filter,
    protruding_faces,
    prune,
    remove_faces,
    tri_tri_intersect,
)
from .io import MeshParseError, parse_mesh, read_mesh, write_mesh, write_mesh_file, write_report
from .mesh import DegenerateFaceError, FaceAdjacency, Mesh, build_adjacency, face_centroid, face_normal, free_edges
from .pipeline import BenchRecord, RepairReport, bench_broadphase, run_pipeline
from .repair import ReconstructionSet, SplitSet, assemble_output, fill_gaps, reconstruct_gaps, split_all, split_triangle
