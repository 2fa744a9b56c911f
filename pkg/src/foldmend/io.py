"""Reading and writing OBJ, OFF and ASCII PLY triangle meshes.

Faces can carry a diagnostic role (see ``ROLE_COLORS``). PLY output stores
it as per-face ``red/green/blue`` properties, OBJ output as ``usemtl``
groups backed by a small material library.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from .mesh import IngestStats, Mesh, normalize_mesh

FORMATS = ("obj", "off", "ply")

ROLE_COLORS = {
    "unfolded": (191, 191, 191),
    "intersecting": (0, 200, 0),
    "inward": (220, 0, 0),
    "protruding": (255, 150, 0),
    "reconstructed": (30, 90, 255),
    "filled": (200, 0, 200),
}
DEFAULT_ROLE = "unfolded"


class MeshParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def format_from_path(path) -> str:
    ext = Path(path).suffix.lower().lstrip(".")
    if ext not in FORMATS:
        raise ValueError(f"unsupported mesh extension: {path!r}")
    return ext


def ingest_stats(mesh: Mesh) -> IngestStats:
    """Duplicate/degenerate tallies recorded when ``mesh`` was parsed."""
    return mesh._cache.get("ingest", IngestStats())


# -- parsing ----------------------------------------------------------------


def _lines(data):
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8", errors="replace")
    for number, raw in enumerate(data.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line


def _float(tok: str, lineno: int) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise MeshParseError(f"bad coordinate {tok!r}", lineno) from None
    if not math.isfinite(x):
        raise MeshParseError(f"non-finite coordinate {tok!r}", lineno)
    return x


def _int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise MeshParseError(f"bad index {tok!r}", lineno) from None


def _fan(polygon: list[int]) -> list[tuple[int, int, int]]:
    return [(polygon[0], polygon[i], polygon[i + 1]) for i in range(1, len(polygon) - 1)]


def _parse_obj(data):
    verts, faces = [], []
    for lineno, line in _lines(data):
        tokens = line.split()
        tag = tokens[0]
        if tag == "v":
            if len(tokens) < 4:
                raise MeshParseError("vertex needs three coordinates", lineno)
            verts.append([_float(t, lineno) for t in tokens[1:4]])
        elif tag == "f":
            if len(tokens) < 4:
                raise MeshParseError("face needs at least three vertices", lineno)
            poly = []
            for tok in tokens[1:]:
                idx = _int(tok.split("/", 1)[0], lineno)
                if idx > 0:
                    idx -= 1
                elif idx < 0:
                    idx += len(verts)
                else:
                    raise MeshParseError("OBJ indices are 1-based", lineno)
                if not 0 <= idx < len(verts):
                    raise MeshParseError(f"vertex index {tok} out of range", lineno)
                poly.append(idx)
            faces.extend(_fan(poly))
    return verts, faces


def _parse_off(data):
    tokens = []
    for lineno, line in _lines(data):
        tokens.extend((lineno, t) for t in line.split())
    if not tokens or not tokens[0][1].upper().endswith("OFF"):
        raise MeshParseError("missing OFF header", tokens[0][0] if tokens else None)
    pos = 1

    def take(count):
        nonlocal pos
        if pos + count > len(tokens):
            last = tokens[-1][0] if tokens else None
            raise MeshParseError("unexpected end of file", last)
        chunk = tokens[pos : pos + count]
        pos += count
        return chunk

    header = take(3)
    nv, nf = (_int(t, n) for n, t in header[:2])
    if nv < 0 or nf < 0:
        raise MeshParseError("negative element count", header[0][0])
    verts = []
    for _ in range(nv):
        verts.append([_float(t, n) for n, t in take(3)])
    faces = []
    for _ in range(nf):
        (lineno, tok), = take(1)
        k = _int(tok, lineno)
        if k < 3:
            raise MeshParseError("face needs at least three vertices", lineno)
        poly = [_int(t, n) for n, t in take(k)]
        for idx in poly:
            if not 0 <= idx < nv:
                raise MeshParseError(f"vertex index {idx} out of range", lineno)
        faces.extend(_fan(poly))
        # skip optional per-face colour values on the same line
        while pos < len(tokens) and tokens[pos][0] == lineno:
            pos += 1
    return verts, faces


def _parse_ply(data):
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8", errors="replace")
    lines = data.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise MeshParseError("missing ply magic", 1)
    elements = []  # (name, count, [(prop, is_list)])
    body_start = None
    for i, raw in enumerate(lines[1:], start=2):
        tokens = raw.split()
        if not tokens or tokens[0] in ("comment", "obj_info"):
            continue
        if tokens[0] == "format":
            if len(tokens) < 2 or tokens[1] != "ascii":
                raise MeshParseError("only ASCII PLY is supported", i)
        elif tokens[0] == "element":
            if len(tokens) != 3:
                raise MeshParseError("malformed element line", i)
            elements.append((tokens[1], _int(tokens[2], i), []))
        elif tokens[0] == "property":
            if not elements:
                raise MeshParseError("property before element", i)
            is_list = len(tokens) > 1 and tokens[1] == "list"
            elements[-1][2].append((tokens[-1], is_list))
        elif tokens[0] == "end_header":
            body_start = i
            break
        else:
            raise MeshParseError(f"unknown header line {raw!r}", i)
    if body_start is None:
        raise MeshParseError("missing end_header", len(lines))

    rows = [(n, line.split()) for n, line in enumerate(lines[body_start:], start=body_start + 1) if line.strip()]
    cursor = 0
    verts, faces = [], []
    n_vertices = None
    for name, count, props in elements:
        for _ in range(count):
            if cursor >= len(rows):
                raise MeshParseError(f"unexpected end of file in element {name!r}", len(lines))
            lineno, tokens = rows[cursor]
            cursor += 1
            values = {}
            pos = 0
            for prop, is_list in props:
                if pos >= len(tokens):
                    raise MeshParseError("too few values", lineno)
                if is_list:
                    k = _int(tokens[pos], lineno)
                    values[prop] = tokens[pos + 1 : pos + 1 + k]
                    if len(values[prop]) != k:
                        raise MeshParseError("truncated list property", lineno)
                    pos += 1 + k
                else:
                    values[prop] = tokens[pos]
                    pos += 1
            if name == "vertex":
                try:
                    verts.append([_float(values[a], lineno) for a in "xyz"])
                except KeyError:
                    raise MeshParseError("vertex lacks x/y/z", lineno) from None
            elif name == "face":
                idx = values.get("vertex_indices", values.get("vertex_index"))
                if idx is None:
                    raise MeshParseError("face lacks vertex_indices", lineno)
                poly = [_int(t, lineno) for t in idx]
                if len(poly) < 3:
                    raise MeshParseError("face needs at least three vertices", lineno)
                n_vertices = len(verts) if n_vertices is None else n_vertices
                for j in poly:
                    if not 0 <= j < n_vertices:
                        raise MeshParseError(f"vertex index {j} out of range", lineno)
                faces.extend(_fan(poly))
    return verts, faces


_PARSERS = {"obj": _parse_obj, "off": _parse_off, "ply": _parse_ply}


def parse_mesh(data, fmt: str) -> Mesh:
    """Parse ``data`` (bytes or str) in format ``fmt`` into a normalized mesh.

    Polygons are fan-triangulated, exact duplicate vertices merged and
    degenerate faces dropped; the tallies are available via
    :func:`ingest_stats`.
    """
    try:
        parser = _PARSERS[fmt]
    except KeyError:
        raise ValueError(f"unknown format {fmt!r}") from None
    verts, faces = parser(data)
    if not faces:
        raise MeshParseError("mesh has no faces")
    mesh, stats = normalize_mesh(np.array(verts, dtype=np.float64).reshape(-1, 3), np.array(faces, dtype=np.int64))
    if mesh.n_faces == 0:
        raise MeshParseError("every face is degenerate")
    mesh._cache["ingest"] = stats
    return mesh


def read_mesh(path) -> Mesh:
    with open(path, "rb") as fh:
        return parse_mesh(fh.read(), format_from_path(path))


# -- writing ----------------------------------------------------------------


def _check_coloring(mesh: Mesh, coloring) -> list[str] | None:
    if not coloring:
        return None
    roles = [DEFAULT_ROLE] * mesh.n_faces
    for f, role in coloring.items():
        if role not in ROLE_COLORS:
            raise ValueError(f"unknown diagnostic role {role!r}")
        if not 0 <= int(f) < mesh.n_faces:
            raise ValueError(f"coloring references unknown face {f}")
        roles[int(f)] = role
    return roles


def _coords(v) -> str:
    return " ".join("%.17g" % c for c in v)


def write_mesh(mesh: Mesh, fmt: str, coloring: dict | None = None) -> bytes:
    roles = _check_coloring(mesh, coloring)
    out = []
    if fmt == "obj":
        if roles is not None:
            out.append("mtllib diagnostics.mtl")
        out.extend("v " + _coords(v) for v in mesh.vertices)
        current = None
        for f, face in enumerate(mesh.faces):
            if roles is not None and roles[f] != current:
                current = roles[f]
                out.append(f"usemtl {current}")
            out.append("f %d %d %d" % tuple(face + 1))
    elif fmt == "off":
        out.append("OFF")
        out.append(f"{mesh.n_vertices} {mesh.n_faces} 0")
        out.extend(_coords(v) for v in mesh.vertices)
        out.extend("3 %d %d %d" % tuple(face) for face in mesh.faces)
    elif fmt == "ply":
        out += ["ply", "format ascii 1.0", f"element vertex {mesh.n_vertices}"]
        out += ["property double x", "property double y", "property double z"]
        out += [f"element face {mesh.n_faces}", "property list uchar int vertex_indices"]
        if roles is not None:
            out += ["property uchar red", "property uchar green", "property uchar blue"]
        out.append("end_header")
        out.extend(_coords(v) for v in mesh.vertices)
        for f, face in enumerate(mesh.faces):
            row = "3 %d %d %d" % tuple(face)
            if roles is not None:
                row += " %d %d %d" % ROLE_COLORS[roles[f]]
            out.append(row)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return ("\n".join(out) + "\n").encode("utf-8")


def material_library() -> str:
    rows = []
    for role, rgb in ROLE_COLORS.items():
        rows.append(f"newmtl {role}")
        rows.append("Kd " + " ".join("%.6f" % (c / 255) for c in rgb))
    return "\n".join(rows) + "\n"


def write_mesh_file(mesh: Mesh, path, coloring: dict | None = None) -> None:
    fmt = format_from_path(path)
    path = Path(path)
    path.write_bytes(write_mesh(mesh, fmt, coloring))
    if fmt == "obj" and coloring:
        (path.parent / "diagnostics.mtl").write_text(material_library())


def write_report(report: dict, path) -> None:
    text = json.dumps(report, indent=2, sort_keys=False)
    if str(path) == "-":
        print(text)
        return
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    os.replace(tmp, path)
