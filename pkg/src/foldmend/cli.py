"""Command line interface: ``foldmend offset|detect|repair|bench``.

Exit codes: 0 success, 1 I/O or parse error, 2 no unfolded surface remains,
3 invalid configuration (bad flag values, bad FOLDMEND_THREADS).
"""

from __future__ import annotations

import csv
import os
import sys
import time
from pathlib import Path

import click

from .components import LabelingConfig, NoUnfoldedSurfaceError
from .deform import ZeroNormalError, offset_mesh
from .fixtures import flat_grid
from .intersection import detect_intersections, protruding_faces
from .io import MeshParseError, ingest_stats, read_mesh, write_mesh_file, write_report
from .pipeline import SCHEMA, STAGE_FILES, bench_broadphase, run_pipeline

EXIT_OK, EXIT_IO, EXIT_NO_SURFACE, EXIT_CONFIG = 0, 1, 2, 3


class ConfigError(click.ClickException):
    exit_code = EXIT_CONFIG


class IOFailure(click.ClickException):
    exit_code = EXIT_IO


class NoSurface(click.ClickException):
    exit_code = EXIT_NO_SURFACE


def thread_cap() -> int:
    """FOLDMEND_THREADS as an int (0 = automatic)."""
    raw = os.environ.get("FOLDMEND_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"FOLDMEND_THREADS must be a non-negative integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError(f"FOLDMEND_THREADS must be a non-negative integer, got {raw!r}")
    return n


def _load(path):
    try:
        return read_mesh(path)
    except (OSError, MeshParseError, ValueError) as exc:
        raise IOFailure(f"{path}: {exc}") from None


def _save(mesh, path, coloring=None):
    try:
        write_mesh_file(mesh, path, coloring)
    except (OSError, ValueError) as exc:
        raise IOFailure(f"{path}: {exc}") from None


def _emit(rows):
    for key, value in rows:
        click.echo(f"{key}\t{value}")


def _figure(counts, path, title):
    from .plotting import plot_stage_counts

    try:
        plot_stage_counts(counts, path, title)
    except OSError as exc:
        raise IOFailure(f"{path}: {exc}") from None


@click.group()
def cli():
    """Detect and repair foldings in triangle meshes."""


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False))
@click.option("--output", "output_path", required=True, type=click.Path(dir_okay=False))
@click.option("--delta", required=True, type=float, help="Signed offset distance; negative moves inward.")
def offset(input_path, output_path, delta):
    """Move every vertex along its normal by DELTA."""
    mesh = _load(input_path)
    try:
        out = offset_mesh(mesh, delta)
    except ZeroNormalError as exc:
        raise ConfigError(str(exc)) from None
    _save(out, output_path)
    _emit([("vertices", out.n_vertices), ("faces", out.n_faces), ("delta", delta)])


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False))
@click.option("--report", "report_path", type=click.Path(dir_okay=False), help="JSON report path ('-' for stdout).")
@click.option("--color-diagnostics", "color_path", type=click.Path(dir_okay=False))
@click.option("--figure", "figure_path", type=click.Path(dir_okay=False), help="PNG with the face counts.")
@click.option("--broad-phase", type=click.Choice(["aabb", "sweep"]), default="aabb", show_default=True)
def detect(input_path, report_path, color_path, figure_path, broad_phase):
    """Report intersecting and protruding faces."""
    threads = thread_cap()
    mesh = _load(input_path)
    t0 = time.perf_counter()
    intersecting, records = detect_intersections(mesh, broad_phase)
    protruding = protruding_faces(mesh, intersecting)
    ms = (time.perf_counter() - t0) * 1000.0
    stats = ingest_stats(mesh)
    counts = {
        "input": mesh.n_faces,
        "intersecting": len(intersecting),
        "protruding": len(protruding),
        "records": len(records),
    }
    _emit(counts.items())
    if report_path:
        write_report(
            {
                "schema": SCHEMA,
                "input": {"vertices": mesh.n_vertices, "faces": mesh.n_faces},
                "counts": counts,
                "ms": {"detect": round(ms, 3)},
                "thresholds": {"broad_phase": broad_phase, "threads": threads},
                "warnings": {"degenerate_faces": stats.degenerate_faces, "merged_vertices": stats.merged_vertices},
                "notes": [] if intersecting else ["no foldings detected"],
            },
            report_path,
        )
    if color_path:
        roles = {f: "protruding" for f in protruding}
        roles.update({f: "intersecting" for f in intersecting})
        _save(mesh, color_path, roles)
    if figure_path:
        _figure(counts, figure_path, Path(input_path).name)


def _config(fold_threshold, small_component) -> LabelingConfig:
    try:
        return LabelingConfig(fold_threshold, small_component)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False))
@click.option("--output", "output_path", required=True, type=click.Path(dir_okay=False))
@click.option("--report", "report_path", type=click.Path(dir_okay=False), help="JSON report path ('-' for stdout).")
@click.option("--dump-stages", "dump_dir", type=click.Path(file_okay=False), help="Write one mesh per stage here.")
@click.option("--color-diagnostics", "color_path", type=click.Path(dir_okay=False))
@click.option("--fold-threshold", type=float, default=0.2, show_default=True)
@click.option("--small-component", type=float, default=0.01, show_default=True)
@click.option("--figure", "figure_path", type=click.Path(dir_okay=False), help="PNG with the per-stage face counts.")
@click.option("--broad-phase", type=click.Choice(["auto", "aabb", "sweep"]), default="auto", show_default=True)
def repair(input_path, output_path, report_path, dump_dir, color_path, fold_threshold, small_component, figure_path, broad_phase):
    """Remove foldings and reconstruct the surface along the intersection lines."""
    cfg = _config(fold_threshold, small_component)
    threads = thread_cap()
    mesh = _load(input_path)
    stages = {} if (dump_dir or color_path) else None
    try:
        out, report = run_pipeline(mesh, cfg, broad_phase, stages)
    except NoUnfoldedSurfaceError as exc:
        raise NoSurface(str(exc)) from None
    report.thresholds["threads"] = threads
    _save(out, output_path)
    data = report.to_dict()
    _emit(data["counts"].items())
    if report_path:
        write_report(data, report_path)
    if dump_dir:
        root = Path(dump_dir)
        root.mkdir(parents=True, exist_ok=True)
        ext = Path(output_path).suffix or ".obj"
        for name in STAGE_FILES:
            st = stages[name]
            _save(st.mesh, root / f"{name}{ext}", st.coloring or None)
    if color_path:
        st = stages[STAGE_FILES[-1]]
        _save(st.mesh, color_path, st.coloring or None)
    if figure_path:
        _figure(data["counts"], figure_path, Path(input_path).name)


@cli.command()
@click.option("--input", "inputs", multiple=True, type=click.Path(dir_okay=False), help="Mesh to benchmark (repeatable).")
@click.option("--grid-faces", type=int, default=2000, show_default=True, help="Faces of the built-in flat grid (0 to skip).")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="CSV path; stdout when omitted.")
@click.option("--figure", "figure_path", type=click.Path(dir_okay=False), help="PNG comparing candidate counts.")
def bench(inputs, grid_faces, csv_path, figure_path):
    """Compare box-overlap and plane-side prefilters on the same pairs."""
    thread_cap()
    if grid_faces < 0:
        raise ConfigError("--grid-faces must be non-negative")
    meshes = []
    if grid_faces:
        nx = max(1, int(round((grid_faces / 2) ** 0.5)))
        ny = max(1, grid_faces // (2 * nx))
        meshes.append((f"grid{2 * nx * ny}", flat_grid(nx, ny)))
    meshes += [(Path(p).name, _load(p)) for p in inputs]
    rows = [{"mesh": name, **bench_broadphase(m).as_row()} for name, m in meshes]
    if not rows:
        raise ConfigError("nothing to benchmark")
    fields = list(rows[0])
    if csv_path:
        try:
            with open(csv_path, "w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=fields)
                w.writeheader()
                w.writerows(rows)
        except OSError as exc:
            raise IOFailure(f"{csv_path}: {exc}") from None
    else:
        w = csv.DictWriter(sys.stdout, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    if figure_path:
        from .plotting import plot_bench

        plot_bench(rows, figure_path)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="foldmend", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        # click's own usage errors are configuration problems too
        return exc.exit_code if isinstance(exc, (ConfigError, IOFailure, NoSurface)) else EXIT_CONFIG
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_IO
    return EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
