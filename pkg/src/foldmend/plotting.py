"""PNG figures for repair reports and the broad-phase benchmark."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

STAGE_BARS = ("input", "intersecting", "protruding", "folded", "small", "reconstructed", "filled", "output")


def plot_stage_counts(counts: dict, path, title: str = "faces per stage") -> None:
    """Bar chart of the per-stage face counts of a report's ``counts`` block."""
    keys = [k for k in STAGE_BARS if k in counts]
    values = [counts[k] for k in keys]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    bars = ax.bar(keys, values, color="#4c72b0")
    ax.bar_label(bars, fontsize=8)
    ax.set_ylabel("faces")
    ax.set_title(title)
    ax.tick_params(axis="x", labelrotation=30)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_bench(rows: list[dict], path) -> None:
    """Candidate pairs left by each prefilter, one group per benchmarked mesh (log scale)."""
    labels = [str(r.get("mesh", i)) for i, r in enumerate(rows)]
    aabb = [max(r["aabb_candidates"], 1) for r in rows]
    plane = [max(r["plane_candidates"], 1) for r in rows]
    x = range(len(rows))
    fig, ax = plt.subplots(figsize=(max(4, 1.6 * len(rows) + 2), 3.5))
    ax.bar([i - 0.2 for i in x], aabb, width=0.4, label="box overlap")
    ax.bar([i + 0.2 for i in x], plane, width=0.4, label="plane side")
    ax.set_yscale("log")
    ax.set_xticks(list(x), labels)
    ax.set_ylabel("candidate pairs")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
