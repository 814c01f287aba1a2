"""Artifact writers: delimited tables, canonical JSON, deterministic SVG.

Determinism contract: identical inputs produce byte-identical files.
Floats are written in shortest round-trip form, JSON objects with sorted
keys, and the SVG renderer pins the sources of nondeterminism matplotlib
exposes (element-id hash salt, creation-date and creator metadata).
Non-finite floats appear in JSON as the strings "inf", "-inf", "nan"
since strict JSON has no spelling for them.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  backend pin must come first
import numpy as np  # noqa: E402

from .geometry import PolygonalDomain  # noqa: E402

# fixed ids and no date make repeated renders byte-identical
_SVG_RC = {
    "svg.hashsalt": "cat0-pursuit",
    "svg.fonttype": "none",
    "figure.dpi": 100,
    "font.family": "DejaVu Sans",
    "path.simplify": False,
}

LION_COLOR = "#1f77b4"
MAN_COLOR = "#d62728"
_EXTRA_COLORS = ("#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22")


def fmt_float(v) -> str:
    return repr(float(v))


def write_csv(path: str | Path, header, rows) -> Path:
    p = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(
                v if isinstance(v, str) else fmt_float(v) for v in row
            )
        )
    p.write_text("\n".join(lines) + "\n")
    return p


def _finite(obj):
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_finite(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isfinite(f):
            return f
        return "nan" if math.isnan(f) else ("inf" if f > 0 else "-inf")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_finite(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: str | Path, obj) -> Path:
    p = Path(path)
    p.write_text(canonical_json(obj))
    return p


# ---------------------------------------------------------------------------
# SVG rendering


def _domain_outline(ax, domain: PolygonalDomain, mode: str) -> None:
    verts = np.vstack([domain.verts, domain.verts[:1]])
    ax.plot(verts[:, 0], verts[:, 1], color="#444444", linewidth=1.2, zorder=1)
    if mode == "rounded":
        for arc in domain.arcs():
            c, r = arc.center, arc.radius
            a0 = math.atan2(*(arc.tangent_in - c)[::-1])
            a1 = math.atan2(*(arc.tangent_out - c)[::-1])
            # the traversed arc is the short way around for a tangent fillet
            sweep = (a1 - a0 + math.pi) % (2.0 * math.pi) - math.pi
            th = a0 + sweep * np.linspace(0.0, 1.0, 33)
            ax.plot(
                c[0] + r * np.cos(th),
                c[1] + r * np.sin(th),
                color="#999999",
                linewidth=1.0,
                zorder=1,
            )


def _finish(fig, ax, domain: PolygonalDomain, path: str | Path, title: str) -> Path:
    lo = domain.verts.min(axis=0)
    hi = domain.verts.max(axis=0)
    pad = 0.06 * max(hi[0] - lo[0], hi[1] - lo[1])
    ax.set_xlim(lo[0] - pad, hi[0] + pad)
    ax.set_ylim(lo[1] - pad, hi[1] + pad)
    ax.set_aspect("equal")
    ax.set_title(title)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="upper right", fontsize=8)
    return _save(fig, path)


def _save(fig, path: str | Path) -> Path:
    p = Path(path)
    fig.savefig(p, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return p


def render_plot(
    path: str | Path,
    domain: PolygonalDomain,
    mode: str,
    paths=(),
    points=(),
    circles=(),
    title: str = "",
) -> Path:
    """Domain outline plus labeled polylines, point markers and circles.

    ``paths``: (label, (n, 2) array) pairs; ``points``: (label, point,
    marker) triples; ``circles``: (center, radius, label) triples.  Empty
    sequences give the outline-only figure.
    """
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6.0, 6.0))
        _domain_outline(ax, domain, mode)
        colors = [LION_COLOR, MAN_COLOR, *_EXTRA_COLORS]
        for k, (label, pts) in enumerate(paths):
            pts = np.asarray(pts, dtype=float)
            ax.plot(
                pts[:, 0],
                pts[:, 1],
                color=colors[k % len(colors)],
                linewidth=1.0,
                label=label,
                zorder=3,
            )
        for k, (label, pt, marker) in enumerate(points):
            ax.plot(
                [pt[0]],
                [pt[1]],
                marker=marker,
                linestyle="none",
                markersize=8,
                color="#000000",
                label=label,
                zorder=4,
            )
        for center, radius, label in circles:
            th = np.linspace(0.0, 2.0 * math.pi, 129)
            ax.plot(
                center[0] + radius * np.cos(th),
                center[1] + radius * np.sin(th),
                color="#888888",
                linestyle="--",
                linewidth=0.8,
                label=label,
                zorder=2,
            )
        return _finish(fig, ax, domain, path, title)


def render_rescale_plot(path: str | Path, n_list, deviations, title: str) -> Path:
    """Log-log sup-deviation against the rescaling index."""
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        ax.loglog(n_list, deviations, marker="o", color=LION_COLOR)
        ax.set_xlabel("n")
        ax.set_ylabel("sup intrinsic deviation")
        ax.set_title(title)
        ax.grid(True, which="both", linewidth=0.3, alpha=0.5)
        return _save(fig, path)
