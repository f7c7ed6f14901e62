"""Static SVG figures: phase portraits, dwell-bin histograms and transition heatmaps.

Output is byte-reproducible: the SVG hash salt is fixed and no date is
written into the file metadata.
"""
from __future__ import annotations

import io
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Circle, Rectangle  # noqa: E402

from .analysis import SwitchingStats, bin_labels  # noqa: E402
from .netspec import NetworkSpec  # noqa: E402

_RC = {"svg.hashsalt": "hetnet", "svg.fonttype": "none", "font.size": 9}


def _svg(fig) -> str:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return buf.getvalue()


def phase_svg(points, spec: NetworkSpec | None = None, title: str | None = None) -> str:
    """Trajectory in the plane; labelling disks and named tubes shaded when ``spec`` is given."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 5))
        if spec is not None:
            for fp in spec.fixed_points:
                ax.add_patch(Circle(fp.position, fp.region_radius, color="tab:orange", alpha=0.3))
                ax.annotate(fp.id, fp.position, ha="center", va="center", fontsize=7)
            for c in spec.corridors:
                poly = spec.corridor_polyline(c.id)
                xs, ys = zip(*poly)
                ax.plot(xs, ys, color="0.8", lw=0.8, zorder=0)
                if c.state is not None:
                    for a, b in zip(c.path, c.path[1:]):
                        r = c.tube_radius
                        ax.add_patch(Rectangle((min(a[0], b[0]) - r, min(a[1], b[1]) - r),
                                               abs(b[0] - a[0]) + 2 * r, abs(b[1] - a[1]) + 2 * r,
                                               color="tab:green", alpha=0.2))
        if len(points):
            ax.plot(points[:, 0], points[:, 1], lw=0.5, color="tab:blue")
            ax.plot(points[0, 0], points[0, 1], "k.", ms=4)
        ax.set_aspect("equal")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        if title:
            ax.set_title(title)
        return _svg(fig)


def histogram_svg(stats: SwitchingStats, states=None, title: str | None = None) -> str:
    """Grouped bars: per state, the fraction of visits in each dwell bin."""
    states = list(states) if states is not None else [
        s for s in stats.states if stats.visit_counts[s] > 0]
    labels = bin_labels(stats.bins)
    nb = len(labels)
    width = 0.8 / nb
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(states)), 3.5))
        for k, lab in enumerate(labels):
            vals = [stats.dwell_histogram(s)[k] for s in states]
            vals = [0.0 if math.isnan(v) else v for v in vals]
            ax.bar([i + (k - (nb - 1) / 2) * width for i in range(len(states))], vals, width,
                   label=lab)
        ax.set_xticks(range(len(states)))
        ax.set_xticklabels(states, rotation=30, ha="right")
        ax.set_ylabel("fraction of visits")
        ax.set_ylim(0, 1)
        ax.legend(title="dwell", fontsize=7)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _svg(fig)


def matrix_svg(stats: SwitchingStats, title: str | None = None) -> str:
    """Transition-matrix heatmap with the probability written in each cell."""
    m = stats.transition_matrix
    n = len(stats.states)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(1 + 0.7 * n, 1 + 0.6 * n))
        ax.imshow(m, vmin=0, vmax=1, cmap="Blues")
        for i in range(n):
            for j in range(n):
                v = m[i, j]
                txt = "-" if math.isnan(v) else f"{v:.2f}"
                ax.text(j, i, txt, ha="center", va="center", fontsize=7,
                        color="white" if not math.isnan(v) and v > 0.6 else "black")
        ax.set_xticks(range(n))
        ax.set_yticks(range(n))
        ax.set_xticklabels(stats.states, rotation=45, ha="right")
        ax.set_yticklabels(stats.states)
        ax.set_xlabel("next state")
        ax.set_ylabel("current state")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _svg(fig)
