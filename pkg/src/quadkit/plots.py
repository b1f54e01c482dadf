"""Figure rendering for report commands.

Figures are written straight to files with the Agg backend and fixed
metadata, so repeated runs produce byte-identical images.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .evaluate import CurvePoint  # noqa: E402
from .protocols import InstabilityReport  # noqa: E402

__all__ = ["render_sweep_figure", "render_instability_figure"]

_SAVE_KWARGS = {"dpi": 130, "metadata": {"Software": "quadkit"}}


def render_sweep_figure(curve: Sequence[CurvePoint], path: str | Path) -> None:
    """Precision / recall / harmonic mean against the confidence cutoff."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    xs = [p.threshold for p in curve]
    ax.plot(xs, [p.precision for p in curve], label="precision", color="#1f77b4")
    ax.plot(xs, [p.recall for p in curve], label="recall", color="#2ca02c")
    ax.plot(xs, [p.hmean for p in curve], label="hmean", color="#d62728", linewidth=2)
    if curve:
        best = max(curve, key=lambda p: (p.hmean, p.threshold))
        ax.axvline(best.threshold, color="#888888", linestyle="--", linewidth=1)
        ax.annotate(
            f"best h={best.hmean:.3f} @ {best.threshold:.3f}",
            xy=(best.threshold, best.hmean),
            xytext=(5, 5),
            textcoords="offset points",
            fontsize=8,
        )
    ax.set_xlabel("score threshold")
    ax.set_ylabel("metric")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(loc="lower left", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def render_instability_figure(reports: Sequence[InstabilityReport], path: str | Path) -> None:
    """Flip rates and target shifts per ordering protocol."""
    names = [r.protocol for r in reports]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    xs = range(len(names))
    ax1.bar(xs, [r.flip_rate for r in reports], color="#d62728")
    ax1.set_xticks(list(xs), names, rotation=30, ha="right", fontsize=8)
    ax1.set_ylabel("flip rate")
    ax1.set_ylim(0.0, 1.05)
    ax1.grid(True, axis="y", alpha=0.3)
    width = 0.38
    ax2.bar([x - width / 2 for x in xs], [r.mean_target_shift for r in reports],
            width=width, label="mean shift", color="#1f77b4")
    ax2.bar([x + width / 2 for x in xs], [r.max_target_shift for r in reports],
            width=width, label="max shift", color="#ff7f0e")
    ax2.set_xticks(list(xs), names, rotation=30, ha="right", fontsize=8)
    ax2.set_ylabel("target shift (px)")
    ax2.set_yscale("symlog", linthresh=1.0)
    ax2.legend(fontsize=8)
    ax2.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
