"""Figure rendering for detection runs and p-value studies.

Figures are always rendered to files (the Agg backend is forced), as a
companion to the delimited outputs: the same numbers that land in the
JSON/CSV reports drive the plots.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .multiwindow import DetectionSet

__all__ = ["detection_figure", "pvalue_cdf_figure", "save_figure"]


def detection_figure(ds: DetectionSet, title: str | None = None):
    """Detection map: per-window p-values on top, selected windows below.

    The upper panel shows ``-log10`` of both one-sided p-values against
    the window center with the BH selection threshold; the lower panel
    marks each detection at +1 or -1 according to its sign.
    """
    centers = np.array([w.window.center for w in ds.windows])
    p_plus = np.array([w.p_plus for w in ds.windows])
    p_minus = np.array([w.p_minus for w in ds.windows])

    fig, (ax_p, ax_d) = plt.subplots(
        2, 1, sharex=True, figsize=(8, 5), height_ratios=[3, 1]
    )
    ax_p.plot(centers, -np.log10(p_plus), color="tab:red", lw=1.0, label="excess (p+)")
    ax_p.plot(centers, -np.log10(p_minus), color="tab:blue", lw=1.0, label="deficit (p-)")
    if ds.threshold is not None:
        ax_p.axhline(
            -np.log10(ds.threshold), color="k", ls="--", lw=0.8,
            label=f"BH threshold (k={ds.k})",
        )
    ax_p.set_ylabel("-log10 p")
    ax_p.legend(loc="upper right", fontsize=8)
    if title:
        ax_p.set_title(title)

    for det in ds.detections:
        color = "tab:red" if det.epsilon > 0 else "tab:blue"
        ax_d.plot([det.window.a, det.window.b], [det.epsilon] * 2, color=color, lw=3)
    ax_d.set_ylim(-1.6, 1.6)
    ax_d.set_yticks([-1, 0, 1])
    ax_d.axhline(0.0, color="0.8", lw=0.5)
    ax_d.set_ylabel("detection")
    ax_d.set_xlabel("time (s)")
    fig.tight_layout()
    return fig


def pvalue_cdf_figure(rows: list[dict], title: str | None = None):
    """Empirical CDFs of the p-values in ``rows``, one curve per method.

    The right panel zooms into p <= 0.1 where test levels are read off.
    """
    methods = sorted({row["method"] for row in rows})
    fig, (ax_full, ax_zoom) = plt.subplots(1, 2, figsize=(9, 4))
    for method in methods:
        p = np.sort([row["p_upper"] for row in rows if row["method"] == method])
        ecdf = np.arange(1, p.size + 1) / p.size
        for ax in (ax_full, ax_zoom):
            ax.step(p, ecdf, where="post", label=method)
    for ax, lim in ((ax_full, 1.0), (ax_zoom, 0.1)):
        ax.plot([0, 1], [0, 1], color="0.7", ls=":", lw=0.8)
        ax.set_xlim(0, lim)
        ax.set_xlabel("p-value")
    ax_full.set_ylim(0, 1.0)
    ax_zoom.set_ylim(0, 0.2)
    ax_full.set_ylabel("empirical CDF")
    ax_full.legend(fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return fig


def save_figure(fig, path, dpi: int = 150) -> None:
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
