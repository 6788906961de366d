"""Figure rendering for sweep reports.

Renders mean-ARI curves with standard-error bars for the fitted model
and the SVD baseline, one panel per label side, to a PNG next to the
tabular output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .sweep import SweepReport

_PARAM_LABEL = {
    "bipartite": "density factor r",
    "undirected": "homophily factor h",
}

_PANELS = (
    ("row labels", "vem_row_ari", "svd_row_ari"),
    ("column labels", "vem_col_ari", "svd_col_ari"),
)


def plot_sweep(report: SweepReport, path) -> None:
    """Two-panel ARI-versus-parameter figure with error bars."""
    x = list(report.grid)
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6), sharey=True)
    for ax, (title, vem_col, svd_col) in zip(axes, _PANELS):
        for column, label, marker in ((vem_col, "variational EM", "o"), (svd_col, "SVD baseline", "s")):
            means = [s.means[column] for s in report.summaries]
            ses = [s.standard_errors[column] for s in report.summaries]
            ax.errorbar(x, means, yerr=ses, marker=marker, capsize=3, label=label)
        ax.set_title(title)
        ax.set_xlabel(_PARAM_LABEL.get(report.kind, "parameter"))
        ax.set_ylim(-0.05, 1.05)
        ax.grid(True, alpha=0.3)
    axes[0].set_ylabel("mean ARI")
    axes[0].legend(loc="lower right")
    fig.suptitle(f"{report.kind} sweep, {report.replicates} replicates per point")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
