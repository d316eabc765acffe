"""Rendering of benchmark reports as figures."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import PrecisionReport

_METHOD_LABELS = {
    "bgm": "Behavior graph matching",
    "popularity": "Popularity",
    "knn": "Cross-domain KNN",
}


def render_precision_figure(report: PrecisionReport, path: str) -> None:
    """Draw mean precision as grouped bars (one group per list length N,
    one bar per method) and write the figure to path."""
    methods = sorted(report.aggregates)
    n_values = sorted(next(iter(report.aggregates.values()))) if methods else []
    if not methods or not n_values:
        raise ValueError("report holds no aggregate precision values")

    fig, ax = plt.subplots(figsize=(8, 4.5))
    group_width = 0.8
    bar_width = group_width / len(methods)
    for offset, method in enumerate(methods):
        positions = [
            i - group_width / 2 + bar_width * (offset + 0.5)
            for i in range(len(n_values))
        ]
        heights = [report.aggregates[method][n] for n in n_values]
        ax.bar(
            positions,
            heights,
            width=bar_width * 0.95,
            label=_METHOD_LABELS.get(method, method),
        )
    ax.set_xticks(range(len(n_values)))
    ax.set_xticklabels([str(n) for n in n_values])
    ax.set_xlabel("Recommendation list length N")
    ax.set_ylabel("Mean precision")
    ax.set_title("Precision by method and list length")
    ax.set_ylim(bottom=0.0)
    ax.legend()
    ax.grid(axis="y", linestyle=":", alpha=0.5)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": "bgm"})
    plt.close(fig)
