"""Bar charts of evaluation reports, rendered off-screen to PNG files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evaluation import SLICES, MetricsReport  # noqa: E402

_TITLES = {"accuracy": "Accuracy", "auc": "AUC", "mae": "MAE", "rmse": "RMSE"}


def plot_report(report: MetricsReport, path, title: str = "") -> Path:
    """One panel per metric, bars grouped by prediction point, one colour per model.

    Metadata that would vary between runs is stripped, so identical reports
    give identical files.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    metrics = report.metric_names
    fig, axes = plt.subplots(1, len(metrics), figsize=(5 * len(metrics), 4.0), dpi=100)
    x = np.arange(len(SLICES))
    width = 0.8 / max(1, len(report.rows))
    for ax, metric in zip(np.atleast_1d(axes), metrics):
        for j, row in enumerate(report.rows):
            vals = [report.value(row.name, s, metric) for s in SLICES]
            heights = [np.nan if v is None else v for v in vals]
            ax.bar(x + (j - (len(report.rows) - 1) / 2) * width, heights, width, label=row.name)
        label = _TITLES[metric]
        if metric in ("mae", "rmse"):
            label += f" ({report.unit})"
        ax.set_ylabel(label)
        ax.set_xticks(x, SLICES)
        if metric in ("accuracy", "auc"):
            ax.set_ylim(0, 1.05)
        ax.grid(axis="y", alpha=0.3)
    handles, labels = np.atleast_1d(axes)[0].get_legend_handles_labels()
    fig.legend(handles, labels, loc="lower center", ncol=len(labels), fontsize="small", frameon=False)
    if title:
        fig.suptitle(title)
    fig.tight_layout(rect=(0, 0.08, 1, 1))
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
    return path
