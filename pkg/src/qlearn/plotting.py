"""Optional figures for harness reports (rendered to files, never shown)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _num(value):
    try:
        return float(value)
    except (TypeError, ValueError):
        return None


def render_figures(report, directory: str) -> list[str]:
    """Write one PNG per report; returns the written paths."""
    os.makedirs(directory, exist_ok=True)
    if report.kind == "pac-formulas":
        return [_pac_figure(report, directory)]
    return [_query_figure(report, directory)]


def _query_figure(report, directory: str) -> str:
    labels, quantum, classical = [], [], []
    for row in report.rows:
        q, c = _num(row["q_med"]), _num(row["c_med"])
        if q is None and c is None:
            continue
        labels.append(f"{row['experiment']}\n{row['class_spec']}\n{row['learner']}")
        quantum.append(q or 0.0)
        classical.append(c or 0.0)
    fig, ax = plt.subplots(figsize=(max(6, 0.9 * len(labels) + 2), 4.5))
    xs = range(len(labels))
    ax.bar([x - 0.2 for x in xs], quantum, width=0.4, label="quantum (median)")
    ax.bar([x + 0.2 for x in xs], classical, width=0.4, label="classical (median)")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("queries")
    positive = [v for v in quantum + classical if v > 0]
    if positive and max(positive) > 50 * min(positive):
        ax.set_yscale("symlog")
    ax.legend()
    ax.set_title(f"{report.kind}: median query counts")
    fig.tight_layout()
    path = os.path.join(directory, f"{report.kind}.png")
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def _pac_figure(report, directory: str) -> str:
    fig, ax = plt.subplots(figsize=(5, 5))
    by_id: dict[str, tuple[list, list]] = {}
    for row in report.rows:
        xs, ys = by_id.setdefault(row["formula_id"], ([], []))
        xs.append(row["closed_form"])
        ys.append(row["numeric"])
    for fid, (xs, ys) in sorted(by_id.items()):
        ax.scatter(xs, ys, label=fid, s=18)
    lo = min(min(xs) for xs, _ in by_id.values())
    ax.plot([lo, 1], [lo, 1], color="grey", lw=0.8)
    ax.set_xlabel("closed form")
    ax.set_ylabel("explicit state computation")
    ax.legend()
    ax.set_title("formula vs numeric")
    fig.tight_layout()
    path = os.path.join(directory, "pac-formulas.png")
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path
