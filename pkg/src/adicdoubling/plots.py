"""Figure rendering for scan and diagnostic reports.

Figures are a convenience companion to the CSV output: floats appear
here and nowhere else in the package.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from fractions import Fraction  # noqa: E402

from .measures import DoublingReport, MeasureTree  # noqa: E402


def save_scan_figure(report: DoublingReport, path: str) -> None:
    """Worst adjacent-pair ratio per scale level, one line per stage."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    by_stage: dict[int, list[tuple[int, float]]] = {}
    for alpha, level, ratio in report.ratio_rows:
        by_stage.setdefault(alpha, []).append((level, float(Fraction(ratio))))
    for alpha, rows in sorted(by_stage.items()):
        rows.sort()
        ax.semilogy([lvl for lvl, _ in rows], [r for _, r in rows], marker=".",
                    label=f"stage {alpha}")
    ax.set_xlabel("scale level")
    ax.set_ylabel("worst adjacent-pair ratio")
    ax.legend(fontsize=7, ncol=2)
    ax.grid(True, alpha=0.3)
    fig.savefig(path, bbox_inches="tight", dpi=120)
    plt.close(fig)


def save_stage_figure(report: DoublingReport, path: str) -> None:
    """Per-stage worst ratio against the stage index."""
    fig, ax = plt.subplots(figsize=(6, 4))
    alphas = [s.alpha for s in report.per_stage]
    ratios = [float(s.ratio) for s in report.per_stage]
    ax.semilogy(alphas, ratios, marker="o", label="worst adjacent pair")
    for sib in report.siblings:
        ax.semilogy(
            [alpha for alpha, _ in sib.per_stage],
            [float(r) for _, r in sib.per_stage],
            marker="s",
            linestyle="--",
            label=f"base-{sib.base} sibling worst",
        )
    ax.set_xlabel("stage alpha")
    ax.set_ylabel("mass ratio")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.savefig(path, bbox_inches="tight", dpi=120)
    plt.close(fig)


def save_density_figure(tree: MeasureTree, path: str, stage_index: int = -1) -> None:
    """Step plot of the density across the chosen stage's anchor."""
    entry = tree.entries[stage_index]
    pieces = tree.pieces(entry.anchor.as_plain())
    fig, ax = plt.subplots(figsize=(7, 4))
    left0 = float(entry.anchor.left)
    width = float(entry.anchor.length)
    for piece, density in pieces:
        xs = [(float(piece.left) - left0) / width, (float(piece.right) - left0) / width]
        ax.semilogy(xs, [float(density)] * 2, color="tab:blue")
    ax.set_xlabel(f"position within the stage {entry.alpha} anchor (rescaled)")
    ax.set_ylabel("density")
    ax.grid(True, alpha=0.3)
    fig.savefig(path, bbox_inches="tight", dpi=120)
    plt.close(fig)


def save_diag_figure(rows: list[tuple[float, float, float]], ylabel: str, path: str) -> None:
    """Interval midpoints against enclosure bounds for a diagnostic run."""
    fig, ax = plt.subplots(figsize=(7, 4))
    mids = [m for m, _, _ in rows]
    los = [lo for _, lo, _ in rows]
    his = [hi for _, _, hi in rows]
    ax.plot(mids, los, ".", color="tab:blue", label="lower")
    ax.plot(mids, his, ".", color="tab:orange", label="upper", markersize=3)
    ax.set_xlabel("interval midpoint")
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.savefig(path, bbox_inches="tight", dpi=120)
    plt.close(fig)
