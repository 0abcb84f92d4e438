"""Report figures written next to the JSON/CSV outputs."""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIG_RC = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
    "savefig.bbox": "tight",
}
CLUSTER_COLORS = {"A": "#1b7837", "N": "#999999"}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def switch_history(meta: dict, path) -> Path:
    with plt.rc_context(FIG_RC):
        fig, ax = plt.subplots(figsize=(4.5, 3))
        hist = meta.get("switch_history", [])
        ax.plot(range(1, len(hist) + 1), hist, marker="o", color="k")
        ax.set_xlabel("iteration")
        ax.set_ylabel("pairs switched")
        ax.set_yscale("symlog")
        ax.set_title(f"{meta.get('variant', '')}: {'converged' if meta.get('converged') else 'stopped at max iterations'}")
        return _save(fig, path)


def feature_distributions(pairs, path) -> Path:
    """Raw feature histograms of the final A and N clusters, one panel per feature."""
    names = ["msg_dist", "asker_next_dist", "mention_flag", "jaccard"]
    with plt.rc_context(FIG_RC):
        fig, axes = plt.subplots(1, len(names), figsize=(3 * len(names), 2.6))
        for ax, name in zip(axes, names):
            for cluster in ("N", "A"):
                vals = [p.raw[name] for p in pairs if p.assignment == cluster and name in p.raw]
                if not vals:
                    continue
                bins = np.linspace(0, 1, 21) if name == "jaccard" else np.arange(-0.5, max(vals) + 1.5)
                ax.hist(vals, bins=bins, alpha=0.6, density=True, color=CLUSTER_COLORS[cluster], label=cluster)
            ax.set_title(name)
        axes[0].legend(frameon=False)
        return _save(fig, path)


def scores(report: dict, path) -> Path:
    with plt.rc_context(FIG_RC):
        fig, ax = plt.subplots(figsize=(3.5, 3))
        keys = ["precision", "recall", "f_score"]
        ax.bar(keys, [report[k] for k in keys], color=["#4d4d4d", "#878787", "#1b7837"])
        for i, k in enumerate(keys):
            ax.text(i, report[k] + 0.02, f"{report[k]:.3f}", ha="center")
        ax.set_ylim(0, 1.1)
        ax.set_title(f"tp={report['tp']} fp={report['fp']} fn={report['fn']}")
        return _save(fig, path)


def user_activity(feed, path) -> Path:
    counts = sorted(Counter(m.author for m in feed).values(), reverse=True)
    with plt.rc_context(FIG_RC):
        fig, ax = plt.subplots(figsize=(4.5, 3))
        ax.bar(range(1, len(counts) + 1), counts, color="#4d4d4d")
        if counts:
            ax.axhline(float(np.median(counts)), color="#1b7837", ls="--", label="median")
            ax.legend(frameon=False)
        ax.set_xlabel("user rank")
        ax.set_ylabel("messages")
        return _save(fig, path)
