"""Report figures, rendered headless to PNG."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
    "savefig.dpi": 120,
}


def _save(fig, path):
    # fixed metadata keeps reruns byte-identical
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)


def silhouette_curve(path, scores, best_k, title=""):
    """Mean silhouette against k with the chosen k marked."""
    ks = sorted(scores)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 2.8))
        ax.plot(ks, [scores[k] for k in ks], marker="o", ms=3, lw=1, color="0.25")
        ax.axvline(best_k, color="tab:red", lw=0.8, ls="--")
        ax.annotate(f"k={best_k}\n{scores[best_k]:.4f}", (best_k, scores[best_k]),
                    xytext=(4, -18), textcoords="offset points", color="tab:red")
        ax.set_xlabel("number of clusters")
        ax.set_ylabel("mean silhouette")
        ax.set_xticks(ks)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        _save(fig, path)


def decision_chart(path, cluster_means, cluster_sizes, threshold, title=""):
    """Cluster grand means against the subset decision line."""
    means = np.asarray(cluster_means, dtype=float)
    ids = np.arange(len(means))
    colors = np.where(means >= threshold, "tab:red", "tab:blue")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 2.8))
        ax.bar(ids, means, color=colors, width=0.6)
        for i, (m, n) in enumerate(zip(means, cluster_sizes)):
            ax.text(i, m, str(n), ha="center", va="bottom", fontsize=7)
        ax.axhline(threshold, color="k", lw=0.8, ls="--", label=f"decision line {threshold:.4f}")
        ax.set_xticks(ids)
        ax.set_xlabel("cluster")
        ax.set_ylabel("cluster mean")
        ax.set_ylim(0, max(1.0, float(means.max(initial=0)) * 1.15))
        ax.legend(loc="upper right", frameon=False)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        _save(fig, path)


def pattern_profile(path, stats):
    """Per-pattern means with STD bars, one series per subset."""
    from shillcure.features import FEATURES
    from shillcure.partitioning import duration_label

    keys = list(stats)
    x = np.arange(len(FEATURES))
    width = 0.8 / max(len(keys), 1)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 3))
        for j, k in enumerate(keys):
            st = stats[k]
            ax.bar(x + j * width, st.per_feature_mean, width, yerr=st.per_feature_std,
                   capsize=1.5, error_kw={"lw": 0.6}, label=duration_label(k))
        ax.set_xticks(x + width * (len(keys) - 1) / 2)
        ax.set_xticklabels([f.upper() for f in FEATURES])
        ax.set_ylabel("mean (STD bars)")
        ax.legend(ncol=len(keys), frameon=False, loc="upper left")
        fig.tight_layout()
        _save(fig, path)
