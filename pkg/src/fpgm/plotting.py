"""Figure rendering for the CLI report paths (radial signature plots)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def plot_signature_summaries(summaries, out_path, title=None, logy=False):
    """Render mean curves with std bands for one or more SignatureSummary."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for summary in summaries:
        radii = range(len(summary.mean))
        ax.plot(radii, summary.mean, label=f"{summary.label} (n={summary.n})")
        ax.fill_between(
            radii,
            summary.mean - summary.std,
            summary.mean + summary.std,
            alpha=0.25,
        )
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("frequency radius")
    ax.set_ylabel("mean amplitude")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150, metadata={"Software": None})
    plt.close(fig)
