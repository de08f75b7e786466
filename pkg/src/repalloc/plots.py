"""Line plots of run series.  matplotlib is imported lazily so the rest of
the package works without it."""

from __future__ import annotations

from pathlib import Path


def _pyplot():
    try:
        import matplotlib
    except ImportError as e:
        raise RuntimeError("plotting needs matplotlib (pip install 'repalloc[plot]')") from e
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_throughput(series: dict, path, title: str = "", warmup: int = 0) -> Path:
    """One line per label; ``series`` maps label -> per-iteration global throughput."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for label, y in series.items():
        ax.plot(range(1, len(y) + 1), y, lw=0.9, label=label)
    if warmup:
        ax.axvline(warmup, color="grey", ls=":", lw=0.8)
    ax.set_xlabel("iteration")
    ax.set_ylabel("global throughput (Mb/s)")
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_trajectory(traj, path, title: str = "") -> Path:
    """Probability of every action over time, one panel per player, plus the potential."""
    plt = _pyplot()
    n = len(traj.action_sets)
    fig, axes = plt.subplots(n + 1, 1, figsize=(6, 1.8 * (n + 1)), sharex=True)
    off = traj.offsets
    for k, acts in enumerate(traj.action_sets):
        ax = axes[k]
        for j, a in enumerate(acts):
            ax.plot(traj.times, traj.states[:, off[k] + j], label=str(a))
        ax.set_ylim(-0.05, 1.05)
        ax.set_ylabel(f"player {k}")
        ax.legend(frameon=False, fontsize=7, loc="right")
    axes[-1].plot(traj.times, traj.potential_series, color="k")
    axes[-1].set_ylabel("F")
    axes[-1].set_xlabel("time")
    if title:
        axes[0].set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
