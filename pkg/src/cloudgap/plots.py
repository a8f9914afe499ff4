"""Optional SVG plots rendered from the same numbers the CSV artifacts carry.

matplotlib is imported lazily so the core package works without it.
"""

from __future__ import annotations

from pathlib import Path


def _axes(title: str, xlabel: str, ylabel: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    # Suppress the embedded creation date so reruns emit identical SVG.
    fig.savefig(path, format="svg", metadata={"Date": None})
    import matplotlib.pyplot as plt

    plt.close(fig)


def plot_cdf(series: dict[str, list[tuple[float, float]]], path: str | Path,
             title: str = "CDF", xlabel: str = "km") -> Path:
    """Step CDFs from (value, cumulative fraction) breakpoints, one per label."""
    fig, ax = _axes(title, xlabel, "cumulative fraction")
    for label in sorted(series):
        pts = series[label]
        ax.step([p[0] for p in pts], [p[1] for p in pts], where="post", label=label)
    ax.legend()
    path = Path(path)
    _save(fig, path)
    return path


def plot_timeline(events: list[str], values: list[float], path: str | Path,
                  title: str, ylabel: str) -> Path:
    fig, ax = _axes(title, "launch event", ylabel)
    ax.plot(range(len(events)), values, marker="o")
    ax.set_xticks(range(len(events)))
    ax.set_xticklabels(events, rotation=45, ha="right", fontsize=7)
    fig.tight_layout()
    path = Path(path)
    _save(fig, path)
    return path


def plot_concentration_curves(curves: dict[str, list[tuple[float, float]]],
                              path: str | Path) -> Path:
    fig, ax = _axes("Concentration curves", "cumulative population share",
                    "cumulative access share")
    ax.plot([0, 1], [0, 1], linestyle="--", color="grey", label="equality")
    for label in sorted(curves):
        pts = curves[label]
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=label)
    ax.legend()
    path = Path(path)
    _save(fig, path)
    return path


def plot_pareto(candidates, path: str | Path) -> Path:
    """Coverage vs. index scatter with the front highlighted."""
    fig, ax = _axes("Candidate cities", "coverage (persons)", "concentration index")
    others = [c for c in candidates.candidates if c.evaluable]
    front_names = {c.name for c in candidates.front}
    xs = [c.coverage for c in others if c.name not in front_names]
    ys = [c.ci_if_selected for c in others if c.name not in front_names]
    ax.scatter(xs, ys, s=12, alpha=0.5, label="candidates")
    fx = [c.coverage for c in candidates.front]
    fy = [c.ci_if_selected for c in candidates.front]
    ax.scatter(fx, fy, s=30, color="red", label="pareto front")
    ax.legend()
    path = Path(path)
    _save(fig, path)
    return path
