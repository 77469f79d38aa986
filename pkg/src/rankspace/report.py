"""Plot emission: SVG figures plus delimited-text twins of every plotted value."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .draws import PosteriorDraws
from .summaries import step_sizes

TRACE_POINTS = 2000


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def plot_trajectories(draws: PosteriorDraws, out_dir) -> tuple[Path, Path]:
    """Posterior-mean trajectory per actor; triangle start, circle end."""
    out_dir = Path(out_dir)
    X_hat = draws.mean_positions()  # (T, n, p)
    T, n, _ = X_hat.shape
    fig, ax = plt.subplots(figsize=(7, 7))
    cmap = plt.get_cmap("tab20")
    for i in range(n):
        color = cmap(i % 20)
        ax.plot(X_hat[:, i, 0], X_hat[:, i, 1], "-", color=color, lw=1.0)
        ax.plot(X_hat[0, i, 0], X_hat[0, i, 1], "^", color=color, ms=6)
        ax.plot(X_hat[-1, i, 0], X_hat[-1, i, 1], "o", color=color, ms=6)
        ax.annotate(str(i + 1), X_hat[-1, i, :2], fontsize=8)
    ax.set_xlabel("dimension 1")
    ax.set_ylabel("dimension 2")
    ax.set_title("Posterior mean latent trajectories")
    svg = out_dir / "trajectories.svg"
    fig.savefig(svg)
    plt.close(fig)
    rows = [
        [t + 1, i + 1] + [float(X_hat[t, i, c]) for c in range(X_hat.shape[2])]
        for t in range(T) for i in range(n)
    ]
    csv_path = out_dir / "trajectories.csv"
    dims = [f"x{c + 1}" for c in range(X_hat.shape[2])]
    _write_csv(csv_path, ["t", "actor"] + dims, rows)
    return svg, csv_path


def plot_precisions(draws: PosteriorDraws, out_dir) -> tuple[Path, Path]:
    """Posterior means and 95% credible intervals of the transition precisions."""
    out_dir = Path(out_dir)
    tau = draws.tau  # (S, T-1)
    times = np.arange(2, draws.T + 1)
    mean = tau.mean(axis=0)
    lo = np.quantile(tau, 0.025, axis=0)
    hi = np.quantile(tau, 0.975, axis=0)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.errorbar(times, mean, yerr=[mean - lo, hi - mean], fmt="o-", capsize=3)
    ax.set_xlabel("time")
    ax.set_ylabel("precision")
    ax.set_title("Transition precision estimates with 95% credible intervals")
    svg = out_dir / "precisions.svg"
    fig.savefig(svg)
    plt.close(fig)
    csv_path = out_dir / "precisions.csv"
    _write_csv(csv_path, ["t", "mean", "low95", "high95"],
               [[int(t), float(m), float(a), float(b)]
                for t, m, a, b in zip(times, mean, lo, hi)])
    return svg, csv_path


def plot_traces(traces: dict[str, np.ndarray], out_dir) -> tuple[Path, Path]:
    """Trace plots for theta and selected precisions, thinned for plotting."""
    out_dir = Path(out_dir)
    tau = traces["tau"]
    n_iter = tau.shape[0]
    m = tau.shape[1]
    series = {
        "theta": traces["theta"],
        "tau0": traces["tau0"],
        "tau1": traces["tau1"],
        "tau2": tau[:, 0],
        f"tau{(m + 3) // 2}": tau[:, (m - 1) // 2],
        f"tau{m + 1}": tau[:, m - 1],
    }
    stride = max(1, n_iter // TRACE_POINTS)
    idx = np.arange(0, n_iter, stride)
    fig, axes = plt.subplots(2, 3, figsize=(12, 6))
    for ax, (name, values) in zip(axes.ravel(), series.items()):
        ax.plot(idx, values[idx], lw=0.5)
        ax.set_title(name)
        ax.set_xlabel("iteration")
    fig.tight_layout()
    svg = out_dir / "traces.svg"
    fig.savefig(svg)
    plt.close(fig)
    csv_path = out_dir / "traces.csv"
    names = list(series)
    _write_csv(csv_path, ["iteration"] + names,
               [[int(i)] + [float(series[name][i]) for name in names] for i in idx])
    return svg, csv_path


def plot_step_size_reach(draws: PosteriorDraws, out_dir) -> tuple[Path, Path]:
    """Scatter of per-actor average step size against log posterior-mean reach."""
    out_dir = Path(out_dir)
    s = step_sizes(draws)
    log_r = np.log(draws.mean_reach())
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.scatter(log_r, s)
    for i in range(s.shape[0]):
        ax.annotate(str(i + 1), (log_r[i], s[i]), fontsize=8)
    ax.set_xlabel("log posterior mean reach")
    ax.set_ylabel("average step size")
    ax.set_title("Individual stability vs popularity")
    svg = out_dir / "stepsize_reach.svg"
    fig.savefig(svg)
    plt.close(fig)
    csv_path = out_dir / "stepsize_reach.csv"
    _write_csv(csv_path, ["actor", "log_reach", "step_size"],
               [[i + 1, float(log_r[i]), float(s[i])] for i in range(s.shape[0])])
    return svg, csv_path


def emit_report(draws: PosteriorDraws, traces: dict[str, np.ndarray], out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    paths.extend(plot_trajectories(draws, out_dir))
    paths.extend(plot_precisions(draws, out_dir))
    if traces:
        paths.extend(plot_traces(traces, out_dir))
    paths.extend(plot_step_size_reach(draws, out_dir))
    return paths
