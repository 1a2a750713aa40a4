"""PNG figures written next to the CSV outputs (``--plot``)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_eigenvalues(lams: np.ndarray, path) -> Path:
    """One complex-plane panel per eigenvalue coordinate."""
    lams = np.atleast_2d(lams)
    k = lams.shape[1]
    fig, axes = plt.subplots(1, k, figsize=(4 * k, 3.6), squeeze=False)
    for j, ax in enumerate(axes[0]):
        ax.scatter(lams[:, j].real, lams[:, j].imag, s=14)
        ax.set_xlabel(f"Re lambda_{j + 1}")
        ax.set_ylabel(f"Im lambda_{j + 1}")
        ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_by_norm(values: dict[str, np.ndarray], path, ylabel: str, threshold=None) -> Path:
    """Log-scale series against eigenpair rank (ordered by ``||lambda||``)."""
    fig, ax = plt.subplots(figsize=(6, 3.6))
    for label, v in values.items():
        v = np.asarray(v, dtype=float)
        ax.semilogy(np.arange(1, v.size + 1), v, marker="o", ms=3, lw=0.8, label=label)
    if threshold is not None:
        ax.axhline(threshold, color="k", ls="--", lw=0.8)
    ax.set_xlabel("eigenpair (ordered by norm)")
    ax.set_ylabel(ylabel)
    if len(values) > 1:
        ax.legend()
    ax.grid(alpha=0.3, which="both")
    return _save(fig, path)


def plot_kappa_traces(traces: dict[tuple, list[tuple[float, float]]], path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.6))
    for trace in traces.values():
        t, kappa = zip(*trace)
        ax.semilogy(t, kappa, lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("kappa along path")
    ax.grid(alpha=0.3, which="both")
    return _save(fig, path)


def plot_paths(traces: dict[tuple, np.ndarray], path) -> Path:
    """Real part of the first eigenvalue copy's first coordinate against ``t``."""
    fig, ax = plt.subplots(figsize=(6, 3.6))
    for rows in traces.values():
        ax.plot(rows[:, 0].real, rows[:, 1].real, lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("Re lambda_11(t)")
    ax.grid(alpha=0.3)
    return _save(fig, path)
