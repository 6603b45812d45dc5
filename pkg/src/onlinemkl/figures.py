"""Matplotlib renderings of run telemetry, written next to the CSVs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_metric_curves(curves, path, ylabel):
    """One line per algorithm: running MSE or error versus slot."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, values in curves.items():
        values = np.asarray(values)
        ax.plot(np.arange(1, values.size + 1), values, label=label, linewidth=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_weight_trajectories(weights, labels, path, title):
    """Stacked view of normalized expert weights over the stream."""
    weights = np.asarray(weights)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ts = np.arange(1, weights.shape[0] + 1)
    for j, label in enumerate(labels):
        ax.plot(ts, weights[:, j], label=label, linewidth=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel("normalized weight")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_regret_trace(trace, path, title):
    """Regret and normalized regret for one algorithm."""
    ts = np.arange(1, trace.horizon + 1)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].plot(ts, trace.regret, linewidth=1.2)
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("regret(t)")
    axes[0].grid(True, alpha=0.3)
    axes[1].plot(ts, trace.regret / np.sqrt(ts), linewidth=1.2, color="tab:orange")
    check_ts = [t for t, _ in trace.checkpoints]
    check_vs = [v for _, v in trace.checkpoints]
    axes[1].plot(check_ts, check_vs, "ko", markersize=4)
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("regret(t) / sqrt(t)")
    axes[1].grid(True, alpha=0.3)
    fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
