"""Figure rendering for the CLI report path (written next to the CSV/JSON).

All functions render to a file with the Agg backend; nothing opens a
window.  Figures mirror the delimited outputs: per-frame MSE, smoothed
BER with the FEC threshold, BER vs Eb/N0, and the complexity bars.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import BER_THRESHOLD, RunResult, smooth_mse

__all__ = ["plot_run_mse", "plot_run_ber", "plot_ber_table", "plot_complexity"]


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_run_mse(result: RunResult, path) -> None:
    """Training (pilot) and inference (data) MSE per frame, raw and smoothed."""
    window = int(result.config.get("smoothing_window", 20))
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for kind, color, label in (("pilot", "tab:orange", "training"),
                               ("data", "tab:blue", "inference")):
        recs = [r for r in result.records if r.kind == kind]
        if not recs:
            continue
        frames = [r.index for r in recs]
        mse = [r.mse_db for r in recs]
        ax.plot(frames, mse, color=color, alpha=0.25, linewidth=0.7)
        ax.plot(frames, smooth_mse(mse, window), color=color, linewidth=1.5,
                label=f"{label} (smoothed, window {window})")
    ax.set_xlabel("frame")
    ax.set_ylabel("MSE [dB]")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper right")
    arch = result.config.get("architecture", "?")
    ax.set_title(f"{arch} @ {result.config.get('ebn0_db', '?')} dB Eb/N0, seed {result.seed}")
    _save(fig, path)


def plot_run_ber(result: RunResult, path, threshold: float = BER_THRESHOLD) -> None:
    """Smoothed data-frame BER against the FEC threshold."""
    window = int(result.config.get("smoothing_window", 20))
    recs = result.data_records()
    if not recs:
        return
    frames = np.array([r.index for r in recs])
    ber = np.array([r.ber for r in recs])
    smoothed = np.array([np.mean(ber[max(0, i - window + 1):i + 1]) for i in range(len(ber))])
    fig, ax = plt.subplots(figsize=(8, 4.5))
    floor = max(1e-6, smoothed[smoothed > 0].min() / 2 if (smoothed > 0).any() else 1e-6)
    ax.semilogy(frames, np.maximum(ber, floor), alpha=0.25, linewidth=0.7, color="tab:blue")
    ax.semilogy(frames, np.maximum(smoothed, floor), linewidth=1.5, color="tab:blue",
                label=f"smoothed BER (window {window})")
    ax.axhline(threshold, color="tab:red", linestyle="--", label=f"threshold {threshold:g}")
    if result.convergence_frame is not None:
        ax.axvline(result.convergence_frame, color="tab:green", linestyle=":",
                   label=f"converged at frame {result.convergence_frame}")
    ax.set_xlabel("frame")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="upper right")
    _save(fig, path)


def plot_ber_table(rows, path) -> None:
    """BER vs Eb/N0, one curve per architecture."""
    fig, ax = plt.subplots(figsize=(7, 5))
    archs = sorted({row["architecture"] for row in rows})
    for arch in archs:
        pts = sorted((r["ebn0_db"], r["mean_ber"]) for r in rows
                     if r["architecture"] == arch and r["mean_ber"] is not None)
        if not pts:
            continue
        x, y = zip(*pts)
        ax.semilogy(x, np.maximum(np.asarray(y, dtype=float), 1e-7), marker="o", label=arch)
    ax.axhline(BER_THRESHOLD, color="tab:red", linestyle="--", label=f"threshold {BER_THRESHOLD:g}")
    ax.set_xlabel("Eb/N0 [dB]")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    _save(fig, path)


def plot_complexity(counts, path) -> None:
    """Horizontal train/infer real-multiplication bars, sorted by training cost.

    `counts` maps architecture -> ComplexityCount.
    """
    order = sorted(counts, key=lambda a: counts[a].train_real_mults)
    y = np.arange(len(order))
    train = [counts[a].train_real_mults for a in order]
    infer = [counts[a].infer_real_mults for a in order]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.barh(y + 0.2, train, height=0.4, color="tab:orange", label="training")
    ax.barh(y - 0.2, infer, height=0.4, color="tab:blue", label="inference")
    for yi, value in list(zip(y + 0.2, train)) + list(zip(y - 0.2, infer)):
        ax.annotate(f"{value:,}", (value, yi), va="center", ha="left", fontsize=8)
    ax.set_yticks(y, order)
    ax.set_xlabel("real multiplications per iteration")
    ax.margins(x=0.18)
    ax.grid(True, axis="x", alpha=0.3)
    ax.legend(loc="lower right")
    _save(fig, path)
