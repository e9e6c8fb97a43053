"""Rendering of plot-ready artifacts: every batch recipe writes its
delimited data files and a PNG rendering of the same data side by side.

All functions take already-computed data and a target path; nothing in
here runs simulations.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_profiles(z: np.ndarray, curves: dict[str, np.ndarray], path: str,
                  title: str = "", xlabel: str = "z") -> str:
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, values in curves.items():
        ax.plot(z, values, label=label)
    ax.set_xlabel(xlabel)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_field_snapshots(snapshots, path: str, title: str = "") -> str:
    """Density and polarity profiles of a continuum run over time."""
    fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    cmap = plt.get_cmap("viridis")
    n = len(snapshots)
    for i, st in enumerate(snapshots):
        color = cmap(i / max(n - 1, 1))
        axes[0].plot(st.grid.x, st.rho, color=color, lw=1)
        axes[1].plot(st.grid.x, st.a, color=color, lw=1)
    axes[0].set_ylabel("density")
    axes[1].set_ylabel("polarity")
    axes[1].set_xlabel("x")
    if title:
        axes[0].set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_particle_kymograph(snapshots, path: str, title: str = "") -> str:
    """Cell trajectories coloured by polarity."""
    fig, ax = plt.subplots(figsize=(7, 4))
    ts = np.array([s.t for s in snapshots])
    xs = np.array([s.x for s in snapshots])
    cs = np.array([s.a for s in snapshots])
    for j in range(xs.shape[1]):
        ax.scatter(xs[:, j], ts, c=cs[:, j], s=1, cmap="coolwarm",
                   vmin=0.0, vmax=1.0)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_spectrum(curves, path: str, points: np.ndarray | None = None,
                  title: str = "") -> str:
    """Spectral curves (and an optional point cloud) in the complex
    plane."""
    fig, ax = plt.subplots(figsize=(6, 5))
    for curve in curves:
        ax.plot(curve.points.real, curve.points.imag, label=curve.label)
    if points is not None and len(points):
        ax.scatter(points.real, points.imag, s=6, color="red",
                   label="numeric", zorder=3)
    ax.axhline(0.0, color="0.8", lw=0.5)
    ax.axvline(0.0, color="0.8", lw=0.5)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_evans_image(scans: dict[str, list], path: str, title: str = "") -> str:
    """Image of contours under the Evans function.

    |D| spans many orders of magnitude along a contour, so each scan is
    normalised to unit modulus: the curve on the unit circle shows the
    phase, which is what the winding number counts.
    """
    fig, ax = plt.subplots(figsize=(6, 5))
    for label, rows in scans.items():
        d = np.array([m for _, m, _ in rows])
        d = d / np.abs(d)
        d = np.append(d, d[:1])
        ax.plot(d.real, d.imag, label=label)
    ax.scatter([0.0], [0.0], marker="+", color="k")
    ax.set_xlabel("Re D / |D|")
    ax.set_ylabel("Im D / |D|")
    ax.set_aspect("equal")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_threshold(table, path: str, title: str = "") -> str:
    """Threshold polarity estimate against grid resolution."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ns = [n for n, _ in table]
    alphas = [a for _, a in table]
    ax.plot(ns, alphas, marker="o")
    ax.set_xlabel("grid points")
    ax.set_ylabel("threshold polarity")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
