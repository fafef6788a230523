"""Figure rendering for the CLI reports.

Everything draws onto the non-interactive Agg backend and writes PNG files;
nothing is ever shown on screen.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GOLDEN = (math.sqrt(5) - 1.0) / 2.0

RC = {
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.titlesize": 11,
    "legend.fontsize": 9,
    "lines.linewidth": 1.3,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
}


def new_figure(width=6.0, height=None):
    height = height or width * GOLDEN
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(width, height))
    return fig, ax


def save(fig, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with plt.rc_context(RC):
        fig.tight_layout()
        fig.savefig(path)
    plt.close(fig)
    return path


def laser_curve(pump, linear, shg, path, threshold=None):
    fig, ax = new_figure()
    ax.plot(pump, np.asarray(linear) * 1e3, label="linear model")
    if shg is not None:
        ax.plot(pump, np.asarray(shg) * 1e3, "--", label="intracavity SHG model")
    if threshold is not None:
        ax.axvline(threshold, color="0.6", lw=0.8)
    ax.set_xlabel("pump power on rod (W)")
    ax.set_ylabel("green output (mW)")
    ax.legend()
    return save(fig, path)


def cavity_profile(positions, radii, path, labels=None):
    fig, ax = new_figure()
    ax.plot(np.asarray(positions) * 1e3, np.asarray(radii) * 1e6)
    for x, name in (labels or {}).items():
        ax.axvline(x * 1e3, color="0.6", lw=0.8)
        ax.annotate(name, (x * 1e3, ax.get_ylim()[1]), va="top", fontsize=8)
    ax.set_xlabel("position along round trip (mm)")
    ax.set_ylabel("beam radius (um)")
    return save(fig, path)


def squeezing_spectrum(freq, curves, path):
    """``curves`` maps a legend label to values in dB relative to shot noise."""
    fig, ax = new_figure()
    for label, db in curves.items():
        ax.plot(np.asarray(freq) / 1e6, db, label=label)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("analysis frequency (MHz)")
    ax.set_ylabel("noise relative to shot noise (dB)")
    ax.legend()
    return save(fig, path)


def bench_traces(freq, shot_db, diff_db, path):
    fig, ax = new_figure()
    ax.plot(np.asarray(freq) / 1e6, shot_db, label="(a) shot-noise limit")
    ax.plot(np.asarray(freq) / 1e6, diff_db, label="(b) intensity difference")
    ax.set_xlabel("frequency (MHz)")
    ax.set_ylabel("noise power (dB rel. shot)")
    ax.legend()
    return save(fig, path)


def lock_trace(t, detuning, path, fwhm=None):
    fig, ax = new_figure()
    ax.plot(t, np.asarray(detuning) / 1e3, lw=0.5)
    if fwhm is not None:
        for s in (-1, 1):
            ax.axhline(s * fwhm / 50 / 1e3, color="r", lw=0.8, ls="--")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("cavity detuning (kHz)")
    return save(fig, path)


def sweep_curve(grid, values, optimum, path, xlabel="parameter", ylabel="objective"):
    fig, ax = new_figure()
    ax.plot(grid, values, ".-")
    ax.axvline(optimum, color="r", lw=0.8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return save(fig, path)
