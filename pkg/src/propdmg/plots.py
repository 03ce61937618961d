"""SVG figures: spectra, loss curves, importance bars, band-width sweep.

Output is byte-stable: no date metadata and a fixed element-id salt.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .flightlog import atomic_write_text  # noqa: E402

_RC = {"svg.hashsalt": "propdmg", "svg.fonttype": "none", "figure.dpi": 100}


def _save(fig, path):
    buf = io.StringIO()
    with matplotlib.rc_context(_RC):
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": "propdmg"})
    plt.close(fig)
    atomic_write_text(path, buf.getvalue())
    return path


def _figure(title, xlabel, ylabel, size=(7, 4)):
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=size)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return fig, ax


def spectrum_svg(path, freqs, power, title="power spectrum", labels=None):
    fig, ax = _figure(title, "frequency [Hz]", "power")
    power = np.atleast_2d(power)
    for i, p in enumerate(power):
        ax.semilogy(freqs, np.maximum(p, 1e-18), lw=1.0, label=None if labels is None else labels[i])
    if labels is not None:
        ax.legend(fontsize=7)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def loss_svg(path, histories: dict, title="training loss (MSE)"):
    fig, ax = _figure(title, "epoch", "MSE")
    for name, h in histories.items():
        ax.semilogy(np.arange(1, len(h) + 1), h, label=name)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def importance_svg(path, importance, k=15):
    top = importance.top(k)
    fig, ax = _figure(f"permutation importance ({importance.metric})", "mean degradation", "", size=(7, 5))
    names = [t[0] for t in top][::-1]
    ax.barh(np.arange(len(top)), [t[1] for t in top][::-1], xerr=[t[2] for t in top][::-1], color="#4c72b0")
    ax.set_yticks(np.arange(len(top)))
    ax.set_yticklabels(names, fontsize=7)
    fig.tight_layout()
    return _save(fig, path)


def bandstudy_svg(path, table):
    cols = table.columns
    bw = [r[0] for r in table.rows]
    fig, ax = _figure("damage-type accuracy vs band width", "band width [Hz]", "accuracy [%]")
    for j, name in enumerate(cols):
        if name.endswith("_acc_pct"):
            ax.plot(bw, [r[j] for r in table.rows], marker="o", label=name.split("_")[0])
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, path)
