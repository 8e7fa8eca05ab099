"""Figure rendering for emitted experiment data.

Rendering is an optional companion to the delimited outputs: every plot is
drawn from the same series that go into the CSV files.  PNG metadata is
stripped of creation dates so a given configuration and seed reproduce the
image byte for byte.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_series"]


def render_series(
    path,
    x,
    series: dict,
    xlabel: str = "t",
    ylabel: str = "value",
    logy: bool = False,
    title: str | None = None,
):
    """Render named series over a common abscissa to a PNG file.

    Parameters
    ----------
    path : str or Path
        Output PNG path.
    x : ndarray
        Common abscissa.
    series : dict
        Mapping label -> ndarray of values (same length as ``x``).
    logy : bool
        Log-scale y axis (used for error curves).
    """
    x = np.asarray(x, dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=120)
    for label, values in series.items():
        values = np.asarray(values, dtype=float)
        if logy:
            values = np.maximum(np.abs(values), 1e-300)
        ax.plot(x, values, label=label, linewidth=1.4)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    if series:
        ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    return path
