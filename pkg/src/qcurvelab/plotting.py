"""Figure defaults and byte-stable SVG output.

Figures are built on ``matplotlib.figure.Figure`` directly, so nothing here
touches pyplot's global state or the interactive backend.
"""

from __future__ import annotations

import math

import matplotlib
from matplotlib.figure import Figure

GOLDEN = (math.sqrt(5) - 1.0) / 2.0

PUBLICATION_RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.linewidth": 0.6,
    "lines.linewidth": 1.0,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "xtick.top": True,
    "ytick.right": True,
    "legend.frameon": False,
    "savefig.bbox": "tight",
    # fixed ids and no timestamp keep the SVG bytes reproducible
    "svg.hashsalt": "qcurvelab",
    "svg.fonttype": "path",
}


def new_figure(width=3.4, height=None):
    height = width * GOLDEN if height is None else height
    with matplotlib.rc_context(PUBLICATION_RC):
        fig = Figure(figsize=(width, height))
        ax = fig.add_subplot(1, 1, 1)
    return fig, ax


def save_svg(fig, path):
    with matplotlib.rc_context(PUBLICATION_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})


def line_panel(curves, path, xlabel, ylabel, logx=True, logy=False, title=None):
    """One panel with a labelled line per (x, y, label) curve."""
    with matplotlib.rc_context(PUBLICATION_RC):
        fig, ax = new_figure()
        for x, y, label in curves:
            ax.plot(x, y, label=label)
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if curves and len(curves) <= 10:
            ax.legend(loc="best")
        save_svg(fig, path)
    return path
