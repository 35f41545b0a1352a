"""NMSE-versus-ADC-resolution figures rendered next to the CSV output."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

from .config import INF  # noqa: E402

STYLE = {
    "font.family": "serif",
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "lines.linewidth": 1.4,
    "lines.markersize": 5,
}

_MARKERS = ["o", "s", "^", "D", "v", "x"]
_TITLES = {"qpsk": "QPSK", "16qam": "16-QAM"}


def figsize(scale: float = 1.0):
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    width = 5.0 * scale
    return width, width * golden


def _frt_label(b_frt) -> str:
    return r"$b_{\rm frt}=\infty$" if b_frt == INF else rf"$b_{{\rm frt}}={int(b_frt)}$"


def plot_nmse(rows, modulation: str, path) -> Path:
    """Proposed (solid) and benchmark (dashed) NMSE in dB against b_adc."""
    rows = [r for r in rows if r.modulation == modulation]
    if not rows:
        raise ValueError(f"no rows for modulation {modulation!r}")
    frts = list(dict.fromkeys(r.b_frt for r in rows))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize())
        for i, b_frt in enumerate(frts):
            color = f"C{i}"
            for scheme, ls in (("proposed", "-"), ("benchmark", "--")):
                pts = sorted((r.b_adc, r.nmse) for r in rows
                             if r.b_frt == b_frt and r.scheme == scheme)
                xs = [p[0] for p in pts]
                ys = [10 * math.log10(p[1]) if p[1] > 0 else float("nan") for p in pts]
                ax.plot(xs, ys, ls, color=color, marker=_MARKERS[i % len(_MARKERS)],
                        mfc="none" if scheme == "benchmark" else color,
                        label=f"{scheme.capitalize()}, {_frt_label(b_frt)}")
        ax.set_xlabel(r"ADC resolution $b_{\rm ADC}$ [bits]")
        ax.set_ylabel("NMSE [dB]")
        ax.set_title(_TITLES.get(modulation, modulation))
        ax.xaxis.set_major_locator(MaxNLocator(integer=True))
        ax.grid(True, alpha=0.3)
        ax.legend(ncol=2, frameon=False)
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path, dpi=150)
        plt.close(fig)
    return path


def render_figures(result, out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mods = list(dict.fromkeys(r.modulation for r in result.rows))
    return [plot_nmse(result.rows, m, out / f"nmse_{m}.png") for m in mods]
