"""Scalar quantizers: Lloyd-Max design, lookup and interval bounds."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtr, ndtri

MAX_ITERATIONS = 500
LEVEL_TOL = 1e-8


class QuantizerDesignError(ValueError):
    pass


@dataclass(frozen=True)
class ScalarQuantizer:
    """D = 2**bits levels with D-1 interior thresholds.

    Cell ``d`` (0-based) is ``[thresholds[d-1], thresholds[d])`` with the
    outer cells extending to -inf / +inf.
    """

    levels: np.ndarray
    thresholds: np.ndarray

    def __post_init__(self):
        if self.thresholds.size != self.levels.size - 1:
            raise ValueError("need exactly len(levels) - 1 thresholds")
        if np.any(np.diff(self.levels) <= 0) or np.any(np.diff(self.thresholds) <= 0):
            raise ValueError("levels and thresholds must be strictly increasing")

    @property
    def bits(self) -> int:
        return int(np.log2(self.levels.size))

    @property
    def lower_edges(self) -> np.ndarray:
        return np.concatenate([[-np.inf], self.thresholds])

    @property
    def upper_edges(self) -> np.ndarray:
        return np.concatenate([self.thresholds, [np.inf]])

    def cell_index(self, x) -> np.ndarray:
        # side="right": a sample sitting exactly on a threshold belongs to the upper cell
        return np.searchsorted(self.thresholds, np.asarray(x, dtype=float), side="right")

    def __call__(self, x) -> np.ndarray:
        return self.levels[self.cell_index(x)]

    def bounds(self, cells) -> tuple[np.ndarray, np.ndarray]:
        cells = np.asarray(cells)
        if cells.size and (cells.min() < 0 or cells.max() >= self.levels.size):
            raise ValueError("cell index out of range for this quantizer")
        return self.lower_edges[cells], self.upper_edges[cells]

    def scaled(self, factor: float) -> "ScalarQuantizer":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return ScalarQuantizer(self.levels * factor, self.thresholds * factor)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "level", "lower", "upper"])
            for d, (lv, lo, hi) in enumerate(zip(self.levels, self.lower_edges, self.upper_edges)):
                w.writerow([d + 1, repr(float(lv)), repr(float(lo)), repr(float(hi))])


@dataclass(frozen=True)
class QuantizedSample:
    value: float
    index: int  # 1-based, as in l_1 .. l_D
    lower: float
    upper: float


def quantize(q: ScalarQuantizer, x: float) -> QuantizedSample:
    d = int(q.cell_index(x))
    lo, hi = q.bounds(d)
    return QuantizedSample(float(q.levels[d]), d + 1, float(lo), float(hi))


def quantize_complex(q: ScalarQuantizer, v: np.ndarray):
    """Quantize real and imaginary parts independently.

    Returns ``(quantized, (re_lower, re_upper), (im_lower, im_upper))``.
    """
    v = np.asarray(v)
    cr = q.cell_index(v.real)
    ci = q.cell_index(v.imag)
    out = q.levels[cr] + 1j * q.levels[ci]
    return out, q.bounds(cr), q.bounds(ci)


def mean_square_distortion(q: ScalarQuantizer, samples) -> float:
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("need at least one sample")
    return float(np.mean((samples - q(samples)) ** 2))


def _symmetrize(levels: np.ndarray) -> np.ndarray:
    return 0.5 * (levels - levels[::-1])


def _rescue_empty(levels: np.ndarray, empty: np.ndarray) -> np.ndarray:
    """Move levels of empty cells to the midpoint of their neighbours."""
    out = levels.copy()
    D = levels.size
    for d in np.flatnonzero(empty):
        if 0 < d < D - 1:
            out[d] = 0.5 * (out[d - 1] + out[d + 1])
        elif d == 0:
            out[0] = out[1] - (out[2] - out[1] if D > 2 else 1.0)
        else:
            out[-1] = out[-2] + (out[-2] - out[-3] if D > 2 else 1.0)
    return out


def design_lloyd_max(samples, bits: int, max_iter: int = MAX_ITERATIONS,
                     tol: float = LEVEL_TOL) -> ScalarQuantizer:
    """Zero-symmetric Lloyd-Max quantizer trained on an empirical sample set.

    Training runs on the pooled set ``samples U -samples``. Levels are the
    cell centroids and thresholds the midpoints of adjacent levels.
    """
    if bits < 1:
        raise QuantizerDesignError("bits must be >= 1")
    D = 2 ** bits
    x = np.asarray(samples, dtype=float).ravel()
    pooled = np.sort(np.concatenate([x, -x]))
    if np.unique(pooled).size < D:
        raise QuantizerDesignError(f"need at least {D} distinct samples for a {bits}-bit design")
    csum = np.concatenate([[0.0], np.cumsum(pooled)])
    n = pooled.size

    # equal-probability initialization
    edges = np.linspace(0, n, D + 1).round().astype(int)
    levels = np.array([pooled[a:b].mean() if b > a else np.nan
                       for a, b in zip(edges[:-1], edges[1:])])
    levels = _symmetrize(levels)
    if np.any(np.diff(levels) <= 0):
        levels = np.linspace(-1, 1, D) * np.max(np.abs(pooled))

    for _ in range(max_iter):
        thr = 0.5 * (levels[1:] + levels[:-1])
        cut = np.concatenate([[0], np.searchsorted(pooled, thr, side="left"), [n]])
        counts = np.diff(cut)
        sums = csum[cut[1:]] - csum[cut[:-1]]
        empty = counts == 0
        new = np.where(empty, levels, sums / np.maximum(counts, 1))
        if empty.any():
            new = _rescue_empty(new, empty)
        new = np.sort(new)
        change = np.max(np.abs(new - levels))
        levels = new
        if change < tol:
            break

    levels = _symmetrize(levels)
    return ScalarQuantizer(levels=levels, thresholds=0.5 * (levels[1:] + levels[:-1]))


def _gaussian_centroids(thr: np.ndarray) -> np.ndarray:
    edges = np.concatenate([[-np.inf], thr, [np.inf]])
    pdf = np.exp(-0.5 * np.where(np.isfinite(edges), edges, 0.0) ** 2) / np.sqrt(2 * np.pi)
    pdf[~np.isfinite(edges)] = 0.0
    mass = np.diff(ndtr(edges))
    return (pdf[:-1] - pdf[1:]) / np.maximum(mass, 1e-300)


@lru_cache(maxsize=None)
def _unit_gaussian_table(bits: int, max_iter: int) -> ScalarQuantizer:
    D = 2 ** bits
    # start from the high-resolution optimal point density (pdf^(1/3), i.e. std sqrt(3));
    # an equal-probability start leaves the tails too sparse to converge at many bits
    edges = np.sqrt(3.0) * ndtri(np.linspace(0.0, 1.0, D + 1))
    levels = _gaussian_centroids(edges[1:-1])
    for _ in range(max_iter):
        new = _gaussian_centroids(0.5 * (levels[1:] + levels[:-1]))
        change = np.max(np.abs(new - levels))
        levels = new
        if change < LEVEL_TOL:
            break
    levels = _symmetrize(levels)
    return ScalarQuantizer(levels=levels, thresholds=0.5 * (levels[1:] + levels[:-1]))


def gaussian_lloyd_max(bits: int, std: float = 1.0, max_iter: int = MAX_ITERATIONS) -> ScalarQuantizer:
    """Lloyd-Max table for a zero-mean Gaussian of standard deviation ``std``."""
    return _unit_gaussian_table(int(bits), int(max_iter)).scaled(std)


def design_for_signal(components, bits: int, training: str = "empirical",
                      min_samples_per_level: int = 4) -> ScalarQuantizer:
    """Quantizer for a batch of real components.

    ``training="empirical"`` runs Lloyd-Max on the components themselves and
    falls back to the Gaussian table matched to their RMS when there are fewer
    than ``min_samples_per_level`` pooled samples per level.
    """
    x = np.asarray(components, dtype=float).ravel()
    rms = float(np.sqrt(np.mean(x ** 2))) if x.size else 0.0
    if rms == 0.0:
        rms = 1.0
    if training == "gaussian":
        return gaussian_lloyd_max(bits, rms)
    if training != "empirical":
        raise ValueError(f"unknown quantizer training mode {training!r}")
    if np.unique(np.concatenate([x, -x])).size < min_samples_per_level * 2 ** bits:
        return gaussian_lloyd_max(bits, rms)
    return design_lloyd_max(x, bits)
