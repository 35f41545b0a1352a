"""Constellations, subcarrier plans and unitary OFDM transforms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PILOT_VALUE = 1.0 + 0.0j


@dataclass(frozen=True)
class Constellation:
    """Separable QAM-type constellation with unit average symbol power."""

    name: str
    real_levels: np.ndarray
    imag_levels: np.ndarray

    @property
    def points(self) -> np.ndarray:
        re, im = np.meshgrid(self.real_levels, self.imag_levels, indexing="ij")
        return (re + 1j * im).ravel()

    @property
    def average_power(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))


def _pam_levels(order: int) -> np.ndarray:
    """Odd-integer PAM levels -(order-1), ..., order-1 (unnormalized)."""
    return np.arange(-(order - 1), order, 2, dtype=float)


def make_constellation(name: str) -> Constellation:
    key = name.strip().lower().replace("-", "")
    if key == "qpsk":
        levels = _pam_levels(2) / np.sqrt(2.0)
        return Constellation("qpsk", levels, levels.copy())
    if key == "16qam":
        levels = _pam_levels(4) / np.sqrt(10.0)
        return Constellation("16qam", levels, levels.copy())
    raise ValueError(f"unsupported modulation {name!r}; expected 'qpsk' or '16qam'")


@dataclass(frozen=True)
class SubcarrierPlan:
    """Partition of the M subcarriers into data, pilot and null sets."""

    M: int
    data: np.ndarray
    pilots: np.ndarray
    nulls: np.ndarray
    R: int

    def __post_init__(self):
        if not self.M > self.R >= 1:
            raise ValueError(f"need M > R >= 1, got M={self.M}, R={self.R}")
        union = np.concatenate([self.data, self.pilots, self.nulls])
        if union.size != self.M or not np.array_equal(np.sort(union), np.arange(self.M)):
            raise ValueError("data/pilot/null index sets must partition range(M)")

    @property
    def num_used(self) -> int:
        return int(self.data.size)

    @property
    def unused(self) -> np.ndarray:
        """Pilot and null indices in ascending order (known at the receiver)."""
        return np.sort(np.concatenate([self.pilots, self.nulls]))


def build_uniform_plan(M: int, m_used: int, num_pilots: int, R: int,
                       rng: np.random.Generator) -> SubcarrierPlan:
    """Uniformly spaced data subcarriers plus randomly placed pilots."""
    if m_used < 1 or M % m_used:
        raise ValueError(f"number of data subcarriers {m_used} must divide M={M}")
    if not 0 <= num_pilots <= M - m_used:
        raise ValueError(f"num_pilots={num_pilots} exceeds the {M - m_used} free subcarriers")
    data = np.arange(0, M, M // m_used)
    free = np.setdiff1d(np.arange(M), data)
    pilots = np.sort(rng.choice(free, size=num_pilots, replace=False))
    nulls = np.setdiff1d(free, pilots)
    return SubcarrierPlan(M=M, data=data, pilots=pilots, nulls=nulls, R=R)


@dataclass(frozen=True)
class FrequencyGrid:
    """Frequency-domain symbols, one row per UE (shape K x M)."""

    symbols: np.ndarray
    plan: SubcarrierPlan

    @property
    def K(self) -> int:
        return self.symbols.shape[0]

    def data_symbols(self) -> np.ndarray:
        """Data symbols as a K x M_used array (row k is UE k)."""
        return self.symbols[:, self.plan.data]


def draw_symbols(plan: SubcarrierPlan, constellation: Constellation, K: int,
                 rng: np.random.Generator) -> FrequencyGrid:
    points = constellation.points
    grid = np.zeros((K, plan.M), dtype=complex)
    grid[:, plan.data] = rng.choice(points, size=(K, plan.num_used))
    grid[:, plan.pilots] = PILOT_VALUE
    return FrequencyGrid(symbols=grid, plan=plan)


def idft_time_samples(freq: np.ndarray, R: int) -> np.ndarray:
    """Unitary M-point IDFT along the last axis with a cyclic prefix of R-1.

    Element ``i`` of the output corresponds to time index ``q = i - (R - 1)``,
    so the output has length ``M + R - 1``.
    """
    body = np.fft.ifft(freq, axis=-1, norm="ortho")
    if R <= 1:
        return body
    return np.concatenate([body[..., -(R - 1):], body], axis=-1)


def dft_at_subcarriers(samples: np.ndarray, indices, axis: int = 0) -> np.ndarray:
    """Unitary DFT of M time samples along ``axis`` evaluated at ``indices``."""
    spectrum = np.fft.fft(samples, axis=axis, norm="ortho")
    return np.take(spectrum, np.asarray(indices), axis=axis)


def project_to_levels(x, levels: np.ndarray) -> np.ndarray:
    """Nearest level for each entry of ``x``; exact ties go to the smaller level.

    ``levels`` must be sorted ascending.
    """
    levels = np.asarray(levels, dtype=float)
    x = np.asarray(x, dtype=float)
    if levels.size == 1:
        return np.full_like(x, levels[0])
    mids = 0.5 * (levels[1:] + levels[:-1])
    # side="right" would send a midpoint upward; "left" keeps ties on the lower level
    return levels[np.searchsorted(mids, x, side="left")]
