"""Real-valued linear observation model for one AP and one OFDM symbol.

Time-domain vectors are stacked sample-major: entry ``q * N + n`` holds
antenna ``n`` at sample ``q``. Symbol vectors are stacked UE-major:
entry ``k * M_used + j`` holds UE ``k`` on the ``j``-th data subcarrier.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .quant import ScalarQuantizer
from .signal import FrequencyGrid, SubcarrierPlan

_MAGIC = b"QFOM"
_HEADER = struct.Struct("<4s6q")  # magic, version, N, M, K, M_used, R


def kron_operator(channel: ChannelRealization, powers, indices, M: int) -> np.ndarray:
    """Map from per-UE symbols on ``indices`` to received samples (NM x K|indices|).

    Block row ``q`` equals ``sum_r kron(H[r] P^(1/2), d_{q-r}^T)`` with
    ``d_{q-r}[j] = exp(2j*pi*(q-r)*m_j/M) / sqrt(M)``.
    """
    taps = channel.taps  # (K, R, N)
    K, R, N = taps.shape
    idx = np.asarray(indices)
    amp = np.sqrt(np.asarray(powers, dtype=float))
    if amp.shape != (K,):
        raise ValueError(f"expected {K} powers, got shape {amp.shape}")
    q = np.arange(M)[:, None, None]
    r = np.arange(R)[None, :, None]
    d = np.exp(2j * np.pi * (q - r) * idx[None, None, :] / M) / np.sqrt(M)  # (M, R, J)
    weighted = taps * amp[:, None, None]  # (K, R, N)
    A = np.einsum("krn,qrj->qnkj", weighted, d)
    return A.reshape(M * N, K * idx.size)


def build_observation_matrix(channel: ChannelRealization, plan: SubcarrierPlan, powers) -> np.ndarray:
    if channel.R != plan.R:
        raise ValueError(f"channel has {channel.R} taps but plan expects {plan.R}")
    return kron_operator(channel, powers, plan.data, plan.M)


def build_pilot_signal(channel: ChannelRealization, grid: FrequencyGrid, powers) -> np.ndarray:
    """Known contribution of pilot and null subcarriers, stacked to length NM."""
    plan = grid.plan
    if grid.K != channel.K:
        raise ValueError("grid and channel disagree on the number of UEs")
    unused = plan.unused
    if unused.size == 0:
        return np.zeros(plan.M * channel.N, dtype=complex)
    B = kron_operator(channel, powers, unused, plan.M)
    return B @ grid.symbols[:, unused].ravel()


def symbol_vector(grid: FrequencyGrid) -> np.ndarray:
    """vec of the M_used x K data-symbol matrix."""
    return grid.data_symbols().ravel()


def stack_samples(samples: np.ndarray) -> np.ndarray:
    """(M, N) time-domain array -> length-NM vector."""
    return np.asarray(samples).reshape(-1)


def lift_vector(v: np.ndarray) -> np.ndarray:
    return np.concatenate([v.real, v.imag])


def unlift_vector(v: np.ndarray) -> np.ndarray:
    half = v.size // 2
    return v[:half] + 1j * v[half:]


def lift_matrix(A: np.ndarray) -> np.ndarray:
    return np.block([[A.real, -A.imag], [A.imag, A.real]])


def bounds_from_cells(cells_re, cells_im, q: ScalarQuantizer) -> tuple[np.ndarray, np.ndarray]:
    """Lifted interval bounds (length 2NM) from the ADC cell indices."""
    lo_re, hi_re = q.bounds(np.asarray(cells_re).reshape(-1))
    lo_im, hi_im = q.bounds(np.asarray(cells_im).reshape(-1))
    return np.concatenate([lo_re, lo_im]), np.concatenate([hi_re, hi_im])


@dataclass(frozen=True)
class ObservationModel:
    A: np.ndarray  # (2NM, 2K M_used)
    p: np.ndarray  # (2NM,)
    y: np.ndarray  # (2NM,)
    lower: np.ndarray
    upper: np.ndarray
    dims: tuple  # (N, M, K, M_used, R)

    def __post_init__(self):
        rows, cols = self.A.shape
        N, M, K, Mu, _ = self.dims
        if rows != 2 * N * M or cols != 2 * K * Mu:
            raise ValueError(f"A has shape {self.A.shape}, expected {(2 * N * M, 2 * K * Mu)}")
        for name in ("p", "y", "lower", "upper"):
            if getattr(self, name).shape != (rows,):
                raise ValueError(f"{name} must have length {rows}")

    @property
    def num_symbols(self) -> int:
        """K * M_used (half the length of the lifted symbol vector)."""
        return self.A.shape[1] // 2

    def save(self, path) -> None:
        N, M, K, Mu, R = self.dims
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(_MAGIC, 1, N, M, K, Mu, R))
            for arr in (self.A, self.p, self.y, self.lower, self.upper):
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes(order="C"))

    @classmethod
    def load(cls, path) -> "ObservationModel":
        with open(path, "rb") as fh:
            raw = fh.read()
        magic, version, N, M, K, Mu, R = _HEADER.unpack_from(raw)
        if magic != _MAGIC or version != 1:
            raise ValueError(f"{path}: not an observation-model dump")
        rows, cols = 2 * N * M, 2 * K * Mu
        flat = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
        if flat.size != rows * cols + 4 * rows:
            raise ValueError(f"{path}: truncated or oversized payload")
        A = flat[: rows * cols].reshape(rows, cols).copy()
        rest = flat[rows * cols:].reshape(4, rows).copy()
        return cls(A, rest[0], rest[1], rest[2], rest[3], (N, M, K, Mu, R))


def build_model(channel: ChannelRealization, grid: FrequencyGrid, powers,
                quantized: np.ndarray, cells_re, cells_im, adc: ScalarQuantizer,
                A_complex: np.ndarray | None = None,
                p_complex: np.ndarray | None = None) -> ObservationModel:
    """Assemble the lifted model from ADC output of shape (M, N)."""
    plan = grid.plan
    if A_complex is None:
        A_complex = build_observation_matrix(channel, plan, powers)
    if p_complex is None:
        p_complex = build_pilot_signal(channel, grid, powers)
    lower, upper = bounds_from_cells(cells_re, cells_im, adc)
    return ObservationModel(
        A=lift_matrix(A_complex),
        p=lift_vector(p_complex),
        y=lift_vector(stack_samples(quantized)),
        lower=lower,
        upper=upper,
        dims=(channel.N, plan.M, grid.K, plan.num_used, plan.R),
    )
