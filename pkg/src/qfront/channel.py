"""Drops, large-scale fading, Saleh-Valenzuela delay profiles and FIR taps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

THERMAL_NOISE_DBM_PER_HZ = -174.0


@dataclass(frozen=True)
class DropGeometry:
    area_side: float
    ap_position: np.ndarray  # (2,)
    ue_positions: np.ndarray  # (K, 2)
    height: float

    @property
    def K(self) -> int:
        return self.ue_positions.shape[0]

    def distances(self) -> np.ndarray:
        """3-D AP-UE distances in metres."""
        planar = np.linalg.norm(self.ue_positions - self.ap_position, axis=1)
        return np.sqrt(planar ** 2 + self.height ** 2)


@dataclass(frozen=True)
class LargeScaleFading:
    gains: np.ndarray  # linear beta_k
    shadowing_db: np.ndarray
    powers: np.ndarray  # W
    noise_variance: float  # W

    def __post_init__(self):
        if np.any(self.gains < 0) or np.any(self.powers < 0):
            raise ValueError("gains and powers must be non-negative")
        if self.noise_variance <= 0:
            raise ValueError("noise variance must be positive")


@dataclass(frozen=True)
class ChannelRealization:
    """FIR taps h_k[r] in C^N stored as an array of shape (K, R, N)."""

    taps: np.ndarray

    @property
    def K(self) -> int:
        return self.taps.shape[0]

    @property
    def R(self) -> int:
        return self.taps.shape[1]

    @property
    def N(self) -> int:
        return self.taps.shape[2]


def sample_drop(K: int, area_side: float, height: float, rng: np.random.Generator) -> DropGeometry:
    if area_side < 0:
        raise ValueError("area_side must be non-negative")
    if K < 1:
        raise ValueError("need at least one UE")
    ap = rng.uniform(0.0, area_side, size=2)
    ues = rng.uniform(0.0, area_side, size=(K, 2))
    return DropGeometry(area_side=area_side, ap_position=ap, ue_positions=ues, height=height)


def pathloss_db(d, rng: np.random.Generator | None = None, shadowing_std_db: float = 8.2,
                intercept_db: float = -49.9, slope_db: float = 31.9) -> np.ndarray:
    """UMi street-canyon channel gain in dB with log-normal shadowing.

    Pass ``rng=None`` (or ``shadowing_std_db=0``) for the deterministic part.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    gain = intercept_db - slope_db * np.log10(d)
    if rng is not None and shadowing_std_db > 0:
        gain = gain + rng.normal(0.0, shadowing_std_db, size=d.shape)
    return gain


def noise_variance_dbm(bandwidth_hz: float, noise_figure_db: float) -> float:
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return THERMAL_NOISE_DBM_PER_HZ + 10.0 * np.log10(bandwidth_hz) + noise_figure_db


def dbm_to_watt(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watt_to_dbm(watt):
    return 10.0 * np.log10(np.asarray(watt, dtype=float)) + 30.0


def sample_large_scale(geometry: DropGeometry, tx_power_w: float, noise_var_w: float,
                       rng: np.random.Generator, shadowing_std_db: float = 8.2) -> LargeScaleFading:
    d = geometry.distances()
    deterministic = pathloss_db(d, None)
    shadow = rng.normal(0.0, shadowing_std_db, size=d.shape) if shadowing_std_db > 0 else np.zeros_like(d)
    gains = 10.0 ** ((deterministic + shadow) / 10.0)
    powers = np.full(geometry.K, float(tx_power_w))
    return LargeScaleFading(gains=gains, shadowing_db=shadow, powers=powers,
                            noise_variance=float(noise_var_w))


def sample_sv_pdp(R: int, cluster_decay: float, ray_decay: float, num_clusters: int,
                  rng: np.random.Generator, cluster_interarrival: float = 2.0) -> np.ndarray:
    """Saleh-Valenzuela power-delay profile on an R-tap sample grid.

    All delays and decay constants are in sample periods. Cluster ``c``
    starts at ``T_c`` (``T_1 = 0``, exponential inter-arrival times with mean
    ``cluster_interarrival``) and carries rays at unit spacing whose mean
    power is ``exp(-T_c/cluster_decay) * exp(-(tau - T_c)/ray_decay)``. Each
    ray delay is rounded to the nearest tap; rays beyond tap ``R-1`` are
    dropped and the profile is normalized to unit sum.
    """
    if R < 1:
        raise ValueError("R must be >= 1")
    if cluster_decay <= 0 or ray_decay <= 0:
        raise ValueError("decay constants must be positive")
    if num_clusters < 1:
        raise ValueError("need at least one cluster")
    gaps = rng.exponential(cluster_interarrival, size=num_clusters - 1)
    starts = np.concatenate([[0.0], np.cumsum(gaps)])
    pdp = np.zeros(R)
    for T in starts:
        offsets = np.arange(0, max(int(np.ceil(R - T)), 0) + 1, dtype=float)
        delays = T + offsets
        bins = np.rint(delays).astype(int)
        keep = bins < R
        np.add.at(pdp, bins[keep],
                  np.exp(-T / cluster_decay) * np.exp(-offsets[keep] / ray_decay))
    return pdp / pdp.sum()


def sample_taps(large_scale: LargeScaleFading, pdps: np.ndarray, N: int,
                rng: np.random.Generator) -> ChannelRealization:
    """Uncorrelated Rayleigh taps with per-UE, per-tap variance beta_k * phi_k[r]."""
    pdps = np.atleast_2d(pdps)
    K, R = pdps.shape
    scale = np.sqrt(large_scale.gains[:, None] * pdps)  # (K, R)
    g = (rng.standard_normal((K, R, N)) + 1j * rng.standard_normal((K, R, N))) / np.sqrt(2.0)
    return ChannelRealization(taps=scale[:, :, None] * g)


def apply_channel(channel: ChannelRealization, powers: np.ndarray,
                  tx_with_cp: np.ndarray) -> np.ndarray:
    """Noise-free received samples z[q] for q = 0..M-1, shape (M, N).

    ``tx_with_cp`` has shape (K, M + R - 1) with the cyclic prefix first.
    """
    K, R, N = channel.taps.shape
    M = tx_with_cp.shape[1] - (R - 1)
    amp = np.sqrt(np.asarray(powers, dtype=float))
    z = np.zeros((M, N), dtype=complex)
    for r in range(R):
        # sample q - r sits at column q - r + R - 1 of the CP-extended array
        delayed = tx_with_cp[:, R - 1 - r: R - 1 - r + M]  # (K, M)
        z += (delayed * amp[:, None]).T @ channel.taps[:, r, :]
    return z


def add_noise(z: np.ndarray, noise_variance: float, rng: np.random.Generator) -> np.ndarray:
    if noise_variance < 0:
        raise ValueError("noise variance must be non-negative")
    if noise_variance == 0:
        return z.copy()
    w = rng.standard_normal(z.shape) + 1j * rng.standard_normal(z.shape)
    return z + np.sqrt(noise_variance / 2.0) * w
