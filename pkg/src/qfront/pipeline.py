"""One Monte Carlo realization: transmit, channel, ADC, reconstruction, fronthaul."""

from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import admm
from .channel import (ChannelRealization, DropGeometry, LargeScaleFading, add_noise,
                      apply_channel, dbm_to_watt, noise_variance_dbm, sample_drop,
                      sample_large_scale, sample_sv_pdp, sample_taps)
from .config import INF, ExperimentConfig
from .linmodel import (ObservationModel, bounds_from_cells, build_observation_matrix,
                       build_pilot_signal, lift_matrix, lift_vector, stack_samples)
from .quant import ScalarQuantizer, design_for_signal, quantize_complex
from .seeding import TrialStreams
from .signal import (Constellation, FrequencyGrid, build_uniform_plan, dft_at_subcarriers,
                     draw_symbols, idft_time_samples, make_constellation)

SCHEMES = ("proposed", "benchmark")


class RealizationError(RuntimeError):
    """A realization failed; carries what is needed to replay it."""

    def __init__(self, message: str, master_seed: int, trial: int, modulation: str):
        super().__init__(f"{message} (replay with seed={master_seed}, trial={trial}, "
                         f"modulation={modulation})")
        self.master_seed = master_seed
        self.trial = trial
        self.modulation = modulation


@dataclass(frozen=True)
class RealizationResult:
    scheme: str
    modulation: str
    b_adc: int
    b_frt: float  # math.inf marks unquantized fronthaul
    error: float
    power: float
    seed: int
    trial: int

    @property
    def nmse(self) -> float:
        return self.error / self.power


@dataclass
class Scene:
    """Everything drawn for one realization before any quantization."""

    grid: FrequencyGrid
    geometry: DropGeometry
    large_scale: LargeScaleFading
    pdps: np.ndarray
    channel: ChannelRealization  # taps in the simulation's signal units
    powers: np.ndarray
    clean: np.ndarray  # z[q], shape (M, N)
    received: np.ndarray  # y'[q] = z[q] + w[q]
    noise_variance: float  # in the simulation's signal units

    @property
    def plan(self):
        return self.grid.plan


@dataclass
class Timing:
    seconds: dict = field(default_factory=lambda: defaultdict(float))

    def add(self, stage: str, dt: float) -> None:
        self.seconds[stage] += dt

    def merge(self, other: "Timing") -> None:
        for k, v in other.seconds.items():
            self.seconds[k] += v


def draw_scene(cfg: ExperimentConfig, constellation: Constellation, streams: TrialStreams) -> Scene:
    K, N, R = cfg.num_ues, cfg.num_antennas, cfg.num_taps
    plan = build_uniform_plan(cfg.m_total, cfg.m_used, cfg.num_pilots, R, streams("plan"))
    grid = draw_symbols(plan, constellation, K, streams("symbols"))

    geometry = sample_drop(K, cfg.area_side, cfg.height, streams("drop"))
    noise_w = float(dbm_to_watt(noise_variance_dbm(cfg.bandwidth, cfg.noise_figure_db)))
    large = sample_large_scale(geometry, cfg.tx_power_w, noise_w, streams("shadowing"),
                               shadowing_std_db=cfg.shadowing_std_db)
    pdp_rng = streams("pdp")
    pdps = np.stack([sample_sv_pdp(R, cfg.sv_cluster_decay, cfg.sv_ray_decay, cfg.sv_clusters,
                                   pdp_rng, cfg.sv_cluster_interarrival) for _ in range(K)])
    channel = sample_taps(large, pdps, N, streams("taps"))

    # signals are carried in units of the thermal noise amplitude; NMSE is scale-free
    unit = np.sqrt(noise_w) if cfg.normalize_by_noise else 1.0
    channel = ChannelRealization(taps=channel.taps / unit)
    noise_var = noise_w / unit ** 2

    tx = idft_time_samples(grid.symbols, R)
    clean = apply_channel(channel, large.powers, tx)
    received = add_noise(clean, noise_var if cfg.add_noise else 0.0, streams("noise"))
    return Scene(grid, geometry, large, pdps, channel, large.powers, clean, received, noise_var)


def _components(v: np.ndarray) -> np.ndarray:
    return np.concatenate([np.ravel(v.real), np.ravel(v.imag)])


def fronthaul(signal: np.ndarray, b_frt, training: str, min_per_level: int) -> np.ndarray:
    """Fronthaul compression of frequency-domain values; identity for b_frt = inf."""
    if b_frt == INF:
        return signal
    q = design_for_signal(_components(signal), int(b_frt), training, min_per_level)
    return quantize_complex(q, signal)[0]


def adc(received: np.ndarray, b_adc: int, training: str, min_per_level: int):
    """Design the ADC table on the pre-ADC components and apply it.

    Returns ``(quantizer, quantized, cells_re, cells_im)``.
    """
    q: ScalarQuantizer = design_for_signal(_components(received), b_adc, training, min_per_level)
    cells_re = q.cell_index(received.real)
    cells_im = q.cell_index(received.imag)
    quantized = q.levels[cells_re] + 1j * q.levels[cells_im]
    return q, quantized, cells_re, cells_im


def solver_unit(scaling: str, scene: Scene, q: ScalarQuantizer, added_noise: float) -> float:
    """Amplitude unit in which the solver sees the observation model.

    The solver weighs ||b - x||^2 against ||z - A x - p||^2 with equal
    penalties, so the scale of A acts as a regularization weight.
    ``"distortion"`` measures signals in units of the total per-sample
    distortion (added noise plus ADC quantization error); ``"noise"`` uses
    the nominal thermal noise level.
    """
    if scaling == "noise":
        return float(np.sqrt(scene.noise_variance))
    if scaling != "distortion":
        raise ValueError(f"unknown solver scaling {scaling!r}")
    comps = _components(scene.received)
    distortion = float(np.mean((comps - q(comps)) ** 2))
    unit = float(np.sqrt(added_noise + 2.0 * distortion))
    floor = 1e-12 * float(np.sqrt(np.mean(comps ** 2)) or 1.0)
    return max(unit, floor)


def quantized_model(cfg: ExperimentConfig, scene: Scene, b_adc: int, A_r: np.ndarray | None = None,
                    p_r: np.ndarray | None = None):
    """ADC-quantize the scene and build the scaled real model the solver sees.

    Returns ``(model, quantized, unit)``; multiply solver outputs by ``unit``
    to get back to signal units.
    """
    plan = scene.plan
    if A_r is None:
        A_r = lift_matrix(build_observation_matrix(scene.channel, plan, scene.powers))
    if p_r is None:
        p_r = lift_vector(build_pilot_signal(scene.channel, scene.grid, scene.powers))
    q, quantized, cells_re, cells_im = adc(scene.received, b_adc, cfg.adc_training,
                                           cfg.min_samples_per_level)
    added_noise = scene.noise_variance if cfg.add_noise else 0.0
    unit = solver_unit(cfg.solver_scaling, scene, q, added_noise)
    lower, upper = bounds_from_cells(cells_re, cells_im, q)
    model = ObservationModel(A_r / unit, p_r / unit, lift_vector(stack_samples(quantized)) / unit,
                             lower / unit, upper / unit,
                             (cfg.num_antennas, plan.M, cfg.num_ues, plan.num_used, plan.R))
    return model, quantized, unit


def evaluate_scene(cfg: ExperimentConfig, scene: Scene, constellation: Constellation,
                   streams: TrialStreams, timing: Timing | None = None,
                   estimate: str | None = None) -> list[RealizationResult]:
    timing = timing if timing is not None else Timing()
    plan = scene.plan
    used = plan.data
    N, M = cfg.num_antennas, plan.M

    t0 = time.perf_counter()
    A_c = build_observation_matrix(scene.channel, plan, scene.powers)
    p_c = build_pilot_signal(scene.channel, scene.grid, scene.powers)
    A_r = lift_matrix(A_c)
    p_r = lift_vector(p_c)
    timing.add("model", time.perf_counter() - t0)

    solver_cfg = admm.AdmmConfig(rho=cfg.admm_rho, iterations=cfg.admm_iterations,
                                 tol=cfg.admm_tol, estimate=estimate or cfg.estimate)
    reference = dft_at_subcarriers(scene.clean, used, axis=0)  # (M_used, N)
    power = float(np.sum(np.abs(reference) ** 2))
    modulation = constellation.name
    factors = {}

    results = []
    for b_adc in cfg.b_adc:
        t0 = time.perf_counter()
        model, quantized, unit = quantized_model(cfg, scene, b_adc, A_r, p_r)
        timing.add("adc", time.perf_counter() - t0)

        t0 = time.perf_counter()
        if unit not in factors:
            factors[unit] = admm.GramFactor(model.A)
        try:
            out = admm.run(model, constellation, solver_cfg, factors[unit])
        except admm.AdmmDivergenceError as exc:
            raise RealizationError(str(exc), streams.master_seed, streams.trial, modulation) from exc
        z_hat = out.z_hat * unit
        timing.add("admm", time.perf_counter() - t0)

        estimates = {
            "proposed": dft_at_subcarriers(z_hat.reshape(M, N), used, axis=0),
            "benchmark": dft_at_subcarriers(quantized, used, axis=0),
        }
        t0 = time.perf_counter()
        for b_frt in cfg.b_frt:
            for scheme in SCHEMES:
                sent = fronthaul(estimates[scheme], b_frt, cfg.frt_training, cfg.min_samples_per_level)
                err = float(np.sum(np.abs(sent - reference) ** 2))
                results.append(RealizationResult(scheme, modulation, int(b_adc), b_frt, err, power,
                                                 streams.master_seed, streams.trial))
        timing.add("fronthaul", time.perf_counter() - t0)
    return results


def run_realization(cfg: ExperimentConfig, modulation: str, trial: int,
                    timing: Timing | None = None) -> list[RealizationResult]:
    """All (b_adc, b_frt, scheme) results of one paired realization."""
    streams = TrialStreams(cfg.seed, trial)
    constellation = make_constellation(modulation)
    t0 = time.perf_counter()
    scene = draw_scene(cfg, constellation, streams)
    if timing is not None:
        timing.add("scene", time.perf_counter() - t0)
    return evaluate_scene(cfg, scene, constellation, streams, timing)


def cell_key(r: RealizationResult) -> tuple:
    return (r.modulation, r.b_adc, r.b_frt, r.scheme)


def aggregate_nmse(results, mode: str = "ratio_of_sums") -> dict:
    """NMSE per (modulation, b_adc, b_frt, scheme).

    ``ratio_of_sums`` weights each realization by its clean signal power;
    ``mean_of_ratios`` averages per-realization NMSE values.
    """
    groups = defaultdict(list)
    for r in results:
        groups[cell_key(r)].append(r)
    if not groups:
        raise ValueError("no results to aggregate")
    out = {}
    for key, rs in groups.items():
        if mode == "ratio_of_sums":
            out[key] = sum(r.error for r in rs) / sum(r.power for r in rs)
        elif mode == "mean_of_ratios":
            out[key] = float(np.mean([r.nmse for r in rs]))
        else:
            raise ValueError(f"unknown NMSE mode {mode!r}")
    return out


def ratio_standard_error(errors, powers) -> float:
    """Linearized standard error of sum(errors) / sum(powers)."""
    e = np.asarray(errors, dtype=float)
    p = np.asarray(powers, dtype=float)
    n = e.size
    if n < 2:
        return float("nan")
    ratio = e.sum() / p.sum()
    resid = e - ratio * p
    return float(np.sqrt(n / (n - 1) * np.sum(resid ** 2)) / p.sum())
