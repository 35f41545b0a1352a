"""Fast invariant checks runnable without pytest (``qfront selftest``)."""

from __future__ import annotations

import numpy as np

from . import admm
from .channel import (ChannelRealization, apply_channel, noise_variance_dbm, pathloss_db,
                      sample_sv_pdp)
from .linmodel import (ObservationModel, build_observation_matrix, build_pilot_signal,
                       symbol_vector)
from .quant import design_lloyd_max, mean_square_distortion
from .signal import (build_uniform_plan, dft_at_subcarriers, draw_symbols, idft_time_samples,
                     make_constellation, project_to_levels)


def _transforms(rng):
    X = rng.standard_normal((3, 32)) + 1j * rng.standard_normal((3, 32))
    x = idft_time_samples(X, 4)
    back = dft_at_subcarriers(x[:, 3:], np.arange(32), axis=1)
    parseval = abs(np.sum(np.abs(x[:, 3:]) ** 2) - np.sum(np.abs(X) ** 2)) / np.sum(np.abs(X) ** 2)
    err = max(np.max(np.abs(back - X)), parseval)
    return err < 1e-12, f"max error {err:.2e}"


def _model_equivalence(rng):
    K, N, M, Mu, R = 2, 2, 32, 8, 4
    plan = build_uniform_plan(M, Mu, 8, R, rng)
    grid = draw_symbols(plan, make_constellation("qpsk"), K, rng)
    taps = (rng.standard_normal((K, R, N)) + 1j * rng.standard_normal((K, R, N))) / np.sqrt(2)
    ch = ChannelRealization(taps)
    powers = rng.uniform(0.5, 2.0, K)
    direct = apply_channel(ch, powers, idft_time_samples(grid.symbols, R)).reshape(-1)
    model = build_observation_matrix(ch, plan, powers) @ symbol_vector(grid) + build_pilot_signal(ch, grid, powers)
    rel = np.linalg.norm(model - direct) / np.linalg.norm(direct)
    return rel < 1e-10, f"relative error {rel:.2e}"


def _constants(rng):
    nv = noise_variance_dbm(15.36e6, 7.0)
    pl = float(pathloss_db(100.0))
    ok = abs(nv + 95.14) < 0.01 and abs(pl + 113.7) < 1e-9
    return ok, f"noise {nv:.3f} dBm, pathloss(100 m) {pl:.4f} dB"


def _lloyd_max(rng):
    x = rng.standard_normal(200_000)
    q = design_lloyd_max(x, 1)
    target = np.sqrt(2 / np.pi)
    dist = mean_square_distortion(q, x)
    ok = abs(q.levels[1] - target) < 5e-3 and abs(dist - (1 - 2 / np.pi)) < 1e-2
    return ok, f"levels ±{q.levels[1]:.4f}, distortion {dist:.4f}"


def _projection(rng):
    levels = make_constellation("16qam").real_levels
    x = rng.uniform(-2, 2, 10_000)
    p = project_to_levels(x, levels)
    ok = np.all(np.isin(p, levels)) and np.array_equal(project_to_levels(p, levels), p)
    brute = levels[np.argmin(np.abs(x[:, None] - levels[None, :]), axis=1)]
    ok = ok and np.array_equal(p, brute)
    return bool(ok), "nearest-level projection idempotent and exact"


def _pdp(rng):
    sums = [sample_sv_pdp(6, 2.0, 2.0, 5, rng).sum() for _ in range(100)]
    err = max(abs(s - 1) for s in sums)
    return err < 1e-12, f"max |sum - 1| = {err:.1e}"


def _admm_stationarity(rng):
    rows, cols = 12, 6
    A = rng.standard_normal((rows, cols))
    model = ObservationModel(A, rng.standard_normal(rows), rng.standard_normal(rows),
                             np.full(rows, -1.0), np.full(rows, 1.0), (1, 6, 1, 3, 1))
    st = admm.init_state(model)
    for name in ("z", "t", "x", "b", "u1", "u2", "u3"):
        setattr(st, name, rng.standard_normal(getattr(st, name).shape))
    rho = 10.0
    z = admm.update_z(st, model, rho)
    gz = 2 * (z - model.y) - 2 * rho * (st.t - z + st.u1) + 2 * rho * (z - A @ st.x - model.p + st.u3)
    st.z = z
    x = admm.update_x(st, model, admm.GramFactor(A))
    gx = -2 * rho * (st.b - x + st.u2) - 2 * rho * A.T @ (st.z - A @ x - model.p + st.u3)
    err = max(np.linalg.norm(gz), np.linalg.norm(gx))
    return err < 1e-8, f"gradient norm {err:.1e}"


CHECKS = [
    ("unitary transforms", _transforms),
    ("observation model equivalence", _model_equivalence),
    ("noise and pathloss constants", _constants),
    ("lloyd-max 1-bit gaussian", _lloyd_max),
    ("constellation projection", _projection),
    ("delay profile normalization", _pdp),
    ("admm closed-form stationarity", _admm_stationarity),
]


def run_selftest(seed: int = 0) -> list:
    out = []
    for name, fn in CHECKS:
        rng = np.random.default_rng(seed)
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # report, don't crash the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
