"""Scaled-form ADMM for reconstructing the clean signal from ADC output.

The problem solved is

    minimize   ||z - y||^2
    subject to t = z,  b = x,  z = A x + p,
               lower <= t <= upper,
               b[:n] in real levels, b[n:] in imaginary levels,

with duals u1 (t = z), u2 (b = x) and u3 (z = A x + p).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .linmodel import ObservationModel, unlift_vector
from .signal import Constellation, project_to_levels

ESTIMATE_POLICIES = ("model", "z", "t", "projected", "observed")


class AdmmDivergenceError(FloatingPointError):
    pass


@dataclass(frozen=True)
class AdmmConfig:
    rho: float = 10.0
    iterations: int = 20
    tol: float | None = None  # residual-based early stop, off by default
    estimate: str = "model"

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.estimate not in ESTIMATE_POLICIES:
            raise ValueError(f"estimate must be one of {ESTIMATE_POLICIES}")


@dataclass
class AdmmState:
    z: np.ndarray
    t: np.ndarray
    x: np.ndarray
    b: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray
    iteration: int = 0
    residuals: list = field(default_factory=list)

    def copy(self) -> "AdmmState":
        return AdmmState(self.z.copy(), self.t.copy(), self.x.copy(), self.b.copy(),
                         self.u1.copy(), self.u2.copy(), self.u3.copy(),
                         self.iteration, list(self.residuals))


class GramFactor:
    """Cholesky factor of I + A^T A, reusable for every model sharing A."""

    def __init__(self, A: np.ndarray):
        gram = A.T @ A
        gram[np.diag_indices_from(gram)] += 1.0
        self._cho = cho_factor(gram, lower=True, check_finite=True)
        self.size = gram.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve(self._cho, rhs, check_finite=False)


def init_state(model: ObservationModel) -> AdmmState:
    rows, cols = model.A.shape
    zeros_r = np.zeros(rows)
    zeros_c = np.zeros(cols)
    return AdmmState(
        z=zeros_r.copy(),
        t=np.clip(zeros_r, model.lower, model.upper),
        x=zeros_c.copy(),
        b=zeros_c.copy(),
        u1=zeros_r.copy(),
        u2=zeros_c.copy(),
        u3=zeros_r.copy(),
    )


def update_z(state: AdmmState, model: ObservationModel, rho: float) -> np.ndarray:
    target = state.t + state.u1 + model.A @ state.x + model.p - state.u3
    return (model.y + rho * target) / (1.0 + 2.0 * rho)


def update_b(state: AdmmState, constellation: Constellation) -> np.ndarray:
    v = state.x - state.u2
    half = v.size // 2
    return np.concatenate([project_to_levels(v[:half], constellation.real_levels),
                           project_to_levels(v[half:], constellation.imag_levels)])


def update_t(state: AdmmState, model: ObservationModel) -> np.ndarray:
    # infinite bounds make the clamp one-sided
    return np.clip(state.z - state.u1, model.lower, model.upper)


def update_x(state: AdmmState, model: ObservationModel, factor: GramFactor) -> np.ndarray:
    rhs = state.b + state.u2 + model.A.T @ (state.z - model.p + state.u3)
    return factor.solve(rhs)


def update_duals(state: AdmmState, model: ObservationModel):
    Ax = model.A @ state.x
    r1 = state.t - state.z
    r2 = state.b - state.x
    r3 = state.z - Ax - model.p
    state.residuals.append((float(np.linalg.norm(r1)), float(np.linalg.norm(r2)),
                            float(np.linalg.norm(r3))))
    return state.u1 + r1, state.u2 + r2, state.u3 + r3


def step(state: AdmmState, model: ObservationModel, constellation: Constellation,
         factor: GramFactor, rho: float) -> AdmmState:
    """One sweep z -> b -> t -> x -> duals, updating ``state`` in place."""
    state.z = update_z(state, model, rho)
    state.b = update_b(state, constellation)
    state.t = update_t(state, model)
    state.x = update_x(state, model, factor)
    state.u1, state.u2, state.u3 = update_duals(state, model)
    state.iteration += 1
    return state


@dataclass
class AdmmResult:
    z_hat: np.ndarray  # complex, length NM
    x_hat: np.ndarray  # complex symbol estimate, length K * M_used
    symbols: np.ndarray  # complex constellation-projected symbols
    state: AdmmState

    @property
    def residuals(self) -> list:
        return self.state.residuals

    def residuals_to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "r1", "r2", "r3"])
            for i, (r1, r2, r3) in enumerate(self.residuals, start=1):
                w.writerow([i, repr(r1), repr(r2), repr(r3)])


def run(model: ObservationModel, constellation: Constellation,
        config: AdmmConfig = AdmmConfig(), factor: GramFactor | None = None) -> AdmmResult:
    if factor is None:
        factor = GramFactor(model.A)
    elif factor.size != model.A.shape[1]:
        raise ValueError("Gram factor does not match the model")
    state = init_state(model)
    for _ in range(config.iterations):
        step(state, model, constellation, factor, config.rho)
        if not (np.all(np.isfinite(state.x)) and np.all(np.isfinite(state.z))
                and np.all(np.isfinite(state.u3))):
            raise AdmmDivergenceError(f"non-finite iterate at iteration {state.iteration}")
        if config.tol is not None and max(state.residuals[-1]) < config.tol:
            break

    if config.estimate == "model":
        z_lifted = model.A @ state.x + model.p
    elif config.estimate == "projected":
        z_lifted = model.A @ state.b + model.p
    elif config.estimate == "z":
        z_lifted = state.z
    elif config.estimate == "t":
        z_lifted = state.t
    else:  # "observed": identity reconstruction, used to isolate the pipeline
        z_lifted = model.y
    return AdmmResult(z_hat=unlift_vector(z_lifted), x_hat=unlift_vector(state.x),
                      symbols=unlift_vector(state.b), state=state)
