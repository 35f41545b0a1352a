"""Flat ``key = value`` experiment configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .admm import ESTIMATE_POLICIES
from .signal import make_constellation

INF = math.inf


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    # geometry
    area_side: float = 500.0
    height: float = 10.0
    num_aps: int = 1
    array_rows: int = 2  # recorded only; antennas are spatially uncorrelated
    array_cols: int = 2
    # system dimensions
    num_ues: int = 8
    num_antennas: int = 4
    m_total: int = 256
    m_used: int = 64
    num_pilots: int = 64
    num_taps: int = 6
    subcarrier_spacing: float = 60e3
    # propagation and power
    noise_figure_db: float = 7.0
    tx_power_w: float = 0.1
    pathloss_intercept_db: float = -49.9
    pathloss_slope_db: float = 31.9
    shadowing_std_db: float = 8.2
    sv_cluster_decay: float = 2.0
    sv_ray_decay: float = 2.0
    sv_clusters: int = 5
    sv_cluster_interarrival: float = 2.0
    add_noise: bool = True
    normalize_by_noise: bool = True
    # sweep
    modulation: tuple = ("qpsk", "16qam")
    b_adc: tuple = (1, 2, 3, 4, 5, 6)
    b_frt: tuple = (2, 4, INF)
    # quantizer training
    adc_training: str = "empirical"
    frt_training: str = "empirical"
    min_samples_per_level: int = 4
    # solver
    admm_rho: float = 10.0
    admm_iterations: int = 20
    admm_tol: float | None = None
    estimate: str = "model"
    solver_scaling: str = "distortion"
    # aggregation and execution
    nmse_mode: str = "ratio_of_sums"
    trials: int = 100
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        self.validate()

    @property
    def bandwidth(self) -> float:
        return self.m_total * self.subcarrier_spacing

    def validate(self) -> None:
        counts = ("num_aps", "num_ues", "num_antennas", "m_total", "m_used", "num_taps",
                  "sv_clusters", "admm_iterations", "trials", "workers", "min_samples_per_level")
        for name in counts:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.num_aps != 1:
            raise ConfigError("only a single representative AP is simulated (num_aps = 1)")
        if self.num_pilots < 0:
            raise ConfigError("num_pilots must be non-negative")
        if self.m_used > self.m_total or self.m_total % self.m_used:
            raise ConfigError(f"m_used={self.m_used} must divide m_total={self.m_total}")
        if self.num_pilots > self.m_total - self.m_used:
            raise ConfigError("num_pilots exceeds the free subcarriers")
        if not self.m_total > self.num_taps:
            raise ConfigError("m_total must exceed num_taps")
        if not (self.modulation and self.b_adc and self.b_frt):
            raise ConfigError("sweep lists must be nonempty")
        for m in self.modulation:
            try:
                make_constellation(m)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        for b in self.b_adc:
            if b < 1:
                raise ConfigError("b_adc entries must be >= 1")
        for b in self.b_frt:
            if not (b == INF or (b >= 1 and float(b).is_integer())):
                raise ConfigError("b_frt entries must be positive integers or inf")
        if self.admm_rho <= 0:
            raise ConfigError("admm_rho must be positive")
        if self.nmse_mode not in ("ratio_of_sums", "mean_of_ratios"):
            raise ConfigError("nmse_mode must be ratio_of_sums or mean_of_ratios")
        for name in ("adc_training", "frt_training"):
            if getattr(self, name) not in ("empirical", "gaussian"):
                raise ConfigError(f"{name} must be empirical or gaussian")
        if self.solver_scaling not in ("distortion", "noise"):
            raise ConfigError("solver_scaling must be distortion or noise")
        if self.estimate not in ESTIMATE_POLICIES:
            raise ConfigError(f"estimate must be one of {', '.join(ESTIMATE_POLICIES)}")
        if self.area_side < 0 or self.height < 0 or self.subcarrier_spacing <= 0:
            raise ConfigError("geometry and spacing must be non-negative")

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


DESK_SCALE = dict(num_ues=4, num_antennas=4, m_total=64, m_used=16, num_pilots=16, num_taps=4)


def format_bits(b) -> str:
    return "inf" if b == INF else str(int(b))


def _parse_bits(tok: str):
    tok = tok.strip().lower()
    if tok in ("inf", "infinity", "unquantized"):
        return INF
    return int(tok)


def _parse_bool(tok: str) -> bool:
    low = tok.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {tok!r}")


def _parse_optional_float(tok: str):
    return None if tok.strip().lower() in ("none", "off", "") else float(tok)


def _split(tok: str) -> list[str]:
    return [t for t in (s.strip() for s in tok.split(",")) if t]


_PARSERS = {
    "modulation": lambda s: tuple(m.lower() for m in _split(s)),
    "b_adc": lambda s: tuple(int(t) for t in _split(s)),
    "b_frt": lambda s: tuple(_parse_bits(t) for t in _split(s)),
    "admm_tol": _parse_optional_float,
}


def _parser_for(f):
    if f.name in _PARSERS:
        return _PARSERS[f.name]
    default = f.default
    if isinstance(default, bool):
        return _parse_bool
    if isinstance(default, int):
        return int
    if isinstance(default, float):
        return float
    return str.strip


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    known = {f.name: f for f in fields(ExperimentConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _parser_for(known[key])(val)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    try:
        return ExperimentConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), source=str(path))


def dump_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.name in ("modulation",):
            s = ",".join(v)
        elif f.name in ("b_adc", "b_frt"):
            s = ",".join(format_bits(b) for b in v)
        elif v is None:
            s = "none"
        elif isinstance(v, bool):
            s = "true" if v else "false"
        else:
            s = str(v)
        lines.append(f"{f.name} = {s}")
    return "\n".join(lines) + "\n"
