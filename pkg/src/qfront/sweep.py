"""Seeded Monte Carlo sweeps over (modulation, b_adc, b_frt) and CSV export."""

from __future__ import annotations

import csv
import io
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import INF, ExperimentConfig, format_bits
from .pipeline import SCHEMES, RealizationResult, Timing, aggregate_nmse, run_realization

log = logging.getLogger(__name__)

WORKERS_ENV = "QFRONT_WORKERS"
SWEEP_HEADER = ["modulation", "b_adc", "b_frt", "scheme", "nmse", "trials"]
REALIZATION_HEADER = ["seed", "trial", "modulation", "scheme", "b_adc", "b_frt", "error", "power"]
PLOT_HEADER = ["b_adc", "nmse_proposed", "nmse_benchmark"]


@dataclass(frozen=True)
class SweepRow:
    modulation: str
    b_adc: int
    b_frt: float
    scheme: str
    nmse: float
    trials: int
    wall_time: float


@dataclass
class SweepResult:
    rows: list
    realizations: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)  # modulation -> {stage: seconds}

    def nmse(self, modulation: str, b_adc: int, b_frt, scheme: str) -> float:
        for r in self.rows:
            if (r.modulation, r.b_adc, r.b_frt, r.scheme) == (modulation, b_adc, b_frt, scheme):
                return r.nmse
        raise KeyError((modulation, b_adc, b_frt, scheme))

    def realizations_for(self, modulation: str, b_adc: int, b_frt, scheme: str) -> list:
        return [r for r in self.realizations
                if (r.modulation, r.b_adc, r.b_frt, r.scheme) == (modulation, b_adc, b_frt, scheme)]


def resolve_workers(requested: int | None) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return max(1, int(requested or 1))


def _trial_job(args):
    cfg, modulation, trial = args
    timing = Timing()
    results = run_realization(cfg, modulation, trial, timing)
    return results, dict(timing.seconds)


def run_sweep(cfg: ExperimentConfig, workers: int | None = None) -> SweepResult:
    """Run ``cfg.trials`` paired realizations per modulation.

    Trials are merged in index order, so the aggregates do not depend on the
    number of workers.
    """
    n_workers = resolve_workers(workers if workers is not None else cfg.workers)
    rows, realizations, timing = [], [], {}
    pool = ProcessPoolExecutor(max_workers=n_workers) if n_workers > 1 else None
    try:
        for modulation in cfg.modulation:
            jobs = [(cfg, modulation, t) for t in range(cfg.trials)]
            t0 = time.perf_counter()
            if pool is None:
                outputs = [_trial_job(j) for j in jobs]
            else:
                outputs = list(pool.map(_trial_job, jobs))
            wall = time.perf_counter() - t0
            stage = Timing()
            mod_results = []
            for res, secs in outputs:
                mod_results.extend(res)
                stage.merge(Timing(secs))
            timing[modulation] = dict(stage.seconds, wall=wall)
            log.info("%s: %d trials in %.1f s", modulation, cfg.trials, wall)

            agg = aggregate_nmse(mod_results, cfg.nmse_mode)
            for b_adc in cfg.b_adc:
                for b_frt in cfg.b_frt:
                    for scheme in SCHEMES:
                        rows.append(SweepRow(modulation, int(b_adc), b_frt, scheme,
                                             agg[(modulation, int(b_adc), b_frt, scheme)],
                                             cfg.trials, wall))
            realizations.extend(mod_results)
    finally:
        if pool is not None:
            pool.shutdown()
    return SweepResult(rows=rows, realizations=realizations, timing=timing)


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def sweep_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(SWEEP_HEADER)
    for r in result.rows:
        w.writerow([r.modulation, r.b_adc, format_bits(r.b_frt), r.scheme, repr(r.nmse), r.trials])
    return buf.getvalue()


def realizations_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(REALIZATION_HEADER)
    for r in result.realizations:
        w.writerow([r.seed, r.trial, r.modulation, r.scheme, r.b_adc, format_bits(r.b_frt),
                    repr(r.error), repr(r.power)])
    return buf.getvalue()


def timing_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(["modulation", "stage", "seconds"])
    for mod, stages in result.timing.items():
        for stage, secs in sorted(stages.items()):
            w.writerow([mod, stage, f"{secs:.6f}"])
    return buf.getvalue()


def _write(path: Path, text: str) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def write_sweep(result: SweepResult, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return {
        "sweep": _write(out / "sweep.csv", sweep_csv(result)),
        "realizations": _write(out / "realizations.csv", realizations_csv(result)),
        "timing": _write(out / "timing.csv", timing_csv(result)),
    }


def plot_data_name(modulation: str, b_frt) -> str:
    return f"nmse_{modulation}_bfrt-{format_bits(b_frt)}.csv"


def emit_plot_data(result: SweepResult, out_dir) -> list:
    """One CSV per (modulation, b_frt) with the two NMSE curves over b_adc."""
    if not result.rows:
        raise ValueError("empty sweep")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = {}
    for r in result.rows:
        table.setdefault((r.modulation, r.b_frt), {}).setdefault(r.b_adc, {})[r.scheme] = r.nmse
    paths = []
    for (mod, b_frt), by_adc in table.items():
        buf = io.StringIO()
        w = _writer(buf)
        w.writerow(PLOT_HEADER)
        for b_adc in sorted(by_adc):
            w.writerow([b_adc, repr(by_adc[b_adc]["proposed"]), repr(by_adc[b_adc]["benchmark"])])
        paths.append(_write(out / plot_data_name(mod, b_frt), buf.getvalue()))
    return paths


def read_plot_data(paths) -> dict:
    """Inverse of :func:`emit_plot_data`: {(modulation, b_adc, b_frt, scheme): nmse}."""
    table = {}
    for path in paths:
        stem = Path(path).stem  # nmse_<mod>_bfrt-<b>
        _, mod, bfrt = stem.split("_", 2)
        tok = bfrt.split("-", 1)[1]
        b_frt = INF if tok == "inf" else int(tok)
        with open(path, encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                b_adc = int(row["b_adc"])
                table[(mod, b_adc, b_frt, "proposed")] = float(row["nmse_proposed"])
                table[(mod, b_adc, b_frt, "benchmark")] = float(row["nmse_benchmark"])
    return table


def read_sweep_csv(path) -> list:
    with open(path, encoding="utf-8", newline="") as fh:
        return [
            (row["modulation"], int(row["b_adc"]),
             INF if row["b_frt"] == "inf" else int(row["b_frt"]),
             row["scheme"], float(row["nmse"]), int(row["trials"]))
            for row in csv.DictReader(fh)
        ]


def results_by_trial(realizations) -> dict:
    """{(modulation, b_adc, b_frt, scheme): [RealizationResult in trial order]}."""
    out = {}
    for r in sorted(realizations, key=lambda r: r.trial):
        out.setdefault((r.modulation, r.b_adc, r.b_frt, r.scheme), []).append(r)
    return out


__all__ = [
    "RealizationResult", "SweepResult", "SweepRow", "emit_plot_data", "read_plot_data",
    "read_sweep_csv", "results_by_trial", "run_sweep", "sweep_csv", "write_sweep",
]
