"""Command-line entry point: ``qfront run`` and ``qfront selftest``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .config import ConfigError, ExperimentConfig, dump_config, load_config
from .pipeline import RealizationError
from .selftest import run_selftest
from .sweep import emit_plot_data, resolve_workers, run_sweep, write_sweep

log = logging.getLogger("qfront")


def _cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    cfg = cfg.with_overrides(trials=args.trials, seed=args.seed, workers=args.workers)
    workers = resolve_workers(cfg.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(dump_config(cfg), encoding="utf-8")

    t0 = time.perf_counter()
    result = run_sweep(cfg, workers=workers)
    paths = write_sweep(result, out)
    plot_files = emit_plot_data(result, out / "curves")
    log.info("wrote %s and %d curve files", paths["sweep"], len(plot_files))
    if not args.no_figures:
        from .plotting import render_figures

        for fig in render_figures(result, out / "figures"):
            log.info("figure %s", fig)
    print(f"{len(result.rows)} rows, {cfg.trials} trials per modulation, "
          f"{time.perf_counter() - t0:.1f} s -> {out}")
    return 0


def _cmd_selftest(args) -> int:
    results = run_selftest(seed=args.seed or 0)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    failed = [n for n, ok, _ in results if not ok]
    if failed:
        print(f"{len(failed)} check(s) failed", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfront", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an NMSE sweep and write CSVs and figures")
    run.add_argument("--config", help="flat key = value config file (defaults if omitted)")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int, help="worker processes (env QFRONT_WORKERS wins)")
    run.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    run.set_defaults(func=_cmd_run)

    st = sub.add_parser("selftest", help="run the built-in invariant checks")
    st.add_argument("--seed", type=int, default=0)
    st.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, RealizationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
