import numpy as np

from qfront import admm
from qfront.config import DESK_SCALE, ExperimentConfig
from qfront.linmodel import lift_vector, symbol_vector
from qfront.pipeline import draw_scene, quantized_model
from qfront.seeding import TrialStreams
from qfront.signal import make_constellation


def desk_config(**overrides) -> ExperimentConfig:
    return ExperimentConfig().with_overrides(**DESK_SCALE).with_overrides(**overrides)


def solve_trial(cfg: ExperimentConfig, modulation: str, trial: int, b_adc: int):
    """Draw one scene, ADC-quantize it and run the solver on the scaled model."""
    constellation = make_constellation(modulation)
    scene = draw_scene(cfg, constellation, TrialStreams(cfg.seed, trial))
    model, _, unit = quantized_model(cfg, scene, b_adc)
    config = admm.AdmmConfig(rho=cfg.admm_rho, iterations=cfg.admm_iterations)
    return scene, model, admm.run(model, constellation, config), unit


def symbols_recovered(scene, result) -> bool:
    return bool(np.array_equal(result.symbols, symbol_vector(scene.grid)))


def true_lifted_symbols(scene):
    return lift_vector(symbol_vector(scene.grid))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
