"""Named, replayable random streams keyed by (master seed, trial, name)."""

from __future__ import annotations

import numpy as np

# Stable ids; append only so existing seeds keep replaying identically.
STREAM_IDS = {
    "plan": 0,
    "symbols": 1,
    "drop": 2,
    "shadowing": 3,
    "pdp": 4,
    "taps": 5,
    "noise": 6,
}


class TrialStreams:
    def __init__(self, master_seed: int, trial: int):
        self.master_seed = int(master_seed)
        self.trial = int(trial)

    def __call__(self, name: str) -> np.random.Generator:
        try:
            sid = STREAM_IDS[name]
        except KeyError:
            raise KeyError(f"unknown random stream {name!r}") from None
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.trial, sid))
        return np.random.Generator(np.random.PCG64(seq))

    def __repr__(self) -> str:
        return f"TrialStreams(master_seed={self.master_seed}, trial={self.trial})"
