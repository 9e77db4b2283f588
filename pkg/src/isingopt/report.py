from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SolveReport:
    """Result of one solver invocation.

    ``energy_trace`` is the best-so-far energy (per sweep for the annealer,
    per readout for the CIM, per flip for greedy descent) and never increases.
    ``best_energy`` is recomputed exactly from ``best_state``.
    """

    best_state: np.ndarray
    best_energy: float
    energy_trace: np.ndarray
    accepted_flips: int
    seed: int | None
    wall_time: float
    engine: str = ""
    backend: str = ""
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "engine": self.engine,
            "backend": self.backend,
            "seed": self.seed,
            "best_state": [int(v) for v in self.best_state],
            "best_energy": float(self.best_energy),
            "accepted_flips": int(self.accepted_flips),
            "trace_length": int(len(self.energy_trace)),
            "wall_time": self.wall_time,
            **self.info,
        }
