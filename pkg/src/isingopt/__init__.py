"""Compile bounded-integer linear programs into Ising models and solve them.

Engines: a Monte-Carlo annealer (:func:`anneal`, :func:`greedy_descent`),
a coherent-Ising-machine simulator (:func:`cim_solve`) and an exhaustive
oracle (:func:`enumerate_ising`, :func:`enumerate_bilp`). Hot loops run in
compiled kernels when the extension is built, otherwise in pure Python;
``isingopt.BACKEND`` says which.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .annealer import AnnealParams, AnnealSchedule, NoiseConfig, anneal, greedy_descent, temperature_at
from .cim import CimParams, cim_solve, pump_at, readout
from .errors import (
    DimensionError,
    EngineDivergence,
    IsingOptError,
    ModelError,
    OracleCapError,
    ParseError,
    ReductionError,
)
from .ising import (
    IsingModel,
    QuboModel,
    XyModel,
    energy,
    flip_delta,
    ising_to_qubo,
    local_field,
    qubo_to_ising,
    xy_energy,
)
from .oracle import OracleResult, enumerate_bilp, enumerate_ising
from .reduction import (
    BilpInstance,
    Constraint,
    PenaltyWeights,
    ReductionArtifact,
    choose_weights,
    decode,
    encode,
    expand_integers,
    reduce,
)
from .report import SolveReport
