"""Monte-Carlo annealer with stochastic spin-inversion interfaces.

Each sweep visits every spin once, computes its local field and applies one
of three update rules at the current temperature (Boltzmann constant is 1):

* ``gibbs``: set s_i = +1 with probability ``1 / (1 + exp(-2 I_i / T))``
* ``metropolis``: flip with probability ``min(1, exp(-dH / T))``
* ``greedy``: flip iff ``dH < 0``

Two optional noise sources perturb the chain. With probability
``p_input_invert`` every neighbour spin read while forming the local field is
negated; with probability ``p_output_invert`` the spin just written is
negated. Both default to 0, which is plain simulated annealing.

Random streams
--------------
Chain ``c`` of a run seeded with ``seed`` draws from
``PCG64(SeedSequence(seed, spawn_key=(c,)))``. Per chain the draw order is:
the initial spins, then for every block of sweeps the acceptance uniforms,
the sweep permutations (random order only), the input-inversion uniforms and
the output-inversion uniforms (only when the matching probability is > 0).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import _backend
from .errors import EngineDivergence
from .ising import IsingModel, as_spins, energy
from .report import SolveReport

__all__ = [
    "AnnealSchedule",
    "NoiseConfig",
    "AnnealParams",
    "temperature_at",
    "anneal",
    "greedy_descent",
    "sample",
    "run_chain",
    "chain_rng",
]

RULES = {"gibbs": 0, "metropolis": 1, "greedy": 2}
_BLOCK_VALUES = 1 << 20


@dataclass(frozen=True)
class AnnealSchedule:
    t_start: float = 2.0
    t_end: float = 0.05
    sweeps: int = 500
    kind: Literal["geometric", "linear"] = "geometric"

    def __post_init__(self):
        if not (self.t_start > 0 and self.t_end > 0):
            raise ValueError("temperatures must be positive")
        if self.t_end > self.t_start:
            raise ValueError("t_end must not exceed t_start")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.kind not in ("geometric", "linear"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")

    def temperatures(self) -> np.ndarray:
        return np.array([temperature_at(self, k) for k in range(self.sweeps)])


@dataclass(frozen=True)
class NoiseConfig:
    p_input_invert: float = 0.0
    p_output_invert: float = 0.0

    def __post_init__(self):
        for name in ("p_input_invert", "p_output_invert"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class AnnealParams:
    schedule: AnnealSchedule = field(default_factory=AnnealSchedule)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    restarts: int = 50
    seed: int = 0
    update_rule: Literal["gibbs", "metropolis", "greedy"] = "gibbs"
    sweep_order: Literal["sequential", "random"] = "sequential"

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.update_rule not in RULES:
            raise ValueError(f"unknown update rule {self.update_rule!r}")
        if self.sweep_order not in ("sequential", "random"):
            raise ValueError(f"unknown sweep order {self.sweep_order!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def temperature_at(schedule: AnnealSchedule, sweep: int) -> float:
    if not 0 <= sweep < schedule.sweeps:
        raise IndexError(f"sweep {sweep} out of range [0, {schedule.sweeps})")
    if schedule.sweeps == 1:
        return schedule.t_start
    frac = sweep / (schedule.sweeps - 1)
    if schedule.kind == "geometric":
        return schedule.t_start * (schedule.t_end / schedule.t_start) ** frac
    return schedule.t_start + (schedule.t_end - schedule.t_start) * frac


def chain_rng(seed: int, chain: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chain,))))


@dataclass
class _Chain:
    best_state: np.ndarray
    best_energy: float
    trace: np.ndarray
    accepted: np.ndarray
    max_uphill: np.ndarray
    record: np.ndarray | None
    final_state: np.ndarray


def _run_chain(model, temps, rule, order_kind, noise, rng, kern, *, start=None, record=False):
    n = model.num_spins
    indptr, indices, data = model.csr
    nnz = len(indices)
    if start is None:
        spins = (rng.integers(0, 2, size=n, dtype=np.int8) * 2 - 1).astype(np.int8)
    else:
        spins = as_spins(start, n).copy()
    e = energy(model, spins)
    best = e
    best_spins = spins.copy()
    nsweeps = len(temps)
    trace = np.empty(nsweeps)
    accepted = np.zeros(nsweeps, dtype=np.int64)
    max_uphill = np.empty(nsweeps)
    rec = np.zeros((nsweeps if record else 0, n), dtype=np.int8)
    empty_f = np.zeros((0, 0))
    empty_i = np.zeros((0, 0), dtype=np.int64)
    p_in, p_out = noise.p_input_invert, noise.p_output_invert
    per_sweep = n * (1 + (p_out > 0) + (order_kind == "random")) + nnz * (p_in > 0)
    block = max(1, _BLOCK_VALUES // max(1, per_sweep))
    for lo in range(0, nsweeps, block):
        hi = min(nsweeps, lo + block)
        b = hi - lo
        u_acc = rng.random((b, n))
        if order_kind == "random":
            order = rng.permuted(np.tile(np.arange(n, dtype=np.int64), (b, 1)), axis=1)
        else:
            order = empty_i
        u_in = rng.random((b, nnz)) if p_in > 0 else empty_f
        u_out = rng.random((b, n)) if p_out > 0 else empty_f
        status, e, best = kern.anneal_sweeps(
            indptr, indices, data, model.fields, spins, temps[lo:hi], rule, order,
            u_acc, p_in, u_in, p_out, u_out, e, best, best_spins,
            trace[lo:hi], accepted[lo:hi], max_uphill[lo:hi],
            rec[lo:hi] if record else rec,
        )
        if status >= 0:
            raise EngineDivergence(f"non-finite energy at sweep {lo + status}", step=lo + status)
    return _Chain(best_spins, best, trace, accepted, max_uphill, rec if record else None, spins)


def anneal(model: IsingModel, params: AnnealParams | None = None, *, backend: str | None = None) -> SolveReport:
    """Best state over ``params.restarts`` independent chains.

    Ties in energy go to the lowest chain index, so the result does not depend
    on the order in which chains are run.
    """
    params = params or AnnealParams()
    kern = _backend.get(backend)
    temps = params.schedule.temperatures()
    rule = RULES[params.update_rule]
    t0 = time.perf_counter()
    best_state = None
    best_e = math.inf
    best_chain = -1
    trace = np.full(params.schedule.sweeps, math.inf)
    flips = 0
    for c in range(params.restarts):
        ch = _run_chain(model, temps, rule, params.sweep_order, params.noise, chain_rng(params.seed, c), kern)
        e = energy(model, ch.best_state)
        if e < best_e:
            best_e, best_state, best_chain = e, ch.best_state, c
        np.minimum(trace, ch.trace, out=trace)
        flips += int(ch.accepted.sum())
    # the trace carries incrementally updated energies; pin it to the exactly
    # recomputed best so that it ends at best_energy and never dips below it
    np.maximum(trace, best_e, out=trace)
    trace[-1] = best_e
    return SolveReport(
        best_state=best_state,
        best_energy=best_e,
        energy_trace=trace,
        accepted_flips=flips,
        seed=params.seed,
        wall_time=time.perf_counter() - t0,
        engine="anneal",
        backend=_backend.name_of(kern),
        info={"best_chain": best_chain},
    )


def sample(
    model: IsingModel,
    temperature: float,
    num_samples: int,
    *,
    seed: int = 0,
    update_rule: str = "gibbs",
    burn_in: int = 0,
    noise: NoiseConfig | None = None,
    sweep_order: str = "sequential",
    start=None,
    backend: str | None = None,
) -> np.ndarray:
    """Fixed-temperature chain; returns the state after each sweep, shape ``(num_samples, V)``."""
    total = burn_in + num_samples
    temps = np.full(total, float(temperature))
    ch = _run_chain(
        model, temps, RULES[update_rule], sweep_order, noise or NoiseConfig(),
        chain_rng(seed, 0), _backend.get(backend), start=start, record=True,
    )
    return ch.record[burn_in:]


def run_chain(model: IsingModel, temperatures, *, seed: int = 0, update_rule: str = "metropolis",
              start=None, noise: NoiseConfig | None = None, backend: str | None = None) -> _Chain:
    """One chain over an explicit temperature sequence, with per-sweep diagnostics.

    ``max_uphill[k]`` is the largest energy increase among flips accepted by the
    update rule during sweep ``k`` (``-inf`` when nothing was accepted).
    """
    return _run_chain(
        model, np.asarray(temperatures, dtype=np.float64), RULES[update_rule], "sequential",
        noise or NoiseConfig(), chain_rng(seed, 0), _backend.get(backend), start=start,
    )


def greedy_descent(model: IsingModel, start) -> SolveReport:
    """Flip the spin with the most negative energy change until none is negative.

    Ties go to the lowest index. The endpoint is a 1-flip local minimum.
    """
    t0 = time.perf_counter()
    s = as_spins(start, model.num_spins).astype(np.float64)
    indptr, indices, data = model.csr
    dense = model.to_dense() if model.num_spins <= 2048 else None

    def fields_exact():
        if dense is not None:
            return dense @ s + model.fields
        out = model.fields.copy()
        for i in range(model.num_spins):
            lo, hi = indptr[i], indptr[i + 1]
            out[i] += data[lo:hi] @ s[indices[lo:hi]]
        return out

    e = energy(model, s)
    trace = [e]
    flips = 0
    local = fields_exact()
    while model.num_spins:
        deltas = 2.0 * s * local
        i = int(np.argmin(deltas))
        if deltas[i] >= 0.0:
            local = fields_exact()
            deltas = 2.0 * s * local
            i = int(np.argmin(deltas))
            if deltas[i] >= 0.0:
                break
        e += deltas[i]
        s[i] = -s[i]
        lo, hi = indptr[i], indptr[i + 1]
        local[indices[lo:hi]] += 2.0 * data[lo:hi] * s[i]
        flips += 1
        trace.append(min(trace[-1], e))
    state = s.astype(np.int8)
    return SolveReport(
        best_state=state,
        best_energy=energy(model, state),
        energy_trace=np.array(trace),
        accepted_flips=flips,
        seed=None,
        wall_time=time.perf_counter() - t0,
        engine="greedy",
    )
