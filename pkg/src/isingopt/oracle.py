"""Exhaustive ground truth for small instances."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import OracleCapError
from .ising import IsingModel, energies

__all__ = ["OracleResult", "enumerate_ising", "enumerate_bilp", "tie_tolerance"]

_CHUNK = 1 << 16


@dataclass
class OracleResult:
    """All optimal states, in lexicographic order (spins: -1 before +1)."""

    best_states: list[tuple[int, ...]]
    best_value: float
    states_examined: int
    feasible: bool = True


def tie_tolerance(scale: float) -> float:
    """Energies closer than this are treated as ties."""
    return 1e-9 * max(1.0, scale)


def enumerate_ising(model: IsingModel, cap: int = 24, *, backend: str | None = None) -> OracleResult:
    n = model.num_spins
    if n > cap:
        raise OracleCapError(
            f"{n} spins exceeds the enumeration cap of {cap}; raise cap explicitly "
            "(cost doubles per spin) or use a heuristic engine"
        )
    if n > 62:
        raise OracleCapError("enumeration supports at most 62 spins")
    tol = tie_tolerance(model.scale)
    kern = _backend.get(backend)
    indptr, indices, data = model.csr
    _, masks = kern.scan_states(indptr, indices, data, model.fields, model.offset, n, tol)
    masks = np.asarray(masks, dtype=np.int64)
    bits = np.arange(n, dtype=np.int64)
    spins = (((masks[:, None] >> bits) & 1) * 2 - 1).astype(np.int8)
    exact = energies(model, spins)
    best = float(exact.min())
    sel = spins[exact <= best + tol]
    states = sorted(tuple(int(v) for v in row) for row in sel)
    return OracleResult(states, best, 1 << n)


def enumerate_bilp(instance, cap: int = 24) -> OracleResult:
    """Direct search over every in-bounds integer assignment.

    Feasibility is exact for integer data; non-integer rows are compared with
    a 1e-9 tolerance. ``feasible`` is False (and ``best_value`` is inf) when no
    assignment satisfies every row.
    """
    lo = np.array([b[0] for b in instance.bounds], dtype=np.int64)
    hi = np.array([b[1] for b in instance.bounds], dtype=np.int64)
    radix = hi - lo + 1
    total = math.prod(int(r) for r in radix)
    if total > 1 << cap:
        raise OracleCapError(
            f"search space of {total} assignments exceeds 2**{cap}; raise cap explicitly"
        )
    n = instance.num_vars
    c = np.asarray(instance.objective, dtype=np.float64)
    rows = np.zeros((len(instance.constraints), n))
    rhs = np.zeros(len(instance.constraints))
    for k, con in enumerate(instance.constraints):
        for i, s in con.coeffs:
            rows[k, i] += s
        rhs[k] = con.rhs
    senses = [con.sense for con in instance.constraints]
    integral = bool(np.all(rows == np.round(rows)) and np.all(rhs == np.round(rhs)))
    ftol = 0.0 if integral else 1e-9
    # var 0 is the most significant digit, so index order is lexicographic order
    place = np.ones(n, dtype=np.int64)
    for i in range(n - 2, -1, -1):
        place[i] = place[i + 1] * radix[i + 1]
    best = math.inf
    keep: list[np.ndarray] = []
    vtol = 1e-9 * max(1.0, float(np.abs(c).sum()))
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        x = (idx[:, None] // place) % radix + lo if n else np.zeros((len(idx), 0), dtype=np.int64)
        ok = np.ones(len(idx), dtype=bool)
        if len(senses):
            lhs = x @ rows.T
            for k, sense in enumerate(senses):
                if sense == "=":
                    ok &= np.abs(lhs[:, k] - rhs[k]) <= ftol
                elif sense == "<=":
                    ok &= lhs[:, k] <= rhs[k] + ftol
                else:
                    ok &= lhs[:, k] >= rhs[k] - ftol
        if not ok.any():
            continue
        x = x[ok]
        val = x @ c + instance.objective_offset
        m = float(val.min())
        if m < best - vtol:
            best = m
            keep = []
        elif m < best:
            best = m
        keep.append(x[val <= best + vtol])
    if not keep:
        return OracleResult([], math.inf, total, feasible=False)
    cand = np.concatenate(keep)
    val = cand @ c + instance.objective_offset
    best = float(val.min())
    states = [tuple(int(v) for v in row) for row in cand[val <= best + vtol]]
    return OracleResult(states, best, total)
