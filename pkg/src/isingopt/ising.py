"""Ising, QUBO and XY models.

Energy convention (each unordered pair counted once)::

    H(s) = - sum_{i<j} J_ij s_i s_j - sum_i h_i s_i + offset

with spins s_i in {-1, +1}. QUBO values are ``sum_{i<=j} Q_ij x_i x_j + offset``
over x_i in {0, 1}, linked to spins by ``x = (1 + s) / 2``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DimensionError, ModelError

__all__ = [
    "IsingModel",
    "QuboModel",
    "XyModel",
    "as_spins",
    "energy",
    "energies",
    "local_field",
    "flip_delta",
    "qubo_to_ising",
    "ising_to_qubo",
    "xy_energy",
]

PairMap = dict[tuple[int, int], float]


def _normalize_pairs(num: int, couplings, *, what: str) -> PairMap:
    """Canonicalize couplings to ``{(i, j): value}`` with ``i < j``.

    Accepts a mapping keyed by pairs or an iterable of ``(i, j, value)`` triples.
    """
    items: Iterable
    if isinstance(couplings, Mapping):
        items = ((k[0], k[1], v) for k, v in couplings.items())
    else:
        items = couplings
    out: PairMap = {}
    for i, j, v in items:
        i, j, v = int(i), int(j), float(v)
        if i == j:
            raise ModelError(f"{what}: self-coupling on index {i}")
        if not (0 <= i < num and 0 <= j < num):
            raise ModelError(f"{what}: pair ({i}, {j}) out of range [0, {num})")
        if not math.isfinite(v):
            raise ModelError(f"{what}: non-finite coupling on ({i}, {j})")
        key = (i, j) if i < j else (j, i)
        if key in out:
            raise ModelError(f"{what}: duplicate pair {{{key[0]}, {key[1]}}}")
        out[key] = v
    return out


def _dense_fields(num: int, fields, *, what: str) -> np.ndarray:
    if fields is None:
        return np.zeros(num)
    h = np.array(fields, dtype=np.float64).reshape(-1)
    if h.shape[0] != num:
        raise DimensionError(f"{what} fields", num, h.shape[0])
    if not np.all(np.isfinite(h)):
        raise ModelError(f"{what}: non-finite field")
    h.setflags(write=False)
    return h


class _PairModel:
    """CSR views shared by Ising and XY models (symmetric, both directions stored)."""

    couplings: PairMap
    fields: np.ndarray

    def _size(self) -> int:
        raise NotImplementedError

    @cached_property
    def pair_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Sorted ``(i, j, J)`` arrays, one entry per unordered pair."""
        keys = sorted(self.couplings)
        i = np.array([k[0] for k in keys], dtype=np.int64)
        j = np.array([k[1] for k in keys], dtype=np.int64)
        v = np.array([self.couplings[k] for k in keys], dtype=np.float64)
        return i, j, v

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(indptr, indices, data)`` adjacency; row i lists all neighbours of i in index order."""
        n = self._size()
        i, j, v = self.pair_arrays
        rows = np.concatenate([i, j])
        cols = np.concatenate([j, i])
        vals = np.concatenate([v, v])
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        indptr = np.cumsum(indptr)
        return indptr, cols.astype(np.int64), np.ascontiguousarray(vals)

    def to_dense(self) -> np.ndarray:
        n = self._size()
        mat = np.zeros((n, n))
        i, j, v = self.pair_arrays
        mat[i, j] = v
        mat[j, i] = v
        return mat


@dataclass(frozen=True, eq=False)
class IsingModel(_PairModel):
    """Sparse Ising model over ``num_spins`` spins.

    ``couplings`` may be a ``{(i, j): J}`` mapping or an iterable of
    ``(i, j, J)`` triples; it is stored canonically with ``i < j``.
    """

    num_spins: int
    couplings: PairMap = field(default_factory=dict)
    fields: np.ndarray | None = None
    offset: float = 0.0

    def __post_init__(self):
        if self.num_spins < 0:
            raise ModelError("num_spins must be non-negative")
        object.__setattr__(self, "num_spins", int(self.num_spins))
        object.__setattr__(
            self, "couplings", _normalize_pairs(self.num_spins, self.couplings, what="IsingModel")
        )
        object.__setattr__(self, "fields", _dense_fields(self.num_spins, self.fields, what="IsingModel"))
        if not math.isfinite(self.offset):
            raise ModelError("IsingModel: non-finite offset")
        object.__setattr__(self, "offset", float(self.offset))

    def _size(self) -> int:
        return self.num_spins

    def __eq__(self, other):
        if not isinstance(other, IsingModel):
            return NotImplemented
        return (
            self.num_spins == other.num_spins
            and self.couplings == other.couplings
            and np.array_equal(self.fields, other.fields)
            and self.offset == other.offset
        )

    __hash__ = None

    @property
    def scale(self) -> float:
        """Sum of absolute coefficients; a natural magnitude for energy tolerances."""
        return (
            sum(abs(v) for v in self.couplings.values())
            + float(np.abs(self.fields).sum())
            + abs(self.offset)
        )

    def energy(self, state) -> float:
        return energy(self, state)


@dataclass(frozen=True, eq=False)
class XyModel(_PairModel):
    """Planar-rotor model; same storage rules as :class:`IsingModel`."""

    num_rotors: int
    couplings: PairMap = field(default_factory=dict)
    fields: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "num_rotors", int(self.num_rotors))
        object.__setattr__(
            self, "couplings", _normalize_pairs(self.num_rotors, self.couplings, what="XyModel")
        )
        object.__setattr__(self, "fields", _dense_fields(self.num_rotors, self.fields, what="XyModel"))

    def _size(self) -> int:
        return self.num_rotors


@dataclass(frozen=True, eq=False)
class QuboModel:
    """``sum_{i<=j} Q_ij x_i x_j + offset``; diagonal entries are linear terms."""

    num_vars: int
    terms: PairMap = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        n = int(self.num_vars)
        object.__setattr__(self, "num_vars", n)
        items = self.terms.items() if isinstance(self.terms, Mapping) else (
            ((a, b), v) for a, b, v in self.terms
        )
        out: PairMap = {}
        for (i, j), v in items:
            i, j, v = int(i), int(j), float(v)
            if not (0 <= i < n and 0 <= j < n):
                raise ModelError(f"QuboModel: term ({i}, {j}) out of range [0, {n})")
            if not math.isfinite(v):
                raise ModelError(f"QuboModel: non-finite term ({i}, {j})")
            key = (i, j) if i <= j else (j, i)
            if key in out:
                raise ModelError(f"QuboModel: duplicate term {key}")
            out[key] = v
        object.__setattr__(self, "terms", out)
        object.__setattr__(self, "offset", float(self.offset))

    def __eq__(self, other):
        if not isinstance(other, QuboModel):
            return NotImplemented
        return (self.num_vars, self.terms, self.offset) == (other.num_vars, other.terms, other.offset)

    __hash__ = None

    def value(self, x) -> float:
        x = np.asarray(x)
        if x.shape != (self.num_vars,):
            raise DimensionError("QUBO assignment", self.num_vars, x.size)
        total = 0.0
        for (i, j), q in self.terms.items():
            if x[i] and x[j]:
                total += q
        return total + self.offset


def as_spins(state, num_spins: int) -> np.ndarray:
    """Validate a spin vector and return it as an ``int8`` array."""
    s = np.asarray(state)
    if s.ndim != 1 or s.shape[0] != num_spins:
        raise DimensionError("spin state", num_spins, s.size if s.ndim else 1)
    if not np.all((s == 1) | (s == -1)):
        raise ModelError("spin state entries must be exactly -1 or +1")
    return s.astype(np.int8)


def _check_index(model: IsingModel, i: int) -> int:
    i = int(i)
    if not 0 <= i < model.num_spins:
        raise IndexError(f"spin index {i} out of range [0, {model.num_spins})")
    return i


def energy(model: IsingModel, state) -> float:
    s = as_spins(state, model.num_spins).astype(np.float64)
    i, j, v = model.pair_arrays
    return float(-np.dot(v, s[i] * s[j]) - np.dot(model.fields, s) + model.offset)


def energies(model: IsingModel, states: np.ndarray) -> np.ndarray:
    """Vectorized energy of a ``(k, V)`` batch of spin rows."""
    s = np.asarray(states, dtype=np.float64)
    if s.ndim != 2 or s.shape[1] != model.num_spins:
        raise DimensionError("spin batch width", model.num_spins, s.shape[-1])
    i, j, v = model.pair_arrays
    return -(s[:, i] * s[:, j]) @ v - s @ model.fields + model.offset


def local_field(model: IsingModel, state, i: int) -> float:
    """``sum_j J_ij s_j + h_i``, i.e. minus the derivative of H with respect to s_i."""
    i = _check_index(model, i)
    s = as_spins(state, model.num_spins)
    indptr, indices, data = model.csr
    lo, hi = indptr[i], indptr[i + 1]
    return float(np.dot(data[lo:hi], s[indices[lo:hi]]) + model.fields[i])


def flip_delta(model: IsingModel, state, i: int) -> float:
    """Energy change from flipping spin ``i``: ``2 s_i I_i``."""
    i = _check_index(model, i)
    s = as_spins(state, model.num_spins)
    return 2.0 * float(s[i]) * local_field(model, s, i)


def qubo_to_ising(q: QuboModel) -> IsingModel:
    """Substitute ``x_i = (1 + s_i) / 2``; the result has identical values state by state."""
    n = q.num_vars
    h = np.zeros(n)
    J: PairMap = {}
    offset = q.offset
    for (i, j), val in q.terms.items():
        if i == j:
            h[i] -= val / 2.0
            offset += val / 2.0
        else:
            J[(i, j)] = J.get((i, j), 0.0) - val / 4.0
            h[i] -= val / 4.0
            h[j] -= val / 4.0
            offset += val / 4.0
    return IsingModel(n, J, h, offset)


def ising_to_qubo(model: IsingModel) -> QuboModel:
    """Inverse substitution ``s_i = 2 x_i - 1``."""
    terms: PairMap = {}
    offset = model.offset
    lin = np.zeros(model.num_spins)
    for (i, j), val in model.couplings.items():
        # -J (2x_i - 1)(2x_j - 1) = -4J x_i x_j + 2J x_i + 2J x_j - J
        terms[(i, j)] = -4.0 * val
        lin[i] += 2.0 * val
        lin[j] += 2.0 * val
        offset -= val
    for i, hi in enumerate(model.fields):
        lin[i] -= 2.0 * hi
        offset += hi
    for i in range(model.num_spins):
        if lin[i] != 0.0:
            terms[(i, i)] = float(lin[i])
    return QuboModel(model.num_spins, terms, offset)


def xy_energy(model: XyModel, angles) -> float:
    """``-sum_{i<j} J_ij cos(t_i - t_j) - sum_i h_i cos(t_i)``."""
    t = np.asarray(angles, dtype=np.float64)
    if t.ndim != 1 or t.shape[0] != model.num_rotors:
        raise DimensionError("angle vector", model.num_rotors, t.size)
    i, j, v = model.pair_arrays
    return float(-np.dot(v, np.cos(t[i] - t[j])) - np.dot(model.fields, np.cos(t)))
