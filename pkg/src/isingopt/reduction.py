"""Compile bounded-integer linear programs into QUBO / Ising form.

Every instance is held in minimization form. The penalty Hamiltonian is::

    QUBO(y) = A * sum_rows (t_j - sum_k a_jk y_k)**2 + B * (c . x(y)) + constant_shift

over the bits ``y`` of all variables and slacks, where each row has been
rewritten as an equality ``sum_k a_jk y_k = t_j`` (``<=`` rows gain a
non-negative integer slack, ``>=`` rows are negated first). The constant
part of the expansion is kept out of the QUBO offset and reported as
``constant_shift`` (it is minus that constant), so the QUBO is a pure
quadratic form.

With integer data and weights from :func:`choose_weights`, every ground state
decodes to a feasible optimum whenever the instance is feasible: a violated
row costs at least ``A`` while the objective can improve by at most ``A - 1``.
For non-integer coefficients the reduction still runs but that guarantee does
not hold.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ModelError, ReductionError
from .ising import IsingModel, QuboModel, as_spins, qubo_to_ising

__all__ = [
    "Constraint",
    "BilpInstance",
    "PenaltyWeights",
    "VarEncoding",
    "ReductionArtifact",
    "Decoded",
    "expansion_weights",
    "expand_integers",
    "choose_weights",
    "reduce",
    "encode",
    "decode",
    "evaluate",
]

SENSES = ("=", "<=", ">=")
DEFAULT_MAX_BITS = 24


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[tuple[int, float], ...]
    sense: str
    rhs: float
    name: str | None = None

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ModelError(f"unknown constraint sense {self.sense!r}")
        coeffs = tuple((int(i), float(s)) for i, s in self.coeffs)
        seen = set()
        for i, s in coeffs:
            if i in seen:
                raise ModelError(f"constraint {self.name or ''}: variable {i} repeated")
            seen.add(i)
            if not math.isfinite(s):
                raise ModelError(f"constraint {self.name or ''}: non-finite coefficient")
        if not math.isfinite(self.rhs):
            raise ModelError(f"constraint {self.name or ''}: non-finite right-hand side")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "rhs", float(self.rhs))

    def lhs(self, x) -> float:
        return float(sum(s * x[i] for i, s in self.coeffs))


@dataclass(frozen=True)
class BilpInstance:
    """Linear objective over binary and bounded-integer variables.

    The objective is always minimized. ``maximize`` records that the source
    problem was a maximization whose objective has already been negated.
    """

    num_vars: int
    objective: tuple[float, ...]
    constraints: tuple[Constraint, ...] = ()
    bounds: tuple[tuple[int, int], ...] | None = None
    kinds: tuple[str, ...] | None = None
    objective_offset: float = 0.0
    names: tuple[str, ...] | None = None
    maximize: bool = False

    def __post_init__(self):
        n = int(self.num_vars)
        object.__setattr__(self, "num_vars", n)
        # "+ 0.0" turns -0.0 (from negating a maximize objective) into 0.0
        obj = tuple(float(v) + 0.0 for v in self.objective)
        if len(obj) != n:
            raise DimensionError("objective", n, len(obj))
        if not all(math.isfinite(v) for v in obj) or not math.isfinite(self.objective_offset):
            raise ModelError("non-finite objective coefficient")
        object.__setattr__(self, "objective", obj)
        kinds = tuple(self.kinds) if self.kinds is not None else ("binary",) * n
        if len(kinds) != n:
            raise DimensionError("kinds", n, len(kinds))
        for k in kinds:
            if k == "continuous":
                raise ModelError(
                    "continuous variables are not supported; bound them and declare them "
                    "integer (binary expansion) or discretize them first"
                )
            if k not in ("binary", "integer"):
                raise ModelError(f"unknown variable kind {k!r}")
        if self.bounds is None:
            if any(k == "integer" for k in kinds):
                raise ModelError("integer variables need finite bounds")
            bounds = ((0, 1),) * n
        else:
            bounds = []
            for v, ((lo, hi), kind) in enumerate(zip(self.bounds, kinds)):
                if not (math.isfinite(lo) and math.isfinite(hi)):
                    raise ModelError(f"variable {v}: bounds must be finite")
                if lo != int(lo) or hi != int(hi):
                    raise ModelError(f"variable {v}: bounds must be integers")
                lo, hi = int(lo), int(hi)
                if lo > hi:
                    raise ModelError(f"variable {v}: empty range [{lo}, {hi}]")
                if kind == "binary" and (lo, hi) != (0, 1):
                    raise ModelError(f"variable {v}: binary variables have bounds [0, 1]")
                bounds.append((lo, hi))
            if len(bounds) != n:
                raise DimensionError("bounds", n, len(bounds))
            bounds = tuple(bounds)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "kinds", kinds)
        cons = tuple(self.constraints)
        for con in cons:
            for i, _ in con.coeffs:
                if not 0 <= i < n:
                    raise ModelError(f"constraint {con.name or ''}: variable index {i} out of range")
        object.__setattr__(self, "constraints", cons)
        if self.names is not None:
            names = tuple(self.names)
            if len(names) != n or len(set(names)) != n:
                raise ModelError("names must be unique, one per variable")
            object.__setattr__(self, "names", names)
        object.__setattr__(self, "objective_offset", float(self.objective_offset) + 0.0)

    @classmethod
    def build(
        cls,
        objective: Sequence[float],
        constraints: Sequence = (),
        *,
        bounds=None,
        kinds=None,
        maximize: bool = False,
        names=None,
        objective_offset: float = 0.0,
    ) -> "BilpInstance":
        """Convenience constructor.

        ``constraints`` items are :class:`Constraint` objects or
        ``(coeffs, sense, rhs)`` tuples where ``coeffs`` is a dense sequence or
        a ``{index: coefficient}`` mapping. Maximization objectives are negated.
        """
        cons = []
        for item in constraints:
            if isinstance(item, Constraint):
                cons.append(item)
                continue
            coeffs, sense, rhs = item
            if isinstance(coeffs, dict):
                pairs = tuple(sorted(coeffs.items()))
            else:
                pairs = tuple((i, s) for i, s in enumerate(coeffs) if s != 0)
            cons.append(Constraint(pairs, sense, rhs))
        obj = [float(v) for v in objective]
        if maximize:
            obj = [-v for v in obj]
            objective_offset = -objective_offset
        if kinds is None and bounds is not None:
            kinds = tuple("binary" if tuple(b) == (0, 1) else "integer" for b in bounds)
        return cls(len(obj), tuple(obj), tuple(cons), bounds=None if bounds is None else tuple(
            tuple(b) for b in bounds), kinds=kinds, objective_offset=objective_offset,
            names=names, maximize=maximize)

    @property
    def is_integral(self) -> bool:
        vals = [v for con in self.constraints for _, v in con.coeffs]
        vals += [con.rhs for con in self.constraints]
        return all(float(v).is_integer() for v in vals)


@dataclass(frozen=True)
class PenaltyWeights:
    """``A`` scales the constraint penalty, ``B`` the objective; normally ``A > B``."""

    A: float
    B: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.A) and math.isfinite(self.B)):
            raise ReductionError("penalty weights must be finite")
        if not self.B > 0:
            raise ReductionError("penalty weight B must be positive")
        if not self.A >= self.B:
            raise ReductionError(f"penalty weight A={self.A} must be at least B={self.B}")


@dataclass(frozen=True)
class VarEncoding:
    """``value = offset + sum(w * bit)`` over the listed QUBO bits."""

    offset: int
    bits: tuple[int, ...]
    weights: tuple[int, ...]

    @property
    def span(self) -> int:
        return sum(self.weights)


@dataclass(frozen=True)
class _Row:
    terms: tuple[tuple[int, float], ...]
    target: float


@dataclass(frozen=True)
class ReductionArtifact:
    instance: BilpInstance
    qubo: QuboModel
    ising: IsingModel
    bit_map: tuple[VarEncoding, ...]
    # constraint index -> slack encoding (inequality rows only)
    slack_map: dict[int, VarEncoding]
    weights: PenaltyWeights
    constant_shift: float
    rows: tuple[_Row, ...] = field(repr=False, default=())
    # per constraint: +1 if stored as written, -1 if a >= row was negated
    row_signs: tuple[int, ...] = field(repr=False, default=())

    @property
    def num_spins(self) -> int:
        return self.qubo.num_vars

    def summary(self) -> dict:
        return {
            "num_spins": self.num_spins,
            "variable_bits": sum(len(e.bits) for e in self.bit_map),
            "slack_bits": sum(len(e.bits) for e in self.slack_map.values()),
            "penalty_A": self.weights.A,
            "penalty_B": self.weights.B,
            "constant_shift": self.constant_shift,
            "num_couplings": len(self.ising.couplings),
        }


@dataclass
class Decoded:
    x: tuple[int, ...]
    objective: float
    feasible: bool
    violation: float


def expansion_weights(span: int) -> tuple[int, ...]:
    """Bit weights ``1, 2, 4, ..., residual`` whose subset sums are exactly ``0..span``."""
    if span < 0:
        raise ValueError("span must be non-negative")
    w = []
    total, p = 0, 1
    while total + p <= span:
        w.append(p)
        total += p
        p *= 2
    if total < span:
        w.append(span - total)
    return tuple(w)


def _split_value(r: int, weights: tuple[int, ...]) -> list[int]:
    """Bits selecting a subset of ``weights`` (as built by expansion_weights) summing to ``r``."""
    bits = [0] * len(weights)
    m = 0
    while m < len(weights) and weights[m] == 1 << m:
        m += 1
    if m < len(weights) and r > (1 << m) - 1:
        bits[m] = 1
        r -= weights[m]
    for k in range(m):
        bits[k] = (r >> k) & 1
    return bits


def _expand(instance: BilpInstance, max_bits: int):
    encodings = []
    nbits = 0
    for v, (lo, hi) in enumerate(instance.bounds):
        w = expansion_weights(hi - lo)
        if len(w) > max_bits:
            raise ReductionError(
                f"variable {v}: range [{lo}, {hi}] needs {len(w)} bits, above max_bits={max_bits}"
            )
        encodings.append(VarEncoding(lo, tuple(range(nbits, nbits + len(w))), w))
        nbits += len(w)
    return encodings, nbits


def expand_integers(instance: BilpInstance, max_bits: int = DEFAULT_MAX_BITS) -> BilpInstance:
    """Rewrite every integer variable as a weighted sum of binary variables.

    A variable fixed by its bounds gets no bits; its value is folded into the
    objective offset and the right-hand sides.
    """
    encodings, nbits = _expand(instance, max_bits)
    obj = [0.0] * nbits
    offset = instance.objective_offset
    for c, enc in zip(instance.objective, encodings):
        offset += c * enc.offset
        for b, w in zip(enc.bits, enc.weights):
            obj[b] = c * w
    cons = []
    for con in instance.constraints:
        rhs = con.rhs
        coeffs = []
        for i, s in con.coeffs:
            enc = encodings[i]
            rhs -= s * enc.offset
            coeffs.extend((b, s * w) for b, w in zip(enc.bits, enc.weights))
        cons.append(Constraint(tuple(coeffs), con.sense, rhs, con.name))
    names = None
    if instance.names is not None:
        names = tuple(
            f"{instance.names[v]}#{k}" for v, enc in enumerate(encodings) for k in range(len(enc.bits))
        )
    return BilpInstance(
        nbits, tuple(obj), tuple(cons), objective_offset=offset, names=names, maximize=instance.maximize
    )


def choose_weights(instance: BilpInstance) -> PenaltyWeights:
    """``B = 1`` and ``A = 1 + sum_i |c_i| (hi_i - lo_i)``.

    The sum bounds how much the objective can differ between any two in-bounds
    assignments, so with integer data a violated row (residual >= 1, penalty
    >= A) always costs more than any objective gain. For binary variables this
    is ``A = 1 + sum |c_i|``.
    """
    spread = sum(abs(c) * (hi - lo) for c, (lo, hi) in zip(instance.objective, instance.bounds))
    return PenaltyWeights(A=spread + 1.0, B=1.0)


def reduce(
    instance: BilpInstance,
    weights: PenaltyWeights | None = None,
    *,
    max_bits: int = DEFAULT_MAX_BITS,
) -> ReductionArtifact:
    if weights is None:
        weights = choose_weights(instance)
    A, B = weights.A, weights.B
    bit_map, nbits = _expand(instance, max_bits)
    rows: list[_Row] = []
    slack_map: dict[int, VarEncoding] = {}
    signs = []
    for j, con in enumerate(instance.constraints):
        sign = -1.0 if con.sense == ">=" else 1.0
        signs.append(int(sign))
        target = sign * con.rhs
        terms = []
        for i, s in con.coeffs:
            enc = bit_map[i]
            target -= sign * s * enc.offset
            terms.extend((b, sign * s * w) for b, w in zip(enc.bits, enc.weights))
        if con.sense != "=":
            lhs_min = sum(min(a, 0.0) for _, a in terms)
            lhs_max = sum(max(a, 0.0) for _, a in terms)
            s_hi = math.floor(target - lhs_min + 1e-9)
            if s_hi < 0:
                raise ReductionError(
                    f"constraint {con.name or j}: cannot be satisfied within variable bounds "
                    f"(minimum left-hand side {lhs_min + 0.0} exceeds {target})"
                )
            s_lo = max(0, math.floor(target - lhs_max + 1e-9))
            w = expansion_weights(s_hi - s_lo)
            if len(w) > max_bits:
                raise ReductionError(
                    f"constraint {con.name or j}: slack range [{s_lo}, {s_hi}] needs {len(w)} bits, "
                    f"above max_bits={max_bits}"
                )
            slack = VarEncoding(s_lo, tuple(range(nbits, nbits + len(w))), w)
            nbits += len(w)
            slack_map[j] = slack
            target -= s_lo
            terms.extend(zip(slack.bits, (float(v) for v in w)))
        rows.append(_Row(tuple(terms), float(target)))

    acc: dict[tuple[int, int], float] = {}

    def add(i, k, v):
        key = (i, k) if i <= k else (k, i)
        acc[key] = acc.get(key, 0.0) + v

    const = 0.0
    for row in rows:
        t = row.target
        const += A * t * t
        for idx, (b, a) in enumerate(row.terms):
            add(b, b, A * (a * a - 2.0 * t * a))
            for b2, a2 in row.terms[idx + 1:]:
                add(b, b2, 2.0 * A * a * a2)
    const += B * instance.objective_offset
    for c, enc in zip(instance.objective, bit_map):
        const += B * c * enc.offset
        for b, w in zip(enc.bits, enc.weights):
            add(b, b, B * c * w)
    for key, v in acc.items():
        if not math.isfinite(v):
            raise ReductionError(f"non-finite QUBO term at {key}")
    qubo = QuboModel(nbits, {k: v for k, v in acc.items() if v != 0.0}, 0.0)
    return ReductionArtifact(
        instance=instance,
        qubo=qubo,
        ising=qubo_to_ising(qubo),
        bit_map=tuple(bit_map),
        slack_map=slack_map,
        weights=weights,
        constant_shift=-const,
        rows=tuple(rows),
        row_signs=tuple(signs),
    )


def evaluate(instance: BilpInstance, x) -> Decoded:
    """Objective, feasibility and squared violation of an integer assignment.

    Feasibility is exact for integer data and uses a 1e-9 tolerance otherwise.
    """
    x = tuple(int(v) for v in x)
    if len(x) != instance.num_vars:
        raise DimensionError("assignment", instance.num_vars, len(x))
    tol = 0.0 if instance.is_integral else 1e-9
    violation = 0.0
    ok = True
    for con in instance.constraints:
        lhs = con.lhs(x)
        if con.sense == "=":
            r = lhs - con.rhs
            bad = abs(r) > tol
        elif con.sense == "<=":
            r = max(0.0, lhs - con.rhs)
            bad = r > tol
        else:
            r = max(0.0, con.rhs - lhs)
            bad = r > tol
        if bad:
            ok = False
            violation += r * r
    obj = sum(c * v for c, v in zip(instance.objective, x)) + instance.objective_offset
    return Decoded(x, float(obj), ok, float(violation))


def encode(artifact: ReductionArtifact, x) -> np.ndarray:
    """Spin state for ``x``; each slack takes the value closest to closing its row."""
    inst = artifact.instance
    x = [int(v) for v in x]
    if len(x) != inst.num_vars:
        raise DimensionError("assignment", inst.num_vars, len(x))
    y = np.zeros(artifact.num_spins, dtype=np.int64)
    for v, (val, enc, (lo, hi)) in enumerate(zip(x, artifact.bit_map, inst.bounds)):
        if not lo <= val <= hi:
            raise ValueError(f"variable {v} = {val} outside bounds [{lo}, {hi}]")
        for b, bit in zip(enc.bits, _split_value(val - enc.offset, enc.weights)):
            y[b] = bit
    for j, slack in artifact.slack_map.items():
        con = inst.constraints[j]
        sign = artifact.row_signs[j]
        need = sign * (con.rhs - con.lhs(x))
        s = min(max(math.floor(need + 1e-9), slack.offset), slack.offset + slack.span)
        for b, bit in zip(slack.bits, _split_value(s - slack.offset, slack.weights)):
            y[b] = bit
    return (2 * y - 1).astype(np.int8)


def decode(artifact: ReductionArtifact, state) -> Decoded:
    s = as_spins(state, artifact.num_spins)
    y = (s.astype(np.int64) + 1) // 2
    x = tuple(enc.offset + int(sum(w * y[b] for b, w in zip(enc.bits, enc.weights))) for enc in artifact.bit_map)
    return evaluate(artifact.instance, x)
