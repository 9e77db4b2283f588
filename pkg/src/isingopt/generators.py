"""Seeded benchmark instances.

Max-cut convention: a graph with edge weights ``w_ij`` becomes the Ising model
``J_ij = -w_ij / 2`` with offset ``-sum(w) / 2``, so that for every spin
colouring ``energy = -cut_weight``. Minimizing energy maximizes the cut.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError
from .ising import IsingModel
from .reduction import BilpInstance, Constraint

__all__ = [
    "GeneratorSpec",
    "parse_generator_spec",
    "generate",
    "maxcut_model",
    "cut_value",
    "random_ising",
    "knapsack",
    "random_bilp",
]

KINDS = ("maxcut-random", "maxcut-ring", "knapsack", "random-bilp", "ising-random")

_DEFAULTS = {
    "maxcut-random": {"n": 10, "p": 0.5, "wmin": 1, "wmax": 1},
    "maxcut-ring": {"n": 10, "w": 1},
    "knapsack": {"n": 3, "vmin": 1, "vmax": 10, "wmin": 1, "wmax": 10, "capacity": None},
    "random-bilp": {"n": 6, "m": 2, "cmin": -5, "cmax": 5, "int_hi": 1},
    "ising-random": {"n": 12, "density": 1.0, "field": 1.0},
}


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator {self.kind!r}; choose from {', '.join(KINDS)}")
        unknown = set(self.params) - set(_DEFAULTS[self.kind])
        if unknown:
            raise ValueError(f"{self.kind}: unknown parameter(s) {', '.join(sorted(unknown))}")

    def resolved(self) -> dict:
        return {**_DEFAULTS[self.kind], **self.params}

    def __str__(self) -> str:
        items = [f"{k}={v}" for k, v in sorted(self.params.items())] + [f"seed={self.seed}"]
        return f"{self.kind}:{','.join(items)}"


def parse_generator_spec(text: str, default_seed: int = 0) -> GeneratorSpec:
    """Parse ``kind[:key=value,...]``, e.g. ``knapsack:n=3,seed=7``."""
    kind, _, rest = text.partition(":")
    params: dict = {}
    seed = default_seed
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ParseError(f"generator spec: expected key=value, got {item!r}")
        try:
            num = float(val)
        except ValueError:
            raise ParseError(f"generator spec: {key} needs a number, got {val!r}") from None
        num = int(num) if num.is_integer() else num
        if key == "seed":
            seed = int(num)
        else:
            params[key.strip()] = num
    try:
        return GeneratorSpec(kind.strip(), params, seed)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def generate(spec: GeneratorSpec):
    p = spec.resolved()
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "maxcut-ring":
        n = int(p["n"])
        _check_size(n, 3)
        return maxcut_model(n, [(i, (i + 1) % n, p["w"]) for i in range(n)])
    if spec.kind == "maxcut-random":
        n = int(p["n"])
        _check_size(n, 1)
        _check_range(p["wmin"], p["wmax"])
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < p["p"]:
                    edges.append((i, j, int(rng.integers(p["wmin"], p["wmax"] + 1))))
        return maxcut_model(n, edges)
    if spec.kind == "knapsack":
        return knapsack(rng, int(p["n"]), (p["vmin"], p["vmax"]), (p["wmin"], p["wmax"]), p["capacity"])
    if spec.kind == "random-bilp":
        return random_bilp(rng, int(p["n"]), int(p["m"]), (p["cmin"], p["cmax"]), int(p["int_hi"]))
    return random_ising(rng, int(p["n"]), p["density"], p["field"])


def _check_size(n: int, minimum: int) -> None:
    if n < minimum:
        raise ValueError(f"size must be >= {minimum}, got {n}")


def _check_range(lo, hi) -> None:
    if lo > hi:
        raise ValueError(f"empty range [{lo}, {hi}]")


def maxcut_model(n: int, edges) -> IsingModel:
    """Ising model whose energy is minus the cut weight (see module docstring)."""
    couplings = {}
    total = 0.0
    for i, j, w in edges:
        key = (min(i, j), max(i, j))
        couplings[key] = couplings.get(key, 0.0) - w / 2.0
        total += w
    return IsingModel(n, couplings, offset=-total / 2.0)


def cut_value(model: IsingModel, state) -> float:
    """Cut weight of a colouring of a :func:`maxcut_model` graph."""
    s = np.asarray(state)
    return float(sum(-2.0 * J for (i, j), J in model.couplings.items() if s[i] != s[j]))


def random_ising(rng: np.random.Generator, n: int, density: float = 1.0, field: float = 1.0) -> IsingModel:
    """Gaussian couplings on each pair with probability ``density``; Gaussian fields scaled by ``field``."""
    _check_size(n, 1)
    couplings = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                couplings[(i, j)] = float(rng.normal())
    return IsingModel(n, couplings, field * rng.normal(size=n))


def knapsack(rng: np.random.Generator, n: int, values=(1, 10), weights=(1, 10), capacity=None) -> BilpInstance:
    """Maximize total value subject to one weight-capacity row.

    Default capacity is half the total weight (rounded down).
    """
    _check_size(n, 1)
    _check_range(*values)
    _check_range(*weights)
    v = rng.integers(values[0], values[1] + 1, size=n)
    w = rng.integers(weights[0], weights[1] + 1, size=n)
    cap = int(w.sum()) // 2 if capacity is None else capacity
    names = [f"item{k}" for k in range(n)]
    return BilpInstance.build(
        [float(x) for x in v],
        [Constraint(tuple((k, float(x)) for k, x in enumerate(w)), "<=", float(cap), "capacity")],
        maximize=True,
        names=names,
    )


def random_bilp(rng: np.random.Generator, n: int, m: int, coef=(-5, 5), int_hi: int = 1) -> BilpInstance:
    """Random feasible instance with integer data.

    A hidden assignment is drawn first and each row's right-hand side is set so
    that it satisfies the row (``<=``/``>=`` rows get a random margin of 0..2).
    Variables range over ``[0, int_hi]`` (binary when ``int_hi`` is 1).
    """
    _check_size(n, 1)
    _check_range(*coef)
    if int_hi < 1:
        raise ValueError("int_hi must be >= 1")
    hidden = rng.integers(0, int_hi + 1, size=n)
    c = rng.integers(coef[0], coef[1] + 1, size=n)
    cons = []
    for j in range(m):
        row = rng.integers(coef[0], coef[1] + 1, size=n)
        lhs = int(row @ hidden)
        sense = ("<=", "=", ">=")[int(rng.integers(0, 3))]
        margin = int(rng.integers(0, 3))
        rhs = lhs + margin if sense == "<=" else lhs - margin if sense == ">=" else lhs
        cons.append(Constraint(tuple((k, float(s)) for k, s in enumerate(row) if s != 0), sense, float(rhs)))
    return BilpInstance.build(
        [float(x) for x in c], cons, bounds=[(0, int_hi)] * n, names=[f"x{k}" for k in range(n)],
    )
