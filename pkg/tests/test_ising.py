import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import naive
from conftest import dense_random_model, random_state
from isingopt.errors import DimensionError, ModelError
from isingopt.ising import (
    IsingModel,
    QuboModel,
    XyModel,
    energies,
    energy,
    flip_delta,
    ising_to_qubo,
    local_field,
    qubo_to_ising,
    xy_energy,
)


def test_empty_model_energy_is_zero():
    m = IsingModel(3)
    for s in itertools.product((-1, 1), repeat=3):
        assert energy(m, s) == 0.0


def test_single_pair_counted_once():
    assert energy(IsingModel(2, {(0, 1): 1.0}), [1, 1]) == -1.0


def test_energy_seeded_model_matches_naive():
    rng = np.random.default_rng(42)
    n = 4
    J = {(i, j): float(rng.normal()) for i in range(n) for j in range(i + 1, n)}
    h = [float(v) for v in rng.normal(size=n)]
    m = IsingModel(n, J, h)
    # frozen from tests/naive.py
    assert energy(m, [1, -1, -1, 1]) == pytest.approx(-5.2873378596414655, rel=1e-12)
    for s in itertools.product((-1, 1), repeat=n):
        assert energy(m, s) == pytest.approx(naive.ising_energy(n, J, h, 0.0, s), rel=1e-12, abs=1e-12)


def test_energy_dimension_mismatch_names_lengths():
    with pytest.raises(DimensionError, match="expected length 3, got 2"):
        energy(IsingModel(3), [1, 1])


def test_invalid_models_rejected():
    with pytest.raises(ModelError, match="self-coupling"):
        IsingModel(2, {(1, 1): 1.0})
    with pytest.raises(ModelError, match="duplicate"):
        IsingModel(2, [(0, 1, 1.0), (1, 0, 2.0)])
    with pytest.raises(ModelError, match="out of range"):
        IsingModel(2, {(0, 2): 1.0})
    with pytest.raises(ModelError, match="-1 or \\+1"):
        energy(IsingModel(2), [1, 0])


def test_pairs_stored_canonically():
    m = IsingModel(3, [(2, 0, 1.5)])
    assert m.couplings == {(0, 2): 1.5}


def test_local_field_examples():
    m = IsingModel(2, {(0, 1): 1.0})
    assert local_field(m, [1, 1], 0) == 1.0
    h = [0.3, -1.2, 2.0]
    m = IsingModel(3, {}, h)
    for s in itertools.product((-1, 1), repeat=3):
        assert [local_field(m, s, i) for i in range(3)] == h
    with pytest.raises(IndexError):
        local_field(m, [1, 1, 1], 3)


def test_local_field_is_two_point_energy_difference():
    rng = np.random.default_rng(3)
    m = dense_random_model(rng, 6)
    for _ in range(20):
        s = random_state(rng, 6)
        for i in range(6):
            down, up = s.copy(), s.copy()
            down[i], up[i] = -1, 1
            assert local_field(m, s, i) == pytest.approx((energy(m, down) - energy(m, up)) / 2, abs=1e-12)


def test_flip_delta_examples():
    m = IsingModel(2, {(0, 1): 1.0})
    assert flip_delta(m, [1, 1], 0) == 2.0
    rng = np.random.default_rng(8)
    m = dense_random_model(rng, 8)
    s = random_state(rng, 8)
    for i in range(8):
        t = s.copy()
        t[i] = -t[i]
        d = flip_delta(m, s, i)
        assert d == pytest.approx(energy(m, t) - energy(m, s), abs=1e-12)
        assert d + flip_delta(m, t, i) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 16), density=st.floats(0.0, 1.0))
def test_flip_consistency_property(seed, n, density):
    rng = np.random.default_rng(seed)
    m = dense_random_model(rng, n, density)
    s = random_state(rng, n)
    i = int(rng.integers(0, n))
    assert flip_delta(m, s, i) == pytest.approx(2 * s[i] * local_field(m, s, i), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 12))
def test_global_flip_symmetry_without_fields(seed, n):
    rng = np.random.default_rng(seed)
    m = IsingModel(n, dense_random_model(rng, n).couplings)
    s = random_state(rng, n)
    assert energy(m, s) == pytest.approx(energy(m, -s), abs=1e-12)


def test_energy_independent_of_insertion_order():
    rng = np.random.default_rng(5)
    triples = [(i, j, float(rng.normal())) for i in range(7) for j in range(i + 1, 7)]
    h = rng.normal(size=7)
    a = IsingModel(7, triples, h)
    b = IsingModel(7, [triples[k] for k in rng.permutation(len(triples))], h)
    assert a == b
    s = random_state(rng, 7)
    assert energy(a, s) == energy(b, s)


def test_batched_energies_match_scalar():
    rng = np.random.default_rng(6)
    m = dense_random_model(rng, 5)
    states = np.array(list(itertools.product((-1, 1), repeat=5)))
    np.testing.assert_allclose(energies(m, states), [energy(m, s) for s in states], atol=1e-12)


def test_qubo_single_linear_term():
    q = QuboModel(1, {(0, 0): 1.0})
    m = qubo_to_ising(q)
    assert m.fields[0] == -0.5 and m.offset == 0.5
    assert energy(m, [-1]) == q.value([0]) == 0.0
    assert energy(m, [1]) == q.value([1]) == 1.0


def test_zero_qubo():
    m = qubo_to_ising(QuboModel(4))
    assert m.couplings == {} and not m.fields.any() and m.offset == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_qubo_to_ising_exhaustive(seed):
    rng = np.random.default_rng(seed)
    n = 5
    terms = {(i, j): float(rng.normal()) for i in range(n) for j in range(i, n) if rng.random() < 0.7}
    q = QuboModel(n, terms, float(rng.normal()))
    m = qubo_to_ising(q)
    for x in itertools.product((0, 1), repeat=n):
        s = [2 * v - 1 for v in x]
        assert energy(m, s) == pytest.approx(naive.qubo_value(terms, q.offset, x), abs=1e-12)


def test_ising_to_qubo_round_trip_values():
    rng = np.random.default_rng(11)
    m = dense_random_model(rng, 6)
    q = ising_to_qubo(m)
    for x in itertools.product((0, 1), repeat=6):
        assert q.value(x) == pytest.approx(energy(m, [2 * v - 1 for v in x]), abs=1e-12)


def test_xy_examples():
    rng = np.random.default_rng(7)
    n = 4
    J = {(i, j): float(rng.normal()) for i in range(n) for j in range(i + 1, n)}
    h = [float(v) for v in rng.normal(size=n)]
    theta = rng.uniform(0, 2 * np.pi, n)
    m = XyModel(n, J, h)
    # frozen from tests/naive.py
    assert xy_energy(m, theta) == pytest.approx(1.016527678029527, rel=1e-12)
    m0 = XyModel(n, J)
    assert xy_energy(m0, np.zeros(n)) == pytest.approx(-sum(J.values()), abs=1e-12)
    with pytest.raises(DimensionError):
        xy_energy(m, [0.0])


def test_xy_embeds_ising():
    rng = np.random.default_rng(9)
    im = dense_random_model(rng, 5)
    xm = XyModel(5, im.couplings, im.fields)
    for s in itertools.product((-1, 1), repeat=5):
        theta = [0.0 if v == 1 else math.pi for v in s]
        assert xy_energy(xm, theta) == pytest.approx(energy(im, s), abs=1e-9)
