import math

import numpy as np
import pytest

from conftest import BACKENDS, dense_random_model, random_state
from isingopt.annealer import (
    AnnealParams,
    AnnealSchedule,
    NoiseConfig,
    anneal,
    greedy_descent,
    run_chain,
    sample,
    temperature_at,
)
from isingopt.errors import EngineDivergence
from isingopt.ising import IsingModel, energy, flip_delta
from isingopt.oracle import enumerate_ising


def report_key(r):
    return (r.best_state.tobytes(), r.best_energy, r.energy_trace.tobytes(), r.accepted_flips, r.seed)


def test_temperature_schedule():
    s = AnnealSchedule(2.0, 0.02, 3)
    assert temperature_at(s, 0) == 2.0
    assert temperature_at(s, 1) == pytest.approx(0.2, rel=1e-12)
    assert temperature_at(s, 2) == pytest.approx(0.02, rel=1e-12)
    lin = AnnealSchedule(2.0, 0.5, 4, "linear")
    assert list(lin.temperatures()) == pytest.approx([2.0, 1.5, 1.0, 0.5])
    assert temperature_at(AnnealSchedule(1.0, 1.0, 1), 0) == 1.0
    with pytest.raises(IndexError):
        temperature_at(s, 3)


def test_parameter_validation():
    with pytest.raises(ValueError):
        AnnealSchedule(t_start=0.1, t_end=1.0)
    with pytest.raises(ValueError):
        AnnealSchedule(sweeps=0)
    with pytest.raises(ValueError):
        NoiseConfig(p_input_invert=1.5)
    with pytest.raises(ValueError):
        AnnealParams(restarts=0)
    with pytest.raises(ValueError):
        AnnealParams(update_rule="heatbath")


def test_single_spin_greedy(backend):
    m = IsingModel(1, {}, [1.0])
    r = anneal(m, AnnealParams(update_rule="greedy", restarts=3), backend=backend)
    assert list(r.best_state) == [1] and r.best_energy == -1.0


def test_two_spin_gibbs_finds_ground(backend):
    m = IsingModel(2, {(0, 1): 1.0})
    p = AnnealParams(AnnealSchedule(2.0, 0.05, 200), restarts=20, update_rule="gibbs")
    r = anneal(m, p, backend=backend)
    assert r.best_energy == -1.0 and r.best_energy == energy(m, r.best_state)


@pytest.mark.parametrize("rule", ["gibbs", "metropolis", "greedy"])
@pytest.mark.parametrize("order", ["sequential", "random"])
def test_determinism_and_trace(rule, order, backend):
    rng = np.random.default_rng(4)
    m = dense_random_model(rng, 9)
    p = AnnealParams(AnnealSchedule(sweeps=60), NoiseConfig(0.05, 0.02), restarts=4, seed=123,
                     update_rule=rule, sweep_order=order)
    a, b = anneal(m, p, backend=backend), anneal(m, p, backend=backend)
    assert report_key(a) == report_key(b)
    assert np.all(np.diff(a.energy_trace) <= 0)
    assert a.energy_trace[-1] == a.best_energy == energy(m, a.best_state)
    c = anneal(m, AnnealParams(**{**p.__dict__, "seed": 124}), backend=backend)
    assert report_key(c) != report_key(a)


def test_backend_parity():
    if len(BACKENDS) < 2:
        pytest.skip("compiled extension not built")
    rng = np.random.default_rng(12)
    m = dense_random_model(rng, 11, density=0.7)
    for rule in ("gibbs", "metropolis", "greedy"):
        p = AnnealParams(AnnealSchedule(sweeps=40), NoiseConfig(0.1, 0.05), restarts=3, seed=9,
                         update_rule=rule, sweep_order="random")
        assert report_key(anneal(m, p, backend="compiled")) == report_key(anneal(m, p, backend="python"))


def test_tie_goes_to_lowest_chain(backend):
    m = IsingModel(2, {(0, 1): 1.0})
    r = anneal(m, AnnealParams(AnnealSchedule(sweeps=50), restarts=10), backend=backend)
    assert r.info["best_chain"] == 0


def test_zero_temperature_accepts_no_uphill(backend):
    rng = np.random.default_rng(21)
    m = dense_random_model(rng, 12)
    temps = np.geomspace(2.0, 1e-9, 200)
    ch = run_chain(m, temps, seed=3, update_rule="metropolis", backend=backend)
    assert ch.max_uphill[-1] <= 0.0
    assert np.all(ch.max_uphill[-20:] <= 0.0)
    assert np.any(ch.max_uphill[:20] > 0.0)


def test_greedy_zero_field_tie_breaks_up(backend):
    # an isolated spin with zero local field under the zero-temperature rule ends at +1
    ch = run_chain(IsingModel(1), [1.0] * 3, seed=0, update_rule="greedy", start=[-1], backend=backend)
    assert list(ch.final_state) == [1]


def two_spin_boltzmann(m, T):
    states = [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    w = np.array([math.exp(-energy(m, s) / T) for s in states])
    return states, w / w.sum()


def batch_mean_se(indicator, batches=100):
    means = indicator[: len(indicator) // batches * batches].reshape(batches, -1).mean(axis=1)
    return means.std(ddof=1) / math.sqrt(batches)


@pytest.mark.parametrize("rule", ["gibbs", "metropolis"])
def test_fixed_temperature_stationarity(rule, backend):
    m = IsingModel(2, {(0, 1): 0.7}, [0.3, -0.4])
    x = sample(m, 1.0, 20000, seed=5, update_rule=rule, burn_in=100, backend=backend)
    states, p = two_spin_boltzmann(m, 1.0)
    for s, ps in zip(states, p):
        ind = np.all(x == s, axis=1).astype(float)
        assert abs(ind.mean() - ps) <= 4 * batch_mean_se(ind)


def test_noise_off_matches_plain_anneal(backend):
    rng = np.random.default_rng(8)
    m = dense_random_model(rng, 8)
    base = AnnealParams(AnnealSchedule(sweeps=30), restarts=2, seed=1)
    explicit = AnnealParams(AnnealSchedule(sweeps=30), NoiseConfig(0.0, 0.0), restarts=2, seed=1)
    assert report_key(anneal(m, base, backend=backend)) == report_key(anneal(m, explicit, backend=backend))


def test_output_inversion_makes_chain_ergodic(backend):
    # at a temperature where the plain chain is frozen, output inversion still visits every state
    m = IsingModel(2, {(0, 1): 1.0})
    frozen = sample(m, 1e-6, 10_000, seed=2, update_rule="greedy", start=[1, 1], backend=backend)
    assert len({tuple(r) for r in frozen}) == 1
    noisy = sample(m, 1e-6, 10_000, seed=2, update_rule="greedy", start=[1, 1],
                   noise=NoiseConfig(p_output_invert=0.5), backend=backend)
    assert len({tuple(r) for r in noisy}) == 4


def test_input_inversion_changes_dynamics(backend):
    m = IsingModel(2, {(0, 1): 1.0})
    x = sample(m, 1e-6, 5000, seed=2, update_rule="greedy", start=[1, 1],
               noise=NoiseConfig(p_input_invert=0.3), backend=backend)
    assert len({tuple(r) for r in x}) > 1


def test_divergence_reports_sweep(backend):
    m = IsingModel(2, {(0, 1): 1e308}, [1e308, 1e308])
    with pytest.raises(EngineDivergence) as err:
        anneal(m, AnnealParams(AnnealSchedule(sweeps=5), restarts=1), backend=backend)
    assert err.value.step is not None


def test_greedy_examples():
    m = IsingModel(2, {(0, 1): 1.0})
    r = greedy_descent(m, [1, -1])
    assert r.best_energy == -1.0 and r.best_state[0] == r.best_state[1]
    g = enumerate_ising(m).best_states[0]
    r = greedy_descent(m, g)
    assert tuple(r.best_state) == g and r.accepted_flips == 0


def test_greedy_endpoints_are_local_minima():
    rng = np.random.default_rng(10)
    m = dense_random_model(rng, 10)
    for _ in range(100):
        r = greedy_descent(m, random_state(rng, 10))
        assert all(flip_delta(m, r.best_state, i) >= 0 for i in range(10))
        assert np.all(np.diff(r.energy_trace) <= 0)
        assert r.best_energy == pytest.approx(energy(m, r.best_state), abs=1e-12)


def test_metropolis_matches_oracle_mostly():
    hits = 0
    for seed in range(20):
        m = dense_random_model(np.random.default_rng(seed), 12)
        r = anneal(m, AnnealParams(restarts=10, update_rule="metropolis", seed=seed))
        hits += r.best_energy <= enumerate_ising(m).best_value + 1e-9
    assert hits >= 18
