import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spingas import gas as G
from spingas.circuit import Design
from spingas.poly import Polynomial, VariableKind, binary_to_spin, evaluate_all
from spingas.problems import H74, SyndromeInstance, fixed_instance, mimo_objective, syndrome_objective

from conftest import random_terms

B, S = VariableKind.BINARY, VariableKind.SPIN
TOY = {(0, 1): 2.0, (2,): 1.0, (): -1.0}


def sin2_law(t, N, L):
    return math.sin((2 * L + 1) * math.asin(math.sqrt(t / N))) ** 2


def check_trace_invariants(trace, p, cfg):
    values = evaluate_all(p)
    d_cap = math.sqrt(values.size)
    prev_y = trace.y0
    qd = 0
    d = 1.0
    for i, r in enumerate(trace.records):
        assert r.c == i and r.cum_cd == i + 1
        assert r.y_c == prev_y
        assert r.d == d
        assert 0 <= r.L_c <= math.ceil(r.d - 1)
        qd += r.L_c
        assert r.cum_qd == qd
        assert r.value == values[r.x]
        assert r.improved == (r.value < r.y_c)
        assert r.best_value <= r.y_c
        if r.improved:
            d = 1.0
            assert r.best_value == r.value
        else:
            d = min(cfg.lam * d, d_cap)
            assert r.best_value == r.y_c
        assert d <= d_cap + 1e-12
        prev_y = r.best_value
    assert trace.best_value == prev_y == values[trace.best_index]


# -- configuration ----------------------------------------------------------


@pytest.mark.parametrize("kwargs", [
    {"lam": 1.0}, {"lam": 4 / 3}, {"max_queries": None, "max_iterations": None},
    {"max_queries": 0}, {"max_iterations": -1}, {"value_scale": 0},
])
def test_config_rejects(kwargs):
    with pytest.raises(ValueError):
        G.GasConfig(**kwargs)


def test_config_coerces_enums():
    cfg = G.GasConfig(backend="statevector", design="proposed")
    assert cfg.backend is G.Backend.STATEVECTOR and cfg.design is Design.PROPOSED


# -- the ideal law ----------------------------------------------------------


@pytest.mark.parametrize("t,N,L", [(1, 8, 0), (1, 8, 1), (3, 8, 1), (1, 256, 12), (5, 64, 3)])
def test_ideal_model(t, N, L):
    assert math.isclose(G.IdealOutcomeModel(0.0, t, N, L).marked_probability, sin2_law(t, N, L))


def test_ideal_model_edges():
    assert G.IdealOutcomeModel(0.0, 0, 8, 3).marked_probability == 0.0
    assert G.IdealOutcomeModel(0.0, 8, 8, 3).marked_probability == 1.0
    with pytest.raises(ValueError):
        G.IdealOutcomeModel(0.0, 9, 8, 0)


def test_marked_count_is_strict():
    table = G.ObjectiveTable(Polynomial.from_terms(B, 3, TOY))
    assert table.marked_count(-1.0) == 0
    assert table.marked_count(0.0) == 3
    assert table.marked_count(0.5) == 6


def test_ideal_sampler_frequencies():
    p = Polynomial.from_terms(B, 3, TOY)
    keys = G.ideal_sample(p, 0.0, 1, np.random.default_rng(2), size=100_000)
    vals = evaluate_all(p)[keys]
    q = sin2_law(3, 8, 1)
    sigma = math.sqrt(q * (1 - q) / keys.size)
    assert abs((vals < 0).mean() - q) < 4 * sigma
    # uniform within the marked set
    marked = keys[vals < 0]
    counts = np.bincount(marked, minlength=8)[[0, 1, 2]]
    band = 5 * math.sqrt(marked.size * (1 / 3) * (2 / 3))
    assert np.all(np.abs(counts - marked.size / 3) < band)


def test_ideal_sample_scalar():
    k = G.ideal_sample(Polynomial.from_terms(B, 3, TOY), 0.0, 1, 3)
    assert isinstance(k, int) and 0 <= k < 8


# -- the statevector backend ------------------------------------------------


@pytest.mark.parametrize("design", [Design.CONVENTIONAL, Design.PROPOSED])
def test_statevector_toy_grover(design):
    p = Polynomial.from_terms(B, 3, TOY)
    if design is Design.PROPOSED:
        p = binary_to_spin(p)
    oracle = G.StatevectorOracle(p)
    vals = evaluate_all(p)
    for L, want in [(0, 0.375), (1, 0.84375), (2, 0.0234375)]:
        probs = oracle.key_distribution(0.0, L)
        assert abs(probs[vals < 0].sum() - want) < 1e-9
        assert abs(want - sin2_law(3, 8, L)) < 1e-12


def test_statevector_random_integer_instances():
    rng = np.random.default_rng(21)
    for _ in range(5):
        n = int(rng.integers(2, 5))
        p = Polynomial.from_terms(S, n, random_terms(rng, n, 5, 3))
        vals = evaluate_all(p)
        y = float(rng.choice(vals))
        t = int((vals < y).sum())
        oracle = G.StatevectorOracle(p)
        for L in range(3):
            got = oracle.key_distribution(y, L)[vals < y].sum()
            assert abs(got - sin2_law(t, vals.size, L)) < 1e-9


def test_statevector_value_scale_resolves_fractional_values():
    p = Polynomial.from_terms(B, 2, {(0,): 0.25, (1,): 0.5, (): -0.3})
    vals = evaluate_all(p)  # -0.3, -0.05, 0.2, 0.45
    y = 0.1
    want = sin2_law(2, 4, 1)
    plain = G.StatevectorOracle(p).key_distribution(y, 1)[vals < y].sum()
    # 20 * (E - y) = -8, -3, 2, 7: integers, so the oracle is exact
    exact = G.StatevectorOracle(p, value_scale=20).key_distribution(y, 1)[vals < y].sum()
    assert abs(exact - want) < 1e-9
    assert abs(plain - want) > 1e-3


def test_statevector_resource_cap():
    p = Polynomial(B, 25, {1: 1.0, 2: 100.0})
    with pytest.raises(G.ResourceLimitError):
        G.StatevectorOracle(p).key_distribution(0.0, 0)


def test_statevector_sample_helper():
    p = Polynomial.from_terms(B, 3, TOY)
    keys = G.statevector_sample(p, 0.0, 1, None, None, 4, size=50)
    assert keys.shape == (50,)


# -- the optimiser ----------------------------------------------------------


@given(st.integers(0, 2**32 - 1), st.sampled_from([1.05, 8 / 7, 1.3]))
@settings(max_examples=30, deadline=None)
def test_trace_invariants_ideal(seed, lam):
    inst = SyndromeInstance(H74, np.array([1, 1, 0]))
    p = syndrome_objective(inst, S)
    cfg = G.GasConfig(lam=lam, max_queries=300, seed=seed)
    trace = G.gas_minimize(p, cfg)
    check_trace_invariants(trace, p, cfg)
    assert trace.terminated_by in ("max_queries", "max_iterations")


def test_trace_invariants_statevector():
    p = syndrome_objective(SyndromeInstance(H74), B)
    cfg = G.GasConfig(max_queries=60, backend="statevector", seed=1)
    trace = G.gas_minimize(p, cfg)
    check_trace_invariants(trace, p, cfg)
    assert trace.best_value == -3


def test_iteration_budget():
    p = Polynomial.from_terms(B, 3, TOY)
    trace = G.gas_minimize(p, G.GasConfig(max_queries=None, max_iterations=7))
    assert len(trace.records) == 7 and trace.terminated_by == "max_iterations"


def test_query_budget_stops_at_first_crossing():
    p = syndrome_objective(SyndromeInstance(H74), S)
    trace = G.gas_minimize(p, G.GasConfig(max_queries=50, max_iterations=None, seed=3))
    assert trace.total_queries >= 50
    assert trace.records[-2].cum_qd < 50


def test_queries_to_and_measurements_to():
    p = Polynomial.from_terms(B, 3, TOY)
    trace = G.gas_minimize(p, G.GasConfig(max_iterations=50, seed=9))
    opt = evaluate_all(p).min()
    q = trace.queries_to(opt)
    c = trace.measurements_to(opt)
    assert q is not None and c is not None
    assert trace.queries_to(opt - 1) is None


def test_trivial_problem_initial_draw():
    # one variable: the optimum is held from the start in about half the trials
    p = Polynomial.from_terms(B, 1, {(0,): 1.0})
    cfg = G.GasConfig(max_iterations=1)
    hits = [t.measurements_to(0.0) == 0 for t in G.run_trials(p, cfg, 400)]
    assert abs(np.mean(hits) - 0.5) < 5 * math.sqrt(0.25 / 400)


def test_run_trials_deterministic_and_parallel_consistent():
    p = syndrome_objective(SyndromeInstance(H74), S)
    cfg = G.GasConfig(max_queries=100, seed=17)
    a = G.run_trials(p, cfg, 6)
    b = G.run_trials(p, cfg, 6, workers=2)
    assert [t.records for t in a] == [t.records for t in b]


def test_fixed_instance_reaches_optimum():
    p = mimo_objective(fixed_instance(0), S)
    traces = G.run_trials(p, G.GasConfig(max_queries=2000, seed=5), 10)
    assert all(t.best_assignment == (0, 0, 0, 0, 1, 1, 1, 1) for t in traces)


# -- classical baselines ----------------------------------------------------


def test_exhaustive_search():
    bits, value, evals = G.exhaustive_search(Polynomial.from_terms(B, 3, TOY))
    assert value == -1 and evals == 8 and bits in [(0, 0, 0), (1, 0, 0), (0, 1, 0)]


def test_random_order_search_distribution():
    # a single optimum among N: evaluations are uniform on 1..N
    p = Polynomial.from_terms(B, 3, {(0, 1, 2): -1.0})
    rng = np.random.default_rng(0)
    draws = [G.random_order_search(p, rng) for _ in range(4000)]
    assert min(draws) == 1 and max(draws) == 8
    assert abs(np.mean(draws) - 4.5) < 0.15
