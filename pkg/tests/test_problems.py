import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spingas import problems as PR
from spingas.poly import VariableKind, binary_to_spin, degree_census, evaluate, evaluate_all

from conftest import all_bits, index_of

B, S = VariableKind.BINARY, VariableKind.SPIN


# -- QAM --------------------------------------------------------------------


def nested_gray(bits, M):
    """Standard nested Gray form: p0 (2^(M-1) - p1 (2^(M-2) - p2 (...)))."""
    acc = 0.0
    for k in reversed(range(M)):
        p = 1 - 2 * bits[k]
        acc = p * (2 ** (M - 1 - k) - acc) if k < M - 1 else p * 1.0
    return acc


@pytest.mark.parametrize("M,A", [(1, 2), (2, 10), (3, 42)])
def test_qam_normalization(M, A):
    assert PR.qam_normalization(M) == A
    # unit average energy over the whole constellation
    energies = [abs(PR.qam_symbol_binary(b, 0, M)) ** 2 for b in itertools.product((0, 1), repeat=2 * M)]
    assert math.isclose(np.mean(energies), 1.0)


def test_16qam_table_entries():
    s = math.sqrt(10)
    table = {
        (0, 0, 0, 0): (1 + 1j) / s,
        (0, 0, 1, 1): (3 + 3j) / s,
        (1, 1, 0, 0): (-1 - 1j) / s,
        (1, 0, 1, 0): (-3 + 1j) / s,
        (0, 1, 1, 1): (3 - 3j) / s,
    }
    for bits, want in table.items():
        assert abs(PR.qam_symbol_binary(bits, 0, 2) - want) < 1e-12


@pytest.mark.parametrize("M", [1, 2, 3])
def test_gray_mapping_matches_nested_form(M):
    A = PR.qam_normalization(M)
    for bits in itertools.product((0, 1), repeat=2 * M):
        re = nested_gray(bits[0::2], M)
        im = nested_gray(bits[1::2], M)
        assert abs(PR.qam_symbol_binary(bits, 0, M) - complex(re, im) / math.sqrt(A)) < 1e-12


@pytest.mark.parametrize("M", [1, 2, 3])
def test_gray_neighbours_differ_in_one_bit(M):
    pts = {}
    for bits in itertools.product((0, 1), repeat=2 * M):
        pts[bits] = PR.qam_symbol_binary(bits, 0, M) * math.sqrt(PR.qam_normalization(M))
    for a, za in pts.items():
        for b, zb in pts.items():
            if math.isclose(abs(za - zb), 2.0):
                assert sum(x != y for x, y in zip(a, b)) == 1


def test_symbol_index_bounds():
    with pytest.raises(IndexError):
        PR.qam_symbol_binary((0, 0, 0, 0), 1, 2)


# -- MIMO objective ---------------------------------------------------------


def direct_distance(inst, bits):
    t = np.array([PR.qam_symbol_binary(bits, v, inst.M) for v in range(inst.N_t)])
    return float(np.linalg.norm(inst.r - inst.H_c @ t / math.sqrt(inst.N_t)) ** 2)


@pytest.mark.parametrize("kind", [B, S])
def test_fixed_instance_objective_matches_distance(kind):
    inst = PR.fixed_instance(0)
    p = PR.mimo_objective(inst, kind)
    vals = evaluate_all(p)
    for bits in all_bits(inst.n):
        assert abs(vals[index_of(bits)] - direct_distance(inst, bits)) < 1e-9


def test_fixed_instance_minimiser():
    inst = PR.fixed_instance(0)
    vals = evaluate_all(PR.mimo_objective(inst, B))
    assert int(np.argmin(vals)) == index_of(PR.FIXED_BITS)


def test_received_signal_definition():
    inst = PR.fixed_instance(3)
    want = inst.H_c @ inst.t / math.sqrt(2) + inst.sigma * inst.noise
    np.testing.assert_allclose(inst.r, want)


@given(st.integers(1, 2), st.integers(2, 3), st.integers(1, 3), st.integers(0, 2**31))
@settings(max_examples=12, deadline=None)
def test_random_instance_objective(M, N_t, N_r, seed):
    if 2 * M * N_t > 10:
        N_t = 2
    inst = PR.random_instance(N_t, N_r, M, 0.3, np.random.default_rng(seed))
    p = PR.mimo_objective(inst, S)
    rng = np.random.default_rng(seed)
    for _ in range(20):
        bits = tuple(int(b) for b in rng.integers(0, 2, inst.n))
        assert abs(evaluate(p, bits) - direct_distance(inst, bits)) < 1e-9
        assert abs(inst.distance(bits) - direct_distance(inst, bits)) < 1e-9


def test_spin_objective_is_conversion_of_binary():
    inst = PR.fixed_instance(0)
    assert binary_to_spin(PR.mimo_objective(inst, B)).isclose(PR.mimo_objective(inst, S), 1e-9)


def test_mimo_json_round_trip():
    inst = PR.random_instance(2, 3, 1, 0.2, 4)
    back = PR.MimoInstance.from_json(inst.to_json())
    np.testing.assert_allclose(back.r, inst.r)
    np.testing.assert_allclose(back.H_c, inst.H_c)


def test_16qam_2x2_census():
    inst = PR.fixed_instance(0)
    cb = degree_census(PR.mimo_objective(inst, B), include_constant=False).counts
    cs = degree_census(PR.mimo_objective(inst, S), include_constant=False).counts
    assert cb == {1: 8, 2: 20, 3: 16, 4: 4}
    assert cs == {1: 8, 2: 8, 3: 8, 4: 4}


@pytest.mark.parametrize("M", [1, 2, 3])
@pytest.mark.parametrize("N_t", [2, 3])
def test_closed_forms_match_expansion(M, N_t):
    rng = np.random.default_rng(100 * M + N_t)
    inst = PR.random_instance(N_t, 2, M, 0.1, rng)
    cb = degree_census(PR.mimo_objective(inst, B), include_constant=False).counts
    cs = degree_census(PR.mimo_objective(inst, S), include_constant=False).counts
    assert cb == PR.term_census_binary(M, N_t)
    assert cs == PR.term_census_spin(M, N_t)
    assert sum(cb.values()) == PR.total_terms_binary(M, N_t)
    assert sum(cs.values()) == PR.total_terms_spin(M, N_t)


def test_closed_form_domain():
    with pytest.raises(ValueError):
        PR.term_count_binary(2, 2, 5)
    with pytest.raises(ValueError):
        PR.term_count_spin(2, 1, 1)


def test_spin_grows_polynomially_binary_exponentially():
    for M in range(1, 7):
        assert PR.total_terms_spin(M, 2) <= PR.total_terms_binary(M, 2)
    assert PR.total_terms_binary(6, 2) / PR.total_terms_binary(5, 2) > 3.5
    assert PR.total_terms_spin(6, 2) / PR.total_terms_spin(5, 2) < 1.5


# -- syndrome decoding ------------------------------------------------------


@pytest.mark.parametrize("name,binary_terms,spin_terms", [("hamming74", 38, 3), ("hamming84", 256, 4)])
def test_syndrome_term_counts(name, binary_terms, spin_terms):
    inst = PR.SyndromeInstance(PR.builtin_matrices()[name])
    assert degree_census(PR.syndrome_objective(inst, B)).total == binary_terms
    assert degree_census(PR.syndrome_objective(inst, S)).total == spin_terms


@pytest.mark.parametrize("name", ["hamming74", "hamming84"])
def test_syndrome_minimisers_are_solutions(name):
    H = PR.builtin_matrices()[name]
    rng = np.random.default_rng(5)
    for _ in range(3):
        y = rng.integers(0, 2, H.shape[0])
        inst = PR.SyndromeInstance(H, y)
        for kind in (B, S):
            vals = evaluate_all(PR.syndrome_objective(inst, kind))
            assert vals.min() == -H.shape[0]
            for idx in np.flatnonzero(vals == vals.min()):
                bits = [(idx >> i) & 1 for i in range(inst.n)]
                assert inst.satisfied(bits)


def test_syndrome_value_counts_violated_checks():
    inst = PR.SyndromeInstance(PR.H74, np.array([1, 0, 1]))
    p = PR.syndrome_objective(inst, B)
    for bits in all_bits(7):
        violated = int((((PR.H74 @ np.array(bits)) % 2) != inst.y).sum())
        assert evaluate(p, bits) == -3 + 2 * violated


def test_kernel_codewords_hamming84():
    words = PR.kernel_codewords(PR.H84)
    assert len(words) == 16
    assert sorted({sum(w) for w in words}) == [0, 4, 8]


def test_syndrome_validation_and_json():
    with pytest.raises(ValueError):
        PR.SyndromeInstance(np.array([[0, 2]]))
    with pytest.raises(ValueError):
        PR.SyndromeInstance(PR.H74, np.array([1, 0]))
    inst = PR.SyndromeInstance(PR.H84, np.array([1, 0, 0, 1]))
    back = PR.SyndromeInstance.from_json(inst.to_json())
    assert (back.H_p == inst.H_p).all() and (back.y == inst.y).all()
