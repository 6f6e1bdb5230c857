import itertools
import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from spingas.poly import Polynomial, VariableKind


def brute_eval_binary(terms: dict, x) -> float:
    """Independent oracle: sum of a * prod x_i over an index-tuple term map."""
    total = 0.0
    for idx, a in terms.items():
        prod = 1.0
        for i in idx:
            prod *= x[i]
        total += a * prod
    return total


def brute_eval_spin(terms: dict, s) -> float:
    return brute_eval_binary(terms, s)


def all_bits(n: int):
    return [tuple(b) for b in itertools.product((0, 1), repeat=n)]


def index_of(bits) -> int:
    return sum(b << i for i, b in enumerate(bits))


def random_terms(rng, n: int, n_terms: int, max_deg: int, integer: bool = True, lo: int = -4, hi: int = 4):
    terms = {}
    for _ in range(n_terms):
        k = int(rng.integers(0, min(max_deg, n) + 1))
        idx = tuple(sorted(rng.choice(n, size=k, replace=False).tolist()))
        a = float(rng.integers(lo, hi + 1)) if integer else float(rng.normal())
        terms[idx] = terms.get(idx, 0.0) + a
    return terms


@st.composite
def polynomials(draw, kind=None, max_n=6, max_terms=8, integer=False):
    kind = draw(st.sampled_from(list(VariableKind))) if kind is None else VariableKind(kind)
    n = draw(st.integers(1, max_n))
    coeff = (
        st.integers(-5, 5).map(float)
        if integer
        else st.floats(-10, 10, allow_nan=False, allow_infinity=False)
    )
    masks = st.integers(0, (1 << n) - 1)
    terms = draw(st.dictionaries(masks, coeff, max_size=max_terms))
    return Polynomial(kind, n, terms)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
