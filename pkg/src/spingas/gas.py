"""Grover adaptive search with an exact-statevector or ideal-law backend.

Assignments are handled as little-endian key indices (bit ``i`` of the
index is variable ``i``); :func:`spingas.poly.index_bits` converts.
Objective values are always evaluated classically, so real coefficients
never corrupt the threshold.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit import Design, assemble_grover, design_for_kind, lower_dictionary
from .poly import EXACT_ENUMERATION_LIMIT, Polynomial, evaluate_all, index_bits, value_bits_required
from .sim import MAX_QUBITS, ResourceLimitError, measure_distribution, run

DEFAULT_LAMBDA = 8 / 7
OPTIMUM_TOL = 1e-9


class Backend(enum.Enum):
    STATEVECTOR = "statevector"
    IDEAL = "ideal"


@dataclass(frozen=True)
class GasConfig:
    lam: float = DEFAULT_LAMBDA
    max_queries: int | None = 10_000
    max_iterations: int | None = 100_000
    seed: int = 0
    backend: Backend = Backend.IDEAL
    m: int | None = None
    design: Design | None = None
    value_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "backend", Backend(self.backend))
        if self.value_scale <= 0:
            raise ValueError("value_scale must be positive")
        if self.design is not None:
            object.__setattr__(self, "design", Design(self.design))
        if not 1 < self.lam < 4 / 3:
            raise ValueError(f"lambda must satisfy 1 < lambda < 4/3, got {self.lam}")
        if self.max_queries is None and self.max_iterations is None:
            raise ValueError("at least one of max_queries / max_iterations is required")
        for name in ("max_queries", "max_iterations"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive; a zero budget yields an empty trace")


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, derived from (master seed, trial)."""
    return np.random.default_rng([int(master_seed), int(trial)])


# -- sampling laws ----------------------------------------------------------


@dataclass(frozen=True)
class IdealOutcomeModel:
    y: float
    t: int
    N: int
    L: int

    def __post_init__(self):
        if not 0 <= self.t <= self.N:
            raise ValueError("marked count must lie in [0, N]")

    @property
    def marked_probability(self) -> float:
        if self.t == 0:
            return 0.0
        if self.t == self.N:
            return 1.0
        theta = math.asin(math.sqrt(self.t / self.N))
        return math.sin((2 * self.L + 1) * theta) ** 2


class ObjectiveTable:
    """All objective values, sorted once so marked sets are prefix slices."""

    def __init__(self, p: Polynomial):
        if p.n > EXACT_ENUMERATION_LIMIT:
            raise ValueError(f"exhaustive tables limited to n <= {EXACT_ENUMERATION_LIMIT}")
        self.p = p
        self.values = evaluate_all(p)
        self.order = np.argsort(self.values, kind="stable")
        self.sorted_values = self.values[self.order]

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def minimum(self) -> float:
        return float(self.sorted_values[0])

    def marked_count(self, y: float) -> int:
        return int(np.searchsorted(self.sorted_values, y, side="left"))

    def model(self, y: float, L: int) -> IdealOutcomeModel:
        return IdealOutcomeModel(y, self.marked_count(y), self.N, L)

    def sample_ideal(self, y: float, L: int, rng: np.random.Generator, size=None):
        model = self.model(y, L)
        t, N = model.t, model.N
        if t == 0 or t == N:
            pick = rng.integers(0, N, size=size)
            return self.order[pick] if size is not None else int(self.order[pick])
        p_marked = model.marked_probability
        if size is None:
            if rng.random() < p_marked:
                return int(self.order[rng.integers(0, t)])
            return int(self.order[rng.integers(t, N)])
        hit = rng.random(size) < p_marked
        pick = np.where(hit, rng.integers(0, t, size=size), rng.integers(t, N, size=size))
        return self.order[pick]


def ideal_sample(p: Polynomial, y: float, L: int, rng, size=None):
    """Key index drawn from the exact Grover outcome law for threshold ``y``."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return ObjectiveTable(p).sample_ideal(y, L, rng, size)


class StatevectorOracle:
    """Key distributions of ``G^L A_y |0>`` with per-threshold caching.

    The dictionary encodes ``value_scale * (E - y)``.  The sign-qubit oracle
    resolves whole units only, so objectives with real coefficients need a
    scale (e.g. a power of two) that separates near-threshold values;
    ``value_scale=1`` is exact for integer coefficients.
    """

    def __init__(
        self,
        p: Polynomial,
        m: int | None = None,
        design: Design | str | None = None,
        value_scale: float = 1.0,
    ):
        self.p = p
        self.m = m
        self.value_scale = value_scale
        self.design = design_for_kind(p.kind) if design is None else Design(design)
        self._y = None
        self._states: list = []
        self._marginals: list[np.ndarray] = []

    def shifted(self, y: float) -> Polynomial:
        return self.p.add_constant(-y).scale(self.value_scale)

    def width(self, y: float) -> int:
        return self.m if self.m is not None else value_bits_required(self.shifted(y))

    def _reset(self, y: float) -> None:
        m = self.width(y)
        if self.p.n + m > MAX_QUBITS:
            raise ResourceLimitError(f"n + m = {self.p.n + m} exceeds the {MAX_QUBITS}-qubit cap")
        a_y = lower_dictionary(self.shifted(y), m, self.design)
        self._grover = assemble_grover(a_y)
        self._y = y
        self._m_now = m
        self._states = [run(a_y)]
        self._marginals = [self._key_marginal(self._states[0])]

    def _key_marginal(self, state) -> np.ndarray:
        probs = measure_distribution(state, self.p.n, self._m_now).key_marginal()
        return probs / probs.sum()

    def key_distribution(self, y: float, L: int) -> np.ndarray:
        if self._y != y:
            self._reset(y)
        while len(self._states) <= L:
            nxt = run(self._grover, self._states[-1])
            self._states.append(nxt)
            self._marginals.append(self._key_marginal(nxt))
        return self._marginals[L]

    def sample(self, y: float, L: int, rng: np.random.Generator, size=None):
        probs = self.key_distribution(y, L)
        draw = rng.choice(probs.size, size=size, p=probs)
        return int(draw) if size is None else draw


def statevector_sample(p: Polynomial, y: float, L: int, m: int | None, design, rng, size=None):
    """Key index measured from ``G^L A_y |0>`` built with the given design."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return StatevectorOracle(p, m, design).sample(y, L, rng, size)


# -- the optimiser ----------------------------------------------------------


@dataclass(frozen=True)
class IterationRecord:
    c: int
    y_c: float
    L_c: int
    d: float
    x: int
    value: float
    cum_qd: int
    cum_cd: int
    best_value: float
    improved: bool


@dataclass
class GasTrace:
    n: int
    x0: int
    y0: float
    records: list[IterationRecord] = field(default_factory=list)
    best_index: int = 0
    best_value: float = math.inf
    terminated_by: str = ""

    @property
    def best_assignment(self) -> tuple[int, ...]:
        return index_bits(self.best_index, self.n)

    @property
    def total_queries(self) -> int:
        return self.records[-1].cum_qd if self.records else 0

    @property
    def total_measurements(self) -> int:
        return self.records[-1].cum_cd if self.records else 0

    def queries_to(self, target: float, tol: float = OPTIMUM_TOL) -> int | None:
        """Cumulative Grover applications when ``target`` was first held."""
        if self.y0 <= target + tol:
            return 0
        for r in self.records:
            if r.best_value <= target + tol:
                return r.cum_qd
        return None

    def measurements_to(self, target: float, tol: float = OPTIMUM_TOL) -> int | None:
        if self.y0 <= target + tol:
            return 0
        for r in self.records:
            if r.best_value <= target + tol:
                return r.cum_cd
        return None


def gas_minimize(p: Polynomial, cfg: GasConfig, rng=None, table: ObjectiveTable | None = None) -> GasTrace:
    """Run GAS until a query or measurement budget is exhausted."""
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    table = ObjectiveTable(p) if table is None else table
    values = table.values
    N = table.N
    d_cap = math.sqrt(N)

    if cfg.backend is Backend.STATEVECTOR:
        oracle = StatevectorOracle(p, cfg.m, cfg.design, cfg.value_scale)
        draw = oracle.sample
    else:
        draw = table.sample_ideal

    x = int(rng.integers(0, N))
    y = float(values[x])
    trace = GasTrace(n=p.n, x0=x, y0=y, best_index=x, best_value=y)
    d = 1.0
    c = 0
    qd = 0
    while True:
        L = int(rng.integers(0, math.ceil(d - 1) + 1))
        x_new = draw(y, L, rng)
        val = float(values[x_new])
        qd += L
        improved = val < y
        y_c, d_c = y, d
        if improved:
            y, x, d = val, x_new, 1.0
        else:
            d = min(cfg.lam * d, d_cap)
        trace.records.append(
            IterationRecord(c, y_c, L, d_c, x_new, val, qd, c + 1, y, improved)
        )
        c += 1
        if cfg.max_queries is not None and qd >= cfg.max_queries:
            trace.terminated_by = "max_queries"
            break
        if cfg.max_iterations is not None and c >= cfg.max_iterations:
            trace.terminated_by = "max_iterations"
            break
    trace.best_index, trace.best_value = x, y
    return trace


def _trial_worker(args):
    p, cfg, trial = args
    return gas_minimize(p, cfg, trial_rng(cfg.seed, trial))


def run_trials(p: Polynomial, cfg: GasConfig, trials: int, workers: int = 1) -> list[GasTrace]:
    """Independent seeded trials; results ordered by trial index."""
    if workers <= 1:
        table = ObjectiveTable(p) if cfg.backend is Backend.IDEAL else None
        return [gas_minimize(p, cfg, trial_rng(cfg.seed, i), table) for i in range(trials)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_worker, [(p, cfg, i) for i in range(trials)]))


# -- classical baselines ----------------------------------------------------


def exhaustive_search(p: Polynomial) -> tuple[tuple[int, ...], float, int]:
    """True minimiser by full enumeration: (assignment, value, evaluations)."""
    values = evaluate_all(p)
    i = int(np.argmin(values))
    return index_bits(i, p.n), float(values[i]), int(values.size)


def random_order_search(p: Polynomial, rng, table: ObjectiveTable | None = None) -> int:
    """Evaluations until an optimum is first hit when scanning in random order."""
    table = ObjectiveTable(p) if table is None else table
    perm = rng.permutation(table.N)
    hits = np.flatnonzero(table.values[perm] <= table.minimum + OPTIMUM_TOL)
    return int(hits[0]) + 1
