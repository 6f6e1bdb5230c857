"""Multilinear polynomials over binary {0,1} or spin {+1,-1} variables.

A monomial is stored as an integer bitmask (bit ``i`` set means variable
``i`` appears), so at most 64 variables are supported.  Polynomials are
immutable; every operation returns a new, merged polynomial with
near-zero coefficients (``|a| < MERGE_TOL``) dropped.

Bit/spin convention used throughout the package: bit 0 <-> s = +1 and
bit 1 <-> s = -1, i.e. ``s = 1 - 2x``.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

MERGE_TOL = 1e-12
MAX_VARIABLES = 64
EXACT_ENUMERATION_LIMIT = 24


class VariableKind(enum.Enum):
    BINARY = "binary"
    SPIN = "spin"


def monomial(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    return mask


def indices_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _submasks(mask: int) -> Iterator[int]:
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def _merge(acc: Mapping[int, float]) -> dict[int, float]:
    return {m: float(a) for m, a in acc.items() if abs(a) >= MERGE_TOL}


class Polynomial:
    """Real multilinear polynomial ``sum_I a_I prod_{i in I} v_i``.

    ``terms`` maps monomial bitmasks to nonzero coefficients; the empty
    mask ``0`` is the constant term.
    """

    __slots__ = ("kind", "n", "_terms")

    def __init__(self, kind: VariableKind, n: int, terms: Mapping[int, float] | None = None):
        if not 0 <= n <= MAX_VARIABLES:
            raise ValueError(f"n must be in [0, {MAX_VARIABLES}], got {n}")
        kind = VariableKind(kind)
        merged = _merge(terms or {})
        limit = 1 << n
        for mask in merged:
            if mask < 0 or mask >= limit:
                raise ValueError(f"monomial {indices_of(mask)} uses a variable >= n={n}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "n", n)
        ordered = sorted(merged.items(), key=lambda kv: (kv[0].bit_count(), indices_of(kv[0])))
        object.__setattr__(self, "_terms", MappingProxyType(dict(ordered)))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    def __reduce__(self):
        return (Polynomial, (self.kind, self.n, dict(self._terms)))

    # -- construction -------------------------------------------------------

    @classmethod
    def from_terms(
        cls,
        kind: VariableKind,
        n: int,
        terms: Mapping[Sequence[int], float] | Iterable[tuple[Sequence[int], float]],
    ) -> "Polynomial":
        """Build from ``{(i, j, ...): coeff}``; repeated indices are reduced
        (``x*x = x`` for binary, ``s*s = 1`` for spin)."""
        kind = VariableKind(kind)
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[int, float] = defaultdict(float)
        for idx, coeff in items:
            mask = 0
            for i in idx:
                i = int(i)
                if not 0 <= i < n:
                    raise ValueError(f"variable index {i} out of range for n={n}")
                if kind is VariableKind.BINARY:
                    mask |= 1 << i
                else:
                    mask ^= 1 << i
            acc[mask] += coeff
        return cls(kind, n, acc)

    @classmethod
    def constant(cls, kind: VariableKind, n: int, value: float) -> "Polynomial":
        return cls(kind, n, {0: value})

    @classmethod
    def variable(cls, kind: VariableKind, n: int, i: int, coeff: float = 1.0) -> "Polynomial":
        if not 0 <= i < n:
            raise ValueError(f"variable index {i} out of range for n={n}")
        return cls(kind, n, {1 << i: coeff})

    # -- accessors ----------------------------------------------------------

    @property
    def terms(self) -> Mapping[int, float]:
        return self._terms

    def iter_terms(self) -> Iterator[tuple[tuple[int, ...], float]]:
        for mask, coeff in self._terms.items():
            yield indices_of(mask), coeff

    @property
    def degree(self) -> int:
        return max((m.bit_count() for m in self._terms), default=0)

    @property
    def constant_term(self) -> float:
        return self._terms.get(0, 0.0)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.kind is other.kind and self.n == other.n and dict(self._terms) == dict(other._terms)

    def __hash__(self) -> int:
        return hash((self.kind, self.n, tuple(self._terms.items())))

    def isclose(self, other: "Polynomial", tol: float = 1e-9) -> bool:
        if self.kind is not other.kind or self.n != other.n:
            return False
        keys = set(self._terms) | set(other._terms)
        return all(abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= tol for k in keys)

    def __repr__(self) -> str:
        return f"Polynomial({self.kind.value}, n={self.n}, {to_string(self)!r})"

    # -- arithmetic ---------------------------------------------------------

    def _check_compatible(self, other: "Polynomial") -> None:
        if self.kind is not other.kind:
            raise ValueError(f"kind mismatch: {self.kind.value} vs {other.kind.value}")
        if self.n != other.n:
            raise ValueError(f"variable count mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return self.add_constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_compatible(other)
        acc = defaultdict(float, self._terms)
        for m, a in other._terms.items():
            acc[m] += a
        return Polynomial(self.kind, self.n, acc)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            return self.add_constant(-other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return multiply(self, other)

    __rmul__ = __mul__

    def scale(self, factor: float) -> "Polynomial":
        return Polynomial(self.kind, self.n, {m: a * factor for m, a in self._terms.items()})

    def add_constant(self, value: float) -> "Polynomial":
        acc = dict(self._terms)
        acc[0] = acc.get(0, 0.0) + value
        return Polynomial(self.kind, self.n, acc)


def multiply(p: Polynomial, q: Polynomial) -> Polynomial:
    """Product with ``x^2 = x`` (binary) or ``s^2 = 1`` (spin) reduction."""
    p._check_compatible(q)
    acc: dict[int, float] = defaultdict(float)
    if p.kind is VariableKind.BINARY:
        for mp, ap in p.terms.items():
            for mq, aq in q.terms.items():
                acc[mp | mq] += ap * aq
    else:
        for mp, ap in p.terms.items():
            for mq, aq in q.terms.items():
                acc[mp ^ mq] += ap * aq
    return Polynomial(p.kind, p.n, acc)


def binary_to_spin(p: Polynomial) -> Polynomial:
    """Substitute ``x_i = (1 - s_i) / 2`` and expand."""
    if p.kind is not VariableKind.BINARY:
        raise ValueError("binary_to_spin expects a binary polynomial")
    acc: dict[int, float] = defaultdict(float)
    for mask, a in p.terms.items():
        scale = a / (1 << mask.bit_count())
        for sub in _submasks(mask):
            acc[sub] += -scale if sub.bit_count() & 1 else scale
    return Polynomial(VariableKind.SPIN, p.n, acc)


def spin_to_binary(p: Polynomial) -> Polynomial:
    """Substitute ``s_i = 1 - 2 x_i`` and expand."""
    if p.kind is not VariableKind.SPIN:
        raise ValueError("spin_to_binary expects a spin polynomial")
    acc: dict[int, float] = defaultdict(float)
    for mask, a in p.terms.items():
        for sub in _submasks(mask):
            acc[sub] += a * (-2.0) ** sub.bit_count()
    return Polynomial(VariableKind.BINARY, p.n, acc)


def convert(p: Polynomial, kind: VariableKind) -> Polynomial:
    kind = VariableKind(kind)
    if p.kind is kind:
        return p
    return binary_to_spin(p) if kind is VariableKind.SPIN else spin_to_binary(p)


# -- evaluation -------------------------------------------------------------


def assignment_index(bits: Sequence[int]) -> int:
    """Little-endian key index: ``bits[i]`` is bit ``i``."""
    idx = 0
    for i, b in enumerate(bits):
        if b not in (0, 1, True, False):
            raise ValueError(f"assignment entries must be 0/1, got {b!r}")
        idx |= int(b) << i
    return idx


def index_bits(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> i) & 1 for i in range(n))


def bitstring(index: int, n: int) -> str:
    """Key bits written ``x0 x1 ... x_{n-1}``."""
    return "".join(str((index >> i) & 1) for i in range(n))


def evaluate(p: Polynomial, assignment: Sequence[int]) -> float:
    if len(assignment) != p.n:
        raise ValueError(f"assignment has length {len(assignment)}, expected {p.n}")
    idx = assignment_index(assignment)
    vals = []
    if p.kind is VariableKind.BINARY:
        for mask, a in p.terms.items():
            if idx & mask == mask:
                vals.append(a)
    else:
        for mask, a in p.terms.items():
            vals.append(-a if (idx & mask).bit_count() & 1 else a)
    return math.fsum(vals)


def evaluate_all(p: Polynomial) -> np.ndarray:
    """Values for every assignment, indexed by little-endian key index."""
    if p.n > EXACT_ENUMERATION_LIMIT:
        raise ValueError(f"exhaustive evaluation limited to n <= {EXACT_ENUMERATION_LIMIT}")
    idx = np.arange(1 << p.n, dtype=np.uint64)
    out = np.zeros(1 << p.n, dtype=np.float64)
    for mask, a in p.terms.items():
        sel = idx & np.uint64(mask)
        if p.kind is VariableKind.BINARY:
            out += np.where(sel == mask, a, 0.0)
        else:
            odd = np.bitwise_count(sel) & 1
            out += a * (1.0 - 2.0 * odd)
    return out


# -- census and register width ---------------------------------------------


@dataclass(frozen=True)
class DegreeCensus:
    counts: Mapping[int, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def without_constant(self) -> "DegreeCensus":
        return DegreeCensus({k: v for k, v in self.counts.items() if k != 0})

    def __getitem__(self, k: int) -> int:
        return self.counts.get(k, 0)


def degree_census(p: Polynomial, include_constant: bool = True) -> DegreeCensus:
    counts: dict[int, int] = defaultdict(int)
    for mask in p.terms:
        k = mask.bit_count()
        if k == 0 and not include_constant:
            continue
        counts[k] += 1
    return DegreeCensus(dict(sorted(counts.items())))


def value_range(p: Polynomial, exact: bool | None = None) -> tuple[float, float]:
    """Exact extrema by enumeration, or the conservative bound
    ``|E - a_0| <= sum |a_I|`` when enumeration is infeasible."""
    if exact is None:
        exact = p.n <= EXACT_ENUMERATION_LIMIT
    if exact:
        vals = evaluate_all(p)
        return float(vals.min()), float(vals.max())
    c = p.constant_term
    spread = math.fsum(abs(a) for m, a in p.terms.items() if m)
    return c - spread, c + spread


def value_bits_required(p: Polynomial, exact: bool | None = None) -> int:
    """Smallest m with ``-2^(m-1) <= min E`` and ``max E < 2^(m-1)``."""
    lo, hi = value_range(p, exact)
    m = 1
    while not (-(2.0 ** (m - 1)) <= lo and hi < 2.0 ** (m - 1)):
        m += 1
    return m


# -- text format ------------------------------------------------------------
#
#   kind=binary n=3
#   # comment
#   2 0 1
#   1 2
#   -1
#
# One term per line: coefficient followed by variable indices.  Repeated
# indices are reduced silently using the kind's rule.


def to_string(p: Polynomial) -> str:
    lines = [f"kind={p.kind.value} n={p.n}"]
    for idx, a in p.iter_terms():
        lines.append(" ".join([repr(a)] + [str(i) for i in idx]))
    return "\n".join(lines) + "\n"


def parse(text: str) -> Polynomial:
    kind = None
    n = None
    rows: list[tuple[list[int], float]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if kind is None:
            fields = dict(tok.split("=", 1) for tok in line.split() if "=" in tok)
            if "kind" not in fields or "n" not in fields:
                raise ValueError(f"line {lineno}: expected header 'kind=binary|spin n=<int>'")
            kind = VariableKind(fields["kind"].lower())
            n = int(fields["n"])
            continue
        toks = line.split()
        try:
            rows.append(([int(t) for t in toks[1:]], float(toks[0])))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: malformed term {raw!r}") from exc
    if kind is None:
        raise ValueError("missing header line")
    return Polynomial.from_terms(kind, n, rows)


def load(path) -> Polynomial:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def dump(p: Polynomial, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_string(p))
