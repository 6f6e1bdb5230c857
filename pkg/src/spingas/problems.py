"""Objective generators for MIMO ML detection and syndrome decoding.

Bit layout for MIMO: symbol ``v`` owns bits ``2Mv .. 2Mv+2M-1``; even
offsets drive the real part and odd offsets the imaginary part.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .poly import Polynomial, VariableKind, index_bits, multiply


def qam_normalization(M: int) -> float:
    """Average-energy normaliser of a 2^(2M)-QAM constellation."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return sum((2 * k - 2**M + 1) ** 2 for k in range(2**M)) / 2 ** (M - 1)


def _component_levels(M: int) -> list[float]:
    """Weights ``(-1)^k 2^(M-1-k)`` of the nested bracket products."""
    return [(-1) ** k * 2 ** (M - 1 - k) for k in range(M)]


def qam_symbol_binary(x, v: int, M: int) -> complex:
    """Gray-labelled QAM symbol ``t_v`` from the bit assignment ``x``."""
    lo = 2 * M * v
    if v < 0 or lo + 2 * M > len(x):
        raise IndexError(f"symbol {v} needs bits {lo}..{lo + 2 * M - 1}, assignment has {len(x)}")
    w = _component_levels(M)
    re = im = 0.0
    pr = pi = 1.0
    for k in range(M):
        pr *= 1 - 2 * x[lo + 2 * k]
        pi *= 1 - 2 * x[lo + 2 * k + 1]
        re += w[k] * pr
        im += w[k] * pi
    return complex(re, im) / math.sqrt(qam_normalization(M))


def qam_symbols(x, N_t: int, M: int) -> np.ndarray:
    return np.array([qam_symbol_binary(x, v, M) for v in range(N_t)])


# -- MIMO -------------------------------------------------------------------


@dataclass
class MimoInstance:
    N_t: int
    N_r: int
    M: int
    H_c: np.ndarray
    t: np.ndarray
    sigma: float
    noise: np.ndarray
    r: np.ndarray = field(default=None)

    def __post_init__(self):
        self.H_c = np.asarray(self.H_c, dtype=complex).reshape(self.N_r, self.N_t)
        self.t = np.asarray(self.t, dtype=complex).reshape(self.N_t)
        self.noise = np.asarray(self.noise, dtype=complex).reshape(self.N_r)
        if self.r is None:
            self.r = self.H_c @ self.t / math.sqrt(self.N_t) + self.sigma * self.noise
        else:
            self.r = np.asarray(self.r, dtype=complex).reshape(self.N_r)

    @property
    def n(self) -> int:
        return 2 * self.M * self.N_t

    @property
    def A_norm(self) -> float:
        return qam_normalization(self.M)

    def distance(self, x) -> float:
        """Direct ``||r - H t(x) / sqrt(N_t)||^2``, no polynomial involved."""
        diff = self.r - self.H_c @ qam_symbols(x, self.N_t, self.M) / math.sqrt(self.N_t)
        return float(np.vdot(diff, diff).real)

    def to_json(self) -> str:
        def cx(a):
            return [[float(z.real), float(z.imag)] for z in np.ravel(a)]

        return json.dumps(
            {
                "N_t": self.N_t,
                "N_r": self.N_r,
                "M": self.M,
                "H_c": [cx(row) for row in self.H_c],
                "t": cx(self.t),
                "sigma": self.sigma,
                "noise": cx(self.noise),
                "r": cx(self.r),
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "MimoInstance":
        d = json.loads(text)

        def cx(a):
            return np.array([complex(re, im) for re, im in a])

        return cls(
            N_t=d["N_t"],
            N_r=d["N_r"],
            M=d["M"],
            H_c=np.array([cx(row) for row in d["H_c"]]),
            t=cx(d["t"]),
            sigma=float(d["sigma"]),
            noise=cx(d["noise"]) if "noise" in d else np.zeros(d["N_r"]),
            r=cx(d["r"]) if "r" in d else None,
        )


def random_channel(N_r: int, N_t: int, rng) -> np.ndarray:
    """i.i.d. CN(0, 1) entries."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    s = math.sqrt(0.5)
    return rng.normal(scale=s, size=(N_r, N_t)) + 1j * rng.normal(scale=s, size=(N_r, N_t))


def random_noise(N_r: int, rng) -> np.ndarray:
    return random_channel(N_r, 1, rng).reshape(N_r)


FIXED_CHANNEL = np.array(
    [
        [0.749 - 0.0149j, 1.32 + 0.0630j],
        [0.637 - 0.143j, -0.389 - 0.152j],
    ]
)
FIXED_BITS = (0, 0, 0, 0, 1, 1, 1, 1)
FIXED_SIGMA = 0.1


def fixed_instance(seed: int = 0) -> MimoInstance:
    """2x2 16-QAM instance with a fixed channel and transmitted symbols.

    The noise realisation is drawn from ``seed``.
    """
    t = qam_symbols(FIXED_BITS, 2, 2)
    noise = random_noise(2, np.random.default_rng(seed))
    return MimoInstance(N_t=2, N_r=2, M=2, H_c=FIXED_CHANNEL, t=t, sigma=FIXED_SIGMA, noise=noise)


def random_instance(N_t: int, N_r: int, M: int, sigma: float, rng) -> MimoInstance:
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    H = random_channel(N_r, N_t, rng)
    bits = rng.integers(0, 2, size=2 * M * N_t)
    t = qam_symbols(bits, N_t, M)
    return MimoInstance(N_t, N_r, M, H, t, sigma, random_noise(N_r, rng))


def _symbol_components(inst: MimoInstance, kind: VariableKind) -> list[tuple[Polynomial, Polynomial]]:
    """``(t_R, t_I)`` polynomials per symbol."""
    M, n = inst.M, inst.n
    w = [c / math.sqrt(inst.A_norm) for c in _component_levels(M)]
    one = Polynomial.constant(kind, n, 1.0)
    out = []
    for v in range(inst.N_t):
        parts = []
        for offset in (0, 1):
            comp = Polynomial(kind, n)
            prod = one
            for k in range(M):
                i = 2 * M * v + 2 * k + offset
                if kind is VariableKind.BINARY:
                    bracket = Polynomial(kind, n, {0: 1.0, 1 << i: -2.0})
                else:
                    bracket = Polynomial.variable(kind, n, i)
                prod = multiply(prod, bracket)
                comp = comp + prod.scale(w[k])
            parts.append(comp)
        out.append(tuple(parts))
    return out


def mimo_objective(inst: MimoInstance, kind: VariableKind | str) -> Polynomial:
    """Expanded ML-detection objective ``||r - H t / sqrt(N_t)||^2``.

    Built receive antenna by receive antenna from the four blocks of the
    squared distance: ``|r|^2``, the linear cross term, the per-symbol
    energies and the symbol-pair products.
    """
    kind = VariableKind(kind)
    n = inst.n
    comps = _symbol_components(inst, kind)
    H = inst.H_c / math.sqrt(inst.N_t)
    E = Polynomial(kind, n)
    for u in range(inst.N_r):
        r = inst.r[u]
        E = E.add_constant(abs(r) ** 2)
        for v in range(inst.N_t):
            tR, tI = comps[v]
            z = np.conj(r) * H[u, v]
            # -2 Re[r* h t] with t = tR + j tI
            E = E - (tR.scale(2 * z.real) - tI.scale(2 * z.imag))
            e = abs(H[u, v]) ** 2
            E = E + (multiply(tR, tR) + multiply(tI, tI)).scale(e)
        for v in range(inst.N_t - 1):
            for w in range(v + 1, inst.N_t):
                g = H[u, v] * np.conj(H[u, w])
                aR, aI = comps[v]
                bR, bI = comps[w]
                same = multiply(aR, bR) + multiply(aI, bI)
                cross = multiply(aR, bI) - multiply(aI, bR)
                E = E + same.scale(2 * g.real) + cross.scale(2 * g.imag)
    return E


def term_count_binary(M: int, N_t: int, k: int) -> int:
    if not 1 <= k <= 2 * M:
        raise ValueError(f"k must be in 1..{2 * M}, got {k}")
    if N_t < 2:
        raise ValueError("closed form needs N_t >= 2")
    pair = comb(2 * M, k) * 2 * N_t * (N_t - 1)
    if k <= M:
        return pair - comb(M, k) * 2 * N_t * (2 * N_t - 3)
    return pair


def term_count_spin(M: int, N_t: int, k: int) -> int:
    if not 1 <= k <= 2 * M:
        raise ValueError(f"k must be in 1..{2 * M}, got {k}")
    if N_t < 2:
        raise ValueError("closed form needs N_t >= 2")
    if k <= M:
        return (k - 1) * 2 * N_t * (N_t - 1) + (M - k + 1) * 2 * N_t
    return (2 * M - k + 1) * 2 * N_t * (N_t - 1)


def total_terms_binary(M: int, N_t: int) -> int:
    return (2 ** (2 * M) - 1) * 2 * N_t * (N_t - 1) - (2**M - 1) * 2 * N_t * (2 * N_t - 3)


def total_terms_spin(M: int, N_t: int) -> int:
    return M * M * 2 * N_t * (N_t - 1) + M * (M + 1) // 2 * 2 * N_t


def term_census_binary(M: int, N_t: int) -> dict[int, int]:
    return {k: term_count_binary(M, N_t, k) for k in range(1, 2 * M + 1)}


def term_census_spin(M: int, N_t: int) -> dict[int, int]:
    return {k: term_count_spin(M, N_t, k) for k in range(1, 2 * M + 1)}


# -- syndrome decoding ------------------------------------------------------

H74 = np.array(
    [
        [1, 0, 0, 1, 1, 1, 0],
        [0, 1, 0, 0, 1, 1, 1],
        [0, 0, 1, 1, 1, 0, 1],
    ],
    dtype=np.uint8,
)

H84 = np.array(
    [
        [1, 0, 0, 1, 1, 1, 0, 0],
        [0, 1, 0, 0, 1, 1, 1, 0],
        [0, 0, 1, 1, 1, 0, 1, 0],
        [1, 1, 1, 1, 1, 1, 1, 1],
    ],
    dtype=np.uint8,
)


def builtin_matrices() -> dict[str, np.ndarray]:
    return {"hamming74": H74.copy(), "hamming84": H84.copy()}


@dataclass
class SyndromeInstance:
    H_p: np.ndarray
    y: np.ndarray = None
    w: int | None = None  # carried for bookkeeping only; not enforced

    def __post_init__(self):
        self.H_p = np.asarray(self.H_p, dtype=np.uint8)
        if self.H_p.ndim != 2 or not np.isin(self.H_p, (0, 1)).all():
            raise ValueError("parity-check matrix must be a 2-D 0/1 array")
        self.y = np.zeros(self.H_p.shape[0], dtype=np.uint8) if self.y is None else np.asarray(self.y, dtype=np.uint8)
        if self.y.shape != (self.H_p.shape[0],) or not np.isin(self.y, (0, 1)).all():
            raise ValueError("syndrome must be a 0/1 vector with one entry per parity row")
        if self.w is None:
            self.w = self.H_p.shape[1]

    @property
    def n(self) -> int:
        return self.H_p.shape[1]

    def satisfied(self, x) -> bool:
        return bool(((self.H_p @ np.asarray(x)) % 2 == self.y).all())

    def to_json(self) -> str:
        return json.dumps({"H_p": self.H_p.tolist(), "y": self.y.tolist(), "w": int(self.w)})

    @classmethod
    def from_json(cls, text: str) -> "SyndromeInstance":
        d = json.loads(text)
        return cls(np.array(d["H_p"]), np.array(d["y"]) if "y" in d else None, d.get("w"))


def syndrome_objective(inst: SyndromeInstance, kind: VariableKind | str) -> Polynomial:
    """``-sum_j (-1)^{y_j} prod_{i: h_ji = 1} (1 - 2 x_i)`` or its spin form."""
    kind = VariableKind(kind)
    n = inst.n
    E = Polynomial(kind, n)
    one = Polynomial.constant(kind, n, 1.0)
    for row, yj in zip(inst.H_p, inst.y):
        sign = -1.0 if yj == 0 else 1.0
        support = np.flatnonzero(row).tolist()
        if kind is VariableKind.SPIN:
            E = E + Polynomial.from_terms(kind, n, {tuple(support): sign})
            continue
        prod = one
        for i in support:
            prod = multiply(prod, Polynomial(kind, n, {0: 1.0, 1 << i: -2.0}))
        E = E + prod.scale(sign)
    return E


def kernel_codewords(H_p: np.ndarray) -> list[tuple[int, ...]]:
    """All x with ``H_p x = 0`` over GF(2), by enumeration."""
    n = H_p.shape[1]
    out = []
    for idx in range(1 << n):
        x = index_bits(idx, n)
        if not ((H_p @ np.array(x)) % 2).any():
            out.append(x)
    return out
