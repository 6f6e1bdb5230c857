"""Dense statevector simulation of :mod:`spingas.circuit` circuits.

Amplitudes are little-endian: bit ``q`` of an amplitude index is qubit
``q``.  For a key+value layout the flat index is ``key + (value << n)``.
Runs of diagonal gates are fused into a single phase multiply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import (
    QFT,
    CNot,
    Circuit,
    Hadamard,
    InverseQFT,
    MultiControlledPhase,
    PauliX,
    PauliZ,
    Phase,
    RotZ,
)
from .poly import bitstring

MAX_QUBITS = 26
NORM_TOL = 1e-9


class ResourceLimitError(RuntimeError):
    """Requested simulation exceeds the qubit cap."""


def _check_size(n_qubits: int) -> None:
    if n_qubits > MAX_QUBITS:
        raise ResourceLimitError(f"{n_qubits} qubits exceeds the {MAX_QUBITS}-qubit cap")


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_size(self.n_qubits)
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"expected {1 << self.n_qubits} amplitudes, got shape {self.amplitudes.shape}"
            )

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        return cls.basis(0, n_qubits)

    @classmethod
    def basis(cls, index: int, n_qubits: int) -> "StateVector":
        _check_size(n_qubits)
        amp = np.zeros(1 << n_qubits, dtype=np.complex128)
        amp[index] = 1.0
        return cls(n_qubits, amp)

    @classmethod
    def random(cls, n_qubits: int, rng: np.random.Generator) -> "StateVector":
        _check_size(n_qubits)
        dim = 1 << n_qubits
        amp = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return cls(n_qubits, amp / np.linalg.norm(amp))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


class _Kernel:
    """Per-run helper caching index bit masks."""

    def __init__(self, n_qubits: int):
        self.nq = n_qubits
        self.dim = 1 << n_qubits
        self._idx = None
        self._bits: dict[int, np.ndarray] = {}

    @property
    def idx(self) -> np.ndarray:
        if self._idx is None:
            self._idx = np.arange(self.dim, dtype=np.int64)
        return self._idx

    def bit(self, q: int) -> np.ndarray:
        b = self._bits.get(q)
        if b is None:
            b = ((self.idx >> q) & 1).astype(bool)
            self._bits[q] = b
        return b

    def axis(self, q: int) -> int:
        return self.nq - 1 - q

    # diagonal gates contribute to an accumulated phase-angle array

    def add_phase(self, angles: np.ndarray, gate) -> None:
        if isinstance(gate, Phase):
            angles[self.bit(gate.target)] += gate.theta
        elif isinstance(gate, PauliZ):
            angles[self.bit(gate.target)] += math.pi
        elif isinstance(gate, RotZ):
            half = gate.theta / 2.0
            angles -= half
            angles[self.bit(gate.target)] += gate.theta
        elif isinstance(gate, MultiControlledPhase):
            mask = 1 << gate.target
            for c in gate.controls:
                mask |= 1 << c
            angles[(self.idx & mask) == mask] += gate.theta
        else:  # pragma: no cover - guarded by caller
            raise TypeError(gate)

    def hadamard(self, psi: np.ndarray, q: int) -> np.ndarray:
        v = psi.reshape(-1, 2, 1 << q)
        a = v[:, 0, :]
        b = v[:, 1, :]
        out = np.empty_like(v)
        s = 1.0 / math.sqrt(2.0)
        out[:, 0, :] = (a + b) * s
        out[:, 1, :] = (a - b) * s
        return out.reshape(-1)

    def pauli_x(self, psi: np.ndarray, q: int) -> np.ndarray:
        v = psi.reshape(-1, 2, 1 << q)
        return v[:, ::-1, :].reshape(-1).copy()

    def cnot(self, psi: np.ndarray, c: int, t: int) -> np.ndarray:
        v = psi.reshape([2] * self.nq).copy()
        s0 = [slice(None)] * self.nq
        s0[self.axis(c)] = 1
        s1 = list(s0)
        s0[self.axis(t)] = 0
        s1[self.axis(t)] = 1
        s0, s1 = tuple(s0), tuple(s1)
        tmp = v[s0].copy()
        v[s0] = v[s1]
        v[s1] = tmp
        return v.reshape(-1)

    def fourier(self, psi: np.ndarray, targets: Sequence[int], inverse: bool) -> np.ndarray:
        m = len(targets)
        if m == 0:
            return psi
        t_axes = [self.axis(q) for q in reversed(targets)]  # most significant first
        others = [ax for ax in range(self.nq) if ax not in t_axes]
        order = others + t_axes
        v = psi.reshape([2] * self.nq).transpose(order).reshape(-1, 1 << m)
        scale = math.sqrt(1 << m)
        if inverse:
            v = np.fft.fft(v, axis=1) / scale
        else:
            v = np.fft.ifft(v, axis=1) * scale
        v = v.reshape([2] * self.nq).transpose(np.argsort(order))
        return np.ascontiguousarray(v).reshape(-1)


_DIAGONAL = (Phase, PauliZ, RotZ, MultiControlledPhase)


def run(c: Circuit, initial: StateVector | None = None) -> StateVector:
    """Apply every gate of ``c`` in order and return the new state."""
    nq = c.n_qubits
    _check_size(nq)
    if initial is None:
        psi = StateVector.zero(nq).amplitudes
    else:
        if initial.n_qubits != nq:
            raise ValueError(f"initial state has {initial.n_qubits} qubits, circuit has {nq}")
        psi = initial.amplitudes.copy()
    k = _Kernel(nq)
    angles = None
    for g in c.gates:
        if isinstance(g, _DIAGONAL):
            if angles is None:
                angles = np.zeros(k.dim)
            k.add_phase(angles, g)
            continue
        if angles is not None:
            psi = psi * np.exp(1j * angles)
            angles = None
        if isinstance(g, Hadamard):
            psi = k.hadamard(psi, g.target)
        elif isinstance(g, PauliX):
            psi = k.pauli_x(psi, g.target)
        elif isinstance(g, CNot):
            psi = k.cnot(psi, g.control, g.target)
        elif isinstance(g, InverseQFT):
            psi = k.fourier(psi, g.targets, inverse=True)
        elif isinstance(g, QFT):
            psi = k.fourier(psi, g.targets, inverse=False)
        else:
            raise TypeError(f"unsupported gate {g!r}")
    if angles is not None:
        psi = psi * np.exp(1j * angles)
    return StateVector(nq, psi)


# -- measurement ------------------------------------------------------------


def to_signed(value: int, m: int) -> int:
    """Two's-complement decode of an m-bit unsigned integer."""
    return value - (1 << m) if value >= 1 << (m - 1) else value


def value_bitstring(value: int, m: int) -> str:
    """Value register bits, most significant first."""
    return format(value % (1 << m), f"0{m}b")


@dataclass(frozen=True)
class MeasurementDistribution:
    """Exact joint probabilities, ``probs[value, key]`` (unsigned value)."""

    n_key: int
    m_value: int
    probs: np.ndarray

    def probability(self, key, value: int) -> float:
        """``key`` is an index or an ``x0x1...`` bit string; ``value`` is a
        signed (two's-complement) or unsigned integer."""
        if isinstance(key, str):
            key = int(key[::-1], 2) if key else 0
        return float(self.probs[value % (1 << self.m_value), key])

    def key_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def value_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    def outcomes(self, tol: float = 1e-12) -> list[tuple[str, int, float]]:
        rows = []
        vals, keys = np.nonzero(self.probs > tol)
        for v, kk in sorted(zip(vals.tolist(), keys.tolist()), key=lambda t: (t[1], t[0])):
            rows.append((bitstring(kk, self.n_key), to_signed(v, self.m_value), float(self.probs[v, kk])))
        return rows

    def to_csv(self, tol: float = 1e-12) -> str:
        lines = ["key_bits,value_int,probability"]
        for key, val, p in self.outcomes(tol):
            lines.append(f"{key},{val},{p:.12g}")
        return "\n".join(lines) + "\n"


def measure_distribution(s: StateVector, n_key: int, m_value: int) -> MeasurementDistribution:
    if n_key + m_value != s.n_qubits:
        raise ValueError(f"n_key + m_value = {n_key + m_value} but state has {s.n_qubits} qubits")
    probs = s.probabilities().reshape(1 << m_value, 1 << n_key)
    return MeasurementDistribution(n_key, m_value, probs)


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample(s: StateVector, rng, n_key: int | None = None, size: int | None = None):
    """Draw outcome(s) from the exact distribution.

    Returns ``(key_index, value_unsigned)``; arrays when ``size`` is given.
    With ``n_key=None`` the whole register is treated as the key.
    """
    rng = _as_rng(rng)
    n_key = s.n_qubits if n_key is None else n_key
    p = s.probabilities()
    p = p / p.sum()
    draws = rng.choice(p.size, size=size, p=p)
    keys = draws & ((1 << n_key) - 1)
    values = draws >> n_key
    if size is None:
        return int(keys), int(values)
    return keys, values
