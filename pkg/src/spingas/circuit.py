"""Gate-level IR and the two quantum-dictionary lowerings.

Qubit layout: key qubits ``0..n-1`` (qubit ``i`` holds variable ``i``),
value qubits ``n..n+m-1`` little-endian, so qubit ``n`` is the least
significant bit of the value register and qubit ``n+m-1`` its sign bit.
Value position ``k`` (1 = most significant) therefore lives on qubit
``n + m - k`` and receives phase ``2^(m-k) * theta``.

Multi-controlled phase gates are kept as single IR nodes.  Their CNOT cost
is only ever computed from the closed form ``4k^2 - 4k + 2``.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Union

from .poly import Polynomial, VariableKind, degree_census


class Design(enum.Enum):
    CONVENTIONAL = "conventional"
    PROPOSED = "proposed"


DESIGN_KIND = {Design.CONVENTIONAL: VariableKind.BINARY, Design.PROPOSED: VariableKind.SPIN}


def design_for_kind(kind: VariableKind) -> Design:
    return Design.CONVENTIONAL if VariableKind(kind) is VariableKind.BINARY else Design.PROPOSED


# -- gates ------------------------------------------------------------------


@dataclass(frozen=True)
class Hadamard:
    target: int

    @property
    def qubits(self):
        return (self.target,)

    def adjoint(self):
        return self

    def label(self):
        return f"H {self.target}"


@dataclass(frozen=True)
class PauliX:
    target: int

    @property
    def qubits(self):
        return (self.target,)

    def adjoint(self):
        return self

    def label(self):
        return f"X {self.target}"


@dataclass(frozen=True)
class PauliZ:
    target: int

    @property
    def qubits(self):
        return (self.target,)

    def adjoint(self):
        return self

    def label(self):
        return f"Z {self.target}"


@dataclass(frozen=True)
class Phase:
    """``diag(1, e^{i theta})``."""

    target: int
    theta: float

    @property
    def qubits(self):
        return (self.target,)

    def adjoint(self):
        return Phase(self.target, -self.theta)

    def label(self):
        return f"P {self.target} {self.theta:.9f}"


@dataclass(frozen=True)
class RotZ:
    """``diag(e^{-i theta/2}, e^{i theta/2})``."""

    target: int
    theta: float

    @property
    def qubits(self):
        return (self.target,)

    def adjoint(self):
        return RotZ(self.target, -self.theta)

    def label(self):
        return f"RZ {self.target} {self.theta:.9f}"


@dataclass(frozen=True)
class CNot:
    control: int
    target: int

    def __post_init__(self):
        if self.control == self.target:
            raise ValueError("CNOT control and target must differ")

    @property
    def qubits(self):
        return (self.control, self.target)

    def adjoint(self):
        return self

    def label(self):
        return f"CX {self.control} {self.target}"


@dataclass(frozen=True)
class MultiControlledPhase:
    """Phase ``e^{i theta}`` applied when every control and the target are 1."""

    controls: tuple[int, ...]
    target: int
    theta: float

    def __post_init__(self):
        controls = tuple(sorted(set(int(c) for c in self.controls)))
        if len(controls) != len(self.controls):
            raise ValueError("duplicate control qubits")
        if self.target in controls:
            raise ValueError("target cannot also be a control")
        object.__setattr__(self, "controls", controls)

    @property
    def qubits(self):
        return self.controls + (self.target,)

    def adjoint(self):
        return MultiControlledPhase(self.controls, self.target, -self.theta)

    def label(self):
        return f"MCP {','.join(map(str, self.controls))} {self.target} {self.theta:.9f}"


@dataclass(frozen=True)
class InverseQFT:
    """IQFT on a register; ``targets`` are listed least significant first."""

    targets: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("duplicate IQFT targets")

    @property
    def qubits(self):
        return self.targets

    def adjoint(self):
        return QFT(self.targets)

    def label(self):
        return f"IQFT {','.join(map(str, self.targets))}"


@dataclass(frozen=True)
class QFT:
    targets: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("duplicate QFT targets")

    @property
    def qubits(self):
        return self.targets

    def adjoint(self):
        return InverseQFT(self.targets)

    def label(self):
        return f"QFT {','.join(map(str, self.targets))}"


Gate = Union[Hadamard, PauliX, PauliZ, Phase, RotZ, CNot, MultiControlledPhase, InverseQFT, QFT]

DIAGONAL_GATES = (PauliZ, Phase, RotZ, MultiControlledPhase)


def controlled_phase(controls: Iterable[int], target: int, theta: float) -> Gate:
    controls = tuple(controls)
    if not controls:
        return Phase(target, theta)
    return MultiControlledPhase(controls, target, theta)


@dataclass(frozen=True)
class Circuit:
    n_key: int
    m_value: int
    gates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        total = self.n_qubits
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < total:
                    raise ValueError(f"{g.label()}: qubit {q} outside 0..{total - 1}")

    @property
    def n_qubits(self) -> int:
        return self.n_key + self.m_value

    @property
    def key_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.n_key))

    @property
    def value_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.n_key, self.n_key + self.m_value))

    @property
    def sign_qubit(self) -> int:
        return self.n_key + self.m_value - 1

    def value_qubit(self, k: int) -> int:
        """Qubit holding value position ``k`` (1 = most significant)."""
        if not 1 <= k <= self.m_value:
            raise ValueError(f"value position {k} outside 1..{self.m_value}")
        return self.n_key + self.m_value - k

    def adjoint(self) -> "Circuit":
        return Circuit(self.n_key, self.m_value, tuple(g.adjoint() for g in reversed(self.gates)))

    def __add__(self, other: "Circuit") -> "Circuit":
        if (self.n_key, self.m_value) != (other.n_key, other.m_value):
            raise ValueError("register shapes differ")
        return Circuit(self.n_key, self.m_value, self.gates + other.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def count(self) -> Counter:
        return Counter(type(g).__name__ for g in self.gates)

    def dump(self) -> str:
        return "\n".join(g.label() for g in self.gates) + "\n"


def parse_circuit(text: str, n_key: int, m_value: int) -> Circuit:
    """Inverse of :meth:`Circuit.dump` (angles round to 9 decimals)."""

    def ints(tok):
        return tuple(int(t) for t in tok.split(",") if t)

    gates = []
    for line in text.splitlines():
        toks = line.split()
        if not toks:
            continue
        op, args = toks[0], toks[1:]
        if op == "H":
            gates.append(Hadamard(int(args[0])))
        elif op == "X":
            gates.append(PauliX(int(args[0])))
        elif op == "Z":
            gates.append(PauliZ(int(args[0])))
        elif op == "P":
            gates.append(Phase(int(args[0]), float(args[1])))
        elif op == "RZ":
            gates.append(RotZ(int(args[0]), float(args[1])))
        elif op == "CX":
            gates.append(CNot(int(args[0]), int(args[1])))
        elif op == "MCP":
            gates.append(MultiControlledPhase(ints(args[0]), int(args[1]), float(args[2])))
        elif op == "IQFT":
            gates.append(InverseQFT(ints(args[0])))
        elif op == "QFT":
            gates.append(QFT(ints(args[0])))
        else:
            raise ValueError(f"unknown gate {op!r}")
    return Circuit(n_key, m_value, gates)


# -- dictionary lowerings ---------------------------------------------------


def _check_m(m: int) -> None:
    if int(m) != m or m <= 0:
        raise ValueError(f"value register width must be a positive integer, got {m}")


def _hadamard_layer(n_qubits: int) -> list:
    return [Hadamard(q) for q in range(n_qubits)]


def base_angle(coeff: float, m: int) -> float:
    return 2.0 * math.pi * coeff / 2**m


def lower_binary_dictionary(p: Polynomial, m: int) -> Circuit:
    """Conventional dictionary: multi-controlled phase gates per term."""
    _check_m(m)
    if p.kind is not VariableKind.BINARY:
        raise ValueError("conventional dictionary expects a binary polynomial")
    n = p.n
    shell = Circuit(n, m)
    gates = _hadamard_layer(n + m)
    for idx, a in p.iter_terms():
        theta = base_angle(a, m)
        for k in range(1, m + 1):
            gates.append(controlled_phase(idx, shell.value_qubit(k), 2 ** (m - k) * theta))
    gates.append(InverseQFT(shell.value_qubits))
    return Circuit(n, m, gates)


def lower_spin_dictionary(p: Polynomial, m: int) -> Circuit:
    """Proposed dictionary: each term is an Rz sandwiched between CNOT fans."""
    _check_m(m)
    if p.kind is not VariableKind.SPIN:
        raise ValueError("proposed dictionary expects a spin polynomial")
    n = p.n
    shell = Circuit(n, m)
    gates = _hadamard_layer(n + m)
    for idx, a in p.iter_terms():
        theta = base_angle(a, m)
        for k in range(1, m + 1):
            v = shell.value_qubit(k)
            phi = 2 ** (m - k) * theta
            if not idx:
                gates.append(Phase(v, phi))
                continue
            fan = [CNot(i, v) for i in idx]
            gates.extend(fan)
            gates.append(RotZ(v, phi))
            gates.extend(fan)
    gates.append(InverseQFT(shell.value_qubits))
    return Circuit(n, m, gates)


def lower_dictionary(p: Polynomial, m: int, design: Design | str | None = None) -> Circuit:
    design = design_for_kind(p.kind) if design is None else Design(design)
    if DESIGN_KIND[design] is not p.kind:
        raise ValueError(f"{design.value} design needs a {DESIGN_KIND[design].value} polynomial")
    if design is Design.CONVENTIONAL:
        return lower_binary_dictionary(p, m)
    return lower_spin_dictionary(p, m)


def zero_reflection(n_qubits: int) -> list:
    """Gates for ``I - 2|0><0|`` over all qubits (up to a global sign)."""
    last = n_qubits - 1
    flips = [PauliX(q) for q in range(n_qubits)]
    return flips + [controlled_phase(range(last), last, math.pi)] + flips


def assemble_grover(a_y: Circuit) -> Circuit:
    """One Grover iterate ``A_y S_0 A_y^dagger O``, oracle applied first.

    ``O`` is a Z on the sign qubit of the value register.  ``S_0`` reflects
    about the all-zero state of the full key+value register; a key-only
    reflection would commute through the key-diagonal dictionary and
    cancel the amplification.
    """
    n_total = a_y.n_qubits
    gates = [PauliZ(a_y.sign_qubit)]
    gates.extend(a_y.adjoint().gates)
    gates.extend(zero_reflection(n_total))
    gates.extend(a_y.gates)
    return Circuit(a_y.n_key, a_y.m_value, gates)


# -- cost model -------------------------------------------------------------


def mcphase_cnots(k: int) -> int:
    """CNOTs for an ancilla-free k-controlled U(2) gate (k >= 1)."""
    return 4 * k * k - 4 * k + 2 if k >= 1 else 0


def sandwich_cnots(k: int) -> int:
    return 2 * k


@dataclass(frozen=True)
class CostReport:
    design: Design
    m_value: int
    per_degree: dict  # k -> (term_count, cnot_count per value qubit)
    cnot_total_per_value_qubit: int
    rz_total_per_value_qubit: int

    @property
    def cnot_total(self) -> int:
        return self.m_value * self.cnot_total_per_value_qubit

    @property
    def rz_total(self) -> int:
        return self.m_value * self.rz_total_per_value_qubit

    @property
    def term_total(self) -> int:
        return sum(t for t, _ in self.per_degree.values())


def cost_report(p: Polynomial, design: Design | str, m: int = 1) -> CostReport:
    """CNOT/Rz counts for the dictionary circuit, IQFT excluded.

    The conventional design emits no Rz gates, so its Rz count is 0.
    """
    design = Design(design)
    if DESIGN_KIND[design] is not p.kind:
        raise ValueError(f"{design.value} design needs a {DESIGN_KIND[design].value} polynomial")
    per_gate = mcphase_cnots if design is Design.CONVENTIONAL else sandwich_cnots
    census = degree_census(p)
    per_degree = {k: (cnt, cnt * per_gate(k)) for k, cnt in census.counts.items()}
    cnots = sum(c for _, c in per_degree.values())
    rz = sum(cnt for k, (cnt, _) in per_degree.items() if k >= 1) if design is Design.PROPOSED else 0
    return CostReport(design, m, per_degree, cnots, rz)


def conventional_cnots_from_census(counts: dict) -> int:
    return sum(cnt * mcphase_cnots(k) for k, cnt in counts.items())


def proposed_cnots_from_census(counts: dict) -> int:
    return sum(cnt * sandwich_cnots(k) for k, cnt in counts.items())
