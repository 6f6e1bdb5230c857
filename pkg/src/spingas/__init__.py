"""Grover adaptive search over binary and spin HUBO objectives."""

from .circuit import Circuit, CostReport, Design, assemble_grover, cost_report, lower_binary_dictionary, lower_spin_dictionary
from .gas import Backend, GasConfig, GasTrace, exhaustive_search, gas_minimize, ideal_sample, statevector_sample
from .poly import DegreeCensus, Polynomial, VariableKind, binary_to_spin, degree_census, evaluate, multiply, spin_to_binary, value_bits_required
from .sim import MeasurementDistribution, ResourceLimitError, StateVector, measure_distribution, run, sample

__all__ = [
    "Backend",
    "Circuit",
    "CostReport",
    "DegreeCensus",
    "Design",
    "GasConfig",
    "GasTrace",
    "MeasurementDistribution",
    "Polynomial",
    "ResourceLimitError",
    "StateVector",
    "VariableKind",
    "assemble_grover",
    "binary_to_spin",
    "cost_report",
    "degree_census",
    "evaluate",
    "exhaustive_search",
    "gas_minimize",
    "ideal_sample",
    "lower_binary_dictionary",
    "lower_spin_dictionary",
    "measure_distribution",
    "multiply",
    "run",
    "sample",
    "spin_to_binary",
    "statevector_sample",
    "value_bits_required",
]
