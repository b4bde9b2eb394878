"""State families and closed-form scalars of the steering construction.

Indexing follows the construction literally: the register space has basis
|0>, |1>, ..., |n-1>; the purifying system alpha also has dimension n with
|alpha_{i+}> = |i> for i = 1..n-1 and index 0 unused.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .linalg import DensityMatrix, StateVector, tensor_product

SQRT_HALF = 1.0 / math.sqrt(2.0)


def _check_n(n: int, minimum: int = 3) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ParameterError(f"dimension must be an integer, got {n!r}")
    if n < minimum:
        raise ParameterError(f"dimension n={n} must be >= {minimum}")
    return int(n)


def _check_i(n: int, i: int) -> int:
    if not isinstance(i, (int, np.integer)) or not 1 <= i <= n - 1:
        raise ParameterError(f"state index i={i} outside [1, {n - 1}]")
    return int(i)


@dataclass(frozen=True)
class StateFamilyParams:
    n: int
    i: int = 1

    def __post_init__(self):
        _check_n(self.n)
        _check_i(self.n, self.i)


def phi_plus(n: int, i: int) -> StateVector:
    """(|0> + |i>)/sqrt(2)."""
    n = _check_n(n, 2)
    i = _check_i(n, i)
    return StateVector.from_sparse(n, {0: SQRT_HALF, i: SQRT_HALF})


def phi_minus(n: int, i: int) -> StateVector:
    """(|0> - |i>)/sqrt(2)."""
    n = _check_n(n, 2)
    i = _check_i(n, i)
    return StateVector.from_sparse(n, {0: SQRT_HALF, i: -SQRT_HALF})


def commit_state(n: int, b: int, i: int) -> StateVector:
    """Honest register state (|0> + (-1)^b |i>)/sqrt(2)."""
    if b not in (0, 1):
        raise ParameterError(f"bit must be 0 or 1, got {b!r}")
    return phi_plus(n, i) if b == 0 else phi_minus(n, i)


def phi_n_minus(n: int) -> StateVector:
    """Uniform superposition of all n basis states (the leak direction)."""
    n = _check_n(n)
    return StateVector(np.full(n, 1.0 / math.sqrt(n)))


def alpha_plus(n: int, i: int) -> StateVector:
    n = _check_n(n)
    return StateVector.basis(n, _check_i(n, i))


def omega(n: int) -> StateVector:
    """Purification of rho_plus on alpha (x) beta, alpha factor first."""
    n = _check_n(n)
    amps = np.zeros((n, n), dtype=complex)
    for i in range(1, n):
        amps[i] = phi_plus(n, i).amps
    return StateVector(amps.reshape(-1) / math.sqrt(n - 1))


def alpha_tilde_n_minus(n: int) -> StateVector:
    n = _check_n(n)
    v = np.full(n, 1.0 / math.sqrt(n - 1))
    v[0] = 0.0
    return StateVector(v)


def alpha_tilde_minus(n: int, i: int) -> StateVector:
    n = _check_n(n)
    i = _check_i(n, i)
    v = np.full(n, 2.0 / n)
    v[0] = 0.0
    v[i] = (2.0 - n) / n
    return StateVector(v / math.sqrt(1.0 - 4.0 / n**2))


def c_prime(n: int) -> float:
    """Normalisation constant printed alongside the collapsed-state formula.

    Note: with this constant the collapsed vector has squared norm n^2/(n^2+2),
    not 1; :func:`phi_tilde_minus` normalises by the actual norm instead.
    """
    n = _check_n(n)
    return math.sqrt(n * (n - 1) * (n + 2) / (n**2 + 2))


def _phi_tilde_bracket(n: int, i: int) -> np.ndarray:
    n = _check_n(n)
    i = _check_i(n, i)
    others = np.zeros(n, dtype=complex)
    for k in range(1, n):
        if k != i:
            others += phi_minus(n, k).amps
    head = math.sqrt(1.0 - 4.0 / n**2) / math.sqrt(n - 1)
    tail = math.sqrt(2.0 / n) * math.sqrt(n - 2) / (math.sqrt(n - 1) * math.sqrt(n + 2))
    return head * (phi_minus(n, i).amps - 4.0 * others / (n**2 - 4)) + tail * phi_n_minus(n).amps


def phi_tilde_minus(n: int, i: int) -> StateVector:
    """State of beta after alpha is projected onto alpha_tilde_minus(n, i), unit norm."""
    v = _phi_tilde_bracket(n, i)
    return StateVector(v / np.linalg.norm(v))


def phi_tilde_minus_literal(n: int, i: int) -> StateVector:
    """The bracketed expression scaled by :func:`c_prime`, exactly as printed (not unit norm)."""
    return StateVector(c_prime(n) * _phi_tilde_bracket(n, i))


def _mixture(n: int, family) -> DensityMatrix:
    n = _check_n(n, 2)
    rho = np.zeros((n, n), dtype=complex)
    for i in range(1, n):
        rho += family(n, i).projector()
    return DensityMatrix(rho / (n - 1), check=False)


def rho_plus(n: int) -> DensityMatrix:
    return _mixture(n, phi_plus)


def rho_minus(n: int) -> DensityMatrix:
    return _mixture(n, phi_minus)


@dataclass(frozen=True)
class ClosedForms:
    trace_distance: float
    overlap_phi: float
    overlap_alpha_sq: float
    collapse_weight_n_minus: float


def closed_forms(n: int) -> ClosedForms:
    n = _check_n(n)
    return ClosedForms(
        trace_distance=1.0 / math.sqrt(n - 1),
        overlap_phi=math.sqrt(1.0 - (2 * n + 2) / (n**2 + 2)),
        overlap_alpha_sq=1.0 - 4.0 / (n + 2),
        collapse_weight_n_minus=2.0 / n,
    )


def collapsed_overlap(n: int) -> float:
    """<phi_minus(n,i)|phi_tilde_minus(n,i)> for the unit-norm collapsed state: sqrt(1 - 2/n)."""
    n = _check_n(n)
    return math.sqrt(1.0 - 2.0 / n)


def omega_reconstruction_minus(n: int) -> StateVector:
    """Rebuild omega(n) from the minus-family decomposition."""
    n = _check_n(n)
    total = np.zeros(n * n, dtype=complex)
    w = math.sqrt(1.0 - 4.0 / n**2) / math.sqrt(n - 1)
    for i in range(1, n):
        total += w * tensor_product(alpha_tilde_minus(n, i), phi_minus(n, i)).amps
    total += math.sqrt(2.0 / n) * tensor_product(alpha_tilde_n_minus(n), phi_n_minus(n)).amps
    return StateVector(total)
