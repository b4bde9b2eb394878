"""Numeric-versus-closed-form identity suite behind ``qbclab verify``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .linalg import SubsystemShape, inner_product, trace_distance
from .states import (
    alpha_plus,
    alpha_tilde_minus,
    alpha_tilde_n_minus,
    closed_forms,
    omega,
    omega_reconstruction_minus,
    phi_minus,
    phi_n_minus,
    phi_plus,
    phi_tilde_minus,
    rho_minus,
    rho_plus,
)
from .substrate import Party, ProjectiveMeasurement, QuantumWorld, conditional_collapse_oracle

DEFAULT_LADDER = (3, 4, 5, 8, 16, 32, 64)
DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class IdentityResult:
    name: str
    description: str
    max_error: float
    tol: float
    ns: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol


def _trace_distance(n):
    return [abs(trace_distance(rho_plus(n), rho_minus(n)) - closed_forms(n).trace_distance)]


def _normalisation(n):
    states = [phi_n_minus(n), omega(n), alpha_tilde_n_minus(n), omega_reconstruction_minus(n)]
    for i in range(1, n):
        states += [phi_plus(n, i), phi_minus(n, i), alpha_tilde_minus(n, i), phi_tilde_minus(n, i)]
    errs = [abs(s.norm() - 1.0) for s in states]
    errs += [abs(rho_plus(n).trace() - 1.0), abs(rho_minus(n).trace() - 1.0)]
    return errs


def _decomposition(n):
    return [float(np.max(np.abs(omega_reconstruction_minus(n).amps - omega(n).amps)))]


def _collapsed_overlap(n):
    target = closed_forms(n).overlap_phi
    return [abs(inner_product(phi_minus(n, i), phi_tilde_minus(n, i)) - target) for i in range(1, n)]


def _alpha_overlap(n):
    target = closed_forms(n).overlap_alpha_sq
    return [abs(abs(inner_product(alpha_plus(n, i), alpha_tilde_minus(n, i))) ** 2 - target) for i in range(1, n)]


def _orthogonality(n):
    return [abs(inner_product(phi_plus(n, i), phi_tilde_minus(n, i))) for i in range(1, n)]


def _steering(n):
    world = QuantumWorld(seed=0)
    alpha, _ = world.create_joint([Party.ALICE, Party.ALICE], omega(n), SubsystemShape([n, n]))
    errs = []
    for i in range(1, n):
        _, b1 = conditional_collapse_oracle(world, alpha, alpha_plus(n, i))
        _, b2 = conditional_collapse_oracle(world, alpha, alpha_tilde_minus(n, i))
        errs.append(abs(abs(inner_product(b1, phi_plus(n, i))) - 1.0))
        errs.append(abs(abs(inner_product(b2, phi_tilde_minus(n, i))) - 1.0))
    return errs


def _leak(n):
    world = QuantumWorld(seed=0)
    _, beta = world.create_joint([Party.ALICE, Party.BOB], omega(n), SubsystemShape([n, n]))
    p = world.born_probabilities([beta], ProjectiveMeasurement.binary(phi_n_minus(n)), Party.BOB)[0]
    errs = [abs(p - closed_forms(n).collapse_weight_n_minus)]
    errs += [abs(inner_product(phi_n_minus(n), phi_minus(n, i))) for i in range(1, n)]
    return errs


GROUPS: tuple[tuple[str, str, Callable[[int], list]], ...] = (
    ("trace_distance", "D(rho_+, rho_-) = 1/sqrt(n-1)", _trace_distance),
    ("normalisation", "every constructed state has unit norm / unit trace", _normalisation),
    ("decomposition", "minus-family decomposition rebuilds omega", _decomposition),
    ("collapsed_overlap", "<phi_i-|phi~_i-> = sqrt(1-(2n+2)/(n^2+2))", _collapsed_overlap),
    ("alpha_overlap", "|<alpha_i+|alpha~_i->|^2 = 1-4/(n+2)", _alpha_overlap),
    ("orthogonality", "<phi_i+|phi~_i-> = 0", _orthogonality),
    ("steering_collapse", "alpha_i+ -> phi_i+, alpha~_i- -> phi~_i- (up to phase)", _steering),
    ("leak_weight", "Born weight of phi_n- on omega = 2/n, phi_n- orthogonal to phi_i-", _leak),
)


def identity_suite(ladder: Sequence[int] = DEFAULT_LADDER, tol: float = DEFAULT_TOL) -> list[IdentityResult]:
    ladder = tuple(int(n) for n in ladder)
    out = []
    for name, desc, fn in GROUPS:
        err = max(max(fn(n)) for n in ladder)
        out.append(IdentityResult(name, desc, float(err), tol, ladder))
    return out


def ladder_up_to(n_max: int, ladder: Sequence[int] = DEFAULT_LADDER) -> tuple[int, ...]:
    return tuple(n for n in ladder if n <= n_max)
