"""The simulated quantum world: registers, ownership, Born-rule measurement."""
from __future__ import annotations

import copy
import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DimensionError,
    MeasurementError,
    NormalizationError,
    OwnershipError,
)
from .linalg import (
    TOL_EQ,
    TOL_NORM,
    DensityMatrix,
    StateVector,
    SubsystemShape,
    check_hermitian,
    operator_sqrt,
    operator_sqrt_inv,
)


class Party(str, Enum):
    ALICE = "alice"
    BOB = "bob"
    REFEREE = "referee"


@dataclass(frozen=True)
class RegisterHandle:
    id: int
    dim: int


class ProjectiveMeasurement:
    """Complete family of mutually orthogonal projectors.

    Rank-one families can be given as vectors (``binary``/``basis``); their
    projector matrices are then only built on demand.
    """

    def __init__(self, projectors: Sequence[np.ndarray], *, validate: bool = True):
        ps = [np.asarray(p, dtype=complex) for p in projectors]
        if not ps:
            raise MeasurementError("empty measurement")
        dim = ps[0].shape[0]
        if any(p.shape != (dim, dim) for p in ps):
            raise DimensionError("projectors must share one square shape")
        if validate:
            for p in ps:
                check_hermitian(p)
                if np.max(np.abs(p @ p - p)) > TOL_EQ:
                    raise MeasurementError("projector is not idempotent")
            for a, b in itertools.combinations(ps, 2):
                if np.max(np.abs(a @ b)) > TOL_EQ:
                    raise MeasurementError("projectors are not mutually orthogonal")
            if np.max(np.abs(sum(ps) - np.eye(dim))) > TOL_EQ:
                raise MeasurementError("projectors do not sum to identity")
        self.dim = dim
        self._projectors = ps
        self._vector = None

    @classmethod
    def binary(cls, vector: StateVector) -> "ProjectiveMeasurement":
        """{|v><v|, I - |v><v|}: outcome 0 means the projection succeeded."""
        if not vector.is_normalized():
            raise NormalizationError("binary measurement needs a unit vector")
        obj = cls.__new__(cls)
        obj.dim = vector.dim
        obj._projectors = None
        obj._vector = vector
        return obj

    @classmethod
    def basis(cls, vectors: Sequence[StateVector]) -> "ProjectiveMeasurement":
        mat = np.column_stack([v.amps for v in vectors])
        dim = mat.shape[0]
        if mat.shape[1] != dim or np.max(np.abs(mat.conj().T @ mat - np.eye(dim))) > TOL_EQ:
            raise MeasurementError("basis vectors must be a complete orthonormal set")
        return cls([np.outer(mat[:, k], mat[:, k].conj()) for k in range(dim)], validate=False)

    @classmethod
    def computational(cls, dim: int) -> "ProjectiveMeasurement":
        return cls.basis([StateVector.basis(dim, k) for k in range(dim)])

    @property
    def num_outcomes(self) -> int:
        return 2 if self._vector is not None else len(self._projectors)

    @property
    def elements(self) -> list[np.ndarray]:
        if self._projectors is None:
            p = self._vector.projector()
            self._projectors = [p, np.eye(self.dim) - p]
        return self._projectors

    def probabilities(self, m: np.ndarray) -> np.ndarray:
        if self._vector is not None:
            p0 = float(np.sum(np.abs(self._vector.amps.conj() @ m) ** 2))
            return np.array([p0, max(0.0, float(np.sum(np.abs(m) ** 2)) - p0)])
        rho = m @ m.conj().T
        return np.array([float(np.real(np.vdot(p, rho))) for p in self.elements])

    def apply(self, m: np.ndarray, k: int) -> np.ndarray:
        if self._vector is not None:
            v = self._vector.amps
            proj = np.outer(v, v.conj() @ m)
            return proj if k == 0 else m - proj
        return self.elements[k] @ m


class Povm:
    """Positive-operator valued measure; post-measurement update via sqrt(E_k)."""

    def __init__(self, elements: Sequence[np.ndarray], completed: bool = False):
        es = [check_hermitian(np.asarray(e, dtype=complex)) for e in elements]
        if not es:
            raise MeasurementError("empty POVM")
        dim = es[0].shape[0]
        if any(e.shape != (dim, dim) for e in es):
            raise DimensionError("POVM elements must share one square shape")
        for e in es:
            if np.linalg.eigvalsh(e).min() < -TOL_EQ:
                raise MeasurementError("POVM element is not positive semidefinite")
        if np.max(np.abs(sum(es) - np.eye(dim))) > TOL_EQ:
            raise MeasurementError("POVM elements do not sum to identity")
        self.dim = dim
        self.elements = es
        self.completed = completed
        self._kraus = None

    @property
    def num_outcomes(self) -> int:
        return len(self.elements)

    @property
    def kraus(self) -> list[np.ndarray]:
        if self._kraus is None:
            self._kraus = [operator_sqrt(e) for e in self.elements]
        return self._kraus

    def probabilities(self, m: np.ndarray) -> np.ndarray:
        rho = m @ m.conj().T
        return np.array([float(np.real(np.vdot(e, rho))) for e in self.elements])

    def apply(self, m: np.ndarray, k: int) -> np.ndarray:
        return self.kraus[k] @ m


Measurement = ProjectiveMeasurement | Povm


def pgm_from_ensemble(
    states: Sequence[StateVector], weights: Sequence[float], cutoff: float = 1e-12
) -> Povm:
    """Square-root ("pretty good") measurement for a weighted ensemble.

    Element k is S^-1/2 w_k |s_k><s_k| S^-1/2 with S the ensemble average; if
    S has a proper support an extra element I - sum_k E_k closes the family.
    """
    w = np.asarray(weights, dtype=float)
    if len(states) != len(w) or len(w) == 0:
        raise ValueError("states and weights must be non-empty and equally long")
    if np.any(w < 0) or w.sum() <= 0:
        raise MeasurementError("weights must be nonnegative and not all zero")
    if any(not s.is_normalized() for s in states):
        raise NormalizationError("ensemble states must be normalised")
    w = w / w.sum()
    dim = states[0].dim
    parts = [wk * s.projector() for wk, s in zip(w, states)]
    root = operator_sqrt_inv(sum(parts), cutoff)
    elements = [root @ p @ root for p in parts]
    rest = np.eye(dim) - sum(elements)
    rest = (rest + rest.conj().T) / 2
    completed = bool(np.max(np.abs(rest)) > TOL_EQ)
    if completed:
        elements.append(rest)
    return Povm(elements, completed=completed)


@dataclass(frozen=True)
class Outcome:
    index: int
    probability: float
    post_state: StateVector


class _Group:
    __slots__ = ("regs", "tensor")

    def __init__(self, regs: list[int], tensor: np.ndarray):
        self.regs = regs
        self.tensor = tensor


class QuantumWorld:
    """Joint pure states of registers with per-register ownership.

    A world is single-owner mutable state; run independent worlds in parallel.
    """

    def __init__(self, rng: Optional[np.random.Generator] = None, seed: Optional[int] = None):
        if rng is None:
            rng = np.random.Generator(np.random.Philox(seed))
        self.rng = rng
        self._ids = itertools.count(1)
        self._dims: dict[int, int] = {}
        self._owner: dict[int, Party] = {}
        self._group_of: dict[int, _Group] = {}
        self._mailbox: dict[tuple[Party, object], int] = {}

    # -- construction -------------------------------------------------------

    def create_register(self, owner: Party, state: StateVector) -> RegisterHandle:
        return self.create_joint([owner], state, SubsystemShape([state.dim]))[0]

    def create_joint(
        self, owners: Sequence[Party], state: StateVector, shape: SubsystemShape
    ) -> list[RegisterHandle]:
        if not isinstance(shape, SubsystemShape):
            shape = SubsystemShape(shape)
        if shape.dim != state.dim or len(owners) != len(shape):
            raise DimensionError(
                f"shape {shape.factors} / {len(owners)} owners inconsistent with state dim {state.dim}"
            )
        if not state.is_normalized():
            raise NormalizationError(f"state norm {state.norm()} != 1")
        ids = [next(self._ids) for _ in shape.factors]
        group = _Group(ids, np.array(state.amps, dtype=complex).reshape(shape.factors))
        for rid, d, who in zip(ids, shape.factors, owners):
            self._dims[rid] = d
            self._owner[rid] = Party(who)
            self._group_of[rid] = group
        return [RegisterHandle(rid, d) for rid, d in zip(ids, shape.factors)]

    def copy(self) -> "QuantumWorld":
        """Deep copy sharing nothing mutable (the copy gets a spawned RNG)."""
        dup = QuantumWorld.__new__(QuantumWorld)
        memo = {}
        dup._group_of = copy.deepcopy(self._group_of, memo)
        dup._dims = dict(self._dims)
        dup._owner = dict(self._owner)
        dup._mailbox = dict(self._mailbox)
        dup._ids = itertools.count(max(self._dims, default=0) + 1)
        dup.rng = self.rng.spawn(1)[0]
        return dup

    # -- ownership ------------------------------------------------------------

    def owner(self, handle: RegisterHandle) -> Party:
        return self._owner[self._check(handle)]

    def _check(self, handle: RegisterHandle) -> int:
        if handle.id not in self._dims:
            raise KeyError(f"unknown register {handle.id}")
        return handle.id

    def _require(self, handles: Sequence[RegisterHandle], caller: Party):
        for h in handles:
            if self._owner[self._check(h)] != caller:
                raise OwnershipError(
                    f"{Party(caller).value} does not own register {h.id} "
                    f"(owner: {self._owner[h.id].value})"
                )

    def transfer(self, handle: RegisterHandle, to: Party, caller: Party) -> None:
        self._require([handle], caller)
        self._owner[handle.id] = Party(to)

    def ship(self, handle: RegisterHandle, to: Party, caller: Party, tag) -> None:
        """Transfer and leave the register in ``to``'s mailbox under ``tag``."""
        self.transfer(handle, to, caller)
        key = (Party(to), tag)
        if key in self._mailbox:
            raise ValueError(f"mailbox slot {tag!r} for {to} already occupied")
        self._mailbox[key] = handle.id

    def collect(self, party: Party, tag) -> Optional[RegisterHandle]:
        rid = self._mailbox.pop((Party(party), tag), None)
        if rid is None:
            return None
        return RegisterHandle(rid, self._dims[rid])

    # -- state access -----------------------------------------------------------

    def _gather(self, handles: Sequence[RegisterHandle]) -> tuple[_Group, list[int]]:
        """Group holding all handles (merging groups if needed) and their axes."""
        ids = [self._check(h) for h in handles]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate register in selection")
        groups = []
        for rid in ids:
            g = self._group_of[rid]
            if all(g is not x for x in groups):
                groups.append(g)
        group = groups[0]
        for g in groups[1:]:
            merged = _Group(group.regs + g.regs, np.tensordot(group.tensor, g.tensor, axes=0))
            for rid in merged.regs:
                self._group_of[rid] = merged
            group = merged
        return group, [group.regs.index(rid) for rid in ids]

    @staticmethod
    def _as_matrix(group: _Group, axes: list[int]) -> tuple[np.ndarray, list[int]]:
        rest = [a for a in range(group.tensor.ndim) if a not in axes]
        order = axes + rest
        t = group.tensor.transpose(order)
        dt = int(np.prod([group.tensor.shape[a] for a in axes]))
        return t.reshape(dt, -1), order

    @staticmethod
    def _restore(group: _Group, mat: np.ndarray, order: list[int]) -> np.ndarray:
        shape = [group.tensor.shape[a] for a in order]
        return mat.reshape(shape).transpose(np.argsort(order))

    def group_state(self, handle: RegisterHandle) -> tuple[StateVector, list[RegisterHandle]]:
        """Inspection: the pure state of the group containing ``handle`` (no ownership check)."""
        g = self._group_of[self._check(handle)]
        return StateVector(g.tensor.reshape(-1)), [RegisterHandle(r, self._dims[r]) for r in g.regs]

    def reduced_state(self, handles: Sequence[RegisterHandle]) -> DensityMatrix:
        """Inspection: reduced density matrix of ``handles`` (no ownership check)."""
        group, axes = self._gather(handles)
        m, _ = self._as_matrix(group, axes)
        return DensityMatrix(m @ m.conj().T, check=False)

    # -- dynamics -----------------------------------------------------------------

    def apply_unitary(self, handles: Sequence[RegisterHandle], unitary: np.ndarray, caller: Party) -> None:
        self._require(handles, caller)
        group, axes = self._gather(handles)
        u = np.asarray(unitary, dtype=complex)
        m, order = self._as_matrix(group, axes)
        if u.shape != (m.shape[0], m.shape[0]):
            raise DimensionError(f"unitary shape {u.shape} does not match target dim {m.shape[0]}")
        if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > 1e-9:
            raise ValueError("operator is not unitary")
        group.tensor = self._restore(group, u @ m, order)

    def _prepare(self, handles, measurement, caller):
        self._require(handles, caller)
        group, axes = self._gather(handles)
        m, order = self._as_matrix(group, axes)
        if measurement.dim != m.shape[0]:
            raise DimensionError(
                f"measurement acts on dim {measurement.dim}, registers have dim {m.shape[0]}"
            )
        return group, m, order

    def born_probabilities(self, handles: Sequence[RegisterHandle], measurement: Measurement, caller: Party) -> np.ndarray:
        _, m, _ = self._prepare(handles, measurement, caller)
        p = np.clip(measurement.probabilities(m), 0.0, None)
        if abs(p.sum() - 1.0) > 1e-9:
            raise MeasurementError(f"outcome probabilities sum to {p.sum()}")
        return p / p.sum()

    def measure(self, handles: Sequence[RegisterHandle], measurement: Measurement, caller: Party) -> Outcome:
        group, m, order = self._prepare(handles, measurement, caller)
        p = np.clip(measurement.probabilities(m), 0.0, None)
        p = p / p.sum()
        k = int(np.searchsorted(np.cumsum(p), self.rng.random() * p.sum(), side="right"))
        k = min(k, len(p) - 1)
        while p[k] == 0.0:  # guard against landing on a zero-width bin at the top edge
            k -= 1
        return self._collapse(group, m, order, measurement, k, float(p[k]))

    def _collapse(self, group, m, order, measurement, k, prob) -> Outcome:
        post = measurement.apply(m, k)
        post = post / np.sqrt(np.sum(np.abs(post) ** 2))
        group.tensor = self._restore(group, post, order)
        return Outcome(k, prob, StateVector(group.tensor.reshape(-1)))

    def branch(self, handles: Sequence[RegisterHandle], measurement: Measurement, caller: Party):
        """Every outcome with nonzero probability as ``(index, probability, world)`` triples."""
        _, m, _ = self._prepare(handles, measurement, caller)
        p = np.clip(measurement.probabilities(m), 0.0, None)
        p = p / p.sum()
        out = []
        for k, pk in enumerate(p):
            if pk <= 1e-15:
                continue
            w = self.copy()
            g, mm, order = w._prepare(handles, measurement, caller)
            w._collapse(g, mm, order, measurement, k, float(pk))
            out.append((k, float(pk), w))
        return out


def conditional_collapse_oracle(
    world: QuantumWorld, handle: RegisterHandle, target: StateVector
) -> tuple[float, StateVector]:
    """Test-only: project ``handle`` onto ``target`` regardless of realisability or ownership.

    Returns the projection probability and the normalised state of the rest of
    the group (factors in group order with ``handle`` removed).  The world is
    not modified.
    """
    if target.dim != handle.dim:
        raise DimensionError(f"target dim {target.dim} != register dim {handle.dim}")
    group, axes = world._gather([handle])
    m, _ = world._as_matrix(group, axes)
    rest = target.amps.conj() @ m
    prob = float(np.sum(np.abs(rest) ** 2))
    if prob <= 0:
        raise NormalizationError("target has zero overlap with the register state")
    return prob, StateVector(rest / np.sqrt(prob))
