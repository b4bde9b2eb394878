"""Dense/sparse finite-dimensional linear algebra for the simulator.

States are :class:`StateVector` objects, mixed states are :class:`DensityMatrix`
objects, and plain operators are complex numpy arrays.  Everything here is a
pure function of immutable inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    DimensionError,
    NormalizationError,
    NotHermitianError,
    NotPositiveError,
)

TOL_NORM = 1e-10
TOL_EQ = 1e-10
TOL_EIG = 1e-9


class StateVector:
    """Complex amplitude vector, stored densely or as an index->amplitude map.

    Sparse storage is used for protocol registers, whose honest states have two
    nonzero amplitudes in a large space.  ``amps`` always returns a read-only
    dense view; it is materialised lazily for sparse vectors.
    """

    __slots__ = ("_dim", "_dense", "_sparse")

    def __init__(self, amps: Union[Sequence[complex], np.ndarray]):
        arr = np.array(amps, dtype=complex).reshape(-1)
        if arr.size == 0:
            raise DimensionError("state vector must have positive dimension")
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite amplitude")
        arr.setflags(write=False)
        self._dim = arr.size
        self._dense = arr
        self._sparse = None

    @classmethod
    def from_sparse(cls, dim: int, entries: Mapping[int, complex]) -> "StateVector":
        if dim < 1:
            raise DimensionError("state vector must have positive dimension")
        sparse = {}
        for idx, amp in entries.items():
            idx = int(idx)
            if not 0 <= idx < dim:
                raise DimensionError(f"index {idx} outside dimension {dim}")
            amp = complex(amp)
            if not (np.isfinite(amp.real) and np.isfinite(amp.imag)):
                raise ValueError("non-finite amplitude")
            if amp != 0:
                sparse[idx] = amp
        obj = cls.__new__(cls)
        obj._dim = int(dim)
        obj._dense = None
        obj._sparse = dict(sorted(sparse.items()))
        return obj

    @classmethod
    def basis(cls, dim: int, index: int) -> "StateVector":
        return cls.from_sparse(dim, {index: 1.0})

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def is_sparse(self) -> bool:
        return self._sparse is not None

    @property
    def amps(self) -> np.ndarray:
        if self._dense is None:
            arr = np.zeros(self._dim, dtype=complex)
            for idx, amp in self._sparse.items():
                arr[idx] = amp
            arr.setflags(write=False)
            self._dense = arr
        return self._dense

    def entries(self) -> tuple[tuple[int, complex], ...]:
        """Nonzero (index, amplitude) pairs in increasing index order."""
        if self._sparse is not None:
            return tuple(self._sparse.items())
        nz = np.flatnonzero(self._dense)
        return tuple((int(i), complex(self._dense[i])) for i in nz)

    def norm(self) -> float:
        if self._sparse is not None:
            return float(np.sqrt(sum(abs(a) ** 2 for a in self._sparse.values())))
        return float(np.linalg.norm(self._dense))

    def is_normalized(self, tol: float = TOL_NORM) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0:
            raise NormalizationError("cannot normalise the zero vector")
        if self._sparse is not None:
            return StateVector.from_sparse(
                self._dim, {i: a / nrm for i, a in self._sparse.items()}
            )
        return StateVector(self._dense / nrm)

    def projector(self) -> np.ndarray:
        v = self.amps
        return np.outer(v, v.conj())

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.projector())

    def allclose(self, other: "StateVector", tol: float = TOL_EQ) -> bool:
        if self.dim != other.dim:
            return False
        return float(np.max(np.abs(self.amps - other.amps))) <= tol

    def equal_up_to_phase(self, other: "StateVector", tol: float = TOL_EQ) -> bool:
        """|<a|b>| == 1 for normalized inputs."""
        return abs(abs(inner_product(self, other)) - 1.0) <= tol

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amps, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.amps, other.amps)

    __hash__ = None

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"StateVector(dim={self.dim}, {kind}, nnz={len(self.entries())})"


@dataclass(frozen=True)
class SubsystemShape:
    """Ordered factor dimensions of a composite space."""

    factors: tuple[int, ...]

    def __init__(self, factors: Iterable[int]):
        fs = tuple(int(f) for f in factors)
        if not fs or any(f < 1 for f in fs):
            raise DimensionError(f"invalid factor dimensions {fs}")
        object.__setattr__(self, "factors", fs)

    @property
    def dim(self) -> int:
        return int(np.prod(self.factors))

    def __len__(self):
        return len(self.factors)


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, DensityMatrix):
        return x.matrix
    return np.asarray(x, dtype=complex)


def is_hermitian(op, tol: float = TOL_EQ) -> bool:
    m = _as_matrix(op)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) <= tol


def check_hermitian(op, tol: float = TOL_EQ) -> np.ndarray:
    m = _as_matrix(op)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"operator must be square, got shape {m.shape}")
    if not is_hermitian(m, tol):
        raise NotHermitianError("operator is not Hermitian within tolerance")
    return m


class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace operator."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, check: bool = True):
        m = np.array(matrix, dtype=complex)
        if check:
            check_hermitian(m)
            tr = np.trace(m).real
            if abs(tr - 1.0) > TOL_NORM:
                raise NormalizationError(f"trace {tr} != 1")
            if np.linalg.eigvalsh(m).min() < -TOL_EQ:
                raise NotPositiveError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, antilinear in ``a``."""
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch {a.dim} vs {b.dim}")
    if a.is_sparse and b.is_sparse:
        bd = dict(b.entries())
        return complex(sum(amp.conjugate() * bd.get(i, 0) for i, amp in a.entries()))
    return complex(np.vdot(a.amps, b.amps))


def tensor_product(*items):
    """Kronecker product of states (StateVector) or operators (arrays/DensityMatrix).

    Index convention: amplitude at ``i * dim_b + j`` is ``a[i] * b[j]``.
    """
    if not items:
        raise ValueError("tensor_product needs at least one factor")
    if all(isinstance(x, StateVector) for x in items):
        if all(x.is_sparse for x in items):
            dim = 1
            entries = {0: 1.0 + 0j}
            for x in items:
                new = {}
                for i, a in entries.items():
                    for j, b in x.entries():
                        new[i * x.dim + j] = a * b
                entries = new
                dim *= x.dim
            return StateVector.from_sparse(dim, entries)
        out = items[0].amps
        for x in items[1:]:
            out = np.kron(out, x.amps)
        return StateVector(out)
    if any(isinstance(x, StateVector) for x in items):
        raise TypeError("cannot mix state vectors and operators")
    out = _as_matrix(items[0])
    for x in items[1:]:
        out = np.kron(out, _as_matrix(x))
    if all(isinstance(x, DensityMatrix) for x in items):
        return DensityMatrix(out, check=False)
    return out


def partial_trace(rho, shape: SubsystemShape, keep) -> DensityMatrix:
    """Reduced state on the factors listed in ``keep`` (int or sequence of ints)."""
    m = _as_matrix(rho)
    if not isinstance(shape, SubsystemShape):
        shape = SubsystemShape(shape)
    if m.shape != (shape.dim, shape.dim):
        raise DimensionError(f"shape {shape.factors} inconsistent with operator {m.shape}")
    keep = (keep,) if isinstance(keep, (int, np.integer)) else tuple(keep)
    k = len(shape)
    if not keep or any(not 0 <= q < k for q in keep) or len(set(keep)) != len(keep):
        raise DimensionError(f"invalid factor selection {keep} for {k} factors")
    keep = tuple(sorted(keep))
    drop = tuple(q for q in range(k) if q not in keep)
    t = m.reshape(shape.factors + shape.factors)
    order = keep + drop + tuple(k + q for q in keep) + tuple(k + q for q in drop)
    t = t.transpose(order)
    dk = int(np.prod([shape.factors[q] for q in keep]))
    dd = int(np.prod([shape.factors[q] for q in drop])) if drop else 1
    t = t.reshape(dk, dd, dk, dd)
    return DensityMatrix(np.einsum("ajbj->ab", t), check=False)


def reduced_from_pure(psi: StateVector, shape: SubsystemShape, keep) -> DensityMatrix:
    """Partial trace of |psi><psi| without forming the full projector."""
    if not isinstance(shape, SubsystemShape):
        shape = SubsystemShape(shape)
    if psi.dim != shape.dim:
        raise DimensionError(f"shape {shape.factors} inconsistent with state dim {psi.dim}")
    keep = (keep,) if isinstance(keep, (int, np.integer)) else tuple(sorted(keep))
    drop = tuple(q for q in range(len(shape)) if q not in keep)
    t = psi.amps.reshape(shape.factors).transpose(keep + drop)
    dk = int(np.prod([shape.factors[q] for q in keep]))
    mat = t.reshape(dk, -1)
    return DensityMatrix(mat @ mat.conj().T, check=False)


def hermitian_eig(op) -> tuple[np.ndarray, list[StateVector]]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian operator."""
    m = check_hermitian(op)
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return w, [StateVector(v[:, k]) for k in range(v.shape[1])]


def trace_norm_hermitian(op) -> float:
    m = check_hermitian(op)
    return float(np.sum(np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2))))


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of rho - sigma, via eigenvalues of the (Hermitian) difference."""
    a, b = _as_matrix(rho), _as_matrix(sigma)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch {a.shape} vs {b.shape}")
    return 0.5 * trace_norm_hermitian(a - b)


def operator_sqrt_inv(op, cutoff: float = 1e-12) -> np.ndarray:
    """Pseudo-inverse square root of a PSD operator; eigenvalues <= cutoff map to 0."""
    m = check_hermitian(op)
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    if w.min(initial=0.0) < -TOL_EQ:
        raise NotPositiveError(f"negative eigenvalue {w.min()}")
    inv = np.zeros_like(w)
    mask = w > cutoff
    inv[mask] = 1.0 / np.sqrt(w[mask])
    return (v * inv) @ v.conj().T


def operator_sqrt(op) -> np.ndarray:
    """PSD square root via eigendecomposition (negative round-off clipped)."""
    m = check_hermitian(op)
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    if w.min(initial=0.0) < -TOL_EQ:
        raise NotPositiveError(f"negative eigenvalue {w.min()}")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def batch_overlap_sq(idx_a: np.ndarray, amp_a: np.ndarray, idx_b: np.ndarray, amp_b: np.ndarray) -> np.ndarray:
    """|<a|b>|^2 for batches of k-sparse states.

    ``idx_*`` and ``amp_*`` have shape ``(..., k)``: the support indices and
    amplitudes of each state.  Indices inside one state must be distinct.
    """
    match = idx_a[..., :, None] == idx_b[..., None, :]
    ov = np.sum(np.conj(amp_a)[..., :, None] * amp_b[..., None, :] * match, axis=(-2, -1))
    return np.abs(ov) ** 2
