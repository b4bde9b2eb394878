from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import ParameterError
from ..linalg import StateVector

U32_MAX = 2**32 - 1
U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class ProtocolParams:
    s: int
    n_sim: int = 256
    master_seed: int = 0

    def __post_init__(self):
        if not isinstance(self.s, int) or not 1 <= self.s <= U32_MAX:
            raise ParameterError(f"s must be a positive integer, got {self.s!r}")
        if not isinstance(self.n_sim, int) or self.n_sim < 3:
            raise ParameterError(f"n_sim must be an integer >= 3, got {self.n_sim!r}")
        if not 0 <= self.master_seed <= U64_MAX:
            raise ParameterError("master_seed must fit in 64 bits")


@dataclass(frozen=True)
class QuantumPayload:
    """Wire image of a register: dimension plus its nonzero amplitudes.

    An entangled register has no pure-state image; it travels with an empty
    entry list and is delivered through the world's mailbox only.
    """

    dim: int
    entries: tuple[tuple[int, complex], ...] = ()

    def __post_init__(self):
        if not 1 <= self.dim <= U64_MAX:
            raise ParameterError(f"payload dim {self.dim} out of range")
        for idx, amp in self.entries:
            if not 0 <= idx < self.dim:
                raise ParameterError(f"payload index {idx} outside dim {self.dim}")
            if not (math.isfinite(amp.real) and math.isfinite(amp.imag)):
                raise ParameterError("non-finite amplitude in payload")

    @classmethod
    def from_state(cls, state: StateVector) -> "QuantumPayload":
        return cls(state.dim, tuple((i, complex(a)) for i, a in state.entries()))

    def to_state(self) -> StateVector:
        return StateVector.from_sparse(self.dim, dict(self.entries))


@dataclass(frozen=True)
class CommitRegister:
    j: int
    register: QuantumPayload

    def __post_init__(self):
        if not 1 <= self.j <= U32_MAX:
            raise ParameterError(f"register index j={self.j} out of range")


@dataclass(frozen=True)
class UnveilOpen:
    b: int
    indices: tuple[int, ...]

    def __post_init__(self):
        if self.b not in (0, 1):
            raise ParameterError(f"b must be 0 or 1, got {self.b!r}")
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if any(not 0 <= i <= U64_MAX for i in self.indices):
            raise ParameterError("announced index does not fit in 64 bits")

    @property
    def s(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class Verdict:
    accept: bool
    first_failure: Optional[int] = None

    def __post_init__(self):
        if self.first_failure is not None and not 0 <= self.first_failure <= U32_MAX:
            raise ParameterError("failure index out of range")


Message = Union[CommitRegister, UnveilOpen, Verdict]


@dataclass
class Transcript:
    """Complete record of one session."""

    messages: list = field(default_factory=list)
    verdict: Optional[Verdict] = None
    outcomes: list = field(default_factory=list)
    seeds: tuple[int, int] = (0, 0)
    committed: Optional[tuple[int, tuple[int, ...]]] = None
