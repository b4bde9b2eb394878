"""Honest parties as explicit state machines, and the session driver."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import ParameterError, ProtocolOrderError
from ..rng import stream
from ..states import commit_state
from ..substrate import Party, ProjectiveMeasurement, QuantumWorld, RegisterHandle
from .messages import (
    CommitRegister,
    ProtocolParams,
    QuantumPayload,
    Transcript,
    UnveilOpen,
    Verdict,
)
from .transport import queue_transport

# stream roles under (master_seed, session_index, role)
ROLE_ALICE = 0
ROLE_WORLD = 1


def alice_commit(
    params: ProtocolParams, b: int, world: QuantumWorld, rng: Optional[np.random.Generator] = None
) -> tuple[list[CommitRegister], tuple[int, ...]]:
    """Prepare, hand over and announce s registers committing to ``b``.

    Returns the commit messages and the secret indices i_1..i_s.
    """
    if b not in (0, 1):
        raise ParameterError(f"b must be 0 or 1, got {b!r}")
    rng = world.rng if rng is None else rng
    indices = tuple(int(i) for i in rng.integers(1, params.n_sim, size=params.s))
    messages = []
    for j, i in enumerate(indices, start=1):
        state = commit_state(params.n_sim, b, i)
        handle = world.create_register(Party.ALICE, state)
        world.ship(handle, Party.BOB, Party.ALICE, tag=j)
        messages.append(CommitRegister(j, QuantumPayload.from_state(state)))
    return messages, indices


def bob_store(
    messages: Sequence[CommitRegister], world: QuantumWorld, s: Optional[int] = None
) -> list[RegisterHandle]:
    """Take custody of the committed registers without measuring them."""
    js = [m.j for m in messages]
    if len(set(js)) != len(js):
        raise ParameterError(f"duplicate register index in {js}")
    expected = list(range(1, (len(messages) if s is None else s) + 1))
    if sorted(js) != expected:
        raise ParameterError(f"register indices {sorted(js)} do not cover 1..{len(expected)}")
    stored = []
    for msg in sorted(messages, key=lambda m: m.j):
        handle = world.collect(Party.BOB, msg.j)
        if handle is None:
            # delivered only as a wire image: materialise it on Bob's side
            if not msg.register.entries:
                raise ParameterError(f"register {msg.j} was neither delivered nor serialised")
            handle = world.create_register(Party.BOB, msg.register.to_state())
        stored.append(handle)
    return stored


def alice_unveil(b: int, indices: Sequence[int], s: Optional[int] = None) -> UnveilOpen:
    indices = tuple(int(i) for i in indices)
    if s is not None and len(indices) != s:
        raise ParameterError(f"expected {s} indices, got {len(indices)}")
    if any(i < 1 for i in indices):
        raise ParameterError("announced indices must be >= 1")
    return UnveilOpen(b, indices)


def bob_verify(
    opening: UnveilOpen, stored: Sequence[RegisterHandle], world: QuantumWorld, n_sim: int
) -> tuple[Verdict, list[Optional[int]]]:
    """Project every register onto the announced state.

    All registers are measured even after a failure.  Outcome 0 is a
    successful projection.  Indices outside [1, n_sim-1] reject immediately.
    """
    if opening.s != len(stored):
        raise ParameterError(f"announcement covers {opening.s} registers, {len(stored)} stored")
    if any(not 1 <= i <= n_sim - 1 for i in opening.indices):
        return Verdict(False, None), [None] * len(stored)
    outcomes: list[Optional[int]] = []
    first_failure = None
    for j, (handle, i) in enumerate(zip(stored, opening.indices), start=1):
        m = ProjectiveMeasurement.binary(commit_state(n_sim, opening.b, i))
        k = world.measure([handle], m, Party.BOB).index
        outcomes.append(k)
        if k != 0 and first_failure is None:
            first_failure = j
    return Verdict(first_failure is None, first_failure), outcomes


class Phase(Enum):
    COMMIT = "commit"
    UNVEIL = "unveil"
    DONE = "done"


class HonestAlice:
    def __init__(self, b: int):
        if b not in (0, 1):
            raise ParameterError(f"b must be 0 or 1, got {b!r}")
        self.b = b
        self.indices: Optional[tuple[int, ...]] = None
        self.verdict: Optional[Verdict] = None

    def commit(self, params, world, rng):
        if self.indices is not None:
            raise ProtocolOrderError("already committed")
        messages, self.indices = alice_commit(params, self.b, world, rng)
        return messages

    def unveil(self, params, world, rng):
        if self.indices is None:
            raise ProtocolOrderError("unveil before commit")
        return alice_unveil(self.b, self.indices, params.s)

    def on_verdict(self, verdict: Verdict):
        self.verdict = verdict

    @property
    def committed(self):
        return None if self.indices is None else (self.b, self.indices)


class HonestBob:
    """Receives s commits in order, then one opening, then answers with a verdict.

    Bob only ever holds register handles; he never reads amplitudes.
    """

    def __init__(self, params: ProtocolParams):
        self.params = params
        self.phase = Phase.COMMIT
        self._commits: list[CommitRegister] = []
        self.stored: list[RegisterHandle] = []
        self.outcomes: list[Optional[int]] = []

    def on_message(self, msg, world: QuantumWorld):
        if self.phase is Phase.COMMIT:
            if not isinstance(msg, CommitRegister):
                raise ProtocolOrderError(
                    f"{type(msg).__name__} received after {len(self._commits)} of {self.params.s} commits"
                )
            if msg.j != len(self._commits) + 1:
                raise ProtocolOrderError(f"commit j={msg.j} out of order")
            self._commits.append(msg)
            if len(self._commits) == self.params.s:
                self.stored = bob_store(self._commits, world, self.params.s)
                self.phase = Phase.UNVEIL
            return None
        if self.phase is Phase.UNVEIL:
            if not isinstance(msg, UnveilOpen):
                raise ProtocolOrderError(f"expected UnveilOpen, got {type(msg).__name__}")
            verdict, self.outcomes = bob_verify(msg, self.stored, world, self.params.n_sim)
            self.phase = Phase.DONE
            return verdict
        raise ProtocolOrderError("session already finished")


def run_session(
    params: ProtocolParams,
    alice,
    bob,
    transport=None,
    session_index: int = 0,
) -> Transcript:
    """Drive commit -> unveil -> verdict over ``transport`` (default: in-process queue)."""
    world = QuantumWorld(rng=stream(params.master_seed, session_index, ROLE_WORLD))
    alice_rng = stream(params.master_seed, session_index, ROLE_ALICE)
    a_end, b_end = transport if transport is not None else queue_transport()
    log = Transcript(seeds=(params.master_seed, session_index))

    for msg in alice.commit(params, world, alice_rng):
        a_end.send(msg)
        log.messages.append(msg)
        if bob.on_message(b_end.recv(), world) is not None:
            raise ProtocolOrderError("Bob replied during the commit phase")
    if getattr(bob, "phase", Phase.UNVEIL) is not Phase.UNVEIL:
        raise ProtocolOrderError("commit phase ended before all registers arrived")

    opening = alice.unveil(params, world, alice_rng)
    a_end.send(opening)
    log.messages.append(opening)
    verdict = bob.on_message(b_end.recv(), world)
    if not isinstance(verdict, Verdict):
        raise ProtocolOrderError("Bob did not answer the opening with a verdict")
    b_end.send(verdict)
    alice.on_verdict(a_end.recv())
    log.messages.append(verdict)
    log.verdict = verdict
    log.outcomes = list(bob.outcomes)
    log.committed = getattr(alice, "committed", None)
    return log


def run_sessions(
    params: ProtocolParams,
    count: int,
    make_alice: Callable[[], object],
    make_bob: Optional[Callable[[ProtocolParams], object]] = None,
    workers: int = 1,
    start: int = 0,
) -> list[Transcript]:
    """Run sessions ``start .. start+count-1``; output is independent of ``workers``."""
    make_bob = make_bob or HonestBob

    def one(k: int) -> Transcript:
        return run_session(params, make_alice(), make_bob(params), session_index=k)

    idx = range(start, start + count)
    if workers <= 1:
        return [one(k) for k in idx]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, idx))
