"""Cheating strategies for both parties.

Two engines are available for Alice's attacks:

* ``"session"`` runs full protocol sessions through the substrate, one world
  per trial.  Exact but slow; used for cross-checks.
* ``"tabulated"`` (default) computes the exact per-register outcome table once
  with the substrate (Alice's outcome probabilities, the announcement each
  outcome triggers, and Bob's conditional pass probability), then samples
  independent registers from it in vectorised batches.  Registers of one trial
  are prepared independently, so this is the same distribution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Literal, Optional

import numpy as np

from .errors import ParameterError
from .linalg import StateVector, SubsystemShape, batch_overlap_sq, tensor_product, trace_distance
from .protocol.messages import ProtocolParams, QuantumPayload, CommitRegister
from .protocol.session import HonestAlice, alice_unveil, run_sessions
from .rng import stream
from .states import (
    alpha_tilde_minus,
    alpha_tilde_n_minus,
    commit_state,
    phi_plus,
    rho_minus,
    rho_plus,
)
from .stats import wilson_half_width
from .substrate import (
    Party,
    ProjectiveMeasurement,
    QuantumWorld,
    conditional_collapse_oracle,
    pgm_from_ensemble,
)

CHUNK = 20_000
_ATTACK_STREAM = 7


def _exact(x) -> Fraction:
    """Configuration numbers are decimal inputs: 0.001 means 1/1000, not its binary neighbour."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


# -- device model -------------------------------------------------------------------


@dataclass(frozen=True)
class DeviceModel:
    """Smallest squared-overlap gap between two basis vectors the device can resolve."""

    delta: float

    def __post_init__(self):
        if not (_exact(self.delta) > 0 and _exact(self.delta) <= 1):
            raise ParameterError(f"delta must lie in (0, 1], got {self.delta}")


def basis_gap(n_a: int) -> Fraction:
    """1 - |<alpha_{i+}|alpha~_{i-}>|^2 = 4/(n_a+2)."""
    return Fraction(4, n_a + 2)


def n_a_max(device: DeviceModel) -> int:
    return math.floor(Fraction(4) / _exact(device.delta) - 2)


def device_check(device: DeviceModel, n_a: int) -> bool:
    return basis_gap(n_a) >= _exact(device.delta)


# -- strategies -----------------------------------------------------------------------

IndexRule = Literal["same", "different", "random"]


@dataclass(frozen=True)
class NaiveRedeclare:
    """Commit honestly to ``commit_b`` and announce ``announce_b``."""

    commit_b: int = 0
    announce_b: int = 1
    index_rule: IndexRule = "different"

    def __post_init__(self):
        if self.commit_b not in (0, 1) or self.announce_b not in (0, 1):
            raise ParameterError("bits must be 0 or 1")
        if self.index_rule not in ("same", "different", "random"):
            raise ParameterError(f"unknown index rule {self.index_rule!r}")


MeasurementKind = Literal["pgm", "oracle", "honest"]


@dataclass(frozen=True)
class EntangledSteering:
    """Purify rho_+ over the first ``n_a - 1`` register states and steer at unveil.

    ``measurement`` is the b=1 measurement: the square-root measurement
    (``"pgm"``), the unrealisable exact projection onto one alpha~_{i-}
    (``"oracle"``, test-only), or the honest basis (``"honest"``).
    """

    n_a: int
    target_b: int = 1
    measurement: MeasurementKind = "pgm"
    device: Optional[DeviceModel] = None

    def __post_init__(self):
        if not isinstance(self.n_a, int) or self.n_a < 3:
            raise ParameterError(f"n_a must be an integer >= 3, got {self.n_a!r}")
        if self.target_b not in (0, 1):
            raise ParameterError("target_b must be 0 or 1")
        if self.measurement not in ("pgm", "oracle", "honest"):
            raise ParameterError(f"unknown measurement {self.measurement!r}")


@dataclass
class AttackReport:
    strategy: str
    trials: int
    acceptances: int
    bound: float
    seed: int
    phi_n_hits: Optional[tuple[int, ...]] = None
    bounded: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def acceptance_rate(self) -> float:
        return self.acceptances / self.trials if self.trials else 0.0

    @property
    def ci_half_width(self) -> float:
        return wilson_half_width(self.acceptances, self.trials)

    @property
    def within_bound(self) -> bool:
        return self.acceptance_rate <= self.bound + self.ci_half_width

    def as_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "trials": self.trials,
            "acceptances": self.acceptances,
            "acceptance_rate": self.acceptance_rate,
            "bound": self.bound,
            "ci_half_width": self.ci_half_width,
            "within_bound": self.within_bound if self.bounded else None,
            "phi_n_hits": list(self.phi_n_hits) if self.phi_n_hits is not None else None,
            "seed": self.seed,
            **self.meta,
        }


# -- Alice's building blocks -------------------------------------------------------------


def steering_state(n_a: int, n_sim: int) -> StateVector:
    """(1/sqrt(n_a-1)) sum_i |i>_alpha |phi_{i+}>_beta with beta embedded in dimension n_sim."""
    if not 3 <= n_a <= n_sim:
        raise ParameterError(f"need 3 <= n_a <= n_sim, got n_a={n_a}, n_sim={n_sim}")
    amps = np.zeros((n_a, n_sim), dtype=complex)
    for i in range(1, n_a):
        amps[i] = phi_plus(n_sim, i).amps
    return StateVector(amps.reshape(-1) / math.sqrt(n_a - 1))


def leak_state(n_a: int, n_sim: int) -> StateVector:
    """phi_{n-} of dimension n_a, embedded in the n_sim-dimensional register."""
    v = np.zeros(n_sim)
    v[:n_a] = 1.0 / math.sqrt(n_a)
    return StateVector(v)


def steering_pgm(n_a: int):
    """Square-root measurement for the alpha~ ensemble read off the minus decomposition.

    Outcome k < n_a-1 corresponds to alpha~_{(k+1)-}; outcome n_a-1 to alpha~_{n-};
    a final element covers the unused alpha basis vector |0>.
    """
    states = [alpha_tilde_minus(n_a, i) for i in range(1, n_a)] + [alpha_tilde_n_minus(n_a)]
    weights = [(1 - 4 / n_a**2) / (n_a - 1)] * (n_a - 1) + [2 / n_a]
    return pgm_from_ensemble(states, weights)


def alice_measurement(kind: str, n_a: int, target_b: int, unitary: Optional[np.ndarray] = None):
    """Measurement on alpha plus the index each outcome announces (None = best response)."""
    if target_b == 0 or kind == "honest":
        if unitary is None:
            m = ProjectiveMeasurement.computational(n_a)
        else:
            m = ProjectiveMeasurement.basis([StateVector(unitary[:, k]) for k in range(n_a)])
        labels = [None] * n_a
        if target_b == 0 and unitary is None:
            labels = [None] + list(range(1, n_a))
        return m, labels
    if kind == "pgm":
        m = steering_pgm(n_a)
        labels = list(range(1, n_a)) + [None] * (m.num_outcomes - (n_a - 1))
        return m, labels
    raise ParameterError(f"measurement kind {kind!r} has no physical realisation")


def best_announcement(rho: np.ndarray, b: int, n_sim: int) -> tuple[int, float]:
    """Index maximising <psi^b_j|rho|psi^b_j> over j in [1, n_sim-1]; ties go to the lowest j."""
    cands = np.column_stack([commit_state(n_sim, b, j).amps for j in range(1, n_sim)])
    vals = np.real(np.einsum("aj,ab,bj->j", cands.conj(), rho, cands))
    j = int(np.flatnonzero(vals >= vals.max() - 1e-12)[0])
    return j + 1, float(vals[j])


@dataclass(frozen=True)
class RegisterTable:
    """Exact single-register statistics of an attack."""

    probabilities: np.ndarray
    announce: tuple[int, ...]
    pass_prob: np.ndarray
    leak_prob: np.ndarray

    @property
    def pass_rate(self) -> float:
        return float(self.probabilities @ self.pass_prob)

    @property
    def leak_rate(self) -> float:
        return float(self.probabilities @ self.leak_prob)


def _fresh_register(n_a: int, n_sim: int):
    world = QuantumWorld(seed=0)
    alpha, beta = world.create_joint(
        [Party.ALICE, Party.ALICE], steering_state(n_a, n_sim), SubsystemShape([n_a, n_sim])
    )
    world.transfer(beta, Party.BOB, Party.ALICE)
    return world, alpha, beta


def register_table(
    n_a: int, n_sim: int, target_b: int, kind: str = "pgm", unitary: Optional[np.ndarray] = None
) -> RegisterTable:
    """Branch Alice's measurement on a fresh register and score every branch."""
    if unitary is None:
        return _register_table_cached(n_a, n_sim, target_b, kind)
    return _register_table(n_a, n_sim, target_b, kind, unitary)


@lru_cache(maxsize=64)
def _register_table_cached(n_a, n_sim, target_b, kind):
    return _register_table(n_a, n_sim, target_b, kind, None)


def _register_table(n_a, n_sim, target_b, kind, unitary):
    world, alpha, beta = _fresh_register(n_a, n_sim)
    leak_probe = ProjectiveMeasurement.binary(leak_state(n_a, n_sim))
    probs, announce, passes, leaks = [], [], [], []

    if kind == "oracle" and target_b == 1:
        # hypothetical exact projection onto one alpha~_{i-}, i chosen uniformly
        for i in range(1, n_a):
            _, beta_state = conditional_collapse_oracle(world, alpha, alpha_tilde_minus(n_a, i))
            probs.append(1.0 / (n_a - 1))
            announce.append(i)
            passes.append(abs(np.vdot(commit_state(n_sim, 1, i).amps, beta_state.amps)) ** 2)
            leaks.append(abs(np.vdot(leak_state(n_a, n_sim).amps, beta_state.amps)) ** 2)
    else:
        m, labels = alice_measurement(kind, n_a, target_b, unitary)
        for k, pk, branch in world.branch([alpha], m, Party.ALICE):
            if labels[k] is None:
                # Alice's offline best response to this outcome (she knows the model)
                j, _ = best_announcement(branch.reduced_state([beta]).matrix, target_b, n_sim)
            else:
                j = labels[k]
            check = ProjectiveMeasurement.binary(commit_state(n_sim, target_b, j))
            probs.append(pk)
            announce.append(j)
            passes.append(branch.born_probabilities([beta], check, Party.BOB)[0])
            leaks.append(branch.born_probabilities([beta], leak_probe, Party.BOB)[0])
    p = np.array(probs)
    return RegisterTable(p / p.sum(), tuple(announce), np.array(passes), np.array(leaks))


def sample_table(table: RegisterTable, s: int, trials: int, seed: int, salt: int = 0):
    """Monte Carlo over independent registers; returns (acceptances, per-register leak hits)."""
    acc = 0
    hits = np.zeros(s, dtype=np.int64)
    cdf = np.cumsum(table.probabilities)
    cdf[-1] = 1.0
    for c, start in enumerate(range(0, trials, CHUNK)):
        t = min(CHUNK, trials - start)
        rng = stream(seed, _ATTACK_STREAM, salt, c)
        k = np.searchsorted(cdf, rng.random((t, s)), side="right")
        passed = rng.random((t, s)) < table.pass_prob[k]
        leaked = rng.random((t, s)) < table.leak_prob[k]
        acc += int(np.count_nonzero(passed.all(axis=1)))
        hits += leaked.sum(axis=0)
    return acc, tuple(int(h) for h in hits)


class SteeringAlice:
    """Protocol-level entangled attacker (session engine)."""

    def __init__(self, strategy: EntangledSteering, kind: Optional[str] = None):
        self.strategy = strategy
        self.kind = kind or strategy.measurement
        if self.kind == "oracle":
            raise ParameterError("the oracle projection cannot run inside a session")
        self.alphas = []
        self.verdict = None
        self.announced = None

    def commit(self, params: ProtocolParams, world: QuantumWorld, rng):
        n_a = self.strategy.n_a
        msgs = []
        for j in range(1, params.s + 1):
            alpha, beta = world.create_joint(
                [Party.ALICE, Party.ALICE], steering_state(n_a, params.n_sim),
                SubsystemShape([n_a, params.n_sim]),
            )
            world.ship(beta, Party.BOB, Party.ALICE, tag=j)
            self.alphas.append(alpha)
            msgs.append(CommitRegister(j, QuantumPayload(params.n_sim)))
        return msgs

    def unveil(self, params: ProtocolParams, world: QuantumWorld, rng):
        s = self.strategy
        table = register_table(s.n_a, params.n_sim, s.target_b, self.kind)
        m, _ = alice_measurement(self.kind, s.n_a, s.target_b)
        outcomes = [world.measure([a], m, Party.ALICE).index for a in self.alphas]
        # outcome k of the measurement -> announcement fixed by the table
        branch_of = _branch_index(self.kind, s.n_a, s.target_b, params.n_sim)
        self.announced = tuple(table.announce[branch_of[k]] for k in outcomes)
        return alice_unveil(s.target_b, self.announced, params.s)

    def on_verdict(self, verdict):
        self.verdict = verdict

    committed = None


@lru_cache(maxsize=64)
def _branch_index(kind, n_a, target_b, n_sim):
    """Map raw outcome index -> row of the register table (rows skip zero-probability outcomes)."""
    world, alpha, _ = _fresh_register(n_a, n_sim)
    m, _ = alice_measurement(kind, n_a, target_b)
    p = world.born_probabilities([alpha], m, Party.ALICE)
    rows, r = {}, 0
    for k, pk in enumerate(p):
        if pk > 1e-15:
            rows[k] = r
            r += 1
    return rows


class NaiveAlice(HonestAlice):
    def __init__(self, strategy: NaiveRedeclare):
        super().__init__(strategy.commit_b)
        self.strategy = strategy

    def unveil(self, params, world, rng):
        return alice_unveil(
            self.strategy.announce_b, _redeclare(np.array(self.indices), self.strategy.index_rule, params.n_sim, rng), params.s
        )


def _redeclare(indices: np.ndarray, rule: str, n_sim: int, rng) -> np.ndarray:
    if rule == "same":
        return indices.copy()
    if rule == "different":
        return indices % (n_sim - 1) + 1
    return rng.integers(1, n_sim, size=indices.shape)


# -- attacks ----------------------------------------------------------------------------------


def cheat_bound_value(n_a: int, s: int) -> float:
    return (1 - 2 / n_a) ** s


def naive_attack(
    params: ProtocolParams, strategy: NaiveRedeclare, trials: int, engine: str = "tabulated"
) -> AttackReport:
    """Honest commitment, different announced bit; compared against (1/4)^s."""
    bound = 0.25**params.s if strategy.commit_b != strategy.announce_b else 1.0
    meta = {"s": params.s, "n_sim": params.n_sim, "index_rule": strategy.index_rule,
            "commit_b": strategy.commit_b, "announce_b": strategy.announce_b, "engine": engine}
    if engine == "session":
        ts = run_sessions(params, trials, lambda: NaiveAlice(strategy))
        acc = sum(t.verdict.accept for t in ts)
        return AttackReport("naive", trials, acc, bound, params.master_seed, meta=meta)

    n = params.n_sim
    # support {0, i} with amplitudes taken from the state constructors
    amp = {b: (commit_state(n, b, 1).amps[0], commit_state(n, b, 1).amps[1]) for b in (0, 1)}
    acc = 0
    for c, start in enumerate(range(0, trials, CHUNK)):
        t = min(CHUNK, trials - start)
        rng = stream(params.master_seed, _ATTACK_STREAM, 0, c)
        i = rng.integers(1, n, size=(t, params.s))
        i2 = _redeclare(i, strategy.index_rule, n, rng)
        zeros = np.zeros_like(i)
        pa = np.broadcast_to(np.array(amp[strategy.announce_b]), i.shape + (2,))
        pc = np.broadcast_to(np.array(amp[strategy.commit_b]), i.shape + (2,))
        pass_prob = batch_overlap_sq(np.stack([zeros, i2], -1), pa, np.stack([zeros, i], -1), pc)
        passed = rng.random((t, params.s)) < pass_prob
        acc += int(np.count_nonzero(passed.all(axis=1)))
    return AttackReport("naive", trials, acc, bound, params.master_seed, meta=meta)


def steering_attack(
    params: ProtocolParams, strategy: EntangledSteering, trials: int, engine: str = "tabulated",
    _kind: Optional[str] = None, _name: str = "steering",
) -> AttackReport:
    """Entangled attack; the b=1 rate is compared against (1 - 2/n_a)^s."""
    if strategy.n_a > params.n_sim:
        raise ParameterError(f"n_a={strategy.n_a} exceeds n_sim={params.n_sim}")
    if _kind is None and strategy.device is not None and not device_check(strategy.device, strategy.n_a):
        raise ParameterError(
            f"n_a={strategy.n_a} exceeds the device limit n_a_max={n_a_max(strategy.device)}"
        )
    kind = _kind or strategy.measurement
    bound = cheat_bound_value(strategy.n_a, params.s) if strategy.target_b == 1 else 1.0
    table = register_table(strategy.n_a, params.n_sim, strategy.target_b, kind)
    meta = {"n_a": strategy.n_a, "s": params.s, "n_sim": params.n_sim, "target_b": strategy.target_b,
            "measurement": kind, "engine": engine, "exact_register_pass": table.pass_rate,
            "exact_leak_rate": table.leak_rate}
    if engine == "session":
        ts = run_sessions(params, trials, lambda: SteeringAlice(strategy, kind))
        acc = sum(t.verdict.accept for t in ts)
        return AttackReport(_name, trials, acc, bound, params.master_seed, meta=meta)
    acc, hits = sample_table(table, params.s, trials, params.master_seed)
    return AttackReport(_name, trials, acc, bound, params.master_seed, phi_n_hits=hits, meta=meta)


def snapped_attack(
    params: ProtocolParams, strategy: EntangledSteering, trials: int, engine: str = "tabulated"
) -> AttackReport:
    """Steering attack on a device of finite resolution.

    When the device cannot resolve the cheating basis from the honest one, the
    b=1 measurement degrades to the honest basis and Alice best-responds to it.
    """
    resolvable = strategy.device is None or device_check(strategy.device, strategy.n_a)
    kind = strategy.measurement if resolvable else "honest"
    report = steering_attack(params, strategy, trials, engine, _kind=kind, _name="snapped")
    report.meta["snapped"] = not resolvable
    if strategy.device is not None:
        report.meta["n_a_max"] = n_a_max(strategy.device)
    return report


# -- Bob's attack ---------------------------------------------------------------------------


def helstrom_measurement(n_sim: int) -> ProjectiveMeasurement:
    """Two-outcome measurement on the positive / non-positive eigenspaces of rho_+ - rho_-.

    Outcome 0 means "guess b = 0".
    """
    diff = rho_plus(n_sim).matrix - rho_minus(n_sim).matrix
    w, v = np.linalg.eigh(diff)
    pos = v[:, w > 1e-12]
    p = pos @ pos.conj().T
    return ProjectiveMeasurement([p, np.eye(n_sim) - p])


def helstrom_guess(world: QuantumWorld, handles, n_sim: int) -> list[int]:
    m = helstrom_measurement(n_sim)
    return [world.measure([h], m, Party.BOB).index for h in handles]


def helstrom_success_exact(n_sim: int) -> float:
    return 0.5 + 0.5 * trace_distance(rho_plus(n_sim), rho_minus(n_sim))


def helstrom_attack(n_sim: int, trials: int, seed: int, engine: str = "tabulated") -> AttackReport:
    """Per-register guessing of a uniformly random bit with the Helstrom measurement."""
    if n_sim < 2:
        raise ParameterError("n_sim must be >= 2")
    m = helstrom_measurement(n_sim)
    expected = helstrom_success_exact(n_sim)
    meta = {"n_sim": n_sim, "engine": engine, "expected_success": expected}
    rng0 = stream(seed, _ATTACK_STREAM, 1)
    if engine == "session":
        correct = 0
        for t in range(trials):
            rng = stream(seed, _ATTACK_STREAM, 1, t)
            b, i = int(rng.integers(0, 2)), int(rng.integers(1, n_sim))
            world = QuantumWorld(rng=rng)
            h = world.create_register(Party.ALICE, commit_state(n_sim, b, i))
            world.transfer(h, Party.BOB, Party.ALICE)
            correct += helstrom_guess(world, [h], n_sim)[0] == b
        return AttackReport("helstrom", trials, correct, expected, seed, bounded=False, meta=meta)
    # exact probability of a correct guess for every (b, i)
    table = np.zeros((2, n_sim))
    world = QuantumWorld(rng=rng0)
    for b in (0, 1):
        for i in range(1, n_sim):
            h = world.create_register(Party.BOB, commit_state(n_sim, b, i))
            table[b, i] = world.born_probabilities([h], m, Party.BOB)[b]
    correct = 0
    for c, start in enumerate(range(0, trials, CHUNK)):
        t = min(CHUNK, trials - start)
        rng = stream(seed, _ATTACK_STREAM, 2, c)
        b = rng.integers(0, 2, size=t)
        i = rng.integers(1, n_sim, size=t)
        correct += int(np.count_nonzero(rng.random(t) < table[b, i]))
    return AttackReport("helstrom", trials, correct, expected, seed, bounded=False, meta=meta)


def multi_copy_distinguisher(s: int, n_sim: int) -> float:
    """Exact D(rho_+^{(x)s}, rho_-^{(x)s}) by dense eigendecomposition."""
    if s < 1:
        raise ParameterError("s must be >= 1")
    if n_sim**s > 4096:
        raise ParameterError(f"dimension {n_sim}**{s} exceeds the dense limit 4096")
    rp, rm = rho_plus(n_sim), rho_minus(n_sim)
    return trace_distance(tensor_product(*[rp] * s), tensor_product(*[rm] * s))
