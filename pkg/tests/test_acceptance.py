"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg

from qbclab.adversary import (
    DeviceModel,
    EntangledSteering,
    NaiveRedeclare,
    helstrom_attack,
    multi_copy_distinguisher,
    n_a_max,
    naive_attack,
    register_table,
    sample_table,
    steering_attack,
)
from qbclab.analysis import cheat_bound_exact, plan, required_s
from qbclab.linalg import StateVector, SubsystemShape, inner_product, trace_distance
from qbclab.protocol import HonestAlice, ProtocolParams, decode, encode, run_sessions
from qbclab.states import (
    alpha_plus,
    alpha_tilde_minus,
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
from qbclab.stats import within_sigmas
from qbclab.substrate import Party, ProjectiveMeasurement, QuantumWorld, conditional_collapse_oracle

from conftest import random_unitary
from test_codec import random_message

LADDER = (3, 4, 5, 8, 16, 32, 64)
TRIALS = 100_000


class Criterion:
    """Collects named checks and prints one verdict line for a criterion."""

    def __init__(self, capsys):
        self.capsys = capsys
        self.current = "?"
        self.checks = []
        self.printed = False

    def __call__(self, label, ok, detail=""):
        self.checks.append((label, bool(ok), detail))

    def _line(self, status, extra):
        with self.capsys.disabled():
            print(f"\n[criterion {self.current}] {status}  ({extra})")
        self.printed = True

    def done(self):
        failed = [c for c in self.checks if not c[1]]
        if failed:
            self._line("FAIL", "; ".join(f"{lab}: {det}" for lab, _, det in failed))
        else:
            self._line("PASS", f"{len(self.checks)} checks")
        assert self.checks and not failed, failed


@pytest.fixture
def report(capsys):
    crit = Criterion(capsys)
    yield crit
    if not crit.printed:
        crit._line("FAIL", "aborted before completion")


def test_c01_trace_distance_law(report):
    report.current = 1
    t0 = time.perf_counter()
    for n in (2, 3, 4, 5, 8, 16, 32, 64):
        d = trace_distance(rho_plus(n), rho_minus(n))
        err = abs(d - 1 / math.sqrt(n - 1))
        report(f"n={n}", err <= 1e-10, f"err={err:.2e}")
    dt = time.perf_counter() - t0
    report("runtime", dt < 5, f"{dt:.2f}s")
    report.done()

def test_c02_decomposition_identity(report):
    report.current = 2
    t0 = time.perf_counter()
    worst = max(np.max(np.abs(omega_reconstruction_minus(n).amps - omega(n).amps)) for n in range(3, 65))
    report("elementwise", worst <= 1e-10, f"max={worst:.2e}")
    dt = time.perf_counter() - t0
    report("runtime", dt < 5, f"{dt:.2f}s")
    report.done()

def test_c03_overlap_identities(report):
    report.current = 3
    worst13 = worst14 = worst_orth = 0.0
    for n in LADDER:
        cf = closed_forms(n)
        for i in range(1, n):
            worst13 = max(worst13, abs(inner_product(phi_minus(n, i), phi_tilde_minus(n, i)) - cf.overlap_phi))
            a = abs(inner_product(alpha_plus(n, i), alpha_tilde_minus(n, i))) ** 2
            worst14 = max(worst14, abs(a - cf.overlap_alpha_sq))
            worst_orth = max(worst_orth, abs(inner_product(phi_plus(n, i), phi_tilde_minus(n, i))))
    # the printed collapsed-state overlap disagrees with the unit-norm collapsed
    # state (which overlaps by sqrt(1 - 2/n)); left failing, see decisions ledger
    report("collapsed overlap vs printed closed form", worst13 <= 1e-10, f"max err={worst13:.3e}")
    report("alpha overlap", worst14 <= 1e-10, f"max err={worst14:.2e}")
    report("orthogonality", worst_orth <= 1e-12, f"max={worst_orth:.2e}")
    report.done()

def test_c04_steering_collapse(report):
    report.current = 4
    for n in LADDER:
        world = QuantumWorld(seed=n)
        alpha, _ = world.create_joint([Party.ALICE, Party.ALICE], omega(n), SubsystemShape([n, n]))
        ok1 = ok2 = True
        for i in range(1, n):
            _, b1 = conditional_collapse_oracle(world, alpha, alpha_plus(n, i))
            _, b2 = conditional_collapse_oracle(world, alpha, alpha_tilde_minus(n, i))
            ok1 &= b1.equal_up_to_phase(phi_plus(n, i), tol=1e-10)
            ok2 &= b2.equal_up_to_phase(phi_tilde_minus(n, i), tol=1e-10)
        report(f"n={n} plus-branch", ok1)
        report(f"n={n} minus-branch", ok2)
    report.done()

def test_c05_measurement_independent_leak(report, rng):
    report.current = 5
    t0 = time.perf_counter()
    for n in LADDER:
        world = QuantumWorld(seed=0)
        _, beta = world.create_joint([Party.ALICE, Party.BOB], omega(n), SubsystemShape([n, n]))
        p = world.born_probabilities([beta], ProjectiveMeasurement.binary(phi_n_minus(n)), Party.BOB)[0]
        report(f"exact n={n}", abs(p - 2 / n) <= 1e-10, f"p={p!r}")
    n_a, n_sim = 8, 64
    tables = [("pgm", register_table(n_a, n_sim, 1, "pgm")), ("honest", register_table(n_a, n_sim, 1, "honest"))]
    for k in range(20):
        tables.append((f"unitary{k}", register_table(n_a, n_sim, 1, "honest", unitary=random_unitary(n_a, rng))))
    for salt, (name, table) in enumerate(tables):
        _, hits = sample_table(table, 1, TRIALS, seed=505, salt=salt)
        rate = hits[0] / TRIALS
        report(f"empirical {name}", within_sigmas(rate, 2 / n_a, TRIALS), f"rate={rate:.4f}")
    dt = time.perf_counter() - t0
    report("runtime", dt < 60, f"{dt:.2f}s")
    report.done()

def test_c06_honest_completeness(report):
    report.current = 6
    params = ProtocolParams(s=8, master_seed=606)
    ts = run_sessions(params, 5_000, lambda: HonestAlice(0))
    ts += run_sessions(params, 5_000, lambda: HonestAlice(1), start=5_000)
    acc = sum(t.verdict.accept for t in ts)
    report("acceptance", acc == len(ts) == 10_000, f"{acc}/{len(ts)}")
    report.done()

def test_c07_naive_cheat_bound(report):
    report.current = 7
    for s in (1, 2, 3):
        rep = naive_attack(ProtocolParams(s=s, master_seed=700 + s), NaiveRedeclare(), TRIALS)
        report(f"s={s} bound", rep.within_bound, f"rate={rep.acceptance_rate:.5f} bound={rep.bound}")
        if s == 1:
            report("s=1 level", within_sigmas(rep.acceptance_rate, 0.25, TRIALS), f"rate={rep.acceptance_rate:.5f}")
    report.done()

def test_c08_steering_attack_bound(report):
    report.current = 8
    t0 = time.perf_counter()
    for n_a in (4, 8, 16):
        for s in (1, 2, 4, 8):
            rep = steering_attack(ProtocolParams(s=s, master_seed=800 + 10 * n_a + s), EntangledSteering(n_a), TRIALS)
            report(f"n_A={n_a} s={s}", rep.within_bound,
                   f"rate={rep.acceptance_rate:.5f} bound={rep.bound:.5f}")
        b0 = steering_attack(ProtocolParams(s=8, master_seed=890 + n_a), EntangledSteering(n_a, target_b=0), TRIALS)
        report(f"n_A={n_a} b=0", b0.acceptances == TRIALS, f"rate={b0.acceptance_rate}")
    dt = time.perf_counter() - t0
    report("runtime", dt < 300, f"{dt:.2f}s")
    report.done()


def _dense_multi_copy(n, s):
    # independent oracle: explicit Kronecker powers and scipy eigenvalues
    rp = sum(np.outer(v, v) for v in (np.eye(n)[0] + np.eye(n)[i] for i in range(1, n))) / (2 * (n - 1))
    rm = sum(np.outer(v, v) for v in (np.eye(n)[0] - np.eye(n)[i] for i in range(1, n))) / (2 * (n - 1))
    a, b = rp, rm
    for _ in range(s - 1):
        a, b = np.kron(a, rp), np.kron(b, rm)
    return 0.5 * np.sum(np.abs(scipy.linalg.eigvalsh(a - b)))

def test_c09_helstrom_concealment(report):
    report.current = 9
    for n in (2, 5, 17, 65):
        rep = helstrom_attack(n, TRIALS, seed=900 + n)
        expected = 0.5 + 0.5 / math.sqrt(n - 1)
        report(f"n={n}", within_sigmas(rep.acceptance_rate, expected, TRIALS) or rep.acceptance_rate == expected == 1.0,
               f"rate={rep.acceptance_rate:.5f} expected={expected:.5f}")
    d1 = multi_copy_distinguisher(1, 3)
    for s in range(1, 6):
        d = multi_copy_distinguisher(s, 3)
        oracle = _dense_multi_copy(3, s)
        report(f"s={s} >= single copy", d >= d1 - 1e-12, f"D={d:.6f}")
        report(f"s={s} oracle", abs(d - oracle) <= 1e-10, f"err={abs(d - oracle):.2e}")
    report.done()

def test_c10_planner(report):
    report.current = 10
    report("required_s(1e-9,100)", required_s(1e-9, 100) == 1026)
    grid = [(p, n) for p in (1e-3, 1e-6, 1e-9, 1e-12, 0.5) for n in (3, 10, 100, 4000)]
    for p, n in grid:
        sp = plan(p, n_a_max=n)
        target = Fraction(repr(p))
        ok = cheat_bound_exact(n, sp.s_required) <= target and (
            sp.s_required == 0 or cheat_bound_exact(n, sp.s_required - 1) > target)
        report(f"grid p={p} n={n}", ok, f"s={sp.s_required}")
    report("grid size", len(grid) == 20)
    m = n_a_max(DeviceModel(0.5))
    report("n_a_max(0.5)", m == 6, f"got {m}")
    report("boundary", Fraction(4, m + 2) >= Fraction(1, 2) > Fraction(4, m + 3))
    report.done()

def test_c11_infrastructure(report, rng):
    report.current = 11
    gen = np.random.default_rng(1111)
    bad = sum(decode(encode(msg)) != msg for msg in (random_message(gen) for _ in range(10_000)))
    report("codec round trip", bad == 0, f"{bad} mismatches")
    params = ProtocolParams(s=4, n_sim=64, master_seed=1111)
    runs = [run_sessions(params, 50, lambda: HonestAlice(1), workers=w) for w in (1, 2, 8)]
    report("determinism across workers", runs[0] == runs[1] == runs[2])
    n = 6
    world = QuantumWorld(seed=11)
    alpha, beta = world.create_joint([Party.ALICE, Party.ALICE], omega(n), SubsystemShape([n, n]))
    world.transfer(beta, Party.BOB, Party.ALICE)
    before = world.reduced_state([beta]).matrix
    worst = 0.0
    for k in range(100):
        u = random_unitary(n, rng)
        if k % 2 == 0:
            trial = world.copy()
            trial.apply_unitary([alpha], u, Party.ALICE)
            after = trial.reduced_state([beta]).matrix
        else:
            m = ProjectiveMeasurement.basis([StateVector(u[:, j]) for j in range(n)])
            after = sum(p * w.reduced_state([beta]).matrix for _, p, w in world.branch([alpha], m, Party.ALICE))
        worst = max(worst, float(np.max(np.abs(after - before))))
    report("no-signalling", worst <= 1e-10, f"max dev={worst:.2e}")
    report.done()
