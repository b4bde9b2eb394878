import json
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from qbclab.analysis import (
    CSV_COLUMNS,
    SecurityPlan,
    SweepConfig,
    cheat_bound,
    cheat_bound_exact,
    concealing_curve,
    plan,
    required_s,
    sweep,
)
from qbclab.errors import ParameterError


def test_cheat_bound_examples():
    assert cheat_bound(7, 0) == 1.0
    mpmath.mp.dps = 50
    oracle = (1 - mpmath.mpf(2) / 100) ** 1000
    assert cheat_bound(100, 1000) == pytest.approx(float(oracle), rel=1e-12)
    assert float(cheat_bound_exact(100, 1000)) == pytest.approx(1.68297e-9, rel=1e-5)


def test_required_s_examples():
    assert required_s(1e-9, 100) == 1026
    assert cheat_bound_exact(100, 1025) > Fraction(1, 10**9) >= cheat_bound_exact(100, 1026)
    assert required_s(0.25, 4) == 2  # (1/2)^2 hits the target exactly


@pytest.mark.parametrize("p", [0.0, 1.0, 1.5, -0.1])
def test_required_s_rejects_bad_probability(p):
    with pytest.raises(ParameterError):
        required_s(p, 10)


@given(st.floats(min_value=1e-30, max_value=0.99), st.integers(min_value=3, max_value=5000))
def test_required_s_is_minimal(p, n):
    s = required_s(p, n)
    target = Fraction(repr(p))
    assert cheat_bound_exact(n, s) <= target
    assert s == 0 or cheat_bound_exact(n, s - 1) > target


def test_plan_grid_invariant():
    grid = [(p, n) for p in (1e-3, 1e-6, 1e-9, 1e-12, 0.5) for n in (3, 10, 100, 4000)]
    assert len(grid) == 20
    for p, n in grid:
        sp = plan(p, n_a_max=n)
        assert cheat_bound_exact(n, sp.s_required) <= Fraction(repr(p))
        assert sp.s_required == 0 or cheat_bound_exact(n, sp.s_required - 1) > Fraction(repr(p))


def test_plan_from_delta():
    sp = plan(1e-9, delta=0.5)
    assert sp.n_a_max == 6
    assert sp.s_required == required_s(1e-9, 6)
    with pytest.raises(ParameterError):
        plan(1e-9)
    with pytest.raises(ParameterError):
        plan(1e-9, n_a_max=10, delta=0.5)
    with pytest.raises(ParameterError):
        SecurityPlan(1e-9, 100, 1000)


def test_concealing_curve():
    rows = concealing_curve([2, 5, 101])
    assert rows[0].trace_distance == 1.0 and rows[0].helstrom_success == 1.0
    assert rows[2].trace_distance == pytest.approx(0.1) and rows[2].helstrom_success == pytest.approx(0.55)
    for r in rows[:2]:
        assert r.brute_force == pytest.approx(r.trace_distance, abs=1e-10)
    assert rows[2].brute_force is None  # above the dense brute-force limit


def test_sweep_small_grid():
    table = sweep(SweepConfig(n_a_values=(4, 8), s_values=(1, 2), trials=10_000, seed=3))
    assert len(table.rows) == 4 and not table.errors
    assert table.all_within_bounds()
    for r in table.rows:
        assert r.bound == pytest.approx((1 - 2 / r.n_a) ** r.s)


def test_sweep_empty_grid():
    table = sweep(SweepConfig(n_a_values=(), s_values=(1,)))
    assert table.rows == []
    assert table.to_csv() == ",".join(CSV_COLUMNS) + "\n"


def test_sweep_is_deterministic():
    cfg = SweepConfig(n_a_values=(4, 16), s_values=(1, 3), trials=5000, seed=42)
    assert sweep(cfg).to_csv() == sweep(cfg).to_csv()
    assert sweep(cfg).to_json() == sweep(cfg).to_json()


def test_sweep_budget_reports_skipped_cells():
    table = sweep(SweepConfig(n_a_values=(4,), s_values=(1, 2, 4), trials=1000, budget=3000))
    assert [(r.n_a, r.s) for r in table.rows] == [(4, 1), (4, 2)]
    assert table.errors == [{"n_a": 4, "s": 4, "error": "budget exceeded"}]


def test_sweep_json_schema():
    doc = json.loads(sweep(SweepConfig(n_a_values=(4,), s_values=(1,), trials=100)).to_json())
    assert set(doc) == {"meta", "rows"}
    assert doc["meta"]["schema_version"] == 1
    assert doc["meta"]["columns"] == list(CSV_COLUMNS)
    assert set(doc["rows"][0]) == set(CSV_COLUMNS)


def test_sweep_config_validation():
    with pytest.raises(ParameterError):
        SweepConfig(strategy="teleport")
    with pytest.raises(ParameterError):
        SweepConfig(trials=0)
