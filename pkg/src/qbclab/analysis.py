"""Security arithmetic, parameter planning and sweep experiments."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .adversary import (
    DeviceModel,
    EntangledSteering,
    NaiveRedeclare,
    _exact,
    helstrom_attack,
    n_a_max as device_n_a_max,
    naive_attack,
    steering_attack,
)
from .errors import BudgetError, ParameterError
from .linalg import trace_distance
from .protocol.messages import ProtocolParams
from .states import rho_minus, rho_plus

SCHEMA_VERSION = 1
CSV_COLUMNS = ("n_a", "s", "bound", "empirical_rate", "trials", "ci_half_width", "seed")
BRUTE_FORCE_MAX_N = 64


def _check_bound_args(n_a, s):
    if not isinstance(n_a, int) or n_a < 3:
        raise ParameterError(f"n_a must be an integer >= 3, got {n_a!r}")
    if not isinstance(s, int) or s < 0:
        raise ParameterError(f"s must be a nonnegative integer, got {s!r}")


def cheat_bound(n_a: int, s: int) -> float:
    """(1 - 2/n_a)^s."""
    _check_bound_args(n_a, s)
    return (1.0 - 2.0 / n_a) ** s


def cheat_bound_exact(n_a: int, s: int) -> Fraction:
    _check_bound_args(n_a, s)
    return Fraction(n_a - 2, n_a) ** s


def required_s(p_a_max: float, n_a_max: int) -> int:
    """Smallest s with (1 - 2/n_a_max)^s <= p_a_max, decided in exact arithmetic."""
    p = _exact(p_a_max)
    if not 0 < p < 1:
        raise ParameterError(f"p_a_max must lie in (0, 1), got {p_a_max}")
    _check_bound_args(n_a_max, 0)
    guess = max(0, math.ceil(math.log(float(p)) / math.log(1 - 2 / n_a_max)))
    s = max(0, guess - 2)
    while cheat_bound_exact(n_a_max, s) > p:
        s += 1
    while s > 0 and cheat_bound_exact(n_a_max, s - 1) <= p:
        s -= 1
    return s


@dataclass(frozen=True)
class SecurityPlan:
    p_a_max: float
    n_a_max: int
    s_required: int
    delta: Optional[float] = None

    def __post_init__(self):
        p = _exact(self.p_a_max)
        ok_now = cheat_bound_exact(self.n_a_max, self.s_required) <= p
        ok_before = self.s_required == 0 or cheat_bound_exact(self.n_a_max, self.s_required - 1) > p
        if not (ok_now and ok_before):
            raise ParameterError(f"s={self.s_required} is not the minimal secure register count")

    def as_dict(self) -> dict:
        return {
            "p_a_max": self.p_a_max,
            "n_a_max": self.n_a_max,
            "s_required": self.s_required,
            "delta": self.delta,
            "bound_at_s": cheat_bound(self.n_a_max, self.s_required),
        }


def plan(p_a_max: float, n_a_max: Optional[int] = None, delta: Optional[float] = None) -> SecurityPlan:
    if (n_a_max is None) == (delta is None):
        raise ParameterError("give exactly one of n_a_max or delta")
    if delta is not None:
        n_a_max = device_n_a_max(DeviceModel(delta))
        if n_a_max < 3:
            raise ParameterError(f"delta={delta} leaves no attack dimension (n_a_max={n_a_max})")
    return SecurityPlan(p_a_max, n_a_max, required_s(p_a_max, n_a_max), delta)


@dataclass(frozen=True)
class ConcealingRow:
    n: int
    trace_distance: float
    helstrom_success: float
    brute_force: Optional[float]


def concealing_curve(ns: Sequence[int]) -> list[ConcealingRow]:
    rows = []
    for n in ns:
        if n < 2:
            raise ParameterError(f"n must be >= 2, got {n}")
        d = 1.0 / math.sqrt(n - 1)
        bf = trace_distance(rho_plus(n), rho_minus(n)) if n <= BRUTE_FORCE_MAX_N else None
        rows.append(ConcealingRow(n, d, 0.5 + d / 2, bf))
    return rows


@dataclass(frozen=True)
class SweepConfig:
    n_a_values: tuple[int, ...] = (4, 8, 16)
    s_values: tuple[int, ...] = (1, 2, 4, 8)
    trials: int = 10_000
    seed: int = 0
    strategy: str = "steering"
    target_b: int = 1
    n_sim: int = 256
    budget: Optional[int] = None  # max register samples (trials * s) over all cells

    def __post_init__(self):
        if self.strategy not in ("steering", "naive", "snapped", "helstrom"):
            raise ParameterError(f"unknown strategy {self.strategy!r}")
        if self.trials < 1:
            raise ParameterError("trials must be positive")


@dataclass
class SweepRow:
    n_a: int
    s: int
    bound: float
    empirical_rate: float
    trials: int
    ci_half_width: float
    seed: int

    def as_tuple(self):
        return (self.n_a, self.s, self.bound, self.empirical_rate, self.trials, self.ci_half_width, self.seed)


@dataclass
class SweepTable:
    meta: dict
    rows: list[SweepRow] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)

    def all_within_bounds(self) -> bool:
        return all(r.empirical_rate <= r.bound + r.ci_half_width for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.n_a, r.s, repr(r.bound), repr(r.empirical_rate), r.trials, repr(r.ci_half_width), r.seed])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "meta": {**self.meta, "errors": self.errors},
            "rows": [dict(zip(CSV_COLUMNS, r.as_tuple())) for r in self.rows],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _cell_seed(seed: int, n_a: int, s: int) -> int:
    return (seed * 1_000_003 + n_a * 1_009 + s) % 2**64


def sweep(config: SweepConfig) -> SweepTable:
    """Run one attack batch per (n_a, s) cell.

    Cells that would push the total register count past ``budget`` are skipped
    and reported in ``errors``; finished cells are kept.
    """
    meta = {
        "schema_version": SCHEMA_VERSION,
        "generator": f"qbclab {__version__}",
        "strategy": config.strategy,
        "target_b": config.target_b,
        "n_sim": config.n_sim,
        "seed": config.seed,
        "trials": config.trials,
        "columns": list(CSV_COLUMNS),
    }
    table = SweepTable(meta)
    used = 0
    for n_a in config.n_a_values:
        for s in config.s_values:
            cost = config.trials * s
            if config.budget is not None and used + cost > config.budget:
                table.errors.append({"n_a": n_a, "s": s, "error": "budget exceeded"})
                continue
            try:
                row = _run_cell(config, n_a, s)
            except (ParameterError, BudgetError) as exc:
                table.errors.append({"n_a": n_a, "s": s, "error": str(exc)})
                continue
            used += cost
            table.rows.append(row)
    return table


def _run_cell(config: SweepConfig, n_a: int, s: int) -> SweepRow:
    seed = _cell_seed(config.seed, n_a, s)
    params = ProtocolParams(s=s, n_sim=config.n_sim, master_seed=seed)
    if config.strategy == "naive":
        rep = naive_attack(params, NaiveRedeclare(), config.trials)
    elif config.strategy == "helstrom":
        rep = helstrom_attack(n_a, config.trials, seed)
    else:
        strat = EntangledSteering(n_a=n_a, target_b=config.target_b)
        rep = steering_attack(params, strat, config.trials)
    return SweepRow(n_a, s, rep.bound, rep.acceptance_rate, rep.trials, rep.ci_half_width, seed)
