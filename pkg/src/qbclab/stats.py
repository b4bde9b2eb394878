"""Binomial confidence helpers used by every Monte Carlo report."""
from __future__ import annotations

import math

Z_5SIGMA = 5.0


def wilson_interval(successes: int, trials: int, z: float = Z_5SIGMA) -> tuple[float, float]:
    """Wilson score interval (low, high) for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials))
    return max(0.0, centre - half), min(1.0, centre + half)


def wilson_half_width(successes: int, trials: int, z: float = Z_5SIGMA) -> float:
    lo, hi = wilson_interval(successes, trials, z)
    return (hi - lo) / 2


def binomial_sigma(p: float, trials: int) -> float:
    """Standard deviation of an empirical rate with true probability ``p``."""
    return math.sqrt(max(p * (1 - p), 0.0) / trials) if trials > 0 else float("inf")


def within_sigmas(observed: float, expected: float, trials: int, k: float = Z_5SIGMA) -> bool:
    return abs(observed - expected) <= k * binomial_sigma(expected, trials) + 1e-12


def below_bound(observed: float, bound: float, trials: int, k: float = Z_5SIGMA) -> bool:
    return observed <= bound + k * binomial_sigma(bound, trials) + 1e-12


def two_proportion_z(x1: int, n1: int, x2: int, n2: int) -> float:
    """Pooled two-proportion z statistic (0 when both rates are degenerate and equal)."""
    p = (x1 + x2) / (n1 + n2)
    se = math.sqrt(p * (1 - p) * (1 / n1 + 1 / n2))
    if se == 0:
        return 0.0 if x1 / n1 == x2 / n2 else float("inf")
    return (x1 / n1 - x2 / n2) / se
