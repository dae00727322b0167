"""Closed-form double-exponential growth exponent nu(alpha) and its oracles.

The growth exponent is nu = (1/T) log(T/alpha) where the integer horizon T
is pinned down by the bracket (T-1)**T / T**(T-1) < alpha <= T**(T+1)/(T+1)**T.
All power comparisons run through logarithms: T**(T+1) overflows 64-bit
floats near T = 130.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# alpha within this relative distance of a bracket boundary counts as
# critical; the boundary itself is assigned the lower horizon T.
_BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class GrowthLaw:
    """Growth exponent, integer horizon, and criticality flag for one alpha."""

    alpha: float
    T: int
    nu: float
    is_critical: bool


def period_T(alpha: float) -> int:
    """Integer horizon T for the given tail index.

    Found by walking T upward until alpha <= T**(T+1)/(T+1)**T; the brackets
    tile (0, inf) so the loop terminates.  The right boundary is inclusive.
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    log_a = math.log(alpha)
    t = 1
    while True:
        log_crit = (t + 1) * math.log(t) - t * math.log(t + 1)
        if log_a <= log_crit + _BOUNDARY_RTOL:
            return t
        t += 1


def nu(alpha: float) -> float:
    """Growth exponent nu(alpha) = (1/T) log(T/alpha)."""
    t = period_T(alpha)
    return (math.log(t) - math.log(alpha)) / t


def nu_bruteforce(alpha: float, m_max: int) -> tuple[float, set[int]]:
    """Exact maximum of (1/m) log(m/alpha) over 1 <= m <= m_max.

    Returns the maximum and every maximizing m (ties at critical alpha are
    reported).  The caller must ensure m_max covers the true horizon.
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if m_max < 1:
        raise DomainError("m_max must be >= 1")
    m = np.arange(1, m_max + 1, dtype=float)
    vals = (np.log(m) - math.log(alpha)) / m
    best = float(vals.max())
    winners = np.nonzero(vals >= best - 1e-12)[0] + 1
    return best, set(int(w) for w in winners)


def alpha_critical(T: int) -> float:
    """Critical tail index T**(T+1)/(T+1)**T, evaluated in log domain."""
    if T < 1:
        raise DomainError("T must be >= 1")
    return math.exp((T + 1) * math.log(T) - T * math.log(T + 1))


def nu_continuous_approx(alpha: float) -> float:
    """Continuous-m approximation: 1/(e*alpha) if alpha*e >= 1, else -log alpha."""
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if alpha * math.e >= 1.0:
        return 1.0 / (math.e * alpha)
    return -math.log(alpha)


def growth_law(alpha: float) -> GrowthLaw:
    """Bundle T, nu, and the criticality flag for one tail index."""
    t = period_T(alpha)
    log_crit = (t + 1) * math.log(t) - t * math.log(t + 1)
    critical = abs(math.log(alpha) - log_crit) <= _BOUNDARY_RTOL
    return GrowthLaw(alpha=alpha, T=t, nu=nu(alpha), is_critical=critical)


def sweep(alpha_min: float, alpha_max: float, points: int, log_grid: bool = True):
    """Rows (alpha, T, nu, nu_approx, rel_err) over a grid of tail indices."""
    if not (alpha_min > 0 and alpha_max >= alpha_min):
        raise DomainError("need 0 < alpha_min <= alpha_max")
    if points < 1:
        raise DomainError("points must be >= 1")
    if points == 1:
        grid = np.array([alpha_min])
    elif log_grid:
        grid = np.geomspace(alpha_min, alpha_max, points)
    else:
        grid = np.linspace(alpha_min, alpha_max, points)
    rows = []
    for a in grid:
        a = float(a)
        n = nu(a)
        approx = nu_continuous_approx(a)
        rows.append((a, period_T(a), n, approx, abs(approx / n - 1.0)))
    return rows
