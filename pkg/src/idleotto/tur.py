"""Thermodynamic uncertainty relation for the cycle work.

The bound is ``var(W)/<W>^2 >= f(<Sigma>)`` with
``f(s) = csch(g(s/2))**2`` and ``g`` the inverse of ``x tanh(x)`` on ``x >= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cycle import EngineParams, entropy_production, mean_work, work_variance
from .errors import DomainError, UndefinedQuantityError

SATISFIED_TOL = 1e-10
_SERIES_CUTOFF = 1e-8


def _xtanh(x):
    return x * math.tanh(x)


def _xtanh_prime(x):
    t = math.tanh(x)
    return t + x * (1.0 - t * t)


def inverse_xtanh(y, tol=1e-12, max_iter=200):
    """Return ``x >= 0`` with ``x tanh(x) = y``.

    Newton steps from a series or asymptotic start, kept inside a bisection
    bracket ``[0, max(1, y) + 1]`` (valid because ``x tanh(x) >= x - 1``).
    Iterates to full precision, then guarantees
    ``|x tanh(x) - y| <= tol * max(y, 1)``.
    """
    y = float(y)
    if not (y >= 0.0):
        raise DomainError(f"inverse_xtanh needs y >= 0, got {y!r}")
    if not (0.0 < tol <= 1e-3):
        raise DomainError(f"tol must lie in (0, 1e-3], got {tol!r}")
    if y == 0.0:
        return 0.0
    if math.isinf(y):
        return math.inf
    if y < _SERIES_CUTOFF:
        # x tanh x = x^2 - x^4/3 + ...
        return math.sqrt(y) * (1.0 + y / 6.0)
    lo, hi = 0.0, max(1.0, y) + 1.0
    x = math.sqrt(y) if y < 1.0 else y
    for _ in range(max_iter):
        r = _xtanh(x) - y
        if r == 0.0:
            return x
        if r > 0.0:
            hi = x
        else:
            lo = x
        step = r / _xtanh_prime(x)
        nxt = x - step
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if abs(nxt - x) <= 2.0 * math.ulp(x) or hi - lo <= 2.0 * math.ulp(hi):
            x = nxt
            break
        x = nxt
    if abs(_xtanh(x) - y) > tol * max(y, 1.0):
        raise ArithmeticError(f"inverse_xtanh failed to converge for y={y!r}")
    return x


def csch_squared(x):
    """``1/sinh(x)**2`` for ``x > 0``, underflowing cleanly to 0 at large ``x``."""
    if x > 20.0:
        e = math.exp(-2.0 * x)
        return 4.0 * e / (1.0 - e) ** 2
    s = math.sinh(x)
    return 1.0 / (s * s)


def tur_bound(sigma_mean):
    """``f(<Sigma>)``; ``math.inf`` at zero entropy production."""
    s = float(sigma_mean)
    if not (s >= 0.0):
        raise DomainError(f"entropy production must be >= 0, got {s!r}")
    if s == 0.0:
        return math.inf
    return csch_squared(inverse_xtanh(s / 2.0))


@dataclass(frozen=True)
class TurEvaluation:
    sigma_mean: float
    bound: float
    observed: float
    satisfied: bool
    slack: float


def verify_tur(p: EngineParams) -> TurEvaluation:
    """Compare the relative work variance of the cycle against the TUR bound."""
    w = mean_work(p)[2]
    if w == 0.0:
        raise UndefinedQuantityError("mean work is zero; relative fluctuation undefined")
    v = work_variance(p)[2]
    rel = math.sqrt(v) / abs(w)
    observed = rel * rel
    sigma = entropy_production(p)
    bound = tur_bound(max(sigma, 0.0))
    slack = observed - bound
    return TurEvaluation(sigma_mean=sigma, bound=bound, observed=observed,
                         satisfied=slack >= -SATISFIED_TOL, slack=slack)
