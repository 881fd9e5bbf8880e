"""Closed-form observables of the four-stroke Otto cycle with ideal adiabatic strokes.

Sign conventions: work is counted as done *on* the spins, so ``mean_W < 0``
means work is extracted; heats are positive when absorbed by the spins.

Strokes: (1) field ``h_i -> h_f`` starting in equilibrium with the bath at
``T_c``; (2) thermalize with the bath at ``T_h``; (3) field ``h_f -> h_i``;
(4) thermalize at ``T_c``. Nothing forces ``T_h > T_c``.
"""

from __future__ import annotations

import enum
import functools
import math
import numbers
from dataclasses import dataclass, field
from typing import Optional

from . import spectrum
from .errors import DomainError, ParameterError

DEGENERATE_WORK_TOL = 1e-14


@dataclass(frozen=True)
class EngineParams:
    J: float
    h_i: float
    h_f: float
    T_c: float
    T_h: float

    def __post_init__(self):
        bad = []
        for name in ("J", "h_i", "h_f", "T_c", "T_h"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, numbers.Real) or not math.isfinite(value):
                bad.append((name, "must be a finite number"))
        if not bad:
            for name in ("h_i", "h_f", "T_c", "T_h"):
                if getattr(self, name) <= 0:
                    bad.append((name, "must be > 0"))
            if self.h_i == self.h_f:
                bad.append(("h_f", "must differ from h_i"))
        if bad:
            msg = "; ".join(f"{n}: {why}" for n, why in bad)
            raise ParameterError(f"invalid engine parameters ({msg})", [n for n, _ in bad])
        for name in ("J", "h_i", "h_f", "T_c", "T_h"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def delta_h(self):
        return self.h_f - self.h_i

    @property
    def beta_c(self):
        return 1.0 / self.T_c

    @property
    def beta_h(self):
        return 1.0 / self.T_h

    @property
    def x_c(self):
        return self.h_i / self.T_c

    @property
    def x_h(self):
        return self.h_f / self.T_h

    def replace(self, **changes):
        values = {k: getattr(self, k) for k in ("J", "h_i", "h_f", "T_c", "T_h")}
        values.update(changes)
        return EngineParams(**values)


class RegimeLabel(str, enum.Enum):
    Engine = "Engine"
    CounterRotatingEngine = "CounterRotatingEngine"
    Refrigerator = "Refrigerator"
    Heater = "Heater"
    Accelerator = "Accelerator"
    Degenerate = "Degenerate"

    @property
    def is_engine(self):
        return self in (RegimeLabel.Engine, RegimeLabel.CounterRotatingEngine)

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Baths:
    """Equilibrium states feeding the two unitary strokes."""

    cold: spectrum.ThermalPoint  # beta_c, field h_i
    hot: spectrum.ThermalPoint   # beta_h, field h_f
    mag_cold: spectrum.MagneticObservables
    mag_hot: spectrum.MagneticObservables


@functools.lru_cache(maxsize=4096)
def baths(p: EngineParams) -> Baths:
    cold = spectrum.thermal_point(p.beta_c, p.h_i, p.J)
    hot = spectrum.thermal_point(p.beta_h, p.h_f, p.J)
    return Baths(cold, hot, spectrum.magnetic_observables(cold),
                 spectrum.magnetic_observables(hot))


def delta_magnetization(p: EngineParams):
    """``<M_h^f> - <M_c^i>`` computed without cancellation."""
    b = baths(p)
    return spectrum.expectation_difference(
        spectrum.LEVEL_MAGNETIZATION, b.hot.populations, b.cold.populations)


def mean_work(p: EngineParams):
    """Mean work per stroke and per cycle, ``(mean_W1, mean_W2, mean_W)``.

    The per-stroke values use ``-/+ 2 dh sinh(x)/Z``; the total uses
    ``dh * (<M_h^f> - <M_c^i>)``. The two routes agree to rounding.
    """
    dh = p.delta_h
    w1 = -dh * spectrum.closed_form_magnetization(p.beta_c, p.h_i, p.J)
    w2 = dh * spectrum.closed_form_magnetization(p.beta_h, p.h_f, p.J)
    return w1, w2, dh * delta_magnetization(p)


def work_variance(p: EngineParams):
    """Work variances ``(var_W1, var_W2, var_W)``; the strokes are uncorrelated."""
    dh2 = p.delta_h ** 2
    v1 = dh2 * spectrum.closed_form_magnetization_variance(p.beta_c, p.h_i, p.J)
    v2 = dh2 * spectrum.closed_form_magnetization_variance(p.beta_h, p.h_f, p.J)
    return v1, v2, v1 + v2


def idle_population_difference(p: EngineParams):
    """``p_c^J - p_h^J``."""
    b = baths(p)
    idle = tuple(1.0 if n == spectrum.IDLE else 0.0 for n in range(spectrum.N_LEVELS))
    return spectrum.expectation_difference(idle, b.cold.populations, b.hot.populations)


def mean_heat(p: EngineParams):
    """``(mean_Qh, mean_Qc)``.

    Algebraically ``<Q_h> = J (p_c^J - p_h^J) - (h_f/dh) <W>``, but that form
    cancels badly when both terms are large and nearly equal. Each heat is
    instead the energy change of its thermalization, ``sum_n E_n (p'_n - p_n)``,
    evaluated with :func:`spectrum.expectation_difference`.
    """
    b = baths(p)
    qh = spectrum.expectation_difference(
        spectrum.energies(p.h_f, p.J), b.hot.populations, b.cold.populations)
    qc = spectrum.expectation_difference(
        spectrum.energies(p.h_i, p.J), b.cold.populations, b.hot.populations)
    return qh, qc


def carnot_efficiency(p: EngineParams):
    lo, hi = sorted((p.T_c, p.T_h))
    return 1.0 - lo / hi


def otto_efficiency(p: EngineParams):
    return 1.0 - p.h_i / p.h_f


def omega(p: EngineParams) -> Optional[float]:
    """``(p_h^J - p_c^J) / (<M_h^f> - <M_c^i>)``; ``None`` when the magnetizations coincide."""
    dm = delta_magnetization(p)
    if dm == 0.0:
        return None
    return -idle_population_difference(p) / dm


def efficiency(p: EngineParams):
    """``(eta_th, eta_0, eta_C, Omega)``.

    ``eta_th = -<W>/<Q_h>``, which equals ``eta_0 / (1 + (J/h_f) Omega)``.
    The ratio of the two cancellation-free means is used: the ``Omega`` form
    loses digits when ``1 + (J/h_f) Omega`` is small. ``eta_th`` is ``None``
    when ``<Q_h> = 0`` and ``Omega`` is ``None`` when ``<W> = 0``.
    """
    eta_0 = otto_efficiency(p)
    eta_c = carnot_efficiency(p)
    qh = mean_heat(p)[0]
    om = omega(p)
    if qh == 0.0:
        return None, eta_0, eta_c, om
    if p.J == 0.0:
        # no idle-level flow: the ratio is exactly dh / h_f
        return eta_0, eta_0, eta_c, om
    return -mean_work(p)[2] / qh, eta_0, eta_c, om


def efficiency_from_omega(p: EngineParams) -> Optional[float]:
    """``eta_0 / (1 + (J/h_f) Omega)``; ``None`` if undefined."""
    om = omega(p)
    if om is None:
        return None
    denom = 1.0 + (p.J / p.h_f) * om
    if denom == 0.0:
        return None
    return otto_efficiency(p) / denom


def engine_efficiency(p: EngineParams) -> Optional[float]:
    """Work output over heat drawn from the hotter of the two baths.

    Equals ``eta_th`` when ``T_h >= T_c``; in the counter-rotating ordering
    the heat input is ``<Q_c>``.
    """
    w = mean_work(p)[2]
    qh, qc = mean_heat(p)
    q_in = qh if p.T_h >= p.T_c else qc
    if q_in == 0.0:
        return None
    return -w / q_in


def entropy_production(p: EngineParams):
    """Mean entropy production per cycle.

    Evaluated as ``sum_n (p_c,n - p_h,n)(ln p_c,n - ln p_h,n)``, the sum of
    the relative entropies released in the two thermalizations. This equals
    ``-beta_h <Q_h> - beta_c <Q_c>`` identically, but every term is
    non-negative, so it stays accurate when both heats are tiny.
    """
    b = baths(p)
    terms = (
        (pc - ph) * (lc - lh)
        for pc, ph, lc, lh in zip(b.cold.populations, b.hot.populations,
                                  b.cold.log_populations, b.hot.log_populations)
    )
    return math.fsum(terms)


def entropy_production_from_flows(p: EngineParams):
    qh, qc = mean_heat(p)
    return -p.beta_h * qh - p.beta_c * qc


def entropy_production_carnot_form(p: EngineParams):
    """``beta_c <Q_h> (eta_C - eta_th)``; only meaningful for ``T_h >= T_c``."""
    if p.T_h < p.T_c:
        raise DomainError("Carnot form of entropy production requires T_h >= T_c")
    qh = mean_heat(p)[0]
    w = mean_work(p)[2]
    # beta_c * qh * eta_th written as -beta_c * w avoids dividing by qh
    return p.beta_c * qh * carnot_efficiency(p) + p.beta_c * w


def _classify(w, qh, qc, T_c, T_h):
    """Regime label and an anomaly flag from the signs of the mean flows.

    With ``hot`` the bath at the higher temperature (the ``T_h`` bath on a
    tie) and ``cold`` the other one:

    ======================  ===================================
    ``|W| <= 1e-14``        Degenerate
    ``W < 0``               Engine (T_h > T_c) or
                            CounterRotatingEngine (T_c > T_h)
    ``Q_cold > 0``          Refrigerator
    ``Q_hot > 0``           Accelerator (so ``Q_cold < 0``)
    otherwise               Heater (both baths receive heat)
    ======================  ===================================

    Work extraction without heat drawn from the hotter bath would violate
    the second law. Such cells are flagged anomalous and fall through to
    the heat-sign rows.
    """
    if T_h >= T_c:
        q_hot, q_cold = qh, qc
    else:
        q_hot, q_cold = qc, qh
    if abs(w) <= DEGENERATE_WORK_TOL:
        return RegimeLabel.Degenerate, False
    anomalous = False
    if w < 0:
        if q_hot > 0 and T_h != T_c:
            if T_h > T_c:
                return RegimeLabel.Engine, False
            return RegimeLabel.CounterRotatingEngine, False
        anomalous = True
    if q_cold > 0:
        return RegimeLabel.Refrigerator, anomalous
    if q_hot > 0:
        return RegimeLabel.Accelerator, anomalous
    return RegimeLabel.Heater, anomalous


def classify_regime(p: EngineParams) -> RegimeLabel:
    w = mean_work(p)[2]
    qh, qc = mean_heat(p)
    return _classify(w, qh, qc, p.T_c, p.T_h)[0]


@dataclass(frozen=True)
class CycleObservables:
    params: EngineParams
    mean_W1: float
    mean_W2: float
    mean_W: float
    var_W1: float
    var_W2: float
    var_W: float
    mean_Qh: float
    mean_Qc: float
    eta_th: Optional[float]
    eta_0: float
    eta_C: float
    Omega: Optional[float]
    mean_Sigma: float
    rel_fluct_W: Optional[float]
    regime: RegimeLabel
    eta_engine: Optional[float] = None
    anomalous: bool = False
    delta_M: float = field(default=0.0, repr=False)

    @property
    def sigma_W(self):
        return math.sqrt(self.var_W)

    @property
    def is_engine(self):
        return self.regime.is_engine


def cycle_observables(p: EngineParams) -> CycleObservables:
    w1, w2, w = mean_work(p)
    v1, v2, v = work_variance(p)
    qh, qc = mean_heat(p)
    eta, eta_0, eta_c, om = efficiency(p)
    label, anomalous = _classify(w, qh, qc, p.T_c, p.T_h)
    rel = math.sqrt(v) / abs(w) if w != 0.0 else None
    return CycleObservables(
        params=p, mean_W1=w1, mean_W2=w2, mean_W=w, var_W1=v1, var_W2=v2, var_W=v,
        mean_Qh=qh, mean_Qc=qc, eta_th=eta, eta_0=eta_0, eta_C=eta_c, Omega=om,
        mean_Sigma=entropy_production(p), rel_fluct_W=rel, regime=label,
        eta_engine=engine_efficiency(p), anomalous=anomalous,
        delta_M=delta_magnetization(p),
    )


@dataclass(frozen=True)
class AsymptoticLimits:
    """Cycle observables in the limit ``T_c -> 0``, ``T_h -> inf``."""

    W_inf: float
    var_W_inf: float
    cov_inf: float
    eta_inf: float
    var_eta_inf: float


def asymptotic_limits(J, h_i, h_f) -> AsymptoticLimits:
    if not (0.0 <= J < h_i < h_f):
        raise DomainError(f"asymptotic limits need 0 <= J < h_i < h_f, got J={J}, h_i={h_i}, h_f={h_f}")
    dh = h_f - h_i
    eta_0 = 1.0 - h_i / h_f
    shrink = 1.0 - J / (4.0 * h_f)
    return AsymptoticLimits(
        W_inf=-dh,
        var_W_inf=dh * dh / 2.0,
        cov_inf=1.0 / math.sqrt(2.0),
        eta_inf=eta_0 / shrink,
        var_eta_inf=eta_0 ** 2 / (2.0 * shrink ** 2),
    )
