"""Two spins with isotropic Heisenberg coupling in a uniform field.

The Hamiltonian is diagonal in an h-independent basis, with levels in the
fixed order used throughout the package::

    index  state                     energy   dE/dh
    0      |11>                      +h       +1
    1      (|01> + |10>)/sqrt(2)      0        0     (idle)
    2      (|01> - |10>)/sqrt(2)     -J        0     (idle)
    3      |00>                      -h       -1

Units: k_B = hbar = magnetic moment = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

N_LEVELS = 4
LEVEL_NAMES = ("|11>", "triplet0", "singlet", "|00>")
UP, TRIPLET0, SINGLET, DOWN = range(N_LEVELS)
IDLE = SINGLET
FIELD_SLOPES = (1.0, 0.0, 0.0, -1.0)
# magnetization of each level, -dE/dh
LEVEL_MAGNETIZATION = (-1.0, 0.0, 0.0, 1.0)


def energies(h, J):
    """Level energies ``(+h, 0, -J, -h)`` in the canonical order."""
    return (float(h), 0.0, -float(J), -float(h))


@dataclass(frozen=True)
class SpinPairModel:
    J: float

    def energies(self, h):
        return energies(h, self.J)


@dataclass(frozen=True)
class ThermalPoint:
    """Gibbs state of the spin pair at inverse temperature ``beta``.

    ``log_populations`` stays finite where ``populations`` underflow, and
    ``Z`` may overflow to ``inf`` at very low temperature; ``log_Z`` does not.
    """

    beta: float
    h: float
    J: float
    populations: tuple
    log_populations: tuple
    Z: float
    log_Z: float

    @property
    def x(self):
        return self.beta * self.h

    @property
    def temperature(self):
        return 1.0 / self.beta

    @property
    def energies(self):
        return energies(self.h, self.J)

    @property
    def free_energy(self):
        return -self.log_Z / self.beta


def thermal_point(beta, h, J):
    """Boltzmann populations over :func:`energies` at inverse temperature ``beta``."""
    beta = float(beta)
    if not math.isfinite(beta) or beta <= 0.0:
        raise DomainError(f"beta must be positive and finite, got {beta!r}")
    e = energies(h, J)
    e_min = min(e)
    # weights relative to the most populated level
    log_w = [-beta * (en - e_min) for en in e]
    log_zs = math.log(math.fsum(math.exp(lw) for lw in log_w))
    log_p = tuple(lw - log_zs for lw in log_w)
    pops = tuple(math.exp(lp) for lp in log_p)
    log_z = log_zs - beta * e_min
    try:
        z = math.exp(log_z)
    except OverflowError:
        z = math.inf
    return ThermalPoint(beta=beta, h=float(h), J=float(J), populations=pops,
                        log_populations=log_p, Z=z, log_Z=log_z)


def partition_function(beta, h, J):
    """Closed form ``1 + exp(beta J) + 2 cosh(beta h)`` (overflows to ``inf``)."""
    try:
        return 1.0 + math.exp(beta * J) + 2.0 * math.cosh(beta * h)
    except OverflowError:
        return math.inf


def _scaled_terms(beta, h, J):
    # exp(-m) * (1, e^{bJ}, e^{x}, e^{-x}) with m the largest exponent
    x = beta * h
    bj = beta * J
    m = max(0.0, bj, x, -x)
    return math.exp(-m), math.exp(bj - m), math.exp(x - m), math.exp(-x - m)


def closed_form_magnetization(beta, h, J):
    """``2 sinh(beta h) / Z``, evaluated without overflow."""
    one, idle, ep, em = _scaled_terms(beta, h, J)
    return (ep - em) / (one + idle + ep + em)


def closed_form_magnetization_variance(beta, h, J):
    """``2 cosh(x)/Z - 4 sinh(x)^2/Z^2`` with ``x = beta h``.

    Rewritten as ``[2 cosh(x) (1 + e^{beta J}) + 4] / Z^2`` so that no
    cancellation occurs when one level dominates.
    """
    one, idle, ep, em = _scaled_terms(beta, h, J)
    zs = one + idle + ep + em
    return ((ep + em) * (one + idle) + 4.0 * one * one) / (zs * zs)


@dataclass(frozen=True)
class MagneticObservables:
    mean_M: float
    var_M: float
    chi: float
    idle_pop: float


def magnetic_observables(tp: ThermalPoint) -> MagneticObservables:
    """Equilibrium magnetization, its variance, the susceptibility and the idle population.

    ``var_M`` comes from the first and second moments (rearranged to avoid
    cancellation); ``chi`` is ``beta`` times the centred second moment. The two
    therefore agree only because the curvature term ``<d2H/dh2>`` is zero here.
    """
    p = tp.populations
    m = LEVEL_MAGNETIZATION
    mean_m = math.fsum(pn * mn for pn, mn in zip(p, m))
    # <m^2> - <m>^2 with <m^2> = p_up + p_down
    shifting = p[UP] + p[DOWN]
    var_m = shifting * (p[TRIPLET0] + p[SINGLET]) + 4.0 * p[UP] * p[DOWN]
    centred = math.fsum(pn * (mn - mean_m) ** 2 for pn, mn in zip(p, m))
    return MagneticObservables(mean_M=mean_m, var_M=var_m,
                               chi=tp.beta * centred, idle_pop=p[IDLE])


def expectation_difference(values, p, q):
    """``sum_n values[n] * (p[n] - q[n])`` for two normalized distributions.

    The level that dominates either distribution is eliminated through
    normalization first, so nearly equal near-pure states keep full relative
    precision instead of cancelling.
    """
    k = max(range(len(p)), key=lambda n: max(p[n], q[n]))
    vk = values[k]
    return math.fsum((values[n] - vk) * (p[n] - q[n]) for n in range(len(p)) if n != k)


def free_energy(beta, h, J):
    return thermal_point(beta, h, J).free_energy
