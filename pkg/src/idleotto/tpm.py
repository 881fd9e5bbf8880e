"""Trajectory statistics of one cycle under two-point energy measurements.

With ideal adiabatic strokes the level index is conserved through the
unitaries, so a trajectory is fixed by the level ``n`` measured at the start
(drawn from the cold Gibbs state at ``h_i``) and the level ``l`` measured
after the hot thermalization (drawn from the hot Gibbs state at ``h_f``).
The 16 pairs ``(n, l)`` carry all the randomness of the cycle.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy import stats

from . import spectrum
from .cycle import EngineParams, baths
from .errors import MomentsUndefinedError, UndefinedEfficiencyError

MERGE_TOL = 1e-12
SAMPLE_CHUNK = 1 << 16


class TrajectoryAtom(NamedTuple):
    n: int
    l: int
    W1: float
    Qh: float
    W2: float
    prob: float

    @property
    def W(self):
        return self.W1 + self.W2


@dataclass(frozen=True)
class TrajectoryDistribution:
    """Joint law of ``(W1, Qh, W2)``.

    ``counts`` and ``sample_size`` are set only for empirical distributions
    produced by :func:`sample_trajectories`.
    """

    params: EngineParams
    atoms: tuple
    counts: Optional[tuple] = None
    sample_size: Optional[int] = None

    @property
    def total_probability(self):
        return math.fsum(a.prob for a in self.atoms)

    def expectation(self, fn):
        return math.fsum(a.prob * fn(a) for a in self.atoms)

    def merged(self, tol=MERGE_TOL):
        """Atoms with equal ``(W1, Qh, W2)`` combined; returns ``(W1, Qh, W2, prob)`` tuples."""
        groups = []
        for a in sorted(self.atoms, key=lambda a: (a.W1, a.Qh, a.W2)):
            for g in groups:
                if (abs(g[0] - a.W1) <= tol and abs(g[1] - a.Qh) <= tol
                        and abs(g[2] - a.W2) <= tol):
                    g[3].append(a.prob)
                    break
            else:
                groups.append((a.W1, a.Qh, a.W2, [a.prob]))
        return [(w1, q, w2, math.fsum(ps)) for w1, q, w2, ps in groups]


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported law plus probability mass on undefined outcomes.

    ``undefined_mass`` holds ``0/0`` outcomes and ``divergent_mass`` holds
    ``x/0`` outcomes with ``x != 0``; both are only used for the stochastic
    efficiency.
    """

    support: tuple
    undefined_mass: float = 0.0
    divergent_mass: float = 0.0
    label: str = field(default="", compare=False)

    @property
    def values(self):
        return tuple(v for v, _ in self.support)

    @property
    def probabilities(self):
        return tuple(p for _, p in self.support)

    @property
    def total(self):
        return math.fsum(self.probabilities) + self.undefined_mass + self.divergent_mass

    def moment(self, order):
        return distribution_moments(self, order)

    def mean(self):
        return distribution_moments(self, 1)

    def variance(self):
        """Centred second moment (two-pass, so tiny variances keep their precision)."""
        m = self.mean()
        return math.fsum(p * (v - m) ** 2 for v, p in self.support)

    def to_csv(self, header=None):
        buf = io.StringIO()
        for key, value in (header or {}).items():
            buf.write(f"# {key}={_fmt(value)}\n")
        buf.write(f"# undefined_mass={_fmt(self.undefined_mass)}\n")
        buf.write(f"# divergent_mass={_fmt(self.divergent_mass)}\n")
        buf.write("value,probability\n")
        for v, p in self.support:
            buf.write(f"{_fmt(v)},{_fmt(p)}\n")
        return buf.getvalue()


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def merge_atoms(pairs, tol=MERGE_TOL):
    """Sort ``(value, prob)`` pairs and merge values closer than ``tol``."""
    out = []
    # + 0.0 folds -0.0 into 0.0
    for v, p in sorted((v + 0.0, p) for v, p in pairs):
        if out and abs(v - out[-1][0]) <= tol:
            out[-1][1].append(p)
        else:
            out.append((v, [p]))
    return tuple((v, math.fsum(ps)) for v, ps in out)


def _atoms(p: EngineParams, pc, ph):
    e_i = spectrum.energies(p.h_i, p.J)
    e_f = spectrum.energies(p.h_f, p.J)
    atoms = []
    for n in range(spectrum.N_LEVELS):
        for l in range(spectrum.N_LEVELS):
            atoms.append(TrajectoryAtom(
                n=n, l=l,
                W1=e_f[n] - e_i[n],
                Qh=e_f[l] - e_f[n],
                W2=e_i[l] - e_f[l],
                prob=pc[n] * ph[l],
            ))
    return tuple(atoms)


def enumerate_trajectories(p: EngineParams) -> TrajectoryDistribution:
    """All 16 trajectories with their exact probabilities."""
    b = baths(p)
    return TrajectoryDistribution(p, _atoms(p, b.cold.populations, b.hot.populations))


def work_distribution(td: TrajectoryDistribution) -> DiscreteDistribution:
    """Law of the total work ``W = W1 + W2``, at most five atoms."""
    return DiscreteDistribution(merge_atoms((a.W, a.prob) for a in td.atoms), label="W")


def heat_distribution(td: TrajectoryDistribution) -> DiscreteDistribution:
    return DiscreteDistribution(merge_atoms((a.Qh, a.prob) for a in td.atoms), label="Qh")


def scaled_efficiency_distribution(td: TrajectoryDistribution) -> DiscreteDistribution:
    """Law of ``-W / <Q_h>``; its mean is ``eta_th`` and its relative spread is that of ``W``."""
    qh = td.expectation(lambda a: a.Qh)
    if qh == 0.0:
        raise UndefinedEfficiencyError("mean hot-bath heat is zero; scaled efficiency undefined")
    return DiscreteDistribution(
        merge_atoms((-w / qh, pw) for w, pw in work_distribution(td).support),
        label="eta_scaled")


def stochastic_efficiency_distribution(td: TrajectoryDistribution) -> DiscreteDistribution:
    """Law of ``-W / Q_h`` per trajectory.

    Trajectories with ``Q_h == 0`` (exact comparison) go to ``undefined_mass``
    if ``W == 0`` and to ``divergent_mass`` otherwise.
    """
    pairs = []
    undefined = []
    divergent = []
    for w1, qh, w2, prob in td.merged():
        w = w1 + w2
        if qh == 0.0:
            (undefined if w == 0.0 else divergent).append(prob)
        else:
            pairs.append((-w / qh, prob))
    return DiscreteDistribution(merge_atoms(pairs), math.fsum(undefined),
                                math.fsum(divergent), label="eta_stochastic")


def distribution_moments(d: DiscreteDistribution, order: int) -> float:
    """Raw moment ``sum_i p_i v_i**order``."""
    if not isinstance(order, int) or order < 1:
        raise ValueError(f"order must be a positive integer, got {order!r}")
    if d.undefined_mass > 0.0 or d.divergent_mass > 0.0:
        raise MomentsUndefinedError(
            f"distribution has undefined mass {d.undefined_mass:g} and divergent mass "
            f"{d.divergent_mass:g}; moments are not defined")
    return math.fsum(p * v ** order for v, p in d.support)


def covariance_w1_w2(td: TrajectoryDistribution) -> float:
    m1 = td.expectation(lambda a: a.W1)
    m2 = td.expectation(lambda a: a.W2)
    return td.expectation(lambda a: (a.W1 - m1) * (a.W2 - m2))


def _chunk_counts(seed, index, size, cdf_c, cdf_h):
    # chunk k always draws from the sub-stream spawned with key (k,)
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    rng = np.random.Generator(np.random.Philox(ss))
    u = rng.random((2, size))
    n = np.minimum(np.searchsorted(cdf_c, u[0], side="right"), spectrum.N_LEVELS - 1)
    l = np.minimum(np.searchsorted(cdf_h, u[1], side="right"), spectrum.N_LEVELS - 1)
    return np.bincount(n * spectrum.N_LEVELS + l, minlength=spectrum.N_LEVELS ** 2)


def sample_trajectories(p: EngineParams, count: int, seed: int, workers: int = 1) -> TrajectoryDistribution:
    """Monte Carlo estimate of the trajectory law from ``count`` independent cycles.

    Generator: Philox4x64 via numpy. Draws are split into chunks of
    ``SAMPLE_CHUNK`` cycles, chunk ``k`` using ``SeedSequence(seed,
    spawn_key=(k,))``, so the result depends on ``(seed, count)`` only and not
    on ``workers``.
    """
    if not isinstance(count, (int, np.integer)) or count < 1:
        raise ValueError(f"count must be a positive integer, got {count!r}")
    b = baths(p)
    pc, ph = b.cold.populations, b.hot.populations
    cdf_c = np.cumsum(pc)
    cdf_h = np.cumsum(ph)
    sizes = [SAMPLE_CHUNK] * (count // SAMPLE_CHUNK)
    if count % SAMPLE_CHUNK:
        sizes.append(count % SAMPLE_CHUNK)
    jobs = [(seed, k, s, cdf_c, cdf_h) for k, s in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _chunk_counts(*j), jobs))
    else:
        parts = [_chunk_counts(*j) for j in jobs]
    counts = np.sum(parts, axis=0)
    exact = _atoms(p, pc, ph)
    atoms = tuple(a._replace(prob=int(c) / count) for a, c in zip(exact, counts))
    return TrajectoryDistribution(p, atoms, counts=tuple(int(c) for c in counts),
                                  sample_size=int(count))


@dataclass(frozen=True)
class GoodnessOfFit:
    statistic: float
    dof: int
    p_value: float


def chi_squared_test(sample: TrajectoryDistribution, exact: TrajectoryDistribution) -> GoodnessOfFit:
    """Pearson chi-squared of sampled trajectory counts against exact probabilities.

    Cells with zero exact probability are dropped; a count in such a cell
    makes the fit fail outright.
    """
    if sample.counts is None:
        raise ValueError("sample carries no counts")
    n = sample.sample_size
    stat = 0.0
    cells = 0
    for c, a in zip(sample.counts, exact.atoms):
        expected = n * a.prob
        if expected == 0.0:
            if c:
                return GoodnessOfFit(math.inf, 0, 0.0)
            continue
        stat += (c - expected) ** 2 / expected
        cells += 1
    dof = max(cells - 1, 1)
    return GoodnessOfFit(stat, dof, float(stats.chi2.sf(stat, dof)))


def joint_to_csv(td: TrajectoryDistribution, header=None):
    buf = io.StringIO()
    for key, value in (header or {}).items():
        buf.write(f"# {key}={_fmt(value)}\n")
    buf.write("n,l,W1,Qh,W2,probability\n")
    for a in td.atoms:
        buf.write(f"{a.n},{a.l},{_fmt(a.W1)},{_fmt(a.Qh)},{_fmt(a.W2)},{_fmt(a.prob)}\n")
    return buf.getvalue()
