import csv
import io
import math

import mpmath as mp
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from idleotto import cycle, tpm
from idleotto.cycle import EngineParams
from idleotto.errors import MomentsUndefinedError, UndefinedEfficiencyError
from idleotto.presets import DISTRIBUTION_PRESETS

import oracle

REF = EngineParams(J=2.0, h_i=3.0, h_f=4.0, T_c=1.0, T_h=5.0)
temps = st.floats(-2.0, 2.0).map(lambda e: 10.0 ** e)


@st.composite
def engine_params(draw):
    h_i = draw(st.floats(1.0, 5.0))
    h_f = draw(st.floats(1.0, 8.0))
    assume(abs(h_f - h_i) > 0.05)
    return EngineParams(draw(st.floats(0.0, 10.0)), h_i, h_f, draw(temps), draw(temps))


def test_enumeration_shape():
    td = tpm.enumerate_trajectories(REF)
    assert len(td.atoms) == 16
    assert {(a.n, a.l) for a in td.atoms} == {(n, l) for n in range(4) for l in range(4)}
    assert td.total_probability == pytest.approx(1.0, abs=1e-15)
    for a in td.atoms:
        # cycle closes: W1 + Qh + W2 + Qc = 0 with Qc the cold-bath energy change
        assert a.W == a.W1 + a.W2


@given(engine_params())
def test_enumerated_moments_match_closed_forms(p):
    td = tpm.enumerate_trajectories(p)
    w1, w2, w = cycle.mean_work(p)
    qh, _ = cycle.mean_heat(p)
    v1, v2, v = cycle.work_variance(p)
    wd = tpm.work_distribution(td)
    scale = max(abs(p.h_f), abs(p.h_i), abs(p.J))
    assert abs(td.expectation(lambda a: a.W) - w) <= 1e-12 * abs(w) + 1e-15 * scale
    assert abs(td.expectation(lambda a: a.W1) - w1) <= 1e-12 * abs(w1) + 1e-15 * scale
    assert abs(td.expectation(lambda a: a.Qh) - qh) <= 1e-12 * abs(qh) + 1e-15 * scale
    assert abs(wd.variance() - v) <= 1e-12 * v + 1e-15 * scale ** 2


@given(engine_params())
def test_strokes_uncorrelated(p):
    assert abs(tpm.covariance_w1_w2(tpm.enumerate_trajectories(p))) <= 1e-14 * p.delta_h ** 2 + 1e-300


@given(engine_params())
def test_work_distribution_structure(p):
    wd = tpm.work_distribution(tpm.enumerate_trajectories(p))
    assert len(wd.support) <= 5
    assert list(wd.values) == sorted(wd.values)
    assert wd.total == pytest.approx(1.0, abs=1e-14)
    # support is {0, +-dh, +-2dh}
    for v in wd.values:
        k = v / p.delta_h
        assert abs(k - round(k)) < 1e-9 and abs(round(k)) <= 2


def test_stochastic_efficiency_reference():
    d = tpm.stochastic_efficiency_distribution(tpm.enumerate_trajectories(REF))
    assert d.undefined_mass == pytest.approx(0.3850453187383861, rel=1e-13)
    assert d.divergent_mass == 0.0
    assert d.total == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(MomentsUndefinedError):
        d.mean()
    with pytest.raises(MomentsUndefinedError):
        tpm.distribution_moments(d, 2)


def test_stochastic_efficiency_against_oracle():
    # undefined mass: trajectories with Q_h = 0 and W = 0, i.e. n == l
    with mp.workdps(40):
        ref = oracle.cycle(1.5, 3.0, 4.0, 1.0, 20.0)
        undefined = mp.fsum(a * b for a, b in zip(ref["pc"], ref["ph"]))
    d = tpm.stochastic_efficiency_distribution(tpm.enumerate_trajectories(DISTRIBUTION_PRESETS["fig9-top"]))
    # n == l always gives W = Qh = 0; the two idle levels also exchange no work
    idle_pair = float(ref["pc"][1] * ref["ph"][2] + ref["pc"][2] * ref["ph"][1])
    assert d.undefined_mass == pytest.approx(float(undefined), rel=1e-13)
    assert 0.0 in d.values
    zero_mass = dict(d.support)[0.0]
    assert zero_mass >= idle_pair * (1 - 1e-12)


@pytest.mark.parametrize("name", sorted(DISTRIBUTION_PRESETS))
def test_scaled_efficiency_mean_is_eta_th(name):
    p = DISTRIBUTION_PRESETS[name]
    d = tpm.scaled_efficiency_distribution(tpm.enumerate_trajectories(p))
    o = cycle.cycle_observables(p)
    assert len(d.support) <= 5
    assert d.total == pytest.approx(1.0, abs=1e-12)
    assert d.mean() == pytest.approx(o.eta_th, abs=1e-12)
    # relative spread inherited from W
    assert math.sqrt(d.variance()) / abs(d.mean()) == pytest.approx(o.rel_fluct_W, rel=1e-10)


def test_scaled_efficiency_undefined_without_heat():
    atoms = (tpm.TrajectoryAtom(0, 0, 0.0, 0.0, 0.0, 1.0),)
    with pytest.raises(UndefinedEfficiencyError):
        tpm.scaled_efficiency_distribution(tpm.TrajectoryDistribution(REF, atoms))


def test_divergent_mass():
    atoms = (tpm.TrajectoryAtom(0, 0, -1.0, 0.0, 0.0, 0.25),
             tpm.TrajectoryAtom(0, 1, 0.0, 0.0, 0.0, 0.25),
             tpm.TrajectoryAtom(1, 0, -1.0, 2.0, 0.5, 0.5))
    d = tpm.stochastic_efficiency_distribution(tpm.TrajectoryDistribution(REF, atoms))
    assert d.divergent_mass == 0.25 and d.undefined_mass == 0.25
    assert d.support == ((0.25, 0.5),)


def test_moment_order_validation():
    d = tpm.DiscreteDistribution(((1.0, 0.5), (3.0, 0.5)))
    assert d.moment(2) == 5.0 and d.mean() == 2.0 and d.variance() == 1.0
    for bad in (0, -1, 1.5):
        with pytest.raises(ValueError):
            tpm.distribution_moments(d, bad)


def test_merge_atoms():
    merged = tpm.merge_atoms([(1.0, 0.2), (-0.0, 0.1), (0.0, 0.3), (1.0 + 1e-14, 0.4)])
    assert merged == ((0.0, pytest.approx(0.4)), (1.0, pytest.approx(0.6)))
    assert math.copysign(1.0, merged[0][0]) == 1.0
    assert tpm.merge_atoms([(0.0, 1.0), (1e-9, 1.0)]) == ((0.0, 1.0), (1e-9, 1.0))


def test_csv_output():
    d = tpm.work_distribution(tpm.enumerate_trajectories(REF))
    text = d.to_csv({"J": 2.0, "which": "work"})
    lines = text.splitlines()
    assert lines[:4] == ["# J=2", "# which=work", "# undefined_mass=0", "# divergent_mass=0"]
    assert lines[4] == "value,probability"
    rows = list(csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#")))
    assert len(rows) == len(d.support)
    # 17 significant digits round-trip exactly
    assert tuple(float(r["probability"]) for r in rows) == d.probabilities
    assert tuple(float(r["value"]) for r in rows) == d.values
    joint = tpm.joint_to_csv(tpm.enumerate_trajectories(REF)).splitlines()
    assert joint[0] == "n,l,W1,Qh,W2,probability" and len(joint) == 17


# --- sampling -----------------------------------------------------------------

def test_sampler_deterministic_and_worker_independent():
    a = tpm.sample_trajectories(REF, 200_001, seed=3)
    b = tpm.sample_trajectories(REF, 200_001, seed=3, workers=4)
    c = tpm.sample_trajectories(REF, 200_001, seed=4)
    assert a.counts == b.counts
    assert a.counts != c.counts
    assert sum(a.counts) == 200_001 == a.sample_size
    assert a.total_probability == pytest.approx(1.0)


def test_sampler_prefix_property():
    # chunk k's stream depends only on (seed, k): a longer run extends a shorter one
    short = tpm.sample_trajectories(REF, tpm.SAMPLE_CHUNK, seed=9)
    longer = tpm.sample_trajectories(REF, 2 * tpm.SAMPLE_CHUNK, seed=9)
    assert all(s <= l for s, l in zip(short.counts, longer.counts))


@pytest.mark.parametrize("count", [0, -5, 2.5])
def test_sampler_rejects_bad_count(count):
    with pytest.raises(ValueError):
        tpm.sample_trajectories(REF, count, seed=0)


def test_chi_squared_detects_wrong_law():
    sample = tpm.sample_trajectories(REF, 100_000, seed=1)
    good = tpm.chi_squared_test(sample, tpm.enumerate_trajectories(REF))
    bad = tpm.chi_squared_test(sample, tpm.enumerate_trajectories(REF.replace(T_h=4.0)))
    assert good.p_value > 1e-3
    assert bad.p_value < 1e-10
    assert good.dof == 15
    with pytest.raises(ValueError):
        tpm.chi_squared_test(tpm.enumerate_trajectories(REF), tpm.enumerate_trajectories(REF))


def test_chi_squared_impossible_cell():
    sample = tpm.sample_trajectories(REF, 1000, seed=1)
    exact = tpm.enumerate_trajectories(REF)
    atoms = tuple(a._replace(prob=0.0) if a.n == 3 else a for a in exact.atoms)
    fit = tpm.chi_squared_test(sample, tpm.TrajectoryDistribution(REF, atoms))
    assert fit.p_value == 0.0
