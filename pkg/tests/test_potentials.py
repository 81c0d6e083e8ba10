import math
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from centralqc.errors import DomainError, WindowError
from centralqc.potentials import (
    CentralPotential, Homogeneous, LennardJones, PowerSum, ScreenedCoulomb,
    admissible_window, eval_derivs, from_record, harmonic, homogeneous_admissibility,
    kepler, validate_derivs,
)


def test_kepler_derivs_at_one():
    assert eval_derivs(kepler(), 1.0) == pytest.approx((-1, 1, -2, 6, -24), abs=1e-15)


def test_harmonic_derivs_at_two():
    assert eval_derivs(harmonic(), 2.0) == pytest.approx((2, 2, 1, 0, 0), abs=1e-15)


def test_cubic_derivs():
    assert eval_derivs(Homogeneous(1.0, 3.0), 1.0) == pytest.approx((1, 3, 6, 6, 0), abs=1e-15)


def test_power_sum_matches_homogeneous_terms():
    ps = PowerSum(((0.5, 2.0), (1.0, 4.0)))
    r = 1.7
    expected = np.add(eval_derivs(Homogeneous(0.5, 2.0), r), eval_derivs(Homogeneous(1.0, 4.0), r))
    assert eval_derivs(ps, r) == pytest.approx(tuple(expected), rel=1e-14)


def test_screened_coulomb_reduces_to_kepler_without_screening():
    assert eval_derivs(ScreenedCoulomb(1.0, 0.0), 1.3) == pytest.approx(
        eval_derivs(kepler(), 1.3), rel=1e-14)


@pytest.mark.parametrize("r", [0.0, -1.0, math.inf, math.nan])
def test_domain_rejected(r):
    with pytest.raises(DomainError):
        eval_derivs(kepler(), r)


def test_record_round_trip():
    for pot in (kepler(2.0), harmonic(1.5), Homogeneous(1.0, 4.0), LennardJones(1.0, 2.0),
                ScreenedCoulomb(1.0, 0.5), PowerSum(((1.0, 2.0), (-1.0, 3.0)))):
        rebuilt = from_record(pot.to_record())
        assert eval_derivs(rebuilt, 1.1) == pytest.approx(eval_derivs(pot, 1.1), rel=1e-15)


def test_unknown_record_type():
    with pytest.raises(Exception):
        from_record({"type": "morse"})


@pytest.mark.parametrize("pot", [kepler(), harmonic(), Homogeneous(1.0, 4.0),
                                 Homogeneous(1.0, 3.0), LennardJones(1.0, 2.0),
                                 ScreenedCoulomb(1.0, 0.5), PowerSum(((0.5, 2.0), (1.0, 4.0)))],
                         ids=lambda p: p.name)
def test_validate_derivs_random_radii(pot):
    rng = np.random.default_rng(7)
    for r in rng.uniform(0.8, 2.0, 10):
        check = validate_derivs(pot, float(r), 1e-6)
        assert check.passed, check


def test_validate_harmonic_tight():
    assert validate_derivs(harmonic(), 1.0, 1e-10).passed


@dataclass(frozen=True, eq=False)
class _Corrupted(CentralPotential):
    name = "corrupted"

    def _derivs(self, r):
        v = list(kepler().derivs(r))
        v[3] = v[3] * 1.01
        return tuple(v)


def test_validate_detects_corrupted_third_derivative():
    check = validate_derivs(_Corrupted(), 1.0, 1e-6)
    assert not check.passed
    assert check.rel_errors[2] > 1e-3


def test_kepler_window():
    w = admissible_window(kepler(), 0.5, 2.0)
    assert w.gamma_lo == pytest.approx(math.sqrt(0.5), rel=1e-14)
    assert w.gamma_hi == pytest.approx(math.sqrt(2.0), rel=1e-14)


def test_harmonic_window():
    w = admissible_window(harmonic(), 0.5, 2.0)
    assert (w.gamma_lo, w.gamma_hi) == pytest.approx((0.25, 4.0), rel=1e-14)


def test_repulsive_linear_rejected():
    with pytest.raises(WindowError) as exc:
        admissible_window(Homogeneous(-1.0, 1.0), 0.5, 2.0)
    assert exc.value.radius == pytest.approx(0.5)


def test_lj_window_rejects_beyond_inflection():
    # for a r^-12 - b r^-6 with a=1,b=2 the well sits at r=1; nd.2 fails far out
    with pytest.raises(WindowError):
        admissible_window(LennardJones(1.0, 2.0), 1.0, 3.0)


def test_bad_window_arguments():
    with pytest.raises(DomainError):
        admissible_window(kepler(), 2.0, 1.0)
    with pytest.raises(DomainError):
        admissible_window(kepler(), 0.5, 2.0, grid_size=1)


@settings(max_examples=60, deadline=None)
@given(alpha=st.floats(-1.9, 6.0).filter(lambda a: abs(a) > 0.05),
       lo=st.floats(0.1, 2.0), span=st.floats(0.1, 5.0))
def test_gamma_bounds_ordered(alpha, lo, span):
    k = 1.0 if alpha > 0 else -1.0
    w = admissible_window(Homogeneous(k, alpha), lo, lo + span, grid_size=32)
    assert w.gamma_lo < w.gamma_hi
    rs = np.linspace(w.r_lo, w.r_hi, 32)
    g = [r**3 * eval_derivs(Homogeneous(k, alpha), r)[1] for r in rs]
    assert np.all(np.diff(g) > 0)


@pytest.mark.parametrize("k, alpha, ok, failed", [
    (1.0, 3.0, True, ()),
    (1.0, 2.0, False, ("alpha!=2 (harmonic)",)),
    (-1.0, -1.0, False, ("alpha!=-1 (Kepler)",)),
    (-1.0, -2.0, False, ("alpha+2>0",)),
    (-1.0, 3.0, False, ("k*alpha>0",)),
    (-1.0, -0.5, True, ()),
])
def test_homogeneous_admissibility(k, alpha, ok, failed):
    res = homogeneous_admissibility(k, alpha)
    assert res.admissible is ok
    assert res.failed == failed


@pytest.mark.parametrize("k, alpha", [(0.0, 1.0), (1.0, 0.0)])
def test_homogeneous_admissibility_rejects_trivial(k, alpha):
    with pytest.raises(DomainError):
        homogeneous_admissibility(k, alpha)
