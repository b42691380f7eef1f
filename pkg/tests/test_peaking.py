import json
import math

import numpy as np
import pytest

from dirichlet_lab import capacity as cap
from dirichlet_lab import peaking as pk
from dirichlet_lab.symbols import compose, cusp_map, scaled


@pytest.fixture(scope="module")
def plan2():
    return pk.plan_peaking(cap.ArcSet.points([0.0]), 2)


def _uniform_plan(J):
    mu = cap.PanelMeasure.uniform(cap.ArcSet.circle(), 16)
    terms = [pk.PlanTerm(j, math.log(0.5), 1.0, mu, pk._log_delta(math.log(0.5))) for j in range(1, J + 1)]
    return pk.PeakingPlan(cap.ArcSet.circle(), terms)


def test_plan_invariants(plan2):
    chk = plan2.verify()
    assert chk["ok"]
    t1, t2 = plan2.terms
    assert t1.energy >= 4 and t2.energy >= 256
    for t in plan2.terms:
        assert t.log_delta <= 2 * t.log_eps - math.log(32) + 1e-12
        assert t.log_delta <= t.log_eps - math.log(4) + 1e-12
    # first term: arc energy 1 + log(2/eps) reaches 4 near eps = 2 e^-3
    assert abs(t1.log_eps - (math.log(2) - 3)) < 0.05
    assert t2.log_eps < t1.log_eps


def test_plan_largest_eps(plan2):
    # a slightly larger eps would miss the energy target
    t = plan2.terms[0]
    Ke = cap.fatten(plan2.K, log_eps=t.log_eps + 0.02)
    assert cap.equilibrium(Ke, 64, check=False).energy < 4


def test_circle_cannot_peak():
    with pytest.raises(ValueError, match="capacity of K too large"):
        pk.plan_peaking(cap.ArcSet.circle(), 1)


def test_plan_json_roundtrip(plan2):
    d = json.loads(plan2.to_json())
    assert d["J"] == 2 and len(d["schedule"]) == 2
    back = pk.PeakingPlan.from_dict(d)
    z = np.array([0.3 + 0.1j, 0.99])
    np.testing.assert_allclose(pk.PeakingFunction(back)(z), pk.PeakingFunction(plan2)(z), rtol=1e-14)


def test_f_real_at_origin_and_above_one(plan2):
    fn = pk.PeakingFunction(plan2)
    f0 = fn(0.0)
    assert abs(f0.imag) < 1e-14
    th = np.linspace(-math.pi, math.pi, 2000)
    z = np.concatenate([np.exp(1j * th), 0.7 * np.exp(1j * th)])
    assert fn.real_part(z).min() >= 1 - 1e-9
    # |Q| <= pi/2 for each term
    for j in (1, 2):
        assert np.abs(fn.term(j, z).imag).max() <= math.pi / 2 + 1e-9


def test_uniform_measure_terms_are_constant():
    fn = pk.PeakingFunction(_uniform_plan(2))
    z = np.array([0.0, 0.5j, -0.9, np.exp(0.3j)])
    expected = 1 + 1 + 1 / 4
    np.testing.assert_allclose(fn(z), expected, atol=1e-9)


def test_empty_plan_gives_constant():
    fn = pk.PeakingFunction(pk.PeakingPlan(cap.ArcSet.points([0.0]), []))
    assert fn(0.4 + 0.2j) == 1
    q = pk.build_q(fn)
    np.testing.assert_allclose(q(np.array([0.1, 0.5j, 0.9])), 0, atol=1e-15)


def test_derivative_matches_difference_quotient(plan2):
    fn = pk.PeakingFunction(plan2)
    z0, h = 0.4 - 0.5j, 1e-6
    fd = (fn(z0 + h) - fn(z0 - h)) / (2 * h)
    assert abs(fn.deriv(z0) - fd) < 1e-6 * abs(fd)


def test_collar_lower_bound(plan2):
    fn = pk.PeakingFunction(plan2)
    assert pk.lower_bound_near_K(fn, 1, 1.0) >= 1
    assert pk.lower_bound_near_K(fn, 2, 1.0) >= 2
    # point inward at depth delta_2
    t2 = plan2.terms[1]
    assert pk.lower_bound_near_K(fn, 2, 1.0, log_depth=t2.log_delta) >= 2
    t1 = plan2.terms[0]
    with pytest.raises(ValueError, match="not in the delta_j collar"):
        pk.lower_bound_near_K(fn, 1, np.exp(2j * t1.delta))


def test_truncation_coherence(plan2):
    one = pk.PeakingPlan(plan2.K, plan2.terms[:1])
    f1, f2 = pk.PeakingFunction(one), pk.PeakingFunction(plan2)
    z = np.exp(1j * np.array([0.5, 1.5, 3.0]))
    t2 = plan2.terms[1]
    term = np.abs(f2.term(2, z)) / (4 * math.sqrt(t2.energy))
    assert np.all(np.abs(f2(z) - f1(z)) <= term + 1e-12)


def test_q_fixes_origin_and_peaks_radially(plan2):
    fn = pk.PeakingFunction(plan2)
    q = pk.build_q(fn)
    assert abs(q(0.0)) < 1e-14
    gaps = [1 - abs(q(r)) for r in (0.9, 0.99, 0.999)]
    assert gaps[0] > gaps[1] > gaps[2] > 0
    th = np.linspace(0.5, 2 * math.pi - 0.5, 500)
    assert np.abs(q(np.exp(1j * th))).max() < 1


def test_single_term_norm_identity(plan2):
    norm, energy = pk.norm_identity(plan2.terms[0], order=1 << 14)
    assert abs(norm - energy) <= 1e-3 * energy


def test_certificate_examples(plan2):
    half = pk.hs_certificate(scaled(0.5), None, levels=(10, 14, 18))
    assert half["stable"] and abs(half["estimate"] - 1 / 3) < 1e-5
    zero = pk.hs_certificate(scaled(0.0), None, levels=(4, 6, 8))
    assert zero["estimate"] == 0 and zero["stable"]
    fn = pk.PeakingFunction(plan2)
    cert = pk.hs_certificate(pk.build_q(fn), fn, levels=(6, 8, 10))
    assert cert["estimate"] <= cert["ceiling"]


def test_contact_scan_reports_margin(plan2):
    fn = pk.PeakingFunction(plan2)
    phi = compose(cusp_map(), pk.build_q(fn))
    rep = pk.contact_scan(phi, plan2.K, n=2000)
    assert 0 < rep["eta"] < 1 and rep["sup_near"] < 1


def test_series_export(plan2):
    fn = pk.PeakingFunction(plan2)
    s = pk.as_series(fn, 0.9, 64)
    z = 0.3 + 0.2j
    assert abs(s(z) - fn(z)) < 1e-8
