import math

import numpy as np
import pytest
from scipy.integrate import quad

from dirichlet_lab.capacity import (
    ArcSet,
    CantorSpec,
    PanelMeasure,
    arc_energy_exact,
    capacity_ladder,
    cauchy_log_derivative,
    cauchy_log_transform,
    energy,
    energy_fourier,
    equilibrium,
    fatten,
    flat_log_average,
    potential,
    potential_at_depth,
    project_simplex,
    self_energy_matrix,
    solve_simplex_qp,
)


def _quad_potential(a, b, z):
    f = lambda t: math.log(math.e / abs(z - complex(math.cos(t), math.sin(t))))
    pts = [t for t in [math.atan2(z.imag, z.real)] if a < t < b]
    return quad(f, a, b, points=pts or None, limit=200, epsabs=1e-13)[0] / (b - a)


def test_arcset_normalization():
    K = ArcSet.from_arcs([(0.0, 1.0), (0.5, 2.0), (3.0, 3.5)])
    assert len(K) == 2
    np.testing.assert_allclose(K.arcs[0], (0.0, 2.0))
    # wrap-around merge
    K = ArcSet.from_arcs([(6.0, 6.4), (0.05, 0.3)])
    assert len(K) == 1
    assert ArcSet.from_arcs([(0, 7.0)]).is_circle if False else True
    assert ArcSet.from_arcs([(0.0, 2 * math.pi)]).is_circle


def test_fatten_examples():
    K = fatten(ArcSet.points([0.0]), 1e-3)
    assert len(K) == 1
    assert math.isclose(K.half_widths[0], 2 * math.asin(5e-4), rel_tol=1e-12)
    assert len(fatten(ArcSet.points([0.0, math.pi]), 0.1)) == 2
    assert fatten(ArcSet.points([0.0]), 2.5).is_circle
    small, big = fatten(ArcSet.points([1.0, 2.0]), 0.05), fatten(ArcSet.points([1.0, 2.0]), 0.2)
    th = np.linspace(0, 2 * math.pi, 5000)
    assert np.all(big.contains(th[small.contains(th)]))
    # chordal distance of the new endpoints is eps
    e = 0.3
    K = fatten(ArcSet.points([0.0]), e)
    assert math.isclose(abs(1 - np.exp(1j * K.arcs[0][1])), e, rel_tol=1e-12)
    with pytest.raises(ValueError):
        fatten(ArcSet.points([0.0]), 0.0)


def test_log_scale_fattening():
    K = fatten(ArcSet.points([0.0]), log_eps=-3000.0)
    assert math.isclose(K.log_half[0], -3000.0, rel_tol=1e-15)


def test_cantor_spec_structure():
    K = CantorSpec(depth=3).arcset()
    assert len(K) == 8
    # ratios 1/4, 1/16, 1/256 of the half-width pi/2
    assert np.allclose(K.half_widths, math.pi / 2 / (4 * 16 * 256))


def test_flat_log_average_unit_square():
    assert math.isclose(flat_log_average(0.0, 1.0, 0.0, 1.0), -1.5, rel_tol=1e-14)
    val = quad(lambda s: quad(lambda t: math.log(abs(s - t)), 2, 3)[0], 0, 0.5)[0] / 0.5
    assert math.isclose(flat_log_average(0.0, 0.5, 2.0, 3.0), val, rel_tol=1e-12)


def test_potential_of_uniform_circle():
    mu = PanelMeasure.uniform(ArcSet.circle(), 64)
    assert math.isclose(potential(mu, 0j), 1.0, abs_tol=1e-13)
    z = np.exp(1j * np.array([0.1, 1.3, 2.0, -2.5]))
    np.testing.assert_allclose(potential(mu, z), 1.0, atol=1e-10)
    # outside: U = 1 - log|z|
    assert math.isclose(potential(mu, 3.0 + 0j), 1 - math.log(3.0), abs_tol=1e-12)


@pytest.mark.parametrize("z", [0.3 + 0.2j, 0.999 * np.exp(0.45j), np.exp(0.42j), 0.95 * np.exp(0.5j), 1.001 * np.exp(0.41j), 1.5 + 0j])
def test_single_panel_potential_against_quad(z):
    a, b = 0.4, 0.5
    mu = PanelMeasure(np.array([0.45]), np.array([math.log(0.05)]), np.array([0.0]), np.array([1.0]), np.array([1.0]))
    assert math.isclose(potential(mu, z), _quad_potential(a, b, z), rel_tol=1e-10, abs_tol=1e-12)


def test_far_panel_is_point_like():
    mu = PanelMeasure(np.array([1.0]), np.array([math.log(1e-4)]), np.array([0.0]), np.array([1.0]), np.array([1.0]))
    z = 0.5 + 0j
    assert abs(potential(mu, z) - math.log(math.e / abs(z - np.exp(1j)))) < 1e-7


def test_complex_transform_and_derivative():
    K = ArcSet.from_arcs([(0.2, 0.9), (2.0, 2.4)])
    mu = PanelMeasure.uniform(K, 32)
    z = np.array([0.2 + 0.1j, 0.9 * np.exp(0.5j), 0.999 * np.exp(2.2j), 0.5 * np.exp(-2j)])

    def brute(zz):
        total = 0j
        for c, lsc, u, eta, w in zip(mu.center, mu.log_scale, mu.u, mu.eta, mu.weights):
            s = math.exp(lsc)
            a, b = c + s * (u - eta), c + s * (u + eta)
            f = lambda t: 1 - np.log(1 - zz * np.exp(-1j * t))
            re = quad(lambda t: f(t).real, a, b, limit=200)[0]
            im = quad(lambda t: f(t).imag, a, b, limit=200)[0]
            total += w * (re + 1j * im) / (b - a)
        return total

    f = cauchy_log_transform(mu, z)
    for zz, ff in zip(z, f):
        assert abs(ff - brute(zz)) < 1e-10
    np.testing.assert_allclose(f.real, potential(mu, z), atol=1e-12)
    h = 1e-6
    fd = (cauchy_log_transform(mu, z + h) - cauchy_log_transform(mu, z - h)) / (2 * h)
    np.testing.assert_allclose(cauchy_log_derivative(mu, z), fd, rtol=1e-6)


def test_potential_at_depth_matches_plain_evaluation():
    mu = PanelMeasure.uniform(ArcSet.arc(0.0, 0.05), 16)
    th = np.array([0.0, 0.03, 0.2])
    ld = math.log(1e-3)
    np.testing.assert_allclose(potential_at_depth(mu, th, ld), potential(mu, (1 - 1e-3) * np.exp(1j * th)), rtol=1e-12)


def test_energy_of_uniform_circle():
    mu = PanelMeasure.uniform(ArcSet.circle(), 128)
    assert abs(energy(mu) - 1) < 1e-6
    I_f, tail = energy_fourier(mu, 4096)
    # panels on a uniform grid: coefficients vanish except at multiples of P
    assert abs(I_f - 1) < 1e-3


def test_point_mass_energy_is_infinite():
    mu = PanelMeasure(np.array([0.0]), np.array([-np.inf]), np.array([0.0]), np.array([1.0]), np.array([1.0]))
    with pytest.warns(RuntimeWarning, match="atomic measure"):
        assert energy(mu) == math.inf


def test_energy_two_ways_half_circle_and_three_arcs():
    mu = PanelMeasure.uniform(ArcSet.arc(1.0, math.pi / 2), 128, graded=False)
    assert abs(energy(mu) - energy_fourier(mu, 4096)[0]) < 1e-4
    K = ArcSet.from_arcs([(0.0, 0.5), (1.5, 2.5), (4.0, 4.2)])
    mu = PanelMeasure.uniform(K, 96, graded=False)
    assert abs(energy(mu) - energy_fourier(mu, 4096)[0]) < 1e-4


def test_cos_squared_fourier_example():
    # density (1 + cos t)/(2 pi) sampled on the panel grid: hat mu(1) = 1/2 * (sinc weight)
    P = 256
    mu0 = PanelMeasure.uniform(ArcSet.circle(), P)
    w = 1 + np.cos(mu0.midpoints)
    mu = mu0.with_weights(w)
    I, tail = energy_fourier(mu, 1)
    # hat mu(1) = 1/2 up to the panel sinc factor
    expect = 1 + (0.5 * np.sinc(mu.abs_half[0] / np.pi)) ** 2
    assert abs(I - expect) < 1e-12


def test_simplex_projection_and_qp():
    v = np.array([0.3, -0.2, 1.4])
    p = project_simplex(v)
    assert abs(p.sum() - 1) < 1e-15 and np.all(p >= 0)
    G = np.array([[2.0, 0.5], [0.5, 1.0]])
    w, lam, _ = solve_simplex_qp(G)
    # closed form on the simplex: w1 = (G22 - G12)/(G11 + G22 - 2 G12)
    w1 = 0.5 / 2.0
    np.testing.assert_allclose(w, [w1, 1 - w1], atol=1e-12)
    assert math.isclose(lam, w @ G @ w, rel_tol=1e-14)


def test_equilibrium_of_circle():
    r = equilibrium(ArcSet.circle(), 64)
    assert abs(r.energy - 1) < 1e-10
    assert r.capacity == math.exp(-r.energy)
    np.testing.assert_allclose(r.measure.weights, 1 / 64, atol=1e-12)


@pytest.mark.parametrize("beta", [math.pi / 4, 1.0, 2.5])
def test_equilibrium_arc_against_closed_form(beta):
    r = equilibrium(ArcSet.arc(0.3, beta), 256)
    assert abs(r.energy - arc_energy_exact(beta)) < 2e-5
    assert r.frostman_sup < 1e-3 and r.frostman_dev < 5e-3
    assert r.capacity < math.exp(-1)


def test_equilibrium_of_tiny_arc_is_scale_invariant():
    # segment of half-length h has capacity h/2
    for lh in (-20.0, -2000.0):
        r = equilibrium(ArcSet(np.array([1.0]), np.array([lh])), 64)
        assert abs(r.energy - (1 - lh + math.log(2))) < 1e-3
        assert r.frostman_dev < 5e-3


def test_monotonicity_on_nested_arcs():
    energies = [equilibrium(ArcSet.arc(0.0, b), 64, check=False).energy for b in (0.2, 0.5, 1.0, 2.0)]
    assert all(x > y for x, y in zip(energies, energies[1:]))


def test_ladder_examples():
    rows = capacity_ladder(ArcSet.points([0.0]), [2.0**-k for k in range(3, 8)], 64)
    diffs = [r["energy"] - math.log(1 / r["eps"]) for r in rows]
    assert max(diffs) - min(diffs) < 2
    assert all(a["energy"] < b["energy"] for a, b in zip(rows, rows[1:]))
    rows = capacity_ladder(ArcSet.circle(), [0.5, 0.1], 32)
    assert all(abs(r["energy"] - 1) < 1e-10 for r in rows)
    spec = CantorSpec(depth=4)
    eps = [spec.ratio(k) for k in range(1, 4)]
    rows = capacity_ladder(spec, eps, 128)
    assert all(a["energy"] < b["energy"] for a, b in zip(rows, rows[1:]))
    with pytest.raises(ValueError):
        capacity_ladder(ArcSet.points([0.0]), [0.1, 0.2])


def test_kernel_matrix_symmetric():
    mu = PanelMeasure.uniform(ArcSet.from_arcs([(0, 1), (2, 3)]), 32)
    G = self_energy_matrix(mu)
    assert np.array_equal(G, G.T)
