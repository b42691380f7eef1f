import math

import numpy as np
import pytest

from dirichlet_lab import operators as op
from dirichlet_lab import symbols as sy
from dirichlet_lab.series import dirichlet_norm_sq, monomial_weight, series_from_samples, series_power


def test_identity_matrix():
    M = op.build_matrix(sy.identity(), 8)
    np.testing.assert_allclose(M.entries, np.eye(8), atol=1e-13)
    np.testing.assert_allclose(op.singular_values(M).values, 1, atol=1e-13)


def test_square_map_matrix():
    M = op.build_matrix(sy.power_map(2), 10)
    expected = np.zeros((10, 10))
    for n in range(1, 6):
        expected[2 * n - 1, n - 1] = math.sqrt(2)
    np.testing.assert_allclose(M.entries, expected, atol=1e-12)


def test_half_map_diagonal():
    M = op.build_matrix(sy.scaled(0.5), 12)
    np.testing.assert_allclose(M.entries, np.diag(2.0 ** -np.arange(1, 13)), atol=1e-14)
    s = op.singular_values(M).values
    np.testing.assert_allclose(s, 2.0 ** -np.arange(1, 13), rtol=1e-10)


def test_weighted_entries_use_monomial_weights():
    alpha = 1.0
    M = op.build_matrix(sy.power_map(2), 8, alpha=alpha)
    w = monomial_weight(np.arange(1, 9), alpha)
    assert math.isclose(M.entries[3, 1].real, math.sqrt(w[3] / w[1]), rel_tol=1e-12)


def test_sampling_radius_error():
    with pytest.raises(ValueError, match="sampling radius too large"):
        op.build_matrix(sy.Symbol(lambda z: 2 * z, lambda z: 2 + 0 * z, True), 4, rho=0.9)


def test_frobenius_identity():
    # schatten(2)^2 = sum over columns of the degree <= N part of ||phi^n||^2 / w_n
    phi = sy.cusp_map()
    N = 32
    M = op.build_matrix(phi, N)
    spec = op.singular_values(M)
    s = series_from_samples(phi, 0.99, N, 8192)
    total = 0.0
    for n in range(1, N + 1):
        c = series_power(s, n, N).coeffs.copy()
        c[0] = 0
        total += dirichlet_norm_sq(type(s)(c, 0.99)) / n
    assert abs(spec.schatten(2) ** 2 - total) <= 1e-6
    assert abs(spec.schatten(2) ** 2 - M.frobenius_sq()) <= 1e-8


def test_interlacing_cusp():
    phi = sy.cusp_map()
    vals = [op.singular_values(op.build_matrix(phi, N)).values for N in (32, 64, 128)]
    for a, b in zip(vals[:-1], vals[1:]):
        assert np.all(a <= b[: a.size] + 1e-13 * b[0])


def test_sqrt_fit_recovers_synthetic_decay():
    n = np.arange(1, 200)
    fit = op.fit_sqrt_decay(3.0 * np.exp(-0.7 * np.sqrt(n)))
    assert math.isclose(fit["b"], 0.7, rel_tol=1e-10) and fit["r2"] > 1 - 1e-12


def test_hs_series_examples():
    assert abs(float(op.hs_norm_series(sy.scaled(0.5))) - 1 / 3) < 1e-12
    assert abs(float(op.hs_norm_series(sy.scaled(0.5, 2))) - 2 / 3) < 1e-12
    res = op.hs_norm_series(sy.identity(), N=32)
    assert not res.converged and abs(res.value - 32) < 1e-9


def test_hs_integral_examples():
    assert abs(float(op.hs_norm_integral(sy.scaled(0.5))) - 1 / 3) < 1e-12
    with pytest.raises(op.DivergenceError, match="appears divergent"):
        op.hs_norm_integral(sy.identity())


def test_hs_cross_check_mobius_composite():
    phi = sy.compose(sy.mobius_shift(0.3), sy.compose(sy.scaled(0.6), sy.mobius_shift(-0.3)))
    phi.fixes_origin = True
    a = op.hs_norm_series(phi, N=200)
    b = op.hs_norm_integral(phi)
    assert a.converged
    assert abs(a.value - b.value) <= 1e-3 * (1 + b.value)


def test_graded_integral_matches_closed_form():
    v = op.hs_integral_graded(sy.scaled(0.5), 24, breakpoints=[0.0, 2.0])
    assert abs(v - 1 / 3) < 1e-6


def test_window_index():
    w = np.array([0.1, 0.6 * np.exp(1j * 3.5), 0.99 * np.exp(0.01j)])
    n, j = op.window_index(w)
    assert list(n) == [0, 1, 6] and list(j) == [0, 1, 0]


def test_separation_masses_closed_form():
    phi = sy.separation_symbol(sy.separation_profile("inverse_power", 2.0))
    for n in range(1, 13):
        hn = 1 / (n + 1)
        expected = (4.0**-n * hn / (2 * math.pi)) * (1 - 3 * 2.0**-n / 4)
        m, e, b = op.window_mass(phi, 0, n, 0, backend="quadrature")
        assert abs(m - expected) <= 1e-12 * expected
        assert op.window_mass(phi, 0, n, 1)[0] == 0


def test_separation_monte_carlo_coherence():
    phi = sy.separation_symbol(sy.separation_profile("inverse_power", 2.0))
    for n in range(0, 11):
        exact = op.window_mass(phi, 0, n, 0)[0]
        m, e, _ = op.window_mass(phi, 0, n, 0, samples=20_000, seed=n, backend="mc-image")
        assert abs(m - exact) <= 3 * e + 1e-15


def test_identity_window_mass_is_weighted_area():
    phi = sy.identity()
    for alpha in (0.0, 1.0):
        m, _, b = op.window_mass(phi, alpha, 3, 5)
        assert b == "exact" and m == sy.window_area(3, alpha)
        q, _, _ = op.window_mass(phi, alpha, 3, 5, backend="quadrature")
        assert abs(q - sy.window_area(3, alpha)) < 1e-12


def test_disk_monte_carlo_identity():
    m, e, _ = op.window_mass(sy.identity(), 0, 2, 1, samples=100_000, seed=4, backend="mc-disk")
    assert abs(m - sy.window_area(2)) <= 4 * e


def test_no_backend():
    s = sy.Symbol(None)
    with pytest.raises(ValueError, match="lacks evaluation and models"):
        op.window_mass(s, 0, 1, 0)


def test_comb_mass_against_lattice_enumeration():
    phi = sy.comb_symbol()
    model = phi.valence_model
    n, j = 3, 1
    x0, x1 = -math.log(1 - 2.0 ** -(n + 1)), -math.log(1 - 2.0**-n)
    a, b = 2 * math.pi * j / 8, 2 * math.pi * (j + 1) / 8
    k = 2000
    xs = x0 + (x1 - x0) * (np.arange(k) + 0.5) / k
    th = a + (b - a) * (np.arange(k) + 0.5) / k
    X, T = np.meshgrid(xs, th, indexing="ij")
    brute = (np.exp(-2 * X) * model.count(X, T)).mean() * (x1 - x0) * (b - a) / math.pi
    m = op.window_mass(phi, 0, n, j)[0]
    assert abs(m - brute) < 2e-3 * m


def test_cusp_windows_and_scaling():
    phi = sy.cusp_map()
    for n in range(0, 15):
        assert len(op.windows_meeting(phi.image_region, n)) <= 8
    masses = op.window_masses(phi, 0, 12)
    rep = op.WindowReport(0.0, masses)
    g = np.log2([rep.generation_mass(n) for n in range(5, 13)])
    slope = np.polyfit(np.arange(5, 13), g, 1)[0]
    assert abs(slope + 3) < 0.5


def test_cusp_quadrature_agrees_with_image_monte_carlo():
    phi = sy.cusp_map()
    for alpha in (0.0, 2.0):
        q = op.window_mass(phi, alpha, 4, 0, backend="quadrature")[0]
        m, e, _ = op.window_mass(phi, alpha, 4, 0, samples=100_000, seed=9, backend="mc-image")
        assert abs(q - m) <= 4 * e


def test_verdicts_separation():
    phi = sy.separation_symbol(sy.separation_profile("inverse_power", 2.0))
    rep = op.schatten_sum(phi, 0, [1.6, 2.0, 2.4], 20)
    assert rep.verdicts == {1.6: "diverging", 2.0: "diverging", 2.4: "converging"}
    tot = rep.generation_totals[2.0]
    for n in (5, 10, 20):
        assert math.isclose(tot[n] * (n + 1) * 2 * math.pi, 1, rel_tol=0.05)


def test_verdicts_no_schatten_class():
    phi = sy.separation_symbol(sy.separation_profile("inverse_log"))
    rep = op.schatten_sum(phi, 0, [0.5, 1, 2, 4], 20)
    assert set(rep.verdicts.values()) == {"diverging"}


def test_verdicts_cusp():
    rep = op.schatten_sum(sy.cusp_map(), 0, [0.5, 1.0, 3.0], 12)
    assert set(rep.verdicts.values()) == {"converging"}


def test_verdict_band_is_inconclusive():
    # totals ~ n^-1.15: ratio in the band and exponent between the thresholds
    totals = {n: (n + 1.0) ** -1.15 for n in range(31)}
    v, d = op._verdict(totals, 30)
    assert v == "inconclusive" and 0.95 <= d["ratio"] <= 1.05


def test_schatten_sum_checks_arguments():
    with pytest.raises(ValueError):
        op.schatten_sum(sy.identity(), 0, 0.0, 3)
    with pytest.raises(ValueError):
        op.schatten_sum(sy.identity(), -1.0, 2.0, 3)


def test_schwarz_comparison():
    phi = sy.identity()
    a = op.schatten_sum(phi, 0, 2, 5)
    assert op.schwarz_window_comparison(a, a)
    b = op.schatten_sum(phi, 1, 2, 5)
    assert op.schwarz_window_comparison(a, b)
    cusp = sy.cusp_map()
    ca = op.schatten_sum(cusp, 0, 2, 6, backend="mc-image", samples=20_000, seed=11)
    cb = op.schatten_sum(cusp, 2, 2, 6, backend="mc-image", samples=20_000, seed=11)
    assert op.schwarz_window_comparison(ca, cb, 6)
    # swapping the roles violates the inequality
    with pytest.raises(ValueError):
        op.schwarz_window_comparison(b, a)


def test_report_csv():
    rep = op.schatten_sum(sy.identity(), 0, 2, 1)
    lines = rep.to_csv().splitlines()
    assert lines[0] == "alpha,n,j,mass,stderr,backend"
    assert len(lines) == 1 + 3
    assert lines[1].split(",")[3] == f"{sy.window_area(0):.17g}"


def test_zorboska_examples():
    assert abs(op.zorboska_average(sy.identity(), 1.0, 0.1) - 1) < 1e-12
    uni = sy.comb_symbol("one_over_t", "const_2pi")
    vals = [op.zorboska_average(uni, 1.0, 2.0**-n) for n in range(2, 10)]
    np.testing.assert_allclose(vals, 1.0, atol=1e-9)
    comb = sy.comb_symbol()
    avg = [op.zorboska_average(comb, 1.0, 2.0**-n) for n in range(2, 10)]
    assert np.all(np.diff(avg) > 0)
    with pytest.raises(ValueError):
        op.zorboska_average(comb, 1.0, 2.5)


def test_compactness_ratio():
    assert math.isclose(op.compactness_ratio(sy.identity(), 0.3 + 0.4j), 1.0, rel_tol=1e-12)
    r = 0.999
    sq = op.compactness_ratio(sy.power_map(2), r)
    assert math.isclose(sq, math.log(1 / (1 - r**4)) / math.log(1 / (1 - r * r)), rel_tol=1e-12)
    sweep = [s["sup"] for s in op.compactness_sweep(sy.cusp_map())]
    assert sweep[0] > sweep[1] > sweep[2]
    with pytest.raises(ValueError):
        op.compactness_ratio(sy.identity(), 0)
