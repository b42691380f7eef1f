"""Composition operators on weighted Dirichlet spaces: matrices, HS norms, window sums."""

from __future__ import annotations

import csv
import dataclasses
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .series import QuadratureRule, disk_integrate, gauss_legendre, monomial_weight
from .symbols import Symbol, window_area

log = logging.getLogger(__name__)

TWO_PI = 2 * math.pi


class DivergenceError(ValueError):
    pass


def fmt(x) -> str:
    """Floats with 17 significant digits."""
    return f"{float(x):.17g}"


# ---------------------------------------------------------------------------
# matrices and singular values


def default_radius(N: int) -> float:
    return 0.99 if N <= 1024 else 1 - 10.0 / N


def default_samples(N: int) -> int:
    return max(1 << int(math.ceil(math.log2(16 * N))), 8192)


def _circle_samples(phi: Symbol, rho: float, m: int) -> np.ndarray:
    z = rho * np.exp(2j * math.pi * np.arange(m) / m)
    v = np.asarray(phi(z), dtype=complex)
    if not np.all(np.isfinite(v)):
        raise ValueError("symbol evaluation failed on sampling circle")
    if np.max(np.abs(v)) >= 1:
        raise ValueError("sampling radius too large for this symbol")
    return v


def _power_coefficients(phi: Symbol, n_max: int, rho: float, m: int, keep: int):
    """Taylor coefficients ``0..keep`` of ``phi^n`` for ``n = 1..n_max`` and per-column tails."""
    v = _circle_samples(phi, rho, m)
    scale = rho ** -np.arange(keep + 1, dtype=float)
    cols = np.empty((n_max, keep + 1), dtype=complex)
    tails = np.empty(n_max)
    p = np.ones(m, dtype=complex)
    for n in range(1, n_max + 1):
        p = p * v
        c = np.fft.fft(p) / m
        cols[n - 1] = c[: keep + 1] * scale
        tails[n - 1] = float(np.max(np.abs(c[keep + 1 : m // 2]))) if keep + 1 < m // 2 else 0.0
    return cols, tails


@dataclass
class OperatorMatrix:
    alpha: float
    order: int
    entries: np.ndarray
    rho: float
    samples: int
    tails: np.ndarray

    def frobenius_sq(self) -> float:
        return float(np.sum(np.abs(self.entries) ** 2))


def build_matrix(phi: Symbol, N: int, alpha: float = 0.0, rho: float | None = None, samples: int | None = None) -> OperatorMatrix:
    """Matrix of ``C_phi`` in the basis ``z^n / sqrt(w_n)``, ``n = 1..N``.

    ``M[m-1, n-1] = a_m^(n) sqrt(w_m / w_n)`` with ``a_m^(n)`` the Taylor
    coefficients of ``phi^n`` read off one DFT of its samples on ``|z| = rho``.
    """
    if not phi.evaluable:
        raise ValueError("symbol not evaluable")
    if not phi.fixes_origin:
        raise ValueError("symbol must fix the origin")
    rho = default_radius(N) if rho is None else float(rho)
    m = default_samples(N) if samples is None else int(samples)
    cols, tails = _power_coefficients(phi, N, rho, m, N)
    idx = np.arange(1, N + 1)
    w = np.asarray(monomial_weight(idx, alpha), dtype=float)
    a = cols[:, 1:].T  # rows m = 1..N, columns n = 1..N
    entries = a * np.sqrt(w[:, None] / w[None, :])
    return OperatorMatrix(float(alpha), N, entries, rho, m, tails)


@dataclass
class SingularSpectrum:
    values: np.ndarray
    order: int

    def schatten(self, p: float) -> float:
        return float(np.sum(self.values**p) ** (1 / p))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "sigma", "N"])
        for k, s in enumerate(self.values, 1):
            w.writerow([k, fmt(s), self.order])
        return buf.getvalue()


def singular_values(M: OperatorMatrix) -> SingularSpectrum:
    """Truncation singular values; lower estimates of the approximation numbers."""
    s = np.linalg.svd(M.entries, compute_uv=False)
    return SingularSpectrum(np.sort(s)[::-1], M.order)


def fit_sqrt_decay(values: np.ndarray, n_lo: int = 10, n_hi: int = 100) -> dict:
    """Least-squares fit ``log sigma_n = log a - b sqrt(n)`` over ``n_lo..n_hi``."""
    n = np.arange(n_lo, min(n_hi, len(values)) + 1)
    y = np.log(values[n - 1])
    x = np.sqrt(n)
    A = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return {"a": math.exp(coef[0]), "b": -coef[1], "slope": coef[1], "r2": 1 - ss_res / ss_tot}


# ---------------------------------------------------------------------------
# Hilbert-Schmidt norms


@dataclass
class HSResult:
    value: float
    tail: float
    converged: bool
    history: list = field(default_factory=list)

    def __float__(self) -> float:
        return self.value


def hs_norm_series(phi: Symbol, N: int = 64, rho: float = 0.95, samples: int = 4096) -> HSResult:
    """``sum_{n <= N} ||phi^n||^2 / n`` with a geometric tail estimate."""
    if not phi.fixes_origin:
        raise ValueError("symbol must fix the origin")
    # keep rho^-k below e^18 so rounding in the DFT is not amplified
    keep = min(samples // 2 - 1, int(18 / -math.log(rho)))
    cols, _ = _power_coefficients(phi, N, rho, samples, keep)
    k = np.arange(cols.shape[1])
    norms = (np.abs(cols) ** 2) @ k
    terms = norms / np.arange(1, N + 1)
    s = float(np.max(np.abs(_circle_samples(phi, rho, samples))))
    q = s * s
    value = float(np.sum(terms))
    if q < 1 - 1e-3:
        tail = float(terms[-1] * q / (1 - q))
    else:
        tail = math.inf
    converged = tail <= 1e-6 * (1 + value)
    if not converged:
        log.warning("HS series has not converged")
    return HSResult(value, tail, converged, list(np.cumsum(terms)))


def _hyperbolic_integrand(phi: Symbol):
    def F(z):
        return phi.hyperbolic_derivative(z)

    return F


def hs_norm_integral(phi: Symbol, rule: QuadratureRule | None = None, clips: Sequence[float] = (1 - 2.0**-10, 1 - 2.0**-20, 1.0), rtol: float = 1e-3) -> HSResult:
    """``int_D |phi'|^2 / (1 - |phi|^2)^2 dA`` over a sequence of radial clips."""
    rule = QuadratureRule(node_count=64) if rule is None else rule
    F = _hyperbolic_integrand(phi)
    hist = [disk_integrate(F, dataclasses.replace(rule, radial_clip=c)) for c in clips]
    hist = [float(np.real(h)) for h in hist]
    change = abs(hist[-1] - hist[-2])
    if change > rtol * (1 + abs(hist[-1])):
        raise DivergenceError("HS integral appears divergent")
    return HSResult(hist[-1], change, True, hist)


def _graded_angles(breaks: Sequence[float], h0: float, order: int = 8):
    """Gauss nodes on ``[-pi, pi)`` graded geometrically toward each breakpoint."""
    xg, wg = gauss_legendre(order)
    if not breaks:
        n = max(64, int(math.ceil(TWO_PI / max(h0, 1e-3))))
        n = min(n, 4096)
        th = -math.pi + TWO_PI * (np.arange(n) + 0.5) / n
        return th, np.full(n, TWO_PI / n)
    b = sorted(set(float(np.angle(np.exp(1j * x))) for x in breaks))
    b = np.array(b + [b[0] + TWO_PI])
    edges = []
    for lo, hi in zip(b[:-1], b[1:]):
        L = hi - lo
        if L <= 0:
            continue
        pts = [lo]
        step = min(h0, L / 4)
        half = lo + L / 2
        x = lo
        left = []
        while x + step < half:
            x += step
            left.append(x)
            step *= 2
        right = [hi - (p - lo) for p in reversed(left)]
        pts += left + [half] + right + [hi]
        edges.append(np.array(pts))
    nodes, weights = [], []
    for e in edges:
        a, c = e[:-1], e[1:]
        mid, rad = (a + c) / 2, (c - a) / 2
        nodes.append((mid[:, None] + rad[:, None] * xg[None, :]).ravel())
        weights.append((rad[:, None] * wg[None, :]).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def hs_annuli(phi: Symbol, k_max: int, breakpoints: Sequence[float] = (), radial_order: int = 8, angular_order: int = 8) -> np.ndarray:
    """Contributions of the dyadic annuli ``k = 0..k_max`` to the hyperbolic-derivative integral.

    Annulus ``k`` spans ``1 - 2^-k <= |z| <= 1 - 2^-(k+1)`` (``k = 0`` is the
    disk of radius 1/2); angles are graded toward ``breakpoints`` down to
    scale ``2^-k``.
    """
    F = _hyperbolic_integrand(phi)
    # breakpoints closer than the finest angular scale act as one
    tiny = 2.0 ** -(k_max + 8)
    merged: list[float] = []
    for b in sorted(float(np.angle(np.exp(1j * x))) for x in breakpoints):
        if not merged or b - merged[-1] > tiny:
            merged.append(b)
    out = np.empty(k_max + 1)
    for k in range(k_max + 1):
        r0 = 0.0 if k == 0 else 1 - 2.0**-k
        r1 = 1 - 2.0 ** -(k + 1)
        xr, wr = gauss_legendre(radial_order, r0, r1)
        th, wt = _graded_angles(merged, 2.0 ** -(k + 2), angular_order)
        z = (xr[:, None] * np.exp(1j * th)[None, :]).ravel()
        vals = np.real(F(z)).reshape(xr.size, th.size)
        if not np.all(np.isfinite(vals)):
            raise DivergenceError("HS integral appears divergent")
        out[k] = float((wr * xr) @ vals @ wt) / math.pi
    return out


def hs_integral_graded(phi: Symbol, k_max: int, breakpoints: Sequence[float] = (), **kw) -> float:
    """Hyperbolic-derivative integral over ``|z| <= 1 - 2^-(k_max+1)``."""
    return float(np.sum(hs_annuli(phi, k_max, breakpoints, **kw)))


# ---------------------------------------------------------------------------
# Hastings-Luecking windows


def window_index(w):
    """Generation ``n`` and index ``j`` of the window containing each ``w``."""
    w = np.asarray(w, dtype=complex)
    r = np.abs(w)
    with np.errstate(divide="ignore"):
        n = np.floor(-np.log2(1 - r)).astype(int)
    th = np.mod(np.angle(w), TWO_PI)
    j = np.minimum(np.floor(th / TWO_PI * 2.0**n).astype(np.int64), (1 << np.minimum(n, 62)) - 1)
    return n, j


def _radii(n: int):
    return (0.0 if n == 0 else 1 - 2.0**-n), 1 - 2.0 ** -(n + 1)


def _wrap(lo: float, hi: float):
    """Split an interval of ``[-pi, pi]`` into pieces of ``[0, 2 pi)``."""
    if hi <= 0:
        return [(lo + TWO_PI, hi + TWO_PI)]
    if lo < 0:
        return [(lo + TWO_PI, TWO_PI), (0.0, hi)]
    return [(lo, hi)]


def _section_window_pieces(section, r: float, a: float, b: float):
    """Intersections of ``section(r)`` (angles in ``[-pi, pi]``) with ``[a, b) ⊂ [0, 2 pi)``."""
    out = []
    for lo, hi in section(r):
        for l, h in _wrap(lo, hi):
            l, h = max(l, a), min(h, b)
            if h > l:
                out.append((l, h))
    return out


def windows_meeting(region, n: int, n_radii: int = 65) -> list[int]:
    """Indices ``j`` of windows in generation ``n`` meeting the image, from its sections."""
    if region.section is None:
        return list(range(1 << n))
    r0, r1 = _radii(n)
    js = set()
    width = TWO_PI / 2**n
    for r in np.linspace(r0, r1, n_radii)[:-1]:
        for lo, hi in region.section(float(r)):
            for l, h in _wrap(lo, hi):
                if h <= l:
                    continue
                j0 = int(math.floor(l / width))
                j1 = int(math.ceil(h / width)) - 1
                js.update(range(max(j0, 0), min(j1, 2**n - 1) + 1))
    return sorted(js)


def _mass_quadrature(region, alpha: float, n: int, j: int, radial_panels: int = 8, order: int = 12) -> float:
    r0, r1 = _radii(n)
    a = TWO_PI * j / 2**n
    b = TWO_PI * (j + 1) / 2**n
    edges = np.linspace(r0, r1, radial_panels + 1)
    xg, wg = gauss_legendre(order)
    total = 0.0
    for e0, e1 in zip(edges[:-1], edges[1:]):
        rs = 0.5 * (e0 + e1) + 0.5 * (e1 - e0) * xg
        ws = 0.5 * (e1 - e0) * wg
        for r, wr in zip(rs, ws):
            pieces = _section_window_pieces(region.section, float(r), a, b)
            if not pieces:
                continue
            if alpha == 0:
                ang = sum(h - l for l, h in pieces)
            else:
                ang = 0.0
                for l, h in pieces:
                    th = 0.5 * (l + h) + 0.5 * (h - l) * xg
                    vals = region.inverse_weight(r * np.exp(1j * th), alpha)
                    ang += 0.5 * (h - l) * float(np.dot(wg, vals))
            total += wr * r * ang
    return total / math.pi


def _mass_comb(model, n: int, j: int, order: int = 8) -> float:
    r0, r1 = _radii(n)
    x_hi = math.inf if r0 == 0 else -math.log(r0)
    x_lo = -math.log(r1)
    a = TWO_PI * j / 2**n
    b = TWO_PI * (j + 1) / 2**n
    if math.isinf(x_hi):
        x_hi = 40.0
    return _comb_integral(model, x_lo, x_hi, a, b, order)


def _comb_integral(model, x_lo: float, x_hi: float, a: float, b: float, order: int = 8, fast_cycles: float = 64.0) -> float:
    """``(1/pi) int e^{-2x} int_a^b n(x, theta) d theta dx`` over ``[x_lo, x_hi]``.

    Log-spaced pieces; where ``g`` winds more than ``fast_cycles`` times
    inside a piece the overlap is replaced by its phase average ``h (b - a) / 2 pi``.
    """
    xg, wg = gauss_legendre(order)
    npieces = max(1, int(math.ceil(math.log2(x_hi / x_lo) * 4)))
    edges = np.geomspace(x_lo, x_hi, npieces + 1)
    total = 0.0
    for e0, e1 in zip(edges[:-1], edges[1:]):
        g0, g1 = float(model.g(np.array([e0]))[0]), float(model.g(np.array([e1]))[0])
        h0, h1 = float(model.h(np.array([e0]))[0]), float(model.h(np.array([e1]))[0])
        cycles = max(abs(g0 - g1), abs((g0 + h0) - (g1 + h1))) / TWO_PI
        if cycles > fast_cycles:
            sub = np.linspace(e0, e1, 9)
            xs = (0.5 * (sub[:-1] + sub[1:])[:, None] + 0.5 * np.diff(sub)[:, None] * xg).ravel()
            ws = (0.5 * np.diff(sub)[:, None] * wg).ravel()
            vals = model.h(xs) * (b - a) / TWO_PI
        else:
            m = max(1, int(math.ceil(cycles * 8)))
            sub = np.linspace(e0, e1, m + 1)
            xs = (0.5 * (sub[:-1] + sub[1:])[:, None] + 0.5 * np.diff(sub)[:, None] * xg).ravel()
            ws = (0.5 * np.diff(sub)[:, None] * wg).ravel()
            vals = model.angular_overlap(xs, a, b)
        total += float(np.dot(ws, np.exp(-2 * xs) * vals))
    return total / math.pi


def _disk_samples(rng, count: int, u_min: float = 2.0**-40):
    """Disk points with half the mass uniform in area and half log-uniform in depth."""
    k = count // 2
    t = rng.uniform(0, 1, k)
    r_a = np.sqrt(t)
    lu = rng.uniform(math.log(u_min), 0.0, count - k)
    r_b = 1 - np.exp(lu)
    r = np.concatenate([r_a, r_b])
    th = rng.uniform(0, TWO_PI, count)
    # density w.r.t. normalized area dA = r dr dtheta / pi
    u = 1 - r
    dens_b = 1.0 / (u * (-math.log(u_min))) / (2 * r)  # per unit area in dA: p(r)/(2r)
    dens = 0.5 * 1.0 + 0.5 * dens_b
    return r * np.exp(1j * th), dens


def _mass_mc_disk(phi: Symbol, alpha: float, n: int, j: int, samples: int, seed: int):
    rng = np.random.default_rng(seed)
    z, dens = _disk_samples(rng, samples)
    w = phi(z)
    nn, jj = window_index(w)
    hit = (nn == n) & (jj == j)
    vals = np.zeros(samples)
    if hit.any():
        zz = z[hit]
        vals[hit] = np.abs(phi.deriv(zz)) ** 2 * (1 - np.abs(zz) ** 2) ** alpha / dens[hit]
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))


def _mass_mc_image(region, alpha: float, n: int, j: int, samples: int, seed: int):
    """Uniform samples in the window; only the region's membership and inverse weight are used."""
    rng = np.random.default_rng(seed)
    r0, r1 = _radii(n)
    t = rng.uniform(r0 * r0, r1 * r1, samples)
    th = rng.uniform(TWO_PI * j / 2**n, TWO_PI * (j + 1) / 2**n, samples)
    w = np.sqrt(t) * np.exp(1j * th)
    area = window_area(n, 0.0) if n > 0 else (r1 * r1 - r0 * r0)
    inside = np.asarray(region.contains(w), dtype=bool)
    vals = np.zeros(samples)
    if inside.any():
        vals[inside] = 1.0 if alpha == 0 else region.inverse_weight(w[inside], alpha)
    vals *= area
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))


BACKENDS = ("exact", "quadrature", "comb", "mc-image", "mc-disk")


def _pick_backend(phi: Symbol, alpha: float) -> str:
    reg = phi.image_region
    if reg is not None:
        if alpha == 0 and reg.area_formula is not None:
            return "exact"
        if reg.weighted_area_formula is not None:
            return "exact"
        if reg.section is not None and (alpha == 0 or reg.inverse_weight is not None):
            return "quadrature"
    if phi.valence_model is not None and alpha == 0:
        return "comb"
    if phi.evaluable and phi.deriv_fn is not None:
        return "mc-disk"
    raise ValueError("symbol lacks evaluation and models")


def window_mass(phi: Symbol, alpha: float, n: int, j: int, samples: int = 20_000, seed: int = 0, backend: str | None = None):
    """``int_{R_{n,j}} N_{phi,alpha} dA`` as ``(mass, stderr, backend)``."""
    backend = backend or _pick_backend(phi, alpha)
    reg = phi.image_region
    if backend == "exact":
        if reg is None:
            raise ValueError("symbol lacks evaluation and models")
        if alpha == 0 and reg.area_formula is not None:
            return float(reg.area_formula(n, j)), 0.0, backend
        if reg.weighted_area_formula is None:
            raise ValueError("no closed form for this weight")
        return float(reg.weighted_area_formula(n, j, alpha)), 0.0, backend
    if backend == "quadrature":
        if reg is None or reg.section is None or (alpha != 0 and reg.inverse_weight is None):
            raise ValueError("symbol lacks evaluation and models")
        return _mass_quadrature(reg, alpha, n, j), 0.0, backend
    if backend == "comb":
        if phi.valence_model is None or alpha != 0:
            raise ValueError("symbol lacks evaluation and models")
        return _mass_comb(phi.valence_model, n, j), 0.0, backend
    if backend == "mc-image":
        if reg is None or (alpha != 0 and reg.inverse_weight is None):
            raise ValueError("symbol lacks evaluation and models")
        m, e = _mass_mc_image(reg, alpha, n, j, samples, seed)
        return m, e, backend
    if backend == "mc-disk":
        if not phi.evaluable or phi.deriv_fn is None:
            raise ValueError("symbol lacks evaluation and models")
        m, e = _mass_mc_disk(phi, alpha, n, j, samples, seed)
        return m, e, backend
    raise ValueError(f"unknown backend {backend!r}")


@dataclass
class WindowReport:
    alpha: float
    masses: dict  # (n, j) -> (mass, stderr, backend)
    partial_sums: dict = field(default_factory=dict)  # p -> float
    generation_totals: dict = field(default_factory=dict)  # p -> {n: total}
    verdicts: dict = field(default_factory=dict)  # p -> str
    diagnostics: dict = field(default_factory=dict)

    def generation_mass(self, n: int) -> float:
        return float(sum(m for (k, _), (m, _, _) in self.masses.items() if k == n))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "n", "j", "mass", "stderr", "backend"])
        for (n, j) in sorted(self.masses):
            m, e, b = self.masses[(n, j)]
            w.writerow([fmt(self.alpha), n, j, fmt(m), fmt(e), b])
        return buf.getvalue()


def window_masses(phi: Symbol, alpha: float, n_max: int, samples: int = 20_000, seed: int = 0, backend: str | None = None, n_min: int = 0) -> dict:
    """Masses of all windows meeting the image for generations ``n_min..n_max``."""
    backend = backend or _pick_backend(phi, alpha)
    out = {}
    if backend == "mc-disk":
        rng = np.random.default_rng(seed)
        z, dens = _disk_samples(rng, samples)
        w = phi(z)
        nn, jj = window_index(w)
        vals = np.abs(phi.deriv(z)) ** 2 * (1 - np.abs(z) ** 2) ** alpha / dens
        for n in range(n_min, n_max + 1):
            sel = nn == n
            for j in np.unique(jj[sel]):
                v = np.where(sel & (jj == j), vals, 0.0)
                out[(n, int(j))] = (float(v.mean()), float(v.std(ddof=1) / math.sqrt(samples)), backend)
        return out
    reg = phi.image_region
    for n in range(n_min, n_max + 1):
        js = windows_meeting(reg, n) if reg is not None else range(1 << n)
        for j in js:
            seed_nj = (seed, n, int(j))
            m, e, b = window_mass(phi, alpha, n, int(j), samples, int(np.random.SeedSequence(seed_nj).generate_state(1)[0]), backend)
            if m > 0 or e > 0:
                out[(n, int(j))] = (m, e, b)
    return out


def _verdict(totals: dict, n_max: int) -> tuple[str, dict]:
    """Generation-ratio test with a mandatory inconclusive band, refined by a tail-exponent fit."""
    ns = sorted(k for k in totals if totals[k] > 0)
    diag = {"ratio": math.nan, "exponent": math.nan}
    if len(ns) < 4:
        return "inconclusive", diag
    last, prev = ns[-1], ns[-2]
    ratio = totals[last] / totals[prev]
    half = [k for k in ns if k >= max(1, n_max // 2)]
    x = np.log(np.array(half) + 1.0)
    y = np.log(np.array([totals[k] for k in half]))
    slope = float(np.polyfit(x, y, 1)[0]) if len(half) >= 3 else math.nan
    diag = {"ratio": float(ratio), "exponent": slope}
    if ratio < 0.95:
        return "converging", diag
    if ratio > 1.05:
        return "diverging", diag
    # inside the band: a tail no faster than harmonic cannot be summable
    if slope >= -1.05:
        return "diverging", diag
    if slope < -1.25:
        return "converging", diag
    return "inconclusive", diag


def schatten_sum(phi: Symbol, alpha: float, p, n_max: int, samples: int = 20_000, seed: int = 0, backend: str | None = None, masses: dict | None = None) -> WindowReport:
    """Partial Schatten sums ``sum_{n,j} [2^{n(alpha+2)} mass]^{p/2}`` with verdicts."""
    ps = [float(p)] if np.isscalar(p) else [float(x) for x in p]
    if any(q <= 0 for q in ps):
        raise ValueError("p must be positive")
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    if masses is None:
        masses = window_masses(phi, alpha, n_max, samples, seed, backend)
    rep = WindowReport(float(alpha), masses)
    for q in ps:
        gen: dict[int, float] = {n: 0.0 for n in range(n_max + 1)}
        for (n, j), (m, e, b) in masses.items():
            if m < 0:
                raise ValueError("negative mass")
            gen[n] += (2.0 ** (n * (alpha + 2)) * m) ** (q / 2)
        rep.generation_totals[q] = gen
        rep.partial_sums[q] = float(sum(gen.values()))
        rep.verdicts[q], rep.diagnostics[q] = _verdict(gen, n_max)
    return rep


def schwarz_window_comparison(report_a: WindowReport, report_b: WindowReport, n: int | None = None) -> bool:
    """``mass_b <= (2^{1-n})^{b-a} mass_a (1 + 3 sigma)`` on every common window."""
    da = report_b.alpha - report_a.alpha
    if da < 0:
        raise ValueError("need beta >= alpha")
    keys = [k for k in report_b.masses if n is None or k[0] == n]
    for key in keys:
        mb, eb, _ = report_b.masses[key]
        ma, ea, _ = report_a.masses.get(key, (0.0, 0.0, ""))
        bound = (2.0 ** (1 - key[0])) ** da * ma
        sigma = math.hypot(ea / ma if ma > 0 else 0.0, eb / mb if mb > 0 else 0.0)
        if mb > bound * (1 + 3 * sigma) + 1e-300:
            raise AssertionError(f"Schwarz comparison failed at window {key}")
    return True


# ---------------------------------------------------------------------------
# Carleson windows


def carleson_window_area(h: float) -> float:
    """``A[W(xi, h)] = h^2 (2 - h)``."""
    return h * h * (2 - h)


def zorboska_average(phi: Symbol, xi: complex = 1.0, h: float = 0.1, x_floor: float = 1e-12) -> float:
    """Mean of ``n_phi`` over ``W(xi, h) = {1 - |w| <= h, |arg(w / xi)| <= pi h}``.

    For counting models the depth is truncated at ``1 - |w| >= x_floor``
    (as ``-log|w| >= x_floor``) and normalized by the truncated area.
    """
    if not 0 < h < 2:
        raise ValueError("h must lie in (0, 2)")
    c = math.atan2(complex(xi).imag, complex(xi).real)
    half = math.pi * min(h, 1.0)
    a, b = c - half, c + half
    if phi.valence_model is not None:
        x_hi = -math.log(1 - h) if h < 1 else 40.0
        if x_hi <= x_floor:
            raise ValueError("window thinner than the depth floor")
        mass = _comb_integral(phi.valence_model, x_floor, x_hi, a, b)
        area = (b - a) * (math.exp(-2 * x_floor) - math.exp(-2 * x_hi)) / (2 * math.pi)
        return mass / area
    reg = phi.image_region
    if reg is not None and reg.section is not None and phi.univalent:
        r0 = max(0.0, 1 - h)
        xg, wg = gauss_legendre(16)
        edges = np.linspace(r0, 1.0, 17)
        tot = 0.0
        for e0, e1 in zip(edges[:-1], edges[1:]):
            for x, wx in zip(0.5 * (e0 + e1) + 0.5 * (e1 - e0) * xg, 0.5 * (e1 - e0) * wg):
                ang = 0.0
                for lo, hi in reg.section(float(x)):
                    for s in (-TWO_PI, 0.0, TWO_PI):
                        ang += max(0.0, min(hi + s, b) - max(lo + s, a))
                tot += wx * x * ang
        area = (b - a) * (1 - r0 * r0) / TWO_PI
        return tot / math.pi / area
    raise ValueError("symbol lacks evaluation and models")


def compactness_ratio(phi: Symbol, a) -> float:
    """``log(1/(1 - |phi(a)|^2)) / log(1/(1 - |a|^2))``."""
    a = complex(a)
    if not 0 < abs(a) < 1:
        raise ValueError("need 0 < |a| < 1")
    num = -math.log(float(np.real(phi.one_minus_abs2(np.array([a]))[0])))
    return num / -math.log1p(-abs(a) ** 2)


def compactness_sweep(phi: Symbol, radii: Iterable[float] = (0.9, 0.99, 0.999), n_angles: int = 256) -> list[dict]:
    """``sup_{|a| = r}`` of the compactness ratio for each radius."""
    out = []
    th = TWO_PI * np.arange(n_angles) / n_angles + 1e-9
    for r in radii:
        a = r * np.exp(1j * th)
        om = np.real(phi.one_minus_abs2(a))
        vals = -np.log(om) / -math.log1p(-r * r)
        k = int(np.argmax(vals))
        out.append({"r": float(r), "sup": float(vals[k]), "angle": float(th[k])})
    return out
