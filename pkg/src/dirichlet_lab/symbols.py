"""Schur functions used as composition symbols.

A :class:`Symbol` bundles a pointwise evaluator with its derivative and,
when available, geometric side information: a :class:`RegionModel` for the
image of a univalent map, or a :class:`CountingModel` giving the valence
``n_phi`` of a comb-type symbol without building the map itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

TWO_PI = 2 * math.pi

Intervals = list[tuple[float, float]]


class ProfileError(ValueError):
    pass


def _as_complex(z):
    return np.asarray(z, dtype=complex)


@dataclass
class RegionModel:
    """Image domain ``Omega`` of a univalent symbol.

    ``section(r)`` lists the angular intervals (within ``[-pi, pi]``) of
    ``Omega`` on the circle ``|w| = r``.  ``inverse_weight(w, alpha)`` is
    ``(1 - |phi^{-1}(w)|^2)**alpha``, which turns image-side integrals into
    masses of the weighted counting function.
    """

    contains: Callable[[np.ndarray], np.ndarray]
    area_formula: Callable[[int, int], float] | None = None
    section: Callable[[float], Intervals] | None = None
    inverse: Callable[[np.ndarray], np.ndarray] | None = None
    inverse_weight: Callable[[np.ndarray, float], np.ndarray] | None = None
    weighted_area_formula: Callable[[int, int, float], float] | None = None
    name: str = "region"


@dataclass
class CountingModel:
    """Valence of ``phi = exp(-f)`` where ``f`` maps onto ``{g(x) < y < g(x) + h(x)}``.

    ``n_phi(exp(-x) e^{i theta})`` is the number of ``y`` in ``(g(x), g(x)+h(x))``
    with ``y = -theta (mod 2 pi)``.
    """

    g: Callable[[np.ndarray], np.ndarray]
    h: Callable[[np.ndarray], np.ndarray]
    name: str = "comb"

    def count(self, x, theta):
        x = np.asarray(x, dtype=float)
        theta = np.asarray(theta, dtype=float)
        g = self.g(x)
        h = self.h(x)
        y = np.mod(-theta - g, TWO_PI)  # first lattice point above g, minus g
        # lattice points y + 2 pi k in (0, h) with y in [0, 2 pi)
        inside = np.where(y > 0, np.ceil((h - y) / TWO_PI), np.ceil(h / TWO_PI) - 1)
        return np.maximum(inside, 0).astype(int)

    def angular_overlap(self, x, a: float, b: float):
        """``int_a^b n_phi(e^{-x} e^{i theta}) d theta`` in closed form."""
        x = np.asarray(x, dtype=float)
        g = np.asarray(self.g(x), dtype=float)
        h = np.asarray(self.h(x), dtype=float)
        # reflect theta -> y = -theta, interval (-b, -a)
        lo, hi = -b, -a
        q, h0 = np.divmod(h, TWO_PI)
        g0 = np.mod(g, TWO_PI)

        def F(u):
            # int_0^u floor(s / 2 pi) ds
            m = np.floor(u / TWO_PI)
            return TWO_PI * m * (m - 1) / 2 + m * (u - TWO_PI * m)

        def floor_int(c):
            return F(hi - c) - F(lo - c)

        return q * (hi - lo) + floor_int(g0) - floor_int(g0 + h0)


@dataclass
class Symbol:
    """An analytic self-map of the disk and what is known about it."""

    eval_fn: Callable[[np.ndarray], np.ndarray] | None
    deriv_fn: Callable[[np.ndarray], np.ndarray] | None = None
    fixes_origin: bool = False
    valence_model: CountingModel | None = None
    image_region: RegionModel | None = None
    name: str = "symbol"
    params: dict = field(default_factory=dict)
    one_minus_abs2_fn: Callable[[np.ndarray], np.ndarray] | None = None
    hyperbolic_fn: Callable[[np.ndarray], np.ndarray] | None = None
    univalent: bool = False

    @property
    def evaluable(self) -> bool:
        return self.eval_fn is not None

    def __call__(self, z):
        if self.eval_fn is None:
            raise ValueError("symbol not evaluable")
        return self.eval_fn(_as_complex(z))

    def deriv(self, z):
        if self.deriv_fn is None:
            raise ValueError("symbol derivative not available")
        return self.deriv_fn(_as_complex(z))

    def one_minus_abs2(self, z):
        """``1 - |phi(z)|^2``, computed without cancellation when possible."""
        if self.one_minus_abs2_fn is not None:
            return self.one_minus_abs2_fn(_as_complex(z))
        return 1 - np.abs(self(z)) ** 2

    def hyperbolic_derivative(self, z):
        """``|phi'(z)|^2 / (1 - |phi(z)|^2)^2``."""
        if self.hyperbolic_fn is not None:
            return self.hyperbolic_fn(_as_complex(z))
        return np.abs(self.deriv(z)) ** 2 / self.one_minus_abs2(z) ** 2


def polar_grid(n: int = 10_000, r_max: float = 0.999) -> np.ndarray:
    """Roughly ``n`` disk points on concentric circles, denser near the boundary."""
    nr = max(2, int(math.sqrt(n) / 2))
    na = max(4, n // nr)
    r = 1 - (1 - r_max) ** (np.arange(1, nr + 1) / nr)
    th = TWO_PI * (np.arange(na) + 0.5) / na
    return (r[:, None] * np.exp(1j * th)[None, :]).ravel()


# ---------------------------------------------------------------------------
# elementary symbols


def _disk_region() -> RegionModel:
    def area(n, j):
        return window_area(n, 0.0)

    def weighted(n, j, alpha):
        return window_area(n, alpha)

    return RegionModel(
        contains=lambda w: np.abs(w) < 1,
        area_formula=area,
        section=lambda r: [(-math.pi, math.pi)] if r < 1 else [],
        inverse=lambda w: w,
        inverse_weight=lambda w, alpha: (1 - np.abs(w) ** 2) ** alpha,
        weighted_area_formula=weighted,
        name="disk",
    )


def window_area(n: int, alpha: float = 0.0) -> float:
    """``int_{R_{n,j}} (1 - |w|^2)^alpha dA`` for one Hastings-Luecking window."""
    t0 = (1 - 2.0**-n) ** 2
    t1 = (1 - 2.0 ** -(n + 1)) ** 2
    width = 2.0**-n  # angular width / (2 pi)
    if alpha == 0:
        return width * (t1 - t0)
    return width * ((1 - t0) ** (alpha + 1) - (1 - t1) ** (alpha + 1)) / (alpha + 1)


def identity() -> Symbol:
    return Symbol(
        lambda z: z,
        lambda z: np.ones_like(z),
        True,
        image_region=_disk_region(),
        name="identity",
        one_minus_abs2_fn=lambda z: 1 - np.abs(z) ** 2,
        univalent=True,
    )


def power_map(k: int) -> Symbol:
    if k < 1:
        raise ValueError("power must be >= 1")
    if k == 1:
        return identity()
    return Symbol(
        lambda z: z**k,
        lambda z: k * z ** (k - 1),
        True,
        name=f"z^{k}",
        params={"k": k},
    )


def scaled(c: complex, k: int = 1) -> Symbol:
    """``z -> c z**k`` with ``|c| < 1``."""
    if abs(c) >= 1:
        raise ValueError("scale factor must have modulus < 1")
    return Symbol(
        lambda z: c * z**k,
        lambda z: c * k * z ** (k - 1),
        True,
        name=f"{c}*z^{k}",
        params={"c": c, "k": k},
    )


def constant(c: complex) -> Symbol:
    if abs(c) >= 1:
        raise ValueError("constant must lie in the disk")
    return Symbol(lambda z: np.full(np.shape(z), c, dtype=complex), lambda z: np.zeros(np.shape(z), dtype=complex), c == 0, name="constant")


def mobius_shift(a: complex) -> Symbol:
    """``phi_a(z) = (z - a)/(1 - conj(a) z)``."""
    a = complex(a)
    if abs(a) >= 1:
        raise ValueError("shift point outside disk")
    ac = a.conjugate()
    s = 1 - abs(a) ** 2

    def f(z):
        return (z - a) / (1 - ac * z)

    def df(z):
        return s / (1 - ac * z) ** 2

    def om(z):
        return s * (1 - np.abs(z) ** 2) / np.abs(1 - ac * z) ** 2

    return Symbol(f, df, a == 0, name="mobius", params={"a": a}, one_minus_abs2_fn=om, univalent=True)


# ---------------------------------------------------------------------------
# cusp map

CUSP_A = 1 - (2 / math.pi) * math.log(math.sqrt(2) - 1)
_CUSP_SINGULAR = (1 + 0j, 1j, -1j)
_CUSP_LIMITS = {
    1 + 0j: 1 + 0j,
    1j: 1 - CUSP_A / (1 + 1j),
    -1j: 1 - CUSP_A / (1 - 1j),
}


def _cusp_chain(z):
    """Intermediate values ``(s, chi0, chi2, chi3)``."""
    w = (z - 1j) / (1j * z - 1)
    # Im w > 0 on the disk; on the circle take the limit from inside
    w = w.real + 1j * np.abs(w.imag)
    s = np.sqrt(w)
    chi0 = (s - 1j) / (1 - 1j * s)
    chi2 = -(2 / math.pi) * np.log(chi0) + 1
    chi3 = CUSP_A / chi2
    return w, s, chi0, chi2, chi3


def _check_cusp_domain(z):
    for p in _CUSP_SINGULAR:
        if np.any(np.abs(z - p) < 1e-15):
            raise ValueError("boundary singularity")


def cusp_eval(z):
    z = _as_complex(z)
    _check_cusp_domain(z)
    return 1 - _cusp_chain(z)[4]


def cusp_deriv(z):
    z = _as_complex(z)
    _check_cusp_domain(z)
    w, s, chi0, chi2, _ = _cusp_chain(z)
    dw = -2 / (1j * z - 1) ** 2
    ds = dw / (2 * s)
    dchi0 = 2 / (1 - 1j * s) ** 2 * ds
    dchi2 = -(2 / math.pi) * dchi0 / chi0
    return CUSP_A * dchi2 / chi2**2


def cusp_one_minus_abs2(z):
    z = _as_complex(z)
    _check_cusp_domain(z)
    chi3 = _cusp_chain(z)[4]
    # 1 - |1 - chi3|^2
    return 2 * chi3.real - np.abs(chi3) ** 2


def cusp_inverse(w):
    """Preimage ``chi^{-1}(w)`` for ``w`` in the image domain."""
    w = _as_complex(w)
    s = _cusp_inverse_s(w)
    wp = s * s
    return (wp - 1j) / (1j * wp - 1)


def _cusp_inverse_s(w):
    chi3 = 1 - w
    chi2 = CUSP_A / chi3
    chi1 = -(math.pi / 2) * (chi2 - 1)
    chi0 = np.exp(chi1)
    # s = (chi0 + i)/(1 + i chi0) = i + 2 chi0 / (1 + i chi0)
    return 1j + 2 * chi0 / (1 + 1j * chi0)


def cusp_inverse_log_weight(w):
    """``log(1 - |chi^{-1}(w)|^2)``, accurate even when the preimage is within e^-700 of the circle."""
    w = _as_complex(w)
    chi3 = 1 - w
    chi2 = CUSP_A / chi3
    chi1 = -(math.pi / 2) * (chi2 - 1)
    chi0 = np.exp(chi1)
    # Re s = e^{Re chi1} Re(2 e^{i Im chi1} / (1 + i chi0))
    with np.errstate(divide="ignore"):
        log_re_s = chi1.real + np.log(np.real(2 * np.exp(1j * chi1.imag) / (1 + 1j * chi0)))
    s = 1j + 2 * chi0 / (1 + 1j * chi0)
    wp = s * s
    # 1 - |z|^2 = 4 Im(s^2) / |i s^2 - 1|^2, Im(s^2) = 2 Re s Im s
    return math.log(8.0) + log_re_s + np.log(s.imag) - 2 * np.log(np.abs(1j * wp - 1))


def cusp_contains(w):
    u = 1 - _as_complex(w)
    half = CUSP_A / 2
    return (np.abs(u - half) < half) & (np.abs(u - 1j * half) > half) & (np.abs(u + 1j * half) > half)


def cusp_half_width(r: float) -> float:
    """Half-angle of the cusp of the image domain on ``|w| = r`` near ``w = 1``."""
    a = CUSP_A
    rhs = (1 - r) ** 2 / (2 * r)
    s = 2 * rhs / a
    for _ in range(60):
        f = 0.5 * a * math.sin(s) - 2 * math.sin(s / 2) ** 2 - rhs
        df = 0.5 * a * math.cos(s) - math.sin(s)
        step = f / df
        s -= step
        if abs(step) <= 1e-17 * max(s, 1e-300):
            break
    return s


def cusp_section(r: float) -> Intervals:
    """Angular section of the cusp image on the circle ``|w| = r``."""
    a = CUSP_A
    c1 = 1 - a / 2
    if r <= 0 or r >= 1:
        return []
    one_m_A = (1 - r) * (a - (1 - r)) / (2 * r * c1)
    if one_m_A <= 0:
        return []
    t1 = math.pi if one_m_A >= 2 else 2 * math.asin(math.sqrt(one_m_A / 2))
    B = (1 + r * r) / (2 * r)
    R = math.sqrt(1 + a * a / 4)
    if B >= R:
        pos = [(0.0, t1)]
    else:
        theta0 = math.atan(a / 2)
        gamma = math.acos(B / R)
        s = cusp_half_width(r)
        pos = [(0.0, min(s, t1))]
        if theta0 + gamma < t1:
            pos.append((theta0 + gamma, t1))
    out: Intervals = []
    for lo, hi in pos:
        if hi > lo:
            out.append((-hi, -lo) if lo > 0 else (-hi, hi))
            if lo > 0:
                out.append((lo, hi))
    return sorted(out)


def cusp_boundary(n: int = 100_000, x_max: float = 1e6) -> np.ndarray:
    """Sample points on the boundary of the cusp image.

    The boundary is the image of the half-strip edges ``{x +- i : x >= 1}`` and
    ``{1 + i y : |y| <= 1}`` under ``chi2 -> 1 - a/chi2``.
    """
    m = n // 3
    x = np.geomspace(1.0, x_max, m)
    y = np.linspace(-1.0, 1.0, n - 2 * m)
    chi2 = np.concatenate([x + 1j, x - 1j, 1 + 1j * y])
    return 1 - CUSP_A / chi2


def cusp_radial_limit(zeta: complex) -> complex:
    zeta = complex(zeta)
    for p, v in _CUSP_LIMITS.items():
        if abs(zeta - p) < 1e-15:
            return v
    return complex(1 - _cusp_chain(np.array([zeta]))[4][0])


def _cusp_inverse_weight(w, alpha):
    if alpha == 0:
        return np.ones(np.shape(w))
    return np.exp(alpha * cusp_inverse_log_weight(w))


def cusp_map() -> Symbol:
    """The cusp map, univalent with ``chi(0) = 0`` and a cusp at ``chi(1) = 1``."""
    region = RegionModel(
        contains=cusp_contains,
        section=cusp_section,
        inverse=cusp_inverse,
        inverse_weight=_cusp_inverse_weight,
        name="cusp",
    )
    return Symbol(
        cusp_eval,
        cusp_deriv,
        True,
        image_region=region,
        name="cusp",
        params={"a": CUSP_A},
        one_minus_abs2_fn=cusp_one_minus_abs2,
        univalent=True,
    )


# ---------------------------------------------------------------------------
# exp(-1/f)


def exp_reciprocal(
    f: Callable[[np.ndarray], np.ndarray],
    fprime: Callable[[np.ndarray], np.ndarray],
    grid: np.ndarray | None = None,
    tol: float = 1e-9,
) -> tuple[Symbol, Symbol]:
    """``sigma0 = exp(-1/f)`` and ``sigma = phi_a o sigma0`` with ``a = exp(-1/f(0))``.

    Requires ``Re f >= 1`` (checked on ``grid``).  The hyperbolic derivative
    of both maps is evaluated in the cancellation-free form
    ``|f'|^2 |sigma0|^2 / (|f|^4 (1 - exp(-2 Re(1/f)))^2)``.
    """
    if grid is None:
        grid = polar_grid()
    vals = np.asarray(f(grid), dtype=complex)
    if np.any(~np.isfinite(vals)) or np.min(vals.real) < 1 - tol:
        raise ValueError("Re f < 1 on the sample grid")
    f0 = complex(np.asarray(f(np.array([0j])))[0])
    a = np.exp(-1 / f0)

    def s0(z):
        return np.exp(-1 / f(z))

    def ds0(z):
        fz = f(z)
        return np.exp(-1 / fz) * fprime(z) / fz**2

    def om0(z):
        return -np.expm1(-2 * np.real(1 / f(z)))

    def hyp(z):
        fz = f(z)
        u = np.real(1 / fz)
        return np.abs(fprime(z)) ** 2 * np.exp(-2 * u) / (np.abs(fz) ** 4 * np.expm1(-2 * u) ** 2)

    sigma0 = Symbol(s0, ds0, False, name="exp(-1/f)", one_minus_abs2_fn=om0, hyperbolic_fn=hyp)
    phi_a = mobius_shift(a)

    def sig(z):
        return phi_a(s0(z))

    def dsig(z):
        return phi_a.deriv(s0(z)) * ds0(z)

    def om(z):
        v = s0(z)
        ac = np.conj(a)
        return (1 - abs(a) ** 2) * om0(z) / np.abs(1 - ac * v) ** 2

    sigma = Symbol(sig, dsig, True, name="phi_a o exp(-1/f)", params={"a": a}, one_minus_abs2_fn=om, hyperbolic_fn=hyp)
    return sigma0, sigma


# ---------------------------------------------------------------------------
# comb symbols


def _profile(spec, kind: str) -> Callable[[np.ndarray], np.ndarray]:
    if callable(spec):
        return spec
    if isinstance(spec, str):
        presets = {
            "one_over_t": lambda t: 1.0 / np.asarray(t, dtype=float),
            "const_2pi": lambda t: np.full(np.shape(t), TWO_PI),
            "const_4pi": lambda t: np.full(np.shape(t), 2 * TWO_PI),
        }
        if spec not in presets:
            raise ProfileError(f"unknown {kind} profile {spec!r}")
        return presets[spec]
    if isinstance(spec, dict):
        t = np.asarray(spec["t"], dtype=float)
        v = np.asarray(spec["values"], dtype=float)
        if t.size < 2 or np.any(np.diff(t) <= 0):
            raise ProfileError("invalid profile")
        return lambda x: np.interp(np.asarray(x, dtype=float), t, v)
    if isinstance(spec, (int, float)):
        c = float(spec)
        return lambda t: np.full(np.shape(t), c)
    raise ProfileError("invalid profile")


def comb_symbol(g="one_over_t", h="one_over_t") -> Symbol:
    """Counting-model symbol ``exp(-f)`` for the comb domain with profiles ``g`` and ``h``."""
    gf = _profile(g, "g")
    hf = _profile(h, "h")
    t = np.geomspace(1e-6, 1e6, 2001)
    gv = gf(t)
    hv = hf(t)
    if np.any(np.diff(gv) > 0) or np.any(gv <= 0):
        raise ProfileError("invalid profile")
    if np.any(hv <= 0):
        raise ProfileError("invalid profile")
    model = CountingModel(gf, hf, name=f"comb({g},{h})" if isinstance(g, str) and isinstance(h, str) else "comb")
    univalent = bool(np.all(hf(t) <= TWO_PI))
    return Symbol(None, None, False, valence_model=model, name=model.name, univalent=univalent)


# ---------------------------------------------------------------------------
# separation comb


def separation_profile(kind: str = "inverse_power", p1: float = 2.0) -> Callable[[int], float]:
    """``h_n = (n+1)^(-2/p1)`` or ``h_n = 1/ln(n+2)``."""
    if kind == "inverse_power":
        return lambda n: (n + 1.0) ** (-2.0 / p1)
    if kind == "inverse_log":
        return lambda n: 1.0 / math.log(n + 2.0)
    raise ProfileError(f"unknown separation profile {kind!r}")


def separation_region(h_seq) -> RegionModel:
    """Comb of curvilinear rectangles ``1 - 2^-n <= |w| < 1 - 2^-(n+1)``, ``0 <= arg w < 2^-n h_n``, joined with ``D(0, 1/8)``."""
    if isinstance(h_seq, (list, tuple, np.ndarray)):
        seq = [float(x) for x in h_seq]
        hn = lambda n: seq[n] if n < len(seq) else seq[-1]
    else:
        hn = h_seq
    for n in range(8):
        # the tooth must fit in its window: 2^-n h_n < 2 pi 2^-n
        if not 0 < hn(n) < TWO_PI:
            raise ValueError("h_n must lie in (0, 2 pi)")

    def gen_of(r):
        with np.errstate(divide="ignore"):
            n = np.floor(-np.log2(1 - np.asarray(r)))
        return n.astype(int)

    def contains(w):
        w = _as_complex(w)
        r = np.abs(w)
        th = np.mod(np.angle(w), TWO_PI)
        out = r < 0.125
        ok = (r < 1) & ~out
        if ok.any():
            n = gen_of(r[ok])
            widths = np.array([2.0**-k * hn(int(k)) for k in n])
            out[np.nonzero(ok)[0]] = th[ok] < widths
        return out

    def area(n, j):
        if j != 0:
            return 0.0
        hw = hn(n)
        if n == 0:
            return 1 / 64 + (hw / TWO_PI) * (1 / 4 - 1 / 64)
        return (4.0**-n * hw / TWO_PI) * (1 - 3 * 2.0**-n / 4)

    def weighted(n, j, alpha):
        # A_alpha without the (alpha+1) factor: int (1-|w|^2)^alpha dA
        if j != 0:
            return 0.0
        if alpha == 0:
            return area(n, j)

        def band(t0, t1):
            return ((1 - t0) ** (alpha + 1) - (1 - t1) ** (alpha + 1)) / (alpha + 1)

        t0 = (1 - 2.0**-n) ** 2
        t1 = (1 - 2.0 ** -(n + 1)) ** 2
        frac = 2.0**-n * hn(n) / TWO_PI
        if n == 0:
            return band(0, 1 / 64) + frac * band(1 / 64, t1)
        return frac * band(t0, t1)

    def section(r):
        if r < 0.125:
            return [(-math.pi, math.pi)]
        if r >= 1:
            return []
        n = int(gen_of(r))
        return [(0.0, 2.0**-n * hn(n))]

    return RegionModel(
        contains=contains,
        area_formula=area,
        section=section,
        weighted_area_formula=weighted,
        name="separation",
    )


def separation_symbol(h_seq) -> Symbol:
    region = separation_region(h_seq)
    return Symbol(None, None, True, image_region=region, name="separation", univalent=True)


# ---------------------------------------------------------------------------
# composition


def compose(outer: Symbol, inner: Symbol) -> Symbol:
    """``outer o inner`` with chain-rule derivative."""
    if not outer.evaluable:
        raise ValueError("outer symbol not evaluable")
    if not inner.evaluable:
        raise ValueError("inner symbol not evaluable")

    def f(z):
        return outer(inner(z))

    def df(z):
        return outer.deriv(inner(z)) * inner.deriv(z)

    def om(z):
        return outer.one_minus_abs2(inner(z))

    def hyp(z):
        return outer.hyperbolic_derivative(inner(z)) * np.abs(inner.deriv(z)) ** 2

    return Symbol(
        f,
        df,
        outer.fixes_origin and inner.fixes_origin,
        name=f"{outer.name} o {inner.name}",
        one_minus_abs2_fn=om,
        hyperbolic_fn=hyp,
        univalent=outer.univalent and inner.univalent,
    )


def check_self_map(phi: Symbol, grid: np.ndarray | None = None) -> dict:
    """Sampled checks ``|phi| < 1`` and, for origin-fixing maps, ``|phi(z)| <= |z|``."""
    if grid is None:
        grid = polar_grid()
    v = np.abs(phi(grid))
    out = {"sup_modulus": float(v.max()), "self_map": bool(np.all(v < 1))}
    if phi.fixes_origin:
        out["schwarz_excess"] = float(np.max(v - np.abs(grid)))
    return out


def symbol_from_descriptor(desc: dict) -> Symbol:
    """Build a symbol from a config record ``{"kind": ..., params}``."""
    kind = desc.get("kind")
    if kind == "identity":
        return identity()
    if kind == "power":
        return power_map(int(desc.get("k", 2)))
    if kind == "scaled":
        return scaled(complex(desc.get("c", 0.5)), int(desc.get("k", 1)))
    if kind == "mobius":
        a = desc.get("a", 0.0)
        return mobius_shift(complex(*a) if isinstance(a, (list, tuple)) else complex(a))
    if kind == "cusp":
        return cusp_map()
    if kind == "comb":
        return comb_symbol(desc.get("g", "one_over_t"), desc.get("h", "one_over_t"))
    if kind == "separation":
        if "h" in desc:
            return separation_symbol(list(desc["h"]))
        return separation_symbol(separation_profile(desc.get("profile", "inverse_power"), float(desc.get("p1", 2.0))))
    if kind == "compose":
        return compose(symbol_from_descriptor(desc["outer"]), symbol_from_descriptor(desc["inner"]))
    raise ValueError(f"unknown symbol kind {kind!r}")
