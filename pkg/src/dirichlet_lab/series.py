"""Truncated power series, disk quadrature and weighted Dirichlet norms.

Coefficients are always obtained from samples on a circle of radius
``rho < 1`` followed by one FFT, never by symbolic manipulation.  The area
measure is normalized, ``A(D) = 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import betaln

__all__ = [
    "TaylorSeries",
    "QuadratureRule",
    "EvaluationError",
    "series_from_samples",
    "series_power",
    "monomial_weight",
    "dirichlet_norm_sq",
    "disk_integrate",
    "annulus_integrate",
    "reproducing_kernel",
    "gauss_legendre",
]


class EvaluationError(ValueError):
    """Raised when a pointwise evaluator returns a non-finite value."""


@lru_cache(maxsize=64)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to ``[a, b]``."""
    x, w = _leggauss(int(n))
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


@dataclass
class TaylorSeries:
    """Taylor coefficients ``c_0..c_N`` at the origin.

    ``samples`` keeps the circle samples the coefficients came from, so that
    powers can be formed pointwise instead of by repeated convolution.
    """

    coeffs: np.ndarray
    sample_radius: float
    tail_estimate: float = 0.0
    samples: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 1 or self.coeffs.size < 1:
            raise ValueError("coeffs must be a non-empty 1-D array")
        if not self.tail_estimate >= 0:
            raise ValueError("tail_estimate must be >= 0")

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        # Horner, coefficients highest first
        return np.polyval(self.coeffs[::-1], np.asarray(z, dtype=complex))

    def derivative_coeffs(self) -> np.ndarray:
        n = np.arange(1, self.coeffs.size)
        return self.coeffs[1:] * n

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "sample_radius": self.sample_radius,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
            "tail_estimate": self.tail_estimate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "TaylorSeries":
        coeffs = np.array([complex(re, im) for re, im in data["coeffs"]])
        if coeffs.size != int(data["order"]) + 1:
            raise ValueError("order does not match number of coefficients")
        return cls(coeffs, float(data["sample_radius"]), float(data["tail_estimate"]))

    @classmethod
    def from_json(cls, text: str) -> "TaylorSeries":
        return cls.from_dict(json.loads(text))


def _circle(rho: float, m: int) -> np.ndarray:
    return rho * np.exp(2j * np.pi * np.arange(m) / m)


def _default_sample_count(n: int) -> int:
    return 1 << max(4, math.ceil(math.log2(4 * (n + 1))))


def _coeffs_from_circle_values(values: np.ndarray, rho: float, n: int) -> tuple[np.ndarray, float]:
    m = values.size
    raw = np.fft.fft(values) / m
    k = np.arange(n + 1)
    # rho**-k computed in log form so large N does not overflow
    coeffs = raw[: n + 1] * np.exp(-k * math.log(rho))
    beyond = np.abs(raw[n + 1 :])
    tail = float(beyond.max()) * math.exp(-n * math.log(rho)) if beyond.size else 0.0
    return coeffs, tail


def series_from_samples(
    f: Callable[[np.ndarray], np.ndarray], rho: float, n: int, m: int | None = None
) -> TaylorSeries:
    """Taylor coefficients of ``f`` up to degree ``n`` from ``m`` circle samples.

    ``tail_estimate`` is the largest DFT bin above degree ``n`` rescaled by
    ``rho**-n``; it is an aliasing diagnostic, not a bound.
    """
    if not 0 < rho < 1:
        raise ValueError("radius out of range")
    if m is None:
        m = _default_sample_count(n)
    if m < 2 * (n + 1):
        raise ValueError("need at least 2(N+1) samples")
    z = _circle(rho, m)
    values = np.asarray(f(z), dtype=complex)
    bad = ~np.isfinite(values)
    if bad.any():
        raise EvaluationError(f"evaluation failure at node {z[np.argmax(bad)]!r}")
    coeffs, tail = _coeffs_from_circle_values(values, rho, n)
    return TaylorSeries(coeffs, rho, tail, samples=values)


def series_power(s: TaylorSeries, n: int, order: int | None = None) -> TaylorSeries:
    """Coefficients of ``s**n`` truncated at degree ``order``.

    Uses pointwise powers of the stored circle samples when available,
    otherwise truncated repeated squaring of the coefficient vector.
    """
    if n < 1:
        raise ValueError("power must be >= 1")
    if order is None:
        order = s.order
    if s.samples is not None and s.samples.size >= 2 * (order + 1):
        vals = s.samples**n
        coeffs, tail = _coeffs_from_circle_values(vals, s.sample_radius, order)
        return TaylorSeries(coeffs, s.sample_radius, max(tail, s.tail_estimate), samples=vals)

    base = np.zeros(order + 1, dtype=complex)
    m = min(order, s.order) + 1
    base[:m] = s.coeffs[:m]
    result = np.zeros(order + 1, dtype=complex)
    result[0] = 1.0
    e = n
    while e:
        if e & 1:
            result = np.convolve(result, base)[: order + 1]
        e >>= 1
        if e:
            base = np.convolve(base, base)[: order + 1]
    return TaylorSeries(result, s.sample_radius, s.tail_estimate)


def monomial_weight(n, alpha: float = 0.0):
    """Squared weighted-Dirichlet norm of ``z**n``: ``(alpha+1) n^2 B(n, alpha+1)``.

    Exact integer ``n`` is returned for ``alpha == 0``.
    """
    if alpha <= -1:
        raise ValueError("weight out of range")
    n_arr = np.asarray(n)
    if np.any(n_arr < 1):
        raise ValueError("monomial_weight needs n >= 1")
    if alpha == 0:
        out = n_arr.astype(float)
    else:
        nf = n_arr.astype(float)
        out = (alpha + 1) * np.exp(2 * np.log(nf) + betaln(nf, alpha + 1.0))
    return float(out) if out.ndim == 0 else out


def dirichlet_norm_sq(s: TaylorSeries, alpha: float = 0.0) -> float:
    """``|c_0|^2 + sum_n w_n(alpha) |c_n|^2`` over the stored degrees ``0..s.order``."""
    if alpha <= -1:
        raise ValueError("weight out of range")
    c = s.coeffs
    total = abs(c[0]) ** 2
    if c.size > 1:
        w = monomial_weight(np.arange(1, c.size), alpha)
        total += float(np.dot(np.atleast_1d(w), np.abs(c[1:]) ** 2))
    return float(total)


@dataclass(frozen=True)
class QuadratureRule:
    """Quadrature over the disk (or its boundary circle).

    For ``tensor-gauss-polar`` the rule has ``node_count`` Gauss nodes in
    ``t = r**2`` on ``[0, radial_clip**2]`` times ``angular_count`` uniform
    angles (defaults to ``node_count``).  Uniform angles are the Gauss rule
    for periodic integrands.
    """

    kind: str = "tensor-gauss-polar"
    node_count: int = 64
    seed: int = 0
    radial_clip: float = 1.0
    angular_count: int | None = None

    def __post_init__(self):
        if self.kind not in ("tensor-gauss-polar", "boundary-uniform", "monte-carlo"):
            raise ValueError(f"unknown quadrature kind {self.kind!r}")
        if self.node_count < 1:
            raise ValueError("node_count must be >= 1")
        if not 0 < self.radial_clip <= 1:
            raise ValueError("radial_clip must lie in (0, 1]")

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes ``z`` and weights summing to the normalized measure covered."""
        if self.kind == "tensor-gauss-polar":
            t, wt = gauss_legendre(self.node_count, 0.0, self.radial_clip**2)
            na = self.angular_count or self.node_count
            theta = 2 * np.pi * (np.arange(na) + 0.5) / na
            z = np.sqrt(t)[:, None] * np.exp(1j * theta)[None, :]
            # dA = dt dtheta / (2 pi)
            w = wt[:, None] * np.full(na, 1.0 / na)[None, :]
            return z.ravel(), w.ravel()
        if self.kind == "boundary-uniform":
            theta = 2 * np.pi * np.arange(self.node_count) / self.node_count
            return self.radial_clip * np.exp(1j * theta), np.full(self.node_count, 1.0 / self.node_count)
        rng = np.random.default_rng(self.seed)
        t = rng.uniform(0.0, self.radial_clip**2, self.node_count)
        theta = rng.uniform(0.0, 2 * np.pi, self.node_count)
        z = np.sqrt(t) * np.exp(1j * theta)
        return z, np.full(self.node_count, self.radial_clip**2 / self.node_count)


def disk_integrate(F: Callable[[np.ndarray], np.ndarray], rule: QuadratureRule, return_error: bool = False):
    """Integral of ``F`` against normalized area measure over ``|z| < radial_clip``.

    With ``return_error=True`` a ``(value, stderr)`` pair is returned; the
    standard error is zero for deterministic rules.
    """
    if rule.kind == "boundary-uniform":
        raise ValueError("boundary-uniform rules integrate over the circle, not the disk")
    z, w = rule.nodes()
    vals = np.asarray(F(z), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("singular integrand; tighten radial_clip")
    value = float(np.dot(w, vals))
    if not return_error:
        return value
    if rule.kind == "monte-carlo":
        scale = rule.radial_clip**2
        stderr = scale * float(np.std(vals, ddof=1)) / math.sqrt(vals.size) if vals.size > 1 else math.inf
        return value, stderr
    return value, 0.0


def annulus_integrate(
    F: Callable[[np.ndarray], np.ndarray],
    r0: float,
    r1: float,
    n_radial: int = 16,
    n_angular: int = 256,
) -> float:
    """Integral of ``F`` over ``r0 <= |z| < r1`` against normalized area."""
    t, wt = gauss_legendre(n_radial, r0 * r0, r1 * r1)
    theta = 2 * np.pi * (np.arange(n_angular) + 0.5) / n_angular
    z = np.sqrt(t)[:, None] * np.exp(1j * theta)[None, :]
    vals = np.asarray(F(z), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("singular integrand; tighten radial_clip")
    return float(np.dot(wt, vals.mean(axis=1)))


def reproducing_kernel(a, z):
    """Kernel of the origin-vanishing Dirichlet space, ``log 1/(1 - conj(a) z)``."""
    a = np.asarray(a, dtype=complex)
    z = np.asarray(z, dtype=complex)
    return -np.log(1 - np.conj(a) * z)
