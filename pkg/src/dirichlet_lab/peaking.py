"""Peaking functions on compacts of capacity zero.

The building blocks are ``f_eps(z) = int L(z conj(w)) dmu_eps(w)`` with
``L(z) = log(e/(1 - z))`` and ``mu_eps`` the equilibrium measure of the
fattening ``K_eps``.  For a schedule ``(eps_j, delta_j, r_j)``,

    f = 1 + sum_j j^-2 f_{eps_j}(r_j z) / sqrt(I_j)

has ``Re f >= 1`` and ``Re f >= j`` on the ``delta_j``-collar of ``K``.
Radii are stored as logarithms: the third term on a single point already
needs ``eps`` near ``exp(-2915)``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import capacity as cap
from .series import TaylorSeries, dirichlet_norm_sq, series_from_samples
from .symbols import Symbol, exp_reciprocal, polar_grid

log = logging.getLogger(__name__)

TWO_PI = 2 * math.pi


class PlanError(ValueError):
    pass


def _log_delta(log_eps: float) -> float:
    # delta = min(eps / 4, eps^2 / 32)
    return min(log_eps - math.log(4.0), 2 * log_eps - math.log(32.0))


@dataclass
class PlanTerm:
    j: int
    log_eps: float
    energy: float
    measure: cap.PanelMeasure
    log_delta: float

    @property
    def eps(self) -> float:
        return math.exp(self.log_eps)

    @property
    def delta(self) -> float:
        return math.exp(self.log_delta)

    @property
    def r(self) -> float:
        """``1 - delta`` rounded to float; equals 1.0 once delta is below 1e-16."""
        return 1.0 - self.delta

    def to_dict(self) -> dict:
        return {
            "j": self.j,
            "log_eps": self.log_eps,
            "eps": self.eps,
            "I": self.energy,
            "log_delta": self.log_delta,
            "delta": self.delta,
            "r": self.r,
            "panels": self.measure.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PlanTerm":
        return cls(int(d["j"]), float(d["log_eps"]), float(d["I"]), cap.PanelMeasure.from_dict(d["panels"]), float(d["log_delta"]))


@dataclass
class PeakingPlan:
    K: cap.ArcSet
    terms: list[PlanTerm]

    @property
    def J(self) -> int:
        return len(self.terms)

    def verify(self) -> dict:
        """Check ``I_j >= 4 j^6``, ``delta_j <= min(eps_j/4, eps_j^2/32)``, decreasing ``eps_j``."""
        out = {"energy_ok": True, "delta_ok": True, "eps_decreasing": True}
        prev = math.inf
        for t in self.terms:
            if t.energy < 4 * t.j**6:
                out["energy_ok"] = False
            if t.log_delta > _log_delta(t.log_eps) + 1e-12:
                out["delta_ok"] = False
            if not t.log_eps < prev:
                out["eps_decreasing"] = False
            prev = t.log_eps
        out["ok"] = all(out.values())
        return out

    def to_dict(self) -> dict:
        return {"K": self.K.to_dict(), "J": self.J, "schedule": [t.to_dict() for t in self.terms]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "PeakingPlan":
        return cls(cap.ArcSet.from_dict(d["K"]), [PlanTerm.from_dict(t) for t in d["schedule"]])


def plan_peaking(
    K,
    J: int,
    log_eps_range: tuple[float, float] = (-6000.0, math.log(0.5)),
    panel_count: int = 64,
    tol: float = 1e-3,
) -> PeakingPlan:
    """Schedule with, for each ``j``, the largest ``eps`` in range having ``I(K_eps) >= 4 j^6``.

    Bisection is carried out in ``log eps``; the energy of ``K_eps`` is
    decreasing in ``eps``.
    """
    K = cap.as_arcset(K)
    if J < 0:
        raise ValueError("J must be >= 0")
    lo, hi = map(float, log_eps_range)
    if not lo < hi:
        raise ValueError("empty eps range")

    def energy(le):
        Ke = cap.fatten(K, log_eps=le)
        return cap.equilibrium(Ke, max(panel_count, 8 * len(Ke)), check=False)

    cache: dict[float, cap.EquilibriumResult] = {}

    def E(le):
        if le not in cache:
            cache[le] = energy(le)
        return cache[le]

    terms = []
    prev = hi
    for j in range(1, J + 1):
        target = 4.0 * j**6
        top = min(hi, prev)
        if E(lo).energy < target:
            raise PlanError("capacity of K too large for requested J")
        if E(top).energy >= target and top < prev:
            best = top
        else:
            a, b = lo, top  # E(a) >= target > E(b) (or b == prev)
            while b - a > tol * max(1.0, abs(a)):
                m = 0.5 * (a + b)
                if E(m).energy >= target:
                    a = m
                else:
                    b = m
            best = a
        res = cap.equilibrium(cap.fatten(K, log_eps=best), max(panel_count, 8 * len(cap.fatten(K, log_eps=best))))
        if not res.certified:
            log.warning("term %d: equilibrium certificate failed", j)
        terms.append(PlanTerm(j, best, res.energy, res.measure, _log_delta(best)))
        prev = best
    plan = PeakingPlan(K, terms)
    chk = plan.verify()
    if not chk["ok"]:
        raise PlanError(f"plan invariants violated: {chk}")
    return plan


def _dilated_log_depth(z: np.ndarray, log_delta: float) -> np.ndarray:
    """``log(1 - r |z|)`` for ``r = 1 - delta``, exact for tiny ``delta``."""
    d = 1 - np.abs(z)
    with np.errstate(divide="ignore", over="ignore"):
        ratio = np.exp(log_delta - np.log(np.where(d > 0, d, 1.0)))
        inner = np.log(np.where(d > 0, d, 1.0)) + np.log1p(ratio * (1 - d))
    return np.where(d > 0, inner, log_delta)


class PeakingFunction:
    """``f = 1 + sum_j j^-2 f_{eps_j}(r_j z) / sqrt(I_j)`` for ``|z| <= 1``."""

    def __init__(self, plan: PeakingPlan):
        self.plan = plan

    def term(self, j: int, z):
        """``f_{eps_j}(r_j z)``."""
        t = self.plan.terms[j - 1]
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if np.any(np.abs(z) > 1 + 1e-12):
            raise ValueError("peaking function is defined on the closed disk")
        return cap.cauchy_log_transform(t.measure, t.r * z, _dilated_log_depth(z, t.log_delta))

    def term_deriv(self, j: int, z):
        t = self.plan.terms[j - 1]
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        d = cap.cauchy_log_derivative(t.measure, t.r * z, _dilated_log_depth(z, t.log_delta))
        return t.r * d

    def __call__(self, z):
        return self.eval_f(z)

    def eval_f(self, z):
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.ones(z.shape, dtype=complex)
        for t in self.plan.terms:
            out += self.term(t.j, z) / (t.j**2 * math.sqrt(t.energy))
        return complex(out[0]) if scalar else out

    def deriv(self, z):
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.zeros(z.shape, dtype=complex)
        for t in self.plan.terms:
            out += self.term_deriv(t.j, z) / (t.j**2 * math.sqrt(t.energy))
        return complex(out[0]) if scalar else out

    def real_part(self, z):
        return np.real(self.eval_f(z))

    def ceiling(self) -> float:
        """A-priori bound ``4 (sum_j j^-2 sqrt((I_j - 1)/I_j))^2`` on ``4 int |f'|^2 dA``."""
        s = sum(t.j**-2 * math.sqrt(max(t.energy - 1, 0.0) / t.energy) for t in self.plan.terms)
        return 4 * s * s

    def breakpoints(self) -> list[float]:
        """Angles where the integrand of the HS integral has structure."""
        pts = list(np.angle(np.exp(1j * self.plan.K.centers)))
        for t in self.plan.terms:
            mu = t.measure
            for c, lh in zip(mu.center, mu.log_scale):
                h = math.exp(lh)
                pts += [c - h, c + h]
        return sorted(set(float(np.angle(np.exp(1j * p))) for p in pts))


def build_q(fn: PeakingFunction, grid: np.ndarray | None = None) -> Symbol:
    """``q = phi_a o exp(-1/f)`` with ``a = exp(-1/f(0))``; fixes the origin."""
    if grid is None:
        grid = np.concatenate([polar_grid(8_000), np.exp(1j * TWO_PI * np.arange(2_000) / 2_000)])
    try:
        _, q = exp_reciprocal(fn.eval_f, fn.deriv, grid)
    except ValueError as exc:
        raise PlanError("peaking hypothesis failed") from exc
    q.name = "peaking q"
    q.params["plan_J"] = fn.plan.J
    return q


def lower_bound_near_K(fn: PeakingFunction, j: int, z, log_depth: float | None = None, tol: float = 1e-9) -> float:
    """Single-term lower bound ``j^-2 U_j(r_j z) / sqrt(I_j)`` on the ``delta_j``-collar.

    ``log_depth`` optionally places ``z`` at ``(1 - exp(log_depth)) z/|z|``
    for depths below float resolution.
    """
    t = fn.plan.terms[j - 1]
    z = complex(z)
    if log_depth is None:
        dist = float(fn.plan.K.distance(np.array([z]))[0])
        in_collar = dist == 0 or math.log(dist) <= t.log_delta
        zz = np.array([z])
        ld = _dilated_log_depth(zz, t.log_delta)
    else:
        # distance from e^{i psi}(1 - e^{ld}) to a point of K at the same angle
        on = fn.plan.K.distance(np.array([np.exp(1j * np.angle(z))]))[0]
        in_collar = on == 0 and log_depth <= t.log_delta
        zz = np.array([np.exp(1j * np.angle(z))])
        # 1 - r (1 - d) = d + delta - d delta
        ld = np.array([np.logaddexp(log_depth, t.log_delta)])
    if not in_collar:
        raise ValueError("point not in the delta_j collar")
    U = float(cap.potential(t.measure, np.exp(1j * np.angle(zz)), ld)[0])
    bound = U / (j**2 * math.sqrt(t.energy))
    if bound < j * (1 - tol):
        raise AssertionError(f"collar bound {bound} below {j}")
    return bound


def norm_identity(term: PlanTerm, order: int = 1 << 15, rho: float | None = None) -> tuple[float, float]:
    """``(||f_eps||_D^2 from sampled Taylor coefficients, I_eps)``."""
    if rho is None:
        rho = 1 - 2.0 / order
    m = 4 * order
    mu = term.measure

    def f(z):
        return cap.cauchy_log_transform(mu, z)

    s = series_from_samples(f, rho, order, m)
    return dirichlet_norm_sq(s), term.energy


def as_series(func, rho: float = 0.99, order: int = 256) -> TaylorSeries:
    """Sampled Taylor series of ``f`` or ``q`` for the operator module."""
    return series_from_samples(func, rho, order)


def contact_scan(phi: Symbol, K, n: int = 10_000, collar: float = 0.05) -> dict:
    """Boundary scan of ``|phi(e^{it})|``: maximum near ``K`` versus elsewhere."""
    K = cap.as_arcset(K)
    th = TWO_PI * (np.arange(n) + 0.5) / n - math.pi
    pts = np.exp(1j * th)
    v = np.abs(phi(pts))
    near = K.distance(pts) <= collar
    sup_near = float(v[near].max()) if near.any() else math.nan
    sup_away = float(v[~near].max()) if (~near).any() else math.nan
    k = int(np.argmax(v))
    return {
        "sup_near": sup_near,
        "sup_away": sup_away,
        "eta": 1 - sup_away,
        "argmax_angle": float(th[k]),
        "argmax_near_K": bool(near[k]),
    }


def hs_certificate(q: Symbol, fn: PeakingFunction | None = None, levels: Sequence[int] = (12, 16, 20), rtol: float = 0.05, **kw) -> dict:
    """Hilbert-Schmidt integral of ``q`` at increasing depths, with the a-priori ceiling.

    Level ``k`` integrates over ``|z| <= 1 - 2^-(k+1)`` with angles graded
    toward the structure of ``fn``; the estimate is stable when the last
    two increments are below ``rtol`` relative.
    """
    from .operators import hs_annuli

    levels = sorted(int(k) for k in levels)
    breaks = fn.breakpoints() if fn is not None else []
    parts = np.cumsum(hs_annuli(q, levels[-1], breaks, **kw))
    history = [float(parts[k]) for k in levels]
    stable = all(abs(b - a) <= rtol * max(abs(b), 1e-300) or (a == 0 and b == 0) for a, b in zip(history[:-1], history[1:]))
    out = {
        "estimate": history[-1],
        "history": history,
        "levels": levels,
        "stable": bool(stable),
        "ceiling": fn.ceiling() if fn is not None else math.nan,
    }
    if not stable:
        log.warning("certificate inconclusive")
    return out
