"""Logarithmic potentials, energies and equilibrium measures on circle compacts.

The kernel is ``log(e / |z - w|)``, so the unit circle has energy 1 and
capacity ``exp(-1)``.

Arcs store their half-width as a logarithm.  Every near-field kernel
evaluation is done in coordinates local to an arc (offsets measured in units
of the arc half-width), which keeps clusters of width far below the float
range usable: the energy of a tiny arc is ``1 - log(half_width) + O(1)`` and
only the ``O(1)`` part is ever computed in floating point.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .series import gauss_legendre

log = logging.getLogger(__name__)

TWO_PI = 2 * math.pi

# pairs (or point/panel combinations) closer than this many panel
# half-widths use the closed-form near-field formulas
_NEAR = 8.0
_FAR_ORDER = 4
_NEAR_ORDER = 6


class SolverError(RuntimeError):
    pass


def wrap_angle(t):
    """Reduce angles to ``(-pi, pi]``."""
    return np.pi - np.mod(np.pi - np.asarray(t, dtype=float), TWO_PI)


# ---------------------------------------------------------------------------
# sets


@dataclass
class ArcSet:
    """Disjoint closed arcs ``[c - h, c + h]`` with ``h = exp(log_half)``.

    Zero-length arcs (``log_half = -inf``) represent points.  A single arc of
    half-width ``pi`` is the whole circle.
    """

    centers: np.ndarray
    log_half: np.ndarray

    def __post_init__(self):
        self.centers = np.mod(np.asarray(self.centers, dtype=float).ravel(), TWO_PI)
        self.log_half = np.asarray(self.log_half, dtype=float).ravel()
        if self.centers.shape != self.log_half.shape:
            raise ValueError("centers and log_half differ in length")
        if np.any(self.log_half > math.log(math.pi) + 1e-12):
            raise ValueError("arc half-width exceeds pi")
        self._normalize()

    # constructors -----------------------------------------------------
    @classmethod
    def from_arcs(cls, arcs: Iterable[Sequence[float]]) -> "ArcSet":
        arcs = [(float(a), float(b)) for a, b in arcs]
        for a, b in arcs:
            if b < a or b - a > TWO_PI + 1e-12:
                raise ValueError(f"invalid arc [{a}, {b}]")
        c = [0.5 * (a + b) for a, b in arcs]
        h = [min(0.5 * (b - a), math.pi) for a, b in arcs]
        with np.errstate(divide="ignore"):
            return cls(np.array(c), np.log(np.array(h)))

    @classmethod
    def points(cls, angles: Iterable[float]) -> "ArcSet":
        angles = np.asarray(list(angles), dtype=float)
        return cls(angles, np.full(angles.shape, -np.inf))

    @classmethod
    def circle(cls) -> "ArcSet":
        return cls(np.array([math.pi]), np.array([math.log(math.pi)]))

    @classmethod
    def arc(cls, center: float, half_width: float) -> "ArcSet":
        return cls(np.array([center]), np.array([math.log(half_width)]))

    # views ------------------------------------------------------------
    @property
    def half_widths(self) -> np.ndarray:
        return np.exp(self.log_half)

    @property
    def arcs(self) -> list[tuple[float, float]]:
        h = self.half_widths
        return [(float(c - w), float(c + w)) for c, w in zip(self.centers, h)]

    @property
    def total_length(self) -> float:
        return float(2 * self.half_widths.sum())

    @property
    def is_circle(self) -> bool:
        return self.centers.size == 1 and self.log_half[0] >= math.log(math.pi) - 1e-12

    @property
    def is_points(self) -> bool:
        return bool(np.all(np.isneginf(self.log_half)))

    def __len__(self) -> int:
        return self.centers.size

    def contains(self, theta) -> np.ndarray:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        d = np.abs(wrap_angle(theta[:, None] - self.centers[None, :]))
        return np.any(d <= self.half_widths[None, :] * (1 + 1e-12), axis=1)

    def distance(self, z) -> np.ndarray:
        """Euclidean distance from points ``z`` of the plane to the set."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        rho = np.abs(z)
        psi = np.angle(z)
        d = np.abs(wrap_angle(psi[:, None] - self.centers[None, :]))
        # angular distance to each arc (0 inside)
        ang = np.maximum(d - self.half_widths[None, :], 0.0)
        # |rho e^{i a} - 1|^2 = (1 - rho)^2 + 4 rho sin^2(a/2)
        dist2 = (1 - rho[:, None]) ** 2 + 4 * rho[:, None] * np.sin(ang / 2) ** 2
        return np.sqrt(dist2.min(axis=1))

    def to_dict(self) -> dict:
        out = {"arcs": [list(a) for a in self.arcs]}
        if np.any(self.log_half < -700):
            out["centers"] = self.centers.tolist()
            out["log_half"] = [float(x) for x in self.log_half]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ArcSet":
        if "log_half" in data:
            return cls(np.array(data["centers"]), np.array(data["log_half"], dtype=float))
        return cls.from_arcs(data["arcs"])

    def _normalize(self):
        if self.centers.size == 0:
            return
        order = np.argsort(self.centers, kind="stable")
        c = list(self.centers[order])
        lh = list(self.log_half[order])
        merged_c: list[float] = []
        merged_h: list[float] = []
        for ci, hi in zip(c, lh):
            if merged_c and _overlaps(merged_c[-1], merged_h[-1], ci, hi):
                merged_c[-1], merged_h[-1] = _merge(merged_c[-1], merged_h[-1], ci, hi)
            else:
                merged_c.append(ci)
                merged_h.append(hi)
        # wrap-around between last and first
        while len(merged_c) > 1 and _overlaps(merged_c[-1], merged_h[-1], merged_c[0] + TWO_PI, merged_h[0]):
            cc, hh = _merge(merged_c[-1], merged_h[-1], merged_c[0] + TWO_PI, merged_h[0])
            merged_c = [cc % TWO_PI] + merged_c[1:-1]
            merged_h = [hh] + merged_h[1:-1]
        if any(h >= math.log(math.pi) - 1e-15 for h in merged_h):
            merged_c, merged_h = [math.pi], [math.log(math.pi)]
        self.centers = np.mod(np.array(merged_c), TWO_PI)
        self.log_half = np.array(merged_h)
        o = np.argsort(self.centers, kind="stable")
        self.centers, self.log_half = self.centers[o], self.log_half[o]


def _overlaps(c1, lh1, c2, lh2) -> bool:
    gap = (c2 - c1) - math.exp(lh1) - math.exp(lh2)
    return gap <= 0.0


def _merge(c1, lh1, c2, lh2):
    lo = min(c1 - math.exp(lh1), c2 - math.exp(lh2))
    hi = max(c1 + math.exp(lh1), c2 + math.exp(lh2))
    if hi - lo >= TWO_PI:
        return math.pi, math.log(math.pi)
    half = 0.5 * (hi - lo)
    return 0.5 * (lo + hi), (math.log(half) if half > 0 else -math.inf)


@dataclass
class CantorSpec:
    """Symmetric Cantor construction on ``[center - half, center + half]``.

    Each step keeps the two end sub-arcs of relative length ``ratios[k]``.
    ``ratios`` may be the preset ``"super_sparse"`` (``4**-(2**k)``).
    """

    ratios: Sequence[float] | str = "super_sparse"
    depth: int = 4
    center: float = 0.0
    half: float = math.pi / 2

    def ratio(self, k: int) -> float:
        if isinstance(self.ratios, str):
            if self.ratios != "super_sparse":
                raise ValueError(f"unknown Cantor preset {self.ratios!r}")
            return 4.0 ** -(2.0**k)
        return float(self.ratios[k])

    def log_ratio(self, k: int) -> float:
        if isinstance(self.ratios, str):
            return -(2.0**k) * math.log(4.0)
        return math.log(self.ratios[k])

    def arcset(self) -> ArcSet:
        centers = np.array([self.center])
        lh = np.array([math.log(self.half)])
        for k in range(self.depth):
            lr = self.log_ratio(k)
            h = np.exp(lh)
            off = h * (1 - math.exp(lr))
            centers = np.concatenate([centers - off, centers + off])
            lh = np.concatenate([lh + lr, lh + lr])
        return ArcSet(centers, lh)

    @classmethod
    def from_dict(cls, data: dict) -> "CantorSpec":
        return cls(
            ratios=data.get("ratios", "super_sparse"),
            depth=int(data.get("depth", 4)),
            center=float(data.get("center", 0.0)),
            half=float(data.get("half", math.pi / 2)),
        )


def as_arcset(K) -> ArcSet:
    if isinstance(K, ArcSet):
        return K
    if isinstance(K, CantorSpec):
        return K.arcset()
    if isinstance(K, dict):
        if "ratios" in K or "depth" in K:
            return CantorSpec.from_dict(K).arcset()
        if "points" in K:
            return ArcSet.points(K["points"])
        return ArcSet.from_dict(K)
    return ArcSet.points(K)


def fatten(K, eps: float | None = None, log_eps: float | None = None) -> ArcSet:
    """Chordal fattening ``{z in T : dist(z, K) <= eps}``.

    The distance enlarges each arc by ``2 arcsin(eps/2)`` on either side.  Pass
    ``log_eps`` for radii below the float range.
    """
    K = as_arcset(K)
    if log_eps is None:
        if eps is None or not eps > 0:
            raise ValueError("eps must be > 0")
        log_eps = math.log(eps)
    if log_eps >= math.log(2.0):
        return ArcSet.circle()
    eps_f = math.exp(log_eps)
    if eps_f > 1e-8:
        log_w = math.log(2 * math.asin(eps_f / 2))
    else:
        # 2 asin(e/2) = e (1 + e^2/24 + ...)
        log_w = log_eps + math.log1p(eps_f * eps_f / 24)
    new_lh = np.logaddexp(K.log_half, log_w)
    new_lh = np.minimum(new_lh, math.log(math.pi))
    return ArcSet(K.centers.copy(), new_lh)


# ---------------------------------------------------------------------------
# measures


@dataclass
class PanelMeasure:
    """Probability measure with uniform density on each panel.

    Panel ``p`` lives on arc ``arc[p]`` and covers the offsets
    ``[u - eta, u + eta]`` in units of that arc's half-width, i.e. the angles
    ``center + exp(log_scale) * [u - eta, u + eta]``.
    """

    center: np.ndarray
    log_scale: np.ndarray
    u: np.ndarray
    eta: np.ndarray
    weights: np.ndarray
    arc: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("center", "log_scale", "u", "eta", "weights"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float).ravel())
        if self.arc is None:
            self.arc = np.zeros(self.u.size, dtype=int)
        self.arc = np.asarray(self.arc, dtype=int).ravel()
        if np.any(self.weights < 0):
            raise ValueError("panel weights must be nonnegative")
        if abs(self.weights.sum() - 1) > 1e-12:
            raise ValueError("panel weights must sum to 1")

    @property
    def size(self) -> int:
        return self.u.size

    @property
    def scale(self) -> np.ndarray:
        return np.exp(self.log_scale)

    @property
    def midpoints(self) -> np.ndarray:
        """Absolute panel-centre angles."""
        return self.center + self.scale * self.u

    @property
    def abs_half(self) -> np.ndarray:
        return self.scale * self.eta

    @property
    def log_abs_half(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return self.log_scale + np.log(self.eta)

    @property
    def unit_mode(self) -> np.ndarray:
        # big arcs (near-full circle) use absolute coordinates so that the
        # seam at +-pi is handled by angle wrapping
        return self.log_scale <= math.log(math.pi / 2)

    def with_weights(self, w) -> "PanelMeasure":
        w = np.asarray(w, dtype=float)
        return PanelMeasure(self.center, self.log_scale, self.u, self.eta, w / w.sum(), self.arc)

    def to_dict(self) -> dict:
        return {
            "center": self.center.tolist(),
            "log_scale": self.log_scale.tolist(),
            "u": self.u.tolist(),
            "eta": self.eta.tolist(),
            "weights": self.weights.tolist(),
            "arc": self.arc.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PanelMeasure":
        return cls(data["center"], data["log_scale"], data["u"], data["eta"], data["weights"], data.get("arc"))

    @classmethod
    def uniform(cls, K: ArcSet, panel_count: int, graded: bool = True) -> "PanelMeasure":
        """Panels on ``K``; weights proportional to panel length."""
        return cls._layout(K, panel_count, graded)

    @classmethod
    def _layout(cls, K: ArcSet, panel_count: int, graded: bool) -> "PanelMeasure":
        if np.any(np.isneginf(K.log_half)):
            raise ValueError("atomic measure has infinite energy")
        nk = len(K)
        if panel_count < nk:
            raise ValueError("panel_count must be >= number of arcs")
        lengths = K.half_widths
        share = lengths / lengths.sum() if lengths.sum() > 0 else np.full(nk, 1.0 / nk)
        floor = min(8, panel_count // nk)
        counts = np.maximum(floor, np.floor(share * panel_count).astype(int))
        counts = np.maximum(counts, 1)
        centers, lscale, us, etas, arcs, wts = [], [], [], [], [], []
        for k in range(nk):
            n = int(counts[k])
            if graded and not K.is_circle:
                edges = -np.cos(np.pi * np.arange(n + 1) / n)
            else:
                edges = np.linspace(-1.0, 1.0, n + 1)
            u = 0.5 * (edges[1:] + edges[:-1])
            eta = 0.5 * (edges[1:] - edges[:-1])
            centers.append(np.full(n, K.centers[k]))
            lscale.append(np.full(n, K.log_half[k]))
            us.append(u)
            etas.append(eta)
            arcs.append(np.full(n, k))
            wts.append(share[k] * eta / eta.sum())
        w = np.concatenate(wts)
        return cls(
            np.concatenate(centers),
            np.concatenate(lscale),
            np.concatenate(us),
            np.concatenate(etas),
            w / w.sum(),
            np.concatenate(arcs),
        )


# ---------------------------------------------------------------------------
# kernel pieces


def _flat_phi(x):
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 0.5 * x * x * np.log(ax) - 0.75 * x * x
    return np.where(ax > 0, out, 0.0)


def flat_log_average(a1, b1, a2, b2):
    """Mean of ``log|s - t|`` over ``s in [a1, b1]``, ``t in [a2, b2]`` (closed form)."""
    num = _flat_phi(b1 - a2) - _flat_phi(a1 - a2) - _flat_phi(b1 - b2) + _flat_phi(a1 - b2)
    return num / ((b1 - a1) * (b2 - a2))


def _smooth(u):
    # log(|u| / |2 sin(u/2)|), smooth for |u| < 2 pi
    return -np.log(np.sinc(np.asarray(u) / TWO_PI))


def _log_interval_mean(e, lo, hi):
    """Mean over ``sigma in [lo, hi]`` of ``0.5 log(e^2 + sigma^2)`` (``e >= 0``)."""

    def R(s):
        with np.errstate(divide="ignore", invalid="ignore"):
            r_pos = 0.5 * s * np.log(e * e + s * s) - s + e * np.arctan(s / e)
            r_zero = np.where(s != 0, s * np.log(np.abs(s)), 0.0) - s
        return np.where(e > 0, r_pos, r_zero)

    return (R(hi) - R(lo)) / (hi - lo)


def _clog_interval_mean(b, lo, hi):
    """Mean over ``sigma in [lo, hi]`` of ``log(b + i sigma)`` (``b >= 0``, principal)."""

    def F(s):
        S = b + 1j * s
        with np.errstate(divide="ignore", invalid="ignore"):
            slogs = np.where(S != 0, S * np.log(S), 0.0)
        return -1j * (slogs - S)

    return (F(hi) - F(lo)) / (hi - lo)


def self_energy_matrix(mu: PanelMeasure) -> np.ndarray:
    """Pairwise panel energies ``G[p, q]`` (mean kernel over panel pairs)."""
    P = mu.size
    xg, wg = gauss_legendre(_FAR_ORDER)
    xn, wn = gauss_legendre(_NEAR_ORDER)
    wn2 = np.outer(wn, wn).ravel() / 4.0
    wg2 = np.outer(wg, wg).ravel() / 4.0
    ga, gb = np.meshgrid(xg, xg, indexing="ij")
    ga, gb = ga.ravel(), gb.ravel()
    na, nb = np.meshgrid(xn, xn, indexing="ij")
    na, nb = na.ravel(), nb.ravel()

    unit = mu.unit_mode
    mid = mu.midpoints
    habs = mu.abs_half
    lhabs = mu.log_abs_half

    G = np.empty((P, P))
    for p in range(P):
        q = np.arange(P)
        same = (mu.arc[q] == mu.arc[p]) & unit[p] & unit[q]
        row = np.empty(P)

        # same-arc pairs, coordinates in units of the arc half-width
        if same.any():
            qs = q[same]
            s = mu.scale[p]
            ls = mu.log_scale[p]
            D = mu.u[p] - mu.u[qs]
            ep, eq = mu.eta[p], mu.eta[qs]
            near = np.abs(D) < _NEAR * (ep + eq)
            val = np.empty(qs.size)
            if near.any():
                qn = qs[near]
                flat = flat_log_average(mu.u[p] - ep, mu.u[p] + ep, mu.u[qn] - mu.eta[qn], mu.u[qn] + mu.eta[qn])
                xu = (mu.u[p] + ep * na)[None, :] - (mu.u[qn][:, None] + mu.eta[qn][:, None] * nb[None, :])
                sm = (_smooth(s * xu) * wn2).sum(axis=1)
                val[near] = 1 - ls - flat + sm
            far = ~near
            if far.any():
                qf = qs[far]
                xu = (mu.u[p] + ep * ga)[None, :] - (mu.u[qf][:, None] + mu.eta[qf][:, None] * gb[None, :])
                kern = -np.log(np.abs(xu)) + _smooth(s * xu)
                val[far] = 1 - ls + (kern * wg2).sum(axis=1)
            row[same] = val

        other = ~same
        if other.any():
            qo = q[other]
            D = wrap_angle(mid[p] - mid[qo])
            hp, hq = habs[p], habs[qo]
            near = np.abs(D) < _NEAR * (hp + hq)
            val = np.empty(qo.size)
            if near.any():
                qn = qo[near]
                # local units of sigma = h_p + h_q
                lsig = np.logaddexp(lhabs[p], lhabs[qn])
                sig = np.exp(lsig)
                Dn = D[near] / sig
                a_p = habs[p] / sig
                a_q = habs[qn] / sig
                flat = flat_log_average(Dn - a_p, Dn + a_p, -a_q, a_q)
                u = (D[near][:, None] + habs[p] * na[None, :]) - habs[qn][:, None] * nb[None, :]
                sm = (_smooth(u) * wn2).sum(axis=1)
                val[near] = 1 - lsig - flat + sm
            far = ~near
            if far.any():
                qf = qo[far]
                u = (D[far][:, None] + habs[p] * ga[None, :]) - habs[qf][:, None] * gb[None, :]
                kern = 1 - np.log(np.abs(2 * np.sin(u / 2)))
                val[far] = (kern * wg2).sum(axis=1)
            row[other] = val
        G[p] = row
    return 0.5 * (G + G.T)


def _local_frames(mu: PanelMeasure):
    """Per panel: frame origin, log frame scale, panel interval in frame units."""
    unit = mu.unit_mode
    origin = np.where(unit, mu.center, mu.midpoints)
    lscale = np.where(unit, mu.log_scale, mu.log_abs_half)
    lo = np.where(unit, mu.u - mu.eta, -1.0)
    hi = np.where(unit, mu.u + mu.eta, 1.0)
    return origin, lscale, lo, hi


def _hfun(y):
    # expm1(i y) / (i y), equal to 1 at y = 0
    y = np.asarray(y, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.expm1(1j * y) / (1j * y)
    return np.where(y == 0, 1.0 + 0j, out)


def _safe_scaled(x, lscale):
    """``x * exp(-lscale)`` without overflow when ``x`` is tiny and the scale tinier."""
    with np.errstate(divide="ignore", over="ignore"):
        mag = np.exp(np.log(np.abs(x)) - lscale)
    return np.where(x != 0, np.sign(x) * mag, 0.0)


_LOCAL_LIMIT = 1e30


_GRADE_LEVELS = 10


def _near_correction_mean(b, rho, s, lo, hi):
    """Mean over ``sigma in [lo, hi]`` of ``log((b + i rho sigma h) / (b + i rho sigma))``.

    ``h = h(-s sigma)``.  The leading term ``rho s sigma^2 / (2 (b + i rho sigma))``
    is integrated in closed form; the remainder by Gauss rules graded
    geometrically toward ``sigma = 0``, where it varies on the scale ``b``.
    """
    b = np.asarray(b, dtype=float)
    c = b / rho
    span = hi - lo

    # closed form: sigma^2/(c + i sigma) = -i sigma + c - c^2/(c + i sigma)
    def logc(sg):
        # continuous branch along sigma for either sign of c
        return np.where(c < 0, np.log(np.abs(c) - 1j * sg), np.log(np.abs(c) + 1j * sg))

    with np.errstate(divide="ignore", invalid="ignore"):
        inv_mean = (logc(hi) - logc(lo)) / (1j * span)
    inv_term = np.where(c != 0, c * c * inv_mean, 0.0)
    quad_mean = -0.5j * (hi + lo) + c - inv_term
    lead_mean = 0.5 * s * quad_mean

    xn, wn = gauss_legendre(_NEAR_ORDER, 0.0, 1.0)
    k = np.arange(_GRADE_LEVELS)
    t_hi = np.r_[4.0 ** -k, 4.0**-_GRADE_LEVELS]
    t_lo = np.r_[4.0 ** -(k + 1), 0.0]
    tau = (t_lo[:, None] + (t_hi - t_lo)[:, None] * xn[None, :]).ravel()
    wt = ((t_hi - t_lo)[:, None] * wn[None, :]).ravel()

    total = np.zeros(b.shape, dtype=complex)
    for a, e in ((np.maximum(lo, 0.0), np.maximum(hi, 0.0)), (np.minimum(hi, 0.0), np.minimum(lo, 0.0))):
        length = e - a
        sig = a[:, None] + length[:, None] * tau[None, :]
        y = s[:, None] * sig
        rs = rho[:, None] * sig
        surr = b[:, None] + 1j * rs
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = 1j * rs * (_hfun(-y) - 1) / surr
            lead = 0.5 * rs * y / surr
        g = np.where(surr != 0, np.log1p(ratio) - lead, 0.0)
        total += np.abs(length) * (g * wt[None, :]).sum(axis=1)
    return lead_mean + total / span


def _panel_means(mu: PanelMeasure, z, log_depth=None, derivative: bool = False):
    """Panel means of ``L(z conj(w)) = 1 - log(1 - z conj(w))`` at the points ``z``.

    The real part is the kernel ``log(e/|z - w|)`` for every ``z`` in the
    plane; the imaginary part is the principal branch for ``|z| <= 1``.
    With ``derivative=True`` the panel means of ``1/(w - z)`` are returned
    as well.  ``log_depth`` optionally gives ``log(1 - |z|)`` exactly.

    Each panel is handled in its local frame, with offsets in units of the
    frame scale ``s``: ``1 - z conj(w) = s (b + i rho sigma h(s sigma))`` where
    ``b = (1 - rho)/s`` and ``sigma = (t - psi)/s``.  Near panels use the
    closed-form mean of ``log(b + i sigma)`` plus a Gauss-integrated smooth
    correction; far panels use Gauss directly.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    rho = np.abs(z)
    psi = np.angle(z)
    if log_depth is not None:
        ld = np.broadcast_to(np.asarray(log_depth, dtype=float), z.shape)
        delta = np.exp(ld)
        rho = 1 - delta
    else:
        delta = 1 - rho
    origin, lscale, lo, hi = _local_frames(mu)
    scale = np.exp(lscale)
    cu = 0.5 * (lo + hi)
    hu = 0.5 * (hi - lo)
    xg, wg = gauss_legendre(_FAR_ORDER)
    xn, wn = gauss_legendre(_NEAR_ORDER)
    P = mu.size
    vals = np.empty((z.size, P), dtype=complex)
    ders = np.empty((z.size, P), dtype=complex) if derivative else None

    chunk = max(1, 400_000 // max(1, P * _FAR_ORDER))
    for start in range(0, z.size, chunk):
        sl = slice(start, start + chunk)
        n = z[sl].size
        off = wrap_angle(psi[sl][:, None] - origin[None, :])
        xi = _safe_scaled(off, lscale[None, :])
        b = _safe_scaled(np.broadcast_to(delta[sl][:, None], off.shape), lscale[None, :])
        r = np.broadcast_to(rho[sl][:, None], off.shape)
        local = (np.abs(xi) < _LOCAL_LIMIT) & (np.abs(b) < _LOCAL_LIMIT)
        # points deep inside (|z| < 1/4) are far from every panel
        near = local & (np.hypot(b, xi - cu[None, :]) < _NEAR * hu[None, :]) & (r > 0.25)
        far = local & ~near
        absf = ~local
        res = np.empty((n, P), dtype=complex)
        dres = np.empty((n, P), dtype=complex) if derivative else None
        ephase = np.exp(-1j * psi[sl])

        if far.any():
            ii, pp = np.nonzero(far)
            sig = (cu[pp] + hu[pp] * xg[:, None]).T - xi[ii, pp][:, None]
            y = scale[pp][:, None] * sig
            arg = b[ii, pp][:, None] + 1j * r[ii, pp][:, None] * sig * _hfun(-y)
            res[ii, pp] = 1 - lscale[pp] - (np.log(arg) * wg).sum(axis=1) / 2
            if derivative:
                # 1/(w - z) = e^{-i psi} / (s (b + i sigma h(s sigma)))
                arg2 = b[ii, pp][:, None] + 1j * sig * _hfun(y)
                m = (wg / arg2).sum(axis=1) / 2
                dres[ii, pp] = ephase[ii] * np.exp(np.log(m) - lscale[pp])
        if absf.any():
            ii, pp = np.nonzero(absf)
            tau = (cu[pp] + hu[pp] * xg[:, None]).T
            vprime = off[ii, pp][:, None] - scale[pp][:, None] * tau
            dl = delta[sl][ii][:, None]
            rr = r[ii, pp][:, None]
            res[ii, pp] = 1 - (np.log(dl - rr * np.expm1(1j * vprime)) * wg).sum(axis=1) / 2
            if derivative:
                m = (wg / (dl + np.expm1(-1j * vprime))).sum(axis=1) / 2
                dres[ii, pp] = ephase[ii] * m
        if near.any():
            ii, pp = np.nonzero(near)
            bi = b[ii, pp]
            s_lo = lo[pp] - xi[ii, pp]
            s_hi = hi[pp] - xi[ii, pp]
            # surrogate b + i rho sigma = rho (b/rho + i sigma)
            r1 = rho[sl][ii]
            main = np.log(r1) + _clog_interval_mean(np.abs(bi) / r1, s_lo, s_hi)
            if np.any(bi < 0):
                # outside the disk only the real part is meaningful
                main = np.where(bi < 0, main.real + 0j, main)
            corr = _near_correction_mean(bi, r1, scale[pp], s_lo, s_hi)
            res[ii, pp] = 1 - lscale[pp] - main - corr
            if derivative:
                # mean of 1/(w - z) = [Lam(hi) - Lam(lo)] / (i z ds), Lam = log(b + i rho sigma h)
                def lam(sg):
                    return np.log(bi + 1j * rho[sl][ii] * sg * _hfun(-scale[pp] * sg))

                with np.errstate(divide="ignore", invalid="ignore"):
                    q = (lam(s_hi) - lam(s_lo)) / (1j * z[sl][ii] * (s_hi - s_lo))
                    dres[ii, pp] = np.exp(np.log(q) - lscale[pp])
        vals[sl] = res
        if derivative:
            ders[sl] = dres
    return (vals, ders) if derivative else vals


# ---------------------------------------------------------------------------
# potential, energy, Fourier


def potential(mu: PanelMeasure, z, log_depth=None):
    """Logarithmic potential ``U(z) = int log(e/|z - w|) dmu(w)``."""
    vals = _panel_means(mu, z, log_depth).real
    out = vals @ mu.weights
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("kernel singularity; perturb evaluation point")
    return float(out[0]) if np.ndim(z) == 0 else out


def potential_at_depth(mu: PanelMeasure, theta, log_depth):
    """``U`` at ``(1 - exp(log_depth)) e^{i theta}``, resolving depths below float spacing."""
    theta = np.asarray(theta, dtype=float)
    ld = np.asarray(log_depth, dtype=float)
    theta, ld = np.broadcast_arrays(theta, ld)
    z = np.exp(1j * theta)
    out = potential(mu, z.ravel(), ld.ravel())
    return out.reshape(theta.shape) if theta.ndim else float(np.ravel(out)[0])


def cauchy_log_transform(mu: PanelMeasure, z, log_depth=None):
    """``f(z) = int log(e / (1 - z conj(w))) dmu(w)`` for ``|z| <= 1``; ``Re f = U``."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if log_depth is None and np.any(np.abs(z_arr) > 1 + 1e-12):
        raise ValueError("complex log transform needs |z| <= 1")
    out = _panel_means(mu, z_arr, log_depth) @ mu.weights
    return complex(out[0]) if np.ndim(z) == 0 else out


def cauchy_log_derivative(mu: PanelMeasure, z, log_depth=None):
    """``f'(z) = int dmu(w) / (w - z)`` for the transform above."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    _, ders = _panel_means(mu, z_arr, log_depth, derivative=True)
    out = ders @ mu.weights
    return complex(out[0]) if np.ndim(z) == 0 else out


def fourier_coefficients(mu: PanelMeasure, n_max: int) -> np.ndarray:
    """``hat mu(n) = int conj(w)^n dmu(w)`` for ``n = 1..n_max`` (exact per panel)."""
    n = np.arange(1, n_max + 1)[:, None]
    t = mu.midpoints[None, :]
    h = mu.abs_half[None, :]
    return (np.exp(-1j * n * t) * np.sinc(n * h / np.pi)) @ mu.weights


def energy(mu: PanelMeasure, G: np.ndarray | None = None) -> float:
    """Energy ``I_mu``; ``+inf`` (with a warning) for atomic measures."""
    if np.any((mu.weights > 0) & ((mu.eta <= 0) | np.isneginf(mu.log_scale))):
        warnings.warn("atomic measure has infinite energy", RuntimeWarning, stacklevel=2)
        return math.inf
    if G is None:
        G = self_energy_matrix(mu)
    w = mu.weights
    return float(w @ G @ w)


def energy_fourier(mu: PanelMeasure, n_terms: int = 4096) -> tuple[float, float]:
    """``1 + sum_{n<=N} |hat mu(n)|^2 / n`` and the magnitude of the last term."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    c = fourier_coefficients(mu, n_terms)
    terms = np.abs(c) ** 2 / np.arange(1, n_terms + 1)
    return float(1 + terms.sum()), float(terms[-1])


# ---------------------------------------------------------------------------
# equilibrium


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{w >= 0, sum w = 1}`` (sorting method)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1
    k = np.arange(1, v.size + 1)
    cond = u - css / k > 0
    rho = k[cond][-1]
    tau = css[cond][-1] / rho
    return np.maximum(v - tau, 0.0)


def _kkt_residual(G, w):
    g = G @ w
    lam = w @ g
    supp = w > 0
    r_supp = np.max(np.abs(g[supp] - lam)) if supp.any() else 0.0
    r_off = np.max(np.maximum(lam - g[~supp], 0.0)) if (~supp).any() else 0.0
    return max(r_supp, r_off) / max(1.0, abs(lam))


def solve_simplex_qp(G: np.ndarray, w0=None, max_iter: int = 3000, tol: float = 1e-8, polish_iter: int = 200):
    """Minimize ``w^T G w`` over the probability simplex.

    Accelerated projected gradient with step ``1/lambda_max`` as a warm start,
    then an active-set polish solving ``G_S w = lambda 1`` on the support.
    Returns ``(w, lambda, info)``.
    """
    n = G.shape[0]
    lam_max = float(np.linalg.eigvalsh(G)[-1]) if n <= 4096 else float(np.abs(G).sum(axis=1).max())
    step = 1.0 / (2 * lam_max)
    w = np.full(n, 1.0 / n) if w0 is None else project_simplex(np.asarray(w0, dtype=float))
    y, t = w.copy(), 1.0
    it = 0
    for it in range(1, max_iter + 1):
        w_new = project_simplex(y - step * 2 * (G @ y))
        t_new = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        y = w_new + ((t - 1) / t_new) * (w_new - w)
        w, t = w_new, t_new
        if it % 50 == 0 and _kkt_residual(G, w) < tol:
            break
    pg_res = _kkt_residual(G, w)

    support = w > 1e-14 * w.max()
    if not support.any():
        support[:] = True
    for _ in range(polish_iter):
        idx = np.nonzero(support)[0]
        y_s = np.linalg.solve(G[np.ix_(idx, idx)], np.ones(idx.size))
        if np.any(y_s <= 0):
            support[idx[np.argmin(y_s)]] = False
            continue
        w = np.zeros(n)
        w[idx] = y_s / y_s.sum()
        lam = 1.0 / y_s.sum()
        g = G @ w
        off = np.nonzero(~support)[0]
        if off.size:
            viol = lam - g[off]
            j = np.argmax(viol)
            if viol[j] > 1e-13 * max(1.0, abs(lam)):
                support[off[j]] = True
                continue
        res = _kkt_residual(G, w)
        return w, float(w @ g), {"pg_iterations": it, "pg_residual": pg_res, "kkt_residual": res}
    raise SolverError("solver stalled")


@dataclass
class EquilibriumResult:
    measure: PanelMeasure
    energy: float
    frostman_sup: float
    frostman_dev: float
    certified: bool = True
    info: dict = field(default_factory=dict)

    @property
    def capacity(self) -> float:
        return math.exp(-self.energy)

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "capacity": self.capacity,
            "frostman_sup": self.frostman_sup,
            "frostman_dev": self.frostman_dev,
            "certified": self.certified,
            "kernel": "log(e/|z-w|)",
            "measure": self.measure.to_dict(),
        }


def frostman_grid(n: int = 10_000) -> np.ndarray:
    """Global check grid: the circle plus two concentric circles."""
    m = n // 4
    k_circle = n - 2 * m
    th = TWO_PI * (np.arange(k_circle) + 0.5) / k_circle
    th2 = TWO_PI * (np.arange(m) + 0.25) / m
    return np.concatenate([np.exp(1j * th), 0.9 * np.exp(1j * th2), 1.1 * np.exp(1j * th2)])


def equilibrium(
    K,
    panel_count: int = 256,
    grid_size: int = 10_000,
    sup_tol: float = 1e-3,
    check: bool = True,
    w0=None,
) -> EquilibriumResult:
    """Equilibrium measure of ``K`` discretized by uniform-density panels."""
    K = as_arcset(K)
    if K.total_length <= 0 and not np.any(np.isfinite(K.log_half)):
        raise ValueError("K must have positive length")
    mu0 = PanelMeasure.uniform(K, panel_count)
    G = self_energy_matrix(mu0)
    w, lam, info = solve_simplex_qp(G, w0)
    mu = mu0.with_weights(w)
    if not check:
        return EquilibriumResult(mu, lam, math.nan, math.nan, True, info)
    grid = frostman_grid(grid_size)
    U = potential(mu, grid)
    sup = float(np.max(U - lam))
    supp = w > 0
    Um = potential(mu, np.exp(1j * mu.midpoints[supp]))
    dev = float(np.max(np.abs(Um - lam)))
    ok = sup <= sup_tol
    if not ok:
        log.warning("equilibrium certificate failed: sup(U - I) = %.3g", sup)
    return EquilibriumResult(mu, lam, sup, dev, ok, info)


def equilibrium_energy(K, panel_count: int = 128) -> float:
    return equilibrium(K, panel_count, check=False).energy


def capacity_ladder(K, eps_list: Sequence[float], panel_count: int = 256, log_eps: bool = False) -> list[dict]:
    """Equilibrium energies of the fattenings ``K_eps`` along a decreasing list."""
    eps_arr = np.asarray(eps_list, dtype=float)
    if np.any(np.diff(eps_arr) >= 0):
        raise ValueError("eps_list must be strictly decreasing")
    if not log_eps and np.any(eps_arr <= 0):
        raise ValueError("eps_list must be positive")
    rows = []
    for e in eps_arr:
        Ke = fatten(K, log_eps=float(e)) if log_eps else fatten(K, float(e))
        res = equilibrium(Ke, max(panel_count, 8 * len(Ke)), check=False)
        rows.append(
            {
                "log_eps" if log_eps else "eps": float(e),
                "energy": res.energy,
                "capacity": res.capacity,
                "arcs": len(Ke),
            }
        )
    return rows


def arc_energy_exact(half_angle: float) -> float:
    """Equilibrium energy of an arc of half-angle ``beta``: ``1 - log sin(beta/2)``."""
    return 1 - math.log(math.sin(half_angle / 2))


def dumps_arcset(K: ArcSet) -> str:
    return json.dumps(K.to_dict())
