"""Level curves of the log-potential: tracing, census, classification, critical graph.

Horizontal trajectories are level sets ``u = ln lam`` of
``u = sum_i w_i ln|z - a_i|``. With ``F`` the field, ``grad u = conj(F)`` and
the unit tangent is ``i conj(F)/|F|``; along that direction the harmonic
conjugate ``v = Im sum_i w_i log(z - a_i)`` increases at rate ``|F|``. The
tracer integrates the tangent field with an embedded Dormand-Prince pair and
Newton-projects every accepted point back onto the level set.

``v`` doubles as an analytic parameter of a closed level curve: the point
with ``u = ln lam`` and ``v = v0 + W t`` (``W`` the sum of enclosed weights)
is found by complex Newton on ``log f``, which is what
:meth:`ClosedCurve.boundary` uses to hand spectrally accurate nodes to the
conformal-map solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    BoxTooSmall,
    NearCriticalPoint,
    NoClosure,
    NumericalError,
    TraceEscape,
)
from ._spectral import significant
from .qd_core import QuadDifferential, critical_set

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))

LEVEL_TOL = 1e-13


@dataclass(frozen=True)
class StepControl:
    """Integrator tolerances, all relative to a local length scale."""

    rtol: float = 1e-10
    max_step: float = 0.08
    first_step: float = 0.01
    projection_tol: float = LEVEL_TOL
    closure_tol: float = 1e-8
    arc_bound: float = 1e3
    critical_field_tol: float = 1e-8


DEFAULT_CONTROL = StepControl()


def _dp45(direction, z: complex, h: float):
    k = [direction(z)]
    for a_row in _A[1:]:
        zz = z
        for a, kk in zip(a_row, k):
            zz += h * a * kk
        k.append(direction(zz))
    z5 = z
    err = 0j
    for b, e, kk in zip(_B5, _E, k):
        z5 += h * b * kk
        err += h * e * kk
    return z5, abs(err)


def _nearest_pole_distance(qd: QuadDifferential, z: complex) -> float:
    return min(abs(z - a) for a in qd.poles.tolist())


def _rounding_floor(qd: QuadDifferential, z: complex, fz: complex) -> float:
    """Size of the rounding error of ``u`` at ``z``: a one-ulp move of ``z`` plus the summation."""
    eps = np.finfo(float).eps
    terms = sum(abs(w * math.log(abs(z - a))) for a, w in qd._pw)
    return 8 * eps * (abs(z) * abs(fz) + terms)


def project_to_level(qd: QuadDifferential, z: complex, ell: float, tol: float = LEVEL_TOL,
                     max_iter: int = 60) -> complex:
    """Newton projection onto ``u = ell`` along the gradient (``z -= (u - ell)/F``).

    The target accuracy is ``tol`` (relative to ``max(1, |ell|)``) or the
    rounding floor of ``u`` at ``z``, whichever is larger; the floor matters
    only on curves hugging a pole.
    """
    scale = max(1.0, abs(ell))
    for _ in range(max_iter):
        r = qd.potential_scalar(z) - ell
        fz = qd.field_scalar(z)
        if abs(r) <= tol * scale + _rounding_floor(qd, z, fz):
            return z
        dz = r / fz
        # damp to stay inside the basin next to a pole
        d = _nearest_pole_distance(qd, z)
        if abs(dz) > 0.5 * d:
            dz *= 0.5 * d / abs(dz)
        z = z - dz
    r = qd.potential_scalar(z) - ell
    if abs(r) <= 1e3 * tol * scale + _rounding_floor(qd, z, qd.field_scalar(z)):
        return z
    raise NumericalError(f"level projection did not converge (residual {r:.3e})")


def _signed_area(pts: np.ndarray) -> float:
    # centred, so that tiny curves far from the origin keep their digits
    pts = pts - pts.mean()
    x, y = pts.real, pts.imag
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def winding_numbers(points: np.ndarray, targets) -> np.ndarray:
    """Discrete winding numbers of the closed polyline ``points`` around ``targets``."""
    pts = np.asarray(points, dtype=complex)
    nxt = np.roll(pts, -1)
    t = np.asarray(targets, dtype=complex)
    ang = np.angle((nxt[:, None] - t) / (pts[:, None] - t)).sum(axis=0)
    return ang / (2 * np.pi)


@dataclass(frozen=True, eq=False)
class ClosedCurve:
    """A traced sub-lemniscate, counterclockwise, first point repeated implicitly.

    ``harmonic`` holds the continuous harmonic conjugate ``v`` at every point
    (0 at the start); over one counterclockwise turn it grows by
    ``2 pi * enclosed_weight``. Together with ``qd`` and ``level`` this is the
    analytic-refinement metadata used by :meth:`boundary`.
    """

    points: np.ndarray
    level: float
    enclosed_poles: tuple
    arc_param: np.ndarray
    harmonic: np.ndarray
    qd: QuadDifferential = field(repr=False)

    @property
    def log_level(self) -> float:
        return math.log(self.level)

    @property
    def enclosed_weight(self) -> float:
        return float(math.fsum(self.qd.weights[list(self.enclosed_poles)].tolist()))

    @property
    def length(self) -> float:
        return float(self.arc_param[-1] + abs(self.points[0] - self.points[-1]))

    @property
    def diameter(self) -> float:
        p = self.points
        return float(max(np.ptp(p.real), np.ptp(p.imag)) * math.sqrt(2))

    def contains(self, z) -> np.ndarray:
        return np.abs(winding_numbers(self.points, np.atleast_1d(z))) > 0.5

    # -- analytic refinement -------------------------------------------------

    def points_at(self, t) -> np.ndarray:
        """Curve points at conformal parameter ``t`` in [0, 2 pi) (``v = W t``)."""
        qd = self.qd
        W = self.enclosed_weight
        t = np.mod(np.asarray(t, dtype=float), 2 * np.pi)
        tk = np.append(self.harmonic / W, 2 * np.pi)
        pk = np.append(self.points, self.points[0])
        idx = np.clip(np.searchsorted(tk, t, side="right") - 1, 0, len(self.points) - 1)
        frac = (t - tk[idx]) / (tk[idx + 1] - tk[idx])
        z = pk[idx] + frac * (pk[idx + 1] - pk[idx])
        ref = self.points[idx]
        vref = self.harmonic[idx]
        vt = W * t
        ell = self.log_level
        for _ in range(50):
            r = (qd.potential(z) - ell) + 1j * (vref + qd.log_ratio(z, ref).imag - vt)
            step = r / qd.field(z)
            z = z - step
            if np.max(np.abs(step)) <= 1e-15 * self.diameter:
                break
        return z

    def tangent_at(self, z) -> np.ndarray:
        fz = self.qd.field(z)
        return 1j * np.sign(self.enclosed_weight) * np.conj(fz) / np.abs(fz)

    def boundary(self, n: int):
        """``n`` nodes uniform in arc length and ``dz/dsigma`` (cached per ``n``)."""
        cache = self.__dict__.setdefault("_boundary_cache", {})
        if n not in cache:
            cache[n] = self._boundary(n)
        z, dz = cache[n]
        return z.copy(), dz.copy()

    def _boundary(self, n: int):
        """Arc-length resampling for ``sigma`` in [0, 2 pi).

        The arc-length function of the conformal parameter is computed
        spectrally on a fine grid, refined until its Fourier tail is at
        round-off, then inverted by Newton at the target arc lengths.
        """
        W = self.enclosed_weight
        nf = 1 << max(6, int(math.ceil(math.log2(2 * n))))
        while True:
            tf = 2 * np.pi * np.arange(nf) / nf
            zf = self.points_at(tf)
            g = abs(W) / np.abs(self.qd.field(zf))
            c = np.fft.rfft(g) / nf
            tail = np.abs(c[nf // 4:]).max()
            if tail <= 1e-15 * c[0].real or nf >= 1 << 17:
                break
            nf *= 2
        c0 = c[0].real
        k = np.arange(1, len(c))
        ck = 2 * c[1:]
        if nf % 2 == 0:
            ck[-1] = c[-1]
        keep = significant(ck / k)
        k, ck = k[keep], ck[keep]
        L = 2 * np.pi * c0

        def s_and_ds(t):
            out_s = np.empty_like(t)
            out_g = np.empty_like(t)
            for lo in range(0, len(t), 256):
                tt = t[lo:lo + 256]
                e = np.exp(1j * np.outer(tt, k))
                out_s[lo:lo + 256] = c0 * tt + ((e - 1) / (1j * k) @ ck).real
                out_g[lo:lo + 256] = c0 + (e @ ck).real
            return out_s, out_g

        cum = np.concatenate([[0.0], np.cumsum(0.5 * (g + np.roll(g, -1))) * (2 * np.pi / nf)])
        cum *= L / cum[-1]
        targets = L * np.arange(n) / n
        t = np.interp(targets, cum, np.append(tf, 2 * np.pi))
        for _ in range(20):
            s, ds = s_and_ds(t)
            step = (s - targets) / ds
            t = t - step
            if np.max(np.abs(step)) < 1e-15:
                break
        z = self.points_at(t)
        dz = (L / (2 * np.pi)) * self.tangent_at(z)
        return z, dz


# -- tracing -----------------------------------------------------------------


def _field_terms(qd: QuadDifferential, z: complex) -> float:
    return sum(abs(w) / abs(z - a) for a, w in qd._pw)


def _local_scale(qd: QuadDifferential, z: complex, zeros=()) -> float:
    d = _nearest_pole_distance(qd, z)
    for zk in zeros:
        d = min(d, abs(z - zk))
    return d


def _harmonic_increments(qd: QuadDifferential, pts: np.ndarray) -> np.ndarray:
    nxt = np.roll(pts, -1)
    return qd.log_ratio(nxt, pts).imag


def _finish_curve(qd: QuadDifferential, pts: np.ndarray, lam: float) -> ClosedCurve:
    if _signed_area(pts) < 0:
        pts = np.concatenate([pts[:1], pts[:0:-1]])
    wind = winding_numbers(pts, qd.poles)
    enclosed = tuple(int(i) for i in np.flatnonzero(wind >= 0.5))
    dv = _harmonic_increments(qd, pts)
    harmonic = np.concatenate([[0.0], np.cumsum(dv[:-1])])
    seg = np.abs(np.roll(pts, -1) - pts)
    arc = np.concatenate([[0.0], np.cumsum(seg[:-1])])
    curve = ClosedCurve(pts, float(lam), enclosed, arc, harmonic, qd)
    total = dv.sum()
    W = curve.enclosed_weight if enclosed else 0.0
    if not enclosed or abs(total - 2 * np.pi * W) > 1e-6 * max(1.0, abs(total)):
        raise NumericalError(
            f"traced curve inconsistent: enclosed {enclosed}, harmonic turn {total:.6g}")
    return curve


def trace_level_curve(qd: QuadDifferential, seed: complex, lam: float,
                      step_ctl: StepControl = DEFAULT_CONTROL) -> ClosedCurve:
    """Trace the closed component of ``{u = ln lam}`` through ``seed``."""
    if not lam > 0:
        raise ValueError("level must be positive")
    ell = math.log(lam)
    z0 = project_to_level(qd, complex(seed), ell, step_ctl.projection_tol)
    scale0 = max(qd.length_scale, abs(z0 - qd.center))
    arc_bound = step_ctl.arc_bound * scale0

    def direction(z):
        f = qd.field_scalar(z)
        return 1j * f.conjugate() / abs(f)

    loc = _local_scale(qd, z0)
    h0 = step_ctl.first_step * loc
    h = h0
    z = z0
    pts = [z0]
    arc = 0.0
    while True:
        loc = _local_scale(qd, z)
        h = min(h, step_ctl.max_step * loc)
        z_new, err = _dp45(direction, z, h)
        tol = step_ctl.rtol * loc
        if err > tol:
            h *= max(0.2, 0.9 * (tol / err) ** 0.2)
            continue
        z_new = project_to_level(qd, z_new, ell, step_ctl.projection_tol)
        # |F| against the size of its terms, so that huge curves of a small total weight pass
        if abs(qd.field_scalar(z_new)) < step_ctl.critical_field_tol * _field_terms(qd, z_new):
            raise NearCriticalPoint(f"field vanishes near {z_new:.6g}; level {lam} too close to a critical value")
        if arc > 10 * h0 and abs(z - z0) < 3 * max(h, abs(z_new - z)):
            dv_start = float(qd.log_ratio(z0, z).imag)
            dv_step = float(qd.log_ratio(z_new, z).imag)
            if 0 < dv_start <= dv_step * (1 + 1e-12):
                gap = _close_gap(qd, direction, z, z0, ell, step_ctl)
                if gap > step_ctl.closure_tol * scale0:
                    raise NoClosure(f"closure gap {gap:.3e} exceeds tolerance")
                break
        arc += abs(z_new - z)
        z = z_new
        pts.append(z)
        if arc > arc_bound:
            raise NoClosure(f"arc length exceeded {arc_bound:.3g} without closing")
        if err > 0:
            h *= min(5.0, 0.9 * (tol / err) ** 0.2)
        else:
            h *= 5.0
    return _finish_curve(qd, np.array(pts), lam)


def _close_gap(qd, direction, z, z0, ell, step_ctl) -> float:
    """Distance at which the trajectory from ``z`` passes ``z0``.

    Newton on the arc length ``s`` of a single step from ``z`` so that the
    harmonic conjugate matches the one at ``z0``.
    """
    s = float(qd.log_ratio(z0, z).imag) / abs(qd.field_scalar(z))
    zn = z
    for _ in range(8):
        zn, _ = _dp45(direction, z, s)
        zn = project_to_level(qd, zn, ell, step_ctl.projection_tol)
        miss = float(qd.log_ratio(z0, zn).imag)
        s += miss / abs(qd.field_scalar(zn))
        if abs(miss) < 1e-15:
            break
    return abs(zn - z0)


def trace_orthogonal(qd: QuadDifferential, seed: complex, arc_limit: float,
                     ascending: bool = False, first_step: Optional[float] = None,
                     step_ctl: StepControl = DEFAULT_CONTROL) -> np.ndarray:
    """Trace a vertical trajectory (gradient line of ``u``) from ``seed``.

    Stops at ``arc_limit`` or within ``1e-6`` (relative) of a pole or zero.
    Returns the open polyline.
    """
    sign = 1.0 if ascending else -1.0
    zeros = critical_set(qd).zeros.tolist() if qd.n > 1 else []
    stop = 1e-6 * qd.length_scale

    def direction(z):
        f = qd.field_scalar(z)
        return sign * f.conjugate() / abs(f)

    z = complex(seed)
    pts = [z]
    arc = 0.0
    h = first_step if first_step is not None else step_ctl.first_step * _local_scale(qd, z, zeros)
    while arc < arc_limit:
        loc = _local_scale(qd, z, zeros)
        if loc < stop:
            break
        h = min(h, step_ctl.max_step * loc, arc_limit - arc)
        if h <= 0:
            break
        z_new, err = _dp45(direction, z, h)
        tol = step_ctl.rtol * loc
        if err > tol:
            h *= max(0.2, 0.9 * (tol / err) ** 0.2)
            continue
        arc += h
        z = z_new
        pts.append(z)
        h *= min(5.0, 0.9 * (tol / err) ** 0.2) if err > 0 else 5.0
    return np.array(pts)


# -- census ------------------------------------------------------------------


def outer_radius(qd: QuadDifferential, lam: float) -> float:
    """Radius about the pole centroid outside which ``u > ln lam`` everywhere."""
    c = qd.center
    rho = float(np.abs(qd.poles - c).max())
    P = float(qd.weights[qd.weights > 0].sum())
    Q = float(-qd.weights[qd.weights < 0].sum())
    ell = math.log(lam)
    r = max(2 * rho, 1e-3 * qd.length_scale, 1e-300)
    while P * math.log(r - rho) - Q * math.log(r + rho) <= ell + 1e-3:
        r *= 1.5
    return r


def _ray_crossings(qd: QuadDifferential, lam: float, start: complex, angle: float, length: float,
                   inner: float):
    from scipy.optimize import brentq

    ell = math.log(lam)
    d = np.unique(np.concatenate([
        np.geomspace(inner, length, 3000),
        np.linspace(0, length, 3000)[1:],
    ]))
    e = np.exp(1j * angle)
    g = qd.potential(start + d * e) - ell
    ok = np.isfinite(g)
    d, g = d[ok], g[ok]
    sc = np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)
    out = []
    for i in sc:
        x = brentq(lambda s: qd.potential_scalar(start + s * e) - ell, d[i], d[i + 1],
                   xtol=1e-15 * length, rtol=1e-15)
        z = start + x * e
        if _nearest_pole_distance(qd, z) > 0 and abs(qd.potential_scalar(z) - ell) < 1e-8 * max(1, abs(ell)):
            out.append(z)
    return out


def _on_curve(curve: ClosedCurve, z: complex) -> bool:
    p = curve.points
    q = np.roll(p, -1)
    seg = q - p
    t = np.clip(((z - p) * np.conj(seg)).real / np.abs(seg) ** 2, 0, 1)
    dist = np.abs(p + t * seg - z)
    i = int(np.argmin(dist))
    return dist[i] <= 0.05 * abs(seg[i]) + 1e-12 * curve.diameter


def find_components(qd: QuadDifferential, lam: float, rays_per_pole: int = 8,
                    step_ctl: StepControl = DEFAULT_CONTROL) -> list:
    """All components of the lemniscate ``{u = ln lam}``, sorted by signature."""
    if not lam > 0:
        raise ValueError("level must be positive")
    cs = critical_set(qd)
    for w in cs.values:
        if abs(lam - w) <= 1e-6 * w:
            raise NearCriticalPoint(f"level {lam} within 1e-6 of critical value {w}")
    R = outer_radius(qd, lam)
    c = qd.center
    inner = 1e-13 * qd.length_scale
    found: dict[tuple, ClosedCurve] = {}
    offset = 0.123456789
    for a in qd.poles.tolist():
        length = R + abs(a - c)
        for r in range(rays_per_pole):
            ang = offset + 2 * np.pi * r / rays_per_pole
            for z in _ray_crossings(qd, lam, a, ang, length, inner):
                if any(_on_curve(cv, z) for cv in found.values()):
                    continue
                cv = trace_level_curve(qd, z, lam, step_ctl)
                found.setdefault(cv.enclosed_poles, cv)
    return [found[k] for k in sorted(found, key=lambda s: (len(s), s))]


@dataclass(frozen=True)
class DomainClass:
    kind: str  # "circle_infinity" | "circle_pole" | "ring"
    pole: Optional[int] = None
    inner: tuple = ()

    def __str__(self):
        if self.kind == "circle_pole":
            return f"CircleAtPole({self.pole})"
        if self.kind == "circle_infinity":
            return "CircleAtInfinity"
        return f"Ring({list(self.inner)})"


def classify(curve: ClosedCurve, qd: Optional[QuadDifferential] = None) -> DomainClass:
    """Configuration domain containing a sub-lemniscate, from its enclosed poles."""
    qd = qd if qd is not None else curve.qd
    enc = tuple(curve.enclosed_poles)
    if len(enc) == 1:
        return DomainClass("circle_pole", pole=enc[0], inner=enc)
    if len(enc) == qd.n:
        return DomainClass("circle_infinity", inner=enc)
    return DomainClass("ring", inner=enc)


# -- critical graph ----------------------------------------------------------


@dataclass(frozen=True)
class CriticalGraph:
    vertices: np.ndarray
    edges: list  # [(k_start, k_end, polyline)]
    component_count: int


def _critical_directions(qd: QuadDifferential, zk: complex, m: int) -> np.ndarray:
    c = (-1) ** m * np.sum(qd.weights / (zk - qd.poles) ** (m + 1)) / (m + 1)
    ell = np.arange(2 * (m + 1))
    return (np.pi / 2 + np.pi * ell - np.angle(c)) / (m + 1)


def critical_graph(qd: QuadDifferential, step_ctl: StepControl = DEFAULT_CONTROL) -> CriticalGraph:
    """Trace every critical trajectory and count connected components.

    From a zero of ``F`` of multiplicity ``m`` (a zero of order ``2m`` of the
    differential) ``2(m + 1)`` horizontal arcs emanate.
    """
    if qd.n < 2:
        return CriticalGraph(np.zeros(0, complex), [], 0)
    distinct = critical_set(qd).distinct()
    verts = np.array([z for z, _, _ in distinct])
    levels = [math.log(w) for _, _, w in distinct]
    dirs = [_critical_directions(qd, z, m) for z, m, _ in distinct]
    sep = []
    for k, z in enumerate(verts):
        others = [abs(z - v) for j, v in enumerate(verts) if j != k]
        sep.append(min([_nearest_pole_distance(qd, z)] + others))
    used = set()
    edges = []
    parent = list(range(len(verts)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    arc_bound = step_ctl.arc_bound * qd.length_scale
    for k, zk in enumerate(verts):
        for d_idx, theta in enumerate(dirs[k]):
            if (k, d_idx) in used:
                continue
            used.add((k, d_idx))
            ell = levels[k]
            eps = 1e-3 * sep[k]
            start = project_to_level(qd, zk + eps * np.exp(1j * theta), ell, 1e-14)
            f0 = qd.field_scalar(start)
            sgn = 1.0 if ((1j * f0.conjugate()) * np.exp(-1j * theta)).real > 0 else -1.0

            def direction(z, sgn=sgn):
                f = qd.field_scalar(z)
                return sgn * 1j * f.conjugate() / abs(f)

            same_level = [j for j in range(len(verts)) if abs(levels[j] - ell) <= 1e-9 * max(1, abs(ell))]
            z, pts, arc = start, [zk, start], 0.0
            h = 0.1 * eps
            end = None
            while end is None:
                loc = _nearest_pole_distance(qd, z)
                dz_near = [(abs(z - verts[j]), j) for j in same_level]
                dmin, jmin = min(dz_near)
                if dmin < 1e-4 * sep[jmin] and arc > 2 * eps:
                    end = jmin
                    break
                loc = min(loc, dmin)
                h = min(h, step_ctl.max_step * loc)
                z_new, err = _dp45(direction, z, h)
                tol = step_ctl.rtol * loc
                if err > tol:
                    h *= max(0.2, 0.9 * (tol / err) ** 0.2)
                    continue
                z_new = project_to_level(qd, z_new, ell, 1e-14)
                arc += abs(z_new - z)
                z = z_new
                pts.append(z)
                if arc > arc_bound:
                    raise TraceEscape("critical trajectory did not terminate")
                h *= min(5.0, 0.9 * (tol / err) ** 0.2) if err > 0 else 5.0
            pts.append(verts[end])
            arrive = np.angle(pts[-2] - verts[end])
            diff = np.angle(np.exp(1j * (dirs[end] - arrive)))
            used.add((end, int(np.argmin(np.abs(diff)))))
            edges.append((k, end, np.array(pts)))
            parent[find(k)] = find(end)
    comps = len({find(i) for i in range(len(verts))})
    return CriticalGraph(verts, edges, comps)


# -- independent oracle ------------------------------------------------------


def default_bbox(qd: QuadDifferential, lam: float):
    c = qd.center
    half = max(qd.diameter / 2 + 3 * qd.length_scale, 1.25 * outer_radius(qd, lam))
    return (c.real - half, c.real + half, c.imag - half, c.imag + half)


def marching_squares_oracle(qd: QuadDifferential, lam: float, bbox=None, resolution: int = 512):
    """Grid contouring of ``u = ln lam``; returns ``(count, [polyline, ...])``.

    Independent of the tracer: values on a lattice, linear interpolation on
    cell edges (scikit-image's marching squares). A contour that leaves the
    box raises :class:`BoxTooSmall`.
    """
    from skimage.measure import find_contours

    if resolution < 512:
        raise ValueError("resolution must be at least 512")
    x0, x1, y0, y1 = bbox if bbox is not None else default_bbox(qd, lam)
    # irrational shift keeps lattice nodes off the poles
    dx, dy = (x1 - x0) / (resolution - 1), (y1 - y0) / (resolution - 1)
    xs = x0 + dx * (np.arange(resolution) + 0.318309886)
    ys = y0 + dy * (np.arange(resolution) + 0.271828183)
    X, Y = np.meshgrid(xs, ys)
    U = qd.potential(X + 1j * Y)
    U = np.clip(U, -1e300, 1e300)
    lines = []
    for c in find_contours(U, math.log(lam)):
        if not np.allclose(c[0], c[-1]):
            raise BoxTooSmall("contour reaches the bounding box; enlarge it")
        r, col = c[:, 0], c[:, 1]
        lines.append(np.interp(col, np.arange(resolution), xs) + 1j * np.interp(r, np.arange(resolution), ys))
    return len(lines), lines
