"""Numerical Riemann maps of Jordan domains and the closed-form lemniscate maps.

Interior maps come from the Szego kernel. With ``H`` the Cauchy kernel and
``A(z, w) = H(z, w) - conj(H(w, z))`` the Kerzman-Stein kernel, the Szego
kernel ``S(., a)`` solves the second-kind equation

    S(z, a) - int A(z, w) S(w, a) |dw| = conj(H(a, z)),   z on the curve,

and the Riemann map ``f`` onto the disk with ``f(a) = 0``, ``f'(a) > 0`` has
boundary values ``f(z) = -i T(z) S(z, a)^2 / |S(z, a)|^2`` (``T`` the unit
tangent) and ``f'(a) = 2 pi S(a, a)``. The kernel is smooth on analytic
curves, so the trapezoidal Nystrom discretisation converges geometrically.

Exterior maps are reduced to interior ones by ``w = 1/(z - c)`` with ``c``
inside the curve: if ``psi`` maps the disk onto the inverted interior with
``psi(0) = 0``, then ``phi_plus(zeta) = c + 1/psi(1/zeta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._spectral import TrigInterp, invert_monotone
from .errors import (
    BranchPathCrossesPole,
    P0Outside,
    PoleOnWrongSide,
    SolverSingular,
    TooCloseToBoundary,
)
from .qd_core import QuadDifferential

MIN_NODES = 256
MAX_NODES = 8192
SELF_TEST_TOL = 1e-10


# -- curves ------------------------------------------------------------------


@dataclass(frozen=True)
class ParametricCurve:
    """A closed curve ``z(s)``, ``s`` in [0, 2 pi), counterclockwise."""

    func: object
    deriv: object

    def boundary(self, n: int):
        s = 2 * np.pi * np.arange(n) / n
        return np.asarray(self.func(s), dtype=complex), np.asarray(self.deriv(s), dtype=complex)


def circle(center: complex = 0.0, radius: float = 1.0) -> ParametricCurve:
    return ParametricCurve(lambda s: center + radius * np.exp(1j * s),
                           lambda s: 1j * radius * np.exp(1j * s))


def ellipse(a: float, b: float, center: complex = 0.0) -> ParametricCurve:
    return ParametricCurve(lambda s: center + a * np.cos(s) + 1j * b * np.sin(s),
                           lambda s: -a * np.sin(s) + 1j * b * np.cos(s))


# -- solver ------------------------------------------------------------------


def _winding(nodes: np.ndarray, p: complex) -> float:
    return float(np.angle((np.roll(nodes, -1) - p) / (nodes - p)).sum() / (2 * np.pi))


def _szego_solve(z: np.ndarray, dz: np.ndarray, a: complex):
    """Boundary correspondence ``theta`` (unwrapped) and ``f'(a)`` for the interior map."""
    n = len(z)
    h = 2 * np.pi / n
    speed = np.abs(dz)
    T = dz / speed
    D = z[None, :] - z[:, None]
    np.fill_diagonal(D, 1.0)
    A = (T[None, :] / D - np.conj(T[:, None]) / np.conj(D)) / (2j * np.pi)
    np.fill_diagonal(A, 0.0)
    M = np.eye(n) - A * (speed * h)[None, :]
    rhs = np.conj(T / (z - a)) / (-2j * np.pi)
    try:
        S = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolverSingular(str(exc)) from exc
    if not np.all(np.isfinite(S)):
        raise SolverSingular("non-finite Szego kernel")
    Saa = np.sum(S * dz / (z - a)) * h / (2j * np.pi)
    if not Saa.real > 0 or abs(Saa.imag) > 1e-8 * abs(Saa):
        raise SolverSingular(f"S(a, a) = {Saa} is not positive")
    theta = np.unwrap(np.angle(-1j * T * S * S))
    if theta[0] < -np.pi or theta[0] >= np.pi:
        theta -= 2 * np.pi * np.floor((theta[0] + np.pi) / (2 * np.pi))
    return theta, 2 * np.pi * Saa.real


@dataclass(frozen=True, eq=False)
class _Interior:
    """Interior map of one curve: ``f`` = inverse Riemann map, ``f(a) = 0``."""

    nodes: np.ndarray
    dnodes: np.ndarray
    theta: np.ndarray
    a: complex
    fprime: float
    interp: TrigInterp = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "interp", TrigInterp(self.theta, slope=1.0))

    @property
    def n(self):
        return len(self.nodes)

    @property
    def diameter(self):
        p = self.nodes
        return float(np.abs(p[:, None] - p[None, :]).max()) if len(p) < 2048 else \
            float(max(np.ptp(p.real), np.ptp(p.imag)) * math.sqrt(2))

    def inverse(self, z):
        """``f(z)`` for ``z`` inside, by the barycentric Cauchy formula."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        wts = self.dnodes / (self.nodes[None, :] - z[:, None])
        vals = np.exp(1j * self.theta)
        return (wts @ vals) / wts.sum(axis=1)

    def forward(self, zeta):
        """``f^{-1}(zeta)`` for ``|zeta| < 1``."""
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        e = np.exp(1j * self.theta)
        dzeta = 1j * e * self.interp.grid_derivative()
        wts = dzeta / (e[None, :] - zeta[:, None])
        return (wts @ self.nodes) / wts.sum(axis=1)

    def distance_to_boundary(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.abs(z[:, None] - self.nodes[None, :]).min(axis=1)


def _build_interior(z, dz, a) -> _Interior:
    if abs(_winding(z, a) - 1) > 1e-6:
        raise P0Outside(f"center {a} is not inside the curve")
    theta, fp = _szego_solve(z, dz, a)
    if np.any(np.diff(theta) <= 0) or theta[0] + 2 * np.pi <= theta[-1]:
        raise SolverSingular("boundary correspondence is not monotone")
    return _Interior(z, dz, theta, complex(a), fp)


def _invert_curve(z, dz, c):
    """Nodes of ``w = 1/(z - c)`` reordered counterclockwise."""
    w = 1.0 / (z - c)
    dw = -dz / (z - c) ** 2
    idx = (-np.arange(len(z))) % len(z)
    return w[idx], -dw[idx], idx


@dataclass(frozen=True, eq=False)
class DiskMap:
    """Riemann map between the unit disk (or its exterior) and one side of a curve.

    ``circle_args[m]`` is the argument on the unit circle of boundary node
    ``m``; it increases by ``2 pi`` over the traversal. For the exterior side
    ``center`` is the inversion point used internally and
    ``derivative_at_center`` is ``phi_plus'(inf)``.
    """

    side: str
    boundary_nodes: np.ndarray
    boundary_derivs: np.ndarray
    circle_args: np.ndarray
    center: complex
    derivative_at_center: float
    _inner: _Interior = field(repr=False)
    _order: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.boundary_nodes)

    @property
    def diameter(self) -> float:
        p = self.boundary_nodes
        return float(max(np.ptp(p.real), np.ptp(p.imag)) * math.sqrt(2))

    @property
    def correspondence(self) -> TrigInterp:
        """``theta(sigma)`` over the curve parameter ``sigma`` (uniform node grid)."""
        if not hasattr(self, "_corr"):
            object.__setattr__(self, "_corr", TrigInterp(self.circle_args, slope=1.0))
        return self._corr

    def sigma_of_arg(self, args):
        """Curve parameter whose node maps to ``exp(i args)``."""
        corr = self.correspondence
        args = np.asarray(args, dtype=float)
        sig = 2 * np.pi * np.arange(self.n) / self.n
        base = self.circle_args[0]
        a = base + np.mod(args - base, 2 * np.pi)
        guess = np.interp(a, np.append(self.circle_args, self.circle_args[0] + 2 * np.pi),
                          np.append(sig, 2 * np.pi))
        return invert_monotone(corr, corr.derivative, a, guess)

    def asymptotic_coefficient(self) -> complex:
        """``phi'(0)`` (interior) or ``lim phi(zeta)/zeta`` (exterior) from boundary data."""
        inner = self._inner
        e = np.exp(1j * inner.theta)
        dzeta = 1j * e * inner.interp.grid_derivative() * (2 * np.pi / inner.n)
        psi_prime0 = np.sum(inner.nodes * dzeta / e ** 2) / (2j * np.pi)
        return psi_prime0 if self.side == "interior" else 1.0 / psi_prime0


def _solve_side(curve, side: str, n: int, center: complex) -> DiskMap:
    z, dz = curve.boundary(n)
    if side == "interior":
        inner = _build_interior(z, dz, center)
        return DiskMap("interior", z, dz, inner.theta, complex(center), 1.0 / inner.fprime,
                       inner, np.arange(n))
    if abs(_winding(z, center) - 1) > 1e-6:
        raise P0Outside(f"inversion center {center} is not inside the curve")
    w, dw, idx = _invert_curve(z, dz, center)
    inner = _build_interior(w, dw, 0.0)
    eta = np.empty(n)
    eta[idx] = inner.theta
    args = np.unwrap(-eta)
    args += -2 * np.pi * np.floor((args[0] + np.pi) / (2 * np.pi))
    return DiskMap("exterior", z, dz, args, complex(center), inner.fprime, inner, idx)


def _default_center(curve) -> complex:
    """An interior point far from the boundary: the best enclosed pole, else the centroid."""
    enclosed = getattr(curve, "enclosed_poles", None)
    z, _ = curve.boundary(256)
    if enclosed:
        cands = curve.qd.poles[list(enclosed)]
    else:
        cands = np.array([z.mean()])
    dist = np.abs(cands[:, None] - z[None, :]).min(axis=1)
    return complex(cands[int(np.argmax(dist))])


def _adaptive(curve, side, center, n_nodes, tol) -> DiskMap:
    if n_nodes is not None:
        return _solve_side(curve, side, int(n_nodes), center)
    n = MIN_NODES
    m = _solve_side(curve, side, n, center)
    while True:
        m2 = _solve_side(curve, side, 2 * n, center)
        diff = np.abs(np.exp(1j * m2.circle_args[::2]) - np.exp(1j * m.circle_args)).max()
        if diff <= tol or 2 * n >= MAX_NODES:
            if diff > tol:
                raise SolverSingular(f"self-test failed at N={2 * n}: {diff:.2e}")
            return m
        n, m = 2 * n, m2


def interior_map(curve, p0: Optional[complex] = None, n_nodes: Optional[int] = None,
                 tol: float = SELF_TEST_TOL) -> DiskMap:
    """Riemann map ``phi_minus`` of the bounded side, ``phi(0) = p0``, ``phi'(0) > 0``.

    With ``n_nodes=None`` the node count is the smallest power of two from
    256 whose correspondence agrees with the doubled solve within ``tol``.
    """
    center = _default_center(curve) if p0 is None else complex(p0)
    return _adaptive(curve, "interior", center, n_nodes, tol)


def exterior_map(curve, n_nodes: Optional[int] = None, tol: float = SELF_TEST_TOL,
                 center: Optional[complex] = None) -> DiskMap:
    """Riemann map ``phi_plus`` of the unbounded side, ``phi(inf) = inf``, ``phi'(inf) > 0``."""
    c = _default_center(curve) if center is None else complex(center)
    return _adaptive(curve, "exterior", c, n_nodes, tol)


def map_pair(curve, p0: Optional[complex] = None, n_nodes: Optional[int] = None,
             tol: float = SELF_TEST_TOL):
    """Interior and exterior maps on a common node set.

    With ``n_nodes=None`` the node count doubles from 256 until both
    correspondences agree with their doubled solves within ``tol``.
    """
    ci = _default_center(curve) if p0 is None else complex(p0)
    ce = _default_center(curve)
    if n_nodes is not None:
        n = int(n_nodes)
        return _solve_side(curve, "interior", n, ci), _solve_side(curve, "exterior", n, ce)
    n = MIN_NODES
    pair = (_solve_side(curve, "interior", n, ci), _solve_side(curve, "exterior", n, ce))
    while True:
        nxt = (_solve_side(curve, "interior", 2 * n, ci), _solve_side(curve, "exterior", 2 * n, ce))
        diff = max(np.abs(np.exp(1j * b.circle_args[::2]) - np.exp(1j * a.circle_args)).max()
                   for a, b in zip(pair, nxt))
        if diff <= tol:
            return pair
        if 2 * n >= MAX_NODES:
            raise SolverSingular(f"self-test failed at N={2 * n}: {diff:.2e}")
        n, pair = 2 * n, nxt


# -- evaluation --------------------------------------------------------------


def _margin(dmap: DiskMap) -> float:
    return 2 * np.pi / dmap.n


def evaluate_inside(dmap: DiskMap, zeta):
    """``phi(zeta)``; ``|zeta| < 1`` for interior maps, ``|zeta| > 1`` for exterior ones."""
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    if dmap.side == "interior":
        if np.any(1 - np.abs(zeta) < 2 * _margin(dmap)):
            raise TooCloseToBoundary("disk point too close to the unit circle")
        out = dmap._inner.forward(zeta)
    else:
        if np.any(1 - 1 / np.abs(zeta) < 2 * _margin(dmap)):
            raise TooCloseToBoundary("disk point too close to the unit circle")
        out = dmap.center + 1.0 / dmap._inner.forward(1.0 / zeta)
    return out


def evaluate_inverse(dmap: DiskMap, z):
    """``phi^{-1}(z)`` for ``z`` on the map's side of the curve."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    inner = dmap._inner
    if dmap.side == "interior":
        q = z
    else:
        q = 1.0 / (z - dmap.center)
    if np.any(inner.distance_to_boundary(q) < _margin(dmap) * inner.diameter):
        raise TooCloseToBoundary("point too close to the curve")
    out = inner.inverse(q)
    return out if dmap.side == "interior" else 1.0 / out


def pole_preimages(dmap: DiskMap, qd: QuadDifferential, indices=None) -> np.ndarray:
    """Disk preimages of poles on the map's side.

    Interior maps return ``phi_minus^{-1}(a_i)`` (inside the disk). Exterior
    maps return the preimages in the disk of the internal inverted problem,
    ``zeta_int = 1/phi_plus^{-1}(a_i)``, also inside the disk; callers that need
    the exterior point take ``1/zeta_int``.
    """
    idx = list(range(qd.n)) if indices is None else list(indices)
    poles = qd.poles[idx]
    inside = np.array([abs(_winding(dmap.boundary_nodes, a) - 1) < 0.5 for a in poles])
    want_inside = dmap.side == "interior"
    if np.any(inside != want_inside):
        bad = [i for i, ok in zip(idx, inside == want_inside) if not ok]
        raise PoleOnWrongSide(f"poles {bad} are not on the {dmap.side} side")
    if dmap.side == "interior":
        return evaluate_inverse(dmap, poles)
    q = 1.0 / (poles - dmap.center)
    inner = dmap._inner
    if np.any(inner.distance_to_boundary(q) < _margin(dmap) * inner.diameter):
        raise TooCloseToBoundary("pole too close to the curve")
    return inner.inverse(q)


# -- closed-form maps ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BranchTrackedMap:
    """``z -> (f(z)/lam)^exponent`` with ``arg f`` continued from a base point.

    At ``base_point`` every ``arg(z - a_i)`` takes its principal value; along
    a path the arguments are continued segment by segment.
    """

    qd: QuadDifferential
    level: float
    exponent: float
    base_point: complex
    base_argument: float

    def _args_along(self, path: np.ndarray) -> np.ndarray:
        qd = self.qd
        pts = [path[0]]
        for p, q in zip(path[:-1], path[1:]):
            seg = q - p
            L = abs(seg)
            if L == 0:
                pts.append(q)
                continue
            t = np.clip(((qd.poles - p) * np.conj(seg)).real / L ** 2, 0, 1)
            d = np.abs(p + t * seg - qd.poles).min()
            if d <= 1e-13 * max(L, 1.0):
                raise BranchPathCrossesPole("path passes through a pole")
            k = int(math.ceil(4 * L / d))
            if k > 1:
                pts.extend(p + seg * np.arange(1, k) / k)
            pts.append(q)
        pts = np.array(pts)
        ang = np.unwrap(np.angle(pts[:, None] - qd.poles), axis=0)
        keep = [0]
        # indices of the original path vertices in the refined list
        j = 0
        for q in path[1:]:
            j += 1
            while pts[j] != q:
                j += 1
            keep.append(j)
        return (ang[keep] * qd.weights).sum(axis=1)

    def evaluate_path(self, path) -> np.ndarray:
        """Values along ``path``; the path is prefixed with the base point."""
        path = np.atleast_1d(np.asarray(path, dtype=complex))
        full = np.concatenate([[self.base_point], path])
        args = self._args_along(full)[1:]
        logmod = self.qd.potential(path) - math.log(self.level)
        return np.exp(self.exponent * (logmod + 1j * args))

    def on_curve(self, nodes) -> np.ndarray:
        """Values at closed-curve nodes, continued along the nodes from the base point."""
        nodes = np.asarray(nodes, dtype=complex)
        start = int(np.argmin(np.abs(nodes - self.base_point)))
        path = np.roll(nodes, -start)
        vals = self.evaluate_path(path)
        return np.roll(vals, start)


def _branch_map(qd, lam, curve, exponent) -> BranchTrackedMap:
    pts = curve.points if hasattr(curve, "points") else np.asarray(curve)
    base = complex(pts[int(np.argmax(pts.real))])
    base_arg = float((np.angle(base - qd.poles) * qd.weights).sum())
    return BranchTrackedMap(qd, float(lam), float(exponent), base, base_arg)


def _pick_component(qd, lam, kind, j=None):
    from .tracer import classify, find_components

    for cv in find_components(qd, lam):
        cls = classify(cv, qd)
        if cls.kind == kind and (j is None or cls.pole == j):
            return cv
    raise ValueError(f"no {kind} component at level {lam}")


def closed_form_exterior(qd: QuadDifferential, lam: float, curve=None) -> BranchTrackedMap:
    """``(f/lam)^(1/alpha)``: the inverse exterior map of a proper sub-lemniscate."""
    from .tracer import find_components

    # with one pole the outer component is also a CircleAtPole, so test the signature
    if curve is None:
        outer = [c for c in find_components(qd, lam) if len(c.enclosed_poles) == qd.n]
        if not outer:
            raise ValueError(f"no CircleAtInfinity component at level {lam}")
        curve = outer[0]
    elif len(curve.enclosed_poles) != qd.n:
        from .errors import WrongDomainClass
        raise WrongDomainClass("closed-form exterior map needs a CircleAtInfinity component")
    return _branch_map(qd, lam, curve, 1.0 / qd.alpha)


def closed_form_interior(qd: QuadDifferential, lam: float, j: int, curve=None) -> BranchTrackedMap:
    """``(f/lam)^(1/w_j)``: the inverse interior map of a sub-lemniscate around pole ``j``."""
    from .tracer import classify

    if curve is None:
        curve = _pick_component(qd, lam, "circle_pole", j)
    else:
        cls = classify(curve, qd)
        if cls.kind != "circle_pole" or cls.pole != j:
            from .errors import WrongDomainClass
            raise WrongDomainClass(f"component is {cls}, not CircleAtPole({j})")
    return _branch_map(qd, lam, curve, 1.0 / qd.weights[j])
