"""Fingerprints ``k = phi_plus^{-1} o phi_minus`` and their Blaschke-product formulas.

Powers of Blaschke products with real exponents are multivalued on the unit
circle, so they are never evaluated through per-point principal branches.
Each factor has an exactly continuous argument on the circle,

    arg (e^{it} - b)/(1 - conj(b) e^{it}) = t + 2 Arg(1 - b e^{-it}),   |b| < 1,

(``Re(1 - b e^{-it}) > 0`` keeps the principal ``Arg`` continuous), which
gives a closed-form continuous argument for the whole product.

Exterior preimages ``c = phi_plus^{-1}(a)`` (``|c| > 1``) enter through
factors ``(z - c)/(1 - conj(c) z)``. With ``d = 1/conj(c)`` inside the disk
such a factor is a unimodular constant divided by the disk factor at ``d``,
so it is carried as centre ``d`` with the exponent negated; in the internal
representation of exterior maps ``d = conj(zeta_int)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .confmap import DiskMap, pole_preimages
from .errors import (
    CenterOnCircle,
    CurveMismatch,
    NonMonotone,
    NonUnitModulus,
    WrongDomainClass,
)
from .qd_core import QuadDifferential
from .tracer import classify

DEFAULT_SAMPLES = 1024
_GOLDEN = (math.sqrt(5) - 1) / 2


def _wrap(x):
    """Into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)


@dataclass(frozen=True)
class BlaschkeProduct:
    """``e^{i rotation} z^monomial_power prod_i ((z - b_i)/(1 - conj(b_i) z))^{e_i}``."""

    centers: np.ndarray
    exponents: np.ndarray
    rotation: float = 0.0
    monomial_power: float = 0.0

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.centers, dtype=complex))
        e = np.atleast_1d(np.asarray(self.exponents, dtype=float))
        if c.shape != e.shape:
            raise ValueError("centers and exponents differ in length")
        if np.any(np.abs(c) >= 1 - 1e-14):
            raise CenterOnCircle("Blaschke centers must lie strictly inside the unit disk")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "exponents", e)

    @property
    def degree(self) -> float:
        return float(self.monomial_power + self.exponents.sum())

    def arg(self, t):
        """Continuous argument on the circle at angles ``t``."""
        t = np.asarray(t, dtype=float)
        b = self.centers
        fac = t[..., None] + 2 * np.angle(1 - b * np.exp(-1j * t[..., None]))
        return self.rotation + self.monomial_power * t + (fac * self.exponents).sum(axis=-1)

    def arg_derivative(self, t):
        """``d arg/dt``: a weighted sum of Poisson kernels."""
        t = np.asarray(t, dtype=float)
        b = self.centers
        pk = (1 - np.abs(b) ** 2) / np.abs(np.exp(1j * t[..., None]) - b) ** 2
        return self.monomial_power + (pk * self.exponents).sum(axis=-1)

    def factors(self, z):
        """The individual factors ``(z - b)/(1 - conj(b) z)`` (no exponents)."""
        z = np.asarray(z, dtype=complex)
        b = self.centers
        return (z[..., None] - b) / (1 - np.conj(b) * z[..., None])


def blaschke_eval(B: BlaschkeProduct, root_exponent: float, thetas) -> np.ndarray:
    """Samples of ``B(e^{i theta})^root_exponent``, continued from the principal value at 0."""
    if root_exponent == 0:
        raise ValueError("root exponent must be nonzero")
    return np.exp(1j * _root_arg(B, root_exponent, thetas))


def _root_arg(B: BlaschkeProduct, r: float, t):
    a0 = float(B.arg(0.0))
    return r * (B.arg(t) - a0 + float(_wrap(a0)))


# -- fingerprints ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Fingerprint:
    """Samples ``k(e^{i theta_m})`` on a uniform grid starting at 0."""

    thetas: np.ndarray
    values: np.ndarray
    winding: int

    @classmethod
    def from_args(cls, thetas, args) -> "Fingerprint":
        args = np.asarray(args, dtype=float)
        turn = args[-1] - args[0] + float(_wrap(args[0] - args[-1]))
        return cls(np.asarray(thetas, dtype=float), np.exp(1j * args), int(round(turn / (2 * np.pi))))

    @property
    def args(self) -> np.ndarray:
        return np.unwrap(np.angle(self.values))

    def is_monotone(self) -> bool:
        a = np.angle(self.values)
        steps = _wrap(np.diff(np.append(a, a[0])))
        return bool(np.all(steps > 0))

    def rotated(self, theta: float) -> "Fingerprint":
        return Fingerprint(self.thetas, np.exp(1j * theta) * self.values, self.winding)


def uniform_grid(m: int) -> np.ndarray:
    return 2 * np.pi * np.arange(m) / m


def winding(fp: Fingerprint) -> int:
    """Turning number of the sampled circle map."""
    if np.max(np.abs(np.abs(fp.values) - 1)) > 1e-10:
        raise NonUnitModulus("fingerprint samples are not on the unit circle")
    a = np.angle(fp.values)
    return int(round(_wrap(np.diff(np.append(a, a[0]))).sum() / (2 * np.pi)))


def _check_pair(int_map: DiskMap, ext_map: DiskMap):
    if int_map.side != "interior" or ext_map.side != "exterior":
        raise ValueError("need an interior and an exterior map")
    if int_map.n != ext_map.n or np.max(np.abs(int_map.boundary_nodes - ext_map.boundary_nodes)) > \
            1e-10 * max(int_map.diameter, 1e-300):
        raise CurveMismatch("maps were built on different boundary nodes")


def _composed_args(first: DiskMap, second: DiskMap, thetas) -> np.ndarray:
    """Continuous ``arg`` of ``second^{-1} o first`` at circle angles ``thetas``."""
    sig = first.sigma_of_arg(thetas)
    out = second.correspondence(sig)
    # the parameter wraps once along the grid; keep the image argument continuous
    return np.unwrap(out)


def numeric_fingerprint(int_map: DiskMap, ext_map: DiskMap, samples: int = DEFAULT_SAMPLES) -> Fingerprint:
    """``k = phi_plus^{-1} o phi_minus`` from the two boundary correspondences."""
    if samples < 256:
        raise ValueError("need at least 256 samples")
    _check_pair(int_map, ext_map)
    th = uniform_grid(samples)
    return Fingerprint.from_args(th, _composed_args(int_map, ext_map, th))


def numeric_inverse_fingerprint(int_map: DiskMap, ext_map: DiskMap,
                                samples: int = DEFAULT_SAMPLES) -> Fingerprint:
    """``k^{-1} = phi_minus^{-1} o phi_plus`` sampled on the exterior circle."""
    _check_pair(int_map, ext_map)
    th = uniform_grid(samples)
    return Fingerprint.from_args(th, _composed_args(ext_map, int_map, th))


def align_rotation(reference: Fingerprint, candidate: Fingerprint):
    """Rotation ``theta`` minimising ``max |ref - e^{i theta} cand|`` and that minimum."""
    if reference.values.shape != candidate.values.shape or \
            np.max(np.abs(reference.thetas - candidate.thetas)) > 1e-12:
        raise ValueError("fingerprints are sampled on different grids")
    r, c = reference.values, candidate.values

    def sup(t):
        return float(np.max(np.abs(r - np.exp(1j * t) * c)))

    starts = list(2 * np.pi * np.arange(64) / 64) + [float(np.angle(np.sum(r * np.conj(c))))]
    t0 = min(starts, key=sup)
    lo, hi = t0 - 2 * np.pi / 64, t0 + 2 * np.pi / 64
    x1, x2 = hi - _GOLDEN * (hi - lo), lo + _GOLDEN * (hi - lo)
    f1, f2 = sup(x1), sup(x2)
    for _ in range(80):
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = sup(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = sup(x2)
    best = min([(sup(t0), t0), (f1, x1), (f2, x2)])
    return float(np.mod(best[1], 2 * np.pi)), best[0]


def _refined_sup(func, grid: np.ndarray, values: np.ndarray, top: int = 4) -> float:
    """Grid maximum of ``func`` polished by golden-section search around the best nodes."""
    h = grid[1] - grid[0]
    best = float(values.max())
    for i in np.argsort(values)[-top:]:
        lo, hi = grid[i] - h, grid[i] + h
        x1, x2 = hi - _GOLDEN * (hi - lo), lo + _GOLDEN * (hi - lo)
        f1, f2 = func(x1), func(x2)
        for _ in range(60):
            if f1 > f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - _GOLDEN * (hi - lo)
                f1 = func(x1)
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + _GOLDEN * (hi - lo)
                f2 = func(x2)
        best = max(best, f1, f2)
    return best


# -- closed forms ------------------------------------------------------------


def _require(curve, qd, kind, j=None):
    cls = classify(curve, qd)
    if cls.kind != kind or (j is not None and cls.pole != j):
        raise WrongDomainClass(f"component is {cls}")
    return cls


def infinity_product(qd: QuadDifferential, int_map: DiskMap) -> BlaschkeProduct:
    """``B_inf`` (rotation 0): disk factors at the interior preimages of all poles."""
    return BlaschkeProduct(pole_preimages(int_map, qd), qd.weights)


def circle_formula_infinity(qd: QuadDifferential, lam: float, curve, int_map: DiskMap,
                            samples: int = DEFAULT_SAMPLES,
                            reference: Optional[Fingerprint] = None) -> Fingerprint:
    """``k = B_inf^{1/alpha}`` for a proper sub-lemniscate.

    The free rotation is fitted against ``reference`` when one is given and
    left at zero otherwise.
    """
    _require(curve, qd, "circle_infinity")
    B = infinity_product(qd, int_map)
    th = uniform_grid(samples)
    fp = Fingerprint.from_args(th, _root_arg(B, 1.0 / qd.alpha, th))
    if reference is not None:
        theta, _ = align_rotation(reference, fp)
        fp = fp.rotated(theta)
    return fp


def exterior_disk_centers(ext_map: DiskMap, qd: QuadDifferential, indices) -> np.ndarray:
    """Reflected exterior preimages ``1/conj(phi_plus^{-1}(a_i))`` (inside the disk)."""
    zeta_int = pole_preimages(ext_map, qd, indices)
    return np.conj(zeta_int)


def pole_product(qd: QuadDifferential, ext_map: DiskMap, j: int) -> BlaschkeProduct:
    """``z^alpha B_j`` (rotation 0) in disk-centre form."""
    others = [i for i in range(qd.n) if i != j]
    d = exterior_disk_centers(ext_map, qd, others)
    return BlaschkeProduct(d, -qd.weights[others], monomial_power=qd.alpha)


def circle_formula_pole(qd: QuadDifferential, lam: float, curve, ext_map: DiskMap, j: int,
                        samples: int = DEFAULT_SAMPLES,
                        reference: Optional[Fingerprint] = None):
    """``k^{-1} = z^{alpha/w_j} B_j^{1/w_j}`` for a sub-lemniscate around pole ``j``.

    Returns ``(k_inverse, k)``. ``reference``, if given, is a sampled
    ``k^{-1}`` to fit the free rotation against; ``k`` is obtained by Newton
    inversion of the closed form, so it is as accurate as ``k^{-1}``.
    """
    _require(curve, qd, "circle_pole", j)
    B = pole_product(qd, ext_map, j)
    r = 1.0 / qd.weights[j]
    th = uniform_grid(samples)
    slope = r * B.arg_derivative(np.linspace(0, 2 * np.pi, 4 * samples, endpoint=False))
    if np.any(slope <= 0):
        raise NonMonotone("closed-form k^{-1} is not increasing")
    rot = 0.0
    kinv = Fingerprint.from_args(th, _root_arg(B, r, th))
    if reference is not None:
        rot, _ = align_rotation(reference, kinv)
        kinv = kinv.rotated(rot)
    # k: solve rot + g(phi) = psi (mod 2 pi) for phi
    g0 = rot + float(_root_arg(B, r, 0.0))
    target = g0 + np.mod(th - g0, 2 * np.pi)
    phi = np.interp(target, rot + _root_arg(B, r, np.append(th, 2 * np.pi)), np.append(th, 2 * np.pi))
    for _ in range(40):
        step = (rot + _root_arg(B, r, phi) - target) / (r * B.arg_derivative(phi))
        phi = phi - step
        if np.max(np.abs(step)) < 1e-15:
            break
    k = Fingerprint.from_args(th, np.unwrap(phi))
    for fp in (kinv, k):
        if not fp.is_monotone() or fp.winding != 1:
            raise NonMonotone("closed-form fingerprint is not a homeomorphism")
    return kinv, k


RING_VARIANTS = ("weighted", "literal")


def ring_products(qd: QuadDifferential, curve, int_map: DiskMap, ext_map: DiskMap,
                  exponent_variant: str = "weighted"):
    """``(A, B)`` for a ring-domain component, both with rotation 0."""
    if exponent_variant not in RING_VARIANTS:
        raise ValueError(f"exponent_variant must be one of {RING_VARIANTS}")
    inner = list(curve.enclosed_poles)
    outer = [i for i in range(qd.n) if i not in inner]
    A = BlaschkeProduct(pole_preimages(int_map, qd, inner), qd.weights[inner])
    e = qd.weights[outer] if exponent_variant == "weighted" else np.ones(len(outer))
    B = BlaschkeProduct(exterior_disk_centers(ext_map, qd, outer), -e, monomial_power=qd.alpha)
    return A, B


def ring_residual(qd: QuadDifferential, lam: float, curve, int_map: DiskMap, ext_map: DiskMap,
                  exponent_variant: str = "weighted", samples: int = DEFAULT_SAMPLES):
    """Sup-norm residual of ``B(k(z)) = e^{i theta} A(z)`` on the unit circle.

    ``theta`` is fitted at ``z = 1``; the residual is the grid maximum
    refined by a local search on the continuous maps. Returns
    ``(residual, theta)``.
    """
    _require(curve, qd, "ring")
    _check_pair(int_map, ext_map)
    A, B = ring_products(qd, curve, int_map, ext_map, exponent_variant)
    th = uniform_grid(samples)
    kappa = _composed_args(int_map, ext_map, th)
    lhs = B.arg(kappa)
    rhs = A.arg(th)
    theta = float(_wrap(lhs[0] - rhs[0]))
    res = np.abs(np.exp(1j * lhs) - np.exp(1j * (theta + rhs)))
    h = th[1] - th[0]

    def resid_at(psi):
        i = int(np.clip(round(psi / h), 0, samples - 1))
        kap = float(ext_map.correspondence(int_map.sigma_of_arg(np.array([psi])))[0])
        kap += 2 * np.pi * round((kappa[i] - kap) / (2 * np.pi))
        return float(abs(np.exp(1j * B.arg(kap)) - np.exp(1j * (theta + A.arg(psi)))))

    return _refined_sup(resid_at, th, res), theta


# -- per-component report ----------------------------------------------------

PASS_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class ComponentReport:
    """Fingerprint of one sub-lemniscate with its closed-form agreement residuals.

    ``residuals`` maps a check name to a sup distance: ``"circle_infinity"``
    or ``"circle_pole"`` for circle classes, ``"ring_weighted"`` and
    ``"ring_literal"`` for rings. ``rotations`` holds the fitted constants
    and ``formulas`` the closed-form fingerprints (``"k"`` and, for pole
    circles, ``"k_inverse"``).
    """

    signature: tuple
    domain: str
    fingerprint: Fingerprint
    residuals: dict
    rotations: dict
    nodes: int
    formulas: dict = field(default_factory=dict)

    @property
    def passing_variants(self) -> list:
        return [v for v in RING_VARIANTS if self.residuals.get(f"ring_{v}", np.inf) <= PASS_TOL]


def fingerprint_component(qd: QuadDifferential, lam: float, curve, n_nodes: Optional[int] = None,
                          samples: int = DEFAULT_SAMPLES) -> ComponentReport:
    """Build both maps of ``curve``, its numeric fingerprint and the applicable closed forms."""
    from .confmap import map_pair

    cls = classify(curve, qd)
    p0 = qd.poles[cls.pole] if cls.kind == "circle_pole" else None
    int_map, ext_map = map_pair(curve, p0=p0, n_nodes=n_nodes)
    fp = numeric_fingerprint(int_map, ext_map, samples)
    residuals, rotations, formulas = {}, {}, {}
    if cls.kind == "circle_infinity":
        formula = circle_formula_infinity(qd, lam, curve, int_map, samples)
        rotations["circle_infinity"], residuals["circle_infinity"] = align_rotation(fp, formula)
        formulas["k"] = formula.rotated(rotations["circle_infinity"])
    elif cls.kind == "circle_pole":
        inv = numeric_inverse_fingerprint(int_map, ext_map, samples)
        bare, _ = circle_formula_pole(qd, lam, curve, ext_map, cls.pole, samples)
        rotations["circle_pole"], residuals["circle_pole"] = align_rotation(inv, bare)
        formulas["k_inverse"], formulas["k"] = circle_formula_pole(
            qd, lam, curve, ext_map, cls.pole, samples, reference=inv)
    else:
        for v in RING_VARIANTS:
            residuals[f"ring_{v}"], rotations[f"ring_{v}"] = ring_residual(
                qd, lam, curve, int_map, ext_map, v, samples)
    return ComponentReport(tuple(curve.enclosed_poles), str(cls), fp, residuals, rotations, int_map.n, formulas)
