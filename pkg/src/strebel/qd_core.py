"""The quadratic differential -(sum_i w_i / (z - a_i))^2 dz^2 and its critical data.

Everything downstream works with two real-analytic companions of the
differential:

* the field ``F(z) = sum_i w_i / (z - a_i)``, whose complex conjugate is the
  gradient of
* the log-potential ``u(z) = sum_i w_i log|z - a_i|``; horizontal trajectories
  are the level sets of ``u``.

The numerator ``p`` of ``F`` (``F = p / prod(z - a_i)``) has degree ``n - 1``
and its roots are the finite critical points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicatePoles,
    EvaluationAtPole,
    NonpositiveTotalWeight,
    RootSolverFailure,
    ZeroWeight,
)

DUPLICATE_REL_TOL = 1e-12
MERGE_REL_TOL = 1e-8
CONFIRM_REL_TOL = 1e-6


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QuadDifferential:
    poles: np.ndarray
    weights: np.ndarray
    alpha: float = field(init=False)

    def __post_init__(self):
        poles = _frozen(np.asarray(self.poles, dtype=complex).ravel())
        weights = _frozen(np.asarray(self.weights, dtype=float).ravel())
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "alpha", float(math.fsum(weights)))
        # tuples for the scalar hot path used by the tracer
        object.__setattr__(self, "_pw", tuple(zip(poles.tolist(), weights.tolist())))

    @property
    def n(self) -> int:
        return len(self.poles)

    @property
    def diameter(self) -> float:
        if self.n < 2:
            return 0.0
        d = np.abs(self.poles[:, None] - self.poles[None, :])
        return float(d.max())

    @property
    def length_scale(self) -> float:
        """Characteristic length used to make tolerances scale-free."""
        d = self.diameter
        return d if d > 0 else 1.0

    @property
    def field_scale(self) -> float:
        return float(np.abs(self.weights).sum()) / self.length_scale

    @property
    def center(self) -> complex:
        return complex(self.poles.mean())

    def field(self, z):
        """Vectorised ``F(z)``; no pole check (callers stay off the poles)."""
        z = np.asarray(z, dtype=complex)
        return (self.weights / (z[..., None] - self.poles)).sum(axis=-1)

    def potential(self, z):
        """Vectorised ``u(z)``; returns +-inf at poles."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            return (self.weights * np.log(np.abs(z[..., None] - self.poles))).sum(axis=-1)

    def field_scalar(self, z: complex) -> complex:
        s = 0j
        for a, w in self._pw:
            s += w / (z - a)
        return s

    def potential_scalar(self, z: complex) -> float:
        s = 0.0
        for a, w in self._pw:
            s += w * math.log(abs(z - a))
        return s

    def log_ratio(self, z, ref):
        """``sum_i w_i Log((z - a_i)/(ref - a_i))`` with principal logs.

        This is the branch-tracked increment of ``log f`` from ``ref`` to ``z``;
        it is the continuous one as long as the segment ``[ref, z]`` does not
        wind around any pole.
        """
        z = np.asarray(z, dtype=complex)
        ref = np.asarray(ref, dtype=complex)
        return (self.weights * np.log((z[..., None] - self.poles) / (ref[..., None] - self.poles))).sum(axis=-1)

    def transformed(self, scale: complex, shift: complex) -> "QuadDifferential":
        """The differential of the pole set ``scale * a + shift``."""
        return QuadDifferential(self.poles * scale + shift, self.weights)


def make_differential(poles, weights) -> QuadDifferential:
    """Validate and build a :class:`QuadDifferential`."""
    poles = np.asarray(poles, dtype=complex).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    if poles.size == 0 or poles.size != weights.size:
        raise ValueError("poles and weights must be non-empty and of equal length")
    if not (np.all(np.isfinite(poles)) and np.all(np.isfinite(weights))):
        raise ValueError("poles and weights must be finite")
    if np.any(weights == 0):
        raise ZeroWeight(f"zero weight at index {int(np.flatnonzero(weights == 0)[0])}")
    if poles.size > 1:
        d = np.abs(poles[:, None] - poles[None, :])
        ref = max(float(np.abs(poles).max()), 1.0)
        iu = np.triu_indices(poles.size, 1)
        bad = d[iu] <= DUPLICATE_REL_TOL * ref
        if np.any(bad):
            i, j = iu[0][bad][0], iu[1][bad][0]
            raise DuplicatePoles(f"poles {i} and {j} coincide")
    alpha = math.fsum(weights.tolist())
    if not alpha > 0:
        raise NonpositiveTotalWeight(f"total weight must be positive, got {alpha!r}")
    return QuadDifferential(poles, weights)


def _check_off_poles(qd: QuadDifferential, z):
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z[..., None] - qd.poles) == 0):
        raise EvaluationAtPole("evaluation point coincides with a pole")
    return z


def field_at(qd: QuadDifferential, z):
    """``F(z) = sum_i w_i/(z - a_i)``."""
    z = _check_off_poles(qd, z)
    out = qd.field(z)
    return complex(out) if out.ndim == 0 else out


def log_modulus(qd: QuadDifferential, z):
    """``u(z) = sum_i w_i ln|z - a_i|``; the lemniscate of level lam is ``u = ln lam``."""
    z = _check_off_poles(qd, z)
    out = qd.potential(z)
    return float(out) if out.ndim == 0 else out


def numerator_polynomial(qd: QuadDifferential) -> np.ndarray:
    """Coefficients (highest degree first) of ``p = sum_i w_i prod_{j != i}(z - a_j)``."""
    coeffs = np.zeros(qd.n, dtype=complex)
    for i, w in enumerate(qd.weights):
        others = np.delete(qd.poles, i)
        coeffs += w * np.poly(others) if others.size else w
    return coeffs


@dataclass(frozen=True)
class CriticalSet:
    zeros: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "zeros", _frozen(np.asarray(self.zeros, dtype=complex)))
        object.__setattr__(self, "values", _frozen(np.asarray(self.values, dtype=float)))

    def __len__(self):
        return len(self.zeros)

    def distinct(self):
        """``[(zero, multiplicity, value), ...]`` with repeated zeros folded."""
        out = []
        for z, w in zip(self.zeros.tolist(), self.values.tolist()):
            if out and out[-1][0] == z:
                out[-1] = (z, out[-1][1] + 1, w)
            else:
                out.append((z, 1, w))
        return out


def _polish(coeffs: np.ndarray, roots: np.ndarray, iters: int = 50) -> np.ndarray:
    dcoeffs = np.polyder(coeffs)
    roots = np.asarray(roots, dtype=complex).copy()
    for _ in range(iters):
        p = np.polyval(coeffs, roots)
        dp = np.polyval(dcoeffs, roots)
        ok = dp != 0
        step = np.zeros_like(roots)
        step[ok] = p[ok] / dp[ok]
        roots = roots - step
        if np.all(np.abs(step) <= 1e-16 * np.maximum(np.abs(roots), 1.0)):
            break
    return roots


def _poly_scale(coeffs: np.ndarray, z: complex) -> float:
    deg = len(coeffs) - 1
    return float(sum(abs(c) * abs(z) ** (deg - k) for k, c in enumerate(coeffs)))


def _confirmed_multiple(coeffs: np.ndarray, z: complex, m: int, radius: float):
    """Polished ``m``-fold root near ``z``, or None if ``p..p^(m-1)`` do not all vanish there."""
    # a root of multiplicity m is a simple root of the (m-1)th derivative
    z = complex(_polish(np.polyder(coeffs, m - 1), np.array([z]))[0])
    for j in range(m):
        d = np.polyder(coeffs, j) if j else coeffs
        # size of the terms at the configuration scale, not at z (which may be ~0)
        if abs(np.polyval(d, z)) > 64 * np.finfo(float).eps * max(_poly_scale(d, max(abs(z), radius)), 1e-300):
            return None
    return z


def critical_set(qd: QuadDifferential) -> CriticalSet:
    """Zeros of ``p`` (with multiplicity) and the critical values ``w_k = exp(u(z_k))``.

    Companion-matrix eigenvalues are Newton-polished on ``p``; clusters closer
    than ``1e-8`` times the configuration diameter are merged into one
    multiple root, as are clusters within ``1e-6`` whose merged point is a
    root of the derivatives to rounding accuracy.
    """
    if qd.n < 2:
        return CriticalSet(np.zeros(0, complex), np.zeros(0))
    coeffs = numerator_polynomial(qd)
    raw = np.roots(coeffs).astype(complex)
    if raw.size != qd.n - 1 or not np.all(np.isfinite(raw)):
        raise RootSolverFailure("companion eigenvalue solve lost roots")
    raw = _polish(coeffs, raw)

    merge_tol = MERGE_REL_TOL * qd.length_scale
    order = np.lexsort((raw.imag, raw.real))
    raw = raw[order]
    clusters: list[list[complex]] = []
    for r in raw.tolist():
        for cl in clusters:
            if abs(r - np.mean(cl)) <= merge_tol:
                cl.append(r)
                break
        else:
            clusters.append([r])

    # rounding splits an m-fold root by about eps^(1/m); merge nearby clusters
    # when the merged point is confirmed as a root of the derivatives
    merged = True
    while merged and len(clusters) > 1:
        merged = False
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                a, b = clusters[i], clusters[j]
                if abs(np.mean(a) - np.mean(b)) > CONFIRM_REL_TOL * qd.length_scale:
                    continue
                if _confirmed_multiple(coeffs, complex(np.mean(a + b)), len(a) + len(b), qd.length_scale) is not None:
                    clusters[i] = a + b
                    del clusters[j]
                    merged = True
                    break
            if merged:
                break

    zeros = []
    for cl in clusters:
        m = len(cl)
        z = complex(np.mean(cl))
        if m > 1:
            z = _confirmed_multiple(coeffs, z, m, qd.length_scale) or z
        zeros.extend([z] * m)
    zeros = np.array(zeros, dtype=complex)

    for z in np.unique(zeros):
        m = int(np.sum(zeros == z))
        resid = abs(np.polyval(np.polyder(coeffs, m - 1), z))
        if resid > 1e-12 * max(_poly_scale(np.polyder(coeffs, m - 1), z), 1e-300) and resid > 1e-14:
            raise RootSolverFailure(f"root {z} not converged (residual {resid:.3e})")
        if np.min(np.abs(z - qd.poles)) == 0:
            raise RootSolverFailure("critical point coincides with a pole")

    values = np.exp(qd.potential(zeros))
    return CriticalSet(zeros, values)


def is_critical_graph_connected(qd: QuadDifferential, rel_tol: float = 1e-9):
    """Connectivity of the critical graph: all critical values equal.

    Returns ``(True, None)`` or ``(False, (i_max, i_min))`` with a witness pair
    of indices into the critical set.
    """
    if not rel_tol > 0:
        raise ValueError("rel_tol must be positive")
    cs = critical_set(qd)
    if len(cs) == 0:
        return True, None
    w = cs.values
    i_max, i_min = int(np.argmax(w)), int(np.argmin(w))
    if w[i_max] - w[i_min] <= rel_tol * w[i_max]:
        return True, None
    return False, (i_max, i_min)
