"""Trigonometric interpolation of periodic samples on a uniform grid."""

from __future__ import annotations

import numpy as np

_CHUNK = 256
DROP_REL = 1e-15


def significant(c: np.ndarray, rel: float = DROP_REL) -> np.ndarray:
    """Mask of coefficients to keep: the smallest ones are dropped while their
    summed magnitude stays below ``rel`` times the largest coefficient."""
    a = np.abs(c)
    order = np.argsort(a)
    dropped = np.cumsum(a[order]) <= rel * a.max(initial=0.0)
    keep = np.ones(a.shape, dtype=bool)
    keep[order[dropped]] = False
    return keep


class TrigInterp:
    """Interpolant of samples ``y_m = g(2 pi m / N)`` of a smooth periodic ``g``.

    ``slope`` adds a linear part: the samples are of ``slope * t + g(t)``,
    which is how unwrapped boundary correspondences (``theta(t) - t``
    periodic) are stored.
    """

    def __init__(self, values, slope: float = 0.0):
        y = np.asarray(values)
        n = y.shape[0]
        t = 2 * np.pi * np.arange(n) / n
        self.n = n
        self.slope = slope
        per = y - slope * t
        c = np.fft.fft(per) / n
        k = np.fft.fftfreq(n, 1.0 / n)
        if n % 2 == 0:
            # split the Nyquist mode symmetrically so real data stays real
            c = np.concatenate([c, [c[n // 2] / 2]])
            c[n // 2] /= 2
            k = np.concatenate([k, [n // 2]])
            k[n // 2] = -n // 2
        self.coeffs = c
        self.k = k
        self.is_real = np.isrealobj(y)
        # point evaluation only needs the modes above round-off
        keep = significant(c)
        self._ck, self._kk = c[keep], k[keep]

    def _sum(self, t, c, k):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        out = np.empty(flat.shape, dtype=complex)
        for lo in range(0, flat.size, _CHUNK):
            e = np.exp(1j * np.outer(flat[lo:lo + _CHUNK], k))
            out[lo:lo + _CHUNK] = e @ c
        return out.reshape(t.shape)

    def __call__(self, t):
        out = self._sum(t, self._ck, self._kk) + self.slope * np.asarray(t, dtype=float)
        return out.real if self.is_real else out

    def derivative(self, t):
        out = self._sum(t, 1j * self._kk * self._ck, self._kk) + self.slope
        return out.real if self.is_real else out

    def grid_derivative(self):
        """Derivative at the interpolation nodes, via FFT."""
        n = self.n
        c = self.coeffs[:n].copy()
        k = self.k[:n].copy()
        if n % 2 == 0:
            c[n // 2] = 0
        d = np.fft.ifft(1j * k * c) * n + self.slope
        return d.real if self.is_real else d


def invert_monotone(func, dfunc, targets, guess, tol: float = 1e-14, max_iter: int = 40):
    """Newton solve ``func(t) = targets`` for an increasing ``func``."""
    t = np.array(guess, dtype=float)
    for _ in range(max_iter):
        step = (func(t) - targets) / dfunc(t)
        t = t - step
        if np.max(np.abs(step), initial=0.0) <= tol:
            break
    return t
