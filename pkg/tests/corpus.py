"""Shared configurations and cached pipeline results for the test suite."""

from functools import lru_cache

import numpy as np

from strebel.confmap import map_pair
from strebel.fingerprint import fingerprint_component
from strebel.qd_core import critical_set, make_differential
from strebel.tracer import find_components

SQRT2 = 2 ** 0.5
REFERENCE_POLES = (1, -1, 0)
REFERENCE_WEIGHTS = (1, -1, SQRT2)
REFERENCE_LEVELS = (0.05, 1.0, 9.0)
SEED = 20261018


def reference_qd():
    return make_differential(REFERENCE_POLES, REFERENCE_WEIGHTS)


def two_pole_qd():
    return make_differential((-1, 1), (1, 1))


def random_configs(count=3, seed=SEED):
    """Three- and four-pole configurations with weights in [0.5, 2] and a proper level."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = 3 + i % 2
        poles = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
        weights = rng.uniform(0.5, 2.0, n)
        qd = make_differential(poles, weights)
        lam = 1.5 * float(critical_set(qd).values.max())
        out.append((qd, lam))
    return out


@lru_cache(maxsize=None)
def _components_cached(key):
    qd, lam = _CONFIGS[key]
    return tuple(find_components(qd, lam))


_CONFIGS = {}


def _key(name, lam):
    return (name, float(lam))


def register(name, qd, lam):
    _CONFIGS[_key(name, lam)] = (qd, lam)
    return _key(name, lam)


def components(name, qd, lam):
    return _components_cached(register(name, qd, lam))


@lru_cache(maxsize=None)
def _report_cached(key, signature, n_nodes, samples):
    qd, lam = _CONFIGS[key]
    cv = next(c for c in _components_cached(key) if tuple(c.enclosed_poles) == signature)
    return fingerprint_component(qd, lam, cv, n_nodes, samples)


def report(name, qd, lam, signature, n_nodes=512, samples=1024):
    return _report_cached(register(name, qd, lam), tuple(signature), n_nodes, samples)


def corpus():
    """``(name, qd, lam)`` for every configuration used by the corpus-wide checks."""
    cases = [("reference", reference_qd(), lam) for lam in REFERENCE_LEVELS]
    cases.append(("two_pole", two_pole_qd(), 4.0))
    cases += [(f"random{i}", qd, lam) for i, (qd, lam) in enumerate(random_configs())]
    return cases
