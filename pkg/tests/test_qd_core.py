import math

import mpmath
import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from strebel.errors import (
    DuplicatePoles,
    EvaluationAtPole,
    NonpositiveTotalWeight,
    ZeroWeight,
)
from strebel.qd_core import (
    critical_set,
    field_at,
    is_critical_graph_connected,
    log_modulus,
    make_differential,
    numerator_polynomial,
)

from corpus import SQRT2, reference_qd

# 40-digit mpmath evaluation of (-1 +- sqrt 3)/sqrt 2 and of w at those points
Z_PLUS = 0.5176380902050415246977976752480966566981
Z_MINUS = -1.931851652578136573499486399457794735268
W_PLUS = 0.1252497300594695870448382430957205050535
W_MINUS = 7.984049143460763504182355581276939675192


def test_reference_zeros_and_values():
    cs = critical_set(reference_qd())
    order = np.argsort(cs.zeros.real)
    z, w = cs.zeros[order], cs.values[order]
    assert np.allclose(z.imag, 0, atol=1e-14)
    assert z.real == pytest.approx([Z_MINUS, Z_PLUS], rel=1e-13)
    assert w == pytest.approx([W_MINUS, W_PLUS], rel=1e-12)


def test_critical_values_against_mpmath():
    qd = reference_qd()
    mpmath.mp.dps = 30
    for z, w in zip(critical_set(qd).zeros, critical_set(qd).values):
        zz = mpmath.mpc(z.real, z.imag)
        ref = mpmath.fprod(abs(zz - complex(a)) ** mpmath.mpf(float(al))
                           for a, al in zip(qd.poles, qd.weights))
        assert float(abs(w - ref) / ref) < 1e-12


def test_reference_connectivity_false_with_witness():
    ok, witness = is_critical_graph_connected(reference_qd())
    assert ok is False
    cs = critical_set(reference_qd())
    i_max, i_min = witness
    assert cs.values[i_max] == pytest.approx(W_MINUS)
    assert cs.values[i_min] == pytest.approx(W_PLUS)


def test_field_and_potential_values():
    qd = reference_qd()
    assert field_at(qd, 2j) == pytest.approx(complex(-0.4, -SQRT2 / 2), abs=1e-15)
    assert log_modulus(qd, 2.0) == pytest.approx(SQRT2 * math.log(2) - math.log(3), abs=1e-15)
    with pytest.raises(EvaluationAtPole):
        field_at(qd, 1.0)
    with pytest.raises(EvaluationAtPole):
        log_modulus(qd, 0.0)


def test_numerator_matches_symbolic():
    z = sympy.symbols("z")
    s2 = sympy.sqrt(2)
    p = sympy.expand((1 / (z - 1) - 1 / (z + 1) + s2 / z) * (z - 1) * (z + 1) * z)
    ref = [complex(c) for c in sympy.Poly(sympy.simplify(p), z).all_coeffs()]
    assert numerator_polynomial(reference_qd()) == pytest.approx(ref, abs=1e-14)


def test_symmetric_three_poles_connected():
    qd = make_differential(np.exp(2j * np.pi * np.arange(3) / 3), [1, 1, 1])
    # p = 3 z^2: a double zero at the centre
    (z, m, w), = critical_set(qd).distinct()
    assert m == 2 and abs(z) < 1e-12 and w == pytest.approx(1.0)
    assert is_critical_graph_connected(qd) == (True, None)


def test_collinear_symmetric_three_poles():
    qd = make_differential([-1, 0, 1], [1, 1, 1])
    cs = critical_set(qd)
    assert sorted(cs.zeros.real) == pytest.approx([-1 / math.sqrt(3), 1 / math.sqrt(3)], abs=1e-14)
    assert cs.values[0] == pytest.approx(cs.values[1], rel=1e-14)
    assert is_critical_graph_connected(qd)[0]


def test_multiple_zero_is_merged():
    # four equal poles on a square: p = 4 z^3, a triple zero at the centre
    qd = make_differential([1, 1j, -1, -1j], [1, 1, 1, 1])
    folded = critical_set(qd).distinct()
    assert len(folded) == 1
    z, m, w = folded[0]
    assert m == 3 and abs(z) < 1e-12 and w == pytest.approx(1.0)


def test_single_pole_has_empty_critical_set():
    qd = make_differential([0.3], [2.0])
    assert len(critical_set(qd)) == 0
    assert is_critical_graph_connected(qd) == (True, None)


@pytest.mark.parametrize("poles, weights, exc", [
    ([0, 0], [1, 1], DuplicatePoles),
    ([0, 1], [1, 0], ZeroWeight),
    ([0, 1], [1, -1], NonpositiveTotalWeight),
    ([0, 1], [-2, 1], NonpositiveTotalWeight),
])
def test_invalid_configurations(poles, weights, exc):
    with pytest.raises(exc):
        make_differential(poles, weights)


def test_connectivity_tolerance_must_be_positive():
    with pytest.raises(ValueError):
        is_critical_graph_connected(reference_qd(), rel_tol=0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.3, 3)),
                min_size=2, max_size=6, unique_by=lambda t: (round(t[0], 1), round(t[1], 1))))
def test_zeros_are_zeros_of_the_field(data):
    poles = [complex(x, y) for x, y, _ in data]
    weights = [w for *_, w in data]
    qd = make_differential(poles, weights)
    cs = critical_set(qd)
    assert len(cs) == qd.n - 1
    for z, m, _ in cs.distinct():
        if m == 1 and np.min(np.abs(z - qd.poles)) > 1e-3:
            scale = np.sum(np.abs(qd.weights) / np.abs(z - qd.poles))
            assert abs(qd.field(z)) <= 1e-9 * scale


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 5), st.floats(-3, 3), st.floats(-3, 3))
def test_critical_values_scale_under_affine_maps(s, bx, by):
    qd = reference_qd()
    moved = qd.transformed(s, complex(bx, by))
    w0 = np.sort(critical_set(qd).values)
    w1 = np.sort(critical_set(moved).values)
    assert w1 == pytest.approx(w0 * s ** qd.alpha, rel=1e-10)
    assert is_critical_graph_connected(moved)[0] is False


def test_elementary_values():
    one = make_differential([0.0], [1.0])
    pair = make_differential([-1.0, 1.0], [1.0, 1.0])
    assert field_at(one, 2.0) == pytest.approx(0.5, abs=1e-15)
    assert field_at(pair, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert log_modulus(one, math.e) == pytest.approx(1.0, abs=1e-15)
    assert log_modulus(pair, 0.0) == pytest.approx(0.0, abs=1e-15)
    ref = math.log(2) - math.log(4) + SQRT2 * math.log(3)
    assert log_modulus(reference_qd(), 3.0) == pytest.approx(ref, abs=1e-14)
    assert numerator_polynomial(pair) == pytest.approx([2.0, 0.0], abs=1e-15)  # 2z
    assert numerator_polynomial(one) == pytest.approx([1.0], abs=1e-15)
    cs = critical_set(pair)
    assert cs.zeros == pytest.approx([0.0], abs=1e-15)
    assert cs.values == pytest.approx([1.0], abs=1e-15)


def test_numerator_is_field_times_pole_product():
    qd = reference_qd()
    rng = np.random.default_rng(7)
    z = rng.normal(size=100) * 2 + 1j * rng.normal(size=100) * 2
    p = np.polyval(numerator_polynomial(qd), z)
    ref = field_at(qd, z) * np.prod(z[:, None] - qd.poles[None, :], axis=1)
    assert np.max(np.abs(p - ref) / np.abs(ref)) < 1e-10


@pytest.mark.parametrize("j", range(3))
def test_log_modulus_monotone_near_poles(j):
    qd = reference_qd()
    a, w = qd.poles[j], qd.weights[j]
    u = [log_modulus(qd, a + d) for d in (1e-2, 1e-4)]
    # the potential heads to -inf at positive weights and +inf at negative ones
    assert (u[1] - u[0]) * np.sign(w) < 0
