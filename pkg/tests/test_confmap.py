import mpmath
import numpy as np
import pytest

from strebel.confmap import (
    circle,
    closed_form_exterior,
    closed_form_interior,
    ellipse,
    evaluate_inside,
    evaluate_inverse,
    exterior_map,
    interior_map,
    map_pair,
    pole_preimages,
)
from strebel.errors import P0Outside, PoleOnWrongSide, TooCloseToBoundary, WrongDomainClass
from strebel.qd_core import make_differential
from strebel.tracer import find_components

from corpus import components, reference_qd, two_pole_qd


def ellipse_oracle(a, b):
    """Riemann map of the ellipse interior onto the disk through Jacobi's sn (30 digits)."""
    mpmath.mp.dps = 30
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    m = mpmath.mfrom(q=((a - b) / (a + b)) ** 2)
    K = mpmath.ellipk(m)
    c = mpmath.sqrt(a * a - b * b)

    def g(z):
        return mpmath.sqrt(mpmath.sqrt(m)) * mpmath.ellipfun("sn", (2 * K / mpmath.pi) * mpmath.asin(z / c), m=m)

    def f(z):
        return complex(g(z))

    fp0 = mpmath.diff(g, 0)
    return f, float(mpmath.re(1 / fp0))


def test_unit_circle_identity():
    m = interior_map(circle(), 0.0, n_nodes=256)
    assert m.derivative_at_center == pytest.approx(1.0, abs=1e-14)
    zeta = np.array([0.3 + 0.1j, -0.5j, 0.2])
    assert evaluate_inside(m, zeta) == pytest.approx(zeta, abs=1e-14)
    assert evaluate_inverse(m, zeta) == pytest.approx(zeta, abs=1e-14)


def test_shifted_circle_is_affine():
    m = interior_map(circle(1.0, 2.0), 1.0, n_nodes=256)
    assert m.derivative_at_center == pytest.approx(2.0, rel=1e-14)
    assert evaluate_inverse(m, [2.0])[0] == pytest.approx(0.5, abs=1e-14)
    assert evaluate_inside(m, [0.3 + 0.1j])[0] == pytest.approx(1.6 + 0.2j, abs=1e-14)


def test_exterior_circle():
    m = exterior_map(circle(0.0, 3.0), n_nodes=256)
    assert m.derivative_at_center == pytest.approx(3.0, rel=1e-13)
    assert m.asymptotic_coefficient() == pytest.approx(3.0, rel=1e-13)
    assert evaluate_inside(m, [2.0])[0] == pytest.approx(6.0, abs=1e-13)
    assert evaluate_inverse(m, [6j])[0] == pytest.approx(2j, abs=1e-13)


def test_ellipse_against_jacobi_oracle():
    f, dphi0 = ellipse_oracle(1.5, 1.0)
    m = interior_map(ellipse(1.5, 1.0), 0.0)
    assert m.derivative_at_center == pytest.approx(dphi0, rel=1e-12)
    z = np.array([0.3 + 0.2j, -1.1 + 0.4j, 0.7 - 0.6j])
    ref = np.array([f(complex(x)) for x in z])
    assert evaluate_inverse(m, z) == pytest.approx(ref, abs=1e-12)
    # boundary correspondence on the nodes
    nodes = m.boundary_nodes[::16]
    ref_args = np.angle([f(complex(x)) for x in nodes])
    diff = np.angle(np.exp(1j * (m.circle_args[::16] - ref_args)))
    assert np.max(np.abs(diff)) < 1e-12


def test_forward_and_inverse_are_inverse():
    cv = components("reference", reference_qd(), 1.0)[0]
    m = interior_map(cv, n_nodes=512)
    zeta = 0.6 * np.exp(1j * np.linspace(0, 2 * np.pi, 9, endpoint=False))
    assert evaluate_inverse(m, evaluate_inside(m, zeta)) == pytest.approx(zeta, abs=1e-11)


def test_adaptive_node_count_and_self_test():
    cv = components("reference", reference_qd(), 9.0)[1]
    m = interior_map(cv)
    m2 = interior_map(cv, m.center, n_nodes=2 * m.n)
    assert np.max(np.abs(np.exp(1j * m2.circle_args[::2]) - np.exp(1j * m.circle_args))) <= 1e-10


def test_correspondence_is_increasing_by_two_pi():
    for cv in components("reference", reference_qd(), 0.05) + components("reference", reference_qd(), 9.0):
        a, b = map_pair(cv, n_nodes=256)
        for m in (a, b):
            steps = np.diff(np.append(m.circle_args, m.circle_args[0] + 2 * np.pi))
            assert np.all(steps > 0)
            assert steps.sum() == pytest.approx(2 * np.pi, abs=1e-12)


def test_pole_preimages_sides():
    qd = reference_qd()
    ring = components("reference", qd, 1.0)[0]
    a, b = map_pair(ring, n_nodes=256)
    inner = pole_preimages(a, qd, [0, 2])
    outer = pole_preimages(b, qd, [1])
    assert np.all(np.abs(inner) < 1) and np.all(np.abs(outer) < 1)
    # the interior map is centred on an enclosed pole
    assert np.min(np.abs(inner)) < 1e-13
    with pytest.raises(PoleOnWrongSide):
        pole_preimages(a, qd, [1])
    with pytest.raises(PoleOnWrongSide):
        pole_preimages(b, qd, [0])


def test_errors():
    with pytest.raises(P0Outside):
        interior_map(circle(), 2.0, n_nodes=256)
    m = interior_map(circle(), 0.0, n_nodes=256)
    with pytest.raises(TooCloseToBoundary):
        evaluate_inside(m, [0.9999])
    with pytest.raises(TooCloseToBoundary):
        evaluate_inverse(m, [0.99999])
    qd = reference_qd()
    with pytest.raises(WrongDomainClass):
        closed_form_exterior(qd, 1.0, components("reference", qd, 1.0)[0])


@pytest.mark.parametrize("qd, lam, name", [(reference_qd(), 9.0, "reference"), (two_pole_qd(), 4.0, "two_pole")])
def test_closed_form_exterior_matches_numeric(qd, lam, name):
    cv = next(c for c in components(name, qd, lam) if len(c.enclosed_poles) == qd.n)
    ext = exterior_map(cv, n_nodes=512)
    cf = closed_form_exterior(qd, lam, cv).on_curve(ext.boundary_nodes)
    assert np.max(np.abs(np.abs(cf) - 1)) < 1e-12
    e = np.exp(1j * ext.circle_args)
    rot = np.angle(np.sum(cf * np.conj(e)))
    assert np.max(np.abs(cf - np.exp(1j * rot) * e)) < 1e-8


def test_closed_form_interior_positive_weight():
    qd = reference_qd()
    cv = components("reference", qd, 0.05)[1]  # around the pole of weight sqrt 2
    m = interior_map(cv, qd.poles[2], n_nodes=512)
    cf = closed_form_interior(qd, 0.05, 2, cv).on_curve(m.boundary_nodes)
    e = np.exp(1j * m.circle_args)
    rot = np.angle(np.sum(cf * np.conj(e)))
    assert np.max(np.abs(cf - np.exp(1j * rot) * e)) < 1e-8


def test_closed_form_interior_negative_weight_preserves_orientation():
    # around a pole of negative weight f -> infinity, so (f/lam)^(1/w) -> 0 and
    # the map is still conformal and orientation preserving
    qd = reference_qd()
    cv = components("reference", qd, 9.0)[0]
    m = interior_map(cv, qd.poles[1], n_nodes=512)
    cf = closed_form_interior(qd, 9.0, 1, cv).on_curve(m.boundary_nodes)
    steps = np.angle(np.roll(cf, -1) / cf)
    assert np.all(steps > 0)
    e = np.exp(1j * m.circle_args)
    rot = np.angle(np.sum(cf * np.conj(e)))
    assert np.max(np.abs(cf - np.exp(1j * rot) * e)) < 1e-8


def test_single_pole_maps_are_affine():
    qd = make_differential([0.2 - 0.1j], [1.5])
    cv = components("single", qd, 2.0)[0]
    r = 2.0 ** (1 / 1.5)
    a, b = map_pair(cv, n_nodes=256)
    assert a.derivative_at_center == pytest.approx(r, rel=1e-12)
    assert b.derivative_at_center == pytest.approx(r, rel=1e-12)


def test_closed_form_exterior_single_pole_is_linear():
    qd = make_differential([0.0], [1.0])
    g = closed_form_exterior(qd, 2.0)
    z = np.array([3.0 + 1.0j, 2.5 + 2.0j, -1.0 + 4.0j])
    assert g.evaluate_path(z) == pytest.approx(z / 2, abs=1e-14)


@pytest.mark.parametrize("qd, lam, tol", [(two_pole_qd(), 4.0, 1e-12), (reference_qd(), 9.0, 1e-10)])
def test_closed_form_exterior_unit_modulus_on_curve(qd, lam, tol):
    (cv,) = [c for c in find_components(qd, lam) if len(c.enclosed_poles) == qd.n]
    g = closed_form_exterior(qd, lam, cv)
    assert np.max(np.abs(np.abs(g.on_curve(cv.boundary(256)[0])) - 1)) < tol
