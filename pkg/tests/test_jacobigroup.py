"""Group elements, composition, and the slash actions."""

import cmath
from fractions import Fraction

import numpy as np
import pytest

from mjforms.jacobigroup import (
    SL2_S,
    SL2_T,
    JacobiElement,
    apply_slash,
    apply_slash_skew,
    apply_slash_two_weight,
    from_sl2,
    heisenberg,
    jacobi_identity,
    moebius,
    skew_weights,
    slash_factor,
    specialize_torsion,
    torsion_prefactor,
    transform_point,
)
from mjforms.lattice import lattice
from mjforms.specfun import theta_definite

MOCK = lattice([[3, 4], [4, 3]], mode="paper-L")
GZ = lattice([[1, 2], [2, 1]], mode="gram")

G1 = JacobiElement(SL2_S, (1, 0), (0, 2))
G2 = JacobiElement(((1, 1), (1, 2)), (0, 1), (1, 1))
G3 = JacobiElement(SL2_T, (2, -1), (0, 1))


def smooth(tau, z):
    # generic test function, no invariance assumed
    return cmath.exp(2j * cmath.pi * (0.3 * tau + 0.7 * z[0] - 0.2 * z[1])) + 0.5 / (tau + 3j)


def test_element_validation():
    with pytest.raises(ValueError):
        JacobiElement(((1, 1), (1, 1)), (0, 0), (0, 0))
    with pytest.raises(ValueError):
        JacobiElement(SL2_S, (0,), (0, 0))


def test_composition_associative_exact():
    assert (G1 * G2) * G3 == G1 * (G2 * G3)


def test_identity_and_inverse():
    e = jacobi_identity(2)
    assert G1 * e == G1
    assert e * G1 == G1
    assert G1 * G1.inverse() == e
    assert G1.inverse() * G1 == e
    assert G2 * G2.inverse() == e


def test_integrality_flag():
    assert G1.is_integral
    assert not JacobiElement(SL2_S, (Fraction(1, 2), 0), (0, 0)).is_integral
    assert G1.inverse().is_integral


def test_moebius_and_point_transform():
    tau = 0.3 + 1.1j
    assert abs(moebius(SL2_S, tau) - (-1 / tau)) < 1e-15
    taup, zp = transform_point(heisenberg((1, 0), (0, 1)), tau, [0.2j, 0.1])
    assert abs(taup - tau) < 1e-15
    assert abs(zp[0] - (0.2j + tau)) < 1e-15
    assert abs(zp[1] - 1.1) < 1e-15


def test_slash_right_action_on_integral_elements():
    tau = 0.17 + 0.9j
    z = [0.1 + 0.2j, -0.3 + 0.05j]
    k = 2
    for ga, gb in ((G1, G2), (G2, G3), (G3, G1)):
        lhs = apply_slash(
            lambda t, w: apply_slash(smooth, k, MOCK, ga, t, w), k, MOCK, gb, tau, z
        )
        rhs = apply_slash(smooth, k, MOCK, ga * gb, tau, z)
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


def test_slash_inverse_undoes():
    tau = -0.2 + 1.3j
    z = [0.05 + 0.1j, 0.2 - 0.04j]
    k = 1
    got = apply_slash(
        lambda t, w: apply_slash(smooth, k, MOCK, G2, t, w), k, MOCK, G2.inverse(), tau, z
    )
    assert abs(got - smooth(tau, np.array(z))) < 1e-11


def test_two_weight_reduces_to_single():
    tau = 0.4 + 0.8j
    z = [0.1, 0.2 + 0.1j]
    a = apply_slash_two_weight(smooth, 3, 0, MOCK, G1, tau, z)
    b = apply_slash(smooth, 3, MOCK, G1, tau, z)
    assert abs(a - b) < 1e-12 * max(1.0, abs(b))


def test_two_weight_right_action():
    tau = 0.11 + 1.2j
    z = [0.3 + 0.02j, -0.1 + 0.3j]
    lhs = apply_slash_two_weight(
        lambda t, w: apply_slash_two_weight(smooth, 2, 1, MOCK, G1, t, w),
        2,
        1,
        MOCK,
        G3,
        tau,
        z,
    )
    rhs = apply_slash_two_weight(smooth, 2, 1, MOCK, G1 * G3, tau, z)
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


def test_skew_weights_exact():
    assert skew_weights(1, 1) == (Fraction(1, 2), Fraction(1, 2))
    assert skew_weights(Fraction(3, 2), 2) == (Fraction(1, 2), Fraction(1))


def test_skew_slash_matches_two_weight():
    tau = 0.2 + 1.0j
    z = [0.1 + 0.1j, 0.0]
    a = apply_slash_skew(smooth, 2, MOCK, G2, tau, z, n_frame=2)
    b = apply_slash_two_weight(smooth, 1, 1, MOCK, G2, tau, z)
    assert abs(a - b) < 1e-12 * max(1.0, abs(b))


def test_slash_factor_weight_power():
    tau = 0.3 + 1.4j
    s = from_sl2(SL2_S, 2)
    _, _, f1 = slash_factor(1, MOCK, s, tau, [0, 0])
    _, _, f3 = slash_factor(3, MOCK, s, tau, [0, 0])
    assert abs(f1 - 1 / tau) < 1e-14
    assert abs(f3 - (1 / tau) ** 3) < 1e-14


def test_torsion_prefactor_sixth_point():
    # alpha = beta = (1/6, 1/6) on the Gram [[1,2],[2,1]] lattice:
    # Q(alpha) = 1/12 and B(alpha, beta) = 1/6
    tau = 0.23 + 0.77j
    sixth = (Fraction(1, 6), Fraction(1, 6))
    got = torsion_prefactor(GZ, sixth, sixth, tau)
    want = cmath.exp(2j * cmath.pi * (tau / 12 + Fraction(1, 6)))
    assert abs(got - want) < 1e-14


def test_specialize_torsion_shifts_theta():
    # (theta_{L,0} | (I, alpha, 0))(tau, 0) = theta_{L,alpha}(tau, 0)
    lat = lattice([[2]], mode="gram")
    tau = 0.37 + 1.21j

    def th(t, w):
        return theta_definite(lat, [0], t, w)

    spec = specialize_torsion(th, lat, [Fraction(1, 2)], [0])
    want = theta_definite(lat, [Fraction(1, 2)], tau, [0])
    assert abs(spec(tau) - want) < 1e-11


def test_specialize_torsion_phases():
    # beta shifts produce e(B(nu + alpha, beta)) phases: against a direct sum
    lat = lattice([[2]], mode="gram")
    tau = 0.1 + 1.5j
    alpha, beta = Fraction(1, 2), Fraction(1, 3)

    def th(t, w):
        return theta_definite(lat, [0], t, w)

    spec = specialize_torsion(th, lat, [alpha], [beta])
    direct = sum(
        cmath.exp(2j * cmath.pi * ((n + 0.5) ** 2 * tau + 2 * (n + 0.5) * float(beta)))
        for n in range(-40, 41)
    )
    assert abs(spec(tau) - direct) < 1e-12
