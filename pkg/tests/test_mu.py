"""Appell--Lerch layer: kernels, completions, lattice products, splitting.

Oracles are recomputed in-test and kept independent of the package's
summation strategy: the two-variable kernel against a 35-digit mpmath
direct sum (no reciprocal stabilization, fixed wide cutoff), the
``2m``-fold sums against direct enumeration of ``Z^(2m)`` boxes (mpmath
for ``m = 1``, vectorized numpy for ``m = 2``), and the index-``m``
theta components against their defining single sums.  The completion
conventions are pinned behaviorally: the elliptic transformation laws
and the Heisenberg invariance of the completed components fail by O(1)
for any other sign/coefficient choice, and the splitting residual is
constant in ``(u, v)`` at fixed ``u - v`` only for the normalization
shipped here.
"""

import cmath
import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mjforms.lattice import discriminant_group, frame, lattice
from mjforms.mu import (
    mu_hat_Ll,
    mu_hat_ml,
    mu_lattice_data,
    mu_m_eval,
    mu_two_var,
    splitting_residual,
    theta_index_component,
)
from mjforms.specfun import Precision

TAU = 0.1 + 0.65j
Z0 = 0.11 + 0.03j

MOCK = lattice([[3, 4], [4, 3]], "paper-L")
MOCK_FRAME = frame(MOCK, [(1, 1), (1, -1)])

DIAG = lattice([[1, 0], [0, -1]], "paper-L")
DIAG_FRAME = frame(DIAG, [(1, 0), (0, 1)])


def e(x):
    return cmath.exp(2j * math.pi * x)


# ---------------------------------------------------------------------------
# oracles


def theta_odd_mp(tau, z, N=30):
    tot = mp.mpc(0)
    for m in range(-N, N):
        r = m + mp.mpf(1) / 2
        tot += (-1) ** (m + 1) * mp.e ** (2j * mp.pi * (tau * r * r / 2 + r * z))
    return tot


def mu_two_var_mp(tau, u, v, N=50):
    """Direct double-precision-free sum; no stabilization tricks."""
    tau, u, v = mp.mpc(tau), mp.mpc(u), mp.mpc(v)
    tot = mp.mpc(0)
    for n in range(-N, N + 1):
        num = (-1) ** n * mp.e ** (2j * mp.pi * (tau * (n * n + n) / 2 + n * v))
        tot += num / (1 - mp.e ** (2j * mp.pi * (u + n * tau)))
    return tot * mp.e ** (1j * mp.pi * u) / theta_odd_mp(tau, v)


def mu_m_1_mp(tau, z1, z2, N=14):
    tau, z1, z2 = mp.mpc(tau), mp.mpc(z1), mp.mpc(z2)
    tot = mp.mpc(0)
    for a in range(-N, N + 1):
        for b in range(-N, N + 1):
            s, t = a + b, a * a + b * b
            num = (-1) ** s * mp.e ** (2j * mp.pi * (tau * (t + s) / 2 + s * z2))
            tot += num / (1 - mp.e ** (2j * mp.pi * (z1 + s * tau)))
    return tot * mp.e ** (1j * mp.pi * z1) / theta_odd_mp(tau, z2) ** 2


def mu_m_2_np(tau, z1, z2, N=9):
    rng = np.arange(-N, N + 1)
    grids = np.meshgrid(rng, rng, rng, rng, indexing="ij")
    s = sum(grids).ravel()
    t = sum(g * g for g in grids).ravel().astype(float)
    num = np.exp(2j * math.pi * (tau * (t + s) / 2.0 + z2 * s))
    num = num * np.where(s % 2, -1.0, 1.0)
    den = 1.0 - np.exp(2j * math.pi * (z1 + s * tau))
    tot = complex(np.sum(num / den))
    th = complex(theta_odd_mp(tau, z2))
    return cmath.exp(1j * math.pi * z1) / th**4 * tot


def theta_component_direct(m, j, tau, z, N=40):
    tot = 0j
    for r in range(j - 2 * m * N, j + 2 * m * N + 1, 2 * m):
        tot += cmath.exp(2j * math.pi * (tau * r * r / (4 * m) + r * z))
    return tot


# ---------------------------------------------------------------------------
# two-variable kernel


def test_mu_two_var_matches_direct_sum():
    mp.mp.dps = 35
    for tau, u, v in [
        (2j, 0.3 + 0.1j, 0.1 - 0.2j),
        (0.13 + 0.77j, 0.23 + 0.31j, -0.17 + 0.12j),
    ]:
        got, cert = mu_two_var(tau, u, v, with_certificate=True, completed=False)
        want = complex(mu_two_var_mp(tau, u, v, N=60))
        assert abs(got - want) <= cert.bound + 5e-14 * (1 + abs(got))


def test_mu_two_var_truncation_stable_at_sample_point():
    # tightening the tolerance must not move the value beyond the loose budget
    loose = Precision(digits=18, eps=1e-8)
    a = mu_two_var(2j, 0.3 + 0.1j, 0.1 - 0.2j, prec=loose, completed=False)
    b = mu_two_var(2j, 0.3 + 0.1j, 0.1 - 0.2j, completed=False)
    assert abs(a - b) <= 1e-8


def test_completed_elliptic_laws():
    tau = 0.13 + 0.77j
    u, v = 0.23 + 0.31j, -0.17 + 0.12j
    base = mu_two_var(tau, u, v)
    shifted = mu_two_var(tau, u + tau, v)
    assert abs(shifted + e(tau / 2 + u - v) * base) <= 1e-12 * abs(base)
    assert abs(mu_two_var(tau, u + 1, v) + base) <= 1e-12 * abs(base)


def test_uncompleted_part_breaks_the_tau_law():
    # the law above genuinely tests the completion: drop it and the defect is O(1)
    tau = 0.13 + 0.77j
    u, v = 0.23 + 0.31j, -0.17 + 0.12j
    base = mu_two_var(tau, u, v, completed=False)
    shifted = mu_two_var(tau, u + tau, v, completed=False)
    assert abs(shifted + e(tau / 2 + u - v) * base) > 1e-3 * abs(base)


@settings(max_examples=25, deadline=None)
@given(
    ur=st.floats(0.05, 0.45),
    ui=st.floats(0.03, 0.25),
    vr=st.floats(-0.45, -0.05),
    vi=st.floats(-0.25, -0.03),
)
def test_completed_kernel_is_symmetric(ur, ui, vr, vi):
    tau = 0.1 + 0.8j
    u, v = complex(ur, ui), complex(vr, vi)
    a = mu_two_var(tau, u, v)
    b = mu_two_var(tau, v, u)
    assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


@pytest.mark.parametrize(
    "u, v, name",
    [
        (0.0, 0.3 + 0.1j, "u"),
        (0.3 + 0.1j, 1.0 + 0j, "v"),
        (0.3 + 0.1j, 0.3 + 0.1j, "u - v"),
    ],
)
def test_divisor_points_are_rejected(u, v, name):
    with pytest.raises(ZeroDivisionError, match=name.replace("-", "[-]")):
        mu_two_var(0.1 + 0.8j, u, v)


def test_near_divisor_point_is_rejected():
    tau = 0.1 + 0.8j
    with pytest.raises(ZeroDivisionError, match="u lies"):
        mu_two_var(tau, tau + 1e-9, 0.2 + 0.3j)


# ---------------------------------------------------------------------------
# 2m-fold sums


def test_mu_m_one_matches_mpmath_box_sum():
    mp.mp.dps = 30
    tau, z1, z2 = 1.1j, 0.23 + 0.11j, 0.05 + 0.08j
    got = mu_m_eval(1, tau, z1, z2)
    want = complex(mu_m_1_mp(tau, z1, z2))
    assert abs(got - want) <= 1e-12 * abs(got)


def test_mu_m_two_matches_numpy_box_sum():
    tau, z1, z2 = 1.1j, 0.23 + 0.11j, 0.05 + 0.08j
    got = mu_m_eval(2, tau, z1, z2)
    want = mu_m_2_np(tau, z1, z2)
    assert abs(got - want) <= 1e-12 * abs(got)


def test_mu_m_box_sums_decay_like_a_gaussian():
    # consecutive sup-norm shells of the m=2 oracle shrink fast, so the
    # box enumeration above is converged at its fixed radius
    tau, z1, z2 = 1.1j, 0.23 + 0.11j, 0.05 + 0.08j
    s1 = mu_m_2_np(tau, z1, z2, N=1)
    s2 = mu_m_2_np(tau, z1, z2, N=2)
    s3 = mu_m_2_np(tau, z1, z2, N=3)
    assert abs(s3 - s2) < 1e-4 * abs(s2 - s1)
    assert abs(s3 - s2) < 1e-12 * abs(s3)


def test_mu_m_certificate_covers_radius_growth():
    tau, z1, z2 = 1.1j, 0.23 + 0.11j, 0.05 + 0.08j
    val, cert = mu_m_eval(2, tau, z1, z2, with_certificate=True)
    tight = mu_m_eval(2, tau, z1, z2, prec=Precision(digits=26, eps=1e-13))
    assert abs(val - tight) <= cert.bound + 5e-14 * (1 + abs(val))


def test_mu_m_rejects_poles_and_bad_index():
    with pytest.raises(ZeroDivisionError, match="z1"):
        mu_m_eval(1, 1.1j, 0.0, 0.05 + 0.08j)
    with pytest.raises(ZeroDivisionError, match="z2"):
        mu_m_eval(1, 1.1j, 0.23 + 0.11j, 0.0)
    with pytest.raises(ValueError):
        mu_m_eval(0, 1.1j, 0.23 + 0.11j, 0.05 + 0.08j)
    with pytest.raises(ValueError):
        mu_m_eval(-3, 1.1j, 0.23 + 0.11j, 0.05 + 0.08j)


# ---------------------------------------------------------------------------
# completed components


def test_component_truncation_stability_at_sample_point():
    loose = Precision(digits=18, eps=1e-8)
    a, ca = mu_hat_ml(1, 0, 2j, 0.17 + 0.05j, prec=loose, with_certificate=True)
    b, cb = mu_hat_ml(1, 0, 2j, 0.17 + 0.05j, with_certificate=True)
    assert abs(a - b) <= ca.bound + cb.bound + 1e-8


@pytest.mark.parametrize("m, l", [(1, 0), (1, 1), (2, 0), (2, 1)])
def test_component_heisenberg_invariance_unreduced(m, l):
    # raw-formula evaluation (no argument reduction), so the law is not
    # tautological; it pins the completion coefficient and its argument
    lhs = mu_hat_ml(m, l, TAU, Z0 + TAU, reduce=False)
    rhs = e(m * TAU + 2 * m * Z0) * mu_hat_ml(m, l, TAU, Z0, reduce=False)
    assert abs(lhs - rhs) <= 1e-6 * abs(lhs)


def test_component_wrong_completion_sign_breaks_invariance():
    # flipping the completion amounts to adding R back twice
    from mjforms.specfun import R_completion

    def flipped(z):
        val = mu_hat_ml(1, 0, TAU, z, reduce=False)
        shifted = 2 * z + TAU
        pref = -cmath.exp(2j * math.pi * (-TAU / 4.0 - z))
        return val - 2 * pref * 0.5j * R_completion(2 * TAU, shifted - 0.5)

    lhs = flipped(Z0 + TAU)
    rhs = e(TAU + 2 * Z0) * flipped(Z0)
    assert abs(lhs - rhs) > 1e-2 * abs(rhs)


@pytest.mark.parametrize("m, l", [(1, 1), (2, 3)])
def test_component_heisenberg_invariance_reduced(m, l):
    lhs = mu_hat_ml(m, l, TAU, Z0 + 2 * TAU)
    rhs = e(4 * m * TAU + 4 * m * Z0) * mu_hat_ml(m, l, TAU, Z0)
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_component_reduction_matches_raw_formula():
    for m, l in [(1, 0), (2, 1)]:
        a = mu_hat_ml(m, l, TAU, Z0, reduce=True)
        b = mu_hat_ml(m, l, TAU, Z0, reduce=False)
        assert abs(a - b) <= 1e-12 * abs(a)


def test_component_periodicities():
    assert abs(mu_hat_ml(1, 0, TAU, Z0) - mu_hat_ml(1, 2, TAU, Z0)) <= 1e-12
    big = abs(mu_hat_ml(2, 1, TAU, Z0))
    assert abs(mu_hat_ml(2, 1, TAU, Z0) - mu_hat_ml(2, 5, TAU, Z0)) <= 1e-12 * big
    assert abs(mu_hat_ml(2, 1, TAU, Z0 + 1) - mu_hat_ml(2, 1, TAU, Z0)) <= 1e-12 * big


@pytest.mark.parametrize("m, l", [(1, 1), (2, 1), (2, 3)])
def test_component_elliptic_slash_consistency(m, l):
    # the component of residue l is the translate of the residue-0 one
    lhs = mu_hat_ml(m, l, TAU, Z0)
    rhs = e(-(l * l) / (4.0 * m) * TAU - l * Z0) * mu_hat_ml(m, 0, TAU, Z0 + l * TAU / (2 * m))
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


def test_component_rejects_bad_indices():
    with pytest.raises(ValueError):
        mu_hat_ml(0, 0, TAU, Z0)
    with pytest.raises(ValueError):
        mu_hat_ml(1, 0.5, TAU, Z0)


def test_theta_index_component_matches_direct_sum():
    for m, j in [(1, 0), (1, 1), (2, 3), (14, 5)]:
        got = theta_index_component(m, j, 0.2 + 0.9j, 0.07 + 0.02j)
        want = theta_component_direct(m, j, 0.2 + 0.9j, 0.07 + 0.02j)
        assert abs(got - want) <= 1e-13 * max(1.0, abs(want))


# ---------------------------------------------------------------------------
# lattice-indexed products


def test_lattice_data_default_matrix_is_primitive():
    data = mu_lattice_data(MOCK, frame(MOCK, [(2, 2), (3, -3)]))
    assert [[int(x) for x in row] for row in data.A] == [[1, 1], [1, -1]]
    assert data.diag == (28, -4)
    assert len(data.cosets) == 2


def test_lattice_data_rejects_bad_input():
    hyp = lattice([[0, 1], [1, 0]], "gram")
    with pytest.raises(ValueError, match="isotropic"):
        mu_lattice_data(hyp, frame(hyp, [(1, 0)]))
    with pytest.raises(ValueError, match="span"):
        mu_lattice_data(DIAG, frame(DIAG, [(1, 0)]))
    with pytest.raises(ValueError, match="parallel"):
        mu_lattice_data(DIAG, DIAG_FRAME, A=[[1, 1], [0, 1]])
    with pytest.raises(ValueError, match="singular"):
        mu_lattice_data(DIAG, DIAG_FRAME, A=[[1, 0], [0, 0]])
    with pytest.raises(ValueError, match="integer"):
        mu_lattice_data(DIAG, DIAG_FRAME, A=[[Fraction(1, 2), 0], [0, 1]])
    odd = lattice([[1, 0], [0, -1]], "gram")
    with pytest.raises(ValueError, match="even"):
        mu_lattice_data(odd, frame(odd, [(1, 0), (0, 1)]))


@pytest.mark.parametrize(
    "g, l_amb, m, l_int",
    [(-2, Fraction(1, 2), 1, 1), (-4, Fraction(3, 4), 2, 3), (-4, Fraction(0), 2, 0)],
)
def test_rank_one_negative_lattice_reduces_to_component(g, l_amb, m, l_int):
    lat = lattice([[g]], "gram")
    data = mu_lattice_data(lat, frame(lat, [(1,)]))
    assert len(data.cosets) == 1
    got = mu_hat_Ll(data, (l_amb,), TAU, (Z0,))
    want = mu_hat_ml(m, l_int, TAU, Z0)
    assert got == want


def test_diagonal_lattice_gives_theta_times_component():
    data = mu_lattice_data(DIAG, DIAG_FRAME)
    assert len(data.cosets) == 1  # unimodular diagonalization: single coset
    zv = (0.08 + 0.02j, 0.13 + 0.04j)
    got = mu_hat_Ll(data, (Fraction(1, 2), Fraction(1, 2)), TAU, zv)
    want = theta_index_component(1, 1, TAU, zv[0]) * mu_hat_ml(1, 1, TAU, zv[1])
    assert abs(got - want) <= 1e-13 * abs(want)


def test_positive_slot_refinement_is_consistent():
    # replacing a positive column by twice itself splits the theta slot
    # into cosets; the assembled sum must not change
    zv = (0.08 + 0.02j, 0.13 + 0.04j)
    l = (Fraction(1, 2), Fraction(1, 2))
    a = mu_hat_Ll(mu_lattice_data(DIAG, DIAG_FRAME), l, TAU, zv)
    refined = mu_lattice_data(DIAG, DIAG_FRAME, A=[[2, 0], [0, 1]])
    assert refined.diag == (8, -2)
    assert len(refined.cosets) == 2
    b = mu_hat_Ll(refined, l, TAU, zv)
    assert abs(a - b) <= 1e-12 * abs(a)


def test_lattice_product_heisenberg_invariance():
    data = mu_lattice_data(MOCK, MOCK_FRAME)
    dg = discriminant_group(MOCK)
    l = dg.elements[1]
    tau = 0.07 + 0.88j
    zv = np.array([0.12 + 0.03j, -0.06 + 0.05j])
    base = mu_hat_Ll(data, l, tau, zv)
    gram = np.array([[6.0, 8.0], [8.0, 6.0]])
    for lam in [(1, 0), (0, 1)]:
        lamv = np.array(lam, dtype=float)
        q_lam = 0.5 * lamv @ gram @ lamv
        b_lam = lamv @ gram @ zv
        lhs = mu_hat_Ll(data, l, tau, zv + lamv * tau)
        rhs = e(-q_lam * tau - b_lam) * base
        assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


def test_lattice_product_rejects_wrong_z_shape():
    data = mu_lattice_data(DIAG, DIAG_FRAME)
    with pytest.raises(ValueError, match="components"):
        mu_hat_Ll(data, (Fraction(0), Fraction(0)), TAU, (Z0,))


# ---------------------------------------------------------------------------
# splitting residual


@pytest.mark.parametrize("tau", [0.1 + 0.8j, 1.3j])
@pytest.mark.parametrize("w", [0.31 + 0.12j, -0.22 + 0.35j, 0.45 - 0.27j])
def test_splitting_residual_depends_only_on_difference(tau, w):
    offsets = [0.0, 0.11 - 0.07j, -0.23 + 0.05j, 0.31 + 0.18j, -0.08 - 0.21j]
    vals = []
    for o in offsets:
        u = 0.27 + 0.09j + o
        vals.append(splitting_residual(tau, u, u - w))
    spread = max(abs(x - vals[0]) for x in vals)
    assert spread <= 1e-10 * max(1.0, abs(vals[0]))


def test_splitting_residual_is_finite_near_the_pole():
    # u close to 0 (but outside the rejection radius): both the kernel and
    # the explicit meromorphic part blow up; their difference must not
    tau, w = 0.1 + 0.8j, 0.31 + 0.12j
    u = 0.012 + 0.009j
    near = splitting_residual(tau, u, u - w)
    far = splitting_residual(tau, 0.38 + 0.21j, 0.38 + 0.21j - w)
    assert abs(near - far) <= 1e-10 * max(1.0, abs(far))


def test_splitting_residual_moves_with_the_difference():
    tau = 0.1 + 0.8j
    r1 = splitting_residual(tau, 0.27 + 0.09j, 0.27 + 0.09j - (0.31 + 0.12j))
    r2 = splitting_residual(tau, 0.27 + 0.09j, 0.27 + 0.09j - (0.45 - 0.27j))
    assert abs(r1 - r2) > 1e-3
