"""Wirtinger stencils and the covariant operator family.

Annihilation statements run through ``check_annihilation``, whose pass
thresholds derive from the predicted stencil error rather than from a
bare epsilon, and every kernel statement travels with a control (a
non-kernel function, a wrong weight, a wrong lattice, or a wrong frame
direction) that the same check rejects.  Closed forms — raising and
lowering images of Fourier blocks, the ``y^s`` Laplace eigenvalue, the
radial transport identity of the Heisenberg Laplacian — are compared
directly against exact expressions.
"""

import cmath
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mjforms.diffops import (
    _EPS_MACH,
    _stencil,
    OPERATOR_IDS,
    OperatorSpec,
    StencilConfig,
    apply_operator,
    check_annihilation,
    wirtinger_derivs,
)
from mjforms.lattice import lattice, validate_compatible_pair
from mjforms.mu import mu_hat_ml, mu_two_var, theta_index_component
from mjforms.specfun import H_heis, H_weight, HeisData, jacobi_theta_odd, theta_definite
from mjforms.theta import ThetaSpec, domain_check, theta_indef_eval


def e2(x):
    return cmath.exp(2j * cmath.pi * x)


LAT1 = lattice([[2]], "gram")            # rank 1, positive: half-Gram [1]
LAT4 = lattice([[4]], "gram")            # wrong-index control
LAT_M1 = lattice([[-1]], "paper-L")      # rank 1, negative: half-Gram [-1]
LAT2 = lattice([[2, 0], [0, 2]], "gram")
A2 = lattice([[2, 1], [1, 2]], "gram")
LAT_DEG = lattice([[-1, 1], [1, -1]], "gram")  # degenerate rank-2 index

U_HYP = lattice([[0, 1], [1, 0]], "gram")
U_SPEC = ThetaSpec(validate_compatible_pair(U_HYP, [[1, -1]], [[0, 1]]))
GZ = lattice([[1, 2], [2, 1]], "gram")
GZ_COMPLETED = ThetaSpec(validate_compatible_pair(GZ, [[-1, 2]], [[-2, 1]]))


# ---------------------------------------------------------------------------
# stencil tables


def test_first_derivative_weights_order4():
    nodes, weights = _stencil(1, 4)
    assert nodes == (-2, -1, 0, 1, 2)
    assert weights == (
        Fraction(1, 12),
        Fraction(-2, 3),
        Fraction(0),
        Fraction(2, 3),
        Fraction(-1, 12),
    )


def test_second_derivative_weights_order4():
    nodes, weights = _stencil(2, 4)
    assert nodes == (-2, -1, 0, 1, 2)
    assert weights == (
        Fraction(-1, 12),
        Fraction(4, 3),
        Fraction(-5, 2),
        Fraction(4, 3),
        Fraction(-1, 12),
    )


@settings(max_examples=40, deadline=None)
@given(d=st.integers(1, 4), order=st.sampled_from([2, 4]))
def test_weights_reproduce_monomials_exactly(d, order):
    nodes, weights = _stencil(d, order)
    # exact on polynomials up to the node count: picks out d! on x^d
    for m in range(len(nodes)):
        acc = sum(w * Fraction(node) ** m for node, w in zip(nodes, weights))
        assert acc == (math.factorial(d) if m == d else 0)


# ---------------------------------------------------------------------------
# Wirtinger derivative tables


def test_holomorphic_coordinates():
    tab = wirtinger_derivs(lambda tau, z: tau, 0.3 + 1.1j, (0.2,), ["tau", "taubar"])
    assert abs(tab["tau"] - 1) < 1e-10
    assert abs(tab["taubar"]) < 1e-10
    tab = wirtinger_derivs(lambda tau, z: z[0], 0.3 + 1.1j, (0.2 + 0.1j,), ["z0", "zbar0"])
    assert abs(tab["z0"] - 1) < 1e-10
    assert abs(tab["zbar0"]) < 1e-10


def test_exponential_q_derivative():
    tau0 = 0.37 + 0.81j
    val = wirtinger_derivs(lambda tau, z: e2(tau), tau0, (0.0,), ["tau"])["tau"]
    want = 2j * math.pi * e2(tau0)
    assert abs(val - want) < 1e-9 * abs(want)


def test_modulus_squared_table():
    tau0 = 0.4 + 1.3j
    tab = wirtinger_derivs(
        lambda tau, z: tau * tau.conjugate(), tau0, (0.0,), ["tau", "taubar", "tau,taubar"]
    )
    assert abs(tab["tau"] - tau0.conjugate()) < 1e-9
    assert abs(tab["taubar"] - tau0) < 1e-9
    assert abs(tab["tau,taubar"] - 1) < 1e-8


def test_z_cubed_zbar_table():
    z0 = 0.31 - 0.24j
    tab = wirtinger_derivs(
        lambda tau, z: z[0] ** 3 * z[0].conjugate(),
        1j,
        (z0,),
        ["z0,zbar0", "z0,z0,zbar0", "z0,z0,z0"],
    )
    assert abs(tab["z0,zbar0"] - 3 * z0**2) < 1e-8
    assert abs(tab["z0,z0,zbar0"] - 6 * z0) < 1e-7
    assert abs(tab["z0,z0,z0"] - 6 * z0.conjugate()) < 1e-7


def test_fourth_mixed_derivative_with_honest_error():
    val, err = wirtinger_derivs(
        lambda tau, z: (z[0] * z[0].conjugate()) ** 2,
        1j,
        (0.3 + 0.2j,),
        ["z0,z0,zbar0,zbar0"],
        with_errors=True,
    )["z0,z0,zbar0,zbar0"]
    assert abs(val - 4) <= err
    assert err < 1e-3


def test_two_variable_mixed_partial():
    z = (0.4 - 0.2j, 0.1 + 0.3j)
    val = wirtinger_derivs(
        lambda tau, zz: tau * zz[0] * zz[1] ** 2, 0.2 + 0.9j, z, ["tau,z1,z1"]
    )["tau,z1,z1"]
    assert abs(val - 2 * z[0]) < 1e-8


@settings(max_examples=30, deadline=None)
@given(
    ar=st.floats(-1.5, 1.5),
    ai=st.floats(-1.5, 1.5),
    br=st.floats(-1.5, 1.5),
    bi=st.floats(-1.5, 1.5),
)
def test_error_prediction_bounds_actual_error(ar, ai, br, bi):
    a = complex(ar, ai)
    b = complex(br, bi)
    tau0 = 0.4 + 1.1j
    z0 = 0.3 - 0.2j
    tab = wirtinger_derivs(
        lambda tau, z: cmath.exp(a * tau + b * z[0]),
        tau0,
        (z0,),
        ["tau", "z0", "tau,z0"],
        with_errors=True,
    )
    base = cmath.exp(a * tau0 + b * z0)
    exact = {"tau": a * base, "z0": b * base, "tau,z0": a * b * base}
    for key, (val, err) in tab.items():
        assert abs(val - exact[key]) <= 1e3 * err


def test_explicit_step_fourth_order_contraction():
    tau0 = 0.4 + 0.8j
    exact = cmath.exp(tau0)
    errs = []
    for h in (1e-2, 5e-3):
        cfg = StencilConfig(order=4, h_tau=h, h_z=1.0)
        val = wirtinger_derivs(lambda tau, z: cmath.exp(tau), tau0, (0.0,), ["tau"], cfg)["tau"]
        errs.append(abs(val - exact))
    assert 12 < errs[0] / errs[1] < 20


def test_default_step_balances_truncation_and_roundoff():
    cfg = StencilConfig()
    assert cfg.step("tau", 0.5j, 1) == pytest.approx(_EPS_MACH ** (1 / 5))
    assert cfg.step("tau", 3 + 4j, 1) == pytest.approx(5 * _EPS_MACH ** (1 / 5))
    assert cfg.step("z", 0.0, 4) == pytest.approx(_EPS_MACH ** (1 / 8))


def test_unknown_partial_key_rejected():
    with pytest.raises(ValueError, match="unknown partial"):
        wirtinger_derivs(lambda tau, z: tau, 1j, (0.0,), ["w"])


def test_singular_sample_reports_offsets():
    with pytest.raises(ZeroDivisionError, match="singularity"):
        wirtinger_derivs(lambda tau, z: 1 / 0, 1j, (0.0,), ["tau"])


def test_nonfinite_sample_rejected():
    with pytest.raises(ValueError, match="not finite"):
        wirtinger_derivs(lambda tau, z: float("inf"), 1j, (0.0,), ["tau"])


# ---------------------------------------------------------------------------
# first-order operators: closed forms


def test_lowering_kills_holomorphic_and_sees_antiholomorphic():
    p = (0.13 + 0.9j, (0.21 + 0.17j,))
    op = OperatorSpec("Yminus_e", frame=((1.0,),))
    val = apply_operator(op, lambda tau, z: jacobi_theta_odd(tau, z[0]), p)
    assert abs(val) < 1e-9
    val = apply_operator(op, lambda tau, z: z[0].conjugate(), p)
    assert abs(val - (-1j * 0.9)) < 1e-10


def test_xminus_raises_power_of_y():
    s = 0.7
    p = (0.3 + 1.2j, (0.1 + 0.2j,))
    op = OperatorSpec("Xminus", lattice=LAT1)
    val = apply_operator(op, lambda tau, z: tau.imag**s, p)
    want = s * 1.2 ** (s + 1)
    assert abs(val - want) < 1e-8 * abs(want)


def test_xplus_block_multiplier():
    n, r, k = 1, 2, 0.5
    tau0, z0 = 0.3 + 1.2j, 0.25 + 0.4j
    y, v = tau0.imag, z0.imag
    op = OperatorSpec("Xplus", weight=k, lattice=LAT1)
    val = apply_operator(op, lambda tau, z: e2(n * tau + r * z[0]), (tau0, (z0,)))
    want = (-4 * math.pi * n - 4 * math.pi * r * v / y - 4 * math.pi * v**2 / y**2 + k / y) * e2(
        n * tau0 + r * z0
    )
    assert abs(val - want) < 1e-9 * abs(want)


def test_yplus_block_multiplier():
    r = 3
    tau0, z0 = 0.3 + 1.2j, 0.25 + 0.4j
    y, v = tau0.imag, z0.imag
    op = OperatorSpec("Yplus_e", lattice=LAT1, frame=((1.0,),))
    val = apply_operator(op, lambda tau, z: e2(r * z[0]), (tau0, (z0,)))
    want = (-2 * math.pi * r - 4 * math.pi * v / y) * e2(r * z0)
    assert abs(val - want) < 1e-8 * abs(want)


def test_laplacian_eigenvalue_on_power_of_y():
    s, k = 0.7, 2.0
    tau0 = 0.3 + 1.2j
    op = OperatorSpec("Laplacian_k", weight=k)
    val = apply_operator(op, lambda tau, z: tau.imag**s, (tau0, (0.0,)))
    want = s * (s - 1 + k) * tau0.imag**s
    assert abs(val - want) < 1e-9 * abs(want)


def test_operators_reject_lower_half_plane():
    op = OperatorSpec("Laplacian_k", weight=1.0)
    with pytest.raises(ValueError, match="upper half plane"):
        apply_operator(op, lambda tau, z: 1.0, (0.3 - 1j, (0.0,)))


# ---------------------------------------------------------------------------
# heat operators


def test_heat_annihilates_definite_theta_and_wrong_index_fails():
    phi = lambda tau, z: theta_definite(LAT1, (0,), tau, (z[0],))
    pts = [(0.13 + 1.1j, (0.21 + 0.17j,)), (-0.4 + 0.77j, (0.05 + 0.3j,))]
    assert check_annihilation(OperatorSpec("Heat", lattice=LAT1), phi, pts)["pass"]
    assert not check_annihilation(OperatorSpec("Heat", lattice=LAT4), phi, pts[:1])["pass"]


def test_heat_annihilates_definite_theta_rank2():
    phi = lambda tau, z: theta_definite(A2, (0, 0), tau, tuple(z))
    pts = [(0.13 + 1.1j, (0.21 + 0.17j, -0.08 + 0.11j))]
    assert check_annihilation(OperatorSpec("Heat", lattice=A2), phi, pts)["pass"]


def test_partial_heat_sees_only_its_block():
    e = ((1.0, 0.0),)
    pts = [(0.13 + 1.1j, (0.21 + 0.17j, -0.08 + 0.11j))]
    # a function of (tau, z_e) alone is annihilated by the partial operator
    part = lambda tau, z: theta_definite(LAT1, (0,), tau, (z[0],))
    assert check_annihilation(OperatorSpec("HeatE", lattice=LAT2, frame=e), part, pts)["pass"]
    # the full rank-2 theta is not: its other block also carries tau
    full = lambda tau, z: theta_definite(LAT2, (0, 0), tau, tuple(z))
    assert not check_annihilation(OperatorSpec("HeatE", lattice=LAT2, frame=e), full, pts)["pass"]
    assert check_annihilation(OperatorSpec("Heat", lattice=LAT2), full, pts)["pass"]


# ---------------------------------------------------------------------------
# Casimir


def test_casimir_annihilates_definite_theta_rank1():
    phi = lambda tau, z: theta_definite(LAT1, (0,), tau, (z[0],))
    pts = [(0.13 + 1.1j, (0.21 + 0.17j,)), (-0.4 + 0.77j, (0.05 + 0.3j,))]
    op = OperatorSpec("Casimir", weight=0.5, lattice=LAT1)
    rep = check_annihilation(op, phi, pts)
    assert rep["pass"]
    # the sweep contracts at fourth order
    assert rep["points"][0]["convergence_ratios"][0] > 8


def test_casimir_annihilates_definite_theta_rank2():
    phi = lambda tau, z: theta_definite(A2, (0, 0), tau, tuple(z))
    pts = [(0.13 + 1.1j, (0.21 + 0.17j, -0.08 + 0.11j))]
    assert check_annihilation(OperatorSpec("Casimir", weight=1.0, lattice=A2), phi, pts)["pass"]


def test_casimir_controls_harmonic_and_nonharmonic_profiles():
    pts = [(0.13 + 1.1j, (0.21 + 0.17j,))]
    op = OperatorSpec("Casimir", weight=0.5, lattice=LAT1)
    theta = lambda tau, z: theta_definite(LAT1, (0,), tau, (z[0],))
    # a(y) = y is annihilated by the weight-0 Laplacian, so y*theta stays
    # in the kernel; a(y) = y^3 does not and must be rejected
    assert check_annihilation(op, lambda tau, z: tau.imag * theta(tau, z), pts)["pass"]
    assert not check_annihilation(op, lambda tau, z: tau.imag**3 * theta(tau, z), pts)["pass"]


def test_casimir_kills_holomorphic_functions_at_any_weight():
    # every term of the operator carries at least one bar-derivative
    phi = lambda tau, z: e2(3 * tau + 2 * z[0])
    pts = [(0.13 + 1.1j, (0.21 + 0.17j,))]
    assert check_annihilation(OperatorSpec("Casimir", weight=0.77, lattice=LAT1), phi, pts)["pass"]


def _negative_index_block(profile):
    """Fourier block ``a(y) q^-1 f(y, v) zeta`` of the rank-1 index [-1]."""

    def phi(tau, z):
        y, v = tau.imag, z[0].imag
        return profile(y) * e2(-tau) * H_heis(HeisData(-1.0, y, v, 1.0)) * e2(z[0])

    return phi


BLOCK_POINTS = [(0.13 + 1.1j, (0.21 + 0.17j,)), (-0.4 + 0.77j, (0.05 + 0.3j,))]


def test_casimir_annihilates_nonholomorphic_block_at_its_weight():
    # profile solving a'' = (4 pi m - kappa/y) a' for m = -3/4, kappa = 0:
    # the incomplete-gamma branch and the constant branch
    gamma_branch = _negative_index_block(lambda y: H_weight(y, -3.0, 0.5, 1, 1.0, form="harmonic"))
    const_branch = _negative_index_block(lambda y: 1.0)
    op = OperatorSpec("Casimir", weight=0.5, lattice=LAT_M1)
    assert check_annihilation(op, gamma_branch, BLOCK_POINTS)["pass"]
    assert check_annihilation(op, const_branch, BLOCK_POINTS)["pass"]


def test_casimir_block_fails_at_wrong_weight_and_wrong_profile():
    gamma_branch = _negative_index_block(lambda y: H_weight(y, -3.0, 0.5, 1, 1.0, form="harmonic"))
    cubic = _negative_index_block(lambda y: y**3)
    assert not check_annihilation(
        OperatorSpec("Casimir", weight=1.5, lattice=LAT_M1), gamma_branch, BLOCK_POINTS
    )["pass"]
    assert not check_annihilation(
        OperatorSpec("Casimir", weight=0.5, lattice=LAT_M1), cubic, BLOCK_POINTS
    )["pass"]


# ---------------------------------------------------------------------------
# Heisenberg Laplacian


def test_heis_laplacian_radial_transport_identity():
    # on a(v_e^2/y) the operator acts as t a'' + (1/2 - 4 pi L[e] t) a'
    op = OperatorSpec("HeisLaplacian_e", lattice=LAT_M1, frame=((1.0,),))
    for tau0, z0 in [(0.3 + 1.2j, 0.2 + 0.35j), (-0.1 + 0.8j, 0.4 - 0.27j)]:
        t = z0.imag**2 / tau0.imag
        val = apply_operator(op, lambda tau, z: math.exp(-(z[0].imag ** 2) / tau.imag), (tau0, (z0,)))
        want = math.exp(-t) * (t - 0.5 - 4 * math.pi * t)
        assert abs(val - want) < 1e-8 * abs(want)
        val = apply_operator(op, lambda tau, z: z[0].imag ** 2 / tau.imag, (tau0, (z0,)))
        want = 0.5 + 4 * math.pi * t
        assert abs(val - want) < 1e-8 * abs(want)


def test_heis_laplacian_annihilates_kernel_block_not_modulus():
    op = OperatorSpec("HeisLaplacian_e", lattice=LAT_M1, frame=((1.0,),))
    block = lambda tau, z: H_heis(HeisData(-1.0, tau.imag, z[0].imag, 1.0)) * e2(z[0])
    pts = [(0.13 + 1.1j, (0.21 + 0.17j,)), (-0.4 + 0.9j, (0.05 + 0.3j,))]
    assert check_annihilation(op, block, pts)["pass"]
    assert not check_annihilation(op, lambda tau, z: abs(z[0]) ** 4, pts[:1])["pass"]


HYP_POINTS = [
    (0.13 + 0.9j, (0.21 + 0.45j, -0.08 + 0.11j)),
    (-0.31 + 1.25j, (0.05 + 0.625j, 0.4 - 0.21j)),
    (0.5 + 0.8j, (-0.14 + 0.4j, 0.27 + 0.05j)),
]


def test_heis_laplacian_annihilates_hyperbolic_theta():
    # indefinite theta with a negative-vector/isotropic-vector frame pair:
    # smooth kernel along e = (1, -1), sign kernel along e' = (0, 1)
    for tau, z in HYP_POINTS:
        assert domain_check(U_SPEC, tau, z).ok
    phi = lambda tau, z: theta_indef_eval(U_SPEC, tau, tuple(z))
    op = OperatorSpec("HeisLaplacian_e", lattice=U_HYP, frame=((1.0, -1.0),))
    assert check_annihilation(op, phi, HYP_POINTS)["pass"]
    # with steps large enough that truncation dominates the series noise,
    # the sweep shows the fourth-order contraction explicitly
    rep = check_annihilation(op, phi, HYP_POINTS, StencilConfig(order=4, h_tau=0.02, h_z=0.02))
    assert rep["pass"]
    for point in rep["points"]:
        assert all(ratio > 8 for ratio in point["convergence_ratios"])


def test_heis_laplacian_hyperbolic_theta_controls():
    phi = lambda tau, z: theta_indef_eval(U_SPEC, tau, tuple(z))
    # a generic point: at Im z_1 = y/2 the obstruction happens to cancel
    # by the symmetry of the wall pattern, so keep away from that locus
    pts = [(0.13 + 0.9j, (0.21 + 0.17j, -0.08 + 0.11j))]
    # the isotropic direction is not a harmonic direction
    op_iso = OperatorSpec("HeisLaplacian_e", lattice=U_HYP, frame=((0.0, 1.0),))
    assert not check_annihilation(op_iso, phi, pts)["pass"]
    # a pair of two negative vectors yields a theta that is not annihilated
    phi_gz = lambda tau, z: theta_indef_eval(GZ_COMPLETED, tau, tuple(z))
    op_gz = OperatorSpec("HeisLaplacian_e", lattice=GZ, frame=((-1.0, 2.0),))
    assert not check_annihilation(op_gz, phi_gz, pts)["pass"]


def test_heis_laplacian_annihilates_degenerate_index_appell():
    # two-variable completed Appell kernel: degenerate rank-2 index,
    # operators act through the exact rational pseudo-inverse
    phi = lambda tau, z: mu_two_var(tau, z[0], z[1])
    pts = [
        (0.13 + 0.9j, (0.23 + 0.11j, -0.31 + 0.07j)),
        (-0.2 + 1.1j, (0.41 - 0.13j, 0.17 + 0.19j)),
    ]
    op = OperatorSpec("HeisLaplacian_e", lattice=LAT_DEG, frame=((-1.0, 1.0),))
    rep = check_annihilation(op, phi, pts)
    assert rep["pass"]
    assert all(min(p["residuals"]) < 1e-7 for p in rep["points"])


# ---------------------------------------------------------------------------
# xi operators


XI_POINTS = [
    (0.13 + 0.9j, 0.21 + 0.17j),
    (-0.31 + 1.25j, 0.05 + 0.33j),
    (0.5 + 0.8j, -0.14 - 0.09j),
    (0.07 + 1.6j, 0.33 + 0.41j),
]


@pytest.mark.parametrize("l", [0, 1])
def test_heis_xi_maps_completed_appell_components_to_theta(l):
    op = OperatorSpec("XiHE", lattice=LAT_M1, frame=((1.0,),))
    ratios = []
    for tau, z in XI_POINTS:
        img = apply_operator(op, lambda t, zz: mu_hat_ml(1, l, t, zz[0]), (tau, (z,)))
        ratios.append(img / theta_index_component(1, l, tau, z).conjugate())
    for ratio in ratios:
        assert abs(ratio - 1) < 1e-8
    assert max(abs(r - ratios[0]) for r in ratios) < 1e-8


def test_xi_kills_two_variable_appell():
    phi = lambda tau, z: mu_two_var(tau, z[0], z[1])
    pts = [
        (0.13 + 0.9j, (0.23 + 0.11j, -0.31 + 0.07j)),
        (-0.2 + 1.1j, (0.41 - 0.13j, 0.17 + 0.19j)),
    ]
    op = OperatorSpec("Xi", weight=0.5, lattice=LAT_DEG)
    assert check_annihilation(op, phi, pts)["pass"]
    # an antiholomorphic tau-dependence is seen immediately
    val = apply_operator(op, lambda tau, z: tau.conjugate(), pts[0])
    assert abs(val) > 1


def test_xi_equals_partial_xi_on_a_full_frame():
    phi = lambda tau, z: tau.conjugate() * cmath.exp(z[0] * z[0].conjugate()) + 2 * z[0].conjugate()
    p = (0.3 + 1.2j, (0.25 + 0.15j,))
    a = apply_operator(OperatorSpec("Xi", weight=1.5, lattice=LAT_M1), phi, p)
    b = apply_operator(OperatorSpec("XiE", weight=1.5, lattice=LAT_M1, frame=((1.0,),)), phi, p)
    assert abs(a - b) < 1e-12


# ---------------------------------------------------------------------------
# operator specification and report plumbing


def test_every_operator_id_is_constructible():
    for op_id in OPERATOR_IDS:
        OperatorSpec(
            op_id,
            weight=1.0,
            lattice=LAT_M1,
            frame=((1.0,),),
        )


def test_operator_spec_requirements():
    with pytest.raises(ValueError, match="unknown operator"):
        OperatorSpec("Casimir2", weight=1.0, lattice=LAT1)
    with pytest.raises(ValueError, match="weight"):
        OperatorSpec("Casimir", lattice=LAT1)
    with pytest.raises(ValueError, match="lattice"):
        OperatorSpec("Heat")
    with pytest.raises(ValueError, match="exactly one frame vector"):
        OperatorSpec("Yminus_e", frame=((1.0, 0.0), (0.0, 1.0)))
    with pytest.raises(ValueError, match="partial frame"):
        OperatorSpec("HeatE", lattice=LAT2)
    with pytest.raises(ValueError, match="nonzero"):
        OperatorSpec("Yminus_e", frame=((0.0,),))
    with pytest.raises(ValueError, match="lattice rank"):
        OperatorSpec("Heat", lattice=LAT2, frame=((1.0,),))


def test_heis_xi_frame_rejections():
    with pytest.raises(ValueError, match="negative definite"):
        OperatorSpec("XiHE", lattice=LAT1, frame=((1.0,),))
    nonsplit = lattice([[-4, 2], [2, -4]], "gram")
    with pytest.raises(ValueError, match="split"):
        OperatorSpec("XiHE", lattice=nonsplit, frame=((1.0, 0.0),))
    with pytest.raises(ValueError, match="degenerate"):
        OperatorSpec("HeatE", lattice=LAT_DEG, frame=((1.0, 1.0),))


def test_stencil_config_validation():
    with pytest.raises(ValueError, match="order"):
        StencilConfig(order=3)
    with pytest.raises(ValueError, match="positive"):
        StencilConfig(h_tau=0.0)


def test_rank_mismatch_at_application():
    op = OperatorSpec("Heat", lattice=LAT1)
    with pytest.raises(ValueError, match="rank"):
        apply_operator(op, lambda tau, z: 1.0, (1j, (0.0, 0.0)))


def test_check_annihilation_report_shape():
    op = OperatorSpec("Yminus_e", frame=((1.0,),))
    rep = check_annihilation(op, lambda tau, z: e2(z[0]), [(0.2 + 1j, (0.1 + 0.05j,))])
    assert rep["operator"] == "Yminus_e"
    assert rep["stencil_order"] == 4
    assert rep["pass"] is True
    (point,) = rep["points"]
    assert point["h_factors"] == [4.0, 2.0, 1.0]
    assert len(point["residuals"]) == 3
    assert len(point["thresholds"]) == 3
    assert len(point["convergence_ratios"]) == 2
    json.loads(json.dumps(rep))
