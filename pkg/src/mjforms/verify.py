"""End-to-end verification suites with machine-readable reports.

Every suite compares package output against an *independent* oracle —
numerical quadrature, a brute-force lattice or double-sum enumeration,
an exact q-series recomputed from scratch, or a printed closed formula —
and records, per check: the inputs, both values, the residual, the
tolerance, and which oracle produced the expected side.  Reports are
deterministic: given the same configuration they serialize to
byte-identical JSON (no wall-clock, no environment probing).

Exit-code contract used by the CLI: 0 when every suite passes, 1 when
any check fails, 2 when the request itself is malformed (the latter
surfaces as ``ValueError`` from the functions here).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath as mp
import numpy as np

from .diffops import OperatorSpec, apply_operator, check_annihilation
from .jacobigroup import SL2_S, SL2_T, JacobiElement, from_sl2, slash_factor
from .jsonio import dumps, to_jsonable
from .lattice import (
    Lattice,
    discriminant_group,
    frame,
    lattice,
    validate_compatible_pair,
    weil_representation,
)
from .mu import (
    mu_hat_Ll,
    mu_hat_ml,
    mu_lattice_data,
    mu_two_var,
    splitting_residual,
    theta_index_component,
)
from .qseries import coefficient
from .specfun import DEFAULT_PREC, H_heis, H_weight, HeisData, Precision, erf_E, theta_definite
from .theta import ThetaSpec, holomorphic_part_qexp, theta_indef_components

__all__ = [
    "ORACLE_TAGS",
    "IDENTITY_IDS",
    "SUITE_IDS",
    "CheckRecord",
    "VerificationReport",
    "SlashWeights",
    "check_modularity",
    "check_identity",
    "run_suite",
    "run_all",
    "generate_report",
    "report_json",
    "render_text",
    "exit_code",
    "eta_tail_coefficients",
    "eulerian_f0_coefficients",
    "gz_bracket_coefficients",
]

ORACLE_TAGS = (
    "quadrature",
    "brute-force enumeration",
    "exact q-series",
    "paper-printed formula",
)

IDENTITY_IDS = (
    "splitting",
    "gz_product",
    "mock_theta_F0",
    "efunction",
    "prop_deltaH",
    "prop_casimir_fourier",
    "prop5_xi_image",
    "heisenberg_invariance",
)

SUITE_IDS = IDENTITY_IDS + ("modularity",)


# ---------------------------------------------------------------------------
# report types


@dataclass(frozen=True)
class CheckRecord:
    """One comparison: expected (from ``oracle``) versus observed."""

    name: str
    inputs: dict
    expected: object
    observed: object
    residual: float
    tolerance: float
    oracle: str
    passed: bool
    certificates: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.oracle not in ORACLE_TAGS:
            raise ValueError(f"unknown oracle tag {self.oracle!r}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "inputs": to_jsonable(self.inputs),
            "expected": to_jsonable(self.expected),
            "observed": to_jsonable(self.observed),
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "oracle": self.oracle,
            "certificates": to_jsonable(self.certificates),
        }


@dataclass(frozen=True)
class VerificationReport:
    suite: str
    checks: tuple
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> tuple:
        return tuple(c for c in self.checks if not c.passed)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "counts": {"checks": len(self.checks), "failed": len(self.failures)},
            "meta": to_jsonable(self.meta),
            "checks": [c.to_dict() for c in self.checks],
        }


def _record(name, inputs, expected, observed, residual, tolerance, oracle,
            passed=None, certificates=None) -> CheckRecord:
    residual = float(residual)
    tolerance = float(tolerance)
    if passed is None:
        passed = residual <= tolerance
    return CheckRecord(
        name=name,
        inputs=inputs,
        expected=expected,
        observed=observed,
        residual=residual,
        tolerance=tolerance,
        oracle=oracle,
        passed=bool(passed),
        certificates=certificates or {},
    )


def _control(name, inputs, observed, residual, floor, oracle, certificates=None) -> CheckRecord:
    """A must-fail probe: passes when the residual stays *above* ``floor``."""
    return _record(
        name,
        inputs,
        expected=f"residual above {floor:.0e} (control)",
        observed=observed,
        residual=residual,
        tolerance=floor,
        oracle=oracle,
        passed=residual > floor,
        certificates=certificates,
    )


def _cplx(z) -> complex:
    return complex(z)


def _rel(diff: float, scale: float) -> float:
    return float(diff) / max(float(scale), 1e-300)


# ---------------------------------------------------------------------------
# q-series oracles (independent of the theta module's enumeration)


def eta_tail_coefficients(order: int) -> list:
    """Coefficients of ``prod_{n>=1} (1 - q^n)`` by the pentagonal-number
    recurrence, in integer arithmetic."""
    out = [0] * (order + 1)
    out[0] = 1
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g1 > order and g2 > order:
            return out
        if g1 <= order:
            out[g1] += (-1) ** k
        if g2 <= order:
            out[g2] += (-1) ** k
        k += 1


def eulerian_f0_coefficients(order: int) -> list:
    """Coefficients of the seventh-order series
    ``F0(q) = sum_{n>=0} q^{n^2} / ((q^{n+1}; q)_n)``.

    Each reciprocal Pochhammer factor is expanded as a product of
    geometric series in integer arithmetic, so the result is exact and
    entirely independent of the indefinite-theta route it is checked
    against.
    """
    out = [0] * (order + 1)
    n = 0
    while n * n <= order:
        part = [0] * (order + 1)
        part[0] = 1
        for step in range(n + 1, 2 * n + 1):
            if step > order:
                break
            for i in range(step, order + 1):
                part[i] += part[i - step]
        for i in range(order + 1 - n * n):
            out[n * n + i] += part[i]
        n += 1
    return out


def gz_bracket_coefficients(order: int) -> list:
    """The double sum ``(sum_{n,m>=0} - sum_{n,m<=-1}) (-1)^{n+m}
    q^{(n^2 + 4nm + m^2 + n + m)/2}`` truncated at ``q^order``.

    The two cones are disjoint: index pairs with ``n = 0`` or ``m = 0``
    belong to the first sum only (including such pairs in both cones
    would double-count them).  For fixed first index the exponent is
    strictly increasing in the second, so both loops terminate on the
    first exponent past the order.
    """
    out = [0] * (order + 1)
    n = 0
    while n * (n + 1) // 2 <= order:
        m = 0
        while True:
            expo = (n * n + 4 * n * m + m * m + n + m) // 2
            if expo > order:
                break
            out[expo] += (-1) ** (n + m)
            m += 1
        n += 1
    a = 1
    while (a * a + 3 * a) // 2 <= order:
        b = 1
        while True:
            expo = (a * a + 4 * a * b + b * b - a - b) // 2
            if expo > order:
                break
            out[expo] -= (-1) ** (a + b)
            b += 1
        a += 1
    return out


def _convolve_power(coeffs: Sequence[int], power: int, order: int) -> list:
    out = [0] * (order + 1)
    out[0] = 1
    for _ in range(power):
        nxt = [0] * (order + 1)
        for i, a in enumerate(out):
            if a == 0:
                continue
            for j in range(order + 1 - i):
                if coeffs[j]:
                    nxt[i + j] += a * coeffs[j]
        out = nxt
    return out


# ---------------------------------------------------------------------------
# shared fixtures (lattices and evaluation points used by the built-in suites)

_GZ = lattice([[1, 2], [2, 1]], "gram")
_GZ_SPEC = ThetaSpec(validate_compatible_pair(_GZ, [[-1, 2]], [[-2, 1]]), kernel_override="sgn")
_SIXTH = (Fraction(1, 6), Fraction(1, 6))

_MOCK_G = lattice([[3, 4], [4, 3]], "gram")
_MOCK_G_SPEC = ThetaSpec(validate_compatible_pair(_MOCK_G, [[-3, 4]], [[4, -3]]))
_FOURTEENTH = (Fraction(1, 14), Fraction(1, 14))

_MOCK_EVEN = lattice([[3, 4], [4, 3]], "paper-L")
_MOCK_EVEN_SPEC = ThetaSpec(validate_compatible_pair(_MOCK_EVEN, [[-3, 4]], [[4, -3]]))

_LAT_M1 = lattice([[-1]], "paper-L")
_LAT_DEG = lattice([[-1, 1], [1, -1]], "gram")
_U_HYP = lattice([[0, 1], [1, 0]], "gram")
_U_SPEC = ThetaSpec(validate_compatible_pair(_U_HYP, [[1, -1]], [[0, 1]]))

_BLOCK_POINTS = ((0.13 + 1.1j, (0.21 + 0.17j,)), (-0.4 + 0.77j, (0.05 + 0.3j,)))
_XI_POINTS = (
    (0.13 + 0.9j, 0.21 + 0.17j),
    (-0.31 + 1.25j, 0.05 + 0.33j),
    (0.5 + 0.8j, -0.14 - 0.09j),
    (0.07 + 1.6j, 0.33 + 0.41j),
)


def _e(x) -> complex:
    return cmath.exp(2j * cmath.pi * x)


def _annihilation_record(name, op: OperatorSpec, phi, points, tol, oracle,
                         control: bool = False, control_floor: float = None) -> CheckRecord:
    rep = check_annihilation(op, phi, list(points))
    residual = max(min(pt["relative_residuals"]) for pt in rep["points"])
    certificates = {
        "stencil_pass": rep["pass"],
        "stencil_order": rep["stencil_order"],
        "convergence_ratios": [pt["convergence_ratios"] for pt in rep["points"]],
    }
    inputs = {"operator": op.id, "points": [list(map(_cplx, (t, *z))) for t, z in points]}
    if control:
        floor = tol if control_floor is None else control_floor
        return _record(
            name,
            inputs,
            expected=f"residual above {floor:.0e} (control)",
            observed=residual,
            residual=residual,
            tolerance=floor,
            oracle=oracle,
            passed=(not rep["pass"]) and residual > floor,
            certificates=certificates,
        )
    return _record(
        name,
        inputs,
        expected=0.0,
        observed=residual,
        residual=residual,
        tolerance=tol,
        oracle=oracle,
        passed=rep["pass"] and residual <= tol,
        certificates=certificates,
    )


# ---------------------------------------------------------------------------
# identity suites


def _suite_efunction(params: dict, tol: float, prec: Precision) -> VerificationReport:
    n_points = int(params.get("points", 50))
    lo, hi = float(params.get("lo", -3.0)), float(params.get("hi", 3.0))
    if n_points < 2:
        raise ValueError("efunction: need at least two grid points")
    checks = []
    with mp.workdps(30):
        for i in range(n_points):
            x = lo + (hi - lo) * i / (n_points - 1)
            expected = float(2 * mp.quad(lambda t: mp.e ** (-mp.pi * t * t), [0, x]))
            observed = erf_E(x, prec)
            checks.append(
                _record(
                    f"E({x:+.6f})",
                    {"x": x},
                    expected,
                    observed,
                    abs(observed - expected),
                    tol,
                    "quadrature",
                )
            )
    meta = {"grid": {"points": n_points, "lo": lo, "hi": hi}, "quadrature_digits": 30}
    return VerificationReport("efunction", tuple(checks), meta)


def _suite_splitting(params: dict, tol: float, prec: Precision) -> VerificationReport:
    taus = params.get("taus", (2j, 0.3 + 1.1j))
    ws = params.get("ws", (0.23 + 0.11j, -0.4 + 0.37j))
    offsets = (0.31 - 0.12j, -0.27 + 0.21j, 0.11 + 0.43j, -0.05 - 0.17j, 0.38 + 0.29j)
    checks = []
    for tau in taus:
        tau = _cplx(tau)
        for w in ws:
            w = _cplx(w)
            values = []
            bound = 0.0
            for d in offsets:
                val, cert = splitting_residual(tau, w + d, d, prec, with_certificate=True)
                values.append(val)
                bound = max(bound, cert.bound)
            diameter = max(
                abs(a - b) for i, a in enumerate(values) for b in values[i + 1:]
            )
            checks.append(
                _record(
                    f"tau={tau:.3g}, u-v={w:.3g}",
                    {"tau": tau, "w": w, "offsets": list(offsets)},
                    "one value for all five (u, v) pairs",
                    values,
                    diameter,
                    tol,
                    "brute-force enumeration",
                    certificates={"truncation_bound": bound},
                )
            )
    meta = {"pairs_per_difference": len(offsets), "statement": "residual depends on u - v only"}
    return VerificationReport("splitting", tuple(checks), meta)


def _suite_gz_product(params: dict, tol: float, prec: Precision) -> VerificationReport:
    copies = int(params.get("copies", 1))
    order = int(params.get("order", 10))
    if copies < 1:
        raise ValueError("gz_product: copies must be a positive integer")
    if order < 1:
        raise ValueError("gz_product: order must be a positive integer")
    qs = holomorphic_part_qexp(_GZ_SPEC, _SIXTH, _SIXTH, order=Fraction(1, 12) + order)
    base = []
    for k in range(order + 1):
        re, im = coefficient(qs, Fraction(1, 12) + k)
        if im != 0:
            raise RuntimeError("specialized series has a non-real coefficient")
        base.append(int(re))
    lhs = _convolve_power(base, copies, order)
    bracket = gz_bracket_coefficients(order)
    rhs = [2**copies * c for c in _convolve_power(bracket, copies, order)]
    checks = [
        _record(
            "leading exponent and phase",
            {"copies": copies},
            {"root": Fraction(copies, 6) % 1, "q_power": Fraction(copies, 12)},
            {"root": (copies * qs.root) % 1, "q_power": copies * qs.exponents()[0]},
            0.0 if (copies * qs.root) % 1 == Fraction(copies, 6) % 1
            and copies * qs.exponents()[0] == Fraction(copies, 12) else 1.0,
            0.0,
            "paper-printed formula",
        )
    ]
    for k in range(order + 1):
        checks.append(
            _record(
                f"coefficient of q^({copies}/12 + {k})",
                {"copies": copies, "k": k},
                rhs[k],
                lhs[k],
                abs(lhs[k] - rhs[k]),
                0.0,
                "paper-printed formula",
            )
        )
    meta = {
        "copies": copies,
        "order": order,
        "lhs": "torsion specialization of the sign-kernel theta series, "
        "powered coefficientwise (the lattice sum factors over orthogonal copies)",
        "rhs": "2^n e(n/6) q^(n/12) times the n-th power of the double sum",
    }
    return VerificationReport("gz_product", tuple(checks), meta)


def _suite_mock_theta_f0(params: dict, tol: float, prec: Precision) -> VerificationReport:
    order = int(params.get("order", 17))
    if order < 1:
        raise ValueError("mock_theta_F0: order must be a positive integer")
    qs = holomorphic_part_qexp(_MOCK_G_SPEC, _FOURTEENTH, _FOURTEENTH,
                               order=Fraction(1, 28) + order)
    expected_tail = _convolve_power_pair(
        eta_tail_coefficients(order), eulerian_f0_coefficients(order), order
    )
    checks = [
        _record(
            "leading exponent and phase",
            {},
            {"root": Fraction(1, 14), "q_power": Fraction(1, 28)},
            {"root": qs.root, "q_power": qs.exponents()[0]},
            0.0 if qs.root == Fraction(1, 14) and qs.exponents()[0] == Fraction(1, 28) else 1.0,
            0.0,
            "exact q-series",
        )
    ]
    nonzero = 0
    for k in range(order + 1):
        re, im = coefficient(qs, Fraction(1, 28) + k)
        want = 2 * expected_tail[k]
        if want:
            nonzero += 1
        checks.append(
            _record(
                f"coefficient of q^(1/28 + {k})",
                {"k": k},
                (want, 0),
                (re, im),
                float(abs(complex(re - want, im))),
                0.0,
                "exact q-series",
            )
        )
    checks.append(
        _record(
            "enough nonzero coefficients to pin the product",
            {"order": order},
            ">= 8",
            nonzero,
            float(max(0, 8 - nonzero)),
            0.0,
            "exact q-series",
        )
    )
    meta = {
        "order": order,
        "expected_side": "eta tail convolved with the Eulerian series "
        "sum_{n>=0} q^(n^2) / ((q^(n+1); q)_n), both in integer arithmetic",
    }
    return VerificationReport("mock_theta_F0", tuple(checks), meta)


def _convolve_power_pair(a: Sequence[int], b: Sequence[int], order: int) -> list:
    out = [0] * (order + 1)
    for i in range(order + 1):
        if a[i] == 0:
            continue
        for j in range(order + 1 - i):
            out[i + j] += a[i] * b[j]
    return out


def _suite_prop_deltaH(params: dict, tol: float, prec: Precision) -> VerificationReport:
    checks = []
    op = OperatorSpec("HeisLaplacian_e", lattice=_LAT_M1, frame=((1.0,),))
    # radial transport: on a(v^2/y) the operator acts as t a'' + (1/2 - 4 pi L[e] t) a'
    profiles = {
        "exp(-t)": (
            lambda tau, z: math.exp(-(z[0].imag ** 2) / tau.imag),
            lambda t: math.exp(-t) * (t - 0.5 - 4 * math.pi * t),
        ),
        "t": (
            lambda tau, z: z[0].imag ** 2 / tau.imag,
            lambda t: 0.5 + 4 * math.pi * t,
        ),
    }
    for label, (phi, want_of_t) in profiles.items():
        for tau0, z0 in ((0.3 + 1.2j, 0.2 + 0.35j), (-0.1 + 0.8j, 0.4 - 0.27j)):
            t = z0.imag**2 / tau0.imag
            observed = apply_operator(op, phi, (tau0, (z0,)))
            expected = want_of_t(t)
            checks.append(
                _record(
                    f"radial transport on a = {label} at tau={tau0:.3g}",
                    {"tau": tau0, "z": z0, "t": t},
                    expected,
                    observed,
                    _rel(abs(observed - expected), abs(expected)),
                    tol,
                    "paper-printed formula",
                )
            )
    # the completed kernel block of a negative index is annihilated ...
    block = lambda tau, z: H_heis(HeisData(-1.0, tau.imag, z[0].imag, 1.0)) * _e(z[0])
    checks.append(
        _annihilation_record(
            "completed negative-index block lies in the kernel",
            op, block, _BLOCK_POINTS, tol, "paper-printed formula",
        )
    )
    # ... and so is the completed two-variable kernel (degenerate index)
    appell_points = (
        (0.13 + 0.9j, (0.23 + 0.11j, -0.31 + 0.07j)),
        (-0.2 + 1.1j, (0.41 - 0.13j, 0.17 + 0.19j)),
    )
    op_deg = OperatorSpec("HeisLaplacian_e", lattice=_LAT_DEG, frame=((-1.0, 1.0),))
    checks.append(
        _annihilation_record(
            "completed two-variable kernel lies in the kernel",
            op_deg, lambda tau, z: mu_two_var(tau, z[0], z[1]), appell_points,
            tol, "paper-printed formula",
        )
    )
    # a smooth non-solution must be rejected
    checks.append(
        _annihilation_record(
            "generic smooth function is not annihilated",
            op, lambda tau, z: abs(z[0]) ** 4, _BLOCK_POINTS[:1],
            tol, "brute-force enumeration", control=True, control_floor=100 * tol,
        )
    )
    meta = {"index": "rank one, negative", "operator": "HeisLaplacian_e"}
    return VerificationReport("prop_deltaH", tuple(checks), meta)


def _suite_prop_casimir_fourier(params: dict, tol: float, prec: Precision) -> VerificationReport:
    def blockf(profile) -> Callable:
        def phi(tau, z):
            y, v = tau.imag, z[0].imag
            return profile(y) * _e(-tau) * H_heis(HeisData(-1.0, y, v, 1.0)) * _e(z[0])

        return phi

    gamma_branch = blockf(lambda y: H_weight(y, -3.0, 0.5, 1, 1.0, form="harmonic"))
    const_branch = blockf(lambda y: 1.0)
    cubic = blockf(lambda y: y**3)
    op = OperatorSpec("Casimir", weight=0.5, lattice=_LAT_M1)
    op_wrong = OperatorSpec("Casimir", weight=1.5, lattice=_LAT_M1)
    checks = [
        _annihilation_record(
            "incomplete-gamma branch solves the fourth-order equation",
            op, gamma_branch, _BLOCK_POINTS, tol, "paper-printed formula",
        ),
        _annihilation_record(
            "constant branch solves the fourth-order equation",
            op, const_branch, _BLOCK_POINTS, tol, "paper-printed formula",
        ),
        _annihilation_record(
            "same block at the wrong weight is rejected",
            op_wrong, gamma_branch, _BLOCK_POINTS, tol,
            "brute-force enumeration", control=True, control_floor=100 * tol,
        ),
        _annihilation_record(
            "cubic profile is rejected",
            op, cubic, _BLOCK_POINTS, tol,
            "brute-force enumeration", control=True, control_floor=100 * tol,
        ),
    ]
    meta = {"weight": 0.5, "index": "rank one, negative", "operator": "Casimir"}
    return VerificationReport("prop_casimir_fourier", tuple(checks), meta)


def _suite_prop5_xi_image(params: dict, tol: float, prec: Precision) -> VerificationReport:
    op = OperatorSpec("XiHE", lattice=_LAT_M1, frame=((1.0,),))
    checks = []
    for l in (0, 1):
        ratios = []
        for tau, z in _XI_POINTS:
            img = apply_operator(op, lambda t, zz: mu_hat_ml(1, l, t, zz[0], prec=prec), (tau, (z,)))
            ref = theta_index_component(1, l, tau, z, prec).conjugate()
            ratio = img / ref
            ratios.append(ratio)
            checks.append(
                _record(
                    f"xi image over conjugate theta, l={l}, tau={tau:.3g}",
                    {"l": l, "tau": tau, "z": z},
                    1.0,
                    ratio,
                    abs(ratio - 1.0),
                    tol,
                    "brute-force enumeration",
                )
            )
        spread = max(
            abs(a - b) for i, a in enumerate(ratios) for b in ratios[i + 1:]
        )
        checks.append(
            _record(
                f"proportionality constant is point-independent, l={l}",
                {"l": l, "points": len(_XI_POINTS)},
                "one constant for all points",
                ratios,
                spread,
                tol,
                "brute-force enumeration",
            )
        )
    meta = {"index": 1, "components": [0, 1], "operator": "XiHE"}
    return VerificationReport("prop5_xi_image", tuple(checks), meta)


def _suite_heisenberg_invariance(params: dict, tol: float, prec: Precision) -> VerificationReport:
    tau0, z0 = 0.1 + 0.65j, 0.11 + 0.03j
    checks = []
    for m, l in ((1, 0), (2, 1)):
        lhs = mu_hat_ml(m, l, tau0, z0 + tau0, prec=prec, reduce=False)
        rhs = _e(m * tau0 + 2 * m * z0) * mu_hat_ml(m, l, tau0, z0, prec=prec, reduce=False)
        checks.append(
            _record(
                f"component kernel under z -> z + tau, (m, l)=({m}, {l})",
                {"m": m, "l": l, "tau": tau0, "z": z0},
                rhs,
                lhs,
                _rel(abs(lhs - rhs), abs(rhs)),
                tol,
                "brute-force enumeration",
            )
        )
    base = mu_hat_ml(2, 1, tau0, z0, prec=prec)
    shifted = mu_hat_ml(2, 1, tau0, z0 + 1, prec=prec)
    checks.append(
        _record(
            "component kernel under z -> z + 1, (m, l)=(2, 1)",
            {"m": 2, "l": 1, "tau": tau0, "z": z0},
            base,
            shifted,
            _rel(abs(shifted - base), abs(base)),
            min(tol, 1e-10),
            "brute-force enumeration",
        )
    )
    # lattice kernel: translation by an integral vector twists by an
    # explicit index-dependent exponential
    data = mu_lattice_data(_MOCK_EVEN, frame(_MOCK_EVEN, [(1, 1), (1, -1)]))
    dg = discriminant_group(_MOCK_EVEN)
    l_elt = dg.elements[1]
    tau1 = 0.07 + 0.88j
    zv = np.array([0.12 + 0.03j, -0.06 + 0.05j])
    gram = np.array([[float(x) for x in row] for row in _MOCK_EVEN.gram])
    base_l = mu_hat_Ll(data, l_elt, tau1, zv, prec=prec)
    for lam in ((1, 0), (0, 1)):
        lamv = np.array(lam, dtype=float)
        q_lam = 0.5 * lamv @ gram @ lamv
        b_lam = lamv @ gram @ zv
        lhs = mu_hat_Ll(data, l_elt, tau1, zv + lamv * tau1, prec=prec)
        rhs = _e(-q_lam * tau1 - b_lam) * base_l
        checks.append(
            _record(
                f"lattice kernel under z -> z + lambda tau, lambda={lam}",
                {"lambda": list(lam), "tau": tau1, "z": list(map(_cplx, zv))},
                rhs,
                lhs,
                _rel(abs(lhs - rhs), abs(rhs)),
                min(tol, 1e-10),
                "brute-force enumeration",
            )
        )
    meta = {
        "component_point": {"tau": tau0, "z": z0},
        "lattice_point": {"tau": tau1},
        "statement": "integral elliptic translations twist by the index exponential",
    }
    return VerificationReport("heisenberg_invariance", tuple(checks), meta)


_IDENTITY_DEFAULT_TOL = {
    "splitting": 1e-8,
    "gz_product": 0.0,
    "mock_theta_F0": 0.0,
    "efunction": 1e-12,
    "prop_deltaH": 1e-6,
    "prop_casimir_fourier": 1e-6,
    "prop5_xi_image": 1e-5,
    "heisenberg_invariance": 1e-6,
}

_IDENTITY_SUITES = {
    "splitting": _suite_splitting,
    "gz_product": _suite_gz_product,
    "mock_theta_F0": _suite_mock_theta_f0,
    "efunction": _suite_efunction,
    "prop_deltaH": _suite_prop_deltaH,
    "prop_casimir_fourier": _suite_prop_casimir_fourier,
    "prop5_xi_image": _suite_prop5_xi_image,
    "heisenberg_invariance": _suite_heisenberg_invariance,
}


def check_identity(identity: str, params: dict | None = None, tol: float | None = None,
                   prec: Precision = DEFAULT_PREC) -> VerificationReport:
    """Run one cross-module identity suite and report every comparison.

    ``identity`` is one of ``IDENTITY_IDS``; ``params`` tweaks suite
    defaults (orders, grids, points); ``tol`` overrides the suite's
    default tolerance where one applies (the exact q-series suites
    compare integers and ignore it).
    """
    if identity not in _IDENTITY_SUITES:
        raise ValueError(
            f"unknown identity {identity!r}; expected one of {', '.join(IDENTITY_IDS)}"
        )
    effective = _IDENTITY_DEFAULT_TOL[identity] if tol is None else float(tol)
    if tol is not None and not tol >= 0:
        raise ValueError("tol must be nonnegative")
    report = _IDENTITY_SUITES[identity](dict(params or {}), effective, prec)
    meta = dict(report.meta)
    meta.setdefault("tolerance", effective)
    meta.setdefault("precision", {"digits": prec.digits, "eps": prec.eps})
    return VerificationReport(report.suite, report.checks, meta)


# ---------------------------------------------------------------------------
# modularity


@dataclass(frozen=True)
class SlashWeights:
    """Weight and index for the slash action: scalar weight ``k``, index
    lattice ``lattice`` (its rank fixes the elliptic variable)."""

    k: object
    lattice: Lattice


def _gen_label(g: JacobiElement) -> str:
    gamma = tuple(tuple(int(x) if Fraction(x).denominator == 1 else x for x in row)
                  for row in g.gamma)
    translation = any(x != 0 for x in (*g.lam, *g.mu))
    if not translation:
        if gamma == SL2_S:
            return "S"
        if gamma == SL2_T:
            return "T"
        return f"gamma={gamma}"
    if gamma == ((1, 0), (0, 1)):
        return f"heis(lam={g.lam}, mu={g.mu})"
    return f"gamma={gamma}, lam={g.lam}, mu={g.mu}"


def _weil_matrix(lat: Lattice, g: JacobiElement) -> np.ndarray:
    if any(x != 0 for x in (*g.lam, *g.mu)):
        raise ValueError("automatic representation matrices cover SL2 generators only")
    if g.gamma == tuple(tuple(Fraction(x) for x in row) for row in SL2_S) or g.gamma == SL2_S:
        return weil_representation(lat, "S")
    if g.gamma == tuple(tuple(Fraction(x) for x in row) for row in SL2_T) or g.gamma == SL2_T:
        return weil_representation(lat, "T")
    raise ValueError(
        "automatic representation matrices are available for S and T only; "
        "pass explicit matrices for other generators"
    )


def check_modularity(phi, weights: SlashWeights, rep=None, gens: Sequence[JacobiElement] = (),
                     points: Sequence = (), tol: float = 1e-6,
                     mode: str = "exact") -> VerificationReport:
    """Compare ``phi`` with its slashed transforms at sample points.

    ``phi(tau, z)`` may return a scalar or a vector of components.  With
    ``rep`` the comparison is ``(phi |_k g)(tau, z)`` against
    ``rho(g) phi(tau, z)``: pass ``rep="weil"`` to derive the matrices
    from ``weights.lattice`` (S and T), or a sequence of matrices
    aligned with ``gens``.  ``mode="projective"`` fits the best
    proportionality constant per (generator, point) and additionally
    requires the fitted constants of each generator to agree, for forms
    whose multiplier is not pinned down.

    Points must avoid the divisors of ``phi`` and their images under the
    generators; a ``phi`` that raises there surfaces as a configuration
    error rather than a failed check.
    """
    if mode not in ("exact", "projective"):
        raise ValueError("mode must be 'exact' or 'projective'")
    gens = list(gens)
    points = list(points)
    if not gens:
        raise ValueError("need at least one group element to transform by")
    if not points:
        raise ValueError("need at least one sample point")
    if not tol > 0:
        raise ValueError("tol must be positive")
    lat = weights.lattice
    if rep is None:
        matrices = [None] * len(gens)
    elif isinstance(rep, str):
        if rep != "weil":
            raise ValueError(f"unknown representation request {rep!r}")
        matrices = [_weil_matrix(lat, g) for g in gens]
    else:
        matrices = [None if m is None else np.asarray(m, dtype=complex) for m in rep]
        if len(matrices) != len(gens):
            raise ValueError("need one representation matrix per group element")

    checks = []
    for g, rho in zip(gens, matrices):
        label = _gen_label(g)
        constants = []
        for tau, z in points:
            tau = _cplx(tau)
            zv = np.atleast_1d(np.asarray(z, dtype=complex))
            taup, zp, factor = slash_factor(weights.k, lat, g, tau, zv)
            observed = factor * np.atleast_1d(np.asarray(phi(taup, zp), dtype=complex))
            ref = np.atleast_1d(np.asarray(phi(tau, zv), dtype=complex))
            expected = ref if rho is None else rho @ ref
            scale = float(np.max(np.abs(expected)))
            inputs = {"generator": label, "tau": tau, "z": list(map(_cplx, zv))}
            if mode == "exact":
                residual = _rel(float(np.max(np.abs(observed - expected))), scale)
                exp_rec, obs_rec = expected, observed
            else:
                denom = complex(np.vdot(expected, expected))
                c = complex(np.vdot(expected, observed)) / denom
                constants.append(c)
                residual = _rel(float(np.max(np.abs(observed - c * expected))), scale)
                exp_rec = {"proportional_to": list(map(_cplx, expected)), "constant": c}
                obs_rec = observed
            checks.append(
                _record(
                    f"slash by {label} at tau={tau:.3g}",
                    inputs,
                    exp_rec,
                    obs_rec,
                    residual,
                    tol,
                    "paper-printed formula" if rho is not None else "brute-force enumeration",
                    certificates={"components": int(observed.shape[0])},
                )
            )
        if mode == "projective" and len(constants) > 1:
            spread = max(
                abs(a - b) for i, a in enumerate(constants) for b in constants[i + 1:]
            )
            checks.append(
                _record(
                    f"projective constants agree for {label}",
                    {"generator": label, "points": len(points)},
                    "one constant for all points",
                    constants,
                    spread,
                    tol * max(abs(c) for c in constants),
                    "brute-force enumeration",
                )
            )
    meta = {
        "mode": mode,
        "weight": weights.k,
        "rank": lat.rank,
        "generators": [_gen_label(g) for g in gens],
        "points": len(points),
        "representation": "none" if rep is None else ("weil" if isinstance(rep, str) else "explicit"),
    }
    return VerificationReport("modularity", tuple(checks), meta)


_MODULARITY_POINTS = (
    (0.13 + 0.9j, (0.21 + 0.17j, -0.08 + 0.11j)),
    (-0.31 + 1.25j, (0.05 + 0.33j, 0.4 - 0.21j)),
    (0.5 + 0.8j, (-0.14 + 0.4j, 0.27 + 0.05j)),
)


def _suite_modularity(params: dict, tol: float | None, prec: Precision) -> VerificationReport:
    tol = 1e-6 if tol is None else float(tol)
    lat1 = lattice([[1]], "paper-L")
    dg1 = discriminant_group(lat1)

    def definite_vector(tau, z):
        return np.array(
            [theta_definite(lat1, elt, tau, (z[0],), prec) for elt in dg1.elements]
        )

    rep_def = check_modularity(
        definite_vector,
        SlashWeights(Fraction(1, 2), lat1),
        rep="weil",
        gens=[from_sl2(SL2_T, 1)],
        points=[(0.13 + 1.1j, (0.21 + 0.17j,)), (-0.4 + 0.77j, (0.05 + 0.3j,))],
        tol=min(tol, 1e-8),
    )

    spec = _MOCK_EVEN_SPEC

    def completed_vector(tau, z):
        _disc, values = theta_indef_components(spec, tau, z, prec)
        return values

    rep_indef = check_modularity(
        completed_vector,
        SlashWeights(1, _MOCK_EVEN),
        rep="weil",
        gens=[from_sl2(SL2_S, 2), from_sl2(SL2_T, 2)],
        points=_MODULARITY_POINTS,
        tol=tol,
    )

    rep_wrong = check_modularity(
        completed_vector,
        SlashWeights(2, _MOCK_EVEN),
        rep="weil",
        gens=[from_sl2(SL2_S, 2)],
        points=_MODULARITY_POINTS[:1],
        tol=tol,
    )

    checks = []
    for c in rep_def.checks:
        checks.append(_rename(c, f"definite rank-1 components: {c.name}"))
    for c in rep_indef.checks:
        checks.append(_rename(c, f"completed indefinite components: {c.name}"))
    worst = max(c.residual for c in rep_wrong.checks)
    checks.append(
        _control(
            "wrong weight breaks the transformation",
            {"weight": 2, "generator": "S"},
            worst,
            worst,
            100 * tol,
            "paper-printed formula",
        )
    )
    meta = {
        "tolerance": tol,
        "precision": {"digits": prec.digits, "eps": prec.eps},
        "weight": {"definite": Fraction(1, 2), "indefinite": 1},
        "components": {"definite": dg1.order, "indefinite": discriminant_group(_MOCK_EVEN).order},
    }
    return VerificationReport("modularity", tuple(checks), meta)


def _rename(c: CheckRecord, name: str) -> CheckRecord:
    return CheckRecord(
        name=name,
        inputs=c.inputs,
        expected=c.expected,
        observed=c.observed,
        residual=c.residual,
        tolerance=c.tolerance,
        oracle=c.oracle,
        passed=c.passed,
        certificates=c.certificates,
    )


# ---------------------------------------------------------------------------
# suite runner and aggregation


def run_suite(suite_id: str, params: dict | None = None, tol: float | None = None,
              prec: Precision = DEFAULT_PREC) -> VerificationReport:
    """Run one named suite (an identity id or ``"modularity"``)."""
    if suite_id == "modularity":
        return _suite_modularity(dict(params or {}), tol, prec)
    return check_identity(suite_id, params, tol, prec)


def run_all(prec: Precision = DEFAULT_PREC) -> list:
    """All built-in suites in a fixed order.

    The suites share no state and could run concurrently, but the
    arbitrary-precision backend keeps its working precision in module
    state, so they run sequentially; aggregation order is fixed either
    way.
    """
    return [run_suite(suite_id, prec=prec) for suite_id in SUITE_IDS]


def generate_report(reports: Sequence[VerificationReport]) -> dict:
    """Aggregate suite reports into the versioned document shape."""
    reports = list(reports)
    n_checks = sum(len(r.checks) for r in reports)
    n_failed = sum(len(r.failures) for r in reports)
    return {
        "schema": "verify/1",
        "passed": all(r.passed for r in reports),
        "counts": {"suites": len(reports), "checks": n_checks, "failed": n_failed},
        "suites": [r.to_dict() for r in reports],
    }


def report_json(document: dict) -> str:
    return dumps(document)


def render_text(document: dict) -> str:
    """Compact log: one line per suite, details for failing checks only."""
    lines = []
    for suite in document["suites"]:
        counts = suite["counts"]
        status = "PASS" if suite["passed"] else "FAIL"
        lines.append(f"{status} {suite['suite']} ({counts['checks']} checks)")
        for check in suite["checks"]:
            if not check["passed"]:
                lines.append(
                    f"  FAIL {check['name']}: residual {check['residual']:.3e}"
                    f" vs tolerance {check['tolerance']:.3e} [{check['oracle']}]"
                )
    counts = document["counts"]
    status = "PASS" if document["passed"] else "FAIL"
    lines.append(
        f"{status}: {counts['suites']} suites, {counts['checks']} checks,"
        f" {counts['failed']} failed"
    )
    return "\n".join(lines) + "\n"


def exit_code(document: dict) -> int:
    """0 when the document passes, 1 otherwise (2 is reserved for
    malformed requests, raised as ``ValueError`` before a document
    exists)."""
    return 0 if document.get("passed") else 1
