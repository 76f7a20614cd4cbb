"""Special functions: incomplete gammas, the normalized error integral,
weight functions for nonholomorphic Fourier expansions, Jacobi theta,
Dedekind eta, Weierstrass zeta, and the nonholomorphic Eichler-type
completion series R.

Scalar transcendental functions honor a :class:`Precision` request: with
``digits > 16`` they evaluate through mpmath at that working precision and
return the rounded double, otherwise they use scipy/math directly.  Series
evaluators work in double precision and attach truncation certificates;
they refuse target tolerances below the double-precision floor instead of
pretending to meet them.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
import numpy as np
from scipy import special as sp

from .certs import TruncationCertificate

__all__ = [
    "Precision",
    "DEFAULT_PREC",
    "HeisData",
    "incomplete_gamma",
    "erf_E",
    "H_weight",
    "H_heis",
    "discriminant_poly",
    "jacobi_theta_odd",
    "theta_definite",
    "dedekind_eta",
    "weierstrass_zeta",
    "R_completion",
]

_SERIES_EPS_FLOOR = 1e-14


@dataclass(frozen=True)
class Precision:
    """Working precision (decimal digits) and target absolute error."""

    digits: int = 24
    eps: float = 1e-12

    def __post_init__(self):
        if not (0 < self.eps <= 1e-3):
            raise ValueError("eps must lie in (0, 1e-3]")
        if self.digits < 2 * (-math.log10(self.eps)):
            raise ValueError("working digits must be at least 2*(-log10 eps)")

    @property
    def use_mp(self) -> bool:
        return self.digits > 16

    def series_eps(self) -> float:
        if self.eps < _SERIES_EPS_FLOOR:
            raise ValueError(
                f"series evaluation cannot certify eps={self.eps:g} in double precision"
            )
        return self.eps


DEFAULT_PREC = Precision()


def _as_float(x) -> float:
    if isinstance(x, Fraction):
        return float(x)
    return float(x)


# ---------------------------------------------------------------------------
# incomplete gamma


def _upper_gamma_float(s: float, x: float) -> float:
    """Upper incomplete gamma for real s (any sign), x > 0, in doubles.

    Nonpositive ``s`` uses the downward recurrence
    ``Gamma(s, x) = (Gamma(s+1, x) - x^s e^{-x}) / s`` anchored at
    ``Gamma(s0, x)`` with ``s0 in (0, 1]`` (or at ``E_1`` when the descent
    passes through an integer).
    """
    if s > 0:
        return float(sp.gammaincc(s, x) * sp.gamma(s))
    if s == 0:
        return float(sp.exp1(x))
    steps = math.ceil(-s)
    s0 = s + steps
    if s0 == 0:
        val = float(sp.exp1(x))
    else:
        val = float(sp.gammaincc(s0, x) * sp.gamma(s0))
    for j in range(steps):
        sj = s0 - 1 - j
        val = (val - x ** sj * math.exp(-x)) / sj
    return val


def incomplete_gamma(s, x, kind: str = "upper", prec: Precision = DEFAULT_PREC) -> float:
    """``Gamma(s, x)`` (upper) or ``gamma(s, x)`` (lower), real arguments.

    The lower function requires ``s > 0``; the upper one accepts any real
    ``s`` for ``x > 0`` via the standard recurrence / analytic continuation.
    """
    s = _as_float(s)
    x = _as_float(x)
    if kind not in ("upper", "lower"):
        raise ValueError("kind must be 'upper' or 'lower'")
    if kind == "lower":
        if s <= 0:
            raise ValueError("lower incomplete gamma requires s > 0")
        if x < 0:
            raise ValueError("lower incomplete gamma requires x >= 0")
        if prec.use_mp:
            with mp.workdps(prec.digits):
                return float(mp.gammainc(s, 0, x))
        return float(sp.gammainc(s, x) * sp.gamma(s))
    if x <= 0:
        raise ValueError("upper incomplete gamma requires x > 0 for general s")
    if prec.use_mp:
        with mp.workdps(prec.digits):
            return float(mp.gammainc(s, x, mp.inf))
    return _upper_gamma_float(s, x)


# ---------------------------------------------------------------------------
# the normalized error integral E and the weight functions H


def erf_E(x, prec: Precision = DEFAULT_PREC) -> float:
    """``E(x) = 2 int_0^x exp(-pi u^2) du = erf(sqrt(pi) x)``.

    Satisfies ``E(x) = sgn(x) * gamma(1/2, pi x^2) / sqrt(pi)`` and
    ``E(x) -> sgn(x)`` as ``|x| -> infinity``.
    """
    x = _as_float(x)
    if prec.use_mp:
        with mp.workdps(prec.digits):
            return float(mp.erf(mp.sqrt(mp.pi) * x))
    return math.erf(math.sqrt(math.pi) * x)


def H_weight(y, D, k, N, absdet, prec: Precision = DEFAULT_PREC, form: str = "spec") -> float:
    """Weight function of the nonholomorphic Fourier coefficients.

    For discriminant ``D = 0`` this is ``y^(-k + N/2)``.  For ``D < 0`` two
    readings are provided:

    ``form="spec"``
        ``exp(-Y) * Gamma(1 - k - N/2, -2Y)`` with ``Y = pi D y / (2 absdet)``,
        the direct substitution into the defining integral as printed;
    ``form="harmonic"``
        ``Gamma(1 - k + N/2, -2Y)``, the classical decaying solution of the
        weight-``(k - N/2)`` harmonic equation
        ``Delta_{k-N/2}[a(y) e(n' tau)] = 0`` with ``n' = D/(4 absdet)``.

    The two disagree; the identity suites use the harmonic form (the spec
    reading does not satisfy the differential equation the coefficients are
    required to satisfy).  ``D > 0`` is rejected.
    """
    y = _as_float(y)
    D = _as_float(D)
    absdet = _as_float(absdet)
    if y <= 0:
        raise ValueError("y must be positive")
    if absdet <= 0:
        raise ValueError("absdet must be positive")
    if D > 0:
        raise ValueError("weight function is defined for D <= 0 only")
    if form not in ("spec", "harmonic"):
        raise ValueError("form must be 'spec' or 'harmonic'")
    if D == 0:
        return y ** (-k + N / 2.0)
    Y = math.pi * D * y / (2.0 * absdet)
    if form == "spec":
        return math.exp(-Y) * incomplete_gamma(1 - k - N / 2.0, -2.0 * Y, "upper", prec)
    return incomplete_gamma(1 - k + N / 2.0, -2.0 * Y, "upper", prec)


@dataclass(frozen=True)
class HeisData:
    """Arguments of the Heisenberg-direction weight function.

    ``l_e`` is the (negative) norm of the distinguished direction, ``y`` the
    imaginary part of tau, ``v`` the relevant imaginary part of the elliptic
    variable and ``r`` the Fourier index.
    """

    l_e: float
    y: float
    v: float
    r: float

    def __post_init__(self):
        if _as_float(self.l_e) >= 0:
            raise ValueError("l_e must be negative")
        if _as_float(self.y) <= 0:
            raise ValueError("y must be positive")


def H_heis(data: HeisData, prec: Precision = DEFAULT_PREC) -> float:
    """``sgn(r + 2 l_e v / y) * gamma(1/2, (-pi y / l_e) (r + 2 l_e v / y)^2)``.

    With ``l_e = -1/2`` this reduces to ``sqrt(pi) * E((r - v/y) sqrt(2y))``.
    ``sgn(0) = 0``.
    """
    l_e = _as_float(data.l_e)
    y = _as_float(data.y)
    arg = _as_float(data.r) + 2.0 * l_e * _as_float(data.v) / y
    if arg == 0.0:
        return 0.0
    s = 1.0 if arg > 0 else -1.0
    return s * incomplete_gamma(0.5, (-math.pi * y / l_e) * arg * arg, "lower", prec)


def discriminant_poly(lat, n, r) -> Fraction:
    """``D(n, r) = |det| * (4 n - G_nd^{-1}[r])`` on the nondegenerate part.

    ``r`` is a vector of Fourier indices (coefficients of the B-pairing);
    exact rational output.  ``|det|`` is the determinant of the canonical
    even Gram matrix of the nondegenerate part, with sign.
    """
    from .lattice import as_vector, kernel_basis, mat_det, mat_inv, mat_vec, dot

    g = lat.gram
    if kernel_basis(g):
        raise NotImplementedError("degenerate indices: restrict to the nondegenerate part first")
    det = mat_det(g)
    ginv = mat_inv(g)
    rv = as_vector(r)
    quad = dot(rv, mat_vec(ginv, rv))  # G^{-1}[r]
    return det * (4 * Fraction(n) - quad)


# ---------------------------------------------------------------------------
# series: Jacobi theta, definite theta, eta, Weierstrass zeta, R


def _check_tau(tau: complex) -> tuple[complex, float]:
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half plane")
    return tau, tau.imag


def jacobi_theta_odd(tau, z, prec: Precision = DEFAULT_PREC, with_certificate: bool = False):
    """Odd Jacobi theta ``sum_{r in Z+1/2} (-1)^(r+1/2) q^(r^2/2) zeta^r``.

    Vanishes exactly on ``z in Z + tau Z``; odd in ``z``.
    """
    tau, y = _check_tau(tau)
    z = complex(z)
    eps = prec.series_eps()
    v = z.imag
    # |term| = exp(-pi y r^2 - 2 pi r v); solve for the radius
    shift = abs(v) / y
    rmax = shift + math.sqrt(max(0.0, -math.log(eps * 0.01) / (math.pi * y))) + 2.0
    total = 0j
    nmax = int(math.ceil(rmax + 0.5))
    terms = 0
    for m in range(-nmax, nmax):
        r = m + 0.5
        term = (-1) ** (m + 1) * cmath.exp(2j * cmath.pi * (tau * r * r / 2.0 + r * z))
        total += term
        terms += 1
    # tail bound: geometric with ratio exp(-pi y (2 rmax))
    edge = math.exp(-math.pi * y * (nmax - 0.5) ** 2 + 2 * math.pi * (nmax - 0.5) * abs(v))
    ratio = math.exp(-math.pi * y * (2 * nmax) + 2 * math.pi * abs(v))
    bound = 2 * edge * (ratio / (1 - ratio) if ratio < 1 else 1.0)
    cert = TruncationCertificate(bound=min(bound, edge * 10), radius=nmax, terms=terms, note="odd-theta")
    return (total, cert) if with_certificate else total


def theta_definite(lat, shift, tau, z, prec: Precision = DEFAULT_PREC, with_certificate: bool = False):
    """Theta series of a positive definite even lattice with rational shift.

    ``sum_{nu in Z^n + shift} e(Q(nu) tau + B(nu, z))`` with ``z`` a complex
    vector.  Summation proceeds over growing sup-norm shells and stops when
    two consecutive shells contribute below eps/10.
    """
    from .lattice import DiscElement

    tau, y = _check_tau(tau)
    eps = prec.series_eps()
    n_plus, n_minus, n_zero = lat.signature
    if n_minus or n_zero:
        raise ValueError("theta_definite requires a positive definite lattice")
    n = lat.rank
    if isinstance(shift, DiscElement):
        shift = shift.vec
    shift_f = np.array([float(Fraction(s)) for s in shift], dtype=float)
    zv = np.atleast_1d(np.asarray(z, dtype=complex))
    if zv.shape != (n,):
        raise ValueError(f"z must have {n} components")
    g = lat.gram_float()
    total = 0j
    terms = 0
    small = 0
    shell_prev = math.inf
    radius = 0
    max_radius = 80
    bound_tail = 0.0
    for radius in range(0, max_radius + 1):
        shell_abs = 0.0
        for nu0 in _shell(n, radius):
            nu = np.array(nu0, dtype=float) + shift_f
            qn = 0.5 * nu @ g @ nu
            bn = nu @ g @ zv
            term = cmath.exp(2j * cmath.pi * (qn * tau + bn))
            total += term
            shell_abs += abs(term)
            terms += 1
        if radius >= 2 and shell_abs < eps / 10.0:
            small += 1
            if small >= 2:
                ratio = min(0.95, shell_abs / shell_prev if shell_prev > 0 else 0.5)
                bound_tail = 100.0 * shell_abs * ratio / (1.0 - ratio) if shell_abs else 0.0
                break
        else:
            small = 0
        shell_prev = shell_abs if shell_abs > 0 else shell_prev
    else:
        raise RuntimeError("theta_definite did not converge within the radius budget")
    cert = TruncationCertificate(bound=max(bound_tail, eps / 10), radius=radius, terms=terms, note="definite-theta")
    return (total, cert) if with_certificate else total


def _shell(n: int, radius: int):
    """Integer points with sup-norm exactly ``radius``."""
    if radius == 0:
        yield (0,) * n
        return
    rng = range(-radius, radius + 1)
    import itertools

    for pt in itertools.product(rng, repeat=n):
        if max(abs(c) for c in pt) == radius:
            yield pt


def dedekind_eta(tau, prec: Precision = DEFAULT_PREC, with_certificate: bool = False):
    """``q^(1/24) prod_{n>=1} (1 - q^n)``."""
    tau, y = _check_tau(tau)
    eps = prec.series_eps()
    q = cmath.exp(2j * cmath.pi * tau)
    aq = abs(q)
    out = cmath.exp(2j * cmath.pi * tau / 24.0)
    n = 0
    qn = 1.0 + 0j
    while True:
        n += 1
        qn *= q
        out *= 1.0 - qn
        if abs(qn) < eps * (1.0 - aq) / 10.0:
            break
        if n > 10000:
            raise RuntimeError("eta product did not converge (tau too close to the real axis?)")
    tail = abs(qn) * aq / (1.0 - aq)
    bound = abs(out) * (math.exp(tail / (1.0 - aq)) - 1.0) if tail < 1 else abs(out)
    cert = TruncationCertificate(bound=bound, radius=n, terms=n, note="eta-product")
    return (out, cert) if with_certificate else out


def _cot(w: complex) -> complex:
    """Cotangent, numerically stable in both half planes."""
    if w.imag > 0:
        t = cmath.exp(2j * w)
        return -1j * (1 + t) / (1 - t)
    t = cmath.exp(-2j * w)
    return 1j * (1 + t) / (1 - t)


def _lattice_reduce(tau: complex, u: complex) -> tuple[complex, int, int]:
    """Write ``u = u0 + m tau + k`` with coefficients (m, k) rounded to put
    ``u0`` in the centred fundamental parallelogram."""
    y = tau.imag
    m = round(u.imag / y)
    u1 = u - m * tau
    k = round(u1.real)
    return u1 - k, m, k


def weierstrass_zeta(tau, u, prec: Precision = DEFAULT_PREC, with_certificate: bool = False):
    """Weierstrass zeta of the lattice ``Z + tau Z``.

    The Eisenstein-corrected lattice sum is evaluated with the inner
    (horizontal) direction resummed in closed form:

        zeta(u) = pi cot(pi u) + (pi^2/3) u
                  + sum_{n>=1} [ pi cot(pi(u - n tau)) + pi cot(pi(u + n tau))
                                 + 2 u pi^2 / sin^2(pi n tau) ]

    which converges geometrically (rate ``exp(-2 pi Im tau)``) and involves
    no theta normalizations.  Quasi-periodicity ``zeta(u + 1) - zeta(u)`` and
    ``zeta(u + tau) - zeta(u)`` fall out as exact constants (tested, not
    assumed).
    """
    tau, y = _check_tau(tau)
    u = complex(u)
    eps = prec.series_eps()
    u0, m, k = _lattice_reduce(tau, u)
    if abs(u0) < 1e-13:
        raise ZeroDivisionError("u lies on the period lattice (pole of zeta)")

    def core(w: complex) -> complex:
        total = math.pi * _cot(math.pi * w) + (math.pi ** 2 / 3.0) * w
        n = 0
        while True:
            n += 1
            s = cmath.sin(math.pi * n * tau)
            t = (
                math.pi * _cot(math.pi * (w - n * tau))
                + math.pi * _cot(math.pi * (w + n * tau))
                + 2.0 * w * math.pi ** 2 / (s * s)
            )
            total += t
            if n * y > abs(w.imag) + 1 and abs(t) < eps / 100.0:
                break
            if n > 2000:
                raise RuntimeError("zeta series did not converge")
        return total

    val0 = core(u0)
    if m == 0 and k == 0:
        val = val0
    else:
        eta1 = 2.0 * core(0.5)
        eta2 = 2.0 * core(tau / 2.0)
        val = val0 + m * eta2 + k * eta1
    cert = TruncationCertificate(bound=eps / 10, radius=0, terms=0, note="wzeta-cotangent")
    return (val, cert) if with_certificate else val


def R_completion(tau, z, prec: Precision = DEFAULT_PREC, with_certificate: bool = False):
    """Nonholomorphic completion series

        R(tau, z) = sum_{r in Z+1/2} [sgn(r) - (1/sqrt(pi)) H_heis(-1/2; y, v, r)]
                    * (-1)^(r+1/2) q^(-r^2/2) zeta^r,

    the convergent reading of the completion weight (the growing Gaussian
    ``q^(-r^2/2)`` is beaten by the complementary-error decay of the
    bracket).  Weights are evaluated through ``erfc`` for stability.
    """
    tau, y = _check_tau(tau)
    z = complex(z)
    eps = prec.series_eps()
    v = z.imag
    a = v / y
    sqy = math.sqrt(2.0 * y)
    rmax = abs(a) + math.sqrt(max(0.0, -math.log(eps * 1e-3) / (math.pi * y))) + 3.0
    nmax = int(math.ceil(rmax + 0.5))
    total = 0j
    terms = 0
    for mi in range(-nmax, nmax):
        r = mi + 0.5
        A = r - a
        sr = 1.0 if r > 0 else -1.0
        sA = 0.0 if A == 0 else (1.0 if A > 0 else -1.0)
        # sgn(r) - erf(sqrt(pi) * A * sqrt(2y)) stabilised:
        # equal signs -> sgn * erfc(|A| sqrt(2 pi y)); opposite -> bounded by 2
        x = abs(A) * sqy * math.sqrt(math.pi)
        if sA == 0.0:
            w = sr
        elif sr == sA:
            w = sr * math.erfc(x)
        else:
            w = sr - sA * (1.0 - math.erfc(x))
        if w == 0.0:
            continue
        term = w * (-1) ** (mi + 1) * cmath.exp(2j * cmath.pi * (-tau * r * r / 2.0 + r * z))
        total += term
        terms += 1
    edgeA = (nmax - 0.5) - abs(a)
    bound = 4.0 * math.exp(-math.pi * y * edgeA * edgeA - math.pi * v * v / y) if edgeA > 0 else 4.0
    cert = TruncationCertificate(bound=bound, radius=nmax, terms=terms, note="R-series")
    return (total, cert) if with_certificate else total
