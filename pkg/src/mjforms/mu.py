"""Appell--Lerch sums and their real-analytic completions.

Layers, from classical to lattice-indexed:

- ``mu_two_var``: the two-variable kernel ``mu(tau, u, v)`` (one modular,
  two elliptic variables) together with its nonholomorphic completion
  through :func:`~mjforms.specfun.R_completion`.  The completed function
  is symmetric in ``u, v`` and transforms elliptically with the usual
  index-``1/2``-type factors.
- ``mu_m_eval``: a ``2m``-fold Appell-type sum with two auxiliary
  elliptic arguments; the building block of the component functions.
- ``mu_hat_ml``: completed component functions indexed by an integer
  residue ``l`` modulo ``2m``; periodic in ``l`` with period ``2m``.
- ``mu_hat_Ll``: products of definite theta components (positive slots)
  and completed components (negative slots) attached to an integral
  change of basis that diagonalizes an indefinite form along a frame,
  summed over the finite coset group of the diagonalized sublattice.
- ``splitting_residual``: the completed two-variable kernel minus its
  explicit meromorphic part (a ratio of Weierstrass zeta values and an
  odd theta); the difference depends on ``u, v`` only through ``u - v``.

Poles: every entry point rejects arguments that lie within
``10 * sqrt(eps)`` of the pole divisor ``Z + tau Z`` (in the flat metric
of the z-plane) and raises ``ZeroDivisionError`` naming the offending
variable, since evaluation closer than that loses about half of the
working digits.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .certs import TruncationCertificate
from .lattice import (
    Frame,
    Lattice,
    DiscElement,
    Matrix,
    as_matrix,
    as_vector,
    coset_representatives,
    mat_det,
    mat_inv,
    mat_vec,
)
from .specfun import (
    DEFAULT_PREC,
    Precision,
    R_completion,
    _check_tau,
    jacobi_theta_odd,
    theta_definite,
)

TWO_PI_I = 2j * math.pi


def _divisor_distance(tau: complex, w: complex) -> float:
    """Approximate distance from ``w`` to the lattice ``Z + tau Z``."""
    y = tau.imag
    a = w.imag / y
    b = w.real - a * tau.real
    da = a - round(a)
    db = b - round(b)
    return abs(da * tau + db)


def _require_off_divisor(tau: complex, w: complex, name: str, eps: float) -> None:
    if _divisor_distance(tau, w) < 10.0 * math.sqrt(eps):
        raise ZeroDivisionError(f"{name} lies on (or too close to) the divisor Z + tau*Z")


def _geometric_tail(last: float, ratio: float) -> float:
    ratio = min(ratio, 0.95)
    return last * ratio / (1.0 - ratio)


# ---------------------------------------------------------------------------
# Two-variable kernel


def mu_two_var(
    tau,
    u,
    v,
    prec: Precision = DEFAULT_PREC,
    with_certificate: bool = False,
    completed: bool = True,
):
    """Two-variable Appell--Lerch kernel, completed by default.

    The meromorphic part is

        e(u/2) / theta(tau, v) * sum_{n in Z} (-1)^n q^((n^2+n)/2) e(n v)
                                              / (1 - e(u) q^n),

    and the completion subtracts ``(1/2) * R_completion(tau, u - v)``.  The
    real coefficient is forced by the elliptic transformation law

        muhat(u + tau, v) = -q^(1/2) e(u - v) muhat(u, v),

    which holds exactly for the completed function (the meromorphic part
    alone picks up the additive defect ``-e(w/2) q^(3/8)``, and the
    completion weight contributes exactly twice that).  Simple poles sit on
    ``u in Z + tau Z`` and ``v in Z + tau Z``; both are rejected, as is
    ``u - v`` on the divisor (where the splitting denominators of
    :func:`splitting_residual` degenerate).
    """
    tau, y = _check_tau(tau)
    u = complex(u)
    v = complex(v)
    eps = prec.series_eps()
    _require_off_divisor(tau, u, "u", eps)
    _require_off_divisor(tau, v, "v", eps)
    _require_off_divisor(tau, u - v, "u - v", eps)

    w_u = cmath.exp(TWO_PI_I * u)
    lc = -math.log(eps * 1e-3)
    shift = (abs(u.imag) + abs(v.imag) + y) / y
    nmax = int(math.ceil(shift + math.sqrt(shift * shift + lc / (math.pi * y)))) + 3
    total = 0j
    last = 0.0
    for n in range(-nmax, nmax + 1):
        # numerator exponent (n^2+n)/2 * tau + n v; denominator 1 - e(u) q^n
        t_im = u.imag + n * y
        if t_im >= 0.0:
            den = 1.0 - w_u * cmath.exp(TWO_PI_I * tau * n)
            term = cmath.exp(TWO_PI_I * (tau * (n * n + n) / 2.0 + n * v)) / den
        else:
            # |e(u) q^n| > 1: expand in the reciprocal to keep magnitudes <= 1
            winv = cmath.exp(-TWO_PI_I * (u + n * tau))
            den = 1.0 - winv
            term = -cmath.exp(TWO_PI_I * (tau * (n * n - n) / 2.0 + n * v - u)) / den
        if n % 2:
            term = -term
        total += term
        if abs(n) == nmax:
            last = max(last, abs(term))
    theta_v, cert_th = jacobi_theta_odd(tau, v, prec, with_certificate=True)
    pref = cmath.exp(1j * math.pi * u) / theta_v
    value = pref * total
    bound = abs(pref) * _geometric_tail(last, math.exp(-math.pi * y)) + abs(value) * cert_th.bound
    terms = 2 * nmax + 1
    if completed:
        r_val, cert_r = R_completion(tau, u - v, prec, with_certificate=True)
        value = value - 0.5 * r_val
        bound += 0.5 * cert_r.bound
        terms += cert_r.terms
    cert = TruncationCertificate(bound=bound, radius=nmax, terms=terms, note="mu-two-var")
    return (value, cert) if with_certificate else value


# ---------------------------------------------------------------------------
# 2m-fold Appell-type sum


def _sum_square_counts(dim: int, radius: int) -> np.ndarray:
    """counts[s + dim*radius, t] of ``n in Z^dim`` with sup-norm <= radius,
    coordinate sum ``s`` and coordinate square-sum ``t``."""
    smax = dim * radius
    tmax = dim * radius * radius
    counts = np.zeros((2 * smax + 1, tmax + 1))
    counts[smax, 0] = 1.0
    for _ in range(dim):
        nxt = np.zeros_like(counts)
        for k in range(-radius, radius + 1):
            ksq = k * k
            if k >= 0:
                nxt[k or None :, ksq:] += counts[: counts.shape[0] - k, : tmax + 1 - ksq]
            else:
                nxt[:k, ksq:] += counts[-k:, : tmax + 1 - ksq]
        counts = nxt
    return counts


def _mu_m_core(m: int, tau: complex, z1: complex, z2: complex, radius: int) -> complex:
    dim = 2 * m
    smax = dim * radius
    counts = _sum_square_counts(dim, radius)
    tmax = counts.shape[1] - 1
    qt = np.exp(1j * math.pi * complex(tau) * np.arange(tmax + 1))  # q^(t/2)
    y = tau.imag
    total = 0j
    for row, s in enumerate(range(-smax, smax + 1)):
        col = counts[row]
        if not col.any():
            continue
        base = complex(col @ qt)
        if base == 0j:
            continue
        t_im = z1.imag + s * y
        if t_im >= 0.0:
            den = 1.0 - cmath.exp(TWO_PI_I * (z1 + s * tau))
            factor = cmath.exp(TWO_PI_I * (tau * s / 2.0 + z2 * s)) / den
        else:
            den = 1.0 - cmath.exp(-TWO_PI_I * (z1 + s * tau))
            factor = -cmath.exp(TWO_PI_I * (-tau * s / 2.0 + z2 * s - z1)) / den
        term = base * factor
        if s % 2:
            term = -term
        total += term
    return total


def mu_m_eval(
    m: int,
    tau,
    z1,
    z2,
    prec: Precision = DEFAULT_PREC,
    with_certificate: bool = False,
):
    """``2m``-fold Appell-type sum

        e(z1/2) / theta(tau, z2)^(2m)
        * sum_{n in Z^(2m)} (-1)^|n| q^(||n||^2/2 + |n|/2) e(z2 |n|)
                            / (1 - e(z1) q^|n|),

    with ``|n|`` the coordinate sum and ``||n||^2`` the square sum.  The sum
    is grouped by ``|n|`` through exact (sum, square-sum) lattice counts, and
    the sup-norm cutoff grows until doubling it moves the value by less than
    the series tolerance.
    """
    if not (isinstance(m, int) and m >= 1):
        raise ValueError("m must be a positive integer")
    tau, y = _check_tau(tau)
    z1 = complex(z1)
    z2 = complex(z2)
    eps = prec.series_eps()
    _require_off_divisor(tau, z1, "z1", eps)
    _require_off_divisor(tau, z2, "z2", eps)

    shift = (abs(z1.imag) + 2 * m * abs(z2.imag) + y) / y
    radius = max(4, int(math.ceil(1.5 + shift / (2 * m) + math.sqrt(-math.log(eps * 1e-3) / (math.pi * y)))))
    value_core = _mu_m_core(m, tau, z1, z2, radius)
    bound_core = math.inf
    for _ in range(12):
        bigger = _mu_m_core(m, tau, z1, z2, radius + 2)
        bound_core = abs(bigger - value_core)
        value_core = bigger
        radius += 2
        if bound_core <= eps * max(1.0, abs(value_core)) / 10.0:
            break
    else:
        raise RuntimeError("Appell-type sum did not stabilise within the radius budget")
    theta_z2, cert_th = jacobi_theta_odd(tau, z2, prec, with_certificate=True)
    pref = cmath.exp(1j * math.pi * z1) / theta_z2 ** (2 * m)
    value = pref * value_core
    bound = abs(pref) * 10.0 * bound_core + 2 * m * abs(value) * cert_th.bound
    cert = TruncationCertificate(
        bound=bound, radius=radius, terms=(2 * radius + 1) ** (2 * m), note="appell-2m"
    )
    return (value, cert) if with_certificate else value


# ---------------------------------------------------------------------------
# Completed component functions


def mu_hat_ml(
    m: int,
    l: int,
    tau,
    z,
    prec: Precision = DEFAULT_PREC,
    with_certificate: bool = False,
    reduce: bool = True,
):
    """Completed component function of index ``m`` and residue ``l`` mod 2m:

        (-1)^m / sqrt(m) * q^(-(l+m)^2/4m) zeta^(-(l+m))
        * ( mu_m(tau, 2mz + (l+m)tau + 1/2, 1/(4m))
            + (i/2) R_completion(2m tau, 2mz + (l+m)tau - 1/2) ).

    The completion coefficient and its half-integer argument shift are pinned
    by the invariance of the component under ``z -> z + lam tau`` for integer
    ``lam`` (with the index ``-m`` elliptic factor); since the completion
    series flips sign under ``z -> z - 1``, this is the same as an
    ``m``-alternating coefficient at the argument shift ``-(2m+1)/2``.
    Periodic in ``l`` with period ``2m``; invariant under ``z -> z + 1``.

    The two constituents grow like ``exp(2 pi Im(2mz + (l+m)tau)^2 / ...)``
    while their completed combination stays moderate, so evaluating far from
    ``Im(2mz + (l+m)tau) = 0`` cancels catastrophically in double precision.
    By default the argument is first reduced by the invariance itself
    (``reduce=True``), which keeps the evaluation well-conditioned for every
    ``z``; pass ``reduce=False`` to evaluate the raw formula (used by the
    invariance checks, which would otherwise be tautological).
    """
    if not (isinstance(m, int) and m >= 1):
        raise ValueError("m must be a positive integer")
    if not isinstance(l, int):
        raise ValueError("l must be an integer")
    tau, y = _check_tau(tau)
    z = complex(z)
    if reduce:
        lam = -round((2 * m * z.imag / y + (l + m)) / (2 * m))
        if lam:
            inner, cert = mu_hat_ml(m, l, tau, z + lam * tau, prec, with_certificate=True, reduce=False)
            factor = cmath.exp(TWO_PI_I * (-m * lam * lam * tau - 2 * m * lam * z))
            value = factor * inner
            cert = TruncationCertificate(
                bound=abs(factor) * cert.bound, radius=cert.radius, terms=cert.terms, note=cert.note
            )
            return (value, cert) if with_certificate else value
    shifted = 2 * m * z + (l + m) * tau
    z1 = shifted + 0.5
    mu_val, cert_mu = mu_m_eval(m, tau, z1, 1.0 / (4 * m), prec, with_certificate=True)
    r_val, cert_r = R_completion(2 * m * tau, shifted - 0.5, prec, with_certificate=True)
    pref = ((-1) ** m / math.sqrt(m)) * cmath.exp(
        TWO_PI_I * (-((l + m) ** 2) / (4.0 * m) * tau - (l + m) * z)
    )
    value = pref * (mu_val + 0.5j * r_val)
    bound = abs(pref) * (cert_mu.bound + 0.5 * cert_r.bound)
    cert = TruncationCertificate(
        bound=bound,
        radius=max(cert_mu.radius, cert_r.radius),
        terms=cert_mu.terms + cert_r.terms,
        note="mu-hat-component",
    )
    return (value, cert) if with_certificate else value


def theta_index_component(
    m: int,
    j: int,
    tau,
    z,
    prec: Precision = DEFAULT_PREC,
    with_certificate: bool = False,
):
    """Classical definite theta component ``sum_{r = j mod 2m} q^(r^2/4m) e(r z)``."""
    if not (isinstance(m, int) and m >= 1):
        raise ValueError("m must be a positive integer")
    lat = Lattice(as_matrix([[2 * m]]), mode="gram")
    return theta_definite(lat, (Fraction(j, 2 * m),), tau, (complex(z),), prec, with_certificate)


# ---------------------------------------------------------------------------
# Lattice-indexed products


def _primitive(vec) -> tuple[int, ...]:
    fracs = [Fraction(x) for x in vec]
    den = math.lcm(*(f.denominator for f in fracs))
    ints = [int(f * den) for f in fracs]
    g = math.gcd(*(abs(i) for i in ints))
    return tuple(i // g for i in ints)


@dataclass(frozen=True)
class MuLatticeData:
    """Frozen evaluation data for the lattice-indexed products.

    ``A``'s columns are integral multiples of the frame vectors, ordered like
    the frame, so that ``A^T G A`` is diagonal with even entries whose signs
    match the frame signs.  ``cosets`` enumerates ``Z^N / A Z^N``.
    """

    lattice: Lattice
    frame: Frame
    A: Matrix
    diag: tuple[int, ...]
    cosets: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return self.lattice.rank


def mu_lattice_data(lat: Lattice, frm: Frame, A=None) -> MuLatticeData:
    """Validate (or construct) a diagonalizing matrix and freeze coset data.

    When ``A`` is omitted, the column for each frame vector is its primitive
    integral multiple, which minimizes ``|det A|`` among integral matrices
    whose columns are parallel to the frame.
    """
    n = lat.rank
    if frm.zero:
        raise ValueError("the frame must not contain isotropic vectors")
    if len(frm) != n:
        raise ValueError("the frame must span the full space")
    if A is None:
        cols = [_primitive(v) for v in frm.vectors]
    else:
        A = as_matrix(A)
        if any(x.denominator != 1 for row in A for x in row):
            raise ValueError("A must be an integer matrix")
        cols = [tuple(A[i][k] for i in range(n)) for k in range(n)]
        for k, col in enumerate(cols):
            fv = frm.vectors[k]
            # parallel test: col x fv has rank 1
            ratios = {Fraction(int(c), 1) / f for c, f in zip(col, fv) if f != 0}
            if len(ratios) != 1 or any(f == 0 and c != 0 for c, f in zip(col, fv)):
                raise ValueError(f"column {k} of A is not parallel to frame vector {k}")
    a_rows = as_matrix([[Fraction(cols[k][i]) for k in range(n)] for i in range(n)])
    if mat_det(a_rows) == 0:
        raise ValueError("A is singular")
    diag = []
    for kk in range(n):
        for jj in range(kk + 1, n):
            if lat.b(cols[kk], cols[jj]) != 0:
                raise ValueError("A^T G A is not diagonal")
        two_q = lat.b(cols[kk], cols[kk])
        if two_q.denominator != 1 or int(two_q) % 2:
            raise ValueError("diagonal entries of A^T G A must be even integers")
        if two_q == 0:
            raise ValueError("isotropic column in A")
        diag.append(int(two_q))
    cosets = tuple(coset_representatives([[int(a_rows[i][k]) for k in range(n)] for i in range(n)]))
    if len(cosets) != abs(int(mat_det(a_rows))):
        raise AssertionError("coset count does not match |det A|")
    return MuLatticeData(lat, frm, a_rows, tuple(diag), cosets)


def mu_hat_Ll(
    data: MuLatticeData,
    l: DiscElement,
    tau,
    z,
    prec: Precision = DEFAULT_PREC,
    with_certificate: bool = False,
):
    """Coset sum of theta/completed-component products in diagonal coordinates.

    For each coset representative ``lam`` the vector ``c = A^(-1)(l + lam)``
    is exactly rational with ``diag[k] * c_k`` integral; slot ``k`` contributes
    a definite theta component when ``diag[k] > 0`` and a completed component
    function when ``diag[k] < 0``, both evaluated at ``(A^(-1) z)_k``.
    """
    tau, _y = _check_tau(tau)
    n = data.rank
    zv = np.atleast_1d(np.asarray(z, dtype=complex))
    if zv.shape != (n,):
        raise ValueError(f"z must have {n} components")
    ainv = mat_inv(data.A)
    ainv_f = np.array([[float(x) for x in row] for row in ainv])
    zcoord = ainv_f @ zv
    lvec = as_vector(l.vec if isinstance(l, DiscElement) else l)
    total = 0j
    bound = 0.0
    for lam in data.cosets:
        w = tuple(a + b for a, b in zip(lvec, lam))
        c = mat_vec(ainv, w)
        factors = []
        fbounds = []
        for k in range(n):
            g_k = data.diag[k]
            j_k = c[k] * g_k
            if j_k.denominator != 1:
                raise AssertionError("coset component is not in the dual of the diagonal block")
            if g_k > 0:
                m_k = g_k // 2
                val, cert = theta_index_component(
                    m_k, int(j_k) % g_k, tau, zcoord[k], prec, with_certificate=True
                )
            else:
                m_k = -g_k // 2
                l_k = int(-g_k * c[k]) % (-g_k)
                val, cert = mu_hat_ml(m_k, l_k, tau, zcoord[k], prec, with_certificate=True)
            factors.append(val)
            fbounds.append(cert.bound)
        term = 1 + 0j
        for f in factors:
            term *= f
        term_bound = sum(
            b * math.prod(abs(f) for i2, f in enumerate(factors) if i2 != i1)
            for i1, b in enumerate(fbounds)
        )
        total += term
        bound += term_bound
    cert = TruncationCertificate(bound=bound, radius=0, terms=len(data.cosets), note="mu-hat-lattice")
    return (total, cert) if with_certificate else total


# ---------------------------------------------------------------------------
# Splitting residual


def splitting_residual(
    tau,
    u,
    v,
    prec: Precision = DEFAULT_PREC,
    with_certificate: bool = False,
):
    """Completed two-variable kernel minus its explicit meromorphic part:

        mu_two_var(tau, u, v)
        - (zeta_W(u) - zeta_W(v) + zeta_W(u - v)) / (2 pi i * theta(tau, u - v)),

    with ``zeta_W`` the Weierstrass zeta for ``Z + tau Z``.  The ``2 pi i``
    matches the residues of both terms along ``u in Z + tau Z``.  The result
    depends on ``(u, v)`` only through ``u - v``.
    """
    from .specfun import weierstrass_zeta

    tau, _y = _check_tau(tau)
    u = complex(u)
    v = complex(v)
    mu_val, cert_mu = mu_two_var(tau, u, v, prec, with_certificate=True)
    zu = weierstrass_zeta(tau, u, prec)
    zv = weierstrass_zeta(tau, v, prec)
    zuv = weierstrass_zeta(tau, u - v, prec)
    theta_uv = jacobi_theta_odd(tau, u - v, prec)
    mero = (zu - zv + zuv) / (TWO_PI_I * theta_uv)
    value = mu_val - mero
    cert = TruncationCertificate(
        bound=cert_mu.bound, radius=cert_mu.radius, terms=cert_mu.terms, note="splitting-residual"
    )
    return (value, cert) if with_certificate else value
