"""Indefinite theta series attached to a compatible frame pair.

The series attaches to each pair ``(e_i, e_i')`` of frame vectors a kernel
factor and sums

    theta(tau, z) = sum_{nu in Z^N + shift}
        prod_i (rho^{e_i} - rho^{e_i'})(tau, z; nu) * e(Q(nu) tau + B(nu, z))

where for a negative-norm vector ``e``

    rho^e(tau, z; nu) = E( B(e, nu + Im(z)/y) * sqrt(-y / Q(e)) )

and for an isotropic ``e`` (or under the ``"sgn"`` override)

    rho^e(tau, z; nu) = sgn( B(e, nu + Im(z)/y) ).

Sign kernels are discontinuous across the walls ``B(e, nu + Im(z)/y) = 0``;
evaluation refuses points that land on a wall (``domain_check`` reports the
distances).

``holomorphic_part_qexp`` produces the exact q-expansion of the torsion
specialization ``z = alpha tau + beta``: kernels degenerate to their
``y -> infinity`` sign limits and the series becomes

    sum_nu kappa(nu) e(B(nu + alpha, beta)) q^{Q(nu + alpha)} .
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels
from .certs import TruncationCertificate
from .lattice import (
    CompatiblePair,
    DiscElement,
    as_vector,
    discriminant_group,
    mat_vec,
)
from .qseries import QSeries, from_terms
from .specfun import DEFAULT_PREC, Precision

__all__ = [
    "ThetaSpec",
    "DomainReport",
    "domain_check",
    "theta_indef_eval",
    "theta_indef_components",
    "holomorphic_part_qexp",
    "shell_points",
]

_WALL_TOL = 1e-10


@dataclass(frozen=True)
class ThetaSpec:
    """A validated frame pair plus kernel policy.

    ``kernel_override="sgn"`` forces sign kernels on every frame vector
    (negative-norm vectors would otherwise carry error-function kernels);
    isotropic vectors always use sign kernels.
    """

    pair: CompatiblePair
    kernel_override: str | None = None

    def __post_init__(self):
        if not self.pair.valid:
            raise ValueError(f"invalid frame pair: {self.pair.report.failures}")
        if self.kernel_override not in (None, "sgn"):
            raise ValueError("kernel_override must be None or 'sgn'")

    @property
    def lattice(self):
        return self.pair.lattice

    def interleaved_vectors(self) -> list[tuple]:
        """Frame vectors as ``[e_1, e_1', e_2, e_2', ...]`` with orientation
        flips applied to the second frame."""
        eprime = self.pair.effective_eprime()
        out = []
        for e, ep in zip(self.pair.e_frame.vectors, eprime):
            out.append(tuple(e))
            out.append(tuple(ep))
        return out


def _frac_gcd(values) -> Fraction:
    """Positive generator of the additive group spanned by rationals."""
    vals = [Fraction(v) for v in values if v != 0]
    if not vals:
        return Fraction(0)
    den = 1
    for v in vals:
        den = den * v.denominator // math.gcd(den, v.denominator)
    num = 0
    for v in vals:
        num = math.gcd(num, int(v * den))
    return Fraction(num, den)


def _kernel_arrays(spec: ThetaSpec, y: float):
    lat = spec.lattice
    vecs = spec.interleaved_vectors()
    gram = np.array(lat.gram_float())
    gv = np.empty((len(vecs), lat.rank))
    kind = np.empty(len(vecs), dtype=np.int64)
    scale = np.empty(len(vecs))
    for j, f in enumerate(vecs):
        gf = mat_vec(lat.gram, as_vector(f))
        gv[j] = [float(t) for t in gf]
        qf = lat.q(f)
        if qf > 0:
            raise ValueError("frame vectors must have nonpositive norm")
        if qf == 0 or spec.kernel_override == "sgn":
            kind[j] = 1
            scale[j] = 0.0
        else:
            kind[j] = 0
            scale[j] = math.sqrt(-y / float(qf))
    return gram, gv, kind, scale


@lru_cache(maxsize=None)
def shell_points(n: int, radius: int) -> np.ndarray:
    """Integer points of sup-norm exactly ``radius`` (each point once)."""
    if radius == 0:
        out = np.zeros((1, n), dtype=np.int64)
        out.setflags(write=False)
        return out
    blocks = []
    for i in range(n):
        axes = []
        for j in range(n):
            if j < i:
                axes.append(np.arange(-(radius - 1), radius))
            elif j == i:
                axes.append(np.array([-radius, radius]))
            else:
                axes.append(np.arange(-radius, radius + 1))
        grid = np.meshgrid(*axes, indexing="ij")
        blocks.append(np.stack([g.ravel() for g in grid], axis=1))
    out = np.ascontiguousarray(np.concatenate(blocks).astype(np.int64))
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DomainReport:
    """Wall distances of the sign-kernel directions at the given point."""

    ok: bool
    distances: tuple
    note: str = ""


def _coerce_shift(lat, shift):
    if shift is None:
        return (Fraction(0),) * lat.rank
    if isinstance(shift, DiscElement):
        return shift.vec
    return tuple(as_vector(shift))


def domain_check(spec: ThetaSpec, tau, z, shift=None) -> DomainReport:
    """Distance of ``B(f, shift + Im(z)/y)`` to the wall set of every
    sign-kernel frame vector ``f``."""
    lat = spec.lattice
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half plane")
    zv = np.atleast_1d(np.asarray(z, dtype=complex))
    if zv.shape != (lat.rank,):
        raise ValueError(f"z must have {lat.rank} components")
    sh = _coerce_shift(lat, shift)
    voy = zv.imag / tau.imag
    dists = []
    ok = True
    for f in spec.interleaved_vectors():
        qf = spec.lattice.q(f)
        if not (qf == 0 or spec.kernel_override == "sgn"):
            continue
        gf = [float(t) for t in mat_vec(lat.gram, as_vector(f))]
        step = _frac_gcd(mat_vec(lat.gram, as_vector(f)))
        t = float(lat.b(f, sh)) + float(np.dot(gf, voy))
        if step == 0:
            dist = abs(t)
        else:
            s = float(step)
            dist = abs(t / s - round(t / s)) * s
        dists.append((tuple(f), dist))
        if dist <= _WALL_TOL:
            ok = False
    return DomainReport(ok=ok, distances=tuple(dists))


def theta_indef_eval(
    spec: ThetaSpec,
    tau,
    z,
    prec: Precision = DEFAULT_PREC,
    shift=None,
    with_certificate: bool = False,
    max_radius: int = 200,
):
    """Numeric value of the series at ``(tau, z)`` for one component shift."""
    lat = spec.lattice
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half plane")
    y = tau.imag
    zv = np.atleast_1d(np.asarray(z, dtype=complex))
    if zv.shape != (lat.rank,):
        raise ValueError(f"z must have {lat.rank} components")
    eps = prec.series_eps()
    sh = _coerce_shift(lat, shift)
    report = domain_check(spec, tau, zv, sh)
    if not report.ok:
        raise ValueError(f"z lies on a kernel wall: {report.distances}")
    gram, gv, kind, scale = _kernel_arrays(spec, y)
    shift_f = np.array([float(s) for s in sh])
    voy = zv.imag / y
    gzr = gram @ zv.real
    gzi = gram @ zv.imag
    ssum = _kernels.shell_sum
    total_re = 0.0
    total_im = 0.0
    terms = 0
    small = 0
    shell_prev = math.inf
    bound_tail = 0.0
    for radius in range(0, max_radius + 1):
        pts = shell_points(lat.rank, radius)
        re, im, ab = ssum(pts, shift_f, gram, gv, kind, scale, voy, tau.real, y, gzr, gzi)
        total_re += re
        total_im += im
        terms += pts.shape[0]
        if radius >= 2 and ab < eps / 10.0:
            small += 1
            if small >= 2:
                ratio = min(0.95, ab / shell_prev if shell_prev > 0 else 0.5)
                bound_tail = 100.0 * ab * ratio / (1.0 - ratio) if ab else 0.0
                break
        else:
            small = 0
        shell_prev = ab if ab > 0 else shell_prev
    else:
        raise RuntimeError("indefinite theta did not converge within the radius budget")
    total = complex(total_re, total_im)
    cert = TruncationCertificate(
        bound=max(bound_tail, eps / 10), radius=radius, terms=terms, note="indef-theta"
    )
    return (total, cert) if with_certificate else total


def theta_indef_components(
    spec: ThetaSpec,
    tau,
    z,
    prec: Precision = DEFAULT_PREC,
    with_certificates: bool = False,
    max_radius: int = 200,
):
    """All components of the vector-valued series, ordered like the
    discriminant group elements.

    Returns ``(disc, values)`` (and the per-component certificates when
    requested).
    """
    lat = spec.lattice
    disc = discriminant_group(lat)
    values = []
    certs = []
    for elem in disc.elements:
        out = theta_indef_eval(
            spec, tau, z, prec=prec, shift=elem, with_certificate=with_certificates,
            max_radius=max_radius,
        )
        if with_certificates:
            values.append(out[0])
            certs.append(out[1])
        else:
            values.append(out)
    vals = np.array(values, dtype=complex)
    if with_certificates:
        return disc, vals, tuple(certs)
    return disc, vals


def _sign_frac(x: Fraction) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def holomorphic_part_qexp(
    spec: ThetaSpec,
    alpha,
    beta,
    order,
    shift=None,
    max_radius: int = 400,
) -> QSeries:
    """Exact q-expansion of the specialization ``z = alpha tau + beta``.

    Terms: ``kappa(nu) e(B(nu + alpha, beta)) q^{Q(nu + alpha)}`` over
    ``nu in Z^N + shift`` with ``Q(nu + alpha) <= order`` and the sign-limit
    kernel ``kappa(nu) = prod_i (sgn B(e_i, nu + alpha) - sgn B(e_i', nu + alpha))``.

    The constant phase ``B(alpha, beta)`` is carried on the root tag of the
    returned series; term phases relative to it must be quarter-integers
    (else the series falls back to floating coefficients).
    """
    lat = spec.lattice
    order = Fraction(order)
    a = as_vector(alpha)
    bvec = as_vector(beta)
    sh = _coerce_shift(lat, shift)
    if len(a) != lat.rank or len(bvec) != lat.rank:
        raise ValueError("alpha and beta must match the lattice rank")
    vecs = spec.interleaved_vectors()
    root0 = lat.b(a, bvec) % 1
    # decide exactness: every residual phase B(nu, beta) must be a quarter integer
    gb = mat_vec(lat.gram, bvec)
    exact = all((4 * t).denominator == 1 for t in gb)

    items = []
    consecutive_quiet = 0
    for radius in range(0, max_radius + 1):
        pts = shell_points(lat.rank, radius)
        min_q = None
        contributed = False
        for row in pts:
            nu = tuple(Fraction(int(t)) + s for t, s in zip(row, sh))
            nua = tuple(x + ai for x, ai in zip(nu, a))
            kappa = 1
            for p in range(0, len(vecs), 2):
                se = _sign_frac(lat.b(vecs[p], nua))
                sp = _sign_frac(lat.b(vecs[p + 1], nua))
                if se == 0 or sp == 0:
                    raise ValueError(
                        f"torsion point alpha={a} lies on a kernel wall at nu={nu}"
                    )
                kappa *= se - sp
                if kappa == 0:
                    break
            if kappa == 0:
                continue
            expo = lat.q(nua)
            min_q = expo if min_q is None else min(min_q, expo)
            if expo > order:
                continue
            contributed = True
            phase = (lat.b(nu, bvec)) % 1
            if exact:
                k4 = 4 * phase
                unit = {0: (kappa, 0), 1: (0, kappa), 2: (-kappa, 0), 3: (0, -kappa)}[
                    int(k4) % 4
                ]
                items.append((expo, (), unit))
            else:
                items.append((expo, (), kappa * cmath.exp(2j * cmath.pi * float(phase))))
        if contributed or (min_q is not None and min_q <= order):
            consecutive_quiet = 0
        else:
            consecutive_quiet += 1
            if consecutive_quiet >= 3 and radius >= 6:
                break
    else:
        raise RuntimeError("q-expansion support enumeration exceeded the radius budget")
    return from_terms(items, order=order, nzvars=0, exact=exact, root=root0)
