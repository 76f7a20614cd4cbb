"""Jacobi group elements and slash actions.

An element is a pair ``(gamma, (lam, mu))`` with ``gamma`` in SL(2) and
``lam, mu`` rational vectors of length ``N`` (the rank of the lattice the
action refers to).  Composition is

    (gamma, (lam, mu)) * (gamma', (lam', mu'))
        = (gamma gamma', (lam, mu) gamma' + (lam', mu'))

where ``(lam, mu) gamma'`` pairs the two vectors as the rows of a 2 x N
matrix, ``(lam, mu) [[a,b],[c,d]] = (a lam + c mu, b lam + d mu)``.

The weight-``k`` action of ``g = (gamma, lam, mu)`` on a function
``phi(tau, z)`` is

    (phi |_{k,L} g)(tau, z) = (c tau + d)^{-k}
        * e(-c Q(z + lam tau + mu)/(c tau + d)
            + Q(lam) tau + B(lam, z) + B(lam, mu))
        * phi(gamma tau, (z + lam tau + mu)/(c tau + d))

with ``Q`` and ``B`` taken from the lattice.  A two-weight variant replaces
``(c tau + d)^{-k}`` by ``(c tau + d)^{-alpha} (c conj(tau) + d)^{-beta}``;
the skew action attached to a set ``E`` of frame vectors is the two-weight
action with ``(alpha, beta) = (k - #E/2, #E/2)``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lattice import Lattice, _frac, as_matrix, as_vector

__all__ = [
    "JacobiElement",
    "jacobi_identity",
    "from_sl2",
    "heisenberg",
    "SL2_S",
    "SL2_T",
    "moebius",
    "transform_point",
    "slash_factor",
    "apply_slash",
    "apply_slash_two_weight",
    "skew_weights",
    "apply_slash_skew",
    "torsion_prefactor",
    "specialize_torsion",
]

SL2_S = ((0, -1), (1, 0))
SL2_T = ((1, 1), (0, 1))


@dataclass(frozen=True)
class JacobiElement:
    """``(gamma, lam, mu)`` with exact rational entries and det(gamma) = 1."""

    gamma: tuple
    lam: tuple
    mu: tuple

    def __post_init__(self):
        g = as_matrix(self.gamma)
        if len(g) != 2 or len(g[0]) != 2:
            raise ValueError("gamma must be 2 x 2")
        a, b = g[0]
        c, d = g[1]
        if a * d - b * c != 1:
            raise ValueError("gamma must have determinant 1")
        lam = as_vector(self.lam)
        mu = as_vector(self.mu)
        if len(lam) != len(mu):
            raise ValueError("lam and mu must have the same length")
        object.__setattr__(self, "gamma", (tuple(g[0]), tuple(g[1])))
        object.__setattr__(self, "lam", tuple(lam))
        object.__setattr__(self, "mu", tuple(mu))

    @property
    def rank(self) -> int:
        return len(self.lam)

    @property
    def is_integral(self) -> bool:
        entries = list(self.gamma[0]) + list(self.gamma[1]) + list(self.lam) + list(self.mu)
        return all(Fraction(e).denominator == 1 for e in entries)

    def __mul__(self, other: "JacobiElement") -> "JacobiElement":
        if self.rank != other.rank:
            raise ValueError("rank mismatch")
        g1, g2 = self.gamma, other.gamma
        gamma = tuple(
            tuple(sum(g1[i][t] * g2[t][j] for t in range(2)) for j in range(2)) for i in range(2)
        )
        a, b = other.gamma[0]
        c, d = other.gamma[1]
        lam = tuple(a * l + c * m + l2 for l, m, l2 in zip(self.lam, self.mu, other.lam))
        mu = tuple(b * l + d * m + m2 for l, m, m2 in zip(self.lam, self.mu, other.mu))
        return JacobiElement(gamma, lam, mu)

    def inverse(self) -> "JacobiElement":
        a, b = self.gamma[0]
        c, d = self.gamma[1]
        gi = ((d, -b), (-c, a))
        # (lam, mu) gamma^{-1}, then negate
        lam = tuple(-(d * l - c * m) for l, m in zip(self.lam, self.mu))
        mu = tuple(-(-b * l + a * m) for l, m in zip(self.lam, self.mu))
        return JacobiElement(gi, lam, mu)


def jacobi_identity(rank: int) -> JacobiElement:
    zero = (Fraction(0),) * rank
    return JacobiElement(((1, 0), (0, 1)), zero, zero)


def from_sl2(gamma, rank: int) -> JacobiElement:
    zero = (Fraction(0),) * rank
    return JacobiElement(gamma, zero, zero)


def heisenberg(lam, mu) -> JacobiElement:
    return JacobiElement(((1, 0), (0, 1)), tuple(as_vector(lam)), tuple(as_vector(mu)))


def moebius(gamma, tau: complex) -> complex:
    g = as_matrix(gamma)
    a, b = (float(x) for x in g[0])
    c, d = (float(x) for x in g[1])
    return (a * tau + b) / (c * tau + d)


def transform_point(g: JacobiElement, tau: complex, z) -> tuple[complex, np.ndarray]:
    """Image of ``(tau, z)`` under ``g``."""
    tau = complex(tau)
    zv = np.atleast_1d(np.asarray(z, dtype=complex))
    lam = np.array([float(x) for x in g.lam])
    mu = np.array([float(x) for x in g.mu])
    c = float(g.gamma[1][0])
    d = float(g.gamma[1][1])
    j = c * tau + d
    return moebius(g.gamma, tau), (zv + lam * tau + mu) / j


def _exponential_factor(lat: Lattice, g: JacobiElement, tau: complex, zv: np.ndarray) -> complex:
    gram = lat.gram_float()
    lam = np.array([float(x) for x in g.lam])
    mu = np.array([float(x) for x in g.mu])
    c = float(g.gamma[1][0])
    d = float(g.gamma[1][1])
    j = c * tau + d
    w = zv + lam * tau + mu
    expo = (
        -c * (0.5 * w @ gram @ w) / j
        + (0.5 * lam @ gram @ lam) * tau
        + lam @ gram @ zv
        + lam @ gram @ mu
    )
    return cmath.exp(2j * cmath.pi * expo)


def slash_factor(k, lat: Lattice, g: JacobiElement, tau: complex, z) -> tuple[complex, np.ndarray, complex]:
    """``(tau', z', factor)`` with ``(phi|_k g)(tau, z) = factor * phi(tau', z')``."""
    tau = complex(tau)
    zv = np.atleast_1d(np.asarray(z, dtype=complex))
    if len(g.lam) != lat.rank or zv.shape != (lat.rank,):
        raise ValueError("rank mismatch between element, lattice and z")
    c = float(g.gamma[1][0])
    d = float(g.gamma[1][1])
    j = c * tau + d
    factor = cmath.exp(-float(k) * cmath.log(j)) * _exponential_factor(lat, g, tau, zv)
    taup, zp = transform_point(g, tau, z)
    return taup, zp, factor


def apply_slash(phi, k, lat: Lattice, g: JacobiElement, tau: complex, z) -> complex:
    taup, zp, factor = slash_factor(k, lat, g, tau, z)
    return factor * phi(taup, zp)


def apply_slash_two_weight(phi, alpha, beta, lat: Lattice, g: JacobiElement, tau: complex, z) -> complex:
    """Slash with automorphy ``(c tau + d)^{-alpha} (c conj(tau) + d)^{-beta}``."""
    tau = complex(tau)
    zv = np.atleast_1d(np.asarray(z, dtype=complex))
    if len(g.lam) != lat.rank or zv.shape != (lat.rank,):
        raise ValueError("rank mismatch between element, lattice and z")
    c = float(g.gamma[1][0])
    d = float(g.gamma[1][1])
    j = c * tau + d
    jbar = c * tau.conjugate() + d
    factor = (
        cmath.exp(-float(alpha) * cmath.log(j))
        * cmath.exp(-float(beta) * cmath.log(jbar))
        * _exponential_factor(lat, g, tau, zv)
    )
    taup, zp = transform_point(g, tau, z)
    return factor * phi(taup, zp)


def skew_weights(k, n_frame: int) -> tuple[Fraction, Fraction]:
    """Two-weight pair ``(k - #E/2, #E/2)`` of the skew action."""
    half = Fraction(n_frame, 2)
    return _frac(k) - half, half


def apply_slash_skew(phi, k, lat: Lattice, g: JacobiElement, tau: complex, z, n_frame: int) -> complex:
    alpha, beta = skew_weights(k, n_frame)
    return apply_slash_two_weight(phi, alpha, beta, lat, g, tau, z)


def torsion_prefactor(lat: Lattice, alpha, beta, tau: complex) -> complex:
    """``e(Q(alpha) tau + B(alpha, beta))``: the automorphy factor of
    ``(I, alpha, beta)`` at ``z = 0``."""
    a = as_vector(alpha)
    b = as_vector(beta)
    qa = lat.q(a)
    bab = lat.b(a, b)
    return cmath.exp(2j * cmath.pi * (float(qa) * complex(tau) + float(bab)))


def specialize_torsion(phi, lat: Lattice, alpha, beta):
    """``tau -> (phi | (I, alpha, beta))(tau, 0)``.

    For a theta-type series this is the q-expansion specialization: the
    prefactor completes exponents to ``Q(nu + alpha)`` and phases to
    ``e(B(nu + alpha, beta))``.
    """
    a = np.array([float(Fraction(x)) for x in as_vector(alpha)])
    b = np.array([float(Fraction(x)) for x in as_vector(beta)])

    def specialized(tau: complex) -> complex:
        tau = complex(tau)
        return torsion_prefactor(lat, alpha, beta, tau) * phi(tau, a * tau + b)

    return specialized
