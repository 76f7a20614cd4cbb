"""Truncated q-expansions with exact coefficients.

A :class:`QSeries` stores finitely many terms

    e(root) * sum_{(n, k)} c_{n,k} * q^(n/denom) * zeta_1^{k_1} ... zeta_m^{k_m}

with ``q = e(tau)`` and ``zeta_j = e(z_j)``.  Exponents ``n`` may be negative
(Puiseux tails around the cusp), and ``order`` records up to which exponent
the coefficients are complete, so arithmetic can propagate trust honestly.

Two coefficient modes exist:

* exact -- coefficients are Gaussian rationals ``(re, im)`` as pairs of
  :class:`fractions.Fraction`, and the whole series carries one global
  root-of-unity factor ``e(root)``.  Sums of series whose roots differ by a
  quarter integer are still exact (the relative factor is a Gaussian unit);
  anything else raises, rather than silently losing exactness.
* float -- coefficients are ``complex`` and ``root`` is folded in.

This is exactly enough structure for the theta q-expansions that occur here,
whose term phases are fourth roots of unity times a single overall ``e(a/b)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

__all__ = [
    "QSeries",
    "GaussianRational",
    "qs_zero",
    "qs_one",
    "qs_monomial",
    "from_terms",
    "add",
    "mul",
    "scale",
    "truncate",
    "coefficient",
    "valuation",
    "series_eval",
    "to_float_series",
    "format_qseries",
]

GaussianRational = tuple[Fraction, Fraction]
TermKey = tuple[int, tuple[int, ...]]


def _gr(x) -> GaussianRational:
    if isinstance(x, tuple) and len(x) == 2:
        return (Fraction(x[0]), Fraction(x[1]))
    if isinstance(x, (int, Fraction)):
        return (Fraction(x), Fraction(0))
    raise TypeError(f"not an exact coefficient: {x!r}")


def _gr_add(a: GaussianRational, b: GaussianRational) -> GaussianRational:
    return (a[0] + b[0], a[1] + b[1])


def _gr_mul(a: GaussianRational, b: GaussianRational) -> GaussianRational:
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gr_unit(k: int) -> GaussianRational:
    """i^k as a Gaussian rational."""
    k %= 4
    return [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)),
            (Fraction(-1), Fraction(0)), (Fraction(0), Fraction(-1))][k]


def _gr_is_zero(a: GaussianRational) -> bool:
    return a[0] == 0 and a[1] == 0


@dataclass(frozen=True)
class QSeries:
    """Immutable truncated q-expansion; see module docstring.

    ``order=None`` means the series is exact to all orders (a polynomial).
    """

    denom: int
    terms: Mapping[TermKey, object]
    order: Fraction | None
    nzvars: int = 0
    exact: bool = True
    root: Fraction = Fraction(0)

    def __post_init__(self):
        if self.denom <= 0:
            raise ValueError("denominator must be positive")
        for (n, zp) in self.terms:
            if len(zp) != self.nzvars:
                raise ValueError("term key arity does not match nzvars")
            if self.order is not None and Fraction(n, self.denom) > self.order:
                raise ValueError("stored term beyond the truncation order")

    def exponents(self) -> list[Fraction]:
        return sorted({Fraction(n, self.denom) for (n, _zp) in self.terms})


def qs_zero(denom: int = 1, nzvars: int = 0, order: Fraction | None = None,
            exact: bool = True) -> QSeries:
    return QSeries(denom, {}, order, nzvars, exact)


def qs_one(denom: int = 1, nzvars: int = 0, order: Fraction | None = None,
           exact: bool = True) -> QSeries:
    one = (Fraction(1), Fraction(0)) if exact else complex(1.0)
    return QSeries(denom, {(0, (0,) * nzvars): one}, order, nzvars, exact)


def qs_monomial(
    exponent,
    coeff=1,
    zpow: tuple[int, ...] = (),
    denom: int | None = None,
    order: Fraction | None = None,
    exact: bool = True,
    root: Fraction = Fraction(0),
) -> QSeries:
    """Single term ``coeff * q^exponent * zeta^zpow`` (times ``e(root)``)."""
    ex = Fraction(exponent)
    if denom is None:
        denom = ex.denominator
    n = ex * denom
    if n.denominator != 1:
        raise ValueError(f"exponent {ex} incompatible with denominator {denom}")
    c = _gr(coeff) if exact else complex(coeff)
    if (exact and _gr_is_zero(c)) or (not exact and c == 0):
        return QSeries(denom, {}, order, len(zpow), exact, Fraction(root) if exact else Fraction(0))
    return QSeries(denom, {(int(n), tuple(zpow)): c}, order, len(zpow), exact,
                   Fraction(root) if exact else Fraction(0))


def from_terms(
    items: Iterable[tuple[Fraction, tuple[int, ...], object]],
    order: Fraction | None = None,
    nzvars: int = 0,
    exact: bool = True,
    root: Fraction = Fraction(0),
) -> QSeries:
    """Build a series from ``(exponent, zpow, coeff)`` triples."""
    items = list(items)
    denom = 1
    for ex, _zp, _c in items:
        denom = denom * Fraction(ex).denominator // math.gcd(denom, Fraction(ex).denominator)
    terms: dict[TermKey, object] = {}
    for ex, zp, c in items:
        key = (int(Fraction(ex) * denom), tuple(zp))
        cur = terms.get(key)
        if exact:
            val = _gr_add(cur, _gr(c)) if cur is not None else _gr(c)
            if _gr_is_zero(val):
                terms.pop(key, None)
            else:
                terms[key] = val
        else:
            val = (cur or 0j) + complex(c)
            if val == 0:
                terms.pop(key, None)
            else:
                terms[key] = val
    return QSeries(denom, terms, order, nzvars, exact, Fraction(root))


def _common(a: QSeries, b: QSeries) -> tuple[int, int, int]:
    d = a.denom * b.denom // math.gcd(a.denom, b.denom)
    return d, d // a.denom, d // b.denom


def _reroot(terms: dict, delta: Fraction, exact: bool) -> dict:
    """Multiply all coefficients by e(delta); exact only for quarter integers."""
    if delta == 0:
        return terms
    if exact:
        q = delta * 4
        if q.denominator != 1:
            raise ValueError(
                f"cannot reconcile root-of-unity tags differing by e({delta}); "
                "convert to float mode first"
            )
        u = _gr_unit(int(q))
        return {k: _gr_mul(v, u) for k, v in terms.items()}
    w = cmath.exp(2j * cmath.pi * float(delta))
    return {k: v * w for k, v in terms.items()}


def add(a: QSeries, b: QSeries) -> QSeries:
    if a.exact != b.exact:
        raise ValueError("cannot mix exact and float series; convert explicitly")
    if a.nzvars != b.nzvars:
        raise ValueError("elliptic-variable arity mismatch")
    d, fa, fb = _common(a, b)
    order = a.order if b.order is None else b.order if a.order is None else min(a.order, b.order)
    root = a.root
    bterms = _reroot(dict(b.terms), b.root - root, a.exact)
    out: dict[TermKey, object] = {}
    for (n, zp), c in a.terms.items():
        key = (n * fa, zp)
        if order is None or Fraction(key[0], d) <= order:
            out[key] = c
    for (n, zp), c in bterms.items():
        key = (n * fb, zp)
        if order is not None and Fraction(key[0], d) > order:
            continue
        cur = out.get(key)
        if a.exact:
            val = _gr_add(cur, c) if cur is not None else c
            if _gr_is_zero(val):
                out.pop(key, None)
            else:
                out[key] = val
        else:
            val = (cur or 0j) + c
            if val == 0:
                out.pop(key, None)
            else:
                out[key] = val
    return QSeries(d, out, order, a.nzvars, a.exact, root if a.exact else Fraction(0))


def neg(a: QSeries) -> QSeries:
    if a.exact:
        terms = {k: (-v[0], -v[1]) for k, v in a.terms.items()}
    else:
        terms = {k: -v for k, v in a.terms.items()}
    return QSeries(a.denom, terms, a.order, a.nzvars, a.exact, a.root)


def sub(a: QSeries, b: QSeries) -> QSeries:
    return add(a, neg(b))


def valuation(a: QSeries) -> Fraction | None:
    """Smallest exponent with a nonzero stored coefficient; None for zero."""
    if not a.terms:
        return None
    return Fraction(min(n for (n, _zp) in a.terms), a.denom)


def mul(a: QSeries, b: QSeries) -> QSeries:
    if a.exact != b.exact:
        raise ValueError("cannot mix exact and float series; convert explicitly")
    if a.nzvars != b.nzvars:
        raise ValueError("elliptic-variable arity mismatch")
    d, fa, fb = _common(a, b)
    va, vb = valuation(a), valuation(b)
    order: Fraction | None
    if a.order is None and b.order is None:
        order = None
    else:
        candidates = []
        if a.order is not None:
            candidates.append(a.order + (vb if vb is not None else Fraction(0)))
        if b.order is not None:
            candidates.append(b.order + (va if va is not None else Fraction(0)))
        order = min(candidates)
    out: dict[TermKey, object] = {}
    for (n1, zp1), c1 in a.terms.items():
        for (n2, zp2), c2 in b.terms.items():
            n = n1 * fa + n2 * fb
            if order is not None and Fraction(n, d) > order:
                continue
            zp = tuple(x + y for x, y in zip(zp1, zp2))
            key = (n, zp)
            cur = out.get(key)
            if a.exact:
                val = _gr_mul(c1, c2)
                val = _gr_add(cur, val) if cur is not None else val
                if _gr_is_zero(val):
                    out.pop(key, None)
                else:
                    out[key] = val
            else:
                val = (cur or 0j) + c1 * c2
                if val == 0:
                    out.pop(key, None)
                else:
                    out[key] = val
    root = a.root + b.root if a.exact else Fraction(0)
    return QSeries(d, out, order, a.nzvars, a.exact, root)


def scale(a: QSeries, coeff, root_shift: Fraction = Fraction(0)) -> QSeries:
    """Multiply by a scalar, optionally shifting the root-of-unity tag."""
    if a.exact:
        c = _gr(coeff)
        terms = {k: _gr_mul(v, c) for k, v in a.terms.items()}
        terms = {k: v for k, v in terms.items() if not _gr_is_zero(v)}
        return QSeries(a.denom, terms, a.order, a.nzvars, True, a.root + Fraction(root_shift))
    w = complex(coeff) * cmath.exp(2j * cmath.pi * float(root_shift))
    terms = {k: v * w for k, v in a.terms.items() if v * w != 0}
    return QSeries(a.denom, terms, a.order, a.nzvars, False)


def shift_exponent(a: QSeries, delta) -> QSeries:
    """Multiply by q^delta (shifts every exponent and the order)."""
    de = Fraction(delta)
    d = a.denom * de.denominator // math.gcd(a.denom, de.denominator)
    f = d // a.denom
    nshift = int(de * d)
    terms = {(n * f + nshift, zp): c for (n, zp), c in a.terms.items()}
    order = None if a.order is None else a.order + de
    return QSeries(d, terms, order, a.nzvars, a.exact, a.root)


def truncate(a: QSeries, order) -> QSeries:
    o = Fraction(order)
    if a.order is not None and a.order < o:
        raise ValueError("cannot extend a truncated series by truncating")
    terms = {k: v for k, v in a.terms.items() if Fraction(k[0], a.denom) <= o}
    return QSeries(a.denom, terms, o, a.nzvars, a.exact, a.root)


def coefficient(a: QSeries, exponent, zpow: tuple[int, ...] = ()):
    """Coefficient of ``q^exponent zeta^zpow`` (including the e(root) factor
    in exact mode it is returned symbolically as ``(coeff, root)``)."""
    ex = Fraction(exponent)
    if a.order is not None and ex > a.order:
        raise ValueError(f"exponent {ex} beyond truncation order {a.order}")
    n = ex * a.denom
    if n.denominator != 1:
        zero = (Fraction(0), Fraction(0)) if a.exact else 0j
        return zero
    c = a.terms.get((int(n), tuple(zpow)))
    if c is None:
        return (Fraction(0), Fraction(0)) if a.exact else 0j
    return c


def to_float_series(a: QSeries) -> QSeries:
    if not a.exact:
        return a
    w = cmath.exp(2j * cmath.pi * float(a.root))
    terms = {k: (float(v[0]) + 1j * float(v[1])) * w for k, v in a.terms.items()}
    return QSeries(a.denom, terms, a.order, a.nzvars, False)


def series_eval(a: QSeries, tau: complex, z=None, with_certificate: bool = False):
    """Evaluate at ``tau`` (and elliptic variables ``z``), ascending exponents.

    The optional certificate bounds the dropped tail by a geometric estimate
    ``M |q|^(order + 1/denom) / (1 - |q|^(1/denom))`` with ``M`` the largest
    stored coefficient magnitude -- a heuristic for series with bounded
    coefficients, honest for all fixtures used here.
    """
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half plane")
    if a.nzvars and z is None:
        raise ValueError(f"series has {a.nzvars} elliptic variables; z required")
    zs = () if z is None else (tuple(z) if isinstance(z, (tuple, list)) else (z,))
    if len(zs) != a.nzvars:
        raise ValueError("wrong number of elliptic variables")
    q1 = cmath.exp(2j * cmath.pi * tau / a.denom)
    zeta = [cmath.exp(2j * cmath.pi * w) for w in zs]
    total = 0j
    maxc = 0.0
    for (n, zp) in sorted(a.terms.keys()):
        c = a.terms[(n, zp)]
        cv = (float(c[0]) + 1j * float(c[1])) if a.exact else c
        maxc = max(maxc, abs(cv))
        term = cv * q1 ** n
        for w, k in zip(zeta, zp):
            term *= w ** k
        total += term
    if a.exact:
        total *= cmath.exp(2j * cmath.pi * float(a.root))
    if not with_certificate:
        return total
    absq1 = abs(q1)
    if a.order is None:
        bound = 0.0
    else:
        bound = maxc * absq1 ** (float(a.order) * a.denom + 1) / max(1e-300, (1 - absq1))
    return total, bound


def format_qseries(a: QSeries, max_terms: int = 12) -> str:
    """Human-readable rendering, ascending exponents."""
    if not a.terms:
        return "0"
    bits = []
    for (n, zp) in sorted(a.terms.keys())[:max_terms]:
        c = a.terms[(n, zp)]
        if a.exact:
            re, im = c
            if im == 0:
                cs = str(re)
            elif re == 0:
                cs = f"{im}*i"
            else:
                cs = f"({re}{'+' if im > 0 else ''}{im}*i)"
        else:
            cs = f"{c:.6g}"
        ex = Fraction(n, a.denom)
        parts = [cs]
        if ex != 0:
            parts.append(f"q^({ex})" if ex.denominator != 1 or ex < 0 else f"q^{ex}")
        for j, k in enumerate(zp):
            if k:
                parts.append(f"z{j + 1}^{k}" if a.nzvars > 1 else f"zeta^{k}")
        bits.append("*".join(parts))
    body = " + ".join(bits).replace("+ -", "- ")
    if len(a.terms) > max_terms:
        body += " + ..."
    if a.exact and a.root != 0:
        body = f"e({a.root})*[{body}]"
    if a.order is not None:
        body += f" + O(q^({a.order}))"
    return body
