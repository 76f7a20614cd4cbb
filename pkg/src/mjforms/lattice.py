"""Rational lattices with distinguished frames.

Everything in this module is exact: matrices and vectors are tuples of
:class:`fractions.Fraction`, determinants and signatures are computed by
rational elimination, and discriminant groups come from an integer Smith
normal form.  Floating point enters only at the very end, when a Weil
representation matrix is materialised as ``complex128``.

Conventions
-----------
A lattice is ``Z^n`` equipped with a symmetric bilinear form.  The canonical
data is the *even Gram matrix* ``G`` with

    Q(x) = (1/2) x^T G x,        B(x, y) = x^T G y,

so ``B(x, x) = 2 Q(x)``.  Input can be given in two modes:

``"gram"``
    the matrix is ``G`` itself;
``"paper-L"``
    the matrix is ``S = G/2``, i.e. the half-integral symmetric matrix with
    ``Q(x) = x^T S x``; this is the common convention for Jacobi-form
    indices.

``Lattice.det`` is the determinant of the matrix *as ingested* (so the two
modes report determinants differing by ``2^n``), while the discriminant
group is always formed from the canonical even Gram matrix.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Lattice",
    "LatticeAnalysis",
    "DiscElement",
    "DiscGroup",
    "Frame",
    "PairReport",
    "CompatiblePair",
    "lattice",
    "evaluate_form",
    "analyze_lattice",
    "discriminant_group",
    "weil_representation",
    "frame",
    "validate_compatible_pair",
    "normalize_frames",
    "find_replacement_vector",
    "smith_normal_form",
    "coset_representatives",
]

Vector = tuple[Fraction, ...]
Matrix = tuple[Vector, ...]


# ---------------------------------------------------------------------------
# exact linear algebra helpers


def _frac(x) -> Fraction:
    """Coerce ``int | str | Fraction`` to Fraction; floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected exact rational (int, str or Fraction), got {type(x).__name__}")


def as_vector(xs: Iterable) -> Vector:
    return tuple(_frac(x) for x in xs)


def as_matrix(rows: Iterable[Iterable]) -> Matrix:
    m = tuple(as_vector(r) for r in rows)
    if m and any(len(r) != len(m[0]) for r in m):
        raise ValueError("ragged matrix")
    return m


def mat_vec(m: Matrix, v: Sequence[Fraction]) -> Vector:
    return tuple(sum(mi * vi for mi, vi in zip(row, v)) for row in m)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((ui * vi for ui, vi in zip(u, v)), Fraction(0))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    bt = tuple(zip(*b))
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def mat_det(m: Matrix) -> Fraction:
    """Determinant by exact Gaussian elimination."""
    n = len(m)
    a = [list(row) for row in m]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if f:
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
    return det


def mat_inv(m: Matrix) -> Matrix:
    """Inverse by exact Gauss-Jordan elimination."""
    n = len(m)
    a = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def _rref(m: Matrix) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (rows, pivot column indices)."""
    a = [list(row) for row in m]
    rows = len(a)
    cols = len(a[0]) if a else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def kernel_basis(m: Matrix) -> tuple[Vector, ...]:
    """Basis of the right kernel {x : m x = 0}, exact."""
    if not m:
        return ()
    a, pivots = _rref(m)
    cols = len(m[0])
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -a[r][f]
        basis.append(tuple(v))
    return tuple(basis)


def matrix_rank(m: Matrix) -> int:
    return len(_rref(m)[1]) if m else 0


# ---------------------------------------------------------------------------
# Smith normal form over the integers


def smith_normal_form(m: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Smith normal form ``U @ M @ V = D`` of an integer matrix.

    Returns ``(U, D, V)`` with ``U`` and ``V`` unimodular and ``D`` diagonal
    with nonnegative entries ``d_1 | d_2 | ...``.  Straightforward
    elimination on exact ints; fine for the small matrices used here.
    """
    a = [[int(x) for x in row] for row in m]
    rows, cols = len(a), len(a[0]) if a else 0
    u = [[int(i == j) for j in range(rows)] for i in range(rows)]
    v = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, k):
        a[dst] = [x + k * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + k * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, k):
        for row in a:
            row[dst] += k * row[src]
        for row in v:
            row[dst] += k * row[src]

    t = 0
    while t < min(rows, cols):
        # find a nonzero pivot in the remaining block
        piv = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j] != 0:
                    if piv is None or abs(a[i][j]) < abs(a[piv[0]][piv[1]]):
                        piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        # clear row and column t
        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    add_row(i, t, -q)
                    if a[i][t]:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, cols):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    add_col(j, t, -q)
                    if a[t][j]:
                        swap_cols(t, j)
                        dirty = True
        # divisibility: a[t][t] must divide the rest of the block
        fixed = False
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if a[i][j] % a[t][t]:
                    add_row(t, i, 1)
                    fixed = True
                    break
            if fixed:
                break
        if fixed:
            continue
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    d = [[a[i][j] if i == j else 0 for j in range(cols)] for i in range(rows)]
    return u, d, v


def coset_representatives(m: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Representatives of ``Z^n / M Z^n`` for an integer matrix with det != 0."""
    u, d, _v = smith_normal_form(m)
    n = len(d)
    divisors = [d[i][i] for i in range(n)]
    if any(di == 0 for di in divisors):
        raise ValueError("matrix is singular; quotient is infinite")
    uinv = mat_inv(as_matrix(u))
    reps = []
    for k in itertools.product(*(range(di) for di in divisors)):
        x = mat_vec(uinv, as_vector(k))
        reps.append(tuple(int(c) for c in x))
    return reps


# ---------------------------------------------------------------------------
# Lattice


@dataclass(frozen=True)
class Lattice:
    """``Z^n`` with a symmetric rational form; see module docstring for modes."""

    matrix: Matrix
    mode: str = "gram"

    def __post_init__(self):
        if self.mode not in ("gram", "paper-L"):
            raise ValueError(f"unknown mode {self.mode!r}")
        m = as_matrix(self.matrix)
        if len(m) != len(m[0] if m else ()):
            raise ValueError("matrix must be square")
        if any(m[i][j] != m[j][i] for i in range(len(m)) for j in range(len(m))):
            raise ValueError("matrix must be symmetric")
        object.__setattr__(self, "matrix", m)

    @property
    def rank(self) -> int:
        return len(self.matrix)

    @property
    def gram(self) -> Matrix:
        """Canonical even Gram matrix ``G`` (doubled in paper-L mode)."""
        if self.mode == "paper-L":
            return tuple(tuple(2 * x for x in row) for row in self.matrix)
        return self.matrix

    @property
    def det(self) -> Fraction:
        """Determinant of the matrix as ingested."""
        return mat_det(self.matrix)

    def gram_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.gram], dtype=np.float64)

    def q(self, x: Sequence) -> Fraction:
        v = as_vector(x)
        return dot(v, mat_vec(self.gram, v)) / 2

    def b(self, x: Sequence, y: Sequence) -> Fraction:
        return dot(as_vector(x), mat_vec(self.gram, as_vector(y)))

    def b_row(self, x: Sequence) -> Vector:
        """Row functional ``y -> B(x, y)`` as a coefficient vector ``x^T G``."""
        v = as_vector(x)
        cols = tuple(zip(*self.gram))
        return tuple(dot(v, col) for col in cols)

    @property
    def signature(self) -> tuple[int, int, int]:
        """``(n_plus, n_minus, n_zero)`` of the form, computed exactly."""
        return _signature(self.gram)

    @property
    def radical_basis(self) -> tuple[Vector, ...]:
        return kernel_basis(self.gram)

    @property
    def nd_projector(self) -> Matrix:
        """Euclidean-orthogonal projector onto the complement of the radical."""
        rad = self.radical_basis
        n = self.rank
        ident = tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))
        if not rad:
            return ident
        k = as_matrix(rad)  # rows span the radical
        kt = tuple(zip(*k))
        gram_k = mat_mul(k, as_matrix(kt))
        proj = mat_mul(as_matrix(kt), mat_mul(mat_inv(gram_k), k))  # onto radical
        return tuple(
            tuple(ident[i][j] - proj[i][j] for j in range(n)) for i in range(n)
        )

    def is_even_integral(self) -> bool:
        g = self.gram
        return all(x.denominator == 1 for row in g for x in row) and all(
            g[i][i] % 2 == 0 for i in range(self.rank)
        )


def lattice(matrix, mode: str = "gram") -> Lattice:
    """Convenience constructor accepting nested lists of int/str/Fraction."""
    return Lattice(as_matrix(matrix), mode)


def _signature(g: Matrix) -> tuple[int, int, int]:
    n = len(g)
    a = [list(row) for row in g]
    active = list(range(n))
    pos = neg = 0
    while active:
        piv = next((i for i in active if a[i][i] != 0), None)
        if piv is None:
            pair = None
            for i in active:
                for j in active:
                    if i != j and a[i][j] != 0:
                        pair = (i, j)
                        break
                if pair:
                    break
            if pair is None:
                break  # remaining block identically zero
            i, j = pair
            # congruence: e_i -> e_i + e_j (or - e_j) to create a diagonal pivot
            s = 1 if a[i][i] + 2 * a[i][j] + a[j][j] != 0 else -1
            for c in range(n):
                a[i][c] += s * a[j][c]
            for r in range(n):
                a[r][i] += s * a[r][j]
            piv = i
        p = a[piv][piv]
        if p > 0:
            pos += 1
        else:
            neg += 1
        active.remove(piv)
        for r in active:
            f = a[r][piv] / p
            if f:
                for c in range(n):
                    a[r][c] -= f * a[piv][c]
                for c in range(n):
                    a[c][r] -= f * a[c][piv]
    zero = n - pos - neg
    return pos, neg, zero


@dataclass(frozen=True)
class LatticeAnalysis:
    signature: tuple[int, int, int]
    det: Fraction
    disc_order: int | None
    radical_basis: tuple[Vector, ...]
    nd_projector: Matrix


def evaluate_form(lat: Lattice, x: Sequence, y: Sequence | None = None) -> Fraction:
    """``Q(x)`` if y is omitted, else ``B(x, y)``; exact."""
    return lat.q(x) if y is None else lat.b(x, y)


def analyze_lattice(lat: Lattice) -> LatticeAnalysis:
    disc_order: int | None = None
    if lat.is_even_integral():
        d = mat_det(lat.gram)
        if d != 0:
            disc_order = abs(int(d))
    return LatticeAnalysis(
        signature=lat.signature,
        det=lat.det,
        disc_order=disc_order,
        radical_basis=lat.radical_basis,
        nd_projector=lat.nd_projector,
    )


# ---------------------------------------------------------------------------
# discriminant group and Weil representation


def _reduce_mod_1(v: Sequence[Fraction]) -> Vector:
    return tuple(x - (x // 1) for x in v)


@dataclass(frozen=True, order=True)
class DiscElement:
    """Element of a discriminant group, stored as the coset rep in [0,1)^n."""

    vec: Vector

    def __neg__(self) -> "DiscElement":
        return DiscElement(_reduce_mod_1(tuple(-x for x in self.vec)))

    def __add__(self, other: "DiscElement") -> "DiscElement":
        return DiscElement(_reduce_mod_1(tuple(a + b for a, b in zip(self.vec, other.vec))))


@dataclass(frozen=True)
class DiscGroup:
    lattice: Lattice
    elements: tuple[DiscElement, ...]
    elementary_divisors: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def index_of(self, el: DiscElement) -> int:
        key = _reduce_mod_1(el.vec)
        for i, e in enumerate(self.elements):
            if e.vec == key:
                return i
        raise KeyError(f"{el} is not a coset representative of this group")

    def q_value(self, el: DiscElement) -> Fraction:
        """``Q(lambda) mod 1``."""
        q = self.lattice.q(el.vec)
        return q - (q // 1)

    def pairing(self, a: DiscElement, b: DiscElement) -> Fraction:
        """``B(lambda, mu) mod 1``."""
        p = self.lattice.b(a.vec, b.vec)
        return p - (p // 1)


def discriminant_group(lat: Lattice) -> DiscGroup:
    """``Ľ/L`` of an even integral lattice, via integer Smith normal form."""
    if not lat.is_even_integral():
        raise ValueError("discriminant group requires an even integral Gram matrix")
    g = lat.gram
    if mat_det(g) == 0:
        raise ValueError("form is degenerate; discriminant group is infinite")
    gint = [[int(x) for x in row] for row in g]
    u, d, _v = smith_normal_form(gint)
    n = lat.rank
    divisors = [d[i][i] for i in range(n)]
    ginv = mat_inv(g)
    uinv = mat_inv(as_matrix(u))
    elements = []
    for k in itertools.product(*(range(di) for di in divisors)):
        x = mat_vec(uinv, as_vector(k))
        lam = _reduce_mod_1(mat_vec(ginv, x))
        elements.append(DiscElement(lam))
    elements = sorted(set(elements))
    if len(elements) != abs(int(mat_det(g))):
        raise AssertionError("coset enumeration does not match |det G|")
    return DiscGroup(lat, tuple(elements), tuple(di for di in divisors if di > 1))


def _e(x: Fraction | float) -> complex:
    """``e(x) = exp(2 pi i x)``."""
    return complex(np.exp(2j * np.pi * float(x)))


def weil_representation(lat: Lattice, gen: str, dg: DiscGroup | None = None) -> np.ndarray:
    """Matrix of the Weil representation on ``C[Ľ/L]`` for ``gen in {"S","T"}``.

    Basis order follows ``discriminant_group(lat).elements``.  ``T`` acts by
    ``e(Q(lambda))``; ``S`` by ``sigma * |disc|^{-1/2} (e(-B(lambda, mu)))``
    with ``sigma = e((n_minus - n_plus)/8)``.
    """
    if dg is None:
        dg = discriminant_group(lat)
    n = dg.order
    if gen == "T":
        return np.diag([_e(dg.q_value(el)) for el in dg.elements]).astype(np.complex128)
    if gen == "S":
        n_plus, n_minus, n_zero = lat.signature
        if n_zero:
            raise ValueError("Weil representation requires a nondegenerate form")
        sigma = _e(Fraction(n_minus - n_plus, 8))
        mat = np.empty((n, n), dtype=np.complex128)
        for i, a in enumerate(dg.elements):
            for j, b in enumerate(dg.elements):
                mat[i, j] = _e(-dg.pairing(a, b))
        return sigma / np.sqrt(n) * mat
    raise ValueError(f"unknown generator {gen!r}; expected 'S' or 'T'")


# ---------------------------------------------------------------------------
# frames and compatible pairs


@dataclass(frozen=True)
class Frame:
    """Tuple of pairwise B-orthogonal, linearly independent, nonzero vectors.

    ``plus``/``minus``/``zero`` partition the indices by the exact sign of
    ``Q`` on each vector.
    """

    vectors: Matrix
    plus: tuple[int, ...]
    minus: tuple[int, ...]
    zero: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.vectors)


def frame(lat: Lattice, vectors: Iterable[Iterable]) -> Frame:
    vecs = as_matrix(vectors)
    if any(all(x == 0 for x in v) for v in vecs):
        raise ValueError("frame vectors must be nonzero")
    if matrix_rank(vecs) != len(vecs):
        raise ValueError("frame vectors must be linearly independent")
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            if lat.b(vecs[i], vecs[j]) != 0:
                raise ValueError(f"frame vectors {i} and {j} are not B-orthogonal")
    plus, minus, zero = [], [], []
    for i, v in enumerate(vecs):
        qv = lat.q(v)
        (plus if qv > 0 else minus if qv < 0 else zero).append(i)
    return Frame(vecs, tuple(plus), tuple(minus), tuple(zero))


@dataclass(frozen=True)
class PairReport:
    valid: bool
    length_ok: bool
    span_signatures_ok: bool
    spans_orthogonal_ok: bool
    perp_ok: bool
    perp_prime_ok: bool
    shared_direction: bool
    orientation_flips: tuple[bool, ...]
    failures: tuple[str, ...]


@dataclass(frozen=True)
class CompatiblePair:
    lattice: Lattice
    e_frame: Frame
    eprime_frame: Frame
    report: PairReport

    @property
    def valid(self) -> bool:
        return self.report.valid

    def effective_eprime(self) -> Matrix:
        """E' with sign flips applied so that ``B(e_i, e'_i) < 0`` throughout.

        The series attached to a pair only converges when each ``e'_i`` lies
        in the same negative cone as ``e_i``; flipped vectors span the same
        lines, so validity is unaffected.
        """
        out = []
        for flip, v in zip(self.report.orientation_flips, self.eprime_frame.vectors):
            out.append(tuple(-x for x in v) if flip else v)
        return tuple(out)


def _restricted_gram(lat: Lattice, vecs: Matrix) -> Matrix:
    return tuple(tuple(lat.b(u, v) for v in vecs) for u in vecs)


def _perp_basis(lat: Lattice, vecs: Matrix) -> tuple[Vector, ...]:
    """Basis of {x : B(x, v) = 0 for all v in vecs}."""
    rows = as_matrix([lat.b_row(v) for v in vecs])
    return kernel_basis(rows)


def _perp_condition(lat: Lattice, vecs: Matrix) -> bool:
    """True iff the form restricted to vecs^perp is positive semidefinite
    with positive definite quotient by its radical (i.e. no negative part)."""
    basis = _perp_basis(lat, vecs)
    if not basis:
        return True
    g = tuple(tuple(lat.b(u, v) for v in basis) for u in basis)
    _pos, neg, _zero = _signature(g)
    return neg == 0


def validate_compatible_pair(lat: Lattice, e_vectors, eprime_vectors) -> CompatiblePair:
    """Check the compatibility conditions for a pair of partial frames.

    Conditions (all exact):
      * equal lengths, both equal to ``n_minus`` of the form;
      * each frame individually valid (B-orthogonal, independent, nonzero);
      * each plane ``span(e_i, e'_i)`` has signature (1,1);
      * the planes are mutually B-orthogonal;
      * the B-orthogonal complement of each frame carries no negative part.

    The report additionally records, per index, whether ``e'_i`` had to be
    flipped to satisfy the convergence orientation ``B(e_i, e'_i) < 0``, and
    whether some pair shares a line (which makes the attached series vanish
    identically).
    """
    ef = frame(lat, e_vectors)
    epf = frame(lat, eprime_vectors)
    failures: list[str] = []

    n_minus = lat.signature[1]
    length_ok = len(ef) == len(epf) == n_minus
    if not length_ok:
        failures.append(
            f"frame lengths ({len(ef)}, {len(epf)}) must both equal n_minus={n_minus}"
        )

    span_ok = True
    spans_orth_ok = True
    flips: list[bool] = []
    shared = False
    k = min(len(ef), len(epf))
    for i in range(k):
        e, ep = ef.vectors[i], epf.vectors[i]
        g2 = (
            (lat.b(e, e), lat.b(e, ep)),
            (lat.b(ep, e), lat.b(ep, ep)),
        )
        d = g2[0][0] * g2[1][1] - g2[0][1] * g2[1][0]
        if matrix_rank(as_matrix((e, ep))) < 2:
            shared = True
            flips.append(False)
            continue
        if d >= 0:
            span_ok = False
            failures.append(f"span(e_{i}, e'_{i}) does not have signature (1,1)")
            flips.append(False)
        else:
            flips.append(lat.b(e, ep) > 0)
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            for u in (ef.vectors[i], epf.vectors[i]):
                for w in (ef.vectors[j], epf.vectors[j]):
                    if lat.b(u, w) != 0:
                        spans_orth_ok = False
    if not spans_orth_ok:
        failures.append("planes span(e_i, e'_i) are not mutually B-orthogonal")

    perp_ok = _perp_condition(lat, ef.vectors)
    perp_prime_ok = _perp_condition(lat, epf.vectors)
    if not perp_ok:
        failures.append("complement of E has a negative part")
    if not perp_prime_ok:
        failures.append("complement of E' has a negative part")

    valid = length_ok and span_ok and spans_orth_ok and perp_ok and perp_prime_ok
    report = PairReport(
        valid=valid,
        length_ok=length_ok,
        span_signatures_ok=span_ok,
        spans_orthogonal_ok=spans_orth_ok,
        perp_ok=perp_ok,
        perp_prime_ok=perp_prime_ok,
        shared_direction=shared,
        orientation_flips=tuple(flips),
        failures=tuple(failures),
    )
    return CompatiblePair(lat, ef, epf, report)


def normalize_frames(pair: CompatiblePair) -> CompatiblePair:
    """Swap ``e_i`` and ``e'_i`` wherever ``Q(e_i) = 0`` but ``Q(e'_i) < 0``.

    This puts every genuinely negative vector of a mixed plane into the first
    frame, which the evaluators prefer (the sign kernel attaches to the
    isotropic side).  Returns a revalidated pair.
    """
    lat = pair.lattice
    e_new, ep_new = [], []
    for e, ep in zip(pair.e_frame.vectors, pair.eprime_frame.vectors):
        if lat.q(e) == 0 and lat.q(ep) < 0:
            e_new.append(ep)
            ep_new.append(e)
        else:
            e_new.append(e)
            ep_new.append(ep)
    return validate_compatible_pair(lat, e_new, ep_new)


def find_replacement_vector(
    lat: Lattice,
    pair: CompatiblePair,
    index: int,
    max_height: int = 12,
) -> Vector:
    """Search for a negative vector usable in place of ``e_index``.

    The candidate must satisfy ``Q(v) < 0``, pair nontrivially with both
    ``e_index`` and ``e'_index``, and be B-orthogonal to every other frame
    vector of the pair.  Candidates are enumerated as integer combinations
    (height up to ``max_height``) of an exact basis of that orthogonal
    complement and returned minimal under (coordinate denominator,
    euclidean norm squared, lexicographic coordinates); since the conditions
    are invariant under positive scaling the winner is integral whenever a
    rational solution exists in range.
    """
    e_i = pair.e_frame.vectors[index]
    ep_i = pair.eprime_frame.vectors[index]
    others = [
        v
        for j, v in enumerate(pair.e_frame.vectors)
        if j != index
    ] + [v for j, v in enumerate(pair.eprime_frame.vectors) if j != index]
    if others:
        basis = _perp_basis(lat, as_matrix(others))
    else:
        n = lat.rank
        basis = tuple(
            tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)
        )
    if not basis:
        raise ValueError("orthogonal complement is trivial; no replacement exists")
    # clear denominators so integer combinations sweep integral candidates
    cleared = []
    for v in basis:
        den = 1
        for x in v:
            den = den * x.denominator // math.gcd(den, x.denominator)
        cleared.append(tuple(x * den for x in v))
    best: Vector | None = None
    best_key = None
    for height in range(1, max_height + 1):
        for coeffs in itertools.product(range(-height, height + 1), repeat=len(cleared)):
            if max(abs(c) for c in coeffs) != height:
                continue  # enumerate shell by shell
            cand = tuple(
                sum(c * v[k] for c, v in zip(coeffs, cleared)) for k in range(lat.rank)
            )
            if all(x == 0 for x in cand):
                continue
            if lat.q(cand) >= 0:
                continue
            if lat.b(cand, e_i) == 0 or lat.b(cand, ep_i) == 0:
                continue
            den = 1
            for x in cand:
                den = den * x.denominator // math.gcd(den, x.denominator)
            key = (den, dot(cand, cand), cand)
            if best_key is None or key < best_key:
                best, best_key = cand, key
        if best is not None:
            return best
    raise ValueError(f"no replacement vector found up to height {max_height}")
