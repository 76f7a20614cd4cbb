"""Covariant differential operators applied through Wirtinger stencils.

The operators of the Jacobi group in weight ``k`` and index ``L`` (the
half-Gram ``G/2`` of a :class:`~mjforms.lattice.Lattice`) are assembled
from finite-difference approximations of the Wirtinger derivatives

    d/dtau = (d/dx - i d/dy) / 2,      d/dtaubar = (d/dx + i d/dy) / 2,

and likewise for every elliptic coordinate.  All stencils are central,
with exact rational weights obtained from the Vandermonde system, and
every derivative carries a predicted error ``roundoff + truncation``
under a unit-scale assumption on the higher derivatives.  Annihilation
checks therefore never compare against a bare epsilon: the pass
threshold is a fixed multiple of the predicted stencil error and an
h-sweep confirms the expected convergence order.

Degenerate indices are supported throughout: the operators only ever
use the projection ``pi_nd`` onto the orthogonal complement of the
kernel of ``L`` and the pseudo-inverse with the matching kernel, both
computed exactly in rational arithmetic.

The Heisenberg Laplacian is
``y d_{z_e} d_{zbar_e} + 4 pi i L[e] v_e d_{zbar_e}`` for a unit frame
vector orthogonal to the rest of the frame; the first-order coefficient
is the bilinear pairing ``<pi_nd v, e>`` of the index form (twice the
bare matrix product), which is pinned by three independent facts: it is
the composition ``Y_{+,e} Y_{-,e}``, it annihilates the nonholomorphic
Fourier blocks, and it reproduces the weight-``1/2`` Laplace transport
equation for radial profiles ``a(v_e^2/y)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .lattice import Lattice, Matrix, as_matrix, mat_det, mat_inv

_EPS_MACH = float(np.finfo(np.float64).eps)
TWO_PI_I = 2j * math.pi

OPERATOR_IDS = (
    "Xminus",
    "Xplus",
    "Yminus_e",
    "Yplus_e",
    "Laplacian_k",
    "Casimir",
    "HeisLaplacian_e",
    "Heat",
    "HeatE",
    "Xi",
    "XiE",
    "XiHE",
)

_NEEDS_WEIGHT = {"Xplus", "Laplacian_k", "Casimir", "Xi", "XiE"}
_NEEDS_LATTICE = {
    "Xminus",
    "Xplus",
    "Yplus_e",
    "Casimir",
    "HeisLaplacian_e",
    "Heat",
    "HeatE",
    "Xi",
    "XiE",
    "XiHE",
}
_NEEDS_ONE_VECTOR = {"Yminus_e", "Yplus_e", "HeisLaplacian_e"}
_NEEDS_FRAME = {"HeatE", "XiE", "XiHE"}


# ---------------------------------------------------------------------------
# exact rational linear algebra for (possibly degenerate) indices


def _rational_pseudo_inverse(lmat: Matrix) -> tuple[Matrix, Matrix]:
    """``(L^+, pi_nd)`` for a symmetric rational matrix.

    ``L^+`` satisfies ``L L^+ = L^+ L = pi_nd`` with ``pi_nd`` the euclidean
    orthogonal projection onto the column space of ``L`` (the complement of
    the kernel), which is exactly the printed requirement on the
    pseudo-inverted index.
    """
    n = len(lmat)
    cols = [tuple(lmat[i][j] for i in range(n)) for j in range(n)]
    # independent columns via fraction-exact elimination
    basis: list[tuple[Fraction, ...]] = []
    picked: list[int] = []
    work: list[list[Fraction]] = []
    for j, col in enumerate(cols):
        row = [Fraction(x) for x in col]
        for prev in work:
            piv = next(i for i, x in enumerate(prev) if x != 0)
            if row[piv] != 0:
                f = row[piv] / prev[piv]
                row = [a - f * b for a, b in zip(row, prev)]
        if any(x != 0 for x in row):
            work.append(row)
            picked.append(j)
            basis.append(col)
    if not picked:
        zero = as_matrix([[Fraction(0)] * n for _ in range(n)])
        return zero, zero
    c = as_matrix([[basis[k][i] for k in range(len(picked))] for i in range(n)])
    # core = C^T L C, invertible on the column space
    ct_l = [
        [sum(c[i][a] * lmat[i][j] for i in range(n)) for j in range(n)]
        for a in range(len(picked))
    ]
    core = as_matrix(
        [[sum(ct_l[a][j] * c[j][b] for j in range(n)) for b in range(len(picked))] for a in range(len(picked))]
    )
    if mat_det(core) == 0:
        raise ValueError("index restricted to its column space is singular")
    core_inv = mat_inv(core)
    m = len(picked)
    lplus = as_matrix(
        [
            [
                sum(c[i][a] * core_inv[a][b] * c[j][b] for a in range(m) for b in range(m))
                for j in range(n)
            ]
            for i in range(n)
        ]
    )
    pnd = as_matrix(
        [
            [sum(lplus[i][kk] * lmat[kk][j] for kk in range(n)) for j in range(n)]
            for i in range(n)
        ]
    )
    return lplus, pnd


@lru_cache(maxsize=64)
def _index_data(gram: tuple) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """float ``(L, L^+, pi_nd)`` for a gram tuple; ``L = G/2``."""
    lmat = as_matrix([[Fraction(x) / 2 for x in row] for row in gram])
    lplus, pnd = _rational_pseudo_inverse(lmat)
    to_np = lambda m: np.array([[float(x) for x in row] for row in m], dtype=np.float64)
    return to_np(lmat), to_np(lplus), to_np(pnd)


# ---------------------------------------------------------------------------
# stencils


@lru_cache(maxsize=None)
def _stencil(d: int, order: int) -> tuple[tuple[int, ...], tuple[Fraction, ...]]:
    """Central nodes and exact unit-step weights for the ``d``-th derivative."""
    if d == 0:
        return (0,), (Fraction(1),)
    n = d + order - 1
    if n % 2 == 0:
        n += 1
    half = n // 2
    nodes = tuple(range(-half, half + 1))
    vand = as_matrix([[Fraction(node) ** k for node in nodes] for k in range(n)])
    inv = mat_inv(vand)
    fact = Fraction(math.factorial(d))
    weights = tuple(inv[j][d] * fact for j in range(n))
    return nodes, weights


@dataclass(frozen=True)
class StencilConfig:
    """Finite-difference policy: accuracy order, step sizes, pass threshold.

    With ``h`` unset, the step for a real axis carrying derivatives up to
    order ``d`` is ``eps_mach^(1/(order + d))`` scaled by the magnitude of
    the coordinate, the usual truncation/roundoff balance (``eps^(1/5)``
    for first derivatives at order 4).  ``h_tau`` / ``h_z`` override per
    variable.  ``tol_factor`` multiplies the predicted stencil error to
    produce the pass threshold of annihilation checks; operators combine
    of the order of ten derivative terms, hence the generous default.
    """

    order: int = 4
    h: float | None = None
    h_tau: float | None = None
    h_z: float | tuple[float, ...] | None = None
    tol_factor: float = 1e3

    def __post_init__(self):
        if self.order not in (2, 4):
            raise ValueError("stencil order must be 2 or 4")
        for val in (self.h, self.h_tau):
            if val is not None and not val > 0:
                raise ValueError("stencil steps must be positive")

    def step(self, kind: str, center: complex, max_order: int, j: int = 0) -> float:
        if kind == "tau" and self.h_tau is not None:
            return self.h_tau
        if kind == "z" and self.h_z is not None:
            hz = self.h_z
            if isinstance(hz, (tuple, list)):
                return float(hz[j])
            return float(hz)
        base = self.h if self.h is not None else _EPS_MACH ** (1.0 / (self.order + max_order))
        return base * max(1.0, abs(center))


DEFAULT_STENCIL = StencilConfig()


def _wirtinger_coeffs(a: int, b: int) -> dict[tuple[int, int], complex]:
    """Expansion of ``d_w^a d_wbar^b`` into real partials ``d_x^p d_y^q``."""
    out: dict[tuple[int, int], complex] = {}
    for i in range(a + 1):
        for j in range(b + 1):
            key = (i + j, (a - i) + (b - j))
            coef = (
                0.5 ** (a + b)
                * math.comb(a, i)
                * math.comb(b, j)
                * (-1j) ** (a - i)
                * 1j ** (b - j)
            )
            out[key] = out.get(key, 0j) + coef
    return out


class _StencilEvaluator:
    """Caching tensor-product stencil evaluator around one base point.

    Axes are ordered ``taux, tauy, z0x, z0y, z1x, ...``; the step of each
    axis is fixed up front from the maximal derivative order the caller
    will request on it, so that cached samples stay consistent.
    """

    def __init__(self, phi, tau: complex, z: np.ndarray, cfg: StencilConfig, axis_orders):
        self.phi = phi
        self.tau = complex(tau)
        self.z = np.asarray(z, dtype=complex)
        self.cfg = cfg
        n = self.z.shape[0]
        self.n = n
        self.steps = np.empty(2 * n + 2)
        self.steps[0] = self.steps[1] = cfg.step("tau", self.tau, max(axis_orders[0], axis_orders[1], 1))
        for j in range(n):
            d = max(axis_orders[2 + 2 * j], axis_orders[3 + 2 * j], 1)
            self.steps[2 + 2 * j] = self.steps[3 + 2 * j] = cfg.step("z", self.z[j], d, j)
        self.cache: dict[tuple[int, ...], complex] = {}
        self.max_abs = 0.0

    def _sample(self, offsets: tuple[int, ...]) -> complex:
        val = self.cache.get(offsets)
        if val is None:
            dt = (offsets[0] + 1j * offsets[1]) * self.steps[0]
            zz = self.z.copy()
            for j in range(self.n):
                zz[j] += (offsets[2 + 2 * j] + 1j * offsets[3 + 2 * j]) * self.steps[2 + 2 * j]
            try:
                val = complex(self.phi(self.tau + dt, zz))
            except ZeroDivisionError as exc:
                raise ZeroDivisionError(
                    f"stencil node at offsets {offsets} touches a singularity: {exc}"
                ) from exc
            if not (math.isfinite(val.real) and math.isfinite(val.imag)):
                raise ValueError(f"function value at stencil offsets {offsets} is not finite")
            self.cache[offsets] = val
            if abs(val) > self.max_abs:
                self.max_abs = abs(val)
        return val

    def real_partial(self, orders: tuple[int, ...]) -> tuple[complex, float]:
        active = [(ax, d) for ax, d in enumerate(orders) if d > 0]
        node_sets = []
        weight_sets = []
        wsum = 1.0
        for ax, d in active:
            nodes, weights = _stencil(d, self.cfg.order)
            h = self.steps[ax]
            fweights = [float(w) / h**d for w in weights]
            node_sets.append([(ax, node) for node in nodes])
            weight_sets.append(fweights)
            wsum *= sum(abs(w) for w in fweights)
        total = 0j
        base = [0] * len(orders)
        for combo in itertools.product(*[range(len(ns)) for ns in node_sets]) if active else [()]:
            offs = list(base)
            w = 1.0
            for pick, (ns, ws) in zip(combo, zip(node_sets, weight_sets)):
                ax, node = ns[pick]
                offs[ax] = node
                w *= ws[pick]
            total += w * self._sample(tuple(offs))
        scale = max(self.max_abs, 1e-300)
        roundoff = _EPS_MACH * scale * (wsum if active else 1.0)
        # truncation under a local-frequency model: |D^d phi| ~ M omega^d
        # pins omega, and the neglected term is |D| (omega h)^order
        trunc = 0.0
        if active and total != 0:
            d_tot = sum(d for _, d in active)
            h_abs = max(self.steps[ax] for ax, _ in active)
            omega = (abs(total) / scale) ** (1.0 / d_tot)
            trunc = abs(total) * min(1.0, omega * h_abs) ** self.cfg.order
        return total, roundoff + trunc

    def wirtinger(self, dt: int, dtb: int, dz: tuple[int, ...], dzb: tuple[int, ...]) -> tuple[complex, float]:
        per_var = [_wirtinger_coeffs(dt, dtb)]
        for j in range(self.n):
            per_var.append(_wirtinger_coeffs(dz[j], dzb[j]))
        value = 0j
        err = 0.0
        for combo in itertools.product(*[list(d.items()) for d in per_var]):
            orders = []
            coef = 1 + 0j
            for (pq, c) in combo:
                orders.extend(pq)
                coef *= c
            if coef == 0:
                continue
            val, e = self.real_partial(tuple(orders))
            value += coef * val
            err += abs(coef) * e
        return value, err


def _axis_orders_for(n: int, partials) -> list[int]:
    """Maximal real-derivative order per axis over a set of Wirtinger keys."""
    orders = [0] * (2 * n + 2)
    for dt, dtb, dz, dzb in partials:
        orders[0] = max(orders[0], dt + dtb)
        orders[1] = max(orders[1], dt + dtb)
        for j in range(n):
            tot = dz[j] + dzb[j]
            orders[2 + 2 * j] = max(orders[2 + 2 * j], tot)
            orders[3 + 2 * j] = max(orders[3 + 2 * j], tot)
    return orders


def _parse_partial(key: str, n: int) -> tuple[int, int, tuple[int, ...], tuple[int, ...]]:
    dt = dtb = 0
    dz = [0] * n
    dzb = [0] * n
    for atom in key.split(","):
        atom = atom.strip()
        if atom == "tau":
            dt += 1
        elif atom == "taubar":
            dtb += 1
        elif atom.startswith("zbar"):
            dzb[int(atom[4:] or 0)] += 1
        elif atom.startswith("z"):
            dz[int(atom[1:] or 0)] += 1
        else:
            raise ValueError(f"unknown partial {atom!r}")
    return dt, dtb, tuple(dz), tuple(dzb)


def wirtinger_derivs(
    phi,
    tau,
    z,
    which,
    cfg: StencilConfig = DEFAULT_STENCIL,
    with_errors: bool = False,
):
    """Table of Wirtinger partials of ``phi`` at ``(tau, z)``.

    ``which`` is an iterable of keys such as ``"tau"``, ``"taubar"``,
    ``"z0"``, ``"zbar1"`` or comma-joined products like
    ``"tau,zbar0"`` and ``"z0,z0,zbar0,zbar0"`` (order of the atoms is
    irrelevant; mixed partials commute).  With ``with_errors`` the result
    maps each key to ``(value, predicted_error)`` instead of the bare
    value; the prediction is roundoff plus an order-``cfg.order``
    truncation term under a unit-scale assumption on higher derivatives.
    """
    zv = np.atleast_1d(np.asarray(z, dtype=complex))
    keys = list(which)
    parsed = [_parse_partial(k, zv.shape[0]) for k in keys]
    ev = _StencilEvaluator(phi, tau, zv, cfg, _axis_orders_for(zv.shape[0], parsed))
    out = {}
    for key, (dt, dtb, dz, dzb) in zip(keys, parsed):
        val, err = ev.wirtinger(dt, dtb, dz, dzb)
        out[key] = (val, err) if with_errors else val
    return out


# ---------------------------------------------------------------------------
# operator specifications


@dataclass(frozen=True)
class OperatorSpec:
    """A covariant operator: identifier plus the parameters it requires.

    ``frame`` carries the distinguished vector(s): exactly one for the
    ``_e`` operators, a partial frame for ``HeatE``/``XiE``/``XiHE``.
    Vectors are normalized to unit euclidean length internally (the
    coordinate functions ``v_e`` pair against unit vectors).  ``XiHE``
    additionally requires the index to be negative definite along the
    frame and to split off its span.
    """

    id: str
    weight: float | Fraction | None = None
    lattice: Lattice | None = None
    frame: tuple = ()

    def __post_init__(self):
        if self.id not in OPERATOR_IDS:
            raise ValueError(f"unknown operator id {self.id!r}")
        if self.id in _NEEDS_WEIGHT and self.weight is None:
            raise ValueError(f"{self.id} requires a weight")
        if self.id in _NEEDS_LATTICE and self.lattice is None:
            raise ValueError(f"{self.id} requires an index lattice")
        vecs = tuple(tuple(float(x) for x in v) for v in self.frame)
        if self.id in _NEEDS_ONE_VECTOR and len(vecs) != 1:
            raise ValueError(f"{self.id} requires exactly one frame vector")
        if self.id in _NEEDS_FRAME and not vecs:
            raise ValueError(f"{self.id} requires a partial frame")
        for v in vecs:
            if not any(v):
                raise ValueError("frame vectors must be nonzero")
        if self.lattice is not None and vecs:
            n = self.lattice.rank
            if any(len(v) != n for v in vecs):
                raise ValueError("frame vectors must match the lattice rank")
        object.__setattr__(self, "frame", vecs)
        if self.id == "XiHE":
            self._check_negative_split()
        if self.id in ("HeatE", "XiE"):
            me = self._frame_gram()
            if abs(np.linalg.det(me)) < 1e-12:
                raise ValueError("index restricted to the frame is degenerate")

    def _unit_frame(self) -> np.ndarray:
        e = np.array(self.frame, dtype=float)
        return e / np.linalg.norm(e, axis=1)[:, None]

    def _frame_gram(self) -> np.ndarray:
        lf, _, _ = _index_data(self.lattice.gram)
        e = self._unit_frame()
        return e @ lf @ e.T

    def _check_negative_split(self):
        lf, _, _ = _index_data(self.lattice.gram)
        e = self._unit_frame()
        me = e @ lf @ e.T
        if np.any(np.linalg.eigvalsh(me) >= -1e-12):
            raise ValueError("XiHE requires the index to be negative definite along the frame")
        # block splitting: L e must stay in span(E)
        img = lf @ e.T
        coef, *_ = np.linalg.lstsq(e.T, img, rcond=None)
        if np.linalg.norm(e.T @ coef - img) > 1e-10 * max(1.0, np.linalg.norm(img)):
            raise ValueError("XiHE requires the index to split along the frame")


def _operator_terms(op: OperatorSpec, tau: complex, z: np.ndarray):
    """``(terms, post)`` where terms are ``(coef, (dt, dtb, dz, dzb))``.

    ``post(value)`` applies the outer antilinear part of the xi operators
    (power of y, conjugation); it is the identity elsewhere.
    """
    n = z.shape[0]
    y = tau.imag
    v = z.imag
    if y <= 0:
        raise ValueError("tau must lie in the upper half plane")
    k = float(op.weight) if op.weight is not None else None
    if op.lattice is not None:
        if op.lattice.rank != n:
            raise ValueError("lattice rank does not match the number of elliptic variables")
        lf, lplus, pnd = _index_data(op.lattice.gram)
        linv = lplus / TWO_PI_I  # inverse of 2 pi i L on the non-degenerate part
        pv = pnd @ v
    e_j = lambda j: tuple(1 if i == j else 0 for i in range(n))
    zero = (0,) * n
    terms: list[tuple[complex, tuple]] = []
    post = None

    def unit(idx: int = 0) -> np.ndarray:
        e = np.array(op.frame[idx], dtype=float)
        return e / np.linalg.norm(e)

    def add(coef: complex, dt=0, dtb=0, dz=zero, dzb=zero):
        if coef != 0:
            terms.append((coef, (dt, dtb, tuple(dz), tuple(dzb))))

    def add_xminus():
        add(-2j * y * y, dtb=1)
        for j in range(n):
            add(-2j * y * pv[j], dzb=e_j(j))

    if op.id == "Xminus":
        add_xminus()
    elif op.id == "Xplus":
        add(2j, dt=1)
        for j in range(n):
            add(2j * v[j] / y, dz=e_j(j))
        quad = TWO_PI_I * float(pv @ lf @ pv)  # value of the index form at pi_nd v
        add(2j * quad / y**2 + k / y)
    elif op.id == "Yminus_e":
        e = unit()
        for j in range(n):
            add(-1j * y * e[j], dzb=e_j(j))
    elif op.id == "Yplus_e":
        e = unit()
        for j in range(n):
            add(1j * e[j], dz=e_j(j))
        add(2j * TWO_PI_I / y * float(e @ lf @ pv))
    elif op.id == "Laplacian_k":
        add(4 * y * y, dt=1, dtb=1)
        add(-2j * k * y, dtb=1)
    elif op.id == "Heat":
        add(2, dt=1)
        for j in range(n):
            for l in range(n):
                add(-0.5 * linv[j][l], dz=tuple(a + b for a, b in zip(e_j(j), e_j(l))))
    elif op.id == "HeatE":
        add(2, dt=1)
        e = op._unit_frame()
        me_inv = np.linalg.inv(e @ lf @ e.T) / TWO_PI_I
        for a in range(len(op.frame)):
            for b in range(len(op.frame)):
                for j in range(n):
                    for l in range(n):
                        add(
                            -0.5 * me_inv[a][b] * e[a][j] * e[b][l],
                            dz=tuple(x + w for x, w in zip(e_j(j), e_j(l))),
                        )
    elif op.id == "HeisLaplacian_e":
        e = unit()
        for j in range(n):
            for l in range(n):
                add(y * e[j] * e[l], dz=e_j(j), dzb=e_j(l))
        coef = 2.0 * TWO_PI_I * float(pv @ lf @ e)  # index-form pairing <pi_nd v, e>
        for j in range(n):
            add(coef * e[j], dzb=e_j(j))
    elif op.id == "Casimir":
        # the first-order elliptic slots pair d_zbar against the
        # real-coordinate derivative d_u = d_z + d_zbar; reading them as
        # d_z alone breaks the kernel of the operator on every Fourier
        # block with a nonzero elliptic index
        kk = k - n / 2.0
        add(-8 * y * y, dt=1, dtb=1)
        add(4j * kk * y, dtb=1)
        for j in range(n):
            for l in range(n):
                pair = tuple(a + b for a, b in zip(e_j(j), e_j(l)))
                add(2 * y * y * linv[j][l], dtb=1, dz=pair)
                add(2 * y * y * linv[j][l], dt=1, dzb=pair)
                add(-0.5j * (2 * k - n + 1) * y * linv[j][l], dz=e_j(l), dzb=e_j(j))
                add(-0.5j * (2 * k - n + 1) * y * linv[j][l], dzb=tuple(a + b for a, b in zip(e_j(j), e_j(l))))
        for j in range(n):
            add(-8 * y * pv[j], dt=1, dzb=e_j(j))
            add(1j * (2 * k - n - 1) * pv[j], dzb=e_j(j))
            for l in range(n):
                add(2 * pv[j] * pv[l], dzb=tuple(a + b for a, b in zip(e_j(j), e_j(l))))
                for a in range(n):
                    add(
                        2 * y * pv[j] * linv[l][a],
                        dz=tuple(x + w for x, w in zip(e_j(l), e_j(a))),
                        dzb=e_j(j),
                    )
                    add(
                        2 * y * pv[j] * linv[l][a],
                        dz=e_j(l),
                        dzb=tuple(x + w for x, w in zip(e_j(j), e_j(a))),
                    )
        # order-four bracket: -(y^2/2) (Linv[d_zbar] Linv[d_z] - (d_zbar^T Linv d_z)^2)
        for j in range(n):
            for l in range(n):
                for a in range(n):
                    for b in range(n):
                        coef = -0.5 * y * y * (linv[j][l] * linv[a][b] - linv[j][a] * linv[l][b])
                        if coef != 0:
                            add(
                                coef,
                                dz=tuple(x + w for x, w in zip(e_j(a), e_j(b))),
                                dzb=tuple(x + w for x, w in zip(e_j(j), e_j(l))),
                            )
    elif op.id == "Xi":
        add_xminus()
        for j in range(n):
            for l in range(n):
                add(0.5j * y * y * linv[j][l], dzb=tuple(a + b for a, b in zip(e_j(j), e_j(l))))
        pw = y ** (k - 2 - n / 2.0)
        post = lambda val: (pw * val).conjugate()
    elif op.id == "XiE":
        add_xminus()
        e = op._unit_frame()
        me_inv = np.linalg.inv(e @ lf @ e.T) / TWO_PI_I
        for a in range(len(op.frame)):
            for b in range(len(op.frame)):
                for j in range(n):
                    for l in range(n):
                        add(
                            0.5j * y * y * me_inv[a][b] * e[a][j] * e[b][l],
                            dzb=tuple(x + w for x, w in zip(e_j(j), e_j(l))),
                        )
        pw = y ** (k - 2 - n / 2.0)
        post = lambda val: (pw * val).conjugate()
    elif op.id == "XiHE":
        e = op._unit_frame()
        m = len(op.frame)
        ve = e.T @ (e @ v)  # v_E as an ambient vector
        pref = y ** (-m / 2.0) * math.exp(-4.0 * math.pi * float(ve @ lf @ ve) / y)
        for combo in itertools.product(range(n), repeat=m):
            coef = pref * (-1j * y) ** m
            dzb = [0] * n
            for row, j in enumerate(combo):
                coef *= e[row][j]
                dzb[j] += 1
            add(coef, dzb=tuple(dzb))
    else:  # pragma: no cover - guarded by OperatorSpec
        raise AssertionError(op.id)
    return terms, post


def _apply_with_error(op: OperatorSpec, phi, tau, z, cfg: StencilConfig):
    """``(value, predicted_error, scale)`` of ``op phi`` at one point."""
    zv = np.atleast_1d(np.asarray(z, dtype=complex))
    terms, post = _operator_terms(op, complex(tau), zv)
    ev = _StencilEvaluator(phi, tau, zv, cfg, _axis_orders_for(zv.shape[0], [t[1] for t in terms]))
    value = 0j
    err = 0.0
    scale = 0.0
    for coef, (dt, dtb, dz, dzb) in terms:
        val, e = ev.wirtinger(dt, dtb, dz, dzb)
        value += coef * val
        err += abs(coef) * e
        scale += abs(coef * val)
    if post is not None:
        value = post(value)
        # the outer factor is |.|-homogeneous, so the error and the term
        # scale rescale by the same positive amount
        factor = abs(post(1.0))
        err *= factor
        scale *= factor
    return value, err, scale


def apply_operator(op: OperatorSpec, phi, p, cfg: StencilConfig = DEFAULT_STENCIL) -> complex:
    """Apply a covariant operator to ``phi`` at the point ``p = (tau, z)``."""
    tau, z = p
    value, _err, _scale = _apply_with_error(op, phi, tau, z, cfg)
    return value


def check_annihilation(op: OperatorSpec, phi, points, cfg: StencilConfig = DEFAULT_STENCIL) -> dict:
    """Does ``op`` annihilate ``phi``?  JSON-ready report with an h-sweep.

    For every point the operator is applied at steps ``(4h, 2h, h)``; a
    point passes when its smallest residual ``|op phi|`` stays below
    ``cfg.tol_factor`` times the predicted stencil error at that step.
    The sweep either contracts at the stencil's convergence order or has
    already reached the roundoff floor (the smallest step passes on its
    own); one of the two is required for the point to count.  Relative
    residuals against the summed magnitude of the operator's terms are
    reported for context.
    """
    factors = (4.0, 2.0, 1.0)
    records = []
    all_pass = True
    for tau, z in points:
        zv = np.atleast_1d(np.asarray(z, dtype=complex))
        residuals = []
        rels = []
        thresholds = []
        passes = []
        for f in factors:
            terms, _post = _operator_terms(op, complex(tau), zv)
            orders = _axis_orders_for(zv.shape[0], [t[1] for t in terms])
            # resolve the per-axis default step, then scale the whole grid
            probe = _StencilEvaluator(lambda *_a: 0j, tau, zv, cfg, orders)
            scaled = StencilConfig(
                order=cfg.order,
                h_tau=float(probe.steps[0]) * f,
                h_z=tuple(float(probe.steps[2 + 2 * j]) * f for j in range(zv.shape[0])),
                tol_factor=cfg.tol_factor,
            )
            value, err, scale = _apply_with_error(op, phi, tau, zv, scaled)
            residuals.append(abs(value))
            rels.append(abs(value) / max(scale, 1e-300))
            thresholds.append(cfg.tol_factor * err)
            passes.append(abs(value) <= cfg.tol_factor * err)
        ratios = [residuals[i] / residuals[i + 1] if residuals[i + 1] else math.inf for i in range(len(factors) - 1)]
        converged = any(r >= 2 ** (cfg.order - 1) for r in ratios) or passes[-1]
        best = min(range(len(factors)), key=lambda i: residuals[i])
        point_pass = passes[best] and converged
        all_pass = all_pass and point_pass
        records.append(
            {
                "tau": [tau.real, tau.imag] if isinstance(tau, complex) else [float(tau), 0.0],
                "z": [[w.real, w.imag] for w in zv],
                "h_factors": list(factors),
                "residuals": residuals,
                "relative_residuals": rels,
                "thresholds": thresholds,
                "convergence_ratios": ratios,
                "converged": converged,
                "pass": point_pass,
            }
        )
    return {
        "operator": op.id,
        "stencil_order": cfg.order,
        "points": records,
        "pass": all_pass,
    }
