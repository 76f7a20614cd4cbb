"""Shell-sum kernels for indefinite theta evaluation.

Two implementations of the same contract:

``shell_sum_numpy``
    vectorized numpy/scipy reference path;
``shell_sum_numba``
    scalar loops under ``numba.njit`` with compensated accumulation
    (``None`` when numba is unavailable).

``shell_sum`` is the selected backend: numba when importable, unless the
environment variable ``MJF_PURE_NUMPY`` is set to a non-empty value other
than ``0``.

Contract: given integer shell points ``pts`` (n x N), a real ``shift``
(N,), the even Gram matrix ``gram`` (N x N), per-frame-vector rows
``gv = G e_j`` (2P x N, pairs interleaved e_1, e'_1, e_2, e'_2, ...),
``kind`` (2P,) with 0 = erf kernel and 1 = sign kernel, ``scale`` (2P,)
holding ``sqrt(-y / Q(e_j))`` for erf rows, ``voy = Im(z)/y`` (N,),
``x = Re tau``, ``y = Im tau`` and ``gzr = G Re(z)``, ``gzi = G Im(z)``,
return

    ( Re sum, Im sum, sum of |term| )

over terms ``w(nu) exp(2 pi i (Q(nu) tau + B(nu, z)))`` with
``nu = pt + shift`` and ``w = prod_p (rho_{2p} - rho_{2p+1})``,
``rho_j = erf(sqrt(pi) * scale_j * B(e_j, nu + voy))`` or
``sgn(B(e_j, nu + voy))``.
"""

from __future__ import annotations

import math
import os

import numpy as np
from scipy.special import erf as _np_erf

_SQRT_PI = math.sqrt(math.pi)
_TWO_PI = 2.0 * math.pi


def shell_sum_numpy(pts, shift, gram, gv, kind, scale, voy, x, y, gzr, gzi):
    nu = pts.astype(np.float64) + shift
    b = (nu + voy) @ gv.T
    rho = np.where(
        kind == 0,
        _np_erf(_SQRT_PI * scale * b),
        np.sign(b),
    )
    w = np.prod(rho[:, 0::2] - rho[:, 1::2], axis=1)
    qn = 0.5 * np.einsum("ij,jk,ik->i", nu, gram, nu)
    mag = w * np.exp(-_TWO_PI * (qn * y + nu @ gzi))
    ph = _TWO_PI * (qn * x + nu @ gzr)
    return (
        float(np.dot(mag, np.cos(ph))),
        float(np.dot(mag, np.sin(ph))),
        float(np.abs(mag).sum()),
    )


def _shell_sum_scalar(pts, shift, gram, gv, kind, scale, voy, x, y, gzr, gzi):
    n_pts, n_dim = pts.shape
    n_vec = gv.shape[0]
    s_re = 0.0
    c_re = 0.0
    s_im = 0.0
    c_im = 0.0
    s_ab = 0.0
    c_ab = 0.0
    for a in range(n_pts):
        w = 1.0
        for p in range(0, n_vec, 2):
            rho_pair = 0.0
            for side in range(2):
                j = p + side
                bj = 0.0
                for t in range(n_dim):
                    bj += gv[j, t] * (pts[a, t] + shift[t] + voy[t])
                if kind[j] == 0:
                    r = math.erf(_SQRT_PI * scale[j] * bj)
                else:
                    r = 0.0 if bj == 0.0 else (1.0 if bj > 0.0 else -1.0)
                if side == 0:
                    rho_pair = r
                else:
                    rho_pair -= r
            w *= rho_pair
        if w == 0.0:
            continue
        qn = 0.0
        br = 0.0
        bi = 0.0
        for t in range(n_dim):
            nut = pts[a, t] + shift[t]
            row = 0.0
            for u in range(n_dim):
                row += gram[t, u] * (pts[a, u] + shift[u])
            qn += 0.5 * nut * row
            br += nut * gzr[t]
            bi += nut * gzi[t]
        mag = w * math.exp(-_TWO_PI * (qn * y + bi))
        ph = _TWO_PI * (qn * x + br)
        tre = mag * math.cos(ph)
        tim = mag * math.sin(ph)
        tab = abs(mag)
        # Kahan-compensated accumulation
        yy = tre - c_re
        tt = s_re + yy
        c_re = (tt - s_re) - yy
        s_re = tt
        yy = tim - c_im
        tt = s_im + yy
        c_im = (tt - s_im) - yy
        s_im = tt
        yy = tab - c_ab
        tt = s_ab + yy
        c_ab = (tt - s_ab) - yy
        s_ab = tt
    return s_re, s_im, s_ab


def _want_pure_numpy() -> bool:
    return os.environ.get("MJF_PURE_NUMPY", "0") not in ("", "0")


try:  # pragma: no cover - exercised via backend_name()
    from numba import njit

    shell_sum_numba = njit(cache=True)(_shell_sum_scalar)
    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    shell_sum_numba = None
    NUMBA_AVAILABLE = False

if NUMBA_AVAILABLE and not _want_pure_numpy():
    shell_sum = shell_sum_numba
    BACKEND = "numba"
else:
    shell_sum = shell_sum_numpy
    BACKEND = "numpy"


def backend_name() -> str:
    return BACKEND
