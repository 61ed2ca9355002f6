"""Hot numeric kernels with twin implementations.

Every kernel here exists twice: a numba ``@njit`` version and a pure-numpy
version. The active backend is chosen at import time from the environment
variable ``CA_RESERVOIR_DISABLE_NUMBA`` (any value other than ``""``/``"0"``
forces the numpy path) and can be switched at runtime with
:func:`set_backend`, which the benchmark uses to time both paths in one
process. Both implementations are bit-for-bit equivalent; the test suite
checks them against each other.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .errors import ParameterError

_DISABLE_ENV = "CA_RESERVOIR_DISABLE_NUMBA"

try:
    from numba import njit as _njit

    _NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _NUMBA_AVAILABLE = False

    def _njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap(args[0]) if args and callable(args[0]) else wrap


_active = "numpy"
if _NUMBA_AVAILABLE and os.environ.get(_DISABLE_ENV, "0") in ("", "0"):
    _active = "numba"


def active_backend() -> str:
    """Name of the backend currently dispatching kernels."""
    return _active


def set_backend(name: str) -> None:
    """Select ``"numba"`` or ``"numpy"`` for subsequent kernel calls."""
    global _active
    if name not in ("numba", "numpy"):
        raise ParameterError(f"unknown backend {name!r}")
    if name == "numba" and not _NUMBA_AVAILABLE:
        raise ParameterError("numba backend requested but numba is not importable")
    _active = name


# --------------------------------------------------------------------------
# Elementary CA evolution (batch of ring states, all iterates collected)
# --------------------------------------------------------------------------


@_njit(cache=True)
def _eca_evolve_nb(states, table, iters):
    b, n = states.shape
    out = np.empty((iters, b, n), dtype=np.uint8)
    cur = states
    for it in range(iters):
        for r in range(b):
            c = cur[r]
            o = out[it, r]
            for j in range(n):
                lj = c[j - 1] if j > 0 else c[n - 1]
                rj = c[j + 1] if j < n - 1 else c[0]
                o[j] = table[4 * lj + 2 * c[j] + rj]
        cur = out[it]
    return out


def _eca_evolve_np(states, table, iters):
    out = np.empty((iters,) + states.shape, dtype=np.uint8)
    s = states
    for it in range(iters):
        idx = 4 * np.roll(s, 1, axis=1) + 2 * s + np.roll(s, -1, axis=1)
        s = table[idx]
        out[it] = s
    return out


def eca_evolve(states: np.ndarray, table: np.ndarray, iters: int) -> np.ndarray:
    """Evolve a batch of ring states for ``iters`` steps.

    states: (batch, n) uint8 in {0,1}; table: length-8 uint8 lookup indexed by
    the neighborhood code 4*left + 2*center + right. Returns the stacked
    iterates A_1..A_iters with shape (iters, batch, n); A_0 is not included.
    """
    states = np.ascontiguousarray(states, dtype=np.uint8)
    table = np.ascontiguousarray(table, dtype=np.uint8)
    if _active == "numba":
        return _eca_evolve_nb(states, table, iters)
    return _eca_evolve_np(states, table, iters)


# --------------------------------------------------------------------------
# Game of Life evolution (batch of toroidal boards, all iterates collected)
# --------------------------------------------------------------------------


@_njit(cache=True)
def _life_evolve_nb(boards, iters):
    b, h, w = boards.shape
    out = np.empty((iters, b, h, w), dtype=np.uint8)
    cur = boards
    for it in range(iters):
        for k in range(b):
            g = cur[k]
            o = out[it, k]
            for y in range(h):
                ym = y - 1 if y > 0 else h - 1
                yp = y + 1 if y < h - 1 else 0
                for x in range(w):
                    xm = x - 1 if x > 0 else w - 1
                    xp = x + 1 if x < w - 1 else 0
                    n = (
                        g[ym, xm]
                        + g[ym, x]
                        + g[ym, xp]
                        + g[y, xm]
                        + g[y, xp]
                        + g[yp, xm]
                        + g[yp, x]
                        + g[yp, xp]
                    )
                    o[y, x] = 1 if n == 3 or (n == 2 and g[y, x] == 1) else 0
        cur = out[it]
    return out


def _life_evolve_np(boards, iters):
    out = np.empty((iters,) + boards.shape, dtype=np.uint8)
    s = boards
    for it in range(iters):
        n = np.zeros(s.shape, dtype=np.uint8)
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dy == 0 and dx == 0:
                    continue
                n += np.roll(np.roll(s, dy, axis=1), dx, axis=2)
        s = ((n == 3) | ((s == 1) & (n == 2))).astype(np.uint8)
        out[it] = s
    return out


def life_evolve(boards: np.ndarray, iters: int) -> np.ndarray:
    """Evolve a batch of B3/S23 boards on a torus for ``iters`` steps.

    boards: (batch, rows, cols) uint8 in {0,1}. Returns iterates with shape
    (iters, batch, rows, cols); the initial boards are not included.
    """
    boards = np.ascontiguousarray(boards, dtype=np.uint8)
    if _active == "numba":
        return _life_evolve_nb(boards, iters)
    return _life_evolve_np(boards, iters)


# --------------------------------------------------------------------------
# Cyclic Jacobi eigenvalue sweeps for symmetric matrices
# --------------------------------------------------------------------------


@_njit(cache=True)
def _jacobi_nb(a, tol, max_sweeps):
    n = a.shape[0]
    sweeps = 0
    while sweeps < max_sweeps:
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                v = abs(a[p, q])
                if v > off:
                    off = v
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                app = a[p, p]
                aqq = a[q, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for i in range(n):
                    if i != p and i != q:
                        aip = a[i, p]
                        aiq = a[i, q]
                        a[i, p] = c * aip - s * aiq
                        a[i, q] = s * aip + c * aiq
                        a[p, i] = a[i, p]
                        a[q, i] = a[i, q]
        sweeps += 1
    return sweeps


def _jacobi_np(a, tol, max_sweeps):
    n = a.shape[0]
    sweeps = 0
    idx = np.arange(n)
    while sweeps < max_sweeps:
        off = np.abs(a - np.diag(np.diag(a))).max() if n > 1 else 0.0
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                app, aqq = a[p, p], a[q, q]
                rows = idx[(idx != p) & (idx != q)]
                aip = a[rows, p].copy()
                aiq = a[rows, q].copy()
                a[rows, p] = c * aip - s * aiq
                a[rows, q] = s * aip + c * aiq
                a[p, rows] = a[rows, p]
                a[q, rows] = a[rows, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
        sweeps += 1
    return sweeps


def jacobi_sweeps(a: np.ndarray, tol: float, max_sweeps: int) -> int:
    """Run cyclic Jacobi rotations in place until the largest off-diagonal
    magnitude drops to ``tol`` or ``max_sweeps`` full sweeps have run.

    ``a`` must be a symmetric float64 matrix; on return its diagonal holds the
    eigenvalues. Returns the number of sweeps performed.
    """
    if _active == "numba":
        return _jacobi_nb(a, tol, max_sweeps)
    return _jacobi_np(a, tol, max_sweeps)
