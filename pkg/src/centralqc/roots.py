"""Bracketed scalar root finding on monotone or sampled functions."""

import numpy as np
from scipy.optimize import brentq

from .errors import NumericalError

EPS = np.finfo(float).eps


def solve_bracketed(f, a, b, rtol=4 * EPS, xtol=None, maxiter=200):
    """Root of ``f`` in ``[a, b]`` given a sign change; exact zeros at the ends are returned."""
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if not (np.sign(fa) != np.sign(fb)):
        raise NumericalError(f"no sign change on [{a:.17g}, {b:.17g}]: f={fa:.3e}, {fb:.3e}")
    if xtol is None:
        xtol = 4 * EPS * max(abs(a), abs(b)) or 1e-300
    rtol = max(rtol, 4 * EPS)
    try:
        return brentq(f, a, b, xtol=xtol, rtol=rtol, maxiter=maxiter)
    except RuntimeError as exc:
        raise NumericalError(str(exc)) from None


def grid_roots(f, grid, values=None, is_zero=None, xtol=1e-12):
    """Locate roots of ``f`` over a sorted grid.

    Nodes flagged by ``is_zero`` (default: exact zeros) count as roots; a run
    of consecutive zero nodes contributes the node of smallest ``|f|``.  Sign
    changes between adjacent non-zero nodes are refined with Brent's method.
    Returns a sorted list of abscissae.
    """
    grid = np.asarray(grid, dtype=float)
    if values is None:
        values = np.array([f(x) for x in grid])
    values = np.asarray(values, dtype=float)
    zero = values == 0 if is_zero is None else np.asarray(is_zero, dtype=bool)
    roots = []
    i, n = 0, len(grid)
    while i < n:
        if zero[i]:
            j = i
            while j + 1 < n and zero[j + 1]:
                j += 1
            k = i + int(np.argmin(np.abs(values[i:j + 1])))
            roots.append(float(grid[k]))
            i = j + 1
            continue
        if i + 1 < n and not zero[i + 1] and np.sign(values[i]) * np.sign(values[i + 1]) < 0:
            tol = xtol * max(1.0, abs(grid[i]))
            roots.append(float(solve_bracketed(f, grid[i], grid[i + 1], xtol=tol)))
        i += 1
    return roots
