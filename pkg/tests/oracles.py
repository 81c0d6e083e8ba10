"""Independent reference computations built with sympy from V(r) alone.

Nothing here imports the package; the circular-orbit determinant is built by
differentiating the truncated energy h = V*(I2) + omega(I2) I1 + t(I2) I1**2 / 2
through the chain rule in r0, with I2(r0) = sqrt(r0**3 V'(r0)).
"""

from functools import lru_cache

import mpmath
import sympy as sp

r, I1 = sp.symbols("r I1", positive=True)


def potential_expr(kind, **p):
    exprs = {
        "homogeneous": lambda k, alpha: k * r**alpha,
        "lennard_jones": lambda a, b: a * r**-12 - b * r**-6,
        "screened_coulomb": lambda k, mu: -k * sp.exp(-mu * r) / r,
    }
    if kind == "power_sum":
        return sum(sp.nsimplify(c) * r**e for c, e in p["terms"])
    return exprs[kind](**{k: sp.nsimplify(v) for k, v in p.items()})


def derivs(V, r0):
    return [float(sp.diff(V, r, n).subs(r, r0)) for n in range(5)]


def pot_terms(V, r0):
    """The seven summands of the fourth-order condition, evaluated one by one."""
    v1, v2, v3 = (sp.diff(V, r, n).subs(r, sp.nsimplify(r0)) for n in (1, 2, 3))
    r0 = sp.nsimplify(r0)
    S = 3 * v1 + r0 * v2
    return [
        -84 * v1 / r0**3,
        32 * v2 / r0**2,
        16 * v3 / r0,
        -8 * v2**2 / (r0 * v1),
        240 * v1**2 / (r0**3 * S),
        -40 * v1 * v3 / (r0 * S),
        5 * r0 * v3**2 / (3 * S),
    ]


@lru_cache(maxsize=None)
def _circular_det_expr(V):
    V1 = sp.diff(V, r)
    I2 = sp.sqrt(r**3 * V1)
    d = lambda f: sp.diff(f, r) / sp.diff(I2, r)  # noqa: E731  (d/dI2 along the circular family)
    Vs = I2**2 / (2 * r**2) + V
    A = 3 * I2**2 / r**4 + sp.diff(V, r, 2)
    B = -12 * I2**2 / r**5 + sp.diff(V, r, 3)
    C = 60 * I2**2 / r**6 + sp.diff(V, r, 4)
    omega = sp.sqrt(A)
    t = (-5 * B**2 + 3 * C * A) / (24 * A**2)
    w2 = d(Vs)
    M = sp.Matrix([[t, d(omega), omega], [d(omega), d(w2), w2], [omega, w2, 0]])
    entries = sp.lambdify(r, M, "mpmath")
    return lambda x: mpmath.det(mpmath.matrix(entries(x)))


def circular_det(V, r0):
    """Bordered determinant of the truncated energy at the circular orbit of radius r0."""
    return float(_circular_det_expr(V)(r0))


def homogeneous_r0(k, alpha, I2):
    return (I2**2 / (k * alpha)) ** (1.0 / (alpha + 2.0))
