"""Numerical action map ``(I1, I2) -> E`` of the central-force problem.

``I2`` is the modulus of the angular momentum and ``I1`` the action of the
reduced radial motion in the effective potential

    V*(r) = I2**2 / (2 r**2) + V(r),     I1 = (1/pi) * int_{r-}^{r+} sqrt(2 (E - V*(r))) dr.

The integral is evaluated after the substitution ``r = m + w sin(theta)``
which removes the square-root endpoint behaviour, with Gauss-Legendre rules
doubled until two successive orders agree.  Derivatives of the inverse map
``E(I1, I2)`` come from Richardson-extrapolated central differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .circular import circular_radius
from .errors import DomainError, NumericalError
from .roots import EPS, solve_bracketed

QUAD_RTOL = 1e-11
FIRST_STEP = 1e-4
SECOND_STEP = 1e-3
QC_RTOL = 1e-7

_ORDERS = (32, 64, 128, 256, 512, 1024, 2048)


@lru_cache(maxsize=None)
def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    theta = 0.5 * math.pi * x
    return np.sin(theta), np.cos(theta), 0.5 * math.pi * w


def effective_potential(potential, I2, r):
    return I2 * I2 / (2.0 * r * r) + potential.value(r)


class TurningPair(NamedTuple):
    r_minus: float
    r_plus: float


class _Well(NamedTuple):
    r0: float
    vmin: float
    left_stop: float
    right_stop: float
    e_max: float


def _first_barrier(vs, rs):
    # vs sampled outward from the minimum; stop at the first local maximum.
    drops = np.flatnonzero(np.diff(vs) < 0)
    if drops.size:
        i = int(drops[0])
        return float(rs[i]), float(vs[i])
    return float(rs[-1]), float(vs[-1])


@lru_cache(maxsize=4096)
def _well(potential, I2, window, n=512):
    r0 = circular_radius(potential, I2, window, rtol=1e-14)
    vmin = float(effective_potential(potential, I2, r0))
    left = np.geomspace(r0, window.r_lo, n)[1:]
    right = np.geomspace(r0, window.r_hi, n)[1:]
    l_stop, l_val = _first_barrier(effective_potential(potential, I2, left), left)
    r_stop, r_val = _first_barrier(effective_potential(potential, I2, right), right)
    return _Well(r0, vmin, l_stop, r_stop, min(l_val, r_val))


def energy_ceiling(potential, I2, window):
    """Upper energy of the bounded-motion band at ``I2``.

    The lesser of the first barrier of V* on either side of the minimum and
    the value of V* at the window edges; orbits below it stay in the window.
    """
    return _well(potential, float(I2), window).e_max


def _vstar_scalar(potential, I2, r):
    return I2 * I2 / (2.0 * r * r) + float(potential.value(r))


def turning_points(potential, I2, E, window) -> TurningPair:
    I2, E = float(I2), float(E)
    well = _well(potential, I2, window)
    if E <= well.vmin:
        if E == well.vmin:
            return TurningPair(well.r0, well.r0)
        raise DomainError(f"E={E:.17g} below the minimum {well.vmin:.17g} of V*")
    if E >= well.e_max:
        raise DomainError(f"E={E:.17g} at or above the bounded-motion ceiling {well.e_max:.17g}")
    f = lambda r: _vstar_scalar(potential, I2, r) - E  # noqa: E731
    rm = solve_bracketed(f, well.left_stop, well.r0)
    rp = solve_bracketed(f, well.r0, well.right_stop)
    return TurningPair(rm, rp)


def _gap(potential, I2, E, tp, s):
    """``E - V*`` at ``r = m + w s``, patched near the ends where roundoff bites."""
    m = 0.5 * (tp.r_plus + tp.r_minus)
    w = 0.5 * (tp.r_plus - tp.r_minus)
    r = m + w * s
    gap = E - effective_potential(potential, I2, r)
    bad = gap <= 0
    if np.any(bad):
        # linear model E - V*(r) ~ |V*'(r_end)| * |r - r_end|
        slope_p = abs(float(potential.dvdr(tp.r_plus)) - I2 * I2 / tp.r_plus**3)
        slope_m = abs(float(potential.dvdr(tp.r_minus)) - I2 * I2 / tp.r_minus**3)
        lin = np.where(s > 0, slope_p * (tp.r_plus - r), slope_m * (r - tp.r_minus))
        gap = np.where(bad, np.maximum(lin, np.finfo(float).tiny), gap)
    return r, w, gap


def _roundoff(potential, I2, E, tp):
    """Absolute error of ``E - V*`` from evaluating V* in floating point."""
    r = tp.r_minus
    return 8.0 * EPS * (abs(E) + abs(float(potential.value(r))) + I2 * I2 / (2.0 * r * r))


def _converged(rule, rtol, what, atol=0.0):
    prev = None
    for n in _ORDERS:
        val = rule(n)
        if prev is not None and np.all(np.abs(val - prev) <= rtol * np.abs(val) + atol):
            return val
        prev = val
    raise NumericalError(f"{what}: quadrature did not converge with {_ORDERS[-1]} nodes")


def action_integral(potential, I2, E, window, rtol=QUAD_RTOL):
    """Radial action ``I1(E, I2)``."""
    I2, E = float(I2), float(E)
    tp = turning_points(potential, I2, E, window)
    if tp.r_plus == tp.r_minus:
        return 0.0

    def rule(n):
        s, c, wt = _gauss(n)
        _, w, gap = _gap(potential, I2, E, tp, s)
        return w * float(np.sum(wt * c * np.sqrt(2.0 * gap))) / math.pi

    # near the circular orbit the gap itself carries roundoff; its effect on I1 is ~ w dg / sqrt(gap)
    depth = E - _well(potential, I2, window).vmin
    w = 0.5 * (tp.r_plus - tp.r_minus)
    atol = 4.0 * w * _roundoff(potential, I2, E, tp) / (math.pi * math.sqrt(2.0 * depth))
    return float(_converged(rule, rtol, "action", atol))


def frequencies_by_quadrature(potential, I2, E, window, rtol=QUAD_RTOL):
    """``(2 pi / T, Delta_phi / T)`` from the radial period ``T`` and the apsidal angle.

    Independent of the finite-difference route; used to check the gradient of E.
    """
    I2, E = float(I2), float(E)
    tp = turning_points(potential, I2, E, window)
    if tp.r_plus == tp.r_minus:
        raise DomainError("circular orbit: period needs E above the minimum")

    def rule(n):
        s, c, wt = _gauss(n)
        r, w, gap = _gap(potential, I2, E, tp, s)
        base = wt * c * w / np.sqrt(2.0 * gap)
        return np.array([2.0 * np.sum(base), 2.0 * np.sum(base * I2 / (r * r))])

    depth = E - _well(potential, I2, window).vmin
    floor = 4.0 * _roundoff(potential, I2, E, tp) / depth
    period, dphi = _converged(rule, max(rtol, floor), "period")
    return 2.0 * math.pi / period, dphi / period


def radial_period(potential, I2, E, window):
    return 2.0 * math.pi / frequencies_by_quadrature(potential, I2, E, window)[0]


@lru_cache(maxsize=4096)
def _top(potential, I2, window, rtol=QUAD_RTOL):
    well = _well(potential, I2, window)
    e_top = well.e_max - 1e-9 * (well.e_max - well.vmin)
    return e_top, action_integral(potential, I2, e_top, window, rtol)


def escape_action(potential, I2, window, rtol=QUAD_RTOL):
    """Operational bound F(I2): the action just below the energy ceiling."""
    return _top(potential, float(I2), window, rtol)[1]


def energy_from_actions(potential, I1, I2, window, rtol=QUAD_RTOL):
    """Invert ``I1(E, I2)`` for E by Brent's method on the monotone bracket."""
    I1, I2 = float(I1), float(I2)
    if I1 < 0:
        raise DomainError(f"I1={I1:.17g} < 0")
    well = _well(potential, I2, window)
    if I1 == 0:
        return well.vmin
    e_top, f_top = _top(potential, I2, window, rtol)
    if I1 >= f_top:
        raise DomainError(
            f"I1={I1:.17g} exceeds the bounded-motion action {f_top:.17g} at I2={I2:.17g}")
    f = lambda E: action_integral(potential, I2, E, window, rtol) - I1  # noqa: E731
    xtol = 2 * EPS * max(abs(well.vmin), abs(e_top), 1e-300)
    return solve_bracketed(f, well.vmin, e_top, xtol=xtol)


def _energy_table(potential, window, rtol):
    cache = {}

    def E(a, b):
        key = (a, b)
        if key not in cache:
            cache[key] = energy_from_actions(potential, a, b, window, rtol)
        return cache[key]

    return E


def _steps(I1, I2, window, rel):
    h = rel * math.hypot(I1, I2)
    h_i1 = min(h, 0.5 * I1)
    h_i2 = min(h, 0.5 * (I2 - window.gamma_lo), 0.5 * (window.gamma_hi - I2))
    if h_i1 < h / 64 or h_i2 < h / 64:
        raise DomainError(
            f"point ({I1:.6g}, {I2:.6g}) too close to the action-domain boundary "
            f"for step {h:.3g}")
    return h_i1, h_i2


def gradient_hessian(potential, I1, I2, window, first_step=FIRST_STEP, second_step=SECOND_STEP,
                     rtol=QUAD_RTOL):
    """Frequencies ``(dE/dI1, dE/dI2)`` and the 2x2 Hessian of E.

    Central differences with steps ``first_step`` and ``second_step`` relative
    to ``|I|``, each extrapolated once from ``h`` and ``h/2``.  Steps along a
    direction shrink (at most 64-fold) to keep a two-step margin from the
    boundary; otherwise :class:`DomainError` is raised.
    """
    I1, I2 = float(I1), float(I2)
    E = _energy_table(potential, window, rtol)
    e0 = E(I1, I2)

    a1, a2 = _steps(I1, I2, window, first_step)

    def grad(h1, h2):
        return np.array([(E(I1 + h1, I2) - E(I1 - h1, I2)) / (2 * h1),
                         (E(I1, I2 + h2) - E(I1, I2 - h2)) / (2 * h2)])

    omega = (4.0 * grad(a1 / 2, a2 / 2) - grad(a1, a2)) / 3.0

    b1, b2 = _steps(I1, I2, window, second_step)

    def hess(h1, h2):
        d11 = (E(I1 + h1, I2) - 2 * e0 + E(I1 - h1, I2)) / h1**2
        d22 = (E(I1, I2 + h2) - 2 * e0 + E(I1, I2 - h2)) / h2**2
        d12 = (E(I1 + h1, I2 + h2) - E(I1 + h1, I2 - h2)
               - E(I1 - h1, I2 + h2) + E(I1 - h1, I2 - h2)) / (4 * h1 * h2)
        return np.array([[d11, d12], [d12, d22]])

    hessian = (4.0 * hess(b1 / 2, b2 / 2) - hess(b1, b2)) / 3.0
    hessian = 0.5 * (hessian + hessian.T)
    return omega, hessian


def bordered_hessian(omega, hessian):
    m = np.zeros((3, 3))
    m[:2, :2] = hessian
    m[:2, 2] = omega
    m[2, :2] = omega
    return m


@dataclass(frozen=True)
class ActionPoint:
    I1: float
    I2: float
    E: float
    omega: tuple
    hessian: tuple
    arnold_det: float

    @property
    def omega_array(self):
        return np.array(self.omega)

    @property
    def hessian_array(self):
        return np.array(self.hessian)


def arnold_determinant(point: ActionPoint):
    """Determinant of the Hessian of E bordered by its gradient."""
    return float(np.linalg.det(bordered_hessian(point.omega_array, point.hessian_array)))


def action_point(potential, I1, I2, window, rtol=QUAD_RTOL, **steps) -> ActionPoint:
    E = energy_from_actions(potential, I1, I2, window, rtol)
    omega, hessian = gradient_hessian(potential, I1, I2, window, rtol=rtol, **steps)
    det = float(np.linalg.det(bordered_hessian(omega, hessian)))
    return ActionPoint(float(I1), float(I2), E, tuple(float(x) for x in omega),
                       tuple(tuple(float(x) for x in row) for row in hessian), det)


class QuasiConvexity(NamedTuple):
    quasiconvex: bool
    q: float
    threshold: float
    eta: tuple

    @property
    def label(self):
        return "quasiconvex" if self.quasiconvex else "degenerate"


def _term_scale(omega, hessian):
    return float(np.linalg.norm(hessian) * np.dot(omega, omega))


def quasiconvexity_test(point: ActionPoint, rtol=QC_RTOL, identity_rtol=1e-10) -> QuasiConvexity:
    """Evaluate ``q = d2E(eta, eta)`` on ``eta = (omega2, -omega1)``, normal to the gradient.

    In two dimensions ``|q|`` equals the modulus of the bordered determinant;
    the identity is checked on the scale of the terms, ``|H| |omega|**2``, and
    a mismatch raises :class:`NumericalError`.
    """
    omega, H = point.omega_array, point.hessian_array
    if not np.any(omega):
        raise DomainError("omega = 0: point is critical, test undefined")
    eta = np.array([omega[1], -omega[0]])
    q = float(eta @ H @ eta)
    scale = _term_scale(omega, H)
    gap = abs(abs(q) - abs(point.arnold_det))
    if gap > identity_rtol * max(abs(q), abs(point.arnold_det), scale):
        raise NumericalError(f"|q|={abs(q):.6e} and |D|={abs(point.arnold_det):.6e} disagree")
    threshold = rtol * max(1.0, scale)
    return QuasiConvexity(abs(q) > threshold, q, threshold, (float(eta[0]), float(eta[1])))


def fitted_expansion(potential, I2, window, fractions=None, degree=4):
    """Least-squares Taylor fit of ``E(I1, I2)`` in I1 at fixed I2.

    Samples ``I1 = fractions * I2`` plus the circular orbit ``I1 = 0``.  The
    default is 9 points geometric from 1e-4 to 1e-2, the top capped at half
    the escape action for shallow wells.  Returns ``(E0, dE/dI1, d2E/dI1**2 / 2)``.
    """
    I2 = float(I2)
    if fractions is None:
        top = min(1e-2, 0.5 * escape_action(potential, I2, window) / I2)
        fractions = np.geomspace(1e-4, top, 9)
    x = np.concatenate([[0.0], np.asarray(fractions, dtype=float) * I2])
    y = np.array([energy_from_actions(potential, xi, I2, window) for xi in x])
    poly = np.polynomial.Polynomial.fit(x, y, degree).convert()
    c = np.zeros(3)
    c[: min(3, len(poly.coef))] = poly.coef[:3]
    return float(c[0]), float(c[1]), float(c[2])
