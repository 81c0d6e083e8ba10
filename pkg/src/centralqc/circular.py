"""Quantities evaluated on circular orbits.

A circular orbit of angular momentum ``I2`` sits at the minimum ``r0`` of the
effective potential ``I2**2/(2 r**2) + V(r)``, i.e. ``I2**2 = r0**3 V'(r0)``.
Around it the Hamiltonian expands as

    h(I1, I2) = V*(I2) + sqrt(A) I1 + (3CA - 5B**2) / (48 A**2) I1**2 + ...

with ``A, B, C`` the second to fourth radial derivatives of the effective
potential at ``r0``.  The quasi-convexity test reduces to a fourth-order
condition on V at ``r0``; this module evaluates that condition in two
equivalent forms, the bordered determinant it controls, and scans a window
for its zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularConfigurationError
from .potentials import eval_derivs
from .roots import grid_roots, solve_bracketed

RESIDUAL_TOL = 1e-9
DEGENERATE_FRACTION = 0.95


@dataclass(frozen=True)
class CircularOrbit:
    I2: float
    r0: float
    Vstar: float
    A: float
    B: float
    C: float
    omega: float
    t_coeff: float
    dr0_dI2: float

    @property
    def quadratic_coeff(self):
        """Coefficient of ``I1**2`` in the expansion of h."""
        return (-5.0 * self.B**2 + 3.0 * self.C * self.A) / (48.0 * self.A**2)

    def energy(self, I1):
        """Second-order truncation of h(I1, I2) at this orbit."""
        return self.Vstar + self.omega * I1 + self.quadratic_coeff * I1 * I1


@dataclass(frozen=True)
class ResidualReport:
    r0: float
    I2: float
    rhs_pot: float
    V4: float
    residual_pot: float
    residual_g: float
    degenerate: bool

    @property
    def classification(self):
        return "degenerate-at-r0" if self.degenerate else "quasiconvex-at-r0"


def angular_momentum_at(potential, r0):
    """``I2(r0) = sqrt(r0**3 V'(r0))``."""
    v1 = eval_derivs(potential, r0)[1]
    if v1 <= 0:
        raise DomainError(f"V'({r0:.17g}) = {v1:.3e} <= 0, no circular orbit")
    return math.sqrt(r0**3 * v1)


def circular_radius(potential, I2, window, rtol=1e-12):
    """Radius of the circular orbit with angular momentum ``I2`` inside ``window``."""
    I2 = float(I2)
    if not window.contains_I2(I2):
        raise DomainError(
            f"I2={I2:.17g} outside ({window.gamma_lo:.17g}, {window.gamma_hi:.17g})")
    target = I2 * I2
    f = lambda r: r**3 * float(potential.dvdr(r)) - target  # noqa: E731
    return solve_bracketed(f, window.r_lo, window.r_hi, rtol=rtol,
                           xtol=rtol * window.r_lo)


def _orbit(potential, r0, I2):
    v, v1, v2, v3, v4 = eval_derivs(potential, r0)
    L2 = I2 * I2
    A = 3.0 * L2 / r0**4 + v2
    if not A > 0:
        raise DomainError(f"A={A:.3e} <= 0 at r0={r0:.17g}: minimum is degenerate")
    B = -12.0 * L2 / r0**5 + v3
    C = 60.0 * L2 / r0**6 + v4
    S = 3.0 * v1 + r0 * v2
    return CircularOrbit(
        I2=I2,
        r0=r0,
        Vstar=L2 / (2.0 * r0**2) + v,
        A=A,
        B=B,
        C=C,
        omega=math.sqrt(A),
        t_coeff=(-5.0 * B**2 + 3.0 * C * A) / (24.0 * A**2),
        dr0_dI2=2.0 * math.sqrt(r0**3 * v1) / (r0**2 * S),
    )


def birkhoff_coefficients(potential, I2, window) -> CircularOrbit:
    r0 = circular_radius(potential, I2, window)
    return _orbit(potential, r0, float(I2))


def circular_orbit_at(potential, r0) -> CircularOrbit:
    """Same as :func:`birkhoff_coefficients`, parameterised by the radius."""
    return _orbit(potential, float(r0), angular_momentum_at(potential, r0))


def _check_denominators(v1, S, r0):
    if v1 == 0:
        raise SingularConfigurationError(f"V'({r0:.17g}) = 0")
    if S == 0:
        raise SingularConfigurationError(f"3V' + r V'' = 0 at r0={r0:.17g}")


def potcondition_rhs(potential, r0):
    """Right-hand side of the fourth-order condition, i.e. the value V''''(r0)
    would need for the circular-orbit Arnold determinant to vanish."""
    r = float(r0)
    _, v1, v2, v3, _ = eval_derivs(potential, r)
    S = 3.0 * v1 + r * v2
    _check_denominators(v1, S, r)
    return (-84.0 * v1 / r**3
            + 32.0 * v2 / r**2
            + 16.0 * v3 / r
            - 8.0 * v2**2 / (r * v1)
            + 240.0 * v1**2 / (r**3 * S)
            - 40.0 * v1 * v3 / (r * S)
            + 5.0 * r * v3**2 / (3.0 * S))


def potcondition_residual(potential, r0):
    """``RHS(r0) - V''''(r0)``; zero exactly where the determinant vanishes at I1 = 0."""
    return potcondition_rhs(potential, r0) - eval_derivs(potential, r0)[4]


def g_derivatives(potential, r0):
    """``g = r V''/V'`` and its first two derivatives, in closed form."""
    r = float(r0)
    _, v1, v2, v3, v4 = eval_derivs(potential, r)
    if v1 == 0:
        raise SingularConfigurationError(f"V'({r:.17g}) = 0, g undefined")
    a, b, c = v2 / v1, v3 / v1, v4 / v1
    g = r * a
    g1 = a + r * b - r * a * a
    g2 = 2.0 * b - 2.0 * a * a + r * c - 3.0 * r * a * b + 2.0 * r * a**3
    return g, g1, g2


def secondord_rhs(potential, r0):
    """Value g''(r0) would need for the determinant to vanish, from g and g'.

    The cubic term carries a factor 2; with it the g-form residual equals
    ``r0 / V'(r0)`` times :func:`potcondition_residual` identically.
    """
    r = float(r0)
    g, g1, _ = g_derivatives(potential, r)
    out = (14.0 + g) * g1 / (3.0 * r) + 2.0 * (g - 1.0) * (g + 2.0) * (g + 3.0) / (3.0 * r * r)
    if g1 != 0.0:
        if g + 3.0 == 0.0:
            raise SingularConfigurationError(f"3 + g = 0 at r0={r:.17g}")
        out += 5.0 * g1 * g1 / (3.0 * (3.0 + g))
    return out


def secondord_residual(potential, r0):
    return secondord_rhs(potential, r0) - g_derivatives(potential, r0)[2]


def _is_degenerate(rhs, v4, residual, tol):
    return abs(residual) <= tol * max(1.0, abs(rhs), abs(v4))


def residual_report(potential, r0, tol=RESIDUAL_TOL) -> ResidualReport:
    r0 = float(r0)
    rhs = potcondition_rhs(potential, r0)
    v4 = eval_derivs(potential, r0)[4]
    res = rhs - v4
    return ResidualReport(
        r0=r0,
        I2=angular_momentum_at(potential, r0),
        rhs_pot=rhs,
        V4=v4,
        residual_pot=res,
        residual_g=secondord_residual(potential, r0),
        degenerate=_is_degenerate(rhs, v4, res, tol),
    )


def arnold_matrix_circular(orbit: CircularOrbit):
    """Bordered Hessian of h at ``(I1, I2) = (0, orbit.I2)``, built from the expansion."""
    r0, I2, rho = orbit.r0, orbit.I2, orbit.dr0_dI2
    s = orbit.omega
    h12 = (6.0 * I2 / r0**4 + orbit.B * rho) / (2.0 * s)
    h22 = 1.0 / r0**2 - 2.0 * I2 / r0**3 * rho
    w = I2 / r0**2
    return np.array([
        [orbit.t_coeff, h12, s],
        [h12, h22, w],
        [s, w, 0.0],
    ])


def arnold_determinant_circular(potential, I2, window):
    orbit = birkhoff_coefficients(potential, I2, window)
    return float(np.linalg.det(arnold_matrix_circular(orbit)))


@dataclass(frozen=True)
class ExceptionalSet:
    """Zeros of the fourth-order condition over a window, at I1 = 0.

    ``roots`` holds ``(r0, I2)`` pairs.  ``identically_degenerate`` is set when
    the condition holds (to tolerance) on nearly every grid node, as for the
    Kepler and harmonic potentials; ``roots`` is then empty since the whole
    slice is exceptional.
    """

    roots: tuple
    identically_degenerate: bool
    reports: tuple
    degenerate_fraction: float

    @property
    def is_empty(self):
        return not self.roots and not self.identically_degenerate

    def distance(self, I2):
        """Distance in I2 from the nearest exceptional value (0 when degenerate everywhere)."""
        if self.identically_degenerate:
            return 0.0
        if not self.roots:
            return math.inf
        return min(abs(I2 - root_I2) for _, root_I2 in self.roots)

    @property
    def verdict(self):
        if self.identically_degenerate:
            return "identically degenerate"
        if not self.roots:
            return "quasiconvex on window, S empty"
        listed = ", ".join(f"{i2:.17g}" for _, i2 in self.roots)
        return f"exceptional I2 values: {listed}"


def scan_exceptional_set(potential, window, n_grid=400, tol=RESIDUAL_TOL) -> ExceptionalSet:
    grid = np.linspace(window.r_lo, window.r_hi, int(n_grid))
    reports = tuple(residual_report(potential, r, tol) for r in grid)
    zero = np.array([rep.degenerate for rep in reports])
    frac = float(zero.mean())
    if frac >= DEGENERATE_FRACTION:
        return ExceptionalSet((), True, reports, frac)
    values = np.array([rep.residual_pot for rep in reports])
    radii = grid_roots(lambda r: potcondition_residual(potential, r), grid,
                       values=values, is_zero=zero)
    roots = tuple((r, angular_momentum_at(potential, r)) for r in radii)
    return ExceptionalSet(roots, False, reports, frac)
