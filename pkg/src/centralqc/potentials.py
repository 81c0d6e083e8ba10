"""Analytic central potentials V(r) with exact radial derivatives to order four.

Every formula downstream consumes the tuple ``(V, V', V'', V''', V'''')``
returned by :meth:`CentralPotential.derivs`.  The built-in families provide
these in closed form; user code may subclass :class:`CentralPotential`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DomainError, WindowError

__all__ = [
    "CentralPotential",
    "Homogeneous",
    "PowerSum",
    "LennardJones",
    "ScreenedCoulomb",
    "kepler",
    "harmonic",
    "from_record",
    "eval_derivs",
    "DerivativeCheck",
    "validate_derivs",
    "AdmissibleWindow",
    "admissible_window",
    "Admissibility",
    "homogeneous_admissibility",
]


class CentralPotential:
    """Base class for a radial potential on ``domain``.

    Subclasses implement :meth:`_derivs`; :meth:`value` and :meth:`dvdr` may be
    overridden with cheaper scalar paths since the integrator calls them in
    its inner loop.
    """

    name = "central"
    domain = (0.0, math.inf)

    def _derivs(self, r):
        raise NotImplementedError

    @property
    def params(self) -> dict:
        return {}

    def to_record(self) -> dict:
        return {"type": self.name, **self.params}

    def check_domain(self, r):
        lo, hi = self.domain
        arr = np.asarray(r, dtype=float)
        if not np.all(np.isfinite(arr)) or np.any(arr <= lo) or np.any(arr >= hi):
            raise DomainError(f"{self.name}: radius {r!r} outside domain ({lo}, {hi})")

    def derivs(self, r):
        self.check_domain(r)
        return self._derivs(r)

    def value(self, r):
        return self._derivs(r)[0]

    def dvdr(self, r):
        return self._derivs(r)[1]

    def __call__(self, r):
        return self.value(r)


def _falling(alpha, n):
    out = 1.0
    for j in range(n):
        out *= alpha - j
    return out


def _power_derivs(terms, r):
    out = [0.0] * 5
    for k, alpha in terms:
        for n in range(5):
            c = k * _falling(alpha, n)
            if c != 0.0:
                out[n] = out[n] + c * r ** (alpha - n)
    return tuple(out)


@dataclass(frozen=True)
class PowerSum(CentralPotential):
    """Finite sum of monomials, ``V(r) = sum_i k_i r**alpha_i``."""

    terms: tuple = ()
    name = "power_sum"

    def __post_init__(self):
        terms = tuple((float(k), float(a)) for k, a in self.terms)
        if not terms:
            raise DomainError("power_sum needs at least one term")
        object.__setattr__(self, "terms", terms)

    @property
    def params(self):
        return {"terms": [list(t) for t in self.terms]}

    def _derivs(self, r):
        return _power_derivs(self.terms, r)

    def value(self, r):
        return sum(k * r**a for k, a in self.terms)

    def dvdr(self, r):
        return sum(k * a * r ** (a - 1.0) for k, a in self.terms)


@dataclass(frozen=True)
class Homogeneous(CentralPotential):
    """``V(r) = k r**alpha``."""

    k: float = 1.0
    alpha: float = 1.0
    name = "homogeneous"

    def __post_init__(self):
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def params(self):
        return {"k": self.k, "alpha": self.alpha}

    def _derivs(self, r):
        return _power_derivs(((self.k, self.alpha),), r)

    def value(self, r):
        return self.k * r**self.alpha

    def dvdr(self, r):
        return self.k * self.alpha * r ** (self.alpha - 1.0)


@dataclass(frozen=True)
class LennardJones(CentralPotential):
    """``V(r) = a r**-12 - b r**-6``."""

    a: float = 1.0
    b: float = 1.0
    name = "lennard_jones"

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def params(self):
        return {"a": self.a, "b": self.b}

    @property
    def _terms(self):
        return ((self.a, -12.0), (-self.b, -6.0))

    def _derivs(self, r):
        return _power_derivs(self._terms, r)

    def value(self, r):
        r6 = r**-6
        return self.a * r6 * r6 - self.b * r6

    def dvdr(self, r):
        r6 = r**-6
        return (-12.0 * self.a * r6 * r6 + 6.0 * self.b * r6) / r


@dataclass(frozen=True)
class ScreenedCoulomb(CentralPotential):
    """Yukawa form ``V(r) = -k exp(-mu r) / r``."""

    k: float = 1.0
    mu: float = 1.0
    name = "screened_coulomb"

    def __post_init__(self):
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "mu", float(self.mu))
        if self.mu < 0:
            raise DomainError("screened_coulomb needs mu >= 0")

    @property
    def params(self):
        return {"k": self.k, "mu": self.mu}

    def _derivs(self, r):
        e = np.exp(-self.mu * r)
        out = []
        for n in range(5):
            # Leibniz rule on exp(-mu r) * r**-1
            s = 0.0
            for j in range(n + 1):
                s = s + (math.comb(n, j) * (-self.mu) ** (n - j)
                         * (-1) ** j * math.factorial(j) * r ** (-1.0 - j))
            out.append(-self.k * e * s)
        return tuple(out)

    def value(self, r):
        return -self.k * np.exp(-self.mu * r) / r

    def dvdr(self, r):
        return self.k * np.exp(-self.mu * r) * (1.0 + self.mu * r) / (r * r)


def kepler(k=1.0):
    """Attractive Kepler potential ``-k/r``."""
    return Homogeneous(-k, -1.0)


def harmonic(omega=1.0):
    """Isotropic oscillator ``omega**2 r**2 / 2``."""
    return Homogeneous(0.5 * omega**2, 2.0)


_FIELDS = {
    "homogeneous": (("k", None), ("alpha", None)),
    "power_sum": (("terms", None),),
    "lennard_jones": (("a", 1.0), ("b", 1.0)),
    "screened_coulomb": (("k", 1.0), ("mu", 1.0)),
    "kepler": (("k", 1.0),),
    "harmonic": (("omega", 1.0),),
}


def from_record(record: dict) -> CentralPotential:
    """Build a potential from its JSON record, e.g. ``{"type": "homogeneous", "k": 1, "alpha": 3}``."""
    if not isinstance(record, dict) or "type" not in record:
        raise ConfigError("potential record must be an object with a 'type' field")
    kind = record["type"]
    if kind not in _FIELDS:
        raise ConfigError(f"unknown potential type {kind!r}")
    extra = set(record) - {"type"} - {n for n, _ in _FIELDS[kind]}
    if extra:
        raise ConfigError(f"unknown fields for potential {kind!r}: {sorted(extra)}")
    args = []
    for fname, default in _FIELDS[kind]:
        if fname not in record and default is None:
            raise ConfigError(f"potential {kind!r} is missing field {fname!r}")
        args.append(record.get(fname, default))
    if kind == "homogeneous":
        return Homogeneous(*args)
    if kind == "power_sum":
        return PowerSum(tuple(tuple(t) for t in args[0]))
    if kind == "lennard_jones":
        return LennardJones(*args)
    if kind == "screened_coulomb":
        return ScreenedCoulomb(*args)
    if kind == "kepler":
        return kepler(*args)
    return harmonic(*args)


def eval_derivs(potential: CentralPotential, r: float):
    """Return ``(V, V', V'', V''', V'''')`` at ``r`` as plain floats."""
    return tuple(float(x) for x in potential.derivs(float(r)))


# Second-order central stencils for d^m/dr^m, offsets -2..2.
_STENCILS = {
    1: (0.0, -0.5, 0.0, 0.5, 0.0),
    2: (0.0, 1.0, -2.0, 1.0, 0.0),
    3: (-0.5, 1.0, 0.0, -1.0, 0.5),
    4: (1.0, -4.0, 6.0, -4.0, 1.0),
}


def _richardson_derivative(f, r, m, h0, levels):
    """Neville-Richardson tableau in h**2 of the central difference."""
    coeffs = np.array(_STENCILS[m])
    offsets = np.arange(-2, 3)
    table = []
    best, best_err = None, math.inf
    for i in range(levels):
        h = h0 / 2**i
        row = [float(coeffs @ f(r + offsets * h)) / h**m]
        for j in range(1, i + 1):
            fac = 4.0**j
            row.append(row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (fac - 1.0))
        if i > 0:
            err = abs(row[i] - table[i - 1][i - 1])
            if err < best_err:
                best, best_err = row[i], err
        table.append(row)
    return best


class DerivativeCheck(NamedTuple):
    passed: bool
    r: float
    analytic: tuple
    estimated: tuple
    rel_errors: tuple
    tolerance: float


def validate_derivs(potential, r, tolerance=1e-6, *, h0=None, levels=6) -> DerivativeCheck:
    """Compare the analytic V'..V'''' against Richardson-extrapolated differences of V.

    Errors are relative to ``max(|V^(m)|, max_j |V^(j)| r**(j-m))`` so that a
    vanishing derivative (e.g. V''' of a quadratic) is judged on the scale of
    its neighbours.
    """
    r = float(r)
    exact = eval_derivs(potential, r)
    if h0 is None:
        h0 = 0.08 * r
        lo = potential.domain[0]
        if r - 2 * h0 <= lo:
            h0 = 0.45 * (r - lo)
    f = lambda x: np.asarray(potential.value(x), dtype=float)  # noqa: E731
    est, errs = [], []
    for m in range(1, 5):
        d = _richardson_derivative(f, r, m, h0, levels)
        scale = max(abs(exact[j]) * r ** (j - m) for j in range(5))
        scale = max(abs(exact[m]), scale, np.finfo(float).tiny)
        est.append(d)
        errs.append(abs(d - exact[m]) / scale)
    ok = all(e <= tolerance for e in errs)
    return DerivativeCheck(ok, r, exact[1:], tuple(est), tuple(errs), tolerance)


@dataclass(frozen=True)
class AdmissibleWindow:
    """Radial interval on which V' > 0 and V'' + 3V'/r > 0, with the matching
    angular-momentum bounds ``gamma = sqrt(r**3 V'(r))`` at its ends."""

    r_lo: float
    r_hi: float
    gamma_lo: float
    gamma_hi: float
    grid_size: int = field(default=256, compare=False)

    def contains_I2(self, I2) -> bool:
        return self.gamma_lo < I2 < self.gamma_hi

    def contains_r(self, r) -> bool:
        return self.r_lo <= r <= self.r_hi


def admissible_window(potential, r_lo, r_hi, grid_size=256) -> AdmissibleWindow:
    """Validate the two nondegeneracy inequalities on a uniform grid.

    Raises :class:`WindowError` naming the first failing node.
    """
    r_lo, r_hi = float(r_lo), float(r_hi)
    if not (0 < r_lo < r_hi):
        raise WindowError(f"need 0 < r_lo < r_hi, got ({r_lo}, {r_hi})")
    if grid_size < 2:
        raise WindowError("grid_size must be >= 2")
    grid = np.linspace(r_lo, r_hi, int(grid_size))
    potential.check_domain(grid)
    _, v1, v2, _, _ = potential.derivs(grid)
    v1 = np.broadcast_to(np.asarray(v1, dtype=float), grid.shape)
    v2 = np.broadcast_to(np.asarray(v2, dtype=float), grid.shape)
    bad = np.flatnonzero(~(v1 > 0))
    if bad.size:
        r = float(grid[bad[0]])
        raise WindowError(f"V'(r) > 0 violated at r={r:.17g}", radius=r, condition="V'>0")
    bad = np.flatnonzero(~(v2 + 3.0 * v1 / grid > 0))
    if bad.size:
        r = float(grid[bad[0]])
        raise WindowError(f"V''(r) + 3V'(r)/r > 0 violated at r={r:.17g}",
                          radius=r, condition="V''+3V'/r>0")
    g_lo = math.sqrt(r_lo**3 * float(v1[0]))
    g_hi = math.sqrt(r_hi**3 * float(v1[-1]))
    return AdmissibleWindow(r_lo, r_hi, g_lo, g_hi, int(grid_size))


class Admissibility(NamedTuple):
    admissible: bool
    failed: tuple

    @property
    def reason(self):
        return "; ".join(self.failed) if self.failed else None


def homogeneous_admissibility(k, alpha) -> Admissibility:
    """Check whether ``k r**alpha`` meets the hypotheses of the quasi-convexity result.

    All failed clauses are reported, e.g. ``k=1, alpha=-2`` fails both the
    sign clause and ``alpha+2>0``.
    """
    if k == 0 or alpha == 0:
        raise DomainError("k=0 or alpha=0 gives a constant potential")
    failed = []
    if not k * alpha > 0:
        failed.append("k*alpha>0")
    if not alpha + 2 > 0:
        failed.append("alpha+2>0")
    if alpha == -1:
        failed.append("alpha!=-1 (Kepler)")
    if alpha == 2:
        failed.append("alpha!=2 (harmonic)")
    return Admissibility(not failed, tuple(failed))
