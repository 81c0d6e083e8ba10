"""Long-time integration of ``h0 + eps * f`` in Cartesian coordinates.

Position-only perturbations keep the Hamiltonian separable, so the default
scheme is the fourth-order triple-jump composition of velocity Verlet.  A
perturbation that depends on momenta falls back to the implicit midpoint
rule.  Actions are reconstructed from each sample with the quadrature of
:mod:`centralqc.actions`.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import actions
from .circular import birkhoff_coefficients, scan_exceptional_set
from .errors import (ConfigError, DomainError, NumericalError, OrbitAbortError,
                     StabilityRefusal)

_CBRT2 = 2.0 ** (1.0 / 3.0)
_W1 = 1.0 / (2.0 - _CBRT2)
_W0 = -_CBRT2 / (2.0 - _CBRT2)
KICKS = (0.5 * _W1, 0.5 * (_W0 + _W1), 0.5 * (_W0 + _W1), 0.5 * _W1)
DRIFTS = (_W1, _W0, _W1)

STEPS_PER_PERIOD = 200
GUARD_FRACTION = 1e-3
MIDPOINT_TOL = 1e-12


@dataclass(frozen=True)
class CartesianState:
    q: tuple
    p: tuple
    t: float = 0.0

    def __post_init__(self):
        q = tuple(float(x) for x in self.q)
        p = tuple(float(x) for x in self.p)
        if len(q) != 3 or len(p) != 3:
            raise DomainError("q and p must be 3-vectors")
        if not all(map(math.isfinite, q + p)):
            raise DomainError("state has non-finite components")
        if math.hypot(*q) <= 0:
            raise DomainError("state sits at the force centre")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "t", float(self.t))

    @property
    def radius(self):
        return math.hypot(*self.q)

    def reversed(self):
        return CartesianState(self.q, tuple(-x for x in self.p), self.t)


# --- perturbations ---------------------------------------------------------


class Perturbation:
    name = "perturbation"
    momentum_dependent = False

    @property
    def params(self):
        return {}

    def to_record(self):
        return {"type": self.name, **self.params}

    def value(self, q, p):
        raise NotImplementedError

    def grad(self, q, p):
        """``(df/dq, df/dp)`` as numpy 3-vectors."""
        raise NotImplementedError

    def grad_q_scalar(self, x, y, z):
        """Fast path for position-only perturbations, used by the explicit scheme."""
        g = self.grad((x, y, z), (0.0, 0.0, 0.0))[0]
        return float(g[0]), float(g[1]), float(g[2])


@dataclass(frozen=True)
class LinearField(Perturbation):
    """``f = d . q``, a uniform force field; ``f = q1`` by default."""

    direction: tuple = (1.0, 0.0, 0.0)
    name = "linear"

    def __post_init__(self):
        d = tuple(float(x) for x in self.direction)
        if len(d) != 3:
            raise ConfigError("linear perturbation needs a 3-vector direction")
        object.__setattr__(self, "direction", d)

    @property
    def params(self):
        return {"direction": list(self.direction)}

    def value(self, q, p):
        return float(np.dot(self.direction, q))

    def grad(self, q, p):
        return np.array(self.direction), np.zeros(3)

    def grad_q_scalar(self, x, y, z):
        return self.direction


@dataclass(frozen=True)
class SaddleBump(Perturbation):
    """``f = q1 q2 / (1 + |q|**2)``, bounded and analytic on R^3."""

    name = "saddle"

    def value(self, q, p):
        x, y, z = q
        return x * y / (1.0 + x * x + y * y + z * z)

    def grad_q_scalar(self, x, y, z):
        d = 1.0 + x * x + y * y + z * z
        f = x * y / d
        return (y - 2.0 * x * f) / d, (x - 2.0 * y * f) / d, -2.0 * z * f / d

    def grad(self, q, p):
        return np.array(self.grad_q_scalar(*q)), np.zeros(3)


@dataclass(frozen=True)
class BilinearCoupling(Perturbation):
    """``f = q_i p_j``; momentum dependent, so integrated with the implicit midpoint rule."""

    i: int = 0
    j: int = 1
    name = "bilinear"
    momentum_dependent = True

    @property
    def params(self):
        return {"i": self.i, "j": self.j}

    def value(self, q, p):
        return q[self.i] * p[self.j]

    def grad(self, q, p):
        gq, gp = np.zeros(3), np.zeros(3)
        gq[self.i] = p[self.j]
        gp[self.j] = q[self.i]
        return gq, gp


_PERTURBATIONS = {"linear": LinearField, "saddle": SaddleBump, "bilinear": BilinearCoupling}


def perturbation_from_record(record):
    if not isinstance(record, dict) or record.get("type") not in _PERTURBATIONS:
        raise ConfigError(f"unknown perturbation record {record!r}")
    rec = {k: v for k, v in record.items() if k != "type"}
    try:
        return _PERTURBATIONS[record["type"]](**rec)
    except TypeError as exc:
        raise ConfigError(f"bad perturbation record {record!r}: {exc}") from None


def check_gradient(perturbation, q, p, h=1e-6, tol=1e-6):
    """Central-difference check of ``perturbation.grad``; returns the max relative error."""
    z = np.concatenate([np.asarray(q, float), np.asarray(p, float)])
    gq, gp = perturbation.grad(z[:3], z[3:])
    g = np.concatenate([gq, gp])
    fd = np.empty(6)
    for k in range(6):
        e = np.zeros(6)
        e[k] = h
        fd[k] = (perturbation.value((z + e)[:3], (z + e)[3:])
                 - perturbation.value((z - e)[:3], (z - e)[3:])) / (2 * h)
    err = float(np.max(np.abs(fd - g)) / max(1.0, float(np.max(np.abs(g)))))
    if err > tol:
        raise NumericalError(f"{perturbation.name}: gradient mismatch {err:.3e}")
    return err


# --- integration -------------------------------------------------------------


class Trajectory(NamedTuple):
    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    dt: float

    @property
    def radius(self):
        return np.linalg.norm(self.q, axis=1)

    def state(self, i):
        return CartesianState(self.q[i], self.p[i], self.t[i])


def _explicit(potential, perturbation, eps, state0, dt, n_steps, stride, r_guard):
    dvdr = potential.dvdr
    guard2 = r_guard * r_guard
    perturbed = eps != 0.0 and perturbation is not None
    gq = perturbation.grad_q_scalar if perturbed else None
    sqrt = math.sqrt
    t0 = state0.t

    def accel(x, y, z, step):
        r2 = x * x + y * y + z * z
        if r2 < guard2:
            r = sqrt(r2)
            raise OrbitAbortError(
                f"|q|={r:.3e} < r_guard={r_guard:.3e} at t={t0 + step * dt:.6g}",
                time=t0 + step * dt, radius=r)
        r = sqrt(r2)
        c = -float(dvdr(r)) / r
        ax, ay, az = c * x, c * y, c * z
        if perturbed:
            fx, fy, fz = gq(x, y, z)
            ax -= eps * fx
            ay -= eps * fy
            az -= eps * fz
        return ax, ay, az

    c1, c2, c3, c4 = (k * dt for k in KICKS)
    d1, d2, d3 = (d * dt for d in DRIFTS)
    x, y, z = state0.q
    px, py, pz = state0.p
    ax, ay, az = accel(x, y, z, 0)
    ts, qs, ps = [t0], [(x, y, z)], [(px, py, pz)]
    for step in range(1, n_steps + 1):
        px += c1 * ax; py += c1 * ay; pz += c1 * az  # noqa: E702
        x += d1 * px; y += d1 * py; z += d1 * pz  # noqa: E702
        ax, ay, az = accel(x, y, z, step)
        px += c2 * ax; py += c2 * ay; pz += c2 * az  # noqa: E702
        x += d2 * px; y += d2 * py; z += d2 * pz  # noqa: E702
        ax, ay, az = accel(x, y, z, step)
        px += c3 * ax; py += c3 * ay; pz += c3 * az  # noqa: E702
        x += d3 * px; y += d3 * py; z += d3 * pz  # noqa: E702
        ax, ay, az = accel(x, y, z, step)
        px += c4 * ax; py += c4 * ay; pz += c4 * az  # noqa: E702
        if step % stride == 0 or step == n_steps:
            ts.append(t0 + step * dt)
            qs.append((x, y, z))
            ps.append((px, py, pz))
    return ts, qs, ps


def _midpoint(potential, perturbation, eps, state0, dt, n_steps, stride, r_guard):
    def gradH(q, p):
        r = float(np.linalg.norm(q))
        if r < r_guard:
            raise OrbitAbortError(f"|q|={r:.3e} < r_guard={r_guard:.3e}", radius=r)
        hq = float(potential.dvdr(r)) / r * q
        hp = p.copy()
        if eps != 0.0:
            fq, fp = perturbation.grad(q, p)
            hq = hq + eps * fq
            hp = hp + eps * fp
        return hq, hp

    q = np.array(state0.q)
    p = np.array(state0.p)
    ts, qs, ps = [state0.t], [tuple(q)], [tuple(p)]
    for step in range(1, n_steps + 1):
        qn, pn = q.copy(), p.copy()
        for _ in range(100):
            hq, hp = gradH(0.5 * (q + qn), 0.5 * (p + pn))
            q_new, p_new = q + dt * hp, p - dt * hq
            change = max(np.max(np.abs(q_new - qn)), np.max(np.abs(p_new - pn)))
            qn, pn = q_new, p_new
            if change <= MIDPOINT_TOL * max(1.0, np.max(np.abs(qn)), np.max(np.abs(pn))):
                break
        else:
            raise NumericalError("implicit midpoint iteration did not converge")
        q, p = qn, pn
        if step % stride == 0 or step == n_steps:
            ts.append(state0.t + step * dt)
            qs.append(tuple(q))
            ps.append(tuple(p))
    return ts, qs, ps


def integrate(potential, perturbation, epsilon, state0, dt, T, sample_stride=1, r_guard=None):
    """Integrate for ``ceil(T/dt)`` steps of size ``dt``, sampling every ``sample_stride`` steps.

    The initial and final states are always sampled.  ``r_guard`` defaults to
    ``1e-3 |q0|``; crossing it raises :class:`OrbitAbortError`.
    """
    if not dt > 0:
        raise DomainError("dt must be positive")
    if not T >= 0:
        raise DomainError("T must be non-negative")
    n_steps = max(0, math.ceil(T / dt - 1e-9))
    stride = max(1, int(sample_stride))
    if r_guard is None:
        r_guard = GUARD_FRACTION * state0.radius
    eps = float(epsilon)
    if perturbation is not None and perturbation.momentum_dependent and eps != 0.0:
        run = _midpoint
    else:
        run = _explicit
    ts, qs, ps = run(potential, perturbation, eps, state0, float(dt), n_steps, stride, r_guard)
    return Trajectory(np.array(ts), np.array(qs), np.array(ps), float(dt))


def hamiltonian(potential, perturbation, epsilon, q, p):
    q, p = np.asarray(q, float), np.asarray(p, float)
    h = 0.5 * float(p @ p) + float(potential.value(float(np.linalg.norm(q))))
    if epsilon and perturbation is not None:
        h += epsilon * perturbation.value(q, p)
    return h


def actions_of_state(potential, state, window):
    """``(I1, I2, E)`` of the unperturbed flow through ``state``."""
    q, p = np.array(state.q), np.array(state.p)
    I2 = float(np.linalg.norm(np.cross(q, p)))
    E = 0.5 * float(p @ p) + float(potential.value(float(np.linalg.norm(q))))
    if not window.contains_I2(I2):
        raise DomainError(f"I2={I2:.17g} outside the window")
    vmin = actions._well(potential, I2, window).vmin
    if E <= vmin:
        if vmin - E <= 1e-12 * max(1.0, abs(vmin)):
            return 0.0, I2, E
        raise DomainError(f"E={E:.17g} below the circular energy {vmin:.17g}")
    return actions.action_integral(potential, I2, E, window), I2, E


def state_from_actions(potential, I1, I2, window, rotation=None) -> CartesianState:
    """A phase point with actions ``(I1, I2)``: at ``r0(I2)`` in the xy-plane, moving outward.

    ``rotation`` is a 3x3 matrix, an integer seed for a uniformly random
    orientation, or ``None``.
    """
    E = actions.energy_from_actions(potential, I1, I2, window)
    well = actions._well(potential, float(I2), window)
    r0 = well.r0
    pr = math.sqrt(max(0.0, 2.0 * (E - well.vmin)))
    q = np.array([r0, 0.0, 0.0])
    p = np.array([pr, I2 / r0, 0.0])
    if rotation is not None:
        if isinstance(rotation, (int, np.integer)):
            from scipy.spatial.transform import Rotation
            R = Rotation.random(random_state=int(rotation)).as_matrix()
        else:
            R = np.asarray(rotation, dtype=float)
        q, p = R @ q, R @ p
    return CartesianState(q, p)


def reference_step(potential, I2, window, steps_per_period=STEPS_PER_PERIOD):
    """``dt`` resolving the circular radial period ``2 pi / sqrt(A)`` with the given number of steps."""
    return circular_period(potential, I2, window) / steps_per_period


def circular_period(potential, I2, window):
    return 2.0 * math.pi / birkhoff_coefficients(potential, I2, window).omega


def radius_envelope(trajectory):
    r = trajectory.radius
    if r.size == 0:
        raise DomainError("empty trajectory")
    return float(r.min()), float(r.max())


def trajectory_actions(potential, trajectory, window):
    """Per-sample ``(I1, I2, E)``; samples outside the band are NaN."""
    out = np.full((len(trajectory.t), 3), np.nan)
    for i in range(len(trajectory.t)):
        try:
            out[i] = actions_of_state(potential, trajectory.state(i), window)
        except (DomainError, NumericalError):
            pass
    return out


# --- drift experiments ----------------------------------------------------------


@dataclass(frozen=True)
class DriftReport:
    epsilon: float
    T_final: float
    dt: float
    max_drift_I1: float
    max_drift_I2: float
    max_drift_norm: float
    energy_error: float
    r_min: float
    r_max: float
    n_samples: int = 0
    n_flagged: int = 0
    aborted: str = field(default="")


def check_outside_exceptional(potential, window, I1, I2, rho, n_grid=400):
    """Distance of the initial actions from the exceptional set; refuses inside ``rho``.

    The scan covers the ``I1 = 0`` slice; away from it the numerical Arnold
    determinant at ``(I1, I2)`` must also be nondegenerate.
    """
    scan = scan_exceptional_set(potential, window, n_grid)
    dist = scan.distance(I2)
    if dist < rho:
        raise StabilityRefusal(
            f"initial actions within rho={rho:g} of the exceptional set "
            f"(distance {dist:.6g}; {scan.verdict})", distance=dist)
    if I1 > 0:
        qc = actions.quasiconvexity_test(actions.action_point(potential, I1, I2, window))
        if not qc.quasiconvex:
            raise StabilityRefusal(
                f"Arnold determinant degenerate at ({I1:.6g}, {I2:.6g}): q={qc.q:.3e}",
                distance=0.0)
    return dist


class DriftRun(NamedTuple):
    report: DriftReport
    trajectory: Trajectory
    actions: np.ndarray


def _drift_one(args):
    potential, perturbation, eps, state0, T, dt, window, stride = args
    try:
        traj = integrate(potential, perturbation, eps, state0, dt, T, stride)
    except (OrbitAbortError, NumericalError) as exc:
        nan = math.nan
        report = DriftReport(eps, nan, dt, nan, nan, nan, nan, nan, nan, 0, 0, str(exc))
        return DriftRun(report, None, None)
    acts = trajectory_actions(potential, traj, window)
    ok = np.all(np.isfinite(acts), axis=1)
    if not ok[0]:
        raise DomainError("initial state lies outside the bounded-motion band")
    d = acts[ok, :2] - acts[0, :2]
    h = np.array([hamiltonian(potential, perturbation, eps, q, p)
                  for q, p in zip(traj.q, traj.p)])
    r_min, r_max = radius_envelope(traj)
    report = DriftReport(
        epsilon=eps,
        T_final=float(traj.t[-1] - traj.t[0]),
        dt=dt,
        max_drift_I1=float(np.max(np.abs(d[:, 0]))),
        max_drift_I2=float(np.max(np.abs(d[:, 1]))),
        max_drift_norm=float(np.max(np.hypot(d[:, 0], d[:, 1]))),
        energy_error=float(np.max(np.abs(h - h[0])) / abs(h[0])),
        r_min=r_min,
        r_max=r_max,
        n_samples=int(ok.sum()),
        n_flagged=int((~ok).sum()),
    )
    return DriftRun(report, traj, acts)


def drift_runs(potential, perturbation, epsilons, T, dt, state0, window,
               sample_stride=1000, rho=None, scan_grid=400, workers=1):
    """Like :func:`drift_experiment` but also returns trajectories and sampled actions."""
    if rho is not None:
        I1, I2, _ = actions_of_state(potential, state0, window)
        check_outside_exceptional(potential, window, I1, I2, rho, scan_grid)
    jobs = [(potential, perturbation, float(e), state0, T, dt, window, sample_stride)
            for e in epsilons]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            return list(pool.map(_drift_one, jobs))
    return [_drift_one(j) for j in jobs]


def drift_experiment(potential, perturbation, epsilons, T, dt, state0, window,
                     sample_stride=1000, rho=None, scan_grid=400, workers=1):
    """One :class:`DriftReport` per epsilon, in input order.

    With ``rho`` set, the initial actions must lie at least ``rho`` from the
    exceptional set (:class:`StabilityRefusal` otherwise); ``rho=None`` skips
    the check, e.g. for degenerate control runs.  Distinct epsilons run in
    ``workers`` processes.
    """
    runs = drift_runs(potential, perturbation, epsilons, T, dt, state0, window,
                      sample_stride, rho, scan_grid, workers)
    return [run.report for run in runs]


class DriftFit(NamedTuple):
    exponent: float
    C: float
    bound_C: float
    spread: float
    slope: float
    decreasing: bool


def fit_drift_scaling(reports, exponent=0.25):
    """Fit ``drift = C eps**exponent`` across a sweep.

    ``C`` is the least-squares fit in log space, ``bound_C`` the smallest
    constant bounding every point, ``spread`` the largest factor between a
    point and the fit, and ``slope`` the free log-log slope.
    """
    rows = sorted((r for r in reports if r.epsilon > 0 and math.isfinite(r.max_drift_norm)),
                  key=lambda r: r.epsilon)
    if len(rows) < 2:
        raise DomainError("need at least two finite drift reports with eps > 0")
    eps = np.array([r.epsilon for r in rows])
    d = np.array([r.max_drift_norm for r in rows])
    if np.any(d <= 0):
        raise DomainError("drift must be positive for a log fit")
    ratio = d / eps**exponent
    C = float(np.exp(np.mean(np.log(ratio))))
    spread = float(np.max(np.maximum(ratio / C, C / ratio)))
    slope = float(np.polyfit(np.log(eps), np.log(d), 1)[0])
    return DriftFit(exponent, C, float(ratio.max()), spread, slope, bool(np.all(np.diff(d) > 0)))
