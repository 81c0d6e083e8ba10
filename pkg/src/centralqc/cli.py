"""Command-line front end.

    centralqc analyze   --config run.json --out results/
    centralqc expand    --config run.json --out results/
    centralqc actionmap --config run.json --out results/
    centralqc drift     --config run.json --out results/

Everything numeric comes from the config file; the flags only name files.
Exit status is 0 on success and a per-category nonzero code otherwise.
"""

import argparse
import logging
import math
import os
import sys

import numpy as np

from . import actions, circular, dynamics, report
from .config import RunConfig
from .errors import CentralQCError
from .potentials import admissible_window

log = logging.getLogger("centralqc")

EXIT_CODES = {
    "config": 2,
    "window": 3,
    "domain": 4,
    "singular": 4,
    "numeric": 5,
    "abort": 5,
    "refused": 6,
    "error": 1,
}


def _window(cfg, potential):
    return admissible_window(potential, cfg.window.r_lo, cfg.window.r_hi,
                             cfg.grids.window_validation)


def cmd_analyze(cfg, out):
    potential = cfg.build_potential()
    window = _window(cfg, potential)
    scan = circular.scan_exceptional_set(potential, window, cfg.grids.scan,
                                         cfg.tolerances.residual)
    rows = []
    for rep in scan.reports:
        orb = circular.circular_orbit_at(potential, rep.r0)
        rows.append((rep.r0, orb.I2, orb.Vstar, orb.A, orb.B, orb.C, orb.omega,
                     orb.t_coeff, rep.residual_pot, rep.residual_g, rep.classification))
    report.write_csv(os.path.join(out, "analyze.csv"), report.ANALYZE_COLUMNS, rows)
    report.write_json(os.path.join(out, "analyze.json"), {
        "potential": potential.to_record(),
        "window": {"r_lo": window.r_lo, "r_hi": window.r_hi,
                   "gamma_lo": window.gamma_lo, "gamma_hi": window.gamma_hi,
                   "grid_size": window.grid_size},
        "verdict": scan.verdict,
        "identically_degenerate": scan.identically_degenerate,
        "degenerate_fraction": scan.degenerate_fraction,
        "roots": [{"r0": r0, "I2": i2} for r0, i2 in scan.roots],
    })
    print(f"verdict: {scan.verdict}")
    return scan


def cmd_expand(cfg, out):
    potential = cfg.build_potential()
    window = _window(cfg, potential)
    I2 = cfg.expand.I2
    if I2 is None:
        I2 = 0.5 * (window.gamma_lo + window.gamma_hi)
    orb = circular.birkhoff_coefficients(potential, I2, window)
    fitted = (math.nan,) * 3
    if cfg.expand.cross_check:
        fitted = actions.fitted_expansion(potential, I2, window)
    row = (orb.I2, orb.r0, orb.Vstar, orb.A, orb.B, orb.C, orb.omega, orb.t_coeff,
           orb.dr0_dI2, orb.quadratic_coeff) + tuple(fitted)
    report.write_csv(os.path.join(out, "expand.csv"), report.EXPAND_COLUMNS, [row])
    print(f"I1^2 coefficient at I2={report.fmt(orb.I2)}: {report.fmt(orb.quadratic_coeff)}"
          + (f" (fitted {report.fmt(fitted[2])})" if cfg.expand.cross_check else ""))
    return orb


def _linspace(triple):
    lo, hi, n = triple
    return np.linspace(float(lo), float(hi), int(n))


def cmd_actionmap(cfg, out):
    potential = cfg.build_potential()
    window = _window(cfg, potential)
    rtol = cfg.tolerances.quadrature
    rows, failures = [], 0
    for I1 in _linspace(cfg.grids.actionmap_I1):
        for I2 in _linspace(cfg.grids.actionmap_I2):
            try:
                pt = actions.action_point(potential, I1, I2, window, rtol=rtol)
                qc = actions.quasiconvexity_test(pt, cfg.tolerances.quasiconvexity)
            except CentralQCError as exc:
                failures += 1
                log.warning("actionmap point (%g, %g): %s", I1, I2, exc)
                rows.append((I1, I2) + (math.nan,) * 7 + (f"error:{exc.category}",))
                continue
            (h11, h12), (_, h22) = pt.hessian
            rows.append((pt.I1, pt.I2, pt.E, pt.omega[0], pt.omega[1], h11, h12, h22,
                         pt.arnold_det, qc.label))
    report.write_csv(os.path.join(out, "actionmap.csv"), report.ACTIONMAP_COLUMNS, rows)
    print(f"actionmap: {len(rows)} points, {failures} failed")
    return rows


def cmd_drift(cfg, out):
    potential = cfg.build_potential()
    perturbation = cfg.build_perturbation()
    window = _window(cfg, potential)
    d = cfg.dynamics
    if d.initial_actions is None:
        I1, I2 = 0.0, 0.5 * (window.gamma_lo + window.gamma_hi)
    else:
        I1, I2 = (float(x) for x in d.initial_actions)
    state0 = dynamics.state_from_actions(potential, I1, I2, window, d.rotation_seed)
    if I1 > 0:
        E = actions.energy_from_actions(potential, I1, I2, window)
        period = actions.radial_period(potential, I2, E, window)
    else:
        period = dynamics.circular_period(potential, I2, window)
    dt = period / d.steps_per_period
    runs = dynamics.drift_runs(potential, perturbation, d.epsilons, d.periods * period, dt,
                               state0, window, d.sample_stride, rho=d.rho,
                               scan_grid=cfg.grids.scan, workers=d.workers)
    reports = [run.report for run in runs]
    report.write_csv(os.path.join(out, "drift.csv"), report.DRIFT_COLUMNS, [
        (r.epsilon, r.T_final, r.dt, r.max_drift_I1, r.max_drift_I2, r.max_drift_norm,
         r.energy_error, r.r_min, r.r_max) for r in reports])
    summary = {"initial_actions": [I1, I2], "aborted": {
        report.fmt(r.epsilon): r.aborted for r in reports if r.aborted}}
    try:
        fit = dynamics.fit_drift_scaling(reports)
        summary.update(fit._asdict())
    except CentralQCError as exc:
        summary["fit_error"] = str(exc)
    report.write_json(os.path.join(out, "drift_fit.json"), summary)
    if d.write_trajectories:
        for i, run in enumerate(runs):
            if run.trajectory is None:
                continue
            tr, acts = run.trajectory, run.actions
            rows = [(tr.t[k], *tr.q[k], *tr.p[k], *acts[k], float(np.linalg.norm(tr.q[k])))
                    for k in range(len(tr.t))]
            report.write_csv(os.path.join(out, f"trajectory_{i}.csv"),
                             report.TRAJECTORY_COLUMNS, rows)
    if "slope" in summary:
        print(f"drift: fitted log-log slope {summary['slope']:.4g}, "
              f"C(eps^1/4) = {summary['C']:.6g}, spread {summary['spread']:.3g}")
    return reports


COMMANDS = {
    "analyze": cmd_analyze,
    "expand": cmd_expand,
    "actionmap": cmd_actionmap,
    "drift": cmd_drift,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="centralqc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__name__.replace("cmd_", ""))
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output directory (overrides output_dir)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config)
        out = report.ensure_dir(args.out or cfg.output_dir)
        COMMANDS[args.command](cfg, out)
    except CentralQCError as exc:
        print(f"error [{exc.category}]: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
