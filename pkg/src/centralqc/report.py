"""CSV/JSON writers with fixed formatting, so identical runs produce identical bytes."""

import csv
import json
import math
import os

ANALYZE_COLUMNS = ("r0", "I2", "Vstar", "A", "B", "C", "omega", "t_coeff",
                   "residual_pot", "residual_g", "classification")
EXPAND_COLUMNS = ("I2", "r0", "Vstar", "A", "B", "C", "omega", "t_coeff", "dr0_dI2",
                  "quadratic_coeff", "fitted_E0", "fitted_omega", "fitted_quadratic_coeff")
ACTIONMAP_COLUMNS = ("I1", "I2", "E", "omega1", "omega2", "h11", "h12", "h22",
                     "arnold_det", "qc_flag")
TRAJECTORY_COLUMNS = ("t", "q1", "q2", "q3", "p1", "p2", "p3", "I1", "I2", "E", "r")
DRIFT_COLUMNS = ("epsilon", "T", "dt", "max_drift_I1", "max_drift_I2", "max_drift_norm",
                 "energy_error", "r_min", "r_max")


def fmt(value):
    """17 significant digits for floats; everything else via ``str``."""
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, (int, float)) or hasattr(value, "__float__"):
        x = float(value)
        if math.isnan(x):
            return "nan"
        return format(x, ".17g")
    return str(value)


def write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
