"""CSV, JSON and directory layout of run results.

CSVs carry a header row, UNIX newlines and floats with 17 significant
digits, which round-trip float64 exactly. JSON files are written with
sorted keys so identical results give identical bytes; only the top-level
``provenance.json`` holds a timestamp.
"""

import csv
import datetime
import json
import math
import os

import numpy as np

from .errors import ConfigurationError

SERIES_HEADER = ("t_natural", "t_us", "fidelity", "s_fraction", "s_over_saturation",
                 "ee_raw", "ee_normalized")
SPECTRUM_HEADER = ("index", "energy_au")
LDOS_HEADER = ("energy_au", "overlap")
GEOMETRY_HEADER = ("sample", "atom", "position_um")
SUMMARY_HEADER = ("order", "d_um", "w", "gamma", "residual", "classification", "mean_r",
                  "mean_r_se", "ee_growth_label", "t_start", "t_end", "collapse_time",
                  "t_heisenberg", "n_samples", "n_failed")


def format_value(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    return str(v)


def write_csv(path, header, rows):
    """Write ``rows`` (an iterable of sequences) under ``header``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(v) for v in row])


def write_columns(path, columns):
    """Write a dict of equal-length columns."""
    header = tuple(columns)
    write_csv(path, header, zip(*(np.asarray(columns[k]).tolist() for k in header)))


def series_text(columns):
    """The series CSV as a string (for standard output)."""
    header = tuple(columns)
    lines = [",".join(header)]
    for row in zip(*(np.asarray(columns[k]).tolist() for k in header)):
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def read_csv(path):
    """Read a CSV written by this module into a dict of columns.

    Columns that parse as floats become float arrays; others stay lists.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise ConfigurationError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    out = {}
    for k, col in zip(header, zip(*body) if body else [()] * len(header)):
        try:
            out[k] = np.array([float(v) if v != "" else np.nan for v in col])
        except ValueError:
            out[k] = list(col)
    return out


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj):
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps(obj))


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read JSON {path}: {exc}") from None


def cell_dirname(d, w):
    return f"d{float(d)!r}_w{float(w)!r}"


def write_cell(root, cell, constants):
    """One directory per cell: averaged series, standard errors, fit report,
    per-sample spectral summary and a details sidecar."""
    path = os.path.join(root, cell_dirname(cell.d_um, cell.w))
    os.makedirs(path, exist_ok=True)
    write_columns(os.path.join(path, "series.csv"), cell.series_columns)
    write_columns(os.path.join(path, "series_se.csv"), cell.error_columns)
    write_json(os.path.join(path, "fit.json"), cell.fit_report())
    details = cell.details()
    details["constants"] = constants.to_dict()
    write_json(os.path.join(path, "cell.json"), details)
    write_csv(os.path.join(path, "samples.csv"),
              ("sample", "seed", "mean_r", "t_heisenberg", "gamma"), _sample_rows(cell))
    return path


def _sample_rows(cell):
    # per-sample arrays hold the successful samples only
    good = [i for i in range(cell.n_samples) if i not in cell.failures]
    for k, i in enumerate(good):
        yield i, cell.seeds[i], cell.sample_mean_r[k], cell.sample_t_heisenberg[k], cell.sample_gamma[k]


def summary_row(cell):
    d = cell.decay
    window = d.fit_window or (None, None)
    return (cell.order, cell.d_um, cell.w, d.gamma, d.residual, d.classification, cell.mean_r,
            cell.mean_r_se, cell.ee_growth_label, window[0], window[1], d.collapse_time,
            cell.t_heisenberg, cell.n_samples, cell.n_failed)


def write_results(root, result, timestamp=True):
    """Write every cell, ``summary.csv``, the config and the provenance sidecar."""
    os.makedirs(root, exist_ok=True)
    constants = result.config.constants()
    for cell in result.cells:
        write_cell(root, cell, constants)
    write_csv(os.path.join(root, "summary.csv"), SUMMARY_HEADER,
              (summary_row(c) for c in result.cells))
    result.config.save(os.path.join(root, "config.cfg"))
    prov = result.provenance()
    prov["failed_cells"] = {cell_dirname(d, w): msg for (d, w), msg in result.failed_cells.items()}
    if timestamp:
        prov["created"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    write_json(os.path.join(root, "provenance.json"), prov)
    return root


def read_summary(path):
    if os.path.isdir(path):
        path = os.path.join(path, "summary.csv")
    return read_csv(path)
