"""Command line front end.

Every subcommand exits 0 on success. Failures print a one-line JSON object
``{"error", "message", "exit_code"}`` on standard error and exit with the
code of the error class (see :mod:`rydchain.errors`); command line misuse
exits 64.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import storage
from .analysis import fit_ee_growth, fit_gamma
from .basis import enumerate_sector, saturation_fraction, sector_dimension
from .config import METRICS, RunConfig
from .couplings import natural_time_unit
from .dynamics import quench_series
from .ensemble import EnsembleResult, run_cell, run_grid
from .errors import (ConfigurationError, DomainError, EnsembleError, RydchainError,
                     UsageError)
from .geometry import geometry_rows, sample_geometry
from .hamiltonian import SectorHamiltonian, assemble, row_sparsity_report
from .plotting import grid_from_summary, plot_ee, plot_fidelity, plot_grid
from .spectral import (detect_scar_candidates, diagonalize, gaussian_fit,
                       heisenberg_time, ldos, level_spacing_ratio, scar_concentration)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(obj):
    sys.stdout.write(storage.dumps(obj))


# model selection shared by the single-run subcommands

def _add_model_args(p, need_geometry=True):
    p.add_argument("--config", help="flat key = value run configuration")
    p.add_argument("--order", type=int, help="interaction order (2, 3 or 4)")
    p.add_argument("--atoms", type=int, dest="n_atoms", help="number of atoms")
    if need_geometry:
        p.add_argument("--d", type=float, help="lattice spacing in micrometers")
        p.add_argument("--w", type=float, help="disorder strength, 0 <= w < 0.5")
        p.add_argument("--seed", type=int, dest="base_seed", help="base seed")
        p.add_argument("--sample", type=int, default=0, help="ensemble sample index")
    p.add_argument("--alpha", type=float, help="two-body weakening factor in (0, 1]")
    p.add_argument("--mu", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--gamma-c", type=float, dest="gamma_c")
    p.add_argument("--delta", type=float)
    p.add_argument("--no-hopping", action="store_true", help="disable all hopping")
    for kind in ("ps", "psp", "ssp"):
        p.add_argument(f"--no-hop-{kind}", action="store_true")
    p.add_argument("--memory-budget", type=int, dest="memory_budget")


def _add_time_args(p):
    p.add_argument("--initial", dest="initial_pattern", help="initial state, e.g. pppp or ss'pp")
    p.add_argument("--cut", type=int, help="left block size for the entanglement cut")
    p.add_argument("--t-min", type=float, dest="t_min")
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--n-times", type=int, dest="n_times")
    p.add_argument("--metrics", help=f"comma list from {','.join(METRICS)}")


_OVERRIDE_KEYS = ("order", "n_atoms", "base_seed", "alpha", "mu", "nu", "gamma_c", "delta",
                  "memory_budget", "initial_pattern", "cut", "t_min", "t_max", "n_times",
                  "samples", "workers", "output_dir")


def _config(args):
    over = {k: getattr(args, k) for k in _OVERRIDE_KEYS if getattr(args, k, None) is not None}
    if getattr(args, "metrics", None):
        over["metrics"] = tuple(m.strip() for m in args.metrics.split(","))
    if getattr(args, "no_hopping", False):
        over.update(hop_ps=False, hop_psp=False, hop_ssp=False)
    for kind in ("ps", "psp", "ssp"):
        if getattr(args, f"no_hop_{kind}", False):
            over[f"hop_{kind}"] = False
    if getattr(args, "d", None) is not None:
        over["spacings_um"] = (args.d,)
    if getattr(args, "w", None) is not None:
        over["disorders"] = (args.w,)
    if args.config:
        return RunConfig.load(args.config, **over)
    if "order" not in over or "n_atoms" not in over:
        raise UsageError("--order and --atoms are required without --config")
    over.setdefault("disorders", (0.0,))
    return RunConfig(**over)


def _single(args):
    """Config, spacing, disorder and geometry of a single-sample subcommand."""
    cfg = _config(args)
    if getattr(args, "d", None) is None and len(cfg.spacings_um) != 1 and not args.config:
        raise UsageError("--d is required")
    d, w = cfg.spacings_um[0], cfg.disorders[0]
    geom = sample_geometry(cfg.n_atoms, d, w, cfg.base_seed, args.sample)
    return cfg, d, w, geom


# subcommands

def cmd_basis(args):
    if args.count_only:
        print(sector_dimension(args.n_atoms, args.order))
        return
    if args.saturation:
        print(f"{saturation_fraction(args.n_atoms, args.order):.17g}")
        return
    basis = enumerate_sector(args.n_atoms, args.order)
    text = basis.to_text()
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_assemble(args):
    cfg, d, w, geom = _single(args)
    basis = cfg.basis()
    H = assemble(basis, geom, cfg.constants(), memory_budget=cfg.memory_budget)
    with open(args.out, "wb") as fh:
        fh.write(H.to_bytes())
    if args.geometry_out:
        storage.write_csv(args.geometry_out, storage.GEOMETRY_HEADER,
                          ((args.sample, a, x) for _, a, x in geometry_rows([geom])))
    rep = row_sparsity_report(H, basis, geom, cfg.constants())
    _emit({"path": args.out, "dim": H.dim, "order": H.order, "n_atoms": H.n_atoms,
           "d_um": d, "w": w, "seed": geom.seed, "symmetric": H.is_symmetric(),
           "frobenius_norm": H.frobenius_norm(), "total_nonzeros": rep["total_nonzeros"],
           "coupling_types": rep["coupling_types"],
           "row_count_histogram": rep["row_count_histogram"]})


def _eigensystem(args):
    if args.hamiltonian:
        try:
            with open(args.hamiltonian, "rb") as fh:
                H = SectorHamiltonian.from_bytes(fh.read())
        except OSError as exc:
            raise ConfigurationError(f"cannot read {args.hamiltonian}: {exc}") from None
        return H, diagonalize(H, args.initial_index), None, None
    cfg, d, _, geom = _single(args)
    basis = cfg.basis()
    H = assemble(basis, geom, cfg.constants(), memory_budget=cfg.memory_budget)
    idx = basis.rank(cfg.initial_pattern)
    return H, diagonalize(H, idx), cfg, d


def cmd_spectrum(args):
    H, es, cfg, d = _eigensystem(args)
    E = es.eigenvalues
    os.makedirs(args.out_dir, exist_ok=True)
    storage.write_csv(os.path.join(args.out_dir, "spectrum.csv"), storage.SPECTRUM_HEADER,
                      enumerate(E.tolist()))
    storage.write_csv(os.path.join(args.out_dir, "ldos.csv"), storage.LDOS_HEADER,
                      zip(E.tolist(), es.overlaps.tolist()))
    tu = natural_time_unit(cfg.order, d, cfg.constants()) if cfg else None
    t_au, t_nat, t_us = heisenberg_time(E, tu)
    out = {"dim": es.dim, "ldos_sum": float(es.overlaps.sum()),
           "max_residual_over_norm": float(es.residuals(H).max() / max(H.frobenius_norm(), 1e-300)),
           "t_heisenberg_au": t_au, "t_heisenberg_natural": t_nat, "t_heisenberg_us": t_us}
    try:
        st = level_spacing_ratio(E)
        out.update(mean_r=st.mean_r, n_degenerate=st.n_degenerate)
    except DomainError as exc:
        out.update(mean_r=None, mean_r_error=str(exc))
    try:
        g = gaussian_fit(ldos(es, args.bins))
        out["gaussian_fit"] = {"mean": g.mean, "width": g.width, "r_squared": g.r_squared,
                               "sparse": g.sparse}
    except DomainError as exc:
        out["gaussian_fit"] = None
        out["gaussian_fit_error"] = str(exc)
    scars = detect_scar_candidates(es)
    out["scar_candidates"] = scars.tolist()
    out["scar_concentration"] = scar_concentration(es, scars)
    out["provenance"] = H.provenance or {"source": args.hamiltonian}
    out["initial_index"] = es.initial_index
    storage.write_json(os.path.join(args.out_dir, "spectrum.json"), out)
    _emit(out)


def cmd_evolve(args):
    cfg, d, _, geom = _single(args)
    basis = cfg.basis()
    c = cfg.constants()
    H = assemble(basis, geom, c, memory_budget=cfg.memory_budget)
    es = diagonalize(H, basis.rank(cfg.initial_pattern))
    tu = natural_time_unit(cfg.order, d, c)
    t_h = heisenberg_time(es.eigenvalues, tu)[1]
    metrics = tuple(m for m in cfg.metrics if m != "spectrum")
    series = quench_series(es, basis, cfg.quench(), tu,
                           saturation_fraction(cfg.n_atoms, cfg.order), t_h, metrics)
    if args.out:
        storage.write_columns(args.out, series.columns())
        storage.write_json(args.out + ".json", {
            "t_heisenberg": t_h, "saturation": series.saturation, "time_unit_au": tu,
            "order": cfg.order, "n_atoms": cfg.n_atoms, "d_um": d, "w": geom.disorder_w,
            "seed": geom.seed, "initial_pattern": cfg.initial_pattern,
            "cut": cfg.quench().cut_for(cfg.n_atoms), "constants": c.to_dict()})
    else:
        sys.stdout.write(storage.series_text(series.columns()))


def cmd_ensemble(args):
    cfg = _config(args)
    if len(cfg.spacings_um) != 1 or len(cfg.disorders) != 1:
        if args.d is None or args.w is None:
            raise UsageError("ensemble runs one cell: give --d and --w or a single-cell config")
    cell = run_cell(cfg, cfg.spacings_um[0], cfg.disorders[0])
    result = EnsembleResult(cfg.with_overrides(spacings_um=(cell.d_um,), disorders=(cell.w,)),
                            [cell])
    storage.write_results(args.out or cfg.output_dir, result)
    _emit(cell.fit_report())


def cmd_grid(args):
    cfg = _config(args)
    out = args.out or cfg.output_dir
    result = run_grid(cfg, strict=False)
    storage.write_results(out, result)
    _emit([c.fit_report() for c in result.cells])
    if result.failed_cells:
        raise EnsembleError(f"{len(result.failed_cells)} cell(s) failed; see "
                            f"{os.path.join(out, 'provenance.json')}")


def _window(args):
    return tuple(args.window) if args.window else None


def cmd_fit(args):
    cols = storage.read_csv(args.series)
    for k in ("t_natural", "fidelity"):
        if k not in cols:
            raise ConfigurationError(f"{args.series} has no {k!r} column")
    t, F = cols["t_natural"], cols["fidelity"]
    t_h = args.t_heisenberg if args.t_heisenberg is not None else np.inf
    fit = fit_gamma(t, F, t_h, window=_window(args))
    growth = None
    if "ee_normalized" in cols and np.all(np.isfinite(cols["ee_normalized"])):
        try:
            growth = fit_ee_growth(t, cols["ee_normalized"]).label
        except DomainError:
            growth = None
    report = {"order": args.order, "d_um": args.d, "w": args.w, "gamma": fit.gamma,
              "residual": fit.residual, "window": fit.fit_window,
              "classification": fit.classification, "mean_r": args.mean_r,
              "ee_growth_label": growth}
    if args.out:
        storage.write_json(args.out, report)
    _emit(report)


def cmd_plot(args):
    if args.grid:
        summary = storage.read_summary(args.results)
        if args.grid not in summary:
            raise ConfigurationError(f"summary has no column {args.grid!r}")
        ds, ws, table, labels = grid_from_summary(summary, args.grid)
        path = plot_grid(ds, ws, table, args.out, args.grid, labels)
    elif args.ee:
        cols = storage.read_csv(args.ee)
        if args.ee_scale == "max":
            S = cols["ee_raw"]
            S = S / S.max() if S.max() > 0 else S
            label = "S / max S"
        else:
            S, label = cols["ee_normalized"], "S / ln D_A"
        path = plot_ee(cols["t_natural"], S, args.out, split=args.split, ylabel=label)
    elif args.series:
        cols = storage.read_csv(args.series)
        fit = storage.read_json(args.fit) if args.fit else None
        path = plot_fidelity(cols["t_natural"], cols["fidelity"], args.out,
                             args.t_heisenberg, fit)
    else:
        raise UsageError("plot needs one of --series, --grid or --ee")
    _emit({"svg": path})


def cmd_report(args):
    summary = storage.read_summary(args.results)
    prov_path = os.path.join(args.results, "provenance.json")
    prov = storage.read_json(prov_path) if os.path.exists(prov_path) else {}
    if args.format == "json":
        rows = []
        for k in range(len(summary["order"])):
            rows.append({h: (summary[h][k] if not isinstance(summary[h], np.ndarray)
                             else float(summary[h][k])) for h in summary})
        _emit({"provenance": prov, "cells": rows})
        return
    cols = ("order", "d_um", "w", "gamma", "classification", "mean_r", "ee_growth_label")
    print(" | ".join(cols))
    for k in range(len(summary["order"])):
        vals = []
        for h in cols:
            v = summary[h][k]
            vals.append(f"{v:.4g}" if isinstance(v, float) else str(v))
        print(" | ".join(vals))
    if prov:
        print(f"config {prov.get('config_digest', '')[:12]}  samples {prov.get('samples')}  "
              f"base seed {prov.get('base_seed')}")


def build_parser():
    p = _Parser(prog="rydchain", description="Resonant-sector dynamics of Rydberg atom chains.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    b = sub.add_parser("basis", help="sector dimension or basis dump")
    b.add_argument("--order", type=int, required=True)
    b.add_argument("--atoms", type=int, dest="n_atoms", required=True)
    b.add_argument("--count-only", action="store_true")
    b.add_argument("--saturation", action="store_true", help="print the saturation fraction")
    b.add_argument("--out")
    b.set_defaults(func=cmd_basis)

    a = sub.add_parser("assemble", help="write the sector Hamiltonian (SECH binary)")
    _add_model_args(a)
    a.add_argument("--out", default="hamiltonian.sech")
    a.add_argument("--geometry-out")
    a.set_defaults(func=cmd_assemble)

    s = sub.add_parser("spectrum", help="eigenvalues, LDOS and spectral diagnostics")
    _add_model_args(s)
    _add_time_args(s)
    s.add_argument("--hamiltonian", help="read a SECH dump instead of assembling")
    s.add_argument("--initial-index", type=int, default=0)
    s.add_argument("--bins", type=int, default=60)
    s.add_argument("--out-dir", default=".")
    s.set_defaults(func=cmd_spectrum)

    e = sub.add_parser("evolve", help="quench time series of one chain")
    _add_model_args(e)
    _add_time_args(e)
    e.add_argument("--out", help="series CSV (default: standard output)")
    e.set_defaults(func=cmd_evolve)

    for name, func, helptext in (("ensemble", cmd_ensemble, "one disorder-averaged cell"),
                                 ("grid", cmd_grid, "all cells of a configuration")):
        g = sub.add_parser(name, help=helptext)
        _add_model_args(g)
        _add_time_args(g)
        g.add_argument("--samples", type=int)
        g.add_argument("--workers", type=int)
        g.add_argument("--out", help="results directory")
        g.set_defaults(func=func)

    f = sub.add_parser("fit", help="decay exponent and EE growth of a series CSV")
    f.add_argument("--series", required=True)
    f.add_argument("--t-heisenberg", type=float, dest="t_heisenberg")
    f.add_argument("--window", type=float, nargs=2, metavar=("T_START", "T_END"))
    f.add_argument("--order", type=int)
    f.add_argument("--d", type=float)
    f.add_argument("--w", type=float)
    f.add_argument("--mean-r", type=float, dest="mean_r")
    f.add_argument("--out")
    f.set_defaults(func=cmd_fit)

    pl = sub.add_parser("plot", help="render SVG figures")
    pl.add_argument("--series", help="series CSV for a log-log fidelity plot")
    pl.add_argument("--fit", help="fit JSON to overlay")
    pl.add_argument("--t-heisenberg", type=float, dest="t_heisenberg")
    pl.add_argument("--grid", choices=("gamma", "mean_r"), help="intensity table from summary.csv")
    pl.add_argument("--results", default="results", help="results directory or summary.csv")
    pl.add_argument("--ee", help="series CSV for the two-window entanglement plot")
    pl.add_argument("--ee-scale", choices=("max", "sector"), default="max",
                    help="divide S by its largest value or by ln D_A")
    pl.add_argument("--split", type=float, default=1.0)
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plot)

    r = sub.add_parser("report", help="tabulate a results directory")
    r.add_argument("--results", default="results")
    r.add_argument("--format", choices=("text", "json"), default="text")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
        return 0
    except RydchainError as exc:
        err = exc.to_dict()
    except OSError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": 8}
    except Exception as exc:  # noqa: BLE001 - report anything as machine-readable JSON
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": 1}
    sys.stderr.write(json.dumps(err) + "\n")
    return err["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
