"""Command-line front end: ``cwlm validate|simulate|sweep --config <path>``.

Exit codes: 0 success, 1 usage or parse error, 2 detector validity
violation, 3 numeric failure (other T values are still written).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, RunConfig, load_config
from .detectors import derived_quantities, validate
from .distributions import (JointDistribution, auto_grid, certainty_slope, conditional_slice,
                            difference_and_certainty, grid_for_output_range,
                            joint_distribution, marginal, moments)
from .errors import CWLMError, GridError, NumericalOverflow, ZeroPostSelectionProbability
from .qubit import bloch_to_density
from .shifts import PolarizationPair, shift_quasi_2d, shift_weights_1d

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3
_NUMERIC_ERRORS = (ZeroPostSelectionProbability, NumericalOverflow, GridError, FloatingPointError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cwlm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (("validate", "check the detector noise inequalities"),
                       ("simulate", "compute distributions for every T"),
                       ("sweep", "simulate and summarize moments versus T")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, type=Path)
        if name != "validate":
            p.add_argument("--out", type=Path, default=Path("cwlm_out"))
            p.add_argument("--force", action="store_true",
                           help="run even if the detector validator fails")
            p.add_argument("--plots", action="store_true", help="also write SVG plots")
    return parser


def _report(run: RunConfig, stream) -> bool:
    c = run.system.effective_correlators()
    d = derived_quantities(c)
    print(f"# {run.name}: model={run.system.model} t_a={d.t_a.tolist()} "
          f"K_i={d.k.tolist()}", file=stream)
    reports = validate(c)
    for r in reports:
        print(r.line(), file=stream)
    ok = all(r.passed for r in reports)
    print("valid" if ok else "INVALID", file=stream)
    return ok


def cmd_validate(run: RunConfig, stream=None) -> int:
    stream = stream or sys.stdout
    return EXIT_OK if _report(run, stream) else EXIT_INVALID


def _grid(run: RunConfig, T: float):
    if run.o_max is not None:
        return grid_for_output_range(run.system, T, run.o_max, run.n)
    return auto_grid(run.system, T, run.n, run.chi_max)


def _joint(run: RunConfig, T: float, target=None) -> JointDistribution:
    return joint_distribution(run.system, bloch_to_density(run.prep),
                              run.postselection(T, target), T, grid=_grid(run, T),
                              metadata={"scenario": run.system.name})


def _pair(run: RunConfig, T: float):
    return _joint(run, T, "Z+"), _joint(run, T, "Z-")


def _slice_certainty(jp, jm, given: float):
    """Certainty of P+-(O2 | O1 = given) and its linear-fit slope."""
    sp = conditional_slice(jp, 0, given)
    sm = conditional_slice(jm, 0, given)
    cert = difference_and_certainty(sp.p, sm.p)
    beta, resid = certainty_slope(sp.o, cert.certainty, weight=sp.p + sm.p)
    return sp, sm, cert, beta, resid


def _write_joint(folder: Path, stem: str, jd: JointDistribution, plots: bool):
    io.write_joint(folder / f"{stem}.csv", jd.o1, jd.o2, jd.p)
    io.write_json(folder / f"{stem}.json", {
        **jd.metadata, "mass": jd.mass, "post_probability": jd.post_probability,
        "imag_residue": jd.imag_residue, "points": list(jd.p.shape)})
    if plots:
        io.svg_heatmap(folder / f"{stem}.svg", jd.o1, jd.o2, jd.p, title=f"{stem} T={jd.metadata['T']:.4g}")


def _products_for_T(run: RunConfig, T: float, folder: Path, plots: bool, summary: bool) -> dict:
    prod = run.products
    folder.mkdir(parents=True, exist_ok=True)
    jd = _joint(run, T)
    row = {"T": T, "post_probability": jd.post_probability, "mass": jd.mass}
    if prod.joint:
        _write_joint(folder, "joint", jd, plots)
    if prod.marginals:
        curves = []
        for axis in (0, 1):
            m = marginal(jd, axis)
            io.write_table(folder / f"marginal_o{axis + 1}.csv", ["o", "p"], [m.o, m.p])
            curves.append((m.o, m.p, f"O{axis + 1}"))
        if plots:
            io.svg_lines(folder / "marginals.svg", curves, title=f"marginals T={T:.4g}")
    if prod.slice_values:
        cond = prod.slice_axis - 1
        curves = []
        for k, y in enumerate(prod.slice_values):
            s = conditional_slice(jd, cond, y)
            io.write_table(folder / f"slice_given_o{prod.slice_axis}_{k:02d}.csv", ["o", "p"], [s.o, s.p])
            curves.append((s.o, s.p, s.label))
        io.write_json(folder / "slices.json", {"given_output": prod.slice_axis,
                                               "values": list(prod.slice_values)})
        if plots:
            io.svg_lines(folder / "slices.svg", curves, title=f"slices T={T:.4g}")
    mom = moments(jd)
    row.update(mean_o1=mom.mean[0], mean_o2=mom.mean[1], cov_11=mom.covariance[0, 0],
               cov_12=mom.covariance[0, 1], cov_22=mom.covariance[1, 1])
    if prod.moments:
        io.write_json(folder / "moments.json", {"mean": mom.mean, "covariance": mom.covariance,
                                                "skewness": mom.skewness, "T": T})
    if prod.needs_pair or summary:
        jp, jm = _pair(run, T)
        cert = difference_and_certainty(jp, jm)
        if prod.differences:
            io.write_table(folder / "difference.csv", ["o1", "o2", "p"],
                           [*np.meshgrid(jp.o1, jp.o2, indexing="ij"), cert.difference])
            if plots:
                io.svg_heatmap(folder / "difference.svg", jp.o1, jp.o2, cert.difference,
                               title=f"P+ - P- T={T:.4g}")
        sp, sm, scert, beta, resid = _slice_certainty(jp, jm, prod.certainty_given)
        if prod.certainty:
            io.write_table(folder / "certainty.csv", ["o1", "o2", "p"],
                           [*np.meshgrid(jp.o1, jp.o2, indexing="ij"), cert.certainty])
            io.write_table(folder / "certainty_slice.csv", ["o", "p"], [sp.o, scert.certainty])
            io.write_json(folder / "certainty.json", {"given_o1": prod.certainty_given,
                                                      "beta": beta, "residual": resid})
            if plots:
                io.svg_lines(folder / "certainty_slice.svg",
                             [(sp.o, scert.certainty, f"C(O2|O1={prod.certainty_given:g})")],
                             title=f"certainty T={T:.4g}")
        row.update(beta=beta, beta_residual=resid)
    return row


def _write_shifts(run: RunConfig, out: Path, plots: bool):
    req = run.products.shifts
    pp = PolarizationPair.of(req.p_i, req.p_f)
    w = shift_weights_1d(pp, req.axis)
    io.write_table(out / "shifts_weights.csv", ["s", "w"], [[-1.0, 0.0, 1.0], w])
    if req.grid2d:
        sm = shift_quasi_2d(pp, xi=float(req.xi))
        io.write_table(out / "shifts_2d.csv", ["s_x", "s_y", "c"],
                       [*np.meshgrid(sm.s_x, sm.s_y, indexing="ij"), sm.values])
        if plots:
            io.svg_heatmap(out / "shifts_2d.svg", sm.s_x, sm.s_y, sm.values,
                           title=f"shift quasi-distribution xi={req.xi:g}")


_SUMMARY_COLUMNS = ["T", "post_probability", "mass", "mean_o1", "mean_o2", "cov_11", "cov_12",
                    "cov_22", "beta", "beta_residual"]


def cmd_simulate(run: RunConfig, out: Path, force: bool = False, plots: bool = False,
                 summary: bool = False, stream=None) -> int:
    stream = stream or sys.stdout
    if not _report(run, stream) and not force:
        print("detector validation failed; use --force to run anyway", file=stream)
        return EXIT_INVALID
    out.mkdir(parents=True, exist_ok=True)
    rows, errors = [], {}
    for k, T in enumerate(run.T):
        try:
            rows.append(_products_for_T(run, T, out / f"T{k:02d}", plots, summary))
        except _NUMERIC_ERRORS as exc:
            errors[f"T{k:02d}"] = f"{type(exc).__name__}: {exc}"
            print(f"T={T:.6g}: {errors[f'T{k:02d}']}", file=stream)
    if run.products.shifts is not None:
        _write_shifts(run, out, plots)
    if summary:
        io.write_rows(out / "summary.csv", _SUMMARY_COLUMNS,
                      [[float(r.get(c, np.nan)) for c in _SUMMARY_COLUMNS] for r in rows])
        if plots and rows:
            ts = np.array([r["T"] for r in rows])
            io.svg_lines(out / "summary_means.svg",
                         [(ts, np.array([r["mean_o1"] for r in rows]), "mean O1"),
                          (ts, np.array([r["mean_o2"] for r in rows]), "mean O2")],
                         title="means vs T")
    io.write_json(out / "run.json", {
        "name": run.name, "scenario": run.system.name, "model": run.system.model,
        "T": list(run.T), "folders": [f"T{k:02d}" for k in range(len(run.T))],
        "frame_correction": run.frame_correction, "p_e": run.p_e, "errors": errors,
        "correlators": run.system.correlators.to_dict(),
        "hamiltonian": {"omega_x": run.system.hamiltonian.omega_x,
                        "omega_y": run.system.hamiltonian.omega_y,
                        "delta": run.system.hamiltonian.delta},
    })
    return EXIT_NUMERIC if errors else EXIT_OK


def cmd_sweep(run: RunConfig, out: Path, force: bool = False, plots: bool = False,
              stream=None) -> int:
    return cmd_simulate(run, out, force=force, plots=plots, summary=True, stream=stream)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        run = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "validate":
            return cmd_validate(run)
        if args.command == "simulate":
            return cmd_simulate(run, args.out, args.force, args.plots)
        return cmd_sweep(run, args.out, args.force, args.plots)
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CWLMError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
