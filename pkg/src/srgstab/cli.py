"""Command-line front end: load models or network cases, run the SRG
certification and comparison criteria, and export plot-ready artifacts.

Exit codes: 0 certified/success, 2 not-certified, 3 indeterminate, 1 error.
Outputs are deterministic for a fixed invocation and seed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .cpl import CplParams
from .criteria import (
    SrgOptions,
    VERDICT_CERTIFIED,
    VERDICT_NOT_CERTIFIED,
    certify_linear,
    certify_with_cpl,
    compare_criteria,
    critical_scr,
    margin_profile,
)
from .gridmodels import (
    FrequencyDataSet,
    kron_reduce,
    kron_reduced_admittance,
    save_frequency_data,
)
from .lti import (
    EvaluationError,
    FrequencyGrid,
    RationalModel,
    SampledModel,
    evaluate,
    model_dim,
)
from .modelio import (
    ModelFormatError,
    cscr_to_dict,
    load_model,
    load_network,
    provenance,
    report_to_dict,
    write_boundary_csv,
    write_json,
)
from .srg import srg_of_matrix


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # keep exit code 1 for usage errors; 2/3 are reserved for verdicts
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p: _Parser, grid_source: bool = True, converter: bool = True):
    if converter:
        p.add_argument("--converter", required=True, help="converter model JSON")
    if grid_source:
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--grid", help="grid-side model JSON")
        g.add_argument("--network", help="network case JSON (Kron-reduced per frequency)")
        g.add_argument("--scr", type=float, help="pure grid-strength screen: Ygrid = SCR * I")
        p.add_argument("--boundary", help="comma-separated 1-based boundary buses "
                                          "(overrides the network file)")
    p.add_argument("--fmin", type=float, default=1e-2, help="grid start (Hz)")
    p.add_argument("--fmax", type=float, default=1e3, help="grid end (Hz)")
    p.add_argument("--npoints", type=int, default=400, help="number of grid points")
    p.add_argument("--spacing", choices=("log", "linear"), default="log")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0, help="seed echoed into provenance")
    p.add_argument("--tau-points", type=int, default=64, help="tau grid size")
    p.add_argument("--n-support", type=int, default=512,
                   help="SRG boundary support angles")
    p.add_argument("--refine-tol", type=float, default=None,
                   help="SRG boundary refinement tolerance (absolute)")


def _build_parser() -> _Parser:
    parser = _Parser(prog="srgstab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("certify", help="SRG separation certification")
    _add_common(p)

    p = sub.add_parser("certify-cpl", help="certification with a constant power load")
    _add_common(p)
    p.add_argument("--cpl", required=True, metavar="p,q,vmin",
                   help="constant-power-load parameters")
    p.add_argument("--ripple-rho", type=float, default=0.05,
                   help="ripple ratio for the harmonic-remainder diagnostic")

    p = sub.add_parser("cscr", help="critical short-circuit ratio of a converter")
    _add_common(p, grid_source=False)

    p = sub.add_parser("compare", help="SRG vs classical criteria side by side")
    _add_common(p)

    p = sub.add_parser("kron", help="reduce a network to its boundary impedance")
    _add_common(p, converter=False)

    p = sub.add_parser("srg-export", help="export SRG boundary polylines as CSV")
    _add_common(p)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _grid_for(args, omega0: float) -> FrequencyGrid:
    try:
        return FrequencyGrid.from_hz(args.fmin, args.fmax, args.npoints,
                                     args.spacing, include=(omega0,))
    except ValueError as exc:
        raise CliError(f"invalid frequency grid: {exc}") from exc


def _opts(args) -> SrgOptions:
    return SrgOptions(n_support=args.n_support, refine_tol=args.refine_tol,
                      tau_points=args.tau_points)


def _parse_cpl(text: str) -> CplParams:
    parts = text.split(",")
    if len(parts) != 3:
        raise CliError("--cpl expects three comma-separated values: p,q,vmin")
    try:
        p, q, vmin = (float(x) for x in parts)
        return CplParams(p_c=p, q_c=q, v_min=vmin)
    except ValueError as exc:
        raise CliError(f"--cpl: {exc}") from exc


def _network_case(args):
    case = load_network(args.network)
    if args.boundary:
        try:
            boundary = tuple(int(b) - 1 for b in args.boundary.split(","))
        except ValueError as exc:
            raise CliError(f"--boundary: {exc}") from exc
        case = type(case)(n_bus=case.n_bus, branches=case.branches,
                          shunts=case.shunts, boundary=boundary, omega0=case.omega0)
    return case


def _grid_model(args, grid: FrequencyGrid):
    """(Ygrid model, label, input paths) from --grid/--network/--scr."""
    if args.grid:
        return load_model(args.grid), Path(args.grid).name, {"grid": args.grid}
    if args.scr is not None:
        if args.scr <= 0:
            raise CliError("--scr must be positive")
        return (RationalModel.constant(args.scr * np.eye(2)),
                f"scr={args.scr}", {})
    case = _network_case(args)
    mats = np.stack([kron_reduced_admittance(case, w) for w in grid.omegas])
    model = SampledModel(omegas=grid.omegas, matrices=mats,
                         label=f"kron({Path(args.network).name})")
    return model, model.label, {"network": args.network}


def _omega0_for(args) -> float:
    if getattr(args, "network", None):
        return load_network(args.network).omega0
    return 2 * np.pi * 50.0


def _finish_report(args, report, inputs: dict, grid: FrequencyGrid) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    prov = provenance(inputs, grid, seed=args.seed,
                      extra={"tau_points": args.tau_points,
                             "n_support": args.n_support})
    write_json(out / "report.json", report_to_dict(report, prov))
    (out / "margin.csv").write_text(margin_profile(report))
    f_worst = report.worst_omega / (2 * np.pi)
    print(f"{report.verdict}: worst rho = {report.worst_margin:.6g} "
          f"at f = {f_worst:.6g} Hz")
    if report.verdict == VERDICT_CERTIFIED:
        return 0
    if report.verdict == VERDICT_NOT_CERTIFIED:
        return 2
    return 3


def _cmd_certify(args) -> int:
    Yc = load_model(args.converter)
    grid = _grid_for(args, _omega0_for(args))
    Ygrid, grid_label, inputs = _grid_model(args, grid)
    inputs["converter"] = args.converter
    report = certify_linear(Yc, Ygrid, grid, _opts(args),
                            converter_label=Path(args.converter).name,
                            grid_label=grid_label)
    return _finish_report(args, report, inputs, grid)


def _cmd_certify_cpl(args) -> int:
    Yc = load_model(args.converter)
    cpl = _parse_cpl(args.cpl)
    grid = _grid_for(args, _omega0_for(args))
    y_l, grid_label, inputs = _grid_model(args, grid)
    inputs["converter"] = args.converter
    report = certify_with_cpl(Yc, y_l, cpl, grid, _opts(args),
                              ripple_rho=args.ripple_rho,
                              converter_label=Path(args.converter).name,
                              grid_label=f"{grid_label}+cpl({args.cpl})")
    return _finish_report(args, report, inputs, grid)


def _cmd_cscr(args) -> int:
    Yc = load_model(args.converter)
    grid = _grid_for(args, 2 * np.pi * 50.0)
    result = critical_scr(Yc, grid, _opts(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    prov = provenance({"converter": args.converter}, grid, seed=args.seed,
                      extra={"tau_points": args.tau_points,
                             "n_support": args.n_support})
    write_json(out / "cscr.json", cscr_to_dict(result, prov))
    if result.no_constraint:
        print("cSCR: no constraint (swept region never meets the positive real axis)")
    else:
        print(f"cSCR = {result.cscr:.6g} at f = {result.critical_frequency_hz:.6g} Hz")
    return 0


def _cmd_compare(args) -> int:
    Yc = load_model(args.converter)
    grid = _grid_for(args, _omega0_for(args))
    Ygrid, grid_label, inputs = _grid_model(args, grid)
    inputs["converter"] = args.converter
    table = compare_criteria(Yc, Ygrid, grid, _opts(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    text = table.as_text()
    (out / "compare.txt").write_text(text + "\n")
    prov = provenance(inputs, grid, seed=args.seed)
    doc = report_to_dict(table.report, prov)
    doc["criteria"] = [
        {"criterion": r.criterion, "verdict": r.verdict,
         "failing_bands_hz": [list(b) for b in r.failing_bands_hz],
         "inapplicable_bands_hz": [list(b) for b in r.inapplicable_bands_hz],
         "note": r.note}
        for r in table.rows
    ]
    write_json(out / "report.json", doc)
    print(text)
    report = table.report
    if report.verdict == VERDICT_CERTIFIED:
        return 0
    if report.verdict == VERDICT_NOT_CERTIFIED:
        return 2
    return 3


def _cmd_kron(args) -> int:
    if not args.network:
        raise CliError("kron requires --network")
    case = _network_case(args)
    grid = _grid_for(args, case.omega0)
    Z = np.stack([kron_reduce(case, w) for w in grid.omegas])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    nb = len(case.boundary)
    for bi in range(nb):
        for bj in range(nb):
            block = Z[:, 2 * bi:2 * bi + 2, 2 * bj:2 * bj + 2]
            data = FrequencyDataSet(f_hz=grid.hz, matrices=block,
                                    label=f"kron block ({bi},{bj})")
            name = "kron.csv" if nb == 1 else f"kron_b{bi + 1}_b{bj + 1}.csv"
            save_frequency_data(out / name, data)
    print(f"reduced {case.n_bus}-bus case to {2 * nb}x{2 * nb} impedance "
          f"on {len(grid)} frequencies")
    return 0


def _cmd_srg_export(args) -> int:
    Yc = load_model(args.converter)
    grid = _grid_for(args, _omega0_for(args))
    Ygrid, _, _ = _grid_model(args, grid)
    opts = _opts(args)
    entries = []
    for w in grid.omegas:
        f_hz = w / (2 * np.pi)
        entries.append((f_hz, "converter",
                        srg_of_matrix(evaluate(Yc, w), opts.n_support, opts.refine_tol)))
        entries.append((f_hz, "grid",
                        srg_of_matrix(evaluate(Ygrid, w), opts.n_support, opts.refine_tol)))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_boundary_csv(out / "boundaries.csv", entries)
    print(f"wrote boundary polylines for {len(grid)} frequencies")
    return 0


def _cmd_serve(args) -> int:
    try:
        import uvicorn
    except ImportError as exc:
        raise CliError("the 'serve' command requires uvicorn to be installed") from exc
    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "certify": _cmd_certify,
    "certify-cpl": _cmd_certify_cpl,
    "cscr": _cmd_cscr,
    "compare": _cmd_compare,
    "kron": _cmd_kron,
    "srg-export": _cmd_srg_export,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (CliError, ModelFormatError, EvaluationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
