"""Command-line interface.

Subcommands: ``count`` (renormalized spectral count), ``curves``
(box scan with CSV/SVG export and a rendered figure), ``check``
(assumption report), ``oracle`` (three-way cross-validation table),
``audit`` (Maslov-box shelf report). Exit status is 0 on success, 2 on
an assumption failure, 3 on an indeterminate crossing, and 1 for any
other error.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import build_system, parse_config
from .counting import renormalized_count
from .curves import export_curves, render_curves, scan_box
from .errors import (
    AssumptionFailureError,
    IndeterminateCrossingError,
    MaslovCountError,
    WindowTouchesEssentialSpectrumError,
)
from .flow import maslov_box_audit
from .oracle import fd_count, standard_maslov_count
from .propagation import default_grid
from .systems import check_assumptions

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ASSUMPTION = 2
EXIT_INDETERMINATE = 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="maslov-count",
        description="Spectral counts for linear Hamiltonian systems on [0, 1] "
                    "via renormalized conjugate-point counting.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("count", "renormalized spectral count over the window"),
        ("curves", "scan the box and export curve files"),
        ("check", "run the assumption checks and report"),
        ("oracle", "cross-validate the count three ways"),
        ("audit", "compute the four Maslov-box shelves"),
    ):
        q = sub.add_parser(name, help=doc)
        q.add_argument("--config", required=True, help="path to a config file")
        q.add_argument("--window", default=None,
                       help="override the window, e.g. --window 0,50")
        q.add_argument("--json", action="store_true", help="emit JSON")
        q.add_argument("--out", default=None,
                       help="output path (report file, or CSV base for curves)")
        if name == "curves":
            q.add_argument("--resolution", type=int, default=41,
                           help="number of lambda columns (default 41)")
            q.add_argument("--method", default="renormalized",
                           choices=["renormalized", "standard", "both"])
            q.add_argument("--no-plot", action="store_true",
                           help="skip the rendered figure")
    return p


def _load(args):
    text = Path(args.config).read_text(encoding="utf-8")
    cfg = parse_config(text)
    sys_, bc, window, options = build_system(cfg)
    if args.window:
        a, _, b = args.window.partition(",")
        window = (float(a), float(b))
    if window is None:
        raise MaslovCountError("no window given (config key 'window' or --window)")
    return sys_, bc, window, options


def _grid(options):
    return default_grid(int(options.get("x_samples", 2001)))


def _emit(args, text_lines, payload):
    out = json.dumps(payload, indent=2, sort_keys=True) if args.json \
        else "\n".join(text_lines)
    if args.out and args.command != "curves":
        Path(args.out).write_text(out + "\n", encoding="utf-8")
    else:
        print(out)


def _crossing_payload(crossings):
    return [
        {"x": c.location, "multiplicity": c.multiplicity,
         "direction": c.direction, "side": c.side}
        for c in crossings
    ]


def _cmd_count(args) -> int:
    sys_, bc, window, options = _load(args)
    report = renormalized_count(sys_, bc, window[0], window[1],
                                x_grid=_grid(options))
    lines = ["spectral count report"] + ["  " + s for s in report.lines()]
    payload = {
        "count": report.count,
        "window": list(report.window),
        "method": report.method,
        "crossings": _crossing_payload(report.crossings),
        "warnings": report.warnings,
    }
    _emit(args, lines, payload)
    return EXIT_OK


def _cmd_check(args) -> int:
    try:
        sys_, bc, window, _ = _load(args)
    except WindowTouchesEssentialSpectrumError as exc:
        lines = ["assumption report",
                 f"  essential  FAIL  ({exc})"]
        payload = {"ok": False,
                   "checks": [{"name": "essential", "passed": False,
                               "note": str(exc)}]}
        _emit(args, lines, payload)
        return EXIT_ASSUMPTION
    report = check_assumptions(sys_, bc, window[0], window[1])
    lines = ["assumption report"] + ["  " + s for s in report.lines()]
    payload = {
        "ok": report.ok,
        "window": list(report.lambda_window),
        "checks": [
            {"name": c.name, "passed": c.passed,
             "margin": None if np.isnan(c.margin) else c.margin,
             "note": c.note}
            for c in report.checks
        ],
    }
    _emit(args, lines, payload)
    return EXIT_OK if report.ok else EXIT_ASSUMPTION


def _cmd_oracle(args) -> int:
    sys_, bc, window, options = _load(args)
    lam1, lam2 = window
    grid = _grid(options)
    renorm = renormalized_count(sys_, bc, lam1, lam2, x_grid=grid)
    standard, _ = standard_maslov_count(sys_, bc, lam1, lam2, x_grid=grid)
    fd = fd_count(sys_, bc, lam1, lam2)
    agree = renorm.count == standard == fd.count == fd.count_coarse
    lines = [
        "three-way count comparison",
        f"  window:            [{lam1:.12g}, {lam2:.12g})",
        f"  renormalized:      {renorm.count}",
        f"  standard (target): {standard}",
        f"  finite-difference: {fd.count} (h/2 mesh; h mesh gives {fd.count_coarse})",
        f"  agreement:         {'yes' if agree else 'NO'}",
    ]
    payload = {
        "window": [lam1, lam2],
        "renormalized": renorm.count,
        "standard": standard,
        "finite_difference": fd.count,
        "finite_difference_coarse": fd.count_coarse,
        "fd_eigenvalues_in_window": [float(v) for v in fd.eigenvalues_in_window],
        "agreement": bool(agree),
    }
    _emit(args, lines, payload)
    return EXIT_OK if agree else EXIT_ERROR


def _cmd_audit(args) -> int:
    sys_, bc, window, options = _load(args)
    report = maslov_box_audit(sys_, bc, window[0], window[1],
                              x_grid=_grid(options),
                              lam_samples=int(options.get("lambda_samples", 101)))
    lines = ["maslov box audit"] + ["  " + s for s in report.lines()]
    payload = {
        "bottom": report.bottom.index,
        "right": report.right.index,
        "top": report.top.index,
        "left": report.left.index,
        "loop_sum": report.loop_sum,
        "count": report.count,
        "consistent": report.consistent,
        "top_crossings": _crossing_payload(report.top.crossings),
        "left_crossings": _crossing_payload(report.left.crossings),
    }
    _emit(args, lines, payload)
    return EXIT_OK


def _cmd_curves(args) -> int:
    sys_, bc, window, options = _load(args)
    lam1, lam2 = window
    methods = ["renormalized", "standard"] if args.method == "both" else [args.method]
    base = Path(args.out) if args.out else Path("curves.csv")
    if base.suffix != ".csv":
        base = base.with_suffix(".csv")
    written = []
    sets = []
    for method in methods:
        cs = scan_box(sys_, bc, lam1, lam2, lam_samples=args.resolution,
                      method=method)
        sets.append(cs)
        stem = base if len(methods) == 1 else base.with_name(
            f"{base.stem}_{method}{base.suffix}")
        export_curves(cs, "csv", stem)
        export_curves(cs, "svg", stem.with_suffix(".svg"))
        written += [str(stem), str(stem.with_suffix(".svg"))]
    if not args.no_plot:
        png = base.with_suffix(".png")
        render_curves(sets, png)
        written.append(str(png))
    lines = ["curve scan"]
    for cs in sets:
        lines.append(f"  {cs.method}: {len(cs.curves)} curves, "
                     f"{len(cs.points)} points, "
                     f"top-shelf crossings at {['%.9g' % t for t in cs.top_crossings]}")
    lines += ["  wrote " + w for w in written]
    payload = {
        "files": written,
        "sets": [
            {"method": cs.method, "curves": len(cs.curves),
             "points": len(cs.points),
             "top_crossings": [float(t) for t in cs.top_crossings]}
            for cs in sets
        ],
    }
    _emit(args, lines, payload)
    return EXIT_OK


_COMMANDS = {
    "count": _cmd_count,
    "curves": _cmd_curves,
    "check": _cmd_check,
    "oracle": _cmd_oracle,
    "audit": _cmd_audit,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except AssumptionFailureError as exc:
        print(f"assumption failure: {exc}", file=_sys.stderr)
        return EXIT_ASSUMPTION
    except IndeterminateCrossingError as exc:
        print(f"indeterminate crossing: {exc}", file=_sys.stderr)
        return EXIT_INDETERMINATE
    except MaslovCountError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"io error: {exc}", file=_sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
