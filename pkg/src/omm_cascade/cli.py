"""Command-line interface.

Exit status: 0 on success, 1 for usage, parse or I/O errors, 2 when the
system is unstable (the report is still written).
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, dump_config, load_config, parse_config  # noqa: F401
from .gaussian import analyze, check_stability
from .linalg import eigenvalues
from .model import linearize
from .sweep import FIGURES, Axis, SweepSpec, figure_preset, run_sweep, write_table

EXIT_OK, EXIT_ERROR, EXIT_UNSTABLE = 0, 1, 2


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(v)
    if math.isnan(v):
        return ""
    return format(float(v), ".17g")


def format_record(record):
    return "".join(f"{k}={_fmt(v)}\n" for k, v in record.items())


def _workers(args):
    if args.workers is not None:
        return args.workers
    return int(os.environ.get("OMM_WORKERS", "1") or 1)


def cmd_solve(args):
    params = load_config(args.config)
    report = analyze(params)
    rec = report.to_record(bipartitions=True)
    if args.format == "csv":
        keys = list(rec)
        text = ",".join(keys) + "\n" + ",".join(_fmt(rec[k]) for k in keys) + "\n"
    else:
        text = format_record(rec)
    _emit(text, args.out)
    return EXIT_OK if report.stable else EXIT_UNSTABLE


def cmd_sweep(args):
    params = load_config(args.config)
    axes = []
    for text in args.axis:
        axes.append(Axis.parse(text))
    if not 1 <= len(axes) <= 2:
        raise ValueError("give one or two --axis options")
    spec = SweepSpec(base=params, axes=tuple(axes), name=Path(args.out).stem)
    table = run_sweep(spec, workers=_workers(args))
    write_table(table, args.out)
    return EXIT_OK


def cmd_reproduce(args):
    if args.figure not in FIGURES:
        raise KeyError(f"unknown figure {args.figure!r}; known: {', '.join(FIGURES)}")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = [f"figure={args.figure}", f"version={__version__}"]
    for panel in FIGURES[args.figure]:
        spec = figure_preset(panel, points=args.points)
        table = run_sweep(spec, workers=_workers(args))
        path = out / f"{panel}.csv"
        write_table(table, path)
        manifest.append(f"{panel}.file={path.name}")
        for i, ax in enumerate(spec.axes, start=1):
            manifest.append(f"{panel}.axis{i}={ax.path}:{_fmt(ax.start)}:{_fmt(ax.stop)}:{ax.num}")
        for line in dump_config(spec.base).splitlines():
            line = line.strip()
            if line.startswith("["):
                section = line.strip("[]")
            elif line:
                key, _, value = line.partition(" = ")
                manifest.append(f"{panel}.{section}.{key}={value}")
    (out / "manifest.txt").write_text("\n".join(manifest) + "\n", encoding="ascii")
    return EXIT_OK


def cmd_stability(args):
    params = load_config(args.config)
    model = linearize(params)
    A = model.A
    st = check_stability(A / model.omega_scale)
    lines = [f"stable={int(st.stable)}", f"stability_margin={_fmt(st.margin * model.omega_scale)}"]
    for lam in eigenvalues(A):
        lines.append(f"{_fmt(lam.real)} {_fmt(lam.imag)}")
    for flag in model.flags:
        lines.append(f"# {flag}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if st.stable else EXIT_UNSTABLE


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="ascii")


def build_parser():
    p = argparse.ArgumentParser(
        prog="omm-cascade",
        description="Steady-state entanglement of two cascaded optomagnomechanical systems. "
        "Config frequencies are in Hz (multiplied by 2*pi); use the _rad suffix for rad/s.",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="steady state and entanglement for one configuration")
    s.add_argument("config")
    s.add_argument("-o", "--out", help="output file (default: stdout)")
    s.add_argument("--format", choices=("kv", "csv"), default="kv")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("sweep", help="grid sweep over one or two parameters")
    s.add_argument("config")
    s.add_argument("--axis", action="append", default=[], metavar="PATH=START:STOP:N")
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("reproduce", help="run the presets of one figure")
    s.add_argument("figure", help=", ".join(FIGURES))
    s.add_argument("--out-dir", default=".")
    s.add_argument("--points", type=int, help="override grid points per axis")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_reproduce)

    s = sub.add_parser("stability", help="eigenvalues of the drift matrix (rad/s)")
    s.add_argument("config")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_stability)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"omm-cascade: config error:\n{exc}", file=sys.stderr)
    except KeyError as exc:
        print(f"omm-cascade: {exc.args[0] if exc.args else exc}", file=sys.stderr)
    except (OSError, ValueError) as exc:
        print(f"omm-cascade: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
