"""Parameter grids, figure presets and CSV tables.

Axis values are expressed in configuration units (Hz for frequencies, see
:mod:`omm_cascade.config`).  Each grid point runs the full pipeline of
:func:`omm_cascade.gaussian.analyze`; points are independent, so the grid can
be spread over a process pool without changing the result.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import resolve_path, set_param
from .gaussian import analyze
from .model import PhysicalParams, SubsystemParams, hz

log = logging.getLogger(__name__)

REPORT_COLUMNS = (
    "E_a1c1", "E_m1c1", "E_a2c2", "E_m2c2",
    "quad_witness_ac", "quad_witness_mc",
    "stable", "stability_margin",
)
DIAGNOSTICS = ("min_symplectic", "lyapunov_residual")

DEFAULT_POINTS = 201
DEFAULT_POINTS_2D = 41


@dataclass(frozen=True)
class Axis:
    path: str
    start: float
    stop: float
    num: int = DEFAULT_POINTS

    def __post_init__(self):
        if self.num < 2:
            raise ValueError(f"axis {self.path!r}: need at least 2 points, got {self.num}")
        if self.start == self.stop:
            raise ValueError(f"axis {self.path!r}: start equals stop")
        resolve_path(self.path)

    @property
    def values(self):
        return np.linspace(self.start, self.stop, self.num)

    @classmethod
    def parse(cls, text):
        """``'path=start:stop:num'`` -> :class:`Axis`."""
        path, sep, rng = text.partition("=")
        parts = rng.split(":")
        if not sep or len(parts) != 3:
            raise ValueError(f"axis must look like path=start:stop:num, got {text!r}")
        try:
            return cls(path.strip(), float(parts[0]), float(parts[1]), int(parts[2]))
        except ValueError as exc:
            raise ValueError(f"bad axis {text!r}: {exc}") from exc


@dataclass(frozen=True)
class SweepSpec:
    base: PhysicalParams
    axes: tuple
    outputs: tuple = REPORT_COLUMNS
    name: str = ""
    quad: bool = True

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not 1 <= len(self.axes) <= 2:
            raise ValueError(f"a sweep has 1 or 2 axes, got {len(self.axes)}")
        unknown = set(self.outputs) - set(REPORT_COLUMNS)
        if unknown:
            raise ValueError(f"unknown output columns: {sorted(unknown)}")
        for ax in self.axes:
            set_param(self.base, ax.path, ax.start)

    @property
    def columns(self):
        axes = [f"axis{i + 1}" for i in range(len(self.axes))]
        return axes + [c for c in REPORT_COLUMNS if c in self.outputs]

    def points(self):
        """Grid points in lexicographic order of the axis indices."""
        return list(itertools.product(*(ax.values for ax in self.axes)))

    def params_at(self, point):
        p = self.base
        for ax, v in zip(self.axes, point):
            p = set_param(p, ax.path, v)
        return p


@dataclass
class SweepTable:
    columns: list
    rows: np.ndarray
    diagnostics: np.ndarray = None
    axis_paths: tuple = ()
    all_unstable: bool = False

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float).reshape(-1, len(self.columns))
        if self.diagnostics is None:
            self.diagnostics = np.full((len(self.rows), len(DIAGNOSTICS)), np.nan)

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, column):
        return self.rows[:, self.columns.index(column)]

    def grid(self, column):
        """Column reshaped to the axis grid (2-D sweeps only)."""
        n1 = len(np.unique(self["axis1"]))
        return self[column].reshape(n1, -1)


def _evaluate(args):
    params, quad = args
    rep = analyze(params, quad=quad)
    rec = rep.to_record()
    return rec, (rep.min_symplectic, rep.lyapunov_residual)


def _resolve_workers(workers):
    if workers is None:
        workers = int(os.environ.get("OMM_WORKERS", "1") or 1)
    return max(1, int(workers))


def run_sweep(spec, workers=1):
    """Evaluate every grid point of ``spec`` and tabulate the reports.

    Unstable points are kept with ``stable = 0`` and NaN entanglement values.
    """
    points = spec.points()
    jobs = [(spec.params_at(pt), spec.quad) for pt in points]
    workers = _resolve_workers(workers)
    if workers == 1:
        results = [_evaluate(j) for j in jobs]
    else:
        chunk = max(1, len(jobs) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate, jobs, chunksize=chunk))
    cols = spec.columns
    rows = np.empty((len(points), len(cols)))
    diag = np.empty((len(points), len(DIAGNOSTICS)))
    for r, (pt, (rec, extra)) in enumerate(zip(points, results)):
        vals = list(pt) + [rec[c] for c in cols[len(pt):]]
        rows[r] = vals
        diag[r] = extra
    all_unstable = "stable" in cols and not np.any(rows[:, cols.index("stable")] == 1)
    if all_unstable:
        log.warning("sweep %s: every grid point is unstable", spec.name or "")
    return SweepTable(
        columns=cols,
        rows=rows,
        diagnostics=diag,
        axis_paths=tuple(ax.path for ax in spec.axes),
        all_unstable=all_unstable,
    )


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _cell(column, x):
    if math.isnan(x):
        return ""
    if column == "stable":
        return str(int(x))
    return format(x, ".17g")


def format_table(table):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_cell(c, x) for c, x in zip(table.columns, row)])
    return buf.getvalue()


def write_table(table, destination):
    """Write ``table`` as CSV to a path or text stream; returns bytes written."""
    text = format_table(table)
    data = text.encode("ascii")
    if hasattr(destination, "write"):
        destination.write(text)
        return len(data)
    try:
        with open(destination, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(f"cannot write table to {destination}: {exc.strerror or exc}") from exc
    return len(data)


def read_table(source):
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="ascii") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    columns = next(reader)
    rows = [[float(x) if x != "" else math.nan for x in r] for r in reader if r]
    return SweepTable(columns=columns, rows=np.array(rows, dtype=float).reshape(-1, len(columns)))


# ---------------------------------------------------------------------------
# figure presets
# ---------------------------------------------------------------------------

OMEGA_B_HZ = 40e6
G_AM_MICROWAVE_HZ = 4e6
G_AM_MAGNON_HZ = 6e6


def baseline(g_am_hz=G_AM_MICROWAVE_HZ):
    """Common parameter set of the detuning, decay and coupling studies."""
    wb = hz(OMEGA_B_HZ)
    s = SubsystemParams(
        kappa_a=hz(1.5e6),
        kappa_m=hz(1.5e6),
        kappa_c=hz(2e6),
        gamma_b=hz(100.0),
        omega_b=wb,
        delta_a=-wb,
        delta_m_eff=-wb,
        delta_c_eff=wb,
        g_am=hz(g_am_hz),
        G_mb=hz(2e6),
        G_cb=hz(8e6),
    )
    return PhysicalParams(system1=s, system2=dataclasses.replace(s, G_cb=None))


def _override(params, **hz_values):
    for path, v in hz_values.items():
        params = set_param(params, path, v)
    return params


_DETUNING_AXES = {
    "m": ("delta_m_eff", -2 * OMEGA_B_HZ, 0.0),
    "a": ("delta_a", -2 * OMEGA_B_HZ, 0.0),
    "c": ("delta_c_eff", 0.0, 2 * OMEGA_B_HZ),
}
_DECAY_AXES = {
    "a": ("kappa_a", 0.1e6, 5e6),
    "m": ("kappa_m", 0.1e6, 5e6),
    "c": ("kappa_c", 0.1e6, 5e6),
}
_COUPLING_AXES = {
    "g": ("g_am", 0.1e6, 10e6),
    "m": ("G_mb", 0.1e6, 4e6),
    "c": ("system1.G_cb", 0.5e6, 15e6),
}


def _six_panel(prefix, axes):
    out = {}
    for k, letter in enumerate("abc"):
        path, lo, hi = axes[list(axes)[k]]
        out[f"{prefix}{letter}"] = (G_AM_MICROWAVE_HZ, (Axis(path, lo, hi),), {})
        out[f"{prefix}{'def'[k]}"] = (G_AM_MAGNON_HZ, (Axis(path, lo, hi),), {})
    return out


def _presets():
    table = {}
    table.update(_six_panel("fig2", _DETUNING_AXES))
    table.update(_six_panel("fig3", _DECAY_AXES))
    table.update(_six_panel("fig4", _COUPLING_AXES))
    ratio = (Axis("g_ratio", 1.0, 51.0),)
    table["fig5a"] = (G_AM_MICROWAVE_HZ, ratio, {})
    table["fig5b"] = (G_AM_MAGNON_HZ, ratio, {})
    etas = (Axis("eta1", 0.0, 1.0, DEFAULT_POINTS_2D), Axis("eta2", 0.0, 1.0, DEFAULT_POINTS_2D))
    table["fig6a"] = (G_AM_MICROWAVE_HZ, etas, {})
    table["fig6b"] = (G_AM_MAGNON_HZ, etas, {})
    dm = (Axis("delta_m_eff", -2 * OMEGA_B_HZ, 0.0),)
    table["fig7a"] = (G_AM_MICROWAVE_HZ, dm, {
        "kappa_m": 1e6, "kappa_c": 3e6, "system1.G_cb": 7e6, "delta_a": -0.9 * OMEGA_B_HZ,
    })
    table["fig7b"] = (G_AM_MAGNON_HZ, dm, {"kappa_a": 1e6, "kappa_m": 1e6, "kappa_c": 1e6})
    return table


PRESETS = _presets()
FIGURES = {
    f"fig{n}": sorted(k for k in PRESETS if k.startswith(f"fig{n}")) for n in range(2, 8)
}


def figure_preset(name, points=None):
    """Sweep specification of one figure panel, e.g. ``'fig2a'``.

    Panels that show optomicrowave entanglement use g_am = 2pi x 4 MHz and
    optomagnonic panels use 2pi x 6 MHz.  ``points`` overrides the number
    of grid points on every axis.
    """
    try:
        g_am, axes, overrides = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None
    base = _override(baseline(g_am), **overrides)
    if points is not None:
        axes = tuple(dataclasses.replace(ax, num=points) for ax in axes)
    return SweepSpec(base=base, axes=axes, name=name)
