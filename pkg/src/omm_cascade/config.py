"""Sectioned ``key = value`` configuration files and parameter paths.

Frequencies are read as linear frequencies in Hz and multiplied by 2*pi.
Append ``_rad`` to a key (``kappa_a_rad = 9.42e6``) to give the value in
rad/s instead.  Dimensionless quantities, the temperature (K), the laser
power (W) and the optical wavelength (m) are never converted.

Example::

    [system1]
    kappa_a = 1.5e6
    kappa_m = 1.5e6
    ...
    [cascade]
    eta1 = 0.75

A missing ``[system2]`` section, or missing keys inside it, take the
``[system1]`` values.  The one exception is ``G_cb``: unless given
explicitly for stage 2 it is derived from stage 1 through the cascade.
"""
from __future__ import annotations

import configparser
import dataclasses
import math

from .model import (
    TWO_PI,
    CascadeParams,
    DriveParams,
    EnvironmentParams,
    PhysicalParams,
    SubsystemParams,
)
from scipy.constants import c as SPEED_OF_LIGHT

SUBSYSTEM_KEYS = tuple(f.name for f in dataclasses.fields(SubsystemParams))
REQUIRED_SUBSYSTEM_KEYS = tuple(k for k in SUBSYSTEM_KEYS if k != "G_cb")
CASCADE_KEYS = ("eta1", "eta2", "g_ratio")
ENVIRONMENT_KEYS = ("temperature", "omega_a", "omega_m", "omega_c")
DRIVE_KEYS = ("Omega", "g_mb_bare", "g_cb_bare", "E_laser", "P_L", "omega_L")
DRIVE_EXTRAS = ("gyromagnetic_ratio", "H_0", "H_d", "N")

FREQUENCY_KEYS = frozenset(
    SUBSYSTEM_KEYS
    + ("omega_a", "omega_m", "omega_c")
    + ("Omega", "g_mb_bare", "g_cb_bare", "E_laser", "omega_L")
)
SECTIONS = ("system1", "system2", "cascade", "environment", "drive")


class ConfigError(ValueError):
    """Raised with every problem found, one per line."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


def split_unit(key):
    """``'kappa_a_rad'`` -> ``('kappa_a', True)``."""
    if key.endswith("_rad"):
        return key[:-4], True
    return key, False


def to_internal(name, value, rad=False):
    if name in FREQUENCY_KEYS and not rad:
        return TWO_PI * value
    return value


def from_internal(name, value, rad=False):
    if name in FREQUENCY_KEYS and not rad:
        return value / TWO_PI
    return value


def _section_keys(section):
    return {
        "system1": SUBSYSTEM_KEYS,
        "system2": SUBSYSTEM_KEYS,
        "cascade": CASCADE_KEYS,
        "environment": ENVIRONMENT_KEYS + ("wavelength_c",),
        "drive": DRIVE_KEYS + DRIVE_EXTRAS,
    }[section]


def _read(text):
    cp = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), strict=True
    )
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"line {exc.lineno}: expected a [section] header before {exc.line.strip()!r}") from exc
    except configparser.ParsingError as exc:
        raise ConfigError([f"line {ln}: cannot parse {line.strip()!r}" for ln, line in exc.errors]) from exc
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"line {exc.lineno}: duplicate key {exc.section}.{exc.option}") from exc
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"line {exc.lineno}: duplicate section [{exc.section}]") from exc
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return cp


def parse_config(text):
    """Parse configuration text into a validated :class:`PhysicalParams`."""
    cp = _read(text)
    problems = []
    values = {s: {} for s in SECTIONS}
    for section in cp.sections():
        if section not in SECTIONS:
            problems.append(f"unknown section [{section}]")
            continue
        allowed = _section_keys(section)
        for raw_key, raw in cp.items(section):
            name, rad = split_unit(raw_key)
            path = f"{section}.{raw_key}"
            if name not in allowed or (rad and name not in FREQUENCY_KEYS):
                problems.append(f"{path}: unknown key")
                continue
            try:
                v = float(raw)
            except ValueError:
                problems.append(f"{path}: not a number: {raw!r}")
                continue
            if not math.isfinite(v):
                problems.append(f"{path}: must be finite")
                continue
            if name in values[section]:
                problems.append(f"{path}: given twice (with and without _rad)")
                continue
            values[section][name] = to_internal(name, v, rad)

    s1 = values["system1"]
    if not cp.has_section("system1"):
        problems.append("missing section [system1]")
    else:
        for k in REQUIRED_SUBSYSTEM_KEYS:
            if k not in s1:
                problems.append(f"system1.{k}: missing")
    s2 = {k: v for k, v in s1.items() if k != "G_cb"}
    s2.update(values["system2"])

    problems.extend(_range_problems(values, s1, s2))
    if problems:
        raise ConfigError(problems)

    env = dict(values["environment"])
    if "wavelength_c" in env:
        if "omega_c" in env:
            raise ConfigError("environment: give omega_c or wavelength_c, not both")
        env["omega_c"] = TWO_PI * SPEED_OF_LIGHT / env.pop("wavelength_c")
    drive = None
    if cp.has_section("drive"):
        d = dict(values["drive"])
        extras = {k: d.pop(k) for k in DRIVE_EXTRAS if k in d}
        try:
            drive = DriveParams(**d, extras=extras)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"drive: {exc}") from exc
    try:
        return PhysicalParams(
            system1=SubsystemParams(**s1),
            system2=SubsystemParams(**s2),
            cascade=CascadeParams(**values["cascade"]),
            environment=EnvironmentParams(**env),
            drive=drive,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _range_problems(values, s1, s2):
    out = []
    for tag, s in (("system1", s1), ("system2", s2)):
        for k in ("kappa_a", "kappa_m", "kappa_c", "gamma_b"):
            if k in s and s[k] < 0:
                out.append(f"{tag}.{k}: must be >= 0")
        if "omega_b" in s and s["omega_b"] <= 0:
            out.append(f"{tag}.omega_b: must be > 0")
    cas = values["cascade"]
    for k in ("eta1", "eta2"):
        if k in cas and not 0.0 <= cas[k] <= 1.0:
            out.append(f"cascade.{k}: must lie in [0, 1], got {cas[k]}")
    if "g_ratio" in cas and cas["g_ratio"] <= 0:
        out.append("cascade.g_ratio: must be > 0")
    env = values["environment"]
    if "temperature" in env and env["temperature"] < 0:
        out.append("environment.temperature: must be >= 0")
    for k in ("omega_a", "omega_m", "omega_c", "wavelength_c"):
        if k in env and env[k] <= 0:
            out.append(f"environment.{k}: must be > 0")
    for k, v in values["drive"].items():
        if k in ("Omega", "g_mb_bare", "g_cb_bare", "E_laser", "P_L", "omega_L") and v < 0:
            out.append(f"drive.{k}: must be >= 0")
    return out


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(x):
    return repr(float(x))


def dump_config(params):
    """Serialise ``params``; rates are written in rad/s so parsing is exact."""
    lines = []
    for tag, s in (("system1", params.system1), ("system2", params.system2)):
        lines.append(f"[{tag}]")
        for k in SUBSYSTEM_KEYS:
            v = getattr(s, k)
            if v is not None:
                lines.append(f"{k}_rad = {_fmt(v)}")
        lines.append("")
    lines.append("[cascade]")
    lines += [f"{k} = {_fmt(getattr(params.cascade, k))}" for k in CASCADE_KEYS]
    lines += ["", "[environment]"]
    for k in ENVIRONMENT_KEYS:
        suffix = "_rad" if k in FREQUENCY_KEYS else ""
        lines.append(f"{k}{suffix} = {_fmt(getattr(params.environment, k))}")
    if params.drive is not None:
        lines += ["", "[drive]"]
        for k in DRIVE_KEYS:
            v = getattr(params.drive, k)
            if v is not None:
                suffix = "_rad" if k in FREQUENCY_KEYS else ""
                lines.append(f"{k}{suffix} = {_fmt(v)}")
        for k, v in params.drive.extras.items():
            lines.append(f"{k} = {_fmt(v)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# parameter paths
# ---------------------------------------------------------------------------


def resolve_path(path):
    """Normalise a parameter path.

    Returns ``(targets, name, rad)`` where ``targets`` lists the sections the
    value is written to.  A bare subsystem key such as ``delta_m_eff`` applies
    to both stages; bare cascade/environment/drive keys resolve to their
    section.
    """
    section, _, key = path.rpartition(".")
    name, rad = split_unit(key)
    if rad and name not in FREQUENCY_KEYS:
        raise KeyError(f"unknown parameter path {path!r}")
    if section:
        if section not in SECTIONS or name not in _section_keys(section):
            raise KeyError(f"unknown parameter path {path!r}")
        return (section,), name, rad
    if name in SUBSYSTEM_KEYS:
        return ("system1", "system2"), name, rad
    for sec in ("cascade", "environment", "drive"):
        if name in _section_keys(sec):
            return (sec,), name, rad
    raise KeyError(f"unknown parameter path {path!r}")


def set_param(params, path, value):
    """Return a copy of ``params`` with ``path`` set to ``value`` (config units)."""
    targets, name, rad = resolve_path(path)
    v = to_internal(name, float(value), rad)
    updates = {}
    for sec in targets:
        obj = getattr(params, sec)
        if sec == "system2" and name == "G_cb" and len(targets) == 2 and obj.G_cb is None:
            continue
        if sec == "environment" and name == "wavelength_c":
            updates[sec] = dataclasses.replace(obj, omega_c=TWO_PI * SPEED_OF_LIGHT / v)
        elif sec == "drive":
            if obj is None:
                raise KeyError(f"{path!r} needs a [drive] section")
            if name in DRIVE_EXTRAS:
                updates[sec] = dataclasses.replace(obj, extras={**obj.extras, name: v})
            else:
                updates[sec] = dataclasses.replace(obj, **{name: v})
        else:
            updates[sec] = dataclasses.replace(obj, **{name: v})
    return dataclasses.replace(params, **updates)
