"""Parameters, mean fields and the linearised drift/diffusion of the cascade.

Quadrature ordering of the 16-dimensional fluctuation vector::

    X_a1 Y_a1 X_m1 Y_m1 q1 p1 X_c1 Y_c1  X_a2 Y_a2 X_m2 Y_m2 q2 p2 X_c2 Y_c2

with ``X = (o + o^dag)/sqrt(2)`` and ``Y = i(o^dag - o)/sqrt(2)``.  All rates
are angular frequencies (rad/s).

Two input modes are supported.  In *figure mode* (``drive is None``) the
effective detunings and effective couplings are taken as given.  In
*physical-drive mode* they follow from the nonlinear mean-field fixed point
of the driven system.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.optimize
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import hbar, k as k_B

TWO_PI = 2.0 * math.pi

MODES = ("a1", "m1", "b1", "c1", "a2", "m2", "b2", "c2")
MODE_INDEX = {name: i for i, name in enumerate(MODES)}
N_MODES = len(MODES)


def hz(f):
    """Linear frequency (Hz) to angular frequency (rad/s)."""
    return TWO_PI * f


class DegenerateInputError(ValueError):
    pass


def _check_nonneg(obj, names):
    bad = [n for n in names if not getattr(obj, n) >= 0.0]
    if bad:
        raise ValueError(f"{type(obj).__name__}: must be >= 0: {', '.join(bad)}")


@dataclass(frozen=True)
class SubsystemParams:
    """Rates and effective quantities of one optomagnomechanical stage.

    ``G_cb`` may be left as ``None`` for stage 2, in which case it is derived
    from stage 1 through the cascade (see :func:`effective_couplings`).
    """

    kappa_a: float
    kappa_m: float
    kappa_c: float
    gamma_b: float
    omega_b: float
    delta_a: float
    delta_m_eff: float
    delta_c_eff: float
    g_am: float
    G_mb: float
    G_cb: float | None = None

    def __post_init__(self):
        _check_nonneg(self, ("kappa_a", "kappa_m", "kappa_c", "gamma_b"))
        if not self.omega_b > 0.0:
            raise ValueError("SubsystemParams: omega_b must be > 0")
        for name, value in dataclasses.asdict(self).items():
            if value is not None and not math.isfinite(value):
                raise ValueError(f"SubsystemParams: {name} is not finite")


@dataclass(frozen=True)
class CascadeParams:
    eta1: float = 0.75
    eta2: float = 0.75
    g_ratio: float = 10.0

    def __post_init__(self):
        for name in ("eta1", "eta2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"CascadeParams: {name}={v} outside [0, 1]")
        if not self.g_ratio > 0.0:
            raise ValueError("CascadeParams: g_ratio must be > 0")


@dataclass(frozen=True)
class EnvironmentParams:
    temperature: float = 10e-3
    omega_a: float = hz(10e9)
    omega_m: float = hz(10e9)
    omega_c: float = TWO_PI * SPEED_OF_LIGHT / 1550e-9

    def __post_init__(self):
        if not self.temperature >= 0.0:
            raise ValueError("EnvironmentParams: temperature must be >= 0")
        for name in ("omega_a", "omega_m", "omega_c"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"EnvironmentParams: {name} must be > 0")


@dataclass(frozen=True)
class DriveParams:
    """Physical drives and bare single-quantum couplings.

    ``g_cb_bare`` is the stage-1 optomechanical coupling; stage 2 uses
    ``g_ratio * g_cb_bare``.  If ``E_laser`` is omitted it is computed from
    ``P_L`` and ``omega_L``.  ``extras`` carries spin-physics quantities
    (gyromagnetic ratio, bias and drive fields, spin number) untouched.
    """

    Omega: float
    g_mb_bare: float
    g_cb_bare: float
    E_laser: float | None = None
    P_L: float | None = None
    omega_L: float | None = None
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        _check_nonneg(self, ("Omega", "g_mb_bare", "g_cb_bare"))
        if self.E_laser is None and (self.P_L is None or self.omega_L is None):
            raise ValueError("DriveParams: give E_laser or both P_L and omega_L")


@dataclass(frozen=True)
class PhysicalParams:
    system1: SubsystemParams
    system2: SubsystemParams
    cascade: CascadeParams = CascadeParams()
    environment: EnvironmentParams = EnvironmentParams()
    drive: DriveParams | None = None

    @property
    def systems(self):
        return (self.system1, self.system2)

    @property
    def omega_scale(self):
        """Rate used to nondimensionalise the linear model."""
        return self.system1.omega_b


def laser_amplitude(kappa_c, power, omega_laser):
    """Cavity drive rate ``sqrt(2 kappa_c P / (hbar omega_L))`` in rad/s."""
    return math.sqrt(2.0 * kappa_c * power / (hbar * omega_laser))


def thermal_occupation(omega, temperature):
    """Bose-Einstein mean occupation ``1 / (exp(hbar w / k_B T) - 1)``."""
    if not omega > 0.0:
        raise ValueError(f"omega must be > 0, got {omega}")
    if temperature < 0.0:
        raise ValueError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0.0:
        return 0.0
    x = hbar * omega / (k_B * temperature)
    if x > 700.0:
        return math.exp(-x)
    return 1.0 / math.expm1(x)


class Occupations(NamedTuple):
    a: float
    m: float
    c: float
    b: tuple


def occupations(params):
    env = params.environment
    T = env.temperature
    return Occupations(
        a=thermal_occupation(env.omega_a, T),
        m=thermal_occupation(env.omega_m, T),
        c=thermal_occupation(env.omega_c, T),
        b=tuple(thermal_occupation(s.omega_b, T) for s in params.systems),
    )


# ---------------------------------------------------------------------------
# mean fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeanFields:
    a1: complex
    m1: complex
    c1: complex
    a2: complex
    m2: complex
    c2: complex
    q1: float = 0.0
    p1: float = 0.0
    q2: float = 0.0
    p2: float = 0.0

    def stage(self, i):
        if i == 1:
            return self.a1, self.m1, self.c1, self.q1, self.p1
        return self.a2, self.m2, self.c2, self.q2, self.p2


class BareDetunings(NamedTuple):
    """Magnon and optical detunings before the radiation-pressure shifts."""

    delta_m: tuple
    delta_c: tuple


def drive_amplitude(params):
    d = params.drive
    if d.E_laser is not None:
        return d.E_laser
    return laser_amplitude(params.system1.kappa_c, d.P_L, d.omega_L)


def bare_couplings(params):
    """Per-stage ``(g_mb, g_cb)`` single-quantum couplings."""
    d = params.drive
    return (d.g_mb_bare, d.g_mb_bare), (d.g_cb_bare, params.cascade.g_ratio * d.g_cb_bare)


def cascade_feed(params):
    """Stage-1 to stage-2 feed rates ``2 sqrt(eta kappa_1 kappa_2)`` (microwave, optical)."""
    s1, s2 = params.systems
    cas = params.cascade
    return (
        2.0 * math.sqrt(cas.eta1 * s1.kappa_a * s2.kappa_a),
        2.0 * math.sqrt(cas.eta2 * s1.kappa_c * s2.kappa_c),
    )


def mean_fields(params, drive=None):
    """Resolved-sideband closed forms for the steady-state amplitudes.

    Stage 2's optical amplitude is fed only by stage 1's output,
    ``<c2> = -feed * <c1> / (kappa_c2 + i Delta_c2)``.  Mechanical
    displacements follow from the force balance at the given amplitudes.
    """
    drive = drive if drive is not None else params.drive
    if drive is None:
        raise ValueError("mean_fields needs DriveParams (physical-drive mode)")
    if drive is not params.drive:
        params = dataclasses.replace(params, drive=drive)
    s1, s2 = params.systems
    Om = drive.Omega
    E = drive_amplitude(params)

    def magnon_pair(s):
        den = s.g_am**2 - s.delta_m_eff * s.delta_a
        scale = max(s.g_am**2, abs(s.delta_m_eff * s.delta_a), 1.0)
        if abs(den) <= 1e-12 * scale:
            raise DegenerateInputError(
                "g_am^2 - delta_m_eff * delta_a vanishes (magnon-microwave resonance)"
            )
        return -1j * s.g_am * Om / den, 1j * Om * s.delta_a / den

    a1, m1 = magnon_pair(s1)
    a2, m2 = magnon_pair(s2)
    if s1.delta_c_eff == 0.0:
        raise DegenerateInputError("delta_c_eff of stage 1 vanishes")
    c1 = -1j * E / s1.delta_c_eff
    _, feed_c = cascade_feed(params)
    den2 = s2.kappa_c + 1j * s2.delta_c_eff
    if den2 == 0:
        raise DegenerateInputError("kappa_c2 + i delta_c2 vanishes")
    c2 = -feed_c * c1 / den2
    (gm1, gm2), (gc1, gc2) = bare_couplings(params)
    q1 = (-gm1 * abs(m1) ** 2 + gc1 * abs(c1) ** 2) / s1.omega_b
    q2 = (-gm2 * abs(m2) ** 2 + gc2 * abs(c2) ** 2) / s2.omega_b
    return MeanFields(a1, m1, c1, a2, m2, c2, q1, 0.0, q2, 0.0)


def bare_detunings(params, fields):
    """Bare detunings consistent with the effective ones at ``fields``."""
    (gm1, gm2), (gc1, gc2) = bare_couplings(params)
    s1, s2 = params.systems
    return BareDetunings(
        delta_m=(s1.delta_m_eff - gm1 * fields.q1, s2.delta_m_eff - gm2 * fields.q2),
        delta_c=(s1.delta_c_eff + gc1 * fields.q1, s2.delta_c_eff + gc2 * fields.q2),
    )


def state_from_fields(fields):
    """Mean fields as the 16-component real quadrature vector."""
    u = np.empty(16)
    r2 = math.sqrt(2.0)
    for k, i in enumerate((1, 2)):
        a, m, c, q, p = fields.stage(i)
        o = 8 * k
        u[o:o + 8] = (
            r2 * a.real, r2 * a.imag, r2 * m.real, r2 * m.imag,
            q, p, r2 * c.real, r2 * c.imag,
        )
    return u


def fields_from_state(u):
    u = np.asarray(u, dtype=float)
    r2 = math.sqrt(2.0)

    def amp(j):
        return complex(u[j], u[j + 1]) / r2

    return MeanFields(
        a1=amp(0), m1=amp(2), c1=amp(6), a2=amp(8), m2=amp(10), c2=amp(14),
        q1=float(u[4]), p1=float(u[5]), q2=float(u[12]), p2=float(u[13]),
    )


def nonlinear_drift_rhs(state, params, drive=None, bare=None):
    """Deterministic part of the quantum Langevin equations.

    ``state`` is the real quadrature vector (see :func:`state_from_fields`);
    the return value is its time derivative in the same representation.
    ``bare`` defaults to detunings consistent with the closed-form mean
    fields.
    """
    drive = drive if drive is not None else params.drive
    if drive is not params.drive:
        params = dataclasses.replace(params, drive=drive)
    if bare is None:
        bare = bare_detunings(params, mean_fields(params))
    f = fields_from_state(state)
    s1, s2 = params.systems
    (gm1, gm2), (gc1, gc2) = bare_couplings(params)
    feed_a, feed_c = cascade_feed(params)
    Om = drive.Omega
    E = drive_amplitude(params)

    def stage(s, a, m, c, q, p, gm, gc, dm, dc, a_in, c_in):
        da = -1j * s.delta_a * a - s.kappa_a * a - 1j * s.g_am * m + a_in
        dmm = -1j * dm * m - s.kappa_m * m - 1j * s.g_am * a - 1j * gm * m * q + Om
        dcc = -1j * dc * c - s.kappa_c * c + 1j * gc * c * q + c_in
        dq = s.omega_b * p
        dp = -s.omega_b * q - s.gamma_b * p - gm * abs(m) ** 2 + gc * abs(c) ** 2
        return da, dmm, dcc, dq, dp

    d1 = stage(s1, f.a1, f.m1, f.c1, f.q1, f.p1, gm1, gc1,
               bare.delta_m[0], bare.delta_c[0], 0.0, E)
    d2 = stage(s2, f.a2, f.m2, f.c2, f.q2, f.p2, gm2, gc2,
               bare.delta_m[1], bare.delta_c[1], -feed_a * f.a1, -feed_c * f.c1)
    out = MeanFields(d1[0], d1[1], d1[2], d2[0], d2[1], d2[2], d1[3], d1[4], d2[3], d2[4])
    return state_from_fields(out)


def _amplitudes_at(params, q, bare):
    # at fixed displacements the amplitude equations are linear
    s1, s2 = params.systems
    (gm1, gm2), (gc1, gc2) = bare_couplings(params)
    feed_a, feed_c = cascade_feed(params)
    Om = params.drive.Omega
    E = drive_amplitude(params)
    dm = (bare.delta_m[0] + gm1 * q[0], bare.delta_m[1] + gm2 * q[1])
    dc = (bare.delta_c[0] - gc1 * q[0], bare.delta_c[1] - gc2 * q[1])
    M = np.zeros((6, 6), dtype=complex)
    rhs = np.array([0.0, -Om, -E, 0.0, -Om, 0.0], dtype=complex)
    # unknowns: a1 m1 c1 a2 m2 c2
    for k, s in enumerate((s1, s2)):
        a, m, c = 3 * k, 3 * k + 1, 3 * k + 2
        M[a, a] = -(1j * s.delta_a + s.kappa_a)
        M[a, m] = -1j * s.g_am
        M[m, m] = -(1j * dm[k] + s.kappa_m)
        M[m, a] = -1j * s.g_am
        M[c, c] = -(1j * dc[k] + s.kappa_c)
    M[3, 0] = -feed_a
    M[5, 2] = -feed_c
    try:
        return np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateInputError(f"mean-field equations are singular: {exc}") from exc


def refine_mean_fields(params, drive=None, bare=None, tol=1e-14):
    """Exact fixed point of :func:`nonlinear_drift_rhs`.

    The bare detunings default to those implied by the closed-form
    :func:`mean_fields`.  At fixed mechanical displacements the amplitude
    equations are linear, so the root search runs over ``(q1, q2)`` only
    (MINPACK hybrid Powell).  Returns ``(fields, bare)``.
    """
    drive = drive if drive is not None else params.drive
    if drive is not params.drive:
        params = dataclasses.replace(params, drive=drive)
    guess = mean_fields(params)
    if bare is None:
        bare = bare_detunings(params, guess)
    s1, s2 = params.systems
    (gm1, gm2), (gc1, gc2) = bare_couplings(params)
    wb = np.array([s1.omega_b, s2.omega_b])
    gm = np.array([gm1, gm2])
    gc = np.array([gc1, gc2])
    q0 = np.array([guess.q1, guess.q2])
    qscale = np.maximum(np.abs(q0), 1.0)

    def displacement(q):
        x = _amplitudes_at(params, q, bare)
        m = x[[1, 4]]
        c = x[[2, 5]]
        return (-gm * np.abs(m) ** 2 + gc * np.abs(c) ** 2) / wb, x

    def fun(y):
        q = y * qscale
        return (q - displacement(q)[0]) / qscale

    sol = scipy.optimize.root(fun, q0 / qscale, method="hybr", tol=tol)
    q = sol.x * qscale
    if not np.all(np.isfinite(q)) or np.max(np.abs(fun(sol.x))) > 1e-10:
        raise DegenerateInputError("mean-field refinement did not converge")
    _, x = displacement(q)
    fields = MeanFields(*(complex(v) for v in x), q1=float(q[0]), p1=0.0,
                        q2=float(q[1]), p2=0.0)
    return fields, bare


# ---------------------------------------------------------------------------
# effective couplings and linear model
# ---------------------------------------------------------------------------


class Couplings(NamedTuple):
    """Per-stage effective couplings; complex values are allowed."""

    G_mb: tuple
    G_cb: tuple


def stage2_optomechanical(params, G_cb1):
    """Figure-mode stage-2 coupling ``sqrt(eta2) * (g_ratio / 10) * G_c1b1``."""
    cas = params.cascade
    return math.sqrt(cas.eta2) * cas.g_ratio / 10.0 * G_cb1


def effective_couplings(params, fields=None, real_gauge=False):
    """Effective magnomechanical and optomechanical couplings.

    Without ``fields`` (figure mode) the values stored in the parameter set
    are used, deriving stage 2's optomechanical coupling when it is unset.
    With ``fields`` they are ``G_mb = -i sqrt2 g_mb <m>`` and
    ``G_cb = i sqrt2 g_cb <c>``; ``real_gauge`` replaces them by their
    moduli.
    """
    s1, s2 = params.systems
    if fields is None:
        if s1.G_cb is None:
            raise ValueError("system1.G_cb is required in figure mode")
        G_cb2 = s2.G_cb if s2.G_cb is not None else stage2_optomechanical(params, s1.G_cb)
        return Couplings(G_mb=(s1.G_mb, s2.G_mb), G_cb=(s1.G_cb, G_cb2))
    (gm1, gm2), (gc1, gc2) = bare_couplings(params)
    r2 = math.sqrt(2.0)
    G_mb = (-1j * r2 * gm1 * fields.m1, -1j * r2 * gm2 * fields.m2)
    G_cb = (1j * r2 * gc1 * fields.c1, 1j * r2 * gc2 * fields.c2)
    if real_gauge:
        return Couplings(tuple(abs(g) for g in G_mb), tuple(abs(g) for g in G_cb))
    return Couplings(G_mb, G_cb)


def _rot(k, d):
    return np.array([[-k, d], [-d, -k]])


def _to_mode(G):
    # o-equation response to dq: [[Re G, 0], [Im G, 0]]
    G = complex(G)
    return np.array([[G.real, 0.0], [G.imag, 0.0]])


def _to_mech(G):
    # p-equation response to (X, Y): [[0, 0], [Im G, -Re G]]
    G = complex(G)
    return np.array([[0.0, 0.0], [G.imag, -G.real]])


def assemble_drift(params, couplings=None):
    """16 x 16 drift matrix in the canonical mode order.

    With real couplings the blocks reduce to the standard
    ``[[G, 0], [0, 0]]`` / ``[[0, 0], [0, -G]]`` pairs.
    """
    if couplings is None:
        couplings = effective_couplings(params)
    A = np.zeros((16, 16))

    def put(i, j, block):
        A[2 * i:2 * i + 2, 2 * j:2 * j + 2] = block

    for k, s in enumerate(params.systems):
        a, m, b, c = (4 * k + j for j in range(4))
        put(a, a, _rot(s.kappa_a, s.delta_a))
        put(m, m, _rot(s.kappa_m, s.delta_m_eff))
        put(b, b, np.array([[0.0, s.omega_b], [-s.omega_b, -s.gamma_b]]))
        put(c, c, _rot(s.kappa_c, s.delta_c_eff))
        am = np.array([[0.0, s.g_am], [-s.g_am, 0.0]])
        put(a, m, am)
        put(m, a, am)
        put(m, b, _to_mode(couplings.G_mb[k]))
        put(b, m, _to_mech(couplings.G_mb[k]))
        put(c, b, _to_mode(couplings.G_cb[k]))
        put(b, c, _to_mech(couplings.G_cb[k]))
    feed_a, feed_c = cascade_feed(params)
    put(MODE_INDEX["a2"], MODE_INDEX["a1"], -feed_a * np.eye(2))
    put(MODE_INDEX["c2"], MODE_INDEX["c1"], -feed_c * np.eye(2))
    return A


def assemble_diffusion(params):
    """16 x 16 symmetrised noise-correlation matrix.

    Cross-stage blocks carry the thermal factor ``2 n + 1`` of the stage-1
    bath that is transmitted forward.
    """
    n = occupations(params)
    s1, s2 = params.systems
    e1, e2 = params.cascade.eta1, params.cascade.eta2
    th = {key: 2.0 * getattr(n, key) + 1.0 for key in ("a", "m", "c")}
    D = np.zeros((16, 16))
    I2 = np.eye(2)

    def put(name_i, name_j, block):
        i, j = MODE_INDEX[name_i], MODE_INDEX[name_j]
        D[2 * i:2 * i + 2, 2 * j:2 * j + 2] = block

    put("a1", "a1", s1.kappa_a * th["a"] * I2)
    put("a2", "a2", s2.kappa_a * (e1 * th["a"] + (1.0 - e1) * th["a"]) * I2)
    put("c1", "c1", s1.kappa_c * th["c"] * I2)
    put("c2", "c2", s2.kappa_c * (e2 * th["c"] + (1.0 - e2) * th["c"]) * I2)
    for k, s in enumerate(params.systems, start=1):
        put(f"m{k}", f"m{k}", s.kappa_m * th["m"] * I2)
        put(f"b{k}", f"b{k}", np.diag([0.0, s.gamma_b * (2.0 * n.b[k - 1] + 1.0)]))
    cross_a = math.sqrt(e1 * s1.kappa_a * s2.kappa_a) * th["a"] * I2
    cross_c = math.sqrt(e2 * s1.kappa_c * s2.kappa_c) * th["c"] * I2
    put("a1", "a2", cross_a)
    put("a2", "a1", cross_a)
    put("c1", "c2", cross_c)
    put("c2", "c1", cross_c)
    return D


@dataclass(frozen=True)
class LinearModel:
    A: np.ndarray
    D: np.ndarray
    omega_scale: float
    couplings: Couplings
    params: PhysicalParams
    mode_order: tuple = MODES
    fields: MeanFields | None = None
    flags: tuple = ()

    @property
    def scaled(self):
        """``(A, D)`` divided by ``omega_scale``; the covariance is unchanged."""
        return self.A / self.omega_scale, self.D / self.omega_scale


def _flags(params):
    out = []
    for k, s in enumerate(params.systems, start=1):
        for name in ("kappa_a", "kappa_m", "kappa_c", "gamma_b"):
            if getattr(s, name) == 0.0:
                out.append(f"system{k}.{name} is zero (lossless mode)")
    return tuple(out)


def linearize(params, real_gauge=False):
    """Build the :class:`LinearModel` for either input mode.

    In physical-drive mode the mean-field fixed point is refined first and
    the effective detunings are recomputed from it.
    """
    fields = None
    if params.drive is None:
        couplings = effective_couplings(params)
        eff = params
    else:
        fields, bare = refine_mean_fields(params)
        (gm1, gm2), (gc1, gc2) = bare_couplings(params)
        s1, s2 = params.systems
        eff = dataclasses.replace(
            params,
            system1=dataclasses.replace(
                s1, delta_m_eff=bare.delta_m[0] + gm1 * fields.q1,
                delta_c_eff=bare.delta_c[0] - gc1 * fields.q1),
            system2=dataclasses.replace(
                s2, delta_m_eff=bare.delta_m[1] + gm2 * fields.q2,
                delta_c_eff=bare.delta_c[1] - gc2 * fields.q2),
        )
        couplings = effective_couplings(eff, fields, real_gauge=real_gauge)
    return LinearModel(
        A=assemble_drift(eff, couplings),
        D=assemble_diffusion(eff),
        omega_scale=eff.omega_scale,
        couplings=couplings,
        params=eff,
        fields=fields,
        flags=_flags(eff),
    )
