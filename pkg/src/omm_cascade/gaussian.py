"""Stability, steady-state covariance and Gaussian entanglement measures.

Covariance matrices use the symmetrised convention
``V_jk = <u_j u_k + u_k u_j> / 2`` so that the vacuum is ``I / 2``.  Mode
subsets are given either as integer mode indices into ``V`` or, for the full
eight-mode system, as mode names such as ``"a1"`` or ``"c2"``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import linalg
from .model import MODE_INDEX, MODES, linearize

VACUUM = 0.5
PHYSICALITY_TOL = 1e-9
PAIRS = {
    "E_a1c1": ("a1", "c1"),
    "E_m1c1": ("m1", "c1"),
    "E_a2c2": ("a2", "c2"),
    "E_m2c2": ("m2", "c2"),
}
QUAD_SETS = {
    "ac": ("a1", "c1", "a2", "c2"),
    "mc": ("m1", "c1", "m2", "c2"),
}


class UnstableSystemError(linalg.UnstableMatrixError):
    pass


class Stability(NamedTuple):
    stable: bool
    margin: float


def check_stability(A):
    """``stable`` iff every eigenvalue of ``A`` has a strictly negative real part.

    ``margin`` is ``-max Re lambda`` in the units of ``A``.  Real parts within
    ``1e-13 ||A||`` of zero count as marginal, hence unstable.
    """
    A = linalg.as_square(A, "A")
    mx = float(np.max(linalg.eigenvalues(A).real))
    tol = 1e-13 * max(np.linalg.norm(A), linalg.ABS_FLOOR)
    return Stability(stable=mx < -tol, margin=-mx)


def omega_form(n):
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _mode_indices(V, modes):
    n = V.shape[0] // 2
    out = []
    for m in modes:
        if isinstance(m, str):
            if n != len(MODES):
                raise ValueError(f"mode name {m!r} needs the full {len(MODES)}-mode covariance")
            if m not in MODE_INDEX:
                raise ValueError(f"unknown mode {m!r}; expected one of {MODES}")
            m = MODE_INDEX[m]
        m = int(m)
        if not 0 <= m < n:
            raise ValueError(f"mode index {m} out of range for {n} modes")
        out.append(m)
    if len(set(out)) != len(out):
        raise ValueError(f"repeated modes in {modes}")
    return out


def _as_cov(V):
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != V.shape[1] or V.shape[0] % 2:
        raise ValueError(f"covariance must be 2n x 2n, got {V.shape}")
    return V


def reduced_covariance(V, modes):
    """Covariance of the listed modes, in the order given."""
    V = _as_cov(V)
    idx = _mode_indices(V, modes)
    if not idx:
        raise ValueError("mode subset is empty")
    q = np.array([k for m in idx for k in (2 * m, 2 * m + 1)])
    return V[np.ix_(q, q)]


def partial_transpose(V, party):
    """Flip the sign of the momentum quadrature of every mode in ``party``."""
    V = _as_cov(V)
    n = V.shape[0] // 2
    idx = _mode_indices(V, party)
    if not idx or len(idx) == n:
        raise ValueError("party must be a proper, nonempty subset of the modes")
    s = np.ones(2 * n)
    s[[2 * m + 1 for m in idx]] = -1.0
    return s[:, None] * V * s[None, :]


def symplectic_eigenvalues(V):
    """Sorted symplectic eigenvalues: moduli of the ``+-i nu`` eigenvalues of ``Omega V``."""
    V = _as_cov(V)
    scale = max(np.linalg.norm(V), linalg.ABS_FLOOR)
    if np.linalg.norm(V - V.T) > 1e-12 * scale:
        raise ValueError("covariance is not symmetric")
    try:
        np.linalg.cholesky(V)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance is not positive definite") from exc
    n = V.shape[0] // 2
    w = np.sort(np.abs(np.linalg.eigvals(omega_form(n) @ V)))
    lo, hi = w[0::2], w[1::2]
    if np.any(np.abs(hi - lo) > 1e-8 * np.maximum(hi, linalg.ABS_FLOOR)):
        raise ValueError("eigenvalues of Omega V do not pair up; input is ill-conditioned")
    return 0.5 * (lo + hi)


def log_negativity(V, bipartition=None):
    """``max(0, -ln(2 nu_min))`` of the partial transpose over ``bipartition``.

    ``bipartition`` is ``(side_a, side_b)``; the two sides must be disjoint
    and cover every mode of ``V``.  For a two-mode ``V`` it defaults to
    ``((0,), (1,))``.
    """
    V = _as_cov(V)
    n = V.shape[0] // 2
    if bipartition is None:
        if n != 2:
            raise ValueError("bipartition is required for more than two modes")
        bipartition = ((0,), (1,))
    side_a, side_b = (_mode_indices(V, s) for s in bipartition)
    if set(side_a) & set(side_b) or len(side_a) + len(side_b) != n:
        raise ValueError("bipartition sides must be disjoint and cover all modes")
    nu = symplectic_eigenvalues(partial_transpose(V, side_a))[0]
    return max(0.0, -math.log(2.0 * nu))


def bipartitions(k):
    """All ways to split ``k`` labelled modes into two nonempty groups."""
    out = []
    rest = tuple(range(1, k))
    for r in range(0, k - 1):
        for combo in itertools.combinations(rest, r):
            side = (0,) + combo
            other = tuple(i for i in range(k) if i not in side)
            out.append((side, other))
    return out


class QuadWitness(NamedTuple):
    values: dict
    minimum: float


def quadripartite_witness(V, modes4):
    """Log-negativity across all seven bipartitions of four modes.

    The minimum is reported as a genuine four-mode entanglement witness:
    it is positive only if no bipartition is PPT.
    """
    if len(modes4) != 4:
        raise ValueError("exactly four modes are required")
    V4 = reduced_covariance(V, modes4)
    labels = [m if isinstance(m, str) else str(m) for m in modes4]
    values = {}
    for side, other in bipartitions(4):
        key = "+".join(labels[i] for i in side) + "|" + "+".join(labels[i] for i in other)
        values[key] = log_negativity(V4, (side, other))
    return QuadWitness(values, min(values.values()))


def steady_state_covariance(model, *, return_residual=False):
    """Solve the Lyapunov equation of a stable :class:`LinearModel`.

    The solve is carried out on ``A / omega_scale`` and ``D / omega_scale``.
    """
    A, D = model.scaled
    st = check_stability(A)
    if not st.stable:
        margin = st.margin * model.omega_scale
        raise UnstableSystemError(
            f"system is not stable: stability margin {margin:.6g} rad/s", margin=margin
        )
    V = linalg.solve_lyapunov(A, D, check_stable=False)
    nu = symplectic_eigenvalues(V)
    if nu[0] < VACUUM - PHYSICALITY_TOL:
        raise ValueError(f"unphysical steady state: min symplectic eigenvalue {nu[0]:.12g}")
    if return_residual:
        return V, linalg.lyapunov_residual(A, V, D)
    return V


@dataclass
class EntanglementReport:
    E_a1c1: float
    E_m1c1: float
    E_a2c2: float
    E_m2c2: float
    quad_ac: dict = field(default_factory=dict)
    quad_mc: dict = field(default_factory=dict)
    quad_witness_ac: float = math.nan
    quad_witness_mc: float = math.nan
    stable: bool = True
    stability_margin: float = math.nan
    min_symplectic: float = math.nan
    lyapunov_residual: float = math.nan

    def to_record(self, bipartitions=False):
        """Flat ``{key: value}`` view; ``stable`` becomes 0/1."""
        rec = {
            "E_a1c1": self.E_a1c1,
            "E_m1c1": self.E_m1c1,
            "E_a2c2": self.E_a2c2,
            "E_m2c2": self.E_m2c2,
            "quad_witness_ac": self.quad_witness_ac,
            "quad_witness_mc": self.quad_witness_mc,
            "stable": int(self.stable),
            "stability_margin": self.stability_margin,
        }
        if bipartitions:
            for tag in ("ac", "mc"):
                for key, value in getattr(self, f"quad_{tag}").items():
                    rec[f"quad_{tag}[{key}]"] = value
            rec["min_symplectic"] = self.min_symplectic
            rec["lyapunov_residual"] = self.lyapunov_residual
        return rec


def pairwise_report(V, quad=True):
    """Bipartite and quadripartite entanglement of a full-system covariance."""
    V = _as_cov(V)
    if V.shape != (2 * len(MODES), 2 * len(MODES)):
        raise ValueError(f"expected the {len(MODES)}-mode covariance, got {V.shape}")
    vals = {key: log_negativity(reduced_covariance(V, pair)) for key, pair in PAIRS.items()}
    rep = EntanglementReport(**vals)
    if quad:
        for tag, modes in QUAD_SETS.items():
            w = quadripartite_witness(V, modes)
            setattr(rep, f"quad_{tag}", w.values)
            setattr(rep, f"quad_witness_{tag}", w.minimum)
    rep.min_symplectic = float(symplectic_eigenvalues(V)[0])
    return rep


def analyze(params, quad=True, real_gauge=False):
    """Full pipeline: linearise, check stability, solve, quantify.

    Unstable parameter sets give a report with ``stable=False`` and NaN
    entanglement values instead of raising.
    """
    model = linearize(params, real_gauge=real_gauge)
    A, _ = model.scaled
    st = check_stability(A)
    margin = st.margin * model.omega_scale
    if not st.stable:
        nan = math.nan
        return EntanglementReport(nan, nan, nan, nan, stable=False, stability_margin=margin)
    V, res = steady_state_covariance(model, return_residual=True)
    rep = pairwise_report(V, quad=quad)
    rep.stability_margin = margin
    rep.lyapunov_residual = res
    return rep
