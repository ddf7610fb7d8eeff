"""Dense matrix kernels for small fixed-size systems.

Everything here works on plain ``numpy`` arrays of dimension at most a few
dozen.  The Lyapunov solver and the covariance ODE integrator are two
independent routes to the same steady state and are cross-checked in the
test-suite.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
import scipy.linalg

MAX_DIM = 64
ABS_FLOOR = 1e-14
LYAPUNOV_RTOL = 1e-10


class LinAlgError(ValueError):
    """Base class for errors raised by the kernels in this module."""


class SingularMatrixError(LinAlgError):
    pass


class UnstableMatrixError(LinAlgError):
    """The drift matrix has an eigenvalue with non-negative real part."""

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class ConvergenceError(LinAlgError, RuntimeError):
    pass


def as_square(M, name="matrix", max_dim=MAX_DIM):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise LinAlgError(f"{name} must be square, got shape {M.shape}")
    if M.shape[0] > max_dim:
        raise LinAlgError(f"{name} dimension {M.shape[0]} exceeds {max_dim}")
    if not np.all(np.isfinite(M)):
        raise LinAlgError(f"{name} has non-finite entries")
    return M


def relative_error(a, b):
    """Frobenius-norm relative difference with an absolute floor."""
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(np.linalg.norm(a), np.linalg.norm(b), ABS_FLOOR)
    return float(np.linalg.norm(a - b) / scale)


def eigenvalues(M):
    """All eigenvalues of a real square matrix, with multiplicity.

    LAPACK's Hessenberg QR (``dgeev``) does the work; the result is sorted
    with :func:`numpy.sort_complex` so repeated calls are reproducible.
    """
    M = as_square(M)
    if M.size == 0:
        return np.zeros(0, dtype=complex)
    try:
        lam = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration did not converge: {exc}") from exc
    return np.sort_complex(lam.astype(complex))


def max_real_part(M):
    return float(np.max(eigenvalues(M).real))


def solve_linear(A, b):
    """Solve ``A x = b`` by LU with one step of iterative refinement.

    Raises :class:`SingularMatrixError` when LAPACK's reciprocal condition
    estimate falls below machine precision.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise LinAlgError(f"A must be square, got shape {A.shape}")
    b = np.asarray(b, dtype=float)
    if b.shape[0] != A.shape[0]:
        raise LinAlgError(f"shape mismatch: A is {A.shape}, b is {b.shape}")
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            lu = scipy.linalg.lu_factor(A, check_finite=True)
            x = scipy.linalg.lu_solve(lu, b)
        except (scipy.linalg.LinAlgWarning, np.linalg.LinAlgError, ValueError) as exc:
            raise SingularMatrixError(f"matrix is singular to working precision: {exc}") from exc
    if np.any(np.diag(lu[0]) == 0.0):
        raise SingularMatrixError("matrix is exactly singular")
    r = b - A @ x
    x = x + scipy.linalg.lu_solve(lu, r)
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("solution has non-finite entries")
    return x


def lyapunov_residual(A, V, Q):
    """``||A V + V A^T + Q||_F / ||Q||_F`` (absolute floor on the denominator)."""
    R = A @ V + V @ A.T + Q
    return float(np.linalg.norm(R) / max(np.linalg.norm(Q), ABS_FLOOR))


def solve_lyapunov(A, Q, check_stable=True):
    """Solve ``A V + V A^T = -Q`` for symmetric ``V``.

    The equation is vectorised into the ``n^2 x n^2`` system
    ``(A (x) I + I (x) A) vec(V) = -vec(Q)``, which at n = 16 is a 256 x 256
    dense solve.
    """
    A = as_square(A, "A")
    Q = as_square(Q, "Q")
    n = A.shape[0]
    if Q.shape != A.shape:
        raise LinAlgError(f"A is {A.shape} but Q is {Q.shape}")
    if np.linalg.norm(Q - Q.T) > 1e-12 * max(np.linalg.norm(Q), ABS_FLOOR):
        raise LinAlgError("Q must be symmetric")
    if check_stable:
        mx = max_real_part(A)
        if not mx < 0.0:
            raise UnstableMatrixError(
                f"A is not stable (max Re eigenvalue {mx:.6g})", margin=-mx
            )
    eye = np.eye(n)
    K = np.kron(A, eye) + np.kron(eye, A)
    try:
        v = solve_linear(K, -Q.reshape(-1))
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"vectorised Lyapunov system is singular: {exc}") from exc
    V = v.reshape(n, n)
    V = 0.5 * (V + V.T)
    res = lyapunov_residual(A, V, Q)
    for _ in range(3):
        if res <= LYAPUNOV_RTOL:
            break
        R = A @ V + V @ A.T + Q
        dV = solve_linear(K, -R.reshape(-1)).reshape(n, n)
        V = V + 0.5 * (dV + dV.T)
        res = lyapunov_residual(A, V, Q)
    if res > LYAPUNOV_RTOL:
        raise ConvergenceError(f"Lyapunov residual {res:.3g} exceeds {LYAPUNOV_RTOL:g}")
    return V


def _taylor_step(A, D, h, tol):
    # Taylor method for X' = A X (transition matrix) and V' = A V + V A^T + D
    # from V(0) = 0; terms are added until they drop below tol.
    n = A.shape[0]
    Ah = A * h
    phi = np.eye(n)
    term = np.eye(n)
    V = np.zeros_like(A)
    vterm = D * h
    k = 1
    while True:
        term = Ah @ term / k
        phi = phi + term
        V = V + vterm
        small_phi = np.linalg.norm(term) <= tol * np.linalg.norm(phi)
        small_v = np.linalg.norm(vterm) <= tol * max(np.linalg.norm(V), ABS_FLOOR)
        if (small_phi and small_v) or k > 200:
            break
        k += 1
        vterm = (Ah @ vterm + vterm @ Ah.T) / k
    if k > 200:
        raise ConvergenceError("Taylor series did not converge; step too large")
    return phi, V


def integrate_covariance_ode(A, D, t_end=None, tol=1e-13):
    """Integrate ``dV/dt = A V + V A^T + D`` from ``V(0) = 0`` up to ``t_end``.

    An initial interval ``h`` with ``||A|| h <= 1/2`` is integrated with a
    Taylor method (local error below ``tol``).  The flow of an autonomous
    linear system is then extended by exact doubling,
    ``V(2t) = V(t) + Phi(t) V(t) Phi(t)^T`` and ``Phi(2t) = Phi(t)^2``, so
    reaching ``t_end`` costs ``log2(t_end / h)`` steps.

    When ``t_end`` is ``None`` it is set to ``60 / |max Re lambda(A)|``.
    """
    A = as_square(A, "A")
    D = as_square(D, "D")
    if D.shape != A.shape:
        raise LinAlgError(f"A is {A.shape} but D is {D.shape}")
    if t_end is None:
        mx = max_real_part(A)
        if not mx < 0.0:
            raise UnstableMatrixError(f"A is not stable (max Re eigenvalue {mx:.6g})", margin=-mx)
        t_end = 60.0 / -mx
    if not t_end > 0.0 or not math.isfinite(t_end):
        raise LinAlgError(f"t_end must be positive and finite, got {t_end}")
    norm_a = max(np.linalg.norm(A, 2), ABS_FLOOR)
    doublings = max(0, math.ceil(math.log2(t_end * norm_a / 0.5)))
    h = t_end / 2.0**doublings
    if h * norm_a < 1e-300 or h == 0.0:
        raise ConvergenceError("step size underflow")
    phi, V = _taylor_step(A, D, h, tol)
    bound = 1e12 * max(np.linalg.norm(D) / norm_a, 1.0)
    for _ in range(doublings):
        V = V + phi @ V @ phi.T
        phi = phi @ phi
        if not np.all(np.isfinite(V)) or np.linalg.norm(V) > bound:
            raise UnstableMatrixError("covariance diverges: A is not stable")
    return 0.5 * (V + V.T)
