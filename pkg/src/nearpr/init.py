"""Initial PH forms: closed-form, LMI-based, random and ground-truth.

The LMI route first solves the semidefinite relaxation

    min_{delta, X} delta
    s.t.  [[-A^T X - X^T A,  C^T - X^T B], [C - B^T X,  D + D^T]] + delta I >= 0,
          E^T X = X^T E,   E^T X + delta I >= 0,

whose optimum delta* vanishes exactly when the passivity LMIs are feasible,
and then turns the certificate X* into a PH form either by direct formulas
(``init_lmi_formula``) or by solving a second SDP for the remaining blocks
with Q = X* fixed (``init_lmi_solve``).

The certificate X* is not unique and its conditioning varies wildly between
conic solvers; since Q = X* enters the descriptor objective through Q^{-1},
both LMI initializations floor the singular values of X* at
sigma_max / cond_cap before using it (disable with ``cond_cap=None``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from .errors import IllConditionedX, SolverFailed
from .model import LtiSystem, PhForm, Weights, _skew, _sym
from .projections import Bounds, project_ph, project_psd

__all__ = [
    "LmiInitResult",
    "DEFAULT_COND_CAP",
    "init_lmi_formula",
    "init_lmi_solve",
    "init_random",
    "init_standard",
    "init_true",
    "optimal_f",
    "solve_delta_lmi",
]

# Default conditioning cap applied to X* before it is used as Q.
DEFAULT_COND_CAP = 100.0

# X* counts as numerically singular below this reciprocal condition number.
_RCOND_FLOOR = 1e-12

_SOLVER_CHAIN = ("CLARABEL", "SCS")


@dataclass(frozen=True)
class LmiInitResult:
    """Solution of the delta-relaxed passivity LMIs.

    delta_star is clamped at zero: when the LMIs are strictly feasible the
    relaxation's raw optimum is negative and X_star is a strictly feasible
    certificate.  solver_status is 'optimal' or 'inaccurate'.
    """

    delta_star: float
    X_star: np.ndarray
    solver_status: str
    condition_estimate: float


def _infer_mode(target: LtiSystem, mode: str | None) -> str:
    if mode is None:
        return "standard" if target.standard else "descriptor"
    if mode not in ("standard", "descriptor"):
        raise ValueError(f"mode must be 'standard' or 'descriptor', got {mode!r}")
    return mode


def _solve_with_fallback(problem: cp.Problem, solver: str | None) -> str:
    """Solve, trying the configured chain; return the final solver status.

    An 'inaccurate' optimum is accepted without falling through to the next
    solver: the certificate is still usable and the conditioning repair in
    ``_prepare_q`` absorbs the remaining slack.
    """
    chain = (solver,) if solver is not None else _SOLVER_CHAIN
    status = "failed"
    for name in chain:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                problem.solve(solver=name)
        except Exception:
            continue
        if problem.status == cp.OPTIMAL:
            return "optimal"
        if problem.status == cp.OPTIMAL_INACCURATE:
            status = "inaccurate"
            break
    if status == "inaccurate":
        return status
    raise SolverFailed(f"conic solve failed (last status: {problem.status!r})")


def solve_delta_lmi(target: LtiSystem, solver: str | None = None) -> LmiInitResult:
    """Solve the delta-relaxed passivity LMIs for (delta*, X*)."""
    E, A, B, C, D = target.matrices()
    n, m = target.n, target.m
    X = cp.Variable((n, n))
    delta = cp.Variable()
    blk = cp.bmat([[-A.T @ X - X.T @ A, C.T - X.T @ B],
                   [C - B.T @ X, D + D.T]])
    W = E.T @ X
    constraints = [
        (blk + blk.T) / 2 + delta * np.eye(n + m) >> 0,
        W == W.T,
        (W + W.T) / 2 + delta * np.eye(n) >> 0,
    ]
    problem = cp.Problem(cp.Minimize(delta), constraints)
    status = _solve_with_fallback(problem, solver)
    if X.value is None or delta.value is None:
        raise SolverFailed("conic solver returned no certificate")
    x_star = np.asarray(X.value, dtype=float)
    if not np.all(np.isfinite(x_star)):
        raise SolverFailed("conic solver returned a non-finite certificate")
    return LmiInitResult(
        delta_star=max(float(delta.value), 0.0),
        X_star=x_star,
        solver_status=status,
        condition_estimate=float(np.linalg.cond(x_star)),
    )


def _prepare_q(lmi: LmiInitResult, cond_cap: float | None,
               require_invertible: bool) -> np.ndarray:
    """X* repaired for use as Q: singular values floored at sigma_max/cond_cap."""
    x = lmi.X_star
    u, s, vt = np.linalg.svd(x)
    if require_invertible and (s[0] == 0 or s[-1] / s[0] < _RCOND_FLOOR):
        raise IllConditionedX(
            f"X* is numerically singular (reciprocal condition "
            f"{0.0 if s[0] == 0 else s[-1] / s[0]:.2e})")
    if cond_cap is None or s[0] == 0 or s[-1] >= s[0] / cond_cap:
        return x.copy()
    warnings.warn(
        f"LMI certificate has condition number {s[0] / s[-1]:.2e}; "
        f"flooring its singular values at sigma_max/{cond_cap:g}",
        stacklevel=3)
    return (u * np.maximum(s, s[0] / cond_cap)) @ vt


def init_standard(target: LtiSystem, mode: str | None = None) -> PhForm:
    """Closed-form initialization with Q = I and P = 0."""
    mode = _infer_mode(target, mode)
    E, A, B, C, D = target.matrices()
    n, m = target.n, target.m
    z = project_psd(E.T) if mode == "descriptor" else None
    return PhForm(
        J=_skew(A),
        R=project_psd(-_sym(A)),
        Q=np.eye(n),
        F=(B + C.T) / 2,
        P=np.zeros((n, m)),
        S=project_psd(_sym(D)),
        N=_skew(D),
        Z=z,
        mode=mode,
    )


def init_lmi_formula(target: LtiSystem, lmi: LmiInitResult,
                     mode: str | None = None,
                     cond_cap: float | None = DEFAULT_COND_CAP) -> PhForm:
    """PH form built from the LMI certificate by the inversion formulas.

    With Q = X*, the choices J = skew(A Q^{-1}), R = -sym(A Q^{-1}),
    F/P = (+-B + Q^{-T} C^T)/2, S = sym(D), N = skew(D), Z = P_psd(E^T Q)
    reproduce (A, B, C, D) exactly; when X* solves the LMIs with delta* = 0
    the result is already feasible and the final projection is a no-op.
    """
    mode = _infer_mode(target, mode)
    E, A, B, C, D = target.matrices()
    q = _prepare_q(lmi, cond_cap, require_invertible=True)
    qi = np.linalg.inv(q)
    aq = A @ qi
    qit_ct = np.linalg.solve(q.T, C.T)
    z = project_psd(E.T @ q) if mode == "descriptor" else None
    ph = PhForm(
        J=_skew(aq),
        R=-_sym(aq),
        Q=q,
        F=(B + qit_ct) / 2,
        P=(-B + qit_ct) / 2,
        S=_sym(D),
        N=_skew(D),
        Z=z,
        mode=mode,
    )
    return project_ph(ph, Bounds())


def init_lmi_solve(target: LtiSystem, lmi: LmiInitResult,
                   mode: str | None = None,
                   cond_cap: float | None = DEFAULT_COND_CAP,
                   w: Weights = Weights(),
                   solver: str | None = None) -> PhForm:
    """PH form from the LMI certificate by solving a second SDP.

    Q = X* is fixed and (J, R, F, P, S) minimize the weighted objective
    subject to J skew-symmetric and the cost matrix PSD; by construction the
    result starts no worse than :func:`init_lmi_formula` on the same Q.
    """
    mode = _infer_mode(target, mode)
    E, A, B, C, D = target.matrices()
    n, m = target.n, target.m
    q = _prepare_q(lmi, cond_cap, require_invertible=False)
    J = cp.Variable((n, n))
    R = cp.Variable((n, n), symmetric=True)
    F = cp.Variable((n, m))
    P = cp.Variable((n, m))
    S = cp.Variable((m, m), symmetric=True)
    K = cp.bmat([[R, P], [P.T, S]])
    obj = (w.w1 * cp.sum_squares(A - (J - R) @ q)
           + w.w2 * cp.sum_squares(B - (F - P))
           + w.w3 * cp.sum_squares(C - (F + P).T @ q)
           + w.w4 * cp.sum_squares(_sym(D) - S))
    problem = cp.Problem(cp.Minimize(obj), [J == -J.T, K >> 0])
    _solve_with_fallback(problem, solver)
    if J.value is None:
        raise SolverFailed("SDP initialization returned no solution")
    z = project_psd(E.T @ q) if mode == "descriptor" else None
    ph = PhForm(J.value, R.value, q, F.value, P.value, S.value,
                N=_skew(D), Z=z, mode=mode)
    return project_ph(ph, Bounds())


def init_random(target: LtiSystem, seed: int, kappa: float = 1e4,
                mode: str | None = None) -> PhForm:
    """Random feasible PH form: Q = G G^T with conditioning capped at kappa,
    J/K/Z projected Gaussian matrices, F optimal for the target's B and C."""
    mode = _infer_mode(target, mode)
    n, m = target.n, target.m
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, n))
    u, s, vt = np.linalg.svd(g @ g.T)
    q = (u * np.maximum(s, s[0] / kappa)) @ vt
    j = _skew(rng.standard_normal((n, n)))
    k = project_psd(rng.standard_normal((n + m, n + m)))
    r, p, s_blk = k[:n, :n], k[:n, n:], k[n:, n:]
    z = project_psd(rng.standard_normal((n, n))) if mode == "descriptor" else None
    f = optimal_f(q, p, target.B, target.C)
    return PhForm(j, r, q, f, p, s_blk, N=np.zeros((m, m)), Z=z, mode=mode)


def init_true(ph_true: PhForm, target_D: np.ndarray) -> PhForm:
    """Ground-truth initialization: keep (J, R, Q[, Z]) and set F to the true
    input matrix (F - P), P = 0, S = sym(target D), N = 0."""
    d = np.asarray(target_D, dtype=float)
    ph = PhForm(
        J=ph_true.J,
        R=ph_true.R,
        Q=ph_true.Q,
        F=ph_true.F - ph_true.P,
        P=np.zeros_like(ph_true.P),
        S=_sym(d),
        N=np.zeros_like(d),
        Z=ph_true.Z,
        mode=ph_true.mode,
    )
    return project_ph(ph, Bounds())


def optimal_f(Q: np.ndarray, P: np.ndarray, B: np.ndarray,
              C: np.ndarray) -> np.ndarray:
    """Minimizer of ||B - (F - P)||_F^2 + ||C^T - Q^T (F + P)||_F^2 over F,
    namely (I + Q Q^T)^{-1} (P + B + Q C^T - Q Q^T P)."""
    Q = np.asarray(Q, dtype=float)
    qqt = Q @ Q.T
    rhs = P + B + Q @ np.asarray(C).T - qqt @ P
    return np.linalg.solve(np.eye(Q.shape[0]) + qqt, rhs)
