"""Passivity, stability and admissibility diagnostics.

The report aggregates frequency-grid evidence (smallest eigenvalue of
G(jw) + G(jw)^* over a logarithmic grid), pencil spectra and index tests,
residuals of the passivity LMIs at a candidate certificate X, and, for
standard systems with positive definite D + D^T, the Hamiltonian-matrix
imaginary-axis test.  Grid verdicts are evidence only; certification goes
through the LMI residuals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import PoleAt, PreconditionViolated, SingularPencil
from .model import LtiSystem, _sym

__all__ = [
    "DiagnosticsReport",
    "HamiltonianCheck",
    "LmiResidual",
    "hamiltonian_check",
    "index_le_one",
    "lmi_residual",
    "passivity_report",
    "pencil_eigs",
    "transfer_eval",
]


class LmiResidual(NamedTuple):
    """Residuals of the passivity LMIs at a candidate X.

    The LMIs hold iff lambda_max_block <= tol, lambda_min_etx >= -tol and
    asym_norm <= tol; the strict version additionally needs
    lambda_max_block < -tol.
    """

    lambda_max_block: float
    lambda_min_etx: float
    asym_norm: float


class HamiltonianCheck(NamedTuple):
    H: np.ndarray
    min_axis_distance: float
    is_pr: bool


class PencilEigs(NamedTuple):
    finite_eigenvalues: np.ndarray
    max_real_part: float
    regular: bool


@dataclass
class DiagnosticsReport:
    """Evidence bundle filled by :func:`passivity_report`."""

    n: int
    m: int
    regular: bool
    finite_eigenvalues: np.ndarray
    max_real_part: float
    index_le_one: bool | None
    frequencies: np.ndarray
    lambda_min_samples: np.ndarray
    lmi_lambda_max: float | None = None
    lmi_lambda_min_etx: float | None = None
    lmi_asym_norm: float | None = None
    hamiltonian_min_axis_distance: float | None = None
    hamiltonian_verdict: str | None = None
    delta_star: float | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def grid_min(self) -> float:
        """Smallest finite grid sample of lambda_min(G(jw) + G(jw)^*)."""
        finite = self.lambda_min_samples[np.isfinite(self.lambda_min_samples)]
        return float(finite.min()) if finite.size else float("nan")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "regular": self.regular,
            "finite_eigenvalues": [[float(z.real), float(z.imag)]
                                   for z in np.atleast_1d(self.finite_eigenvalues)],
            "max_real_part": _json_float(self.max_real_part),
            "index_le_one": self.index_le_one,
            "frequencies": [float(w) for w in self.frequencies],
            "lambda_min_samples": [_json_float(v) for v in self.lambda_min_samples],
            "grid_min": _json_float(self.grid_min),
            "lmi_lambda_max": _json_float(self.lmi_lambda_max),
            "lmi_lambda_min_etx": _json_float(self.lmi_lambda_min_etx),
            "lmi_asym_norm": _json_float(self.lmi_asym_norm),
            "hamiltonian_min_axis_distance": _json_float(self.hamiltonian_min_axis_distance),
            "hamiltonian_verdict": self.hamiltonian_verdict,
            "delta_star": _json_float(self.delta_star),
            "notes": list(self.notes),
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _json_float(v):
    if v is None:
        return None
    v = float(v)
    return v if np.isfinite(v) else None


def transfer_eval(sys: LtiSystem, s: complex) -> np.ndarray:
    """G(s) = C (sE - A)^{-1} B + D via one linear solve."""
    pencil = s * sys.E.astype(complex) - sys.A
    sv = np.linalg.svd(pencil, compute_uv=False)
    if sv[0] == 0 or sv[-1] <= 1e-14 * sv[0]:
        raise PoleAt(s)
    return sys.C @ np.linalg.solve(pencil, sys.B.astype(complex)) + sys.D


def _probe_regularity(E: np.ndarray, A: np.ndarray, tol: float = 1e-10) -> None:
    """Raise SingularPencil when det(lambda E - A) vanishes at every probe."""
    rng = np.random.default_rng(0x5EED)
    scale = (np.linalg.norm(A) + 1.0) / (np.linalg.norm(E) + 1.0)
    for _ in range(5):
        lam = scale * (rng.standard_normal() + 1j * rng.standard_normal())
        sv = np.linalg.svd(lam * E - A, compute_uv=False)
        if sv[0] > 0 and sv[-1] > tol * sv[0]:
            return
    raise SingularPencil("det(lambda E - A) vanished at every probe point")


def pencil_eigs(E: np.ndarray, A: np.ndarray,
                beta_tol: float = 1e-10) -> PencilEigs:
    """Finite generalized eigenvalues of (E, A) and their largest real part.

    Eigenvalues are computed in homogeneous (alpha, beta) form; pairs with
    |beta| <= beta_tol * (|alpha| + |beta|) count as infinite.
    """
    E = np.asarray(E, dtype=float)
    A = np.asarray(A, dtype=float)
    _probe_regularity(E, A)
    alpha, beta = scipy.linalg.eig(A, E, right=False, homogeneous_eigvals=True)
    finite = np.abs(beta) > beta_tol * (np.abs(alpha) + np.abs(beta))
    eigs = alpha[finite] / beta[finite]
    max_real = float(eigs.real.max()) if eigs.size else float("nan")
    return PencilEigs(eigs, max_real, True)


def index_le_one(E: np.ndarray, A: np.ndarray) -> bool:
    """True iff the regular pair (E, A) has index at most one.

    With V a basis of ker(E), the index-one condition is that [E, A V] has
    full row rank n (index zero when E is invertible).
    """
    E = np.asarray(E, dtype=float)
    A = np.asarray(A, dtype=float)
    _probe_regularity(E, A)
    n = E.shape[0]
    u, s, vt = np.linalg.svd(E)
    rank_e = int(np.sum(s > max(E.shape) * np.finfo(float).eps * (s[0] if s.size else 0)))
    if rank_e == n:
        return True
    v = vt[rank_e:].T
    return int(np.linalg.matrix_rank(np.hstack([E, A @ v]))) == n


def lmi_residual(sys: LtiSystem, X: np.ndarray) -> LmiResidual:
    """Residuals of the passivity LMIs at X."""
    X = np.asarray(X, dtype=float)
    E, A, B, C, D = sys.matrices()
    blk = np.block([[A.T @ X + X.T @ A, X.T @ B - C.T],
                    [B.T @ X - C, -D - D.T]])
    w = np.asarray(E.T @ X)
    return LmiResidual(
        lambda_max_block=float(np.linalg.eigvalsh(_sym(blk)).max()),
        lambda_min_etx=float(np.linalg.eigvalsh(_sym(w)).min()),
        asym_norm=float(np.linalg.norm(w - w.T)),
    )


def hamiltonian_check(sys: LtiSystem, axis_tol: float = 1e-8) -> HamiltonianCheck:
    """Imaginary-axis test on the Hamiltonian matrix of a standard system.

    Requires E = I, D + D^T positive definite and A asymptotically stable;
    the system is PR iff the Hamiltonian spectrum stays off the imaginary
    axis (distance measured as min |Re lambda|).
    """
    n = sys.n
    if not (sys.standard or np.array_equal(sys.E, np.eye(n))):
        raise PreconditionViolated("Hamiltonian test requires E = I")
    r0 = sys.D + sys.D.T
    if np.linalg.eigvalsh(_sym(r0)).min() <= 0:
        raise PreconditionViolated("Hamiltonian test requires D + D^T positive definite")
    if np.linalg.eigvals(sys.A).real.max() >= 0:
        raise PreconditionViolated("Hamiltonian test requires an asymptotically stable A")
    ri_c = np.linalg.solve(r0, sys.C)
    ri_bt = np.linalg.solve(r0, sys.B.T)
    a0 = sys.A - sys.B @ ri_c
    h = np.block([[a0, -sys.B @ ri_bt],
                  [sys.C.T @ ri_c, -a0.T]])
    dist = float(np.abs(np.linalg.eigvals(h).real).min())
    return HamiltonianCheck(h, dist, dist > axis_tol)


def passivity_report(sys: LtiSystem, x: np.ndarray | None = None,
                     compute_delta: bool = False, n_grid: int = 200,
                     w_min: float = 1e-3, w_max: float = 1e3) -> DiagnosticsReport:
    """Collect all diagnostics; individual failures are recorded, never raised.

    The frequency grid is n_grid logarithmic points on [w_min, w_max] plus
    w = 0.  Passing a candidate certificate ``x`` (for a PH form, its Q)
    fills the LMI residual fields; ``compute_delta`` additionally solves the
    delta-relaxed LMIs.
    """
    notes: list[str] = []
    freqs = np.concatenate(([0.0], np.logspace(np.log10(w_min), np.log10(w_max), n_grid)))
    samples = np.full(freqs.shape, np.nan)
    for i, w in enumerate(freqs):
        try:
            g = transfer_eval(sys, 1j * w)
            samples[i] = float(np.linalg.eigvalsh((g + g.conj().T)).min())
        except PoleAt:
            notes.append(f"pole on the grid at w = {w:g}")
    try:
        eigs, max_real, regular = pencil_eigs(sys.E, sys.A)
        idx = index_le_one(sys.E, sys.A)
    except SingularPencil as exc:
        notes.append(str(exc))
        eigs, max_real, regular, idx = np.array([], dtype=complex), float("nan"), False, None
    report = DiagnosticsReport(
        n=sys.n, m=sys.m, regular=regular, finite_eigenvalues=eigs,
        max_real_part=max_real, index_le_one=idx, frequencies=freqs,
        lambda_min_samples=samples, notes=notes,
    )
    if x is not None:
        res = lmi_residual(sys, x)
        report.lmi_lambda_max = res.lambda_max_block
        report.lmi_lambda_min_etx = res.lambda_min_etx
        report.lmi_asym_norm = res.asym_norm
    try:
        ham = hamiltonian_check(sys)
        report.hamiltonian_min_axis_distance = ham.min_axis_distance
        report.hamiltonian_verdict = "pr" if ham.is_pr else "not-pr"
    except PreconditionViolated as exc:
        report.hamiltonian_verdict = f"skipped: {exc}"
    if compute_delta:
        from .init import solve_delta_lmi

        try:
            report.delta_star = solve_delta_lmi(sys).delta_star
        except Exception as exc:
            notes.append(f"delta LMI solve failed: {exc}")
    return report
