"""Frobenius-norm projections onto the solver's feasible sets.

The PH feasible set is a product of simple convex sets: skew-symmetric J, the
cost matrix K = [R P; P^T S] in the PSD cone (optionally shifted by deltaK to
enforce strictness), plus Q PSD in standard mode or Z PSD (shifted by nuZ) in
descriptor mode.  Since the symmetric and skew-symmetric subspaces are
orthogonal, each factor projects independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigFailure
from .model import PhForm, _sym

__all__ = ["Bounds", "project_skew", "project_psd", "project_ph"]


@dataclass(frozen=True)
class Bounds:
    """Lower bounds lambda_min(K) >= deltaK and lambda_min(Z) >= nuZ."""

    deltaK: float = 0.0
    nuZ: float = 0.0

    def __post_init__(self):
        if self.deltaK < 0 or self.nuZ < 0:
            raise ValueError("bounds must be nonnegative")


def project_skew(x: np.ndarray) -> np.ndarray:
    """Nearest skew-symmetric matrix, (X - X^T)/2."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError("project_skew requires a square matrix")
    return (x - x.T) / 2


def project_psd(x: np.ndarray, lb: float = 0.0) -> np.ndarray:
    """Nearest symmetric matrix with all eigenvalues >= lb.

    Symmetrizes the input, clips the spectrum from below at lb (exactly, so
    eigenvalues a hair under the bound snap onto it) and reassembles; the
    reassembled matrix satisfies lambda_min >= lb up to eigensolver rounding.
    """
    if lb < 0:
        raise ValueError("lb must be nonnegative")
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError("project_psd requires a square matrix")
    try:
        w, v = np.linalg.eigh(_sym(x))
    except np.linalg.LinAlgError as exc:
        raise EigFailure(f"symmetric eigendecomposition failed: {exc}") from exc
    w = np.maximum(w, lb)
    return _sym((v * w) @ v.T)


def project_ph(ph: PhForm, bounds: Bounds = Bounds()) -> PhForm:
    """Project a PH form onto the feasible set.

    J is replaced by its skew part, K = [R P; P^T S] is projected jointly onto
    the deltaK-shifted PSD cone and split back, Q is projected onto the PSD
    cone in standard mode, Z onto the nuZ-shifted PSD cone in descriptor mode
    (leaving Q untouched).  F and N are free and pass through unchanged.
    """
    descriptor = ph.mode == "descriptor"
    out = _project_blocks(ph.blocks(), descriptor, bounds.deltaK, bounds.nuZ)
    if descriptor:
        j, r, q, f, p, s, z = out
    else:
        j, r, q, f, p, s = out
        z = None
    return PhForm(j, r, q, f, p, s, ph.N, Z=z, mode=ph.mode)


def _project_blocks(blocks, descriptor: bool, deltaK: float, nuZ: float):
    """project_ph on raw variable blocks (J, R, Q, F, P, S[, Z])."""
    if descriptor:
        j, r, q, f, p, s, z = blocks
    else:
        j, r, q, f, p, s = blocks
    n = j.shape[0]
    j = (j - j.T) / 2
    k = project_psd(np.block([[r, p], [p.T, s]]), deltaK)
    r, p, s = k[:n, :n], k[:n, n:], k[n:, n:]
    if descriptor:
        return [j, r, q, f, p, s, project_psd(z, nuZ)]
    return [j, r, project_psd(q), f, p, s]
