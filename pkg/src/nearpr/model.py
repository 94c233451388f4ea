"""System and port-Hamiltonian data types, assembly, objective and gradient.

A port-Hamiltonian (PH) form (J, R, Q, F, P, S, N[, Z]) assembles into an LTI
system via

    A = (J - R) Q,   B = F - P,   C = (F + P)^T Q,   D = S + N,

with E = I in standard mode and E^T = Z Q^{-1} in descriptor mode.  The
weighted objective measures the squared Frobenius distance between a target
system (E, A, B, C, D) and the system assembled from a PH form:

    w1 ||A - (J-R)Q||^2 + w2 ||B - (F-P)||^2 + w3 ||C - (F+P)^T Q||^2
      + w4 ||(D+D^T)/2 - S||^2  (+ w5 ||E^T - Z Q^{-1}||^2 in descriptor mode).

N never enters the objective: the skew part of D is matched exactly by fixing
N = (D - D^T)/2, which is the unconstrained optimum for that block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularQ

__all__ = [
    "LtiSystem",
    "PhForm",
    "PhGradient",
    "Weights",
    "assemble",
    "cost_matrix",
    "gradient",
    "objective",
]

# Assembly refuses to invert Q beyond this condition number.
_Q_COND_CAP = 1e12


def _sym(x: np.ndarray) -> np.ndarray:
    return (x + x.T) / 2


def _skew(x: np.ndarray) -> np.ndarray:
    return (x - x.T) / 2


def _as_matrix(x, rows: int | None = None, cols: int | None = None, name: str = "") -> np.ndarray:
    a = np.array(x, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-d matrix, got shape {a.shape}")
    if rows is not None and a.shape[0] != rows:
        raise ValueError(f"{name} must have {rows} rows, got {a.shape[0]}")
    if cols is not None and a.shape[1] != cols:
        raise ValueError(f"{name} must have {cols} columns, got {a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LtiSystem:
    """The quintuple (E, A, B, C, D) with state dimension n and m ports.

    ``standard=True`` pins E to the identity; a standard system's E is never
    treated as perturbable by the solver.
    """

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    standard: bool = False

    def __post_init__(self):
        a = _as_matrix(self.A, name="A")
        n = a.shape[0]
        if a.shape[1] != n:
            raise ValueError("A must be square")
        b = _as_matrix(self.B, rows=n, name="B")
        m = b.shape[1]
        c = _as_matrix(self.C, rows=m, cols=n, name="C")
        d = _as_matrix(self.D, rows=m, cols=m, name="D")
        if self.standard and self.E is None:
            e = np.eye(n)
            e.setflags(write=False)
        else:
            e = _as_matrix(self.E, rows=n, cols=n, name="E")
        if self.standard and not np.array_equal(e, np.eye(n)):
            raise ValueError("standard system requires E to be exactly the identity")
        for name, val in (("E", e), ("A", a), ("B", b), ("C", c), ("D", d)):
            object.__setattr__(self, name, val)

    @classmethod
    def from_abcd(cls, A, B, C, D) -> "LtiSystem":
        """Build a standard system (E = I)."""
        A = np.asarray(A, dtype=float)
        return cls(np.eye(A.shape[0]), A, B, C, D, standard=True)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def matrices(self) -> tuple[np.ndarray, ...]:
        return (self.E, self.A, self.B, self.C, self.D)


@dataclass(frozen=True)
class PhForm:
    """Port-Hamiltonian variable block.

    J and N are stored as their skew-symmetric parts and R, S, Z as their
    symmetric parts, so the structural identities J^T = -J, N^T = -N,
    R^T = R, S^T = S, Z^T = Z hold exactly on every instance.  Z is present
    exactly in descriptor mode.
    """

    J: np.ndarray
    R: np.ndarray
    Q: np.ndarray
    F: np.ndarray
    P: np.ndarray
    S: np.ndarray
    N: np.ndarray
    Z: np.ndarray | None = None
    mode: str = "standard"

    def __post_init__(self):
        if self.mode not in ("standard", "descriptor"):
            raise ValueError(f"mode must be 'standard' or 'descriptor', got {self.mode!r}")
        j = _as_matrix(self.J, name="J")
        n = j.shape[0]
        if j.shape[1] != n:
            raise ValueError("J must be square")
        r = _as_matrix(self.R, rows=n, cols=n, name="R")
        q = _as_matrix(self.Q, rows=n, cols=n, name="Q")
        f = _as_matrix(self.F, rows=n, name="F")
        m = f.shape[1]
        p = _as_matrix(self.P, rows=n, cols=m, name="P")
        s = _as_matrix(self.S, rows=m, cols=m, name="S")
        nn = _as_matrix(self.N, rows=m, cols=m, name="N")
        j, nn = _skew(j), _skew(nn)
        r, s = _sym(r), _sym(s)
        z = self.Z
        if self.mode == "descriptor":
            if z is None:
                raise ValueError("descriptor mode requires Z")
            z = _sym(_as_matrix(z, rows=n, cols=n, name="Z"))
            z.setflags(write=False)
        elif z is not None:
            raise ValueError("standard mode must not carry Z")
        for arr in (j, r, s, nn):
            arr.setflags(write=False)
        for name, val in (("J", j), ("R", r), ("Q", q), ("F", f), ("P", p),
                          ("S", s), ("N", nn), ("Z", z)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.J.shape[0]

    @property
    def m(self) -> int:
        return self.F.shape[1]

    def blocks(self) -> tuple[np.ndarray, ...]:
        """Optimization-variable blocks, (J, R, Q, F, P, S[, Z])."""
        if self.mode == "descriptor":
            return (self.J, self.R, self.Q, self.F, self.P, self.S, self.Z)
        return (self.J, self.R, self.Q, self.F, self.P, self.S)


@dataclass(frozen=True)
class PhGradient:
    """Gradient of the objective, one array per optimization variable."""

    J: np.ndarray
    R: np.ndarray
    Q: np.ndarray
    F: np.ndarray
    P: np.ndarray
    S: np.ndarray
    Z: np.ndarray | None = None

    def blocks(self) -> tuple[np.ndarray, ...]:
        if self.Z is not None:
            return (self.J, self.R, self.Q, self.F, self.P, self.S, self.Z)
        return (self.J, self.R, self.Q, self.F, self.P, self.S)


@dataclass(frozen=True)
class Weights:
    """Nonnegative weights for the A, B, C, D and (descriptor) E terms."""

    w1: float = 1.0
    w2: float = 1.0
    w3: float = 1.0
    w4: float = 1.0
    w5: float = 1.0

    def __post_init__(self):
        for name in ("w1", "w2", "w3", "w4", "w5"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_sequence(cls, seq) -> "Weights":
        vals = [float(v) for v in seq]
        if len(vals) == 4:
            vals.append(1.0)
        if len(vals) != 5:
            raise ValueError("expected 4 or 5 weights")
        return cls(*vals)

    def as_array(self) -> np.ndarray:
        return np.array([self.w1, self.w2, self.w3, self.w4, self.w5])


def cost_matrix(ph: PhForm) -> np.ndarray:
    """The (n+m) x (n+m) cost matrix K = [R P; P^T S]."""
    return np.block([[ph.R, ph.P], [ph.P.T, ph.S]])


def _q_inverse(q: np.ndarray) -> np.ndarray:
    """Invert Q, refusing condition numbers beyond the assembly cap."""
    sv = np.linalg.svd(q, compute_uv=False)
    if sv[0] == 0 or sv[-1] / sv[0] < 1.0 / _Q_COND_CAP:
        raise SingularQ(f"Q is numerically singular (min/max singular value ratio "
                        f"{0.0 if sv[0] == 0 else sv[-1] / sv[0]:.2e})")
    return np.linalg.inv(q)


def assemble(ph: PhForm) -> LtiSystem:
    """Assemble the LTI system represented by a PH form."""
    a = (ph.J - ph.R) @ ph.Q
    b = ph.F - ph.P
    c = (ph.F + ph.P).T @ ph.Q
    d = ph.S + ph.N
    if ph.mode == "descriptor":
        e = (ph.Z @ _q_inverse(ph.Q)).T
        return LtiSystem(e, a, b, c, d, standard=False)
    return LtiSystem(np.eye(ph.n), a, b, c, d, standard=True)


def _eval_blocks(blocks, A, B, C, Dsym, Et, w, descriptor, want_grad):
    """Objective (and optionally gradient) on raw variable blocks.

    Returns ``inf`` (with ``None`` gradients) instead of raising when the
    descriptor inverse of Q breaks down, so line searches can treat the point
    as infinitely bad.
    """
    if descriptor:
        J, R, Q, F, P, S, Z = blocks
    else:
        J, R, Q, F, P, S = blocks
    da = (J - R) @ Q - A
    db = (F - P) - B
    dc = Q.T @ (F + P) - C.T
    ds = S - Dsym
    f = (w[0] * np.vdot(da, da) + w[1] * np.vdot(db, db)
         + w[2] * np.vdot(dc, dc) + w[3] * np.vdot(ds, ds))
    if descriptor:
        try:
            qi = np.linalg.inv(Q)
        except np.linalg.LinAlgError:
            return (np.inf, None) if want_grad else np.inf
        de = Z @ qi - Et
        f += w[4] * np.vdot(de, de)
    if not want_grad:
        return f
    if not np.isfinite(f):
        return np.inf, None
    gj = 2 * w[0] * da @ Q.T
    gq = 2 * w[0] * (J - R).T @ da + 2 * w[2] * (F + P) @ dc.T
    qdc = Q @ dc
    gf = 2 * w[1] * db + 2 * w[2] * qdc
    gp = -2 * w[1] * db + 2 * w[2] * qdc
    gs = 2 * w[3] * ds
    if descriptor:
        gq = gq - 2 * w[4] * qi.T @ Z.T @ de @ qi.T
        gz = 2 * w[4] * de @ qi.T
        return f, [gj, -gj, gq, gf, gp, gs, gz]
    return f, [gj, -gj, gq, gf, gp, gs]


def _target_data(target: LtiSystem, ph_mode: str, w: Weights):
    """Precomputed target blocks for repeated objective evaluations."""
    descriptor = ph_mode == "descriptor"
    return (target.A, target.B, target.C, _sym(target.D), target.E.T,
            w.as_array(), descriptor)


def objective(ph: PhForm, target: LtiSystem, w: Weights = Weights()) -> float:
    """Weighted squared-Frobenius distance between target and assemble(ph)."""
    _check_compatible(ph, target)
    A, B, C, Dsym, Et, wa, descriptor = _target_data(target, ph.mode, w)
    if descriptor:
        _q_inverse(ph.Q)
    val = _eval_blocks(ph.blocks(), A, B, C, Dsym, Et, wa, descriptor, want_grad=False)
    return float(val)


def gradient(ph: PhForm, target: LtiSystem, w: Weights = Weights()) -> PhGradient:
    """Exact gradient of :func:`objective` with respect to (J, R, Q, F, P, S[, Z])."""
    _check_compatible(ph, target)
    A, B, C, Dsym, Et, wa, descriptor = _target_data(target, ph.mode, w)
    if descriptor:
        _q_inverse(ph.Q)
    _, g = _eval_blocks(ph.blocks(), A, B, C, Dsym, Et, wa, descriptor, want_grad=True)
    if g is None:
        raise SingularQ("gradient is non-finite: Q is numerically singular")
    if descriptor:
        return PhGradient(g[0], g[1], g[2], g[3], g[4], g[5], g[6])
    return PhGradient(g[0], g[1], g[2], g[3], g[4], g[5])


def _check_compatible(ph: PhForm, target: LtiSystem) -> None:
    if ph.n != target.n or ph.m != target.m:
        raise ValueError(f"dimension mismatch: form is ({ph.n}, {ph.m}), "
                         f"target is ({target.n}, {target.m})")
