"""Shared fixtures: worked-example systems and random feasible PH forms."""

from __future__ import annotations

import numpy as np
import pytest

from nearpr import LtiSystem, PhForm, assemble, project_psd


def make_lightly_damped() -> LtiSystem:
    """Stable but non-passive standard system (two lightly damped modes)."""
    a = np.array([[-0.08, 0.83, 0.0, 0.0],
                  [-0.83, -0.08, 0.0, 0.0],
                  [0.0, 0.0, -0.7, 9.0],
                  [0.0, 0.0, -9.0, -0.7]])
    b = np.array([[1.0, 0.0, 1.0, 0.0],
                  [1.0, 0.0, -1.0, 0.0]]).T
    c = np.array([[0.4, 0.0, 0.4, 0.0],
                  [0.6, 0.0, 1.0, 0.0]])
    d = np.array([[0.3, 0.0], [0.0, -0.15]])
    return LtiSystem.from_abcd(a, b, c, d)


def make_coupled_desc(identity_e: bool = False) -> LtiSystem:
    """Descriptor system with an index-two pencil and one unstable variant."""
    e = np.array([[16.0, 12, -4, 14],
                  [14, 8, 4, -14],
                  [-14, 8, -4, 34],
                  [6, -4, 0, -10]])
    a = np.array([[6.0, -19, 7, -9],
                  [11, 3, -21, 18],
                  [25, -9, 35, -16],
                  [-27, 6, -16, 38]])
    b = np.array([[-0.6], [1.0], [0.2], [-0.3]])
    c = np.array([[3.2, 1.4, 2.6, 1.4]])
    d = np.array([[0.105]])
    if identity_e:
        return LtiSystem(np.eye(4), a, b, c, d, standard=False)
    return LtiSystem(e, a, b, c, d, standard=False)


def make_single_pole(alpha: float) -> LtiSystem:
    """Descriptor system with closed-form G(jw) + G(jw)* = 2/(w^2+1) - 2a - 1."""
    e = np.diag([1.0, 0.0, 0.0])
    a = np.diag([-1.0, 1.0, 1.0])
    b = np.array([[1.0], [1.0], [alpha]])
    c = np.array([[1.0, 1.0, 1.0]])
    d = np.array([[0.5]])
    return LtiSystem(e, a, b, c, d, standard=False)


def make_ph(n: int, m: int, mode: str, seed: int, strict: float = 0.0) -> PhForm:
    """Random feasible PH form; strict > 0 pushes K (and Z) that far inside
    the PSD cone and makes Q safely invertible."""
    rng = np.random.default_rng(seed)
    j = rng.standard_normal((n, n))
    k = project_psd(rng.standard_normal((n + m, n + m))) + strict * np.eye(n + m)
    if mode == "standard":
        q = project_psd(rng.standard_normal((n, n))) + max(strict, 1e-2) * np.eye(n)
        z = None
    else:
        g = rng.standard_normal((n, n))
        q = g + np.sqrt(n) * 2 * np.eye(n)
        z = project_psd(rng.standard_normal((n, n))) + strict * np.eye(n)
    return PhForm(J=j, R=k[:n, :n], Q=q, F=rng.standard_normal((n, m)),
                  P=k[:n, n:], S=k[n:, n:], N=rng.standard_normal((m, m)),
                  Z=z, mode=mode)


@pytest.fixture(scope="session")
def lightly_damped() -> LtiSystem:
    return make_lightly_damped()


@pytest.fixture(scope="session")
def coupled_desc() -> LtiSystem:
    return make_coupled_desc()


@pytest.fixture(scope="session")
def coupled_desc_eye() -> LtiSystem:
    return make_coupled_desc(identity_e=True)


def assert_feasible(ph: PhForm, deltaK: float = 0.0, nuZ: float = 0.0,
                    tol: float = 1e-10) -> None:
    assert np.array_equal(ph.J, -ph.J.T)
    k = np.block([[ph.R, ph.P], [ph.P.T, ph.S]])
    assert np.linalg.eigvalsh(k).min() >= deltaK - tol
    if ph.mode == "standard":
        assert np.linalg.eigvalsh(ph.Q).min() >= -tol
    else:
        assert np.linalg.eigvalsh(ph.Z).min() >= nuZ - tol


def make_strict_target(n: int, m: int, mode: str, seed: int):
    """Strictly passive target assembled from a strict PH form."""
    ph = make_ph(n, m, mode, seed, strict=0.2)
    return ph, assemble(ph)
