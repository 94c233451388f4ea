"""Projections onto the feasible set and their optimality."""

import numpy as np
import pytest

from nearpr import Bounds, PhForm, cost_matrix, project_ph, project_psd, project_skew

from conftest import make_ph


def test_bounds_validation():
    with pytest.raises(ValueError):
        Bounds(deltaK=-1e-3)
    with pytest.raises(ValueError):
        Bounds(nuZ=-1.0)
    assert Bounds().deltaK == 0.0


def test_project_skew_basics():
    sym = np.array([[1.0, 2.0], [2.0, 3.0]])
    assert np.array_equal(project_skew(sym), np.zeros((2, 2)))
    skew = np.array([[0.0, 5.0], [-5.0, 0.0]])
    assert np.array_equal(project_skew(skew), skew)
    with pytest.raises(ValueError):
        project_skew(np.zeros((2, 3)))


def test_project_skew_is_nearest():
    rng = np.random.default_rng(0)
    for _ in range(200):
        x = rng.standard_normal((4, 4))
        p = project_skew(x)
        dist = np.linalg.norm(x - p)
        for _ in range(5):
            cand = rng.standard_normal((4, 4))
            cand = (cand - cand.T) / 2
            assert np.linalg.norm(x - cand) >= dist - 1e-12


def test_project_psd_diagonal_clip():
    assert np.array_equal(project_psd(np.diag([1.0, -2.0])), np.diag([1.0, 0.0]))
    out = project_psd(np.diag([1.0, -2.0]), lb=0.5)
    assert np.allclose(out, np.diag([1.0, 0.5]), atol=1e-14)
    with pytest.raises(ValueError):
        project_psd(np.eye(2), lb=-0.1)
    with pytest.raises(ValueError):
        project_psd(np.zeros((2, 3)))


def test_project_psd_idempotent_and_feasible():
    rng = np.random.default_rng(1)
    for lb in (0.0, 1e-3, 0.5):
        for _ in range(50):
            x = rng.standard_normal((5, 5))
            p = project_psd(x, lb)
            assert np.array_equal(p, p.T)
            assert np.linalg.eigvalsh(p).min() >= lb - 1e-12
            again = project_psd(p, lb)
            assert np.allclose(again, p, atol=1e-12)


def test_project_psd_matches_convex_solver():
    import cvxpy as cp

    rng = np.random.default_rng(2)
    for lb in (0.0, 0.2):
        x = rng.standard_normal((4, 4))
        x = (x + x.T) / 2
        y = cp.Variable((4, 4), symmetric=True)
        prob = cp.Problem(cp.Minimize(cp.norm(y - x, "fro")),
                          [y >> lb * np.eye(4)])
        prob.solve(solver=cp.CLARABEL)
        p = project_psd(x, lb)
        assert np.allclose(p, y.value, atol=5e-4)
        assert np.linalg.norm(x - p) <= np.linalg.norm(x - y.value) + 1e-6


def test_project_psd_nonexpansive():
    rng = np.random.default_rng(3)
    for _ in range(100):
        x = rng.standard_normal((4, 4))
        y = rng.standard_normal((4, 4))
        x, y = (x + x.T) / 2, (y + y.T) / 2
        px, py = project_psd(x), project_psd(y)
        assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12


def test_symmetric_skew_split_is_orthogonal():
    rng = np.random.default_rng(4)
    for _ in range(100):
        x = rng.standard_normal((6, 6))
        sk = project_skew(x)
        sym = (x + x.T) / 2
        assert np.allclose(sk + sym, x, atol=1e-14)
        assert abs(np.vdot(sk, sym)) <= 1e-12
        norm_sq = np.linalg.norm(sk) ** 2 + np.linalg.norm(sym) ** 2
        assert np.isclose(norm_sq, np.linalg.norm(x) ** 2, rtol=1e-12)


@pytest.mark.parametrize("mode", ["standard", "descriptor"])
def test_project_ph_feasible_and_idempotent(mode):
    rng = np.random.default_rng(5)
    bounds = Bounds(deltaK=1e-3, nuZ=2e-3)
    for seed in range(20):
        ph = make_ph(4, 2, mode, seed=seed)
        noisy = PhForm(J=ph.J + rng.standard_normal((4, 4)),
                       R=ph.R + rng.standard_normal((4, 4)),
                       Q=ph.Q, F=ph.F,
                       P=ph.P + rng.standard_normal((4, 2)),
                       S=ph.S - 2 * np.eye(2), N=ph.N,
                       Z=None if mode == "standard" else ph.Z - np.eye(4),
                       mode=mode)
        proj = project_ph(noisy, bounds)
        k = cost_matrix(proj)
        assert np.linalg.eigvalsh(k).min() >= bounds.deltaK - 1e-10
        if mode == "descriptor":
            assert np.linalg.eigvalsh(proj.Z).min() >= bounds.nuZ - 1e-10
            assert np.array_equal(proj.Q, noisy.Q)
        else:
            assert np.linalg.eigvalsh(proj.Q).min() >= -1e-10
        assert np.array_equal(proj.F, noisy.F)
        assert np.array_equal(proj.N, noisy.N)
        again = project_ph(proj, bounds)
        for a, b in zip(again.blocks(), proj.blocks()):
            assert np.allclose(a, b, atol=1e-12)


def test_project_ph_clips_cost_matrix_spectrum():
    n, m = 3, 1
    ph = PhForm(J=np.zeros((n, n)), R=np.diag([1.0, 1.0, 1.0]),
                Q=np.eye(n), F=np.zeros((n, m)), P=np.zeros((n, m)),
                S=np.array([[-1.0]]), N=np.zeros((m, m)))
    proj = project_ph(ph, Bounds(deltaK=0.25))
    k = cost_matrix(proj)
    assert np.allclose(k, np.diag([1.0, 1.0, 1.0, 0.25]), atol=1e-12)


def test_project_ph_joint_cost_block_is_nearest():
    rng = np.random.default_rng(6)
    n, m = 3, 2
    for _ in range(50):
        ph = PhForm(J=np.zeros((n, n)),
                    R=rng.standard_normal((n, n)),
                    Q=np.eye(n),
                    F=np.zeros((n, m)),
                    P=rng.standard_normal((n, m)),
                    S=rng.standard_normal((m, m)),
                    N=np.zeros((m, m)))
        proj = project_ph(ph)
        k0 = cost_matrix(ph)
        dist = np.linalg.norm(cost_matrix(proj) - k0)
        for _ in range(10):
            g = rng.standard_normal((n + m, n + m))
            cand = project_psd(g @ g.T + rng.standard_normal((n + m, n + m)))
            assert np.linalg.norm(cand - k0) >= dist - 1e-10
