"""Instance generators, calibrated perturbations and the benchmark driver."""

import csv
import json

import numpy as np
import pytest

from nearpr import (BisectionFailed, MsdParams, lmi_residual, msd_generate,
                    msd_perturb, perturb_to_distance, random_pr_system,
                    relative_error, run_benchmark, solve_delta_lmi, sv_perturb)
from nearpr import LtiSystem


def test_msd_params_validation():
    with pytest.raises(ValueError):
        MsdParams(p=0, m=2, seed=0)
    with pytest.raises(ValueError):
        MsdParams(p=3, m=3, seed=0)
    with pytest.raises(ValueError):
        MsdParams(p=3, m=2, seed=0, spd_shift=0.0)


def test_msd_block_structure():
    p, m = 4, 2
    ph, sys = msd_generate(MsdParams(p=p, m=m, seed=0))
    assert ph.mode == "descriptor"
    w = ph.R[:p, :p]
    h = ph.Q[p:, p:]
    v = ph.Z[:p, :p]
    assert np.linalg.eigvalsh(w).min() > 0
    assert np.linalg.eigvalsh(h).min() > 0
    assert np.linalg.eigvalsh(v).min() > 0
    assert np.array_equal(ph.R[p:, p:], np.zeros((p, p)))
    assert np.array_equal(ph.Q[:p, :p], np.eye(p))
    assert np.array_equal(ph.J, np.block([[np.zeros((p, p)), np.eye(p)],
                                          [-np.eye(p), np.zeros((p, p))]]))
    assert np.allclose(sys.A[:p, :p], -w, atol=1e-14)
    assert np.allclose(sys.A[:p, p:], h, atol=1e-14)
    assert np.allclose(sys.A[p:, :p], -np.eye(p), atol=1e-14)
    assert np.allclose(sys.A[p:, p:], np.zeros((p, p)), atol=1e-14)
    assert np.allclose(sys.E[:p, :p], v, atol=1e-12)
    assert np.allclose(sys.E[p:, p:], np.eye(p), atol=1e-12)
    assert np.allclose(sys.E[:p, p:], np.zeros((p, p)), atol=1e-12)
    assert np.allclose(sys.C, sys.B.T @ ph.Q, atol=1e-14)
    assert (sys.B >= 0).all() and (sys.B <= 1).all()
    assert np.linalg.matrix_rank(sys.D) == m // 2
    assert np.linalg.eigvalsh(sys.D).min() >= -1e-12


def test_msd_deterministic():
    a1, s1 = msd_generate(MsdParams(p=3, m=2, seed=7))
    a2, s2 = msd_generate(MsdParams(p=3, m=2, seed=7))
    for x, y in zip(a1.blocks(), a2.blocks()):
        assert np.array_equal(x, y)
    for x, y in zip(s1.matrices(), s2.matrices()):
        assert np.array_equal(x, y)


def test_msd_q_certifies_passivity():
    ph, sys = msd_generate(MsdParams(p=4, m=2, seed=1))
    res = lmi_residual(sys, ph.Q)
    assert res.lambda_max_block <= 1e-8
    assert res.lambda_min_etx > 0
    assert res.asym_norm <= 1e-10


def test_msd_delta_star_sign():
    ph, sys = msd_generate(MsdParams(p=3, m=2, seed=0))
    assert solve_delta_lmi(sys).delta_star <= 1e-7
    perturbed = msd_perturb(ph, sys, 0.3)
    assert solve_delta_lmi(perturbed).delta_star > 1e-6


def test_msd_perturb_touches_only_damping_block():
    p = 3
    ph, sys = msd_generate(MsdParams(p=p, m=2, seed=2))
    same = msd_perturb(ph, sys, 0.0)
    assert np.array_equal(same.A, sys.A)
    eps = 0.05
    pert = msd_perturb(ph, sys, eps)
    h = ph.Q[p:, p:]
    delta = pert.A - sys.A
    assert np.allclose(delta[p:, p:], eps * h, atol=1e-14)
    assert np.allclose(delta[:p, :], 0.0, atol=1e-14)
    assert np.allclose(delta[p:, :p], 0.0, atol=1e-14)
    for a, b in zip(pert.matrices()[:1] + pert.matrices()[2:],
                    sys.matrices()[:1] + sys.matrices()[2:]):
        assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        msd_perturb(ph, sys, -0.1)


def test_random_pr_system_properties():
    ph1, sys1 = random_pr_system(4, 2, seed=3)
    ph2, sys2 = random_pr_system(4, 2, seed=3)
    for x, y in zip(ph1.blocks(), ph2.blocks()):
        assert np.array_equal(x, y)
    assert ph1.mode == "descriptor"
    assert np.linalg.cond(ph1.Q) <= 1e4 * (1 + 1e-8)
    assert solve_delta_lmi(sys1).delta_star <= 1e-6


def test_sv_perturb_values():
    out = sv_perturb(np.diag([3.0, 1.0]), 1.0 / 3.0)
    assert np.allclose(out, np.diag([2.0, -1.0]), atol=1e-12)
    x = np.diag([2.0, 0.0])
    assert np.allclose(sv_perturb(x, 0.0), x, atol=1e-15)
    with pytest.raises(ValueError):
        sv_perturb(np.eye(2), -0.5)


def test_sv_perturb_frobenius_identity():
    rng = np.random.default_rng(11)
    g = rng.standard_normal((5, 5))
    x = g @ g.T
    s = np.linalg.svd(x, compute_uv=False)
    delta = 0.2
    diff = np.linalg.norm(x - sv_perturb(x, delta))
    expected = np.sqrt(4 * (delta * s[0]) ** 2 + (s[-1] + delta * s[0]) ** 2)
    assert np.isclose(diff, expected, rtol=1e-10)


def test_perturb_to_distance_hits_requested_levels():
    ph, sys = msd_generate(MsdParams(p=3, m=2, seed=4))
    deltas = []
    for eps in (0.001, 0.01, 0.1, 0.5):
        pert, delta = perturb_to_distance(ph, sys, eps)
        achieved = relative_error(pert, sys)
        assert abs(achieved - eps) <= 1e-4
        assert delta > 0
        deltas.append(delta)
    assert all(a < b for a, b in zip(deltas, deltas[1:]))
    with pytest.raises(ValueError):
        perturb_to_distance(ph, sys, 0.0)
    with pytest.raises(ValueError):
        perturb_to_distance(ph, sys, 1.0)


def test_relative_error_hand_values():
    ref = LtiSystem.from_abcd(np.diag([3.0, 4.0]), np.zeros((2, 1)),
                              np.zeros((1, 2)), np.zeros((1, 1)))
    other = LtiSystem.from_abcd(np.diag([4.0, 4.0]), np.zeros((2, 1)),
                                np.zeros((1, 2)), np.zeros((1, 1)))
    assert np.isclose(relative_error(ref, other, include_e=False), 0.2)
    assert np.isclose(relative_error(ref, other, include_e=True),
                      1.0 / np.sqrt(27.0))
    assert relative_error(ref, ref) == 0.0


def _bench_config(tmp_path):
    return {
        "mode": "descriptor",
        "weights": [1, 1, 1, 1, 1],
        "max_iters": 60,
        "max_seconds": 30.0,
        "inits": ["standard", "true"],
        "trace_dir": str(tmp_path / "traces"),
        "instances": [
            {"kind": "msd", "name": "msd0", "group": "msd", "p": 3, "m": 2,
             "seed": 0, "eps": 0.05},
            {"kind": "msd", "name": "msd1", "group": "msd", "p": 3, "m": 2,
             "seed": 1, "eps": 0.05},
        ],
    }


def test_run_benchmark_rows_and_aggregates(tmp_path):
    report = run_benchmark(_bench_config(tmp_path))
    assert len(report.rows) == 4
    for row in report.rows:
        assert row["error"] is None
        assert row["n"] == 6 and row["m"] == 2
        assert row["final_objective"] <= row["initial_objective"]
        assert row["relative_error"] > 0
        assert row["iterations"] <= 60
    assert (tmp_path / "traces" / "msd0__standard.csv").exists()
    assert (tmp_path / "traces" / "msd1__true.csv").exists()
    assert len(report.aggregates) == 2
    agg = {a["init"]: a for a in report.aggregates}
    assert agg["standard"]["cells"] == 2
    finals = [r["final_objective"] for r in report.rows if r["init"] == "true"]
    assert np.isclose(agg["true"]["final_objective_mean"], np.mean(finals))

    csv_path = tmp_path / "bench.csv"
    json_path = tmp_path / "bench.json"
    report.write_csv(str(csv_path))
    report.write_json(str(json_path))
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    assert float(rows[0]["final_objective"]) == report.rows[0]["final_objective"]
    data = json.loads(json_path.read_text())
    assert data["aggregates"] == report.aggregates


def test_run_benchmark_deterministic(tmp_path):
    cfg = _bench_config(tmp_path)
    cfg.pop("trace_dir")
    r1 = run_benchmark(cfg)
    r2 = run_benchmark(cfg)
    for a, b in zip(r1.rows, r2.rows):
        a = {k: v for k, v in a.items() if k != "seconds"}
        b = {k: v for k, v in b.items() if k != "seconds"}
        assert a == b


def test_run_benchmark_records_cell_failures(tmp_path):
    cfg = {
        "mode": "descriptor",
        "max_iters": 10,
        "inits": ["standard", "nonsense"],
        "instances": [
            {"kind": "file", "name": "missing", "path": str(tmp_path / "no.json")},
            {"kind": "msd", "name": "ok", "p": 3, "m": 2, "seed": 0},
        ],
    }
    report = run_benchmark(cfg)
    assert len(report.rows) == 4
    by_key = {(r["instance"], r["init"]): r for r in report.rows}
    assert "instance generation failed" in by_key[("missing", "standard")]["error"]
    assert by_key[("ok", "standard")]["error"] is None
    assert "unknown init" in by_key[("ok", "nonsense")]["error"]
    assert all(a["init"] == "standard" for a in report.aggregates)
