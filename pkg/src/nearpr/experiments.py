"""Test-system generators, structured perturbations and benchmark runs.

The mass-spring-damper generator produces descriptor PH systems

    E = [V 0; 0 I],  J = [0 I; -I 0],  R = [W 0; 0 0],  Q = [I 0; 0 H],

with V, W, H symmetric positive definite, B uniform on [0, 1], D = L L^T
rank-deficient and C = B^T Q.  Perturbations either subtract eps from the
trailing diagonal damping block of R or push R and S out of the PSD cone by
a singular-value shift calibrated (by bisection) to a requested relative
distance.  The benchmark driver runs the solver over an instance-by-
initialization grid and reports per-cell errors.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass

import numpy as np

from .errors import BisectionFailed, NearprError
from .fgm import FgmOptions, solve_nearest
from .init import (init_lmi_formula, init_lmi_solve, init_random,
                   init_standard, init_true, solve_delta_lmi)
from .model import LtiSystem, PhForm, Weights, _skew, _sym, assemble
from .projections import Bounds, project_psd

__all__ = [
    "BenchReport",
    "MsdParams",
    "msd_generate",
    "msd_perturb",
    "perturb_to_distance",
    "random_pr_system",
    "relative_error",
    "run_benchmark",
    "sv_perturb",
]


@dataclass(frozen=True)
class MsdParams:
    """Mass-spring-damper generator parameters: n = 2p states, m inputs
    (m even so that D = L L^T with L of width m/2 is rank deficient)."""

    p: int
    m: int
    seed: int
    spd_shift: float = 0.1

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be at least 1")
        if self.m < 1 or self.m % 2 != 0:
            raise ValueError("m must be a positive even integer")
        if self.spd_shift <= 0:
            raise ValueError("spd_shift must be positive")


def _spd(rng: np.random.Generator, size: int, shift: float) -> np.ndarray:
    g = rng.standard_normal((size, size))
    return g @ g.T + shift * np.eye(size)


def msd_generate(params: MsdParams) -> tuple[PhForm, LtiSystem]:
    """Generate a mass-spring-damper PH form and its assembled system."""
    rng = np.random.default_rng(params.seed)
    p, m = params.p, params.m
    v = _spd(rng, p, params.spd_shift)
    w = _spd(rng, p, params.spd_shift)
    h = _spd(rng, p, params.spd_shift)
    zero = np.zeros((p, p))
    eye = np.eye(p)
    j = np.block([[zero, eye], [-eye, zero]])
    r = np.block([[w, zero], [zero, zero]])
    q = np.block([[eye, zero], [zero, h]])
    b = rng.uniform(0.0, 1.0, size=(2 * p, m))
    ell = rng.standard_normal((m, m // 2))
    d = ell @ ell.T
    z = np.block([[v, zero], [zero, h]])
    ph = PhForm(J=j, R=r, Q=q, F=b, P=np.zeros((2 * p, m)), S=d,
                N=np.zeros((m, m)), Z=z, mode="descriptor")
    return ph, assemble(ph)


def msd_perturb(ph: PhForm, sys: LtiSystem, eps: float) -> LtiSystem:
    """Subtract eps I from the trailing p x p damping block of R.

    Only A = (J - R)Q changes; E, B, C, D are taken from the unperturbed
    system.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    n = ph.n
    p = n // 2
    delta_r = np.zeros((n, n))
    delta_r[p:, p:] = -eps * np.eye(p)
    a = (ph.J - (ph.R + delta_r)) @ ph.Q
    return LtiSystem(sys.E, a, sys.B, sys.C, sys.D, standard=sys.standard)


def random_pr_system(n: int, m: int, seed: int) -> tuple[PhForm, LtiSystem]:
    """Random descriptor PH system: capped-conditioning Q = G G^T, projected
    Gaussian J, K and Z, Gaussian F, N = 0."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, n))
    u, s, vt = np.linalg.svd(g @ g.T)
    q = (u * np.maximum(s, s[0] / 1e4)) @ vt
    j = _skew(rng.standard_normal((n, n)))
    k = project_psd(rng.standard_normal((n + m, n + m)))
    z = project_psd(rng.standard_normal((n, n)))
    f = rng.standard_normal((n, m))
    ph = PhForm(J=j, R=k[:n, :n], Q=q, F=f, P=k[:n, n:], S=k[n:, n:],
                N=np.zeros((m, m)), Z=z, mode="descriptor")
    return ph, assemble(ph)


def sv_perturb(x: np.ndarray, delta: float) -> np.ndarray:
    """Zero the smallest singular value, then shift all by -delta * sigma_max.

    For delta > 0 the shifted spectrum goes negative, so applying this to a
    PSD matrix yields an indefinite symmetric part.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    u, s, vt = np.linalg.svd(np.asarray(x, dtype=float))
    s2 = s.copy()
    s2[-1] = 0.0
    s2 = s2 - delta * s[0]
    return (u * s2) @ vt


def _rs_perturbed_system(ph: PhForm, sys: LtiSystem, delta: float) -> LtiSystem:
    r = _sym(sv_perturb(ph.R, delta))
    s = _sym(sv_perturb(ph.S, delta))
    a = (ph.J - r) @ ph.Q
    d = s + ph.N
    return LtiSystem(sys.E, a, sys.B, sys.C, d, standard=sys.standard)


def relative_error(reference: LtiSystem, other: LtiSystem,
                   include_e: bool = True) -> float:
    """Joint relative Frobenius distance over the stacked quintuple."""
    pairs = list(zip(reference.matrices(), other.matrices()))
    if not include_e:
        pairs = pairs[1:]
    num = np.sqrt(sum(np.linalg.norm(a - b) ** 2 for a, b in pairs))
    den = np.sqrt(sum(np.linalg.norm(a) ** 2 for a, _ in pairs))
    return float(num / den) if den > 0 else float(num)


def perturb_to_distance(ph_true: PhForm, sys_true: LtiSystem,
                        eps_rel: float, tol: float = 1e-4) -> tuple[LtiSystem, float]:
    """Perturb R and S (singular-value shift) until the perturbed system sits
    at relative distance eps_rel (+- tol) from the original; returns the
    perturbed system and the shift used.

    The distance is the stacked Frobenius norm of the difference over the
    perturbed quintuple's norm, so the perturbed system plays the role of
    the reference (it is the one later handed to the solver as target)."""
    if not 0 < eps_rel < 1:
        raise ValueError("eps_rel must lie in (0, 1)")

    def dist(delta: float) -> float:
        return relative_error(_rs_perturbed_system(ph_true, sys_true, delta), sys_true)

    hi = 1.0
    doublings = 0
    while dist(hi) < eps_rel:
        hi *= 2.0
        doublings += 1
        if doublings > 60:
            raise BisectionFailed("no upper bracket for the requested distance")
    lo = 0.0
    if dist(lo) > eps_rel + tol:
        raise BisectionFailed("distance at delta = 0 already exceeds the target")
    for _ in range(200):
        mid = (lo + hi) / 2
        d = dist(mid)
        if abs(d - eps_rel) <= tol:
            return _rs_perturbed_system(ph_true, sys_true, mid), mid
        if d < eps_rel:
            lo = mid
        else:
            hi = mid
    raise BisectionFailed("bisection did not reach the requested tolerance")


@dataclass
class BenchReport:
    """Per-cell benchmark rows plus (group, init) aggregates."""

    rows: list[dict]
    aggregates: list[dict]

    _ROW_FIELDS = ("instance", "group", "init", "n", "m", "mode", "delta_star",
                   "initial_objective", "final_objective", "relative_error",
                   "rel_err_A", "rel_err_B", "rel_err_C", "rel_err_D", "rel_err_E",
                   "iterations", "seconds", "error")

    def to_json(self) -> str:
        return json.dumps({"rows": self.rows, "aggregates": self.aggregates}, indent=2)

    def write_json(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    def write_csv(self, path: str) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=self._ROW_FIELDS)
            writer.writeheader()
            for row in self.rows:
                writer.writerow({k: row.get(k) for k in self._ROW_FIELDS})


_KNOWN_INITS = ("standard", "lmi-formula", "lmi-solve", "random", "true")


def _block_rel_errors(target: LtiSystem, solved: LtiSystem) -> dict:
    out = {}
    for key, a, b in zip(("E", "A", "B", "C", "D"),
                         target.matrices(), solved.matrices()):
        denom = np.linalg.norm(a)
        num = np.linalg.norm(a - b)
        out[f"rel_err_{key}"] = float(100.0 * num / denom) if denom > 0 else float(100.0 * num)
    return out


def _build_instance(spec: dict) -> tuple[LtiSystem, PhForm | None]:
    kind = spec.get("kind", "file")
    if kind == "file":
        from ._io import load_system

        sys, ph = load_system(spec["path"])
        return sys, ph
    if kind == "msd":
        params = MsdParams(p=int(spec["p"]), m=int(spec["m"]),
                           seed=int(spec.get("seed", 0)),
                           spd_shift=float(spec.get("spd_shift", 0.1)))
        ph, sys = msd_generate(params)
        if "eps" in spec and spec["eps"]:
            return msd_perturb(ph, sys, float(spec["eps"])), ph
        return sys, ph
    if kind == "random":
        ph, sys = random_pr_system(int(spec["n"]), int(spec["m"]),
                                   int(spec.get("seed", 0)))
        if "eps_rel" in spec and spec["eps_rel"]:
            perturbed, _ = perturb_to_distance(ph, sys, float(spec["eps_rel"]))
            return perturbed, ph
        return sys, ph
    raise ValueError(f"unknown instance kind {kind!r}")


def _build_init(name: str, target: LtiSystem, ph_true: PhForm | None,
                mode: str, lmi_cache: dict, seed: int):
    if name == "standard":
        return init_standard(target, mode=mode), None
    if name in ("lmi-formula", "lmi-solve"):
        if "lmi" not in lmi_cache:
            lmi_cache["lmi"] = solve_delta_lmi(target)
        lmi = lmi_cache["lmi"]
        if name == "lmi-formula":
            return init_lmi_formula(target, lmi, mode=mode), lmi.delta_star
        return init_lmi_solve(target, lmi, mode=mode), lmi.delta_star
    if name == "random":
        return init_random(target, seed=seed, mode=mode), None
    if name == "true":
        if ph_true is None:
            raise NearprError("true initialization requires a generated instance")
        return init_true(ph_true, target.D), None
    raise ValueError(f"unknown init {name!r} (expected one of {_KNOWN_INITS})")


def run_benchmark(config: dict) -> BenchReport:
    """Run solve_nearest over every (instance, init) cell of the config.

    Config keys: ``instances`` (list of specs with kind file/msd/random),
    ``inits`` (subset of standard, lmi-formula, lmi-solve, random, true),
    ``mode``, ``weights``, ``deltaK``, ``nuZ``, ``alpha1``, ``max_iters``,
    ``max_seconds``, ``tol``, ``random_init_seed``, ``trace_dir``.  Cell
    failures are recorded in the row's ``error`` field and the run continues.
    """
    mode = config.get("mode", "descriptor")
    w = Weights.from_sequence(config.get("weights", [1, 1, 1, 1, 1]))
    bounds = Bounds(deltaK=float(config.get("deltaK", 0.0)),
                    nuZ=float(config.get("nuZ", 0.0)))
    opts = FgmOptions(
        alpha1=float(config.get("alpha1", 0.5)),
        max_iters=int(config.get("max_iters", 100_000)),
        max_seconds=float(config.get("max_seconds", 60.0)),
        tol_rel_decrease=float(config.get("tol", 1e-10)),
    )
    inits = config.get("inits", ["standard"])
    trace_dir = config.get("trace_dir")
    if trace_dir:
        os.makedirs(trace_dir, exist_ok=True)
    rows: list[dict] = []
    for spec in config["instances"]:
        name = spec.get("name", spec.get("kind", "instance"))
        group = spec.get("group", name)
        try:
            target, ph_true = _build_instance(spec)
        except Exception as exc:
            for init_name in inits:
                rows.append({"instance": name, "group": group, "init": init_name,
                             "error": f"instance generation failed: {exc}"})
            continue
        lmi_cache: dict = {}
        for init_name in inits:
            row = {"instance": name, "group": group, "init": init_name,
                   "n": target.n, "m": target.m, "mode": mode, "error": None}
            t0 = time.perf_counter()
            try:
                ph0, delta_star = _build_init(
                    init_name, target, ph_true, mode, lmi_cache,
                    seed=int(spec.get("seed", config.get("random_init_seed", 0))))
                ph, solved, trace = solve_nearest(target, ph0, w=w,
                                                  bounds=bounds, opts=opts)
                row.update(
                    delta_star=delta_star,
                    initial_objective=trace.objectives[0],
                    final_objective=trace.final_objective,
                    relative_error=relative_error(target, solved,
                                                  include_e=(mode == "descriptor")),
                    iterations=trace.iterations[-1],
                    seconds=round(time.perf_counter() - t0, 3),
                    **_block_rel_errors(target, solved),
                )
                if trace_dir:
                    trace.write_csv(f"{trace_dir}/{name}__{init_name}.csv")
            except Exception as exc:
                row["error"] = str(exc)
            rows.append(row)
    return BenchReport(rows=rows, aggregates=_aggregate(rows))


def _aggregate(rows: list[dict]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        if row.get("error") is None and row.get("final_objective") is not None:
            groups.setdefault((row["group"], row["init"]), []).append(row)
    out = []
    for (group, init_name), members in sorted(groups.items()):
        finals = np.array([r["final_objective"] for r in members])
        rels = np.array([r["relative_error"] for r in members])
        out.append({
            "group": group,
            "init": init_name,
            "cells": len(members),
            "final_objective_mean": float(finals.mean()),
            "final_objective_std": float(finals.std()),
            "relative_error_mean": float(rels.mean()),
            "relative_error_std": float(rels.std()),
        })
    return out
