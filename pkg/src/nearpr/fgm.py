"""Fast projected gradient method with adaptive step length and restart.

The driver alternates gradient steps from an extrapolated point y with a
projection onto the feasible set.  The step length gamma is shrunk by 2/3
while the projected step increases the objective; if it bottoms out at the
step floor, the momentum is restarted (y reset to the current iterate, alpha
reset, gamma restored to the last accepted value) and the candidate is
discarded, which keeps the accepted-objective sequence non-increasing.  Two
consecutive exhausted line searches terminate the run.  gamma is doubled at
the end of every outer iteration.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from typing import Callable, IO, Iterable

import numpy as np

from .errors import NonFiniteObjective, SingularQ
from .model import LtiSystem, PhForm, Weights, _eval_blocks, _target_data, assemble
from .projections import Bounds, _project_blocks

__all__ = ["FgmOptions", "FgmTrace", "fgm_minimize", "initial_step", "solve_nearest"]


@dataclass(frozen=True)
class FgmOptions:
    """Schedule and termination parameters for the fast gradient method.

    tol_rel_decrease stops the run once the relative objective decrease over
    a trailing window of decrease_window iterations falls below the
    threshold; max_iters and max_seconds bound the outer loop.  The step
    floor is min_step_factor times the initial step.
    """

    alpha1: float = 0.5
    step_shrink: float = 2.0 / 3.0
    step_grow: float = 2.0
    min_step_factor: float = 1e-12
    max_iters: int = 100_000
    max_seconds: float = 60.0
    tol_rel_decrease: float = 1e-10
    decrease_window: int = 100

    def __post_init__(self):
        if not 0 < self.alpha1 < 1:
            raise ValueError("alpha1 must lie in (0, 1)")
        if not 0 < self.step_shrink < 1:
            raise ValueError("step_shrink must lie in (0, 1)")
        if self.step_grow <= 1:
            raise ValueError("step_grow must exceed 1")
        if self.min_step_factor <= 0:
            raise ValueError("min_step_factor must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.max_seconds <= 0:
            raise ValueError("max_seconds must be positive")
        if self.tol_rel_decrease < 0:
            raise ValueError("tol_rel_decrease must be nonnegative")
        if self.decrease_window < 1:
            raise ValueError("decrease_window must be at least 1")


@dataclass
class FgmTrace:
    """Per-iteration history of accepted objective values.

    Record k holds the state after outer iteration k (iteration 0 is the
    start point): elapsed wall-clock seconds, the accepted objective, the
    step length that produced it and whether the iteration restarted the
    momentum instead of accepting a step.
    """

    iterations: list[int] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    objectives: list[float] = field(default_factory=list)
    steps: list[float] = field(default_factory=list)
    restarts: list[bool] = field(default_factory=list)

    def append(self, iteration: int, second: float, objective: float,
               step: float, restart: bool) -> None:
        self.iterations.append(int(iteration))
        self.seconds.append(float(second))
        self.objectives.append(float(objective))
        self.steps.append(float(step))
        self.restarts.append(bool(restart))

    def __len__(self) -> int:
        return len(self.iterations)

    @property
    def final_objective(self) -> float:
        return self.objectives[-1]

    def rows(self) -> Iterable[tuple[int, float, float, float, bool]]:
        return zip(self.iterations, self.seconds, self.objectives,
                   self.steps, self.restarts)

    def write_csv(self, target: str | IO[str]) -> None:
        """Write rows (iteration, seconds, objective, step, restart)."""
        own = isinstance(target, str)
        handle = open(target, "w", newline="") if own else target
        try:
            writer = csv.writer(handle)
            writer.writerow(["iteration", "seconds", "objective", "step", "restart"])
            for row in self.rows():
                writer.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3]),
                                 int(row[4])])
        finally:
            if own:
                handle.close()


def initial_step(ph: PhForm) -> float:
    """Initial step 1/L with L = ||Q||_2^2, or max(||Q||_2^2, ||Q^{-1}||_2^2)
    in descriptor mode."""
    sv = np.linalg.svd(ph.Q, compute_uv=False)
    if ph.mode == "descriptor":
        if sv[-1] <= 0 or sv[-1] / sv[0] < 1e-12:
            raise SingularQ("initial step undefined: Q is numerically singular")
        lips = max(sv[0] ** 2, 1.0 / sv[-1] ** 2)
    else:
        lips = sv[0] ** 2
    if lips <= 0:
        raise SingularQ("initial step undefined: Q is zero")
    return 1.0 / lips


def fgm_minimize(f: Callable, grad: Callable, project: Callable, x0,
                 opts: FgmOptions = FgmOptions(),
                 step0: float | None = None) -> tuple[object, FgmTrace]:
    """Minimize f over the set encoded by ``project`` from the feasible point x0.

    x0 may be any object supporting elementwise vector arithmetic (a numpy
    array, or a list of arrays as used for the PH blocks); f maps it to a
    float, grad to an object of the same shape and project back onto the
    feasible set.  step0 is the initial step length (1.0 if omitted).
    Returns the best iterate seen and the iteration trace.
    """
    combine = _make_combiner(x0)
    x = project(x0)
    fx = f(x)
    if not np.isfinite(fx):
        raise NonFiniteObjective(f"objective at the start point is {fx}")
    gamma = 1.0 if step0 is None else float(step0)
    if gamma <= 0:
        raise ValueError("step0 must be positive")
    gamma_min = opts.min_step_factor * gamma
    gamma_last_accepted = gamma
    alpha = opts.alpha1
    y = x
    x_best, f_best = x, fx
    window: list[float] = [fx]
    trace = FgmTrace()
    start = time.perf_counter()
    trace.append(0, 0.0, fx, gamma, False)
    exhausted_prev = False
    for k in range(1, opts.max_iters + 1):
        g = grad(y)
        cand = project(combine(y, -gamma, g))
        fc = f(cand)
        # Non-finite candidate objectives count as ascent so the line search
        # backs off; this also absorbs gradient blow-ups at extrapolated y.
        while not fc <= fx and gamma >= gamma_min:
            gamma *= opts.step_shrink
            cand = project(combine(y, -gamma, g))
            fc = f(cand)
        restart = gamma < gamma_min
        if restart:
            if exhausted_prev:
                trace.append(k, time.perf_counter() - start, fx, gamma, True)
                break
            exhausted_prev = True
            y = x
            alpha = opts.alpha1
            gamma = gamma_last_accepted
        else:
            exhausted_prev = False
            gamma_last_accepted = gamma
            alpha_next = (math.sqrt(alpha ** 4 + 4 * alpha ** 2) - alpha ** 2) / 2
            beta = alpha * (1 - alpha) / (alpha ** 2 + alpha_next)
            y = combine(cand, beta, combine(cand, -1.0, x))
            alpha = alpha_next
            x, fx = cand, fc
            if fc < f_best:
                x_best, f_best = cand, fc
        elapsed = time.perf_counter() - start
        trace.append(k, elapsed, fx, gamma, restart)
        window.append(fx)
        if len(window) > opts.decrease_window + 1:
            window.pop(0)
            f_old = window[0]
            if f_old - fx <= opts.tol_rel_decrease * max(abs(f_old), 1e-300):
                break
        if elapsed >= opts.max_seconds:
            break
        gamma *= opts.step_grow
    return x_best, trace


def _make_combiner(x0) -> Callable:
    """Return combine(a, t, b) -> a + t*b for the iterate container type."""
    if isinstance(x0, np.ndarray):
        return lambda a, t, b: a + t * b
    return lambda a, t, b: [ai + t * bi for ai, bi in zip(a, b)]


def solve_nearest(target: LtiSystem, init: PhForm, w: Weights = Weights(),
                  bounds: Bounds = Bounds(),
                  opts: FgmOptions = FgmOptions()) -> tuple[PhForm, LtiSystem, FgmTrace]:
    """Run the fast gradient method on the PH nearness objective.

    Returns the best PH form found, the system it assembles to and the
    iteration trace.
    """
    descriptor = init.mode == "descriptor"
    data = _target_data(target, init.mode, w)

    def f(blocks):
        return _eval_blocks(blocks, *data, want_grad=False)

    def grad(blocks):
        _, g = _eval_blocks(blocks, *data, want_grad=True)
        if g is None:
            # Poisoned gradient: forces the line search to reject and back off.
            return [np.full_like(b, np.nan) for b in blocks]
        return g

    def project(blocks):
        return _project_blocks(blocks, descriptor, bounds.deltaK, bounds.nuZ)

    x0 = [np.array(b) for b in init.blocks()]
    best, trace = fgm_minimize(f, grad, project, x0, opts,
                               step0=initial_step(init))
    if descriptor:
        j, r, q, fmat, p, s, z = best
    else:
        j, r, q, fmat, p, s = best
        z = None
    ph = PhForm(j, r, q, fmat, p, s, init.N, Z=z, mode=init.mode)
    return ph, assemble(ph), trace
