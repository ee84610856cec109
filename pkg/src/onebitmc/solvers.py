"""Estimators for the binary observation model.

Three fits of the same negative mean log-likelihood:

* nuclear-norm penalized: proximal gradient on likelihood + lam * nuclear
  norm, restricted to the entrywise box by a clip after each shrinkage step;
* nuclear-norm constrained: projected gradient over the intersection of a
  nuclear ball of radius gamma * sqrt(r m1 m2) and the entrywise box, with
  Dykstra's alternating projections supplying the exact projection;
* max-norm constrained: alternating projected gradient on a two-factor
  parameterization whose row norms certify a max-norm bound of gamma * sqrt(r).

All three use backtracking line search whose acceptance rule requires the
objective not to increase, so objective traces are nonincreasing by
construction.  Every solve is deterministic given (samples, config); the
FitResult.runtime_ms field is a deterministic work counter (likelihood and
gradient evaluations), not wall-clock time, so repeated runs produce
bit-identical results.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import SampleSet, neg_log_likelihood, nll_gradient
from .seeding import TAG_SPLIT, make_rng, mix_seed
from .spectral import (clip_entries, nuclear_norm, project_factor_rows,
                       project_nuclear_ball, svd)

ESTIMATORS = ("nuclear_penalized", "nuclear_constrained", "maxnorm_constrained")

_ACCEPT_SLACK = 1e-12


class SolverNumericalError(RuntimeError):
    """Raised when a solve encounters a non-finite objective; carries the trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = np.asarray(trace if trace is not None else [])


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by all three solvers.

    gamma and rank_hint are the generator's amplitude bound and rank budget,
    taken as known.  lam only affects the penalized solver; factor_width and
    restarts only the max-norm solver.  factor_width defaults to twice the
    rank hint when left unset.
    """

    gamma: float
    rank_hint: int
    lam: float = 0.0
    max_iters: int = 2000
    rel_tol: float = 1e-7
    step_init: float | None = None
    backtrack_factor: float = 0.5
    factor_width: int | None = None
    restarts: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.rank_hint < 1:
            raise ValueError("rank_hint must be positive")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.step_init is not None and self.step_init <= 0:
            raise ValueError("step_init must be positive")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.factor_width is not None and self.factor_width < self.rank_hint:
            raise ValueError("factor_width must be at least rank_hint")
        if self.restarts < 1:
            raise ValueError("restarts must be positive")

    @property
    def effective_factor_width(self) -> int:
        return self.factor_width if self.factor_width is not None else 2 * self.rank_hint

    def effective_step_init(self, n: int) -> float:
        """Initial step size: 4n by default.

        The mean log-likelihood over n samples has per-entry curvature at most
        (sample count at the entry) / (4n), so 4n inverts the smoothness of a
        singly-observed entry; backtracking halves it where entries repeat.
        """
        return self.step_init if self.step_init is not None else 4.0 * n


@dataclass(frozen=True)
class FeasibilityReport:
    inf_norm_violation: float
    nuclear_norm: float
    maxnorm_upper_bound: float


@dataclass(frozen=True)
class FitResult:
    """Estimate plus solve diagnostics.

    objective_trace[0] is the objective at the zero (or random factor)
    starting point; one entry follows per accepted iteration, nonincreasing
    within 1e-10 per step.  runtime_ms counts likelihood/gradient evaluations,
    a deterministic stand-in for elapsed time.
    """

    estimate: np.ndarray
    objective_trace: np.ndarray
    iterations: int
    converged: bool
    feasibility_report: FeasibilityReport
    runtime_ms: int


def _require_samples(samples: SampleSet):
    if samples.n == 0:
        raise ValueError("sample set is empty")


def _maxnorm_bound_via_svd(X: np.ndarray) -> float:
    """Certified max-norm upper bound from the balanced SVD factorization."""
    t = svd(X)
    root = np.sqrt(t.singular_values)
    lu = np.linalg.norm(t.left * root, axis=1).max() if X.size else 0.0
    rv = np.linalg.norm(t.right * root, axis=1).max() if X.size else 0.0
    return float(lu * rv)


def _proximal_descent(samples: SampleSet, config: SolverConfig, candidate):
    """Monotone backtracking descent from the zero matrix.

    candidate(X, grad, step) must return (next iterate, nonsmooth penalty at
    the next iterate).  A trial step is accepted only if the smooth part
    satisfies the quadratic-majorization bound and the full objective does not
    increase; otherwise the step is shrunk.  When no step achieves descent the
    iterate is declared converged.
    """
    shape = samples.shape
    X = np.zeros((shape.m1, shape.m2))
    work = 1
    g_cur = neg_log_likelihood(X, samples)
    f_cur = g_cur  # both penalties vanish at zero
    trace = [f_cur]
    step0 = config.effective_step_init(samples.n)
    step = step0
    step_floor = step0 * 1e-16
    converged = False

    for _ in range(config.max_iters):
        grad = nll_gradient(X, samples)
        work += 1
        step = min(step / config.backtrack_factor, step0)
        accepted = False
        while step >= step_floor:
            xc, penalty = candidate(X, grad, step)
            g_new = neg_log_likelihood(xc, samples)
            work += 1
            if not (np.isfinite(g_new) and np.isfinite(penalty)):
                raise SolverNumericalError("non-finite objective during descent",
                                           trace=trace)
            diff = xc - X
            quad_ok = g_new <= (g_cur + float(np.vdot(grad, diff))
                                + float(np.vdot(diff, diff)) / (2.0 * step)
                                + _ACCEPT_SLACK)
            f_new = g_new + penalty
            if quad_ok and f_new <= f_cur + _ACCEPT_SLACK:
                accepted = True
                break
            step *= config.backtrack_factor
        if not accepted:
            converged = True
            break
        X, g_cur = xc, g_new
        f_prev, f_cur = f_cur, f_new
        trace.append(f_cur)
        if abs(f_cur - f_prev) <= config.rel_tol * max(1.0, abs(f_prev)):
            converged = True
            break

    return X, np.asarray(trace), converged, work


def solve_nuclear_penalized(samples: SampleSet, config: SolverConfig) -> FitResult:
    """Minimize likelihood + lam * ||X||_* over the box ||X||_inf <= gamma.

    Proximal gradient: descend the smooth part, soft-threshold singular values
    by step * lam, clip into the box.  The clip runs last so the returned
    estimate satisfies the box exactly; its nuclear norm is recomputed after
    clipping whenever the clip was active.
    """
    _require_samples(samples)
    lam, gamma = config.lam, config.gamma

    def candidate(X, grad, step):
        t = svd(X - step * grad)
        shrunk = np.maximum(t.singular_values - step * lam, 0.0)
        xc, violation = clip_entries((t.left * shrunk) @ t.right.T, gamma)
        if lam == 0.0:
            return xc, 0.0
        nuc = float(shrunk.sum()) if violation == 0.0 else nuclear_norm(xc)
        return xc, lam * nuc

    X, trace, converged, work = _proximal_descent(samples, config, candidate)
    report = FeasibilityReport(
        inf_norm_violation=max(0.0, float(np.max(np.abs(X))) - gamma),
        nuclear_norm=nuclear_norm(X),
        maxnorm_upper_bound=_maxnorm_bound_via_svd(X),
    )
    return FitResult(estimate=X, objective_trace=trace,
                     iterations=len(trace) - 1, converged=converged,
                     feasibility_report=report, runtime_ms=work)


def _project_ball_box(Z: np.ndarray, radius: float, gamma: float,
                      max_sweeps: int = 100) -> np.ndarray:
    """Euclidean projection onto {||X||_* <= radius, ||X||_inf <= gamma}.

    Dykstra's alternating projections with correction terms; a single
    composed sweep is not the exact projection and measurably stalls the
    solver when both constraints bind.  The box projection runs last, so the
    result satisfies the entrywise bound exactly and the nuclear bound to the
    sweep tolerance.
    """
    X = np.asarray(Z, dtype=float)
    p = np.zeros_like(X)
    q = np.zeros_like(X)
    scale = max(1.0, float(np.max(np.abs(X))) if X.size else 1.0)
    for _ in range(max_sweeps):
        Y = project_nuclear_ball(X + p, radius)
        p = X + p - Y
        X_new, _ = clip_entries(Y + q, gamma)
        q = Y + q - X_new
        change = float(np.max(np.abs(X_new - X)))
        X = X_new
        if change <= 1e-13 * scale:
            break
    return X


def solve_nuclear_constrained(samples: SampleSet, config: SolverConfig) -> FitResult:
    """Minimize the likelihood over the nuclear ball intersected with the box.

    Projected gradient; each candidate is projected onto the intersection of
    the nuclear ball of radius gamma * sqrt(r m1 m2) and the entrywise box by
    Dykstra's alternating projections.  Any residual infeasibility of the
    final iterate is reported, not hidden.
    """
    _require_samples(samples)
    shape = samples.shape
    radius = config.gamma * math.sqrt(config.rank_hint * shape.m1 * shape.m2)
    gamma = config.gamma

    def candidate(X, grad, step):
        return _project_ball_box(X - step * grad, radius, gamma), 0.0

    X, trace, converged, work = _proximal_descent(samples, config, candidate)
    if nuclear_norm(X) > radius * (1 + 1e-9):
        X = _project_ball_box(X, radius, gamma)
    report = FeasibilityReport(
        inf_norm_violation=max(0.0, float(np.max(np.abs(X))) - gamma),
        nuclear_norm=nuclear_norm(X),
        maxnorm_upper_bound=_maxnorm_bound_via_svd(X),
    )
    return FitResult(estimate=X, objective_trace=trace,
                     iterations=len(trace) - 1, converged=converged,
                     feasibility_report=report, runtime_ms=work)


@dataclass
class _FactorRun:
    U: np.ndarray
    V: np.ndarray
    objective: float
    trace: np.ndarray
    converged: bool
    work: int


def _half_step(state, factor_grad, project, rebuild, samples, config, step, work):
    """One backtracking projected-gradient step on a single factor."""
    factor, x_cur, g_cur = state
    step0 = config.effective_step_init(samples.n)
    step = min(step / config.backtrack_factor, step0)
    step_floor = step0 * 1e-16
    while step >= step_floor:
        trial = project(factor - step * factor_grad)
        x_try = rebuild(trial)
        g_try = neg_log_likelihood(x_try, samples)
        work += 1
        if not np.isfinite(g_try):
            raise SolverNumericalError("non-finite objective in factor step")
        diff = trial - factor
        quad_ok = g_try <= (g_cur + float(np.vdot(factor_grad, diff))
                            + float(np.vdot(diff, diff)) / (2.0 * step)
                            + _ACCEPT_SLACK)
        if quad_ok and g_try <= g_cur + _ACCEPT_SLACK:
            return (trial, x_try, g_try), step, True, work
        step *= config.backtrack_factor
    return state, step, False, work


def _fit_factors(samples: SampleSet, config: SolverConfig, width: int,
                 row_bound: float, seed: int) -> _FactorRun:
    shape = samples.shape
    attempt = 0
    while True:
        rng = make_rng(mix_seed(seed, attempt))
        U = rng.standard_normal((shape.m1, width))
        V = rng.standard_normal((shape.m2, width))
        peak = float(np.max(np.abs(U @ V.T)))
        if peak > 0:
            break
        attempt += 1
    # start the product at half the amplitude bound, capped at unit scale so
    # a loose bound does not strand the iterates far from the optimum
    scale = math.sqrt(min(config.gamma, 2.0) / 2.0 / peak)
    U = project_factor_rows(U * scale, row_bound)
    V = project_factor_rows(V * scale, row_bound)

    X = U @ V.T
    work = 1
    g_cur = neg_log_likelihood(X, samples)
    trace = [g_cur]
    step_u = step_v = config.effective_step_init(samples.n)
    converged = False

    for _ in range(config.max_iters):
        grad_mat = nll_gradient(X, samples)
        work += 1
        state, step_u, moved_u, work = _half_step(
            (U, X, g_cur), grad_mat @ V,
            lambda F: project_factor_rows(F, row_bound),
            lambda F: F @ V.T, samples, config, step_u, work)
        U, X, g_cur = state

        grad_mat = nll_gradient(X, samples)
        work += 1
        state, step_v, moved_v, work = _half_step(
            (V, X, g_cur), grad_mat.T @ U,
            lambda F: project_factor_rows(F, row_bound),
            lambda F: U @ F.T, samples, config, step_v, work)
        V, X, g_cur = state

        g_prev = trace[-1]
        trace.append(g_cur)
        if not (moved_u or moved_v):
            converged = True
            break
        if abs(g_cur - g_prev) <= config.rel_tol * max(1.0, abs(g_prev)):
            converged = True
            break

    return _FactorRun(U=U, V=V, objective=g_cur, trace=np.asarray(trace),
                      converged=converged, work=work)


def solve_maxnorm_constrained(samples: SampleSet, config: SolverConfig) -> FitResult:
    """Minimize the likelihood under a certified max-norm bound of gamma * sqrt(r).

    The variable is factored as U V^T with factor_width columns; after every
    gradient step each factor's rows are projected onto the Euclidean ball of
    radius sqrt(gamma * sqrt(r)), so the row-norm product certifies the
    max-norm bound throughout.  Several random restarts are run and the best
    final objective kept.  The returned estimate is the factor product clipped
    into the entrywise box, with the pre-clip violation reported.
    """
    _require_samples(samples)
    width = config.effective_factor_width
    row_bound = math.sqrt(config.gamma * math.sqrt(config.rank_hint))
    best: _FactorRun | None = None
    total_work = 0
    for restart in range(config.restarts):
        try:
            run = _fit_factors(samples, config, width, row_bound,
                               mix_seed(config.seed, restart))
        except SolverNumericalError:
            continue
        total_work += run.work
        if best is None or run.objective < best.objective:
            best = run
    if best is None:
        raise SolverNumericalError("all restarts failed")

    product = best.U @ best.V.T
    estimate, violation = clip_entries(product, config.gamma)
    bound = float(np.linalg.norm(best.U, axis=1).max()
                  * np.linalg.norm(best.V, axis=1).max())
    report = FeasibilityReport(inf_norm_violation=violation,
                               nuclear_norm=nuclear_norm(estimate),
                               maxnorm_upper_bound=bound)
    return FitResult(estimate=estimate, objective_trace=best.trace,
                     iterations=len(best.trace) - 1, converged=best.converged,
                     feasibility_report=report, runtime_ms=total_work)


def select_lambda(samples: SampleSet, config: SolverConfig, grid) -> float:
    """Pick the penalty weight by a seeded 80/20 holdout.

    The sample order is permuted with a stream derived from config.seed; the
    first 80% are fit for every grid value and the one with the smallest
    held-out likelihood wins, ties going to the larger value.  The selection
    does not depend on the order of the grid.
    """
    grid = [float(v) for v in grid]
    if not grid:
        raise ValueError("lambda grid is empty")
    if any(v <= 0 for v in grid):
        raise ValueError("lambda grid values must be positive")
    if samples.n < 10:
        raise ValueError("need at least 10 samples to split")

    perm = make_rng(mix_seed(config.seed, TAG_SPLIT)).permutation(samples.n)
    n_fit = (4 * samples.n) // 5
    fit_idx, hold_idx = perm[:n_fit], perm[n_fit:]
    fit_set = SampleSet(indices=samples.indices[fit_idx],
                        labels=samples.labels[fit_idx],
                        scheme=samples.scheme, seed=samples.seed,
                        shape=samples.shape)
    hold_set = SampleSet(indices=samples.indices[hold_idx],
                         labels=samples.labels[hold_idx],
                         scheme=samples.scheme, seed=samples.seed,
                         shape=samples.shape)

    best_lam = None
    best_loss = math.inf
    for lam in sorted(grid):
        fit = solve_nuclear_penalized(fit_set, replace(config, lam=lam))
        loss = neg_log_likelihood(fit.estimate, hold_set)
        if loss <= best_loss:
            best_lam, best_loss = lam, loss
    return best_lam
