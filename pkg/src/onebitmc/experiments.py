"""Replicated sweeps over (shape, rank, gamma, n, estimator) grids with CSV output.

Each grid cell runs a configured number of replicates; every replicate draws
its own truth and samples from seeds mixed out of the base seed and the cell
coordinates, so any cell can be reproduced in isolation and thread scheduling
never changes a byte of the output.  Mean excess risk per cell feeds a
log-log slope fit used to check how fast the excess shrinks with the sample
count.
"""

import csv
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import (GENERATORS, SCHEMES, Shape, generate_truth,
                    sample_observations)
from .risk import risk_report
from .seeding import TAG_SAMPLES, TAG_SOLVER, TAG_TRUTH, float_bits, mix_seed
from .solvers import (ESTIMATORS, SolverConfig, SolverNumericalError,
                      select_lambda, solve_maxnorm_constrained,
                      solve_nuclear_constrained, solve_nuclear_penalized)

ESTIMATOR_IDS = {"nuclear_penalized": 1, "nuclear_constrained": 2,
                 "maxnorm_constrained": 3}
_SOLVER_FNS = {"nuclear_penalized": solve_nuclear_penalized,
               "nuclear_constrained": solve_nuclear_constrained,
               "maxnorm_constrained": solve_maxnorm_constrained}

CSV_COLUMNS = ["row_kind", "estimator", "m1", "m2", "r", "gamma", "margin_tau",
               "generator", "sampling_scheme", "n", "replicate", "seed",
               "lambda_used", "excess", "risk", "bayes_risk",
               "frob_err_sq_norm", "iterations", "converged", "runtime_ms"]

# solver_defaults keys accepted in sweep configurations; gamma, rank_hint and
# seed are derived per cell and cannot be preset
_SOLVER_DEFAULT_KEYS = ("lam", "max_iters", "rel_tol", "step_init",
                        "backtrack_factor", "factor_width", "restarts")


@dataclass(frozen=True)
class SweepConfig:
    shapes: tuple
    ranks: tuple
    gammas: tuple
    n_values: tuple
    estimators: tuple
    generator: str = "block_sign"
    sampling_scheme: str = "iid_uniform"
    replicates: int = 1
    base_seed: int = 0
    solver_defaults: dict = field(default_factory=dict)
    lambda_grid: tuple | None = None
    truth_mode: str = "fresh"

    def __post_init__(self):
        for name in ("shapes", "ranks", "gammas", "n_values", "estimators"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if self.replicates < 1:
            raise ValueError("replicates must be positive")
        if any(n < 1 for n in self.n_values):
            raise ValueError("every n value must be positive")
        for est in self.estimators:
            if est not in ESTIMATORS:
                raise ValueError(f"unknown estimator {est!r}")
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        if self.sampling_scheme not in SCHEMES:
            raise ValueError(f"unknown sampling scheme {self.sampling_scheme!r}")
        if self.truth_mode not in ("fresh", "fixed"):
            raise ValueError("truth_mode must be 'fresh' or 'fixed'")
        for key in self.solver_defaults:
            if key not in _SOLVER_DEFAULT_KEYS:
                raise ValueError(f"unknown solver default {key!r}")


@dataclass(frozen=True)
class CellKey:
    shape: Shape
    r: int
    gamma: float
    n: int
    estimator: str

    @property
    def sort_tuple(self):
        return (self.shape.m1, self.shape.m2, self.r, self.gamma, self.n,
                ESTIMATOR_IDS[self.estimator])


@dataclass(frozen=True)
class ReplicateRecord:
    replicate: int
    seed: int
    margin_tau: float
    lambda_used: float | None
    excess: float
    risk: float
    bayes_risk: float
    frob_error_sq_normalized: float
    iterations: int
    converged: bool
    runtime_ms: int
    failed: bool = False


@dataclass(frozen=True)
class CellResult:
    key: CellKey
    records: tuple
    mean_excess: float
    stderr_excess: float
    mean_frob: float
    stderr_frob: float
    mean_risk: float
    mean_bayes_risk: float
    lambda_used: float | None


def default_lambda_grid(shape: Shape, n: int) -> np.ndarray:
    """Ten geometric points spanning [1e-4, 1] * sqrt(d / n)."""
    return np.geomspace(1e-4, 1.0, 10) * math.sqrt(shape.d / n)


def replicate_seed(base_seed: int, key: CellKey, t: int) -> int:
    """Stable 64-bit seed for one replicate of one cell.

    Mixes (base_seed, m1, m2, r, bit pattern of gamma, n, estimator id,
    replicate) through the splitmix64 chain, in that order.
    """
    return mix_seed(base_seed, key.shape.m1, key.shape.m2, key.r,
                    float_bits(key.gamma), key.n, ESTIMATOR_IDS[key.estimator], t)


def _solver_config(key: CellKey, config: SweepConfig, seed: int,
                   lam: float | None) -> SolverConfig:
    kwargs = dict(config.solver_defaults)
    if lam is not None:
        kwargs["lam"] = lam
    return SolverConfig(gamma=key.gamma, rank_hint=key.r, seed=seed, **kwargs)


def run_cell(key: CellKey, config: SweepConfig) -> CellResult:
    """Run all replicates of one grid cell and aggregate.

    The penalty weight for nuclear_penalized is selected once on replicate 0's
    data and frozen for every replicate of the cell.  A replicate whose solve
    hits a numerical failure is recorded as failed and skipped in the
    aggregates; more than 20% failures abort the cell.
    """
    solver = _SOLVER_FNS[key.estimator]
    lam_frozen: float | None = None
    if key.estimator == "nuclear_penalized":
        grid = (config.lambda_grid if config.lambda_grid is not None
                else default_lambda_grid(key.shape, key.n))
        seed0 = replicate_seed(config.base_seed, key, 0)
        truth0 = generate_truth(key.shape, key.r, key.gamma, config.generator,
                                mix_seed(seed0, TAG_TRUTH))
        samples0 = sample_observations(truth0, key.n, config.sampling_scheme,
                                       mix_seed(seed0, TAG_SAMPLES))
        lam_frozen = select_lambda(
            samples0, _solver_config(key, config, mix_seed(seed0, TAG_SOLVER), None),
            grid)

    fixed_truth = None
    if config.truth_mode == "fixed":
        seed0 = replicate_seed(config.base_seed, key, 0)
        fixed_truth = generate_truth(key.shape, key.r, key.gamma,
                                     config.generator, mix_seed(seed0, TAG_TRUTH))

    records = []
    for t in range(config.replicates):
        seed_t = replicate_seed(config.base_seed, key, t)
        truth = fixed_truth if fixed_truth is not None else generate_truth(
            key.shape, key.r, key.gamma, config.generator,
            mix_seed(seed_t, TAG_TRUTH))
        samples = sample_observations(truth, key.n, config.sampling_scheme,
                                      mix_seed(seed_t, TAG_SAMPLES))
        solver_cfg = _solver_config(key, config, mix_seed(seed_t, TAG_SOLVER),
                                    lam_frozen)
        try:
            fit = solver(samples, solver_cfg)
        except SolverNumericalError:
            records.append(ReplicateRecord(
                replicate=t, seed=seed_t, margin_tau=truth.margin_tau,
                lambda_used=lam_frozen, excess=math.nan, risk=math.nan,
                bayes_risk=math.nan, frob_error_sq_normalized=math.nan,
                iterations=0, converged=False, runtime_ms=0, failed=True))
            continue
        report = risk_report(fit.estimate, truth)
        records.append(ReplicateRecord(
            replicate=t, seed=seed_t, margin_tau=truth.margin_tau,
            lambda_used=lam_frozen, excess=report.excess, risk=report.risk,
            bayes_risk=report.bayes_risk,
            frob_error_sq_normalized=report.frob_error_sq_normalized,
            iterations=fit.iterations, converged=fit.converged,
            runtime_ms=fit.runtime_ms))

    failed = sum(r.failed for r in records)
    if failed > 0.2 * len(records):
        raise RuntimeError(
            f"cell {key}: {failed}/{len(records)} replicates failed")

    good = [r for r in records if not r.failed]
    excesses = np.array([r.excess for r in good])
    frobs = np.array([r.frob_error_sq_normalized for r in good])

    def stderr(values):
        if values.size < 2:
            return 0.0
        return float(values.std(ddof=1) / math.sqrt(values.size))

    return CellResult(
        key=key, records=tuple(records),
        mean_excess=float(excesses.mean()), stderr_excess=stderr(excesses),
        mean_frob=float(frobs.mean()), stderr_frob=stderr(frobs),
        mean_risk=float(np.mean([r.risk for r in good])),
        mean_bayes_risk=float(np.mean([r.bayes_risk for r in good])),
        lambda_used=lam_frozen)


def sweep_cells(config: SweepConfig) -> list:
    """The grid's cells in canonical order."""
    cells = [CellKey(shape, r, gamma, n, est)
             for shape in config.shapes for r in config.ranks
             for gamma in config.gammas for n in config.n_values
             for est in config.estimators]
    return sorted(cells, key=lambda k: k.sort_tuple)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _replicate_row(key: CellKey, config: SweepConfig, rec: ReplicateRecord):
    generator = config.generator + (":fixed" if config.truth_mode == "fixed" else "")
    return ["replicate", key.estimator, str(key.shape.m1), str(key.shape.m2),
            str(key.r), _fmt(key.gamma),
            "" if rec.failed else _fmt(rec.margin_tau),
            generator, config.sampling_scheme, str(key.n), str(rec.replicate),
            str(rec.seed), _fmt(rec.lambda_used),
            "" if rec.failed else _fmt(rec.excess),
            "" if rec.failed else _fmt(rec.risk),
            "" if rec.failed else _fmt(rec.bayes_risk),
            "" if rec.failed else _fmt(rec.frob_error_sq_normalized),
            str(rec.iterations),
            "failed" if rec.failed else _fmt(rec.converged),
            str(rec.runtime_ms)]


def _aggregate_row(result: CellResult, config: SweepConfig):
    key = result.key
    generator = config.generator + (":fixed" if config.truth_mode == "fixed" else "")
    return ["aggregate", key.estimator, str(key.shape.m1), str(key.shape.m2),
            str(key.r), _fmt(key.gamma), "", generator, config.sampling_scheme,
            str(key.n), "", "", _fmt(result.lambda_used),
            _fmt(result.mean_excess), _fmt(result.mean_risk),
            _fmt(result.mean_bayes_risk), _fmt(result.mean_frob), "", "", ""]


def run_sweep(config: SweepConfig, output_path, threads: int = 1) -> list:
    """Run every cell of the grid and write the replicate/aggregate CSV.

    Cells execute on a thread pool of the requested width; rows are written in
    canonical cell order with replicates ascending, so the output bytes do not
    depend on the thread count.  The output location is opened before any
    computation starts.
    """
    cells = sweep_cells(config)
    with open(output_path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(lambda k: run_cell(k, config), cells))
        else:
            results = [run_cell(k, config) for k in cells]
        for result in results:
            for rec in result.records:
                writer.writerow(_replicate_row(result.key, config, rec))
            writer.writerow(_aggregate_row(result, config))
    return results


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through (log n, log mean excess) points."""

    slope: float
    intercept: float
    r_squared: float
    points: tuple


def fit_rate(points) -> RateFit:
    """Fit log(mean excess) against log(n) by ordinary least squares.

    Points with nonpositive excess (possible when every replicate recovered
    the exact sign pattern) are dropped with a warning; at least three must
    survive.
    """
    kept = []
    for n, excess in points:
        if n <= 0:
            raise ValueError("sample counts must be positive")
        if excess <= 0:
            warnings.warn(f"dropping nonpositive excess {excess} at n={n}")
            continue
        kept.append((math.log(n), math.log(excess)))
    if len(kept) < 3:
        raise ValueError(f"need at least 3 positive points, have {len(kept)}")
    logn = np.array([p[0] for p in kept])
    logy = np.array([p[1] for p in kept])
    slope, intercept = np.polyfit(logn, logy, 1)
    fitted = slope * logn + intercept
    ss_res = float(np.sum((logy - fitted) ** 2))
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    if ss_tot == 0.0:
        r_squared = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
    return RateFit(slope=float(slope), intercept=float(intercept),
                   r_squared=r_squared, points=tuple(kept))


def read_sweep_rows(path) -> list:
    """Read a sweep CSV back as a list of column-name dicts."""
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def aggregate_points(rows, estimator: str):
    """Group aggregate rows by (m1, m2, r, gamma) and collect (n, mean excess).

    Returns {group key: sorted list of (n, mean_excess, mean_frob)}.
    """
    groups = {}
    for row in rows:
        if row["row_kind"] != "aggregate" or row["estimator"] != estimator:
            continue
        key = (int(row["m1"]), int(row["m2"]), int(row["r"]), float(row["gamma"]))
        groups.setdefault(key, []).append(
            (int(row["n"]), float(row["excess"]), float(row["frob_err_sq_norm"])))
    return {key: sorted(vals) for key, vals in groups.items()}


def load_sweep_config(path) -> SweepConfig:
    """Parse a JSON sweep configuration whose keys are the SweepConfig fields."""
    with open(path) as handle:
        raw = json.load(handle)
    return sweep_config_from_dict(raw)


def sweep_config_from_dict(raw: dict) -> SweepConfig:
    known = {"shapes", "ranks", "gammas", "n_values", "estimators", "generator",
             "sampling_scheme", "replicates", "base_seed", "solver_defaults",
             "lambda_grid", "truth_mode"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown sweep config keys: {sorted(unknown)}")
    missing = {"shapes", "ranks", "gammas", "n_values", "estimators"} - set(raw)
    if missing:
        raise ValueError(f"missing sweep config keys: {sorted(missing)}")
    shapes = tuple(Shape(int(m1), int(m2)) for m1, m2 in raw["shapes"])
    defaults = dict(raw.get("solver_defaults") or {})
    if "lambda" in defaults:  # accepted alias; 'lambda' is reserved in Python
        defaults["lam"] = defaults.pop("lambda")
    grid = raw.get("lambda_grid")
    return SweepConfig(
        shapes=shapes,
        ranks=tuple(int(r) for r in raw["ranks"]),
        gammas=tuple(float(g) for g in raw["gammas"]),
        n_values=tuple(int(n) for n in raw["n_values"]),
        estimators=tuple(raw["estimators"]),
        generator=raw.get("generator", "block_sign"),
        sampling_scheme=raw.get("sampling_scheme", "iid_uniform"),
        replicates=int(raw.get("replicates", 1)),
        base_seed=int(raw.get("base_seed", 0)),
        solver_defaults=defaults,
        lambda_grid=None if grid is None else tuple(float(v) for v in grid),
        truth_mode=raw.get("truth_mode", "fresh"))
