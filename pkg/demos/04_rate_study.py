"""Miniature rate study: how fast does the excess risk fall with n?

Runs a small replicated sweep for two estimators, fits log-log slopes to the
mean excess, and writes the sweep CSV plus an SVG plot next to this script.
A slope near -1 matches a 1/n decay; the constrained estimators are expected
to decay more slowly.
"""

from pathlib import Path

from onebitmc import (Shape, SweepConfig, aggregate_points, fit_rate,
                      read_sweep_rows, run_sweep)
from onebitmc.svgplot import loglog_plot

out_dir = Path(__file__).resolve().parent
csv_path = out_dir / "rate_study_runs.csv"

config = SweepConfig(
    shapes=(Shape(40, 40),),
    ranks=(1,),
    gammas=(1.5,),
    n_values=(200, 400, 800, 1600),
    estimators=("nuclear_penalized", "maxnorm_constrained"),
    generator="block_sign",
    sampling_scheme="iid_uniform",
    replicates=8,
    base_seed=123,
)

print("running", len(config.n_values) * len(config.estimators), "cells x",
      config.replicates, "replicates ...")
run_sweep(config, csv_path, threads=4)
rows = read_sweep_rows(csv_path)

series = []
for estimator in config.estimators:
    groups = aggregate_points(rows, estimator)
    (key, values), = groups.items()
    points = [(n, excess) for n, excess, _ in values]
    fit = fit_rate(points)
    print(f"{estimator:22s} slope {fit.slope:+.3f}  R^2 {fit.r_squared:.3f}")
    series.append({"label": estimator,
                   "points": [(n, e) for n, e in points if e > 0],
                   "slope": fit.slope, "intercept": fit.intercept})

svg_path = out_dir / "rate_study.svg"
svg_path.write_text(loglog_plot(series, "mean excess risk vs n (40x40, r=1)"))
print("wrote", csv_path.name, "and", svg_path.name)
