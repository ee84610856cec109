"""Fit the three estimators on one instance and compare their risk reports.

All three minimize the same negative mean log-likelihood; they differ in how
the low-rank structure is encouraged (nuclear-norm penalty, nuclear-ball
constraint, or a factored max-norm bound).
"""

import numpy as np

from onebitmc import (Shape, SolverConfig, generate_truth, risk_report,
                      sample_observations, solve_maxnorm_constrained,
                      solve_nuclear_constrained, solve_nuclear_penalized)

shape = Shape(80, 80)
truth = generate_truth(shape, r=2, gamma=1.5, generator="block_sign", seed=3)
samples = sample_observations(truth, n=3200, scheme="iid_uniform", seed=11)
print(f"observing {samples.n} of {shape.n_entries} entries "
      f"({samples.n / shape.n_entries:.0%} with replacement)\n")

config = SolverConfig(gamma=1.5, rank_hint=2, seed=5)

fits = {
    "nuclear penalized (lam=0.002)": solve_nuclear_penalized(
        samples, SolverConfig(gamma=1.5, rank_hint=2, lam=0.002)),
    "nuclear constrained": solve_nuclear_constrained(samples, config),
    "max-norm constrained": solve_maxnorm_constrained(samples, config),
}

for name, fit in fits.items():
    report = risk_report(fit.estimate, truth)
    feas = fit.feasibility_report
    print(name)
    print(f"  iterations {fit.iterations:4d}  converged {fit.converged}  "
          f"final objective {fit.objective_trace[-1]:.6f}")
    print(f"  nuclear norm {feas.nuclear_norm:9.2f}   "
          f"max-norm bound {feas.maxnorm_upper_bound:.3f}")
    print(f"  excess risk {report.excess:.5f}   "
          f"frob error (normalized) {report.frob_error_sq_normalized:.4f}")
    print()

# objective traces are nonincreasing by construction; show the first solver's
trace = fits["nuclear constrained"].objective_trace
drops = np.diff(trace)
print(f"objective trace: {trace[0]:.4f} -> {trace[-1]:.4f}; "
      f"largest per-step increase {drops.max():.2e} (never above 1e-10)")
