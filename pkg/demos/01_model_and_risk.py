"""Walk through the observation model and the exact risk computations.

Generates a low-rank sign matrix, draws binary observations through the
logistic link, and compares the closed-form misclassification risk with a
Monte Carlo estimate.
"""

import numpy as np

from onebitmc import (Shape, bayes_classifier, exact_risk, excess_risk,
                      generate_truth, logistic_link, monte_carlo_risk,
                      sample_observations)

# a 60x50 rank-2 matrix with entries +/- 1.2, so every entry carries the same
# signal strength (margin) and the Bayes risk is known in closed form
shape = Shape(60, 50)
truth = generate_truth(shape, r=2, gamma=1.2, generator="block_sign", seed=42)
print("truth: shape", truth.entries.shape, "rank budget", truth.rank_budget,
      "margin", truth.margin_tau)
print("P(label=+1 | entry=+1.2) =", f"{logistic_link(1.2):.4f}")

# draw 2000 observations with replacement, labels flipped by logistic noise
samples = sample_observations(truth, n=2000, scheme="iid_uniform", seed=7)
frac_pos = np.mean(samples.labels == 1)
print(f"drew {samples.n} samples, {frac_pos:.1%} positive labels")

# the Bayes classifier reads signs off the truth; its risk is the noise floor
eta_star = bayes_classifier(truth.entries)
bayes = exact_risk(eta_star, truth)
print(f"Bayes risk (exact)        = {bayes:.6f}")
print(f"  closed form 1 - f(1.2)  = {1 - logistic_link(1.2):.6f}")

# Monte Carlo agrees within the binomial band
mc = monte_carlo_risk(eta_star, truth, trials=200_000, seed=1)
print(f"Bayes risk (Monte Carlo)  = {mc:.6f}")

# a classifier that ignores the data pays for every negative entry
all_plus = np.ones(truth.entries.shape)
print(f"risk of always predicting +1 = {exact_risk(all_plus, truth):.6f}")
print(f"its excess over Bayes        = {excess_risk(all_plus, truth):.6f}")
