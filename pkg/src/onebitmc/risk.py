"""Exact misclassification risk under uniform entry sampling.

Because the sampling distribution over entries is uniform, every risk
quantity is an average over all m1 * m2 entries and can be computed in closed
form; Monte Carlo evaluation exists only as a validation oracle.
"""

from dataclasses import dataclass

import numpy as np

from .model import TruthMatrix, logistic_link
from .seeding import make_rng


@dataclass(frozen=True)
class RiskReport:
    """Risk of a classifier, the Bayes risk, their gap, and estimation error."""

    risk: float
    bayes_risk: float
    excess: float
    frob_error_sq_normalized: float


def bayes_classifier(X: np.ndarray) -> np.ndarray:
    """Sign classifier: +1 where the entry is >= 0 (link value >= 1/2), else -1."""
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise ValueError("classifier input must be finite")
    return np.where(X >= 0, 1.0, -1.0)


def _check_eta(eta: np.ndarray, truth: TruthMatrix) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    if eta.shape != truth.entries.shape:
        raise ValueError(f"sign matrix shape {eta.shape} does not match truth "
                         f"{truth.entries.shape}")
    if not np.all(np.abs(eta) == 1.0):
        raise ValueError("sign matrix entries must be exactly -1 or +1")
    return eta


def exact_risk(eta: np.ndarray, truth: TruthMatrix) -> float:
    """Probability that a fresh uniformly-placed label disagrees with eta."""
    eta = _check_eta(eta, truth)
    p = logistic_link(truth.entries)
    per_entry = np.where(eta > 0, 1.0 - p, p)
    return float(per_entry.mean())


def excess_risk(eta: np.ndarray, truth: TruthMatrix) -> float:
    """Risk of eta minus the Bayes risk.

    Computed as a difference of exact risks and cross-checked against the
    equivalent mismatch sum (1/(m1 m2)) * sum over disagreeing entries of
    |2 link - 1|; a disagreement beyond rounding raises.
    """
    eta = _check_eta(eta, truth)
    star = bayes_classifier(truth.entries)
    diff_form = exact_risk(eta, truth) - exact_risk(star, truth)
    p = logistic_link(truth.entries)
    mismatch_form = float(np.where(eta != star, np.abs(2.0 * p - 1.0), 0.0).mean())
    if abs(diff_form - mismatch_form) > 1e-9:
        raise ArithmeticError(
            f"excess risk forms disagree: {diff_form} vs {mismatch_form}")
    return diff_form


def monte_carlo_risk(eta: np.ndarray, truth: TruthMatrix, trials: int,
                     seed: int) -> float:
    """Empirical disagreement frequency over fresh (index, label) draws."""
    eta = _check_eta(eta, truth)
    if trials < 1:
        raise ValueError("trials must be positive")
    m1, m2 = truth.entries.shape
    rng = make_rng(seed)
    flat = rng.integers(0, m1 * m2, size=trials)
    rows, cols = np.divmod(flat, m2)
    p = logistic_link(truth.entries[rows, cols])
    labels = np.where(rng.random(trials) < p, 1.0, -1.0)
    return float(np.mean(labels != eta[rows, cols]))


def estimation_error(Xhat: np.ndarray, truth: TruthMatrix) -> float:
    """Squared Frobenius distance to the truth, normalized by the entry count."""
    Xhat = np.asarray(Xhat, dtype=float)
    if Xhat.shape != truth.entries.shape:
        raise ValueError(f"estimate shape {Xhat.shape} does not match truth "
                         f"{truth.entries.shape}")
    diff = Xhat - truth.entries
    return float(np.mean(diff * diff))


def risk_report(Xhat: np.ndarray, truth: TruthMatrix) -> RiskReport:
    """Evaluate the plug-in sign classifier of an estimate against the truth."""
    eta = bayes_classifier(Xhat)
    r = exact_risk(eta, truth)
    bayes = exact_risk(bayes_classifier(truth.entries), truth)
    return RiskReport(risk=r, bayes_risk=bayes, excess=excess_risk(eta, truth),
                      frob_error_sq_normalized=estimation_error(Xhat, truth))
