"""Dense spectral primitives: SVD, singular-value shrinkage, norm-ball projections.

Everything here operates on full dense matrices through LAPACK; the problem
sizes this package targets (a few hundred per side) make truncated or
randomized decompositions unnecessary, and dense determinism keeps runs
reproducible.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SvdTriple:
    """Thin SVD with descending singular values and a fixed sign convention."""

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right.T


def svd(X: np.ndarray) -> SvdTriple:
    """Thin SVD with signs fixed so each left vector's first nonzero entry is >= 0.

    numpy already returns descending singular values; the sign flip is applied
    jointly to each (left, right) column pair so the reconstruction is
    unchanged.
    """
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise ValueError("svd requires finite entries")
    try:
        u, s, vt = np.linalg.svd(X, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"SVD failed to converge on {X.shape} matrix: {exc}")
    v = vt.T
    for k in range(s.size):
        col = u[:, k]
        nz = np.nonzero(np.abs(col) > 1e-14 * max(1.0, np.max(np.abs(col))))[0]
        if nz.size and col[nz[0]] < 0:
            u[:, k] = -u[:, k]
            v[:, k] = -v[:, k]
    return SvdTriple(left=u, singular_values=s, right=v)


def nuclear_norm(X: np.ndarray) -> float:
    """Sum of singular values."""
    return float(np.linalg.svd(np.asarray(X, dtype=float), compute_uv=False).sum())


def svt_prox(Z: np.ndarray, tau: float) -> np.ndarray:
    """Soft-threshold the singular values of Z by tau.

    Returns the unique minimizer of 0.5 ||X - Z||_F^2 + tau ||X||_*.
    """
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    t = svd(Z)
    shrunk = np.maximum(t.singular_values - tau, 0.0)
    return (t.left * shrunk) @ t.right.T


def project_nuclear_ball(Z: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto { X : ||X||_* <= radius }.

    If Z is already inside the ball it is returned unchanged.  Otherwise the
    singular values are projected onto the simplex of radius `radius` with the
    sort-and-shift rule (Duchi et al. 2008) and the matrix is rebuilt.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    t = svd(Z)
    s = t.singular_values
    if s.sum() <= radius:
        return np.asarray(Z, dtype=float)
    projected = _project_simplex(s, radius)
    return (t.left * projected) @ t.right.T


def _project_simplex(v: np.ndarray, total: float) -> np.ndarray:
    """Project a nonnegative sorted-or-not vector onto { w >= 0, sum w = total }."""
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u)
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u * k > cssv - total)[0][-1]
    theta = (cssv[rho] - total) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def clip_entries(Z: np.ndarray, gamma: float) -> tuple[np.ndarray, float]:
    """Entrywise clamp to [-gamma, gamma].

    Returns the clamped matrix together with the pre-clip violation
    max(0, ||Z||_inf - gamma) as a diagnostic.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    Z = np.asarray(Z, dtype=float)
    violation = max(0.0, float(np.max(np.abs(Z))) - gamma) if Z.size else 0.0
    return np.clip(Z, -gamma, gamma), violation


def project_factor_rows(U: np.ndarray, bound: float) -> np.ndarray:
    """Rescale every row with Euclidean norm above `bound` back onto the bound."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    U = np.asarray(U, dtype=float)
    norms = np.linalg.norm(U, axis=1)
    scale = np.ones_like(norms)
    over = norms > bound
    scale[over] = bound / norms[over]
    return U * scale[:, None]
