"""Gaussian mixture emission densities with log-space evaluation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .errors import DimensionError
from .features import LogLikelihood

LOG_2PI = float(np.log(2.0 * np.pi))

#: Default lower bound on covariance eigenvalues.
DEFAULT_COVARIANCE_FLOOR = 1e-6


@dataclass(frozen=True)
class GaussianComponent:
    """One weighted Gaussian; covariance may be a diagonal (1-D) or full (2-D) matrix."""

    weight: float
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if cov.ndim not in (1, 2):
            raise ValueError("covariance must be a diagonal vector or a square matrix")
        if cov.ndim == 2 and cov.shape != (mean.size, mean.size):
            raise DimensionError(
                f"covariance shape {cov.shape} does not match mean length {mean.size}"
            )
        if cov.ndim == 1 and cov.size != mean.size:
            raise DimensionError(
                f"diagonal length {cov.size} does not match mean length {mean.size}"
            )
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def is_diagonal(self) -> bool:
        return self.covariance.ndim == 1

    def min_eigenvalue(self) -> float:
        if self.is_diagonal:
            return float(np.min(self.covariance))
        return float(np.min(np.linalg.eigvalsh(self.covariance)))


@dataclass(frozen=True)
class GaussianMixture:
    """A finite Gaussian mixture over feature vectors of a fixed dimension."""

    components: Tuple[GaussianComponent, ...]
    covariance_floor: float = DEFAULT_COVARIANCE_FLOOR

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        object.__setattr__(self, "components", comps)
        dims = {c.mean.size for c in comps}
        if len(dims) != 1:
            raise DimensionError(f"component dimensions differ: {sorted(dims)}")
        weights = np.array([c.weight for c in comps])
        if np.any(weights < 0):
            raise ValueError("component weights must be non-negative")
        if abs(weights.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {weights.sum()}, expected 1 within 1e-9")
        for c in comps:
            if not c.is_diagonal and not np.allclose(c.covariance, c.covariance.T, atol=1e-12):
                raise ValueError("covariance must be symmetric")
            if c.min_eigenvalue() < self.covariance_floor - 1e-12:
                raise ValueError(
                    f"covariance eigenvalue {c.min_eigenvalue()} below floor "
                    f"{self.covariance_floor}"
                )

    @property
    def dimension(self) -> int:
        return self.components[0].mean.size

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])


def diagonal_mixture(
    weights: Sequence[float],
    means: np.ndarray,
    variances: np.ndarray,
    covariance_floor: float = DEFAULT_COVARIANCE_FLOOR,
) -> GaussianMixture:
    """Build a diagonal-covariance mixture from (M,), (M, d), (M, d) arrays."""
    means = np.atleast_2d(np.asarray(means, dtype=float))
    variances = np.atleast_2d(np.asarray(variances, dtype=float))
    comps = tuple(
        GaussianComponent(float(w), means[k], variances[k])
        for k, w in enumerate(weights)
    )
    return GaussianMixture(comps, covariance_floor=covariance_floor)


def _component_log_pdf(component: GaussianComponent, x: np.ndarray) -> np.ndarray:
    """Log density of one Gaussian at each row of the (T, d) matrix x."""
    d = component.mean.size
    diff = x - component.mean
    if component.is_diagonal:
        var = component.covariance
        log_det = float(np.sum(np.log(var)))
        maha = np.sum(diff * diff / var, axis=1)
    else:
        chol = np.linalg.cholesky(component.covariance)
        log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
        solved = np.linalg.solve(chol, diff.T)
        maha = np.sum(solved * solved, axis=0)
    return -0.5 * (d * LOG_2PI + log_det + maha)


def gmm_log_pdf_matrix(mixture: GaussianMixture, x: np.ndarray) -> np.ndarray:
    """Vector of log mixture densities, one per row of the (T, d) matrix x."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != mixture.dimension:
        raise DimensionError(
            f"point dimension {x.shape[1]} != mixture dimension {mixture.dimension}"
        )
    per_comp = np.stack([_component_log_pdf(c, x) for c in mixture.components])
    with np.errstate(divide="ignore"):
        log_w = np.log(mixture.weights)
    return logsumexp(per_comp + log_w[:, None], axis=0)


def gmm_log_pdf(mixture: GaussianMixture, x: Sequence[float]) -> LogLikelihood:
    """Log mixture density at a single point, computed via log-sum-exp."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError("gmm_log_pdf evaluates a single feature vector")
    value = float(gmm_log_pdf_matrix(mixture, x[None, :])[0])
    return LogLikelihood.of(value)
