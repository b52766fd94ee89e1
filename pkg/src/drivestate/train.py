"""Baum-Welch training of Gaussian-mixture HMMs with deterministic seeded init."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .errors import DimensionError, EmptySequenceError
from .features import FEATURE_INDEX, FEATURE_ORDER, INDICATOR_CHANNELS, ObsInput, as_feature_matrix
from .gmm import DEFAULT_COVARIANCE_FLOOR, GaussianMixture, diagonal_mixture
from .hmm import HiddenMarkovModel


@dataclass(frozen=True)
class TrainConfig:
    max_iters: int = 100
    log_likelihood_tolerance: float = 1e-4
    seed: int = 42
    covariance_floor: float = DEFAULT_COVARIANCE_FLOOR
    # Additive uniform noise applied to 0/1 channels before training; Gaussian
    # emissions on constant indicators degenerate otherwise. Only applies when
    # the data uses the full feature schema.
    indicator_jitter: float = 0.01


@dataclass
class TrainResult:
    model: HiddenMarkovModel
    log_likelihoods: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    warnings: List[str] = field(default_factory=list)


def _kmeans(x: np.ndarray, k: int, rng: np.random.Generator, iters: int = 25) -> np.ndarray:
    """Plain Lloyd's k-means with seeded farthest-point-style init.

    Hand-rolled so initialization stays bit-stable across library versions.
    """
    n = x.shape[0]
    unique = np.unique(x, axis=0)
    if unique.shape[0] <= k:
        centers = np.repeat(unique, int(np.ceil(k / unique.shape[0])), axis=0)[:k]
        return centers.astype(float)
    centers = x[rng.choice(n, size=1)]
    while centers.shape[0] < k:
        d2 = np.min(np.sum((x[:, None, :] - centers[None]) ** 2, axis=2), axis=1)
        probs = d2 / d2.sum() if d2.sum() > 0 else np.full(n, 1.0 / n)
        centers = np.vstack([centers, x[rng.choice(n, p=probs)]])
    for _ in range(iters):
        d2 = np.sum((x[:, None, :] - centers[None]) ** 2, axis=2)
        assign = np.argmin(d2, axis=1)
        new_centers = centers.copy()
        for j in range(k):
            members = x[assign == j]
            if members.shape[0]:
                new_centers[j] = members.mean(axis=0)
        if np.allclose(new_centers, centers):
            break
        centers = new_centers
    return centers


def _initial_model(
    frames: np.ndarray, n_states: int, n_components: int, config: TrainConfig
) -> Tuple[HiddenMarkovModel, List[str]]:
    rng = np.random.default_rng(config.seed)
    warnings: List[str] = []
    d = frames.shape[1]

    pooled_var = frames.var(axis=0)
    if np.all(pooled_var < config.covariance_floor):
        warnings.append("DegenerateDataWarning: all training frames near-identical; "
                        "covariances clamped at the floor")
    pooled_var = np.maximum(pooled_var, config.covariance_floor)

    centers = _kmeans(frames, n_states * n_components, rng)
    order = np.lexsort(centers.T[::-1])  # deterministic ordering of centroids
    centers = centers[order]

    emissions = []
    for i in range(n_states):
        means = centers[i * n_components:(i + 1) * n_components]
        variances = np.tile(pooled_var, (n_components, 1))
        weights = np.full(n_components, 1.0 / n_components)
        emissions.append(
            diagonal_mixture(weights, means, variances, covariance_floor=config.covariance_floor)
        )

    initial = 1.0 / n_states + 0.01 * rng.random(n_states)
    initial /= initial.sum()
    transition = 1.0 / n_states + 0.01 * rng.random((n_states, n_states))
    transition /= transition.sum(axis=1, keepdims=True)
    return HiddenMarkovModel(initial, transition, tuple(emissions)), warnings


def _log_densities(
    model: HiddenMarkovModel, frames: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Per-frame component log densities (T, N, M) and state log densities (T, N)."""
    n = model.num_states
    m = len(model.emissions[0].components)
    T = frames.shape[0]
    log_comp = np.empty((T, n, m))
    with np.errstate(divide="ignore"):
        for i, mixture in enumerate(model.emissions):
            for k, comp in enumerate(mixture.components):
                diff = frames - comp.mean
                var = comp.covariance
                log_comp[:, i, k] = (
                    np.log(comp.weight) if comp.weight > 0 else -np.inf
                ) - 0.5 * (
                    frames.shape[1] * np.log(2 * np.pi)
                    + np.sum(np.log(var))
                    + np.sum(diff * diff / var, axis=1)
                )
    log_state = logsumexp(log_comp, axis=2)
    return log_comp, log_state


def _forward_backward(
    model: HiddenMarkovModel, log_state: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, float]:
    """Scaled forward-backward; returns (gamma, xi_sum, log-likelihood)."""
    T, n = log_state.shape
    shifts = log_state.max(axis=1)
    b = np.exp(log_state - shifts[:, None])
    A = model.transition

    alpha = np.empty((T, n))
    scale = np.empty(T)
    alpha[0] = model.initial * b[0]
    scale[0] = alpha[0].sum()
    alpha[0] /= scale[0]
    for t in range(1, T):
        alpha[t] = (alpha[t - 1] @ A) * b[t]
        scale[t] = alpha[t].sum()
        alpha[t] /= scale[t]
    log_lik = float(np.sum(np.log(scale)) + np.sum(shifts))

    beta = np.empty((T, n))
    beta[T - 1] = 1.0
    xi_sum = np.zeros((n, n))
    for t in range(T - 2, -1, -1):
        tail = b[t + 1] * beta[t + 1]
        beta[t] = (A @ tail) / scale[t + 1]
        xi_t = alpha[t][:, None] * A * tail[None, :] / scale[t + 1]
        xi_sum += xi_t

    gamma = alpha * beta
    gamma /= gamma.sum(axis=1, keepdims=True)
    return gamma, xi_sum, log_lik


def _jitter_indicators(frames: np.ndarray, rng: np.random.Generator, amount: float) -> np.ndarray:
    if frames.shape[1] != len(FEATURE_ORDER) or amount <= 0:
        return frames
    out = frames.copy()
    idx = [FEATURE_INDEX[name] for name in INDICATOR_CHANNELS]
    out[:, idx] += rng.uniform(-amount, amount, size=(frames.shape[0], len(idx)))
    return out


def baum_welch_train(
    sequences: Sequence[ObsInput],
    num_states: int,
    num_components: int,
    config: Optional[TrainConfig] = None,
) -> TrainResult:
    """Fit an N-state, M-component diagonal Gaussian-mixture HMM by EM.

    Initialization is deterministic given the seed: k-means on pooled frames
    for means, pooled variance for covariances, near-uniform stochastic
    matrices perturbed by seeded noise. Total log-likelihood is non-decreasing
    across iterations (up to floating-point slack).
    """
    config = config or TrainConfig()
    if not sequences:
        raise EmptySequenceError("need at least one training sequence")
    mats = [as_feature_matrix(seq) for seq in sequences]
    for mat in mats:
        if mat.shape[0] < 2:
            raise EmptySequenceError("every training sequence needs at least 2 frames")
    dims = {mat.shape[1] for mat in mats}
    if len(dims) != 1:
        raise DimensionError(f"training sequences have mixed dimensions: {sorted(dims)}")

    jitter_rng = np.random.default_rng(np.random.default_rng(config.seed).integers(2**32))
    mats = [_jitter_indicators(mat, jitter_rng, config.indicator_jitter) for mat in mats]
    pooled = np.vstack(mats)

    model, warns = _initial_model(pooled, num_states, num_components, config)
    result = TrainResult(model=model, warnings=warns)
    if config.max_iters == 0:
        return result

    n, m = num_states, num_components
    d = pooled.shape[1]
    floor = config.covariance_floor

    for iteration in range(config.max_iters):
        init_acc = np.zeros(n)
        xi_acc = np.zeros((n, n))
        gamma_from_acc = np.zeros(n)
        comp_w_acc = np.zeros((n, m))
        comp_mu_acc = np.zeros((n, m, d))
        comp_sq_acc = np.zeros((n, m, d))
        gamma_acc = np.zeros(n)
        total_ll = 0.0

        for frames in mats:
            log_comp, log_state = _log_densities(model, frames)
            gamma, xi_sum, ll = _forward_backward(model, log_state)
            total_ll += ll
            init_acc += gamma[0]
            xi_acc += xi_sum
            gamma_from_acc += gamma[:-1].sum(axis=0)
            gamma_acc += gamma.sum(axis=0)
            # posterior over mixture components within each state
            resp = gamma[:, :, None] * np.exp(log_comp - log_state[:, :, None])
            comp_w_acc += resp.sum(axis=0)
            comp_mu_acc += np.einsum("tik,td->ikd", resp, frames)
            comp_sq_acc += np.einsum("tik,td->ikd", resp, frames * frames)

        result.log_likelihoods.append(total_ll)
        result.iterations = iteration + 1
        if iteration > 0:
            improvement = total_ll - result.log_likelihoods[-2]
            if improvement < config.log_likelihood_tolerance:
                result.converged = True
                break

        new_initial = init_acc / init_acc.sum()
        new_transition = model.transition.copy()
        row_mass = xi_acc.sum(axis=1)
        occupied = row_mass > 1e-300
        new_transition[occupied] = xi_acc[occupied] / row_mass[occupied, None]

        emissions = []
        for i in range(n):
            weights = np.empty(m)
            means = np.empty((m, d))
            variances = np.empty((m, d))
            for k in range(m):
                mass = comp_w_acc[i, k]
                old = model.emissions[i].components[k]
                if mass < 1e-12:
                    # empty component: keep previous parameters
                    weights[k] = old.weight
                    means[k] = old.mean
                    variances[k] = old.covariance
                    continue
                weights[k] = mass
                means[k] = comp_mu_acc[i, k] / mass
                variances[k] = comp_sq_acc[i, k] / mass - means[k] ** 2
            if np.any(variances <= floor):
                clipped = np.sum(variances < floor)
                if clipped and not any("clamped" in w for w in result.warnings):
                    result.warnings.append(
                        "DegenerateDataWarning: covariance entries clamped at the floor"
                    )
            variances = np.maximum(variances, floor)
            weights = weights / weights.sum()
            emissions.append(
                diagonal_mixture(weights, means, variances, covariance_floor=floor)
            )
        model = HiddenMarkovModel(new_initial, new_transition, tuple(emissions))
        result.model = model

    return result
