"""Gaussian-mixture HMM primitives: scoring, decoding, and stochastic-matrix analysis."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import DimensionError, StochasticityError
from .features import LogLikelihood, ObsInput, as_feature_matrix
from .gmm import GaussianMixture, gmm_log_pdf_matrix

ROW_SUM_TOL = 1e-9


def _check_stochastic_vector(v: np.ndarray, what: str) -> None:
    if np.any(v < -1e-15) or np.any(v > 1.0 + 1e-12):
        raise StochasticityError(f"{what} entries must lie in [0, 1]")
    if abs(float(v.sum()) - 1.0) > ROW_SUM_TOL:
        raise StochasticityError(f"{what} sums to {v.sum()}, expected 1 within {ROW_SUM_TOL}")


@dataclass(frozen=True)
class HiddenMarkovModel:
    """An N-state HMM with Gaussian-mixture emissions per hidden state."""

    initial: np.ndarray
    transition: np.ndarray
    emissions: Tuple[GaussianMixture, ...]

    def __post_init__(self) -> None:
        initial = np.asarray(self.initial, dtype=float)
        transition = np.asarray(self.transition, dtype=float)
        emissions = tuple(self.emissions)
        n = initial.size
        if n < 1:
            raise ValueError("model needs at least one state")
        if transition.shape != (n, n):
            raise DimensionError(f"transition shape {transition.shape}, expected ({n}, {n})")
        if len(emissions) != n:
            raise DimensionError(f"{len(emissions)} emission mixtures for {n} states")
        _check_stochastic_vector(initial, "initial distribution")
        for i in range(n):
            _check_stochastic_vector(transition[i], f"transition row {i}")
        dims = {g.dimension for g in emissions}
        if len(dims) != 1:
            raise DimensionError(f"emission dimensions differ: {sorted(dims)}")
        initial.setflags(write=False)
        transition.setflags(write=False)
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "transition", transition)
        object.__setattr__(self, "emissions", emissions)

    @property
    def num_states(self) -> int:
        return self.initial.size

    @property
    def dimension(self) -> int:
        return self.emissions[0].dimension


def emission_log_matrix(hmm: HiddenMarkovModel, frames: np.ndarray) -> np.ndarray:
    """(T, N) matrix of per-state emission log densities."""
    frames = np.atleast_2d(np.asarray(frames, dtype=float))
    if frames.shape[1] != hmm.dimension:
        raise DimensionError(
            f"observation dimension {frames.shape[1]} != model dimension {hmm.dimension}"
        )
    return np.column_stack([gmm_log_pdf_matrix(g, frames) for g in hmm.emissions])


def forward_from_log_obs(
    initial: np.ndarray, transition: np.ndarray, log_obs: np.ndarray
) -> float:
    """Scaled forward recursion over a precomputed (T, N) log-emission matrix.

    Returns log P(O | model); -inf when every path has zero probability.
    Each step shifts emissions by their per-frame maximum before exponentiating,
    so finite inputs never overflow regardless of sequence length.
    """
    T = log_obs.shape[0]
    shifts = log_obs.max(axis=1)
    if not np.all(np.isfinite(shifts)):
        return -np.inf
    b = np.exp(log_obs - shifts[:, None])
    log_p = 0.0
    alpha = initial * b[0]
    for t in range(T):
        if t > 0:
            alpha = (alpha @ transition) * b[t]
        total = float(alpha.sum())
        if total <= 0.0:
            return -np.inf
        alpha = alpha / total
        log_p += np.log(total) + shifts[t]
    return float(log_p)


def forward_log_likelihood(hmm: HiddenMarkovModel, obs: ObsInput) -> LogLikelihood:
    """log P(O | model) via the scaled forward algorithm."""
    frames = as_feature_matrix(obs)
    log_obs = emission_log_matrix(hmm, frames)
    return LogLikelihood.of(forward_from_log_obs(hmm.initial, hmm.transition, log_obs))


def viterbi_decode(hmm: HiddenMarkovModel, obs: ObsInput) -> Tuple[List[int], float]:
    """Most probable hidden-state path and its joint log-probability.

    Ties are broken toward the lowest state index.
    """
    frames = as_feature_matrix(obs)
    log_obs = emission_log_matrix(hmm, frames)
    T, n = log_obs.shape
    with np.errstate(divide="ignore"):
        log_init = np.log(hmm.initial)
        log_trans = np.log(hmm.transition)
    delta = log_init + log_obs[0]
    back = np.zeros((T, n), dtype=int)
    for t in range(1, T):
        # (n, n): score of arriving in state j from state i
        cand = delta[:, None] + log_trans
        back[t] = np.argmax(cand, axis=0)
        delta = cand[back[t], np.arange(n)] + log_obs[t]
    last = int(np.argmax(delta))
    log_p = float(delta[last])
    path = [0] * T
    path[T - 1] = last
    for t in range(T - 1, 0, -1):
        path[t - 1] = int(back[t, path[t]])
    return path, log_p


@dataclass(frozen=True)
class AbsorptionAnalysis:
    """n-step transition matrix and the decay of its diagonal."""

    matrix_power: np.ndarray
    diagonal_decay: np.ndarray


def analyze_absorption(matrix: np.ndarray, n: int) -> AbsorptionAnalysis:
    """Raise a row-stochastic matrix to the n-th power by repeated squaring.

    The diagonal of the result shows how in-state probability mass decays,
    driving eventual transitions into absorbing states.
    """
    a = np.asarray(matrix, dtype=float)
    if n < 1:
        raise ValueError("n must be a positive integer")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise StochasticityError(f"expected a square matrix, got shape {a.shape}")
    for i in range(a.shape[0]):
        _check_stochastic_vector(a[i], f"row {i}")
    result = np.eye(a.shape[0])
    base = a.copy()
    k = n
    while k:
        if k & 1:
            result = result @ base
        k >>= 1
        if k:
            base = base @ base
    return AbsorptionAnalysis(matrix_power=result, diagonal_decay=np.diag(result).copy())
