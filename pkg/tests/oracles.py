"""Independent brute-force oracles used to check the fast implementations."""
from __future__ import annotations

import itertools
from typing import Tuple

import numpy as np

from drivestate.gmm import GaussianComponent, GaussianMixture, diagonal_mixture
from drivestate.hmm import HiddenMarkovModel


def linear_space_mixture_pdf(mixture: GaussianMixture, x: np.ndarray) -> float:
    """Naive linear-space mixture density: sum of weighted component pdfs."""
    total = 0.0
    for comp in mixture.components:
        d = comp.mean.size
        diff = np.asarray(x, dtype=float) - comp.mean
        if comp.is_diagonal:
            det = float(np.prod(comp.covariance))
            maha = float(np.sum(diff * diff / comp.covariance))
        else:
            det = float(np.linalg.det(comp.covariance))
            maha = float(diff @ np.linalg.solve(comp.covariance, diff))
        total += comp.weight * np.exp(-0.5 * maha) / np.sqrt((2 * np.pi) ** d * det)
    return total


def emission_matrix(hmm: HiddenMarkovModel, frames: np.ndarray) -> np.ndarray:
    """(T, N) linear-space emission densities via the naive mixture pdf."""
    T = frames.shape[0]
    out = np.empty((T, hmm.num_states))
    for t in range(T):
        for i, g in enumerate(hmm.emissions):
            out[t, i] = linear_space_mixture_pdf(g, frames[t])
    return out


def brute_force_likelihood(hmm: HiddenMarkovModel, frames: np.ndarray) -> float:
    """Exhaustive sum over all state paths of path-probability x emission product."""
    frames = np.atleast_2d(frames)
    T = frames.shape[0]
    n = hmm.num_states
    b = emission_matrix(hmm, frames)
    paths = np.array(list(itertools.product(range(n), repeat=T)), dtype=int)
    probs = hmm.initial[paths[:, 0]] * b[0, paths[:, 0]]
    for t in range(1, T):
        probs = probs * hmm.transition[paths[:, t - 1], paths[:, t]] * b[t, paths[:, t]]
    return float(probs.sum())


def brute_force_viterbi(hmm: HiddenMarkovModel, frames: np.ndarray) -> Tuple[list, float]:
    """Exhaustive max over all state paths; ties broken by lexicographic path order."""
    frames = np.atleast_2d(frames)
    T = frames.shape[0]
    n = hmm.num_states
    with np.errstate(divide="ignore"):
        log_b = np.log(emission_matrix(hmm, frames))
        log_a = np.log(hmm.transition)
        log_pi = np.log(hmm.initial)
    best_path, best_score = None, -np.inf
    for path in itertools.product(range(n), repeat=T):
        score = log_pi[path[0]] + log_b[0, path[0]]
        for t in range(1, T):
            score += log_a[path[t - 1], path[t]] + log_b[t, path[t]]
        if score > best_score:
            best_score, best_path = score, list(path)
    return best_path, float(best_score)


def random_model(
    rng: np.random.Generator,
    n_states: int,
    dimension: int,
    n_components: int = 1,
) -> HiddenMarkovModel:
    """A random valid diagonal-covariance mixture HMM."""
    initial = rng.dirichlet(np.ones(n_states))
    transition = np.vstack([rng.dirichlet(np.ones(n_states)) for _ in range(n_states)])
    emissions = []
    for _ in range(n_states):
        weights = rng.dirichlet(np.ones(n_components))
        means = rng.normal(0.0, 2.0, size=(n_components, dimension))
        variances = rng.uniform(0.2, 1.5, size=(n_components, dimension))
        emissions.append(diagonal_mixture(weights, means, variances))
    return HiddenMarkovModel(initial, transition, tuple(emissions))


def sample_from_model(
    rng: np.random.Generator, hmm: HiddenMarkovModel, length: int
) -> np.ndarray:
    """Draw one observation sequence from a diagonal-covariance model."""
    frames = np.empty((length, hmm.dimension))
    state = rng.choice(hmm.num_states, p=hmm.initial)
    for t in range(length):
        if t > 0:
            state = rng.choice(hmm.num_states, p=hmm.transition[state])
        mixture = hmm.emissions[state]
        comp = mixture.components[rng.choice(len(mixture.components), p=mixture.weights)]
        frames[t] = rng.normal(comp.mean, np.sqrt(comp.covariance))
    return frames
