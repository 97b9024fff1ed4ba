"""Gaussian belief states over node rewards and the noisy observation channel.

Each inspectable node carries an independent Normal posterior (mu_i,
tau_i) with tau_i a precision (inverse variance). Observing a node with
precision tau_obs updates the posterior conjugately:

    mu'  = (tau * mu + tau_obs * o) / (tau + tau_obs)
    tau' = tau + tau_obs

Beliefs are immutable; ``update`` returns a fresh state. Posterior
parameters are recomputed from the per-node observation multiset with an
exactly rounded sum, so the final state is bit-identical under any
permutation of the same observations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

from .envgraph import EnvInstance, EnvTemplate, Path, path_index

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def norm_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z - _LOG_SQRT_2PI)


def norm_cdf(z: float) -> float:
    return float(ndtr(z))


def norm_sf(z: float) -> float:
    return float(ndtr(-z))


def mills_ratio(z: float) -> float:
    """phi(z) / (1 - Phi(z)), stable in the upper tail.

    Both terms underflow for large z; beyond |z| = 6 the ratio is formed
    in log space.
    """
    if z <= 6.0:
        return norm_pdf(z) / norm_sf(z)
    return math.exp(-0.5 * z * z - _LOG_SQRT_2PI - float(log_ndtr(-z)))


@dataclass(frozen=True)
class Observation:
    node: int
    value: float


@dataclass(frozen=True, eq=False)
class BeliefState:
    """Per-node Gaussian posterior over rewards.

    Non-inspectable nodes (the start node and zero-sigma nodes) keep
    their prior mean and an infinite precision entry; they are excluded
    from every update and selection operation.
    """

    template: EnvTemplate
    mu: np.ndarray
    tau: np.ndarray
    obs_count: np.ndarray
    observations: tuple[tuple[float, ...], ...]

    def is_inspectable(self, node: int) -> bool:
        return node != self.template.start and self.template.nodes[node].sigma > 0.0

    def inspectable(self) -> tuple[int, ...]:
        return self.template.inspectable_nodes()

    def sd(self, node: int) -> float:
        t = self.tau[node]
        return 0.0 if math.isinf(t) else 1.0 / math.sqrt(t)

    def sds(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(np.isinf(self.tau), 0.0, 1.0 / np.sqrt(self.tau))


def init_belief(template: EnvTemplate) -> BeliefState:
    sigmas = template.sigmas()
    with np.errstate(divide="ignore"):
        tau = np.where(sigmas > 0.0, 1.0 / np.square(sigmas), np.inf)
    mu = template.means()
    mu.flags.writeable = False
    tau.flags.writeable = False
    counts = np.zeros(template.n_nodes, dtype=np.int64)
    counts.flags.writeable = False
    return BeliefState(
        template=template,
        mu=mu,
        tau=tau,
        obs_count=counts,
        observations=tuple(() for _ in range(template.n_nodes)),
    )


def update(belief: BeliefState, obs: Observation, tau_obs: float) -> BeliefState:
    """Conjugate posterior update; returns a new state."""
    node = obs.node
    if not belief.is_inspectable(node):
        raise ValueError(f"node {node} is not inspectable")
    if not tau_obs > 0.0:
        raise ValueError("tau_obs must be positive")
    prior = belief.template.nodes[node]
    prior_tau = 1.0 / (prior.sigma * prior.sigma)
    values = belief.observations[node] + (obs.value,)
    k = len(values)
    # math.fsum gives the exactly rounded sum, so the result does not
    # depend on the order the observations arrived in.
    new_mu = (prior_tau * prior.mean + tau_obs * math.fsum(values)) / (
        prior_tau + k * tau_obs
    )
    new_tau = prior_tau + k * tau_obs

    mu = belief.mu.copy()
    tau = belief.tau.copy()
    counts = belief.obs_count.copy()
    mu[node] = new_mu
    tau[node] = new_tau
    counts[node] = k
    for arr in (mu, tau, counts):
        arr.flags.writeable = False
    observations = (
        belief.observations[:node] + (values,) + belief.observations[node + 1 :]
    )
    return BeliefState(
        template=belief.template,
        mu=mu,
        tau=tau,
        obs_count=counts,
        observations=observations,
    )


def sample_observation(
    instance: EnvInstance, node: int, tau_obs: float, rng: np.random.Generator
) -> Observation:
    """Draw o ~ N(t_node, sd = 1/sqrt(tau_obs))."""
    if node == instance.template.start or instance.template.nodes[node].sigma == 0.0:
        raise ValueError(f"node {node} is not inspectable")
    sd = 1.0 / math.sqrt(tau_obs)
    return Observation(node=node, value=instance.truth_of(node) + sd * rng.standard_normal())


def best_expected_path(belief: BeliefState) -> tuple[Path, float]:
    """Path maximizing the posterior-expected reward sum.

    Ties resolve to the lexicographically smallest path (paths are
    enumerated in lexicographic order and argmax takes the first hit).
    """
    index = path_index(belief.template)
    values = index.path_values(belief.mu)
    best = int(np.argmax(values))
    return index.paths[best], float(values[best])
