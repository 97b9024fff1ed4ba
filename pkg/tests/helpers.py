"""Shared independent oracles for tests."""

import math

import numpy as np

from metaplan.envgraph import EnvTemplate, Path


def dfs_paths(template: EnvTemplate) -> list[Path]:
    """Brute-force start-to-goal path enumeration (recursive DFS)."""
    children: dict[int, list[int]] = {n.id: [] for n in template.nodes}
    for a, b in template.edges:
        children[a].append(b)

    out: list[Path] = []

    def walk(node, acc):
        if node in template.goals:
            out.append(tuple(acc))
            return
        for child in children[node]:
            walk(child, acc + [child])

    walk(template.start, [template.start])
    return sorted(out)


def brute_force_best_path(template: EnvTemplate, mu) -> tuple[Path, float]:
    best_path, best_value = None, -math.inf
    for path in dfs_paths(template):
        value = sum(mu[i] for i in path)
        if value > best_value:
            best_path, best_value = path, value
    return best_path, best_value


def mc_voc_pre_cost(belief, node, tau_obs, n_samples, rng):
    """Monte-Carlo estimate of the myopic improvement of one inspection.

    Samples observations from the node's predictive distribution,
    applies the conjugate update, and averages the gain of re-deciding
    over sticking with the previously best path (both valued under the
    updated belief). Returns (mean, standard error).
    """
    template = belief.template
    paths = dfs_paths(template)
    base = np.array([sum(belief.mu[i] for i in p) for p in paths])
    through = np.array([node in p for p in paths])
    r_thr = base[through].max()
    r_avoid = base[~through].max() if (~through).any() else -np.inf
    old_idx = int(np.argmax(base))
    old_through = bool(through[old_idx])

    mu = float(belief.mu[node])
    tau = float(belief.tau[node])
    sigma_pred = math.sqrt(1.0 / tau_obs + 1.0 / tau)
    obs = rng.normal(mu, sigma_pred, n_samples)
    delta = (obs - mu) * tau_obs / (tau + tau_obs)
    new_max = np.maximum(r_avoid, r_thr + delta)
    old_revalued = base[old_idx] + (delta if old_through else 0.0)
    gains = new_max - old_revalued
    return float(gains.mean()), float(gains.std(ddof=1) / math.sqrt(n_samples))


def random_belief(template, tau_obs, rng, max_updates=40):
    """Belief reached by a random prefix of observations."""
    from metaplan.belief import Observation, init_belief, update
    from metaplan.envgraph import sample_instance

    instance = sample_instance(template, int(rng.integers(2**62)))
    belief = init_belief(template)
    nodes = template.inspectable_nodes()
    sd = 1.0 / math.sqrt(tau_obs)
    for _ in range(int(rng.integers(0, max_updates + 1))):
        node = int(nodes[int(rng.integers(len(nodes)))])
        value = instance.truth_of(node) + sd * rng.standard_normal()
        belief = update(belief, Observation(node=node, value=value), tau_obs)
    return belief
