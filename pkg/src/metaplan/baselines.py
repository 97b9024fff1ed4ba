"""Baseline policies: discretized meta-greedy selection and PO-UCT search.

Both baselines replace the continuous observation channel with a
four-point discretization of the predictive observation distribution,
with representative values at mu + sigma * (-2, -2/3, 2/3, 2) and
probabilities given by the Normal mass of the four regions split at the
midpoints mu + sigma * (-4/3, 0, 4/3).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .belief import BeliefState, norm_cdf
from .envgraph import EnvTemplate, path_index
from .metamdp import TERMINATE, EpisodeConfig, Inspect, MetaAction
from .mgpo import NEG_INF

log = logging.getLogger(__name__)

# Region mass below mu - (4/3) sigma; the inner regions get 0.5 minus it.
_P_OUTER = norm_cdf(-4.0 / 3.0)
_P_INNER = 0.5 - _P_OUTER
_BIN_OFFSETS = (-2.0, -2.0 / 3.0, 2.0 / 3.0, 2.0)
_BIN_PROBS = (_P_OUTER, _P_INNER, _P_INNER, _P_OUTER)
_BIN_CUM = np.cumsum(_BIN_PROBS)


@dataclass(frozen=True)
class DiscretizedOutcome:
    values: tuple[float, float, float, float]
    probabilities: tuple[float, float, float, float]


@dataclass(frozen=True)
class PouctConfig:
    n_sims: int
    c_explore: float
    rollout_depth: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_sims < 1:
            raise ValueError("n_sims must be at least 1")
        if self.rollout_depth < 0:
            raise ValueError("rollout_depth must be non-negative")


def predictive_sd(belief: BeliefState, node: int, tau_obs: float) -> float:
    return math.sqrt(1.0 / float(belief.tau[node]) + 1.0 / tau_obs)


def discretize_observation(
    belief: BeliefState, node: int, tau_obs: float
) -> DiscretizedOutcome:
    """Four-point approximation of the next-observation distribution."""
    if not belief.is_inspectable(node):
        raise ValueError(f"node {node} is not inspectable")
    mu = float(belief.mu[node])
    sd = predictive_sd(belief, node, tau_obs)
    return DiscretizedOutcome(
        values=tuple(mu + sd * c for c in _BIN_OFFSETS),
        probabilities=_BIN_PROBS,
    )


def meta_greedy_select(
    belief: BeliefState, cost: float, tau_obs: float
) -> MetaAction:
    """One-step greedy choice over discretized outcomes.

    For each node the expected immediate improvement of the best-path
    value is computed over the four outcomes; the best node is inspected
    if its improvement exceeds the cost, otherwise planning terminates.
    Ties go to the lowest node id.
    """
    index = path_index(belief.template)
    values = index.path_values(belief.mu)
    masked = np.where(index.through, values[None, :], NEG_INF)
    r_i_all = masked.max(axis=1)
    anti = np.where(index.through, NEG_INF, values[None, :])
    r_alt_all = anti.max(axis=1)

    best_node, best_net = None, 0.0
    for node in belief.inspectable():
        mu = float(belief.mu[node])
        tau = float(belief.tau[node])
        r_i = float(r_i_all[node])
        r_alt = float(r_alt_all[node]) if index.has_alt[node] else NEG_INF
        r_max = max(r_i, r_alt)
        sd = math.sqrt(1.0 / tau + 1.0 / tau_obs)
        shrink = tau_obs / (tau + tau_obs)
        gain = 0.0
        for p, c in zip(_BIN_PROBS, _BIN_OFFSETS):
            delta = shrink * sd * c
            gain += p * (max(r_alt, r_i + delta) - r_max)
        net = gain - cost
        if net > best_net:
            best_node, best_net = node, net
    if best_node is None:
        return TERMINATE
    return Inspect(best_node)


@lru_cache(maxsize=1)
def _pouct_grid() -> dict[tuple[float, int, int], tuple[float, int]]:
    text = resources.files("metaplan").joinpath("params", "pouct_grid.csv").read_text()
    grid: dict[tuple[float, int, int], tuple[float, int]] = {}
    for row in csv.DictReader(text.splitlines()):
        key = (float(row["cost"]), int(row["steps"]), int(row["goals"]))
        grid[key] = (float(row["c_explore"]), int(row["rollout_depth"]))
    return grid


def pouct_default_params(
    goal_count: int, cost: float, n_sims: int
) -> tuple[float, int]:
    """Grid-searched (c_explore, rollout_depth) for a benchmark cell."""
    try:
        return _pouct_grid()[(cost, n_sims, goal_count)]
    except KeyError:
        raise LookupError(
            f"no tuned parameters for goals={goal_count}, cost={cost}, steps={n_sims}"
        ) from None


class _SimState:
    """Mutable light-weight belief used inside simulations.

    Tracks per-node posterior (mu, tau, count), the vector of expected
    path values, and an incrementally maintained hash of the discretized
    belief (per-node mean bucket and observation count), which lets the
    search tree revisit states reached through different outcome orders.
    """

    __slots__ = ("mu", "tau", "count", "values", "key", "through", "tau_obs")

    def __init__(self, belief: BeliefState, tau_obs: float):
        index = path_index(belief.template)
        self.mu = belief.mu.copy()
        self.tau = belief.tau.copy()
        self.count = belief.obs_count.copy()
        self.values = index.path_values(belief.mu)
        self.through = index.through
        self.tau_obs = tau_obs
        self.key = 0

    def terminal_value(self) -> float:
        return float(self.values.max())

    def apply(self, node: int, bin_idx: int) -> None:
        mu = self.mu[node]
        tau = self.tau[node]
        sd = math.sqrt(1.0 / tau + 1.0 / self.tau_obs)
        obs = mu + sd * _BIN_OFFSETS[bin_idx]
        delta = (self.tau_obs / (tau + self.tau_obs)) * (obs - mu)
        self.key ^= hash((node, int(self.count[node]), round(float(mu), 6)))
        self.mu[node] = mu + delta
        self.tau[node] = tau + self.tau_obs
        self.count[node] += 1
        self.key ^= hash(
            (node, int(self.count[node]), round(float(self.mu[node]), 6))
        )
        self.values[self.through[node]] += delta


class _TreeNode:
    __slots__ = ("n", "q", "visits")

    def __init__(self, n_actions: int):
        self.n = np.zeros(n_actions)
        self.q = np.zeros(n_actions)
        self.visits = 0


def pouct_select(
    belief: BeliefState,
    episode_config: EpisodeConfig,
    config: PouctConfig,
    rng: np.random.Generator | None = None,
) -> MetaAction:
    """Monte-Carlo tree search over discretized belief transitions.

    UCB1 guides in-tree action selection; unexplored leaves are
    evaluated with a uniformly random rollout of ``rollout_depth``
    computations followed by termination. Simulations respect the
    episode's remaining computation budget. Returns the root action
    with the highest mean value (ties: lowest node id, Terminate last).
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    inspectable = list(belief.inspectable())
    if not inspectable:
        return TERMINATE
    n_actions = len(inspectable) + 1  # final slot is Terminate
    terminate_idx = n_actions - 1
    cost = episode_config.cost
    tau_obs = episode_config.tau_obs
    budget_left = int(episode_config.max_computations - belief.obs_count.sum())

    tree: dict[int, _TreeNode] = {}

    def get_node(key: int) -> _TreeNode:
        node = tree.get(key)
        if node is None:
            node = _TreeNode(n_actions)
            tree[key] = node
        return node

    def rollout(state: _SimState, steps_left: int) -> float:
        total = 0.0
        for _ in range(min(config.rollout_depth, steps_left)):
            node_id = inspectable[int(rng.integers(len(inspectable)))]
            state.apply(node_id, int(np.searchsorted(_BIN_CUM, rng.random())))
            total -= cost
        return total + state.terminal_value()

    root_key = 0
    for _ in range(config.n_sims):
        state = _SimState(belief, tau_obs)
        state.key = root_key
        node = get_node(root_key)
        path: list[tuple[_TreeNode, int, float]] = []
        steps_left = budget_left
        tail_value = 0.0
        while True:
            if steps_left <= 0:
                tail_value = state.terminal_value()
                break
            # Untried actions are expanded in action order: inspectable
            # nodes ascending, Terminate last.
            untried = np.flatnonzero(node.n == 0)
            if len(untried):
                action = int(untried[0])
            else:
                explore = config.c_explore * np.sqrt(
                    math.log(node.visits) / node.n
                )
                action = int(np.argmax(node.q + explore))
            if action == terminate_idx:
                path.append((node, action, state.terminal_value()))
                break
            path.append((node, action, -cost))
            state.apply(
                inspectable[action], int(np.searchsorted(_BIN_CUM, rng.random()))
            )
            steps_left -= 1
            child = tree.get(state.key)
            if child is None:
                get_node(state.key)
                tail_value = rollout(state, steps_left)
                break
            node = child

        ret = tail_value
        for tree_node, action, reward in reversed(path):
            ret = reward + ret
            tree_node.visits += 1
            tree_node.n[action] += 1
            tree_node.q[action] += (ret - tree_node.q[action]) / tree_node.n[action]

    root = tree[root_key]
    if root.visits == 0:
        log.warning("PO-UCT budget too small to evaluate any root action")
        return TERMINATE
    q = np.where(root.n > 0, root.q, NEG_INF)
    best = int(np.argmax(q))
    if best == terminate_idx:
        return TERMINATE
    return Inspect(inspectable[best])


class PouctPolicy:
    """Episode policy running one PO-UCT search per decision.

    Each decision uses a child rng derived from (seed, decision index),
    so repeated episodes with the same seed are identical while
    successive decisions explore independently.
    """

    def __init__(self, episode_config: EpisodeConfig, config: PouctConfig):
        self.episode_config = episode_config
        self.config = config
        self._decision = 0

    def __call__(self, belief: BeliefState) -> MetaAction:
        rng = np.random.default_rng((self.config.seed, self._decision))
        self._decision += 1
        return pouct_select(belief, self.episode_config, self.config, rng)


class MetaGreedyPolicy:
    def __init__(self, cost: float, tau_obs: float):
        self.cost = cost
        self.tau_obs = tau_obs

    def __call__(self, belief: BeliefState) -> MetaAction:
        return meta_greedy_select(belief, self.cost, self.tau_obs)
