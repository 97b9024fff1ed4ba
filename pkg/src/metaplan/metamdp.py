"""Meta-level MDP dynamics: costly computations, termination, episodes.

A meta-level action either inspects a node (drawing one noisy
observation at cost ``lambda``) or terminates, committing to the path
with the highest posterior-expected reward and collecting that path's
ground-truth reward sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Literal, Protocol

import numpy as np

from .belief import BeliefState, Observation, best_expected_path, init_belief, sample_observation
from .envgraph import EnvInstance, Path


@dataclass(frozen=True)
class Inspect:
    node: int


@dataclass(frozen=True)
class Terminate:
    pass


TERMINATE = Terminate()
MetaAction = Inspect | Terminate

ScoreMode = Literal["ground_truth", "posterior"]


class EpisodeError(RuntimeError):
    """A policy produced an illegal action or an episode was misused."""


@dataclass(frozen=True)
class EpisodeConfig:
    cost: float
    tau_obs: float
    max_computations: int = 200
    score_mode: ScoreMode = "ground_truth"

    def __post_init__(self) -> None:
        if self.cost < 0:
            raise ValueError("cost must be non-negative")
        if self.max_computations < 1:
            raise ValueError("max_computations must be at least 1")


@dataclass(frozen=True, eq=False)
class StepRecord:
    belief_before: BeliefState
    action: MetaAction
    observation: Observation | None
    meta_reward: float


@dataclass(frozen=True, eq=False)
class EpisodeTrace:
    records: tuple[StepRecord, ...]
    final_belief: BeliefState
    chosen_path: Path
    rr: float
    config: EpisodeConfig
    instance: EnvInstance

    @property
    def n_computations(self) -> int:
        return sum(1 for r in self.records if isinstance(r.action, Inspect))

    def meta_return(self) -> float:
        return float(sum(r.meta_reward for r in self.records))

    def inspected_values(self) -> list[tuple[int, float]]:
        return [
            (r.observation.node, r.observation.value)
            for r in self.records
            if r.observation is not None
        ]


class Policy(Protocol):
    def __call__(self, belief: BeliefState) -> MetaAction: ...


class AlwaysTerminate:
    def __call__(self, belief: BeliefState) -> MetaAction:
        return TERMINATE


class ObservationSource(Protocol):
    def draw(self, node: int) -> float: ...


class GaussianObservationSource:
    """Streams fresh Normal(t_node, 1/sqrt(tau_obs)) draws from an rng."""

    def __init__(self, instance: EnvInstance, tau_obs: float, rng: np.random.Generator):
        self._instance = instance
        self._tau_obs = tau_obs
        self._rng = rng

    def draw(self, node: int) -> float:
        return sample_observation(self._instance, node, self._tau_obs, self._rng).value


class TableObservationSource:
    """Consumes a per-node table of precomputed observation values.

    The k-th inspection of node i always returns ``table[i][k]``, which
    makes observation draws reproducible across policies whose action
    sequences coincide.
    """

    def __init__(self, table: dict[int, list[float]] | dict[int, np.ndarray]):
        self._table = {n: list(v) for n, v in table.items()}
        self._cursor = {n: 0 for n in table}

    def draw(self, node: int) -> float:
        if node not in self._table:
            raise EpisodeError(f"no precomputed observations for node {node}")
        k = self._cursor[node]
        values = self._table[node]
        if k >= len(values):
            raise EpisodeError(
                f"observation list for node {node} exhausted after {len(values)} draws"
            )
        self._cursor[node] = k + 1
        return values[k]

    def cursor(self, node: int) -> int:
        return self._cursor.get(node, 0)


def precompute_observation_table(
    instance: EnvInstance, tau_obs: float, n_per_node: int, seed
) -> dict[int, np.ndarray]:
    """Per-node observation values t_i + noise, one independent row per node."""
    rng = np.random.default_rng(seed)
    sd = 1.0 / math.sqrt(tau_obs)
    nodes = instance.template.inspectable_nodes()
    noise = rng.standard_normal((len(nodes), n_per_node))
    return {
        node: instance.truth_of(node) + sd * noise[row]
        for row, node in enumerate(nodes)
    }


def _as_source(
    source: ObservationSource | np.random.Generator,
    instance: EnvInstance,
    config: EpisodeConfig,
) -> ObservationSource:
    if isinstance(source, np.random.Generator):
        return GaussianObservationSource(instance, config.tau_obs, source)
    return source


def step(
    belief: BeliefState,
    action: MetaAction,
    instance: EnvInstance,
    config: EpisodeConfig,
    source: ObservationSource | np.random.Generator,
) -> tuple[BeliefState, float, bool, Observation | None]:
    """Apply one meta-level action; returns (belief', reward, done, observation)."""
    from .belief import update

    if isinstance(action, Terminate):
        path, _ = best_expected_path(belief)
        return belief, instance.path_truth_sum(path), True, None
    if not belief.is_inspectable(action.node):
        raise EpisodeError(f"cannot inspect node {action.node}")
    source = _as_source(source, instance, config)
    obs = Observation(node=action.node, value=source.draw(action.node))
    return update(belief, obs, config.tau_obs), -config.cost, False, obs


def run_episode(
    policy: Policy,
    instance: EnvInstance,
    config: EpisodeConfig,
    source: ObservationSource | np.random.Generator,
    on_decision: Callable[[BeliefState, MetaAction], None] | None = None,
) -> EpisodeTrace:
    """Roll a policy to termination (or to the computation cap, which
    forces termination)."""
    source = _as_source(source, instance, config)
    belief = init_belief(instance.template)
    records: list[StepRecord] = []
    n_inspects = 0
    while True:
        if n_inspects >= config.max_computations:
            action: MetaAction = TERMINATE
        else:
            action = policy(belief)
        if on_decision is not None:
            on_decision(belief, action)
        new_belief, reward, done, obs = step(belief, action, instance, config, source)
        records.append(
            StepRecord(belief_before=belief, action=action, observation=obs, meta_reward=reward)
        )
        belief = new_belief
        if done:
            break
        n_inspects += 1
    path, _ = best_expected_path(belief)
    trace = EpisodeTrace(
        records=tuple(records),
        final_belief=belief,
        chosen_path=path,
        rr=math.nan,
        config=config,
        instance=instance,
    )
    return replace(trace, rr=rr_score(trace, config.score_mode))


def rr_score(trace: EpisodeTrace, mode: ScoreMode) -> float:
    """Resource-rationality score of a finished episode.

    ground_truth: realized reward sum of the chosen path minus total cost.
    posterior: final posterior-expected reward sum of the chosen path
    minus total cost.
    """
    cost = trace.config.cost * trace.n_computations
    if mode == "ground_truth":
        return trace.instance.path_truth_sum(trace.chosen_path) - cost
    if mode == "posterior":
        return float(sum(trace.final_belief.mu[i] for i in trace.chosen_path)) - cost
    raise ValueError(f"unknown score mode {mode!r}")
