"""Metacognitive feedback engine: choice sets, delay penalties, curriculum.

Feedback trials offer the learner a small set of computations (always
containing the policy's own choice) plus the option to terminate. A
selected computation is correct when its VOC is non-negative and within
a fixed threshold of the best VOC; anything else earns a delay penalty.
Terminating while the policy would keep planning is never executed and
earns a delay scaled by how valuable planning still is relative to the
most valuable planning step seen so far in the trial:

    delay = d_c + d_max * clamp(max_voc_now / max_voc_history, 0, 1)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .belief import BeliefState
from .envgraph import EnvInstance, EnvTemplate, builtin_curriculum, node_depths
from .metamdp import (
    TERMINATE,
    EpisodeConfig,
    EpisodeTrace,
    Inspect,
    MetaAction,
    ObservationSource,
    run_episode,
)
from .mgpo import MgpoPolicy, VocConfig, voc_table

VOC_DISTINCTNESS = 1e-9

CONDITIONS = ("choice_tutor", "dummy_tutor", "no_tutor")

# (stage, nodes, goals, offered choices)
STAGE_CHOICES = {1: 2, 2: 3, 3: 4, 4: 4}
DUMMY_CHOICES = 2


@dataclass(frozen=True)
class FeedbackConfig:
    voc_threshold: float = 0.05
    d_click: float = 3.0
    d_c: float = 3.0
    d_max: float = 4.0

    def __post_init__(self) -> None:
        if min(self.voc_threshold, self.d_click, self.d_c, self.d_max) < 0:
            raise ValueError("feedback parameters must be non-negative")


@dataclass(frozen=True)
class ChoiceSet:
    options: tuple[Inspect, ...]
    correct: MetaAction
    includes_terminate: bool = True
    relaxed: bool = False  # fewer distinct VOC values than requested

    def offered(self, action: MetaAction) -> bool:
        return action == TERMINATE or action in self.options


@dataclass(frozen=True)
class FeedbackResult:
    correct: bool
    delay: float
    correct_option: MetaAction
    terminate_executed: bool = True


@dataclass(frozen=True)
class CurriculumStage:
    stage: int
    template: EnvTemplate
    k_choices: int


@dataclass(frozen=True)
class TrialPlan:
    index: int
    stage: int
    kind: str  # demo | feedback | practice | test


def curriculum_stage(stage: int) -> CurriculumStage:
    return CurriculumStage(
        stage=stage,
        template=builtin_curriculum(stage),
        k_choices=STAGE_CHOICES[stage],
    )


def build_choice_set(
    belief: BeliefState,
    config: VocConfig,
    k: int,
    rng: np.random.Generator,
) -> ChoiceSet:
    """Choice set containing the best computation plus alternatives with
    pairwise-distinct VOC values, sampled uniformly; when fewer distinct
    values exist the set is filled with arbitrary remaining options."""
    if k < 2:
        raise ValueError("choice sets need at least 2 options")
    rows = voc_table(belief, config)
    if not rows:
        raise ValueError("no inspectable nodes remain")
    vocs = {r.node: r.voc for r in rows}
    best_row = max(rows, key=lambda r: (r.voc, -r.node))
    best_voc = best_row.voc

    chosen = [best_row.node]
    chosen_vocs = [best_row.voc]
    pool = [r.node for r in rows if r.node != best_row.node]
    relaxed = False
    while len(chosen) < min(k, len(rows)):
        distinct = [
            n
            for n in pool
            if all(abs(vocs[n] - v) > VOC_DISTINCTNESS for v in chosen_vocs)
        ]
        if distinct:
            pick = int(rng.choice(distinct))
        else:
            relaxed = True
            pick = int(rng.choice(pool))
        chosen.append(pick)
        chosen_vocs.append(vocs[pick])
        pool.remove(pick)
    if len(chosen) < k:
        relaxed = True

    correct: MetaAction = Inspect(best_row.node) if best_voc > 0.0 else TERMINATE
    return ChoiceSet(
        options=tuple(Inspect(n) for n in sorted(chosen)),
        correct=correct,
        relaxed=relaxed,
    )


def dummy_choice_set(
    template: EnvTemplate, rng: np.random.Generator, belief: BeliefState | None = None,
    config: VocConfig | None = None,
) -> ChoiceSet:
    """Two options sharing one uniformly sampled depth from the start.

    The designated correct option is the better of the two by VOC when a
    belief is supplied, otherwise the first; the information content of
    this feedback is intentionally negligible.
    """
    depths = node_depths(template)
    inspectable = set(template.inspectable_nodes())
    by_depth: dict[int, list[int]] = {}
    for node in inspectable:
        by_depth.setdefault(depths[node], []).append(node)
    eligible = sorted(d for d, members in by_depth.items() if len(members) >= DUMMY_CHOICES)
    if not eligible:
        raise ValueError("no depth offers two inspectable nodes")
    depth = int(eligible[int(rng.integers(len(eligible)))])
    nodes = sorted(
        int(n) for n in rng.choice(by_depth[depth], size=DUMMY_CHOICES, replace=False)
    )
    correct_node = nodes[0]
    if belief is not None and config is not None:
        vocs = {r.node: r.voc for r in voc_table(belief, config)}
        correct_node = max(nodes, key=lambda n: (vocs.get(n, 0.0), -n))
    return ChoiceSet(options=tuple(Inspect(n) for n in nodes), correct=Inspect(correct_node))


def evaluate_click(
    belief: BeliefState,
    chosen: MetaAction,
    choice_set: ChoiceSet,
    config: VocConfig,
    feedback: FeedbackConfig,
    voc_history: list[float],
) -> FeedbackResult:
    """Judge one selection and compute its delay penalty.

    ``voc_history`` holds the maximum VOC of each earlier planning step
    in the trial (used by the termination penalty)."""
    if not choice_set.offered(chosen):
        raise ValueError(f"action {chosen} was not offered")
    rows = voc_table(belief, config)
    best_voc = max((r.voc for r in rows), default=float("-inf"))
    policy_terminates = best_voc <= 0.0

    if isinstance(chosen, Inspect):
        voc = next(r.voc for r in rows if r.node == chosen.node)
        correct = voc >= 0.0 and (best_voc - voc <= feedback.voc_threshold)
        return FeedbackResult(
            correct=correct,
            delay=0.0 if correct else feedback.d_click,
            correct_option=choice_set.correct,
        )

    if policy_terminates:
        return FeedbackResult(correct=True, delay=0.0, correct_option=TERMINATE)
    denominator = max(voc_history) if voc_history else best_voc
    ratio = 1.0 if denominator <= 0.0 else best_voc / denominator
    ratio = min(max(ratio, 0.0), 1.0)
    return FeedbackResult(
        correct=False,
        delay=feedback.d_c + feedback.d_max * ratio,
        correct_option=choice_set.correct,
        terminate_executed=False,
    )


class _FixedLengthRandomPolicy:
    """Uniformly random inspections for a preset number of steps."""

    def __init__(self, template: EnvTemplate, length: int, rng: np.random.Generator):
        self._nodes = template.inspectable_nodes()
        self._length = length
        self._rng = rng
        self._done = 0

    def __call__(self, belief: BeliefState) -> MetaAction:
        if self._done >= self._length:
            return TERMINATE
        self._done += 1
        return Inspect(int(self._nodes[int(self._rng.integers(len(self._nodes)))]))


def generate_demo(
    instance: EnvInstance,
    config: VocConfig,
    episode_config: EpisodeConfig,
    rng: np.random.Generator,
    mode: str = "mgpo",
    obs_source_factory: Callable[[], ObservationSource] | None = None,
) -> EpisodeTrace:
    """Step-by-step demonstration trace.

    mgpo mode rolls the policy to termination; dummy mode performs
    uniformly random inspections matching the length of the policy's
    trace on the same instance, then terminates. ``obs_source_factory``
    supplies a fresh observation stream per roll (e.g. a precomputed
    table); by default observations are drawn from child rngs.
    """
    if mode not in ("mgpo", "dummy"):
        raise ValueError(f"unknown demo mode {mode!r}")
    policy_rng, dummy_rng = rng.spawn(2)
    policy_source = obs_source_factory() if obs_source_factory else policy_rng
    policy_trace = run_episode(
        MgpoPolicy(config), instance, episode_config, policy_source
    )
    if mode == "mgpo":
        return policy_trace
    dummy_policy = _FixedLengthRandomPolicy(
        instance.template, policy_trace.n_computations, dummy_rng
    )
    dummy_source = obs_source_factory() if obs_source_factory else dummy_rng
    return run_episode(dummy_policy, instance, episode_config, dummy_source)


def curriculum_schedule(condition: str) -> tuple[TrialPlan, ...]:
    """22 trials: 12 training (3 per stage) then 10 tests on stage 4.

    Tutored conditions get one demonstration and two feedback trials per
    stage; the untutored condition practices unassisted.
    """
    if condition not in CONDITIONS:
        raise ValueError(f"unknown condition {condition!r}")
    plans: list[TrialPlan] = []
    index = 0
    for stage in (1, 2, 3, 4):
        kinds = (
            ["practice"] * 3
            if condition == "no_tutor"
            else ["demo", "feedback", "feedback"]
        )
        for kind in kinds:
            plans.append(TrialPlan(index=index, stage=stage, kind=kind))
            index += 1
    for _ in range(10):
        plans.append(TrialPlan(index=index, stage=4, kind="test"))
        index += 1
    return tuple(plans)
