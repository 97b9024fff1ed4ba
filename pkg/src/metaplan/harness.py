"""Benchmark driver, timing probes, and strategy-agreement metrics.

``run_benchmark`` reproduces the simulation protocol: every algorithm in
a cell sees the same environment instances (common random numbers) and
the same per-(node, draw-index) precomputed observation streams, so
observation draws coincide wherever action sequences do.

The agreement metrics compare a participant's episode trace against a
reference policy queried at the participant's own belief states.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path as FsPath
from statistics import median

import numpy as np

from .baselines import MetaGreedyPolicy, PouctConfig, PouctPolicy, pouct_default_params
from .belief import BeliefState, Observation, init_belief, update, best_expected_path
from .envgraph import (
    EnvInstance,
    EnvTemplate,
    builtin_benchmark,
    builtin_curriculum,
    sample_instance,
)
from .metamdp import (
    TERMINATE,
    EpisodeConfig,
    EpisodeTrace,
    Inspect,
    MetaAction,
    Policy,
    StepRecord,
    TableObservationSource,
    precompute_observation_table,
    rr_score,
    run_episode,
)
from .mgpo import MgpoPolicy, VocConfig

OBS_STREAM_LENGTH = 200

ENV_NAMES = ("g2", "g3", "g4", "g5", "exp60")


def env_by_name(name: str) -> EnvTemplate:
    if name.startswith("g") and name[1:].isdigit():
        return builtin_benchmark(int(name[1:]))
    if name == "exp60":
        return builtin_curriculum(4)
    raise ValueError(f"unknown environment {name!r}; expected one of {ENV_NAMES}")


def make_policy(
    algo: str,
    goal_count: int,
    episode_config: EpisodeConfig,
    w_cost: float = 0.5,
    legacy_mode: bool = False,
    seed: int = 0,
) -> Policy:
    """Instantiate a registered algorithm by CLI name."""
    if algo == "mgpo":
        return MgpoPolicy(
            VocConfig(
                cost=episode_config.cost,
                tau_obs=episode_config.tau_obs,
                w_cost=w_cost,
                legacy_mode=legacy_mode,
            )
        )
    if algo == "metagreedy":
        return MetaGreedyPolicy(episode_config.cost, episode_config.tau_obs)
    if algo.startswith("pouct:"):
        n_sims = int(algo.split(":", 1)[1])
        try:
            c_explore, rollout_depth = pouct_default_params(
                goal_count, episode_config.cost, n_sims
            )
        except LookupError:
            c_explore, rollout_depth = 1.0, 0
        return PouctPolicy(
            episode_config,
            PouctConfig(
                n_sims=n_sims,
                c_explore=c_explore,
                rollout_depth=rollout_depth,
                seed=seed,
            ),
        )
    raise ValueError(f"unregistered algorithm {algo!r}")


@dataclass(frozen=True)
class BenchmarkSpec:
    algorithms: tuple[str, ...]
    goal_counts: tuple[int, ...]
    costs: tuple[float, ...]
    tau_obs: float
    n_instances: int
    base_seed: int
    out_dir: str | None = None
    measure_time: bool = False
    w_cost: float = 0.5
    envs: tuple[str, ...] | None = None  # overrides goal_counts when set

    def __post_init__(self) -> None:
        if self.n_instances < 1:
            raise ValueError("n_instances must be at least 1")

    def env_names(self) -> tuple[str, ...]:
        if self.envs is not None:
            return self.envs
        return tuple(f"g{g}" for g in self.goal_counts)


@dataclass(frozen=True)
class EpisodeRow:
    algo: str
    env: str
    cost: float
    seed: int
    rr: float
    n_clicks: int
    wall_ms: float
    truth_hash: str


@dataclass(frozen=True)
class CellStats:
    algo: str
    env: str
    cost: float
    mean_rr: float
    median_rr: float
    iqr_rr: float
    mean_ms_per_decision: float
    episodes: int


@dataclass(frozen=True)
class BenchmarkResult:
    rows: tuple[EpisodeRow, ...]
    cells: tuple[CellStats, ...]

    def cell(self, algo: str, env: str, cost: float) -> CellStats:
        for c in self.cells:
            if c.algo == algo and c.env == env and c.cost == cost:
                return c
        raise KeyError((algo, env, cost))


def _truth_hash(instance: EnvInstance) -> str:
    import hashlib

    return hashlib.sha256(instance.truths.tobytes()).hexdigest()[:12]


def _iqr(values: list[float]) -> float:
    q75, q25 = np.percentile(values, [75.0, 25.0])
    return float(q75 - q25)


def run_benchmark(spec: BenchmarkSpec) -> BenchmarkResult:
    """Run every (algorithm, environment, cost) cell on common instances."""
    rows: list[EpisodeRow] = []
    cells: list[CellStats] = []
    for env_name in spec.env_names():
        template = env_by_name(env_name)
        goal_count = len(template.goals)
        instances = [
            sample_instance(template, spec.base_seed + j)
            for j in range(spec.n_instances)
        ]
        tables = [
            precompute_observation_table(
                inst, spec.tau_obs, OBS_STREAM_LENGTH, (spec.base_seed, 7, j)
            )
            for j, inst in enumerate(instances)
        ]
        for cost in spec.costs:
            episode_config = EpisodeConfig(cost=cost, tau_obs=spec.tau_obs)
            for algo in spec.algorithms:
                cell_rows: list[EpisodeRow] = []
                decisions = 0
                elapsed = 0.0
                for j, (inst, table) in enumerate(zip(instances, tables)):
                    policy = make_policy(
                        algo,
                        goal_count,
                        episode_config,
                        w_cost=spec.w_cost,
                        seed=spec.base_seed + j,
                    )
                    t0 = time.perf_counter() if spec.measure_time else 0.0
                    trace = run_episode(
                        policy, inst, episode_config, TableObservationSource(table)
                    )
                    wall = (time.perf_counter() - t0) if spec.measure_time else 0.0
                    decisions += len(trace.records)
                    elapsed += wall
                    cell_rows.append(
                        EpisodeRow(
                            algo=algo,
                            env=env_name,
                            cost=cost,
                            seed=inst.seed,
                            rr=trace.rr,
                            n_clicks=trace.n_computations,
                            wall_ms=wall * 1000.0,
                            truth_hash=_truth_hash(inst),
                        )
                    )
                rrs = [r.rr for r in cell_rows]
                cells.append(
                    CellStats(
                        algo=algo,
                        env=env_name,
                        cost=cost,
                        mean_rr=float(np.mean(rrs)),
                        median_rr=float(median(rrs)),
                        iqr_rr=_iqr(rrs),
                        mean_ms_per_decision=(
                            elapsed * 1000.0 / decisions if decisions else 0.0
                        ),
                        episodes=len(cell_rows),
                    )
                )
                rows.extend(cell_rows)
    result = BenchmarkResult(rows=tuple(rows), cells=tuple(cells))
    if spec.out_dir is not None:
        write_benchmark_csv(result, spec.out_dir)
    return result


def results_csv(result: BenchmarkResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["algo", "env", "cost", "seed", "rr", "n_clicks", "wall_ms"])
    for r in result.rows:
        w.writerow(
            [r.algo, r.env, f"{r.cost:g}", r.seed, f"{r.rr:.6f}", r.n_clicks, f"{r.wall_ms:.3f}"]
        )
    return buf.getvalue()


def summary_csv(result: BenchmarkResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["algo", "env", "cost", "mean_rr", "median_rr", "iqr_rr", "mean_ms_per_decision", "episodes"]
    )
    for c in result.cells:
        w.writerow(
            [
                c.algo,
                c.env,
                f"{c.cost:g}",
                f"{c.mean_rr:.6f}",
                f"{c.median_rr:.6f}",
                f"{c.iqr_rr:.6f}",
                f"{c.mean_ms_per_decision:.3f}",
                c.episodes,
            ]
        )
    return buf.getvalue()


def write_benchmark_csv(result: BenchmarkResult, out_dir: str) -> None:
    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(results_csv(result))
    (out / "summary.csv").write_text(summary_csv(result))


def time_per_decision(
    policy: Policy,
    template: EnvTemplate,
    config: EpisodeConfig,
    n_decisions: int = 30,
    seed: int = 0,
) -> float:
    """Mean wall-clock seconds per select call on beliefs sampled from
    random episode prefixes."""
    if n_decisions < 30:
        raise ValueError("n_decisions must be at least 30")
    rng = np.random.default_rng(seed)
    beliefs: list[BeliefState] = []
    j = 0
    while len(beliefs) < n_decisions:
        inst = sample_instance(template, int(rng.integers(2**62)))
        source = TableObservationSource(
            precompute_observation_table(
                inst, config.tau_obs, OBS_STREAM_LENGTH, int(rng.integers(2**62))
            )
        )
        cutoff = int(rng.integers(0, 40))
        belief = init_belief(template)
        nodes = template.inspectable_nodes()
        for _ in range(cutoff):
            node = int(nodes[int(rng.integers(len(nodes)))])
            belief = update(
                belief,
                Observation(node=node, value=source.draw(node)),
                config.tau_obs,
            )
        beliefs.append(belief)
        j += 1
    start = time.perf_counter()
    for belief in beliefs[:n_decisions]:
        policy(belief)
    return (time.perf_counter() - start) / n_decisions


# ---------------------------------------------------------------------------
# Agreement metrics


def _decision_points(trace: EpisodeTrace) -> list[tuple[BeliefState, MetaAction]]:
    return [(r.belief_before, r.action) for r in trace.records]


def click_matches(trace: EpisodeTrace, reference: Policy) -> tuple[int, int]:
    """(matching inspections, total inspections) against the reference."""
    inspects = [
        (b, a) for b, a in _decision_points(trace) if isinstance(a, Inspect)
    ]
    hits = sum(1 for b, a in inspects if reference(b) == a)
    return hits, len(inspects)


def click_agreement(trace: EpisodeTrace, reference: Policy) -> float:
    """Share of participant inspections matching the reference policy's
    choice in the same belief state."""
    hits, total = click_matches(trace, reference)
    if not total:
        first_belief = trace.records[0].belief_before if trace.records else None
        if first_belief is None:
            return 1.0
        return 1.0 if reference(first_belief) == TERMINATE else 0.0
    return hits / total


def termination_confusion(
    trace: EpisodeTrace, reference: Policy
) -> tuple[int, int, int, int]:
    """(tp, tn, fp, fn) of terminate decisions, positives defined as
    points where the reference terminates."""
    tp = tn = fp = fn = 0
    for belief, action in _decision_points(trace):
        ref_terminates = reference(belief) == TERMINATE
        we_terminate = action == TERMINATE
        if ref_terminates and we_terminate:
            tp += 1
        elif ref_terminates and not we_terminate:
            fn += 1
        elif not ref_terminates and we_terminate:
            fp += 1
        else:
            tn += 1
    return tp, tn, fp, fn


def balanced_accuracy(tp: int, tn: int, fp: int, fn: int) -> float:
    """(TPR + TNR) / 2; an empty class contributes its counterpart's rate."""
    tpr = tp / (tp + fn) if (tp + fn) else None
    tnr = tn / (tn + fp) if (tn + fp) else None
    if tpr is None and tnr is None:
        return 1.0
    if tpr is None:
        tpr = tnr
    if tnr is None:
        tnr = tpr
    return (tpr + tnr) / 2.0


def termination_agreement(trace: EpisodeTrace, reference: Policy) -> float:
    """Balanced accuracy of terminate/continue decisions against the
    reference policy."""
    return balanced_accuracy(*termination_confusion(trace, reference))


def repeat_matches(trace: EpisodeTrace, reference: Policy) -> tuple[int, int]:
    """(matching classifications, total inspections); repeated means the
    node was inspected at any earlier step of the same trace. A
    reference terminate at an inspection point counts as a mismatch
    (it is neither repeated nor fresh)."""
    seen: set[int] = set()
    total = 0
    hits = 0
    for belief, action in _decision_points(trace):
        if not isinstance(action, Inspect):
            continue
        total += 1
        ref = reference(belief)
        if isinstance(ref, Inspect):
            if (ref.node in seen) == (action.node in seen):
                hits += 1
        seen.add(action.node)
    return hits, total


def repeat_agreement(trace: EpisodeTrace, reference: Policy) -> float:
    """Share of participant inspections whose repeated/fresh character
    matches the reference policy's choice at the same belief."""
    hits, total = repeat_matches(trace, reference)
    return hits / total if total else 1.0


def variance_tiers(template: EnvTemplate) -> tuple[float, float, float]:
    """(low, mid, high) sigma tiers; requires exactly three tiers."""
    sigmas = sorted(
        {template.nodes[n].sigma for n in range(template.n_nodes) if n != template.start}
    )
    if len(sigmas) != 3:
        raise ValueError(
            f"template {template.name!r} lacks a three-tier variance structure"
        )
    return sigmas[0], sigmas[1], sigmas[2]


def goal_planning_detect(trace: EpisodeTrace, template: EnvTemplate) -> bool:
    """True when inspections respect the variance hierarchy: some
    highest-tier inspection precedes every lower-tier one, and some
    mid-tier inspection precedes every low-tier one."""
    low, mid, high = variance_tiers(template)
    order = [
        template.nodes[a.node].sigma
        for _, a in _decision_points(trace)
        if isinstance(a, Inspect)
    ]

    def first_index(pred) -> float:
        return next((i for i, s in enumerate(order) if pred(s)), math.inf)

    first_high = first_index(lambda s: s == high)
    first_mid = first_index(lambda s: s == mid)
    first_low = first_index(lambda s: s == low)
    cond_goal = first_high < math.inf and first_high < min(first_mid, first_low)
    cond_mid = first_mid < math.inf and first_mid < first_low
    return cond_goal and cond_mid


def learned_goal_planning(trial_flags: list[bool]) -> bool:
    """Participant-level flag: strategy shown in more than half the trials."""
    return sum(trial_flags) > len(trial_flags) / 2.0


# ---------------------------------------------------------------------------
# Trace serialization (one JSON object per episode)

TRACE_SCHEMA = {
    "env": "environment name (g2..g5, exp60)",
    "cost": "computation cost lambda",
    "tau_obs": "observation precision",
    "seed": "instance seed",
    "actions": "ordered [{node, value}] inspections",
    "path": "chosen path (node ids)",
}


def trace_to_json(trace: EpisodeTrace, env_name: str) -> dict:
    return {
        "env": env_name,
        "cost": trace.config.cost,
        "tau_obs": trace.config.tau_obs,
        "seed": trace.instance.seed,
        "actions": [
            {"node": n, "value": v} for n, v in trace.inspected_values()
        ],
        "path": list(trace.chosen_path),
        "rr": trace.rr,
    }


def replay_trace(doc: dict) -> EpisodeTrace:
    """Rebuild an EpisodeTrace (with belief-before states) from JSON."""
    template = env_by_name(doc["env"])
    config = EpisodeConfig(
        cost=float(doc["cost"]),
        tau_obs=float(doc["tau_obs"]),
        max_computations=max(200, len(doc["actions"])),
        score_mode="posterior",
    )
    instance = sample_instance(template, int(doc.get("seed", 0)))
    belief = init_belief(template)
    records: list[StepRecord] = []
    for entry in doc["actions"]:
        obs = Observation(node=int(entry["node"]), value=float(entry["value"]))
        records.append(
            StepRecord(
                belief_before=belief,
                action=Inspect(obs.node),
                observation=obs,
                meta_reward=-config.cost,
            )
        )
        belief = update(belief, obs, config.tau_obs)
    path, value = best_expected_path(belief)
    records.append(
        StepRecord(
            belief_before=belief,
            action=TERMINATE,
            observation=None,
            meta_reward=instance.path_truth_sum(path),
        )
    )
    trace = EpisodeTrace(
        records=tuple(records),
        final_belief=belief,
        chosen_path=path,
        rr=math.nan,
        config=config,
        instance=instance,
    )
    return replace(trace, rr=rr_score(trace, "posterior"))


def traces_from_jsonl(text: str) -> list[EpisodeTrace]:
    return [replay_trace(json.loads(line)) for line in text.splitlines() if line.strip()]
