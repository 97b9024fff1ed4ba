"""HTTP session service hosting tutor experiments.

Sessions are assigned a pre-generated (cost, precision) parameter set
round-robin within their condition, so every condition sees the same
parameter multiset, the same environment instances, and the same
precomputed observation streams. All beliefs, feedback, and scores are
computed server-side; clients only ever see realized observations and
posteriors, never ground truths or future draws.

Persistence is an append-only JSON-lines file per session. Observation
tables (200 values per inspectable node per trial) are derived lazily
but deterministically from the persisted seeds, so a record is fully
reproducible from its header line.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Any

import numpy as np

from .belief import BeliefState, Observation, best_expected_path, init_belief, update
from .envgraph import EnvInstance, EnvTemplate, sample_instance, template_to_json
from .harness import (
    click_agreement,
    goal_planning_detect,
    learned_goal_planning,
    repeat_agreement,
    termination_agreement,
)
from .metamdp import (
    TERMINATE,
    EpisodeConfig,
    EpisodeTrace,
    Inspect,
    StepRecord,
    TableObservationSource,
    precompute_observation_table,
)
from .mgpo import MgpoPolicy, VocConfig, voc_table
from .tutor import (
    CONDITIONS,
    STAGE_CHOICES,
    ChoiceSet,
    FeedbackConfig,
    TrialPlan,
    build_choice_set,
    curriculum_schedule,
    curriculum_stage,
    dummy_choice_set,
    evaluate_click,
    generate_demo,
)

OBS_PER_NODE = 200
N_PARAMETER_SETS = 100

LAMBDA_RANGE = (0.01, 0.5)
TAU_RANGE = (0.0001, 0.1)


class ServiceError(Exception):
    def __init__(self, status: int, detail: str):
        super().__init__(detail)
        self.status = status
        self.detail = detail


def pregenerate_parameter_sets(seed) -> list[tuple[float, float]]:
    """100 (cost, precision) pairs: clipped Normal draws around
    (0.05, 0.005), both with sd 0.002."""
    rng = np.random.default_rng(seed)
    lams = np.clip(rng.normal(0.05, 0.002, N_PARAMETER_SETS), *LAMBDA_RANGE)
    taus = np.clip(rng.normal(0.005, 0.002, N_PARAMETER_SETS), *TAU_RANGE)
    return list(zip(lams.tolist(), taus.tolist()))


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: str = "./tutor_data"
    param_seed: int = 0
    profile: str = "legacy"  # legacy | standard
    feedback: FeedbackConfig = field(default_factory=FeedbackConfig)

    def __post_init__(self) -> None:
        if self.profile not in ("legacy", "standard"):
            raise ValueError("profile must be 'legacy' or 'standard'")


@dataclass
class TrialState:
    plan: TrialPlan
    template: EnvTemplate
    instance: EnvInstance
    table: dict[int, np.ndarray]
    belief: BeliefState
    clicks: int = 0
    voc_history: list[float] = field(default_factory=list)
    choice_set: ChoiceSet | None = None
    events: list[dict] = field(default_factory=list)
    closed: bool = False
    path: list[int] | None = None
    rr: float | None = None
    demo_payload: dict | None = None
    obs_cursor: dict[int, int] = field(default_factory=dict)


@dataclass
class SessionRecord:
    session_id: str
    condition: str
    param_index: int
    lam: float
    tau_obs: float
    plan: tuple[TrialPlan, ...]
    cursor: int = 0
    status: str = "active"
    seq: int = 0
    trials: dict[int, TrialState] = field(default_factory=dict)
    event_cache: dict[str, dict] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)


class TutorService:
    """All session state plus the deterministic derivations behind it."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.parameter_sets = pregenerate_parameter_sets(config.param_seed)
        self.sessions: dict[str, SessionRecord] = {}
        self._condition_counters = {c: 0 for c in CONDITIONS}
        self._create_lock = threading.Lock()
        self.data_dir = FsPath(config.data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    # -- deterministic derivations ------------------------------------

    def _voc_config(self, session: SessionRecord) -> VocConfig:
        return VocConfig(
            cost=session.lam,
            tau_obs=session.tau_obs,
            legacy_mode=(self.config.profile == "legacy"),
        )

    def _episode_config(self, session: SessionRecord) -> EpisodeConfig:
        return EpisodeConfig(
            cost=session.lam, tau_obs=session.tau_obs, score_mode="posterior"
        )

    def _instance_seed(self, param_index: int, trial: int) -> int:
        rng = np.random.default_rng(
            (self.config.param_seed, 11, param_index, trial)
        )
        return int(rng.integers(2**62))

    def _table_seed(self, param_index: int, trial: int):
        return (self.config.param_seed, 13, param_index, trial)

    def _choice_rng(self, session: SessionRecord, trial: int, step: int):
        return np.random.default_rng(
            (self.config.param_seed, 17, session.param_index, trial, step)
        )

    def _demo_rng(self, session: SessionRecord, trial: int):
        return np.random.default_rng(
            (self.config.param_seed, 19, session.param_index, trial)
        )

    def _build_trial(self, session: SessionRecord, plan: TrialPlan) -> TrialState:
        stage = curriculum_stage(plan.stage)
        instance = sample_instance(
            stage.template, self._instance_seed(session.param_index, plan.index)
        )
        table = precompute_observation_table(
            instance,
            session.tau_obs,
            OBS_PER_NODE,
            self._table_seed(session.param_index, plan.index),
        )
        trial = TrialState(
            plan=plan,
            template=stage.template,
            instance=instance,
            table=table,
            belief=init_belief(stage.template),
        )
        if plan.kind == "feedback":
            self._refresh_choice_set(session, trial)
        return trial

    def _refresh_choice_set(self, session: SessionRecord, trial: TrialState) -> None:
        rng = self._choice_rng(session, trial.plan.index, trial.clicks)
        voc_config = self._voc_config(session)
        if session.condition == "dummy_tutor":
            trial.choice_set = dummy_choice_set(
                trial.template, rng, trial.belief, voc_config
            )
        else:
            k = STAGE_CHOICES[trial.plan.stage]
            trial.choice_set = build_choice_set(trial.belief, voc_config, k, rng)

    # -- persistence ----------------------------------------------------

    def _log_path(self, session_id: str) -> FsPath:
        return self.data_dir / f"{session_id}.jsonl"

    def _append_log(self, session: SessionRecord, record: dict) -> None:
        with self._log_path(session.session_id).open("a") as fh:
            fh.write(json.dumps(record) + "\n")

    def _event(
        self, session: SessionRecord, trial: TrialState, kind: str, **payload
    ) -> dict:
        session.seq += 1
        event = {
            "seq": session.seq,
            "ts": time.time(),
            "trial": trial.plan.index,
            "type": kind,
            **payload,
        }
        trial.events.append(event)
        self._append_log(session, {"event": event})
        return event

    # -- session lifecycle -----------------------------------------------

    def create_session(self, condition: str) -> SessionRecord:
        if condition not in CONDITIONS:
            raise ServiceError(400, f"unknown condition {condition!r}")
        with self._create_lock:
            index = self._condition_counters[condition] % N_PARAMETER_SETS
            self._condition_counters[condition] += 1
            session_id = uuid.uuid4().hex
            lam, tau_obs = self.parameter_sets[index]
            session = SessionRecord(
                session_id=session_id,
                condition=condition,
                param_index=index,
                lam=lam,
                tau_obs=tau_obs,
                plan=curriculum_schedule(condition),
            )
            self.sessions[session_id] = session
        session.trials[0] = self._build_trial(session, session.plan[0])
        self._append_log(
            session,
            {
                "session": {
                    "session_id": session_id,
                    "condition": condition,
                    "param_index": index,
                    "lambda": lam,
                    "tau_obs": tau_obs,
                    "param_seed": self.config.param_seed,
                    "profile": self.config.profile,
                    "plan": [
                        {"index": p.index, "stage": p.stage, "kind": p.kind}
                        for p in session.plan
                    ],
                }
            },
        )
        return session

    def _session(self, session_id: str) -> SessionRecord:
        session = self.sessions.get(session_id)
        if session is None:
            raise ServiceError(404, f"unknown session {session_id!r}")
        return session

    def _current_trial(self, session: SessionRecord, k: int) -> TrialState:
        if not 0 <= k < len(session.plan):
            raise ServiceError(404, f"trial {k} out of range")
        if k != session.cursor:
            raise ServiceError(
                409, f"trial {k} is not current (cursor at {session.cursor})"
            )
        if session.status != "active":
            raise ServiceError(409, "session is complete")
        trial = session.trials.get(k)
        if trial is None:
            trial = self._build_trial(session, session.plan[k])
            session.trials[k] = trial
        return trial

    def _advance(self, session: SessionRecord) -> None:
        session.cursor += 1
        if session.cursor >= len(session.plan):
            session.status = "complete"
        else:
            session.trials[session.cursor] = self._build_trial(
                session, session.plan[session.cursor]
            )

    # -- views -------------------------------------------------------------

    def _posterior_view(self, trial: TrialState) -> dict:
        # Raw float values: JSON round-trips them exactly, which the
        # bit-exact replay check relies on.
        belief = trial.belief
        return {
            "means": [float(m) for m in belief.mu],
            "sds": [float(s) for s in belief.sds()],
            "obs_counts": [int(c) for c in belief.obs_count],
        }

    def _choice_set_view(self, cs: ChoiceSet | None) -> dict | None:
        if cs is None:
            return None
        return {
            "options": [o.node for o in cs.options],
            "correct": (
                "terminate" if cs.correct == TERMINATE else cs.correct.node
            ),
            "includes_terminate": cs.includes_terminate,
        }

    def session_view(self, session_id: str) -> dict:
        session = self._session(session_id)
        return {
            "session_id": session.session_id,
            "condition": session.condition,
            "param_index": session.param_index,
            "lambda": session.lam,
            "tau_obs": session.tau_obs,
            "cursor": session.cursor,
            "status": session.status,
            "profile": self.config.profile,
            "trial_plan": [
                {"index": p.index, "stage": p.stage, "kind": p.kind}
                for p in session.plan
            ],
        }

    def trial_view(self, session_id: str, k: int) -> dict:
        session = self._session(session_id)
        if not 0 <= k < len(session.plan):
            raise ServiceError(404, f"trial {k} out of range")
        if k > session.cursor:
            raise ServiceError(409, f"trial {k} has not started")
        trial = session.trials.get(k)
        if trial is None:
            trial = self._build_trial(session, session.plan[k])
            session.trials[k] = trial
        plan = session.plan[k]
        return {
            "index": plan.index,
            "stage": plan.stage,
            "kind": plan.kind,
            "env": template_to_json(trial.template),
            "lambda": session.lam,
            "tau_obs": session.tau_obs,
            "closed": trial.closed,
            "clicks": trial.clicks,
            "posterior": self._posterior_view(trial),
            "choice_set": self._choice_set_view(trial.choice_set),
            "events": trial.events,
            "path": trial.path,
            "rr": trial.rr,
        }

    # -- participant actions -----------------------------------------------

    def _cached(self, session: SessionRecord, event_id: str | None) -> dict | None:
        if event_id:
            return session.event_cache.get(event_id)
        return None

    def _cache(self, session: SessionRecord, event_id: str | None, resp: dict) -> dict:
        if event_id:
            session.event_cache[event_id] = resp
        return resp

    def post_click(
        self, session_id: str, k: int, node: int, event_id: str | None = None
    ) -> dict:
        session = self._session(session_id)
        with session.lock:
            cached = self._cached(session, event_id)
            if cached is not None:
                return cached
            trial = self._current_trial(session, k)
            if trial.plan.kind == "demo":
                raise ServiceError(409, "demo trials take no participant actions")
            if trial.closed:
                raise ServiceError(409, "trial already closed")
            if not trial.belief.is_inspectable(node):
                raise ServiceError(400, f"node {node} cannot be inspected")
            feedback_view = None
            if trial.plan.kind == "feedback":
                cs = trial.choice_set
                if cs is None or not cs.offered(Inspect(node)):
                    raise ServiceError(
                        400, f"node {node} is not among the offered choices"
                    )
                result = evaluate_click(
                    trial.belief,
                    Inspect(node),
                    cs,
                    self._voc_config(session),
                    self.config.feedback,
                    trial.voc_history,
                )
                feedback_view = {
                    "correct": result.correct,
                    "delay": result.delay,
                    "correct_option": self._choice_set_view(cs)["correct"],
                }

            rows = voc_table(trial.belief, self._voc_config(session))
            trial.voc_history.append(max(r.voc for r in rows))

            cursor = trial.obs_cursor.get(node, 0)
            if cursor >= OBS_PER_NODE:
                raise ServiceError(
                    409,
                    f"node {node} exhausted its {OBS_PER_NODE} precomputed observations",
                )
            value = float(trial.table[node][cursor])
            trial.obs_cursor[node] = cursor + 1
            trial.belief = update(
                trial.belief, Observation(node=node, value=value), session.tau_obs
            )
            trial.clicks += 1
            posterior_mean = float(trial.belief.mu[node])
            posterior_sd = trial.belief.sd(node)
            event_payload: dict[str, Any] = {
                "node": node,
                "obs_index": cursor,
                "value": value,
                "posterior_mean": posterior_mean,
                "posterior_sd": posterior_sd,
            }
            if event_id:
                event_payload["event_id"] = event_id
            if feedback_view is not None:
                event_payload["feedback"] = feedback_view
            self._event(session, trial, "click", **event_payload)
            if trial.plan.kind == "feedback":
                self._refresh_choice_set(session, trial)
            resp = {
                "node": node,
                "observation": value,
                "obs_index": cursor,
                "posterior_mean": posterior_mean,
                "posterior_sd": posterior_sd,
                "clicks": trial.clicks,
                "feedback": feedback_view,
                "choice_set": self._choice_set_view(trial.choice_set),
            }
            return self._cache(session, event_id, resp)

    def post_terminate(
        self, session_id: str, k: int, event_id: str | None = None
    ) -> dict:
        session = self._session(session_id)
        with session.lock:
            cached = self._cached(session, event_id)
            if cached is not None:
                return cached
            trial = self._current_trial(session, k)
            if trial.plan.kind == "demo":
                raise ServiceError(409, "demo trials take no participant actions")
            if trial.closed:
                raise ServiceError(409, "trial already closed")
            delay = 0.0
            executed = True
            correct = True
            if trial.plan.kind == "feedback":
                cs = trial.choice_set
                result = evaluate_click(
                    trial.belief,
                    TERMINATE,
                    cs,
                    self._voc_config(session),
                    self.config.feedback,
                    trial.voc_history,
                )
                executed = result.terminate_executed
                delay = result.delay
                correct = result.correct
            if not executed:
                event_payload = {"executed": False, "delay": delay}
                if event_id:
                    event_payload["event_id"] = event_id
                self._event(session, trial, "terminate", **event_payload)
                resp = {
                    "executed": False,
                    "delay": delay,
                    "correct": False,
                    "path": None,
                    "rr": None,
                    "choice_set": self._choice_set_view(trial.choice_set),
                }
                return self._cache(session, event_id, resp)

            path, expected = best_expected_path(trial.belief)
            rr = expected - session.lam * trial.clicks
            trial.closed = True
            trial.path = list(path)
            trial.rr = rr
            event_payload = {
                "executed": True,
                "delay": delay,
                "path": list(path),
                "rr": rr,
            }
            if event_id:
                event_payload["event_id"] = event_id
            self._event(session, trial, "terminate", **event_payload)
            self._event(session, trial, "move", path=list(path))
            self._advance(session)
            resp = {
                "executed": True,
                "delay": delay,
                "correct": correct,
                "path": list(path),
                "rr": rr,
            }
            return self._cache(session, event_id, resp)

    def get_demo(self, session_id: str, k: int) -> dict:
        session = self._session(session_id)
        with session.lock:
            trial = session.trials.get(k)
            if trial is not None and trial.demo_payload is not None:
                return trial.demo_payload
            trial = self._current_trial(session, k)
            if trial.plan.kind != "demo":
                raise ServiceError(409, f"trial {k} is not a demonstration trial")
            mode = "dummy" if session.condition == "dummy_tutor" else "mgpo"
            trace = generate_demo(
                trial.instance,
                self._voc_config(session),
                self._episode_config(session),
                self._demo_rng(session, k),
                mode=mode,
                obs_source_factory=lambda: TableObservationSource(trial.table),
            )
            steps = []
            belief = init_belief(trial.template)
            for node, value in trace.inspected_values():
                belief = update(
                    belief, Observation(node=node, value=value), session.tau_obs
                )
                steps.append(
                    {
                        "node": node,
                        "value": value,
                        "posterior_mean": float(belief.mu[node]),
                        "posterior_sd": belief.sd(node),
                    }
                )
                self._event(
                    session,
                    trial,
                    "demo_step",
                    node=node,
                    value=value,
                    posterior_mean=float(belief.mu[node]),
                    posterior_sd=belief.sd(node),
                )
            payload = {
                "mode": mode,
                "steps": steps,
                "path": list(trace.chosen_path),
                "rr": trace.rr,
                "length": trace.n_computations,
            }
            trial.demo_payload = payload
            trial.closed = True
            trial.path = list(trace.chosen_path)
            trial.rr = trace.rr
            self._event(
                session, trial, "demo_end", path=list(trace.chosen_path), rr=trace.rr
            )
            self._advance(session)
            return payload

    # -- export and metrics ---------------------------------------------

    def _trace_from_trial(self, session: SessionRecord, trial: TrialState) -> EpisodeTrace:
        """Rebuild a scored episode trace from a trial's click events."""
        config = EpisodeConfig(
            cost=session.lam,
            tau_obs=session.tau_obs,
            max_computations=max(200, trial.clicks + 1),
            score_mode="posterior",
        )
        belief = init_belief(trial.template)
        records: list[StepRecord] = []
        for event in trial.events:
            if event["type"] != "click":
                continue
            obs = Observation(node=event["node"], value=event["value"])
            records.append(
                StepRecord(
                    belief_before=belief,
                    action=Inspect(obs.node),
                    observation=obs,
                    meta_reward=-session.lam,
                )
            )
            belief = update(belief, obs, session.tau_obs)
        path, _ = best_expected_path(belief)
        records.append(
            StepRecord(
                belief_before=belief,
                action=TERMINATE,
                observation=None,
                meta_reward=trial.instance.path_truth_sum(path),
            )
        )
        rr = trial.rr if trial.rr is not None else 0.0
        return EpisodeTrace(
            records=tuple(records),
            final_belief=belief,
            chosen_path=path,
            rr=rr,
            config=config,
            instance=trial.instance,
        )

    def export_session(self, session_id: str) -> dict:
        from .harness import (
            balanced_accuracy,
            click_matches,
            repeat_matches,
            termination_confusion,
        )

        session = self._session(session_id)
        with session.lock:
            reference = MgpoPolicy(self._voc_config(session))
            trials_out = []
            per_trial_metrics = []
            goal_flags = []
            pooled_clicks = [0, 0]
            pooled_repeats = [0, 0]
            pooled_confusion = [0, 0, 0, 0]
            for plan in session.plan:
                trial = session.trials.get(plan.index)
                if trial is None:
                    continue
                entry = {
                    "index": plan.index,
                    "stage": plan.stage,
                    "kind": plan.kind,
                    "env": trial.template.name,
                    "instance_seed": trial.instance.seed,
                    "events": trial.events,
                    "path": trial.path,
                    "rr": trial.rr,
                    "clicks": trial.clicks,
                }
                if plan.kind != "demo" and trial.closed:
                    trace = self._trace_from_trial(session, trial)
                    metrics = {
                        "click_agreement": click_agreement(trace, reference),
                        "termination_agreement": termination_agreement(trace, reference),
                        "repeat_agreement": repeat_agreement(trace, reference),
                    }
                    if plan.kind == "test":
                        flag = goal_planning_detect(trace, trial.template)
                        metrics["goal_planning"] = flag
                        goal_flags.append(flag)
                        per_trial_metrics.append(metrics)
                        for acc, new in (
                            (pooled_clicks, click_matches(trace, reference)),
                            (pooled_repeats, repeat_matches(trace, reference)),
                        ):
                            acc[0] += new[0]
                            acc[1] += new[1]
                        for i, c in enumerate(termination_confusion(trace, reference)):
                            pooled_confusion[i] += c
                    entry["metrics"] = metrics
                trials_out.append(entry)
            aggregate = {}
            pooled = {}
            if per_trial_metrics:
                # per-trial means over the test trials, plus action-level
                # pooled versions of the same quantities
                for key in ("click_agreement", "termination_agreement", "repeat_agreement"):
                    aggregate[key] = float(
                        np.mean([m[key] for m in per_trial_metrics])
                    )
                aggregate["goal_planning_rate"] = float(np.mean(goal_flags))
                aggregate["learned_goal_planning"] = learned_goal_planning(goal_flags)
                pooled = {
                    "click_agreement": (
                        pooled_clicks[0] / pooled_clicks[1] if pooled_clicks[1] else 1.0
                    ),
                    "termination_agreement": balanced_accuracy(*pooled_confusion),
                    "repeat_agreement": (
                        pooled_repeats[0] / pooled_repeats[1]
                        if pooled_repeats[1]
                        else 1.0
                    ),
                }
            return {
                "session": self.session_view(session_id),
                "trials": trials_out,
                "metrics": {
                    "per_test_trial": per_trial_metrics,
                    "aggregate": aggregate,
                    "pooled": pooled,
                },
            }


def verify_export_replay(export: dict) -> list[str]:
    """Replay every logged observation through the belief module and
    compare against the recorded posteriors bit-for-bit."""
    problems: list[str] = []
    tau_obs = export["session"]["tau_obs"]
    lam = export["session"]["lambda"]
    for trial in export["trials"]:
        stage = trial["stage"]
        template = curriculum_stage(stage).template
        belief = init_belief(template)
        clicks = 0
        for event in trial["events"]:
            if event["type"] in ("click", "demo_step"):
                belief = update(
                    belief,
                    Observation(node=event["node"], value=event["value"]),
                    tau_obs,
                )
                if event["type"] == "click":
                    clicks += 1
                replayed = float(belief.mu[event["node"]])
                if replayed != event["posterior_mean"]:
                    problems.append(
                        f"trial {trial['index']} node {event['node']}: "
                        f"mean {event['posterior_mean']!r} != replayed {replayed!r}"
                    )
        if trial.get("path") is not None and trial["kind"] != "demo":
            path, expected = best_expected_path(belief)
            if list(path) != list(trial["path"]):
                problems.append(f"trial {trial['index']}: path mismatch")
            rr = expected - lam * clicks
            if trial.get("rr") is not None and rr != trial["rr"]:
                problems.append(
                    f"trial {trial['index']}: rr {trial['rr']!r} != replayed {rr!r}"
                )
    return problems


# ---------------------------------------------------------------------------
# FastAPI wiring

from pydantic import BaseModel


class CreateSession(BaseModel):
    condition: str


class ClickBody(BaseModel):
    node: int
    event_id: str | None = None


class TerminateBody(BaseModel):
    event_id: str | None = None


def create_app(config: ServiceConfig | None = None):
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse

    service = TutorService(config or ServiceConfig())
    app = FastAPI(title="metaplan tutor service")
    app.state.service = service

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content={"detail": exc.detail})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSession):
        session = service.create_session(body.condition)
        return service.session_view(session.session_id)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return service.session_view(session_id)

    @app.get("/sessions/{session_id}/trials/{k}")
    def get_trial(session_id: str, k: int):
        return service.trial_view(session_id, k)

    @app.post("/sessions/{session_id}/trials/{k}/click")
    def post_click(session_id: str, k: int, body: ClickBody):
        return service.post_click(session_id, k, body.node, body.event_id)

    @app.post("/sessions/{session_id}/trials/{k}/terminate")
    def post_terminate(session_id: str, k: int, body: TerminateBody):
        return service.post_terminate(session_id, k, body.event_id)

    @app.get("/sessions/{session_id}/trials/{k}/demo")
    def get_demo(session_id: str, k: int):
        return service.get_demo(session_id, k)

    @app.get("/sessions/{session_id}/export")
    def export_session(session_id: str):
        return service.export_session(session_id)

    return app
