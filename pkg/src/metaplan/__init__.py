"""Resource-rational planning strategy discovery and tutoring toolkit."""

from .envgraph import (
    EnvError,
    EnvInstance,
    EnvTemplate,
    builtin_benchmark,
    builtin_curriculum,
    enumerate_paths,
    load_template,
    sample_instance,
)
from .belief import BeliefState, Observation, best_expected_path, init_belief, update
from .metamdp import (
    TERMINATE,
    EpisodeConfig,
    EpisodeTrace,
    Inspect,
    Terminate,
    rr_score,
    run_episode,
    step,
)
from .mgpo import MgpoPolicy, VocConfig, myopic_voc, select_computation, tune_cost_weight

__all__ = [
    "EnvError",
    "EnvInstance",
    "EnvTemplate",
    "builtin_benchmark",
    "builtin_curriculum",
    "enumerate_paths",
    "load_template",
    "sample_instance",
    "BeliefState",
    "Observation",
    "best_expected_path",
    "init_belief",
    "update",
    "TERMINATE",
    "EpisodeConfig",
    "EpisodeTrace",
    "Inspect",
    "Terminate",
    "rr_score",
    "run_episode",
    "step",
    "MgpoPolicy",
    "VocConfig",
    "myopic_voc",
    "select_computation",
    "tune_cost_weight",
]
