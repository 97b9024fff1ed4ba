"""MGPO: greedy policy over a closed-form myopic value of computation.

For a candidate node the myopic VOC asks how likely the next noisy
observation is to change the expected-best path and how much the switch
would be worth. With ``r_i`` the best path value through the node and
``r_alt`` the best value avoiding it, the observation must cross

    t = (1 + tau_i / tau_obs) * (r_alt - r_i) + mu_i

to flip the ranking. The predictive spread of the next observation is
``sigma_obs = sqrt(1/tau_obs + 1/tau_i)`` (in legacy mode only the
observation noise, ``1/sqrt(tau_obs)``, is used). The crossing
probability comes from the Normal CDF and the conditional observation
value from the matching truncated-Normal mean; combining them gives the
expected improvement of re-deciding after the observation, discounted
against the (weighted) computation cost:

    voc = (1 - w_cost) * p_change * gain - w_cost * cost     (standard)
    voc = p_change * gain - cost                             (legacy)

The policy inspects the highest-VOC node while that value is positive
and terminates otherwise.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .belief import BeliefState, mills_ratio, norm_cdf, norm_sf
from .envgraph import EnvTemplate, path_index
from .metamdp import (
    TERMINATE,
    EpisodeConfig,
    MetaAction,
    Inspect,
    precompute_observation_table,
    run_episode,
    TableObservationSource,
)

NEG_INF = float("-inf")


@dataclass(frozen=True)
class VocConfig:
    cost: float
    tau_obs: float
    w_cost: float = 0.5
    legacy_mode: bool = False
    p_floor: float = 1e-12

    def __post_init__(self) -> None:
        if not 0.0 <= self.w_cost <= 1.0:
            raise ValueError("w_cost must lie in [0, 1]")
        if self.cost < 0:
            raise ValueError("cost must be non-negative")
        if not self.tau_obs > 0:
            raise ValueError("tau_obs must be positive")


@dataclass(frozen=True)
class VocBreakdown:
    node: int
    r_max: float
    r_i: float
    r_alt: float
    threshold: float
    sigma_obs: float
    p_change: float
    o_change: float
    mu_prime: float
    voc_pre_cost: float
    voc: float
    bottleneck: bool = False


def path_stats(belief: BeliefState, node: int) -> tuple[float, float, float]:
    """(r_max, r_i, r_alt): best expected path values overall, through the
    node, and avoiding the node. r_alt is -inf when every path crosses
    the node."""
    if not belief.is_inspectable(node):
        raise ValueError(f"node {node} is not inspectable")
    index = path_index(belief.template)
    values = index.path_values(belief.mu)
    mask = index.through[node]
    r_i = float(values[mask].max())
    r_alt = float(values[~mask].max()) if index.has_alt[node] else NEG_INF
    return max(r_i, r_alt), r_i, r_alt


def _voc_from_stats(
    node: int,
    mu_i: float,
    tau_i: float,
    r_i: float,
    r_alt: float,
    config: VocConfig,
) -> VocBreakdown:
    tau_obs = config.tau_obs
    if config.legacy_mode:
        sigma_obs = 1.0 / math.sqrt(tau_obs)
    else:
        sigma_obs = math.sqrt(1.0 / tau_obs + 1.0 / tau_i)

    def finish(threshold, p_change, o_change, mu_prime, pre_cost, bottleneck=False):
        if config.legacy_mode:
            voc = pre_cost - config.cost
        else:
            voc = (1.0 - config.w_cost) * pre_cost - config.w_cost * config.cost
        return VocBreakdown(
            node=node,
            r_max=max(r_i, r_alt),
            r_i=r_i,
            r_alt=r_alt,
            threshold=threshold,
            sigma_obs=sigma_obs,
            p_change=p_change,
            o_change=o_change,
            mu_prime=mu_prime,
            voc_pre_cost=pre_cost,
            voc=voc,
            bottleneck=bottleneck,
        )

    if r_alt == NEG_INF:
        # Node on every path: no observation can change the chosen path.
        return finish(NEG_INF, 0.0, math.nan, math.nan, 0.0, bottleneck=True)

    threshold = (1.0 + tau_i / tau_obs) * (r_alt - r_i) + mu_i
    z = (threshold - mu_i) / sigma_obs
    shrink = tau_obs / (tau_i + tau_obs)
    if r_i > r_alt:
        # Node on the expected-best path; a low enough observation
        # makes the alternative path win.
        p_change = norm_cdf(z)
        if p_change < config.p_floor:
            return finish(threshold, p_change, math.nan, math.nan, 0.0)
        o_change = mu_i - sigma_obs * mills_ratio(-z)
        mu_prime = mu_i + shrink * (o_change - mu_i)
        pre_cost = p_change * (r_alt - r_i + mu_i - mu_prime)
    else:
        # Node off the expected-best path; a high enough observation
        # promotes a path through it.
        p_change = norm_sf(z)
        if p_change < config.p_floor:
            return finish(threshold, p_change, math.nan, math.nan, 0.0)
        o_change = mu_i + sigma_obs * mills_ratio(z)
        mu_prime = mu_i + shrink * (o_change - mu_i)
        pre_cost = p_change * (r_i - r_alt - mu_i + mu_prime)
    return finish(threshold, p_change, o_change, mu_prime, max(pre_cost, 0.0))


def myopic_voc(
    node: int, belief: BeliefState, config: VocConfig
) -> VocBreakdown:
    """Closed-form myopic VOC of inspecting one node."""
    _, r_i, r_alt = path_stats(belief, node)
    return _voc_from_stats(
        node, float(belief.mu[node]), float(belief.tau[node]), r_i, r_alt, config
    )


def voc_table(belief: BeliefState, config: VocConfig) -> list[VocBreakdown]:
    """VOC breakdown for every inspectable node, ascending node id."""
    index = path_index(belief.template)
    values = index.path_values(belief.mu)
    masked = np.where(index.through, values[None, :], NEG_INF)
    r_i_all = masked.max(axis=1)
    anti = np.where(index.through, NEG_INF, values[None, :])
    r_alt_all = anti.max(axis=1)
    out = []
    for node in belief.inspectable():
        r_alt = float(r_alt_all[node]) if index.has_alt[node] else NEG_INF
        out.append(
            _voc_from_stats(
                node,
                float(belief.mu[node]),
                float(belief.tau[node]),
                float(r_i_all[node]),
                r_alt,
                config,
            )
        )
    return out


def select_computation(belief: BeliefState, config: VocConfig) -> MetaAction:
    """Inspect the highest-VOC node while the maximum VOC is positive;
    otherwise terminate. Ties go to the lowest node id."""
    best: VocBreakdown | None = None
    for row in voc_table(belief, config):
        if best is None or row.voc > best.voc:
            best = row
    if best is None or best.voc <= 0.0:
        return TERMINATE
    return Inspect(best.node)


def max_voc(belief: BeliefState, config: VocConfig) -> float:
    """Highest myopic VOC over all inspectable nodes (-inf if none)."""
    rows = voc_table(belief, config)
    return max((r.voc for r in rows), default=NEG_INF)


class MgpoPolicy:
    """Stateless decision function wrapping ``select_computation``."""

    def __init__(self, config: VocConfig):
        self.config = config

    def __call__(self, belief: BeliefState) -> MetaAction:
        return select_computation(belief, self.config)


def voc_table_csv(rows: list[VocBreakdown]) -> str:
    """Per-decision diagnostic table."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["node", "r_max", "r_i", "r_alt", "t", "p_change", "o_change", "mu_prime", "voc"]
    )
    for r in rows:
        writer.writerow(
            [
                r.node,
                f"{r.r_max:.6f}",
                f"{r.r_i:.6f}",
                f"{r.r_alt:.6f}",
                f"{r.threshold:.6f}",
                f"{r.p_change:.9f}",
                f"{r.o_change:.6f}",
                f"{r.mu_prime:.6f}",
                f"{r.voc:.9f}",
            ]
        )
    return buf.getvalue()


def _evaluate_w(
    w: float,
    template: EnvTemplate,
    base_config: VocConfig,
    tables: list,
    instances: list,
) -> float:
    from dataclasses import replace

    policy = MgpoPolicy(replace(base_config, w_cost=w))
    episode = EpisodeConfig(cost=base_config.cost, tau_obs=base_config.tau_obs)
    total = 0.0
    for instance, table in zip(instances, tables):
        trace = run_episode(policy, instance, episode, TableObservationSource(table))
        total += trace.rr
    return total / len(instances)


class _Gp1d:
    """Minimal fixed-hyperparameter RBF Gaussian process on [0, 1]."""

    def __init__(self, length_scale: float = 0.15, noise: float = 1e-6):
        self.length_scale = length_scale
        self.noise = noise

    def fit(self, x: np.ndarray, y: np.ndarray) -> None:
        self.x = x
        self.y_mean = float(y.mean())
        self.y_scale = float(y.std()) or 1.0
        self.y = (y - self.y_mean) / self.y_scale
        k = self._kernel(x[:, None], x[None, :])
        k[np.diag_indices_from(k)] += self.noise
        self.chol = np.linalg.cholesky(k)
        self.alpha = np.linalg.solve(
            self.chol.T, np.linalg.solve(self.chol, self.y)
        )

    def _kernel(self, a, b):
        return np.exp(-0.5 * ((a - b) / self.length_scale) ** 2)

    def predict(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ks = self._kernel(x[:, None], self.x[None, :])
        mean = ks @ self.alpha
        v = np.linalg.solve(self.chol, ks.T)
        var = np.clip(1.0 - np.einsum("ij,ij->j", v, v), 1e-12, None)
        return (
            mean * self.y_scale + self.y_mean,
            np.sqrt(var) * self.y_scale,
        )


def _expected_improvement(mean, sd, best):
    from scipy.special import ndtr

    z = (mean - best) / sd
    pdf = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    return (mean - best) * ndtr(z) + sd * pdf


def tune_cost_weight(
    template: EnvTemplate,
    base_config: VocConfig,
    budget: int = 50,
    n_eval_instances: int = 100,
    seed: int = 0,
) -> float:
    """Sequential model-based search for the cost weight on [0, 1].

    The objective (mean ground-truth score over a fixed set of instances
    with shared precomputed observation draws) is evaluated at a small
    initial design and then at expected-improvement maximizers of a GP
    surrogate. Returns the best probed weight.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    from .envgraph import sample_instance

    rng = np.random.default_rng(seed)
    instances = [
        sample_instance(template, int(rng.integers(2**62)))
        for _ in range(n_eval_instances)
    ]
    tables = [
        precompute_observation_table(
            inst, base_config.tau_obs, 200, int(rng.integers(2**62))
        )
        for inst in instances
    ]

    initial = [0.5, 0.25, 0.75, 0.1, 0.9]
    probes: list[float] = []
    scores: list[float] = []

    def probe(w: float) -> None:
        probes.append(w)
        scores.append(_evaluate_w(w, template, base_config, tables, instances))

    for w in initial[:budget]:
        probe(w)

    grid = np.linspace(0.0, 1.0, 1001)
    gp = _Gp1d()
    while len(probes) < budget:
        gp.fit(np.array(probes), np.array(scores))
        mean, sd = gp.predict(grid)
        ei = _expected_improvement(mean, sd, max(scores))
        # Never re-probe an existing point; the objective is deterministic.
        for w in probes:
            ei[np.abs(grid - w) < 1e-9] = -1.0
        probe(float(grid[int(np.argmax(ei))]))

    return probes[int(np.argmax(scores))]
