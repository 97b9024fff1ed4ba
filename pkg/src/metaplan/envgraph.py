"""Object-level planning environments: DAGs with Gaussian per-node rewards.

An environment template is a directed acyclic graph with one start node
(always id 0), a set of terminal goal nodes, and an independent Normal
reward prior ``N(mean_i, sigma_i)`` per node. An instance fixes one
ground-truth reward draw. Templates and instances are immutable values;
all derived structure (children, paths, node/path incidence) is cached
per template.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping

import numpy as np

Path = tuple[int, ...]

BENCHMARK_GOAL_COUNTS = (2, 3, 4, 5)
CURRICULUM_STAGES = (1, 2, 3, 4)


class EnvError(ValueError):
    """Raised for malformed or inconsistent environment documents."""


@dataclass(frozen=True)
class NodeSpec:
    id: int
    mean: float
    sigma: float


@dataclass(frozen=True)
class EnvTemplate:
    """Immutable planning-environment description.

    ``layout`` is optional display metadata (per-node x/y coordinates);
    it plays no role in any computation.
    """

    name: str
    nodes: tuple[NodeSpec, ...]
    edges: tuple[tuple[int, int], ...]
    start: int
    goals: frozenset[int]
    layout: tuple[tuple[float, float], ...] | None = field(default=None, compare=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def means(self) -> np.ndarray:
        return np.array([n.mean for n in self.nodes], dtype=float)

    def sigmas(self) -> np.ndarray:
        return np.array([n.sigma for n in self.nodes], dtype=float)

    def inspectable_nodes(self) -> tuple[int, ...]:
        """Node ids that may be targeted by a planning computation.

        The start node and any node with a zero-sigma prior (reward known
        exactly) are excluded.
        """
        return tuple(
            n.id for n in self.nodes if n.id != self.start and n.sigma > 0.0
        )


@dataclass(frozen=True, eq=False)
class EnvInstance:
    """A template plus one sampled ground-truth reward per node."""

    template: EnvTemplate
    truths: np.ndarray
    seed: int

    def truth_of(self, node: int) -> float:
        return float(self.truths[node])

    def path_truth_sum(self, path: Iterable[int]) -> float:
        return float(sum(self.truths[i] for i in path))


def _children_map(edges: Iterable[tuple[int, int]], n: int) -> list[list[int]]:
    children: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        children[a].append(b)
    for c in children:
        c.sort()
    return children


def validate_template(t: EnvTemplate) -> None:
    """Check all structural invariants, raising EnvError with a location."""
    n = len(t.nodes)
    seen: set[int] = set()
    for spec in t.nodes:
        if spec.id in seen:
            raise EnvError(f"duplicate node id {spec.id}")
        seen.add(spec.id)
        if spec.sigma < 0:
            raise EnvError(f"node {spec.id}: negative sigma {spec.sigma}")
    if seen != set(range(n)):
        raise EnvError(f"node ids are not dense in [0, {n}): got {sorted(seen)}")
    if t.start != 0:
        raise EnvError(f"start node must be id 0, got {t.start}")
    by_id = {s.id: s for s in t.nodes}
    start = by_id[t.start]
    if start.sigma != 0.0 or start.mean != 0.0:
        raise EnvError("start node must have mean 0 and sigma 0")
    if not t.goals:
        raise EnvError("template declares no goal nodes")
    for g in t.goals:
        if g not in by_id:
            raise EnvError(f"goal id {g} is not a node")
        if g == t.start:
            raise EnvError("start node cannot be a goal")
    for a, b in t.edges:
        if a not in by_id or b not in by_id:
            raise EnvError(f"edge ({a}, {b}) references an unknown node")
    if len(set(t.edges)) != len(t.edges):
        dupes = sorted({e for e in t.edges if t.edges.count(e) > 1})
        raise EnvError(f"duplicate edges {dupes}")

    children = _children_map(t.edges, n)

    # Cycle check via iterative DFS coloring; report one offending edge.
    color = [0] * n  # 0 unvisited, 1 on stack, 2 done
    for root in range(n):
        if color[root]:
            continue
        stack: list[tuple[int, int]] = [(root, 0)]
        color[root] = 1
        while stack:
            node, idx = stack[-1]
            if idx < len(children[node]):
                stack[-1] = (node, idx + 1)
                child = children[node][idx]
                if color[child] == 1:
                    raise EnvError(f"cycle detected through edge ({node}, {child})")
                if color[child] == 0:
                    color[child] = 1
                    stack.append((child, 0))
            else:
                color[node] = 2
                stack.pop()

    for a, b in t.edges:
        if a in t.goals:
            raise EnvError(f"goal node {a} has outgoing edge ({a}, {b})")
        if b == t.start:
            raise EnvError(f"edge ({a}, {b}) enters the start node")

    # Reachability from start.
    reach = {t.start}
    frontier = [t.start]
    while frontier:
        node = frontier.pop()
        for child in children[node]:
            if child not in reach:
                reach.add(child)
                frontier.append(child)
    for g in sorted(t.goals):
        if g not in reach:
            raise EnvError(f"goal {g} unreachable from start")
    unreachable = sorted(set(range(n)) - reach)
    if unreachable:
        raise EnvError(f"nodes unreachable from start: {unreachable}")

    # Every node must be able to reach a goal, otherwise it sits on no path
    # and no operation over paths is defined for it.
    parents: list[list[int]] = [[] for _ in range(n)]
    for a, b in t.edges:
        parents[b].append(a)
    co_reach = set(t.goals)
    frontier = list(t.goals)
    while frontier:
        node = frontier.pop()
        for parent in parents[node]:
            if parent not in co_reach:
                co_reach.add(parent)
                frontier.append(parent)
    dead = sorted(set(range(n)) - co_reach)
    if dead:
        raise EnvError(f"nodes cannot reach any goal: {dead}")


def _template_from_mapping(doc: Mapping, name: str) -> EnvTemplate:
    try:
        nodes = tuple(
            NodeSpec(id=int(n["id"]), mean=float(n["mean"]), sigma=float(n["sigma"]))
            for n in doc["nodes"]
        )
        edges = tuple((int(a), int(b)) for a, b in doc["edges"])
        start = int(doc["start"])
        goals = frozenset(int(g) for g in doc["goals"])
    except (KeyError, TypeError, ValueError) as exc:
        raise EnvError(f"malformed environment document: {exc}") from exc
    layout = None
    if "layout" in doc:
        layout = tuple((float(x), float(y)) for x, y in doc["layout"])
        if len(layout) != len(nodes):
            raise EnvError("layout length does not match node count")
    t = EnvTemplate(
        name=str(doc.get("name", name)),
        nodes=nodes,
        edges=edges,
        start=start,
        goals=goals,
        layout=layout,
    )
    validate_template(t)
    return t


def load_template(source: str | bytes | Mapping, name: str = "env") -> EnvTemplate:
    """Parse and validate an environment document (JSON text or mapping)."""
    if isinstance(source, Mapping):
        doc = source
    else:
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise EnvError(f"not valid JSON: {exc}") from exc
        if not isinstance(doc, Mapping):
            raise EnvError("top-level JSON value must be an object")
    return _template_from_mapping(doc, name)


def template_to_json(t: EnvTemplate) -> dict:
    doc = {
        "name": t.name,
        "nodes": [{"id": n.id, "mean": n.mean, "sigma": n.sigma} for n in t.nodes],
        "edges": [list(e) for e in t.edges],
        "start": t.start,
        "goals": sorted(t.goals),
    }
    if t.layout is not None:
        doc["layout"] = [list(xy) for xy in t.layout]
    return doc


@lru_cache(maxsize=None)
def enumerate_paths(template: EnvTemplate) -> tuple[Path, ...]:
    """All start-to-goal paths in lexicographic node-id order."""
    children = _children_map(template.edges, template.n_nodes)
    paths: list[Path] = []
    stack: list[int] = [template.start]

    def walk(node: int) -> None:
        if node in template.goals:
            paths.append(tuple(stack))
            return
        for child in children[node]:
            stack.append(child)
            walk(child)
            stack.pop()

    walk(template.start)
    return tuple(paths)


@dataclass(frozen=True, eq=False)
class PathIndex:
    """Cached path-incidence structure for fast per-node path maxima."""

    paths: tuple[Path, ...]
    matrix: np.ndarray  # (P, N) float 0/1 incidence
    through: np.ndarray  # (N, P) bool, through[i, p] = node i on path p
    has_alt: np.ndarray  # (N,) bool, some path avoids node i

    def path_values(self, mu: np.ndarray) -> np.ndarray:
        return self.matrix @ mu


@lru_cache(maxsize=None)
def path_index(template: EnvTemplate) -> PathIndex:
    paths = enumerate_paths(template)
    n, p = template.n_nodes, len(paths)
    matrix = np.zeros((p, n))
    for row, path in enumerate(paths):
        matrix[row, list(path)] = 1.0
    through = matrix.T.astype(bool)
    has_alt = ~through.all(axis=1)
    matrix.flags.writeable = False
    through.flags.writeable = False
    has_alt.flags.writeable = False
    return PathIndex(paths=paths, matrix=matrix, through=through, has_alt=has_alt)


def sample_instance(template: EnvTemplate, seed: int) -> EnvInstance:
    """Draw one ground truth per node, t_i ~ N(mean_i, sigma_i)."""
    rng = np.random.default_rng(seed)
    truths = template.means() + template.sigmas() * rng.standard_normal(
        template.n_nodes
    )
    truths.flags.writeable = False
    return EnvInstance(template=template, truths=truths, seed=seed)


@lru_cache(maxsize=None)
def _load_packaged(filename: str) -> EnvTemplate:
    data = resources.files("metaplan").joinpath("env", filename).read_text()
    return load_template(data, name=filename.removesuffix(".json"))


def builtin_benchmark(goal_count: int) -> EnvTemplate:
    """Shipped benchmark environment with ``goal_count`` 18-node blocks."""
    if goal_count not in BENCHMARK_GOAL_COUNTS:
        raise ValueError(f"goal_count must be in {BENCHMARK_GOAL_COUNTS}")
    return _load_packaged(f"bench_g{goal_count}.json")


def builtin_curriculum(stage: int) -> EnvTemplate:
    """Shipped training environment for curriculum stage 1..4."""
    if stage not in CURRICULUM_STAGES:
        raise ValueError(f"stage must be in {CURRICULUM_STAGES}")
    return _load_packaged(f"curriculum_{stage}.json")


def node_depths(template: EnvTemplate) -> tuple[int, ...]:
    """Shortest edge-distance from the start node, per node."""
    children = _children_map(template.edges, template.n_nodes)
    depth = [-1] * template.n_nodes
    depth[template.start] = 0
    frontier = [template.start]
    while frontier:
        nxt: list[int] = []
        for node in frontier:
            for child in children[node]:
                if depth[child] < 0:
                    depth[child] = depth[node] + 1
                    nxt.append(child)
        frontier = nxt
    return tuple(depth)
