import numpy as np
import pytest

from metaplan.envgraph import EnvInstance, EnvTemplate, NodeSpec, validate_template


def make_template(name, node_specs, edges, goals):
    """node_specs: list of (mean, sigma) tuples, ids assigned in order."""
    t = EnvTemplate(
        name=name,
        nodes=tuple(
            NodeSpec(id=i, mean=float(m), sigma=float(s))
            for i, (m, s) in enumerate(node_specs)
        ),
        edges=tuple((a, b) for a, b in edges),
        start=0,
        goals=frozenset(goals),
    )
    validate_template(t)
    return t


def force_instance(template, truths):
    arr = np.asarray(truths, dtype=float)
    arr.flags.writeable = False
    return EnvInstance(template=template, truths=arr, seed=-1)


@pytest.fixture
def chain3():
    return make_template(
        "chain3", [(0, 0), (1.0, 5.0), (0.0, 10.0)], [(0, 1), (1, 2)], [2]
    )


@pytest.fixture
def diamond():
    # Two routes through nodes 1 and 2 to a known goal.
    return make_template(
        "diamond",
        [(0, 0), (5.0, 10.0), (2.0, 10.0), (0.0, 0.0)],
        [(0, 1), (0, 2), (1, 3), (2, 3)],
        [3],
    )


@pytest.fixture
def diamond_zero():
    # Same shape, all-zero means (tie between the two paths).
    return make_template(
        "diamond_zero",
        [(0, 0), (0.0, 10.0), (0.0, 10.0), (0.0, 0.0)],
        [(0, 1), (0, 2), (1, 3), (2, 3)],
        [3],
    )
