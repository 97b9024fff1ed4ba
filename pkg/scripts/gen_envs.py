"""Regenerate the shipped environment data files.

Benchmark environments: 2..5 blocks of 18 nodes hanging off a shared
start node. Each block is a layered sub-DAG (3 early layers, a
bottleneck, 2 late layers, a goal) whose reward sigmas increase with
depth through the tiers 5 / 10 / 20 / 40; the goals of the first two
blocks carry the extra-high sigmas 100 and 120.

Curriculum environments: the four training stages (8, 16, 30, 60 nodes)
with the three-tier sigma structure 5 / 10 / 20 where the goals are the
only highest-variance nodes and every path to a goal crosses that goal's
unique bottleneck.

Layouts are layered coordinates for display only.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from metaplan.envgraph import load_template, node_depths, template_to_json

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "metaplan" / "env"


class Builder:
    def __init__(self, name: str):
        self.name = name
        self.nodes = [{"id": 0, "mean": 0.0, "sigma": 0.0}]
        self.edges: list[list[int]] = []
        self.goals: list[int] = []

    def layer(self, count: int, sigma: float) -> list[int]:
        ids = []
        for _ in range(count):
            nid = len(self.nodes)
            self.nodes.append({"id": nid, "mean": 0.0, "sigma": sigma})
            ids.append(nid)
        return ids

    def connect(self, src: list[int], dst: list[int], fanout: int | None = None):
        """Edges src -> dst; dense when fanout is None, else a ring of width fanout."""
        if fanout is None:
            for a in src:
                for b in dst:
                    self.edges.append([a, b])
        else:
            for k, a in enumerate(src):
                for off in range(fanout):
                    self.edges.append([a, dst[(k + off) % len(dst)]])

    def doc(self) -> dict:
        return {
            "name": self.name,
            "nodes": self.nodes,
            "edges": self.edges,
            "start": 0,
            "goals": self.goals,
        }


def benchmark(goal_count: int) -> dict:
    b = Builder(f"bench_g{goal_count}")
    goal_sigmas = {0: 100.0, 1: 120.0}
    for block in range(goal_count):
        e1 = b.layer(3, 5.0)
        e2 = b.layer(3, 5.0)
        e3 = b.layer(3, 10.0)
        mid = b.layer(1, 20.0)
        l1 = b.layer(3, 20.0)
        l2 = b.layer(4, 40.0)
        goal = b.layer(1, goal_sigmas.get(block, 40.0))
        b.connect([0], e1)
        b.connect(e1, e2)
        b.connect(e2, e3)
        b.connect(e3, mid)
        b.connect(mid, l1)
        b.connect(l1, l2)
        b.connect(l2, goal)
        b.goals.append(goal[0])
    return b.doc()


def curriculum_1() -> dict:
    b = Builder("curriculum_1")
    a = b.layer(2, 5.0)
    mid = b.layer(2, 10.0)
    late = b.layer(2, 10.0)
    goal = b.layer(1, 20.0)
    b.connect([0], a)
    b.connect(a, mid)
    b.connect(mid, late)
    b.connect(late, goal)
    b.goals.append(goal[0])
    return b.doc()


def curriculum_2() -> dict:
    b = Builder("curriculum_2")
    a = b.layer(3, 5.0)
    b.connect([0], a)
    for _ in range(2):
        mid = b.layer(3, 10.0)
        late = b.layer(2, 10.0)
        goal = b.layer(1, 20.0)
        b.connect(a, mid, fanout=1)
        b.connect(mid, late)
        b.connect(late, goal)
        b.goals.append(goal[0])
    return b.doc()


def curriculum_3() -> dict:
    b = Builder("curriculum_3")
    a = b.layer(5, 5.0)
    b.connect([0], a)
    for _ in range(2):
        near = b.layer(3, 5.0)
        sub = b.layer(1, 10.0)
        mid = b.layer(3, 10.0)
        late = b.layer(4, 10.0)
        goal = b.layer(1, 20.0)
        b.connect(a, near, fanout=1)
        b.connect(near, sub)
        b.connect(sub, mid)
        b.connect(mid, late, fanout=2)
        b.connect(late, goal)
        b.goals.append(goal[0])
    return b.doc()


def curriculum_4() -> dict:
    b = Builder("exp60")
    a = b.layer(5, 5.0)
    b.connect([0], a)
    for _ in range(3):
        near = b.layer(3, 5.0)
        mid_near = b.layer(3, 5.0)
        sub = b.layer(1, 5.0)
        i1 = b.layer(3, 10.0)
        i2 = b.layer(3, 10.0)
        far = b.layer(4, 10.0)
        goal = b.layer(1, 20.0)
        b.connect(a, near, fanout=1)
        b.connect(near, mid_near, fanout=2)
        b.connect(mid_near, sub)
        b.connect(sub, i1)
        b.connect(i1, i2, fanout=2)
        b.connect(i2, far, fanout=2)
        b.connect(far, goal)
        b.goals.append(goal[0])
    return b.doc()


def add_layout(doc: dict) -> dict:
    t = load_template(doc)
    depths = node_depths(t)
    by_depth: dict[int, list[int]] = {}
    for node, d in enumerate(depths):
        by_depth.setdefault(d, []).append(node)
    layout = [[0.0, 0.0]] * len(doc["nodes"])
    for d, members in by_depth.items():
        for rank, node in enumerate(sorted(members)):
            layout[node] = [float(d), rank - (len(members) - 1) / 2.0]
    doc["layout"] = layout
    return doc


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    docs = {f"bench_g{g}.json": benchmark(g) for g in (2, 3, 4, 5)}
    docs["curriculum_1.json"] = curriculum_1()
    docs["curriculum_2.json"] = curriculum_2()
    docs["curriculum_3.json"] = curriculum_3()
    docs["curriculum_4.json"] = curriculum_4()
    for filename, doc in docs.items():
        doc = add_layout(doc)
        load_template(doc)  # validate before writing
        path = OUT_DIR / filename
        path.write_text(json.dumps(doc, indent=1) + "\n")
        print(f"wrote {path} ({len(doc['nodes'])} nodes, {len(doc['edges'])} edges)")


if __name__ == "__main__":
    main()
