import csv
import io
import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from metaplan.belief import init_belief
from metaplan.cli import main
from metaplan.envgraph import builtin_benchmark, builtin_curriculum, sample_instance
from metaplan.harness import (
    BenchmarkSpec,
    click_agreement,
    env_by_name,
    goal_planning_detect,
    learned_goal_planning,
    make_policy,
    repeat_agreement,
    replay_trace,
    run_benchmark,
    termination_agreement,
    time_per_decision,
    trace_to_json,
    variance_tiers,
)
from metaplan.metamdp import (
    TERMINATE,
    AlwaysTerminate,
    EpisodeConfig,
    Inspect,
    TableObservationSource,
    precompute_observation_table,
    run_episode,
)
from metaplan.mgpo import MgpoPolicy, VocConfig


def mgpo_trace(template, cost=0.05, tau_obs=0.005, seed=0, legacy=False):
    instance = sample_instance(template, seed)
    table = precompute_observation_table(instance, tau_obs, 200, seed + 1)
    config = EpisodeConfig(cost=cost, tau_obs=tau_obs)
    policy = MgpoPolicy(VocConfig(cost=cost, tau_obs=tau_obs, legacy_mode=legacy))
    return run_episode(policy, instance, config, TableObservationSource(table))


class TestRunBenchmark:
    def test_single_episode_cell(self):
        spec = BenchmarkSpec(
            algorithms=("mgpo",),
            goal_counts=(2,),
            costs=(1.0,),
            tau_obs=0.005,
            n_instances=1,
            base_seed=5,
        )
        result = run_benchmark(spec)
        cell = result.cell("mgpo", "g2", 1.0)
        assert cell.episodes == 1
        assert cell.mean_rr == result.rows[0].rr
        assert cell.median_rr == result.rows[0].rr

    def test_common_instances_across_algorithms(self):
        spec = BenchmarkSpec(
            algorithms=("mgpo", "metagreedy"),
            goal_counts=(2,),
            costs=(1.0,),
            tau_obs=0.005,
            n_instances=4,
            base_seed=9,
        )
        result = run_benchmark(spec)
        by_algo = {}
        for row in result.rows:
            by_algo.setdefault(row.algo, []).append((row.seed, row.truth_hash))
        assert by_algo["mgpo"] == by_algo["metagreedy"]

    def test_summary_matches_recomputation(self, tmp_path):
        spec = BenchmarkSpec(
            algorithms=("mgpo",),
            goal_counts=(2,),
            costs=(0.05,),
            tau_obs=0.005,
            n_instances=6,
            base_seed=2,
            out_dir=str(tmp_path),
        )
        result = run_benchmark(spec)
        rows = list(csv.DictReader((tmp_path / "results.csv").open()))
        rrs = [float(r["rr"]) for r in rows]
        cell = result.cell("mgpo", "g2", 0.05)
        assert cell.mean_rr == pytest.approx(np.mean(rrs), abs=1e-6)
        assert cell.median_rr == pytest.approx(np.median(rrs), abs=1e-6)
        q75, q25 = np.percentile(rrs, [75, 25])
        assert cell.iqr_rr == pytest.approx(q75 - q25, abs=1e-6)

    def test_unregistered_algorithm(self):
        with pytest.raises(ValueError, match="unregistered"):
            make_policy("zigzag", 2, EpisodeConfig(cost=1.0, tau_obs=0.005))

    def test_env_by_name(self):
        assert env_by_name("g3").n_nodes == 55
        assert env_by_name("exp60").n_nodes == 60
        with pytest.raises(ValueError):
            env_by_name("g9")


class TestCliDeterminism:
    def test_identical_bytes_across_runs(self, tmp_path):
        runner = CliRunner()
        outputs = []
        for run_dir in ("a", "b"):
            out = tmp_path / run_dir
            result = runner.invoke(
                main,
                [
                    "run",
                    "--env", "g2",
                    "--algo", "mgpo",
                    "--algo", "pouct:10",
                    "--cost", "1.0",
                    "--precision", "0.005",
                    "--instances", "3",
                    "--seed", "33",
                    "--out", str(out),
                ],
            )
            assert result.exit_code == 0, result.output
            outputs.append(
                (
                    (out / "results.csv").read_bytes(),
                    (out / "summary.csv").read_bytes(),
                )
            )
        assert outputs[0] == outputs[1]

    def test_metrics_command(self, tmp_path):
        trace = mgpo_trace(builtin_benchmark(2), cost=1.0, legacy=True)
        lines = [json.dumps(trace_to_json(trace, "g2"))]
        trace_file = tmp_path / "traces.jsonl"
        trace_file.write_text("\n".join(lines) + "\n")
        runner = CliRunner()
        result = runner.invoke(
            main,
            ["metrics", "--traces", str(trace_file), "--policy", "mgpo",
             "--profile", "legacy"],
        )
        assert result.exit_code == 0, result.output
        row = result.output.strip().splitlines()[-1].split(",")
        assert float(row[1]) == 1.0  # click agreement with itself
        assert float(row[2]) == 1.0


class TestTimePerDecision:
    def test_minimum_decisions_enforced(self):
        with pytest.raises(ValueError):
            time_per_decision(
                AlwaysTerminate(), builtin_benchmark(2),
                EpisodeConfig(cost=1.0, tau_obs=0.005), n_decisions=5,
            )

    def test_trivial_policy_is_fast(self):
        seconds = time_per_decision(
            AlwaysTerminate(), builtin_benchmark(2),
            EpisodeConfig(cost=1.0, tau_obs=0.005), n_decisions=30,
        )
        assert seconds < 0.01


class TestClickAgreement:
    def test_identity(self):
        template = builtin_benchmark(2)
        trace = mgpo_trace(template, cost=1.0)
        reference = MgpoPolicy(VocConfig(cost=1.0, tau_obs=0.005))
        assert click_agreement(trace, reference) == 1.0

    def test_every_click_differs(self, diamond_zero):
        from conftest import force_instance

        instance = force_instance(diamond_zero, [0.0, 1.0, -1.0, 0.0])
        config = EpisodeConfig(cost=0.05, tau_obs=0.005)

        def always_node_2(belief):
            return Inspect(2) if belief.obs_count.sum() < 3 else TERMINATE

        trace = run_episode(always_node_2, instance, config, np.random.default_rng(0))

        def always_node_1(belief):
            return Inspect(1)

        assert click_agreement(trace, always_node_1) == 0.0

    def test_half_match(self, diamond_zero):
        from conftest import force_instance

        instance = force_instance(diamond_zero, [0.0, 1.0, -1.0, 0.0])
        config = EpisodeConfig(cost=0.05, tau_obs=0.005)
        sequence = [Inspect(1), Inspect(2)] * 5

        def scripted(belief):
            k = int(belief.obs_count.sum())
            return sequence[k] if k < len(sequence) else TERMINATE

        trace = run_episode(scripted, instance, config, np.random.default_rng(0))

        def always_node_1(belief):
            return Inspect(1)

        assert click_agreement(trace, always_node_1) == 0.5

    def test_zero_click_conventions(self, diamond_zero):
        from conftest import force_instance

        instance = force_instance(diamond_zero, [0.0, 1.0, -1.0, 0.0])
        config = EpisodeConfig(cost=0.05, tau_obs=0.005)
        trace = run_episode(AlwaysTerminate(), instance, config, np.random.default_rng(0))
        assert click_agreement(trace, AlwaysTerminate()) == 1.0

        def never_stop(belief):
            return Inspect(1)

        assert click_agreement(trace, never_stop) == 0.0


class TestTerminationAgreement:
    def test_perfect(self):
        template = builtin_benchmark(2)
        trace = mgpo_trace(template, cost=1.0)
        reference = MgpoPolicy(VocConfig(cost=1.0, tau_obs=0.005))
        assert termination_agreement(trace, reference) == 1.0

    def test_boundary_single_terminate(self, diamond_zero):
        from conftest import force_instance

        instance = force_instance(diamond_zero, [0.0, 1.0, -1.0, 0.0])
        config = EpisodeConfig(cost=0.05, tau_obs=0.005)

        def participant(belief):
            return Inspect(1) if belief.obs_count.sum() < 4 else TERMINATE

        trace = run_episode(participant, instance, config, np.random.default_rng(1))
        # reference agrees exactly at every point
        def reference(belief):
            return Inspect(1) if belief.obs_count.sum() < 4 else TERMINATE

        assert termination_agreement(trace, reference) == 1.0

    def test_tpr_one_tnr_zero(self, diamond_zero):
        from conftest import force_instance

        instance = force_instance(diamond_zero, [0.0, 1.0, -1.0, 0.0])
        config = EpisodeConfig(cost=0.05, tau_obs=0.005)

        def participant(belief):
            return Inspect(1) if belief.obs_count.sum() < 2 else TERMINATE

        trace = run_episode(participant, instance, config, np.random.default_rng(1))
        # reference terminates everywhere: the two participant continues
        # are false negatives (TNR has no instances -> uses TPR's rate),
        # so construct instead a reference that continues everywhere:
        # participant terminate -> FP (TNR=0); participant continues -> TN?
        def never_stop(belief):
            return Inspect(2)

        # decision points: continue, continue, terminate
        # reference never terminates: TN=2 -> TNR=1, terminate -> FP.
        # No positive instances: TPR copies TNR... construct the stated
        # case directly instead with a reference that terminates only
        # where the participant continued.
        def contrarian(belief):
            return TERMINATE if belief.obs_count.sum() < 2 else Inspect(1)

        # points: (continue vs terminate) x2 -> FN x2 -> TPR = 0
        # final terminate vs continue -> FP -> TNR = 0... both zero
        assert termination_agreement(trace, contrarian) == 0.0
        # TPR=1 (terminates when reference does), TNR=0:
        def always_terminate(belief):
            return TERMINATE

        # all 3 points are reference-positive; participant terminates on
        # the last only: TPR = 1/3, no negative instances -> TNR := TPR
        assert termination_agreement(trace, always_terminate) == pytest.approx(1 / 3)

    def test_balanced_accuracy_half(self, diamond_zero):
        from conftest import force_instance

        instance = force_instance(diamond_zero, [0.0, 1.0, -1.0, 0.0])
        config = EpisodeConfig(cost=0.05, tau_obs=0.005)

        def participant(belief):
            return Inspect(1) if belief.obs_count.sum() < 1 else TERMINATE

        trace = run_episode(participant, instance, config, np.random.default_rng(1))

        # reference: continue at first point (TN), continue at second
        # (participant terminates: FP) -> TNR = 1/2; no positives.
        def reference(belief):
            return Inspect(2)

        assert termination_agreement(trace, reference) == 0.5


class TestRepeatAgreement:
    def test_identity(self):
        template = builtin_benchmark(2)
        trace = mgpo_trace(template, cost=0.05)
        reference = MgpoPolicy(VocConfig(cost=0.05, tau_obs=0.005))
        assert repeat_agreement(trace, reference) == 1.0

    def test_all_fresh_agreement(self):
        from conftest import force_instance, make_template

        # three parallel inspectable nodes so "different but fresh"
        # choices exist at every step
        wide = make_template(
            "wide",
            [(0, 0), (0.0, 10.0), (0.0, 10.0), (0.0, 10.0), (0.0, 0.0)],
            [(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)],
            [4],
        )
        instance = force_instance(wide, [0.0, 1.0, -1.0, 0.5, 0.0])
        config = EpisodeConfig(cost=0.05, tau_obs=0.005)
        participant_order = [Inspect(1), Inspect(2)]
        reference_order = [Inspect(2), Inspect(3)]

        def participant(belief):
            k = int(belief.obs_count.sum())
            return participant_order[k] if k < 2 else TERMINATE

        trace = run_episode(participant, instance, config, np.random.default_rng(1))

        def reference(belief):
            k = int(belief.obs_count.sum())
            return reference_order[min(k, 1)]

        assert repeat_agreement(trace, reference) == 1.0

    def test_repeat_mismatch(self, diamond_zero):
        from conftest import force_instance

        instance = force_instance(diamond_zero, [0.0, 1.0, -1.0, 0.0])
        config = EpisodeConfig(cost=0.05, tau_obs=0.005)

        def repeater(belief):
            return Inspect(1) if belief.obs_count.sum() < 3 else TERMINATE

        trace = run_episode(repeater, instance, config, np.random.default_rng(1))

        fresh_nodes = iter([1, 2, 2, 2, 2])

        def fresh_reference(belief):
            return Inspect(next(fresh_nodes))

        # steps: click1 fresh vs ref fresh -> match; click2 repeated vs
        # ref node2 fresh -> mismatch; click3 repeated vs ref node2
        # repeated (participant saw node 1 only... node2 never clicked)
        # -> ref node 2 is fresh -> mismatch
        assert repeat_agreement(trace, fresh_reference) == pytest.approx(1 / 3)


class TestGoalPlanning:
    @pytest.fixture
    def tiered(self):
        return builtin_curriculum(4)

    def trace_for(self, tiered, nodes):
        from metaplan.metamdp import StepRecord, EpisodeTrace

        instance = sample_instance(tiered, 0)
        config = EpisodeConfig(cost=0.05, tau_obs=0.005)
        belief = init_belief(tiered)
        records = []
        from metaplan.belief import Observation, update as bupdate

        for n in nodes:
            records.append(
                StepRecord(
                    belief_before=belief,
                    action=Inspect(n),
                    observation=Observation(node=n, value=0.0),
                    meta_reward=-0.05,
                )
            )
            belief = bupdate(belief, Observation(node=n, value=0.0), 0.005)
        records.append(
            StepRecord(belief_before=belief, action=TERMINATE, observation=None, meta_reward=0.0)
        )
        return EpisodeTrace(
            records=tuple(records),
            final_belief=belief,
            chosen_path=(0,),
            rr=0.0,
            config=config,
            instance=instance,
        )

    def test_canonical_order_true(self, tiered):
        goal = sorted(tiered.goals)[0]
        mid = next(n.id for n in tiered.nodes if n.sigma == 10.0)
        low = next(n.id for n in tiered.nodes if n.id != 0 and n.sigma == 5.0)
        trace = self.trace_for(tiered, [goal, mid, low])
        assert goal_planning_detect(trace, tiered) is True

    def test_starting_low_false(self, tiered):
        goal = sorted(tiered.goals)[0]
        low = next(n.id for n in tiered.nodes if n.id != 0 and n.sigma == 5.0)
        trace = self.trace_for(tiered, [low, goal])
        assert goal_planning_detect(trace, tiered) is False

    def test_majority_rule(self):
        assert learned_goal_planning([True] * 6 + [False] * 4) is True
        assert learned_goal_planning([True] * 5 + [False] * 5) is False

    def test_requires_three_tiers(self, diamond):
        with pytest.raises(ValueError):
            variance_tiers(diamond)


class TestTraceRoundTrip:
    def test_serialize_replay(self):
        template = builtin_benchmark(2)
        trace = mgpo_trace(template, cost=1.0, seed=3)
        doc = trace_to_json(trace, "g2")
        replayed = replay_trace(doc)
        assert replayed.chosen_path == trace.chosen_path
        assert replayed.n_computations == trace.n_computations
        np.testing.assert_array_equal(
            replayed.final_belief.mu, trace.final_belief.mu
        )
