import numpy as np
import pytest

from clic.demonstrator import (
    BobMode, BobPolicy, DemoBatch, demonstrate, greedy_action, mentor_select_object,
    run_demonstrations,
)
from clic.env import PRESETS, Action, Actor, EnvSpec, EnvState, ObjectSpec, build_environment, reset
from clic.oracle import optimal_steps


def sticky_free(name):
    return build_environment(name, sticky_prob=0.0)


def test_greedy_vertical_move_toward_via_point():
    spec = EnvSpec(11, (ObjectSpec(1, ((5, 7),)),))
    s = reset(spec)
    assert greedy_action(spec, s, 1, 1) == Action.DOWN


def test_greedy_horizontal_first():
    spec = EnvSpec(11, (ObjectSpec(1, ((7, 7),)),))
    assert greedy_action(spec, reset(spec), 1, 1) == Action.RIGHT
    spec = EnvSpec(11, (ObjectSpec(1, ((2, 1),)),))
    assert greedy_action(spec, reset(spec), 1, 1) == Action.LEFT


def test_greedy_acts_on_target_cell():
    spec = build_environment("E6")
    s = EnvState((5, 1), (1, 0, 0, 0, 0, 0))
    assert greedy_action(spec, s, 1, 3) == Action.ACT


def test_greedy_completion_sentinel():
    spec = build_environment("E6")
    s = EnvState((4, 1), (3, 0, 0, 0, 0, 0))
    assert greedy_action(spec, s, 1, 3) is None
    assert greedy_action(spec, EnvState((5, 5), (2, 0, 0, 0, 0, 0)), 1, 2) is None


def test_greedy_rejects_bad_target():
    spec = build_environment("E6")
    with pytest.raises(ValueError):
        greedy_action(spec, reset(spec), 1, 4)
    with pytest.raises(IndexError):
        greedy_action(spec, reset(spec), 7, 1)


def test_mentor_selection():
    assert mentor_select_object([0.95, 0.3, 0, 0, 0, 0], 0.9) == 2
    assert mentor_select_object([0.0] * 6, 0.9) == 1
    assert mentor_select_object([0.5, 1.0, 1.0, 0, 0, 0], 0.9) == 1
    assert mentor_select_object([1.0] * 6, 0.9) == 6


def test_idle_batch_empty():
    spec = build_environment("E6")
    batch = run_demonstrations(spec, BobPolicy(), [0] * 6, 25, np.random.default_rng(0))
    assert len(batch) == 0


def test_batch_size():
    spec = build_environment("E6")
    batch = run_demonstrations(spec, BobPolicy.parse("all", 6), [0] * 6, 25, np.random.default_rng(0))
    assert len(batch) == 25
    assert all(t.states[0] == reset(spec) for t in batch.trajectories)


def test_random_subset_targets_and_optimal_lengths():
    spec = sticky_free("E6")
    batch = run_demonstrations(spec, BobPolicy.parse("random:1", 6), [0] * 6, 10,
                               np.random.default_rng(1))
    for traj in batch.trajectories:
        assert traj.target_object == 1
        assert traj.states[-1].objects[0] == 3
        assert len(traj) == optimal_steps(spec, 1, 3)


def test_mentor_batch_targets_single_object():
    spec = build_environment("E6")
    policy = BobPolicy(BobMode.MENTOR)
    batch = run_demonstrations(spec, policy, [1.0, 0.95, 0.2, 0, 0, 0], 5, np.random.default_rng(2))
    assert {t.target_object for t in batch.trajectories} == {3}


@pytest.mark.parametrize("name", PRESETS)
def test_sticky_free_trajectories_are_optimal(name):
    spec = sticky_free(name)
    rng = np.random.default_rng(0)
    for i in range(1, spec.n_objects + 1):
        for v in range(1, spec.obj(i).length + 1):
            traj = demonstrate(spec, i, v, rng)
            assert traj.states[-1].objects[i - 1] == v
            assert len(traj) == optimal_steps(spec, i, v, Actor.BOB)


def test_sticky_trajectories_complete():
    spec = build_environment("Eh")
    rng = np.random.default_rng(5)
    done = 0
    for _ in range(300):
        i = int(rng.integers(1, 7))
        traj = demonstrate(spec, i, spec.obj(i).length, rng)
        done += traj.states[-1].objects[i - 1] == spec.obj(i).length
        assert len(traj) >= optimal_steps(spec, i, spec.obj(i).length, Actor.BOB)
    assert done == 300


def test_eh_full_target_sets_all_objects():
    spec = build_environment("Eh")
    traj = demonstrate(spec, 6, 6, np.random.default_rng(0))
    assert traj.states[-1].objects == spec.lengths


def test_policy_parse():
    assert BobPolicy.parse("idle", 6).mode is BobMode.IDLE
    assert BobPolicy.parse("all", 6).subset == (1, 2, 3, 4, 5, 6)
    assert BobPolicy.parse("random:1,2,3", 6).subset == (1, 2, 3)
    assert BobPolicy.parse("mentor", 6).mode is BobMode.MENTOR
    for bad in ("random:", "random:7", "sometimes"):
        with pytest.raises(ValueError):
            BobPolicy.parse(bad, 6)
    with pytest.raises(ValueError):
        BobPolicy(BobMode.RANDOM_SUBSET, ())
    with pytest.raises(ValueError):
        BobPolicy(BobMode.MENTOR, mastery_threshold=0.0)


def test_d_must_be_positive():
    with pytest.raises(ValueError):
        run_demonstrations(build_environment("E6"), BobPolicy(), [0] * 6, 0, np.random.default_rng(0))
    assert isinstance(DemoBatch(), DemoBatch)
