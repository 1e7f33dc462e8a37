import itertools

import numpy as np
import pytest

from clic.agent import (
    AgentParams, DemoSet, GoalSpec, Learner, ReplayBuffer, Source, augment_demonstrations,
    imitation_phase, make_batch, self_reward,
)
from clic.curriculum import CompetenceTracker
from clic.demonstrator import BobPolicy, DemoBatch, Trajectory, demonstrate, run_demonstrations
from clic.env import Action, EnvState, build_environment, reset
from clic.network import QNetwork, input_size
from clic.oracle import literal_reward


def test_self_reward_exact_match():
    goal = GoalSpec.one_hot(2, 3, 6)
    assert self_reward(EnvState((0, 0), (0, 3, 0, 0, 0, 0)), goal) == 0
    assert self_reward(EnvState((0, 0), (0, 2, 0, 0, 0, 0)), goal) == -1


def test_self_reward_ignores_other_objects():
    goal = GoalSpec.one_hot(2, 1, 3)
    for o1, o3 in itertools.product(range(4), repeat=2):
        for o2 in range(3):
            s = EnvState((1, 1), (o1, o2, o3))
            expected = literal_reward([1, 1, o1, o2, o3], [0, 0, 0, 1, 0], [0, 0, 0, 1, 0])
            assert self_reward(s, goal) == expected == (0 if o2 == 1 else -1)


def test_goal_spec_validation():
    assert GoalSpec.one_hot(3, 2, 6).selected == 3
    with pytest.raises(ValueError):
        GoalSpec(1, (0.5, 0.0)).selected
    with pytest.raises(ValueError):
        GoalSpec(1, (1.5, 0.0))


def test_replay_buffer_fifo():
    buf = ReplayBuffer(3, 1)
    for k in range(5):
        buf.add(EnvState((k, 0), (0,)), k % 5, EnvState((k, 1), (0,)), 1, 1)
    assert len(buf) == 3
    assert sorted(buf.s[:, 0].tolist()) == [2, 3, 4]


def test_make_batch_rewards_and_terminals():
    spec = build_environment("E6")
    s = np.array([[5, 5, 0, 0, 0, 0, 0, 0], [5, 3, 0, 0, 0, 0, 0, 0]])
    s2 = np.array([[5, 4, 0, 0, 0, 0, 0, 0], [5, 3, 1, 0, 0, 0, 0, 0]])
    b = make_batch(spec, s, np.array([2, 4]), s2, np.array([1, 1]), np.array([1, 1]))
    assert b.rewards.tolist() == [-1.0, 0.0]
    assert b.terminal.tolist() == [False, True]
    assert b.x.shape == (2, input_size(6))


def traj_from_actions(spec, target, value, actions):
    from clic.env import step, Actor
    t = Trajectory(target, value)
    s = reset(spec)
    t.states.append(s)
    for a in actions:
        s = step(spec, s, a, Actor.BOB)
        t.actions.append(int(a))
        t.states.append(s)
    return t


def test_augment_single_event():
    spec = build_environment("E6")
    # object 1's first via-point is (5, 3); ACT there on the 5th step
    acts = [Action.UP, Action.RIGHT, Action.LEFT, Action.UP, Action.ACT, Action.DOWN, Action.DOWN]
    items = augment_demonstrations(DemoBatch([traj_from_actions(spec, 1, 1, acts)]))
    # o_1 reaches 1 on the 5th transition: transitions 1..5 annotated, later ones not
    assert len(items) == 5
    assert {(it.obj, it.g) for it in items} == {(1, 1)}
    traj = traj_from_actions(spec, 1, 1, acts)
    assert [it.s for it in items] == traj.states[:5]


def test_augment_hierarchy_annotations():
    spec = build_environment("Eh", sticky_prob=0.0)
    traj = demonstrate(spec, 2, 2, np.random.default_rng(0))
    goals = {(it.obj, it.g) for it in augment_demonstrations(DemoBatch([traj]))}
    # every object shares the path prefix, so all of them pass through stages 1 and 2
    assert goals == {(i, 1) for i in range(1, 7)} | {(i, 2) for i in range(2, 7)}


def test_augment_empty():
    assert augment_demonstrations(DemoBatch()) == []


def test_augmented_goals_are_realised():
    spec = build_environment("Eh")
    rng = np.random.default_rng(3)
    batch = run_demonstrations(spec, BobPolicy.parse("all", 6), [0] * 6, 25, rng)
    for traj in batch.trajectories:
        for it in augment_demonstrations(DemoBatch([traj])):
            assert it.t <= it.event
            assert (it.s, it.a, it.s_next) == (traj.states[it.t], traj.actions[it.t], traj.states[it.t + 1])
            assert traj.states[it.event + 1].objects[it.obj - 1] == it.g


def make_learner(name="E6", **kw):
    params = AgentParams(**kw)
    return Learner(build_environment(name), params, np.random.default_rng(0),
                   net_rng=np.random.default_rng(1))


def test_imitation_idle_is_noop():
    learner = make_learner()
    before = learner.net.params.copy()
    counts = learner.imitate()
    assert counts.sum() == 100
    assert np.array_equal(learner.net.params, before)


def test_imitation_uniform_accounting():
    spec = build_environment("E6")
    params = AgentParams(epsilon=1.0)
    rng = np.random.default_rng(4)
    net = QNetwork(input_size(6), rng=rng)
    tracker = CompetenceTracker(6)
    totals = np.zeros(6)
    for _ in range(200):
        demos = DemoSet(6)
        demos.add(augment_demonstrations(run_demonstrations(
            spec, BobPolicy.parse("random:1", 6), [0] * 6, 2, rng)))
        counts = imitation_phase(spec, demos, tracker, net, params, rng)
        assert counts.sum() == 100
        assert len(demos) == 0
        totals += counts
    assert totals[0] / 200 == pytest.approx(100 / 6, abs=1.0)


def test_ingest_fills_buffer_and_demo_set():
    learner = make_learner()
    batch = run_demonstrations(learner.spec, BobPolicy.parse("all", 6), [0] * 6, 3,
                               np.random.default_rng(0))
    items = learner.ingest(batch)
    assert len(learner.buffer) == len(items) == len(learner.demos)
    assert (learner.buffer.source[:len(items)] == Source.BOB).all()


def test_learner_episode_bookkeeping():
    learner = make_learner(timeout=10)
    ends = []
    while len(ends) < 20:
        end = learner.run_learner_step()
        if end is not None:
            ends.append(end)
    assert all(e.length <= 10 for e in ends)
    assert all(e.success or e.length == 10 for e in ends)
    assert sum(len(h) for h in learner.tracker.history) == 20
    assert all(1 <= e.g <= learner.spec.obj(e.obj).length for e in ends)


def test_learner_success_recorded_when_goal_reached():
    learner = make_learner("E6")
    learner.obj, learner.g = 1, 1
    learner.state = EnvState((5, 3), (0,) * 6)
    learner.act = lambda: Action.ACT
    learner.last = None
    end = learner.run_learner_step()
    assert end is not None and end.success
    assert learner.tracker.competence(1) == 1.0


def test_self_transitions_carry_episode_goal():
    learner = make_learner()
    for _ in range(300):
        obj, g = learner.obj, learner.g
        learner.run_learner_step()
        k = (learner.buffer.pos - 1) % learner.buffer.capacity
        assert (learner.buffer.obj[k], learner.buffer.g[k]) == (obj, g)


def test_target_sync_period():
    learner = make_learner(target_period=50)
    for _ in range(49):
        learner.run_learner_step()
    assert not np.array_equal(learner.net.target, learner.net.params)
    learner.run_learner_step()
    assert np.array_equal(learner.net.target, learner.net.params)
