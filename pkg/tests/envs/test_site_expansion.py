import gym
import numpy as np
import pytest
from pytest_cases import parametrize, fixture_ref

from expansion_gym.optimize import ExpansionProblem, QuadraticCoeffs
from expansion_gym.wrappers import Monitor
from tests.networks import random_network


@pytest.fixture(scope='module')
def problem():
    network = random_network(5, n_active=4, n_candidates=5)
    rng = np.random.RandomState(5)
    E = rng.uniform(0.0, 1.0, size=(len(network), len(network)))
    np.fill_diagonal(E, 0.0)
    return ExpansionProblem(network, network.active, network.candidates, 3,
                            QuadraticCoeffs(l=rng.uniform(1.0, 10.0, size=len(network)), E=E))


@pytest.fixture(scope='module')
def env(problem):
    env = gym.make('expansion_gym:SiteExpansion-v0', problem=problem)
    yield env
    env.close()


@pytest.fixture(scope='module')
def env_full(problem):
    env = gym.make('expansion_gym:SiteExpansion-v1', problem=problem)
    yield env
    env.close()


def test_init(env, problem):
    assert env.n_candidates == 5
    assert env.action_space.n == 5
    assert env.get_action_meanings() == [problem.network.ids[i] for i in problem.candidates]


def test_reset(env, problem):
    obs = env.reset()

    assert obs.tolist() == [0] * 5
    assert env.chosen == ()
    assert env.total == pytest.approx(problem.evaluate(()))


def test_step(env, problem):
    env.reset()
    gains = env.marginal_gains()
    obs, reward, done, info = env.step(2)

    assert obs.tolist() == [0, 0, 1, 0, 0]
    assert not done
    assert info['site'] == problem.candidates[2]
    assert reward == pytest.approx(gains[2])
    assert info['total'] == pytest.approx(problem.evaluate([problem.candidates[2]]))
    assert env.marginal_gains()[2] == -np.inf


def test_repeated_action_is_rejected(env):
    env.reset()
    env.step(0)
    with pytest.raises(AssertionError):
        env.step(0)


def test_total_reward(env_full, problem):
    env_full.reset()
    _, reward, _, info = env_full.step(1)
    assert reward == info['total']
    assert reward == pytest.approx(problem.evaluate([problem.candidates[1]]))


@parametrize('env', [fixture_ref(env), fixture_ref(env_full)])
def test_reset_after_episode_end(env, problem):
    env.reset()
    done = False
    step_i = 0
    marginals = []
    while not done:
        step_i += 1
        action = int(np.argmax(env.marginal_gains()))
        _, _, done, info = env.step(action)
        marginals.append(info['marginal'])

    assert step_i == problem.K
    assert sum(marginals) == pytest.approx(env.total - problem.evaluate(()))
    with pytest.raises(AssertionError):
        env.step(int(np.flatnonzero(env.marginal_gains() > -np.inf)[0]))
    test_reset(env, problem)


@parametrize('env', [fixture_ref(env), fixture_ref(env_full)])
def test_render(env):
    env.reset()
    first = env.render(mode='rgb_array')
    env.step(0)
    second = env.render(mode='rgb_array')

    assert first.shape == (430, 400, 3)
    assert not np.array_equal(first, second)


def test_monitor(problem, tmp_path):
    env = Monitor(gym.make('expansion_gym:SiteExpansion-v0', problem=problem), directory=str(tmp_path))
    for _ in range(2):
        env.reset()
        done = False
        while not done:
            _, _, done, _ = env.step(int(np.argmax(env.unwrapped.marginal_gains())))
    env.close()

    frame = env.to_frame()
    assert len(frame) == 2 * problem.K
    assert frame['episode'].tolist() == [0] * problem.K + [1] * problem.K
    assert [record['step'] for record in env.episode()] == list(range(1, problem.K + 1))
    assert (tmp_path / 'steps.csv').exists()
