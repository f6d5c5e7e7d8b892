# glucoctl
# Copyright 2024 The glucoctl Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
import numpy as np
import pytest

from glucoctl.env.exceptions import ActionShapeError, EpisodeFinishedError
from glucoctl.td3.agent import Td3Agent, Td3Config
from glucoctl.td3.toy import IntegratorEnv
from glucoctl.td3.training import episode_seed, run_episode, train


def _agent(seed=0, **kwargs):
    settings = dict(obs_dim=1, action_dim=1, hidden_size=8, batch_size=8, warmup_steps=16)
    settings.update(kwargs)
    return Td3Agent(Td3Config(**settings), np.random.default_rng(seed))


def test_episode_seed():
    assert episode_seed(3, 0) == episode_seed(3, 0)
    assert episode_seed(3, 0) != episode_seed(3, 1)
    assert episode_seed(3, 0) != episode_seed(4, 0)


def test_integrator_env():
    env = IntegratorEnv(horizon=3)
    x0 = env.reset(seed=1)[0]
    result = env.step(np.array([1.0]))
    assert result.obs[0] == pytest.approx(x0 + 0.1)
    assert result.reward == pytest.approx(-abs(x0 + 0.1))
    env.step(np.array([0.0]))
    assert env.step(np.array([0.0])).truncated
    with pytest.raises(EpisodeFinishedError):
        env.step(np.array([0.0]))
    env.reset(seed=1)
    with pytest.raises(ActionShapeError):
        env.step(np.array([2.0]))


def test_run_episode_without_learning_leaves_agent_untouched():
    agent = _agent()
    summary = run_episode(IntegratorEnv(), agent, learn=False, seed=5)
    assert summary.length == 25
    assert summary.truncated and not summary.terminated
    assert agent.env_steps == 0
    assert len(agent.buffer) == 0


def test_train_is_deterministic():
    def run():
        returns = []
        train(IntegratorEnv(), _agent(3), 4, master_seed=11,
              on_episode=lambda summary, _: returns.append(summary.episode_return))
        return returns

    first = run()
    assert len(first) == 4
    assert first == run()


def test_train_resumes_from_episode():
    agent = _agent()
    summaries = train(IntegratorEnv(), agent, 5, master_seed=0, start_episode=3)
    assert [s.episode for s in summaries] == [3, 4]
    assert agent.env_steps == 50


def test_agent_learns_integrator():
    env = IntegratorEnv()
    agent = _agent(seed=0, gamma=0.9, hidden_size=32, batch_size=64, warmup_steps=250)
    summaries = train(env, agent, 200, master_seed=1)
    early = np.mean([s.episode_return for s in summaries[:20]])
    late = np.mean([s.episode_return for s in summaries[-20:]])
    assert late > early
    returns = [run_episode(env, agent, learn=False, seed=1000 + k).episode_return
               for k in range(20)]
    # Holding still from a uniform start costs about -12.5 per episode.
    assert np.mean(returns) > -6.0
