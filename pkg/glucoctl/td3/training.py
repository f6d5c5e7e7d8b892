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
"""
Episode loop shared by the training command and the learning smoke runs. Works with any
environment whose reset(**kwargs) returns an observation and whose step(action) returns a
StepResult.
"""

from collections import namedtuple

import numpy as np

from glucoctl.td3.agent import Transition

EpisodeSummary = namedtuple('EpisodeSummary', [
    'episode', 'episode_return', 'length', 'terminated', 'truncated', 'final_info'])


def episode_seed(master_seed, episode):
    """Seed of one episode, derived from the master seed and the episode index only."""
    return int(np.random.SeedSequence([master_seed, episode]).generate_state(1)[0])


def run_episode(env, agent, learn=True, episode=0, **reset_kwargs):
    """
    Plays one episode. With learn set, every transition is stored and followed by one
    train_step (1:1 replay ratio); otherwise the deterministic policy is used.
    """
    obs = np.asarray(env.reset(**reset_kwargs), dtype=float)
    total = 0.0
    length = 0
    while True:
        action = agent.act(obs, explore=learn)
        result = env.step(action)
        next_obs = np.asarray(result.obs, dtype=float)
        if learn:
            agent.observe(Transition(obs, action, result.reward, next_obs, result.terminated))
            agent.train_step()
        total += result.reward
        length += 1
        obs = next_obs
        if result.terminated or result.truncated:
            return EpisodeSummary(episode, total, length, result.terminated, result.truncated,
                                  result.info)


def train(env, agent, episodes, master_seed, start_episode=0, on_episode=None,
          reset_kwargs=None):
    """
    Runs episodes start_episode .. episodes - 1. on_episode(summary, agent) is called after
    each one, e.g. to log or checkpoint.

    :return: list of EpisodeSummary
    """
    summaries = []
    for episode in range(start_episode, episodes):
        kwargs = dict(reset_kwargs or {})
        kwargs['seed'] = episode_seed(master_seed, episode)
        summary = run_episode(env, agent, learn=True, episode=episode, **kwargs)
        summaries.append(summary)
        if on_episode is not None:
            on_episode(summary, agent)
    return summaries
