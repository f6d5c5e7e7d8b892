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
One-dimensional integrator-to-target task for exercising the agent without the patient model.
The state is the position error x, the action a velocity in [-1, 1], and each step moves
x by STEP_GAIN * a and pays -|x|.
"""

import numpy as np

from glucoctl.env.exceptions import ActionShapeError, EpisodeFinishedError
from glucoctl.env.types import StepResult

HORIZON = 25
STEP_GAIN = 0.1
POSITION_LIMIT = 2.0


class IntegratorEnv(object):
    obs_dim = 1
    action_dim = 1

    def __init__(self, horizon=HORIZON):
        self.horizon = horizon
        self._x = None
        self._t = 0
        self._done = True

    def reset(self, seed):
        rng = np.random.default_rng(seed)
        self._x = float(rng.uniform(-1.0, 1.0))
        self._t = 0
        self._done = False
        return np.array([self._x])

    def step(self, action):
        if self._done:
            raise EpisodeFinishedError('Episode finished; call reset() first')
        action = np.asarray(action, dtype=float)
        if action.shape != (1,) or abs(action[0]) > 1.0:
            raise ActionShapeError('Expected one action in [-1, 1], got {}'.format(
                action.tolist()))
        self._x = float(np.clip(self._x + STEP_GAIN * action[0], -POSITION_LIMIT,
                                POSITION_LIMIT))
        self._t += 1
        truncated = self._t >= self.horizon
        self._done = truncated
        return StepResult(np.array([self._x]), -abs(self._x), False, truncated,
                          {'x': self._x, 't': self._t})
