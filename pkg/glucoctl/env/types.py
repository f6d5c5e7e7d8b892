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

from collections import namedtuple

from glucoctl.fuzzy.ts import PARAM_COUNT

Observation = namedtuple('Observation', ['e_norm', 'de_norm'])

# info carries diagnostics: glucose, insulin, reward components, active TsParams, meal carbs.
StepResult = namedtuple('StepResult', ['obs', 'reward', 'terminated', 'truncated', 'info'])

# Penalties are reported as positive amounts; total = base - penalty_i - penalty_c.
RewardComponents = namedtuple('RewardComponents', ['base', 'penalty_i', 'penalty_c'])


class ControllerMode(object):
    DIRECT = 'direct'
    ADAPTIVE_FUZZY = 'adaptive-fuzzy'
    STATIC_FUZZY = 'static-fuzzy'
    ALL = (DIRECT, ADAPTIVE_FUZZY, STATIC_FUZZY)
    LEARNED = (DIRECT, ADAPTIVE_FUZZY)

    @classmethod
    def normalize(cls, value):
        """Accepts case and underscore variants, e.g. ``AdaptiveFuzzy`` or ``adaptive_fuzzy``."""
        if value is None:
            raise ValueError('Controller mode is required; one of {}'.format(', '.join(cls.ALL)))
        key = value.strip().lower().replace('_', '').replace('-', '')
        for mode in cls.ALL:
            if mode.replace('-', '') == key:
                return mode
        raise ValueError('Unknown controller mode "{}"; expected one of {}'.format(
            value, ', '.join(cls.ALL)))

    @classmethod
    def action_dim(cls, mode):
        return {cls.DIRECT: 1, cls.ADAPTIVE_FUZZY: PARAM_COUNT, cls.STATIC_FUZZY: 0}[mode]
