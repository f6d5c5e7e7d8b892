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
Meal scenarios. A scenario either lists fixed meals or describes randomization windows from
which a meal list is drawn per episode seed.

Scenario files are JSON:

    {"version": 1, "name": "my-day", "seed": 7,
     "meals": [{"time": 480, "carbs": 45}]}

or, with windows instead of meals,

    "windows": [{"start": 360, "end": 540, "carbs_min": 30, "carbs_max": 60,
                 "probability": 1.0}]
"""

import os

import numpy as np

from glucoctl.patient.model import DAY_MINUTES, MealEvent
from glucoctl.utils import load_json, save_json

SCENARIO_FILE_VERSION = 1

FASTING = 'fasting'
NOMINAL = 'nominal'
RANDOM = 'random'
EXTREME = 'extreme'
CASES = ('case-1', 'case-2', 'case-3', 'case-4')
# Seeds of the four randomized robustness cases.
CASE_SEEDS = {'case-1': 101, 'case-2': 102, 'case-3': 103, 'case-4': 104}


def _hours(h):
    return 60.0 * h


class MealWindow(object):
    def __init__(self, start, end, carbs_min, carbs_max, probability=1.0):
        self.start = float(start)
        self.end = float(end)
        self.carbs_min = float(carbs_min)
        self.carbs_max = float(carbs_max)
        self.probability = float(probability)
        if not 0 <= self.start < self.end <= DAY_MINUTES:
            raise ValueError('Meal window [{}, {}) must lie within [0, {}]'.format(
                self.start, self.end, DAY_MINUTES))
        if not 0 < self.carbs_min <= self.carbs_max:
            raise ValueError('Meal window carbs need 0 < min <= max, got [{}, {}]'.format(
                self.carbs_min, self.carbs_max))
        if not 0 < self.probability <= 1:
            raise ValueError('Meal probability must lie in (0, 1], got {}'.format(
                self.probability))

    def to_dict(self):
        return {
            'start': self.start,
            'end': self.end,
            'carbs_min': self.carbs_min,
            'carbs_max': self.carbs_max,
            'probability': self.probability,
        }

    @classmethod
    def from_dict(cls, json):
        return cls(json['start'], json['end'], json['carbs_min'], json['carbs_max'],
                   json.get('probability', 1.0))

    def __eq__(self, other):
        if isinstance(other, self.__class__):
            return self.to_dict() == other.to_dict()
        return False

    def __ne__(self, other):
        return not self == other


DEFAULT_WINDOWS = (
    MealWindow(_hours(6), _hours(9), 30, 60),
    MealWindow(_hours(12), _hours(14), 50, 90),
    MealWindow(_hours(18), _hours(21), 40, 80),
    MealWindow(_hours(15), _hours(17), 10, 30, probability=0.5),
)


class ScenarioSpec(object):
    def __init__(self, name, meals=None, windows=None, seed=0):
        if (meals is None) == (windows is None):
            raise ValueError('Scenario {} needs either meals or windows'.format(name))
        self.name = name
        self.meals = None if meals is None else tuple(sorted(meals, key=lambda m: m.time))
        self.windows = None if windows is None else tuple(windows)
        self.seed = int(seed)
        for meal in self.meals or ():
            if meal.time >= DAY_MINUTES:
                raise ValueError('Meal at {} min lies outside the day'.format(meal.time))

    @property
    def is_randomized(self):
        return self.windows is not None

    def materialize(self, seed=0):
        """
        Meal list of one episode. Fixed scenarios ignore the seed; randomized scenarios draw
        from a generator seeded with (scenario seed, seed).
        """
        if not self.is_randomized:
            return list(self.meals)
        rng = np.random.default_rng([self.seed, int(seed)])
        meals = []
        for window in self.windows:
            include = rng.random() < window.probability
            time = rng.uniform(window.start, window.end)
            carbs = rng.uniform(window.carbs_min, window.carbs_max)
            if include:
                meals.append(MealEvent(min(time, np.nextafter(window.end, window.start)),
                                       carbs))
        return sorted(meals, key=lambda m: m.time)

    def to_dict(self):
        json = {'version': SCENARIO_FILE_VERSION, 'name': self.name, 'seed': self.seed}
        if self.is_randomized:
            json['windows'] = [w.to_dict() for w in self.windows]
        else:
            json['meals'] = [m.to_dict() for m in self.meals]
        return json

    @classmethod
    def from_dict(cls, json):
        if json.get('version') != SCENARIO_FILE_VERSION:
            raise ValueError('Unsupported scenario file version {!r}'.format(
                json.get('version')))
        meals = windows = None
        if 'meals' in json:
            meals = [MealEvent.from_dict(m) for m in json['meals']]
        if 'windows' in json:
            windows = [MealWindow.from_dict(w) for w in json['windows']]
        return cls(json['name'], meals=meals, windows=windows, seed=json.get('seed', 0))

    def __eq__(self, other):
        if isinstance(other, self.__class__):
            return self.to_dict() == other.to_dict()
        return False

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'ScenarioSpec({!r})'.format(self.to_dict())


def scenario_fasting():
    return ScenarioSpec(FASTING, meals=[])


def scenario_nominal():
    return ScenarioSpec(NOMINAL, meals=[
        MealEvent(_hours(8), 45),
        MealEvent(_hours(13), 70),
        MealEvent(_hours(19), 60),
    ])


def scenario_random(windows=None, seed=0, name=RANDOM):
    return ScenarioSpec(name, windows=DEFAULT_WINDOWS if windows is None else windows,
                        seed=seed)


def scenario_extreme():
    return ScenarioSpec(EXTREME, meals=[
        MealEvent(_hours(8), 45),
        MealEvent(_hours(12), 150),
    ])


def scenario_case(name):
    return scenario_random(seed=CASE_SEEDS[name], name=name)


BUILTIN_SCENARIOS = {
    FASTING: scenario_fasting,
    NOMINAL: scenario_nominal,
    RANDOM: scenario_random,
    EXTREME: scenario_extreme,
}
for _case in CASES:
    BUILTIN_SCENARIOS[_case] = (lambda case: lambda: scenario_case(case))(_case)

# Suite run by `evaluate` when no scenario is given.
EVALUATION_SUITE = CASES + (EXTREME,)


def load_scenario(path):
    if not os.path.isfile(path):
        raise ValueError('Scenario file not found: {}'.format(path))
    return ScenarioSpec.from_dict(load_json(path))


def save_scenario(path, scenario):
    save_json(path, scenario.to_dict())


def get_scenario(name_or_path):
    """Resolves a built-in scenario name or a scenario file path."""
    if name_or_path in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[name_or_path]()
    return load_scenario(name_or_path)
