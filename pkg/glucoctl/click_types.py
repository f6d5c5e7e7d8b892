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

import os

from click import ParamType

from glucoctl.env.types import ControllerMode


class OutputClickType(ParamType):
    name = 'FORMAT'
    help = 'can be "JSON" or "TABLE". Set to TABLE by default.'

    def convert(self, value, param, ctx):
        if value is None:
            return value
        if value.lower() != 'json' and value.lower() != 'table':
            self.fail('output must be "json" or "table"')
        return value

    @classmethod
    def is_json(cls, value):
        return value is not None and value.lower() == 'json'


class ModeClickType(ParamType):
    name = 'MODE'
    help = 'Controller mode: {}.'.format(', '.join(ControllerMode.ALL))

    def convert(self, value, param, ctx):
        try:
            return ControllerMode.normalize(value)
        except ValueError as e:
            self.fail(str(e))


class ScenarioClickType(ParamType):
    name = 'SCENARIO'
    help = ('Built-in scenario name (fasting, nominal, random, extreme, case-1..case-4) '
            'or path to a scenario JSON file.')

    def convert(self, value, param, ctx):
        from glucoctl.env.scenarios import BUILTIN_SCENARIOS
        if value in BUILTIN_SCENARIOS or os.path.isfile(value):
            return value
        self.fail('"{}" is neither a built-in scenario nor an existing file'.format(value))


class SeedClickType(ParamType):
    name = 'SEED'
    help = 'Master seed. Every random draw of the run derives from it.'

    def convert(self, value, param, ctx):
        try:
            seed = int(value)
        except (TypeError, ValueError):
            self.fail('seed must be a non-negative integer')
        if seed < 0:
            self.fail('seed must be a non-negative integer')
        return seed


class ContextObject(object):
    def __init__(self):
        self._debug = False
        self._quiet = False
        self._config_path = None

    def set_debug(self, debug=False):
        self._debug = debug

    @property
    def debug_mode(self):
        return self._debug

    def set_quiet(self, quiet=False):
        self._quiet = quiet

    @property
    def quiet(self):
        return self._quiet

    def set_config_path(self, path):
        self._config_path = path

    def get_config_path(self):
        return self._config_path
