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

from abc import abstractmethod, ABCMeta
from collections import OrderedDict
from configparser import ConfigParser, Error as ConfigParserError
import io
import os
from os.path import expanduser, join

import six

from glucoctl.env.glucose_env import EnvConfig
from glucoctl.env.types import ControllerMode
from glucoctl.patient.model import PatientParams
from glucoctl.patient.params_file import load_patient_params
from glucoctl.td3.agent import Td3Config
from glucoctl.utils import InvalidConfigurationError


_home = expanduser('~')
CONFIG_FILE_ENV_VAR = 'GLUCOCTL_CONFIG_FILE'
ENV_VAR_PREFIX = 'GLUCOCTL_'
DEFAULT_CONFIG_FILE = '.glucoctlcfg'

RUN_SECTION = 'run'
PATIENT_SECTION = 'patient'
ENV_SECTION = 'env'
TD3_SECTION = 'td3'
TUNE_SECTION = 'tune'
SECTIONS = (RUN_SECTION, PATIENT_SECTION, ENV_SECTION, TD3_SECTION, TUNE_SECTION)

RUN_DEFAULTS = OrderedDict([
    ('mode', 'direct'),
    ('scenario', 'nominal'),
    ('scenarios', ''),
    ('seed', 0),
    ('episodes', 150),
    ('eval_seeds', 1),
    ('checkpoint', ''),
    ('checkpoint_every', 10),
    ('fuzzy_params', ''),
    ('patient_file', ''),
    ('out', 'glucoctl-out'),
    ('workers', 1),
])
TUNE_DEFAULTS = OrderedDict([
    ('candidates', 32),
    ('refine_rounds', 2),
    ('scenarios', 'nominal,case-1,case-2,case-3,case-4'),
    ('seeds_per_scenario', 1),
])
# Derived from the controller mode, never configured.
_DERIVED_TD3_KEYS = ('action_dim', 'obs_dim')


def _build_schema():
    return {
        RUN_SECTION: OrderedDict((k, type(v)) for k, v in RUN_DEFAULTS.items()),
        PATIENT_SECTION: OrderedDict((k, float) for k in PatientParams.FIELDS),
        ENV_SECTION: OrderedDict((k, EnvConfig.FIELDS[k]) for k in sorted(EnvConfig.FIELDS)
                                 if k != 'mode'),
        TD3_SECTION: OrderedDict((k, Td3Config.FIELDS[k]) for k in sorted(Td3Config.FIELDS)
                                 if k not in _DERIVED_TD3_KEYS),
        TUNE_SECTION: OrderedDict((k, type(v)) for k, v in TUNE_DEFAULTS.items()),
    }


SCHEMA = _build_schema()
_DEFAULTS = {
    RUN_SECTION: RUN_DEFAULTS,
    PATIENT_SECTION: PatientParams.DEFAULTS,
    ENV_SECTION: EnvConfig.DEFAULTS,
    TD3_SECTION: Td3Config.DEFAULTS,
    TUNE_SECTION: TUNE_DEFAULTS,
}


def _canonical_key(section, key):
    if section not in SCHEMA:
        raise InvalidConfigurationError('Unknown configuration section [{}]'.format(section))
    for candidate in SCHEMA[section]:
        if candidate.lower() == key.lower():
            return candidate
    raise InvalidConfigurationError.for_key(section, key)


def _convert(section, key, value):
    kind = SCHEMA[section][key]
    try:
        if section == RUN_SECTION and key == 'mode':
            return ControllerMode.normalize(str(value))
        if kind is str:
            return str(value).strip()
        if kind is int and isinstance(value, str):
            return int(value.strip())
        return kind(value)
    except (TypeError, ValueError):
        raise InvalidConfigurationError('Invalid value {!r} for [{}] {}: expected {}'.format(
            value, section, key, kind.__name__))


def split_list(value):
    return [item.strip() for item in value.split(',') if item.strip()]


class RunConfig(object):
    """
    Settings of one command, organised in the sections run, patient, env, td3 and tune.
    Only explicitly set values are stored; everything else falls back to the defaults.
    """
    def __init__(self):
        self._values = dict((section, OrderedDict()) for section in SECTIONS)
        # Command-line layer, kept so sibling configs can be resolved with the same flags.
        self.flags = {}

    def set(self, section, key, value):
        section = section.lower()
        key = _canonical_key(section, key)
        self._values[section][key] = _convert(section, key, value)

    def update(self, layer):
        for section, items in layer.items():
            for key, value in items.items():
                self.set(section, key, value)
        return self

    def get(self, section, key):
        key = _canonical_key(section, key)
        if key in self._values[section]:
            return self._values[section][key]
        return _DEFAULTS[section][key]

    def explicit(self, section):
        return dict(self._values[section])

    def run(self, key):
        return self.get(RUN_SECTION, key)

    def tune(self, key):
        return self.get(TUNE_SECTION, key)

    def copy(self):
        other = RunConfig()
        for section in SECTIONS:
            other._values[section] = OrderedDict(self._values[section])
        other.flags = dict(self.flags)
        return other

    def patient_params(self):
        """PatientParams from [run] patient_file, with inline [patient] keys on top."""
        path = self.run('patient_file')
        base = load_patient_params(path) if path else PatientParams()
        overrides = self.explicit(PATIENT_SECTION)
        return base.replace(**overrides) if overrides else base

    def env_config(self, mode=None):
        return EnvConfig(mode=mode or self.run('mode'), **self.explicit(ENV_SECTION))

    def td3_config(self, action_dim, obs_dim=2):
        return Td3Config(action_dim=action_dim, obs_dim=obs_dim, **self.explicit(TD3_SECTION))

    def effective(self):
        """Every setting with its effective value, section by section."""
        sections = OrderedDict()
        for section in SECTIONS:
            if section == PATIENT_SECTION:
                sections[section] = OrderedDict(
                    (k, v) for k, v in self.patient_params().to_dict().items())
            else:
                sections[section] = OrderedDict(
                    (key, self.get(section, key)) for key in SCHEMA[section])
        return sections


def _get_path(explicit_path=None):
    if explicit_path:
        if not os.path.isfile(explicit_path):
            raise InvalidConfigurationError('Config file not found: {}'.format(explicit_path))
        return explicit_path
    return os.environ.get(CONFIG_FILE_ENV_VAR, join(_home, DEFAULT_CONFIG_FILE))


def _new_parser():
    raw_config = ConfigParser(interpolation=None)
    raw_config.optionxform = str
    return raw_config


def update_and_persist_config(path, run_config):
    """
    Writes the effective value of every setting of run_config to the INI file at path,
    replacing its previous content.
    """
    raw_config = _new_parser()
    for section, items in run_config.effective().items():
        raw_config.add_section(section)
        for key, value in items.items():
            raw_config.set(section, key, repr(value) if isinstance(value, float) else str(value))
    with io.open(path, 'w', encoding='utf-8') as cfg:
        raw_config.write(cfg)


def get_run_config(config_path=None, flags=None):
    """
    Resolves the configuration of a command. Later layers win: built-in defaults, the INI
    config file, GLUCOCTL_<SECTION>_<KEY> environment variables, then command-line flags.

    :param config_path: explicit --config path; when absent the file named by
      GLUCOCTL_CONFIG_FILE or ~/.glucoctlcfg is used if it exists.
    :param flags: {section: {key: value}} from the command line.
    """
    providers = (
        FileConfigProvider(_get_path(config_path)),
        EnvironmentVariableConfigProvider(),
        FlagConfigProvider(flags),
    )
    run_config = RunConfig()
    for provider in providers:
        layer = provider.get_config()
        if layer:
            run_config.update(layer)
    run_config.flags = flags or {}
    return run_config


class RunConfigProvider(six.with_metaclass(ABCMeta, object)):
    """
    Supplies one layer of settings as {section: {key: value}}, or None when it has nothing
    to contribute.
    """

    @abstractmethod
    def get_config(self):
        pass


class FileConfigProvider(RunConfigProvider):
    """Loads from an INI file; a missing file contributes nothing."""
    def __init__(self, path):
        self.path = path

    def get_config(self):
        if not self.path or not os.path.isfile(self.path):
            return None
        raw_config = _new_parser()
        try:
            raw_config.read(self.path)
        except ConfigParserError as e:
            raise InvalidConfigurationError('Could not parse {}: {}'.format(self.path, e))
        return dict((section, dict(raw_config.items(section)))
                    for section in raw_config.sections())


class EnvironmentVariableConfigProvider(RunConfigProvider):
    """Loads GLUCOCTL_<SECTION>_<KEY> variables, e.g. GLUCOCTL_TD3_BATCH_SIZE=64."""
    def get_config(self):
        layer = {}
        for name, value in os.environ.items():
            if not name.startswith(ENV_VAR_PREFIX) or name == CONFIG_FILE_ENV_VAR:
                continue
            section, _, key = name[len(ENV_VAR_PREFIX):].partition('_')
            section = section.lower()
            if section not in SCHEMA or not key:
                continue
            layer.setdefault(section, {})[key] = value
        return layer or None


class FlagConfigProvider(RunConfigProvider):
    def __init__(self, flags=None):
        self.flags = flags or {}

    def get_config(self):
        layer = {}
        for section, items in self.flags.items():
            items = dict((k, v) for k, v in items.items() if v is not None)
            if items:
                layer[section] = items
        return layer or None
