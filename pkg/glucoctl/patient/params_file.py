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
Patient parameter files are INI documents with a single ``[patient]`` section:

    [patient]
    version = 1
    body_weight = 70.0
    ke = 0.138
    ...

Keys mirror the PatientParams field names. Keys that are left out keep their defaults.
"""

import io
import os
from configparser import ConfigParser, Error as ConfigParserError

from glucoctl.patient.exceptions import ModelInputError
from glucoctl.patient.model import PatientParams

PATIENT_SECTION = 'patient'
VERSION_KEY = 'version'
FORMAT_VERSION = 1


def _new_parser():
    raw_config = ConfigParser()
    # Field names such as V_G are case sensitive.
    raw_config.optionxform = str
    return raw_config


def parse_patient_overrides(items):
    """
    Converts (key, value) string pairs into a dict of PatientParams overrides.
    """
    overrides = {}
    for key, value in items:
        if key not in PatientParams.FIELDS:
            raise ModelInputError('Unknown patient parameter "{}"'.format(key))
        try:
            overrides[key] = float(value)
        except ValueError:
            raise ModelInputError('Patient parameter {} must be a number, got "{}"'
                                  .format(key, value))
    return overrides


def load_patient_params(path):
    """
    :return: PatientParams read from the INI file at path.
    """
    if not os.path.isfile(path):
        raise ModelInputError('Patient parameter file not found: {}'.format(path))
    raw_config = _new_parser()
    try:
        raw_config.read(path)
    except ConfigParserError as e:
        raise ModelInputError('Could not parse patient parameter file {}: {}'.format(path, e))
    if not raw_config.has_section(PATIENT_SECTION):
        raise ModelInputError('{} has no [{}] section'.format(path, PATIENT_SECTION))
    items = dict(raw_config.items(PATIENT_SECTION))
    version = items.pop(VERSION_KEY, None)
    if version is None or version.strip() != str(FORMAT_VERSION):
        raise ModelInputError('Unsupported patient parameter file version {!r} in {} '
                              '(expected {})'.format(version, path, FORMAT_VERSION))
    return PatientParams(**parse_patient_overrides(items.items()))


def save_patient_params(path, params):
    raw_config = _new_parser()
    raw_config.add_section(PATIENT_SECTION)
    raw_config.set(PATIENT_SECTION, VERSION_KEY, str(FORMAT_VERSION))
    for name in PatientParams.FIELDS:
        raw_config.set(PATIENT_SECTION, name, repr(getattr(params, name)))
    with io.open(path, 'w', encoding='utf-8') as f:
        f.write(u'# Units: {}\n'.format(', '.join(
            '{} [{}]'.format(name, PatientParams.UNITS[name]) for name in PatientParams.FIELDS)))
        raw_config.write(f)
