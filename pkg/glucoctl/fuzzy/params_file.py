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
TsParams files are JSON documents:

    {
      "version": 1,
      "ordering": "rule-major (a_r, b_r, c_r) ...",
      "units": {"a": ..., "b": ..., "c": ...},
      "params": [27 numbers],
      "score": optional mean return reached by tune-static
    }
"""

import os

from glucoctl.fuzzy.ts import ORDERING, TsParams, UNITS
from glucoctl.utils import load_json, save_json

FORMAT_VERSION = 1
SHIPPED_STATIC_PARAMS = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'resources', 'static_params.json')


def save_ts_params(path, params, score=None):
    document = {
        'version': FORMAT_VERSION,
        'ordering': ORDERING,
        'units': UNITS,
        'params': params.to_list(),
    }
    if score is not None:
        document['score'] = float(score)
    save_json(path, document)


def load_ts_params(path, with_score=False):
    """
    :return: TsParams, or (TsParams, score) when with_score is set; score is None when the
      file does not record one.
    """
    if not os.path.isfile(path):
        raise ValueError('TsParams file not found: {}'.format(path))
    document = load_json(path)
    if not isinstance(document, dict) or document.get('version') != FORMAT_VERSION:
        raise ValueError('Unsupported TsParams file version in {} (expected {})'.format(
            path, FORMAT_VERSION))
    if document.get('ordering', ORDERING) != ORDERING:
        raise ValueError('TsParams file {} uses an unknown ordering: {}'.format(
            path, document['ordering']))
    params = TsParams(document['params'])
    if with_score:
        return params, document.get('score')
    return params
