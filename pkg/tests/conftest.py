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
import shutil
import tempfile
import os

import pytest

import glucoctl.configure.provider as provider


@pytest.fixture(autouse=True)
def mock_conf_dir():
    path = tempfile.mkdtemp()
    provider._home = path
    saved = dict((k, v) for k, v in os.environ.items() if k.startswith('GLUCOCTL_'))
    for key in saved:
        del os.environ[key]
    yield
    os.environ.update(saved)
    shutil.rmtree(path)


@pytest.fixture()
def out_dir():
    path = tempfile.mkdtemp()
    yield path
    shutil.rmtree(path)
