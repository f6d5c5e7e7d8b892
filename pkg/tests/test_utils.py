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

import mock

import glucoctl.utils as utils


def test_eat_exceptions_normal_case():
    """
    If no exceptions, this wrapper should do nothing.
    """

    @utils.eat_exceptions
    def test_function(x):
        return x

    assert test_function(1) == 1


def test_eat_exceptions_reports_error_type():
    with mock.patch('glucoctl.utils.error_and_quit') as error_and_quit_mock:
        @utils.eat_exceptions
        def test_function():
            raise ValueError('bad seed')

        test_function()
        assert error_and_quit_mock.call_count == 1
        assert error_and_quit_mock.call_args[0][0] == 'ValueError: bad seed'


def test_save_json(tmpdir):
    path = tmpdir.join('doc.json').strpath
    utils.save_json(path, {'b': 1, 'a': [1.5]})
    assert utils.load_json(path) == {'a': [1.5], 'b': 1}
    assert not os.path.exists(path + '.tmp')


def test_save_csv(tmpdir):
    path = tmpdir.join('rows.csv').strpath
    utils.save_csv(path, ('x', 'y'), [{'y': 2, 'x': 1}, {'x': 3, 'y': 4}])
    with open(path) as f:
        assert f.read() == 'x,y\n1,2\n3,4\n'


def test_ensure_dir(tmpdir):
    path = tmpdir.join('a', 'b').strpath
    assert utils.ensure_dir(path) == path
    assert os.path.isdir(path)
    assert utils.ensure_dir(path) == path


def test_echo_progress_outside_command():
    with mock.patch('glucoctl.utils.click.echo') as echo_mock:
        utils.echo_progress('Episode 1/3')
        assert echo_mock.call_args[0][0] == 'Episode 1/3'
