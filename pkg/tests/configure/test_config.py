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
# pylint:disable=protected-access
import click
from click.testing import CliRunner

import glucoctl.configure.config as config
from glucoctl.click_types import ContextObject
from glucoctl.utils import InvalidConfigurationError, eat_exceptions, echo_progress
from tests.utils import provide_conf, write_config


@provide_conf
def test_debug_option():
    # Test that context object debug_mode property changes with --debug flag fed.
    @click.command()
    @click.option('--debug-fed', type=bool)
    @config.debug_option
    def test_debug(debug_fed): # noqa
        ctx = click.get_current_context()
        context_object = ctx.ensure_object(ContextObject)
        assert context_object.debug_mode is debug_fed
    result = CliRunner().invoke(test_debug, ['--debug', '--debug-fed', 'True'])
    assert result.exit_code == 0
    result = CliRunner().invoke(test_debug, ['--debug-fed', 'False'])
    assert result.exit_code == 0

    # With --debug the original exception surfaces; without it a one-line error is printed.
    @click.command()
    @config.debug_option
    @eat_exceptions
    def test_debug_traceback():  # noqa
        raise KeyError('missing-checkpoint')
    result = CliRunner().invoke(test_debug_traceback, ['--debug'])
    assert result.exit_code == 1
    assert isinstance(result.exception, KeyError)
    assert 'Error:' not in result.output
    result = CliRunner().invoke(test_debug_traceback)
    assert result.exit_code == 1
    assert isinstance(result.exception, SystemExit)
    assert result.output == "Error: KeyError: 'missing-checkpoint'\n"
    assert 'Traceback' not in result.output


def test_quiet_option():
    @click.command()
    @config.quiet_option
    def test_command(): # noqa
        echo_progress('Episode 1/1')
        click.echo('done')

    assert CliRunner().invoke(test_command, []).output == 'Episode 1/1\ndone\n'
    assert CliRunner().invoke(test_command, ['--quiet']).output == 'done\n'


@provide_conf
def test_provide_run_config():
    @click.command()
    @config.seed_option
    @config.mode_option
    @config.provide_run_config
    def test_command(run_config): # noqa
        click.echo('{} {} {}'.format(run_config.run('mode'), run_config.run('seed'),
                                     run_config.get('td3', 'hidden_size')))

    result = CliRunner().invoke(test_command, ['--seed', '4', '--mode', 'static_fuzzy'])
    assert result.exit_code == 0
    assert result.output == 'static-fuzzy 4 8\n'
    result = CliRunner().invoke(test_command, [])
    assert result.output == 'direct 0 8\n'


def test_provide_run_config_from_config_option(tmpdir):
    path = write_config(tmpdir.join('run.ini').strpath, {'run': {'seed': 11}})

    @click.command()
    @config.seed_option
    @config.config_option
    @config.provide_run_config
    def test_command(run_config): # noqa
        click.echo(run_config.run('seed'))

    assert CliRunner().invoke(test_command, ['--config', path]).output == '11\n'
    assert CliRunner().invoke(test_command, ['--config', path, '--seed', '2']).output == '2\n'


def test_provide_run_config_invalid(tmpdir):
    path = write_config(tmpdir.join('bad.ini').strpath, {'run': {'horizon': 11}})

    @click.command()
    @config.config_option
    @config.provide_run_config
    def test_command(run_config): # noqa
        click.echo('unreachable')

    result = CliRunner().invoke(test_command, ['--config', path])
    assert result.exit_code == 1
    assert isinstance(result.exception, InvalidConfigurationError)


def test_seed_option_rejects_negative_seeds():
    @click.command()
    @config.seed_option
    def test_command(seed): # noqa
        pass

    assert CliRunner().invoke(test_command, ['--seed=-1']).exit_code == 2
