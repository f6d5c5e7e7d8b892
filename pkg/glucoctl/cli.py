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

import click

from glucoctl.configure.config import debug_option, quiet_option
from glucoctl.harness.cli import compare_cli, evaluate_cli, simulate_cli, train_cli, \
    tune_static_cli
from glucoctl.utils import CONTEXT_SETTINGS
from glucoctl.version import print_version_callback, version


@click.group(context_settings=CONTEXT_SETTINGS)
@click.option('--version', '-v', is_flag=True, callback=print_version_callback,
              expose_value=False, is_eager=True, help=version)
@debug_option
@quiet_option
def cli():
    pass


cli.add_command(simulate_cli, name='simulate')
cli.add_command(train_cli, name='train')
cli.add_command(tune_static_cli, name='tune-static')
cli.add_command(evaluate_cli, name='evaluate')
cli.add_command(compare_cli, name='compare')

if __name__ == "__main__":
    cli()
