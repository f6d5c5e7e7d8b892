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

import decorator
from click.testing import CliRunner

import glucoctl.configure.provider as provider

# Small networks and short warmups keep training tests fast.
FAST_TD3 = {
    'hidden_size': 8,
    'batch_size': 16,
    'warmup_steps': 32,
    'buffer_capacity': 5000,
}
FAST_TUNE = {
    'candidates': 1,
    'refine_rounds': 0,
    'scenarios': 'nominal',
    'seeds_per_scenario': 1,
}


def write_config(path, sections):
    """Writes {section: {key: value}} as an INI file."""
    with open(path, 'w') as f:
        for section, items in sections.items():
            f.write('[{}]\n'.format(section))
            for key, value in items.items():
                f.write('{} = {}\n'.format(key, value))
            f.write('\n')
    return path


def provide_conf(test):
    """Installs a ~/.glucoctlcfg with fast training and tuning settings for the test."""
    def wrapper(test, *args, **kwargs):
        write_config(os.path.join(provider._home, provider.DEFAULT_CONFIG_FILE),
                     {'td3': FAST_TD3, 'tune': FAST_TUNE})
        return test(*args, **kwargs)
    return decorator.decorator(wrapper, test)


def assert_cli_output(actual, expected):
    """
    Take runner stdout and assert it's value against an expected string. This just means appending
    a newline to the expected string since ``click.echo`` adds a newline to the output.
    """
    assert actual == expected + '\n'


def invoke_cli_runner(*args, **kwargs):
    """
    Helper method to invoke the CliRunner while asserting that the exit code is actually 0.
    """
    res = CliRunner().invoke(*args, **kwargs)
    assert res.exit_code == 0, 'Exit code was not 0. Output is: {}'.format(res.output)
    return res


def read_bytes(path):
    with open(path, 'rb') as f:
        return f.read()
