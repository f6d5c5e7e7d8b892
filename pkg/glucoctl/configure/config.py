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
import six

from glucoctl.click_types import ContextObject, ModeClickType, ScenarioClickType, \
    SeedClickType
from glucoctl.configure.provider import get_run_config, RUN_SECTION

# Command-line flags that override [run] settings.
FLAG_KEYS = ('mode', 'scenario', 'seed', 'episodes', 'checkpoint', 'fuzzy_params', 'out',
             'workers')


def provide_run_config(function):
    """
    Injects the run_config keyword argument to the wrapped function. The [run] flags of the
    command are folded into the configuration instead of being passed through.
    """
    @six.wraps(function)
    def decorator(*args, **kwargs):
        flags = dict((key, kwargs.pop(key)) for key in FLAG_KEYS if key in kwargs)
        kwargs['run_config'] = get_run_config(get_config_path_from_context(),
                                              {RUN_SECTION: flags})
        return function(*args, **kwargs)
    decorator.__doc__ = function.__doc__
    return decorator


def get_config_path_from_context():
    ctx = click.get_current_context()
    context_object = ctx.ensure_object(ContextObject)
    return context_object.get_config_path()


def debug_option(f):
    def callback(ctx, param, value): #  NOQA
        if value:
            ctx.ensure_object(ContextObject).set_debug(True)
    return click.option('--debug', is_flag=True, callback=callback,
                        expose_value=False, help="Debug Mode. Shows full stack trace on error.")(f)


def quiet_option(f):
    def callback(ctx, param, value): #  NOQA
        if value:
            ctx.ensure_object(ContextObject).set_quiet(True)
    return click.option('--quiet', '-q', is_flag=True, callback=callback,
                        expose_value=False, help='Suppress progress output.')(f)


def config_option(f):
    def callback(ctx, param, value): #  NOQA
        if value is not None:
            context_object = ctx.ensure_object(ContextObject)
            context_object.set_config_path(value)
    return click.option('--config', required=False, default=None, callback=callback,
                        expose_value=False, type=click.Path(),
                        help='INI config file. Defaults to $GLUCOCTL_CONFIG_FILE or '
                             '~/.glucoctlcfg when present.')(f)


def seed_option(f):
    return click.option('--seed', default=None, type=SeedClickType(),
                        help=SeedClickType.help)(f)


def mode_option(f):
    return click.option('--mode', default=None, type=ModeClickType(),
                        help=ModeClickType.help)(f)


def scenario_option(f):
    return click.option('--scenario', default=None, type=ScenarioClickType(),
                        help=ScenarioClickType.help)(f)


def out_option(f):
    return click.option('--out', default=None, type=click.Path(),
                        help='Output directory. Created when missing.')(f)
