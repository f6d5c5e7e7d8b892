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

import csv
import io
import json
import os
import sys
import traceback

import click
import six

from glucoctl.click_types import ContextObject

CONTEXT_SETTINGS = dict(help_option_names=['-h', '--help'])


def eat_exceptions(function):
    """
    Reports any exception as a one-line error and exits 1. With --debug the original exception
    propagates instead.
    """
    @six.wraps(function)
    def decorator(*args, **kwargs):
        try:
            return function(*args, **kwargs)
        except click.exceptions.Exit:
            raise
        except Exception as exception:  # noqa
            if _debug_mode():
                raise
            error_and_quit('{}: {}'.format(type(exception).__name__, str(exception)))

    decorator.__doc__ = function.__doc__
    return decorator


def _debug_mode():
    ctx = click.get_current_context(silent=True)
    return ctx is not None and ctx.ensure_object(ContextObject).debug_mode


def error_and_quit(message):
    if _debug_mode():
        traceback.print_exc()
    click.echo(u'Error: {}'.format(message))
    sys.exit(1)


def echo_progress(message):
    """
    Prints a progress line unless the current command runs with --quiet.
    Outside a click context the line is always printed.
    """
    ctx = click.get_current_context(silent=True)
    if ctx is not None and ctx.ensure_object(ContextObject).quiet:
        return
    click.echo(message)


def pretty_format(json_obj):
    return json.dumps(json_obj, indent=2, sort_keys=True)


def load_json(path):
    with io.open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def save_json(path, data):
    """
    Writes data to a JSON file through a temporary file, so an interrupted write never
    leaves a truncated artifact behind.

    :param path: Path of JSON file.
    :param data: JSON-serializable object.
    """
    tmp_path = path + '.tmp'
    with io.open(tmp_path, 'w', encoding='utf-8') as f:
        f.write(six.text_type(json.dumps(data, indent=2, sort_keys=True)))
        f.write(u'\n')
    os.replace(tmp_path, path)


def save_csv(path, columns, rows):
    """
    Writes dict rows to a CSV file with the given column order, atomically like save_json.
    """
    tmp_path = path + '.tmp'
    with io.open(tmp_path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    os.replace(tmp_path, path)


def ensure_dir(path):
    if path and not os.path.isdir(path):
        os.makedirs(path)
    return path


class InvalidConfigurationError(RuntimeError):
    @staticmethod
    def for_key(section, key):
        return InvalidConfigurationError(
            'Unknown configuration key "{}" in section [{}]. Run `{} --help` for the list '
            'of supported settings.'.format(key, section, os.path.basename(sys.argv[0])))
