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

import click
from tabulate import tabulate

from glucoctl.click_types import OutputClickType
from glucoctl.configure.config import config_option, debug_option, mode_option, out_option, \
    provide_run_config, quiet_option, scenario_option, seed_option
from glucoctl.configure.provider import get_run_config
from glucoctl.harness.api import CHECKPOINT_FILE, HarnessApi, TUNED_PARAMS_FILE
from glucoctl.utils import CONTEXT_SETTINGS, eat_exceptions, pretty_format


def _checkpoint_option(help_text):
    def wrapper(f):
        return click.option('--checkpoint', default=None, type=click.Path(),
                            help=help_text)(f)
    return wrapper


def _fuzzy_params_option(f):
    return click.option('--fuzzy-params', 'fuzzy_params', default=None, type=click.Path(),
                        help='TsParams JSON file for static-fuzzy mode. Defaults to the '
                             'shipped parameter set.')(f)


def _output_option(f):
    return click.option('--output', default=None, type=OutputClickType(),
                        help=OutputClickType.help)(f)


def _workers_option(f):
    return click.option('--workers', default=None, type=click.IntRange(min=1),
                        help='Worker threads for evaluation episodes.')(f)


def _format_value(value):
    if isinstance(value, float):
        return '{:.4f}'.format(value)
    return value


def _print_rows(rows, output):
    if OutputClickType.is_json(output):
        click.echo(pretty_format(rows))
        return
    if not rows:
        return
    headers = list(rows[0].keys())
    table = [[_format_value(row[h]) for h in headers] for row in rows]
    click.echo(tabulate(table, headers=headers, tablefmt='plain'))


@click.command(context_settings=CONTEXT_SETTINGS,
               short_help='Runs one closed-loop episode and writes its trajectory.')
@mode_option
@scenario_option
@seed_option
@_checkpoint_option('Training checkpoint for direct and adaptive-fuzzy modes.')
@_fuzzy_params_option
@out_option
@_output_option
@config_option
@quiet_option
@debug_option
@eat_exceptions
@provide_run_config
def simulate_cli(run_config, output):
    """
    Runs one deterministic episode of a controller on a scenario.

    Writes trajectory.csv, metrics.json and effective_config.ini into the output directory.
    """
    metrics = HarnessApi(run_config).simulate()
    if OutputClickType.is_json(output):
        click.echo(pretty_format(metrics.to_dict()))
    else:
        click.echo(tabulate([(k, _format_value(v)) for k, v in metrics.to_dict().items()],
                            tablefmt='plain'))


@click.command(context_settings=CONTEXT_SETTINGS,
               short_help='Trains a TD3 controller.')
@mode_option
@scenario_option
@seed_option
@click.option('--episodes', default=None, type=click.IntRange(min=1),
              help='Total number of training episodes.')
@_checkpoint_option('Resume training from this checkpoint.')
@out_option
@config_option
@quiet_option
@debug_option
@eat_exceptions
@provide_run_config
def train_cli(run_config):
    """
    Trains a TD3 agent in direct or adaptive-fuzzy mode.

    Writes agent.json (checkpoint, refreshed periodically) and learning_curve.csv. Training
    resumed from a checkpoint continues exactly as the uninterrupted run would have.
    """
    api = HarnessApi(run_config)
    curve = api.train()
    click.echo('Trained {} episodes; checkpoint written to {}'.format(
        len(curve), os.path.join(api.out_dir, CHECKPOINT_FILE)))


@click.command(context_settings=CONTEXT_SETTINGS,
               short_help='Tunes the static fuzzy controller parameters.')
@seed_option
@out_option
@config_option
@quiet_option
@debug_option
@eat_exceptions
@provide_run_config
def tune_static_cli(run_config):
    """
    Searches the 27 static-fuzzy consequent parameters for the best mean episode return over
    the [tune] scenarios. Writes static_params.json.
    """
    api = HarnessApi(run_config)
    _, score, initial_score = api.tune_static()
    click.echo('Best score {:.4f} (start {:.4f}); parameters written to {}'.format(
        score, initial_score, os.path.join(api.out_dir, TUNED_PARAMS_FILE)))


@click.command(context_settings=CONTEXT_SETTINGS,
               short_help='Evaluates a controller over scenarios and seeds.')
@mode_option
@scenario_option
@seed_option
@_checkpoint_option('Training checkpoint for direct and adaptive-fuzzy modes.')
@_fuzzy_params_option
@out_option
@_workers_option
@_output_option
@config_option
@quiet_option
@debug_option
@eat_exceptions
@provide_run_config
def evaluate_cli(run_config, output):
    """
    Evaluates a controller on every (scenario, seed) pair and writes evaluation.csv and
    evaluation.json.

    By default the four randomized meal cases and the extreme-meal day are evaluated.
    """
    _print_rows(HarnessApi(run_config).evaluate(), output)


def _labels(paths):
    labels = []
    for path in paths:
        label = os.path.splitext(os.path.basename(path))[0]
        if label in labels:
            label = '{}-{}'.format(label, len(labels) + 1)
        labels.append(label)
    return labels


@click.command(context_settings=CONTEXT_SETTINGS,
               short_help='Compares controllers side by side.')
@click.argument('controller_configs', nargs=-1, required=True, type=click.Path(exists=True))
@scenario_option
@seed_option
@out_option
@_workers_option
@_output_option
@config_option
@quiet_option
@debug_option
@eat_exceptions
@provide_run_config
def compare_cli(run_config, controller_configs, output):
    """
    Compares controllers, each described by its own INI config file (mode plus checkpoint or
    fuzzy_params), on the same scenario and seed grid.

    Writes comparison.csv with deltas against the first controller, comparison.json and
    comparison_trajectories.csv.
    """
    configs = [get_run_config(path, run_config.flags) for path in controller_configs]
    rows = HarnessApi(run_config).compare(configs, _labels(controller_configs))
    _print_rows(rows, output)
