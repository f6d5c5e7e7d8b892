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
Orchestration behind the command line: episode rollouts, training, static tuning, evaluation
and controller comparison. Every method writes its artifacts plus the effective configuration
into the output directory of the run.
"""

import os
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from glucoctl.configure.provider import RUN_SECTION, split_list, update_and_persist_config
from glucoctl.env.glucose_env import GlucoseEnv, param_bounds
from glucoctl.env.scenarios import EVALUATION_SUITE, get_scenario
from glucoctl.env.types import ControllerMode
from glucoctl.fuzzy.params_file import SHIPPED_STATIC_PARAMS, load_ts_params, save_ts_params
from glucoctl.fuzzy.ts import TsParams
from glucoctl.harness.exceptions import ArtifactError, GridMismatchError
from glucoctl.harness.metrics import REPORT_FIELDS, compute_metrics
from glucoctl.td3.agent import Td3Agent
from glucoctl.td3.training import train
from glucoctl.utils import echo_progress, ensure_dir, load_json, save_csv, save_json

TRAJECTORY_COLUMNS = ('time_min', 'G_mgdl', 'e', 'de', 'u_mU_per_min', 'reward', 'reward_base',
                      'penalty_i', 'penalty_c', 'meal_g', 'terminated', 'truncated')
LEARNING_CURVE_COLUMNS = ('episode', 'return', 'length', 'termination_cause',
                          'critic_updates', 'actor_updates')
DELTA_FIELDS = tuple(f for f in REPORT_FIELDS if f != 'termination_cause')

EFFECTIVE_CONFIG_FILE = 'effective_config.ini'
TRAJECTORY_FILE = 'trajectory.csv'
METRICS_FILE = 'metrics.json'
CHECKPOINT_FILE = 'agent.json'
LEARNING_CURVE_FILE = 'learning_curve.csv'
TUNED_PARAMS_FILE = 'static_params.json'
EVALUATION_CSV = 'evaluation.csv'
EVALUATION_JSON = 'evaluation.json'
COMPARISON_CSV = 'comparison.csv'
COMPARISON_JSON = 'comparison.json'
COMPARISON_TRAJECTORIES = 'comparison_trajectories.csv'

TRAINING_CHECKPOINT_VERSION = 1
SUMMARY_VERSION = 1


class Controller(object):
    """A policy for one controller mode: a trained actor, or fixed TsParams."""
    def __init__(self, mode, agent=None, params=None, label=None):
        self.mode = mode
        self.agent = agent
        self.params = params
        self.label = label or mode

    def action(self, obs):
        if self.mode == ControllerMode.STATIC_FUZZY:
            return None
        return self.agent.policy_action(np.asarray(obs, dtype=float))


class Rollout(object):
    def __init__(self, rows, metrics):
        self.rows = rows
        self.metrics = metrics


def rollout(env, controller, scenario, seed):
    """Plays one deterministic episode and records a trajectory row per control step."""
    obs = env.reset(scenario, seed)
    rows = []
    rewards = []
    minutes = []
    while True:
        result = env.step(controller.action(obs))
        info = result.info
        components = info['components']
        rows.append(OrderedDict([
            ('time_min', info['t']),
            ('G_mgdl', info['G']),
            ('e', info['e']),
            ('de', info['de']),
            ('u_mU_per_min', info['u']),
            ('reward', result.reward),
            ('reward_base', components.base),
            ('penalty_i', components.penalty_i),
            ('penalty_c', components.penalty_c),
            ('meal_g', info['meal_g']),
            ('terminated', int(result.terminated)),
            ('truncated', int(result.truncated)),
        ]))
        rewards.append(result.reward)
        minutes.append(info['minutes'])
        obs = result.obs
        if result.terminated or result.truncated:
            break
    cfg = env.cfg
    metrics = compute_metrics(
        [row['G_mgdl'] for row in rows],
        [row['u_mU_per_min'] for row in rows],
        minutes,
        rewards=rewards,
        termination_cause=info['termination_cause'],
        horizon_samples=cfg.steps_per_episode,
        G_ref=cfg.G_ref, safe_low=cfg.safe_low, safe_high=cfg.safe_high)
    return Rollout(rows, metrics)


def evaluation_grid(run_config):
    """(scenario names, seeds) a run config asks to be evaluated on."""
    names = split_list(run_config.run('scenarios'))
    if not names:
        names = [run_config.run('scenario')]
    seed = run_config.run('seed')
    return names, [seed + k for k in range(run_config.run('eval_seeds'))]


class HarnessApi(object):
    def __init__(self, run_config):
        self.config = run_config

    @property
    def out_dir(self):
        return ensure_dir(self.config.run('out'))

    def _out_path(self, name):
        return os.path.join(self.out_dir, name)

    def persist_config(self, name=EFFECTIVE_CONFIG_FILE, run_config=None):
        update_and_persist_config(self._out_path(name), run_config or self.config)

    def load_controller(self, run_config=None, label=None):
        """
        Static-fuzzy controllers read [run] fuzzy_params, falling back to the shipped set;
        learned controllers need a training checkpoint in [run] checkpoint.
        """
        run_config = run_config or self.config
        mode = run_config.run('mode')
        if mode == ControllerMode.STATIC_FUZZY:
            path = run_config.run('fuzzy_params') or SHIPPED_STATIC_PARAMS
            if not os.path.isfile(path):
                raise ArtifactError('TsParams file not found: {}'.format(path))
            return Controller(mode, params=load_ts_params(path), label=label)
        path = run_config.run('checkpoint')
        if not path:
            raise ArtifactError('{} mode needs a training checkpoint (--checkpoint)'.format(mode))
        document = self._load_training_checkpoint(path)
        if document['mode'] != mode:
            raise ArtifactError('Checkpoint {} was trained in {} mode, not {}'.format(
                path, document['mode'], mode))
        return Controller(mode, agent=Td3Agent.from_dict(document['agent']), label=label)

    def build_env(self, controller=None, run_config=None, mode=None, static_params=None):
        run_config = run_config or self.config
        if controller is not None:
            mode = controller.mode
            static_params = controller.params
        return GlucoseEnv(run_config.env_config(mode), run_config.patient_params(),
                          static_params)

    def simulate(self):
        """
        Runs one deterministic episode of the configured controller and scenario.

        :return: MetricsReport
        """
        cfg = self.config
        controller = self.load_controller()
        scenario = get_scenario(cfg.run('scenario'))
        result = rollout(self.build_env(controller), controller, scenario, cfg.run('seed'))
        save_csv(self._out_path(TRAJECTORY_FILE), TRAJECTORY_COLUMNS, result.rows)
        save_json(self._out_path(METRICS_FILE), {
            'version': SUMMARY_VERSION,
            'mode': controller.mode,
            'scenario': scenario.name,
            'seed': cfg.run('seed'),
            'metrics': result.metrics.to_dict(),
        })
        self.persist_config()
        return result.metrics

    @staticmethod
    def _load_training_checkpoint(path):
        if not os.path.isfile(path):
            raise ArtifactError('Checkpoint not found: {}'.format(path))
        document = load_json(path)
        if document.get('version') != TRAINING_CHECKPOINT_VERSION:
            raise ArtifactError('Unsupported checkpoint version {!r} in {}'.format(
                document.get('version'), path))
        return document

    def train(self):
        """
        Trains a TD3 agent, resuming from [run] checkpoint when one is given. A checkpoint
        is written every checkpoint_every episodes and after the last one.

        :return: learning curve rows
        """
        cfg = self.config
        mode = cfg.run('mode')
        if mode not in ControllerMode.LEARNED:
            raise ValueError('train needs mode {}, got {}'.format(
                ' or '.join(ControllerMode.LEARNED), mode))
        env = self.build_env(mode=mode)
        scenario = get_scenario(cfg.run('scenario'))
        episodes = cfg.run('episodes')
        every = max(1, cfg.run('checkpoint_every'))

        resume_path = cfg.run('checkpoint')
        if resume_path:
            document = self._load_training_checkpoint(resume_path)
            if document['mode'] != mode:
                raise ArtifactError('Checkpoint {} was trained in {} mode, not {}'.format(
                    resume_path, document['mode'], mode))
            agent = Td3Agent.from_dict(document['agent'])
            master_seed = document['master_seed']
            start = document['episodes_done']
            curve = document['learning_curve']
        else:
            master_seed = cfg.run('seed')
            agent = Td3Agent(cfg.td3_config(env.action_dim, env.obs_dim),
                             np.random.default_rng(master_seed))
            start = 0
            curve = []

        checkpoint_path = self._out_path(CHECKPOINT_FILE)
        curve_path = self._out_path(LEARNING_CURVE_FILE)
        self.persist_config()

        def on_episode(summary, agent):
            curve.append(OrderedDict([
                ('episode', summary.episode),
                ('return', summary.episode_return),
                ('length', summary.length),
                ('termination_cause', summary.final_info['termination_cause']),
                ('critic_updates', agent.critic_updates),
                ('actor_updates', agent.actor_updates),
            ]))
            echo_progress('Episode {}/{}: return={:.3f} length={} end={}'.format(
                summary.episode + 1, episodes, summary.episode_return, summary.length,
                summary.final_info['termination_cause']))
            done = summary.episode + 1
            if done % every == 0 or done == episodes:
                save_json(checkpoint_path, {
                    'version': TRAINING_CHECKPOINT_VERSION,
                    'mode': mode,
                    'scenario': scenario.name,
                    'master_seed': master_seed,
                    'episodes_done': done,
                    'learning_curve': curve,
                    'agent': agent.to_dict(),
                })
                save_csv(curve_path, LEARNING_CURVE_COLUMNS, curve)

        train(env, agent, episodes, master_seed, start_episode=start, on_episode=on_episode,
              reset_kwargs={'scenario': scenario})
        save_csv(curve_path, LEARNING_CURVE_COLUMNS, curve)
        return curve

    def _tuning_grid(self):
        cfg = self.config
        seed = cfg.run('seed')
        names = split_list(cfg.tune('scenarios'))
        if not names:
            raise ValueError('tune-static needs at least one scenario in [tune] scenarios')
        return [(get_scenario(name), seed + k) for name in names
                for k in range(cfg.tune('seeds_per_scenario'))]

    def score_static(self, params, grid=None):
        """Mean episode return of a static-fuzzy controller over the tuning grid."""
        grid = grid or self._tuning_grid()
        controller = Controller(ControllerMode.STATIC_FUZZY, params=params)
        env = self.build_env(controller)
        returns = [rollout(env, controller, scenario, seed).metrics.episode_return
                   for scenario, seed in grid]
        return float(np.mean(returns))

    def tune_static(self):
        """
        Seeded random search over the parameter box, followed by coordinate refinement with
        a step that halves every round. Starts from the midpoint of every range and only
        ever accepts improvements.

        :return: (best TsParams, best score, score of the starting point)
        """
        cfg = self.config
        grid = self._tuning_grid()
        rng = np.random.default_rng(cfg.run('seed'))
        lower, upper = param_bounds(cfg.env_config(ControllerMode.STATIC_FUZZY))

        best = (lower + upper) / 2.0
        best_score = initial_score = self.score_static(TsParams(best), grid)
        echo_progress('Initial midpoint candidate: score={:.3f}'.format(initial_score))

        candidates = cfg.tune('candidates')
        for k in range(candidates):
            values = rng.uniform(lower, upper)
            score = self.score_static(TsParams(values), grid)
            if score > best_score:
                best, best_score = values, score
            echo_progress('Random candidate {}/{}: score={:.3f} best={:.3f}'.format(
                k + 1, candidates, score, best_score))

        step = (upper - lower) / 4.0
        rounds = cfg.tune('refine_rounds')
        for r in range(rounds):
            for i in range(len(best)):
                for direction in (1.0, -1.0):
                    values = best.copy()
                    values[i] = min(max(values[i] + direction * step[i], lower[i]), upper[i])
                    if values[i] == best[i]:
                        continue
                    score = self.score_static(TsParams(values), grid)
                    if score > best_score:
                        best, best_score = values, score
                        break
            step = step / 2.0
            echo_progress('Refinement round {}/{}: best={:.3f}'.format(r + 1, rounds,
                                                                       best_score))

        params = TsParams(best)
        save_ts_params(self._out_path(TUNED_PARAMS_FILE), params, best_score)
        self.persist_config()
        return params, best_score, initial_score

    def _run_grid(self, controller, names, seeds, run_config=None):
        """Rollouts of every (scenario, seed) pair, fanned over [run] workers threads."""
        jobs = [(name, seed) for name in names for seed in seeds]

        def job(name, seed):
            env = self.build_env(controller, run_config)
            return rollout(env, controller, get_scenario(name), seed)

        workers = max(1, self.config.run('workers'))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = OrderedDict((key, pool.submit(job, *key)) for key in jobs)
            return OrderedDict((key, future.result()) for key, future in futures.items())

    def evaluate(self):
        """
        Evaluates the configured controller on scenarios x seeds. Without [run] scenarios or
        --scenario the randomized cases plus the extreme-meal day are used.

        :return: list of rows, one per (scenario, seed)
        """
        cfg = self.config
        names, seeds = evaluation_grid(cfg)
        if not cfg.run('scenarios') and 'scenario' not in cfg.explicit(RUN_SECTION):
            names = list(EVALUATION_SUITE)
        controller = self.load_controller()
        results = self._run_grid(controller, names, seeds)
        rows = []
        for (name, seed), result in results.items():
            row = OrderedDict([('scenario', name), ('seed', seed)])
            row.update(result.metrics.to_dict())
            rows.append(row)
            echo_progress('{} seed {}: time_in_range={:.3f} return={:.3f}'.format(
                name, seed, result.metrics.time_in_range, result.metrics.episode_return))
        save_csv(self._out_path(EVALUATION_CSV), ('scenario', 'seed') + REPORT_FIELDS, rows)
        save_json(self._out_path(EVALUATION_JSON), {
            'version': SUMMARY_VERSION, 'mode': controller.mode, 'rows': rows})
        self.persist_config()
        return rows

    def compare(self, controller_configs, labels):
        """
        Runs every controller over the same scenario x seed grid.

        :param controller_configs: RunConfig per controller, at least two.
        :param labels: display name per controller.
        :return: rows ordered by (scenario, seed, controller) with deltas against the first
          controller.
        """
        if len(controller_configs) < 2:
            raise ValueError('compare needs at least two controllers')
        grids = [evaluation_grid(c) for c in controller_configs]
        for label, grid in zip(labels[1:], grids[1:]):
            if grid != grids[0]:
                raise GridMismatchError(
                    'Controller {} runs scenarios {} with seeds {}, but {} runs {} with {}'
                    .format(label, grid[0], grid[1], labels[0], grids[0][0], grids[0][1]))
        names, seeds = grids[0]

        results = []
        for run_config, label in zip(controller_configs, labels):
            controller = self.load_controller(run_config, label)
            results.append(self._run_grid(controller, names, seeds, run_config))
            self.persist_config('effective_config_{}.ini'.format(label), run_config)

        rows = []
        trajectories = []
        for key in results[0]:
            reference = results[0][key].metrics.to_dict()
            for label, per_controller in zip(labels, results):
                result = per_controller[key]
                row = OrderedDict([('scenario', key[0]), ('seed', key[1]),
                                   ('controller', label)])
                metrics = result.metrics.to_dict()
                row.update(metrics)
                for field in DELTA_FIELDS:
                    row['delta_' + field] = metrics[field] - reference[field]
                rows.append(row)
                for trajectory_row in result.rows:
                    combined = OrderedDict([('controller', label), ('scenario', key[0]),
                                            ('seed', key[1])])
                    combined.update(trajectory_row)
                    trajectories.append(combined)

        columns = ('scenario', 'seed', 'controller') + REPORT_FIELDS + \
            tuple('delta_' + f for f in DELTA_FIELDS)
        save_csv(self._out_path(COMPARISON_CSV), columns, rows)
        save_csv(self._out_path(COMPARISON_TRAJECTORIES),
                 ('controller', 'scenario', 'seed') + TRAJECTORY_COLUMNS, trajectories)
        save_json(self._out_path(COMPARISON_JSON), {
            'version': SUMMARY_VERSION, 'controllers': list(labels), 'rows': rows})
        self.persist_config()
        return rows
