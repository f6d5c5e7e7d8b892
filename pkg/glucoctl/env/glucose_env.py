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
Closed-loop glucose regulation environment.

Every control period the controller sees the normalized glucose error and its rate, chooses an
action, and the patient is integrated over the period with the resulting insulin infusion held
constant. Episodes end on a safety violation (terminated) or after one day (truncated).
"""

import math

import numpy as np

from glucoctl.env.exceptions import ActionShapeError, EpisodeFinishedError
from glucoctl.env.types import ControllerMode, Observation, RewardComponents, StepResult
from glucoctl.fuzzy.ts import FisInputConfig, PARAM_COUNT, T_NORMS, T_NORM_PRODUCT, TsParams, \
    clamp_actuation, ts_evaluate
from glucoctl.patient.model import DAY_MINUTES, PatientParams, find_basal, glucose_mgdl, \
    steady_state, step_rk4

REWARD_RECONSTRUCTED = 'reconstructed'
REWARD_PRINTED = 'printed'
REWARD_VARIANTS = (REWARD_RECONSTRUCTED, REWARD_PRINTED)

CLOSE_BAND = 10.0  # mg/dL
PENALTY_I_WEIGHT = 2e-6
PENALTY_C_WEIGHT = 1e-6

HYPERGLYCEMIA = 'hyperglycemia'
HYPOGLYCEMIA = 'hypoglycemia'
TRUNCATED = 'truncated'


class EnvConfig(object):
    """``FIELDS`` maps each setting to its type and is the schema of the [env] section."""
    FIELDS = {
        'mode': str,
        'G_ref': float,
        'safe_low': float,
        'safe_high': float,
        'term_low': float,
        'term_high': float,
        'episode_length': float,
        'control_period': float,
        'dt': float,
        'u_max': float,
        'e_scale': float,
        'de_scale': float,
        'a_min': float,
        'a_max': float,
        'b_min': float,
        'b_max': float,
        'c_min': float,
        'c_max': float,
        'reward_variant': str,
        't_norm': str,
        'basal_tol': float,
    }
    DEFAULTS = {
        'mode': ControllerMode.DIRECT,
        'G_ref': 90.0,
        'safe_low': 70.0,
        'safe_high': 180.0,
        'term_low': 50.0,
        'term_high': 300.0,
        'episode_length': float(DAY_MINUTES),
        'control_period': 5.0,
        'dt': 1.0,
        'u_max': 100.0,
        'e_scale': 300.0,
        'de_scale': 10.0,
        'a_min': 0.0,
        'a_max': 2.0,
        'b_min': 0.0,
        'b_max': 20.0,
        'c_min': 0.0,
        'c_max': 30.0,
        'reward_variant': REWARD_RECONSTRUCTED,
        't_norm': T_NORM_PRODUCT,
        'basal_tol': 1.0,
    }

    def __init__(self, **kwargs):
        unknown = sorted(set(kwargs) - set(self.FIELDS))
        if unknown:
            raise ValueError('Unknown environment setting(s): {}'.format(', '.join(unknown)))
        for name, kind in self.FIELDS.items():
            setattr(self, name, kind(kwargs.get(name, self.DEFAULTS[name])))
        self.mode = ControllerMode.normalize(self.mode)
        self._validate()

    def _validate(self):
        if not self.term_low < self.safe_low < self.G_ref < self.safe_high < self.term_high:
            raise ValueError('Glucose thresholds must satisfy term_low < safe_low < G_ref < '
                             'safe_high < term_high')
        if not (self.dt > 0 and self.control_period > 0 and self.episode_length > 0):
            raise ValueError('dt, control_period and episode_length must be > 0')
        if not _divides(self.control_period, self.episode_length):
            raise ValueError('control_period {} does not divide episode_length {}'.format(
                self.control_period, self.episode_length))
        if not _divides(self.dt, self.control_period):
            raise ValueError('dt {} does not divide control_period {}'.format(
                self.dt, self.control_period))
        if not self.u_max > 0:
            raise ValueError('u_max must be > 0, got {}'.format(self.u_max))
        if not (self.e_scale > 0 and self.de_scale > 0):
            raise ValueError('Normalization scales must be > 0')
        for name in 'abc':
            if not getattr(self, name + '_min') <= getattr(self, name + '_max'):
                raise ValueError('{0}_min must not exceed {0}_max'.format(name))
        if self.reward_variant not in REWARD_VARIANTS:
            raise ValueError('reward_variant must be one of {}'.format(', '.join(
                REWARD_VARIANTS)))
        if self.t_norm not in T_NORMS:
            raise ValueError('t_norm must be one of {}'.format(', '.join(T_NORMS)))

    @property
    def steps_per_episode(self):
        return int(round(self.episode_length / self.control_period))

    @property
    def substeps(self):
        return int(round(self.control_period / self.dt))

    def replace(self, **changes):
        values = self.to_dict()
        values.update(changes)
        return EnvConfig(**values)

    def to_dict(self):
        return dict((name, getattr(self, name)) for name in sorted(self.FIELDS))

    def __eq__(self, other):
        if isinstance(other, self.__class__):
            return self.to_dict() == other.to_dict()
        return False

    def __ne__(self, other):
        return not self == other


def _divides(step, span):
    n = round(span / step)
    return n >= 1 and abs(n * step - span) <= 1e-9 * span


def observe(G, G_prev, dt_ctrl, cfg):
    """
    Normalized (error, error rate) observation, each clipped to [-1, 1].
    """
    if not (math.isfinite(G) and math.isfinite(G_prev)):
        raise ValueError('Glucose samples must be finite, got {!r} and {!r}'.format(G, G_prev))
    e = G - cfg.G_ref
    de = (G - G_prev) / dt_ctrl
    return Observation(min(max(e / cfg.e_scale, -1.0), 1.0),
                       min(max(de / cfg.de_scale, -1.0), 1.0))


def reward(e, i_acc, c_acc, variant=REWARD_RECONSTRUCTED):
    """
    Shaped reward for glucose error e (mg/dL) minus the error and insulin integral penalties.

    Within 10 mg/dL of the reference the base term falls from 20 at e = 0 to about 0 at
    |e| = 10. Outside that band it is linear in |e| and three and a half times steeper on the
    hypoglycemic side.

    :return: (total, RewardComponents)
    """
    if i_acc < 0 or c_acc < 0:
        raise ValueError('Reward accumulators must be >= 0')
    magnitude = abs(e)
    if magnitude <= CLOSE_BAND:
        if variant == REWARD_PRINTED:
            base = 1.262 * magnitude ** 0.2 + 2.0
        else:
            base = 20.0 - 12.62 * magnitude ** 0.2
    elif e < 0:
        base = (1.0 - magnitude) / 20.0
    else:
        base = (1.0 - magnitude) / 70.0
    penalty_i = PENALTY_I_WEIGHT * i_acc
    penalty_c = PENALTY_C_WEIGHT * c_acc
    return base - penalty_i - penalty_c, RewardComponents(base, penalty_i, penalty_c)


def scale_action_direct(a, u_max):
    """Maps an actor output in [-1, 1] onto an infusion rate in [0, u_max] mU/min."""
    return (a + 1.0) / 2.0 * u_max


def param_bounds(cfg):
    """Lower and upper bound of each of the 27 consequent parameters, in TsParams order."""
    lower = np.tile([cfg.a_min, cfg.b_min, cfg.c_min], PARAM_COUNT // 3)
    upper = np.tile([cfg.a_max, cfg.b_max, cfg.c_max], PARAM_COUNT // 3)
    return lower, upper


def scale_action_params(a, cfg):
    a = np.asarray(a, dtype=float)
    lower, upper = param_bounds(cfg)
    return TsParams(lower + (a + 1.0) / 2.0 * (upper - lower))


class GlucoseEnv(object):
    obs_dim = 2

    def __init__(self, cfg=None, patient=None, static_params=None, fis=None):
        self.cfg = cfg or EnvConfig()
        self.patient = patient or PatientParams()
        self.fis = fis or FisInputConfig.default(self.cfg.t_norm)
        if self.cfg.mode == ControllerMode.STATIC_FUZZY and static_params is None:
            raise ValueError('static-fuzzy mode needs a TsParams set')
        self.static_params = static_params
        self.action_dim = ControllerMode.action_dim(self.cfg.mode)
        self._state = None
        self._meals = []
        self._t = 0.0
        self._G = None
        self._obs = None
        self._e = 0.0
        self._de = 0.0
        self.i_acc = 0.0
        self.c_acc = 0.0
        self._done = True

    @property
    def basal(self):
        """Infusion rate holding the patient at G_ref, mU/min."""
        return find_basal(self.patient, self.cfg.G_ref, tol=self.cfg.basal_tol, dt=self.cfg.dt)

    @property
    def meals(self):
        return list(self._meals)

    @property
    def t(self):
        return self._t

    def reset(self, scenario, seed=0):
        """
        Starts an episode at the basal steady state for G_ref with the meals of scenario.
        """
        self._meals = scenario.materialize(seed)
        self._state = steady_state(self.patient, self.basal)
        self._t = 0.0
        self.i_acc = 0.0
        self.c_acc = 0.0
        self._done = False
        return self._sample(glucose_mgdl(self._state, self.patient), None, None)

    def _sample(self, G, G_prev, minutes):
        """Records a glucose sample; G_prev None means no motion since the last one."""
        if G_prev is None:
            G_prev, minutes = G, self.cfg.control_period
        self._G = G
        self._e = G - self.cfg.G_ref
        self._de = (G - G_prev) / minutes
        self._obs = observe(G, G_prev, minutes, self.cfg)
        return self._obs

    def get_state(self):
        return self._state

    def set_state(self, state):
        """Overrides the patient state mid-episode; the next observation treats it as steady."""
        if self._done:
            raise EpisodeFinishedError('Episode finished; call reset() first')
        self._state = state
        return self._sample(glucose_mgdl(state, self.patient), None, None)

    def _check_action(self, action):
        if self.cfg.mode == ControllerMode.STATIC_FUZZY:
            if action is not None and np.size(action) != 0:
                raise ActionShapeError('static-fuzzy mode takes no action, got {}'.format(
                    np.asarray(action).tolist()))
            return None
        if action is None:
            raise ActionShapeError('{} mode needs an action of length {}'.format(
                self.cfg.mode, self.action_dim))
        action = np.asarray(action, dtype=float)
        if action.shape != (self.action_dim,):
            raise ActionShapeError('{} mode needs an action of shape ({},), got {}'.format(
                self.cfg.mode, self.action_dim, action.shape))
        if not np.all(np.isfinite(action)) or np.any(np.abs(action) > 1.0):
            raise ActionShapeError('Action components must lie in [-1, 1]: {}'.format(
                action.tolist()))
        return action

    def _resolve_insulin(self, action):
        """:return: (u, active TsParams or None, coverage gap flag)"""
        cfg = self.cfg
        if cfg.mode == ControllerMode.DIRECT:
            return scale_action_direct(float(action[0]), cfg.u_max), None, False
        if cfg.mode == ControllerMode.ADAPTIVE_FUZZY:
            params = scale_action_params(action, cfg)
        else:
            params = self.static_params
        output = ts_evaluate(self._e, self._de, params, self.fis)
        return clamp_actuation(output.value, cfg.u_max), params, output.coverage_gap

    def step(self, action=None):
        if self._done:
            raise EpisodeFinishedError('Episode finished; call reset() first')
        cfg = self.cfg
        action = self._check_action(action)
        u, params, coverage_gap = self._resolve_insulin(action)

        t_start = self._t
        G_start = self._G
        G = G_start
        cause = None
        elapsed = 0.0
        for k in range(cfg.substeps):
            self._state = step_rk4(self._state, t_start + k * cfg.dt, cfg.dt, u, self._meals,
                                   self.patient)
            elapsed = (k + 1) * cfg.dt
            G = glucose_mgdl(self._state, self.patient)
            if G > cfg.term_high:
                cause = HYPERGLYCEMIA
                break
            if G < cfg.term_low:
                cause = HYPOGLYCEMIA
                break
        self._t = t_start + elapsed
        e_norm_start = abs(self._obs.e_norm)
        self._sample(G, G_start, elapsed)

        self.i_acc += e_norm_start * elapsed
        self.c_acc += u * elapsed
        total, components = reward(G - cfg.G_ref, self.i_acc, self.c_acc, cfg.reward_variant)

        terminated = cause is not None
        truncated = not terminated and self._t >= cfg.episode_length - 1e-9
        if truncated:
            cause = TRUNCATED
        self._done = terminated or truncated
        info = {
            't': self._t,
            'minutes': elapsed,
            'G': G,
            'u': u,
            'e': self._e,
            'de': self._de,
            'components': components,
            'params': None if params is None else params.to_list(),
            'meal_g': sum((m.carbs for m in self._meals if t_start <= m.time < self._t), 0.0),
            'coverage_gap': coverage_gap,
            'termination_cause': cause,
            'i_acc': self.i_acc,
            'c_acc': self.c_acc,
        }
        return StepResult(self._obs, total, terminated, truncated, info)
