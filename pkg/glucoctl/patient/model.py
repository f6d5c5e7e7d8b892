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
Hovorka virtual patient: glucose, insulin absorption, plasma insulin and insulin action
subsystems, integrated with a fixed-step classical Runge-Kutta scheme.

Units follow the model's native conventions: glucose masses in mmol, insulin masses in mU,
plasma insulin in mU/L, time in minutes. Only :func:`glucose_mgdl` converts to mg/dL.
"""

import math
from functools import lru_cache

import numpy as np
from scipy.optimize import bisect, brentq

from glucoctl.patient.exceptions import IntegrationError, ModelInputError, \
    TargetUnreachableError

GLUCOSE_MGDL_PER_MMOL = 18.018
CARB_MMOL_PER_GRAM = 5.551
FLUX_SWITCH_MMOL = 4.5
RENAL_THRESHOLD_MMOL = 9.0
RENAL_CLEARANCE_RATE = 0.003
DAY_MINUTES = 1440
DEFAULT_DT = 1.0
BASAL_SEARCH_MAX = 100.0  # mU/min

# Insulin sensitivities (per mU/L) of the default subject; kb_i = ka_i * S_i.
DEFAULT_S_IT = 51.2e-4
DEFAULT_S_ID = 8.2e-4
DEFAULT_S_IE = 520e-4


def _require_finite(name, value):
    if not math.isfinite(value):
        raise ModelInputError('{} must be finite, got {!r}'.format(name, value))


class PatientParams(object):
    """
    Rate constants, volumes and production terms of one virtual patient. Instances are
    immutable and hashable so they can key the basal cache.

    Values are the commonly used Hovorka defaults for a 70 kg subject. They are a starting
    point for simulation, not fitted to any person.
    """
    FIELDS = ('body_weight', 'k12', 'ka1', 'ka2', 'ka3', 'kb1', 'kb2', 'kb3', 'ke', 'V_I', 'V_G',
              'A_G', 't_max_G', 't_max_I', 'EGP_0', 'F_01')
    UNITS = {
        'body_weight': 'kg',
        'k12': '1/min',
        'ka1': '1/min',
        'ka2': '1/min',
        'ka3': '1/min',
        'kb1': '1/min per mU/L',
        'kb2': '1/min per mU/L',
        'kb3': '1/min per mU/L',
        'ke': '1/min',
        'V_I': 'L/kg',
        'V_G': 'L/kg',
        'A_G': 'dimensionless',
        't_max_G': 'min',
        't_max_I': 'min',
        'EGP_0': 'mmol/kg/min',
        'F_01': 'mmol/kg/min',
    }
    DEFAULTS = {
        'body_weight': 70.0,
        'k12': 0.066,
        'ka1': 0.006,
        'ka2': 0.06,
        'ka3': 0.03,
        'kb1': 0.006 * DEFAULT_S_IT,
        'kb2': 0.06 * DEFAULT_S_ID,
        'kb3': 0.03 * DEFAULT_S_IE,
        'ke': 0.138,
        'V_I': 0.12,
        'V_G': 0.16,
        'A_G': 0.8,
        't_max_G': 40.0,
        't_max_I': 55.0,
        'EGP_0': 0.0161,
        'F_01': 0.0097,
    }

    def __init__(self, **kwargs):
        unknown = sorted(set(kwargs) - set(self.FIELDS))
        if unknown:
            raise ModelInputError('Unknown patient parameter(s): {}'.format(', '.join(unknown)))
        for name in self.FIELDS:
            object.__setattr__(self, name, float(kwargs.get(name, self.DEFAULTS[name])))
        self._validate()

    @classmethod
    def from_sensitivities(cls, s_it=DEFAULT_S_IT, s_id=DEFAULT_S_ID, s_ie=DEFAULT_S_IE,
                           **kwargs):
        ka1 = kwargs.get('ka1', cls.DEFAULTS['ka1'])
        ka2 = kwargs.get('ka2', cls.DEFAULTS['ka2'])
        ka3 = kwargs.get('ka3', cls.DEFAULTS['ka3'])
        kwargs.update(kb1=ka1 * s_it, kb2=ka2 * s_id, kb3=ka3 * s_ie)
        return cls(**kwargs)

    def _validate(self):
        for name in self.FIELDS:
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ModelInputError(
                    'Patient parameter {} must be finite and strictly positive, got {!r}'
                    .format(name, value))
        if self.A_G > 1.0:
            raise ModelInputError('A_G is a bioavailability fraction and must be <= 1, '
                                  'got {!r}'.format(self.A_G))

    @property
    def glucose_volume(self):
        """Distribution volume of the accessible glucose compartment, L."""
        return self.V_G * self.body_weight

    @property
    def insulin_volume(self):
        return self.V_I * self.body_weight

    def replace(self, **changes):
        values = self.to_dict()
        values.update(changes)
        return PatientParams(**values)

    def to_dict(self):
        return dict((name, getattr(self, name)) for name in self.FIELDS)

    def __setattr__(self, name, value):
        raise AttributeError('PatientParams is immutable; use replace()')

    def __eq__(self, other):
        if isinstance(other, self.__class__):
            return self.to_dict() == other.to_dict()
        return False

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(tuple(getattr(self, name) for name in self.FIELDS))

    def __repr__(self):
        return 'PatientParams({})'.format(
            ', '.join('{}={!r}'.format(name, getattr(self, name)) for name in self.FIELDS))


class _CompartmentVector(object):
    FIELDS = ('Q1', 'Q2', 'S1', 'S2', 'I', 'x1', 'x2', 'x3')

    def __init__(self, Q1=0.0, Q2=0.0, S1=0.0, S2=0.0, I=0.0, x1=0.0, x2=0.0, x3=0.0):
        values = (Q1, Q2, S1, S2, I, x1, x2, x3)
        for name, value in zip(self.FIELDS, values):
            value = float(value)
            _require_finite(name, value)
            setattr(self, name, value)

    @classmethod
    def from_array(cls, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (len(cls.FIELDS),):
            raise ModelInputError('Expected {} components, got shape {}'.format(
                len(cls.FIELDS), values.shape))
        return cls(*values.tolist())

    def to_array(self):
        return np.array([getattr(self, name) for name in self.FIELDS], dtype=float)

    def to_dict(self):
        return dict((name, getattr(self, name)) for name in self.FIELDS)

    def __eq__(self, other):
        if isinstance(other, self.__class__):
            return self.to_dict() == other.to_dict()
        return False

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return '{}({})'.format(type(self).__name__, ', '.join(
            '{}={!r}'.format(name, getattr(self, name)) for name in self.FIELDS))


class PatientState(_CompartmentVector):
    """
    Q1, Q2: glucose masses in the accessible and non-accessible compartments (mmol).
    S1, S2: subcutaneous insulin masses (mU). I: plasma insulin (mU/L).
    x1, x2: remote insulin action on transport and disposal (1/min); x3: action on EGP.
    """

    @classmethod
    def zeros(cls):
        return cls()


class StateDerivative(_CompartmentVector):
    """Time derivative of every PatientState component, per minute."""
    pass


class MealEvent(object):
    def __init__(self, time, carbs):
        self.time = float(time)
        self.carbs = float(carbs)
        _require_finite('meal time', self.time)
        _require_finite('meal carbs', self.carbs)
        if self.time < 0:
            raise ModelInputError('Meal time must be >= 0, got {!r}'.format(self.time))
        if self.carbs <= 0:
            raise ModelInputError('Meal carbs must be > 0, got {!r}'.format(self.carbs))

    @property
    def mmol(self):
        return self.carbs * CARB_MMOL_PER_GRAM

    def to_dict(self):
        return {'time': self.time, 'carbs': self.carbs}

    @classmethod
    def from_dict(cls, json):
        return cls(json['time'], json['carbs'])

    def __eq__(self, other):
        if isinstance(other, self.__class__):
            return self.time == other.time and self.carbs == other.carbs
        return False

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'MealEvent(time={!r}, carbs={!r})'.format(self.time, self.carbs)


def _flux(G, p):
    full = p.F_01 * p.body_weight
    if G >= FLUX_SWITCH_MMOL:
        return full
    return full * G / FLUX_SWITCH_MMOL


def _renal(G, p):
    if G > RENAL_THRESHOLD_MMOL:
        return RENAL_CLEARANCE_RATE * (G - RENAL_THRESHOLD_MMOL) * p.glucose_volume
    return 0.0


def non_insulin_flux(G, p):
    """Non-insulin-dependent glucose flux F_c01, mmol/min, for glucose G in mmol/L."""
    _require_finite('G', G)
    if G < 0:
        raise ModelInputError('Glucose concentration must be >= 0, got {!r}'.format(G))
    return _flux(G, p)


def renal_clearance(G, p):
    """Renal glucose clearance F_R, mmol/min, for glucose G in mmol/L."""
    _require_finite('G', G)
    if G < 0:
        raise ModelInputError('Glucose concentration must be >= 0, got {!r}'.format(G))
    return _renal(G, p)


def gut_absorption(t, meals, p):
    """
    Glucose appearance rate U_G from the gut, mmol/min. Meals superpose additively; a meal
    contributes only once its time has been reached.
    """
    t_max = p.t_max_G
    total = 0.0
    for meal in meals:
        tau = t - meal.time
        if tau < 0:
            continue
        total += meal.mmol * p.A_G * tau * math.exp(-tau / t_max) / (t_max * t_max)
    return total


def _rhs(y, t, u, meals, p):
    q1, q2, s1, s2, i, x1, x2, x3 = y.tolist()
    w = p.body_weight
    g = q1 / p.glucose_volume
    # EGP floored at 0 once x3 exceeds 1.
    egp = max(p.EGP_0 * w * (1.0 - x3), 0.0)
    u_i = s2 / p.t_max_I
    return np.array([
        -_flux(g, p) - x1 * q1 + p.k12 * q2 - _renal(g, p) + gut_absorption(t, meals, p) + egp,
        x1 * q1 - (p.k12 + x2) * q2,
        u - s1 / p.t_max_I,
        (s1 - s2) / p.t_max_I,
        u_i / p.insulin_volume - p.ke * i,
        -p.ka1 * x1 + p.kb1 * i,
        -p.ka2 * x2 + p.kb2 * i,
        -p.ka3 * x3 + p.kb3 * i,
    ])


def _check_insulin(u):
    _require_finite('insulin infusion', u)
    if u < 0:
        raise ModelInputError('Insulin infusion must be >= 0, got {!r}'.format(u))


def derivatives(s, t, u, meals, p):
    """
    Right-hand side of the full model at time t (min) under insulin infusion u (mU/min).

    :rtype: StateDerivative
    """
    _check_insulin(u)
    return StateDerivative.from_array(_rhs(s.to_array(), t, u, meals, p))


def _rk4(y, t, dt, u, meals, p):
    k1 = _rhs(y, t, u, meals, p)
    k2 = _rhs(y + 0.5 * dt * k1, t + 0.5 * dt, u, meals, p)
    k3 = _rhs(y + 0.5 * dt * k2, t + 0.5 * dt, u, meals, p)
    k4 = _rhs(y + dt * k3, t + dt, u, meals, p)
    y_next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(y_next)):
        raise IntegrationError(
            'Integration produced a non-finite state at t={} min: {}'.format(t + dt, y_next),
            state=y_next, t=t + dt)
    np.maximum(y_next, 0.0, out=y_next)
    return y_next


def step_rk4(s, t, dt, u, meals, p):
    """
    Advances the patient by dt minutes with u held constant over the step. Components that
    dip below zero are floored at zero afterwards.

    :rtype: PatientState
    """
    if not dt > 0:
        raise ModelInputError('dt must be > 0, got {!r}'.format(dt))
    _check_insulin(u)
    return PatientState.from_array(_rk4(s.to_array(), t, dt, u, meals, p))


def simulate(p, s, u, duration, dt=DEFAULT_DT, meals=(), t0=0.0):
    """
    Integrates from state s at t0 for `duration` minutes under constant insulin u.

    :return: (times, states) with states[k] the 8 components at times[k]; row 0 is s.
    """
    if not dt > 0:
        raise ModelInputError('dt must be > 0, got {!r}'.format(dt))
    _check_insulin(u)
    n_steps = int(round(duration / dt))
    if n_steps < 0 or abs(n_steps * dt - duration) > 1e-9 * max(1.0, duration):
        raise ModelInputError('duration {} is not a multiple of dt {}'.format(duration, dt))
    states = np.empty((n_steps + 1, len(PatientState.FIELDS)))
    states[0] = s.to_array()
    for k in range(n_steps):
        states[k + 1] = _rk4(states[k], t0 + k * dt, dt, u, meals, p)
    times = t0 + dt * np.arange(n_steps + 1)
    return times, states


def glucose_mmol(s, p):
    return s.Q1 / p.glucose_volume


def glucose_mgdl(s, p):
    """Plasma glucose of state s in mg/dL."""
    return glucose_mmol(s, p) * GLUCOSE_MGDL_PER_MMOL


def _insulin_equilibrium(p, u):
    s = u * p.t_max_I
    i = u / (p.insulin_volume * p.ke)
    return s, i, p.kb1 / p.ka1 * i, p.kb2 / p.ka2 * i, p.kb3 / p.ka3 * i


def _steady_glucose(p, x1, x2, x3):
    egp = max(p.EGP_0 * p.body_weight * (1.0 - x3), 0.0)
    if egp == 0.0:
        return 0.0
    disposal = x1 * x2 / (p.k12 + x2) * p.glucose_volume

    def balance(g):
        return egp - _flux(g, p) - _renal(g, p) - disposal * g

    hi = 2.0 * RENAL_THRESHOLD_MMOL
    while balance(hi) > 0:
        hi *= 2.0
    return brentq(balance, 0.0, hi, xtol=1e-13)


def steady_glucose_mgdl(p, u):
    """Equilibrium glucose, mg/dL, reached under constant infusion u with no meals."""
    _check_insulin(u)
    _, _, x1, x2, x3 = _insulin_equilibrium(p, u)
    return _steady_glucose(p, x1, x2, x3) * GLUCOSE_MGDL_PER_MMOL


def steady_state(p, u):
    """
    Algebraic equilibrium of the model under constant infusion u (mU/min) with no meals.

    :rtype: PatientState
    """
    _check_insulin(u)
    s, i, x1, x2, x3 = _insulin_equilibrium(p, u)
    q1 = _steady_glucose(p, x1, x2, x3) * p.glucose_volume
    q2 = x1 * q1 / (p.k12 + x2)
    return PatientState(q1, q2, s, s, i, x1, x2, x3)


def find_basal(p, target_G, tol=1.0, dt=DEFAULT_DT, u_max=BASAL_SEARCH_MAX):
    """
    Finds the constant insulin infusion (mU/min) holding glucose at target_G (mg/dL).

    The rate is bisected on the equilibrium glucose, then confirmed by a 24 h meal-free
    simulation from that equilibrium: every sample must stay within tol mg/dL of the target.

    :raises TargetUnreachableError: if no infusion in [0, u_max] reaches the target, or if
      the confirming simulation drifts by more than tol.
    """
    _require_finite('target glucose', target_G)
    if not 50.0 < target_G < 300.0:
        raise ModelInputError('target glucose must lie in (50, 300) mg/dL, got {!r}'
                              .format(target_G))
    if not tol > 0:
        raise ModelInputError('tol must be > 0, got {!r}'.format(tol))
    return _find_basal_cached(p, float(target_G), float(tol), float(dt), float(u_max))


@lru_cache(maxsize=64)
def _find_basal_cached(p, target_G, tol, dt, u_max):
    def gap(u):
        return steady_glucose_mgdl(p, u) - target_G

    open_loop = gap(0.0)
    if open_loop <= 0:
        raise TargetUnreachableError(
            'target {} mg/dL is at or above the zero-insulin equilibrium {:.2f} mg/dL; '
            'insulin can only lower glucose'.format(target_G, open_loop + target_G))
    if gap(u_max) > 0:
        raise TargetUnreachableError(
            'target {} mg/dL not reached with the maximum search rate {} mU/min'
            .format(target_G, u_max))
    basal = bisect(gap, 0.0, u_max, xtol=1e-12)

    _, states = simulate(p, steady_state(p, basal), basal, DAY_MINUTES, dt)
    drift = np.max(np.abs(states[:, 0] / p.glucose_volume * GLUCOSE_MGDL_PER_MMOL - target_G))
    if drift > tol:
        raise TargetUnreachableError(
            'basal {:.6f} mU/min drifts {:.3f} mg/dL from {} mg/dL over 24 h (tol {})'
            .format(basal, drift, target_G, tol))
    return basal
