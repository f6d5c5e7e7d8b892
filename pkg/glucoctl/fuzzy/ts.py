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
Two-input Takagi-Sugeno fuzzy controller.

Inputs are the glucose error e = G - G_ref (mg/dL) and its rate de (mg/dL/min). Each input has
three membership functions (low, zero, high). Rule r = 3 * i_e + i_de combines MF i_e of e with
MF i_de of de and has the affine consequent u_r = a_r * e + b_r * de + c_r (mU/min). The crisp
output is the firing-strength weighted average of the consequents.
"""

import math
from collections import namedtuple

import numpy as np

TRAPEZOID = 'trapezoid'
TRIANGLE = 'triangle'
MF_SHAPE_ORDER = (TRAPEZOID, TRIANGLE, TRAPEZOID)

T_NORM_PRODUCT = 'product'
T_NORM_MIN = 'min'
T_NORMS = (T_NORM_PRODUCT, T_NORM_MIN)

MFS_PER_INPUT = 3
RULE_COUNT = MFS_PER_INPUT * MFS_PER_INPUT
PARAMS_PER_RULE = 3
PARAM_COUNT = RULE_COUNT * PARAMS_PER_RULE
ORDERING = 'rule-major (a_r, b_r, c_r) for r = 3 * i_e + i_de, r = 0..8'
UNITS = {
    'a': 'mU/min per mg/dL',
    'b': 'mU/min per mg/dL/min',
    'c': 'mU/min',
}

COVERAGE_GRID_POINTS = 2001

TsOutput = namedtuple('TsOutput', ['value', 'weights', 'coverage_gap'])


class MembershipFunction(object):
    def __init__(self, kind, breakpoints):
        if kind not in (TRAPEZOID, TRIANGLE):
            raise ValueError('Unknown membership function kind "{}"'.format(kind))
        breakpoints = tuple(float(x) for x in breakpoints)
        expected = 4 if kind == TRAPEZOID else 3
        if len(breakpoints) != expected:
            raise ValueError('A {} needs {} breakpoints, got {}'.format(
                kind, expected, len(breakpoints)))
        if not all(math.isfinite(x) for x in breakpoints):
            raise ValueError('Breakpoints must be finite: {}'.format(breakpoints))
        if any(lo > hi for lo, hi in zip(breakpoints, breakpoints[1:])):
            raise ValueError('Breakpoints must be non-decreasing: {}'.format(breakpoints))
        self.kind = kind
        self.breakpoints = breakpoints

    @classmethod
    def trapezoid(cls, a, b, c, d):
        return cls(TRAPEZOID, (a, b, c, d))

    @classmethod
    def triangle(cls, a, b, c):
        return cls(TRIANGLE, (a, b, c))

    @property
    def corners(self):
        """Breakpoints as a trapezoid; a triangle is a trapezoid with a one-point plateau."""
        if self.kind == TRIANGLE:
            a, b, c = self.breakpoints
            return a, b, b, c
        return self.breakpoints

    def __eq__(self, other):
        if isinstance(other, self.__class__):
            return self.kind == other.kind and self.breakpoints == other.breakpoints
        return False

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'MembershipFunction({!r}, {!r})'.format(self.kind, self.breakpoints)


def membership(mf, x):
    """
    Degree of x in mf, in [0, 1]. Equal breakpoints form a vertical edge whose top belongs
    to the plateau.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError('Membership input must be finite, got {!r}'.format(x))
    a, b, c, d = mf.corners
    if x < a or x > d:
        return 0.0
    if b <= x <= c:
        return 1.0
    if x < b:
        return (x - a) / (b - a)
    return (d - x) / (d - c)


class FisInputConfig(object):
    """
    Membership functions and universes of both inputs. Construction fails unless every point
    of each universe belongs to at least one membership function with a positive degree.
    """
    def __init__(self, e_mfs, de_mfs, e_universe=(-300.0, 300.0), de_universe=(-20.0, 20.0),
                 t_norm=T_NORM_PRODUCT):
        self.e_mfs = tuple(e_mfs)
        self.de_mfs = tuple(de_mfs)
        self.e_universe = tuple(float(x) for x in e_universe)
        self.de_universe = tuple(float(x) for x in de_universe)
        if t_norm not in T_NORMS:
            raise ValueError('Unknown t-norm "{}"; expected one of {}'.format(
                t_norm, ', '.join(T_NORMS)))
        self.t_norm = t_norm
        self._validate('e', self.e_mfs, self.e_universe)
        self._validate('de', self.de_mfs, self.de_universe)

    @staticmethod
    def _validate(name, mfs, universe):
        if len(mfs) != MFS_PER_INPUT:
            raise ValueError('Input {} needs {} membership functions, got {}'.format(
                name, MFS_PER_INPUT, len(mfs)))
        shapes = tuple(mf.kind for mf in mfs)
        if shapes != MF_SHAPE_ORDER:
            raise ValueError('Input {} membership functions must be shaped {}, got {}'.format(
                name, MF_SHAPE_ORDER, shapes))
        lo, hi = universe
        if not lo < hi:
            raise ValueError('Universe of {} is empty: {}'.format(name, universe))
        points = np.linspace(lo, hi, COVERAGE_GRID_POINTS).tolist()
        points.extend(x for mf in mfs for x in mf.breakpoints if lo <= x <= hi)
        for x in points:
            if max(membership(mf, x) for mf in mfs) <= 0.0:
                raise ValueError('Membership functions of {} leave {} uncovered'.format(name, x))

    @classmethod
    def default(cls, t_norm=T_NORM_PRODUCT):
        return cls(
            e_mfs=(MembershipFunction.trapezoid(-300, -300, -60, -10),
                   MembershipFunction.triangle(-40, 0, 40),
                   MembershipFunction.trapezoid(10, 60, 300, 300)),
            de_mfs=(MembershipFunction.trapezoid(-20, -20, -3, -0.5),
                    MembershipFunction.triangle(-2, 0, 2),
                    MembershipFunction.trapezoid(0.5, 3, 20, 20)),
            t_norm=t_norm)


class TsParams(object):
    """
    The 27 consequent parameters in rule-major (a_r, b_r, c_r) order. Values are read-only.
    """
    def __init__(self, values):
        values = np.array(values, dtype=float)
        if values.shape != (PARAM_COUNT,):
            raise ValueError('TsParams needs exactly {} values, got shape {}'.format(
                PARAM_COUNT, values.shape))
        if not np.all(np.isfinite(values)):
            raise ValueError('TsParams must be finite: {}'.format(values.tolist()))
        values.flags.writeable = False
        self._values = values

    @classmethod
    def zeros(cls):
        return cls(np.zeros(PARAM_COUNT))

    @classmethod
    def from_rules(cls, rules):
        """:param rules: 9 (a, b, c) triples in rule order."""
        return cls(np.asarray(rules, dtype=float).reshape(-1))

    @property
    def values(self):
        return self._values

    @property
    def rules(self):
        return self._values.reshape(RULE_COUNT, PARAMS_PER_RULE)

    @property
    def a(self):
        return self._values[0::PARAMS_PER_RULE]

    @property
    def b(self):
        return self._values[1::PARAMS_PER_RULE]

    @property
    def c(self):
        return self._values[2::PARAMS_PER_RULE]

    def check_ranges(self, lower, upper):
        outside = np.nonzero((self._values < lower) | (self._values > upper))[0]
        if len(outside):
            raise ValueError('TsParams outside their scaling ranges at indices {}'.format(
                outside.tolist()))

    def to_list(self):
        return self._values.tolist()

    def __eq__(self, other):
        if isinstance(other, self.__class__):
            return bool(np.array_equal(self._values, other._values))
        return False

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'TsParams({!r})'.format(self.to_list())


def _degrees(mfs, x, universe):
    x = min(max(x, universe[0]), universe[1])
    return np.array([membership(mf, x) for mf in mfs])


def firing_strengths(e, de, cfg):
    """
    Firing strength of each of the nine rules. Memberships are taken at the inputs clipped to
    their universes.
    """
    for name, value in (('e', e), ('de', de)):
        if not math.isfinite(value):
            raise ValueError('Input {} must be finite, got {!r}'.format(name, value))
    mu_e = _degrees(cfg.e_mfs, float(e), cfg.e_universe)
    mu_de = _degrees(cfg.de_mfs, float(de), cfg.de_universe)
    if cfg.t_norm == T_NORM_MIN:
        return np.minimum.outer(mu_e, mu_de).reshape(-1)
    return np.outer(mu_e, mu_de).reshape(-1)


def rule_outputs(e, de, params):
    return params.a * e + params.b * de + params.c


def ts_evaluate(e, de, params, cfg):
    """
    :return: TsOutput(value, weights, coverage_gap). When no rule fires the value is 0 and
      coverage_gap is set.
    """
    weights = firing_strengths(e, de, cfg)
    total = weights.sum()
    if total <= 0.0:
        return TsOutput(0.0, weights, True)
    outputs = rule_outputs(e, de, params)
    # Offset by the smallest consequent: equal consequents come back unchanged.
    floor = outputs.min()
    value = floor + float(np.dot(weights, outputs - floor)) / total
    return TsOutput(float(value), weights, False)


def ts_output(e, de, params, cfg):
    """Crisp controller output in mU/min before actuation limits."""
    return ts_evaluate(e, de, params, cfg).value


def clamp_actuation(u, u_max):
    if not u_max > 0:
        raise ValueError('u_max must be > 0, got {!r}'.format(u_max))
    return min(max(u, 0.0), u_max)
