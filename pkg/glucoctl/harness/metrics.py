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
Episode metrics computed from per-control-step samples.
"""

from collections import OrderedDict

import numpy as np

MINUTES_PER_HOUR = 60.0
MU_PER_UNIT = 1000.0

REPORT_FIELDS = ('time_in_range', 'min_G', 'max_G', 'undershoot', 'overshoot',
                 'total_insulin_U', 'mean_u_mU_per_min', 'mean_u_U_per_h', 'episode_return',
                 'termination_cause', 'steps')


class MetricsReport(object):
    """
    time_in_range: fraction of samples with safe_low <= G <= safe_high.
    undershoot: depth below the reference, max(0, G_ref - min G), mg/dL.
    overshoot: excursion above the safe band, max(0, max G - safe_high), mg/dL.
    """
    def __init__(self, **kwargs):
        for name in REPORT_FIELDS:
            setattr(self, name, kwargs[name])

    def to_dict(self):
        return OrderedDict((name, getattr(self, name)) for name in REPORT_FIELDS)

    def __eq__(self, other):
        if isinstance(other, self.__class__):
            return self.to_dict() == other.to_dict()
        return False

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return 'MetricsReport({})'.format(dict(self.to_dict()))


def compute_metrics(glucose, insulin, minutes, rewards=None, termination_cause=None,
                    horizon_samples=None, G_ref=90.0, safe_low=70.0, safe_high=180.0):
    """
    :param glucose: G (mg/dL) at the end of each control step.
    :param insulin: infusion (mU/min) held during each control step.
    :param minutes: duration of each step, or one duration shared by all steps.
    :param horizon_samples: number of samples of a complete episode. When given, samples an
      early-terminated episode never reached count as out of range.
    """
    glucose = np.asarray(glucose, dtype=float)
    insulin = np.asarray(insulin, dtype=float)
    minutes = np.broadcast_to(np.asarray(minutes, dtype=float), glucose.shape)
    if len(glucose) == 0:
        raise ValueError('Cannot compute metrics of an empty trajectory')
    if insulin.shape != glucose.shape:
        raise ValueError('Need one insulin sample per glucose sample')
    in_range = int(np.count_nonzero((glucose >= safe_low) & (glucose <= safe_high)))
    denominator = max(len(glucose), horizon_samples or 0)
    delivered = float(np.sum(insulin * minutes))
    duration = float(np.sum(minutes))
    mean_u = delivered / duration if duration > 0 else 0.0
    return MetricsReport(
        time_in_range=in_range / float(denominator),
        min_G=float(glucose.min()),
        max_G=float(glucose.max()),
        undershoot=max(0.0, G_ref - float(glucose.min())),
        overshoot=max(0.0, float(glucose.max()) - safe_high),
        total_insulin_U=delivered / MU_PER_UNIT,
        mean_u_mU_per_min=mean_u,
        mean_u_U_per_h=mean_u * MINUTES_PER_HOUR / MU_PER_UNIT,
        episode_return=float(np.sum(rewards)) if rewards is not None else 0.0,
        termination_cause=termination_cause,
        steps=len(glucose))
