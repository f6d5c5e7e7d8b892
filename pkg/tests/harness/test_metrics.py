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
import pytest

from glucoctl.harness.metrics import REPORT_FIELDS, compute_metrics


def test_time_in_range_is_inclusive():
    report = compute_metrics([70, 180, 100], [1, 1, 1], 5)
    assert report.time_in_range == 1.0
    report = compute_metrics([69.9, 180.1, 100], [1, 1, 1], 5)
    assert report.time_in_range == pytest.approx(1 / 3.0)


def test_early_termination_counts_missing_samples_out_of_range():
    report = compute_metrics([90, 95, 301], [5, 5, 5], 5, termination_cause='hyperglycemia',
                             horizon_samples=6)
    assert report.time_in_range == pytest.approx(2 / 6.0)
    assert report.steps == 3
    assert report.termination_cause == 'hyperglycemia'


def test_insulin_totals():
    report = compute_metrics([90, 90], [10, 20], [5, 5])
    assert report.total_insulin_U == pytest.approx(0.15)
    assert report.mean_u_mU_per_min == pytest.approx(15.0)
    assert report.mean_u_U_per_h == pytest.approx(0.9)


def test_insulin_mean_is_time_weighted():
    report = compute_metrics([90, 90], [10, 40], [5, 1])
    assert report.mean_u_mU_per_min == pytest.approx(90 / 6.0)


def test_excursions():
    report = compute_metrics([60, 200, 100], [0, 0, 0], 5)
    assert report.min_G == 60
    assert report.max_G == 200
    assert report.undershoot == 30
    assert report.overshoot == 20
    report = compute_metrics([95, 150], [0, 0], 5)
    assert report.undershoot == 0
    assert report.overshoot == 0


def test_return_and_layout():
    report = compute_metrics([90, 90], [0, 0], 5, rewards=[1.5, -0.5])
    assert report.episode_return == 1.0
    assert list(report.to_dict().keys()) == list(REPORT_FIELDS)
    assert compute_metrics([90, 90], [0, 0], 5).episode_return == 0.0


def test_invalid_inputs():
    with pytest.raises(ValueError):
        compute_metrics([], [], 5)
    with pytest.raises(ValueError):
        compute_metrics([90, 90], [1], 5)
