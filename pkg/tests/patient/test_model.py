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
import math

import numpy as np
import pytest
from scipy.integrate import quad

from glucoctl.patient import model
from glucoctl.patient.exceptions import ModelInputError, TargetUnreachableError
from glucoctl.patient.model import MealEvent, PatientParams, PatientState

P = PatientParams()


def test_params_defaults():
    assert P.body_weight == 70.0
    assert P.glucose_volume == pytest.approx(11.2)
    assert P.kb1 == pytest.approx(0.006 * model.DEFAULT_S_IT)


def test_params_are_immutable():
    with pytest.raises(AttributeError):
        P.ke = 1.0
    changed = P.replace(ke=0.2)
    assert changed.ke == 0.2
    assert P.ke == 0.138
    assert changed != P
    assert P.replace() == P
    assert hash(P.replace()) == hash(P)


def test_params_validation():
    with pytest.raises(ModelInputError):
        PatientParams(ke=0)
    with pytest.raises(ModelInputError):
        PatientParams(A_G=1.5)
    with pytest.raises(ModelInputError):
        PatientParams(V_G=float('nan'))
    with pytest.raises(ModelInputError):
        PatientParams(unknown=1.0)


def test_non_insulin_flux():
    full = P.F_01 * P.body_weight
    assert model.non_insulin_flux(0.0, P) == 0.0
    assert model.non_insulin_flux(2.25, P) == pytest.approx(full / 2)
    assert model.non_insulin_flux(10.0, P) == full
    # Continuous at the switching point.
    assert model.non_insulin_flux(4.5 - 1e-12, P) == pytest.approx(full, abs=1e-12)
    assert model.non_insulin_flux(4.5, P) == full


def test_renal_clearance():
    assert model.renal_clearance(5.0, P) == 0.0
    assert model.renal_clearance(9.0, P) == 0.0
    assert model.renal_clearance(10.0, P) == pytest.approx(0.003 * 11.2)
    assert model.renal_clearance(9.0 + 1e-12, P) < 1e-12


def test_glucose_inputs_must_be_finite_and_non_negative():
    for f in (model.non_insulin_flux, model.renal_clearance):
        with pytest.raises(ModelInputError):
            f(-0.1, P)
        with pytest.raises(ModelInputError):
            f(float('inf'), P)
        with pytest.raises(ModelInputError):
            f(float('nan'), P)


def test_gut_absorption_peak():
    meals = [MealEvent(100, 40)]
    assert model.gut_absorption(99.9, meals, P) == 0.0
    assert model.gut_absorption(100, meals, P) == 0.0
    expected = 40 * 5.551 * 0.8 * math.exp(-1) / 40
    assert model.gut_absorption(140, meals, P) == pytest.approx(expected, rel=1e-9)
    assert expected == pytest.approx(1.6336, rel=1e-4)


def test_gut_absorption_superposes_meals():
    a, b = MealEvent(0, 20), MealEvent(30, 50)
    for t in (10.0, 45.0, 300.0):
        assert model.gut_absorption(t, [a, b], P) == pytest.approx(
            model.gut_absorption(t, [a], P) + model.gut_absorption(t, [b], P))


@pytest.mark.parametrize('t_max_g', [30.0, 40.0, 60.0])
def test_gut_absorption_total_is_bioavailable_fraction(t_max_g):
    p = P.replace(t_max_G=t_max_g)
    meals = [MealEvent(0, 40)]
    total, _ = quad(lambda t: model.gut_absorption(t, meals, p), 0, 1440, limit=200)
    assert total == pytest.approx(40 * 5.551 * 0.8, rel=5e-3)


def test_meal_validation():
    with pytest.raises(ModelInputError):
        MealEvent(-1, 20)
    with pytest.raises(ModelInputError):
        MealEvent(10, 0)
    assert MealEvent.from_dict(MealEvent(10, 20).to_dict()) == MealEvent(10, 20)


def test_derivatives_of_empty_patient():
    d = model.derivatives(PatientState.zeros(), 0.0, 0.0, (), P)
    assert d.Q1 == pytest.approx(P.EGP_0 * P.body_weight)
    for name in PatientState.FIELDS[1:]:
        assert getattr(d, name) == 0.0


def test_derivatives_fixed_points():
    u = 16.7
    s = PatientState(S1=u * P.t_max_I, S2=u * P.t_max_I, I=10.0, x1=P.kb1 / P.ka1 * 10.0)
    d = model.derivatives(s, 0.0, u, (), P)
    assert d.S1 == pytest.approx(0.0, abs=1e-12)
    assert d.S2 == pytest.approx(0.0, abs=1e-12)
    assert d.x1 == pytest.approx(0.0, abs=1e-12)
    assert s.x1 == pytest.approx(0.0512)


def test_derivatives_reject_bad_inputs():
    with pytest.raises(ModelInputError):
        model.derivatives(PatientState.zeros(), 0.0, -1.0, (), P)
    with pytest.raises(ModelInputError):
        model.derivatives(PatientState.zeros(), 0.0, float('nan'), (), P)
    with pytest.raises(ModelInputError):
        PatientState(Q1=float('nan'))


def test_steady_state_is_an_equilibrium():
    for u in (0.0, 5.0, 20.0):
        d = model.derivatives(model.steady_state(P, u), 0.0, u, (), P)
        assert np.allclose(d.to_array(), 0.0, atol=1e-9)


def test_zero_insulin_equilibrium():
    assert model.steady_glucose_mgdl(P, 0.0) == pytest.approx(402, abs=2)


def test_step_rk4_matches_first_absorption_compartment():
    u = 16.7
    s = PatientState.zeros()
    for k in range(55):
        s = model.step_rk4(s, float(k), 1.0, u, (), P)
    exact = u * P.t_max_I * (1 - math.exp(-1))
    assert s.S1 == pytest.approx(exact, rel=1e-6)


def test_step_rk4_small_step_is_nearly_identity():
    s = model.steady_state(P, 5.0)
    nxt = model.step_rk4(s, 0.0, 1e-9, 5.0, (), P)
    assert np.allclose(nxt.to_array(), s.to_array(), rtol=1e-6, atol=1e-9)


def test_step_rk4_rejects_bad_step():
    with pytest.raises(ModelInputError):
        model.step_rk4(PatientState.zeros(), 0.0, 0.0, 1.0, (), P)
    with pytest.raises(ModelInputError):
        model.step_rk4(PatientState.zeros(), 0.0, 1.0, -1.0, (), P)


def test_rk4_is_fourth_order():
    basal = model.find_basal(P, 90)
    s0 = model.steady_state(P, basal)
    meals = [MealEvent(0, 10)]

    def final(dt):
        _, states = model.simulate(P, s0, basal, 60, dt=dt, meals=meals)
        return states[-1]

    reference = final(0.01)
    err_1 = np.max(np.abs(final(1.0) - reference))
    err_half = np.max(np.abs(final(0.5) - reference))
    assert err_1 > 0
    assert math.log(err_1 / err_half, 2) >= 3.5


def test_simulate_layout():
    s0 = model.steady_state(P, 5.0)
    times, states = model.simulate(P, s0, 5.0, 30, dt=5)
    assert times.tolist() == [0, 5, 10, 15, 20, 25, 30]
    assert states.shape == (7, 8)
    assert states[0].tolist() == s0.to_array().tolist()
    with pytest.raises(ModelInputError):
        model.simulate(P, s0, 5.0, 31, dt=5)


def test_glucose_conversion():
    assert model.glucose_mgdl(PatientState.zeros(), P) == 0.0
    assert model.glucose_mgdl(PatientState(Q1=56.0), P) == pytest.approx(90.09)
    assert model.glucose_mgdl(PatientState(Q1=112.0), P) == pytest.approx(180.18)


def test_find_basal_holds_target_for_a_day():
    basal = model.find_basal(P, 90)
    assert 0 < basal < model.BASAL_SEARCH_MAX
    _, states = model.simulate(P, model.steady_state(P, basal), basal, 1440)
    glucose = states[:, 0] / P.glucose_volume * model.GLUCOSE_MGDL_PER_MMOL
    assert np.all(np.abs(glucose - 90) <= 1.0)


def test_find_basal_is_monotone_in_target():
    assert model.find_basal(P, 140) < model.find_basal(P, 90)


def test_find_basal_unreachable_target():
    # Insulin-independent uptake exceeds production, so glucose settles far below 90 mg/dL.
    p = P.replace(F_01=0.03)
    with pytest.raises(TargetUnreachableError):
        model.find_basal(p, 90)


def test_find_basal_validates_arguments():
    with pytest.raises(ModelInputError):
        model.find_basal(P, 40)
    with pytest.raises(ModelInputError):
        model.find_basal(P, 320)
    with pytest.raises(ModelInputError):
        model.find_basal(P, 90, tol=0)


def test_more_insulin_lowers_glucose():
    basal = model.find_basal(P, 90)
    s0 = model.steady_state(P, basal)
    _, low = model.simulate(P, s0, basal, 1440, dt=5)
    _, high = model.simulate(P, s0, 1.5 * basal, 1440, dt=5)
    assert np.mean(high[:, 0]) < np.mean(low[:, 0])


def test_states_stay_non_negative_and_finite():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        s0 = PatientState(Q1=rng.uniform(0, 200), Q2=rng.uniform(0, 100),
                          S1=rng.uniform(0, 2000), S2=rng.uniform(0, 2000),
                          I=rng.uniform(0, 50), x1=rng.uniform(0, 0.2),
                          x2=rng.uniform(0, 0.02), x3=rng.uniform(0, 2))
        meals = [MealEvent(rng.uniform(0, 1200), rng.uniform(10, 150))
                 for _ in range(rng.integers(0, 4))]
        _, states = model.simulate(P, s0, rng.uniform(0, 60), 1440, dt=5, meals=meals)
        assert np.all(np.isfinite(states))
        assert np.all(states >= 0)
