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
import numpy as np
import pytest

from glucoctl.neural import mlp
from glucoctl.neural.exceptions import NonFiniteError, ShapeError
from glucoctl.neural.mlp import AdamState, Mlp


def _net(seed=0, sizes=(3, 8, 8, 2), output_activation=mlp.LINEAR):
    return Mlp.initialize(list(sizes), np.random.default_rng(seed), output_activation)


def test_initialize_shapes_and_bounds():
    net = _net()
    assert net.layer_sizes == [3, 8, 8, 2]
    assert [p.shape for p in net.params] == [(8, 3), (8,), (8, 8), (8,), (2, 8), (2,)]
    assert np.all(np.abs(net.weights[0]) <= 1 / np.sqrt(3))
    assert np.all(np.abs(net.biases[1]) <= 1 / np.sqrt(8))


def test_initialize_is_seeded():
    assert _net(4) == _net(4)
    assert _net(4) != _net(5)


def test_forward_single_and_batch():
    net = _net()
    x = np.array([[0.1, -0.2, 0.3], [1.0, 0.5, -0.5]])
    batch = mlp.forward(net, x)
    assert batch.shape == (2, 2)
    assert np.allclose(net.forward(x[1]), batch[1])
    with pytest.raises(ShapeError):
        net.forward(np.zeros(4))


def test_tanh_output_is_bounded():
    net = _net(output_activation=mlp.TANH)
    net.weights[-1] *= 100
    y = net.forward(np.random.default_rng(1).normal(size=(50, 3)) * 10)
    assert np.all(np.abs(y) <= 1)


def _check_gradients(net, x, upstream, eps=1e-6):
    def loss(inputs):
        return float(np.sum(upstream * net.forward(inputs)))

    grads, input_grad = net.backward(x, upstream)
    for p, g in zip(net.params, grads):
        assert g.shape == p.shape
        flat, flat_grad = p.reshape(-1), g.reshape(-1)
        for k in range(flat.size):
            saved = flat[k]
            flat[k] = saved + eps
            up = loss(x)
            flat[k] = saved - eps
            down = loss(x)
            flat[k] = saved
            assert flat_grad[k] == pytest.approx((up - down) / (2 * eps), rel=1e-3, abs=1e-6)

    for index in np.ndindex(*x.shape):
        shifted = x.copy()
        shifted[index] += eps
        up = loss(shifted)
        shifted[index] -= 2 * eps
        down = loss(shifted)
        assert input_grad[index] == pytest.approx((up - down) / (2 * eps), rel=1e-3, abs=1e-6)


@pytest.mark.parametrize('activation', [mlp.LINEAR, mlp.TANH])
def test_backward_matches_finite_differences(activation):
    net = _net(3, output_activation=activation)
    rng = np.random.default_rng(7)
    _check_gradients(net, rng.normal(size=(5, 3)), rng.normal(size=(5, 2)))


def test_backward_matches_finite_differences_on_random_nets():
    rng = np.random.default_rng(17)
    shapes = [(2, 8, 8, 1)]
    while len(shapes) < 20:
        shapes.append((int(rng.integers(1, 5)), int(rng.integers(2, 10)),
                       int(rng.integers(2, 10)), int(rng.integers(1, 4))))
    for k, sizes in enumerate(shapes):
        activation = (mlp.LINEAR, mlp.TANH)[k % 2]
        net = Mlp.initialize(list(sizes), np.random.default_rng(100 + k), activation)
        batch = int(rng.integers(1, 5))
        _check_gradients(net, rng.normal(size=(batch, sizes[0])),
                         rng.normal(size=(batch, sizes[-1])))


def test_adam_first_step_moves_by_learning_rate():
    net = _net()
    before = [p.copy() for p in net.params]
    grads = [np.full_like(p, 0.5) for p in net.params]
    grads[0][0, 0] = -2.0
    opt = AdamState(net)
    mlp.adam_step(net, grads, opt, 1e-3)
    assert opt.step == 1
    delta = net.params[0] - before[0]
    assert delta[0, 0] == pytest.approx(1e-3, rel=1e-6)
    assert delta[0, 1] == pytest.approx(-1e-3, rel=1e-6)


def test_adam_rejects_bad_gradients():
    net = _net()
    opt = AdamState(net)
    grads = [np.zeros_like(p) for p in net.params]
    grads[2][0, 0] = np.nan
    with pytest.raises(NonFiniteError) as err:
        mlp.adam_step(net, grads, opt, 1e-3)
    assert err.value.diagnostics['step'] == 0
    assert opt.step == 0
    with pytest.raises(ShapeError):
        mlp.adam_step(net, grads[:-1], opt, 1e-3)
    with pytest.raises(ValueError):
        mlp.adam_step(net, [np.zeros_like(p) for p in net.params], opt, 0)


def test_adam_reduces_quadratic_loss():
    net = Mlp([np.array([[2.0, -1.0]])], [np.array([0.5])])
    opt = AdamState(net)
    x = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    for _ in range(1000):
        y = net.forward(x)
        grads, _ = net.backward(x, 2 * y)
        mlp.adam_step(net, grads, opt, 1e-2)
    assert np.sum(net.forward(x) ** 2) < 8.75e-2


def test_soft_update():
    target, online = _net(1), _net(2)
    blended = mlp.soft_update(target.copy(), online, 0.25)
    for b, t, o in zip(blended.params, target.params, online.params):
        assert np.allclose(b, 0.25 * o + 0.75 * t)
    assert mlp.soft_update(target.copy(), online, 0.0) == target
    assert mlp.soft_update(target.copy(), online, 1.0) == online
    with pytest.raises(ValueError):
        mlp.soft_update(target, online, 1.5)
    with pytest.raises(ShapeError):
        mlp.soft_update(target, _net(sizes=(3, 4, 2)), 0.5)


def test_checkpoint_round_trip():
    net = _net(output_activation=mlp.TANH)
    restored = Mlp.from_dict(net.to_dict())
    assert restored == net
    assert restored.output_activation == mlp.TANH
    opt = AdamState(net)
    mlp.adam_step(net, [np.ones_like(p) for p in net.params], opt, 1e-3)
    opt_restored = AdamState.from_dict(opt.to_dict(), net)
    assert opt_restored.step == 1
    assert all(np.array_equal(a, b) for a, b in zip(opt.m, opt_restored.m))
    with pytest.raises(ValueError):
        Mlp.from_dict(dict(net.to_dict(), version=2))


def test_construction_validates_shapes():
    with pytest.raises(ShapeError):
        Mlp([np.zeros((4, 3)), np.zeros((2, 5))], [np.zeros(4), np.zeros(2)])
    with pytest.raises(ShapeError):
        Mlp([np.zeros((4, 3))], [np.zeros(3)])
    with pytest.raises(NonFiniteError):
        Mlp([np.full((1, 1), np.inf)], [np.zeros(1)])
    with pytest.raises(ValueError):
        Mlp([np.zeros((1, 1))], [np.zeros(1)], 'sigmoid')


def test_soft_update_contracts_geometrically():
    online = _net(2)
    target = _net(1)
    tau = 0.1

    def distance():
        return np.sqrt(sum(float(np.sum((t - o) ** 2))
                           for t, o in zip(target.params, online.params)))

    start = distance()
    for k in range(1, 51):
        mlp.soft_update(target, online, tau)
        assert distance() == pytest.approx((1 - tau) ** k * start, rel=1e-9)
