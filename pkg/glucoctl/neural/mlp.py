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
Fully connected networks with rectifier hidden layers and a hand-written backward pass.

Layout: layer k holds W_k with shape (out, in) and b_k with shape (out,), so y = W_k x + b_k.
Batches are row-stacked, Y = X W_k^T + b_k. Serialized weights are W_k flattened row-major.
"""

import math

import numpy as np

from glucoctl.neural.exceptions import NonFiniteError, ShapeError

LINEAR = 'linear'
TANH = 'tanh'
RELU = 'relu'
OUTPUT_ACTIVATIONS = (LINEAR, TANH)
CHECKPOINT_VERSION = 1


class Mlp(object):
    """
    forward()/backward() methods delegate to the module functions, so any object exposing
    the same two methods can stand in for a network where only evaluation is needed.
    """
    def __init__(self, weights, biases, output_activation=LINEAR):
        if output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError('Unknown output activation "{}"'.format(output_activation))
        if len(weights) == 0 or len(weights) != len(biases):
            raise ShapeError('Need one bias per weight matrix and at least one layer')
        self.weights = [np.array(w, dtype=float) for w in weights]
        self.biases = [np.array(b, dtype=float) for b in biases]
        self.output_activation = output_activation
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ShapeError('Layer {}: weight shape {} does not match bias shape {}'
                                 .format(k, w.shape, b.shape))
            if k > 0 and w.shape[1] != self.weights[k - 1].shape[0]:
                raise ShapeError('Layer {} expects {} inputs but layer {} has {} outputs'
                                 .format(k, w.shape[1], k - 1, self.weights[k - 1].shape[0]))
        _check_finite(self.params, 'network parameters')

    @classmethod
    def initialize(cls, layer_sizes, rng, output_activation=LINEAR):
        """
        Weights and biases of each layer are drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
        """
        if len(layer_sizes) < 2 or any(int(n) < 1 for n in layer_sizes):
            raise ShapeError('Invalid layer sizes {}'.format(layer_sizes))
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
            bound = 1.0 / math.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(rng.uniform(-bound, bound, size=fan_out))
        return cls(weights, biases, output_activation)

    @property
    def layer_sizes(self):
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def input_size(self):
        return self.weights[0].shape[1]

    @property
    def output_size(self):
        return self.weights[-1].shape[0]

    @property
    def params(self):
        """Parameter arrays in the order W_0, b_0, W_1, b_1, ... (views, not copies)."""
        params = []
        for w, b in zip(self.weights, self.biases):
            params.extend((w, b))
        return params

    def forward(self, x):
        return forward(self, x)

    def backward(self, x, upstream_grad):
        return backward(self, x, upstream_grad)

    def copy(self):
        return Mlp([w.copy() for w in self.weights], [b.copy() for b in self.biases],
                   self.output_activation)

    def to_dict(self):
        return {
            'version': CHECKPOINT_VERSION,
            'layer_sizes': self.layer_sizes,
            'hidden_activation': RELU,
            'output_activation': self.output_activation,
            'layout': 'W[out][in] row-major, y = W x + b',
            'weights': [w.reshape(-1).tolist() for w in self.weights],
            'biases': [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, json):
        if json.get('version') != CHECKPOINT_VERSION:
            raise ValueError('Unsupported network checkpoint version {!r}'.format(
                json.get('version')))
        sizes = json['layer_sizes']
        weights = [np.array(w, dtype=float).reshape(fan_out, fan_in)
                   for w, fan_in, fan_out in zip(json['weights'], sizes, sizes[1:])]
        return cls(weights, json['biases'], json['output_activation'])

    def __eq__(self, other):
        if not isinstance(other, self.__class__):
            return False
        return self.output_activation == other.output_activation and \
            self.layer_sizes == other.layer_sizes and \
            all(np.array_equal(p, q) for p, q in zip(self.params, other.params))

    def __ne__(self, other):
        return not self == other


def _check_finite(arrays, what, diagnostics=None):
    for k, array in enumerate(arrays):
        if not np.all(np.isfinite(array)):
            raise NonFiniteError('Non-finite values in {} (array {})'.format(what, k),
                                 diagnostics)


def _as_batch(net, x):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    batch = x.reshape(1, -1) if single else x
    if batch.ndim != 2 or batch.shape[1] != net.input_size:
        raise ShapeError('Network expects inputs of width {}, got shape {}'.format(
            net.input_size, x.shape))
    return batch, single


def _forward_layers(net, batch):
    activations = [batch]
    pre_activations = []
    last = len(net.weights) - 1
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = activations[-1].dot(w.T) + b
        pre_activations.append(z)
        if k < last:
            activations.append(np.maximum(z, 0.0))
        elif net.output_activation == TANH:
            activations.append(np.tanh(z))
        else:
            activations.append(z)
    return activations, pre_activations


def forward(net, x):
    """
    Evaluates the network on a single input vector or on a batch of row vectors.
    """
    batch, single = _as_batch(net, x)
    activations, _ = _forward_layers(net, batch)
    return activations[-1][0] if single else activations[-1]


def backward(net, x, upstream_grad):
    """
    Reverse-mode gradients of L = sum(upstream_grad * forward(net, x)).

    :return: (param_grads, input_grad); param_grads follows the order of ``net.params`` and
      input_grad has the shape of x.
    """
    batch, single = _as_batch(net, x)
    upstream = np.asarray(upstream_grad, dtype=float).reshape(batch.shape[0], -1)
    if upstream.shape[1] != net.output_size:
        raise ShapeError('Upstream gradient has width {}, network output is {}'.format(
            upstream.shape[1], net.output_size))
    activations, pre_activations = _forward_layers(net, batch)

    if net.output_activation == TANH:
        delta = upstream * (1.0 - activations[-1] ** 2)
    else:
        delta = upstream
    grads = []
    for k in range(len(net.weights) - 1, -1, -1):
        grads.append(delta.sum(axis=0))
        grads.append(delta.T.dot(activations[k]))
        delta = delta.dot(net.weights[k])
        if k > 0:
            delta = delta * (pre_activations[k - 1] > 0.0)
    grads.reverse()
    return grads, (delta[0] if single else delta)


class AdamState(object):
    def __init__(self, net, beta1=0.9, beta2=0.999, epsilon=1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.step = 0
        self.m = [np.zeros_like(p) for p in net.params]
        self.v = [np.zeros_like(p) for p in net.params]

    def to_dict(self):
        return {
            'beta1': self.beta1,
            'beta2': self.beta2,
            'epsilon': self.epsilon,
            'step': self.step,
            'm': [m.reshape(-1).tolist() for m in self.m],
            'v': [v.reshape(-1).tolist() for v in self.v],
        }

    @classmethod
    def from_dict(cls, json, net):
        state = cls(net, json['beta1'], json['beta2'], json['epsilon'])
        state.step = int(json['step'])
        shapes = [p.shape for p in net.params]
        state.m = [np.array(m, dtype=float).reshape(shape) for m, shape in zip(json['m'], shapes)]
        state.v = [np.array(v, dtype=float).reshape(shape) for v, shape in zip(json['v'], shapes)]
        return state


def adam_step(net, grads, opt, lr):
    """
    One bias-corrected Adam update, applied to ``net`` and ``opt`` in place.

    :return: (net, opt)
    """
    if not lr > 0:
        raise ValueError('Learning rate must be > 0, got {!r}'.format(lr))
    params = net.params
    if len(grads) != len(params) or any(g.shape != p.shape for g, p in zip(grads, params)):
        raise ShapeError('Gradients do not match network parameter shapes')
    _check_finite(grads, 'gradients', {'step': opt.step,
                                       'grad_norms': [float(np.linalg.norm(g)) for g in grads]})
    opt.step += 1
    correction1 = 1.0 - opt.beta1 ** opt.step
    correction2 = 1.0 - opt.beta2 ** opt.step
    for p, g, m, v in zip(params, grads, opt.m, opt.v):
        m *= opt.beta1
        m += (1.0 - opt.beta1) * g
        v *= opt.beta2
        v += (1.0 - opt.beta2) * g * g
        p -= lr * (m / correction1) / (np.sqrt(v / correction2) + opt.epsilon)
    return net, opt


def soft_update(target, online, tau):
    """
    Blends online into target in place: theta' <- tau * theta + (1 - tau) * theta'.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError('tau must lie in [0, 1], got {!r}'.format(tau))
    if target.layer_sizes != online.layer_sizes:
        raise ShapeError('Cannot blend networks of sizes {} and {}'.format(
            target.layer_sizes, online.layer_sizes))
    for t, o in zip(target.params, online.params):
        t[...] = tau * o + (1.0 - tau) * t
    return target
