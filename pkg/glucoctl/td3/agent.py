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
Twin delayed deep deterministic policy gradient (TD3).

Actions live in the box [-1, 1]^d; environments map them onto their own units. Terminal
masking applies to safety terminations only, time-limit truncations keep bootstrapping.
"""

from collections import namedtuple

import numpy as np

from glucoctl.neural.exceptions import NonFiniteError, ShapeError
from glucoctl.neural.mlp import AdamState, LINEAR, Mlp, TANH, adam_step, forward, soft_update

AGENT_CHECKPOINT_VERSION = 1
WARMING_UP = 'warming up'
UPDATED = 'updated'

Transition = namedtuple('Transition', ['obs', 'action', 'reward', 'next_obs', 'done'])

Batch = namedtuple('Batch', ['obs', 'actions', 'rewards', 'next_obs', 'dones'])


class Td3Config(object):
    """
    Hyperparameters of one agent. ``FIELDS`` maps each name to its type and doubles as the
    configuration schema of the [td3] section.
    """
    FIELDS = {
        'gamma': float,
        'tau': float,
        'policy_delay': int,
        'sigma_explore': float,
        'sigma_target': float,
        'noise_clip': float,
        'batch_size': int,
        'lr_actor': float,
        'lr_critic': float,
        'warmup_steps': int,
        'buffer_capacity': int,
        'hidden_size': int,
        'action_dim': int,
        'obs_dim': int,
    }
    DEFAULTS = {
        'gamma': 0.99,
        'tau': 0.005,
        'policy_delay': 2,
        'sigma_explore': 0.1,
        'sigma_target': 0.2,
        'noise_clip': 0.5,
        'batch_size': 256,
        'lr_actor': 1e-3,
        'lr_critic': 1e-3,
        'warmup_steps': 1000,
        'buffer_capacity': 1000000,
        'hidden_size': 64,
        'action_dim': 1,
        'obs_dim': 2,
    }

    def __init__(self, **kwargs):
        unknown = sorted(set(kwargs) - set(self.FIELDS))
        if unknown:
            raise ValueError('Unknown TD3 setting(s): {}'.format(', '.join(unknown)))
        for name, kind in self.FIELDS.items():
            setattr(self, name, kind(kwargs.get(name, self.DEFAULTS[name])))
        self._validate()

    def _validate(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError('gamma must lie in [0, 1], got {}'.format(self.gamma))
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError('tau must lie in [0, 1], got {}'.format(self.tau))
        if self.policy_delay < 1:
            raise ValueError('policy_delay must be >= 1, got {}'.format(self.policy_delay))
        if not self.noise_clip > 0:
            raise ValueError('noise_clip must be > 0, got {}'.format(self.noise_clip))
        if self.sigma_explore < 0 or self.sigma_target < 0:
            raise ValueError('Noise standard deviations must be >= 0')
        for name in ('batch_size', 'buffer_capacity', 'hidden_size', 'action_dim', 'obs_dim'):
            if getattr(self, name) < 1:
                raise ValueError('{} must be >= 1, got {}'.format(name, getattr(self, name)))
        if self.warmup_steps < 0:
            raise ValueError('warmup_steps must be >= 0, got {}'.format(self.warmup_steps))
        if not (self.lr_actor > 0 and self.lr_critic > 0):
            raise ValueError('Learning rates must be > 0')

    def replace(self, **changes):
        values = self.to_dict()
        values.update(changes)
        return Td3Config(**values)

    def to_dict(self):
        return dict((name, getattr(self, name)) for name in sorted(self.FIELDS))

    @classmethod
    def from_dict(cls, json):
        return cls(**json)

    def __eq__(self, other):
        if isinstance(other, self.__class__):
            return self.to_dict() == other.to_dict()
        return False

    def __ne__(self, other):
        return not self == other


class ReplayBuffer(object):
    """
    Fixed-capacity ring of transitions with uniform sampling. Storage grows on demand up to
    the capacity.
    """
    _INITIAL_ROWS = 4096

    def __init__(self, capacity, obs_dim, action_dim, rng):
        self.capacity = int(capacity)
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        self.rng = rng
        self.size = 0
        self._next = 0
        rows = min(self.capacity, self._INITIAL_ROWS)
        self._obs = np.zeros((rows, obs_dim))
        self._actions = np.zeros((rows, action_dim))
        self._rewards = np.zeros(rows)
        self._next_obs = np.zeros((rows, obs_dim))
        self._dones = np.zeros(rows)

    def __len__(self):
        return self.size

    def _grow(self):
        rows = min(self.capacity, 2 * len(self._rewards))
        pad = rows - len(self._rewards)
        self._obs = np.concatenate([self._obs, np.zeros((pad, self.obs_dim))])
        self._actions = np.concatenate([self._actions, np.zeros((pad, self.action_dim))])
        self._rewards = np.concatenate([self._rewards, np.zeros(pad)])
        self._next_obs = np.concatenate([self._next_obs, np.zeros((pad, self.obs_dim))])
        self._dones = np.concatenate([self._dones, np.zeros(pad)])

    def add(self, transition):
        action = np.asarray(transition.action, dtype=float)
        if action.shape != (self.action_dim,):
            raise ShapeError('Expected an action of shape ({},), got {}'.format(
                self.action_dim, action.shape))
        if np.any(np.abs(action) > 1.0):
            raise ValueError('Stored actions must lie in [-1, 1]: {}'.format(action.tolist()))
        if not np.isfinite(transition.reward):
            raise NonFiniteError('Non-finite reward {!r}'.format(transition.reward))
        if self._next >= len(self._rewards):
            self._grow()
        k = self._next
        self._obs[k] = transition.obs
        self._actions[k] = action
        self._rewards[k] = transition.reward
        self._next_obs[k] = transition.next_obs
        self._dones[k] = 1.0 if transition.done else 0.0
        self._next = (k + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size):
        if self.size < batch_size:
            raise ValueError('Cannot sample {} transitions from a buffer holding {}'.format(
                batch_size, self.size))
        index = self.rng.integers(0, self.size, size=batch_size)
        return Batch(self._obs[index], self._actions[index], self._rewards[index],
                     self._next_obs[index], self._dones[index])

    def to_dict(self):
        n = self.size
        return {
            'capacity': self.capacity,
            'next': self._next,
            'obs': self._obs[:n].tolist(),
            'actions': self._actions[:n].tolist(),
            'rewards': self._rewards[:n].tolist(),
            'next_obs': self._next_obs[:n].tolist(),
            'dones': self._dones[:n].tolist(),
        }

    @classmethod
    def from_dict(cls, json, obs_dim, action_dim, rng):
        buf = cls(json['capacity'], obs_dim, action_dim, rng)
        n = len(json['rewards'])
        rows = max(n, len(buf._rewards))
        buf._obs = np.zeros((rows, obs_dim))
        buf._actions = np.zeros((rows, action_dim))
        buf._rewards = np.zeros(rows)
        buf._next_obs = np.zeros((rows, obs_dim))
        buf._dones = np.zeros(rows)
        if n:
            buf._obs[:n] = json['obs']
            buf._actions[:n] = json['actions']
            buf._rewards[:n] = json['rewards']
            buf._next_obs[:n] = json['next_obs']
            buf._dones[:n] = json['dones']
        buf.size = n
        buf._next = json['next']
        return buf


def select_action(actor, obs, sigma_explore, rng):
    """
    Deterministic policy plus Gaussian exploration noise, clipped to [-1, 1].
    sigma_explore = 0 returns the policy output itself and draws nothing.
    """
    obs = np.asarray(obs, dtype=float)
    if not np.all(np.isfinite(obs)):
        raise NonFiniteError('Non-finite observation {}'.format(obs.tolist()))
    action = actor.forward(obs)
    if sigma_explore > 0:
        action = np.clip(action + rng.normal(0.0, sigma_explore, size=action.shape), -1.0, 1.0)
    return action


def clip_noise(noise, noise_clip):
    return np.clip(noise, -noise_clip, noise_clip)


def smoothing_noise(shape, sigma, noise_clip, rng):
    return clip_noise(rng.normal(0.0, sigma, size=shape), noise_clip)


def compute_target(batch, critics_target, actor_target, cfg, rng):
    """
    Clipped double-Q target y = r + gamma * (1 - done) * min_i Q'_i(s', a'), with a' the
    target policy action perturbed by clipped noise.
    """
    next_actions = actor_target.forward(batch.next_obs)
    noise = smoothing_noise(next_actions.shape, cfg.sigma_target, cfg.noise_clip, rng)
    next_actions = np.clip(next_actions + noise, -1.0, 1.0)
    x = np.hstack([batch.next_obs, next_actions])
    q_next = np.minimum(critics_target[0].forward(x)[:, 0], critics_target[1].forward(x)[:, 0])
    return batch.rewards + cfg.gamma * (1.0 - batch.dones) * q_next


def update_critics(batch, y, critics, opts, cfg):
    """
    One Adam step per critic on the mean squared error against y.

    :return: (loss_1, loss_2) measured before the step
    """
    x = np.hstack([batch.obs, batch.actions])
    n = x.shape[0]
    losses = []
    for k, (critic, opt) in enumerate(zip(critics, opts)):
        residual = critic.forward(x)[:, 0] - y
        loss = float(np.mean(residual ** 2))
        if not np.isfinite(loss):
            raise NonFiniteError('Critic {} loss is not finite'.format(k + 1), {
                'critic': k + 1, 'loss': loss, 'target_range': [float(np.min(y)),
                                                                float(np.max(y))]})
        grads, _ = critic.backward(x, (2.0 / n) * residual[:, None])
        adam_step(critic, grads, opt, cfg.lr_critic)
        losses.append(loss)
    return tuple(losses)


def update_actor(batch, actor, critic1, opt, cfg):
    """
    Deterministic policy gradient step: descends -mean Q_1(s, pi(s)). The gradient flows
    through the action inputs of critic 1, whose parameters are left untouched.

    :return: the actor loss before the step
    """
    obs = batch.obs
    n = obs.shape[0]
    actions = actor.forward(obs)
    x = np.hstack([obs, actions])
    loss = -float(np.mean(critic1.forward(x)[:, 0]))
    if not np.isfinite(loss):
        raise NonFiniteError('Actor loss is not finite', {'loss': loss})
    _, input_grad = critic1.backward(x, np.full((n, 1), -1.0 / n))
    grads, _ = actor.backward(obs, input_grad[:, obs.shape[1]:])
    adam_step(actor, grads, opt, cfg.lr_actor)
    return loss


class Td3Agent(object):
    def __init__(self, cfg, rng):
        self.cfg = cfg
        self.rng = rng
        hidden = [cfg.hidden_size, cfg.hidden_size]
        self.actor = Mlp.initialize([cfg.obs_dim] + hidden + [cfg.action_dim], rng, TANH)
        critic_sizes = [cfg.obs_dim + cfg.action_dim] + hidden + [1]
        self.critic1 = Mlp.initialize(critic_sizes, rng, LINEAR)
        self.critic2 = Mlp.initialize(critic_sizes, rng, LINEAR)
        self.actor_target = self.actor.copy()
        self.critic1_target = self.critic1.copy()
        self.critic2_target = self.critic2.copy()
        self.actor_opt = AdamState(self.actor)
        self.critic1_opt = AdamState(self.critic1)
        self.critic2_opt = AdamState(self.critic2)
        self.buffer = ReplayBuffer(cfg.buffer_capacity, cfg.obs_dim, cfg.action_dim, rng)
        self.env_steps = 0
        self.critic_updates = 0
        self.actor_updates = 0

    def act(self, obs, explore=True):
        """
        Uniform random actions during warmup, noisy policy actions afterwards. With
        explore=False the deterministic policy is returned.
        """
        if not explore:
            return select_action(self.actor, obs, 0.0, self.rng)
        if self.env_steps < self.cfg.warmup_steps:
            return self.rng.uniform(-1.0, 1.0, size=self.cfg.action_dim)
        return select_action(self.actor, obs, self.cfg.sigma_explore, self.rng)

    def observe(self, transition):
        self.buffer.add(transition)
        self.env_steps += 1

    def train_step(self):
        cfg = self.cfg
        needed = max(cfg.batch_size, cfg.warmup_steps)
        if len(self.buffer) < needed:
            return {'status': WARMING_UP, 'buffer_size': len(self.buffer), 'needed': needed}
        batch = self.buffer.sample(cfg.batch_size)
        y = compute_target(batch, (self.critic1_target, self.critic2_target), self.actor_target,
                           cfg, self.rng)
        losses = update_critics(batch, y, (self.critic1, self.critic2),
                                (self.critic1_opt, self.critic2_opt), cfg)
        self.critic_updates += 1
        diagnostics = {'status': UPDATED, 'critic_losses': losses, 'actor_loss': None}
        if self.critic_updates % cfg.policy_delay == 0:
            diagnostics['actor_loss'] = update_actor(batch, self.actor, self.critic1,
                                                     self.actor_opt, cfg)
            soft_update(self.actor_target, self.actor, cfg.tau)
            soft_update(self.critic1_target, self.critic1, cfg.tau)
            soft_update(self.critic2_target, self.critic2, cfg.tau)
            self.actor_updates += 1
        return diagnostics

    def policy_action(self, obs):
        return forward(self.actor, obs)

    _NETWORKS = ('actor', 'critic1', 'critic2', 'actor_target', 'critic1_target',
                 'critic2_target')
    _OPTIMIZERS = ('actor', 'critic1', 'critic2')

    def to_dict(self):
        return {
            'version': AGENT_CHECKPOINT_VERSION,
            'config': self.cfg.to_dict(),
            'networks': dict((name, getattr(self, name).to_dict()) for name in self._NETWORKS),
            'optimizers': dict((name, getattr(self, name + '_opt').to_dict())
                               for name in self._OPTIMIZERS),
            'counters': {
                'env_steps': self.env_steps,
                'critic_updates': self.critic_updates,
                'actor_updates': self.actor_updates,
            },
            'rng_state': self.rng.bit_generator.state,
            'replay_buffer': self.buffer.to_dict(),
        }

    @classmethod
    def from_dict(cls, json):
        if json.get('version') != AGENT_CHECKPOINT_VERSION:
            raise ValueError('Unsupported agent checkpoint version {!r}'.format(
                json.get('version')))
        cfg = Td3Config.from_dict(json['config'])
        rng = np.random.default_rng()
        rng.bit_generator.state = json['rng_state']
        agent = cls.__new__(cls)
        agent.cfg = cfg
        agent.rng = rng
        for name in cls._NETWORKS:
            setattr(agent, name, Mlp.from_dict(json['networks'][name]))
        for name in cls._OPTIMIZERS:
            setattr(agent, name + '_opt',
                    AdamState.from_dict(json['optimizers'][name], getattr(agent, name)))
        agent.buffer = ReplayBuffer.from_dict(json['replay_buffer'], cfg.obs_dim,
                                              cfg.action_dim, rng)
        counters = json['counters']
        agent.env_steps = counters['env_steps']
        agent.critic_updates = counters['critic_updates']
        agent.actor_updates = counters['actor_updates']
        return agent
