"""Per-link decision agent: state encoding, exploration, replay, training.

The state of a link is its interference environment normalized by its own
channel gain and expressed in dB: the gains it imposes on other receivers,
the gains other transmitters impose on it, and the noise-to-own-gain ratio.
With a one-slot horizon there is no bootstrapping: the network regresses
the immediate global reward of (state, action), and training is a plain
replay-buffer regression loop under an epsilon-greedy behaviour policy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import mlp
from .actions import ActionGrid, joint_decision
from .channel import NetworkRealization, ScenarioConfig, sample_realization
from .radio import Decision, RadioParams, effective_sum_rate

PAD_DB_DEFAULT = -300.0  # "no interferer": ~30 orders of magnitude below own gain
DB_CONVENTION = "10log10"

HIDDEN_DIMS = (128, 64)


def state_dim(n_links: int) -> int:
    """Length of a link's state vector: (N-1) + (N-1) + 1."""
    return 2 * n_links - 1


def encode_state(real: NetworkRealization, i: int, noise_power: float) -> np.ndarray:
    """State of link i: outgoing ratios, incoming ratios, noise ratio, in dB.

    Outgoing block: gain[i, j] / gain[i, i] for j != i in ascending j;
    incoming block: gain[j, i] / gain[i, i] likewise; last entry
    noise_power / gain[i, i]. All as 10*log10.
    """
    g = real.gain
    own = g[i, i]
    if own <= 0:
        raise ValueError(f"link {i} has non-positive own gain")
    out_ratios = np.delete(g[i, :], i) / own
    in_ratios = np.delete(g[:, i], i) / own
    return 10.0 * np.log10(np.concatenate([out_ratios, in_ratios, [noise_power / own]]))


def encode_all_states(real: NetworkRealization, noise_power: float) -> np.ndarray:
    """All N state vectors at once, row i matching encode_state(real, i, ...)."""
    g = real.gain
    n = real.n_links
    own = np.diagonal(g)
    offdiag = ~np.eye(n, dtype=bool)
    out_ratios = (g / own[:, None])[offdiag].reshape(n, n - 1)
    in_ratios = (g.T / own[:, None])[offdiag].reshape(n, n - 1)
    noise = (noise_power / own)[:, None]
    return 10.0 * np.log10(np.concatenate([out_ratios, in_ratios, noise], axis=1))


def adapt_state(state: np.ndarray, n_actual: int, n_model: int,
                pad_db: float = PAD_DB_DEFAULT) -> np.ndarray:
    """Fit a state built for n_actual links to a model trained for n_model.

    Fewer real links: pad each interference block with pad_db entries
    (virtual absent interferers). More real links: sort each block
    descending and keep the strongest n_model - 1 entries. The noise entry
    is always kept; output length is always 2 * n_model - 1.
    """
    state = np.asarray(state, dtype=float)
    if state.shape != (state_dim(n_actual),):
        raise ValueError(f"state length {state.shape} does not match n_actual={n_actual}")
    if n_actual == n_model:
        return state
    k = n_actual - 1
    out_block, in_block, noise = state[:k], state[k:2 * k], state[2 * k:]
    if n_actual < n_model:
        pad = np.full(n_model - n_actual, pad_db)
        return np.concatenate([out_block, pad, in_block, pad, noise])
    keep = n_model - 1
    out_top = np.sort(out_block)[::-1][:keep]
    in_top = np.sort(in_block)[::-1][:keep]
    return np.concatenate([out_top, in_top, noise])


def select_action(q: np.ndarray, epsilon: float, rng: np.random.Generator | None = None) -> int:
    """Epsilon-greedy over a Q-value vector; argmax breaks ties at the lowest index."""
    q = np.asarray(q)
    if q.size == 0:
        raise ValueError("empty action-value vector")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must be in [0, 1]")
    if epsilon > 0.0:
        if rng is None:
            raise ValueError("epsilon > 0 requires a generator")
        if rng.random() < epsilon:
            return int(rng.integers(q.size))
    return int(np.argmax(q))


class ReplayBuffer:
    """Fixed-capacity FIFO ring of (state, action, reward) transitions.

    Sampling is uniform with replacement over current contents; once full,
    each push overwrites the oldest transition.
    """

    def __init__(self, capacity: int, state_len: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._states = np.empty((capacity, state_len))
        self._actions = np.empty(capacity, dtype=np.int64)
        self._rewards = np.empty(capacity)
        self._size = 0
        self._next = 0

    def __len__(self) -> int:
        return self._size

    def push(self, state: np.ndarray, action: int, reward: float) -> None:
        if reward < 0:
            raise ValueError("rewards are non-negative sum rates")
        self._states[self._next] = state
        self._actions[self._next] = action
        self._rewards[self._next] = reward
        self._next = (self._next + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def push_episode(self, states: np.ndarray, actions, reward: float) -> None:
        """Push one transition per link, all sharing the episode's global reward."""
        for s, a in zip(states, actions):
            self.push(s, a, reward)

    def sample(self, batch_size: int, rng: np.random.Generator):
        if self._size == 0:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(0, self._size, size=batch_size)
        return self._states[idx], self._actions[idx], self._rewards[idx]


@dataclass(frozen=True)
class TrainConfig:
    """Schedule and optimizer knobs for the offline training run."""

    prefill_episodes: int = 2000
    decay_episodes: int = 100_000
    final_episodes: int = 10_000
    epsilon_start: float = 0.2
    batch_size: int = 256
    learning_rate: float = 0.001
    buffer_capacity: int = 50_000
    seed: int = 0

    def __post_init__(self):
        if min(self.prefill_episodes, self.decay_episodes, self.final_episodes,
               self.batch_size, self.buffer_capacity) < 1:
            raise ValueError("episode counts, batch size and capacity must be positive")
        if not 0.0 <= self.epsilon_start <= 1.0:
            raise ValueError("epsilon_start must be in [0, 1]")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")

    @property
    def total_episodes(self) -> int:
        return self.prefill_episodes + self.decay_episodes + self.final_episodes


def epsilon_schedule(episode_in_decay: int, cfg: TrainConfig) -> float:
    """Linear decay from epsilon_start to exactly 0 at episode decay_episodes."""
    frac = min(max(episode_in_decay / cfg.decay_episodes, 0.0), 1.0)
    return cfg.epsilon_start * (1.0 - frac)


@dataclass
class TrainHistory:
    """Per-episode record: reward in bits/slot, cumulative running mean, loss."""

    episode: np.ndarray
    epsilon: np.ndarray
    reward: np.ndarray
    running_mean: np.ndarray
    loss: np.ndarray  # nan on episodes without a gradient step


def train(scenario: ScenarioConfig, radio: RadioParams, grid: ActionGrid,
          cfg: TrainConfig, rng: np.random.Generator | None = None,
          pad_db: float = PAD_DB_DEFAULT,
          progress: Callable[[int, int], None] | None = None):
    """Offline training: per-link epsilon-greedy decisions, shared global reward.

    Every episode draws a fresh drop; each link encodes its state, picks an
    action, and the joint decision's effective sum rate is the common reward
    of all N transitions pushed that episode. Prefill explores uniformly
    (epsilon = 1) without gradient steps; the decay phase anneals epsilon
    from epsilon_start to 0 with one batch update per episode; the final
    phase keeps training greedily. Regression targets are the rewards
    divided by the bandwidth (bits/s/Hz) to keep the loss surface in a
    numerically sane range; the argmax policy is unaffected and the history
    records raw bits/slot. Returns (model, history); bit-reproducible for a
    given seed.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    n = scenario.n_links
    dim = state_dim(n)
    meta = {
        "n_links": n,
        "grid": grid.describe(),
        "pad_db": pad_db,
        "db_convention": DB_CONVENTION,
    }
    model = mlp.init_model([dim, *HIDDEN_DIMS, grid.n_actions], rng, meta=meta)
    adam = mlp.adam_init(model, lr=cfg.learning_rate)
    buffer = ReplayBuffer(cfg.buffer_capacity, dim)
    noise_power = radio.noise_power

    total = cfg.total_episodes
    hist_eps = np.empty(total)
    hist_reward = np.empty(total)
    hist_mean = np.empty(total)
    hist_loss = np.full(total, np.nan)
    reward_sum = 0.0

    for ep in range(total):
        if ep < cfg.prefill_episodes:
            eps = 1.0
        elif ep < cfg.prefill_episodes + cfg.decay_episodes:
            eps = epsilon_schedule(ep - cfg.prefill_episodes, cfg)
        else:
            eps = 0.0

        real = sample_realization(scenario, rng)
        states = encode_all_states(real, noise_power)
        q = mlp.forward(model, states)
        acts = [select_action(q[i], eps, rng) for i in range(n)]
        decision = joint_decision(grid, np.asarray(acts))
        reward = effective_sum_rate(real, decision, radio)
        buffer.push_episode(states, acts, reward)

        if ep >= cfg.prefill_episodes:
            b_states, b_actions, b_rewards = buffer.sample(cfg.batch_size, rng)
            hist_loss[ep] = mlp.train_step(model, adam, b_states, b_actions,
                                           b_rewards / radio.bandwidth_w)

        reward_sum += reward
        hist_eps[ep] = eps
        hist_reward[ep] = reward
        hist_mean[ep] = reward_sum / (ep + 1)
        if progress is not None and (ep + 1) % 1000 == 0:
            progress(ep + 1, total)

    history = TrainHistory(episode=np.arange(total), epsilon=hist_eps,
                           reward=hist_reward, running_mean=hist_mean, loss=hist_loss)
    return model, history


def act(model: mlp.MlpModel, real: NetworkRealization, radio: RadioParams,
        grid: ActionGrid) -> Decision:
    """Greedy joint decision of a trained model on one drop.

    Pure function of (model, realization): encode every link's state, adapt
    it if the drop's link count differs from the model's, take the argmax
    action per link. The grid must match the model's output layer.
    """
    if grid.n_actions != model.output_dim:
        raise ValueError(f"grid has {grid.n_actions} actions, model outputs {model.output_dim}")
    n_model = int(model.meta.get("n_links", (model.input_dim + 1) // 2))
    pad_db = float(model.meta.get("pad_db", PAD_DB_DEFAULT))
    n = real.n_links
    states = encode_all_states(real, radio.noise_power)
    if n != n_model:
        states = np.stack([adapt_state(s, n, n_model, pad_db) for s in states])
    q = mlp.forward(model, states)
    return joint_decision(grid, np.argmax(q, axis=1))
