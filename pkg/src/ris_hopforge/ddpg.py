"""DDPG agent that jointly designs the digital precoder and the RIS phase shifts.

State layout (length D_s), each complex block stored as all real parts
followed by all imaginary parts:

    [F_prev (M x K) | theta_prev (RIS 1..I) | H_1 | H_2 .. H_I | g_1..g_K]

D_s = 2MK + 2 sum N_i + 2 M N_1 + 2 sum N_i N_{i+1} + 2 K N_I. The leading
2MK block holds the previous precoder by default; ``direct_block="direct"``
puts the stacked direct channels W^T there instead.

Action layout (length D_a = 2MK + 2 sum N_i):

    [F (M x K) | theta (RIS 1..I)]
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .channel import ChannelRealization
from .errors import (
    DegenerateInputError,
    DimensionMismatchError,
    InvalidArgumentError,
    TrainingDivergedError,
)
from .neural import Adam, DenseNet, backward, forward, soft_update
from .signal import (
    NoiseParams,
    PhaseConfig,
    Precoder,
    effective_channels,
    normalize_power,
    project_unit_modulus,
    sinrs,
    sum_rate,
)


@dataclass(frozen=True)
class DdpgHyper:
    """Agent and training-loop settings. Defaults are the full-scale training settings."""

    beta: float = 0.99
    mu_c: float = 1e-3
    mu_a: float = 1e-3
    tau_c: float = 1e-3
    tau_a: float = 1e-3
    lambda_c: float = 0.005
    lambda_a: float = 0.005
    buffer_capacity: int = 100_000
    episodes: int = 5000
    steps_per_episode: int = 20_000
    minibatch: int = 16
    sync_every: int = 1
    noise_std: float = 0.1
    noise_decay: float = 0.999
    hidden_width: int | None = None
    penalty_weight: float = 0.0
    early_stop_window: int = 50
    early_stop_tol: float = 1e-3
    init_method: str = "svd"
    normalize_reward: bool = True
    direct_block: str = "precoder"
    critic_hidden_activation: str = "tanh"
    critic_output_activation: str = "identity"
    critic_batchnorm: bool = True
    actor_critic_mode: str = "eval"

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise InvalidArgumentError(f"beta must be in [0, 1), got {self.beta}")
        for name in ("tau_c", "tau_a"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise InvalidArgumentError(f"{name} must be in (0, 1], got {v}")
        for name in ("mu_c", "mu_a"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be > 0")
        for name in ("lambda_c", "lambda_a"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise InvalidArgumentError(f"{name} must be in [0, 1)")
        for name in ("buffer_capacity", "episodes", "steps_per_episode", "minibatch",
                     "sync_every"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.minibatch > self.buffer_capacity:
            raise InvalidArgumentError("minibatch cannot exceed buffer_capacity")
        if self.noise_std < 0 or not 0.0 < self.noise_decay <= 1.0:
            raise InvalidArgumentError("noise_std must be >= 0 and noise_decay in (0, 1]")
        if self.hidden_width is not None and self.hidden_width < 1:
            raise InvalidArgumentError("hidden_width must be >= 1")
        if self.early_stop_window < 0:
            raise InvalidArgumentError("early_stop_window must be >= 0 (0 disables)")
        if self.init_method not in INIT_METHODS:
            raise InvalidArgumentError(f"init_method must be one of {sorted(INIT_METHODS)}")
        if self.direct_block not in ("precoder", "direct"):
            raise InvalidArgumentError("direct_block must be 'precoder' or 'direct'")
        if self.actor_critic_mode not in ("train", "eval"):
            raise InvalidArgumentError("actor_critic_mode must be 'train' or 'eval'")
        acts = ("relu", "tanh", "identity")
        if self.critic_hidden_activation not in acts or self.critic_output_activation not in acts:
            raise InvalidArgumentError(f"critic activations must be among {acts}")


INIT_METHODS = {"svd", "maxmin", "random"}


def state_dim(M: int, K: int, ris_sizes: Sequence[int]) -> int:
    n = list(ris_sizes)
    d = 2 * M * K + 2 * sum(n)
    if n:
        d += 2 * M * n[0] + 2 * sum(a * b for a, b in zip(n[:-1], n[1:])) + 2 * K * n[-1]
    return d


def action_dim(M: int, K: int, ris_sizes: Sequence[int]) -> int:
    return 2 * M * K + 2 * sum(ris_sizes)


def _split(vec):
    return np.concatenate([vec.real, vec.imag])


def _join(vec):
    half = vec.size // 2
    return vec[:half] + 1j * vec[half:]


@dataclass(frozen=True)
class Layout:
    """Vector layouts of states and actions for one system size."""

    M: int
    K: int
    ris_sizes: tuple[int, ...] = ()
    direct_block: str = "precoder"

    @classmethod
    def for_channel(cls, chan: ChannelRealization, direct_block="precoder") -> "Layout":
        return cls(chan.num_bs_antennas, chan.num_users, chan.ris_sizes, direct_block)

    @property
    def state_dim(self) -> int:
        return state_dim(self.M, self.K, self.ris_sizes)

    @property
    def action_dim(self) -> int:
        return action_dim(self.M, self.K, self.ris_sizes)

    @property
    def f_size(self) -> int:
        return 2 * self.M * self.K

    def check_channel(self, chan: ChannelRealization):
        if (chan.num_bs_antennas, chan.num_users, chan.ris_sizes) != (self.M, self.K,
                                                                      self.ris_sizes):
            raise DimensionMismatchError("channel does not match the agent's layout")

    def encode_state(self, F_prev: Precoder | None, phi_prev: PhaseConfig | None,
                     chan: ChannelRealization) -> np.ndarray:
        """Flatten previous action and channels; ``None`` encodes as zeros."""
        self.check_channel(chan)
        if self.direct_block == "direct":
            lead = chan.direct_matrix.T
        elif F_prev is None:
            lead = np.zeros((self.M, self.K), dtype=complex)
        else:
            lead = F_prev.F
            if lead.shape != (self.M, self.K):
                raise DimensionMismatchError(f"F has shape {lead.shape}")
        if phi_prev is None:
            theta = np.zeros(sum(self.ris_sizes), dtype=complex)
        else:
            if phi_prev.sizes != self.ris_sizes:
                raise DimensionMismatchError("phase sizes do not match the layout")
            theta = np.concatenate(phi_prev.thetas) if self.ris_sizes else np.zeros(0, complex)
        parts = [_split(lead.ravel()), _split(theta)]
        for H in chan.H:
            parts.append(_split(H.ravel()))
        if chan.num_hops:
            parts.append(_split(np.stack(chan.g).ravel()))
        return np.concatenate(parts)

    def encode_action(self, prec: Precoder, phi: PhaseConfig) -> np.ndarray:
        theta = np.concatenate(phi.thetas) if self.ris_sizes else np.zeros(0, complex)
        return np.concatenate([_split(prec.F.ravel()), _split(theta)])

    def decode_action(self, a: np.ndarray, P_t: float) -> tuple[Precoder, PhaseConfig]:
        """Map an action vector to a feasible (precoder, phases) pair.

        Raises
        ------
        DegenerateInputError
            If the precoder block is all zeros.
        """
        a = np.asarray(a, dtype=float).reshape(-1)
        if a.size != self.action_dim:
            raise DimensionMismatchError(f"action has length {a.size}, expected {self.action_dim}")
        F = _join(a[:self.f_size]).reshape(self.M, self.K)
        prec = normalize_power(F, P_t)
        theta = _join(a[self.f_size:])
        phases, start = [], 0
        for n in self.ris_sizes:
            phases.append(project_unit_modulus(theta[start:start + n]))
            start += n
        return prec, PhaseConfig(tuple(phases))


def encode_state(F_prev, phi_prev, chan, direct_block="precoder"):
    return Layout.for_channel(chan, direct_block).encode_state(F_prev, phi_prev, chan)


def decode_action(a, P_t, M, K, ris_sizes=()):
    return Layout(M, K, tuple(ris_sizes)).decode_action(a, P_t)


def project_action(raw: np.ndarray, layout: Layout, P_t: float, eps: float = 1e-12):
    """Actor output layer: scale the F block to power P_t, each theta pair to unit modulus.

    Works on a (batch, D_a) array. Returns ``(projected, cache)``.
    """
    raw = np.atleast_2d(raw)
    fs = layout.f_size
    nt = (raw.shape[1] - fs) // 2
    f = raw[:, :fs]
    f_norm = np.sqrt(np.sum(f * f, axis=1, keepdims=True) + eps)
    re, im = raw[:, fs:fs + nt], raw[:, fs + nt:]
    t_norm = np.sqrt(re * re + im * im + eps)
    scale = math.sqrt(P_t)
    out = np.concatenate([scale * f / f_norm, re / t_norm, im / t_norm], axis=1)
    return out, (raw, f_norm, t_norm, scale, fs, nt)


def project_action_backward(cache, grad: np.ndarray) -> np.ndarray:
    raw, f_norm, t_norm, scale, fs, nt = cache
    f = raw[:, :fs]
    gf = grad[:, :fs]
    u = f / f_norm
    df = scale / f_norm * (gf - u * np.sum(u * gf, axis=1, keepdims=True))
    re, im = raw[:, fs:fs + nt] / t_norm, raw[:, fs + nt:] / t_norm
    gre, gim = grad[:, fs:fs + nt], grad[:, fs + nt:]
    radial = re * gre + im * gim
    dre = (gre - re * radial) / t_norm
    dim = (gim - im * radial) / t_norm
    return np.concatenate([df, dre, dim], axis=1)


class Whitener:
    """Streaming per-dimension mean and population variance (Chan et al. merge)."""

    def __init__(self, dim: int):
        self.count = 0
        self.mean = np.zeros(dim)
        self._m2 = np.zeros(dim)

    @property
    def var(self) -> np.ndarray:
        return self._m2 / self.count if self.count else np.zeros_like(self._m2)

    def update(self, x: np.ndarray):
        x = np.atleast_2d(x)
        n = x.shape[0]
        batch_mean = x.mean(axis=0)
        batch_m2 = ((x - batch_mean) ** 2).sum(axis=0)
        total = self.count + n
        delta = batch_mean - self.mean
        self.mean = self.mean + delta * (n / total)
        self._m2 = self._m2 + batch_m2 + delta * delta * (self.count * n / total)
        self.count = total

    def transform(self, x: np.ndarray) -> np.ndarray:
        if self.count == 0:
            raise InvalidArgumentError("whitener has no observations yet")
        std = np.sqrt(self.var)
        centered = x - self.mean
        safe = np.where(std > 0, std, 1.0)
        return np.where(std > 0, centered / safe, 0.0)


@dataclass
class Transition:
    s: np.ndarray
    a: np.ndarray
    r: float
    s_next: np.ndarray


class ReplayBuffer:
    """Fixed-capacity FIFO ring buffer with uniform sampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise InvalidArgumentError("capacity must be >= 1")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._next = 0
        self.inserted = 0

    def __len__(self):
        return len(self._items)

    def add(self, tr: Transition):
        if len(self._items) < self.capacity:
            self._items.append(tr)
        else:
            self._items[self._next] = tr
        self._next = (self._next + 1) % self.capacity
        self.inserted += 1

    def oldest(self) -> Transition:
        return self._items[self._next if len(self._items) == self.capacity else 0]

    def sample_indices(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.integers(0, len(self._items), size=n)

    def sample(self, rng: np.random.Generator, n: int):
        items = [self._items[i] for i in self.sample_indices(rng, n)]
        return (np.stack([t.s for t in items]), np.stack([t.a for t in items]),
                np.array([t.r for t in items]), np.stack([t.s_next for t in items]))


class Agent:
    """Actor/critic pair with their target copies and training state."""

    def __init__(self, layout: Layout, hyper: DdpgHyper, P_t: float, rng: np.random.Generator):
        self.layout = layout
        self.hyper = hyper
        self.P_t = P_t
        self.rng = rng
        ds, da = layout.state_dim, layout.action_dim
        width = hyper.hidden_width or max(256, da)
        self.actor = DenseNet([ds, width, width, da], hidden_activation="relu",
                              output_activation="tanh", batchnorm=True, rng=rng)
        self.critic = DenseNet([ds + da, width, width, 1],
                               hidden_activation=hyper.critic_hidden_activation,
                               output_activation=hyper.critic_output_activation,
                               batchnorm=hyper.critic_batchnorm, rng=rng)
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()
        self.actor_opt = Adam(self.actor, hyper.mu_a)
        self.critic_opt = Adam(self.critic, hyper.mu_c)
        self.replay = ReplayBuffer(hyper.buffer_capacity)
        self.whitener = Whitener(ds)
        self.updates = 0
        self.reward_scale = 1.0
        self.last_targets: np.ndarray | None = None

    def policy(self, s_white: np.ndarray, net: DenseNet | None = None) -> np.ndarray:
        raw = (net or self.actor)(s_white, mode="eval")
        return project_action(raw, self.layout, self.P_t)[0]

    def act(self, s: np.ndarray, noise_std: float) -> np.ndarray:
        """Policy output for raw state ``s`` plus N(0, noise_std^2) per entry."""
        a = self.policy(self.whitener.transform(s))[0]
        if noise_std > 0:
            a = a + self.rng.normal(0.0, noise_std, a.shape)
        return a

    def train_step(self):
        """One minibatch update; returns ``(critic_loss, actor_objective)`` or None if not ready."""
        hyper = self.hyper
        W = hyper.minibatch
        if len(self.replay) < max(W, 2):
            return None
        s, a, r, s2 = self.replay.sample(self.rng, W)
        r = r * self.reward_scale
        s_w = self.whitener.transform(s)
        s2_w = self.whitener.transform(s2)

        a2 = self.policy(s2_w, self.actor_target)
        q2 = self.critic_target(np.concatenate([s2_w, a2], axis=1), mode="eval")[:, 0]
        y = r + hyper.beta * q2 if hyper.beta else r.copy()
        self.last_targets = y

        q, cache = forward(self.critic, np.concatenate([s_w, a], axis=1), "train")
        err = q[:, 0] - y
        critic_loss = float(np.mean(err * err))
        grads, _ = backward(self.critic, cache, (2.0 / W) * err[:, None])
        self.critic_opt.step(grads)

        raw, cache_a = forward(self.actor, s_w, "train")
        a_pi, proj = project_action(raw, self.layout, self.P_t)
        q_pi, cache_c = forward(self.critic, np.concatenate([s_w, a_pi], axis=1),
                                self.hyper.actor_critic_mode, update_stats=False)
        objective = float(np.mean(q_pi))
        _, dx = backward(self.critic, cache_c, np.full_like(q_pi, -1.0 / W))
        d_raw = project_action_backward(proj, dx[:, self.layout.state_dim:])
        grads_a, _ = backward(self.actor, cache_a, d_raw)
        self.actor_opt.step(grads_a)

        if not (math.isfinite(critic_loss) and math.isfinite(objective)):
            raise TrainingDivergedError(
                "non-finite loss during train_step",
                {"critic_loss": critic_loss, "actor_objective": objective,
                 "updates": self.updates, "targets": y, "rewards": r})

        self.updates += 1
        if self.updates % hyper.sync_every == 0:
            soft_update(self.critic_target, self.critic, hyper.tau_c)
            soft_update(self.actor_target, self.actor, hyper.tau_a)
        return critic_loss, objective


def train_step(agent: Agent, hyper: DdpgHyper | None = None):
    if hyper is not None and hyper is not agent.hyper:
        agent.hyper = hyper
    return agent.train_step()


def act(agent: Agent, s: np.ndarray, noise_std: float) -> np.ndarray:
    return agent.act(s, noise_std)


def reward(chan: ChannelRealization, prec: Precoder, phi: PhaseConfig, noise: NoiseParams,
           penalty_weight: float = 0.0, action=None, prev_action=None) -> float:
    """Sum rate, optionally minus a weighted action-change penalty."""
    r = sum_rate(chan, phi, prec, noise)
    if penalty_weight and action is not None and prev_action is not None:
        diff = np.asarray(action) - np.asarray(prev_action)
        r -= penalty_weight * float(diff @ diff) / diff.size
    return r


def _user1_cophase(chan: ChannelRealization, phi: PhaseConfig, f1: np.ndarray) -> PhaseConfig:
    """Sequentially co-phase every RIS element's term for user 1 with its direct term."""
    thetas = list(phi.thetas)
    direct = chan.w[0] @ f1
    ref = np.angle(direct) if direct != 0 else 0.0
    phases = list(phi.phases)
    I = chan.num_hops
    for i in range(I):
        incident = chan.H[0] @ f1
        for j in range(1, i + 1):
            incident = chan.H[j] @ (thetas[j - 1] * incident)
        outgoing = chan.g[0]
        for j in range(I - 1, i, -1):
            outgoing = (outgoing * thetas[j]) @ chan.H[j]
        terms = outgoing * incident
        phases[i] = project_unit_modulus(np.exp(1j * ref) * np.conj(terms))
        phases[i][terms == 0] = 0.0
        thetas[i] = np.exp(1j * phases[i])
    return PhaseConfig(tuple(phases))


def init_action_svd(chan: ChannelRealization, P_t: float) -> tuple[Precoder, PhaseConfig]:
    """F from the K dominant right-singular vectors of the zero-phase composite channel."""
    K = chan.num_users
    phi0 = PhaseConfig.zeros(chan.ris_sizes)
    H_eff = effective_channels(chan, phi0)
    _, _, Vh = np.linalg.svd(H_eff)
    F = Vh.conj().T[:, :K]
    if not np.any(F):
        F = np.eye(chan.num_bs_antennas, K, dtype=complex)
    prec = normalize_power(F, P_t)
    phi = _user1_cophase(chan, phi0, prec.F[:, 0]) if chan.num_hops else phi0
    return prec, phi


def init_action_maxmin(chan: ChannelRealization, P_t: float, noise: NoiseParams,
                       iters: int = 20, damping: float = 0.5) -> tuple[Precoder, PhaseConfig]:
    """SVD start, then per-column power rebalancing toward equal SINR.

    Column powers are multiplied by (mean_rho / rho_k)^damping and
    renormalized to P_t; the iterate with the largest minimum SINR is kept.
    """
    prec, phi = init_action_svd(chan, P_t)
    if chan.num_users == 1:
        return prec, phi
    best, best_min = prec, float(np.min(sinrs(chan, phi, prec, noise)))
    F = prec.F
    for _ in range(iters):
        rho = sinrs(chan, phi, Precoder(F, P_t), noise)
        if np.any(rho <= 0):
            break
        weights = (np.mean(rho) / rho) ** damping
        F = normalize_power(F * np.sqrt(weights)[None, :], P_t).F
        cand = Precoder(F, P_t)
        m = float(np.min(sinrs(chan, phi, cand, noise)))
        if m > best_min:
            best, best_min = cand, m
    return best, phi


def initial_action(method: str, chan, P_t, noise, rng) -> tuple[Precoder, PhaseConfig]:
    if method == "svd":
        return init_action_svd(chan, P_t)
    if method == "maxmin":
        return init_action_maxmin(chan, P_t, noise)
    if method == "random":
        F = rng.standard_normal((chan.num_bs_antennas, chan.num_users, 2)) @ np.array([1, 1j])
        return normalize_power(F, P_t), PhaseConfig.random(chan.ris_sizes, rng)
    raise InvalidArgumentError(f"unknown init method {method!r}")


@dataclass(frozen=True)
class TrainEnv:
    """Simulator environment: where channels come from, the power budget and the noise.

    ``channel`` is either a fixed realization or a callable ``(episode, rng)
    -> ChannelRealization`` invoked once per episode.
    """

    channel: ChannelRealization | Callable
    P_t: float
    noise: NoiseParams

    def draw(self, episode: int, rng: np.random.Generator) -> ChannelRealization:
        if isinstance(self.channel, ChannelRealization):
            return self.channel
        return self.channel(episode, rng)


LOG_FIELDS = ("episode", "step", "reward", "critic_loss", "actor_objective", "lr_c", "lr_a",
              "noise_std")


@dataclass
class TrainResult:
    best_precoder: Precoder
    best_phases: PhaseConfig
    best_reward: float
    log: dict = field(default_factory=dict)
    agent: Agent | None = None
    stopped_early: bool = False

    @property
    def rewards(self) -> np.ndarray:
        return self.log["reward"]

    @property
    def q_history(self) -> np.ndarray:
        return self.log["actor_objective"]


def _check_feasible(prec: Precoder, phi: PhaseConfig, P_t: float):
    assert abs(prec.power - P_t) <= 1e-9 * P_t, prec.power
    for t in phi.thetas:
        assert np.max(np.abs(np.abs(t) - 1.0), initial=0.0) <= 1e-12


def train(env: TrainEnv, hyper: DdpgHyper, rng: np.random.Generator, *,
          check_feasibility: bool = False,
          on_step: Callable[[dict], None] | None = None) -> TrainResult:
    """Episodic DDPG loop.

    Each episode draws a channel, builds the first state from the
    initialization action, then runs ``steps_per_episode`` rounds of
    act -> decode -> reward -> store -> train_step. Learning rates shrink by
    (1 - lambda) and the exploration std by ``noise_decay`` after every
    episode. The best feasible action seen (initializations included) is
    returned with the per-step log.
    """
    first = env.draw(0, rng)
    layout = Layout.for_channel(first, hyper.direct_block)
    agent = Agent(layout, hyper, env.P_t, rng)
    noise_std = hyper.noise_std
    total = hyper.episodes * hyper.steps_per_episode
    log = {k: np.full(total, np.nan) for k in LOG_FIELDS}
    best = None
    best_by_episode = []
    row = 0
    stopped = False
    for episode in range(hyper.episodes):
        chan = first if episode == 0 else env.draw(episode, rng)
        F0, phi0 = initial_action(hyper.init_method, chan, env.P_t, env.noise, rng)
        r0 = reward(chan, F0, phi0, env.noise)
        if episode == 0 and hyper.normalize_reward and r0 > 0:
            agent.reward_scale = 1.0 / r0
        if best is None or r0 > best[2]:
            best = (F0, phi0, r0)
        s = layout.encode_state(F0, phi0, chan)
        agent.whitener.update(s)
        prev_a = layout.encode_action(F0, phi0)
        for t in range(hyper.steps_per_episode):
            a = agent.act(s, noise_std)
            try:
                prec, phi = layout.decode_action(a, env.P_t)
            except DegenerateInputError:
                a = a.copy()
                a[:layout.f_size] = rng.standard_normal(layout.f_size)
                prec, phi = layout.decode_action(a, env.P_t)
            if check_feasibility:
                _check_feasible(prec, phi, env.P_t)
            a_feas = layout.encode_action(prec, phi)
            r = reward(chan, prec, phi, env.noise, hyper.penalty_weight, a_feas, prev_a)
            s_next = layout.encode_state(prec, phi, chan)
            agent.whitener.update(s_next)
            agent.replay.add(Transition(s, a_feas, r, s_next))
            losses = agent.train_step()
            if best is None or r > best[2]:
                best = (prec, phi, r)
            log["episode"][row] = episode
            log["step"][row] = t
            log["reward"][row] = r
            if losses is not None:
                log["critic_loss"][row], log["actor_objective"][row] = losses
            log["lr_c"][row] = agent.critic_opt.lr
            log["lr_a"][row] = agent.actor_opt.lr
            log["noise_std"][row] = noise_std
            if on_step is not None:
                on_step({k: log[k][row] for k in LOG_FIELDS})
            row += 1
            s, prev_a = s_next, a_feas
        agent.critic_opt.lr *= 1.0 - hyper.lambda_c
        agent.actor_opt.lr *= 1.0 - hyper.lambda_a
        noise_std *= hyper.noise_decay
        best_by_episode.append(best[2])
        w = hyper.early_stop_window
        if w and len(best_by_episode) > w:
            old = best_by_episode[-1 - w]
            if best_by_episode[-1] - old < hyper.early_stop_tol * abs(old):
                stopped = True
                break
    log = {k: v[:row] for k, v in log.items()}
    return TrainResult(best[0], best[1], best[2], log, agent, stopped)


__all__ = [
    "Agent", "DdpgHyper", "Layout", "ReplayBuffer", "TrainEnv", "TrainResult", "Transition",
    "Whitener", "act", "action_dim", "decode_action", "encode_state", "init_action_maxmin",
    "init_action_svd", "project_action", "project_action_backward", "reward", "state_dim",
    "train", "train_step",
]
