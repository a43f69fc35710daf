"""Baseline beamformers to compare the learned agent against."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .errors import InvalidArgumentError, SingularChannelError, UnsupportedScenarioError
from .signal import (
    NoiseParams,
    PhaseConfig,
    Precoder,
    effective_channels,
    rate_from_sinrs,
    sinr_from_effective,
    sum_rate,
)

RANK_TOL = 1e-12


def zf_precoder(direct: np.ndarray, P_t: float) -> Precoder:
    """Zero-forcing precoder for the K x M channel ``direct``.

    F = W^H (W W^H)^{-1} scaled to trace P_t, so every user receives the
    same desired amplitude and no inter-user leakage.

    Raises
    ------
    SingularChannelError
        If ``direct`` does not have full row rank.
    """
    W = np.atleast_2d(np.asarray(direct, dtype=complex))
    K, M = W.shape
    if K > M:
        raise SingularChannelError(f"K={K} users cannot be zero-forced with M={M} antennas")
    s = np.linalg.svd(W, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= RANK_TOL * s[0]:
        raise SingularChannelError(f"channel is rank deficient (singular values {s})")
    gram = W @ W.conj().T
    F = np.linalg.solve(gram, W).conj().T  # W^H gram^{-1}, gram is Hermitian
    power = float(np.real(np.vdot(F, F)))
    return Precoder(F * math.sqrt(P_t / power), P_t)


def random_phase_baseline(chan: ChannelRealization, P_t: float, noise: NoiseParams,
                          rng: np.random.Generator, num_draws: int = 100):
    """Best of ``num_draws`` uniform phase draws, each served by ZF on its effective channel."""
    if num_draws < 1:
        raise InvalidArgumentError(f"num_draws must be >= 1, got {num_draws}")
    best = None
    for _ in range(num_draws):
        phi = PhaseConfig.random(chan.ris_sizes, rng)
        prec = zf_precoder(effective_channels(chan, phi), P_t)
        rate = sum_rate(chan, phi, prec, noise)
        if best is None or rate > best[2]:
            best = (phi, prec, rate)
    return best


PHI_STEPS = ("zf", "fixed-precoder")


@dataclass(frozen=True)
class AltOptSettings:
    """Alternating-optimization knobs.

    ``phi_step="zf"`` scores each candidate phase with the ZF precoder of the
    candidate's effective channel; ``"fixed-precoder"`` scores it with the
    current F. ``restarts`` runs the ascent from that many starting phase
    vectors (all zeros first, then uniform grid draws) and keeps the best.
    """

    max_iters: int = 50
    rel_tol: float = 1e-6
    phase_grid: int = 16
    restarts: int = 8
    phi_step: str = "zf"

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidArgumentError(f"max_iters must be >= 1, got {self.max_iters}")
        if not 0.0 < self.rel_tol < 1.0:
            raise InvalidArgumentError(f"rel_tol must be in (0, 1), got {self.rel_tol}")
        if self.phase_grid < 2:
            raise InvalidArgumentError(f"phase_grid must be >= 2, got {self.phase_grid}")
        if self.restarts < 1:
            raise InvalidArgumentError(f"restarts must be >= 1, got {self.restarts}")
        if self.phi_step not in PHI_STEPS:
            raise InvalidArgumentError(f"phi_step must be one of {PHI_STEPS}, got {self.phi_step!r}")


def _zf_rate(chan, phi, P_t, noise):
    try:
        prec = zf_precoder(effective_channels(chan, phi), P_t)
    except SingularChannelError:
        return None, -math.inf
    return prec, sum_rate(chan, phi, prec, noise)


def alternating_opt(chan: ChannelRealization, P_t: float, noise: NoiseParams,
                    settings: AltOptSettings = AltOptSettings(),
                    rng: np.random.Generator | None = None):
    """Alternate ZF precoding with cyclic per-element grid search on a single RIS.

    Each Phi-step sweeps the elements once, setting each phase to the grid
    value with the best sum rate (see ``AltOptSettings.phi_step`` for how F
    enters that score). A ZF F-step is only accepted when it does not lower
    the objective, so every trace (one entry per half-step, starting from
    the start's phases with ZF) is nondecreasing.

    Parameters
    ----------
    rng : numpy.random.Generator, optional
        Source of the random starting points; defaults to a fixed seed so
        the result depends only on the inputs.

    Returns
    -------
    (PhaseConfig, Precoder, list[float])
        Best phases and precoder over all starts, and the trace of the
        start that produced them.
    """
    if chan.num_hops != 1:
        raise UnsupportedScenarioError(
            f"alternating optimization needs exactly one RIS hop, got {chan.num_hops}")
    rng = np.random.default_rng(0) if rng is None else rng
    N = chan.ris_sizes[0]
    best = None
    for r in range(settings.restarts):
        idx = np.zeros(N, dtype=int) if r == 0 else rng.integers(0, settings.phase_grid, N)
        result = _ascend(chan, P_t, noise, settings, idx)
        if result is not None and (best is None or result[2][-1] > best[2][-1]):
            best = result
    if best is None:
        raise SingularChannelError("no starting point gave a full-rank effective channel")
    return best


def _ascend(chan, P_t, noise, settings, idx):
    G = settings.phase_grid
    grid = 2.0 * math.pi * np.arange(G) / G
    grid_theta = np.exp(1j * grid)
    H1, g = chan.H[0], np.stack(chan.g)  # N x M, K x N
    N = H1.shape[0]
    sigma2 = noise.sigma2

    def phases(ix):
        return PhaseConfig((grid[ix],))

    phi = phases(idx)
    prec, rate = _zf_rate(chan, phi, P_t, noise)
    if prec is None:
        return None
    trace = [rate]
    for _ in range(settings.max_iters):
        start = rate
        # Phi-step
        for n in range(N):
            if settings.phi_step == "zf":
                scored = []
                for c in range(G):
                    trial_idx = idx.copy()
                    trial_idx[n] = c
                    scored.append(_zf_rate(chan, phases(trial_idx), P_t, noise))
                c = int(np.argmax([s[1] for s in scored]))
                if scored[c][1] > rate:
                    idx[n] = c
                    phi, (prec, rate) = phases(idx), scored[c]
                continue
            H_eff = effective_channels(chan, phi)
            base = H_eff - np.outer(g[:, n] * grid_theta[idx[n]], H1[n])
            cands = base[None] + (g[:, n][None, :, None] * grid_theta[:, None, None]) * H1[n][None, None, :]
            scores = [rate_from_sinrs(sinr_from_effective(c, prec.F, sigma2)) for c in cands]
            c = int(np.argmax(scores))
            if c != idx[n]:
                old = idx[n]
                idx[n] = c
                trial = phases(idx)
                new_rate = sum_rate(chan, trial, prec, noise)
                if new_rate >= rate:
                    phi, rate = trial, new_rate
                else:
                    idx[n] = old
        trace.append(rate)
        # F-step
        cand, cand_rate = _zf_rate(chan, phi, P_t, noise)
        if cand is not None and cand_rate >= rate:
            prec, rate = cand, cand_rate
        trace.append(rate)
        if rate - start <= settings.rel_tol * abs(start):
            break
    return phi, prec, trace
