"""Multi-hop effective channels with the SINR and sum-rate metrics built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelRealization
from .errors import DegenerateInputError, DimensionMismatchError, InvalidArgumentError

TWO_PI = 2.0 * math.pi
POWER_SLACK = 1e-9


@dataclass(frozen=True)
class PhaseConfig:
    """Per-RIS phase vectors; RIS i applies diag(exp(j * phases[i]))."""

    phases: tuple[np.ndarray, ...]

    def __post_init__(self):
        phases = tuple(np.asarray(p, dtype=float).reshape(-1) for p in self.phases)
        for p in phases:
            if not np.all(np.isfinite(p)):
                raise InvalidArgumentError("phases must be finite")
        object.__setattr__(self, "phases", phases)

    @classmethod
    def zeros(cls, ris_sizes: Sequence[int]) -> "PhaseConfig":
        return cls(tuple(np.zeros(n) for n in ris_sizes))

    @classmethod
    def random(cls, ris_sizes: Sequence[int], rng: np.random.Generator) -> "PhaseConfig":
        return cls(tuple(rng.uniform(0.0, TWO_PI, n) for n in ris_sizes))

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(p.size for p in self.phases)

    @property
    def thetas(self) -> tuple[np.ndarray, ...]:
        """Diagonal reflection coefficients, unit modulus by construction."""
        return tuple(np.exp(1j * p) for p in self.phases)


@dataclass(frozen=True)
class Precoder:
    """M x K digital beamformer; column k serves user k."""

    F: np.ndarray
    budget: float

    def __post_init__(self):
        F = np.asarray(self.F, dtype=complex)
        if F.ndim != 2:
            raise DimensionMismatchError(f"F must be a matrix, got shape {F.shape}")
        if not self.budget > 0:
            raise InvalidArgumentError(f"power budget must be > 0, got {self.budget}")
        if self.power > self.budget + POWER_SLACK:
            raise InvalidArgumentError(
                f"trace(F F^H) = {self.power} exceeds budget {self.budget}")
        object.__setattr__(self, "F", F)

    @property
    def power(self) -> float:
        F = np.asarray(self.F)
        return float(np.real(np.vdot(F, F)))


@dataclass(frozen=True)
class NoiseParams:
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise InvalidArgumentError(f"noise variance must be > 0, got {self.sigma2}")


def _check_phases(chan: ChannelRealization, phi: PhaseConfig):
    if phi.sizes != chan.ris_sizes:
        raise DimensionMismatchError(
            f"phase sizes {phi.sizes} do not match RIS sizes {chan.ris_sizes}")


def effective_channels(chan: ChannelRealization, phi: PhaseConfig) -> np.ndarray:
    """K x M matrix whose row k is g_k^T Phi_I H_I ... Phi_1 H_1 + w_k."""
    _check_phases(chan, phi)
    out = chan.direct_matrix.copy()
    if chan.num_hops:
        cascade = np.stack(chan.g)
        for theta, H in zip(reversed(phi.thetas), reversed(chan.H)):
            cascade = (cascade * theta) @ H
        out += cascade
    return out


def effective_channel(chan: ChannelRealization, phi: PhaseConfig, k: int) -> np.ndarray:
    """Length-M effective channel of user ``k``; H_1 adjoins the BS."""
    if not 0 <= k < chan.num_users:
        raise DimensionMismatchError(f"user index {k} out of range for K={chan.num_users}")
    _check_phases(chan, phi)
    row = chan.w[k].copy()
    if chan.num_hops:
        v = chan.g[k]
        for theta, H in zip(reversed(phi.thetas), reversed(chan.H)):
            v = (v * theta) @ H
        row += v
    return row


def _check_precoder(chan, prec):
    F = prec.F
    if F.shape != (chan.num_bs_antennas, chan.num_users):
        raise DimensionMismatchError(
            f"F has shape {F.shape}, expected ({chan.num_bs_antennas}, {chan.num_users})")


def sinr_from_effective(H_eff: np.ndarray, F: np.ndarray, sigma2: float) -> np.ndarray:
    """Per-user SINR given the stacked effective channels (K x M) and F (M x K)."""
    gains = np.abs(H_eff @ F) ** 2
    desired = np.diag(gains)
    interference = gains.sum(axis=1) - desired
    return desired / (interference + sigma2)


def sinrs(chan: ChannelRealization, phi: PhaseConfig, prec: Precoder,
          noise: NoiseParams) -> np.ndarray:
    _check_precoder(chan, prec)
    return sinr_from_effective(effective_channels(chan, phi), prec.F, noise.sigma2)


def sinr(chan: ChannelRealization, phi: PhaseConfig, prec: Precoder,
         noise: NoiseParams, k: int) -> float:
    """SINR of user ``k``: |h_k f_k|^2 / (sum_{j != k} |h_k f_j|^2 + sigma^2)."""
    _check_precoder(chan, prec)
    h = effective_channel(chan, phi, k)
    z = np.abs(h @ prec.F) ** 2
    return float(z[k] / (z.sum() - z[k] + noise.sigma2))


def rate_from_sinrs(rho: np.ndarray) -> float:
    # log1p keeps tiny SINRs (deep low-SNR regime) from rounding to zero rate
    return float(np.sum(np.log1p(rho)) / math.log(2.0))


def sum_rate(chan: ChannelRealization, phi: PhaseConfig, prec: Precoder,
             noise: NoiseParams) -> float:
    """Sum over users of log2(1 + SINR), in bits/s/Hz."""
    return rate_from_sinrs(sinrs(chan, phi, prec, noise))


def normalize_power(F_raw: np.ndarray, P_t: float) -> Precoder:
    """Scale ``F_raw`` so that trace(F F^H) equals ``P_t``.

    Raises
    ------
    DegenerateInputError
        If ``F_raw`` is identically zero.
    """
    F_raw = np.asarray(F_raw, dtype=complex)
    power = float(np.real(np.vdot(F_raw, F_raw)))
    if power == 0.0 or not math.isfinite(power):
        raise DegenerateInputError("cannot normalize a zero (or non-finite) precoder")
    return Precoder(F_raw * math.sqrt(P_t / power), P_t)


def project_unit_modulus(raw: np.ndarray) -> np.ndarray:
    """Phases in [0, 2 pi) of ``raw``; exact zeros map to phase 0."""
    raw = np.atleast_1d(np.asarray(raw, dtype=complex))
    phases = np.mod(np.angle(raw), TWO_PI)
    # mod of a tiny negative angle rounds up to exactly 2 pi; -0.0 has angle pi
    phases[(phases >= TWO_PI) | (raw == 0)] = 0.0
    return phases
