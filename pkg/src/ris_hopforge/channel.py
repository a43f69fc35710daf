"""THz link gains and Rayleigh channel realizations for a serial RIS chain.

Every link amplitude follows free-space spreading times a molecular
absorption factor,

    a(d) = c / (4 pi f d) * exp(-k d / 2),

with ``k`` the (scalar) absorption coefficient in 1/m. Small-scale fading
is i.i.d. circularly-symmetric complex Gaussian whose per-entry standard
deviation is the LOS amplitude of the link.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, InvalidArgumentError

SPEED_OF_LIGHT = 299_792_458.0
BOLTZMANN = 1.380649e-23


def thermal_noise_psd(temperature_k: float = 290.0, noise_figure_db: float = 10.0) -> float:
    """Receiver noise PSD in W/Hz: k_B * T * NF."""
    return BOLTZMANN * temperature_k * 10.0 ** (noise_figure_db / 10.0)


@dataclass(frozen=True)
class ThzPhysParams:
    """Physical constants of one THz link budget."""

    carrier_freq: float = 0.12e12
    bandwidth: float = 12e9
    absorption_coeff: float = 0.01
    noise_psd: float = field(default_factory=thermal_noise_psd)
    reflection_loss_db: float = 10.0
    num_nlos_rays: int = 0

    def __post_init__(self):
        if not self.carrier_freq > 0:
            raise InvalidArgumentError(f"carrier_freq must be > 0, got {self.carrier_freq}")
        if not self.bandwidth > 0:
            raise InvalidArgumentError(f"bandwidth must be > 0, got {self.bandwidth}")
        if not self.absorption_coeff >= 0:
            raise InvalidArgumentError(f"absorption_coeff must be >= 0, got {self.absorption_coeff}")
        if not self.noise_psd > 0:
            raise InvalidArgumentError(f"noise_psd must be > 0, got {self.noise_psd}")
        if not self.reflection_loss_db >= 0:
            raise InvalidArgumentError(
                f"reflection_loss_db must be >= 0, got {self.reflection_loss_db}")
        if int(self.num_nlos_rays) != self.num_nlos_rays or self.num_nlos_rays < 0:
            raise InvalidArgumentError(f"num_nlos_rays must be a count, got {self.num_nlos_rays}")

    @property
    def noise_variance(self) -> float:
        """sigma_n^2 = noise_psd * bandwidth, in W."""
        return self.noise_psd * self.bandwidth

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq


def _as_point(p, name):
    arr = np.asarray(p, dtype=float).reshape(-1)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must be a finite 3-vector, got {p!r}")
    return arr


@dataclass(frozen=True)
class Topology:
    """BS, serial RIS chain and users.

    Positions are in meters. ``direct_blockage_db`` attenuates every direct
    BS-user channel; ``math.inf`` removes the direct paths entirely.
    """

    num_bs_antennas: int
    num_users: int
    ris_sizes: tuple[int, ...]
    bs_position: np.ndarray
    ris_positions: tuple[np.ndarray, ...]
    user_positions: tuple[np.ndarray, ...]
    direct_blockage_db: float = 0.0

    def __post_init__(self):
        M, K = self.num_bs_antennas, self.num_users
        if M < 1 or K < 1:
            raise InvalidArgumentError(f"need M >= 1 and K >= 1, got M={M}, K={K}")
        if K > M:
            raise InvalidArgumentError(f"K={K} users exceed M={M} BS antennas")
        sizes = tuple(int(n) for n in self.ris_sizes)
        if any(n < 1 for n in sizes):
            raise InvalidArgumentError(f"RIS sizes must be >= 1, got {sizes}")
        object.__setattr__(self, "ris_sizes", sizes)
        object.__setattr__(self, "bs_position", _as_point(self.bs_position, "bs_position"))
        ris = tuple(_as_point(p, "ris_positions") for p in self.ris_positions)
        users = tuple(_as_point(p, "user_positions") for p in self.user_positions)
        if len(ris) != len(sizes):
            raise DimensionMismatchError(
                f"{len(ris)} RIS positions for {len(sizes)} RIS sizes")
        if len(users) != K:
            raise DimensionMismatchError(f"{len(users)} user positions for K={K}")
        object.__setattr__(self, "ris_positions", ris)
        object.__setattr__(self, "user_positions", users)
        if math.isnan(self.direct_blockage_db) or self.direct_blockage_db < 0:
            raise InvalidArgumentError(
                f"direct_blockage_db must be >= 0, got {self.direct_blockage_db}")

    @property
    def num_hops(self) -> int:
        return len(self.ris_sizes)


def line_topology(distance: float, num_bs_antennas: int, num_users: int,
                  ris_sizes: Sequence[int] = (), *, ris_offset: float = 2.0,
                  user_spacing: float = 1.0, direct_blockage_db: float = 0.0) -> Topology:
    """Planar scenario with the users ``distance`` meters from the BS.

    The BS sits at the origin. Users are spread ``user_spacing`` apart on a
    line perpendicular to the x axis at x = distance. RIS i (1-based) sits
    at x = distance * i / (I + 1), displaced ``ris_offset`` meters off axis,
    so the chain is evenly spaced between BS and users.
    """
    if not distance > 0:
        raise InvalidArgumentError(f"distance must be > 0, got {distance}")
    I = len(ris_sizes)
    users = [(distance, (k - (num_users - 1) / 2) * user_spacing, 0.0)
             for k in range(num_users)]
    ris = [(distance * (i + 1) / (I + 1), ris_offset, 0.0) for i in range(I)]
    return Topology(num_bs_antennas, num_users, tuple(ris_sizes), (0.0, 0.0, 0.0),
                    tuple(ris), tuple(users), direct_blockage_db)


@dataclass(frozen=True)
class ChannelRealization:
    """All complex channels of one scenario draw.

    H[0] is N_1 x M (BS to first RIS), H[i] is N_{i+1} x N_i; g[k] has
    length N_I (last RIS to user k); w[k] has length M (BS to user k).
    """

    H: tuple[np.ndarray, ...]
    g: tuple[np.ndarray, ...]
    w: tuple[np.ndarray, ...]

    def __post_init__(self):
        H = tuple(np.asarray(h, dtype=complex) for h in self.H)
        g = tuple(np.asarray(v, dtype=complex).reshape(-1) for v in self.g)
        w = tuple(np.asarray(v, dtype=complex).reshape(-1) for v in self.w)
        if not w:
            raise DimensionMismatchError("at least one user is required")
        M = w[0].size
        if any(v.size != M for v in w):
            raise DimensionMismatchError("direct channels have unequal lengths")
        cols = M
        for i, h in enumerate(H):
            if h.ndim != 2 or h.shape[1] != cols:
                raise DimensionMismatchError(
                    f"H[{i}] has shape {h.shape}, expected (N_{i + 1}, {cols})")
            cols = h.shape[0]
        if H:
            if len(g) != len(w):
                raise DimensionMismatchError(f"{len(g)} RIS-user channels for {len(w)} users")
            if any(v.size != cols for v in g):
                raise DimensionMismatchError(f"RIS-user channels must have length {cols}")
        elif g:
            raise DimensionMismatchError("RIS-user channels given without any RIS")
        for arr in (*H, *g, *w):
            if not np.all(np.isfinite(arr)):
                raise InvalidArgumentError("channel entries must be finite")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "w", w)

    @property
    def num_bs_antennas(self) -> int:
        return self.w[0].size

    @property
    def num_users(self) -> int:
        return len(self.w)

    @property
    def num_hops(self) -> int:
        return len(self.H)

    @property
    def ris_sizes(self) -> tuple[int, ...]:
        return tuple(h.shape[0] for h in self.H)

    @property
    def direct_matrix(self) -> np.ndarray:
        """K x M matrix whose rows are the direct channels w_k."""
        return np.stack(self.w)


def _check_length(value, name):
    if not value > 0:
        raise InvalidArgumentError(f"{name} must be > 0, got {value}")


def los_amplitude(params: ThzPhysParams, distance: float) -> float:
    _check_length(distance, "distance")
    spreading = SPEED_OF_LIGHT / (4.0 * math.pi * params.carrier_freq * distance)
    return spreading * math.exp(-params.absorption_coeff * distance / 2.0)


def _delay_phasor(params: ThzPhysParams, length: float) -> complex:
    phase = math.fmod(2.0 * math.pi * params.carrier_freq * length / SPEED_OF_LIGHT,
                      2.0 * math.pi)
    return complex(math.cos(phase), -math.sin(phase))


def los_gain(params: ThzPhysParams, distance: float) -> complex:
    """LOS transfer coefficient a(d) * exp(-j 2 pi f d / c)."""
    return los_amplitude(params, distance) * _delay_phasor(params, distance)


def nlos_gain(params: ThzPhysParams, path_length: float) -> complex:
    """One reflected ray: the LOS law over the bounce length, minus the reflection loss."""
    _check_length(path_length, "path_length")
    loss = 10.0 ** (-params.reflection_loss_db / 20.0)
    return los_amplitude(params, path_length) * loss * _delay_phasor(params, path_length)


def bounce_path_length(tx, scatterer, rx) -> float:
    """Straight-line length of the path tx -> scatterer -> rx."""
    tx, sc, rx = (_as_point(p, "point") for p in (tx, scatterer, rx))
    return float(np.linalg.norm(sc - tx) + np.linalg.norm(rx - sc))


def transfer_function(params: ThzPhysParams, distance: float,
                      nlos_path_lengths: Sequence[float] = ()) -> complex:
    """LOS term plus ``num_nlos_rays`` reflected rays.

    ``nlos_path_lengths`` must hold one bounce length per configured ray.
    """
    if len(nlos_path_lengths) != params.num_nlos_rays:
        raise InvalidArgumentError(
            f"expected {params.num_nlos_rays} NLOS path lengths, got {len(nlos_path_lengths)}")
    return los_gain(params, distance) + sum(
        (nlos_gain(params, length) for length in nlos_path_lengths), 0j)


def sample_rayleigh(rows: int, cols: int, scale: float, rng: np.random.Generator) -> np.ndarray:
    """rows x cols matrix of i.i.d. CN(0, scale^2) entries."""
    if rows < 1 or cols < 1:
        raise InvalidArgumentError(f"dimensions must be >= 1, got {rows}x{cols}")
    if not scale > 0:
        raise InvalidArgumentError(f"scale must be > 0, got {scale}")
    parts = rng.standard_normal((2, rows, cols))
    unit = (parts[0] + 1j * parts[1]) * math.sqrt(0.5)
    return scale * unit


def _dist(a, b) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def generate_channels(topo: Topology, params: ThzPhysParams,
                      rng: np.random.Generator) -> ChannelRealization:
    """Draw one realization for ``topo``.

    Direct channels are drawn first, so two topologies that differ only in
    their RIS chain share the same w_k for the same generator state.
    """
    M = topo.num_bs_antennas
    if math.isinf(topo.direct_blockage_db):
        blockage = 0.0
    else:
        blockage = 10.0 ** (-topo.direct_blockage_db / 20.0)
    w = []
    for user in topo.user_positions:
        scale = los_amplitude(params, _dist(topo.bs_position, user))
        w.append(sample_rayleigh(1, M, scale, rng)[0] * blockage)

    H = []
    prev_pos, prev_size = topo.bs_position, M
    for size, pos in zip(topo.ris_sizes, topo.ris_positions):
        H.append(sample_rayleigh(size, prev_size, los_amplitude(params, _dist(prev_pos, pos)), rng))
        prev_pos, prev_size = pos, size

    g = []
    if topo.ris_sizes:
        for user in topo.user_positions:
            scale = los_amplitude(params, _dist(prev_pos, user))
            g.append(sample_rayleigh(prev_size, 1, scale, rng)[:, 0])
    return ChannelRealization(tuple(H), tuple(g), tuple(w))
