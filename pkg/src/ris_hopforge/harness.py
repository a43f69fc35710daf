"""Experiment orchestration for distance sweeps and reward traces.

Seed splitting rule
-------------------
Sweep cell (distance index i, draw j) gets the 64-bit seed

    cell_seed = SeedSequence(seed, spawn_key=(i, j)).generate_state(1, uint64)[0]

and two generators, ``default_rng([cell_seed, 0])`` for the channel draw
and ``default_rng([cell_seed, 1])`` for the algorithm. Every scheme uses the
same cell seed, so schemes are compared on paired channel draws (direct
channels are drawn first and coincide across hop counts). A reward trace
uses ``default_rng([seed, 0])`` for channels and ``default_rng([seed, 1])``
for the agent, identically for every transmit power.
"""

from __future__ import annotations

import copy
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import time
import typing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from .baselines import AltOptSettings, alternating_opt, random_phase_baseline, zf_precoder
from .channel import ThzPhysParams, generate_channels, line_topology, thermal_noise_psd
from .ddpg import DdpgHyper, Layout, TrainEnv, project_action, project_action_backward, train
from .errors import ConfigError
from .neural import DenseNet, central_difference, grad_check, rel_error, relu_margin
from .signal import NoiseParams, PhaseConfig, sum_rate

SEED_ENV = "RIS_HOPFORGE_SEED"
SCHEMES = ("no-ris-zf", "random-phase", "single-hop-altopt", "drl")
SWEEP_HEADER = ("distance_m", "scheme", "draw", "seed", "sum_rate_bps_hz", "throughput_bps",
                "wall_time_s")
TRACE_HEADER = ("episode", "step", "pt_watt", "reward", "avg_reward", "critic_loss",
                "actor_objective", "lr_c", "lr_a", "noise_std")


@dataclass
class TopologyConfig:
    num_bs_antennas: int = 4
    num_users: int = 2
    num_hops: int = 1
    ris_elements: int = 8
    ris_offset_m: float = 2.0
    user_spacing_m: float = 1.0
    direct_blockage_db: float = 30.0


@dataclass
class PhysConfig:
    carrier_freq: float = 0.12e12
    bandwidth: float = 12e9
    absorption_coeff: float = 0.01
    noise_psd: float | None = None
    temperature_k: float = 290.0
    noise_figure_db: float = 10.0
    reflection_loss_db: float = 10.0
    num_nlos_rays: int = 0

    def __post_init__(self):
        self.to_params()

    def to_params(self) -> ThzPhysParams:
        psd = self.noise_psd
        if psd is None:
            psd = thermal_noise_psd(self.temperature_k, self.noise_figure_db)
        return ThzPhysParams(self.carrier_freq, self.bandwidth, self.absorption_coeff, psd,
                             self.reflection_loss_db, self.num_nlos_rays)


@dataclass
class ExperimentConfig:
    """Everything a sweep or trace needs; see ``configs/desk.yaml`` for the file form."""

    topology: TopologyConfig = field(default_factory=TopologyConfig)
    phys: PhysConfig = field(default_factory=PhysConfig)
    hyper: DdpgHyper = field(default_factory=lambda: DdpgHyper(
        episodes=1, steps_per_episode=2000, hidden_width=64, early_stop_window=0))
    altopt: AltOptSettings = field(default_factory=AltOptSettings)
    schemes: list[str] = field(default_factory=lambda: ["no-ris-zf", "drl@1", "drl@2"])
    power_watt: float = 10.0
    random_phase_draws: int = 100
    distance_grid: list[float] = field(default_factory=lambda: [1.0, 5.0, 10.0, 15.0, 20.0])
    num_channel_draws: int = 50
    trace_powers: list[float] = field(default_factory=lambda: [5.0, 20.0, 30.0])
    trace_distance_m: float = 10.0
    trace_fixed_channel: bool = True
    coverage_threshold_bps: float = 1e9
    seed: int = 0
    output_dir: str = "out"
    record_wall_time: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.distance_grid:
            raise ConfigError("distance_grid: must be nonempty")
        if any(not (isinstance(d, (int, float)) and d > 0 and math.isfinite(d))
               for d in self.distance_grid):
            raise ConfigError(f"distance_grid: all distances must be positive, got {self.distance_grid}")
        if self.num_channel_draws < 1:
            raise ConfigError("num_channel_draws: must be >= 1")
        if not self.power_watt > 0:
            raise ConfigError("power_watt: must be > 0")
        if self.random_phase_draws < 1:
            raise ConfigError("random_phase_draws: must be >= 1")
        if not self.trace_powers or any(p <= 0 for p in self.trace_powers):
            raise ConfigError("trace_powers: must be a nonempty list of positive powers")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed: must be an unsigned 64-bit integer")
        if not self.schemes:
            raise ConfigError("schemes: must name at least one scheme")
        for s in self.schemes:
            parse_scheme(s, self.topology.num_hops)
        t = self.topology
        if t.num_users > t.num_bs_antennas:
            raise ConfigError("topology.num_users: must not exceed topology.num_bs_antennas")
        if t.ris_elements < 1 or t.num_hops < 0:
            raise ConfigError("topology: ris_elements must be >= 1 and num_hops >= 0")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def identity(self) -> dict:
        """Everything that affects results; ``output_dir`` only says where they go."""
        d = self.to_dict()
        del d["output_dir"]
        return d

    def digest(self) -> str:
        blob = json.dumps(self.identity(), sort_keys=True, default=repr).encode()
        return hashlib.sha256(blob).hexdigest()


def parse_scheme(name: str, default_hops: int) -> tuple[str, int]:
    """``"drl@2"`` -> ("drl", 2); hop count falls back to the topology's."""
    base, _, hops = str(name).partition("@")
    if base not in SCHEMES:
        raise ConfigError(f"schemes: unknown scheme {name!r}; expected one of {SCHEMES}")
    if hops:
        try:
            I = int(hops)
        except ValueError:
            raise ConfigError(f"schemes: bad hop count in {name!r}") from None
    elif base == "no-ris-zf":
        I = 0
    elif base == "single-hop-altopt":
        I = 1
    else:
        I = default_hops
    if base == "no-ris-zf" and I != 0:
        raise ConfigError(f"schemes: {name!r} cannot have RIS hops")
    if base == "single-hop-altopt" and I != 1:
        raise ConfigError(f"schemes: {name!r} requires exactly one RIS hop")
    if base in ("random-phase", "drl") and I < 0:
        raise ConfigError(f"schemes: negative hop count in {name!r}")
    return base, I


def scheme_label(name: str, default_hops: int) -> str:
    base, I = parse_scheme(name, default_hops)
    return base if base in ("no-ris-zf", "single-hop-altopt") else f"{base}@{I}"


_SECTIONS = {"topology": TopologyConfig, "phys": PhysConfig, "hyper": DdpgHyper,
             "altopt": AltOptSettings}


def _build(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected a mapping, got {type(data).__name__}")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(names))
    if unknown:
        where = f"{path}." if path else ""
        raise ConfigError(f"unknown config key(s): {', '.join(where + k for k in unknown)}")
    hints = typing.get_type_hints(cls)
    kwargs = {}
    for key, value in data.items():
        where = f"{path}.{key}" if path else key
        if cls is ExperimentConfig and key in _SECTIONS:
            kwargs[key] = _build(_SECTIONS[key], value or {}, key)
        elif cls is ExperimentConfig and key == "schemes" and isinstance(value, str):
            kwargs[key] = [value]
        else:
            kwargs[key] = _coerce(value, hints[key], where)
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path or 'config'}: {exc}") from exc


def _coerce(value, hint, where: str):
    """Check ``value`` against a field annotation, converting numeric strings to float.

    YAML 1.1 reads ``1e9`` (no dot, no exponent sign) as a string, so float
    fields accept any string that parses as a number.
    """
    args = typing.get_args(hint)
    if type(None) in args:
        if value is None:
            return None
        hint = next(a for a in args if a is not type(None))
    origin = typing.get_origin(hint)
    if origin is list:
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected a list, got {value!r}")
        inner = typing.get_args(hint)[0]
        return [_coerce(v, inner, f"{where}[{i}]") for i, v in enumerate(value)]
    if hint is float:
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                pass
        elif isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if hint is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if hint is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{where}: expected true or false, got {value!r}")
    if hint is str:
        if isinstance(value, str):
            return value
        raise ConfigError(f"{where}: expected a string, got {value!r}")
    return value


def config_from_dict(data: dict) -> ExperimentConfig:
    return _build(ExperimentConfig, data or {}, "")


def apply_override(data: dict, item: str):
    """Apply ``"a.b=value"`` in place; the value is parsed as YAML."""
    key, sep, raw = item.partition("=")
    if not sep or not key:
        raise ConfigError(f"override {item!r} must look like key=value")
    parts = key.strip().split(".")
    node = data
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override {item!r}: {p} is not a section")
    node[parts[-1]] = yaml.safe_load(raw)


def resolve_seed(cli_seed: int | None, file_data: dict) -> int:
    if cli_seed is not None:
        return int(cli_seed)
    if "seed" in file_data:
        return int(file_data["seed"])
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from None
    return 0


def load_config(path=None, *, seed=None, overrides: Sequence[str] = (), scheme=None,
                output_dir=None) -> ExperimentConfig:
    data: dict[str, Any] = {}
    if path is not None:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    data = copy.deepcopy(data)
    for item in overrides:
        apply_override(data, item)
    data["seed"] = resolve_seed(seed, data)
    if scheme:
        data["schemes"] = list(scheme)
    if output_dir is not None:
        data["output_dir"] = str(output_dir)
    return config_from_dict(data)


def cell_seed(seed: int, dist_index: int, draw: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(dist_index, draw))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SweepRow:
    distance_m: float
    scheme: str
    draw: int
    seed: int
    sum_rate_bps_hz: float
    throughput_bps: float
    wall_time_s: float


def run_scheme(cfg: ExperimentConfig, scheme: str, distance: float, seed: int):
    """Sum rate of ``scheme`` on the channel drawn for one sweep cell."""
    base, I = parse_scheme(scheme, cfg.topology.num_hops)
    t = cfg.topology
    topo = line_topology(distance, t.num_bs_antennas, t.num_users, [t.ris_elements] * I,
                         ris_offset=t.ris_offset_m, user_spacing=t.user_spacing_m,
                         direct_blockage_db=t.direct_blockage_db)
    params = cfg.phys.to_params()
    noise = NoiseParams(params.noise_variance)
    chan = generate_channels(topo, params, np.random.default_rng([seed, 0]))
    algo_rng = np.random.default_rng([seed, 1])
    P = cfg.power_watt
    if base == "no-ris-zf":
        prec = zf_precoder(chan.direct_matrix, P)
        return sum_rate(chan, PhaseConfig(()), prec, noise)
    if base == "random-phase":
        return random_phase_baseline(chan, P, noise, algo_rng, cfg.random_phase_draws)[2]
    if base == "single-hop-altopt":
        return alternating_opt(chan, P, noise, cfg.altopt, algo_rng)[2][-1]
    return train(TrainEnv(chan, P, noise), cfg.hyper, algo_rng).best_reward


def _run_cell(args):
    cfg, scheme, i, j = args
    distance = float(cfg.distance_grid[i])
    seed = cell_seed(cfg.seed, i, j)
    t0 = time.perf_counter()
    rate = run_scheme(cfg, scheme, distance, seed)
    wall = time.perf_counter() - t0 if cfg.record_wall_time else math.nan
    label = scheme_label(scheme, cfg.topology.num_hops)
    return SweepRow(distance, label, j, seed, rate, rate * cfg.phys.bandwidth, wall)


def run_distance_sweep(cfg: ExperimentConfig, jobs: int = 1) -> list[SweepRow]:
    """All (scheme, distance, draw) cells, in that nesting order, regardless of ``jobs``."""
    tasks = [(cfg, s, i, j) for s in cfg.schemes for i in range(len(cfg.distance_grid))
             for j in range(cfg.num_channel_draws)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_cell, tasks, chunksize=1))
    return [_run_cell(t) for t in tasks]


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _header_lines(kind: str, cfg: ExperimentConfig) -> str:
    return (f"# ris-hopforge {kind}\n# config_sha256={cfg.digest()}\n# seed={cfg.seed}\n"
            f"# config={json.dumps(cfg.identity(), sort_keys=True, default=repr)}\n")


def _write_csv(path, header, rows, preamble):
    buf = io.StringIO()
    buf.write(preamble)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(buf.getvalue())


def write_sweep_csv(rows: Sequence[SweepRow], path, cfg: ExperimentConfig):
    _write_csv(path, SWEEP_HEADER, [dataclasses.astuple(r) for r in rows],
               _header_lines("sweep", cfg))


def read_sweep_csv(path) -> list[SweepRow]:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != SWEEP_HEADER:
        raise ConfigError(f"{path}: not a sweep CSV (header {reader.fieldnames})")
    return [SweepRow(float(r["distance_m"]), r["scheme"], int(r["draw"]), int(r["seed"]),
                     float(r["sum_rate_bps_hz"]), float(r["throughput_bps"]),
                     float(r["wall_time_s"])) for r in reader]


def bootstrap_ci(values, rng: np.random.Generator, level: float = 0.9,
                 n_boot: int = 2000) -> tuple[float, float]:
    """Percentile bootstrap interval of the mean."""
    values = np.asarray(values, dtype=float)
    idx = rng.integers(0, values.size, size=(n_boot, values.size))
    means = values[idx].mean(axis=1)
    lo, hi = np.quantile(means, [(1 - level) / 2, (1 + level) / 2])
    return float(lo), float(hi)


def summarize(rows: Sequence[SweepRow], seed: int = 0, level: float = 0.9):
    """Per (scheme, distance) means of the sweep columns with a bootstrap CI of the sum rate."""
    groups: dict[tuple[str, float], list[SweepRow]] = {}
    for r in rows:
        groups.setdefault((r.scheme, r.distance_m), []).append(r)
    out = []
    for k, (key, members) in enumerate(groups.items()):
        rates = np.array([m.sum_rate_bps_hz for m in members])
        lo, hi = bootstrap_ci(rates, np.random.default_rng([seed, k]), level)
        out.append({"scheme": key[0], "distance_m": key[1], "draws": len(members),
                    "mean_sum_rate_bps_hz": float(rates.mean()),
                    "mean_throughput_bps": float(np.mean([m.throughput_bps for m in members])),
                    "ci_low": lo, "ci_high": hi})
    return out


def coverage_range(rows: Sequence[SweepRow], threshold_bps: float):
    """Per scheme, the farthest grid distance whose mean throughput meets ``threshold_bps``.

    ``interpolated_m`` linearly interpolates mean throughput between that
    grid point and the next one; ``met`` is False (and both distances 0)
    when no grid point reaches the threshold.
    """
    by_scheme: dict[str, dict[float, list[float]]] = {}
    for r in rows:
        by_scheme.setdefault(r.scheme, {}).setdefault(r.distance_m, []).append(r.throughput_bps)
    result = {}
    for scheme, cells in by_scheme.items():
        dists = sorted(cells)
        means = [float(np.mean(cells[d])) for d in dists]
        ok = [i for i, m in enumerate(means) if m >= threshold_bps]
        if not ok:
            result[scheme] = {"grid_m": 0.0, "interpolated_m": 0.0, "met": False}
            continue
        i = ok[-1]
        interp = dists[i]
        if i + 1 < len(dists):
            d0, d1, m0, m1 = dists[i], dists[i + 1], means[i], means[i + 1]
            interp = d0 + (m0 - threshold_bps) / (m0 - m1) * (d1 - d0)
        result[scheme] = {"grid_m": dists[i], "interpolated_m": float(interp), "met": True}
    return result


def trace_environment(cfg: ExperimentConfig, P_t: float) -> TrainEnv:
    t = cfg.topology
    topo = line_topology(cfg.trace_distance_m, t.num_bs_antennas, t.num_users,
                         [t.ris_elements] * t.num_hops, ris_offset=t.ris_offset_m,
                         user_spacing=t.user_spacing_m, direct_blockage_db=t.direct_blockage_db)
    params = cfg.phys.to_params()
    chan_rng = np.random.default_rng([cfg.seed, 0])
    noise = NoiseParams(params.noise_variance)
    if cfg.trace_fixed_channel:
        return TrainEnv(generate_channels(topo, params, chan_rng), P_t, noise)
    return TrainEnv(lambda episode, _rng: generate_channels(topo, params, chan_rng), P_t, noise)


def run_reward_trace(cfg: ExperimentConfig) -> list[tuple]:
    """Per-step DDPG log for every transmit power in ``cfg.trace_powers``.

    ``avg_reward`` is the running mean of the instant rewards of that power's run.
    """
    rows = []
    for P_t in cfg.trace_powers:
        env = trace_environment(cfg, P_t)
        res = train(env, cfg.hyper, np.random.default_rng([cfg.seed, 1]))
        log = res.log
        avg = np.cumsum(log["reward"]) / np.arange(1, log["reward"].size + 1)
        for n in range(log["reward"].size):
            rows.append((int(log["episode"][n]), int(log["step"][n]), float(P_t),
                         float(log["reward"][n]), float(avg[n]), float(log["critic_loss"][n]),
                         float(log["actor_objective"][n]), float(log["lr_c"][n]),
                         float(log["lr_a"][n]), float(log["noise_std"][n])))
    return rows


def write_trace_csv(rows, path, cfg: ExperimentConfig):
    _write_csv(path, TRACE_HEADER, rows, _header_lines("trace", cfg))


def _quadratic_loss(target):
    def loss(out):
        diff = out - target
        return 0.5 * float(np.sum(diff * diff)), diff
    return loss


def random_grad_check_net(rng: np.random.Generator, *, max_width: int = 6,
                          margin: float = 5e-2):
    """A random small net and input batch for a gradient check, avoiding ReLU kinks.

    Returns ``(net, x, loss_fn, mode)``. Draws are repeated until every
    ReLU pre-activation sits at least ``margin`` away from zero.
    """
    while True:
        depth = int(rng.integers(1, 4))
        sizes = [int(s) for s in rng.integers(1, max_width + 1, size=depth + 1)]
        hidden = str(rng.choice(["relu", "tanh", "identity"]))
        output = str(rng.choice(["relu", "tanh", "identity"]))
        net = DenseNet(sizes, hidden_activation=hidden, output_activation=output,
                       batchnorm=bool(rng.integers(0, 2)), rng=rng)
        for bn in net.norms:
            if bn is not None:
                bn.gamma[:] = rng.uniform(0.5, 1.5, bn.gamma.shape)
                bn.beta[:] = rng.normal(0.0, 0.5, bn.beta.shape)
                bn.running_mean[:] = rng.normal(0.0, 0.5, bn.running_mean.shape)
                bn.running_var[:] = rng.uniform(0.5, 2.0, bn.running_var.shape)
        net.touch()
        mode = str(rng.choice(["train", "eval"]))
        batch = int(rng.integers(2, 6))
        for _ in range(20):
            x = rng.normal(size=(batch, sizes[0]))
            if relu_margin(net, x, mode) > margin:
                target = rng.normal(size=(batch, sizes[-1]))
                return net, x, _quadratic_loss(target), mode


def projection_grad_check(rng: np.random.Generator, step: float = 1e-3) -> float:
    """Max relative error of the actor projection layer's VJP against finite differences."""
    M, K = int(rng.integers(1, 4)), int(rng.integers(1, 3))
    sizes = tuple(int(n) for n in rng.integers(1, 4, size=int(rng.integers(0, 3))))
    layout = Layout(M, K, sizes)
    raw = rng.normal(size=(int(rng.integers(1, 4)), layout.action_dim))
    P_t = float(rng.uniform(0.5, 20.0))
    weights = rng.normal(size=raw.shape)
    _, cache = project_action(raw, layout, P_t)
    analytic = project_action_backward(cache, weights)

    def objective():
        return float(np.sum(weights * project_action(raw, layout, P_t)[0]))

    numeric = central_difference(objective, raw, step)
    floor = 1e-6 * max(1.0, abs(objective()))
    return float(rel_error(analytic, numeric, floor).max(initial=0.0))


def run_grad_check_suite(num_nets: int, seed: int, tolerance: float = 1e-5) -> dict:
    """Gradient-check ``num_nets`` random nets plus as many projection layers."""
    rng = np.random.default_rng([seed, 2])
    nets = []
    for i in range(num_nets):
        net, x, loss, mode = random_grad_check_net(rng)
        rep = grad_check(net, loss, x, tolerance, mode=mode)
        nets.append({"index": i, "sizes": list(net.sizes), "hidden": net.hidden_activation,
                     "output": net.output_activation,
                     "batchnorm": any(bn is not None for bn in net.norms), "mode": mode,
                     "max_rel_error": rep.max_rel_error, "worst": rep.worst})
    proj = [projection_grad_check(rng) for _ in range(num_nets)]
    worst = max([n["max_rel_error"] for n in nets] + proj, default=0.0)
    return {"seed": seed, "tolerance": tolerance, "nets": nets,
            "projection_max_rel_errors": proj, "max_rel_error": worst,
            "passed": worst <= tolerance}
