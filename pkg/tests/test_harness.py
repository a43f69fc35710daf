import json
import math

import numpy as np
import pytest
import yaml

from ris_hopforge import cli, harness
from ris_hopforge.ddpg import DdpgHyper
from ris_hopforge.errors import ConfigError
from ris_hopforge.harness import (
    ExperimentConfig,
    SweepRow,
    TopologyConfig,
    coverage_range,
    load_config,
    parse_scheme,
    run_distance_sweep,
    run_reward_trace,
    summarize,
)

TINY_HYPER = {"episodes": 1, "steps_per_episode": 5, "hidden_width": 8, "early_stop_window": 0}


def tiny_config(**kwargs):
    base = dict(hyper=DdpgHyper(**TINY_HYPER), schemes=["no-ris-zf"], distance_grid=[2.0, 8.0],
                num_channel_draws=2, trace_powers=[5.0, 30.0], random_phase_draws=3)
    base.update(kwargs)
    return ExperimentConfig(**base)


class TestConfig:
    def test_defaults_validate(self):
        cfg = ExperimentConfig()
        assert cfg.schemes == ["no-ris-zf", "drl@1", "drl@2"]
        assert cfg.topology == TopologyConfig()

    def test_desk_file_matches_defaults(self):
        assert load_config("configs/desk.yaml") == ExperimentConfig()

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text("topology:\n  num_antennas: 4\n")
        with pytest.raises(ConfigError, match="topology.num_antennas"):
            load_config(p)

    def test_wrong_type(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text("num_channel_draws: many\n")
        with pytest.raises(ConfigError, match="num_channel_draws"):
            load_config(p)

    def test_float_strings_coerced(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text("phys:\n  carrier_freq: 0.3e12\n")
        assert load_config(p).phys.carrier_freq == 0.3e12

    @pytest.mark.parametrize("override", [
        "distance_grid=[]", "distance_grid=[1, -2]", "num_channel_draws=0", "power_watt=0",
        "schemes=[single-hop-altopt@2]", "schemes=[no-ris-zf@1]", "schemes=[magic]",
        "topology.num_users=9", "phys.carrier_freq=-1",
    ])
    def test_invalid_values(self, override):
        with pytest.raises(ConfigError):
            load_config(overrides=[override])

    def test_override_nested(self):
        cfg = load_config(overrides=["hyper.steps_per_episode=7", "topology.num_hops=2"])
        assert cfg.hyper.steps_per_episode == 7 and cfg.topology.num_hops == 2

    def test_seed_precedence(self, tmp_path, monkeypatch):
        p = tmp_path / "c.yaml"
        p.write_text("seed: 11\n")
        monkeypatch.setenv(harness.SEED_ENV, "5")
        assert load_config().seed == 5
        assert load_config(p).seed == 11
        assert load_config(p, seed=3).seed == 3
        monkeypatch.delenv(harness.SEED_ENV)
        assert load_config().seed == 0

    def test_parse_scheme(self):
        assert parse_scheme("drl@2", 1) == ("drl", 2)
        assert parse_scheme("drl", 3) == ("drl", 3)
        assert parse_scheme("no-ris-zf", 2) == ("no-ris-zf", 0)
        assert parse_scheme("single-hop-altopt", 2) == ("single-hop-altopt", 1)

    def test_digest_ignores_output_dir(self):
        assert tiny_config(output_dir="a").digest() == tiny_config(output_dir="b").digest()
        assert tiny_config(seed=1).digest() != tiny_config(seed=2).digest()


class TestSweep:
    def test_rows_and_throughput(self):
        cfg = tiny_config(schemes=["no-ris-zf", "random-phase@1", "single-hop-altopt", "drl@1"])
        rows = run_distance_sweep(cfg)
        assert len(rows) == 4 * 2 * 2
        assert [r.scheme for r in rows[::4]] == ["no-ris-zf", "random-phase@1",
                                                 "single-hop-altopt", "drl@1"]
        for r in rows:
            assert r.throughput_bps == r.sum_rate_bps_hz * cfg.phys.bandwidth
            assert r.sum_rate_bps_hz >= 0 and math.isnan(r.wall_time_s)

    def test_zf_throughput_decreases_with_distance(self):
        cfg = tiny_config(distance_grid=[1.0, 5.0, 10.0, 20.0], num_channel_draws=20)
        means = [s["mean_throughput_bps"] for s in summarize(run_distance_sweep(cfg))]
        assert all(a > b for a, b in zip(means, means[1:]))

    def test_wall_time_recorded_on_request(self):
        rows = run_distance_sweep(tiny_config(record_wall_time=True, num_channel_draws=1))
        assert all(r.wall_time_s >= 0 for r in rows)

    def test_schemes_share_channels(self):
        # The RIS-free direct channel is drawn first from the cell seed, so the
        # seeds and the direct links coincide across schemes for a cell.
        cfg = tiny_config(schemes=["no-ris-zf", "drl@1"], num_channel_draws=1)
        rows = run_distance_sweep(cfg)
        assert rows[0].seed == rows[2].seed and rows[1].seed == rows[3].seed

    def test_jobs_invariant(self, tmp_path):
        cfg = tiny_config(schemes=["no-ris-zf", "drl@1"])
        harness.write_sweep_csv(run_distance_sweep(cfg, jobs=1), tmp_path / "a.csv", cfg)
        harness.write_sweep_csv(run_distance_sweep(cfg, jobs=2), tmp_path / "b.csv", cfg)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_csv_round_trip_and_header(self, tmp_path):
        cfg = tiny_config(seed=42)
        rows = run_distance_sweep(cfg)
        path = tmp_path / "s.csv"
        harness.write_sweep_csv(rows, path, cfg)
        text = path.read_text()
        assert f"# config_sha256={cfg.digest()}" in text and "# seed=42" in text
        back = harness.read_sweep_csv(path)
        assert [r.__class__(**{**r.__dict__, "wall_time_s": 0.0}) for r in back] == \
            [r.__class__(**{**r.__dict__, "wall_time_s": 0.0}) for r in rows]
        assert all(math.isnan(r.wall_time_s) for r in back)


class TestSummaries:
    def rows(self, table):
        return [SweepRow(d, s, j, 0, v / 10, v, math.nan)
                for (s, d), vals in table.items() for j, v in enumerate(vals)]

    def test_coverage_interpolates(self):
        rows = self.rows({("a", 1.0): [4.0, 4.0], ("a", 2.0): [3.0], ("a", 3.0): [1.0]})
        cov = coverage_range(rows, 2.0)["a"]
        assert cov == {"grid_m": 2.0, "interpolated_m": 2.5, "met": True}

    def test_coverage_last_grid_point(self):
        cov = coverage_range(self.rows({("a", 1.0): [5.0], ("a", 2.0): [5.0]}), 2.0)["a"]
        assert cov["grid_m"] == cov["interpolated_m"] == 2.0

    def test_coverage_never_met(self):
        cov = coverage_range(self.rows({("a", 1.0): [1.0]}), 2.0)["a"]
        assert cov == {"grid_m": 0.0, "interpolated_m": 0.0, "met": False}

    def test_bootstrap_ci_brackets_mean(self, rng):
        x = rng.normal(5.0, 1.0, 200)
        lo, hi = harness.bootstrap_ci(x, np.random.default_rng(0))
        assert lo < x.mean() < hi and hi - lo < 0.5

    def test_summary_counts(self):
        out = summarize(self.rows({("a", 1.0): [1.0, 3.0], ("b", 1.0): [2.0]}))
        assert [(o["scheme"], o["draws"], o["mean_throughput_bps"]) for o in out] == [
            ("a", 2, 2.0), ("b", 1, 2.0)]


class TestTrace:
    def test_rows_and_running_mean(self):
        cfg = tiny_config(hyper=DdpgHyper(**{**TINY_HYPER, "episodes": 2}))
        rows = run_reward_trace(cfg)
        assert len(rows) == 2 * 5 * 2
        for P in cfg.trace_powers:
            mine = [r for r in rows if r[2] == P]
            rewards = np.array([r[3] for r in mine])
            expected = np.cumsum(rewards) / np.arange(1, rewards.size + 1)
            np.testing.assert_allclose([r[4] for r in mine], expected, rtol=1e-12)

    def test_same_channel_for_every_power(self):
        cfg = tiny_config()
        a, b = (harness.trace_environment(cfg, P).channel for P in (5.0, 30.0))
        for x, y in zip(a.H + a.g + a.w, b.H + b.g + b.w):
            np.testing.assert_array_equal(x, y)


class TestCli:
    def write_config(self, tmp_path, **extra):
        data = {"hyper": TINY_HYPER, "schemes": ["no-ris-zf", "drl@1"], "distance_grid": [2.0, 8.0],
                "num_channel_draws": 2, "trace_powers": [5.0], **extra}
        p = tmp_path / "c.yaml"
        p.write_text(yaml.safe_dump(data))
        return p

    def test_sweep_is_byte_deterministic(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        for out in ("r1", "r2"):
            assert cli.main(["sweep", "--config", str(cfg), "--seed", "3",
                             "--out", str(tmp_path / out)]) == 0
        for name in ("sweep.csv", "summary.csv"):
            assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()
        assert "drl@1" in capsys.readouterr().out

    def test_scheme_flag(self, tmp_path):
        cfg = self.write_config(tmp_path)
        cli.main(["sweep", "--config", str(cfg), "--scheme", "random-phase@1",
                  "--out", str(tmp_path)])
        rows = harness.read_sweep_csv(tmp_path / "sweep.csv")
        assert {r.scheme for r in rows} == {"random-phase@1"}

    def test_trace(self, tmp_path):
        cfg = self.write_config(tmp_path)
        assert cli.main(["trace", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        lines = [ln for ln in (tmp_path / "trace.csv").read_text().splitlines()
                 if not ln.startswith("#")]
        assert lines[0] == ",".join(harness.TRACE_HEADER) and len(lines) == 1 + 5

    def test_coverage(self, tmp_path):
        cfg = self.write_config(tmp_path)
        cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path)])
        assert cli.main(["coverage", str(tmp_path / "sweep.csv"), "--threshold", "1",
                         "--out", str(tmp_path)]) == 0
        result = json.loads((tmp_path / "coverage.json").read_text())
        assert result["threshold_bps"] == 1.0
        assert set(result["schemes"]) == {"no-ris-zf", "drl@1"}

    def test_grad_check(self, tmp_path):
        assert cli.main(["grad-check", "--nets", "5", "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "grad_check.json").read_text())
        assert report["passed"] and len(report["nets"]) == 5

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path, bogus=1)
        assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 2
        assert "bogus" in capsys.readouterr().err
