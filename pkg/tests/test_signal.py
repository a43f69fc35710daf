import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_channel, random_complex
from ris_hopforge.channel import ChannelRealization
from ris_hopforge.errors import DegenerateInputError, DimensionMismatchError, InvalidArgumentError
from ris_hopforge.signal import (
    NoiseParams,
    PhaseConfig,
    Precoder,
    effective_channel,
    effective_channels,
    normalize_power,
    project_unit_modulus,
    sinr,
    sinrs,
    sum_rate,
)


def oracle_effective(chan, phases, k):
    """Explicit nested summation over every RIS element path, in plain Python."""
    M, I = chan.num_bs_antennas, chan.num_hops
    out = [complex(chan.w[k][m]) for m in range(M)]
    if I == 0:
        return out
    # paths[n] = coefficient from the BS antenna vector to element n of the current RIS
    coeff = [[complex(chan.H[0][n, m]) for m in range(M)] for n in range(chan.H[0].shape[0])]
    for i in range(1, I):
        H = chan.H[i]
        nxt = []
        for a in range(H.shape[0]):
            row = [0j] * M
            for b in range(H.shape[1]):
                t = cmath.exp(1j * phases[i - 1][b]) * complex(H[a, b])
                for m in range(M):
                    row[m] += t * coeff[b][m]
            nxt.append(row)
        coeff = nxt
    for n in range(len(coeff)):
        t = complex(chan.g[k][n]) * cmath.exp(1j * phases[I - 1][n])
        for m in range(M):
            out[m] += t * coeff[n][m]
    return out


def oracle_sinr(h, F, sigma2, k):
    K = len(F[0])
    terms = [abs(sum(h[m] * F[m][j] for m in range(len(h)))) ** 2 for j in range(K)]
    return terms[k] / (sum(terms[j] for j in range(K) if j != k) + sigma2)


class TestEffectiveChannel:
    def test_zero_phase_single_hop(self, rng):
        chan = random_channel(rng, 3, 2, (4,))
        h = effective_channel(chan, PhaseConfig.zeros((4,)), 1)
        np.testing.assert_array_equal(h, chan.g[1] @ chan.H[0] + chan.w[1])

    def test_dead_reflection(self, rng):
        chan = random_channel(rng, 3, 2, (4, 2))
        chan = ChannelRealization(chan.H, (np.zeros(2), chan.g[1]), chan.w)
        phi = PhaseConfig.random((4, 2), rng)
        np.testing.assert_array_equal(effective_channel(chan, phi, 0), chan.w[0])

    def test_no_ris(self, rng):
        chan = random_channel(rng, 3, 2)
        np.testing.assert_array_equal(effective_channel(chan, PhaseConfig(()), 0), chan.w[0])

    def test_two_hop_triple_sum(self, rng):
        chan = random_channel(rng, 2, 1, (2, 2))
        phi = PhaseConfig.random((2, 2), rng)
        t1, t2 = phi.thetas
        g, H1, H2, w = chan.g[0], chan.H[0], chan.H[1], chan.w[0]
        expected = w.copy()
        for a in range(2):
            for b in range(2):
                expected = expected + g[a] * t2[a] * H2[a, b] * t1[b] * H1[b, :]
        np.testing.assert_allclose(effective_channel(chan, phi, 0), expected, rtol=1e-12, atol=0)

    def test_rows_match_stacked(self, rng):
        chan = random_channel(rng, 3, 3, (2, 3, 2))
        phi = PhaseConfig.random((2, 3, 2), rng)
        stacked = effective_channels(chan, phi)
        for k in range(3):
            np.testing.assert_allclose(stacked[k], effective_channel(chan, phi, k), rtol=1e-13)

    def test_dimension_errors(self, rng):
        chan = random_channel(rng, 3, 2, (4,))
        with pytest.raises(DimensionMismatchError):
            effective_channel(chan, PhaseConfig.zeros((5,)), 0)
        with pytest.raises(DimensionMismatchError):
            effective_channel(chan, PhaseConfig.zeros((4,)), 2)


class TestSinr:
    def test_single_user(self):
        chan = ChannelRealization((), (), (np.array([1.0, 0.0]),))
        prec = Precoder(np.array([[1.0], [0.0]]), 1.0)
        assert sinr(chan, PhaseConfig(()), prec, NoiseParams(1.0), 0) == 1.0

    def test_zero_precoder(self, rng):
        chan = random_channel(rng, 3, 2, (4,))
        prec = Precoder(np.zeros((3, 2)), 1.0)
        rho = sinrs(chan, PhaseConfig.zeros((4,)), prec, NoiseParams(0.5))
        np.testing.assert_array_equal(rho, 0.0)
        assert sum_rate(chan, PhaseConfig.zeros((4,)), prec, NoiseParams(0.5)) == 0.0

    def test_two_user_formula(self, rng):
        chan = random_channel(rng, 2, 2)
        F = normalize_power(random_complex(rng, 2, 2), 2.0)
        noise = NoiseParams(0.3)
        for k in range(2):
            h = chan.w[k]
            desired = abs(h @ F.F[:, k]) ** 2
            interf = abs(h @ F.F[:, 1 - k]) ** 2
            assert sinr(chan, PhaseConfig(()), F, noise, k) == pytest.approx(
                desired / (interf + 0.3), rel=1e-12)

    def test_common_phase_rotation_invariance(self, rng):
        chan = random_channel(rng, 3, 3, (2,))
        phi = PhaseConfig.random((2,), rng)
        F = normalize_power(random_complex(rng, 3, 3), 1.0)
        rotated = Precoder(F.F * np.exp(0.77j), 1.0)
        noise = NoiseParams(0.1)
        np.testing.assert_allclose(sinrs(chan, phi, rotated, noise), sinrs(chan, phi, F, noise),
                                   rtol=1e-12)

    def test_precoder_shape_checked(self, rng):
        chan = random_channel(rng, 3, 2)
        with pytest.raises(DimensionMismatchError):
            sinrs(chan, PhaseConfig(()), Precoder(np.ones((2, 2)), 10.0), NoiseParams(1.0))


class TestSumRate:
    def test_unit_sinr_four_users(self):
        # Orthogonal users, unit gain, unit noise -> every SINR is 1.
        chan = ChannelRealization((), (), tuple(np.eye(4)))
        prec = Precoder(np.eye(4), 4.0)
        assert sum_rate(chan, PhaseConfig(()), prec, NoiseParams(1.0)) == pytest.approx(4.0, rel=1e-15)

    def test_composes_sinrs(self, rng):
        chan = random_channel(rng, 3, 2, (3,))
        phi = PhaseConfig.random((3,), rng)
        F = normalize_power(random_complex(rng, 3, 2), 1.0)
        noise = NoiseParams(0.2)
        rho = [sinr(chan, phi, F, noise, k) for k in range(2)]
        assert sum_rate(chan, phi, F, noise) == pytest.approx(
            sum(math.log2(1 + r) for r in rho), rel=1e-12)

    @given(seed=st.integers(0, 2**32 - 1), scale=st.floats(0.0, 3.0))
    def test_nonnegative_and_zero_iff_silent(self, seed, scale):
        rng = np.random.default_rng(seed)
        chan = random_channel(rng, 2, 2, (2,))
        F = random_complex(rng, 2, 2) * scale
        prec = Precoder(F, max(float(np.real(np.vdot(F, F))), 1e-3))
        noise = NoiseParams(1.0)
        phi = PhaseConfig.random((2,), rng)
        c = sum_rate(chan, phi, prec, noise)
        assert c >= 0.0
        assert (c == 0.0) == bool(np.all(sinrs(chan, phi, prec, noise) == 0.0))


class TestOracleEquivalence:
    @given(seed=st.integers(0, 2**32 - 1), M=st.integers(1, 3), K=st.integers(1, 3),
           sizes=st.lists(st.integers(1, 4), max_size=3))
    def test_matches_summation_oracle(self, seed, M, K, sizes):
        rng = np.random.default_rng(seed)
        chan = random_channel(rng, M, K, tuple(sizes))
        phi = PhaseConfig.random(tuple(sizes), rng)
        F = normalize_power(random_complex(rng, M, K), 2.0)
        noise = NoiseParams(0.4)
        Fl = F.F.tolist()
        for k in range(K):
            h_or = oracle_effective(chan, phi.phases, k)
            np.testing.assert_allclose(effective_channel(chan, phi, k), h_or, rtol=1e-10,
                                       atol=1e-10 * np.max(np.abs(h_or)))
            assert sinr(chan, phi, F, noise, k) == pytest.approx(
                oracle_sinr(h_or, Fl, 0.4, k), rel=1e-10)


class TestNormalizePower:
    def test_halves_entries(self, rng):
        F = random_complex(rng, 3, 2)
        F *= 2.0 / np.linalg.norm(F)
        np.testing.assert_allclose(normalize_power(F, 1.0).F, F / 2, rtol=1e-15)

    def test_fixed_point(self, rng):
        F = random_complex(rng, 3, 2)
        P = float(np.real(np.vdot(F, F)))
        np.testing.assert_allclose(normalize_power(F, P).F, F, rtol=1e-12)

    def test_zero_raises(self):
        with pytest.raises(DegenerateInputError):
            normalize_power(np.zeros((2, 2)), 1.0)

    @given(seed=st.integers(0, 2**32 - 1), P=st.floats(1e-3, 1e3),
           mag=st.floats(1e-6, 1e6))
    def test_power_property(self, seed, P, mag):
        F = random_complex(np.random.default_rng(seed), 3, 2) * mag
        out = normalize_power(F, P)
        assert abs(out.power - P) <= 1e-9 * P


class TestPrecoderAndNoise:
    def test_budget_enforced(self):
        with pytest.raises(InvalidArgumentError):
            Precoder(np.ones((2, 2)), 3.0)
        Precoder(np.ones((2, 2)), 4.0)

    def test_noise_positive(self):
        with pytest.raises(InvalidArgumentError):
            NoiseParams(0.0)

    def test_phases_finite(self):
        with pytest.raises(InvalidArgumentError):
            PhaseConfig((np.array([0.0, math.nan]),))


class TestUnitModulus:
    def test_examples(self):
        phases = project_unit_modulus(np.array([3j, -5.0, 0.0]))
        assert phases[0] == pytest.approx(math.pi / 2, abs=1e-15)
        assert phases[1] == pytest.approx(math.pi, abs=1e-15)
        assert phases[2] == 0.0
        assert np.exp(1j * phases[0]) == pytest.approx(1j, abs=1e-15)

    def test_tiny_negative_angle_stays_in_range(self):
        phases = project_unit_modulus(np.array([1.0 - 1e-300j, -0.0 + 0j]))
        assert np.all((phases >= 0) & (phases < 2 * math.pi))

    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 64), mag=st.floats(1e-200, 1e200))
    def test_unit_modulus_property(self, seed, n, mag):
        raw = random_complex(np.random.default_rng(seed), n) * mag
        phases = project_unit_modulus(raw)
        assert np.all((phases >= 0) & (phases < 2 * math.pi))
        assert np.max(np.abs(np.abs(np.exp(1j * phases)) - 1)) <= 1e-12
