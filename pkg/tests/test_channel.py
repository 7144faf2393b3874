"""Tests for the TDL profile loader, Doppler evolution, and MIMO convolution."""

import numpy as np
import pytest
from scipy.special import j0

from cvnnlink.channel import (ProfileError, TdlProfile, add_noise, builtin_profile,
                              discretize_profile, init_channel, load_profile)
from cvnnlink.numerics import Rng, sample_cgauss

FULL_RATE_TS = 1.0 / (256 * 60e3)  # 15.36 MHz


def _single_tap_profile(fd=30.0):
    return TdlProfile(delays_ns=np.array([0.0]), powers_db=np.array([0.0]), doppler_hz=fd)


class TestProfile:
    def test_builtin_tdla30_matches_published_ranges(self):
        p = builtin_profile("tdla30-5")
        assert len(p.delays_ns) == 12
        assert p.delays_ns.min() == 0.0
        assert p.delays_ns.max() == 290.0
        assert p.powers_db.max() == 0.0
        assert p.powers_db.min() == -26.2
        assert p.doppler_hz == 5.0
        assert p.powers_linear.sum() == pytest.approx(1.0, rel=1e-12)

    def test_derived_desk_profile_matches_full_rate_discretization(self):
        full = discretize_profile(builtin_profile("tdla30-5"), FULL_RATE_TS)
        desk = discretize_profile(builtin_profile("tdla120-5"), 1.0 / (64 * 60e3))
        assert np.allclose(full, desk, atol=1e-12)

    def test_unknown_builtin_rejected(self):
        with pytest.raises(ProfileError, match="unknown"):
            builtin_profile("nonexistent")

    def test_malformed_row_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("doppler_hz 5\n0.0 -3.0\n10.0 oops\n")
        with pytest.raises(ProfileError, match=r"bad\.txt:3"):
            load_profile(path)

    def test_missing_doppler_rejected(self, tmp_path):
        path = tmp_path / "nodop.txt"
        path.write_text("0.0 0.0\n")
        with pytest.raises(ProfileError, match="doppler_hz"):
            load_profile(path)

    def test_wrong_field_count_reports_line(self, tmp_path):
        path = tmp_path / "fields.txt"
        path.write_text("doppler_hz 5\n0.0 -3.0 extra\n")
        with pytest.raises(ProfileError, match=r"fields\.txt:2"):
            load_profile(path)


class TestDiscretize:
    def test_single_tap(self):
        p = TdlProfile(np.array([0.0]), np.array([0.0]), 5.0)
        assert np.array_equal(discretize_profile(p, 1e-7), [1.0])

    def test_tdla30_span_at_full_rate(self):
        """Delays up to 290 ns at 15.36 MHz land on sample index round(290/65.1) = 4."""
        powers = discretize_profile(builtin_profile("tdla30-5"), FULL_RATE_TS)
        assert len(powers) == 5
        assert powers.sum() == pytest.approx(1.0, rel=1e-12)

    def test_colliding_taps_merge_powers(self):
        p = TdlProfile(np.array([0.0, 1.0]), np.array([-3.0, -3.0]), 0.0)
        out = discretize_profile(p, 1e-6)  # both taps round to index 0
        assert np.array_equal(out, [1.0])
        p2 = TdlProfile(np.array([0.0, 1000.0]), np.array([0.0, 0.0]), 0.0)
        out2 = discretize_profile(p2, 1e-6)
        assert np.allclose(out2, [0.5, 0.5])

    def test_bad_sample_period_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            discretize_profile(_single_tap_profile(), 0.0)


class TestInitAndEvolve:
    def test_zero_doppler_freezes_taps(self):
        state = init_channel(_single_tap_profile(fd=0.0), 2, 2, FULL_RATE_TS, Rng(0, "channel"))
        before = state.taps.copy()
        state.evolve(1.0)
        assert np.array_equal(state.taps, before)

    def test_identical_seeds_identical_states(self):
        a = init_channel(_single_tap_profile(), 2, 3, FULL_RATE_TS, Rng(5, "channel"))
        b = init_channel(_single_tap_profile(), 2, 3, FULL_RATE_TS, Rng(5, "channel"))
        assert np.array_equal(a.taps, b.taps)
        a.evolve(0.01)
        b.evolve(0.01)
        assert np.array_equal(a.taps, b.taps)

    def test_evolve_zero_dt_is_identity(self):
        state = init_channel(_single_tap_profile(), 2, 2, FULL_RATE_TS, Rng(1, "channel"))
        before = state.taps.copy()
        state.evolve(0.0)
        assert np.array_equal(state.taps, before)

    def test_negative_dt_rejected(self):
        state = init_channel(_single_tap_profile(), 1, 1, FULL_RATE_TS, Rng(2, "channel"))
        with pytest.raises(ValueError, match="dt"):
            state.evolve(-1e-3)

    def test_per_tap_power_matches_profile(self):
        """Ensemble tap power within +-0.5 dB of the discretized profile."""
        profile = builtin_profile("tdla30-5")
        expected = discretize_profile(profile, FULL_RATE_TS)
        powers = np.zeros_like(expected)
        n_draws = 0
        for seed in range(2):
            state = init_channel(profile, 100, 100, FULL_RATE_TS, Rng(seed, "channel"))
            powers += np.sum(np.abs(state.taps) ** 2, axis=(1, 2))
            n_draws += 100 * 100
        powers /= n_draws
        filled = expected > 0
        assert np.all(powers[~filled] == 0.0), "empty sample indices must carry no power"
        err_db = 10 * np.log10(powers[filled] / expected[filled])
        assert np.max(np.abs(err_db)) < 0.5, f"tap power error {err_db} dB"

    def test_rayleigh_amplitude_distribution(self):
        """64 sinusoids per process give near-Gaussian quadratures: amplitude
        second/fourth moments match Rayleigh within Monte-Carlo slack."""
        state = init_channel(_single_tap_profile(), 100, 100, FULL_RATE_TS, Rng(3, "channel"))
        amp2 = np.abs(state.taps.reshape(-1)) ** 2
        assert np.mean(amp2) == pytest.approx(1.0, abs=0.05)
        # E[r^4] = 2 E[r^2]^2 for Rayleigh
        assert np.mean(amp2 ** 2) == pytest.approx(2.0, abs=0.15)

    def test_autocorrelation_follows_bessel(self):
        """Temporal autocorrelation tracks J0(2 pi fD tau) within +-0.05."""
        fd = 30.0
        state = init_channel(_single_tap_profile(fd), 100, 100, FULL_RATE_TS, Rng(4, "channel"))
        h0 = state.taps.copy()
        for fd_tau in (0.1, 0.2, 0.3, 0.4, 0.5):
            state_t = init_channel(_single_tap_profile(fd), 100, 100, FULL_RATE_TS, Rng(4, "channel"))
            state_t.evolve(fd_tau / fd)
            corr = np.mean(state_t.taps * np.conj(h0)).real
            assert abs(corr - j0(2 * np.pi * fd_tau)) < 0.05, (
                f"autocorrelation {corr:.3f} vs J0 {j0(2 * np.pi * fd_tau):.3f} at fD*tau={fd_tau}")

    def test_power_stationary_after_evolution(self):
        state = init_channel(_single_tap_profile(fd=50.0), 100, 100, FULL_RATE_TS, Rng(6, "channel"))
        state.evolve(1.0)
        power = np.mean(np.abs(state.taps) ** 2)
        assert power == pytest.approx(1.0, abs=0.05)


class TestApply:
    def test_identity_channel(self):
        state = init_channel(_single_tap_profile(fd=0.0), 2, 2, FULL_RATE_TS, Rng(7, "channel"))
        state.taps = np.eye(2, dtype=complex)[None, :, :]
        x = sample_cgauss(Rng(8, "channel"), 20, 1.0).reshape(10, 2)
        assert np.array_equal(state.apply(x), x)

    def test_impulse_response(self):
        profile = TdlProfile(np.array([0.0, FULL_RATE_TS * 1e9]), np.array([0.0, 0.0]), 0.0)
        state = init_channel(profile, 1, 1, FULL_RATE_TS, Rng(9, "channel"))
        h0, h1 = state.taps[0, 0, 0], state.taps[1, 0, 0]
        x = np.zeros((5, 1), dtype=complex)
        x[0, 0] = 1.0
        y = state.apply(x)[:, 0]
        assert np.allclose(y, [h0, h1, 0, 0, 0], atol=1e-15)

    def test_matches_bruteforce_convolution(self):
        """2x2, three taps: per-link scipy-style convolution summed over tx."""
        profile = TdlProfile(np.array([0.0, 65.1, 130.2]), np.array([0.0, -3.0, -6.0]), 0.0)
        state = init_channel(profile, 2, 2, FULL_RATE_TS, Rng(10, "channel"))
        taps = state.taps.copy()
        x = sample_cgauss(Rng(11, "channel"), 40, 1.0).reshape(20, 2)
        y = state.apply(x)
        expected = np.zeros_like(y)
        for rx in range(2):
            for tx in range(2):
                conv = np.convolve(x[:, tx], taps[:, rx, tx])[:20]
                expected[:, rx] += conv
        assert np.max(np.abs(y - expected)) < 1e-12

    def test_chunked_equals_oneshot(self):
        profile = TdlProfile(np.array([0.0, 65.1, 130.2, 260.4]),
                             np.array([0.0, -2.0, -5.0, -9.0]), 0.0)
        x = sample_cgauss(Rng(12, "channel"), 90, 1.0).reshape(30, 3)
        one = init_channel(profile, 2, 3, FULL_RATE_TS, Rng(13, "channel"))
        chunked = init_channel(profile, 2, 3, FULL_RATE_TS, Rng(13, "channel"))
        y_one = one.apply(x)
        pieces = [chunked.apply(x[:7]), chunked.apply(x[7:11]), chunked.apply(x[11:])]
        y_chunks = np.concatenate(pieces, axis=0)
        assert np.max(np.abs(y_one - y_chunks)) < 1e-12

    def test_antenna_mismatch_rejected(self):
        state = init_channel(_single_tap_profile(), 2, 3, FULL_RATE_TS, Rng(14, "channel"))
        with pytest.raises(ValueError, match="shape"):
            state.apply(np.zeros((10, 2), dtype=complex))


class TestAddNoise:
    def test_zero_variance_identity(self):
        y = sample_cgauss(Rng(15, "channel"), 10, 1.0).reshape(5, 2)
        assert add_noise(y, 0.0, Rng(16, "noise")) is y

    def test_measured_power(self):
        y = np.zeros((500000, 2), dtype=complex)
        noisy = add_noise(y, 0.3, Rng(17, "noise"))
        power = np.mean(np.abs(noisy) ** 2)
        assert abs(power - 0.3) / 0.3 < 0.01

    def test_noise_stream_isolated_from_channel_stream(self):
        """Different noise labels leave the channel realization untouched."""
        a = init_channel(_single_tap_profile(), 2, 2, FULL_RATE_TS, Rng(18, "channel"))
        b = init_channel(_single_tap_profile(), 2, 2, FULL_RATE_TS, Rng(18, "channel"))
        x = sample_cgauss(Rng(19, "channel"), 12, 1.0).reshape(6, 2)
        ya, yb = a.apply(x), b.apply(x)
        assert np.array_equal(ya, yb)
        na = add_noise(ya, 0.1, Rng(20, "noise"))
        nb = add_noise(yb, 0.1, Rng(21, "noise"))
        assert not np.array_equal(na, nb)
