"""Tests for OFDM modulation, cyclic prefix handling, and grid bookkeeping."""

import numpy as np
import pytest

from cvnnlink.numerics import Rng, sample_cgauss
from cvnnlink.ofdm import build_frame, ofdm_demodulate, ofdm_modulate
from cvnnlink.stc import qostbc_encode


def _random_blocks(nfft, ntp, ntx, seed):
    rng = Rng(seed, "ofdm-test")
    return [sample_cgauss(rng, ntp * ntx, 1.0).reshape(ntp, ntx) for _ in range(nfft)]


class TestBuildFrame:
    def test_smallest_alamouti_instance(self):
        b0 = qostbc_encode(np.array([1 + 1j, 2 - 1j])).S
        b1 = qostbc_encode(np.array([-1j, 0.5])).S
        grid = build_frame([b0, b1], ncp=0)
        assert grid.freq.shape == (2, 2, 2)
        for t in range(2):
            for a in range(2):
                assert grid.freq[t, 0, a] == b0[t, a]
                assert grid.freq[t, 1, a] == b1[t, a]

    def test_zero_blocks(self):
        grid = build_frame([np.zeros((4, 4))] * 8, ncp=2)
        assert not grid.freq.any()

    def test_extraction_recovers_blocks(self):
        blocks = _random_blocks(16, 4, 4, seed=0)
        grid = build_frame(blocks, ncp=2)
        for k, block in enumerate(blocks):
            assert np.array_equal(grid.freq[:, k, :], block)

    def test_dimension_mismatch_rejected(self):
        blocks = [np.zeros((2, 2)), np.zeros((2, 3))]
        with pytest.raises(ValueError, match="shape"):
            build_frame(blocks, ncp=0)

    def test_bad_cp_rejected(self):
        with pytest.raises(ValueError, match="ncp"):
            build_frame([np.zeros((2, 2))] * 4, ncp=4)


class TestModulate:
    def test_impulse_on_subcarrier_zero(self):
        """DC-only spectrum gives a constant time signal preceded by its tail."""
        nfft, ncp = 8, 2
        freq = np.zeros((1, nfft, 1), dtype=complex)
        freq[0, 0, 0] = 1.0
        grid = build_frame([freq[:, k, :] for k in range(nfft)], ncp)
        t = ofdm_modulate(grid)
        assert t.shape == (nfft + ncp, 1)
        assert np.allclose(t, 1 / np.sqrt(nfft), atol=1e-15)

    def test_parseval_with_cp(self):
        """Exactly: time power = freq power + energy of the copied tails.
        On average the prefix replicates ncp/nfft of each symbol's energy."""
        nfft, ncp, ntp, ntx = 32, 8, 40, 2
        blocks = _random_blocks(nfft, ntp, ntx, seed=1)
        grid = build_frame(blocks, ncp)
        t = ofdm_modulate(grid)
        p_time = np.sum(np.abs(t) ** 2)
        p_freq = np.sum(np.abs(grid.freq) ** 2)
        body = t.reshape(ntp, nfft + ncp, ntx)[:, ncp:, :]
        p_tails = np.sum(np.abs(body[:, -ncp:, :]) ** 2)
        assert p_time == pytest.approx(p_freq + p_tails, rel=1e-12)
        # expectation version of the same statement, Monte-Carlo slack
        assert p_time == pytest.approx(p_freq * (nfft + ncp) / nfft, rel=2e-2)

    def test_roundtrip(self):
        nfft, ncp, ntp, ntx = 64, 16, 4, 4
        blocks = _random_blocks(nfft, ntp, ntx, seed=2)
        grid = build_frame(blocks, ncp)
        rx = ofdm_demodulate(ofdm_modulate(grid), nfft, ncp, ntp)
        assert np.max(np.abs(rx - grid.freq)) < 1e-10


class TestDemodulate:
    def test_wrong_sample_count_rejected(self):
        with pytest.raises(ValueError, match="sample count"):
            ofdm_demodulate(np.zeros((100, 2), dtype=complex), nfft=16, ncp=4, ntp=6)

    def test_single_tap_scales_flat(self):
        nfft, ncp, ntp = 16, 4, 2
        blocks = _random_blocks(nfft, ntp, 1, seed=3)
        grid = build_frame(blocks, ncp)
        h0 = 0.7 - 1.1j
        rx = ofdm_demodulate(h0 * ofdm_modulate(grid), nfft, ncp, ntp)
        assert np.max(np.abs(rx - h0 * grid.freq)) < 1e-10

    def test_two_tap_channel_matches_analytic_dft(self):
        """Received subcarrier k is scaled by H(k) = h0 + h1 exp(-2j pi k / nfft)."""
        nfft, ncp, ntp = 32, 4, 3
        blocks = _random_blocks(nfft, ntp, 1, seed=4)
        grid = build_frame(blocks, ncp)
        t = ofdm_modulate(grid)[:, 0]
        h0, h1 = 0.9 + 0.2j, -0.3 + 0.4j
        y = h0 * t
        y[1:] += h1 * t[:-1]  # first sample's predecessor is zero: inside the CP
        rx = ofdm_demodulate(y[:, None], nfft, ncp, ntp)
        h = h0 + h1 * np.exp(-2j * np.pi * np.arange(nfft) / nfft)
        assert np.max(np.abs(rx - grid.freq * h[None, :, None])) < 1e-9

    def test_multiplicative_for_any_short_static_channel(self):
        """Any static channel with delay spread < ncp acts multiplicatively
        per subcarrier on every symbol and antenna."""
        nfft, ncp, ntp, ntx = 64, 16, 3, 2
        rng = Rng(5, "ofdm-test")
        taps = sample_cgauss(rng, ncp * ntx, 1.0).reshape(ncp, ntx)  # per-antenna SISO taps
        blocks = _random_blocks(nfft, ntp, ntx, seed=6)
        grid = build_frame(blocks, ncp)
        t = ofdm_modulate(grid)
        y = np.zeros_like(t)
        for a in range(ntx):
            y[:, a] = np.convolve(t[:, a], taps[:, a])[: t.shape[0]]
        rx = ofdm_demodulate(y, nfft, ncp, ntp)
        h = np.fft.fft(taps, n=nfft, axis=0)  # analytic per-subcarrier response
        expected = grid.freq * h[None, :, :]
        assert np.max(np.abs(rx - expected)) < 1e-9
