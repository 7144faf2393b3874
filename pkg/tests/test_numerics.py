"""Tests for the FFT wrapper, labelled random streams, and complex Gaussian sampling."""

import numpy as np
import pytest

from cvnnlink.numerics import Rng, fft, sample_cgauss


class TestRng:
    """Deterministic labelled streams."""

    def test_same_seed_label_reproduces(self):
        a = Rng(42, "channel").uniform(1000)
        b = Rng(42, "channel").uniform(1000)
        assert np.array_equal(a, b), "identical (seed, label) must be bit-identical"

    def test_distinct_labels_differ(self):
        a = Rng(42, "channel").uniform(1000)
        b = Rng(42, "noise").uniform(1000)
        assert not np.array_equal(a, b)
        # crude independence check: empirical correlation near zero
        corr = np.corrcoef(a, b)[0, 1]
        assert abs(corr) < 0.1

    def test_distinct_seeds_differ(self):
        assert not np.array_equal(Rng(1, "bits").uniform(100), Rng(2, "bits").uniform(100))

    def test_negative_seed_rejected(self):
        with pytest.raises(ValueError, match="seed"):
            Rng(-1, "bits")

    def test_bits_are_binary(self):
        bits = Rng(7, "bits").bits(10000)
        assert set(np.unique(bits)) <= {0, 1}
        assert 0.45 < bits.mean() < 0.55


class TestFft:
    """Unitary-normalization FFT contracts."""

    def test_impulse_gives_flat_spectrum(self):
        out = fft(np.array([1.0, 0, 0, 0], dtype=complex))
        assert np.allclose(out, 0.5 * np.ones(4), atol=1e-15)

    def test_roundtrip_identity(self):
        rng = Rng(0, "fft-test")
        x = sample_cgauss(rng, 256, 1.0)
        back = fft(fft(x, "forward"), "inverse")
        assert np.max(np.abs(back - x)) < 1e-10

    def test_parseval(self):
        rng = Rng(1, "fft-test")
        x = sample_cgauss(rng, 512, 2.0)
        nx = np.linalg.norm(x)
        nf = np.linalg.norm(fft(x))
        assert abs(nf - nx) / nx < 1e-12

    def test_linearity(self):
        rng = Rng(2, "fft-test")
        x = sample_cgauss(rng, 128, 1.0)
        y = sample_cgauss(rng, 128, 1.0)
        a, b = 1.7 - 0.3j, -0.4 + 2.1j
        lhs = fft(a * x + b * y)
        rhs = a * fft(x) + b * fft(y)
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    def test_circular_shift_phase_ramp_duality(self):
        rng = Rng(3, "fft-test")
        n, shift = 64, 5
        x = sample_cgauss(rng, n, 1.0)
        lhs = fft(np.roll(x, shift))
        rhs = fft(x) * np.exp(-2j * np.pi * shift * np.arange(n) / n)
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    @pytest.mark.parametrize("n", [1, 3, 6, 100])
    def test_non_power_of_two_rejected(self, n):
        with pytest.raises(ValueError, match="power of two"):
            fft(np.zeros(n, dtype=complex))

    def test_bad_direction_rejected(self):
        with pytest.raises(ValueError, match="direction"):
            fft(np.zeros(4, dtype=complex), "sideways")


class TestSampleCgauss:
    """Circularly-symmetric complex Gaussian sampling."""

    def test_zero_variance_gives_zeros(self):
        z = sample_cgauss(Rng(0, "noise"), 100, 0.0)
        assert np.array_equal(z, np.zeros(100, dtype=complex))

    def test_negative_variance_rejected(self):
        with pytest.raises(ValueError, match="variance"):
            sample_cgauss(Rng(0, "noise"), 10, -1.0)

    def test_moments_at_unit_variance(self):
        z = sample_cgauss(Rng(123, "noise"), 10 ** 6, 1.0)
        assert abs(z.mean()) < 0.005, "sample mean should vanish"
        power = np.mean(np.abs(z) ** 2)
        assert 0.995 <= power <= 1.005, f"sample power {power} should be ~1"
        # circular symmetry: real/imaginary parts each carry variance/2
        assert abs(np.var(z.real) - 0.5) < 0.005
        assert abs(np.var(z.imag) - 0.5) < 0.005

    def test_determinism(self):
        a = sample_cgauss(Rng(9, "noise"), 50, 2.5)
        b = sample_cgauss(Rng(9, "noise"), 50, 2.5)
        assert np.array_equal(a, b)
