"""Tests for Gray QAM mapping, hard demapping, and Eb/N0 conversion."""

import numpy as np
import pytest

from cvnnlink.modem import constellation, noise_variance, qam_demap, qam_map
from cvnnlink.numerics import Rng, sample_cgauss


def _q(x):
    """Gaussian tail probability, the test-side oracle for QAM error rates."""
    from scipy.special import erfc
    return 0.5 * erfc(x / np.sqrt(2.0))


class TestConstellation:
    def test_qpsk_points(self):
        c = constellation(4)
        expected = {(1 + 1j), (1 - 1j), (-1 + 1j), (-1 - 1j)}
        got = {complex(np.round(p * np.sqrt(2), 9)) for p in c.points}
        assert got == expected

    @pytest.mark.parametrize("m", [4, 16, 64])
    def test_unit_average_power(self, m):
        c = constellation(m)
        power = np.mean(np.abs(c.points) ** 2)
        assert abs(power - 1.0) < 1e-12

    def test_16qam_is_scaled_lattice(self):
        c = constellation(16)
        lattice = np.sort(np.unique(np.round(c.points.real * np.sqrt(10), 9)))
        assert np.array_equal(lattice, [-3, -1, 1, 3])

    @pytest.mark.parametrize("m", [4, 16, 64])
    def test_gray_property(self, m):
        """Nearest horizontal/vertical neighbours differ in exactly one bit."""
        c = constellation(m)
        levels = int(np.sqrt(m))
        step = 2.0 / np.sqrt(2.0 * (levels ** 2 - 1) / 3.0)
        for label, p in enumerate(c.points):
            for neighbour in (p + step, p + 1j * step):
                d = np.abs(c.points - neighbour)
                if d.min() > 1e-9:
                    continue  # outside the lattice
                other = int(np.argmin(d))
                assert bin(label ^ other).count("1") == 1, (
                    f"labels {label} and {other} differ in more than one bit")

    @pytest.mark.parametrize("m", [2, 8, 32, 12, 3])
    def test_non_square_orders_rejected(self, m):
        with pytest.raises(ValueError, match="power of 4"):
            constellation(m)


class TestMapDemap:
    def test_roundtrip_all_16bit_strings_at_16qam(self):
        words = np.arange(2 ** 16, dtype=np.int64)
        bits = ((words[:, None] >> np.arange(15, -1, -1)[None, :]) & 1).reshape(-1)
        symbols = qam_map(bits, 16)
        back = qam_demap(symbols, 16)
        assert np.array_equal(back, bits.astype(np.uint8))

    @pytest.mark.parametrize("m", [4, 16, 64])
    def test_exact_points_demap_to_own_labels(self, m):
        c = constellation(m)
        back = qam_demap(c.points, m)
        k = c.bits_per_symbol
        labels = back.reshape(-1, k) @ (1 << np.arange(k - 1, -1, -1))
        assert np.array_equal(labels, np.arange(m))

    def test_origin_tie_breaks_to_smallest_label(self):
        c = constellation(16)
        inner = np.abs(c.points)
        candidates = np.flatnonzero(np.isclose(inner, inner.min()))
        expected_label = int(candidates.min())
        bits = qam_demap(np.array([0.0 + 0.0j]), 16)
        label = int(bits @ (1 << np.arange(3, -1, -1)))
        assert label == expected_label

    def test_ragged_bit_count_rejected(self):
        with pytest.raises(ValueError, match="divisible"):
            qam_map(np.zeros(5, dtype=np.uint8), 16)

    @pytest.mark.parametrize("ebn0_db", [6.0, 8.0, 10.0])
    def test_ber_matches_gray_qam_approximation(self, ebn0_db):
        """Hard-decision BER against the closed-form Gray 16-QAM benchmark.

        Oracle: P_b ~ (4/k)(1 - 1/sqrt(M)) Q(sqrt(3 k / (M-1) * Eb/N0))
        with k = log2(M); nearest-neighbour approximation, good to well
        within the factor-1.5 budget at these operating points.
        """
        m, k = 16, 4
        n_syms = 10 ** 6
        rng = Rng(int(ebn0_db * 10), "modem-ber")
        bits = Rng(int(ebn0_db * 10), "modem-bits").bits(n_syms * k)
        tx = qam_map(bits, m)
        sigma2 = noise_variance(ebn0_db, m)
        rx = tx + sample_cgauss(rng, n_syms, sigma2)
        errors = np.sum(qam_demap(rx, m) != bits)
        ber = errors / bits.size
        gamma_b = 10 ** (ebn0_db / 10)
        ber_theory = (4 / k) * (1 - 1 / np.sqrt(m)) * _q(np.sqrt(3 * k / (m - 1) * gamma_b))
        assert ber_theory / 1.5 < ber < ber_theory * 1.5, (
            f"BER {ber:.3e} vs theory {ber_theory:.3e} at {ebn0_db} dB")

    def test_ber_negligible_at_20db(self):
        """At 20 dB the closed-form BER is ~1e-19: a million symbols must
        decode without a single bit error."""
        m, k = 16, 4
        n_syms = 10 ** 6
        bits = Rng(5, "modem-bits").bits(n_syms * k)
        tx = qam_map(bits, m)
        rx = tx + sample_cgauss(Rng(5, "modem-ber"), n_syms, noise_variance(20.0, m))
        assert np.sum(qam_demap(rx, m) != bits) == 0


class TestNoiseVariance:
    def test_zero_db_qpsk(self):
        assert noise_variance(0.0, 4) == pytest.approx(0.5, abs=1e-15)

    def test_20db_16qam(self):
        assert noise_variance(20.0, 16) == pytest.approx(0.0025, rel=1e-12)

    def test_strictly_decreasing_and_vanishing(self):
        grid = np.arange(-10, 61, 1.0)
        values = [noise_variance(e, 16) for e in grid]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-6

    def test_small_order_rejected(self):
        with pytest.raises(ValueError, match="order"):
            noise_variance(10.0, 2)
