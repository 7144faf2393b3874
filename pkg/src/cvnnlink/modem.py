"""Square M-QAM with per-axis Gray labels, hard demapping, and Eb/N0 conversion.

Constellations are normalized to unit average symbol energy.  The first
half of each bit group selects the real-axis amplitude, the second half
the imaginary axis; each axis uses a reflected Gray code so that nearest
horizontal/vertical neighbours differ in exactly one bit.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

__all__ = ["Constellation", "constellation", "qam_map", "qam_demap", "noise_variance"]


@dataclass(frozen=True)
class Constellation:
    """Unit-power square QAM constellation, points indexed by integer bit label."""

    M: int
    points: np.ndarray  # complex point for label 0..M-1
    bits_per_symbol: int


def _gray_decode(g: np.ndarray) -> np.ndarray:
    """Invert the reflected Gray code g = i ^ (i >> 1)."""
    i = g.copy()
    shift = 1
    while (i >> shift).any():
        i = i ^ (g >> shift)
        shift += 1
    return i


@functools.lru_cache(maxsize=None)
def constellation(M: int) -> Constellation:
    """Build (and cache) the unit-power Gray constellation of order M.

    M must be a power of four (4, 16, 64, ...) so the constellation is
    square with an even number of bits per symbol.
    """
    if M < 4 or (M & (M - 1)) != 0 or (M.bit_length() - 1) % 2 != 0:
        raise ValueError(f"modulation order must be a power of 4, got {M}")
    m = M.bit_length() - 1
    half = m // 2
    levels = 1 << half
    labels = np.arange(M)
    re_bits = labels >> half
    im_bits = labels & (levels - 1)
    # Gray label -> level index -> odd amplitude 2*idx - (levels-1)
    re_amp = 2 * _gray_decode(re_bits) - (levels - 1)
    im_amp = 2 * _gray_decode(im_bits) - (levels - 1)
    scale = np.sqrt(2.0 * (levels ** 2 - 1) / 3.0)  # mean |s|^2 of the raw lattice
    points = (re_amp + 1j * im_amp) / scale
    return Constellation(M=M, points=points, bits_per_symbol=m)


def qam_map(bits: np.ndarray, M: int) -> np.ndarray:
    """Map a flat bit vector to unit-power Gray-labelled QAM symbols.

    The bit count must be divisible by log2(M); each group of log2(M)
    bits is read MSB-first as the integer point label.
    """
    const = constellation(M)
    bits = np.asarray(bits)
    if bits.size % const.bits_per_symbol != 0:
        raise ValueError(
            f"bit count {bits.size} is not divisible by log2(M)={const.bits_per_symbol}"
        )
    groups = bits.astype(np.int64).reshape(-1, const.bits_per_symbol)
    weights = 1 << np.arange(const.bits_per_symbol - 1, -1, -1)
    labels = groups @ weights
    return const.points[labels]


def qam_demap(symbols: np.ndarray, M: int) -> np.ndarray:
    """Hard minimum-distance decision back to bits.

    Ties break toward the smaller integer bit label (argmin returns the
    first minimum and points are stored in label order).
    """
    const = constellation(M)
    symbols = np.asarray(symbols).reshape(-1)
    d2 = np.abs(symbols[:, None] - const.points[None, :]) ** 2
    labels = np.argmin(d2, axis=1)
    shifts = np.arange(const.bits_per_symbol - 1, -1, -1)
    bits = (labels[:, None] >> shifts[None, :]) & 1
    return bits.reshape(-1).astype(np.uint8)


def noise_variance(ebn0_db: float, M: int) -> float:
    """Complex noise variance for a target Eb/N0 in dB.

    Convention: unit average received symbol energy per receive antenna
    (guaranteed by the channel/transmit normalization) and a unitary FFT,
    so sigma_w^2 = 1 / (log2(M) * 10^(ebn0_db/10)).  Pilot and cyclic
    prefix overheads are not charged to Eb.
    """
    if M < 4:
        raise ValueError(f"modulation order must be >= 4, got {M}")
    bits = np.log2(M)
    return float(1.0 / (bits * 10.0 ** (ebn0_db / 10.0)))
