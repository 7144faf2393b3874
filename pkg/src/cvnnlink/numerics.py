"""Deterministic complex arithmetic kernels shared by every other module.

Provides the unitary FFT wrapper, seedable labelled random streams, and
circularly-symmetric complex Gaussian sampling.  All randomness in the
package flows through :class:`Rng` so that a (seed, stream label) pair
pins down every simulation bit-exactly.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["Rng", "fft", "sample_cgauss"]


def _label_words(label: str) -> tuple[int, int]:
    """Stable 64-bit hash of a stream label, split into two 32-bit words."""
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    value = int.from_bytes(digest[:8], "little")
    return value & 0xFFFFFFFF, value >> 32


class Rng:
    """Deterministic random stream addressed by (seed, stream_label).

    Streams with distinct labels under one seed are statistically
    independent (the label is hashed into the PCG64 seed sequence), and
    the same (seed, label) pair always reproduces the same sequence.
    A stream is never shared between concurrent tasks; each task derives
    its own label.
    """

    def __init__(self, seed: int, stream_label: str):
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self.stream_label = str(stream_label)
        ss = np.random.SeedSequence(self.seed, spawn_key=_label_words(self.stream_label))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, stream_label={self.stream_label!r})"

    def uniform(self, n: int) -> np.ndarray:
        """n i.i.d. uniforms on [0, 1)."""
        return self._gen.random(n)

    def bits(self, n: int) -> np.ndarray:
        """n i.i.d. uniform bits as uint8."""
        return self._gen.integers(0, 2, size=n, dtype=np.uint8)

    def integers(self, low: int, high: int, n: int) -> np.ndarray:
        """n i.i.d. uniform integers in [low, high)."""
        return self._gen.integers(low, high, size=n)


def fft(x: np.ndarray, direction: str = "forward", axis: int = -1) -> np.ndarray:
    """Unitary FFT (1/sqrt(N) scaling both ways) along `axis`.

    The transform length must be a power of two, at least 2.  Unitary
    normalization makes ``inverse(forward(x)) == x`` and preserves the
    l2 norm, so frequency-domain noise variance equals the time-domain
    variance.
    """
    x = np.asarray(x)
    n = x.shape[axis]
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError(f"FFT length must be a power of two >= 2, got {n}")
    if direction == "forward":
        return np.fft.fft(x, axis=axis, norm="ortho")
    if direction == "inverse":
        return np.fft.ifft(x, axis=axis, norm="ortho")
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def sample_cgauss(rng: Rng, n: int, variance: float) -> np.ndarray:
    """n i.i.d. circularly-symmetric complex Gaussian samples, E|z|^2 = variance.

    Polar Box-Muller on the open unit interval: the radius comes from
    ``sqrt(-variance * log(u1))`` with u1 in (0, 1], the phase is uniform,
    so real and imaginary parts each carry variance/2.
    """
    if variance < 0:
        raise ValueError(f"variance must be non-negative, got {variance}")
    if variance == 0.0:
        return np.zeros(n, dtype=np.complex128)
    u1 = 1.0 - rng.uniform(n)  # (0, 1]: keeps log() finite
    u2 = rng.uniform(n)
    radius = np.sqrt(-variance * np.log(u1))
    return radius * np.exp(2j * np.pi * u2)
