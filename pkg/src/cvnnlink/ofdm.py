"""OFDM modulation with cyclic prefix and the codeword-to-grid bookkeeping.

A frame is Ntp consecutive OFDM symbols carrying one space-time codeword
per subcarrier: grid slot (t, k, a) holds row t, column a of the k-th
subcarrier's code matrix.  With a cyclic prefix longer than the channel
delay spread and a channel static within each symbol, the per-subcarrier
input/output relation is exactly multiplicative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numerics import fft

__all__ = ["OfdmGrid", "build_frame", "ofdm_modulate", "ofdm_demodulate"]


@dataclass(frozen=True)
class OfdmGrid:
    """Frequency-domain frame: freq[t, k, a] plus the cyclic-prefix length."""

    freq: np.ndarray  # (Ntp, Nfft, Ntx) complex
    ncp: int

    @property
    def ntp(self) -> int:
        return self.freq.shape[0]

    @property
    def nfft(self) -> int:
        return self.freq.shape[1]

    @property
    def ntx(self) -> int:
        return self.freq.shape[2]


def build_frame(code_matrices: Sequence[np.ndarray], ncp: int) -> OfdmGrid:
    """Assemble per-subcarrier code matrices (Ntp x Ntx each) into a grid.

    Requires exactly Nfft matrices of identical shape; extraction of
    grid[:, k, :] recovers matrix k bit-exactly.
    """
    if len(code_matrices) == 0:
        raise ValueError("need at least one code matrix")
    shape = np.shape(code_matrices[0])
    for k, s in enumerate(code_matrices):
        if np.shape(s) != shape:
            raise ValueError(f"code matrix {k} has shape {np.shape(s)}, expected {shape}")
    freq = np.stack(code_matrices, axis=1).astype(np.complex128)
    nfft = freq.shape[1]
    if not 0 <= ncp < nfft:
        raise ValueError(f"cyclic prefix must satisfy 0 <= ncp < nfft, got ncp={ncp}")
    return OfdmGrid(freq=freq, ncp=ncp)


def ofdm_modulate(grid: OfdmGrid) -> np.ndarray:
    """Unitary IFFT per symbol/antenna plus cyclic prefix; returns (Ntp*(Nfft+Ncp), Ntx)."""
    time_syms = fft(grid.freq, direction="inverse", axis=1)  # (Ntp, Nfft, Ntx)
    if grid.ncp > 0:
        time_syms = np.concatenate([time_syms[:, -grid.ncp:, :], time_syms], axis=1)
    ntp, sym_len, ntx = time_syms.shape
    return time_syms.reshape(ntp * sym_len, ntx)


def ofdm_demodulate(samples: np.ndarray, nfft: int, ncp: int, ntp: int) -> np.ndarray:
    """Drop the cyclic prefix, unitary FFT; returns the (Ntp, Nfft, Nrx) grid."""
    samples = np.asarray(samples)
    sym_len = nfft + ncp
    expected = ntp * sym_len
    if samples.shape[0] != expected:
        raise ValueError(
            f"sample count {samples.shape[0]} != ntp*(nfft+ncp) = {expected}"
        )
    nrx = samples.shape[1]
    syms = samples.reshape(ntp, sym_len, nrx)[:, ncp:, :]
    return fft(syms, direction="forward", axis=1)
