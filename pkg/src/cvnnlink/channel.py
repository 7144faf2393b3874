"""Time-varying sample-spaced MIMO tapped-delay-line channel.

Each (tap, rx, tx) coefficient is an independent Rayleigh fading process
realized as a sum of 64 sinusoids with uniform random arrival angles and
phases (Clarke/Jakes spectrum), so its temporal autocorrelation follows
J0(2*pi*fD*tau).  Tap powers are normalized per (rx, tx) link to sum to
one; the transmitter splits unit power across antennas, which pins the
average received symbol energy per receive antenna to one (the Eb/N0
anchor used by the modem).

The received stream is y[n] = sum_i H_i[n] x[n-i] + w[n]; `apply` keeps
the tail of the previous block so chunked application equals one-shot
convolution, and `evolve` re-evaluates the oscillators at a new absolute
time (taps are held constant within each call to `apply`).
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

import numpy as np

from .numerics import Rng, sample_cgauss

__all__ = [
    "TdlProfile",
    "TdlChannelState",
    "load_profile",
    "builtin_profile",
    "discretize_profile",
    "init_channel",
    "add_noise",
]

N_OSCILLATORS = 64


class ProfileError(ValueError):
    """Malformed channel profile file."""


@dataclass(frozen=True)
class TdlProfile:
    """Tapped-delay-line power/delay profile plus maximum Doppler frequency."""

    delays_ns: np.ndarray
    powers_db: np.ndarray
    doppler_hz: float

    @property
    def powers_linear(self) -> np.ndarray:
        """Linear tap powers normalized to sum to one."""
        p = 10.0 ** (self.powers_db / 10.0)
        return p / p.sum()


def _make_profile(delays_ns, powers_db, doppler_hz) -> TdlProfile:
    delays = np.asarray(delays_ns, dtype=float)
    powers = np.asarray(powers_db, dtype=float)
    if delays.size == 0:
        raise ProfileError("profile has no taps")
    if delays.size != powers.size:
        raise ProfileError(f"{delays.size} delays but {powers.size} powers")
    if (delays < 0).any():
        raise ProfileError("tap delays must be non-negative")
    if doppler_hz < 0:
        raise ProfileError(f"doppler_hz must be non-negative, got {doppler_hz}")
    order = np.argsort(delays, kind="stable")
    return TdlProfile(delays_ns=delays[order], powers_db=powers[order], doppler_hz=float(doppler_hz))


def load_profile(path) -> TdlProfile:
    """Parse a plain-text profile: 'delay_ns power_db' rows plus a doppler_hz line."""
    delays, powers = [], []
    doppler = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if fields[0] == "doppler_hz":
                if len(fields) != 2:
                    raise ProfileError(f"{path}:{lineno}: expected 'doppler_hz <value>'")
                try:
                    doppler = float(fields[1])
                except ValueError:
                    raise ProfileError(f"{path}:{lineno}: bad doppler value {fields[1]!r}") from None
                continue
            if len(fields) != 2:
                raise ProfileError(
                    f"{path}:{lineno}: expected 'delay_ns power_db', got {len(fields)} fields"
                )
            try:
                delays.append(float(fields[0]))
                powers.append(float(fields[1]))
            except ValueError:
                raise ProfileError(f"{path}:{lineno}: non-numeric tap row {line!r}") from None
    if doppler is None:
        raise ProfileError(f"{path}: missing doppler_hz line")
    try:
        return _make_profile(delays, powers, doppler)
    except ProfileError as err:
        raise ProfileError(f"{path}: {err}") from None


def builtin_profile(name: str = "tdla30-5") -> TdlProfile:
    """Load a profile shipped with the package (currently 'tdla30-5')."""
    resource = importlib.resources.files("cvnnlink").joinpath(f"profiles/{name}.txt")
    if not resource.is_file():
        raise ProfileError(f"unknown built-in profile {name!r}")
    with importlib.resources.as_file(resource) as path:
        return load_profile(path)


def discretize_profile(profile: TdlProfile, ts: float) -> np.ndarray:
    """Sample-spaced tap powers at sample period ts (seconds), summing to one.

    Each tap lands on sample index round(delay/ts); taps sharing an index
    merge their linear powers.
    """
    if ts <= 0:
        raise ValueError(f"sample period must be positive, got {ts}")
    indices = np.round(profile.delays_ns * 1e-9 / ts).astype(int)
    powers = profile.powers_linear
    nds = int(indices.max()) + 1
    out = np.zeros(nds)
    np.add.at(out, indices, powers)
    return out / out.sum()


class TdlChannelState:
    """Fading state owned by a single run; see module docstring for the model."""

    def __init__(self, tap_powers: np.ndarray, nrx: int, ntx: int, doppler_hz: float, rng: Rng):
        nds = tap_powers.shape[0]
        self.nds = nds
        self.nrx = nrx
        self.ntx = ntx
        self.doppler_hz = float(doppler_hz)
        self.t = 0.0
        n_param = nds * nrx * ntx * N_OSCILLATORS
        arrival = 2.0 * np.pi * rng.uniform(n_param).reshape(nds, nrx, ntx, N_OSCILLATORS)
        phases = 2.0 * np.pi * rng.uniform(n_param).reshape(nds, nrx, ntx, N_OSCILLATORS)
        self._omega = 2.0 * np.pi * self.doppler_hz * np.cos(arrival)  # rad/s per oscillator
        self._phases = phases
        self._amps = np.sqrt(tap_powers / N_OSCILLATORS)  # (nds,)
        self.tail = np.zeros((nds - 1, ntx), dtype=np.complex128)
        self.taps = self._taps_at(0.0)

    def _taps_at(self, t: float) -> np.ndarray:
        osc = np.exp(1j * (self._omega * t + self._phases)).sum(axis=-1)
        return self._amps[:, None, None] * osc

    def evolve(self, dt: float) -> "TdlChannelState":
        """Advance absolute time by dt seconds and re-evaluate every tap."""
        if dt < 0:
            raise ValueError(f"dt must be non-negative, got {dt}")
        if dt > 0:
            self.t += dt
            self.taps = self._taps_at(self.t)
        return self

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Convolve (L, Ntx) input samples with the current taps; returns (L, Nrx).

        Consumes the stored tail for the first Nds-1 output samples and
        updates it from the block's last inputs, so streaming in chunks
        matches a one-shot convolution.
        """
        x = np.asarray(x)
        if x.ndim != 2 or x.shape[1] != self.ntx:
            raise ValueError(f"expected input shape (L, {self.ntx}), got {x.shape}")
        length = x.shape[0]
        padded = np.concatenate([self.tail, x], axis=0)
        y = np.zeros((length, self.nrx), dtype=np.complex128)
        for i in range(self.nds):
            start = self.nds - 1 - i
            y += padded[start:start + length] @ self.taps[i].T
        if self.nds > 1:
            self.tail = padded[-(self.nds - 1):].copy()
        return y


def init_channel(profile: TdlProfile, nrx: int, ntx: int, ts: float, rng: Rng) -> TdlChannelState:
    """Create the fading state for an (Nrx, Ntx) link at sample period ts."""
    if nrx < 1 or ntx < 1:
        raise ValueError(f"antenna counts must be >= 1, got nrx={nrx}, ntx={ntx}")
    powers = discretize_profile(profile, ts)
    return TdlChannelState(powers, nrx, ntx, profile.doppler_hz, rng)


def add_noise(y: np.ndarray, variance: float, rng: Rng) -> np.ndarray:
    """Add i.i.d. CN(0, variance) noise per sample per antenna."""
    if variance < 0:
        raise ValueError(f"variance must be non-negative, got {variance}")
    if variance == 0.0:
        return y
    return y + sample_cgauss(rng, y.size, variance).reshape(y.shape)
