"""End-to-end online experiment loop: pilot/data scheduling, training, metrics.

One frame carries one space-time codeword per subcarrier across Ntp
consecutive OFDM symbols.  Every pilot_period-th frame is a pilot whose
symbols the receiver knows; its Nfft (input, target) pairs are presented
in subcarrier order, the whole ordered sequence repeated `upsample`
times without shuffling, one training step each.  Data frames run the
network forward only and accumulate bit errors.

Per-frame MSE is mean_k ||q[k] - qhat[k]||^2 / Ns in dB; on pilot frames
qhat is the network output at each training step (before the update), on
data frames the forward-only estimate.  Steady-state statistics start at
warmup_frames.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .channel import add_noise, init_channel
from .config import ExperimentConfig
from .cvnn import NumericDomainError, forward, init_network, train_step
from .modem import noise_variance, qam_demap, qam_map
from .numerics import Rng
from .ofdm import build_frame, ofdm_demodulate, ofdm_modulate
from .stc import qostbc_encode

__all__ = [
    "FrameRecord",
    "RunResult",
    "run_experiment",
    "ber_curve",
    "convergence_frame",
    "smooth_mse",
]

BER_THRESHOLD = 2e-2  # soft-decision FEC operating point

_MSE_FLOOR = 1e-300  # keeps the dB conversion finite on a perfect frame


@dataclass(frozen=True)
class FrameRecord:
    """Per-frame measurement row."""

    index: int
    kind: str  # "pilot" | "data"
    mse_db: float
    ber: Optional[float]  # None on pilot frames
    n_bits: int
    n_bit_errors: int


@dataclass(frozen=True)
class RunResult:
    """One seed's run: per-frame records plus recomputable aggregates."""

    seed: int
    records: tuple
    steady_state_mse_db: Optional[float]
    ber_overall: Optional[float]
    convergence_frame: Optional[int]
    config: dict
    bit_log: Optional[list] = None  # (frame, tx_bits, rx_bits) when requested

    def data_records(self) -> list:
        return [r for r in self.records if r.kind == "data"]

    def to_dict(self) -> dict:
        data = self.data_records()
        return {
            "seed": self.seed,
            "steady_state_mse_db": self.steady_state_mse_db,
            "ber_overall": self.ber_overall,
            "convergence_frame": self.convergence_frame,
            "n_frames": len(self.records),
            "n_pilot_frames": sum(1 for r in self.records if r.kind == "pilot"),
            "total_bits": sum(r.n_bits for r in data),
            "total_bit_errors": sum(r.n_bit_errors for r in data),
            "config": self.config,
        }


def _to_db(mse_linear: float) -> float:
    return float(10.0 * np.log10(max(mse_linear, _MSE_FLOOR)))


def smooth_mse(series_db: Sequence[float], window: int) -> np.ndarray:
    """Trailing moving average of a dB series, averaged in linear power.

    Entry i averages the last min(window, i+1) values.  window=1 is the
    identity.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    lin = 10.0 ** (np.asarray(series_db, dtype=float) / 10.0)
    out = np.empty_like(lin)
    csum = np.cumsum(lin)
    for i in range(len(lin)):
        lo = max(0, i - window + 1)
        out[i] = (csum[i] - (csum[lo - 1] if lo > 0 else 0.0)) / (i - lo + 1)
    return 10.0 * np.log10(np.maximum(out, _MSE_FLOOR))


def _trailing_mean(values: np.ndarray, window: int) -> np.ndarray:
    out = np.empty(len(values))
    csum = np.cumsum(values)
    for i in range(len(values)):
        lo = max(0, i - window + 1)
        out[i] = (csum[i] - (csum[lo - 1] if lo > 0 else 0.0)) / (i - lo + 1)
    return out


def convergence_frame(result: RunResult, threshold: float = BER_THRESHOLD,
                      window: Optional[int] = None) -> Optional[int]:
    """First frame where the smoothed BER drops below `threshold` and stays
    there for `window` consecutive frames; None if that never happens.

    The smoothed BER at frame f averages the last min(window, available)
    data-frame BERs at or before f, and is 0 before any data frame has
    been seen (so an error-free run converges at frame 0).  The reported
    value counts frames processed, i.e. it is the index of the first
    frame of the qualifying streak.
    """
    if window is None:
        window = int(result.config.get("smoothing_window", 20))
    n = len(result.records)
    data_bers = []
    smoothed = np.zeros(n)
    for rec in result.records:
        if rec.kind == "data":
            data_bers.append(rec.ber)
        tail = data_bers[-window:]
        smoothed[rec.index] = float(np.mean(tail)) if tail else 0.0
    below = smoothed < threshold
    # first f whose following `window` frames are all below the threshold
    for f in range(0, n - window + 1):
        if below[f:f + window].all():
            return f
    return None


def run_experiment(config: ExperimentConfig, seed: int, keep_bits: bool = False) -> RunResult:
    """Run one seed of the online experiment; see module docstring.

    keep_bits additionally stores per-data-frame transmitted/decided bit
    arrays on the result (diagnostics only, off by default).
    """
    rng_bits = Rng(seed, "bits")
    rng_pilots = Rng(seed, "pilots")
    rng_channel = Rng(seed, "channel")
    rng_noise = Rng(config.noise_seed if config.noise_seed is not None else seed, "noise")
    rng_init = Rng(seed, "init")

    ntp, ns = config.ntp, config.ns
    nfft, ncp, nrx, ntx = config.nfft, config.ncp, config.nrx, config.ntx
    m_order = config.mod_order
    bits_per_frame = nfft * ns * int(np.log2(m_order))

    state = init_network(config.network_config(), config.hp, rng_init)
    channel = None
    if not config.identity_channel:
        channel = init_channel(config.profile, nrx, ntx, config.ts, rng_channel)
    elif ntx != nrx:
        raise ValueError("identity channel requires ntx == nrx")
    sigma_w2 = noise_variance(config.ebn0_db, m_order)
    amp = 1.0 / np.sqrt(ntx)  # unit total transmit power split across antennas
    sym_len = nfft + ncp
    sym_duration = sym_len * config.ts

    records = []
    bit_log = [] if keep_bits else None
    for f in range(config.n_frames):
        is_pilot = (f % config.pilot_period == 0)
        src = rng_pilots if is_pilot else rng_bits
        tx_bits = src.bits(bits_per_frame)
        symbols = qam_map(tx_bits, m_order).reshape(nfft, ns)
        code = [qostbc_encode(symbols[k]).S for k in range(nfft)]
        grid = build_frame(code, ncp)
        tx = ofdm_modulate(grid) * amp
        if channel is None:
            y = tx
        else:
            y = np.empty((tx.shape[0], nrx), dtype=np.complex128)
            for t in range(ntp):
                y[t * sym_len:(t + 1) * sym_len] = channel.apply(tx[t * sym_len:(t + 1) * sym_len])
                channel.evolve(sym_duration)
        y = add_noise(y, sigma_w2, rng_noise)
        rx = ofdm_demodulate(y, nfft, ncp, ntp)
        # per-subcarrier network input: s_hat[k] flattened time-major
        inputs = rx.transpose(1, 0, 2).reshape(nfft, ntp * nrx)

        if is_pilot:
            if config.upsample_mode == "sequence":
                schedule = [k for _ in range(config.upsample) for k in range(nfft)]
            else:
                schedule = [k for k in range(nfft) for _ in range(config.upsample)]
            total = 0.0
            for k in schedule:
                try:
                    state, err_energy = train_step(state, inputs[k], symbols[k], config.hp)
                except NumericDomainError as err:
                    raise NumericDomainError(f"frame {f}, subcarrier {k}: {err}") from err
                total += err_energy
            mse = total / (len(schedule) * ns)
            records.append(FrameRecord(f, "pilot", _to_db(mse), None, 0, 0))
        else:
            estimates = np.empty((nfft, ns), dtype=np.complex128)
            for k in range(nfft):
                try:
                    estimates[k] = forward(state, inputs[k])
                except NumericDomainError as err:
                    raise NumericDomainError(f"frame {f}, subcarrier {k}: {err}") from err
            mse = float(np.sum(np.abs(symbols - estimates) ** 2)) / (nfft * ns)
            rx_bits = qam_demap(estimates.reshape(-1), m_order)
            n_err = int(np.sum(rx_bits != tx_bits))
            records.append(FrameRecord(f, "data", _to_db(mse), n_err / bits_per_frame,
                                       bits_per_frame, n_err))
            if keep_bits:
                bit_log.append((f, tx_bits.copy(), rx_bits))

    return _aggregate(config, seed, records, bit_log)


def _aggregate(config: ExperimentConfig, seed: int, records: list,
               bit_log: Optional[list] = None) -> RunResult:
    window = config.hp.smoothing_window
    data = [r for r in records if r.kind == "data"]
    post = [r for r in data if r.index >= config.warmup_frames]
    steady = None
    if post:
        smoothed = smooth_mse([r.mse_db for r in data], window)
        keep = np.array([r.index >= config.warmup_frames for r in data])
        steady = float(10.0 * np.log10(np.mean(10.0 ** (smoothed[keep] / 10.0))))
    total_bits = sum(r.n_bits for r in post)
    ber_overall = (sum(r.n_bit_errors for r in post) / total_bits) if total_bits else None
    result = RunResult(
        seed=seed,
        records=tuple(records),
        steady_state_mse_db=steady,
        ber_overall=ber_overall,
        convergence_frame=None,
        config=config.to_dict(),
        bit_log=bit_log,
    )
    return replace(result, convergence_frame=convergence_frame(result))


def _run_point(args) -> dict:
    config, ebn0, seed = args
    run = run_experiment(replace(config, ebn0_db=ebn0), seed)
    return {
        "ebn0_db": ebn0,
        "architecture": config.architecture,
        "seed": seed,
        "ber": run.ber_overall,
        "steady_state_mse_db": run.steady_state_mse_db,
        "convergence_frame": run.convergence_frame,
    }


def ber_curve(config: ExperimentConfig, ebn0_list: Sequence[float], seeds: Sequence[int],
              workers: Optional[int] = None, on_point=None):
    """Post-warmup BER per Eb/N0, averaged over seeds.

    Runs execute independently (in processes when workers > 1); rows are
    aggregated deterministically, sorted by (ebn0, seed).  Returns
    (table_rows, per_run_rows); on_point, if given, is called with each
    aggregated table row as soon as its Eb/N0 point completes.
    """
    if len(ebn0_list) == 0 or len(seeds) == 0:
        raise ValueError("ebn0_list and seeds must be non-empty")
    tasks = [(config, float(e), int(s)) for e in ebn0_list for s in seeds]
    if workers is None:
        workers = min(len(ebn0_list), os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_point, tasks))
    else:
        runs = [_run_point(t) for t in tasks]
    runs.sort(key=lambda r: (r["ebn0_db"], r["seed"]))
    table = []
    for ebn0 in sorted({float(e) for e in ebn0_list}):
        bers = [r["ber"] for r in runs if r["ebn0_db"] == ebn0 and r["ber"] is not None]
        row = {
            "ebn0_db": ebn0,
            "architecture": config.architecture,
            "mean_ber": float(np.mean(bers)) if bers else None,
            "std_ber": float(np.std(bers)) if bers else None,
        }
        table.append(row)
        if on_point is not None:
            on_point(row)
    return table, runs
