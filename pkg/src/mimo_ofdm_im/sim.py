"""Monte-Carlo BER engine with deterministic parallel execution.

Frames are simulated in fixed-size batches. Every frame derives its own
RNG substreams from (seed, absolute frame index), and stopping decisions
happen only at batch boundaries with batches merged in index order, so a
run's error counts are bitwise identical for any worker count.
"""

from __future__ import annotations

import csv
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import (
    BITS_STREAM,
    CHANNEL_STREAM,
    NOISE_STREAM,
    add_noise,
    noise_spec,
    sample_channel,
    substream,
)
from .constellation import make_constellation
from .detectors import (
    DEFAULT_ML_BUDGET,
    CmCounter,
    cm_count,
    detect_frame_classical,
    detect_frame_joint_ml,
    detect_frame_mmse_llr,
)
from .index_mapper import SubblockParams, build_lookup, encode_frames, interleave
from .ofdm_phy import apply_channel_time, to_freq, to_time

__all__ = [
    "BATCH_FRAMES",
    "SimulationConfig",
    "BerRecord",
    "run_point",
    "run_sweep",
    "write_csv",
    "spectral_efficiency",
    "CSV_COLUMNS",
]

# Stopping decisions are made only after whole batches, merged in batch
# order, which is what makes results independent of the worker count.
BATCH_FRAMES = 32

SCHEMES = ("ofdm-im", "classical")
DETECTORS = ("mmse-llr", "joint-ml", "classical-mmse")
MOD_NAMES = {2: "bpsk", 4: "qpsk", 16: "qam16"}


@dataclass(frozen=True)
class SimulationConfig:
    """Full description of one simulated link.

    Defaults follow the reference experiment setup: 512 subcarriers,
    16-sample cyclic prefix, 10-tap uniform-profile Rayleigh channel.
    The classical scheme is the degenerate (N, K) = (1, 1) mapping where
    every subcarrier carries one symbol.
    """

    scheme: str = "ofdm-im"
    detector: str = "mmse-llr"
    t: int = 2
    r: int = 2
    n: int = 4
    k: int = 2
    m_order: int = 2
    n_f: int = 512
    c_p: int = 16
    l_taps: int = 10
    snr_db_list: tuple = ()
    min_bit_errors: int = 200
    max_frames: int = 20000
    seed: int = 1
    workers: int = 1
    ml_budget: int = DEFAULT_ML_BUDGET
    validation_path: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.detector not in DETECTORS:
            raise ValueError(f"unknown detector {self.detector!r}")
        if self.scheme == "classical" and self.detector != "classical-mmse":
            raise ValueError("classical scheme requires the classical-mmse detector")
        if self.scheme == "ofdm-im" and self.detector == "classical-mmse":
            raise ValueError("classical-mmse detector requires scheme classical")
        if self.scheme == "classical" and (self.n, self.k) != (1, 1):
            raise ValueError("classical scheme expects n=1, k=1")
        if self.m_order not in MOD_NAMES:
            raise ValueError(f"unsupported constellation order {self.m_order}")
        if self.t < 1 or self.r < 1:
            raise ValueError("need at least one antenna on each side")
        if not 0 <= self.c_p < self.n_f:
            raise ValueError(f"need 0 <= c_p < n_f, got c_p={self.c_p}")
        if self.c_p < self.l_taps:
            raise ValueError(
                f"cyclic prefix {self.c_p} must cover the {self.l_taps}-tap channel"
            )
        if self.min_bit_errors < 1 or self.max_frames < 1 or self.workers < 1:
            raise ValueError("min_bit_errors, max_frames, workers must be >= 1")
        self.params()  # surfaces n/k/n_f violations

    def params(self) -> SubblockParams:
        return SubblockParams(
            n_f=self.n_f,
            n=self.n,
            k=self.k,
            bits_per_symbol=self.m_order.bit_length() - 1,
        )

    def constellation(self):
        return make_constellation(MOD_NAMES[self.m_order])


@dataclass(frozen=True)
class BerRecord:
    """Result of one (config, SNR) Monte-Carlo point."""

    scheme: str
    detector: str
    t: int
    r: int
    n: int
    k: int
    m_order: int
    snr_db: float
    bits: int
    errors: int
    ber: float
    frames: int
    cm_measured: float
    cm_formula: int
    status: str
    wall_seconds: float


CSV_COLUMNS = [
    "scheme",
    "detector",
    "T",
    "R",
    "N",
    "K",
    "M",
    "snr_db",
    "bits",
    "errors",
    "ber",
    "frames",
    "cm_measured",
    "cm_formula",
    "status",
    "wall_seconds",
]


def spectral_efficiency(config: SimulationConfig) -> float:
    """Information bits per second per Hertz: m*T / (N_F + C_p)."""
    return config.t * config.params().m / (config.n_f + config.c_p)


def _run_frame(config, snr_db, frame_index, table, constellation, spec, counter=None):
    """Simulate and detect one frame. Returns (sent bits, decided bits)."""
    prm = table.params
    tx_bits = substream(config.seed, frame_index, BITS_STREAM).integers(
        0, 2, size=(config.t, prm.m), dtype=np.int8
    )
    chan = sample_channel(
        config.t,
        config.r,
        config.l_taps,
        config.n_f,
        substream(config.seed, frame_index, CHANNEL_STREAM),
    )
    x = interleave(encode_frames(tx_bits, table, constellation), prm.g, prm.n)
    noise_rng = substream(config.seed, frame_index, NOISE_STREAM)
    if config.validation_path:
        tx_time = to_time(x, config.c_p, prm.active_per_frame)
        y = to_freq(apply_channel_time(tx_time, chan, spec.n0_t, noise_rng))
    else:
        y = add_noise(np.einsum("tk,rtk->rk", x, chan.freq), spec.n0_f, noise_rng)
    if config.detector == "mmse-llr":
        rx_bits = detect_frame_mmse_llr(y, chan, spec, table, constellation, counter)
    elif config.detector == "joint-ml":
        rx_bits = detect_frame_joint_ml(y, chan, table, constellation, config.ml_budget)
    else:
        rx_bits = detect_frame_classical(y, chan, spec, constellation, counter)
    return tx_bits, rx_bits


def _simulate_batch(config: SimulationConfig, snr_db: float, start: int, count: int):
    """Run frames [start, start+count). Returns (bit errors, bits sent)."""
    prm = config.params()
    table = build_lookup(prm)
    constellation = config.constellation()
    spec = noise_spec(snr_db, config.n_f, config.c_p, prm.m, config.k, prm.g)
    errors = 0
    for f in range(start, start + count):
        tx_bits, rx_bits = _run_frame(config, snr_db, f, table, constellation, spec)
        errors += int((rx_bits != tx_bits).sum())
    return errors, count * config.t * prm.m


def _measure_cm(config: SimulationConfig, snr_db: float) -> float:
    """Measured complex multiplications per subcarrier, from frame 0.

    The instrumented count is deterministic per configuration, so one
    probe frame suffices. Joint ML is not instrumented (its cost is a
    hypothesis-count question, not a multiplication-count one): 0.0.
    """
    if config.detector == "joint-ml":
        return 0.0
    prm = config.params()
    table = build_lookup(prm)
    constellation = config.constellation()
    spec = noise_spec(snr_db, config.n_f, config.c_p, prm.m, config.k, prm.g)
    counter = CmCounter()
    _run_frame(config, snr_db, 0, table, constellation, spec, counter)
    return counter.total / config.n_f


def _formula_cm(config: SimulationConfig) -> int:
    if config.detector == "mmse-llr":
        return cm_count(config.t, config.r, config.m_order, "ofdm-im")
    if config.detector == "classical-mmse":
        return cm_count(config.t, config.r, config.m_order, "classical")
    return 0


def _batch_bounds(max_frames: int):
    start = 0
    while start < max_frames:
        count = min(BATCH_FRAMES, max_frames - start)
        yield start, count
        start += count


def run_point(config: SimulationConfig, snr_db: float) -> BerRecord:
    """Monte-Carlo BER at one SNR.

    Stops at the first batch boundary where min_bit_errors is reached, or
    at max_frames. Bitwise deterministic in (config, snr_db) regardless of
    worker count; only wall_seconds varies between runs.
    """
    t0 = time.perf_counter()
    errors = 0
    bits = 0
    frames = 0
    bounds = list(_batch_bounds(config.max_frames))
    if config.workers == 1:
        for start, count in bounds:
            e, b = _simulate_batch(config, snr_db, start, count)
            errors += e
            bits += b
            frames += count
            if errors >= config.min_bit_errors:
                break
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            pending = {}
            next_submit = 0
            next_merge = 0
            while next_merge < len(bounds):
                while (
                    next_submit < len(bounds)
                    and next_submit - next_merge < config.workers
                ):
                    pending[next_submit] = pool.submit(
                        _simulate_batch, config, snr_db, *bounds[next_submit]
                    )
                    next_submit += 1
                e, b = pending.pop(next_merge).result()
                errors += e
                bits += b
                frames += bounds[next_merge][1]
                next_merge += 1
                if errors >= config.min_bit_errors:
                    for fut in pending.values():
                        fut.cancel()
                    break
    status = "ok" if errors >= config.min_bit_errors else "max_frames"
    return BerRecord(
        scheme=config.scheme,
        detector=config.detector,
        t=config.t,
        r=config.r,
        n=config.n,
        k=config.k,
        m_order=config.m_order,
        snr_db=float(snr_db),
        bits=bits,
        errors=errors,
        ber=errors / bits,
        frames=frames,
        cm_measured=_measure_cm(config, snr_db),
        cm_formula=_formula_cm(config),
        status=status,
        wall_seconds=time.perf_counter() - t0,
    )


def _warn_if_not_monotonic(records):
    """Soft sanity check: BER should not rise with SNR beyond noise."""
    for prev, cur in zip(records, records[1:]):
        band = 3.0 * (
            math.sqrt(max(prev.ber * (1 - prev.ber), 0.0) / prev.bits)
            + math.sqrt(max(cur.ber * (1 - cur.ber), 0.0) / cur.bits)
        )
        if cur.ber > prev.ber + band:
            warnings.warn(
                f"BER rose from {prev.ber:.3g} at {prev.snr_db:g} dB to "
                f"{cur.ber:.3g} at {cur.snr_db:g} dB, beyond 3 standard errors",
                stacklevel=3,
            )


def run_sweep(config: SimulationConfig, out_path=None, progress=None):
    """One BerRecord per entry of config.snr_db_list, optionally as CSV."""
    if not config.snr_db_list:
        raise ValueError("snr_db_list is empty")
    records = []
    for snr_db in config.snr_db_list:
        record = run_point(config, snr_db)
        records.append(record)
        if progress is not None:
            progress(record)
    _warn_if_not_monotonic(records)
    if out_path is not None:
        write_csv(records, out_path)
    return records


def _csv_row(record: BerRecord):
    return [
        record.scheme,
        record.detector,
        str(record.t),
        str(record.r),
        str(record.n),
        str(record.k),
        str(record.m_order),
        f"{record.snr_db:g}",
        str(record.bits),
        str(record.errors),
        f"{record.ber:.12g}",
        str(record.frames),
        f"{record.cm_measured:g}",
        str(record.cm_formula),
        record.status,
        f"{record.wall_seconds:.3f}",
    ]


def write_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for record in records:
            writer.writerow(_csv_row(record))
