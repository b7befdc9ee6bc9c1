"""Frequency-selective Rayleigh MIMO channel, AWGN calibration, RNG substreams.

SNR bookkeeping follows the link budget SNR = E_b / N0_T with
E_b = (N_F + C_p) / m, where m is the information bits carried per frame
per antenna. The frequency-domain noise variance seen by the detector is
N0_F = (K*G / N_F) * N0_T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BITS_STREAM",
    "CHANNEL_STREAM",
    "NOISE_STREAM",
    "MimoChannelRealization",
    "NoiseSpec",
    "substream",
    "sample_channel",
    "noise_spec",
    "add_noise",
]

# Substream purposes. One independent stream per (frame, purpose) pair.
BITS_STREAM = 0
CHANNEL_STREAM = 1
NOISE_STREAM = 2


def substream(seed: int, frame_index: int, purpose: int) -> np.random.Generator:
    """Independent generator for one (frame, purpose) pair.

    The stream depends only on (seed, frame_index, purpose), never on
    which worker processes the frame, so Monte-Carlo results are bitwise
    reproducible under any degree of parallelism.
    """
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(frame_index, purpose))
    )


@dataclass(frozen=True, eq=False)
class MimoChannelRealization:
    """One frame's channel: taps and their per-subcarrier responses.

    taps: (R, T, L) with i.i.d. CN(0, 1/L) entries; freq: (R, T, N_F),
    the N_F-point DFT of the zero-padded taps, so E|freq|^2 = 1 per
    subcarrier.
    """

    t: int
    r: int
    l_taps: int
    taps: np.ndarray
    freq: np.ndarray

    @property
    def n_f(self) -> int:
        return self.freq.shape[-1]


def sample_channel(
    t: int, r: int, l_taps: int, n_f: int, rng: np.random.Generator
) -> MimoChannelRealization:
    """Draw R*T independent uniform-power-profile Rayleigh tap vectors."""
    if l_taps < 1:
        raise ValueError("need at least one channel tap")
    shape = (r, t, l_taps)
    scale = np.sqrt(1.0 / (2.0 * l_taps))
    taps = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    freq = np.fft.fft(taps, n=n_f, axis=-1)
    return MimoChannelRealization(t=t, r=r, l_taps=l_taps, taps=taps, freq=freq)


@dataclass(frozen=True)
class NoiseSpec:
    """Noise variances and transmit power for one SNR point.

    sigma_x2 = K/N is the average transmit energy per subcarrier; the MMSE
    loading factor rho = sigma_x2 / N0_F is derived from it.
    """

    snr_db: float
    e_b: float
    n0_t: float
    n0_f: float
    sigma_x2: float

    @property
    def rho(self) -> float:
        return self.sigma_x2 / self.n0_f


def noise_spec(
    snr_db: float, n_f: int, c_p: int, m: int, k: int, g: int
) -> NoiseSpec:
    """Convert an SNR in dB to time- and frequency-domain noise variances."""
    if m <= 0:
        raise ValueError("bits per frame m must be positive")
    e_b = (n_f + c_p) / m
    n0_t = e_b * 10.0 ** (-snr_db / 10.0)
    active = k * g
    return NoiseSpec(
        snr_db=float(snr_db),
        e_b=e_b,
        n0_t=n0_t,
        n0_f=n0_t * active / n_f,
        sigma_x2=active / n_f,
    )


def add_noise(
    v: np.ndarray, variance: float, rng: np.random.Generator
) -> np.ndarray:
    """Add circular complex Gaussian noise of the given total variance.

    Real and imaginary parts each get variance/2. The generator is
    consumed even when variance is 0 so substream alignment does not
    depend on the SNR.
    """
    if variance < 0:
        raise ValueError(f"noise variance must be nonnegative, got {variance}")
    v = np.asarray(v)
    noise = rng.standard_normal(v.shape) + 1j * rng.standard_normal(v.shape)
    return v + np.sqrt(variance / 2.0) * noise
