"""Time-domain OFDM chain: unitary transforms, cyclic prefix, tap convolution.

This is the validation path. The Monte-Carlo engine works directly on the
per-subcarrier model y_r = diag(x_t) h_{r,t} + w_r; the chain here proves
that model exact (circular-convolution theorem) and otherwise stays out of
the hot loop.

Convention: unitary IFFT/FFT plus an explicit power normalization
scale = sqrt(N_F / (K*G)), chosen so a frame carrying K*G unit-energy
symbols has expected body energy N_F (unit average power per sample) and
so the time/frequency noise variances relate as N0_F = (K*G/N_F) * N0_T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import MimoChannelRealization

__all__ = ["TimeDomainFrame", "to_time", "to_freq", "apply_channel_time"]


@dataclass(frozen=True, eq=False)
class TimeDomainFrame:
    """Cyclic-prefixed time samples, one row per antenna stream.

    samples: (..., N_F + cp); the first cp samples of each row replicate
    its last cp samples. scale is the transmit normalization applied after
    the unitary inverse transform, needed to undo it at the receiver.
    """

    samples: np.ndarray
    scale: float
    cp: int

    @property
    def n_f(self) -> int:
        return self.samples.shape[-1] - self.cp


def to_time(block, cp: int, active_per_frame: int) -> TimeDomainFrame:
    """Unitary IFFT, power normalization, cyclic-prefix insertion.

    block: (..., N_F) frequency-domain frame(s), already interleaved.
    active_per_frame: number of unit-energy symbols a frame carries (K*G),
    which fixes scale = sqrt(N_F / active_per_frame).
    """
    block = np.asarray(block, dtype=np.complex128)
    n_f = block.shape[-1]
    if not 0 <= cp < n_f:
        raise ValueError(f"need 0 <= cp < n_f, got cp={cp}, n_f={n_f}")
    if active_per_frame < 1:
        raise ValueError("active_per_frame must be positive")
    scale = float(np.sqrt(n_f / active_per_frame))
    body = np.fft.ifft(block, norm="ortho") * scale
    samples = np.concatenate([body[..., n_f - cp :], body], axis=-1) if cp else body
    return TimeDomainFrame(samples=samples, scale=scale, cp=cp)


def to_freq(frame: TimeDomainFrame) -> np.ndarray:
    """Strip the prefix, forward unitary FFT, undo the transmit scale.

    Exact inverse of to_time on clean frames; applied to received frames
    it yields the per-subcarrier model with channel gains equal to the
    N_F-point DFT of the taps.
    """
    body = frame.samples[..., frame.cp :]
    return np.fft.fft(body, norm="ortho") / frame.scale


def apply_channel_time(
    frame: TimeDomainFrame,
    chan: MimoChannelRealization,
    n0_t: float,
    rng: np.random.Generator,
) -> TimeDomainFrame:
    """Convolve T transmit streams with the channel taps, add noise.

    frame.samples: (T, N_F + cp) -> received (R, N_F + cp). Transmission
    is frame-isolated (zero history before sample 0), so cp >= L keeps
    the body free of ambiguity and the circular model exact after prefix
    removal. Noise is CN(0, n0_t) per received sample; the generator is
    consumed even for n0_t = 0.
    """
    x = np.atleast_2d(np.asarray(frame.samples))
    if frame.cp < chan.l_taps:
        raise ValueError(
            f"cyclic prefix {frame.cp} shorter than channel length {chan.l_taps}"
        )
    if x.shape[0] != chan.t:
        raise ValueError(f"expected {chan.t} transmit streams, got {x.shape[0]}")
    if n0_t < 0:
        raise ValueError(f"noise variance must be nonnegative, got {n0_t}")
    n_samp = x.shape[-1]
    y = np.zeros((chan.r, n_samp), dtype=np.complex128)
    for lag in range(chan.l_taps):
        y[:, lag:] += chan.taps[:, :, lag] @ x[:, : n_samp - lag]
    noise = rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
    y += np.sqrt(n0_t / 2.0) * noise
    return TimeDomainFrame(samples=y, scale=frame.scale, cp=frame.cp)
