"""Unit-energy signal constellations with fixed, Gray-coded bit labelings.

Supported orders are BPSK (M=2), QPSK (M=4) and 16-QAM (M=16). Every
constellation is normalized to unit average symbol energy, and the
bit-to-point labeling is frozen so that golden vectors stay valid:

* BPSK: bit 0 -> +1, bit 1 -> -1.
* QPSK: one bit per axis (first bit I, second bit Q), 0 -> +1, 1 -> -1,
  scaled by 1/sqrt(2). [0,0] -> (1+1j)/sqrt(2).
* 16-QAM: two Gray-coded bits per axis (first pair I, second pair Q),
  00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3, scaled by 1/sqrt(10).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Constellation", "make_constellation", "CONSTELLATION_NAMES"]

CONSTELLATION_NAMES = ("bpsk", "qpsk", "qam16")

# Per-axis Gray map used by 16-QAM, all-zero bits toward the positive rail.
_PAM4_GRAY_LEVELS = {(0, 0): 3.0, (0, 1): 1.0, (1, 1): -1.0, (1, 0): -3.0}


@dataclass(frozen=True, eq=False)
class Constellation:
    """An M-ary signal set with unit average energy.

    ``points[i]`` is the symbol labeled by the bit pattern equal to the
    binary expansion of ``i`` (MSB first). Immutable after construction,
    safe for concurrent reads.
    """

    name: str
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def order(self) -> int:
        return self.points.size

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))

    def modulate(self, bits) -> complex:
        """Map one bit group (length ``bits_per_symbol``) to its point."""
        bits = np.asarray(bits, dtype=np.int64).ravel()
        if bits.size != self.bits_per_symbol:
            raise ValueError(
                f"expected {self.bits_per_symbol} bits, got {bits.size}"
            )
        return complex(self.points[_bits_to_int(bits)])

    def modulate_many(self, bits: np.ndarray) -> np.ndarray:
        """Vectorized modulate: bits shaped (..., bits_per_symbol)."""
        bits = np.asarray(bits, dtype=np.int64)
        if bits.shape[-1] != self.bits_per_symbol:
            raise ValueError(
                f"expected trailing dimension {self.bits_per_symbol}, "
                f"got {bits.shape[-1]}"
            )
        return self.points[_bits_to_int(bits)]

    def bits_of(self, index) -> np.ndarray:
        """Bit pattern (MSB first) labeling symbol ``index``; vectorized."""
        index = np.asarray(index, dtype=np.int64)
        shifts = np.arange(self.bits_per_symbol - 1, -1, -1)
        return ((index[..., None] >> shifts) & 1).astype(np.int8)

    def nearest(self, z: complex, scale: complex = 1.0) -> tuple[int, float]:
        """Minimum-distance symbol decision against ``scale * points``.

        Returns ``(index, squared_distance)``; ties break toward the
        lowest symbol index.
        """
        d = np.abs(z - scale * self.points) ** 2
        idx = int(np.argmin(d))
        return idx, float(d[idx])


def _bits_to_int(bits: np.ndarray) -> np.ndarray:
    weights = 1 << np.arange(bits.shape[-1] - 1, -1, -1)
    return (bits * weights).sum(axis=-1)


def _bpsk_points() -> np.ndarray:
    return np.array([1.0, -1.0], dtype=np.complex128)


def _qpsk_points() -> np.ndarray:
    pts = np.empty(4, dtype=np.complex128)
    for b0 in (0, 1):
        for b1 in (0, 1):
            pts[2 * b0 + b1] = ((1 - 2 * b0) + 1j * (1 - 2 * b1)) / np.sqrt(2.0)
    return pts


def _qam16_points() -> np.ndarray:
    pts = np.empty(16, dtype=np.complex128)
    for label in range(16):
        b = [(label >> s) & 1 for s in (3, 2, 1, 0)]
        i_level = _PAM4_GRAY_LEVELS[(b[0], b[1])]
        q_level = _PAM4_GRAY_LEVELS[(b[2], b[3])]
        pts[label] = (i_level + 1j * q_level) / np.sqrt(10.0)
    return pts


_BUILDERS = {"bpsk": _bpsk_points, "qpsk": _qpsk_points, "qam16": _qam16_points}


def make_constellation(name: str) -> Constellation:
    """Build a constellation by name ("bpsk" | "qpsk" | "qam16")."""
    key = name.lower()
    if key not in _BUILDERS:
        raise ValueError(
            f"unknown constellation {name!r}; choose from {CONSTELLATION_NAMES}"
        )
    return Constellation(name=key, points=_BUILDERS[key]())
