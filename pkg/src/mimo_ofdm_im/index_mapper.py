"""Bit-to-frame mapping for OFDM with index modulation.

Each length-N subblock carries p = p1 + p2 bits: the first p1 select which
K of its N subcarriers are active (via a fixed look-up table), the
remaining p2 = K*log2(M) modulate the symbols placed on those subcarriers.
G = N_F / N subblocks are concatenated into one frequency-domain block per
transmit antenna, then passed through a G x N block interleaver so that
one subblock's entries land on subcarriers spaced G apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, islice

import numpy as np

from .constellation import Constellation

__all__ = [
    "SubblockParams",
    "IndexLookupTable",
    "OfdmImFrame",
    "build_lookup",
    "encode_subblock",
    "decode_index_bits",
    "assemble_frame",
    "encode_frames",
    "interleave",
    "deinterleave",
    "recover_bits",
]

# Reference tables for N=4: bit-pattern row index -> active indices (1-based).
_TABLE_4_2 = ((1, 3), (2, 4), (1, 4), (2, 3))
_TABLE_4_3 = ((1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4))

_MAX_TABLE_ROWS = 1 << 20


@dataclass(frozen=True)
class SubblockParams:
    """Static sizing of the index-modulated frame for one antenna.

    n_f: subcarriers per frame; n: subcarriers per subblock; k: active
    subcarriers per subblock; bits_per_symbol: log2(M) of the symbol
    constellation.
    """

    n_f: int
    n: int
    k: int
    bits_per_symbol: int

    def __post_init__(self):
        if self.n < 1 or self.n_f < 1:
            raise ValueError("n and n_f must be positive")
        if self.n_f % self.n != 0:
            raise ValueError(f"n={self.n} must divide n_f={self.n_f}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.bits_per_symbol < 1:
            raise ValueError("bits_per_symbol must be >= 1")

    @property
    def g(self) -> int:
        """Subblocks per frame."""
        return self.n_f // self.n

    @property
    def p1(self) -> int:
        """Index-selection bits per subblock: floor(log2 C(n, k))."""
        return math.comb(self.n, self.k).bit_length() - 1

    @property
    def p2(self) -> int:
        """Symbol bits per subblock."""
        return self.k * self.bits_per_symbol

    @property
    def p(self) -> int:
        return self.p1 + self.p2

    @property
    def m(self) -> int:
        """Information bits per frame per antenna."""
        return self.p * self.g

    @property
    def active_per_frame(self) -> int:
        return self.k * self.g


@dataclass(frozen=True, eq=False)
class IndexLookupTable:
    """Bijection between p1-bit patterns and legal active-index sets.

    Row ``i`` is selected by the bit pattern whose integer value is ``i``
    (MSB first). ``rows`` hold 1-based subcarrier indices in ascending
    order; ``combos0`` is the same data 0-based as an array for vector
    placement. Immutable, safe for concurrent use.
    """

    params: SubblockParams
    rows: tuple[tuple[int, ...], ...]
    combos0: np.ndarray = field(repr=False)
    _row_of_combo: dict = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.rows)

    def row_index(self, combination) -> int:
        key = tuple(sorted(int(i) for i in combination))
        try:
            return self._row_of_combo[key]
        except KeyError:
            raise LookupError(
                f"active-index combination {key} is not a table row"
            ) from None


def build_lookup(params: SubblockParams) -> IndexLookupTable:
    """Build the look-up table for one (N, K) pair.

    (4,2) and (4,3) use the fixed reference tables; any other pair takes
    the first 2^p1 K-combinations of {1..N} in lexicographic order. Bit
    patterns count up from all-zeros in row order.
    """
    n, k = params.n, params.k
    size = 1 << params.p1
    if size > _MAX_TABLE_ROWS:
        raise ValueError(f"look-up table with {size} rows is impractically large")
    if (n, k) == (4, 2):
        rows = _TABLE_4_2
    elif (n, k) == (4, 3):
        rows = _TABLE_4_3
    else:
        rows = tuple(islice(combinations(range(1, n + 1), k), size))
    combos0 = np.asarray(rows, dtype=np.int64) - 1
    combos0.setflags(write=False)
    return IndexLookupTable(
        params=params,
        rows=rows,
        combos0=combos0,
        _row_of_combo={row: i for i, row in enumerate(rows)},
    )


@dataclass(frozen=True, eq=False)
class OfdmImFrame:
    """One antenna's frequency-domain block before interleaving."""

    antenna: int
    bits: np.ndarray
    block: np.ndarray
    active_mask: np.ndarray


def _bits_to_int(bits: np.ndarray) -> np.ndarray:
    if bits.shape[-1] == 0:
        return np.zeros(bits.shape[:-1], dtype=np.int64)
    weights = 1 << np.arange(bits.shape[-1] - 1, -1, -1)
    return (bits.astype(np.int64) * weights).sum(axis=-1)


def _int_to_bits(values: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width - 1, -1, -1)
    return ((np.asarray(values, dtype=np.int64)[..., None] >> shifts) & 1).astype(np.int8)


def encode_subblock(
    bits, table: IndexLookupTable, constellation: Constellation
) -> np.ndarray:
    """Encode p = p1 + p2 bits into one length-N subblock.

    The first p1 bits pick the active-index row; the remaining p2 bits are
    modulated in groups of log2(M) and placed on the active indices in
    ascending order (first symbol on the smallest index). Inactive entries
    are exactly zero.
    """
    p = table.params.p
    bits = np.asarray(bits, dtype=np.int8).ravel()
    if bits.size != p:
        raise ValueError(f"expected {p} bits per subblock, got {bits.size}")
    return _encode_groups(bits[None, :], table, constellation)[0]


def _encode_groups(
    bits: np.ndarray, table: IndexLookupTable, constellation: Constellation
) -> np.ndarray:
    """Encode a (batch, p) bit array into (batch, N) subblocks."""
    prm = table.params
    idx_bits = bits[:, : prm.p1]
    sym_bits = bits[:, prm.p1 :].reshape(-1, prm.k, prm.bits_per_symbol)
    rows = _bits_to_int(idx_bits)
    symbols = constellation.modulate_many(sym_bits)  # (batch, k)
    out = np.zeros((bits.shape[0], prm.n), dtype=np.complex128)
    np.put_along_axis(out, table.combos0[rows], symbols, axis=1)
    return out


def decode_index_bits(combination, table: IndexLookupTable) -> np.ndarray:
    """Recover the p1-bit pattern that selects ``combination``."""
    row = table.row_index(combination)
    return _int_to_bits(row, table.params.p1).ravel()


def assemble_frame(
    bits, table: IndexLookupTable, constellation: Constellation, antenna: int = 1
) -> OfdmImFrame:
    """Build one antenna's length-N_F block from m = p*G bits."""
    prm = table.params
    bits = np.asarray(bits, dtype=np.int8).ravel()
    if bits.size != prm.m:
        raise ValueError(f"expected {prm.m} bits per frame, got {bits.size}")
    block = _encode_groups(bits.reshape(prm.g, prm.p), table, constellation).ravel()
    return OfdmImFrame(
        antenna=antenna, bits=bits, block=block, active_mask=block != 0
    )


def encode_frames(
    bits: np.ndarray, table: IndexLookupTable, constellation: Constellation
) -> np.ndarray:
    """Batched assemble: (T, m) bits -> (T, N_F) blocks."""
    prm = table.params
    bits = np.asarray(bits, dtype=np.int8)
    t_count = bits.shape[0]
    if bits.shape[1] != prm.m:
        raise ValueError(f"expected {prm.m} bits per antenna, got {bits.shape[1]}")
    sub = _encode_groups(bits.reshape(t_count * prm.g, prm.p), table, constellation)
    return sub.reshape(t_count, prm.n_f)


def interleave(x: np.ndarray, g: int, n: int) -> np.ndarray:
    """G x N block interleave along the last axis.

    Element n of subblock g (both 1-based) moves to position (n-1)*G + g,
    so a subblock's entries end up spaced G apart.
    """
    x = np.asarray(x)
    if x.shape[-1] != g * n:
        raise ValueError(f"expected last dimension {g * n}, got {x.shape[-1]}")
    shape = x.shape[:-1]
    return np.swapaxes(x.reshape(shape + (g, n)), -2, -1).reshape(shape + (g * n,))


def deinterleave(x: np.ndarray, g: int, n: int) -> np.ndarray:
    """Exact inverse of :func:`interleave`."""
    x = np.asarray(x)
    if x.shape[-1] != g * n:
        raise ValueError(f"expected last dimension {g * n}, got {x.shape[-1]}")
    shape = x.shape[:-1]
    return np.swapaxes(x.reshape(shape + (n, g)), -2, -1).reshape(shape + (g * n,))


def recover_bits(
    combo_rows,
    symbol_indices,
    table: IndexLookupTable,
    constellation: Constellation,
) -> np.ndarray:
    """Turn per-subblock decisions back into one antenna's m bits.

    combo_rows: (G,) table row index per subblock; symbol_indices: (G, K)
    constellation index per active subcarrier in ascending-index order.
    Exact inverse of :func:`assemble_frame` on noiseless decisions.
    """
    prm = table.params
    combo_rows = np.asarray(combo_rows, dtype=np.int64).reshape(prm.g)
    symbol_indices = np.asarray(symbol_indices, dtype=np.int64).reshape(prm.g, prm.k)
    idx_bits = _int_to_bits(combo_rows, prm.p1)  # (G, p1)
    sym_bits = constellation.bits_of(symbol_indices)  # (G, K, bps)
    out = np.concatenate(
        [idx_bits.reshape(prm.g, prm.p1), sym_bits.reshape(prm.g, prm.p2)], axis=1
    )
    return out.reshape(prm.m)
