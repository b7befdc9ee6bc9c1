"""Constellations and index look-up tables.

Walks through the two building blocks every transmitted frame starts
from: the unit-energy symbol constellations and the table mapping index
bits to active-subcarrier patterns.

Run: python3 demos/01_constellations_and_tables.py
"""

import numpy as np

from mimo_ofdm_im import (
    CONSTELLATION_NAMES,
    SubblockParams,
    build_lookup,
    decode_index_bits,
    encode_subblock,
    make_constellation,
)

print("=== constellations ===")
for name in CONSTELLATION_NAMES:
    c = make_constellation(name)
    energy = np.mean(np.abs(c.points) ** 2)
    print(f"{name}: {c.order} points, {c.bits_per_symbol} bits/symbol, "
          f"mean energy {energy:.6f}")
print()

# bit labels are Gray-coded on each axis, so a nearest-neighbour error
# costs one bit
qpsk = make_constellation("qpsk")
for idx in range(4):
    print(f"  qpsk point {idx}: {qpsk.points[idx]:+.3f}  bits {qpsk.bits_of(idx)}")
print()

print("=== look-up table, N=4 K=2 ===")
prm = SubblockParams(n_f=4, n=4, k=2, bits_per_symbol=1)
table = build_lookup(prm)
print(f"p1={prm.p1} index bits select one of {table.size} rows, "
      f"p2={prm.p2} bits modulate the two active symbols")
for row in table.rows:
    bits = decode_index_bits(row, table)
    print(f"  bits {bits} -> active indices {set(row)}")
print()

print("=== encoding one subblock ===")
bpsk = make_constellation("bpsk")
for bits in ([0, 0, 0, 0], [0, 1, 0, 1], [1, 1, 1, 1]):
    sub = encode_subblock(bits, table, bpsk)
    print(f"  {bits} -> {np.round(sub.real, 3)}")
print()

# any (N, K) beyond the two reference tables falls back to the first
# 2^p1 combinations in lexicographic order
prm8 = SubblockParams(n_f=8, n=8, k=3, bits_per_symbol=1)
table8 = build_lookup(prm8)
print(f"N=8 K=3 uses {table8.size} of the 56 possible patterns, "
      f"first rows: {table8.rows[:4]}")
