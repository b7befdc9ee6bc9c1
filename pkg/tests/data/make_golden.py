"""Regenerate subblock_golden.txt.

Writes one section per (N, K, modulation) case. Each line maps the p
input bits of one subblock, packed MSB-first into a hex string, to the
N complex subcarrier values the encoder must produce.

Deliberately shares no code with the library: the look-up tables and
symbol maps are written out longhand so the file stays an independent
witness of the encoder's behaviour. Run from anywhere:

    python3 make_golden.py
"""

import math
import os

# Index bits, MSB first, select the row. Entries are 1-based subcarrier
# indices within the subblock.
TABLE_4_2 = ((1, 3), (2, 4), (1, 4), (2, 3))
TABLE_4_3 = ((1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4))


def bpsk(bits):
    return complex(1 - 2 * bits[0], 0.0)


def qpsk(bits):
    return complex(1 - 2 * bits[0], 1 - 2 * bits[1]) / math.sqrt(2.0)


CASES = (
    (4, 2, "bpsk", TABLE_4_2, 1, bpsk),
    (4, 2, "qpsk", TABLE_4_2, 2, qpsk),
    (4, 3, "bpsk", TABLE_4_3, 1, bpsk),
    (4, 3, "qpsk", TABLE_4_3, 2, qpsk),
)


def fmt(z):
    return f"{z.real:.17g}{z.imag:+.17g}j"


def main():
    lines = []
    for n, k, mod_name, table, bps, mapper in CASES:
        p1 = 2  # both tables have 4 rows
        p = p1 + k * bps
        width = (p + 3) // 4
        lines.append(f"# n={n} k={k} mod={mod_name}")
        for value in range(1 << p):
            bits = [(value >> (p - 1 - i)) & 1 for i in range(p)]
            row = (bits[0] << 1) | bits[1]
            block = [complex(0.0, 0.0)] * n
            for j, idx in enumerate(table[row]):
                group = bits[p1 + j * bps : p1 + (j + 1) * bps]
                block[idx - 1] = mapper(group)
            entries = ", ".join(fmt(z) for z in block)
            lines.append(f"{value:0{width}x} -> {entries}")
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                       "subblock_golden.txt")
    with open(out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} lines to {out}")


if __name__ == "__main__":
    main()
