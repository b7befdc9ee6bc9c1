"""Command-line interface: BER sweeps, self-tests, look-up table printing.

Exit codes: 0 success, 2 configuration error, 3 numeric or self-test
failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .channel import add_noise, noise_spec, sample_channel, substream
from .constellation import CONSTELLATION_NAMES, make_constellation
from .detectors import BudgetExceededError, llr
from .index_mapper import SubblockParams, build_lookup, interleave, encode_frames
from .ofdm_phy import apply_channel_time, to_freq, to_time
from .sim import (
    DETECTORS,
    MOD_NAMES,
    SCHEMES,
    SimulationConfig,
    run_point,
    run_sweep,
    spectral_efficiency,
    write_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_MOD_ORDERS = {name: order for order, name in MOD_NAMES.items()}

_SWEEP_DEFAULTS = {
    "scheme": "ofdm-im",
    "detector": None,  # resolved from scheme
    "txrx": "2x2",
    "n": None,  # 4 for ofdm-im, 1 for classical
    "k": None,
    "mod": "bpsk",
    "snr": "0:5:40",
    "seed": 1,
    "min_errors": 200,
    "max_frames": 20000,
    "out": None,
    "workers": 1,
    "ml_budget": 1 << 20,
    "validation_path": False,
}


def _parse_txrx(text: str):
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ValueError(f"expected TxR like 2x2, got {text!r}")
    t, r = (int(p) for p in parts)
    return t, r


def _parse_snr(text: str):
    """Parse 'start:step:stop' (inclusive), a comma list, or one value."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected start:step:stop, got {text!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("snr step must be positive")
        values = []
        v = start
        while v <= stop + 1e-9:
            values.append(round(v, 9))
            v += step
        if not values:
            raise ValueError(f"empty snr range {text!r}")
        return values
    return [float(p) for p in text.split(",") if p.strip()]


def _read_config_file(path: str) -> dict:
    """key = value lines; '#' starts a comment; keys match the flag names."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in _SWEEP_DEFAULTS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value.strip()
    return values


_INT_KEYS = {"seed", "min_errors", "max_frames", "workers", "ml_budget", "n", "k"}
_FLAG_KEYS = {"validation_path"}


def _coerce(key: str, value):
    if isinstance(value, str):
        if key in _INT_KEYS:
            return int(value)
        if key in _FLAG_KEYS:
            low = value.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"expected a boolean for {key}, got {value!r}")
    return value


def _merge_settings(args) -> dict:
    """Explicit flags win over config-file entries, which win over defaults."""
    from_file = _read_config_file(args.config) if args.config else {}
    settings = {}
    for key, default in _SWEEP_DEFAULTS.items():
        explicit = getattr(args, key)
        if explicit is not None and explicit is not False:
            settings[key] = explicit
        elif key in from_file:
            settings[key] = _coerce(key, from_file[key])
        else:
            settings[key] = default
    return settings


def _build_config(settings: dict) -> tuple[SimulationConfig, list]:
    scheme = settings["scheme"]
    detector = settings["detector"]
    if detector is None:
        detector = "classical-mmse" if scheme == "classical" else "mmse-llr"
    n = settings["n"]
    k = settings["k"]
    if scheme == "classical":
        if (n not in (None, 1)) or (k not in (None, 1)):
            raise ValueError("classical scheme fixes n=1, k=1")
        n, k = 1, 1
    else:
        n = 4 if n is None else n
        k = 2 if k is None else k
    t, r = _parse_txrx(settings["txrx"])
    snr_list = _parse_snr(settings["snr"]) if isinstance(settings["snr"], str) else list(settings["snr"])
    if settings["mod"] not in _MOD_ORDERS:
        raise ValueError(
            f"unknown modulation {settings['mod']!r}, expected one of "
            f"{sorted(_MOD_ORDERS)}"
        )
    config = SimulationConfig(
        scheme=scheme,
        detector=detector,
        t=t,
        r=r,
        n=n,
        k=k,
        m_order=_MOD_ORDERS[settings["mod"]],
        snr_db_list=tuple(snr_list),
        min_bit_errors=settings["min_errors"],
        max_frames=settings["max_frames"],
        seed=settings["seed"],
        workers=settings["workers"],
        ml_budget=settings["ml_budget"],
        validation_path=settings["validation_path"],
    )
    return config, snr_list


def _cmd_sweep(args) -> int:
    settings = _merge_settings(args)
    config, _ = _build_config(settings)
    print(
        f"scheme={config.scheme} detector={config.detector} "
        f"T={config.t} R={config.r} N={config.n} K={config.k} M={config.m_order} "
        f"spectral_efficiency={spectral_efficiency(config):.6g} bits/s/Hz"
    )

    def show(record):
        print(
            f"snr_db={record.snr_db:g} ber={record.ber:.6g} "
            f"errors={record.errors} bits={record.bits} frames={record.frames} "
            f"status={record.status}"
        )

    records = run_sweep(config, out_path=settings["out"], progress=show)
    if settings["out"]:
        print(f"wrote {len(records)} records to {settings['out']}")
    return EXIT_OK


def format_table(table) -> str:
    """Fixed text rendering of a look-up table, one row per bit pattern."""
    prm = table.params
    header = ("bits", "indices", "subblock")
    rows = []
    for i, combo in enumerate(table.rows):
        bit_str = "[" + " ".join(format(i, f"0{prm.p1}b")) + "]" if prm.p1 else "[]"
        idx_str = "{" + ",".join(str(j) for j in combo) + "}"
        entries = ["0"] * prm.n
        for pos, j in enumerate(combo):
            entries[j - 1] = f"s{pos + 1}"
        rows.append((bit_str, idx_str, "[" + " ".join(entries) + "]"))
    widths = [max(len(row[c]) for row in rows + [header]) for c in range(3)]
    lines = [f"Reference Look-up Table for N={prm.n},K={prm.k}"]
    for row in [header] + rows:
        lines.append("  ".join(col.ljust(w) for col, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def _cmd_tables(args) -> int:
    params = SubblockParams(
        n_f=args.n,  # any multiple of n works; the table ignores frame size
        n=args.n,
        k=args.k,
        bits_per_symbol=1,
    )
    print(format_table(build_lookup(params)))
    return EXIT_OK


def _selftest_tables() -> str | None:
    expected = {
        (4, 2): ((1, 3), (2, 4), (1, 4), (2, 3)),
        (4, 3): ((1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)),
    }
    for (n, k), rows in expected.items():
        params = SubblockParams(n_f=n, n=n, k=k, bits_per_symbol=1)
        got = build_lookup(params).rows
        if got != rows:
            return f"({n},{k}) rows {got} != {rows}"
    return None


def _selftest_constellations() -> str | None:
    for name in CONSTELLATION_NAMES:
        c = make_constellation(name)
        energy = np.mean(np.abs(c.points) ** 2)
        if abs(energy - 1.0) > 1e-12:
            return f"{name} mean energy {energy}"
        for label in range(c.order):
            bits = [(label >> (c.bits_per_symbol - 1 - i)) & 1 for i in range(c.bits_per_symbol)]
            idx, dist = c.nearest(c.modulate(bits))
            if idx != label or dist > 1e-18:
                return f"{name} label {label} demapped to {idx}"
    return None


def _selftest_equivalence() -> str | None:
    params = SubblockParams(n_f=512, n=4, k=2, bits_per_symbol=1)
    table = build_lookup(params)
    constellation = make_constellation("bpsk")
    worst = 0.0
    for f in range(20):
        bits = substream(7, f, 0).integers(0, 2, size=(2, params.m), dtype=np.int8)
        chan = sample_channel(2, 2, 10, 512, substream(7, f, 1))
        x = interleave(encode_frames(bits, table, constellation), params.g, params.n)
        direct = np.einsum("tk,rtk->rk", x, chan.freq)
        rng = substream(7, f, 2)
        chained = to_freq(
            apply_channel_time(to_time(x, 16, params.active_per_frame), chan, 0.0, rng)
        )
        worst = max(worst, float(np.abs(chained - direct).max()))
    if worst >= 1e-9:
        return f"max deviation {worst:.3e}"
    return None


def _selftest_llr() -> str | None:
    """Compare against the density-ratio form evaluated in extended precision.

    Inputs are kept in a range where the direct (non-log) evaluation cannot
    underflow in float128, making it a fair independent reference.
    """
    rng = np.random.default_rng(11)
    constellation = make_constellation("qpsk")
    count = 2000
    x_hat = (rng.normal(size=count) + 1j * rng.normal(size=count)) * 0.8
    a_tt = (rng.normal(size=count) + 1j * rng.normal(size=count)) * 0.7
    var = rng.uniform(0.1, 2.0, size=count)
    got = llr(x_hat, a_tt, var, constellation)
    worst = 0.0
    for i in range(count):
        num = np.longdouble(0)
        for s in constellation.points:
            d2 = np.longdouble(abs(x_hat[i] - a_tt[i] * s) ** 2)
            num += np.exp(-d2 / np.longdouble(var[i]))
        den = np.exp(-np.longdouble(abs(x_hat[i]) ** 2) / np.longdouble(var[i]))
        expect = float(np.log(num / den))
        worst = max(worst, abs(got[i] - expect))
    if worst >= 1e-9:
        return f"max llr deviation {worst:.3e}"
    return None


def _selftest_noiseless() -> str | None:
    config = SimulationConfig(
        t=2, r=2, n=4, k=2, m_order=2, min_bit_errors=10**9, max_frames=50, seed=3
    )
    record = run_point(config, snr_db=120.0)
    if record.errors != 0:
        return f"{record.errors} bit errors at 120 dB"
    return None


def _cmd_selftest(args) -> int:
    checks = [
        ("lookup-tables", _selftest_tables),
        ("constellations", _selftest_constellations),
        ("time-frequency-equivalence", _selftest_equivalence),
        ("llr-oracle", _selftest_llr),
        ("noiseless-detection", _selftest_noiseless),
    ]
    failed = 0
    for name, check in checks:
        detail = check()
        if detail is None:
            print(f"PASS {name}")
        else:
            print(f"FAIL {name}: {detail}")
            failed += 1
    return EXIT_NUMERIC if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimo-ofdm-im",
        description="Link-level simulator for MIMO-OFDM with index modulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a Monte-Carlo BER sweep")
    sweep.add_argument("--scheme", choices=SCHEMES, default=None)
    sweep.add_argument("--detector", choices=DETECTORS, default=None)
    sweep.add_argument("--txrx", default=None, metavar="TxR", help="antennas, e.g. 2x2")
    sweep.add_argument("--n", type=int, default=None, help="subcarriers per subblock")
    sweep.add_argument("--k", type=int, default=None, help="active subcarriers per subblock")
    sweep.add_argument("--mod", choices=CONSTELLATION_NAMES, default=None)
    sweep.add_argument(
        "--snr", default=None, help="start:step:stop in dB (inclusive), or a comma list"
    )
    sweep.add_argument("--seed", type=int, default=None)
    sweep.add_argument("--min-errors", type=int, default=None, dest="min_errors")
    sweep.add_argument("--max-frames", type=int, default=None, dest="max_frames")
    sweep.add_argument("--out", default=None, help="CSV output path")
    sweep.add_argument("--workers", type=int, default=None)
    sweep.add_argument("--ml-budget", type=int, default=None, dest="ml_budget")
    sweep.add_argument(
        "--validation-path",
        action="store_true",
        default=False,
        dest="validation_path",
        help="simulate through the time-domain chain instead of the per-subcarrier model",
    )
    sweep.add_argument("--config", default=None, help="key = value settings file")
    sweep.set_defaults(run=_cmd_sweep)

    tables = sub.add_parser("tables", help="print a look-up table")
    tables.add_argument("--n", type=int, default=4)
    tables.add_argument("--k", type=int, default=2)
    tables.set_defaults(run=_cmd_tables)

    selftest = sub.add_parser("selftest", help="run the built-in consistency checks")
    selftest.set_defaults(run=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except BudgetExceededError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
