"""A small BER sweep: index modulation against the classical baseline.

Both schemes run at 2x2 BPSK, where they carry the same spectral
efficiency, so the curves are directly comparable. Error targets are kept
small here so the demo finishes in well under a minute; the CLI runs the
full-size version (see README).

Run: python3 demos/05_ber_sweep.py [--plot out.png]
"""

import argparse

from mimo_ofdm_im import SimulationConfig, run_sweep, spectral_efficiency

parser = argparse.ArgumentParser()
parser.add_argument("--plot", default=None, metavar="PNG",
                    help="also save a BER curve plot")
args = parser.parse_args()

snr = (0.0, 5.0, 10.0, 15.0, 20.0)
im_cfg = SimulationConfig(scheme="ofdm-im", detector="mmse-llr",
                          t=2, r=2, n=4, k=2, m_order=2, snr_db_list=snr,
                          min_bit_errors=100, max_frames=3000, seed=1)
cl_cfg = SimulationConfig(scheme="classical", detector="classical-mmse",
                          t=2, r=2, n=1, k=1, m_order=2, snr_db_list=snr,
                          min_bit_errors=100, max_frames=3000, seed=1)

print(f"spectral efficiency, both schemes: "
      f"{spectral_efficiency(im_cfg):.4f} bits/s/Hz")
print()

results = {}
for label, cfg in (("ofdm-im", im_cfg), ("classical", cl_cfg)):
    print(f"--- {label} ---")
    records = run_sweep(cfg, progress=lambda r: print(
        f"  {r.snr_db:5.1f} dB: ber {r.ber:.3e} "
        f"({r.errors} errors in {r.frames} frames, {r.status})"))
    results[label] = records
print()

print("snr_db   ofdm-im      classical")
for im_rec, cl_rec in zip(results["ofdm-im"], results["classical"]):
    print(f"{im_rec.snr_db:6.1f}   {im_rec.ber:.3e}    {cl_rec.ber:.3e}")

if args.plot:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, marker in (("ofdm-im", "o"), ("classical", "s")):
        recs = results[label]
        ax.semilogy([r.snr_db for r in recs], [max(r.ber, 1e-7) for r in recs],
                    marker=marker, label=label)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BER")
    ax.set_title("2x2 BPSK, equal spectral efficiency")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.plot, dpi=120)
    print(f"\nplot saved to {args.plot}")
