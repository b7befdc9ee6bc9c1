"""One noisy frame through both detectors, slowly.

Sends a single 2x2 frame at 12 dB, then walks one subblock through the
MMSE-LLR pipeline stage by stage: filter, conditional statistics,
per-subcarrier activity LLRs, index decision, symbol decisions. Ends by
comparing the whole frame's decisions against the joint-ML search and
the transmitted truth.

Run: python3 demos/04_detection_walkthrough.py
"""

import numpy as np

from mimo_ofdm_im import (
    CmCounter,
    SubblockParams,
    add_noise,
    build_lookup,
    cm_count,
    decide_subblock,
    detect_frame_joint_ml,
    detect_frame_mmse_llr,
    encode_frames,
    interleave,
    llr,
    make_constellation,
    noise_spec,
    regroup,
    sample_channel,
    subcarrier_mmse,
    substream,
)

prm = SubblockParams(n_f=64, n=4, k=2, bits_per_symbol=1)
table = build_lookup(prm)
bpsk = make_constellation("bpsk")
noise = noise_spec(12.0, prm.n_f, 16, prm.m, prm.k, prm.g)

seed, frame = 11, 0
bits = substream(seed, frame, 0).integers(0, 2, size=(2, prm.m))
chan = sample_channel(2, 2, 5, prm.n_f, substream(seed, frame, 1))
x = interleave(encode_frames(bits, table, bpsk), prm.g, prm.n)
clean = np.einsum("rtk,tk->rk", chan.freq, x)
received = add_noise(clean, noise.n0_f, substream(seed, frame, 2))

print(f"12 dB, 2x2, N_F={prm.n_f}: E_b={noise.e_b:.4f}, "
      f"N0_F={noise.n0_f:.4f}, rho={noise.rho:.2f}")
print()

print("=== subblock 1, antenna 1, stage by stage ===")
models = regroup(received, chan, prm)
lam = np.empty(prm.n)
x_hat = np.empty(prm.n, dtype=complex)
a_tt = np.empty(prm.n, dtype=complex)
var = np.empty(prm.n)
for i, model in enumerate(models[: prm.n]):
    res = subcarrier_mmse(model, noise)
    x_hat[i] = res.z[0]
    a_tt[i] = res.a[0, 0]
    var[i] = res.diag_cov[0]
    lam[i] = llr(x_hat[i], a_tt[i], var[i], bpsk)
    sent = x[0, (i) * prm.g]  # subcarrier i+1 of subblock 1, antenna 1
    print(f"  n={i + 1}: sent {sent.real:+.0f}  estimate {x_hat[i]:+.3f}  "
          f"gain {abs(a_tt[i]):.3f}  var {var[i]:.3f}  llr {lam[i]:+7.2f}")

decision = decide_subblock(lam, table, x_hat, a_tt, var, bpsk)
print(f"per-row sums {np.round(decision.sums, 2)} -> "
      f"active set {set(decision.active_set)}, "
      f"symbols {1 - 2 * decision.symbol_indices}")
truth = x[0, np.arange(prm.n) * prm.g]
print(f"truth: active {set((np.flatnonzero(truth != 0) + 1).tolist())}, "
      f"values {np.round(truth.real, 0)}")
print()

print("=== whole frame, both detectors ===")
counter = CmCounter()
out_llr = detect_frame_mmse_llr(received, chan, noise, table, bpsk, counter)
out_ml = detect_frame_joint_ml(received, chan, table, bpsk)
print(f"mmse-llr bit errors: {int(np.sum(out_llr != bits))} / {bits.size}")
print(f"joint-ml bit errors: {int(np.sum(out_ml != bits))} / {bits.size}")
print(f"mmse-llr complexity: {counter.total / prm.n_f:.0f} complex "
      f"multiplications per subcarrier "
      f"(closed form {cm_count(2, 2, 2, 'ofdm-im')})")
print(f"joint-ml hypotheses per subblock: "
      f"{(table.size * bpsk.order ** prm.k) ** 2}")
