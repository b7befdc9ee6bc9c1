"""Receivers for the index-modulated MIMO-OFDM link.

All three detectors work on the per-subcarrier model obtained after block
deinterleaving: y = H x + w with H of shape R x T.

- MMSE-LLR: linear MMSE filtering, per-subcarrier activity LLRs, look-up
  table index decisions per subblock, then per-symbol nearest-point
  demapping. Near-ML with complexity independent of the table size.
- Joint ML: exhaustive minimization over every legal T-tuple of subblock
  realizations. Optimal and exponentially expensive, so budget-guarded;
  used as the performance oracle.
- Classical MMSE: the plain MIMO-OFDM baseline, every subcarrier carrying
  one symbol (sigma_x2 = 1).

An optional CmCounter tallies complex multiplications actually executed by
the MMSE paths for comparison against the closed-form per-subcarrier
counts of cm_count(). Accounting convention: every elementwise product
with complex operands (including real-scalar scalings of complex arrays)
counts 1; each T x T linear solve with R right-hand sides is charged the
textbook T^3 + T^2*R; squared magnitudes and additions evaluated in real
arithmetic are free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .channel import MimoChannelRealization, NoiseSpec
from .constellation import Constellation
from .index_mapper import IndexLookupTable, SubblockParams, deinterleave, recover_bits

__all__ = [
    "BudgetExceededError",
    "CmCounter",
    "SubcarrierModel",
    "MmseResult",
    "SubblockDecision",
    "regroup",
    "mmse_filter",
    "conditional_stats",
    "llr",
    "decide_subblock",
    "subcarrier_mmse",
    "joint_ml_detect",
    "classical_mimo_ofdm_detect",
    "cm_count",
    "detect_frame_mmse_llr",
    "detect_frame_joint_ml",
    "detect_frame_classical",
]

DEFAULT_ML_BUDGET = 1 << 20


class BudgetExceededError(RuntimeError):
    """Joint-ML hypothesis count exceeds the configured budget."""


class CmCounter:
    """Tally of complex multiplications, keyed by pipeline stage."""

    def __init__(self):
        self.counts: dict[str, int] = {}

    def add(self, stage: str, count: int) -> None:
        self.counts[stage] = self.counts.get(stage, 0) + int(count)

    def merge(self, other: "CmCounter") -> None:
        """Fold another worker's tally into this one. Order-independent."""
        for stage, count in other.counts.items():
            self.add(stage, count)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __repr__(self):
        return f"CmCounter(total={self.total}, counts={self.counts!r})"


@dataclass(frozen=True, eq=False)
class SubcarrierModel:
    """Deinterleaved model of one subcarrier: y = h x + w.

    n, g are 1-based positions (subcarrier n of subblock g); y has length
    R and h is R x T with column t the gain from transmit antenna t.
    """

    n: int
    g: int
    y: np.ndarray
    h: np.ndarray


@dataclass(frozen=True, eq=False)
class MmseResult:
    """Filter output and conditional statistics for one subcarrier.

    w: T x R filter; z: length-T estimates; a: T x T mixing matrix W*H;
    diag_cov: the T conditional variances (diagonal of cov(z) with the
    desired stream's own contribution removed).
    """

    w: np.ndarray
    z: np.ndarray
    a: np.ndarray
    diag_cov: np.ndarray


@dataclass(frozen=True, eq=False)
class SubblockDecision:
    """Detected content of one subblock for one transmit antenna.

    symbol_indices follow ascending active-index order. llrs and sums are
    populated by the LLR detector and None for joint ML, which never forms
    per-subcarrier scores.
    """

    combination_index: int
    active_set: tuple
    symbol_indices: np.ndarray
    llrs: np.ndarray | None = None
    sums: np.ndarray | None = None


def _deinterleaved_arrays(received, chan: MimoChannelRealization, params: SubblockParams):
    """Batched deinterleaving of received rows and channel responses.

    Returns (y_de, h_de) with shapes (N_F, R) and (N_F, R, T), indexed by
    deinterleaved position q = (g-1)*N + (n-1).
    """
    received = np.asarray(received)
    if received.shape != (chan.r, params.n_f):
        raise ValueError(
            f"expected received shape {(chan.r, params.n_f)}, got {received.shape}"
        )
    y_de = deinterleave(received, params.g, params.n).T
    h_de = np.moveaxis(deinterleave(chan.freq, params.g, params.n), -1, 0)
    return y_de, h_de


def regroup(received, chan: MimoChannelRealization, params: SubblockParams):
    """Split R received frames into N*G per-subcarrier models.

    The same deinterleaving permutation is applied to the received vectors
    and to every channel response, so model (n, g) holds exactly the gains
    that multiplied subblock g's n-th entry at the transmitter. Models are
    returned in deinterleaved order (g outer, n inner).
    """
    y_de, h_de = _deinterleaved_arrays(received, chan, params)
    return [
        SubcarrierModel(n=q % params.n + 1, g=q // params.n + 1, y=y_de[q], h=h_de[q])
        for q in range(params.n_f)
    ]


def _leading(shape) -> int:
    count = 1
    for s in shape:
        count *= int(s)
    return count


def mmse_filter(h, rho: float, counter: CmCounter | None = None) -> np.ndarray:
    """MMSE filter W = (H^H H + I/rho)^{-1} H^H, batched over leading axes.

    h: (..., R, T); returns (..., T, R). Uses a linear solve on the
    regularized Gram matrix rather than an explicit inverse; the ridge
    I/rho keeps the system positive definite for any finite rho > 0.
    """
    h = np.asarray(h, dtype=np.complex128)
    if not np.isfinite(rho) or rho <= 0:
        raise ValueError(f"rho must be positive and finite, got {rho}")
    if not np.isfinite(h).all():
        raise ArithmeticError("channel matrix has non-finite entries")
    t = h.shape[-1]
    r = h.shape[-2]
    batch = _leading(h.shape[:-2])
    h_h = np.conj(np.swapaxes(h, -1, -2))
    gram = h_h @ h
    gram[..., np.arange(t), np.arange(t)] += 1.0 / rho
    w = np.linalg.solve(gram, h_h)
    if not np.isfinite(w).all():
        raise ArithmeticError("MMSE filter produced non-finite entries")
    if counter is not None:
        counter.add("filter_gram", t * t * r * batch)
        counter.add("filter_solve", (t**3 + t * t * r) * batch)
    return w


def conditional_stats(w, h, n0_f: float, sigma_x2: float, counter: CmCounter | None = None):
    """Mixing matrix A = W H and per-stream conditional variances.

    For stream t the variance treats the other T-1 streams as Gaussian
    interference of power sigma_x2 each:

        diag_cov[t] = sigma_x2 * (sum_j |A[t,j]|^2 - |A[t,t]|^2)
                      + n0_f * sum_r |W[t,r]|^2

    computed via the full covariance products (sigma_x2 A) A^H and
    (n0_f W) W^H. Batched over leading axes.
    """
    w = np.asarray(w)
    h = np.asarray(h)
    t = w.shape[-2]
    r = w.shape[-1]
    batch = _leading(w.shape[:-2])
    a = w @ h
    a_scaled = sigma_x2 * a
    sig_full = a_scaled @ np.conj(np.swapaxes(a, -1, -2))
    a_diag = np.einsum("...tt->...t", a)
    self_term = (np.einsum("...tt->...t", a_scaled) * np.conj(a_diag)).real
    w_scaled = n0_f * w
    noise_full = w_scaled @ np.conj(np.swapaxes(w, -1, -2))
    sig = np.einsum("...tt->...t", sig_full).real - self_term
    # Cancellation guard: the interference power is >= 0 by construction.
    diag_cov = np.maximum(sig, 0.0) + np.einsum("...tt->...t", noise_full).real
    if counter is not None:
        counter.add("stats_mix", t * t * r * batch)
        counter.add("stats_signal_scale", t * t * batch)
        counter.add("stats_signal_cov", t**3 * batch)
        counter.add("stats_self_term", t * batch)
        counter.add("stats_noise_scale", t * r * batch)
        counter.add("stats_noise_cov", t * t * r * batch)
    return a, diag_cov


def subcarrier_mmse(
    model: SubcarrierModel,
    noise: NoiseSpec,
    counter: CmCounter | None = None,
) -> MmseResult:
    """Filter one subcarrier and collect its conditional statistics."""
    w = mmse_filter(model.h, noise.rho, counter)
    z = w @ model.y
    if counter is not None:
        counter.add("estimate", w.shape[-2] * w.shape[-1])
    a, diag_cov = conditional_stats(w, model.h, noise.n0_f, noise.sigma_x2, counter)
    return MmseResult(w=w, z=z, a=a, diag_cov=diag_cov)


def llr(
    x_hat,
    a_tt,
    var,
    constellation: Constellation,
    counter: CmCounter | None = None,
    return_metrics: bool = False,
):
    """Activity log-likelihood ratio of subcarrier estimates.

        lambda = ln sum_m exp(-|x_hat - a_tt s_m|^2 / var) + |x_hat|^2 / var

    Positive means "some symbol was sent here", negative means "this
    subcarrier was silent". The log-sum is evaluated with max-subtraction
    so nothing overflows; the standalone energy term may legitimately be
    large (up to ~1e4 at high SNR) and is kept at full precision.

    Broadcasts over any common leading shape of x_hat, a_tt, var. With
    return_metrics=True also returns the squared distances
    |x_hat - a_tt s_m|^2 of shape (..., M) so symbol demapping can reuse
    them without new multiplications.
    """
    scalar = np.ndim(x_hat) == 0 and np.ndim(a_tt) == 0 and np.ndim(var) == 0
    x_hat = np.asarray(x_hat, dtype=np.complex128)
    a_tt = np.asarray(a_tt, dtype=np.complex128)
    var = np.asarray(var, dtype=np.float64)
    if (var <= 0).any():
        raise ArithmeticError("llr variance must be positive")
    scaled = a_tt[..., None] * constellation.points
    diff = x_hat[..., None] - scaled
    d2 = diff.real**2 + diff.imag**2
    energy = (x_hat * np.conj(x_hat)).real
    lam = logsumexp(-d2 / var[..., None], axis=-1) + energy / var
    if counter is not None:
        counter.add("llr_points", scaled.size)
        counter.add("llr_energy", x_hat.size)
    if scalar and not return_metrics:
        return float(lam)
    return (lam, d2) if return_metrics else lam


def decide_subblock(
    lam,
    table: IndexLookupTable,
    x_hat,
    a_tt,
    var,
    constellation: Constellation,
    metrics=None,
) -> SubblockDecision:
    """Index and symbol decisions for one subblock of one antenna.

    d(c) = sum of lam over combination c's indices; the winner is the
    largest sum, ties to the smallest c. Symbols are the nearest scaled
    constellation points at the winning indices, reusing the squared
    distances already computed for the LLRs when supplied via metrics
    (ties to the lowest symbol index). The result's active set is a table
    row by construction, so index bits always decode.
    """
    prm = table.params
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != (prm.n,):
        raise ValueError(f"expected {prm.n} llr values, got shape {lam.shape}")
    sums = lam[table.combos0].sum(axis=-1)
    c_hat = int(sums.argmax())
    active0 = table.combos0[c_hat]
    if metrics is None:
        x_hat = np.asarray(x_hat, dtype=np.complex128)
        a_tt = np.asarray(a_tt, dtype=np.complex128)
        diff = x_hat[..., None] - a_tt[..., None] * constellation.points
        metrics = diff.real**2 + diff.imag**2
    symbol_indices = np.asarray(metrics)[active0].argmin(axis=-1)
    return SubblockDecision(
        combination_index=c_hat,
        active_set=table.rows[c_hat],
        symbol_indices=symbol_indices,
        llrs=lam,
        sums=sums,
    )


def _subblock_candidates(table: IndexLookupTable, constellation: Constellation) -> np.ndarray:
    """All C*M^K legal subblock realizations, indexed q = c*M^K + digits.

    The symbol digits are base-M with the first (smallest) active index
    most significant. Row q is the length-N complex subblock vector.
    """
    prm = table.params
    m_order = constellation.order
    n_sym = m_order**prm.k
    digit_grid = np.stack(
        np.unravel_index(np.arange(n_sym), (m_order,) * prm.k), axis=-1
    )
    symbols = constellation.points[digit_grid]  # (M^K, K)
    cands = np.zeros((table.size, n_sym, prm.n), dtype=np.complex128)
    idx = np.broadcast_to(table.combos0[:, None, :], (table.size, n_sym, prm.k))
    np.put_along_axis(cands, idx, np.broadcast_to(symbols, idx.shape), axis=2)
    return cands.reshape(table.size * n_sym, prm.n)


def _joint_ml_arrays(
    y_sb,
    h_sb,
    table: IndexLookupTable,
    constellation: Constellation,
    budget: int = DEFAULT_ML_BUDGET,
):
    """Exhaustive joint-ML search, batched over subblocks.

    y_sb: (G, N, R); h_sb: (G, N, R, T). Returns (q_best, metric_best)
    where q_best is (T, G) per-antenna candidate indices and metric_best
    the (G,) minimal metrics. Hypothesis tuples are scanned in ascending
    lexicographic order and ties keep the first winner.
    """
    g_count, n, r, t = h_sb.shape
    m_order = constellation.order
    q_count = table.size * m_order**table.params.k
    total = q_count**t
    if total > budget:
        raise BudgetExceededError(
            f"joint ML would enumerate {total} hypotheses per subblock, "
            f"budget is {budget}"
        )
    cands = _subblock_candidates(table, constellation)
    # contrib[t, q, g, n, r]: what antenna t contributes to subcarrier (g, n)
    # at receive antenna r under its candidate q.
    contrib = np.einsum("gnrt,qn->tqgnr", h_sb, cands)
    best_metric = np.full(g_count, np.inf)
    best_idx = np.zeros(g_count, dtype=np.int64)
    chunk = max(1, (1 << 21) // (g_count * n * r))
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        digits = np.unravel_index(idx, (q_count,) * t)
        acc = contrib[0][digits[0]]
        for ti in range(1, t):
            acc = acc + contrib[ti][digits[ti]]
        resid = y_sb[None, ...] - acc
        metric = (resid.real**2 + resid.imag**2).sum(axis=(-1, -2))
        pos = metric.argmin(axis=0)
        val = metric[pos, np.arange(g_count)]
        better = val < best_metric
        best_metric = np.where(better, val, best_metric)
        best_idx = np.where(better, idx[pos], best_idx)
    q_best = np.stack(np.unravel_index(best_idx, (q_count,) * t))
    return q_best, best_metric


def _split_candidate_index(q, table: IndexLookupTable, m_order: int):
    """Candidate index -> (combination index, symbol digits along last axis)."""
    k = table.params.k
    n_sym = m_order**k
    c = q // n_sym
    digits = np.stack(np.unravel_index(q % n_sym, (m_order,) * k), axis=-1)
    return c, digits


def joint_ml_detect(
    models,
    table: IndexLookupTable,
    constellation: Constellation,
    budget: int = DEFAULT_ML_BUDGET,
):
    """Jointly optimal detection of one subblock across all T antennas.

    models: the N SubcarrierModels of one subblock, in ascending n order.
    Minimizes the squared residual over every T-tuple of legal subblock
    realizations; (C*M^K)^T tuples must fit the budget. Returns one
    SubblockDecision per transmit antenna (llrs/sums are None: the search
    never forms per-subcarrier scores).
    """
    prm = table.params
    if len(models) != prm.n:
        raise ValueError(f"expected {prm.n} models, got {len(models)}")
    y_sb = np.stack([m.y for m in models])[None]  # (1, N, R)
    h_sb = np.stack([m.h for m in models])[None]  # (1, N, R, T)
    q_best, _ = _joint_ml_arrays(y_sb, h_sb, table, constellation, budget)
    c_all, digits_all = _split_candidate_index(q_best[:, 0], table, constellation.order)
    return [
        SubblockDecision(
            combination_index=int(c_all[ti]),
            active_set=table.rows[int(c_all[ti])],
            symbol_indices=digits_all[ti],
        )
        for ti in range(h_sb.shape[-1])
    ]


def _classical_arrays(y, h, n0_f: float, constellation: Constellation, counter=None):
    """Batched classical MMSE demapping: (B, R), (B, R, T) -> (B, T) indices."""
    w = mmse_filter(h, 1.0 / n0_f, counter)
    t = w.shape[-2]
    r = w.shape[-1]
    batch = _leading(w.shape[:-2])
    z = np.einsum("...tr,...r->...t", w, y)
    a_diag = np.einsum("...tr,...rt->...t", w, h)
    scaled = a_diag[..., None] * constellation.points
    diff = z[..., None] - scaled
    d2 = diff.real**2 + diff.imag**2
    if counter is not None:
        counter.add("estimate", t * r * batch)
        counter.add("stats_mix_diag", t * r * batch)
        counter.add("symbol_points", t * constellation.order * batch)
    return d2.argmin(axis=-1), z, a_diag


def classical_mimo_ofdm_detect(
    models,
    constellation: Constellation,
    n0_f: float,
    counter: CmCounter | None = None,
) -> np.ndarray:
    """Classical MIMO-OFDM per-subcarrier MMSE symbol decisions.

    Every subcarrier carries one symbol per antenna at unit power, so
    rho = 1/n0_f. Estimates are compared against A_tt-scaled points, the
    same biased-MMSE metric the index-modulated detector uses, which keeps
    the baseline comparison fair. Returns (len(models), T) symbol indices.
    """
    y = np.stack([m.y for m in models])
    h = np.stack([m.h for m in models])
    idx, _, _ = _classical_arrays(y, h, n0_f, constellation, counter)
    return idx


def cm_count(t: int, r: int, m_order: int, scheme: str) -> int:
    """Closed-form complex multiplications per subcarrier, per receiver.

    "ofdm-im" covers the MMSE-LLR detector of the index-modulated scheme;
    "classical" the plain MIMO-OFDM MMSE baseline.
    """
    if scheme == "ofdm-im":
        return 2 * t**3 + 5 * t * t * r + t * (r + m_order + 1)
    if scheme == "classical":
        return t**3 + 2 * t * t * r + t * (r + m_order)
    raise ValueError(f"unknown scheme {scheme!r}")


def detect_frame_mmse_llr(
    received,
    chan: MimoChannelRealization,
    noise: NoiseSpec,
    table: IndexLookupTable,
    constellation: Constellation,
    counter: CmCounter | None = None,
) -> np.ndarray:
    """MMSE-LLR detection of one frame. Returns (T, m) recovered bits.

    Vectorizes the per-subcarrier pipeline over all N_F subcarriers, then
    makes per-subblock index decisions and per-symbol decisions exactly as
    decide_subblock does.
    """
    prm = table.params
    y_de, h_de = _deinterleaved_arrays(received, chan, prm)
    t = chan.t
    w = mmse_filter(h_de, noise.rho, counter)
    z = np.einsum("ktr,kr->kt", w, y_de)
    if counter is not None:
        counter.add("estimate", t * chan.r * prm.n_f)
    a, diag_cov = conditional_stats(w, h_de, noise.n0_f, noise.sigma_x2, counter)
    a_diag = np.einsum("ktt->kt", a)
    lam, d2 = llr(z, a_diag, diag_cov, constellation, counter, return_metrics=True)
    lam_t = lam.T.reshape(t, prm.g, prm.n)
    sums = lam_t[:, :, table.combos0].sum(axis=-1)  # (T, G, C)
    c_hat = sums.argmax(axis=-1)  # (T, G)
    active0 = table.combos0[c_hat]  # (T, G, K)
    d2_t = np.moveaxis(d2, 1, 0).reshape(t, prm.g, prm.n, -1)
    nearest_all = d2_t.argmin(axis=-1)  # (T, G, N)
    symbol_idx = np.take_along_axis(nearest_all, active0, axis=-1)
    return np.stack(
        [recover_bits(c_hat[ti], symbol_idx[ti], table, constellation) for ti in range(t)]
    )


def detect_frame_joint_ml(
    received,
    chan: MimoChannelRealization,
    table: IndexLookupTable,
    constellation: Constellation,
    budget: int = DEFAULT_ML_BUDGET,
) -> np.ndarray:
    """Joint-ML detection of one frame. Returns (T, m) recovered bits."""
    prm = table.params
    y_de, h_de = _deinterleaved_arrays(received, chan, prm)
    y_sb = y_de.reshape(prm.g, prm.n, chan.r)
    h_sb = h_de.reshape(prm.g, prm.n, chan.r, chan.t)
    q_best, _ = _joint_ml_arrays(y_sb, h_sb, table, constellation, budget)
    c_hat, digits = _split_candidate_index(q_best, table, constellation.order)
    return np.stack(
        [recover_bits(c_hat[ti], digits[ti], table, constellation) for ti in range(chan.t)]
    )


def detect_frame_classical(
    received,
    chan: MimoChannelRealization,
    noise: NoiseSpec,
    constellation: Constellation,
    counter: CmCounter | None = None,
) -> np.ndarray:
    """Classical MIMO-OFDM MMSE detection. Returns (T, N_F*log2 M) bits."""
    y = np.asarray(received).T  # (N_F, R)
    h = np.moveaxis(chan.freq, -1, 0)  # (N_F, R, T)
    idx, _, _ = _classical_arrays(y, h, noise.n0_f, constellation, counter)
    bits = constellation.bits_of(idx)  # (N_F, T, bps)
    t = chan.t
    return np.moveaxis(bits, 1, 0).reshape(t, -1)
