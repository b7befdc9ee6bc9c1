"""Link-level simulation of MIMO-OFDM with index modulation.

Transmitter (look-up-table index selection, block interleaving), a
frequency-selective Rayleigh MIMO channel, three receivers (MMSE-LLR,
joint ML, classical MMSE), and a reproducible Monte-Carlo BER engine.
"""

from .channel import (
    BITS_STREAM,
    CHANNEL_STREAM,
    NOISE_STREAM,
    MimoChannelRealization,
    NoiseSpec,
    add_noise,
    noise_spec,
    sample_channel,
    substream,
)
from .constellation import CONSTELLATION_NAMES, Constellation, make_constellation
from .detectors import (
    BudgetExceededError,
    CmCounter,
    MmseResult,
    SubblockDecision,
    SubcarrierModel,
    classical_mimo_ofdm_detect,
    cm_count,
    conditional_stats,
    decide_subblock,
    detect_frame_classical,
    detect_frame_joint_ml,
    detect_frame_mmse_llr,
    joint_ml_detect,
    llr,
    mmse_filter,
    regroup,
    subcarrier_mmse,
)
from .index_mapper import (
    IndexLookupTable,
    OfdmImFrame,
    SubblockParams,
    assemble_frame,
    build_lookup,
    decode_index_bits,
    deinterleave,
    encode_frames,
    encode_subblock,
    interleave,
    recover_bits,
)
from .ofdm_phy import TimeDomainFrame, apply_channel_time, to_freq, to_time
from .sim import (
    BerRecord,
    SimulationConfig,
    run_point,
    run_sweep,
    spectral_efficiency,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BITS_STREAM",
    "CHANNEL_STREAM",
    "NOISE_STREAM",
    "BerRecord",
    "BudgetExceededError",
    "CONSTELLATION_NAMES",
    "CmCounter",
    "Constellation",
    "IndexLookupTable",
    "MimoChannelRealization",
    "MmseResult",
    "NoiseSpec",
    "OfdmImFrame",
    "SimulationConfig",
    "SubblockDecision",
    "SubblockParams",
    "SubcarrierModel",
    "TimeDomainFrame",
    "add_noise",
    "apply_channel_time",
    "assemble_frame",
    "build_lookup",
    "classical_mimo_ofdm_detect",
    "cm_count",
    "conditional_stats",
    "decide_subblock",
    "decode_index_bits",
    "deinterleave",
    "detect_frame_classical",
    "detect_frame_joint_ml",
    "detect_frame_mmse_llr",
    "encode_frames",
    "encode_subblock",
    "interleave",
    "joint_ml_detect",
    "llr",
    "make_constellation",
    "mmse_filter",
    "noise_spec",
    "recover_bits",
    "regroup",
    "run_point",
    "run_sweep",
    "sample_channel",
    "spectral_efficiency",
    "subcarrier_mmse",
    "substream",
    "to_freq",
    "to_time",
    "write_csv",
]
