"""Serial belief-propagation list decoding of polar codes over permuted
factor graphs: permutation decomposition, offset-min-sum BP, clock-cycle
latency model, greedy graph-list selection, and a Monte-Carlo harness.
"""
from .bp import (BpConfig, BpOutcome, bp_decode, bp_decode_batch,
                 frozen_prior_value, g_oms)
from .bpl import (AttemptRecord, BplOutcome, PfgList, bpl_decode,
                  bpl_decode_batch, iavg_parallel, load_pfg_list,
                  schedule_latency, shuffle_priors)
from .channel import (ChannelParams, Q7_2, Quantizer, channel_llr,
                      noise_sigma, quantize, simulate_frames, transmit)
from .harness import (BlerPoint, ConfigError, ExperimentConfig, perm_selftest,
                      run_bler, run_latency_census, run_sg)
from .permutation import (LatencyCensus, ShufflePlan, apply_plan, decompose,
                          index_map_oracle, invert_plan, latency_census,
                          read_pfg_list, sub_shuffle, write_pfg_list)
from .polar import (CRC11_POLY, CodeSpec, ReliabilitySequence, build_code,
                    crc_attach, crc_check, encode, gaussian_construct,
                    load_sequence, nr_sequence_1024, polar_transform)
from .selection import (FailureDataset, SelectionConfig, SgResult,
                        enumerate_pfgs, gen_dataset, load_dataset,
                        save_dataset, sg_run)

__version__ = "0.1.0"

__all__ = [
    "AttemptRecord", "BlerPoint", "BpConfig", "BpOutcome", "BplOutcome",
    "CRC11_POLY", "ChannelParams", "CodeSpec", "ConfigError",
    "ExperimentConfig", "FailureDataset", "LatencyCensus", "PfgList",
    "Q7_2", "Quantizer", "ReliabilitySequence", "SelectionConfig",
    "SgResult", "ShufflePlan", "apply_plan", "bp_decode", "bp_decode_batch",
    "bpl_decode", "bpl_decode_batch", "build_code", "channel_llr",
    "crc_attach", "crc_check", "decompose", "encode", "enumerate_pfgs",
    "frozen_prior_value", "g_oms", "gaussian_construct", "gen_dataset",
    "iavg_parallel", "index_map_oracle", "invert_plan", "latency_census",
    "load_dataset", "load_pfg_list", "load_sequence", "noise_sigma",
    "nr_sequence_1024", "perm_selftest", "polar_transform", "quantize",
    "read_pfg_list", "run_bler", "run_latency_census", "run_sg",
    "save_dataset", "schedule_latency", "sg_run", "shuffle_priors",
    "simulate_frames", "sub_shuffle", "transmit", "write_pfg_list",
    "__version__",
]
