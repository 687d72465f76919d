"""Greedy selection of a decoding-graph list from a failure dataset.

A dataset of frames that plain BP fails to decode is evaluated against
every candidate stage permutation; a bit table records which candidate
fails which frame.  The list is grown greedily: pick the candidate with
the fewest remaining failures, drop the frames it corrects, repeat.  The
per-step ratio of chosen-row weight to surviving frame count estimates
the conditional failure probability given that all earlier graphs failed.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .bp import BpConfig, bp_decode_batch
from .bpl import PfgList, shuffle_priors
from .channel import ChannelParams, simulate_frames
from .permutation import apply_plan, decompose, invert_plan
from .polar import CodeSpec, code_id, crc_check_batch

__all__ = [
    "FailureDataset",
    "FailureTable",
    "SelectionConfig",
    "SgResult",
    "bp_evaluate",
    "enumerate_pfgs",
    "gen_dataset",
    "load_dataset",
    "save_dataset",
    "select_best_list",
    "sg_run",
    "update_dataset",
]


@dataclass(frozen=True)
class SelectionConfig:
    p: int                      # stage labels 0..p-1 stay in place
    list_size: int
    dataset_size: int
    snr_db: float
    seed: int
    bp: BpConfig
    max_frames: int = 10_000_000

    def __post_init__(self):
        if self.list_size < 1:
            raise ValueError("list_size must be >= 1")
        if self.dataset_size < 1:
            raise ValueError("dataset_size must be >= 1")


@dataclass(frozen=True)
class FailureDataset:
    """Channel-LLR frames that failed CRC detection under plain BP, with truth."""

    llrs: np.ndarray   # (F, N) float64, already quantized when applicable
    msgs: np.ndarray   # (F, K) uint8
    code_id: str
    snr_db: float
    seed: int
    quantizer: str     # e.g. "Q7.2" or "float"

    @property
    def size(self) -> int:
        return self.llrs.shape[0]


def save_dataset(ds: FailureDataset, path) -> None:
    np.savez_compressed(
        path, llrs=ds.llrs, msgs=ds.msgs,
        code_id=np.array(ds.code_id), snr_db=np.array(ds.snr_db),
        seed=np.array(ds.seed, dtype=np.uint64), quantizer=np.array(ds.quantizer),
    )


def load_dataset(path) -> FailureDataset:
    with np.load(path, allow_pickle=False) as z:
        return FailureDataset(
            llrs=z["llrs"], msgs=z["msgs"],
            code_id=str(z["code_id"]), snr_db=float(z["snr_db"]),
            seed=int(z["seed"]), quantizer=str(z["quantizer"]),
        )


def _quantizer_name(bp_cfg: BpConfig) -> str:
    q = bp_cfg.quantizer
    return f"Q{q.q_total}.{q.q_frac}" if q is not None else "float"


def _failing_frames(llrs, code, bp_cfg) -> np.ndarray:
    res = bp_decode_batch(llrs, code.frozen_mask, bp_cfg)
    payload = res.hd[:, ~code.frozen_mask]
    return ~crc_check_batch(payload, code.crc_poly)


def gen_dataset(
    code: CodeSpec,
    config: SelectionConfig,
    batch: int = 2000,
) -> FailureDataset:
    """Simulate frames at the configured SNR, keeping the BP-CRC failures."""
    params = ChannelParams(snr_db=config.snr_db, rate=code.K / code.N,
                           seed=config.seed)
    kept_llrs, kept_msgs, collected = [], [], 0
    next_frame = 0
    while collected < config.dataset_size:
        if next_frame >= config.max_frames:
            raise RuntimeError(
                f"collected only {collected}/{config.dataset_size} failures "
                f"after {next_frame} frames; SNR too high?")
        idx = np.arange(next_frame, min(next_frame + batch, config.max_frames))
        next_frame = int(idx[-1]) + 1
        fb = simulate_frames(code, params, idx, quantizer=config.bp.quantizer)
        fail = _failing_frames(fb.llrs, code, config.bp)
        kept_llrs.append(fb.llrs[fail])
        kept_msgs.append(fb.msgs[fail])
        collected += int(fail.sum())
    llrs = np.concatenate(kept_llrs)[:config.dataset_size]
    msgs = np.concatenate(kept_msgs)[:config.dataset_size]
    return FailureDataset(llrs=llrs, msgs=msgs, code_id=code_id(code),
                          snr_db=config.snr_db, seed=config.seed,
                          quantizer=_quantizer_name(config.bp))


def enumerate_pfgs(n: int, p: int) -> list[tuple[int, ...]]:
    """All stage orders fixing stages 0..p-1, lexicographic, identity first."""
    if not (0 <= p <= n):
        raise ValueError(f"p={p} outside 0..{n}")
    if n - p > 10:
        raise ValueError(f"(n-p)! with n-p={n - p} is too large to enumerate")
    head = tuple(range(p))
    return [head + tail for tail in itertools.permutations(range(p, n))]


def bp_evaluate(
    pfg,
    dataset: FailureDataset,
    code: CodeSpec,
    bp_cfg: BpConfig,
) -> np.ndarray:
    """Failure row of one candidate: True where its decode fails the CRC."""
    plan = decompose(pfg)
    res = bp_decode_batch(invert_plan(dataset.llrs, plan),
                          shuffle_priors(code, plan), bp_cfg)
    payload = apply_plan(res.hd, plan)[:, ~code.frozen_mask]
    return ~crc_check_batch(payload, code.crc_poly)


@dataclass
class FailureTable:
    """Candidate-by-frame failure bits plus the rows already taken."""

    rows: np.ndarray                 # (C, F) bool
    excluded: np.ndarray             # (C,) bool

    @classmethod
    def build(cls, candidates, dataset, code, bp_cfg) -> "FailureTable":
        rows = np.stack([bp_evaluate(pi, dataset, code, bp_cfg)
                         for pi in candidates])
        excluded = np.zeros(rows.shape[0], dtype=bool)
        excluded[0] = True  # identity is always list position 0, never a pick
        return cls(rows=rows, excluded=excluded)


def select_best_list(table: FailureTable) -> int:
    """Index of the lowest-weight non-excluded row; ties go to the lowest index."""
    if table.excluded.all():
        raise ValueError("all candidate rows are excluded")
    weights = table.rows.sum(axis=1).astype(np.int64)
    weights[table.excluded] = np.iinfo(np.int64).max
    return int(np.argmin(weights))


def update_dataset(
    table: FailureTable,
    dataset: FailureDataset,
    chosen: int,
) -> tuple[FailureTable, FailureDataset]:
    """Drop every frame (column) that the chosen candidate corrects."""
    keep = table.rows[chosen]
    new_table = FailureTable(rows=table.rows[:, keep], excluded=table.excluded)
    new_ds = replace(dataset, llrs=dataset.llrs[keep], msgs=dataset.msgs[keep])
    return new_table, new_ds


@dataclass(frozen=True)
class SgResult:
    pfgs: PfgList
    picks: tuple[int, ...]              # candidate indices, in pick order
    conditional_rates: tuple[float, ...]
    dataset_sizes: tuple[int, ...]      # surviving frames before each pick
    truncated: bool


def sg_run(
    code: CodeSpec,
    config: SelectionConfig,
    dataset: FailureDataset | None = None,
) -> SgResult:
    """Grow a decoding-graph list greedily from a failure dataset.

    A prebuilt dataset may be passed in; otherwise one is generated from
    the config.  Deterministic for a fixed config and dataset.
    """
    if dataset is None:
        dataset = gen_dataset(code, config)
    candidates = enumerate_pfgs(code.n, config.p)
    if config.list_size > len(candidates):
        raise ValueError(
            f"list_size {config.list_size} exceeds {len(candidates)} candidates")
    table = FailureTable.build(candidates, dataset, code, config.bp)

    picks: list[int] = []
    rates: list[float] = []
    sizes: list[int] = []
    truncated = False
    for _ in range(config.list_size - 1):
        cols = table.rows.shape[1]
        if cols == 0:
            truncated = True
            warnings.warn(
                f"failure dataset exhausted after {len(picks)} picks; "
                f"list truncated", stacklevel=2)
            break
        chosen = select_best_list(table)
        sizes.append(cols)
        rates.append(float(table.rows[chosen].sum()) / cols)
        picks.append(chosen)
        table.excluded[chosen] = True
        table, dataset = update_dataset(table, dataset, chosen)
    perms = [candidates[0]] + [candidates[i] for i in picks]
    return SgResult(
        pfgs=PfgList.from_perms(perms),
        picks=tuple(picks),
        conditional_rates=tuple(rates),
        dataset_sizes=tuple(sizes),
        truncated=truncated,
    )
