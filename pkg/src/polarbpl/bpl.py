"""Serial list decoding over permuted factor graphs with CRC detection.

Attempts run one graph at a time: the frozen-prior and channel-LLR vectors
are routed into the reordered graph's coordinates, the standard decoder
runs unchanged, and the hard decisions are routed back before the CRC
check.  The first attempt always uses the unpermuted graph, so a
one-entry list degenerates to plain BP.  Clock-cycle accounting models a
pipeline where decoding attempt l overlaps the input routing for attempt
l+1 and the output recovery of attempt l-1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bp import BpConfig, bp_decode, bp_decode_batch
from .permutation import (
    ShufflePlan,
    apply_plan,
    decompose,
    invert_plan,
    pgu_latency,
    plan_latency,
    read_pfg_list,
)
from .polar import CodeSpec, crc_check, crc_check_batch

__all__ = [
    "AttemptRecord",
    "BplBatchResult",
    "BplOutcome",
    "PfgList",
    "bpl_decode",
    "bpl_decode_batch",
    "iavg_parallel",
    "load_pfg_list",
    "schedule_latency",
    "shuffle_priors",
]


@dataclass(frozen=True)
class PfgList:
    """Ordered decoding graphs; position 0 is always the unpermuted graph."""

    perms: tuple[tuple[int, ...], ...]
    plans: tuple[ShufflePlan, ...]

    @classmethod
    def from_perms(cls, perms) -> "PfgList":
        perms = tuple(tuple(int(v) for v in pi) for pi in perms)
        if not perms:
            raise ValueError("graph list must be nonempty")
        n = len(perms[0])
        if perms[0] != tuple(range(n)):
            raise ValueError("first graph must be the identity stage order")
        if len(set(perms)) != len(perms):
            raise ValueError("graph list contains duplicates")
        return cls(perms=perms, plans=tuple(decompose(pi) for pi in perms))

    def prefix(self, m: int) -> "PfgList":
        if not (1 <= m <= len(self.perms)):
            raise ValueError(f"prefix length {m} outside 1..{len(self.perms)}")
        return PfgList(perms=self.perms[:m], plans=self.plans[:m])

    def __len__(self) -> int:
        return len(self.perms)


def load_pfg_list(path) -> PfgList:
    return PfgList.from_perms(read_pfg_list(path))


@dataclass(frozen=True)
class AttemptRecord:
    pfg_index: int
    iterations: int
    converged: bool
    crc_pass: bool
    plan_latency: int
    pgu_latency: int

    def trace_entry(self) -> dict:
        return {
            "pfg_index": self.pfg_index,
            "iterations": self.iterations,
            "converged": self.converged,
            "crc_pass": self.crc_pass,
            "plan_latency": self.plan_latency,
        }


@dataclass(frozen=True)
class BplOutcome:
    msg: np.ndarray | None
    pfg_index: int | None
    status: str                 # "success" or "list_exhausted"
    crc_miss: bool | None       # filled by callers that know the true message
    total_iterations: int
    latency_cc: int
    attempts: tuple[AttemptRecord, ...]

    def trace_json(self) -> list[dict]:
        return [a.trace_entry() for a in self.attempts]


def shuffle_priors(code: CodeSpec, plan: ShufflePlan) -> np.ndarray:
    """Frozen mask routed into the permuted graph's row coordinates.

    The router feeds both input planes (priors and channel LLRs) through
    the plan's sub-shuffles in routing order, i.e. invert_plan.
    """
    return invert_plan(code.frozen_mask, plan)


def schedule_latency(attempts, n: int, simplified: bool = False) -> int:
    """Clock cycles for a completed decode trace.

    Per attempt: (n-1) CCs per iteration, overlapped (three-way max) with
    routing the next graph's inputs and recovering the previous attempt's
    output; recovery of the position-0 graph is free.  Plus one CC per
    attempt for the decision step and the final attempt's recovery.
    The simplified form drops the overlap terms; it matches the exact
    form whenever every attempt runs at least 15 iterations.
    """
    attempts = list(attempts)
    if not attempts:
        raise ValueError("empty decode trace")
    k = len(attempts) - 1
    total = 0
    for l, att in enumerate(attempts):
        decode = (n - 1) * att.iterations
        if simplified:
            total += decode
        else:
            pgu_next = attempts[l + 1].pgu_latency if l < k else 0
            rec_prev = attempts[l - 1].plan_latency - n if l >= 2 else 0
            total += max(decode, pgu_next, rec_prev)
    total += k + 1
    if k >= 1:
        total += attempts[k].plan_latency - n
    return total


def iavg_parallel(list_size: int, i_max: int) -> int:
    """Iterations consumed by a parallel list schedule (no early hand-off)."""
    return list_size * i_max


def bpl_decode(
    channel_llrs: np.ndarray,
    code: CodeSpec,
    config: BpConfig,
    pfgs: PfgList,
) -> BplOutcome:
    """Try each graph in order until the recovered payload passes the CRC."""
    llrs = np.asarray(channel_llrs, dtype=np.float64)
    attempts: list[AttemptRecord] = []
    unfrozen = ~code.frozen_mask
    for l, plan in enumerate(pfgs.plans):
        out = bp_decode(invert_plan(llrs, plan), code, config,
                        frozen_mask=shuffle_priors(code, plan))
        u_hat = apply_plan(out.hd, plan)
        payload = u_hat[unfrozen]
        ok = crc_check(payload, code.crc_poly)
        attempts.append(AttemptRecord(
            pfg_index=l,
            iterations=out.iterations_used,
            converged=out.converged,
            crc_pass=ok,
            plan_latency=plan_latency(plan),
            pgu_latency=pgu_latency(plan),
        ))
        if ok:
            return BplOutcome(
                msg=payload[:code.K],
                pfg_index=l,
                status="success",
                crc_miss=None,
                total_iterations=sum(a.iterations for a in attempts),
                latency_cc=schedule_latency(attempts, code.n),
                attempts=tuple(attempts),
            )
    return BplOutcome(
        msg=None,
        pfg_index=None,
        status="list_exhausted",
        crc_miss=None,
        total_iterations=sum(a.iterations for a in attempts),
        latency_cc=schedule_latency(attempts, code.n),
        attempts=tuple(attempts),
    )


# ---------------------------------------------------------------------------
# Batched list decoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BplBatchResult:
    """Per-frame outcomes of a batched serial list decode.

    msgs holds the successful payload where success is set and the
    position-0 attempt's payload otherwise.  iterations is (B, L) with -1
    for attempts never made.
    """

    success: np.ndarray        # (B,) bool
    pfg_index: np.ndarray      # (B,) int32, -1 when exhausted
    msgs: np.ndarray           # (B, K) uint8
    iterations: np.ndarray     # (B, L) int32
    total_iterations: np.ndarray  # (B,) int64
    latency_cc: np.ndarray     # (B,) int64


def bpl_decode_batch(
    llrs: np.ndarray,
    code: CodeSpec,
    config: BpConfig,
    pfgs: PfgList,
) -> BplBatchResult:
    llrs = np.asarray(llrs, dtype=np.float64)
    B = llrs.shape[0]
    L = len(pfgs)
    unfrozen = ~code.frozen_mask

    success = np.zeros(B, dtype=bool)
    pfg_index = np.full(B, -1, dtype=np.int32)
    msgs = np.zeros((B, code.K), dtype=np.uint8)
    iters = np.full((B, L), -1, dtype=np.int32)

    active = np.arange(B)
    for l, plan in enumerate(pfgs.plans):
        res = bp_decode_batch(invert_plan(llrs[active], plan),
                              shuffle_priors(code, plan), config)
        payload = apply_plan(res.hd, plan)[:, unfrozen]
        ok = crc_check_batch(payload, code.crc_poly)
        iters[active, l] = res.iterations
        if l == 0:
            msgs[active] = payload[:, :code.K]
        won = active[ok]
        success[won] = True
        pfg_index[won] = l
        msgs[won] = payload[ok, :code.K]
        active = active[~ok]
        if active.size == 0:
            break

    total = np.where(iters >= 0, iters, 0).sum(axis=1).astype(np.int64)
    latency = _batch_latency(iters, pfgs, code.n)
    return BplBatchResult(success=success, pfg_index=pfg_index, msgs=msgs,
                          iterations=iters, total_iterations=total,
                          latency_cc=latency)


def _batch_latency(iters: np.ndarray, pfgs: PfgList, n: int) -> np.ndarray:
    """Exact schedule_latency per frame from the (B, L) iteration matrix."""
    B = iters.shape[0]
    plan_lat = np.array([plan_latency(p) for p in pfgs.plans])
    pgu_lat = np.array([pgu_latency(p) for p in pfgs.plans])
    n_att = (iters >= 0).sum(axis=1)
    out = np.empty(B, dtype=np.int64)
    single = n_att == 1
    out[single] = (n - 1) * iters[single, 0].astype(np.int64) + 1
    for frame in (~single).nonzero()[0]:
        k = int(n_att[frame]) - 1
        total = 0
        for l in range(k + 1):
            decode = (n - 1) * int(iters[frame, l])
            pgu_next = int(pgu_lat[l + 1]) if l < k else 0
            rec_prev = int(plan_lat[l - 1]) - n if l >= 2 else 0
            total += max(decode, pgu_next, rec_prev)
        out[frame] = total + k + 1 + int(plan_lat[k]) - n
    return out
