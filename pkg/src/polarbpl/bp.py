"""Offset-min-sum belief propagation on the polar factor graph.

Message planes R (rightbound, from the data side) and L (leftbound, from
the channel side) each hold n+1 columns of N values.  One iteration runs
an ascending R sweep over stages 0..n-2 followed by a descending L sweep
over stages n-1..1, each in place so a sweep reads the values its own
direction just produced; within a sweep, stage j couples rows (i, i + 2^j).
R_n and L_0 are never stored: decision LLRs rebuild L_0 from the current
L_1 and the frozen priors in R_0.  Arithmetic saturates to the quantizer
range in fixed mode; float mode uses +inf frozen priors and unbounded sums.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Quantizer, quantize
from .polar import CodeSpec

__all__ = [
    "BpConfig",
    "BpOutcome",
    "BpBatchResult",
    "MessageMemory",
    "bp_decode",
    "bp_decode_batch",
    "decision_llrs",
    "frozen_prior_value",
    "g_oms",
    "hard_decision",
    "init",
    "iterate",
    "sa_check",
]


def g_oms(a, b, beta: float = 0.0):
    """sgn(a) sgn(b) max(min(|a|,|b|) - beta, 0), with sgn(0) = +1."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    sgn = np.where(a < 0, -1.0, 1.0) * np.where(b < 0, -1.0, 1.0)
    return sgn * np.maximum(np.minimum(np.abs(a), np.abs(b)) - beta, 0.0)


@dataclass(frozen=True)
class BpConfig:
    """Decoder settings; quantizer None selects float mode."""

    i_max: int
    beta_r: float = 0.25
    beta_l: float = 0.0
    quantizer: Quantizer | None = None

    def __post_init__(self):
        if self.i_max < 1:
            raise ValueError(f"i_max={self.i_max} must be >= 1")
        for name, beta in (("beta_r", self.beta_r), ("beta_l", self.beta_l)):
            if beta < 0:
                raise ValueError(f"{name}={beta} must be >= 0")
            if self.quantizer is not None and quantize(beta, self.quantizer) != beta:
                raise ValueError(f"{name}={beta} is not representable in the quantizer")


def frozen_prior_value(quantizer: Quantizer | None) -> float:
    """A-priori LLR pinned on frozen rows: saturation maximum, or +inf in float mode."""
    return quantizer.q_max if quantizer is not None else np.inf


@dataclass
class MessageMemory:
    """The (n+1) x N rightbound/leftbound LLR planes of one frame."""

    R: np.ndarray
    L: np.ndarray

    @classmethod
    def zeros(cls, code: CodeSpec) -> "MessageMemory":
        return cls(R=np.zeros((code.n + 1, code.N)), L=np.zeros((code.n + 1, code.N)))


@dataclass(frozen=True)
class BpOutcome:
    hd: np.ndarray              # N-bit hard decision on the data side
    iterations_used: int
    converged: bool             # stopped by sign-agreement, not by i_max
    decision_llrs: np.ndarray


# ---------------------------------------------------------------------------
# Core sweeps on (n+1, B, N) planes
# ---------------------------------------------------------------------------

def _halves(plane: np.ndarray, j: int):
    """Views of the stage-j upper/lower rows of a (B, N) plane."""
    B, N = plane.shape
    v = plane.reshape(B, -1, 2, 1 << j)
    return v[:, :, 0, :], v[:, :, 1, :]


def _make_sat(quantizer: Quantizer | None):
    if quantizer is None:
        return lambda x: x
    lo, hi = quantizer.q_min, quantizer.q_max
    return lambda x: np.clip(x, lo, hi)


def _iterate_planes(R: np.ndarray, L: np.ndarray, config: BpConfig) -> None:
    """One full iteration, in place: R sweep then L sweep."""
    n = R.shape[0] - 1
    sat = _make_sat(config.quantizer)
    for j in range(n - 1):
        a, b = _halves(R[j], j)
        Lu, Ll = _halves(L[j + 1], j)
        t = sat(Ll + b)
        new_u = sat(g_oms(a, t, config.beta_r))
        new_l = sat(sat(g_oms(a, Lu, config.beta_r)) + b)
        wu, wl = _halves(R[j + 1], j)
        wu[...] = new_u
        wl[...] = new_l
    for j in range(n - 1, 0, -1):
        a, b = _halves(R[j], j)
        Lu, Ll = _halves(L[j + 1], j)
        t = sat(Ll + b)
        new_u = sat(g_oms(Lu, t, config.beta_l))
        new_l = sat(sat(g_oms(Lu, a, config.beta_l)) + Ll)
        wu, wl = _halves(L[j], j)
        wu[...] = new_u
        wl[...] = new_l


def _decision_planes(R: np.ndarray, L: np.ndarray, config: BpConfig) -> np.ndarray:
    """Decision LLRs R_0 + L_0, with L_0 rebuilt from L_1 and R_0."""
    sat = _make_sat(config.quantizer)
    a, b = _halves(R[0], 0)
    Lu, Ll = _halves(L[1], 0)
    L0 = np.empty_like(R[0])
    L0u, L0l = _halves(L0, 0)
    L0u[...] = sat(g_oms(Lu, sat(Ll + b), config.beta_l))
    L0l[...] = sat(sat(g_oms(Lu, a, config.beta_l)) + Ll)
    dec = R[0] + L0  # widened, then saturated once
    return sat(dec)


# ---------------------------------------------------------------------------
# Single-frame operations
# ---------------------------------------------------------------------------

def init(
    mem: MessageMemory,
    channel_llrs: np.ndarray,
    frozen_mask: np.ndarray,
    quantizer: Quantizer | None = None,
) -> None:
    """Reset the planes: frozen priors in R_0, channel LLRs in L_n, zeros elsewhere."""
    llrs = np.asarray(channel_llrs, dtype=np.float64)
    n = mem.R.shape[0] - 1
    if llrs.shape != (mem.R.shape[1],):
        raise ValueError(f"channel LLR length {llrs.shape} != N = {mem.R.shape[1]}")
    mem.R[:] = 0.0
    mem.L[:] = 0.0
    mem.R[0, np.asarray(frozen_mask, dtype=bool)] = frozen_prior_value(quantizer)
    mem.L[n] = llrs


def iterate(mem: MessageMemory, config: BpConfig) -> None:
    """One full message-passing iteration over all stages, in place."""
    _iterate_planes(mem.R[:, None, :], mem.L[:, None, :], config)


def decision_llrs(mem: MessageMemory, config: BpConfig) -> np.ndarray:
    return _decision_planes(mem.R[:, None, :], mem.L[:, None, :], config)[0]


def hard_decision(mem: MessageMemory, config: BpConfig) -> np.ndarray:
    """Data-side hard decisions: bit 1 iff the decision LLR is negative."""
    return (decision_llrs(mem, config) < 0).astype(np.uint8)


def sa_check(history) -> bool:
    """True iff the three most recent hard-decision vectors exist and agree."""
    if len(history) < 3:
        return False
    a, b, c = history[-3], history[-2], history[-1]
    return bool(np.array_equal(a, b) and np.array_equal(b, c))


def bp_decode(
    channel_llrs: np.ndarray,
    code: CodeSpec,
    config: BpConfig,
    frozen_mask: np.ndarray | None = None,
) -> BpOutcome:
    """Decode one frame; stops at sign agreement or i_max.

    frozen_mask overrides code.frozen_mask so list decoding can feed
    shuffled priors through the same entry point.
    """
    mask = code.frozen_mask if frozen_mask is None else frozen_mask
    res = bp_decode_batch(np.asarray(channel_llrs)[None, :], mask, config)
    return BpOutcome(
        hd=res.hd[0],
        iterations_used=int(res.iterations[0]),
        converged=bool(res.converged[0]),
        decision_llrs=res.decision_llrs[0],
    )


# ---------------------------------------------------------------------------
# Batched decoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BpBatchResult:
    hd: np.ndarray             # (B, N) uint8
    iterations: np.ndarray     # (B,) int32
    converged: np.ndarray      # (B,) bool
    decision_llrs: np.ndarray  # (B, N) float64


def bp_decode_batch(
    llrs: np.ndarray,
    frozen_mask: np.ndarray,
    config: BpConfig,
) -> BpBatchResult:
    """Decode (B, N) frames sharing one frozen mask.

    Frames whose hard decisions repeat three times stop iterating; the
    active set is compacted once enough frames have retired.  Per-frame
    results are identical to bp_decode regardless of batch composition.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    B, N = llrs.shape
    n = int(N).bit_length() - 1
    if N != 1 << n:
        raise ValueError(f"frame length {N} is not a power of two")
    mask = np.asarray(frozen_mask, dtype=bool)

    hd_out = np.zeros((B, N), dtype=np.uint8)
    dec_out = np.zeros((B, N), dtype=np.float64)
    iters_out = np.full(B, config.i_max, dtype=np.int32)
    conv_out = np.zeros(B, dtype=bool)

    R = np.zeros((n + 1, B, N))
    L = np.zeros((n + 1, B, N))
    R[0][:, mask] = frozen_prior_value(config.quantizer)
    L[n] = llrs

    active = np.arange(B)          # original frame index per active row
    live = np.ones(B, dtype=bool)  # rows not yet recorded (within active arrays)
    prev_hd = np.zeros((B, N), dtype=np.uint8)
    prev_same = np.zeros(B, dtype=bool)

    for t in range(1, config.i_max + 1):
        _iterate_planes(R, L, config)
        dec = _decision_planes(R, L, config)
        hd = (dec < 0).astype(np.uint8)
        same = (hd == prev_hd).all(axis=1) if t > 1 else np.zeros(len(active), dtype=bool)
        sa = same & prev_same & live
        if sa.any():
            rows = sa.nonzero()[0]
            frames = active[rows]
            hd_out[frames] = hd[rows]
            dec_out[frames] = dec[rows]
            iters_out[frames] = t
            conv_out[frames] = True
            live[rows] = False
            if not live.any():
                return BpBatchResult(hd_out, iters_out, conv_out, dec_out)
            if (~live).sum() >= 0.25 * live.shape[0]:
                keep = live.nonzero()[0]
                R = np.ascontiguousarray(R[:, keep, :])
                L = np.ascontiguousarray(L[:, keep, :])
                active = active[keep]
                hd = hd[keep]
                dec = dec[keep]
                same = same[keep]
                live = np.ones(len(active), dtype=bool)
        prev_hd = hd
        prev_same = same

    rows = live.nonzero()[0]
    frames = active[rows]
    hd_out[frames] = prev_hd[rows]
    dec_out[frames] = dec[rows]
    return BpBatchResult(hd_out, iters_out, conv_out, dec_out)
