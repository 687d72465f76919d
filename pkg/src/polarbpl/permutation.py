"""Stage permutations of the polar factor graph and their routing plans.

A permuted factor graph reorders the n butterfly stages.  Rather than
rewiring the graph, the same decoder can run on the original stage order
if the input LLR vectors are routed through a fixed sequence of adjacent
sub-shuffles; this module produces that sequence for any stage order and
prices it in clock cycles (one sub-shuffle per cycle).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "LatencyCensus",
    "ShufflePlan",
    "apply_plan",
    "decompose",
    "index_map_oracle",
    "invert_plan",
    "latency_census",
    "pgu_latency",
    "plan_latency",
    "read_pfg_list",
    "stage_column",
    "sub_shuffle",
    "subrouting_steps",
    "update_stage",
    "write_pfg_list",
]


def _check_perm(pi) -> tuple[int, ...]:
    pi = tuple(int(v) for v in pi)
    if sorted(pi) != list(range(len(pi))):
        raise ValueError(f"not a permutation of 0..{len(pi) - 1}: {pi}")
    return pi


def _log2len(vec: np.ndarray) -> int:
    N = vec.shape[-1]
    n = int(N).bit_length() - 1
    if N != 1 << n:
        raise ValueError(f"vector length {N} is not a power of two")
    return n


def stage_column(n: int, i: int) -> np.ndarray:
    """Binary column of stage i: bit i of each row index (2^i zeros, 2^i ones, ...)."""
    if not (0 <= i < n):
        raise ValueError(f"stage {i} outside 0..{n - 1}")
    return ((np.arange(1 << n) >> i) & 1).astype(np.uint8)


def _swap_bits_map(n: int, i: int) -> np.ndarray:
    r = np.arange(1 << n)
    diff = ((r >> (i - 1)) ^ (r >> i)) & 1
    return r ^ (diff << (i - 1)) ^ (diff << i)


def sub_shuffle(vec: np.ndarray, i: int) -> np.ndarray:
    """Adjacent sub-shuffle: swap bits (i-1, i) of every index, 1 <= i <= n-1.

    Within each group of 2^(i+1) elements the four 2^(i-1)-quarters
    [A B C D] are reordered to [A C B D].  Self-inverse.  Works on the
    last axis of any (..., N) array.
    """
    vec = np.asarray(vec)
    n = _log2len(vec)
    if not (1 <= i <= n - 1):
        raise ValueError(f"sub-shuffle index {i} outside 1..{n - 1}")
    return vec[..., _swap_bits_map(n, i)]


def update_stage(pi_in: int, s: int, e: int) -> int:
    """New label of stage pi_in after the sub-routing that moves s into e."""
    if pi_in == s:
        return e
    if s != e and min(s, e) <= pi_in <= max(s, e):
        return pi_in + (1 if s > e else -1)
    return pi_in


def subrouting_steps(s: int, e: int) -> tuple[int, ...]:
    """Sub-shuffle indices that route stage s to position e, in routing order."""
    if s < e:
        return tuple(range(s + 1, e + 1))
    return tuple(range(s, e, -1))


@dataclass(frozen=True)
class ShufflePlan:
    """Decomposition of a stage permutation into adjacent sub-shuffles.

    s[i] is the stage label matched into position i at step i of the
    decomposition.  steps lists sub-shuffle indices ordered for
    apply_plan; the routing hardware applies them in the reverse order
    (invert_plan), which is also the order that turns the stage labels
    back into 0..n-1.
    """

    pi: tuple[int, ...]
    s: tuple[int, ...]
    steps: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.pi)

    @property
    def displacement(self) -> int:
        return sum(abs(si - i) for i, si in enumerate(self.s))


def decompose(pi) -> ShufflePlan:
    """Match stages into positions 0..n-1 left to right, recording sub-shuffles."""
    pi = _check_perm(pi)
    n = len(pi)
    work = list(pi)
    s = [0] * n
    routing: list[int] = []
    for i in range(n):
        si = work[i]
        for j in range(i, n):
            work[j] = update_stage(work[j], si, i)
        s[i] = si
        routing.extend(subrouting_steps(si, i))
    return ShufflePlan(pi=pi, s=tuple(s), steps=tuple(reversed(routing)))


def apply_plan(vec: np.ndarray, plan: ShufflePlan) -> np.ndarray:
    """Apply the plan's sub-shuffles in order; realizes index_map_oracle(plan.pi)."""
    out = np.asarray(vec)
    if out.shape[-1] != 1 << plan.n:
        raise ValueError(f"vector length {out.shape[-1]} != 2^{plan.n}")
    for i in plan.steps:
        out = sub_shuffle(out, i)
    return out


def invert_plan(vec: np.ndarray, plan: ShufflePlan) -> np.ndarray:
    """Apply the plan's sub-shuffles in reverse order; inverse of apply_plan."""
    out = np.asarray(vec)
    if out.shape[-1] != 1 << plan.n:
        raise ValueError(f"vector length {out.shape[-1]} != 2^{plan.n}")
    for i in reversed(plan.steps):
        out = sub_shuffle(out, i)
    return out


def index_map_oracle(pi) -> np.ndarray:
    """Digit-permutation index map: bit pi[j] of the result equals bit j of r.

    Computed directly from the bit positions, independently of the
    decomposition machinery.
    """
    pi = _check_perm(pi)
    n = len(pi)
    r = np.arange(1 << n)
    g = np.zeros(1 << n, dtype=np.int64)
    for j, pj in enumerate(pi):
        g |= ((r >> pj) & 1) << j
    return g


# ---------------------------------------------------------------------------
# Latency
# ---------------------------------------------------------------------------

def plan_latency(plan: ShufflePlan) -> int:
    """Clock cycles to route one input plane: sum |s_i - i| + n."""
    return plan.displacement + plan.n


def pgu_latency(plan: ShufflePlan) -> int:
    """Clock cycles to route both input planes through one shared shuffler."""
    return 2 * plan_latency(plan) - plan.n


def _all_perms(m: int) -> np.ndarray:
    """All m! permutations of 0..m-1 as an (m!, m) int8 array."""
    arr = np.zeros((1, 1), dtype=np.int8)
    for k in range(2, m + 1):
        P = arr.shape[0]
        out = np.empty((P * k, k), dtype=np.int8)
        for p in range(k):
            block = out[p * P:(p + 1) * P]
            block[:, :p] = arr[:, :p]
            block[:, p] = k - 1
            block[:, p + 1:] = arr[:, p:]
        arr = out
    return arr


@dataclass(frozen=True)
class LatencyCensus:
    """Exact latency statistics over all stage permutations fixing p left stages."""

    n: int
    p: int
    count: int
    plan_min: int
    plan_max: int
    plan_mean: float
    pgu_min: int
    pgu_max: int
    pgu_mean: float
    pgu_hist: dict[int, int]

    def fraction_below(self, cc: int) -> float:
        below = sum(c for lat, c in self.pgu_hist.items() if lat < cc)
        return below / self.count


def latency_census(n: int, p: int = 0) -> LatencyCensus:
    """Enumerate every permutation fixing stages 0..p-1 and tally latencies.

    The displacement of a plan equals the inversion count of its stage
    permutation, so the census iterates all (n-p)! suffix permutations
    with a pairwise O(n^2) inversion count instead of decomposing each.
    """
    if not (0 <= p <= n):
        raise ValueError(f"p={p} outside 0..{n}")
    m = n - p
    if m > 10:
        raise ValueError(f"(n-p)! with n-p={m} is too large to enumerate")
    if m == 0:
        inv = np.zeros(1, dtype=np.int16)
    else:
        perms = _all_perms(m)
        inv = np.zeros(perms.shape[0], dtype=np.int16)
        for a in range(m):
            for b in range(a + 1, m):
                inv += perms[:, a] > perms[:, b]
    plan_lat = inv.astype(np.int64) + n
    pgu_lat = 2 * inv.astype(np.int64) + n
    counts = np.bincount(pgu_lat)
    hist = {int(lat): int(c) for lat, c in enumerate(counts) if c}
    return LatencyCensus(
        n=n, p=p, count=inv.shape[0],
        plan_min=int(plan_lat.min()), plan_max=int(plan_lat.max()),
        plan_mean=float(plan_lat.sum()) / inv.shape[0],
        pgu_min=int(pgu_lat.min()), pgu_max=int(pgu_lat.max()),
        pgu_mean=float(pgu_lat.sum()) / inv.shape[0],
        pgu_hist=hist,
    )


# ---------------------------------------------------------------------------
# PFG list files
# ---------------------------------------------------------------------------

def read_pfg_list(path: str | Path) -> list[tuple[int, ...]]:
    """Read stage permutations, one per line as space-separated indices."""
    perms = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                perms.append(_check_perm(int(v) for v in text.split()))
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return perms


def write_pfg_list(path: str | Path, perms) -> None:
    with open(path, "w") as fh:
        for pi in perms:
            fh.write(" ".join(str(v) for v in pi) + "\n")
