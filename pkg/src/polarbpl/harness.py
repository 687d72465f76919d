"""Monte-Carlo experiment harness: BLER sweeps, censuses, selection, self-test.

Experiments are described by a nested :class:`ExperimentConfig` (loadable
from YAML).  All randomness flows from one seed through per-frame
substreams, so results are independent of batch boundaries and worker
count, and any single frame can be replayed in isolation.
"""
from __future__ import annotations

import dataclasses
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .bp import BpConfig
from .bpl import PfgList, bpl_decode_batch, load_pfg_list
from .channel import ChannelParams, Quantizer, simulate_frames
from .permutation import (LatencyCensus, apply_plan, decompose,
                          index_map_oracle, invert_plan, latency_census,
                          sub_shuffle, write_pfg_list)
from .polar import (CodeSpec, build_code, gaussian_construct, load_sequence,
                    nr_sequence_1024)
from .selection import SelectionConfig, SgResult, sg_run

__all__ = [
    "BLER_CSV_COLUMNS",
    "BlerPoint",
    "ChannelBlock",
    "CodeBlock",
    "ConfigError",
    "DecoderBlock",
    "ExperimentConfig",
    "ListBlock",
    "RunBlock",
    "perm_selftest",
    "resolve_pfgs",
    "run_bler",
    "run_latency_census",
    "run_sg",
    "write_bler_csv",
    "write_census_csv",
]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


# ---------------------------------------------------------------------------
# Configuration blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CodeBlock:
    n: int
    K: int
    P: int = 11
    sequence: str = "ga"       # "ga", "nr1024", or a reliability-file path
    design_snr_db: float = 2.0

    def __post_init__(self):
        if self.sequence == "nr1024" and self.n != 10:
            raise ConfigError("sequence 'nr1024' requires n=10")

    def build(self) -> CodeSpec:
        if self.sequence == "ga":
            seq = gaussian_construct(self.n, self.design_snr_db)
        elif self.sequence == "nr1024":
            seq = nr_sequence_1024()
        else:
            seq = load_sequence(self.sequence)
        return build_code(self.n, self.K, self.P, seq)


@dataclass(frozen=True)
class ChannelBlock:
    snrs_db: tuple[float, ...]
    seed: int = 1

    def __post_init__(self):
        if len(self.snrs_db) == 0:
            raise ConfigError("snrs_db must be nonempty")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in u64")


@dataclass(frozen=True)
class DecoderBlock:
    i_max: int = 50
    beta_r: float = 0.25
    beta_l: float = 0.0
    quantized: bool = False
    q_total: int = 7
    q_frac: int = 2

    def quantizer(self) -> Quantizer | None:
        if not self.quantized:
            return None
        return Quantizer(self.q_total, self.q_frac)

    def bp_config(self) -> BpConfig:
        return BpConfig(i_max=self.i_max, beta_r=self.beta_r,
                        beta_l=self.beta_l, quantizer=self.quantizer())


@dataclass(frozen=True)
class ListBlock:
    list_size: int = 1
    source: str = "lex"        # "lex" (first candidates in order) or a PFG file
    p: int = 0                 # stages pinned in place when source="lex" / SG
    dataset_size: int = 2000   # SG only
    dataset_snr_db: float | None = None  # SG only; defaults to first sweep SNR

    def __post_init__(self):
        if self.list_size < 1:
            raise ConfigError("list_size must be >= 1")
        if self.p < 0:
            raise ConfigError("p must be >= 0")


@dataclass(frozen=True)
class RunBlock:
    min_frames: int = 1000
    min_frame_errors: int = 100
    max_frames: int = 1_000_000
    batch: int = 1000
    workers: int = 1

    def __post_init__(self):
        if self.min_frame_errors < 1:
            raise ConfigError("min_frame_errors must be >= 1")
        if not 1 <= self.min_frames <= self.max_frames:
            raise ConfigError("need 1 <= min_frames <= max_frames")
        if self.batch < 1 or self.workers < 1:
            raise ConfigError("batch and workers must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    code: CodeBlock
    channel: ChannelBlock
    decoder: DecoderBlock = field(default_factory=DecoderBlock)
    pfg: ListBlock = field(default_factory=ListBlock)
    run: RunBlock = field(default_factory=RunBlock)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return _build_block(cls, d, "config")

    @classmethod
    def from_yaml(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as f:
                d = yaml.safe_load(f)
        except OSError as e:
            raise ConfigError(f"cannot read {path}: {e}") from None
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: {e}") from None
        if not isinstance(d, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_BLOCK_TYPES = {"code": CodeBlock, "channel": ChannelBlock,
                "decoder": DecoderBlock, "pfg": ListBlock, "run": RunBlock}
_SEQ_FIELDS = {"snrs_db"}


def _build_block(cls, d, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(d).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(d) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}")
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name not in d:
            continue
        v = d[f.name]
        if f.name in _BLOCK_TYPES and cls is ExperimentConfig:
            v = _build_block(_BLOCK_TYPES[f.name], v, f.name)
        elif f.name in _SEQ_FIELDS:
            if not isinstance(v, (list, tuple)):
                raise ConfigError(f"{where}.{f.name}: expected a list")
            v = tuple(float(x) for x in v)
        kwargs[f.name] = v
    try:
        return cls(**kwargs)
    except TypeError as e:   # missing required key
        raise ConfigError(f"{where}: {e}") from None
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from None


# ---------------------------------------------------------------------------
# PFG list resolution
# ---------------------------------------------------------------------------

def _first_lex(n: int, p: int, count: int) -> list[tuple[int, ...]]:
    if not (0 <= p <= n):
        raise ConfigError(f"p={p} outside 0..{n}")
    head = tuple(range(p))
    tails = itertools.islice(itertools.permutations(range(p, n)), count)
    perms = [head + t for t in tails]
    if len(perms) < count:
        raise ConfigError(
            f"only {len(perms)} candidates exist for n={n}, p={p}")
    return perms


def resolve_pfgs(config: ExperimentConfig, code: CodeSpec) -> PfgList:
    """Materialize the decoding-graph list an experiment runs over."""
    src = config.pfg.source
    if src == "lex":
        return PfgList.from_perms(_first_lex(code.n, config.pfg.p,
                                             config.pfg.list_size))
    try:
        pfgs = load_pfg_list(src)
    except ValueError as e:
        raise ConfigError(f"{src}: {e}") from None
    if len(pfgs.perms[0]) != code.n:
        raise ConfigError(f"{src}: stage count does not match n={code.n}")
    if config.pfg.list_size > len(pfgs):
        raise ConfigError(
            f"list_size {config.pfg.list_size} exceeds file entries {len(pfgs)}")
    return pfgs.prefix(config.pfg.list_size)


# ---------------------------------------------------------------------------
# BLER sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlerPoint:
    snr_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    bler: float
    i_avg: float
    mean_latency_cc: float
    miss_count: int


BLER_CSV_COLUMNS = ("snr_db", "frames", "frame_errors", "bit_errors",
                    "bler", "i_avg", "mean_latency_cc", "miss_count")


def _decode_span(code, params, pfgs, bp_cfg, quantizer, start, count):
    idx = np.arange(start, start + count, dtype=np.uint64)
    fb = simulate_frames(code, params, idx, quantizer=quantizer)
    res = bpl_decode_batch(fb.llrs, code, bp_cfg, pfgs)
    bad_bits = res.msgs != fb.msgs
    wrong = bad_bits.any(axis=1)
    return {
        "frames": count,
        "frame_errors": int(wrong.sum()),
        "bit_errors": int(bad_bits.sum()),
        "miss_count": int((res.success & wrong).sum()),
        "iterations": int(res.total_iterations.sum()),
        "latency_cc": int(res.latency_cc.sum()),
    }


def _run_point(code, pfgs, bp_cfg, quantizer, snr_db, config) -> BlerPoint:
    run = config.run
    params = ChannelParams(snr_db=snr_db, rate=code.K / code.N,
                           seed=config.channel.seed)
    totals = dict.fromkeys(
        ("frames", "frame_errors", "bit_errors", "miss_count",
         "iterations", "latency_cc"), 0)
    pool = (ThreadPoolExecutor(run.workers) if run.workers > 1 else None)
    try:
        start = 0
        while True:
            count = min(run.batch, run.max_frames - start)
            spans = _split_span(start, count, run.workers)
            if pool is None:
                parts = [_decode_span(code, params, pfgs, bp_cfg, quantizer,
                                      s, c) for s, c in spans]
            else:
                parts = list(pool.map(
                    lambda sc: _decode_span(code, params, pfgs, bp_cfg,
                                            quantizer, *sc), spans))
            for part in parts:        # fixed reduction order
                for k, v in part.items():
                    totals[k] += v
            start += count
            done_errors = totals["frame_errors"] >= run.min_frame_errors
            if start >= run.min_frames and (done_errors or start >= run.max_frames):
                break
    finally:
        if pool is not None:
            pool.shutdown()
    frames = totals["frames"]
    return BlerPoint(
        snr_db=snr_db,
        frames=frames,
        frame_errors=totals["frame_errors"],
        bit_errors=totals["bit_errors"],
        bler=totals["frame_errors"] / frames,
        i_avg=totals["iterations"] / frames,
        mean_latency_cc=totals["latency_cc"] / frames,
        miss_count=totals["miss_count"],
    )


def _split_span(start, count, workers):
    """Contiguous per-worker frame ranges; reduction order is fixed."""
    base, extra = divmod(count, workers)
    spans, s = [], start
    for w in range(workers):
        c = base + (1 if w < extra else 0)
        if c:
            spans.append((s, c))
        s += c
    return spans


def run_bler(config: ExperimentConfig) -> list[BlerPoint]:
    """Run the configured BLER sweep, one point per SNR.

    Per point, frames are simulated until at least ``min_frames`` are done
    and either ``min_frame_errors`` frame errors were seen or ``max_frames``
    is reached.  A frame error is any recovered message differing from the
    transmitted one (undetected CRC misses included).
    """
    code = config.code.build()
    pfgs = resolve_pfgs(config, code)
    bp_cfg = config.decoder.bp_config()
    quantizer = config.decoder.quantizer()
    return [_run_point(code, pfgs, bp_cfg, quantizer, snr, config)
            for snr in config.channel.snrs_db]


def write_bler_csv(points: list[BlerPoint], out) -> None:
    """Write sweep results as CSV with the documented fixed column set."""

    def _write(f):
        f.write(",".join(BLER_CSV_COLUMNS) + "\n")
        for pt in points:
            row = [getattr(pt, c) for c in BLER_CSV_COLUMNS]
            f.write(",".join(_fmt(v) for v in row) + "\n")

    _to_stream(out, _write)


def _fmt(v) -> str:
    return format(v, ".10g") if isinstance(v, float) else str(v)


def _to_stream(out, writer) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w") as f:
            writer(f)
    else:
        writer(out)


# ---------------------------------------------------------------------------
# Latency census / selection drivers
# ---------------------------------------------------------------------------

def run_latency_census(n: int, p: int = 0, out=None) -> LatencyCensus:
    """Tally shuffling latencies over all stage orders; optionally write CSV."""
    census = latency_census(n, p)
    if out is not None:
        write_census_csv(census, out)
    return census


def write_census_csv(census: LatencyCensus, out) -> None:
    def _write(f):
        f.write("latency_cc,count\n")
        for lat in sorted(census.pgu_hist):
            f.write(f"{lat},{census.pgu_hist[lat]}\n")

    _to_stream(out, _write)


def run_sg(config: ExperimentConfig, out=None) -> tuple[SgResult, dict]:
    """Drive greedy list selection end to end; optionally write the list file.

    Returns the selection result and a JSON-ready report with the per-step
    conditional failure rates.
    """
    code = config.code.build()
    snr = config.pfg.dataset_snr_db
    if snr is None:
        snr = config.channel.snrs_db[0]
    sel = SelectionConfig(
        p=config.pfg.p, list_size=config.pfg.list_size,
        dataset_size=config.pfg.dataset_size, snr_db=snr,
        seed=config.channel.seed, bp=config.decoder.bp_config(),
        max_frames=config.run.max_frames,
    )
    result = sg_run(code, sel)
    report = {
        "n": code.n, "K": code.K, "P": code.P,
        "p": sel.p, "list_size": sel.list_size,
        "dataset_size": sel.dataset_size, "snr_db": sel.snr_db,
        "seed": sel.seed, "truncated": result.truncated,
        "perms": [list(pi) for pi in result.pfgs.perms],
        "conditional_rates": list(result.conditional_rates),
        "dataset_sizes": list(result.dataset_sizes),
    }
    if out is not None:
        write_pfg_list(out, result.pfgs.perms)
        Path(str(out) + ".report.json").write_text(
            json.dumps(report, indent=2) + "\n")
    return result, report


# ---------------------------------------------------------------------------
# Permutation self-test
# ---------------------------------------------------------------------------

def _selftest_perms(n_max: int, random_count: int, seed: int):
    for n in range(1, n_max + 1):
        for pi in itertools.permutations(range(n)):
            yield pi
    rng = np.random.default_rng(seed)
    for _ in range(random_count):
        yield tuple(int(x) for x in rng.permutation(10))


def perm_selftest(n_max: int = 6, random_count: int = 1000,
                  fault: str | None = None, seed: int = 7) -> dict:
    """Machine-readable pass/fail report for the shuffling-network properties.

    Checks every permutation exhaustively up to ``n_max`` plus
    ``random_count`` sampled 10-stage orders.  ``fault`` names a property
    whose outcome is negated before reporting, exercising the failure
    path end to end (report flag and CLI exit code).
    """
    if n_max > 8:
        raise ValueError("n_max above 8 is too large for the exhaustive part")
    props = {name: {"ok": True, "cases": 0}
             for name in ("oracle", "roundtrip", "label_replay",
                          "displacement", "involution")}

    def check(name, ok):
        props[name]["cases"] += 1
        if fault == name:
            ok = not ok
        if not ok:
            props[name]["ok"] = False

    for pi in _selftest_perms(n_max, random_count, seed):
        n = len(pi)
        plan = decompose(pi)
        v = np.arange(2 ** n)
        shuffled = apply_plan(v, plan)
        check("oracle", np.array_equal(shuffled, index_map_oracle(pi)))
        check("roundtrip", np.array_equal(invert_plan(shuffled, plan), v))
        labels = list(range(n))
        for i in reversed(plan.steps):
            labels[i - 1], labels[i] = labels[i], labels[i - 1]
        check("label_replay", tuple(labels) == pi)
        inversions = sum(1 for a in range(n) for b in range(a + 1, n)
                         if pi[a] > pi[b])
        check("displacement", plan.displacement == inversions)
        ok = all(np.array_equal(sub_shuffle(sub_shuffle(v, i), i), v)
                 for i in range(1, n)) if n > 1 else True
        check("involution", ok)

    return {
        "n_max": n_max,
        "random_count": random_count,
        "fault": fault,
        "properties": props,
        "ok": all(p["ok"] for p in props.values()),
    }
