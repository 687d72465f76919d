"""BPSK/AWGN channel, LLR computation and saturating fixed-point quantization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polar import CodeSpec, encode

__all__ = [
    "ChannelParams",
    "FrameBatch",
    "Quantizer",
    "Q7_2",
    "channel_llr",
    "noise_sigma",
    "quantize",
    "simulate_frames",
    "transmit",
]


@dataclass(frozen=True)
class Quantizer:
    """Saturating two's-complement fixed point with q_total bits, q_frac fractional."""

    q_total: int
    q_frac: int

    def __post_init__(self):
        if not (2 <= self.q_total <= 16):
            raise ValueError(f"q_total={self.q_total} outside 2..16")
        if not (0 <= self.q_frac < self.q_total):
            raise ValueError(f"q_frac={self.q_frac} outside 0..{self.q_total - 1}")

    @property
    def lsb(self) -> float:
        return 2.0 ** -self.q_frac

    @property
    def q_min(self) -> float:
        return -(2 ** (self.q_total - 1)) * self.lsb

    @property
    def q_max(self) -> float:
        return (2 ** (self.q_total - 1) - 1) * self.lsb


Q7_2 = Quantizer(7, 2)


def quantize(x, q: Quantizer):
    """Round to the nearest LSB multiple (ties away from zero), then saturate."""
    x = np.asarray(x, dtype=np.float64)
    scaled = np.floor(np.abs(x) / q.lsb + 0.5) * q.lsb
    return np.clip(np.where(x < 0, -scaled, scaled), q.q_min, q.q_max)


@dataclass(frozen=True)
class ChannelParams:
    """AWGN channel operating point; snr_db is Eb/N0."""

    snr_db: float
    rate: float
    seed: int

    def __post_init__(self):
        if not (0.0 < self.rate <= 1.0):
            raise ValueError(f"rate={self.rate} outside (0, 1]")


def noise_sigma(snr_db: float, rate: float) -> float:
    """Noise standard deviation for BPSK at Eb/N0 = snr_db with code rate R."""
    return float(1.0 / np.sqrt(2.0 * rate * 10.0 ** (snr_db / 10.0)))


def _rng(seed: int) -> np.random.Generator:
    # Counter-based generator so per-frame substreams (seed ^ frame index)
    # are independent of worker scheduling.
    return np.random.Generator(np.random.Philox(key=seed & ((1 << 64) - 1)))


def transmit(codeword: np.ndarray, params: ChannelParams) -> np.ndarray:
    """BPSK-modulate and add white Gaussian noise: y = (1 - 2x) + n."""
    x = np.asarray(codeword, dtype=np.float64)
    sigma = noise_sigma(params.snr_db, params.rate)
    return (1.0 - 2.0 * x) + sigma * _rng(params.seed).standard_normal(x.shape)


def channel_llr(received: np.ndarray, params: ChannelParams) -> np.ndarray:
    """A-posteriori channel LLRs 2y/sigma^2 (positive favours bit 0)."""
    sigma = noise_sigma(params.snr_db, params.rate)
    return 2.0 * np.asarray(received, dtype=np.float64) / (sigma * sigma)


@dataclass(frozen=True)
class FrameBatch:
    """Messages, codewords and channel LLRs for a batch of simulated frames."""

    msgs: np.ndarray       # (B, K) uint8
    codewords: np.ndarray  # (B, N) uint8
    llrs: np.ndarray       # (B, N) float64


def simulate_frames(
    code: CodeSpec,
    params: ChannelParams,
    frame_indices: np.ndarray,
    quantizer: Quantizer | None = None,
) -> FrameBatch:
    """End-to-end frame generation with per-frame RNG substreams.

    Frame i draws its message bits and then its noise from the generator
    keyed by params.seed ^ i, so any frame is replayable in isolation and
    aggregate results do not depend on batching or worker count.
    """
    frame_indices = np.asarray(frame_indices, dtype=np.uint64)
    B = frame_indices.shape[0]
    sigma = noise_sigma(params.snr_db, params.rate)
    msgs = np.empty((B, code.K), dtype=np.uint8)
    noise = np.empty((B, code.N), dtype=np.float64)
    for row, idx in enumerate(frame_indices):
        rng = _rng(params.seed ^ int(idx))
        msgs[row] = rng.integers(0, 2, code.K, dtype=np.uint8)
        noise[row] = rng.standard_normal(code.N)
    codewords = encode(code, msgs)
    y = (1.0 - 2.0 * codewords.astype(np.float64)) + sigma * noise
    llrs = 2.0 * y / (sigma * sigma)
    if quantizer is not None:
        llrs = quantize(llrs, quantizer)
    return FrameBatch(msgs=msgs, codewords=codewords, llrs=llrs)
