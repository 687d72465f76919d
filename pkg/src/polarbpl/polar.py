"""Polar code construction, Kronecker-product encoding and CRC handling."""
from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

__all__ = [
    "CRC11_POLY",
    "CodeSpec",
    "ReliabilitySequence",
    "build_code",
    "code_id",
    "crc_attach",
    "crc_check",
    "crc_check_batch",
    "encode",
    "gaussian_construct",
    "load_sequence",
    "nr_sequence_1024",
    "polar_transform",
]

# CRC-11: x^11 + x^10 + x^9 + x^5 + 1, coefficients MSB first.
CRC11_POLY = (1, 1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1)


@dataclass(frozen=True)
class ReliabilitySequence:
    """Bit-channel indices ordered from least to most reliable."""

    order: np.ndarray

    def __post_init__(self):
        order = np.array(self.order, dtype=np.int64, copy=True)
        if order.ndim != 1:
            raise ValueError("reliability order must be one-dimensional")
        n = order.shape[0]
        if not np.array_equal(np.sort(order), np.arange(n)):
            raise ValueError(f"order is not a permutation of 0..{n - 1}")
        order.flags.writeable = False
        object.__setattr__(self, "order", order)

    def __len__(self) -> int:
        return self.order.shape[0]


@dataclass(frozen=True)
class CodeSpec:
    """An (N, K) polar code with P CRC bits; K_prime = K + P positions carry data."""

    n: int
    N: int
    K: int
    P: int
    K_prime: int
    frozen_mask: np.ndarray
    crc_poly: tuple[int, ...]

    def __post_init__(self):
        if not (1 <= self.n <= 20):
            raise ValueError(f"n={self.n} outside supported range 1..20")
        if self.N != 1 << self.n:
            raise ValueError(f"N={self.N} is not 2^{self.n}")
        if self.K_prime != self.K + self.P:
            raise ValueError("K_prime must equal K + P")
        mask = np.asarray(self.frozen_mask, dtype=bool)
        if mask.shape != (self.N,):
            raise ValueError(f"frozen_mask must have shape ({self.N},)")
        if int(mask.sum()) != self.N - self.K_prime:
            raise ValueError("frozen_mask must freeze exactly N - K_prime positions")
        _check_crc_poly(self.crc_poly, self.P)
        mask = mask.copy()
        mask.flags.writeable = False
        object.__setattr__(self, "frozen_mask", mask)
        object.__setattr__(self, "crc_poly", tuple(int(c) for c in self.crc_poly))

    def to_config(self) -> dict:
        """Serialize to a plain-dict config block (poly and mask as hex strings)."""
        poly_int = int("".join(map(str, self.crc_poly)), 2)
        mask_int = sum(1 << i for i in range(self.N) if self.frozen_mask[i])
        return {
            "n": self.n,
            "K": self.K,
            "P": self.P,
            "crc_poly": f"{poly_int:x}",
            "frozen_mask": f"{mask_int:x}",
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "CodeSpec":
        n, K, P = int(cfg["n"]), int(cfg["K"]), int(cfg["P"])
        N = 1 << n
        poly_int = int(cfg["crc_poly"], 16)
        poly = tuple(int(b) for b in f"{poly_int:b}")
        mask_int = int(cfg["frozen_mask"], 16)
        mask = np.array([(mask_int >> i) & 1 for i in range(N)], dtype=bool)
        return cls(n=n, N=N, K=K, P=P, K_prime=K + P, frozen_mask=mask, crc_poly=poly)


def _check_crc_poly(poly, P: int) -> None:
    poly = tuple(int(c) for c in poly)
    if len(poly) != P + 1:
        raise ValueError(f"crc_poly must have degree {P} (length {P + 1})")
    if poly[0] != 1 or poly[-1] != 1:
        raise ValueError("crc_poly needs leading and trailing coefficient 1")
    if any(c not in (0, 1) for c in poly):
        raise ValueError("crc_poly coefficients must be 0/1")


def code_id(code: CodeSpec) -> str:
    poly_int = int("".join(map(str, code.crc_poly)), 2)
    return f"polar_n{code.n}_k{code.K}_p{code.P}_crc{poly_int:x}"


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def _phi(x: np.ndarray) -> np.ndarray:
    """Gaussian-approximation phi(x) for mean-LLR density evolution."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    small = x < 10.0
    xs = x[small]
    out[small] = np.exp(-0.4527 * np.power(xs, 0.86) + 0.0218)
    xl = x[~small]
    out[~small] = np.sqrt(np.pi / xl) * np.exp(-xl / 4.0) * (1.0 - 10.0 / (7.0 * xl))
    return out


_PHI_AT_10 = float(_phi(np.array([10.0]))[0])


def _phi_inv(y: np.ndarray) -> np.ndarray:
    """Inverse of _phi: closed form below x=10, vectorized Newton above."""
    y = np.asarray(y, dtype=np.float64)
    out = np.zeros_like(y)
    lo = y > _PHI_AT_10  # inverts to x < 10
    yl = np.clip(y[lo], None, np.exp(0.0218))
    out[lo] = np.power((0.0218 - np.log(yl)) / 0.4527, 1.0 / 0.86)
    hi = ~lo
    if np.any(hi):
        ly = np.log(y[hi])
        x = np.maximum(10.0, -4.0 * ly)
        for _ in range(30):
            f = -x / 4.0 + 0.5 * (np.log(np.pi) - np.log(x)) + np.log1p(-10.0 / (7.0 * x)) - ly
            df = -0.25 - 0.5 / x + (10.0 / (7.0 * x * x)) / (1.0 - 10.0 / (7.0 * x))
            x = np.maximum(10.0, x - f / df)
        out[hi] = x
    return out


_LN2 = float(np.log(2.0))


def gaussian_construct(n: int, design_snr_db: float) -> ReliabilitySequence:
    """Reliability ordering from density evolution of bit-channel LLR means.

    The design SNR is interpreted as Es/N0 in dB, giving an initial mean
    LLR of 4 * 10^(snr/10).  Ties are broken toward the lower index.
    """
    if not (1 <= n <= 20):
        raise ValueError(f"n={n} outside supported range 1..20")
    means = np.array([4.0 * 10.0 ** (design_snr_db / 10.0)])
    for _ in range(n):
        phi = _phi(means)
        minus = np.empty_like(means)
        # Below the underflow floor of phi, use the large-mean asymptote
        # phi(m - 4 ln 2) ~= 2 phi(m).
        tiny = phi < 1e-300
        arg = phi * (2.0 - phi)
        minus[~tiny] = _phi_inv(arg[~tiny])
        minus[tiny] = means[tiny] - 4.0 * _LN2
        # Each channel splits in place (minus at even, plus at odd offsets),
        # so the first split lands on the most significant index bit.
        out = np.empty(means.size * 2)
        out[0::2] = minus
        out[1::2] = 2.0 * means
        means = out
    return ReliabilitySequence(np.argsort(means, kind="stable"))


def load_sequence(path: str | Path) -> ReliabilitySequence:
    """Read a reliability sequence: one integer per line, least reliable first."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(int(text))
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: not an integer: {text!r}") from None
    n = len(values)
    seen = set(values)
    if len(seen) != n or seen != set(range(n)):
        raise ValueError(f"{path}: entries are not a permutation of 0..{n - 1}")
    return ReliabilitySequence(np.array(values, dtype=np.int64))


def nr_sequence_1024() -> ReliabilitySequence:
    """The bundled 5G NR universal reliability sequence for N=1024."""
    ref = resources.files("polarbpl").joinpath("data/nr_reliability_1024.txt")
    with resources.as_file(ref) as path:
        return load_sequence(path)


def build_code(
    n: int,
    K: int,
    P: int,
    seq: ReliabilitySequence,
    crc_poly=CRC11_POLY,
) -> CodeSpec:
    """Freeze the N-K-P least reliable positions of seq."""
    N = 1 << n
    if K + P > N:
        raise ValueError(f"K + P = {K + P} exceeds N = {N}")
    if len(seq) != N:
        raise ValueError(f"sequence length {len(seq)} does not match N = {N}")
    if P == 0:
        crc_poly = (1,)
    mask = np.ones(N, dtype=bool)
    mask[seq.order[N - (K + P):]] = False
    return CodeSpec(n=n, N=N, K=K, P=P, K_prime=K + P,
                    frozen_mask=mask, crc_poly=tuple(crc_poly))


# ---------------------------------------------------------------------------
# CRC
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _power_remainders(k_bits: int, poly: tuple[int, ...]) -> np.ndarray:
    """Rows i = coefficients of x^(k_bits-1-i) mod g(x), shape (k_bits, P)."""
    P = len(poly) - 1
    if P == 0:
        return np.zeros((k_bits, 0), dtype=np.uint8)
    poly_low = sum(c << (P - 1 - i) for i, c in enumerate(poly[1:]))  # g - x^P
    rem = 1  # x^0
    rows = []
    for _ in range(k_bits):
        rows.append(rem)
        rem <<= 1  # multiply by x
        if rem >> P:
            rem = (rem ^ (1 << P)) ^ poly_low
    rows.reverse()
    out = np.array([[(r >> (P - 1 - j)) & 1 for j in range(P)] for r in rows],
                   dtype=np.uint8)
    out.flags.writeable = False
    return out


def crc_attach(msg: np.ndarray, crc_poly=CRC11_POLY) -> np.ndarray:
    """Append the CRC remainder of msg * x^P; register starts at zero, no final xor."""
    msg = np.asarray(msg, dtype=np.uint8)
    K = msg.shape[-1]
    P = len(crc_poly) - 1
    rows = _power_remainders(K + P, tuple(crc_poly))[:K]
    rem = (msg.astype(np.int64) @ rows.astype(np.int64)) % 2
    return np.concatenate([msg, rem.astype(np.uint8)], axis=-1)


def crc_check(info: np.ndarray, crc_poly=CRC11_POLY) -> bool:
    """True iff the word, read as a polynomial, is divisible by the CRC polynomial."""
    return bool(crc_check_batch(np.asarray(info)[None, :], crc_poly)[0])


def crc_check_batch(info: np.ndarray, crc_poly=CRC11_POLY) -> np.ndarray:
    """Vectorized crc_check over the rows of a (B, K_prime) bit matrix."""
    info = np.asarray(info, dtype=np.uint8)
    rows = _power_remainders(info.shape[-1], tuple(crc_poly))
    if rows.shape[1] == 0:
        return np.ones(info.shape[0], dtype=bool)
    rem = (info.astype(np.int64) @ rows.astype(np.int64)) % 2
    return ~rem.any(axis=-1)


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def polar_transform(u: np.ndarray) -> np.ndarray:
    """Multiply u by the n-fold Kronecker power of [[1,0],[1,1]] over GF(2).

    Accepts (..., N) arrays; natural (non-bit-reversed) index order.
    Self-inverse.
    """
    u = np.asarray(u, dtype=np.uint8)
    N = u.shape[-1]
    n = int(N).bit_length() - 1
    if N != 1 << n:
        raise ValueError(f"length {N} is not a power of two")
    x = u.copy()
    lead = x.shape[:-1]
    for j in range(n):
        v = x.reshape(*lead, -1, 2, 1 << j)
        v[..., 0, :] ^= v[..., 1, :]
    return x


def encode(code: CodeSpec, msg: np.ndarray) -> np.ndarray:
    """CRC-attach msg, map to the unfrozen positions (ascending), transform.

    msg may be a single (K,) vector or a (B, K) batch.
    """
    msg = np.asarray(msg, dtype=np.uint8)
    if msg.shape[-1] != code.K:
        raise ValueError(f"message length {msg.shape[-1]} != K = {code.K}")
    info = crc_attach(msg, code.crc_poly)
    u = np.zeros(msg.shape[:-1] + (code.N,), dtype=np.uint8)
    u[..., ~code.frozen_mask] = info
    return polar_transform(u)
