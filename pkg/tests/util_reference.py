"""Independent reference implementations used as test oracles.

Everything here is written from the definitions, structurally unlike the
package code: explicit index arithmetic instead of reshape views, a
shift-register CRC instead of the matrix method, and a decoder that walks
an explicitly permuted stage order instead of shuffling its inputs.
"""
from __future__ import annotations

import math

import numpy as np


def crc_remainder_bitwise(bits, poly) -> list[int]:
    """Polynomial long division remainder, one bit at a time."""
    deg = len(poly) - 1
    reg = [int(b) for b in bits] + [0] * deg
    for k in range(len(bits)):
        if reg[k]:
            for j, pj in enumerate(poly):
                reg[k + j] ^= pj
    return reg[len(bits):]


def kron_generator(n: int) -> np.ndarray:
    """F^{kron n} built literally with np.kron."""
    F = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    G = np.array([[1]], dtype=np.uint8)
    for _ in range(n):
        G = np.kron(G, F)
    return G


def encode_u_bruteforce(u: np.ndarray) -> np.ndarray:
    """x = u . F^{kron n} over GF(2) via explicit matrix multiply."""
    n = int(np.log2(len(u)))
    return (np.asarray(u, dtype=np.uint8) @ kron_generator(n)) % 2


def inversion_count(pi) -> int:
    return sum(1 for a in range(len(pi)) for b in range(a + 1, len(pi))
               if pi[a] > pi[b])


def digit_permute_map(pi) -> np.ndarray:
    """Gather map: destination r reads the source whose bit j is r's bit pi[j]."""
    n = len(pi)
    out = np.empty(1 << n, dtype=np.int64)
    for r in range(1 << n):
        g = 0
        for j in range(n):
            g |= ((r >> pi[j]) & 1) << j
        out[r] = g
    return out


def binary_column(n: int, i: int) -> np.ndarray:
    """b_i: 2^{n-i-1} pairs of (2^i zeros, 2^i ones)."""
    zeros = np.zeros(1 << i, dtype=np.uint8)
    ones = np.ones(1 << i, dtype=np.uint8)
    return np.tile(np.concatenate([zeros, ones]), 1 << (n - i - 1))


def _g_scalar_panel(a, b, beta):
    sgn = np.where(a < 0, -1.0, 1.0) * np.where(b < 0, -1.0, 1.0)
    return sgn * np.maximum(np.minimum(np.abs(a), np.abs(b)) - beta, 0.0)


def ref_pfg_decode(llrs, frozen_mask, stages, i_max,
                   beta_r=0.25, beta_l=0.0, q_lo=None, q_hi=None):
    """BP decode on the graph whose left-to-right stage order is `stages`.

    The boundary vectors stay in natural index order; only the internal
    wiring follows the permuted stages: position k couples rows (i,
    i + 2^stages[k]).  One iteration = ascending R sweep then descending
    L sweep, both reading the values their own direction just produced.
    Returns (hd, iterations_used, converged) for a (B, N) llr batch.
    """
    llrs = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
    B, N = llrs.shape
    n = len(stages)
    clip = ((lambda x: np.clip(x, q_lo, q_hi)) if q_lo is not None
            else (lambda x: x))
    prior = q_hi if q_hi is not None else math.inf

    pairs = []
    for k in range(n):
        d = 1 << stages[k]
        up = np.array([i for i in range(N) if not i & d], dtype=np.int64)
        pairs.append((up, up + d))

    R = [np.zeros((B, N)) for _ in range(n + 1)]
    L = [np.zeros((B, N)) for _ in range(n + 1)]
    R[0][:, np.asarray(frozen_mask, dtype=bool)] = prior
    L[n] = llrs.copy()

    def decisions():
        up, lo = pairs[0]
        a, bb = R[0][:, up], R[0][:, lo]
        Lu, Ll = L[1][:, up], L[1][:, lo]
        dec = np.empty((B, N))
        dec[:, up] = clip(R[0][:, up] + clip(_g_scalar_panel(Lu, clip(Ll + bb), beta_l)))
        dec[:, lo] = clip(R[0][:, lo] + clip(clip(_g_scalar_panel(Lu, a, beta_l)) + Ll))
        return dec

    hd = np.zeros((B, N), dtype=np.uint8)
    out_iter = np.full(B, i_max, dtype=np.int64)
    out_conv = np.zeros(B, dtype=bool)
    hist = []
    for it in range(1, i_max + 1):
        for k in range(n - 1):
            up, lo = pairs[k]
            a, bb = R[k][:, up], R[k][:, lo]
            Lu, Ll = L[k + 1][:, up], L[k + 1][:, lo]
            t = clip(Ll + bb)
            R[k + 1][:, up] = clip(_g_scalar_panel(a, t, beta_r))
            R[k + 1][:, lo] = clip(clip(_g_scalar_panel(a, Lu, beta_r)) + bb)
        for k in range(n - 1, 0, -1):
            up, lo = pairs[k]
            a, bb = R[k][:, up], R[k][:, lo]
            Lu, Ll = L[k + 1][:, up], L[k + 1][:, lo]
            t = clip(Ll + bb)
            L[k][:, up] = clip(_g_scalar_panel(Lu, t, beta_l))
            L[k][:, lo] = clip(clip(_g_scalar_panel(Lu, a, beta_l)) + Ll)
        cur = (decisions() < 0).astype(np.uint8)
        hist.append(cur)
        if len(hist) >= 3:
            same = ((hist[-1] == hist[-2]).all(axis=1)
                    & (hist[-2] == hist[-3]).all(axis=1))
            newly = same & ~out_conv
            hd[newly] = cur[newly]
            out_iter[newly] = it
            out_conv |= same
            if out_conv.all():
                return hd, out_iter, out_conv
    hd[~out_conv] = hist[-1][~out_conv]
    return hd, out_iter, out_conv
