"""Comparison schemes: naive codeword separation and LDPC + marker concatenation.

Both keep each pair of codewords on its own block of ``d`` columns (the
shift-interleave layout with all shifts zero) and decode with iterative
detection: the first ``detect_iters`` tandem iterations each re-run the
detector with priors rebuilt from the current extrinsics, later iterations
reuse the last likelihoods.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .channel import ReceivedPool
from .decoder import (ELL_MAX, DecodeResult, RoundRecord, _perm, detect_into, initialize, tandem_decode,
                      update_priors)
from .detector import DriftLattice
from .encoder import SiConfig, encode_all

DETECT_ITERS = 10


def naive_config(cfg: SiConfig) -> SiConfig:
    return cfg.with_shifts((0,) * cfg.m, (0,) * cfg.m)


def encode_naive(codewords_1, codewords_2, cfg: SiConfig):
    """Shift-interleave encoding with both shift vectors zero: no padding, ``L' = L``."""
    return encode_all(codewords_1, codewords_2, naive_config(cfg))


@dataclass(frozen=True)
class MarkerLayout:
    """Two seeded marker bases after every full ``period`` payload bases."""

    period: int
    n_payload: int
    seed: int = 0

    def __post_init__(self):
        if self.period < 1 or self.n_payload < 1:
            raise ValueError("period and payload length must be positive")

    @property
    def n_insertions(self) -> int:
        return self.n_payload // self.period

    @property
    def n_total(self) -> int:
        return self.n_payload + 2 * self.n_insertions

    @cached_property
    def payload_index(self) -> np.ndarray:
        p = np.arange(self.n_payload)
        return p + 2 * (p // self.period)

    @cached_property
    def marker_index(self) -> np.ndarray:
        q = np.arange(1, self.n_insertions + 1)
        start = q * self.period + 2 * (q - 1)
        return np.stack([start, start + 1], axis=1).ravel()

    @cached_property
    def marker_symbols(self) -> np.ndarray:
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, 0x6D6B]))
        return rng.integers(0, 4, size=2 * self.n_insertions, dtype=np.int8)

    def coding_rate(self, code_rate) -> Fraction:
        """Nominal rate ``R * period / (period + 2)`` (information bits per coded bit)."""
        return Fraction(code_rate) * Fraction(self.period, self.period + 2)

    def bits_per_base(self, r1, r2) -> Fraction:
        return (Fraction(r1) + Fraction(r2)) * Fraction(self.n_payload, self.n_total)

    def insert(self, payload) -> np.ndarray:
        """Insert markers into a payload column (or each column of a matrix)."""
        payload = np.asarray(payload, dtype=np.int8)
        if payload.shape[0] != self.n_payload:
            raise ValueError(f"payload length {payload.shape[0]} != {self.n_payload}")
        out = np.empty((self.n_total,) + payload.shape[1:], dtype=np.int8)
        out[self.payload_index] = payload
        out[self.marker_index] = self.marker_symbols.reshape((-1,) + (1,) * (payload.ndim - 1))
        return out

    def strip(self, column) -> np.ndarray:
        return np.asarray(column)[self.payload_index]

    def expand_priors(self, priors) -> np.ndarray:
        """(cols, n_payload, 4) priors -> (cols, n_total, 4) with point masses on the markers."""
        out = np.zeros((priors.shape[0], self.n_total, 4))
        out[:, self.payload_index] = priors
        out[:, self.marker_index, self.marker_symbols] = 1.0
        return out

    def payload(self, gamma) -> np.ndarray:
        return gamma[:, self.payload_index]


def encode_marker(codewords_1, codewords_2, cfg: SiConfig, layout: MarkerLayout):
    """Quaternion-map codeword pairs onto separate column blocks, then add markers to every column."""
    x, meta = encode_naive(codewords_1, codewords_2, cfg)
    return layout.insert(x), meta


def decode_iterative(pool: ReceivedPool, codes, cfg: SiConfig, lattice: DriftLattice, ell_max: int = ELL_MAX,
                     layout: MarkerLayout | None = None, detect_iters: int = DETECT_ITERS) -> DecodeResult:
    """Turbo-style detection and decoding, one codeword pair at a time."""
    cfg = naive_config(cfg)
    if len(pool) != cfg.n_columns:
        raise ValueError(f"pool has {len(pool)} columns, expected {cfg.n_columns}")
    belief, index = initialize(cfg)
    perm = _perm(cfg)
    c1 = np.zeros((cfg.L, cfg.N), dtype=np.uint8)
    c2 = np.zeros((cfg.L, cfg.N), dtype=np.uint8)
    records = []
    for t in range(cfg.L):
        cols = index.columns_for_round(t)
        rows_all = np.repeat(np.arange(cfg.n), cols.size)
        cols_all = np.tile(cols, cfg.n)
        count = [0, 0.0]

        def detect(ell):
            if ell < detect_iters:
                t0 = time.perf_counter()
                update_priors(index, belief, rows_all, cols_all)
                count[0] += detect_into(pool, cols, belief, perm, lattice, layout)
                count[1] += time.perf_counter() - t0

        start = time.perf_counter()

        iters, ok1, ok2, h1, h2 = tandem_decode(t, codes, index, belief, ell_max, refresh_all=True,
                                                before_iteration=detect)
        c1[t], c2[t] = h1, h2
        belief.decoded_flags[:, t] = (ok1, ok2)
        total = time.perf_counter() - start
        records.append(RoundRecord(t, iters, ok1, ok2, 1e3 * count[1], 1e3 * (total - count[1]), count[0]))
    return DecodeResult(c1, c2, records)
