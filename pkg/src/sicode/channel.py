"""Cascaded IDS + block-erasure channel over quaternary sequences.

Bases are integers 0..3 in the order ``A, C, T, G`` so that the bit pair
``(b1, b2)`` maps to base ``2*b1 + b2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BASES = "ACTG"
_LOOKUP = {ch: i for i, ch in enumerate(BASES)}

# share of the total IDS probability given to (insertion, deletion, substitution)
IDS_SPLIT = (0.17, 0.40, 0.43)


def to_string(seq) -> str:
    return "".join(BASES[int(v)] for v in seq)


def from_string(text: str) -> np.ndarray:
    return np.array([_LOOKUP[ch] for ch in text], dtype=np.int8)


@dataclass(frozen=True)
class ChannelParams:
    p_i: float = 0.0
    p_d: float = 0.0
    p_s: float = 0.0
    p_e: float = 0.0

    def __post_init__(self):
        for name in ("p_i", "p_d", "p_s", "p_e"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} is not a probability")
        if self.p_i + self.p_d > 1.0 + 1e-12:
            raise ValueError("p_i + p_d must not exceed 1")

    @classmethod
    def from_ids(cls, p_ids: float, p_e: float = 0.0) -> "ChannelParams":
        """Split a total IDS probability 17/40/43 into insertion/deletion/substitution."""
        pi, pd, ps = (f * p_ids for f in IDS_SPLIT)
        return cls(p_i=pi, p_d=pd, p_s=ps, p_e=p_e)

    @property
    def p_t(self) -> float:
        return 1.0 - self.p_i - self.p_d


@dataclass
class ReceivedPool:
    """Channel output: one entry per transmitted column, ``None`` if erased."""

    columns: list
    source_length: int

    def __len__(self):
        return len(self.columns)

    def is_erased(self, j: int) -> bool:
        return self.columns[j] is None

    def dumps(self) -> str:
        return "".join(("?" if c is None else to_string(c)) + "\n" for c in self.columns)

    @classmethod
    def loads(cls, text: str, source_length: int) -> "ReceivedPool":
        cols = [None if line == "?" else from_string(line) for line in text.splitlines()]
        return cls(cols, source_length)


def column_rng(seed, *key) -> np.random.Generator:
    """Independent generator for one (seed, trial, column, ...) key."""
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in (seed, *key)]))


def transmit_ids(column, params: ChannelParams, rng: np.random.Generator, return_events: bool = False):
    """Pass one base sequence through the IDS channel.

    Per input base: with ``p_i`` it is emitted twice, with ``p_d`` dropped,
    otherwise emitted once. Each emitted copy is independently substituted
    with ``p_s`` by one of the other three bases, uniformly. The number of
    random draws depends only on the input length.

    With ``return_events`` also returns the per-input copy counts (0, 1, 2)
    and, per output symbol, the index of the input base it came from.
    """
    x = np.asarray(column, dtype=np.int8)
    n = x.size
    u = rng.random(n)
    sub_u = rng.random((n, 2))
    sub_off = rng.integers(1, 4, size=(n, 2), dtype=np.int8)
    copies = np.where(u < params.p_i, 2, np.where(u < params.p_i + params.p_d, 0, 1))
    out = np.repeat(x, copies)
    # second draw slot is used only by the duplicate of an inserted base
    first = np.cumsum(copies) - copies
    slot = np.arange(out.size) - np.repeat(first, copies)
    src = np.repeat(np.arange(n), copies)
    hit = sub_u[src, slot] < params.p_s
    out[hit] = (out[hit] + sub_off[src, slot][hit]) % 4
    if return_events:
        return out, copies, src
    return out


def transmit_pool(matrix, params: ChannelParams, seed, trial: int = 0) -> ReceivedPool:
    """Send every column of ``matrix`` through IDS then block erasure.

    Column ``j`` draws from its own stream keyed by ``(seed, trial, j)``.
    """
    x = np.asarray(matrix, dtype=np.int8)
    cols = []
    for j in range(x.shape[1]):
        rng = column_rng(seed, trial, j)
        y = transmit_ids(x[:, j], params, rng)
        erased = rng.random() < params.p_e
        cols.append(None if erased else y)
    return ReceivedPool(cols, x.shape[0])


def event_statistics(params: ChannelParams, n_symbols: int = 10**6, seed: int = 0, chunk: int = 10**5) -> dict:
    """Empirical event rates over ``n_symbols`` random input bases vs their nominal values.

    Returns ``{name: (observed, expected, standard_error)}`` for insertion,
    deletion, single transmission, substitution (per emitted copy, counted
    by comparing each output symbol with its source base) and output length
    per input symbol.
    """
    rng = np.random.default_rng(seed)
    counts = np.zeros(3, dtype=np.int64)
    emitted = changed = 0
    total = len_sum = 0
    while total < n_symbols:
        k = min(chunk, n_symbols - total)
        x = rng.integers(0, 4, k, dtype=np.int8)
        y, copies, src = transmit_ids(x, params, rng, return_events=True)
        counts += np.bincount(copies, minlength=3)
        emitted += y.size
        changed += int(np.count_nonzero(y != x[src]))
        len_sum += copies.sum()
        total += k

    def binom(hits, trials, p):
        return hits / trials, p, np.sqrt(p * (1 - p) / trials)

    mean_len = len_sum / total
    var_len = params.p_i * 4 + params.p_t - (2 * params.p_i + params.p_t) ** 2
    return {
        "insertion": binom(counts[2], total, params.p_i),
        "deletion": binom(counts[0], total, params.p_d),
        "transmission": binom(counts[1], total, params.p_t),
        "substitution": binom(changed, max(emitted, 1), params.p_s),
        "length_per_symbol": (mean_len, 1 + params.p_i - params.p_d, np.sqrt(var_len / total)),
    }


def length_stats(pool: ReceivedPool):
    """(mean length, variance, erased count) over non-erased columns; moments are None if all erased."""
    lens = np.array([len(c) for c in pool.columns if c is not None], dtype=float)
    erased = len(pool.columns) - lens.size
    if lens.size == 0:
        return None, None, erased
    return float(lens.mean()), float(lens.var()), erased
