"""Shift-interleave encoder: codewords -> quaternary matrix of DNA columns.

Indexing is 0-based throughout. A codeword of length ``N = m*s*d`` fills one
block column of the ``ms x Ld`` codeword matrix: bit ``b`` sits in block row
``i = b // (s*d)``, sub-row ``r = (b // d) % s`` and column ``c = b % d`` of
that block (row-major inside each ``s x d`` block).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .channel import to_string

# psi(b1, b2) = 2*b1 + b2 -> A, C, T, G
PSI = np.array([[0, 1], [2, 3]], dtype=np.int8)


def psi(b1, b2):
    return PSI[np.asarray(b1, dtype=np.int64), np.asarray(b2, dtype=np.int64)]


def psi_inv(v, u: int):
    """Bit of code ``u`` (1 or 2) carried by base ``v``."""
    v = np.asarray(v)
    return (v >> 1) & 1 if u == 1 else v & 1


@dataclass(frozen=True)
class SiConfig:
    m: int
    s: int
    d: int
    L: int
    t1: tuple = None
    t2: tuple = None
    padding_seed: int = 0
    permutation: str = "dispersed"
    check_shift_classes: bool = True

    def __post_init__(self):
        for name in ("m", "s", "d", "L"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be positive")
        t1 = tuple(int(v) for v in (self.t1 if self.t1 is not None else [0] * self.m))
        t2 = tuple(int(v) for v in (self.t2 if self.t2 is not None else [0] * self.m))
        object.__setattr__(self, "t1", t1)
        object.__setattr__(self, "t2", t2)
        if len(t1) != self.m or len(t2) != self.m:
            raise ValueError("shift vectors must have length m")
        if min(t1 + t2) < 0:
            raise ValueError("shift values must be nonnegative")
        if self.permutation not in ("dispersed", "stride"):
            raise ValueError(f"unknown permutation {self.permutation!r}")
        if self.check_shift_classes:
            for u, t in ((1, t1), (2, t2)):
                missing = set(range(self.t_max + 1)) - set(t)
                if missing:
                    raise ValueError(f"shift vector T_{u} has no block row with shift {sorted(missing)}")

    @property
    def t_max(self) -> int:
        return max(self.t1 + self.t2)

    @property
    def n(self) -> int:
        """DNA sequence (column) length."""
        return self.m * self.s

    @property
    def N(self) -> int:
        return self.m * self.s * self.d

    @property
    def L_prime(self) -> int:
        return self.L + self.t_max

    @property
    def n_columns(self) -> int:
        return self.L_prime * self.d

    def shifts(self, u: int) -> tuple:
        return self.t1 if u == 1 else self.t2

    def with_shifts(self, t1, t2, **kw) -> "SiConfig":
        args = asdict(self)
        args.update(t1=tuple(t1), t2=tuple(t2), **kw)
        return SiConfig(**args)


def transmission_rate(cfg: SiConfig, r1, r2) -> Fraction:
    """Bits per base: ``L / (L + T_max) * (R_1 + R_2)``."""
    return Fraction(cfg.L, cfg.L + cfg.t_max) * (Fraction(r1) + Fraction(r2))


# --------------------------------------------------------------------------
# bit layout
# --------------------------------------------------------------------------


def bit_layout(cfg: SiConfig):
    """(block row, row within the ms rows, column within the block) for each codeword bit."""
    b = np.arange(cfg.N)
    i = b // (cfg.s * cfg.d)
    r = (b // cfg.d) % cfg.s
    return i, i * cfg.s + r, b % cfg.d


def pack_codewords(codewords, cfg: SiConfig) -> np.ndarray:
    cw = np.asarray(codewords, dtype=np.uint8)
    if cw.shape != (cfg.L, cfg.N):
        raise ValueError(f"expected {cfg.L} codewords of length {cfg.N}, got shape {cw.shape}")
    # (L, m, s, d) -> (m, s, L, d)
    return cw.reshape(cfg.L, cfg.m, cfg.s, cfg.d).transpose(1, 2, 0, 3).reshape(cfg.n, cfg.L * cfg.d)


def unpack_codewords(matrix, cfg: SiConfig) -> np.ndarray:
    a = np.asarray(matrix)
    return a.reshape(cfg.m, cfg.s, cfg.L, cfg.d).transpose(2, 0, 1, 3).reshape(cfg.L, cfg.N)


@dataclass
class IntermediateMatrix:
    bits: np.ndarray
    padding_mask: np.ndarray


def padding_bits(cfg: SiConfig, u: int) -> np.ndarray:
    """Shared pseudo-random fill for ``M_u``, a function of ``padding_seed`` and ``u`` only."""
    rng = np.random.default_rng(np.random.SeedSequence([cfg.padding_seed, u]))
    return rng.integers(0, 2, size=(cfg.n, cfg.n_columns), dtype=np.uint8)


def shift_mask(cfg: SiConfig, u: int) -> np.ndarray:
    """Boolean padding mask of ``M_u``: block (i, j) is padding iff j - T_{u,i} is outside [0, L)."""
    blocks = np.arange(cfg.L_prime)[None, :] - np.asarray(cfg.shifts(u))[:, None]
    pad = (blocks < 0) | (blocks >= cfg.L)
    return np.repeat(np.repeat(pad, cfg.s, axis=0), cfg.d, axis=1)


def shift(packed, shifts, cfg: SiConfig, u: int) -> IntermediateMatrix:
    """Move block row ``i`` right by ``shifts[i]`` block columns and fill the gaps with padding bits."""
    packed = np.asarray(packed, dtype=np.uint8)
    shifts = tuple(int(v) for v in shifts)
    if shifts != cfg.shifts(u):
        cfg = cfg.with_shifts(*((shifts, cfg.t2) if u == 1 else (cfg.t1, shifts)), check_shift_classes=False)
    bits = padding_bits(cfg, u)
    mask = shift_mask(cfg, u)
    for i, t in enumerate(shifts):
        rows = slice(i * cfg.s, (i + 1) * cfg.s)
        bits[rows, t * cfg.d:(t + cfg.L) * cfg.d] = packed[rows]
    return IntermediateMatrix(bits, mask)


def map_bases(m1: IntermediateMatrix, m2: IntermediateMatrix) -> np.ndarray:
    if m1.bits.shape != m2.bits.shape:
        raise ValueError("intermediate matrices differ in shape")
    return psi(m1.bits, m2.bits)


# --------------------------------------------------------------------------
# interleaving
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RowPermutation:
    """``X[r] = Xbar[forward[r]]``; ``inverse`` undoes it."""

    forward: np.ndarray
    inverse: np.ndarray = field(repr=False)

    @classmethod
    def for_config(cls, cfg: SiConfig) -> "RowPermutation":
        r = np.arange(cfg.n)
        if cfg.permutation == "dispersed":
            # X row i*m + k carries sub-row i of block row k
            i, k = divmod(r, cfg.m)
            fwd = k * cfg.s + i
        else:
            # X row i*s + k carries X̄ row k*m + i (every m-th row)
            i, k = divmod(r, cfg.s)
            fwd = k * cfg.m + i
        inv = np.empty_like(fwd)
        inv[fwd] = r
        return cls(fwd, inv)


def interleave(xbar, cfg: SiConfig) -> np.ndarray:
    return np.asarray(xbar)[RowPermutation.for_config(cfg).forward]


def deinterleave(x, cfg: SiConfig) -> np.ndarray:
    return np.asarray(x)[RowPermutation.for_config(cfg).inverse]


# --------------------------------------------------------------------------
# full pipeline
# --------------------------------------------------------------------------


@dataclass
class EncodingMetadata:
    """Everything the receiver needs besides the channel output."""

    cfg: SiConfig
    m1: IntermediateMatrix
    m2: IntermediateMatrix
    permutation: RowPermutation

    def intermediate(self, u: int) -> IntermediateMatrix:
        return self.m1 if u == 1 else self.m2

    def to_json(self) -> str:
        cfg = asdict(self.cfg)
        return json.dumps({
            "config": cfg,
            "t_max": self.cfg.t_max,
            "permutation_forward": self.permutation.forward.tolist(),
            "padding_mask_1": _rle(self.m1.padding_mask),
            "padding_mask_2": _rle(self.m2.padding_mask),
        }, indent=1)


def _rle(mask: np.ndarray) -> list:
    """Per-row runs of padding, as [start, stop) column pairs."""
    out = []
    for row in mask:
        edges = np.flatnonzero(np.diff(np.concatenate([[0], row.astype(np.int8), [0]])))
        out.append(edges.reshape(-1, 2).tolist())
    return out


def metadata_for(cfg: SiConfig) -> EncodingMetadata:
    """Receiver-side metadata; padding is regenerated from the shared seed."""
    parts = []
    for u in (1, 2):
        mask = shift_mask(cfg, u)
        bits = np.where(mask, padding_bits(cfg, u), 0).astype(np.uint8)
        parts.append(IntermediateMatrix(bits, mask))
    return EncodingMetadata(cfg, parts[0], parts[1], RowPermutation.for_config(cfg))


def encode_all(codewords_1, codewords_2, cfg: SiConfig):
    """Shift, map and interleave both codeword sets. Returns ``(X, metadata)``."""
    m1 = shift(pack_codewords(codewords_1, cfg), cfg.t1, cfg, 1)
    m2 = shift(pack_codewords(codewords_2, cfg), cfg.t2, cfg, 2)
    x = interleave(map_bases(m1, m2), cfg)
    return x, EncodingMetadata(cfg, m1, m2, RowPermutation.for_config(cfg))


def decode_noiseless(x, cfg: SiConfig):
    """Invert :func:`encode_all` on an error-free matrix."""
    xbar = deinterleave(x, cfg)
    out = []
    for u in (1, 2):
        bits = psi_inv(xbar, u).astype(np.uint8)
        packed = np.concatenate([bits[i * cfg.s:(i + 1) * cfg.s, t * cfg.d:(t + cfg.L) * cfg.d]
                                 for i, t in enumerate(cfg.shifts(u))], axis=0)
        out.append(unpack_codewords(packed, cfg))
    return out[0], out[1]


def write_fasta(x, path, prefix: str = "col") -> None:
    x = np.asarray(x)
    with open(path, "w") as fh:
        for j in range(x.shape[1]):
            fh.write(f">{prefix}{j}\n{to_string(x[:, j])}\n")


def read_fasta(path) -> list[str]:
    seqs, cur = [], None
    for line in Path(path).read_text().splitlines():
        if line.startswith(">"):
            if cur is not None:
                seqs.append("".join(cur))
            cur = []
        elif cur is not None:
            cur.append(line.strip())
    if cur is not None:
        seqs.append("".join(cur))
    return seqs
