"""Binary LDPC component codes.

Tanner graphs are built by progressive edge growth (PEG), encoding is
systematic through a Gauss-Jordan reduced parity-check matrix, and decoding is
the log-domain sum-product rule on a flooding schedule, exposed one iteration
at a time so that an outer loop can refresh the a-priori LLRs between
iterations.

Edges are stored in check order (CSR layout); ``edge_bit[e]`` is the bit end of
edge ``e`` and ``check_ptr[c]:check_ptr[c+1]`` are the edges of check ``c``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from numba import njit
from scipy import sparse

LLR_CLAMP = 30.0


class ConstructionError(RuntimeError):
    """The requested Tanner graph could not be built (retry with another seed)."""


# --------------------------------------------------------------------------
# code container
# --------------------------------------------------------------------------


@dataclass(eq=False)
class LdpcCode:
    """A binary LDPC code with its systematic encoder.

    Treat instances as immutable; they are shared between decoders and trials.
    """

    n_bits: int
    n_checks: int
    check_ptr: np.ndarray
    edge_bit: np.ndarray
    bit_ptr: np.ndarray
    bit_checks: np.ndarray
    rank: int = field(init=False)
    info_positions: np.ndarray = field(init=False, repr=False)
    parity_positions: np.ndarray = field(init=False, repr=False)
    _parity_rows: np.ndarray = field(init=False, repr=False)
    _edge_check: np.ndarray = field(init=False, repr=False)
    _slots: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.check_ptr = np.asarray(self.check_ptr, dtype=np.int64)
        self.edge_bit = np.asarray(self.edge_bit, dtype=np.int64)
        self.bit_ptr = np.asarray(self.bit_ptr, dtype=np.int64)
        self.bit_checks = np.asarray(self.bit_checks, dtype=np.int64)
        degs = np.diff(self.check_ptr)
        self._edge_check = np.repeat(np.arange(self.n_checks), degs)
        _check_graph(self)
        # padded (check, slot) -> edge table; -1 marks an empty slot
        width = int(degs.max()) if self.n_checks else 0
        slots = np.full((self.n_checks, width), -1, dtype=np.int64)
        offs = np.arange(self.edge_bit.size) - self.check_ptr[self._edge_check]
        slots[self._edge_check, offs] = np.arange(self.edge_bit.size)
        self._slots = slots
        self._build_encoder()

    # graph views ---------------------------------------------------------

    @property
    def n_edges(self) -> int:
        return int(self.edge_bit.size)

    @property
    def edge_check(self) -> np.ndarray:
        return self._edge_check

    @property
    def check_adjacency(self) -> list[np.ndarray]:
        return [self.edge_bit[a:b] for a, b in zip(self.check_ptr[:-1], self.check_ptr[1:])]

    @property
    def bit_adjacency(self) -> list[np.ndarray]:
        return [self.bit_checks[a:b] for a, b in zip(self.bit_ptr[:-1], self.bit_ptr[1:])]

    @property
    def bit_degrees(self) -> np.ndarray:
        return np.diff(self.bit_ptr)

    @property
    def check_degrees(self) -> np.ndarray:
        return np.diff(self.check_ptr)

    @property
    def n_info(self) -> int:
        return self.n_bits - self.rank

    @property
    def rate(self) -> Fraction:
        return Fraction(self.n_bits - self.rank, self.n_bits)

    def parity_check_matrix(self) -> sparse.csr_matrix:
        data = np.ones(self.n_edges, dtype=np.uint8)
        return sparse.csr_matrix((data, self.edge_bit, self.check_ptr), shape=(self.n_checks, self.n_bits))

    # encoder -------------------------------------------------------------

    def _build_encoder(self):
        dense = self.parity_check_matrix().toarray().astype(bool)
        rows, pivots = _gf2_rref(dense)
        self.rank = len(pivots)
        pivots = np.asarray(pivots, dtype=np.int64)
        info = np.setdiff1d(np.arange(self.n_bits), pivots)
        self.parity_positions = pivots
        self.info_positions = info
        # parity bit pivots[r] = xor of rref row r over the info columns
        self._parity_rows = _pack_bits(rows[: self.rank][:, info])


def _check_graph(code: LdpcCode):
    n, m = code.n_bits, code.n_checks
    if code.check_ptr.size != m + 1 or code.bit_ptr.size != n + 1:
        raise ValueError("adjacency pointer arrays do not match code dimensions")
    if code.edge_bit.size != code.bit_checks.size:
        raise ValueError("check and bit adjacency disagree on the edge count")
    if code.edge_bit.size and (code.edge_bit.min() < 0 or code.edge_bit.max() >= n):
        raise ValueError("bit index out of range")
    pairs_c = np.stack([code._edge_check, code.edge_bit], axis=1)
    bit_of = np.repeat(np.arange(n), np.diff(code.bit_ptr))
    pairs_b = np.stack([code.bit_checks, bit_of], axis=1)
    if np.unique(pairs_c, axis=0).shape[0] != pairs_c.shape[0]:
        raise ValueError("repeated (bit, check) edge")
    a = pairs_c[np.lexsort(pairs_c.T[::-1])]
    b = pairs_b[np.lexsort(pairs_b.T[::-1])]
    if not np.array_equal(a, b):
        raise ValueError("check_adjacency and bit_adjacency describe different graphs")


def _gf2_rref(h: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2). Returns (packed rows unpacked, pivot columns)."""
    m, n = h.shape
    words = _pack_bits(h)
    pivots: list[int] = []
    r = 0
    for col in range(n):
        if r == m:
            break
        w, sh = divmod(col, 64)
        colbits = (words[r:, w] >> np.uint64(sh)) & np.uint64(1)
        hit = np.flatnonzero(colbits)
        if hit.size == 0:
            continue
        p = r + hit[0]
        if p != r:
            words[[r, p]] = words[[p, r]]
        rows = np.flatnonzero((words[:, w] >> np.uint64(sh)) & np.uint64(1))
        rows = rows[rows != r]
        if rows.size:
            words[rows] ^= words[r]
        pivots.append(col)
        r += 1
    return _unpack_bits(words, n), pivots


def _pack_bits(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=bool)
    n = a.shape[-1]
    nw = max(1, -(-n // 64))
    padded = np.zeros(a.shape[:-1] + (nw * 64,), dtype=bool)
    padded[..., :n] = a
    by = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(by).view(np.uint64)


def _unpack_bits(words: np.ndarray, n: int) -> np.ndarray:
    by = np.ascontiguousarray(words).view(np.uint8)
    return np.unpackbits(by, axis=-1, bitorder="little")[..., :n].astype(bool)


def encode(code: LdpcCode, data_bits) -> np.ndarray:
    """Systematically encode ``data_bits`` (length ``n_info``) into a codeword."""
    data = np.asarray(data_bits, dtype=np.uint8)
    if data.shape != (code.n_info,):
        raise ValueError(f"expected {code.n_info} data bits, got shape {data.shape}")
    cw = np.zeros(code.n_bits, dtype=np.uint8)
    cw[code.info_positions] = data
    if code.rank:
        packed = _pack_bits(data.astype(bool))
        par = np.bitwise_count(code._parity_rows & packed).sum(axis=1) & 1
        cw[code.parity_positions] = par.astype(np.uint8)
    return cw


def extract_data(code: LdpcCode, codeword) -> np.ndarray:
    return np.asarray(codeword, dtype=np.uint8)[code.info_positions]


def syndrome(code: LdpcCode, word) -> np.ndarray:
    word = np.asarray(word)
    if word.shape != (code.n_bits,):
        raise ValueError(f"expected a word of length {code.n_bits}, got shape {word.shape}")
    ones = (word[code.edge_bit] & 1).astype(np.int64)
    return (np.bincount(code.edge_check, weights=ones, minlength=code.n_checks).astype(np.int64) & 1).astype(np.uint8)


def syndrome_check(code: LdpcCode, hard_decision) -> bool:
    """True iff every parity check is satisfied."""
    return not syndrome(code, hard_decision).any()


# --------------------------------------------------------------------------
# sum-product decoding
# --------------------------------------------------------------------------


@dataclass(eq=False)
class SpDecoderState:
    bit_to_check: np.ndarray
    check_to_bit: np.ndarray
    posterior_llrs: np.ndarray
    hard_decision: np.ndarray
    iteration_count: int = 0

    @classmethod
    def fresh(cls, code: LdpcCode) -> "SpDecoderState":
        return cls(
            bit_to_check=np.zeros(code.n_edges),
            check_to_bit=np.zeros(code.n_edges),
            posterior_llrs=np.zeros(code.n_bits),
            hard_decision=np.zeros(code.n_bits, dtype=np.uint8),
        )


def sp_iterate(code: LdpcCode, state: SpDecoderState, a_priori_llrs) -> SpDecoderState:
    """Run one flooding iteration of log-domain sum-product decoding in place.

    Every LLR is clamped to ``[-LLR_CLAMP, LLR_CLAMP]`` before the tanh rule
    and every check-to-bit message is clamped on the way out.
    """
    a = np.clip(np.asarray(a_priori_llrs, dtype=float), -LLR_CLAMP, LLR_CLAMP)
    if a.shape != (code.n_bits,):
        raise ValueError(f"expected {code.n_bits} a-priori LLRs, got shape {a.shape}")
    eb = code.edge_bit
    c2b = state.check_to_bit
    incoming = np.bincount(eb, weights=c2b, minlength=code.n_bits)
    v2c = np.clip(a[eb] + incoming[eb] - c2b, -LLR_CLAMP, LLR_CLAMP)

    t = np.tanh(0.5 * v2c)
    slots = code._slots
    tt = np.where(slots >= 0, t[slots], 1.0)
    ones = np.ones((tt.shape[0], 1))
    left = np.cumprod(np.hstack([ones, tt[:, :-1]]), axis=1)
    right = np.cumprod(np.hstack([ones, tt[:, :0:-1]]), axis=1)[:, ::-1]
    excl = left * right
    prod = np.empty_like(t)
    valid = slots >= 0
    prod[slots[valid]] = excl[valid]
    with np.errstate(divide="ignore"):
        new_c2b = np.clip(2.0 * np.arctanh(prod), -LLR_CLAMP, LLR_CLAMP)

    post = a + np.bincount(eb, weights=new_c2b, minlength=code.n_bits)
    state.bit_to_check = v2c
    state.check_to_bit = new_c2b
    state.posterior_llrs = post
    state.hard_decision = (post < 0).astype(np.uint8)
    state.iteration_count += 1
    return state


def extrinsic_llrs(state: SpDecoderState, a_priori_llrs) -> np.ndarray:
    """Posterior minus a-priori, i.e. the sum of incoming check messages per bit."""
    a = np.clip(np.asarray(a_priori_llrs, dtype=float), -LLR_CLAMP, LLR_CLAMP)
    return state.posterior_llrs - a


# --------------------------------------------------------------------------
# construction
# --------------------------------------------------------------------------


def construct_code(n_bits: int, rate=Fraction(1, 2), variant: str = "regular_3_6", seed: int = 0,
                   profile: dict[int, float] | None = None, strict: bool = False) -> LdpcCode:
    """Build an LDPC code by progressive edge growth.

    Parameters
    ----------
    n_bits : int
        Code length.
    rate : rational
        Design rate; ``n_bits * (1 - rate)`` checks are created.
    variant : {"regular_3_6", "irregular_profile"}
        ``irregular_profile`` takes bit-degree fractions (node perspective)
        from ``profile``; check degrees are made as even as possible.
    seed : int
        Tie-break seed. Same arguments give the same graph.
    strict : bool
        Raise :class:`ConstructionError` instead of accepting a 4-cycle when no
        cycle-free placement exists (only happens for tiny codes).
    """
    rate = Fraction(rate).limit_denominator(1 << 20)
    if n_bits <= 0 or n_bits % 2:
        raise ValueError("n_bits must be a positive even integer")
    m = n_bits * (1 - rate)
    if m.denominator != 1 or not 0 < m < n_bits:
        raise ValueError(f"n_bits * (1 - rate) must be an integer in (0, n_bits), got {m}")
    m = int(m)
    if variant == "regular_3_6":
        if rate != Fraction(1, 2):
            raise ValueError("the (3,6)-regular variant has design rate 1/2")
        bit_deg = np.full(n_bits, 3, dtype=np.int64)
    elif variant == "irregular_profile":
        if not profile:
            raise ValueError("irregular_profile needs a degree profile")
        bit_deg = _degrees_from_profile(profile, n_bits)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    n_edges = int(bit_deg.sum())
    base, extra = divmod(n_edges, m)
    chk_cap = np.full(m, base, dtype=np.int64)
    chk_cap[:extra] += 1
    if bit_deg.max() > m:
        raise ConstructionError("bit degree exceeds the number of checks")

    order = np.argsort(bit_deg, kind="stable")
    vn_adj, cn_adj, vn_deg, cn_deg, status, four_cycles = _peg(
        order, bit_deg, chk_cap, np.uint64(seed * 2654435761 + 88172645463325252 & (2**64 - 1) or 1))
    if status != 0:
        raise ConstructionError(f"PEG ran out of admissible checks (seed={seed})")
    if strict and four_cycles:
        raise ConstructionError(f"could not avoid {four_cycles} length-4 cycles (seed={seed})")
    return _from_padded(n_bits, m, vn_adj, vn_deg, cn_adj, cn_deg)


def _degrees_from_profile(profile: dict[int, float], n_bits: int) -> np.ndarray:
    degs = sorted(int(k) for k in profile)
    frac = np.array([float(profile[k]) for k in degs])
    frac = frac / frac.sum()
    counts = np.floor(frac * n_bits).astype(np.int64)
    rem = n_bits - counts.sum()
    order = np.argsort(-(frac * n_bits - counts), kind="stable")
    counts[order[:rem]] += 1
    return np.repeat(np.array(degs, dtype=np.int64), counts)


def _from_padded(n, m, vn_adj, vn_deg, cn_adj, cn_deg) -> LdpcCode:
    bit_ptr = np.concatenate([[0], np.cumsum(vn_deg)])
    check_ptr = np.concatenate([[0], np.cumsum(cn_deg)])
    bit_checks = np.concatenate([vn_adj[b, :vn_deg[b]] for b in range(n)]) if n else np.zeros(0)
    edge_bit = np.concatenate([cn_adj[c, :cn_deg[c]] for c in range(m)]) if m else np.zeros(0)
    return LdpcCode(n_bits=n, n_checks=m, check_ptr=check_ptr, edge_bit=edge_bit,
                    bit_ptr=bit_ptr, bit_checks=bit_checks)


@njit(cache=True)
def _xorshift(state):
    x = state
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    return x * np.uint64(2685821657736338717)


@njit(cache=True)
def _peg(order, bit_deg, chk_cap, rng):
    n = bit_deg.size
    m = chk_cap.size
    dv = bit_deg.max()
    dc = chk_cap.max()
    vn_adj = -np.ones((n, dv), dtype=np.int64)
    cn_adj = -np.ones((m, dc), dtype=np.int64)
    vn_deg = np.zeros(n, dtype=np.int64)
    cn_deg = np.zeros(m, dtype=np.int64)
    seen_c = -np.ones(m, dtype=np.int64)
    seen_v = -np.ones(n, dtype=np.int64)
    level_c = np.zeros(m, dtype=np.int64)
    frontier = np.empty(m, dtype=np.int64)
    nxt = np.empty(m, dtype=np.int64)
    cand = np.empty(m, dtype=np.int64)
    stamp = 0
    four_cycles = 0
    open_checks = 0
    for c in range(m):
        if chk_cap[c] > 0:
            open_checks += 1

    for oi in range(n):
        b = order[oi]
        for k in range(bit_deg[b]):
            stamp += 1
            ncand = 0
            depth_found = -1
            if vn_deg[b] == 0:
                for c in range(m):
                    if cn_deg[c] < chk_cap[c]:
                        cand[ncand] = c
                        ncand += 1
            else:
                # breadth-first expansion from b over the current graph
                seen_v[b] = stamp
                nf = 0
                reached_open = 0
                for j in range(vn_deg[b]):
                    c = vn_adj[b, j]
                    seen_c[c] = stamp
                    level_c[c] = 0
                    frontier[nf] = c
                    nf += 1
                    if cn_deg[c] < chk_cap[c]:
                        reached_open += 1
                level = 0
                while True:
                    nn = 0
                    for fi in range(nf):
                        c = frontier[fi]
                        for j in range(cn_deg[c]):
                            v = cn_adj[c, j]
                            if seen_v[v] == stamp:
                                continue
                            seen_v[v] = stamp
                            for jj in range(vn_deg[v]):
                                c2 = vn_adj[v, jj]
                                if seen_c[c2] != stamp:
                                    seen_c[c2] = stamp
                                    level_c[c2] = level + 1
                                    nxt[nn] = c2
                                    nn += 1
                    newly_open = 0
                    for fi in range(nn):
                        c = nxt[fi]
                        if cn_deg[c] < chk_cap[c]:
                            newly_open += 1
                    if nn == 0 or reached_open == open_checks:
                        # stagnation, or everything already reached: take the unreached
                        for c in range(m):
                            if seen_c[c] != stamp and cn_deg[c] < chk_cap[c]:
                                cand[ncand] = c
                                ncand += 1
                        depth_found = 1 << 30
                        break
                    if reached_open + newly_open == open_checks:
                        # all open checks reached: pick from the farthest layer
                        for fi in range(nn):
                            c = nxt[fi]
                            if cn_deg[c] < chk_cap[c]:
                                cand[ncand] = c
                                ncand += 1
                        depth_found = level + 1
                        break
                    reached_open += newly_open
                    for fi in range(nn):
                        frontier[fi] = nxt[fi]
                    nf = nn
                    level += 1
                if ncand == 0:
                    # fall back to any open check not already adjacent
                    for c in range(m):
                        if cn_deg[c] < chk_cap[c]:
                            adj = False
                            for j in range(vn_deg[b]):
                                if vn_adj[b, j] == c:
                                    adj = True
                            if not adj:
                                cand[ncand] = c
                                ncand += 1
                    depth_found = 1
            if ncand == 0:
                return vn_adj, cn_adj, vn_deg, cn_deg, 1, four_cycles
            # lowest current degree, uniform tie-break
            best = 1 << 30
            for i in range(ncand):
                if cn_deg[cand[i]] < best:
                    best = cn_deg[cand[i]]
            nb = 0
            for i in range(ncand):
                if cn_deg[cand[i]] == best:
                    cand[nb] = cand[i]
                    nb += 1
            rng = _xorshift(rng)
            c = cand[np.int64(rng % np.uint64(nb))]
            if depth_found == 1:
                four_cycles += 1
            vn_adj[b, vn_deg[b]] = c
            vn_deg[b] += 1
            cn_adj[c, cn_deg[c]] = b
            cn_deg[c] += 1
            if cn_deg[c] == chk_cap[c]:
                open_checks -= 1
    return vn_adj, cn_adj, vn_deg, cn_deg, 0, four_cycles


def count_four_cycles(code: LdpcCode) -> int:
    """Number of length-4 cycles: pairs of checks sharing two or more bits."""
    h = code.parity_check_matrix().astype(np.int64)
    overlap = (h @ h.T).tocoo()
    mask = overlap.row < overlap.col
    k = overlap.data[mask]
    return int((k * (k - 1) // 2).sum())


# --------------------------------------------------------------------------
# alist interchange
# --------------------------------------------------------------------------


def to_alist(code: LdpcCode) -> str:
    """Serialize in MacKay's alist format (1-based, zero-padded rows)."""
    bdeg, cdeg = code.bit_degrees, code.check_degrees
    out = io.StringIO()
    out.write(f"{code.n_bits} {code.n_checks}\n")
    out.write(f"{int(bdeg.max(initial=0))} {int(cdeg.max(initial=0))}\n")
    out.write(" ".join(map(str, bdeg)) + "\n")
    out.write(" ".join(map(str, cdeg)) + "\n")
    width = int(bdeg.max(initial=0))
    for nbrs in code.bit_adjacency:
        row = list(nbrs + 1) + [0] * (width - len(nbrs))
        out.write(" ".join(map(str, row)) + "\n")
    width = int(cdeg.max(initial=0))
    for nbrs in code.check_adjacency:
        row = list(nbrs + 1) + [0] * (width - len(nbrs))
        out.write(" ".join(map(str, row)) + "\n")
    return out.getvalue()


def from_alist(text: str) -> LdpcCode:
    tok = text.split()
    pos = 0

    def take(k):
        nonlocal pos
        vals = [int(t) for t in tok[pos:pos + k]]
        if len(vals) != k:
            raise ValueError("truncated alist")
        pos += k
        return vals

    n, m = take(2)
    max_b, max_c = take(2)
    bdeg = take(n)
    cdeg = take(m)
    bit_rows = [take(max_b) for _ in range(n)]
    chk_rows = [take(max_c) for _ in range(m)]
    bit_checks = np.array([c - 1 for row, d in zip(bit_rows, bdeg) for c in row[:d]], dtype=np.int64)
    edge_bit = np.array([b - 1 for row, d in zip(chk_rows, cdeg) for b in row[:d]], dtype=np.int64)
    return LdpcCode(n_bits=n, n_checks=m,
                    check_ptr=np.concatenate([[0], np.cumsum(cdeg)]), edge_bit=edge_bit,
                    bit_ptr=np.concatenate([[0], np.cumsum(bdeg)]), bit_checks=bit_checks)


def write_alist(code: LdpcCode, path) -> None:
    Path(path).write_text(to_alist(code))


def read_alist(path) -> LdpcCode:
    return from_alist(Path(path).read_text())
