"""Sequential detection and tandem decoding of shift-interleaved codewords.

Round ``t`` re-detects every column that carries a block of the ``t``-th
codewords, then alternates single sum-product iterations of the two LDPC
decoders, exchanging extrinsic LLRs through the mapping nodes (one base, two
bits). When the round ends, the detector priors of all positions touched by
codeword ``t`` are refreshed from the final extrinsics so later rounds see
the decoded bits as soft markers.

Arrays indexed by position use the pre-interleaving matrix coordinates
``(row k, column z)``; ``Gamma`` and ``Pi`` have shape ``(n, n_columns, 4)``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .channel import ReceivedPool
from .detector import DriftLattice, detect_columns
from .encoder import EncodingMetadata, SiConfig, bit_layout, metadata_for
from .ldpc import LLR_CLAMP, LdpcCode, SpDecoderState, extrinsic_llrs, sp_iterate, syndrome_check

ELL_MAX = 100


class DetectorFault(RuntimeError):
    """A likelihood tuple with no mass reached the LLR computation."""


# --------------------------------------------------------------------------
# mapping nodes
# --------------------------------------------------------------------------


@dataclass
class MappingNodeIndex:
    """For every position and code: owning codeword (-1 for a known bit), bit index, known value."""

    cfg: SiConfig
    owner: dict
    bit: dict
    known: dict
    rows: np.ndarray
    block_row: np.ndarray
    col_in_block: np.ndarray

    @classmethod
    def build(cls, cfg: SiConfig, meta: EncodingMetadata) -> "MappingNodeIndex":
        k = np.arange(cfg.n)[:, None]
        z = np.arange(cfg.n_columns)[None, :]
        i, r = k // cfg.s, k % cfg.s
        g, c = z // cfg.d, z % cfg.d
        owner, bit, known = {}, {}, {}
        for u in (1, 2):
            t = g - np.asarray(cfg.shifts(u))[i]
            valid = (t >= 0) & (t < cfg.L)
            owner[u] = np.where(valid, t, -1)
            bit[u] = np.where(valid, i * cfg.s * cfg.d + r * cfg.d + c, -1)
            known[u] = np.where(valid, 0, meta.intermediate(u).bits).astype(np.int8)
        blk, rows, cols = bit_layout(cfg)
        return cls(cfg, owner, bit, known, rows, blk, cols)

    def positions(self, u: int, t: int):
        """(rows, cols) of the bits of codeword ``t`` of code ``u``."""
        shifts = np.asarray(self.cfg.shifts(u))
        return self.rows, (t + shifts[self.block_row]) * self.cfg.d + self.col_in_block

    def columns_for_round(self, t: int) -> np.ndarray:
        d = self.cfg.d
        return np.arange(t * d, (t + self.cfg.t_max + 1) * d)

    @property
    def cbn_count(self) -> int:
        return int((self.owner[1] >= 0).sum() + (self.owner[2] >= 0).sum())


def bit_factors(kind_known, known_value, q):
    """``(f(0, .), f(1, .))`` of one side of a mapping node.

    A known bit is a point mass; a code bit contributes ``f(b, q)`` with its
    (clamped) extrinsic LLR.
    """
    q = np.clip(q, -LLR_CLAMP, LLR_CLAMP)
    f0 = np.where(kind_known, known_value == 0, expit(q))
    f1 = np.where(kind_known, known_value == 1, expit(-q))
    return f0.astype(float), f1.astype(float)


def input_llr(gamma, u: int, partner_f0, partner_f1, allow_degenerate=False):
    """LLR of the code-``u`` bit of a base given its likelihood tuple and the partner bit's factors.

    ``gamma[..., v]`` is ordered A, C, T, G. With a known partner the factors
    are an indicator and this restricts the sums to the consistent bases.
    """
    gamma = np.asarray(gamma, dtype=float)
    if (gamma.sum(axis=-1) <= 0).any():
        raise DetectorFault("likelihood tuple with zero mass")
    gA, gC, gT, gG = gamma[..., 0], gamma[..., 1], gamma[..., 2], gamma[..., 3]
    if u == 1:
        num = gA * partner_f0 + gC * partner_f1
        den = gT * partner_f0 + gG * partner_f1
    else:
        num = gA * partner_f0 + gT * partner_f1
        den = gC * partner_f0 + gG * partner_f1
    with np.errstate(divide="ignore", invalid="ignore"):
        llr = np.log(num) - np.log(den)
    llr = np.where((num == 0) & (den == 0), 0.0, llr)
    return np.clip(llr, -LLR_CLAMP, LLR_CLAMP)


def base_prior(f1_pair, f2_pair):
    """Prior over A, C, T, G from the two bit factors: ``pi(v) = f_1(b1(v)) * f_2(b2(v))``."""
    a0, a1 = f1_pair
    b0, b1 = f2_pair
    p = np.stack([a0 * b0, a0 * b1, a1 * b0, a1 * b1], axis=-1)
    tot = p.sum(axis=-1, keepdims=True)
    return p / np.where(tot > 0, tot, 1.0)


# --------------------------------------------------------------------------
# belief state
# --------------------------------------------------------------------------


@dataclass
class BeliefState:
    L: dict
    Q: dict
    Pi: np.ndarray
    Gamma: np.ndarray
    decoded_flags: np.ndarray

    @classmethod
    def zeros(cls, cfg: SiConfig) -> "BeliefState":
        shape = (cfg.L, cfg.N)
        return cls(
            L={1: np.zeros(shape), 2: np.zeros(shape)},
            Q={1: np.zeros(shape), 2: np.zeros(shape)},
            Pi=np.full((cfg.n, cfg.n_columns, 4), 0.25),
            Gamma=np.full((cfg.n, cfg.n_columns, 4), 0.25),
            decoded_flags=np.zeros((2, cfg.L), dtype=bool),
        )


def side_factors(index: MappingNodeIndex, belief: BeliefState, u: int, rows, cols):
    """Bit factors that code ``u`` contributes at the given positions (Q read at the owning codeword)."""
    own = index.owner[u][rows, cols]
    bit = index.bit[u][rows, cols]
    known = own < 0
    q = np.where(known, 0.0, belief.Q[u][np.maximum(own, 0), np.maximum(bit, 0)])
    return bit_factors(known, index.known[u][rows, cols], q)


def update_priors(index: MappingNodeIndex, belief: BeliefState, rows, cols) -> None:
    belief.Pi[rows, cols] = base_prior(side_factors(index, belief, 1, rows, cols),
                                       side_factors(index, belief, 2, rows, cols))


def initialize(cfg: SiConfig, meta: EncodingMetadata | None = None, index: MappingNodeIndex | None = None):
    """Zero LLRs, uniform likelihoods, priors from the known bits alone."""
    meta = meta if meta is not None else metadata_for(cfg)
    index = index if index is not None else MappingNodeIndex.build(cfg, meta)
    belief = BeliefState.zeros(cfg)
    k, z = np.meshgrid(np.arange(cfg.n), np.arange(cfg.n_columns), indexing="ij")
    update_priors(index, belief, k.ravel(), z.ravel())
    return belief, index


# --------------------------------------------------------------------------
# detection over column sets
# --------------------------------------------------------------------------


def detect_into(pool: ReceivedPool, columns, belief: BeliefState, perm_forward, lattice: DriftLattice,
                layout=None) -> int:
    """Detect ``columns`` with the current priors and store the likelihoods in ``belief.Gamma``.

    ``layout`` (a marker layout) maps the payload into a longer transmitted
    column. Returns the number of forward-backward runs.
    """
    columns = np.asarray(columns)
    # priors in transmitted row order: (n_cols, n, 4)
    priors = belief.Pi[perm_forward][:, columns].transpose(1, 0, 2)
    if layout is not None:
        priors = layout.expand_priors(priors)
    received = [pool.columns[j] for j in columns]
    gamma = detect_columns(received, priors, lattice)
    if layout is not None:
        gamma = layout.payload(gamma)
    belief.Gamma[perm_forward[:, None], columns[None, :]] = gamma.transpose(1, 0, 2)
    return sum(r is not None for r in received)


# --------------------------------------------------------------------------
# decoding rounds
# --------------------------------------------------------------------------


@dataclass
class RoundRecord:
    round: int
    iterations: int
    syndrome_1: bool
    syndrome_2: bool
    detect_ms: float
    decode_ms: float
    detections: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class DecodeResult:
    c1_hat: np.ndarray
    c2_hat: np.ndarray
    records: list = field(default_factory=list)
    belief: BeliefState | None = None

    @property
    def detections(self) -> int:
        return sum(r.detections for r in self.records)


def _partner(u):
    return 2 if u == 1 else 1


def tandem_decode(t: int, codes, index: MappingNodeIndex, belief: BeliefState, ell_max: int,
                  refresh_all: bool = False, before_iteration=None):
    """Alternate single SP iterations of the two decoders on codeword ``t``.

    LLRs whose partner is another code bit of round ``t`` are recomputed each
    iteration; the others (known bit, or a codeword of another round) are
    computed once. ``refresh_all`` recomputes everything, which the iterative
    baselines need since their likelihoods change between iterations.
    ``before_iteration(ell)`` runs ahead of each iteration.
    Returns ``(iterations, ok_1, ok_2, hard_1, hard_2)``.
    """
    states = {u: SpDecoderState.fresh(codes[u - 1]) for u in (1, 2)}
    pos = {u: index.positions(u, t) for u in (1, 2)}
    same_round = {}
    for u in (1, 2):
        rows, cols = pos[u]
        same_round[u] = index.owner[_partner(u)][rows, cols] == t
    ok = {1: False, 2: False}
    ell = 0
    while ell < ell_max:
        if before_iteration is not None:
            before_iteration(ell)
        for u in (1, 2):
            rows, cols = pos[u]
            if ell == 0 or refresh_all:
                sel = slice(None)
                r_sel, c_sel = rows, cols
            else:
                sel = same_round[u]
                r_sel, c_sel = rows[sel], cols[sel]
            f = side_factors(index, belief, _partner(u), r_sel, c_sel)
            belief.L[u][t, sel] = input_llr(belief.Gamma[r_sel, c_sel], u, *f)
            sp_iterate(codes[u - 1], states[u], belief.L[u][t])
            belief.Q[u][t] = extrinsic_llrs(states[u], belief.L[u][t])
        ell += 1
        ok = {u: syndrome_check(codes[u - 1], states[u].hard_decision) for u in (1, 2)}
        if ok[1] and ok[2]:
            break
    return ell, ok[1], ok[2], states[1].hard_decision.copy(), states[2].hard_decision.copy()


def decode_round(t: int, pool: ReceivedPool, belief: BeliefState, codes, index: MappingNodeIndex,
                 lattice: DriftLattice, ell_max: int = ELL_MAX):
    """One estimation round: detection, tandem decoding, prior refresh."""
    cfg = index.cfg
    perm = _perm(cfg)
    t0 = time.perf_counter()
    det = detect_into(pool, index.columns_for_round(t), belief, perm, lattice)
    t1 = time.perf_counter()
    iters, ok1, ok2, h1, h2 = tandem_decode(t, codes, index, belief, ell_max)
    for u in (1, 2):
        rows, cols = index.positions(u, t)
        update_priors(index, belief, rows, cols)
    t2 = time.perf_counter()
    belief.decoded_flags[:, t] = (ok1, ok2)
    rec = RoundRecord(t, iters, ok1, ok2, 1e3 * (t1 - t0), 1e3 * (t2 - t1), det)
    return ok1, ok2, h1, h2, rec


def _perm(cfg: SiConfig) -> np.ndarray:
    from .encoder import RowPermutation

    return RowPermutation.for_config(cfg).forward


def decode_all(pool: ReceivedPool, codes, cfg: SiConfig, lattice: DriftLattice, ell_max: int = ELL_MAX,
               meta: EncodingMetadata | None = None, keep_belief: bool = False) -> DecodeResult:
    """Decode rounds ``t = 0 .. L-1`` in order; hard decisions are returned whether or not they check."""
    for code in codes:
        if code.n_bits != cfg.N:
            raise ValueError(f"code length {code.n_bits} does not match N = {cfg.N}")
    if len(pool) != cfg.n_columns:
        raise ValueError(f"pool has {len(pool)} columns, expected {cfg.n_columns}")
    belief, index = initialize(cfg, meta)
    c1 = np.zeros((cfg.L, cfg.N), dtype=np.uint8)
    c2 = np.zeros((cfg.L, cfg.N), dtype=np.uint8)
    records = []
    for t in range(cfg.L):
        _, _, h1, h2, rec = decode_round(t, pool, belief, codes, index, lattice, ell_max)
        c1[t], c2[t] = h1, h2
        records.append(rec)
    return DecodeResult(c1, c2, records, belief if keep_belief else None)


def ber_evaluate(c_hat, c_true):
    """(bit errors, frame errors); a frame is one codeword (one row of the ``(L, N)`` array)."""
    c_hat = np.asarray(c_hat)
    c_true = np.asarray(c_true)
    if c_hat.shape != c_true.shape:
        raise ValueError("shape mismatch")
    diff = c_hat != c_true
    if diff.ndim == 1:
        diff = diff[None]
    return int(diff.sum()), int(diff.any(axis=1).sum())
