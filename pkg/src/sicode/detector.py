"""Forward-backward detection of IDS drift on one DNA column at a time.

The hidden state before input base ``k`` is the drift ``delta = emitted - k``,
confined to ``[-d_max, d_max]``. Per input base the walk moves

* ``delta - 1`` with ``p_d`` (nothing emitted),
* ``delta + 1`` with ``p_i`` (two copies of the base emitted),
* ``delta`` otherwise (one copy emitted),

and at the two boundaries the blocked move is folded into the stay move.
Each emitted copy equals the input base with probability ``1 - p_s`` and is
any particular other base with ``p_s / 3``. The walk starts at drift 0 and is
pinned to ``len(received) - n`` at the end.

Recursions are run in the linear domain with per-step normalisation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .channel import ChannelParams, ReceivedPool

log = logging.getLogger(__name__)


def compute_dmax(n: int, p_i: float, p_d: float) -> int:
    """Drift bound: mean drift plus five standard deviations after ``n`` bases, rounded up."""
    if p_i == 0 and p_d == 0:
        return 0
    mu = abs(n * (p_i - p_d))
    sd = math.sqrt(max(n * (p_i + p_d - (p_i - p_d) ** 2), 0.0))
    return max(1, math.ceil(mu + 5 * sd - 1e-12))


@dataclass(frozen=True)
class DriftLattice:
    d_max: int
    p_i: float
    p_d: float
    p_s: float

    def __post_init__(self):
        if self.d_max < 0:
            raise ValueError("d_max must be nonnegative")
        if min(self.p_i, self.p_d, self.p_s) < 0 or self.p_i + self.p_d > 1 or self.p_s > 1:
            raise ValueError("invalid channel probabilities")
        if self.d_max == 0 and self.p_i + self.p_d > 0:
            raise ValueError("d_max must be at least 1 when insertions or deletions occur")

    @classmethod
    def for_channel(cls, n: int, params: ChannelParams, d_max: int | None = None) -> "DriftLattice":
        if d_max is None:
            d_max = compute_dmax(n, params.p_i, params.p_d)
        return cls(d_max, params.p_i, params.p_d, params.p_s)

    @property
    def n_states(self) -> int:
        return 2 * self.d_max + 1

    @property
    def states(self) -> np.ndarray:
        return np.arange(-self.d_max, self.d_max + 1)

    def transition_matrix(self) -> np.ndarray:
        """Row-stochastic drift transitions (reflecting boundaries)."""
        D = self.n_states
        t = np.zeros((D, D))
        for s in range(D):
            pdel = self.p_d if s > 0 else 0.0
            pins = self.p_i if s < D - 1 else 0.0
            t[s, s] = 1.0 - pdel - pins
            if pdel:
                t[s, s - 1] = pdel
            if pins:
                t[s, s + 1] = pins
        return t

    def emission(self, observed: int, base: int) -> float:
        return 1.0 - self.p_s if observed == base else self.p_s / 3.0


@njit(cache=True)
def _fb_column(y, priors, dmax, pi, pd, ps, out):
    n = priors.shape[0]
    R = y.size
    D = 2 * dmax + 1
    end = R - n + dmax
    e_hit = 1.0 - ps
    e_miss = ps / 3.0
    alpha = np.zeros((n + 1, D))
    beta = np.zeros((n + 1, D))
    p_del = np.empty(D)
    p_ins = np.empty(D)
    p_stay = np.empty(D)
    for s in range(D):
        p_del[s] = pd if s > 0 else 0.0
        p_ins[s] = pi if s < D - 1 else 0.0
        p_stay[s] = 1.0 - p_del[s] - p_ins[s]
    # per-step, per-state marginal emission weights under the prior
    w1 = np.zeros((n, D))
    w2 = np.zeros((n, D))
    psum = np.empty(n)
    for k in range(n):
        tot = 0.0
        for x in range(4):
            tot += priors[k, x]
        psum[k] = tot
        for s in range(D):
            j = k + s - dmax
            if j < 0 or j >= R:
                continue
            acc1 = 0.0
            acc2 = 0.0
            for x in range(4):
                e = e_hit if y[j] == x else e_miss
                acc1 += priors[k, x] * e
                if j + 1 < R:
                    e2 = e_hit if y[j + 1] == x else e_miss
                    acc2 += priors[k, x] * e * e2
            w1[k, s] = acc1
            w2[k, s] = acc2

    alpha[0, dmax] = 1.0
    for k in range(n):
        for s in range(D):
            a = alpha[k, s]
            if a == 0.0:
                continue
            alpha[k + 1, s] += a * p_stay[s] * w1[k, s]
            if s < D - 1:
                alpha[k + 1, s + 1] += a * p_ins[s] * w2[k, s]
            if s > 0:
                alpha[k + 1, s - 1] += a * p_del[s] * psum[k]
        tot = 0.0
        for s in range(D):
            tot += alpha[k + 1, s]
        if tot <= 0.0:
            return 1
        for s in range(D):
            alpha[k + 1, s] /= tot

    beta[n, end] = 1.0
    for k in range(n - 1, -1, -1):
        tot = 0.0
        for s in range(D):
            v = p_stay[s] * w1[k, s] * beta[k + 1, s]
            if s < D - 1:
                v += p_ins[s] * w2[k, s] * beta[k + 1, s + 1]
            if s > 0:
                v += p_del[s] * psum[k] * beta[k + 1, s - 1]
            beta[k, s] = v
            tot += v
        if tot <= 0.0:
            return 2
        for s in range(D):
            beta[k, s] /= tot

    for k in range(n):
        g0 = 0.0
        g1 = 0.0
        g2 = 0.0
        g3 = 0.0
        for s in range(D):
            a = alpha[k, s]
            if a == 0.0:
                continue
            j = k + s - dmax
            dele = 0.0
            if s > 0:
                dele = a * p_del[s] * beta[k + 1, s - 1]
            st = 0.0
            ins = 0.0
            if 0 <= j < R:
                st = a * p_stay[s] * beta[k + 1, s]
                if s < D - 1 and j + 1 < R:
                    ins = a * p_ins[s] * beta[k + 1, s + 1]
            for x in range(4):
                e = e_hit if (0 <= j < R and y[j] == x) else e_miss
                v = dele + st * e
                if ins != 0.0:
                    e2 = e_hit if y[j + 1] == x else e_miss
                    v += ins * e * e2
                if x == 0:
                    g0 += v
                elif x == 1:
                    g1 += v
                elif x == 2:
                    g2 += v
                else:
                    g3 += v
        tot = g0 + g1 + g2 + g3
        if tot <= 0.0:
            return 3
        out[k, 0] = g0 / tot
        out[k, 1] = g1 / tot
        out[k, 2] = g2 / tot
        out[k, 3] = g3 / tot
    return 0


@njit(cache=True)
def _fb_batch(y_cat, offsets, priors, dmax, pi, pd, ps, out, status):
    for c in range(priors.shape[0]):
        y = y_cat[offsets[c]:offsets[c + 1]]
        status[c] = _fb_column(y, priors[c], dmax, pi, pd, ps, out[c])


def _prepare(received, n: int, d_max: int):
    y = np.asarray(received, dtype=np.int8)
    if y.size > n + d_max:
        log.warning("received length %d exceeds n + d_max = %d; truncating", y.size, n + d_max)
        y = y[:n + d_max]
    if y.size < n - d_max:
        log.warning("received length %d below n - d_max = %d; column treated as erased", y.size, n - d_max)
        return None
    return y


def forward_backward(received, priors, lattice: DriftLattice) -> np.ndarray:
    """Extrinsic base likelihoods ``gamma[k, v]`` for one received column.

    ``priors`` is ``(n, 4)``; the prior at ``k`` itself is left out of
    ``gamma[k]``. Rows of the result are normalised to sum to one.
    """
    priors = np.ascontiguousarray(priors, dtype=float)
    return detect_columns([received], priors[None], lattice)[0]


def detect_columns(received_list, priors, lattice: DriftLattice) -> np.ndarray:
    """Run :func:`forward_backward` over a batch; ``None`` entries give uniform rows."""
    priors = np.ascontiguousarray(priors, dtype=float)
    n_cols, n = priors.shape[:2]
    gamma = np.full((n_cols, n, 4), 0.25)
    ys, idx = [], []
    for c, rec in enumerate(received_list):
        if rec is None:
            continue
        y = _prepare(rec, n, lattice.d_max)
        if y is not None:
            ys.append(y)
            idx.append(c)
    if not idx:
        return gamma
    idx = np.asarray(idx)
    offsets = np.concatenate([[0], np.cumsum([y.size for y in ys])]).astype(np.int64)
    y_cat = np.concatenate(ys).astype(np.int8) if offsets[-1] else np.zeros(0, dtype=np.int8)
    out = np.full((idx.size, n, 4), 0.25)
    status = np.zeros(idx.size, dtype=np.int64)
    _fb_batch(y_cat, offsets, np.ascontiguousarray(priors[idx]), lattice.d_max,
              lattice.p_i, lattice.p_d, lattice.p_s, out, status)
    bad = status != 0
    if bad.any():
        log.warning("%d column(s) had zero likelihood under the drift model; treated as erased", int(bad.sum()))
        out[bad] = 0.25
    gamma[idx] = out
    return gamma


def detect_column_set(pool: ReceivedPool, column_indices, priors, lattice: DriftLattice) -> np.ndarray:
    """Detect the listed pool columns; erased columns get uniform likelihoods."""
    column_indices = list(column_indices)
    if not column_indices:
        return np.zeros((0, pool.source_length, 4))
    return detect_columns([pool.columns[j] for j in column_indices], priors, lattice)
