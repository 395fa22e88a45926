"""Slow reference implementations used to cross-check the fast paths.

None of these share code with the modules they check.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

STAY, INS, DEL = 0, 1, 2


def enumerate_likelihoods(received, priors, d_max: int, p_i: float, p_d: float, p_s: float) -> np.ndarray:
    """Extrinsic base likelihoods by summing over every per-base event sequence.

    Each sequence of (stay, insert, delete) events is weighted by its
    probability under the reflecting drift walk; given the events, each
    emitted symbol is tied to one input base, so the emission term factorises
    over input positions and the sum over transmitted sequences is done per
    position in closed form.
    """
    y = [int(v) for v in received]
    priors = np.asarray(priors, dtype=float)
    n = priors.shape[0]
    R = len(y)

    def emit(obs, base):
        return 1.0 - p_s if obs == base else p_s / 3.0

    gamma = np.zeros((n, 4))
    for events in itertools.product((STAY, INS, DEL), repeat=n):
        drift = 0
        weight = 1.0
        pos = 0
        emitted = []
        for ev in events:
            pins = p_i if drift < d_max else 0.0
            pdel = p_d if drift > -d_max else 0.0
            pstay = 1.0 - pins - pdel
            if ev == STAY:
                weight *= pstay
                emitted.append((pos,))
                pos += 1
            elif ev == INS:
                weight *= pins
                emitted.append((pos, pos + 1))
                pos += 2
                drift += 1
            else:
                weight *= pdel
                emitted.append(())
                drift -= 1
            if weight == 0.0:
                break
        if weight == 0.0 or pos != R:
            continue
        # e[k, v] = P(symbols emitted by base k | base k = v)
        e = np.ones((n, 4))
        for k, outs in enumerate(emitted):
            for j in outs:
                for v in range(4):
                    e[k, v] *= emit(y[j], v)
        marg = (priors * e).sum(axis=1)
        for k in range(n):
            others = 1.0
            for j in range(n):
                if j != k:
                    others *= marg[j]
            gamma[k] += weight * e[k] * others
    tot = gamma.sum(axis=1, keepdims=True)
    return gamma / tot


def textbook_sp(check_adjacency, n_bits: int, a_priori_iters, clamp: float = 30.0):
    """Flooding sum-product with explicit per-edge loops.

    ``a_priori_iters`` holds one a-priori LLR vector per iteration. Returns a
    list (one per iteration) of ``(c2b, v2c, posterior)`` where the message
    dicts are keyed by ``(check, bit)``.
    """
    edges = [(c, b) for c, bits in enumerate(check_adjacency) for b in bits]
    checks_of = {b: [] for b in range(n_bits)}
    for c, b in edges:
        checks_of[b].append(c)
    c2b = {e: 0.0 for e in edges}
    history = []
    for a in a_priori_iters:
        a = [min(max(float(v), -clamp), clamp) for v in a]
        v2c = {}
        for c, b in edges:
            total = a[b]
            for c2 in checks_of[b]:
                if c2 != c:
                    total += c2b[(c2, b)]
            v2c[(c, b)] = min(max(total, -clamp), clamp)
        new = {}
        for c, bits in enumerate(check_adjacency):
            for b in bits:
                prod = 1.0
                for b2 in bits:
                    if b2 != b:
                        prod *= math.tanh(v2c[(c, b2)] / 2.0)
                if prod >= 1.0:
                    val = math.inf
                elif prod <= -1.0:
                    val = -math.inf
                else:
                    val = 2.0 * math.atanh(prod)
                new[(c, b)] = min(max(val, -clamp), clamp)
        c2b = new
        post = [a[b] + sum(c2b[(c, b)] for c in checks_of[b]) for b in range(n_bits)]
        history.append((dict(c2b), v2c, post))
    return history


def bayes_bit_llr(gamma, u: int, q_partner: float) -> float:
    """LLR of code-``u`` bit from a base likelihood and the partner bit's LLR, by enumeration."""
    p0_partner = 1.0 / (1.0 + math.exp(-q_partner))
    weight = {0: p0_partner, 1: 1.0 - p0_partner}
    num = den = 0.0
    for b1 in (0, 1):
        for b2 in (0, 1):
            v = 2 * b1 + b2
            mine, other = (b1, b2) if u == 1 else (b2, b1)
            term = gamma[v] * weight[other]
            if mine == 0:
                num += term
            else:
                den += term
    return math.log(num / den)


def parity_by_rows(check_adjacency, word) -> bool:
    return all(sum(int(word[b]) for b in bits) % 2 == 0 for bits in check_adjacency)
