"""Oracle batteries: fast paths against independent brute-force references."""

from __future__ import annotations

import time

import numpy as np

from . import oracles
from .detector import DriftLattice, forward_backward
from .ldpc import SpDecoderState, construct_code, sp_iterate

FB_TOL = 1e-9
SP_TOL = 1e-12


def fb_battery(instances: int = 200, seed: int = 0):
    """Max relative error of detector likelihoods vs event enumeration (n in 3..6, d_max <= 2)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for it in range(instances):
        n = int(rng.integers(3, 7))
        d_max = int(rng.integers(1, 3))
        p_ids = (0.05, 0.2)[it % 2]
        p_i, p_d, p_s = 0.17 * p_ids, 0.40 * p_ids, 0.43 * p_ids
        r = max(0, n + int(rng.integers(-d_max, d_max + 1)))
        y = rng.integers(0, 4, r)
        priors = rng.dirichlet(np.ones(4), size=n)
        if it % 4 == 0:
            priors[rng.integers(n)] = np.eye(4)[rng.integers(4)]
        got = forward_backward(y, priors, DriftLattice(d_max, p_i, p_d, p_s))
        ref = oracles.enumerate_likelihoods(y, priors, d_max, p_i, p_d, p_s)
        worst = max(worst, float(np.max(np.abs(got - ref) / ref)))
    return worst


def random_small_code(rng):
    n = int(rng.choice([8, 10, 12]))
    kind = int(rng.integers(3))
    seed = int(rng.integers(1 << 30))
    if kind == 0:
        return construct_code(n, 0.5, "regular_3_6", seed=seed)
    profile = ({2: 0.5, 3: 0.5}, {2: 0.3, 3: 0.5, 4: 0.2})[kind - 1]
    return construct_code(n, 0.5, "irregular_profile", seed=seed, profile=profile)


def sp_battery(codes: int = 50, iterations: int = 5, seed: int = 0, scale: float = 2.0):
    """Max absolute message difference vs a loop-based tanh-rule decoder."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(codes):
        code = random_small_code(rng)
        priors = [rng.normal(0.0, scale, code.n_bits) for _ in range(iterations)]
        ref = oracles.textbook_sp([list(a) for a in code.check_adjacency], code.n_bits, priors)
        state = SpDecoderState.fresh(code)
        for a, (c2b, v2c, post) in zip(priors, ref):
            sp_iterate(code, state, a)
            keys = list(zip(code.edge_check.tolist(), code.edge_bit.tolist()))
            worst = max(worst,
                        float(np.max(np.abs(state.check_to_bit - np.array([c2b[k] for k in keys])))),
                        float(np.max(np.abs(state.bit_to_check - np.array([v2c[k] for k in keys])))),
                        float(np.max(np.abs(state.posterior_llrs - np.array(post)))))
    return worst


def run_oracle_battery(seed: int = 0, report=print) -> bool:
    ok = True
    t0 = time.perf_counter()
    err = fb_battery(seed=seed)
    passed = err <= FB_TOL
    ok &= passed
    report(f"[{'PASS' if passed else 'FAIL'}] forward-backward vs enumeration: max rel err {err:.2e} "
           f"(tol {FB_TOL:g}, {time.perf_counter() - t0:.1f}s)")
    t0 = time.perf_counter()
    err = sp_battery(seed=seed)
    passed = err <= SP_TOL
    ok &= passed
    report(f"[{'PASS' if passed else 'FAIL'}] sum-product vs tanh-rule reference: max abs err {err:.2e} "
           f"(tol {SP_TOL:g}, {time.perf_counter() - t0:.1f}s)")
    return ok


def ordering_points(rows, winner="si", losers=("naive", "marker8"), factor=10.0, min_errors=100):
    """Per p_e, the p_ids values where ``winner`` has BER at least ``factor`` times below every loser.

    A loser only counts once it has accumulated ``min_errors`` bit errors at that point.
    """
    table = {(r.scheme, r.p_e, r.p_ids): r for r in rows}
    out = {}
    for (sc, p_e, p_ids), r in sorted(table.items()):
        if sc != winner:
            continue
        others = [table.get((lo, p_e, p_ids)) for lo in losers]
        ok = all(o is not None and o.bit_errors >= min_errors and factor * r.ber <= o.ber for o in others)
        out.setdefault(p_e, [])
        if ok:
            out[p_e].append(p_ids)
    return out
