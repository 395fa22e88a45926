"""Command line: ``sicode {sweep, oracle-check, rate, export-code}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .channel import ChannelParams
from .detector import compute_dmax
from .ldpc import write_alist


def _spec(args):
    return harness.load_spec(args.config, seed=args.seed, workers=args.workers)


def cmd_sweep(args):
    spec = _spec(args)
    out = Path(args.out or spec.out)
    rows = harness.run_experiment(spec, out)
    for r in rows:
        print(f"{r.scheme:9s} p_ids={r.p_ids:<8g} p_e={r.p_e:<5g} ber={r.ber:.3e} fer={r.fer:.3f} trials={r.trials}")
    print(f"wrote {out / 'results.csv'}, {out / 'plot.svg'}, {out / 'run-manifest.txt'}")
    return 0


def cmd_rate(args):
    spec = _spec(args)
    codes = harness.build_codes(spec.N, "regular_3_6", tuple(spec.code_seeds))
    r1, r2 = codes[0].rate, codes[1].rate
    print(f"N = {spec.N}, R_1 = {r1}, R_2 = {r2}")
    for sc in spec.schemes:
        rate = spec.rate(sc, r1, r2)
        print(f"{sc}: R_tx = {rate} = {float(rate):.6f} bits/base")
    for p in spec.p_ids:
        prm = ChannelParams.from_ids(p)
        print(f"p_ids = {p}: D_max = {compute_dmax(spec.m * spec.s, prm.p_i, prm.p_d)} (n = {spec.m * spec.s})")
    return 0


def cmd_export_code(args):
    spec = _spec(args)
    codes = harness.build_codes(spec.N, "regular_3_6", tuple(spec.code_seeds))
    out = Path(args.out or spec.out)
    out.mkdir(parents=True, exist_ok=True)
    for u, code in enumerate(codes, 1):
        path = out / f"code{u}.alist"
        write_alist(code, path)
        print(f"wrote {path} ({code.n_bits} bits, {code.n_checks} checks, rate {code.rate})")
    return 0


def cmd_oracle_check(args):
    from .checks import run_oracle_battery

    ok = run_oracle_battery(seed=args.seed or 0, report=print)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sicode", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in [("sweep", cmd_sweep), ("oracle-check", cmd_oracle_check), ("rate", cmd_rate),
                     ("export-code", cmd_export_code)]:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat key = value experiment file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("-v", "--verbose", action="store_true")
        sp.set_defaults(func=fn)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
