"""Monte-Carlo BER sweeps over (p_ids, p_e) grids for all schemes."""

from __future__ import annotations

import configparser
import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from .baselines import DETECT_ITERS, MarkerLayout, decode_iterative, encode_marker, encode_naive
from .channel import ChannelParams, transmit_pool
from .decoder import ELL_MAX, ber_evaluate, decode_all
from .detector import DriftLattice, compute_dmax
from .encoder import SiConfig, encode_all, transmission_rate
from .ldpc import LdpcCode, construct_code, encode

log = logging.getLogger(__name__)

SCHEMES = ("si", "naive", "marker8", "marker23")
CSV_FIELDS = ("scheme", "p_ids", "p_e", "trials", "total_bits", "bit_errors", "ber",
              "frame_errors", "fer", "avg_round_iterations", "wall_time_s", "seed")


def report_rate(cfg: SiConfig, r1, r2) -> Fraction:
    """Transmission rate in bits per base."""
    return transmission_rate(cfg, r1, r2)


@lru_cache(maxsize=8)
def build_codes(n_bits: int, variant: str = "regular_3_6", seeds: tuple = (1, 2)) -> tuple:
    """The two component codes, same ensemble, different seeds."""
    return tuple(construct_code(n_bits, Fraction(1, 2), variant, seed=s) for s in seeds)


@dataclass
class ExperimentSpec:
    schemes: tuple = ("si",)
    m: int = 10
    s: int = 10
    d: int = 100
    L: int = 20
    t1: tuple = tuple(range(10))
    t2: tuple = tuple(range(9, -1, -1))
    padding_seed: int = 0
    p_ids: tuple = (0.0,)
    p_e: tuple = (0.0,)
    trials: int = 10
    min_bit_errors: int = 100
    seed: int = 0
    ell_max: int = ELL_MAX
    detect_iters: int = DETECT_ITERS
    code_seeds: tuple = (1, 2)
    marker_seed: int = 0
    workers: int = 1
    record_timing: bool = True
    out: str = "results"

    def __post_init__(self):
        self.schemes = tuple(self.schemes)
        for sc in self.schemes:
            if sc not in SCHEMES:
                raise ValueError(f"unknown scheme {sc!r}; choose from {SCHEMES}")
        if not self.schemes or not self.p_ids or not self.p_e:
            raise ValueError("scheme list and channel grid must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for p in (*self.p_ids, *self.p_e):
            if not 0 <= p <= 1:
                raise ValueError(f"grid value {p} is not a probability")
        self.si_config()

    def si_config(self) -> SiConfig:
        return SiConfig(self.m, self.s, self.d, self.L, tuple(self.t1), tuple(self.t2), self.padding_seed)

    @property
    def N(self) -> int:
        return self.m * self.s * self.d

    def marker_layout(self, scheme: str) -> MarkerLayout | None:
        if scheme.startswith("marker"):
            return MarkerLayout(int(scheme[len("marker"):]), self.m * self.s, self.marker_seed)
        return None

    def column_length(self, scheme: str) -> int:
        lay = self.marker_layout(scheme)
        return lay.n_total if lay else self.m * self.s

    def rate(self, scheme: str, r1, r2) -> Fraction:
        """Bits per base of ``scheme``."""
        cfg = self.si_config()
        if scheme == "si":
            return report_rate(cfg, r1, r2)
        if scheme == "naive":
            return Fraction(r1) + Fraction(r2)
        return self.marker_layout(scheme).bits_per_base(r1, r2)


_TYPES = {f.name: f for f in fields(ExperimentSpec)}


def _convert(name: str, raw: str):
    default = _TYPES[name].default
    raw = raw.strip()
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(default, tuple):
        items = [v.strip() for v in raw.strip("()[]").split(",") if v.strip()]
        if name == "schemes":
            return tuple(items)
        if name in ("p_ids", "p_e"):
            return tuple(float(v) for v in items)
        return tuple(int(v) for v in items)
    if isinstance(default, int):
        return int(raw)
    return raw


def load_spec(path=None, **overrides) -> ExperimentSpec:
    """Read a flat ``key = value`` config file; ``overrides`` win over the file."""
    values = {}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        parser.optionxform = str  # keep ``L`` distinct from ``l``
        parser.read_string("[spec]\n" + Path(path).read_text())
        for key, raw in parser["spec"].items():
            key = "schemes" if key == "scheme" else key
            if key not in _TYPES:
                raise ValueError(f"unknown config key {key!r}")
            values[key] = _convert(key, raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentSpec(**values)


def dump_spec(spec: ExperimentSpec) -> str:
    lines = []
    for k, v in asdict(spec).items():
        if isinstance(v, (tuple, list)):
            v = ", ".join(map(str, v))
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


@dataclass
class ResultRow:
    scheme: str
    p_ids: float
    p_e: float
    trials: int
    total_bits: int
    bit_errors: int
    ber: float
    frame_errors: int
    fer: float
    avg_round_iterations: float
    wall_time_s: float
    seed: int


@dataclass
class TrialOutcome:
    bit_errors: int
    frame_errors: int
    total_bits: int
    frames: int
    iterations: list = field(default_factory=list)
    detections: int = 0


def grid_key(p_ids: float, p_e: float) -> tuple:
    return (int(round(p_ids * 1e9)), int(round(p_e * 1e9)))


def trial_seed(seed: int, p_ids: float, p_e: float, trial: int) -> int:
    """Per-trial seed; depends only on the master seed, the grid values and the trial index."""
    ss = np.random.SeedSequence([seed, *grid_key(p_ids, p_e), trial])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def random_codewords(code: LdpcCode, count: int, rng: np.random.Generator) -> np.ndarray:
    return np.array([encode(code, rng.integers(0, 2, code.n_info, dtype=np.uint8)) for _ in range(count)])


def run_trial(spec: ExperimentSpec, scheme: str, codes, p_ids: float, p_e: float, trial: int) -> TrialOutcome:
    """Fresh codewords, encode, channel, decode, count errors."""
    cfg = spec.si_config()
    tseed = trial_seed(spec.seed, p_ids, p_e, trial)
    rng = np.random.default_rng(np.random.SeedSequence([tseed, 0]))
    cw1 = random_codewords(codes[0], cfg.L, rng)
    cw2 = random_codewords(codes[1], cfg.L, rng)
    params = ChannelParams.from_ids(p_ids, p_e)
    layout = spec.marker_layout(scheme)
    lattice = DriftLattice.for_channel(spec.column_length(scheme), params)
    if scheme == "si":
        x, meta = encode_all(cw1, cw2, cfg)
        pool = transmit_pool(x, params, tseed)
        res = decode_all(pool, codes, cfg, lattice, spec.ell_max, meta)
    else:
        if layout is None:
            x, _ = encode_naive(cw1, cw2, cfg)
        else:
            x, _ = encode_marker(cw1, cw2, cfg, layout)
        pool = transmit_pool(x, params, tseed)
        res = decode_iterative(pool, codes, cfg, lattice, spec.ell_max, layout, spec.detect_iters)
    b1, f1 = ber_evaluate(res.c1_hat, cw1)
    b2, f2 = ber_evaluate(res.c2_hat, cw2)
    return TrialOutcome(b1 + b2, f1 + f2, 2 * cfg.L * cfg.N, 2 * cfg.L,
                        [r.iterations for r in res.records], res.detections)


_WORKER_CODES = None


def _init_worker(codes):
    global _WORKER_CODES
    _WORKER_CODES = codes


def _worker_trial(args):
    spec, scheme, p_ids, p_e, trial = args
    return run_trial(spec, scheme, _WORKER_CODES, p_ids, p_e, trial)


def run_point(spec: ExperimentSpec, scheme: str, codes, p_ids: float, p_e: float, pool=None) -> ResultRow:
    """Trials at one grid point until ``trials`` are done or ``min_bit_errors`` is reached.

    Trials are consumed in index order so the stopping point does not depend
    on the number of workers.
    """
    t0 = time.perf_counter()
    bits = errs = ferr = frames = done = 0
    iters = []
    batch = max(1, spec.workers)
    trial = 0
    while trial < spec.trials and errs < spec.min_bit_errors:
        idx = list(range(trial, min(trial + batch, spec.trials)))
        if pool is None:
            outcomes = (run_trial(spec, scheme, codes, p_ids, p_e, i) for i in idx)
        else:
            outcomes = pool.map(_worker_trial, [(spec, scheme, p_ids, p_e, i) for i in idx])
        for out in outcomes:
            if errs >= spec.min_bit_errors:
                break
            bits += out.total_bits
            errs += out.bit_errors
            ferr += out.frame_errors
            frames += out.frames
            iters.extend(out.iterations)
            done += 1
        trial = idx[-1] + 1
    wall = time.perf_counter() - t0 if spec.record_timing else 0.0
    return ResultRow(scheme, p_ids, p_e, done, bits, errs, errs / bits, ferr, ferr / frames,
                     float(np.mean(iters)) if iters else 0.0, wall, spec.seed)


def _fmt(v):
    if isinstance(v, float):
        return repr(round(v, 12))
    return str(v)


def append_row(path, row: ResultRow) -> None:
    path = Path(path)
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(CSV_FIELDS)
        w.writerow([_fmt(getattr(row, f)) for f in CSV_FIELDS])


def read_rows(path) -> list[ResultRow]:
    conv = {"str": str, "int": int, "float": float}
    with open(path, newline="") as fh:
        return [ResultRow(**{f.name: conv[f.type](rec[f.name]) for f in fields(ResultRow)})
                for rec in csv.DictReader(fh)]


def manifest_text(spec: ExperimentSpec, codes) -> str:
    r1, r2 = codes[0].rate, codes[1].rate
    lines = ["# resolved configuration", dump_spec(spec), "# derived"]
    lines.append(f"N = {spec.N}")
    lines.append(f"code_rates = {r1}, {r2}")
    for sc in spec.schemes:
        rate = spec.rate(sc, r1, r2)
        lines.append(f"rate_bits_per_base[{sc}] = {rate} ({float(rate):.4f})")
    for sc in spec.schemes:
        n = spec.column_length(sc)
        for p in spec.p_ids:
            prm = ChannelParams.from_ids(p)
            lines.append(f"d_max[{sc}, p_ids={p}] = {compute_dmax(n, prm.p_i, prm.p_d)}")
    return "\n".join(lines) + "\n"


def run_experiment(spec: ExperimentSpec, out_dir=None, plot: bool = True) -> list[ResultRow]:
    """Run every (scheme, p_e, p_ids) point; write results.csv, run-manifest and plot.svg if ``out_dir``."""
    codes = build_codes(spec.N, "regular_3_6", tuple(spec.code_seeds))
    csv_path = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "run-manifest.txt").write_text(manifest_text(spec, codes))
        csv_path = out_dir / "results.csv"
        if csv_path.exists():
            csv_path.unlink()
    executor = None
    if spec.workers > 1:
        executor = ProcessPoolExecutor(spec.workers, initializer=_init_worker, initargs=(codes,))
    rows = []
    try:
        for scheme in spec.schemes:
            for p_e in spec.p_e:
                for p_ids in spec.p_ids:
                    row = run_point(spec, scheme, codes, p_ids, p_e, executor)
                    log.info("%s p_ids=%g p_e=%g ber=%.3e (%d trials)", scheme, p_ids, p_e, row.ber, row.trials)
                    rows.append(row)
                    if csv_path is not None:
                        append_row(csv_path, row)
    finally:
        if executor is not None:
            executor.shutdown()
    if out_dir is not None and plot:
        emit_plot(rows, out_dir / "plot.svg")
    return rows


def series(rows) -> dict:
    """Group rows by (scheme, p_e), each sorted by p_ids."""
    out = {}
    for r in rows:
        out.setdefault((r.scheme, r.p_e), []).append(r)
    for k in out:
        out[k].sort(key=lambda r: r.p_ids)
    return out


def emit_plot(rows, path) -> Path:
    """Log-scale BER vs p_ids, one curve per (scheme, p_e).

    Points with zero observed errors are drawn hollow at half of
    ``1 / total_bits``, which is below anything the run could have measured.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = list(rows)
    if not rows:
        raise ValueError("nothing to plot")
    fig, ax = plt.subplots(figsize=(6, 4.2))
    floor_used = False
    for (scheme, p_e), rs in sorted(series(rows).items()):
        x = np.array([r.p_ids for r in rs])
        zero = np.array([r.bit_errors == 0 for r in rs])
        y = np.array([r.ber if r.bit_errors else 0.5 / r.total_bits for r in rs])
        line, = ax.plot(x, y, "-o", label=f"{scheme}, $p_e$={p_e:g}")
        if zero.any():
            floor_used = True
            ax.plot(x[zero], y[zero], "o", mfc="white", mec=line.get_color())
    ax.set_yscale("log")
    ax.set_xlabel("$p_{ids}$")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    if floor_used:
        ax.annotate("hollow: no errors observed (plotted at 0.5/total bits)", xy=(0.01, 0.01),
                    xycoords="axes fraction", fontsize=7)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
