"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or config error,
3 precision or resource error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .adelic import AdelicKernel
from .errors import AdelheatError, UsageError
from .filtration import Filtration
from .heat import HeatKernelFin
from .markov import FiniteAdeleSampler, PathSample, shell_counts, simulate_paths
from .schwartz import eigenfunction_eval, eigenvalue
from .stable import StableKernel
from .verify import CHECKS, VerifyConfig, pooled_chisquare, run_checks

SCHEMA_VERSION = 1

log = logging.getLogger("adelheat")


@dataclass
class RunConfig:
    filtration: dict | str = "factorial"
    alpha: float = 1.0
    beta: float = 2.0
    t: list = field(default_factory=lambda: [0.1, 1.0, 10.0])
    m: list = field(default_factory=lambda: list(range(-5, 6)))
    x: list = field(default_factory=lambda: [0.0, 0.1, 0.5, 1.0, 2.0])
    tolerance: float = 1e-12
    seed: int | None = None
    draws: int = 100_000
    depth: int = 24
    out: str | None = None
    summary: str | None = None
    check: list = field(default_factory=list)

    def validate(self, needs_seed: bool = False):
        if not self.tolerance > 0:
            raise UsageError(f"tolerance must be positive, got {self.tolerance}")
        if not self.alpha > 0:
            raise UsageError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.beta <= 2:
            raise UsageError(f"beta must lie in (0, 2], got {self.beta}")
        for name in ("t", "m", "x"):
            if not getattr(self, name):
                raise UsageError(f"grid '{name}' is empty")
        if any(t <= 0 for t in self.t):
            raise UsageError("every t must be positive")
        if needs_seed and self.seed is None:
            raise UsageError("sampling commands need --seed")
        if self.draws < 1:
            raise UsageError("draws must be positive")

    def filtration_obj(self) -> Filtration:
        return Filtration.from_config(self.filtration)


def _floats(text: str) -> list:
    if text.strip() == "":
        return []
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None


def _ints(text: str) -> list:
    """``a:b`` (inclusive range) or a comma list."""
    text = text.strip()
    if text == "":
        return []
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse index list {text!r}") from None


def load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in data.items():
            if not hasattr(cfg, key):
                raise UsageError(f"unknown config key {key!r}")
            setattr(cfg, key, value)
    overrides = {
        "filtration": args.filtration,
        "alpha": args.alpha,
        "beta": args.beta,
        "tolerance": args.tolerance,
        "seed": args.seed,
        "out": args.out,
        "draws": getattr(args, "draws", None),
        "summary": getattr(args, "summary", None),
        "depth": getattr(args, "depth", None),
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    if isinstance(cfg.filtration, str) and cfg.filtration.lstrip().startswith("{"):
        try:
            cfg.filtration = json.loads(cfg.filtration)
        except json.JSONDecodeError as exc:
            raise UsageError(f"cannot parse filtration JSON: {exc}") from None
    if args.t is not None:
        cfg.t = _floats(args.t)
    if args.m is not None:
        cfg.m = _ints(args.m)
    if getattr(args, "x", None) is not None:
        cfg.x = _floats(args.x)
    if getattr(args, "check", None):
        cfg.check = args.check
    return cfg


def _f(v) -> str:
    return repr(float(v))


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **obj}, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o)}")


# commands ---------------------------------------------------------------------


def cmd_kernel(cfg: RunConfig) -> int:
    k = HeatKernelFin(cfg.filtration_obj(), cfg.alpha, tolerance=cfg.tolerance)
    rows, ok = [], True
    for t in cfg.t:
        for m in cfg.m:
            r = k.pointwise_bound_check(m, t)
            lower = r["nonnegative"]
            upper = r["uniform_ok"] and r["pointwise_ok"]
            ok &= lower and upper
            radius = math.exp(k.filtration.log_psi(m))
            rows.append([_f(t), m, _f(radius), _f(r["Z"]), "pass" if lower else "fail",
                         "pass" if upper else "fail", _f(k.shell_mass(m, t))])
    _emit(_csv(["t", "m", "radius", "Z", "lower_bound_check", "upper_bound_check", "shell_mass"], rows), cfg.out)
    return 0 if ok else 1


def cmd_shells(cfg: RunConfig) -> int:
    k = HeatKernelFin(cfg.filtration_obj(), cfg.alpha, tolerance=cfg.tolerance)
    rows = []
    for t in cfg.t:
        ms, w, lo, hi = k.shell_masses(t, cfg.tolerance)
        for m, mass, c in zip(ms, w, np.cumsum(w)):
            rows.append([_f(t), int(m), _f(mass), _f(c), _f(lo), _f(hi)])
    _emit(_csv(["t", "m", "shell_mass", "cumulative", "lower_tail_bound", "upper_tail_bound"], rows), cfg.out)
    return 0


def cmd_cdf(cfg: RunConfig) -> int:
    k = HeatKernelFin(cfg.filtration_obj(), cfg.alpha, tolerance=cfg.tolerance)
    rows, ok = [], True
    for t in cfg.t:
        for m in cfg.m:
            tail = k.radial_tail(m, t)
            bound = k.tail_bound(m, t)
            ok &= tail <= bound * (1 + 1e-12)
            rows.append([_f(t), m, _f(k.radial_cdf(m, t)), _f(tail), _f(bound)])
    _emit(_csv(["t", "k", "radial_cdf", "tail", "tail_bound"], rows), cfg.out)
    return 0 if ok else 1


def cmd_sample(cfg: RunConfig) -> int:
    f = cfg.filtration_obj()
    k = HeatKernelFin(f, cfg.alpha, tolerance=cfg.tolerance)
    t = cfg.t[0]
    sampler = FiniteAdeleSampler(k, t, cfg.tolerance, cfg.depth)
    # streams: CSV draws, shell-count table, real coordinates
    streams = np.random.SeedSequence(cfg.seed).spawn(3)
    batch = sampler.sample_batch(min(cfg.draws, 1000), np.random.default_rng(streams[0]))
    real = StableKernel(cfg.beta).sample(t, len(batch), np.random.default_rng(streams[2]))
    rows = []
    for i in range(len(batch)):
        x = batch.row(i)
        rows.append([_f(t), x.norm_index(), _f(x.norm()), int(x.gamma), ".".join(map(str, x.digits[:8])), _f(real[i])]
                    if not x.is_zero else [_f(t), "-inf", "0", "inf", "", _f(real[i])])
    _emit(_csv(["t", "norm_index", "norm", "gamma", "digits_prefix", "x_real"], rows), cfg.out)
    counts = shell_counts(sampler, cfg.draws, streams[1])
    p = sampler.shell_probabilities()
    chi2, pval = pooled_chisquare(counts, p)
    summary = {
        "command": "sample",
        "t": t,
        "draws": cfg.draws,
        "seed": cfg.seed,
        "shells": sampler.shells.tolist(),
        "counts": counts.tolist(),
        "expected": (p * cfg.draws).tolist(),
        "chi2": chi2,
        "p_value": pval,
        "tv_distance": 0.5 * float(np.abs(counts / counts.sum() - p).sum()),
        "window_tails": [sampler.lower_tail, sampler.upper_tail],
    }
    if cfg.summary:
        _emit(_json(summary), cfg.summary)
    else:
        sys.stderr.write(_json(summary))
    return 0


def cmd_path(cfg: RunConfig) -> int:
    f = cfg.filtration_obj()
    k = HeatKernelFin(f, cfg.alpha, tolerance=cfg.tolerance)
    times = [0.0] + sorted(cfg.t) if cfg.t[0] > 0 else cfg.t
    rng = np.random.default_rng(cfg.seed)
    ens = simulate_paths(k, times, 1, rng, tolerance=cfg.tolerance, depth=cfg.depth)
    real = np.concatenate([[0.0], np.cumsum([StableKernel(cfg.beta).sample(dt, 1, rng)[0] for dt in np.diff(times)])])
    path: PathSample = ens.path(0)
    _emit(path.to_csv(real=real), cfg.out)
    return 0


def cmd_spectrum(cfg: RunConfig) -> int:
    f = cfg.filtration_obj()
    rows = []
    for n in cfg.m:
        lam = eigenvalue(f, n, cfg.alpha)
        for t in cfg.t:
            decay = math.exp(-t * lam)
            for m in range(-n - 1, 3 - n):
                rows.append([n, _f(lam), _f(t), _f(decay), m, _f(float(eigenfunction_eval(f, n, m)))])
    _emit(_csv(["n", "eigenvalue", "t", "semigroup_factor", "m", "eigenfunction"], rows), cfg.out)
    return 0


def cmd_arch(cfg: RunConfig) -> int:
    k = StableKernel(cfg.beta)
    c = k.fitted_constant()
    rows, ok = [], True
    for t in cfg.t:
        for x in cfg.x:
            z = k.eval(x, t)
            rhs = float(k.bound_rhs(x, t, c))
            ok &= z <= rhs * (1 + 1e-9)
            rows.append([_f(x), _f(t), _f(cfg.beta), _f(z), _f(rhs)])
    _emit(_csv(["x", "t", "beta", "Z_inf", "bound_rhs"], rows), cfg.out)
    return 0 if ok else 1


def cmd_adelic(cfg: RunConfig) -> int:
    a = AdelicKernel(HeatKernelFin(cfg.filtration_obj(), cfg.alpha, tolerance=cfg.tolerance), StableKernel(cfg.beta))
    rows = []
    for t in cfg.t:
        for x in cfg.x:
            for m in cfg.m:
                rows.append([_f(t), _f(x), m, _f(a.eval_radial_certified(x, m, t)[0])])
    _emit(_csv(["t", "x_real", "norm_index", "Z_A"], rows), cfg.out)
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    unknown = [c for c in cfg.check if c not in CHECKS]
    if unknown:
        raise UsageError(f"unknown check(s) {unknown}; available: {sorted(CHECKS)}")
    f = cfg.filtration_obj()
    vcfg = VerifyConfig(
        filtrations=(f.to_config(),),
        beta=cfg.beta,
        seed=0 if cfg.seed is None else cfg.seed,
        draws=cfg.draws,
    )
    report = run_checks(vcfg, cfg.check or None)
    report["filtration"] = f.to_config()
    _emit(json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + "\n", cfg.out)
    return 0 if report["pass"] else 1


COMMANDS = {
    "kernel": (cmd_kernel, "kernel values with bound checks (CSV)"),
    "shells": (cmd_shells, "shell masses over the certified window (CSV)"),
    "cdf": (cmd_cdf, "radial CDF and tail bound (CSV)"),
    "sample": (cmd_sample, "draws from Z(., t) with goodness-of-fit summary"),
    "path": (cmd_path, "one simulated adelic path (CSV)"),
    "verify": (cmd_verify, "run the verification suite (JSON)"),
    "spectrum": (cmd_spectrum, "eigenpair table (CSV)"),
    "arch": (cmd_arch, "Archimedean stable kernel with fitted bound (CSV)"),
    "adelic": (cmd_adelic, "product kernel on R x A_f (CSV)"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config; flags override it")
    common.add_argument("--filtration", help="factorial | lcm | prime_power(p) | JSON object")
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--tolerance", type=float)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--t", help="comma-separated times")
    common.add_argument("--m", help="norm indices, 'a:b' or comma list")
    parser = argparse.ArgumentParser(prog="adelheat", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_)
        if name in ("arch", "adelic"):
            p.add_argument("--x", help="comma-separated real coordinates")
        if name in ("sample", "verify"):
            p.add_argument("--draws", type=int)
        if name in ("sample", "path"):
            p.add_argument("--depth", type=int)
        if name == "sample":
            p.add_argument("--summary", help="summary JSON file (default stderr)")
        if name == "verify":
            p.add_argument("--check", action="append", help="run only this check (repeatable)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
        cfg.validate(needs_seed=args.command in ("sample", "path"))
        fn = COMMANDS[args.command][0]
        return fn(cfg)
    except AdelheatError as exc:
        print(f"adelheat: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, TypeError, KeyError) as exc:
        print(f"adelheat: invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
