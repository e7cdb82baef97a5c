"""Named verification checks, each returning a JSON-ready result.

Every check reports the measured quantity, its tolerance and a pass flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .filtration import Filtration
from .heat import (
    HeatKernelFin,
    chapman_kolmogorov_report,
    dirac_limit_finite,
    markov_conditions_report,
    semigroup_vs_convolution,
)
from .markov import FiniteAdeleSampler, shell_counts
from .oracles import padic_bruteforce_kernel, sphere_decomposition_kernel
from .schwartz import RadialProfile, TestFunction, fourier
from .stable import StableKernel
from .adelic import AdelicKernel

BUILTIN = ("factorial", "prime_power(2)", "lcm")


@dataclass
class VerifyConfig:
    filtrations: tuple = BUILTIN
    alphas: tuple = (0.5, 1.0, 2.0)
    ts: tuple = (0.01, 0.1, 1.0, 10.0)
    beta: float = 1.5
    seed: int = 0
    draws: int = 1_000_000
    tolerance: float = 1e-10
    extra: dict = field(default_factory=dict)

    def kernels(self):
        for name in self.filtrations:
            f = Filtration.from_config(name)
            for a in self.alphas:
                yield HeatKernelFin(f, a)


def _result(name, measured, tolerance, ok, **details):
    return {"name": name, "measured": float(measured), "tolerance": float(tolerance), "pass": bool(ok), **details}


def check_normalization(cfg: VerifyConfig) -> dict:
    worst = 0.0
    for k in cfg.kernels():
        for t in cfg.ts:
            r = k.normalization_report(t, cfg.tolerance)
            worst = max(worst, r["deviation"] + r["lower_tail_bound"] + r["upper_tail_bound"])
    return _result("normalization", worst, cfg.tolerance, worst <= cfg.tolerance)


def check_series_oracle(cfg: VerifyConfig) -> dict:
    worst = 0.0
    for k in cfg.kernels():
        for m in range(-10, 10):
            for t in np.geomspace(0.01, 10, 10):
                worst = max(worst, abs(k.kernel_radial(m, t) - sphere_decomposition_kernel(k.filtration, k.alpha, m, t)))
    return _result("series_oracle", worst, 1e-10, worst <= 1e-10)


def check_bounds(cfg: VerifyConfig) -> dict:
    violations = 0
    points = 0
    for k in cfg.kernels():
        for t in cfg.ts:
            for m in range(-12, 13):
                r = k.pointwise_bound_check(m, t)
                tail_ok = k.radial_tail(m, t) <= k.tail_bound(m, t) * (1 + 1e-12) + 1e-300
                violations += (not r["nonnegative"]) + (not r["uniform_ok"]) + (not r["pointwise_ok"]) + (not tail_ok)
                points += 1
    return _result("bounds", violations, 0, violations == 0, points=points)


def check_chapman_kolmogorov(cfg: VerifyConfig) -> dict:
    worst = 0.0
    for k in cfg.kernels():
        for t in (0.1, 1.0):
            for s in (0.1, 1.0):
                worst = max(worst, chapman_kolmogorov_report(k, t, s, range(-6, 7))["max_abs_diff"])
    return _result("chapman_kolmogorov", worst, 1e-8, worst < 1e-8)


def check_eigenpair(cfg: VerifyConfig) -> dict:
    worst = 0.0
    for k in cfg.kernels():
        for n in range(-5, 6):
            for t in (0.1, 1.0):
                worst = max(worst, semigroup_vs_convolution(k, RadialProfile(k.filtration, {n: 1.0}), t)["relative"])
    return _result("eigenpair", worst, 1e-12, worst < 1e-12)


def check_parseval(cfg: VerifyConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for name in cfg.filtrations:
        f = Filtration.from_config(name)
        for k, l in ((2, -2), (3, -1), (1, -3), (0, -4)):
            if f.quotient(k, l) > 720:
                continue
            dim = f.quotient(k, l)
            phi = TestFunction(f, k, l, rng.normal(size=dim) + 1j * rng.normal(size=dim))
            lhs = phi.inner(phi).real
            g = fourier(phi)
            rhs = g.inner(g).real
            worst = max(worst, abs(lhs - rhs) / lhs)
    return _result("parseval", worst, 1e-12, worst < 1e-12)


def check_padic_oracle(cfg: VerifyConfig) -> dict:
    k = HeatKernelFin(Filtration.prime_power(2), 1.0)
    worst = 0.0
    for m in range(-5, 5):
        for t in (0.1, 0.5, 1.0, 2.0, 5.0):
            worst = max(worst, abs(k.kernel_radial(m, t) - padic_bruteforce_kernel(2, 1.0, m, t, a=3)))
    return _result("padic_oracle", worst, 1e-12, worst < 1e-12)


def check_tail(cfg: VerifyConfig) -> dict:
    worst_excess = -math.inf
    monotone = True
    for k in cfg.kernels():
        for l in (-2, 0, 2):
            rows = dirac_limit_finite(k, l, [10.0**-j for j in range(7)])
            worst_excess = max(worst_excess, max(r["deviation"] - r["bound"] for r in rows))
            devs = [r["deviation"] for r in rows]
            monotone &= all(b <= a for a, b in zip(devs, devs[1:]))
    ok = worst_excess <= 0 and monotone
    return _result("tail", worst_excess, 0, ok, monotone=monotone)


def check_markov_conditions(cfg: VerifyConfig) -> dict:
    ok = True
    for k in cfg.kernels():
        ok &= markov_conditions_report(k, [0.01, 0.1, 1.0], range(1, 8), 0)["pass"]
    return _result("markov_conditions", 0 if ok else 1, 0, ok)


def check_monte_carlo(cfg: VerifyConfig) -> dict:
    k = HeatKernelFin(Filtration.factorial(), 1.0)
    s = FiniteAdeleSampler(k, 1.0)
    counts = shell_counts(s, cfg.draws, cfg.seed)
    p = s.shell_probabilities()
    chi2, pval = pooled_chisquare(counts, p)
    tv = 0.5 * float(np.abs(counts / counts.sum() - p).sum())
    return _result("monte_carlo", tv, 0.005, pval > 0.001 and tv < 0.005, chi2=chi2, p_value=pval, draws=cfg.draws)


def check_arch(cfg: VerifyConfig) -> dict:
    worst = 0.0
    for beta in (1.0, 2.0):
        kern = StableKernel(beta)
        for x in np.linspace(-2, 2, 21):
            for t in (0.1, 1.0, 10.0):
                worst = max(worst, abs(kern.eval(x, t) - kern.eval_by_quadrature(x, t)[0]))
    bound_ok = True
    for beta in (1.0, 1.5, 2.0):
        kern = StableKernel(beta)
        c = kern.fitted_constant()
        for t in (0.1, 1.0, 10.0):
            xs = np.linspace(-5, 5, 41)
            bound_ok &= bool(np.all(kern.eval(xs, t) <= kern.bound_rhs(xs, t, c) * (1 + 1e-9)))
    return _result("arch", worst, 1e-8, worst < 1e-8 and bound_ok, bound_ok=bound_ok)


def check_adelic(cfg: VerifyConfig) -> dict:
    worst = 0.0
    for name in cfg.filtrations:
        a = AdelicKernel(HeatKernelFin(Filtration.from_config(name), 1.0), StableKernel(cfg.beta))
        for t in (0.1, 1.0):
            r = a.normalization_report(t)
            worst = max(worst, r["deviation"])
    return _result("adelic", worst, 1e-6, worst <= 1e-6)


def pooled_chisquare(counts, probs, min_expected: float = 5.0):
    """Chi-squared statistic and p-value, pooling cells with expected count below ``min_expected``."""
    counts = np.asarray(counts, dtype=float)
    expected = np.asarray(probs, dtype=float) * counts.sum()
    keep = expected >= min_expected
    obs = np.append(counts[keep], counts[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    if exp[-1] == 0:
        obs, exp = obs[:-1], exp[:-1]
    exp *= obs.sum() / exp.sum()
    res = stats.chisquare(obs, exp)
    return float(res.statistic), float(res.pvalue)


CHECKS = {
    "normalization": check_normalization,
    "series_oracle": check_series_oracle,
    "bounds": check_bounds,
    "chapman_kolmogorov": check_chapman_kolmogorov,
    "eigenpair": check_eigenpair,
    "parseval": check_parseval,
    "padic_oracle": check_padic_oracle,
    "tail": check_tail,
    "markov_conditions": check_markov_conditions,
    "monte_carlo": check_monte_carlo,
    "arch": check_arch,
    "adelic": check_adelic,
}


def run_checks(cfg: VerifyConfig, names=None) -> dict:
    names = list(CHECKS) if not names else list(names)
    results = [CHECKS[n](cfg) for n in names]
    return {"schema_version": 1, "checks": results, "pass": all(r["pass"] for r in results)}
