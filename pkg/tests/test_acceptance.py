"""One test per acceptance criterion, each at its stated tolerance."""

import math

import numpy as np
import pytest
from scipy import stats

from adelheat import Filtration, HeatKernelFin, RadialProfile, TestFunction
from adelheat.adelic import AdelicKernel
from adelheat.heat import chapman_kolmogorov_report, dirac_limit_finite, semigroup_vs_convolution
from adelheat.markov import FiniteAdeleSampler, shell_counts
from adelheat.oracles import padic_bruteforce_kernel, sphere_decomposition_kernel
from adelheat.schwartz import fourier
from adelheat.stable import StableKernel, cauchy_scale, gaussian_variance
from adelheat.verify import pooled_chisquare

BUILTIN = ["factorial", "prime_power(2)", "lcm"]
ALPHAS = [0.5, 1.0, 2.0]
TS = [0.01, 0.1, 1.0, 10.0]


def kernels():
    for name in BUILTIN:
        for a in ALPHAS:
            yield name, HeatKernelFin(Filtration.from_config(name), a)


def test_criterion_01_normalization(criterion):
    worst = 0.0
    for _, k in kernels():
        for t in TS:
            ms, w, lo, hi = k.shell_masses(t, 1e-12)
            worst = max(worst, abs(float(np.sum(w)) + lo + hi - 1.0))
    criterion(1, worst <= 1e-10, f"normalization, max |sum + tails - 1| = {worst:.2e} (tol 1e-10)")


def test_criterion_02_series_vs_oracle(criterion):
    worst = 0.0
    ms = range(-10, 10)
    ts = np.geomspace(0.01, 10, 10)
    for _, k in kernels():
        for m in ms:
            for t in ts:
                worst = max(worst, abs(k.kernel_radial(m, t) - sphere_decomposition_kernel(k.filtration, k.alpha, m, t)))
    criterion(2, worst <= 1e-10, f"series vs sphere oracle on 20x10 grid, max diff = {worst:.2e} (tol 1e-10)")


def test_criterion_03_bounds(criterion):
    violations = points = 0
    for _, k in kernels():
        c = math.gamma(1 / k.alpha + 1)
        for t in np.geomspace(1e-3, 100, 11):
            z = k.kernel_radial(np.arange(-12, 13), t)
            for m, zm in zip(range(-12, 13), z):
                uniform = zm <= c * t ** (-1 / k.alpha) * (1 + 1e-12)
                pointwise = zm <= k.pointwise_bound(m, t) * (1 + 1e-12)
                tail = k.radial_tail(m, t) <= k.tail_bound(m, t) * (1 + 1e-12)
                violations += (zm < 0) + (not uniform) + (not pointwise) + (not tail)
                points += 1
    criterion(3, violations == 0, f"uniform, pointwise and tail bounds, {violations} violations at {points} points")


def test_criterion_04_chapman_kolmogorov(criterion):
    worst = 0.0
    for _, k in kernels():
        for t in (0.1, 1.0):
            for s in (0.1, 1.0):
                worst = max(worst, chapman_kolmogorov_report(k, t, s, range(-6, 8))["max_abs_diff"])
    criterion(4, worst < 1e-8, f"Chapman-Kolmogorov, max |Z(t+s) - Z(t)*Z(s)| = {worst:.2e} (tol 1e-8)")


def test_criterion_05_spectral_identity(criterion):
    worst = 0.0
    for _, k in kernels():
        for n in range(-5, 6):
            for t in (0.01, 0.1, 1.0, 10.0):
                worst = max(worst, semigroup_vs_convolution(k, RadialProfile(k.filtration, {n: 1.0}), t)["relative"])
    criterion(5, worst < 1e-12, f"eigenpair scaling for n in [-5, 5], max relative gap = {worst:.2e} (tol 1e-12)")


def test_criterion_06_parseval(criterion):
    rng = np.random.default_rng(6)
    worst, spaces = 0.0, 0
    for name in BUILTIN:
        f = Filtration.from_config(name)
        for k in range(-3, 5):
            for l in range(k - 6, k):
                dim = f.quotient(k, l)
                if dim > 720:
                    continue
                for _ in range(3):
                    phi = TestFunction(f, k, l, rng.normal(size=dim) + 1j * rng.normal(size=dim))
                    g = fourier(phi)
                    lhs = phi.inner(phi).real
                    worst = max(worst, abs(g.inner(g).real - lhs) / lhs)
                spaces += 1
    criterion(6, worst < 1e-12, f"Parseval on {spaces} spaces with dim <= 720, max relative gap = {worst:.2e} (tol 1e-12)")


def test_criterion_07_padic_oracle(criterion):
    k = HeatKernelFin(Filtration.prime_power(2), 1.0)
    worst = 0.0
    for m in range(-5, 5):
        for t in (0.1, 0.5, 1.0, 2.0, 5.0):
            worst = max(worst, abs(k.kernel_radial(m, t) - padic_bruteforce_kernel(2, 1.0, m, t, a=3)))
    criterion(7, worst < 1e-12, f"2-adic brute force on 10x5 grid, max diff = {worst:.2e} (tol 1e-12)")


def test_criterion_08_monte_carlo(criterion):
    s = FiniteAdeleSampler(HeatKernelFin(Filtration.factorial(), 1.0), 1.0)
    n = 1_000_000
    counts = shell_counts(s, n, seed=2024)
    p = s.shell_probabilities()
    _, pval = pooled_chisquare(counts, p)
    tv = 0.5 * float(np.abs(counts / n - p).sum())
    ok = pval > 1e-3 and tv < 5e-3
    criterion(8, ok, f"10^6 draws, chi-squared p = {pval:.3f} (> 0.001), TV = {tv:.2e} (< 0.005)")


def test_criterion_09_archimedean(criterion):
    worst = 0.0
    for beta in (1.0, 2.0):
        k = StableKernel(beta)
        for x in np.linspace(-2, 2, 41):
            for t in (0.1, 1.0, 10.0):
                worst = max(worst, abs(k.eval(x, t) - k.eval_by_quadrature(x, t)[0]))
    n = 1_000_000
    t = 1.0
    g = StableKernel(2.0).sample(t, n, np.random.default_rng(91))
    var_rel = abs(np.var(g) / gaussian_variance(t) - 1)
    c = StableKernel(1.0).sample(t, n, np.random.default_rng(92))
    q1, med, q3 = np.quantile(c, [0.25, 0.5, 0.75])
    iqr_rel = abs((q3 - q1) / (2 * cauchy_scale(t)) - 1)
    med_rel = abs(med) / cauchy_scale(t)
    xs = np.linspace(-5, 5, 41)
    ts = (0.1, 1.0, 10.0)
    bound_ok, constants = True, {}
    for beta in (0.5, 1.0, 1.5, 2.0):
        k = StableKernel(beta)
        # the ratio Z(u,1)(1+u^2) is scale invariant, so fit over the u-range the grid reaches
        u_max = float(np.max(np.abs(xs))) * min(ts) ** (-1 / beta)
        constants[beta] = k.fitted_constant(u_max=u_max)
        for tt in ts:
            bound_ok &= bool(np.all(k.eval(xs, tt) <= k.bound_rhs(xs, tt, constants[beta]) * (1 + 1e-9)))
    ok = worst < 1e-8 and var_rel < 0.01 and iqr_rel < 0.02 and med_rel < 0.02 and bound_ok
    consts = ", ".join(f"C({b:g})={c_:.4f}" for b, c_ in constants.items())
    criterion(9, ok, f"closed forms vs quadrature {worst:.1e}; variance {var_rel:.2%}; "
                     f"IQR {iqr_rel:.2%}; median {med_rel:.2%} of scale; bound holds: {bound_ok} ({consts})")


def test_criterion_10_adelic(criterion):
    worst_norm = 0.0
    norm_ok = True
    for name in BUILTIN:
        a = AdelicKernel(HeatKernelFin(Filtration.from_config(name), 1.0), StableKernel(1.5))
        for t in (0.1, 1.0, 10.0):
            r = a.normalization_report(t)
            worst_norm = max(worst_norm, r["deviation"])
            norm_ok &= r["pass"]
    a = AdelicKernel(HeatKernelFin(Filtration.factorial(), 1.0), StableKernel(1.5))
    n = 100_000
    ens = a.simulate_paths([0.0, 0.4, 1.0], n, seed=10)
    worst_se = 0.0
    m = ens.finite.norm_index()[-1]
    for k in (-2, -1, 0, 1, 2):
        p = a.fin.radial_cdf(k, 1.0)
        worst_se = max(worst_se, abs(np.mean(m <= k) - p) / math.sqrt(p * (1 - p) / n))
    for x in (-1.0, -0.2, 0.0, 0.2, 1.0):
        p = float(a.arch.cdf(x, 1.0)[0])
        worst_se = max(worst_se, abs(np.mean(ens.real[-1] <= x) - p) / math.sqrt(p * (1 - p) / n))
    ok = norm_ok and worst_se <= 3
    criterion(10, ok, f"product normalization deviation {worst_norm:.1e} (tol 1e-6); "
                      f"two-step vs one-step, max {worst_se:.2f} standard errors at 10^5 paths")


def test_criterion_11_dirac_limit(criterion):
    excess, monotone = -math.inf, True
    for _, k in kernels():
        for l in (-3, 0, 2):
            rows = dirac_limit_finite(k, l, [10.0**-j for j in range(7)])
            excess = max(excess, max(r["deviation"] - r["bound"] for r in rows))
            devs = [r["deviation"] for r in rows]
            monotone &= all(b < a for a, b in zip(devs, devs[1:]))
    ok = excess <= 0 and monotone
    criterion(11, ok, f"ball indicator deviation within tail bound (max excess {excess:.1e}), strictly decreasing: {monotone}")
