"""The heat kernel of ``D^alpha`` on A_f and its transition function.

Indexing convention used throughout: ``m`` is the *norm index* of a point,
``||x|| = e^{psi(m)}``.  The kernel is

    Z(m, t) = sum_{n <= -m} e^{psi(n)} Delta_n(t),
    Delta_n(t) = exp(-t e^{alpha psi(n)}) - exp(-t e^{alpha psi(n+1)}).

Bounds written for ``||x|| = e^{-psi(m')}`` map to this convention
through ``m' = -m``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .adele import Ball, FiniteAdele, _within
from .errors import PrecisionError, ResourceError, UsageError
from .filtration import Filtration
from .schwartz import RadialProfile, char_integral_sphere

_CACHE_SIZE = 64


@dataclass(frozen=True)
class _Terms:
    """Per-``t`` series data over indices ``n_lo .. n_hi + 1``."""

    t: float
    n_lo: int
    log_e: np.ndarray  # psi(n)
    a: np.ndarray  # t e^{alpha psi(n)}
    delta: np.ndarray  # Delta_n for n_lo .. n_hi
    weighted: np.ndarray  # e^{psi(n)} Delta_n
    cum: np.ndarray  # running sum of weighted from n_lo
    lower_rem: float  # bound on sum_{n < n_lo} e^{psi(n)} Delta_n
    lower_mass_rem: float  # bound on sum_{n < n_lo} Delta_n
    clamped: int  # exponentials that underflowed to 0

    def idx(self, n):
        return np.asarray(n) - self.n_lo


class HeatKernelFin:
    """Evaluator for ``Z(x, t) = F^{-1}(exp(-t ||xi||^alpha))`` on A_f.

    ``series_window`` bounds the indices ``n`` summed in the radial series;
    ``tolerance`` is the largest truncation remainder a returned value may carry.
    """

    def __init__(self, filtration: Filtration, alpha: float, series_window=None, tolerance: float = 1e-12):
        if not alpha > 0:
            raise UsageError(f"alpha must be positive, got {alpha}")
        if not tolerance > 0:
            raise UsageError(f"tolerance must be positive, got {tolerance}")
        w0, w1 = filtration.window
        if series_window is None:
            series_window = (w0 + 1, w1 - 1)
        n_lo, n_hi = map(int, series_window)
        if n_lo - 1 < w0 or n_hi + 1 > w1 or n_lo >= n_hi:
            raise UsageError(f"series window {series_window} must lie strictly inside {filtration.window}")
        self.filtration = filtration
        self.alpha = float(alpha)
        self.series_window = (n_lo, n_hi)
        self.tolerance = float(tolerance)
        ns = np.arange(n_lo, n_hi + 2)
        self._ns = ns
        self._log_e = filtration.log_psi(ns)
        # exact ratio e^{Lambda(n+1)} for n = n_lo .. n_hi
        self._log_ratio = np.array([math.log(filtration.ratio(n + 1)) for n in ns[:-1]])
        self._cache: dict = {}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"HeatKernelFin({self.filtration.name}, alpha={self.alpha}, window={self.series_window})"

    # series data ----------------------------------------------------------

    def _terms(self, t: float) -> _Terms:
        t = float(t)
        if not t > 0:
            raise UsageError(f"t must be positive for kernel evaluation, got {t}")
        with self._lock:
            hit = self._cache.get(t)
        if hit is not None:
            return hit
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            a = np.exp(math.log(t) + self.alpha * self._log_e)
            gap = a[:-1] * np.expm1(self.alpha * self._log_ratio)  # a_{n+1} - a_n
            gap = np.where(np.isfinite(a[:-1]), gap, np.inf)
            factor = -np.expm1(-gap)
            e = np.exp(-a)
            delta = e[:-1] * factor
            weighted = np.exp(self._log_e[:-1] - a[:-1]) * factor
            weighted = np.where(np.isfinite(a[:-1]), weighted, 0.0)
            delta = np.where(np.isfinite(a[:-1]), delta, 0.0)
        clamped = int(np.count_nonzero((e == 0.0) & np.isfinite(self._log_e)))
        lower_mass_rem = float(-np.expm1(-a[0]))
        lower_rem = math.exp(self._log_e[0]) * lower_mass_rem
        terms = _Terms(t, self.series_window[0], self._log_e, a, delta, weighted,
                       np.cumsum(weighted), lower_rem, lower_mass_rem, clamped)
        with self._lock:
            if len(self._cache) >= _CACHE_SIZE:
                self._cache.pop(next(iter(self._cache)))
            self._cache[t] = terms
        return terms

    def m_range(self) -> tuple[int, int]:
        """Norm indices at which the kernel can be evaluated."""
        return -self.series_window[1], -self.series_window[0]

    def _check_m(self, m):
        lo, hi = self.m_range()
        m = np.asarray(m)
        if m.size and (m.min() < lo or m.max() > hi):
            raise ResourceError(f"norm index outside evaluable range [{lo}, {hi}] of {self}")

    def _exp_a(self, terms: _Terms, n) -> np.ndarray:
        """``exp(-t e^{alpha psi(n)})`` for any n in the filtration window."""
        n = np.asarray(n)
        inside = (n >= self._ns[0]) & (n <= self._ns[-1])
        if np.all(inside):
            return np.exp(-terms.a[terms.idx(n)])
        with np.errstate(over="ignore", under="ignore"):
            return np.exp(-np.exp(math.log(terms.t) + self.alpha * self.filtration.log_psi(n)))

    # kernel ---------------------------------------------------------------

    def kernel_radial_certified(self, m, t):
        """Return ``(Z(m, t), remainder_bound)``; accepts scalar or array ``m``."""
        self._check_m(m)
        terms = self._terms(t)
        val = terms.cum[terms.idx(-np.asarray(m))]
        if terms.lower_rem > self.tolerance:
            raise PrecisionError(
                f"lower series tail {terms.lower_rem:.3g} exceeds tolerance {self.tolerance:.3g}; "
                "widen the series window"
            )
        return (float(val) if np.ndim(val) == 0 else val), terms.lower_rem

    def kernel_radial(self, m, t):
        """``Z(x, t)`` at any ``x`` with ``||x|| = e^{psi(m)}``."""
        return self.kernel_radial_certified(m, t)[0]

    def kernel_at(self, x: FiniteAdele, t: float) -> float:
        if x.is_zero:
            raise PrecisionError("kernel at a zero coset depends on the unresolved digits; use kernel_radial")
        return self.kernel_radial(x.norm_index(), t)

    def kernel_at_origin(self, t: float) -> float:
        """``Z(0, t) = sum_n e^{psi(n)} Delta_n`` over the whole series window."""
        terms = self._terms(t)
        return float(terms.cum[-1])

    def isotropic_kernel_radial(self, m, t):
        """``sum_{n <= -m} e^{psi(n)} Delta_{n-1}``, the isotropic-Laplacian kernel."""
        self._check_m(np.asarray(m) - 1)
        terms = self._terms(t)
        # e^{psi(n)} Delta_{n-1} = (e^{psi(n)} / e^{psi(n-1)}) * e^{psi(n-1)} Delta_{n-1}
        shifted = np.exp(self._log_ratio) * terms.weighted
        cum = np.cumsum(shifted)
        val = cum[terms.idx(-np.asarray(m) - 1)]
        return float(val) if np.ndim(val) == 0 else val

    def shell_mass(self, m, t):
        """``mu(S_m) Z(m, t)``: probability that ``||X_t|| = e^{psi(m)}``."""
        m = np.asarray(m)
        z = np.asarray(self.kernel_radial(m, t), dtype=float)
        f = self.filtration
        log_mu = f.log_psi(m) + np.log1p(-np.exp(f.log_psi(m - 1) - f.log_psi(m)))
        with np.errstate(divide="ignore"):
            out = np.where(z > 0, np.exp(log_mu + np.log(np.where(z > 0, z, 1.0))), 0.0)
        return float(out) if out.ndim == 0 else out

    def radial_cdf(self, k, t):
        """``P(||X_t|| <= e^{psi(k)}) = e^{psi(k)} Z(k, t) + exp(-t e^{alpha psi(1-k)})``."""
        k = np.asarray(k)
        terms = self._terms(t)
        z = np.asarray(self.kernel_radial(k, t), dtype=float)
        with np.errstate(divide="ignore"):
            inner = np.where(z > 0, np.exp(self.filtration.log_psi(k) + np.log(np.where(z > 0, z, 1.0))), 0.0)
        out = inner + self._exp_a(terms, 1 - k)
        return float(out) if out.ndim == 0 else out

    def radial_tail_certified(self, k: int, t: float):
        """``(P(||X_t|| > e^{psi(k)}), remainder)`` summed without cancellation.

        Uses ``sum_{n < -k} Delta_n (1 - e^{psi(n) + psi(k)})``.
        """
        self._check_m(k)
        terms = self._terms(t)
        stop = terms.idx(-k)
        logs = terms.log_e[:stop] + self.filtration.log_psi(k)
        val = float(np.sum(terms.delta[:stop] * -np.expm1(logs)))
        return val, terms.lower_mass_rem

    def radial_tail(self, k: int, t: float) -> float:
        return self.radial_tail_certified(k, t)[0]

    # bounds -----------------------------------------------------------------

    def uniform_bound(self, t: float) -> float:
        """``Gamma(1/alpha + 1) t^{-1/alpha}``, a bound on ``Z`` everywhere."""
        return math.gamma(1 / self.alpha + 1) * t ** (-1 / self.alpha)

    def pointwise_bound(self, m, t):
        """``||x||^{-1} (1 - exp(-t e^{alpha psi(1-m)}))`` for ``||x|| = e^{psi(m)}``."""
        m = np.asarray(m)
        f = self.filtration
        with np.errstate(over="ignore", under="ignore"):
            a = np.exp(math.log(t) + self.alpha * f.log_psi(1 - m))
            out = np.exp(f.log_psi(-m)) * -np.expm1(-a)
        return float(out) if out.ndim == 0 else out

    def tail_bound(self, k, t):
        """``1 - exp(-t e^{alpha psi(-k)})``, bounding the mass outside ``B_k``."""
        k = np.asarray(k)
        with np.errstate(over="ignore", under="ignore"):
            a = np.exp(math.log(t) + self.alpha * self.filtration.log_psi(-k))
            out = -np.expm1(-a)
        return float(out) if out.ndim == 0 else out

    def inner_mass_bound(self, k: int, t: float) -> float:
        """Certified upper bound on ``P(||X_t|| <= e^{psi(k)})`` for small ``k``."""
        z, rem = self.kernel_radial_certified(k, t)
        terms = self._terms(t)
        head = math.exp(min(self.filtration.log_psi(k) + math.log(z + rem), 700.0))
        return head + float(self._exp_a(terms, 1 - k))

    def pointwise_bound_check(self, m: int, t: float) -> dict:
        z = self.kernel_radial(m, t)
        uni = self.uniform_bound(t)
        pw = self.pointwise_bound(m, t)
        return {
            "m": int(m),
            "t": float(t),
            "Z": z,
            "uniform_bound": uni,
            "pointwise_bound": pw,
            "nonnegative": z >= 0,
            "uniform_ok": z <= uni,
            "pointwise_ok": z <= pw * (1 + 1e-12),
            "ratio": z / pw if pw > 0 else float("nan"),
        }

    # shells -----------------------------------------------------------------

    def shell_window(self, t: float, tolerance: float | None = None):
        """Smallest shell range ``[m_lo, m_hi]`` whose two certified tails are each below ``tolerance/2``.

        Returns ``(m_lo, m_hi, lower_tail_bound, upper_tail_bound)``.
        """
        if not t > 0:
            raise UsageError(f"t must be positive, got {t}")
        tol = self.tolerance if tolerance is None else tolerance
        lo, hi = self.m_range()
        m_hi = next((m for m in range(lo, hi + 1) if self.tail_bound(m, t) < tol / 2), None)
        m_lo = None
        for m in range(lo + 1, hi + 1):
            if self.inner_mass_bound(m - 1, t) >= tol / 2:
                break
            m_lo = m
        if m_hi is None or m_lo is None or m_lo > m_hi:
            raise PrecisionError(
                f"no shell window inside norm range [{lo}, {hi}] reaches tail tolerance {tol:.3g} at t={t}; "
                "suggest widening the filtration window or raising the tolerance"
            )
        return m_lo, m_hi, self.inner_mass_bound(m_lo - 1, t), self.tail_bound(m_hi, t)

    def shell_masses(self, t: float, tolerance: float | None = None):
        """``(ms, masses, lower_tail_bound, upper_tail_bound)`` over the certified window."""
        m_lo, m_hi, lo_tail, hi_tail = self.shell_window(t, tolerance)
        ms = np.arange(m_lo, m_hi + 1)
        return ms, self.shell_mass(ms, t), lo_tail, hi_tail

    def normalization_report(self, t: float, tolerance: float = 1e-10) -> dict:
        ms, w, lo_tail, hi_tail = self.shell_masses(t, tolerance / 10)
        total = float(np.sum(w))
        return {
            "t": float(t),
            "alpha": self.alpha,
            "m_lo": int(ms[0]),
            "m_hi": int(ms[-1]),
            "sum": total,
            "lower_tail_bound": lo_tail,
            "upper_tail_bound": hi_tail,
            "deviation": abs(total - 1.0),
            "tolerance": tolerance,
            "pass": bool(abs(total - 1.0) <= tolerance and lo_tail + hi_tail <= tolerance),
        }


class TransitionFunction:
    """``P(t, x, B)`` for balls ``B``, with ``P(0, x, B) = 1_B(x)``."""

    def __init__(self, kernel: HeatKernelFin):
        self.kernel = kernel

    def density(self, t: float, x: FiniteAdele, y: FiniteAdele) -> float:
        """``p(t, x, y) = Z(x - y, t)``."""
        return self.kernel.kernel_at(x - y, t)

    def prob_ball(self, t: float, x: FiniteAdele, center: FiniteAdele, k: int) -> float:
        if x.filtration != self.kernel.filtration or center.filtration != self.kernel.filtration:
            raise UsageError("filtration mismatch between points and kernel")
        if t < 0:
            raise UsageError(f"t must be nonnegative, got {t}")
        d = x - center
        inside = _within(d, k)
        if t == 0:
            return 1.0 if inside else 0.0
        if inside:
            return self.kernel.radial_cdf(k, t)
        # ||x - z|| = ||x - center|| for every z in the ball
        return math.exp(self.kernel.filtration.log_psi(k)) * self.kernel.kernel_radial(d.norm_index(), t)

    def __call__(self, t: float, x: FiniteAdele, ball: Ball) -> float:
        return self.prob_ball(t, x, ball.center, ball.radius_index)


def transition_prob_ball(kernel: HeatKernelFin, t, x, center, k) -> float:
    return TransitionFunction(kernel).prob_ball(t, x, center, k)


# radial convolution ---------------------------------------------------------


class KernelRadial:
    """``Z(., t)`` as a radial function."""

    top = None

    def __init__(self, kernel: HeatKernelFin, t: float):
        self.kernel, self.t = kernel, t
        self.filtration = kernel.filtration

    def value(self, m):
        return self.kernel.kernel_radial(m, self.t)

    def ball_integral(self, k):
        return self.kernel.radial_cdf(k, self.t)

    def outer_mass(self, k):
        return self.kernel.radial_tail(k, self.t)

    def sup_from(self, m):
        # Z is nonincreasing in the norm index
        return self.kernel.kernel_radial(m, self.t)


class ProfileRadial:
    """``F^{-1}(sum_n c_n 1_{S_n})`` with exact rational shell data."""

    def __init__(self, profile: RadialProfile):
        self.profile = profile
        self.filtration = profile.filtration
        self.top = profile.support_top() + 1  # first norm index where it vanishes

    def value(self, m):
        f = self.filtration
        return sum((c * char_integral_sphere(f, n, f.psi_value(m)) for n, c in self.profile.coeffs.items()), 0)

    def ball_integral(self, k):
        # int_{B_k} F^{-1}(1_{S_n}) = mu(S_n) e^{psi(k)} if n <= -k, else 0
        f = self.filtration
        total = 0
        for n, c in self.profile.coeffs.items():
            if n <= -k:
                total += c * (f.psi_value(n) - f.psi_value(n - 1)) * f.psi_value(k)
        return total


class TabulatedRadial:
    """Radial function given by shell values on ``[lo, hi]``, constant on ``B_lo``, zero beyond ``hi``."""

    def __init__(self, filtration: Filtration, lo: int, values):
        self.filtration = filtration
        self.lo = lo
        self.values = list(values)
        self.top = lo + len(self.values)

    def value(self, m):
        if m >= self.top:
            return 0.0
        return self.values[max(m, self.lo) - self.lo]

    def ball_integral(self, k):
        f = self.filtration
        k = min(k, self.top - 1)
        if k < self.lo:
            return self.values[0] * float(f.psi_value(k))
        total = self.values[0] * float(f.psi_value(self.lo))
        for m in range(self.lo + 1, k + 1):
            total += self.values[m - self.lo] * float(f.psi_value(m) - f.psi_value(m - 1))
        return total


def radial_convolve(f, g, m: int, tol: float = 1e-15):
    """``(f * g)(x)`` for radial ``f, g`` and ``||x|| = e^{psi(m)}``.

    Splits ``y`` by shells: for ``||y|| < ||x||`` the value ``f(x - y) = f(m)``;
    for ``||y|| > ||x||`` it is ``f(y)``; on ``S_m`` the difference ``x - y``
    covers ``B_m`` minus the coset ``x + B_{m-1}``.
    """
    fl = f.filtration
    mu_m = fl.psi_value(m) - fl.psi_value(m - 1)
    inner = mu_m - fl.psi_value(m - 1)
    fm, gm = f.value(m), g.value(m)
    total = fm * g.ball_integral(m - 1) + gm * f.ball_integral(m - 1) + fm * gm * _as(inner, fm, gm)
    tops = [h.top for h in (f, g) if h.top is not None]
    if tops:
        stop = min(tops)
        for j in range(m + 1, stop):
            total += f.value(j) * g.value(j) * _as(fl.psi_value(j) - fl.psi_value(j - 1), f.value(j), g.value(j))
        return total
    j = m
    while True:
        j += 1
        total += f.value(j) * g.value(j) * float(fl.psi_value(j) - fl.psi_value(j - 1))
        if f.sup_from(j + 1) * g.outer_mass(j) < tol:
            return total


def _as(q: Fraction, *others):
    """Keep exact arithmetic when every operand is exact."""
    if all(isinstance(o, (Fraction, int)) for o in others):
        return q
    return float(q)


# verification harnesses ---------------------------------------------------------


def chapman_kolmogorov_report(kernel: HeatKernelFin, t: float, s: float, ms, tolerance: float = 1e-8) -> dict:
    """Compare ``Z(., t+s)`` with ``Z(., t) * Z(., s)`` at norm indices ``ms``."""
    zt, zs = KernelRadial(kernel, t), KernelRadial(kernel, s)
    rows = []
    for m in ms:
        direct = kernel.kernel_radial(m, t + s)
        conv = float(radial_convolve(zt, zs, int(m)))
        rows.append({"m": int(m), "direct": direct, "convolution": conv, "abs_diff": abs(direct - conv)})
    worst = max(r["abs_diff"] for r in rows)
    return {"t": t, "s": s, "rows": rows, "max_abs_diff": worst, "tolerance": tolerance, "pass": worst < tolerance}


def semigroup_vs_convolution(kernel: HeatKernelFin, profile: RadialProfile, t: float, ms=None) -> dict:
    """Spectral action ``c_n -> c_n exp(-t e^{alpha psi(n)})`` versus convolution with ``Z(., t)``.

    Both sides are evaluated at radial points ``||x|| = e^{psi(m)}``.
    """
    if not profile.coeffs:
        raise UsageError("empty profile")
    top = profile.support_top()
    if ms is None:
        ms = range(min(-n for n in profile.coeffs) - 3, top + 2)
    evolved = profile.apply_semigroup(kernel.alpha, t)
    f = ProfileRadial(profile)
    z = KernelRadial(kernel, t)
    scale = max(abs(complex(f.value(m))) for m in ms) or 1.0
    rows = []
    for m in ms:
        spectral = evolved.inverse_fourier_eval(int(m))
        conv = complex(radial_convolve(f, z, int(m)))
        rows.append({"m": int(m), "spectral": spectral, "convolution": conv, "abs_diff": abs(spectral - conv)})
    worst = max(r["abs_diff"] for r in rows)
    return {"t": t, "rows": rows, "max_abs_diff": worst, "scale": float(scale), "relative": worst / scale}


def markov_conditions_report(kernel: HeatKernelFin, t_grid, x_grid, k: int) -> dict:
    """Measured transition probabilities against their majorants.

    LB: for ``B = B_k`` and ``||x|| = e^{psi(m)}`` with ``m > k``,
    ``sup_{t <= s} P(t, x, B) <= e^{psi(-m)} (1 - exp(-s e^{alpha psi(1-m)})) mu(B)``.
    MB: ``P(t, x, A_f minus B_k(x)) <= 1 - exp(-t e^{alpha psi(-k)})``.
    """
    t_grid = sorted(float(t) for t in t_grid)
    x_grid = sorted(int(m) for m in x_grid)
    if not t_grid or not x_grid:
        raise UsageError("grids must be nonempty")
    if min(x_grid) <= k:
        raise UsageError("LB needs points outside B_k (norm index > k)")
    s = t_grid[-1]
    mu_b = math.exp(kernel.filtration.log_psi(k))
    lb = []
    for m in x_grid:
        measured = max(mu_b * kernel.kernel_radial(m, t) for t in t_grid)
        bound = kernel.pointwise_bound(m, s) * mu_b
        lb.append({"m": m, "sup_P": measured, "majorant": bound, "ok": measured <= bound * (1 + 1e-12)})
    mb = []
    for t in t_grid:
        measured = kernel.radial_tail(k, t)
        bound = kernel.tail_bound(k, t)
        mb.append({"t": t, "P_exit": measured, "majorant": bound, "ok": measured <= bound * (1 + 1e-12)})
    return {
        "k": k,
        "s": s,
        "LB": lb,
        "MB": mb,
        "pass": all(r["ok"] for r in lb) and all(r["ok"] for r in mb),
    }


def dirac_limit_finite(kernel: HeatKernelFin, l: int, t_seq) -> list:
    """``int Z(x, t) 1_{B_l}(x) dx`` along ``t_seq`` with the exit-probability majorant."""
    rows = []
    for t in t_seq:
        dev = kernel.radial_tail(l, t)
        rows.append({
            "t": float(t),
            "integral": 1.0 - dev,
            "deviation": dev,
            "bound": kernel.tail_bound(l, t),
        })
    return rows
