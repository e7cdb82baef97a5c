"""The heat kernel on the full adele ring ``A = R x A_f`` as a product of its factors.

``Z_A((x_inf, x_f), t) = Z_inf(x_inf, t) Z_f(x_f, t)`` is the inverse Fourier
transform of ``exp(-t (|xi_inf|^beta + ||xi_f||^alpha))``, so every identity is
checked factorwise and combined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adele import Ball, FiniteAdele
from .errors import UsageError
from .heat import HeatKernelFin, TransitionFunction, chapman_kolmogorov_report
from .markov import FiniteAdeleSampler, PathEnsemble, _check_times, simulate_paths, spawn_streams
from .schwartz import RadialProfile
from .stable import StableKernel


@dataclass(frozen=True)
class AdelePoint:
    real: float
    finite: FiniteAdele

    def __add__(self, other: "AdelePoint") -> "AdelePoint":
        return AdelePoint(self.real + other.real, self.finite + other.finite)

    def to_json(self) -> dict:
        return {"real": self.real, "finite": self.finite.to_text()}


@dataclass
class AdelicPathEnsemble:
    times: np.ndarray
    real: np.ndarray  # shape (len(times), n)
    finite: PathEnsemble


class AdelicKernel:
    def __init__(self, fin: HeatKernelFin, arch: StableKernel):
        self.fin = fin
        self.arch = arch

    def __repr__(self):
        return f"AdelicKernel({self.fin!r}, {self.arch!r})"

    @property
    def filtration(self):
        return self.fin.filtration

    def eval_radial_certified(self, x_real: float, m: int, t: float) -> tuple[float, float]:
        """``(Z_A, error)`` at ``(x_real, x_f)`` with ``||x_f|| = e^{psi(m)}``.

        Errors combine multiplicatively: ``|a| e_b + |b| e_a + e_a e_b``.
        """
        a, ea = self.fin.kernel_radial_certified(m, t)
        b, eb = self.arch.eval_certified(x_real, t)
        return a * b, abs(a) * eb + abs(b) * ea + ea * eb

    def eval_certified(self, x: AdelePoint, t: float) -> tuple[float, float]:
        if x.finite.filtration != self.filtration:
            raise UsageError("filtration mismatch between point and kernel")
        return self.eval_radial_certified(x.real, x.finite.norm_index(), t)

    def eval(self, x: AdelePoint, t: float) -> float:
        return self.eval_certified(x, t)[0]

    def multiplier(self, xi_real, xi_norm_index) -> np.ndarray:
        """``|xi_inf|^beta + ||xi_f||^alpha`` with ``||xi_f|| = e^{psi(n)}``."""
        fin = np.exp(self.fin.alpha * self.filtration.log_psi(np.asarray(xi_norm_index)))
        return np.abs(np.asarray(xi_real, dtype=float)) ** self.arch.beta + fin

    # integrals ----------------------------------------------------------------

    def normalization_report(self, t: float, tolerance: float = 1e-6) -> dict:
        """Product of the two factor masses; integrals of products combine additively."""
        fin = self.fin.normalization_report(t, tolerance=min(tolerance, 1e-10))
        arch_mass = self.arch.total_mass(t)
        combined = fin["sum"] * arch_mass
        bound = fin["lower_tail_bound"] + fin["upper_tail_bound"]
        return {
            "t": t,
            "finite_mass": fin["sum"],
            "arch_mass": arch_mass,
            "product": combined,
            "finite_tail_bound": bound,
            "deviation": abs(combined - 1.0),
            "tolerance": tolerance,
            "pass": abs(combined - 1.0) <= tolerance + bound,
        }

    def chapman_kolmogorov_report(self, t: float, s: float, ms, xs, tolerance: float = 1e-5) -> dict:
        """Semigroup property of the product via each factor."""
        fin = chapman_kolmogorov_report(self.fin, t, s, ms, tolerance=1e-8)
        arch = self.arch.semigroup_report(t, s, xs, tolerance)
        # |AB - A'B'| <= |A - A'| |B| + |A'| |B - B'|
        z_fin = max(abs(r["direct"]) for r in fin["rows"])
        z_arch = max(abs(r["direct"]) for r in arch["rows"])
        worst = fin["max_abs_diff"] * z_arch + z_fin * arch["max_abs_diff"]
        return {"finite": fin, "arch": arch, "product_bound": worst,
                "pass": fin["pass"] and arch["pass"]}

    def product_integral(self, t: float, interval: tuple[float, float], ball: Ball) -> float:
        """``int Z_A(x, t) 1_{[lo, hi]}(x_inf) 1_{ball}(x_f) dx``."""
        lo, hi = interval
        if not lo < hi:
            raise UsageError(f"empty interval {interval}")
        c_lo, c_hi = self.arch.cdf([lo, hi], t)
        zero = FiniteAdele.zero(self.filtration, max(ball.center.truncation, 1 - ball.radius_index))
        p_fin = TransitionFunction(self.fin).prob_ball(t, zero, ball.center, ball.radius_index)
        return float(c_hi - c_lo) * p_fin

    def dirac_limit_report(self, interval, ball: Ball, t_seq) -> dict:
        """``int Z_A f`` along ``t_seq`` for ``f = 1_interval (x) 1_ball``, with the deviation from ``f(0)``."""
        lo, hi = interval
        zero = FiniteAdele.zero(self.filtration, max(ball.center.truncation, 1 - ball.radius_index))
        f0 = float(lo <= 0 <= hi and ball.contains(zero))
        rows = []
        for t in t_seq:
            val = self.product_integral(t, interval, ball)
            row = {"t": float(t), "integral": val, "f0": f0, "deviation": abs(val - f0)}
            if f0 and ball.contains(zero):
                row["finite_tail_bound"] = self.fin.tail_bound(ball.radius_index, t)
            rows.append(row)
        devs = [r["deviation"] for r in rows]
        return {
            "interval": [lo, hi],
            "ball": {"center": ball.center.to_text(), "radius_index": ball.radius_index},
            "rows": rows,
            "monotone": all(b <= a for a, b in zip(devs, devs[1:])),
        }

    def multiplier_consistency(self, profile: RadialProfile, xi_real, g_hat, t: float) -> float:
        """Max gap between ``exp(-t m^{alpha,beta})`` and the product of the factor semigroups.

        The test function is ``g_hat(xi_real) (x) profile`` on the Fourier side.
        """
        xi_real = np.asarray(xi_real, dtype=float)
        ns = np.array(sorted(profile.coeffs))
        c = np.array([profile.coeffs[n] for n in ns], dtype=complex)
        data = np.outer(g_hat(xi_real), c)
        joint = data * np.exp(-t * self.multiplier(xi_real[:, None], ns[None, :]))
        fin = profile.apply_semigroup(self.fin.alpha, t)
        arch = g_hat(xi_real) * np.exp(-t * np.abs(xi_real) ** self.arch.beta)
        factored = np.outer(arch, np.array([fin.coeffs[n] for n in ns], dtype=complex))
        return float(np.max(np.abs(joint - factored)))

    # sampling -------------------------------------------------------------------

    def sample(self, t: float, n: int, seed, tolerance: float = 1e-12):
        """``(real_parts, finite AdeleBatch)`` from two independent streams of one seed."""
        r_real, r_fin = spawn_streams(seed, 2)
        real = self.arch.sample(t, n, r_real)
        fin = FiniteAdeleSampler(self.fin, t, tolerance).sample_batch(n, r_fin)
        return real, fin

    def sample_point(self, t: float, seed) -> AdelePoint:
        real, fin = self.sample(t, 1, seed)
        return AdelePoint(float(real[0]), fin.row(0))

    def simulate_paths(self, times, n: int, seed, x0: AdelePoint | None = None,
                       tolerance: float = 1e-12) -> AdelicPathEnsemble:
        times = _check_times(times)
        r_real, r_fin = spawn_streams(seed, 2)
        real0 = 0.0 if x0 is None else float(x0.real)
        steps = [self.arch.sample(float(dt), n, r_real) for dt in np.diff(times)]
        real = np.vstack([np.zeros(n)] + steps).cumsum(axis=0) + real0
        fin = simulate_paths(self.fin, times, n, r_fin, None if x0 is None else x0.finite, tolerance)
        return AdelicPathEnsemble(times, real, fin)


def arch_interval_mass(arch: StableKernel, lo: float, hi: float, t: float) -> float:
    c = arch.cdf([lo, hi], t)
    return float(c[1] - c[0])


def product_tolerance(tol_fin: float, tol_arch: float) -> float:
    """Certificate for an integral of a product of two near-unit masses."""
    return tol_fin + tol_arch + tol_fin * tol_arch
