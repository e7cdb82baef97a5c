"""The symmetric beta-stable heat kernel on R under the pairing ``chi(x) = exp(-2 pi i x)``.

``Z(x, t) = int_R exp(-2 pi i xi x) exp(-t |xi|^beta) d xi
          = 2 int_0^inf cos(2 pi xi x) exp(-t xi^beta) d xi``.

Closed forms: ``beta = 2`` gives ``sqrt(pi/t) exp(-pi^2 x^2 / t)`` and
``beta = 1`` gives ``2t / (t^2 + 4 pi^2 x^2)``.  Other exponents are evaluated at
``t = 1`` by Fourier-weighted quadrature and rescaled with
``Z(x, t) = t^{-1/beta} Z(x t^{-1/beta}, 1)``.
"""

from __future__ import annotations

import logging
import math
import warnings

import numpy as np
from scipy import integrate, special

from .errors import PrecisionError, UsageError

log = logging.getLogger(__name__)

NEG_CLAMP = 1e-9
CUT_EXPONENT = 40.0


class StableKernel:
    """Evaluator and sampler for ``Z_inf(x, t)`` with exponent ``0 < beta <= 2``.

    ``quad_limit`` is the subinterval budget per quadrature call and
    ``max_error`` the largest absolute error estimate accepted for ``Z(u, 1)``;
    values at other ``t`` carry that error times ``t^{-1/beta}``.
    """

    def __init__(self, beta: float, quad_limit: int = 200, max_error: float = 1e-9):
        beta = float(beta)
        if not 0 < beta <= 2:
            raise UsageError(f"beta must lie in (0, 2], got {beta}")
        self.beta = beta
        self.quad_limit = int(quad_limit)
        self.max_error = float(max_error)

    def __repr__(self):
        return f"StableKernel(beta={self.beta})"

    @property
    def closed_form(self) -> bool:
        return self.beta in (1.0, 2.0)

    # density ----------------------------------------------------------------

    def _unit_quad(self, u: float) -> tuple[float, float]:
        """``Z(u, 1)`` and an error estimate by quadrature."""
        b = self.beta
        u = abs(u)
        if u == 0:
            return 2 * math.gamma(1 + 1 / b), 0.0
        g = lambda xi: math.exp(-(abs(xi) ** b))  # noqa: E731
        w = 2 * math.pi * u
        cut = CUT_EXPONENT ** (1 / b)  # exp(-cut^beta) = exp(-CUT_EXPONENT)
        cut_err = special.gammaincc(1 / b, CUT_EXPONENT) * math.gamma(1 / b) / b
        peak = math.gamma(1 + 1 / b)
        with warnings.catch_warnings():
            # roundoff warnings at tiny densities are judged by the error estimate instead
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            try:
                if u * cut <= 50:
                    # few oscillations before the integrand is negligible
                    val, err = integrate.quad(lambda xi: g(xi) * math.cos(w * xi), 0, cut,
                                              limit=self.quad_limit, epsabs=1e-13, epsrel=1e-12)
                    err += cut_err
                else:
                    val = math.inf
                    if b < 1:
                        # long slow tail: cusp on [0, 1] adaptively, QAWF beyond
                        head, e1 = self._oscillatory(g, 0, 1, w)
                        # QAWF extrapolation can stall on too tight a request; keep the better estimate
                        tail, e2 = min(
                            (integrate.quad(g, 1, np.inf, weight="cos", wvar=w, limlst=400, epsabs=ea, epsrel=er)
                             for ea, er in ((1e-13, 1e-12), (1e-12, 1e-10))),
                            key=lambda r: r[1],
                        )
                        val, err = head + tail, e1 + e2
                    if not abs(val) <= peak:
                        # QAWO on the effective support
                        val, err = integrate.quad(g, 0, cut, weight="cos", wvar=w, limit=10 * self.quad_limit,
                                                  epsabs=1e-14, epsrel=1e-12)
                        err += cut_err
            except (ValueError, ZeroDivisionError) as exc:
                raise PrecisionError(f"stable quadrature failed at u={u}: {exc}") from None
        if not math.isfinite(val) or not math.isfinite(err):
            raise PrecisionError(f"stable quadrature did not converge at u={u}")
        return 2 * val, 2 * err

    def _oscillatory(self, g, lo, hi, w):
        if w * (hi - lo) < 50:
            return integrate.quad(lambda xi: g(xi) * math.cos(w * xi), lo, hi,
                                  limit=self.quad_limit, epsabs=1e-13, epsrel=1e-12)
        return integrate.quad(g, lo, hi, weight="cos", wvar=w, limit=2 * self.quad_limit,
                              epsabs=1e-13, epsrel=1e-12)

    def _quad(self, x: float, t: float) -> tuple[float, float]:
        s = t ** (-1 / self.beta)
        val, err = self._unit_quad(x * s)
        return val * s, err * s

    def eval_certified(self, x: float, t: float) -> tuple[float, float]:
        """``(Z(x, t), error_estimate)``; the estimate is 0 for closed forms."""
        if not t > 0:
            raise UsageError(f"t must be positive, got {t}")
        x = float(x)
        if self.beta == 2.0:
            return math.sqrt(math.pi / t) * math.exp(-(math.pi**2) * x * x / t), 0.0
        if self.beta == 1.0:
            return 2 * t / (t * t + 4 * math.pi**2 * x * x), 0.0
        val, err = self._quad(x, t)
        if err > self.max_error * t ** (-1 / self.beta):
            raise PrecisionError(f"stable quadrature error {err:.3g} above {self.max_error:.3g} at x={x}, t={t}")
        if val < 0:
            if val < -NEG_CLAMP * t ** (-1 / self.beta):
                raise PrecisionError(f"stable density quadrature returned {val:.3g} at x={x}, t={t}")
            log.info("clamped stable density %.3g to 0 at x=%g, t=%g", val, x, t)
            val = 0.0
        return val, err

    def eval(self, x, t: float):
        """``Z_inf(x, t)``; ``x`` may be scalar or array."""
        if np.ndim(x) == 0:
            return self.eval_certified(float(x), t)[0]
        return np.array([self.eval_certified(float(v), t)[0] for v in np.ravel(x)]).reshape(np.shape(x))

    def eval_by_quadrature(self, x: float, t: float) -> tuple[float, float]:
        """Quadrature evaluation for any beta, closed forms bypassed."""
        if not t > 0:
            raise UsageError(f"t must be positive, got {t}")
        return self._quad(float(x), t)

    def mass(self, a: float, t: float) -> float:
        """``int_{-a}^{a} Z_inf(x, t) dx``."""
        if a < 0:
            raise UsageError(f"half-width must be nonnegative, got {a}")
        if a == 0:
            return 0.0
        if math.isinf(a):
            return 1.0
        if self.beta == 2.0:
            return math.erf(math.pi * a / math.sqrt(t))
        if self.beta == 1.0:
            return 2 / math.pi * math.atan(2 * math.pi * a / t)
        # 2 int_0^inf exp(-t xi^b) sin(2 pi a xi) / (pi xi) d xi, split at xi = 1
        b = self.beta
        head, _ = integrate.quad(lambda xi: 4 * a * np.sinc(2 * a * xi) * math.exp(-t * xi**b), 0, 1,
                                 limit=self.quad_limit)
        tail, _ = integrate.quad(lambda xi: 2 * math.exp(-t * xi**b) / (math.pi * xi), 1, np.inf,
                                 weight="sin", wvar=2 * math.pi * a)
        return head + tail

    # bound ------------------------------------------------------------------

    def bound_rhs(self, x, t: float, c: float):
        """``C t^{1/beta} / (t^{2/beta} + x^2)``."""
        b = self.beta
        return c * t ** (1 / b) / (t ** (2 / b) + np.asarray(x, dtype=float) ** 2)

    def bound_ratio(self, u) -> np.ndarray:
        """``Z(u, 1) (1 + u^2)``; the bound at ``(x, t)`` is this ratio at ``u = x t^{-1/beta}``."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return np.array([self.eval(v, 1.0) * (1 + v * v) for v in u])

    def fitted_constant(self, u_max: float = 200.0, n: int = 801) -> float:
        """Smallest ``C`` making the bound hold for ``|x| t^{-1/beta} <= u_max``.

        The ratio is scale invariant, so this covers every ``t``.  It stays
        bounded as ``u_max`` grows only for ``beta >= 1``; below that the
        density decays like ``|u|^{-1-beta}`` and the ratio grows like
        ``|u|^{1-beta}``.
        """
        u = np.concatenate([np.linspace(0, 2, n // 2), np.geomspace(2, u_max, n - n // 2)])
        return float(self.bound_ratio(u).max())

    # sampling ---------------------------------------------------------------

    def scale(self, t: float) -> float:
        """Scale ``sigma`` with ``E exp(i theta X) = exp(-|sigma theta|^beta)``."""
        return t ** (1 / self.beta) / (2 * math.pi)

    def sample(self, t: float, n: int, rng) -> np.ndarray:
        """``n`` draws with density ``Z_inf(., t)``."""
        if not t > 0:
            raise UsageError(f"t must be positive, got {t}")
        rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        sigma = self.scale(t)
        b = self.beta
        if b == 2.0:
            return rng.normal(0.0, math.sqrt(2) * sigma, n)
        if b == 1.0:
            return sigma * rng.standard_cauchy(n)
        # symmetric Chambers-Mallows-Stuck
        v = rng.uniform(-math.pi / 2, math.pi / 2, n)
        w = rng.standard_exponential(n)
        s = np.sin(b * v) / np.cos(v) ** (1 / b) * (np.cos((1 - b) * v) / w) ** ((1 - b) / b)
        return sigma * s

    def convolve(self, x: float, t: float, s: float) -> float:
        """``(Z(., t) * Z(., s))(x)`` by quadrature, split at the two peaks."""
        f = lambda y: self.eval(x - y, t) * self.eval(y, s)  # noqa: E731
        lo, hi = sorted((0.0, float(x)))
        parts = [integrate.quad(f, -np.inf, lo, limit=self.quad_limit, epsabs=1e-12)[0],
                 integrate.quad(f, hi, np.inf, limit=self.quad_limit, epsabs=1e-12)[0]]
        if hi > lo:
            parts.append(integrate.quad(f, lo, hi, limit=self.quad_limit, epsabs=1e-12)[0])
        return float(sum(parts))

    def semigroup_report(self, t: float, s: float, xs, tolerance: float = 1e-5) -> dict:
        rows = []
        for x in xs:
            direct = self.eval(float(x), t + s)
            conv = self.convolve(float(x), t, s)
            rows.append({"x": float(x), "direct": direct, "convolution": conv, "abs_diff": abs(direct - conv)})
        worst = max(r["abs_diff"] for r in rows)
        return {"beta": self.beta, "t": t, "s": s, "rows": rows, "max_abs_diff": worst,
                "tolerance": tolerance, "pass": worst < tolerance}

    def total_mass(self, t: float) -> float:
        """``int_R Z_inf(x, t) dx`` by quadrature of the density.

        Integrated in the variable ``u = x t^{-1/beta}``, where the density is
        ``Z(u, 1)``; the mass does not depend on ``t``.
        """
        if not t > 0:
            raise UsageError(f"t must be positive, got {t}")
        f = lambda u: self.eval(u, 1.0)  # noqa: E731
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return 2 * integrate.quad(f, 0, np.inf, limit=self.quad_limit)[0]

    def cdf(self, x, t: float):
        """``P(X_t <= x)`` from :meth:`mass` and symmetry."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.array([0.5 + math.copysign(0.5 * self.mass(abs(v), t), v) for v in x])
        return out


def gaussian_variance(t: float) -> float:
    return t / (2 * math.pi**2)


def cauchy_scale(t: float) -> float:
    return t / (2 * math.pi)


def erf_mass(a, t):
    return special.erf(np.pi * np.asarray(a) / np.sqrt(t))
